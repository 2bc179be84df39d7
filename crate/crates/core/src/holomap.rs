//! Holomorphic maps S² → ℂP² given by coprime polynomial triples, their
//! wedge curve `p ∧ p′`, ramification divisor and first associated curve.

use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::ExactMatrix;
use crate::numeric;
use crate::poly::{poly_gcd_many, Poly};
use crate::scalar::GaussianRational;

/// A point of `Hol_k`: the projective class of a coprime triple
/// `[p₀, p₁, p₂]`, stored by its canonical representative (the first nonzero
/// component has leading coefficient 1).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HoloMap {
    p: [Poly; 3],
    k: usize,
}

/// Ramification divisor: finite points are the roots of `finite_part`, plus
/// `infinity_mult` copies of ∞.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Divisor {
    pub finite_part: Poly,
    pub infinity_mult: usize,
}

/// First associated curve `f₁ = [q]` with `p ∧ p′ = b·q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociatedCurve {
    pub q: [Poly; 3],
    pub degree: usize,
}

/// Output of [`ramification_data`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ramification {
    pub index: usize,
    pub divisor: Divisor,
    pub curve: AssociatedCurve,
}

impl HoloMap {
    /// Validates a triple and returns its canonical representative.
    pub fn new(p0: Poly, p1: Poly, p2: Poly) -> Result<Self> {
        let p = [p0, p1, p2];
        let first = p
            .iter()
            .find(|q| !q.is_zero())
            .ok_or_else(|| Error::NotAMap("all three polynomials are zero".into()))?;
        let g = poly_gcd_many(&p)?;
        if !g.is_constant() {
            return Err(Error::NotAMap(format!("components share the common factor {g}")));
        }
        let s = first.leading().expect("nonzero").inv()?;
        let p = p.map(|q| q.scale(&s));
        let k = p.iter().filter_map(Poly::deg).max().unwrap_or(0);
        Ok(Self { p, k })
    }

    pub fn from_array(p: [Poly; 3]) -> Result<Self> {
        let [a, b, c] = p;
        Self::new(a, b, c)
    }

    pub fn components(&self) -> &[Poly; 3] {
        &self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    /// `3 × (k+1)` matrix of coefficients.
    pub fn coefficient_matrix(&self) -> ExactMatrix {
        let rows = self.p.iter().map(|q| q.padded_coeffs(self.k + 1)).collect();
        ExactMatrix::from_rows(rows, self.k + 1).expect("uniform rows")
    }

    pub fn eval_f64(&self, z: Complex64) -> [Complex64; 3] {
        [self.p[0].eval_f64(z), self.p[1].eval_f64(z), self.p[2].eval_f64(z)]
    }

    /// The same map in the coordinate `w = 1/z`: `wᵏ p(1/w)`.
    pub fn at_infinity(&self) -> HoloMap {
        let k = self.k;
        HoloMap::from_array(self.p.clone().map(|q| q.reversed(k)))
            .expect("reversal of a coprime triple of degree k stays coprime")
    }
}

impl fmt::Display for HoloMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.p[0], self.p[1], self.p[2])
    }
}

impl fmt::Debug for HoloMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HoloMap(k={}, {self})", self.k)
    }
}

pub fn validate(p0: Poly, p1: Poly, p2: Poly) -> Result<HoloMap> {
    HoloMap::new(p0, p1, p2)
}

/// Full iff `p₀, p₁, p₂` are linearly independent (exact rank 3).
pub fn is_full(f: &HoloMap) -> bool {
    f.coefficient_matrix().rank() == 3
}

/// `p ∧ p′` in the component order `(01, 02, 12)`.
pub fn wedge(p: &[Poly; 3]) -> [Poly; 3] {
    let d = [p[0].derivative(), p[1].derivative(), p[2].derivative()];
    let w = |i: usize, j: usize| &(&p[i] * &d[j]) - &(&d[i] * &p[j]);
    [w(0, 1), w(0, 2), w(1, 2)]
}

pub fn wedge_curve(f: &HoloMap) -> [Poly; 3] {
    wedge(f.components())
}

/// The cross product `p × p′ = (h₁₂, −h₀₂, h₀₁)`: the Hodge dual of the wedge,
/// orthogonal under the bilinear dot product to every vector in the span
/// of `p` and `p′`.
pub fn wedge_dual(p: &[Poly; 3]) -> [Poly; 3] {
    let [h01, h02, h12] = wedge(p);
    [h12, -&h02, h01]
}

/// Ramification index, divisor and first associated curve of a full map.
pub fn ramification_data(f: &HoloMap) -> Result<Ramification> {
    if !is_full(f) {
        return Err(Error::NotFull(format!("{f} lies in a projective line")));
    }
    let h = wedge_curve(f);
    if h.iter().all(Poly::is_zero) {
        return Err(Error::NotFull("p ∧ p′ vanishes identically".into()));
    }
    let b = poly_gcd_many(&h)?;
    let q = h.clone().map(|hi| hi.exact_div(&b).expect("gcd divides each component"));
    let k = f.degree();
    let top = 2 * k - 2;
    let max_q = q.iter().filter_map(Poly::deg).max().expect("some component nonzero");
    let index = top - max_q;
    let deg_b = b.deg().expect("gcd is nonzero");
    let divisor = Divisor { finite_part: b, infinity_mult: index - deg_b };
    Ok(Ramification { index, divisor, curve: AssociatedCurve { q, degree: max_q } })
}

/// Exact 3 × 3 matrix acting on ℂ³.
pub type Matrix3 = [[GaussianRational; 3]; 3];

pub fn matrix3_det(a: &Matrix3) -> GaussianRational {
    let m = |i: usize, j: usize| &a[i][j];
    let t0 = m(0, 0) * &(&(m(1, 1) * m(2, 2)) - &(m(1, 2) * m(2, 1)));
    let t1 = m(0, 1) * &(&(m(1, 0) * m(2, 2)) - &(m(1, 2) * m(2, 0)));
    let t2 = m(0, 2) * &(&(m(1, 0) * m(2, 1)) - &(m(1, 1) * m(2, 0)));
    &(&t0 - &t1) + &t2
}

pub fn matrix3_from_ints(a: [[(i64, i64); 3]; 3]) -> Matrix3 {
    a.map(|row| row.map(|(x, y)| GaussianRational::from_ints(x, y)))
}

/// `[A·p]` for invertible `A`.
pub fn apply_automorphism(a: &Matrix3, f: &HoloMap) -> Result<HoloMap> {
    if matrix3_det(a).is_zero() {
        return Err(Error::SingularMatrix);
    }
    let p = f.components();
    let row = |i: usize| {
        (0..3).fold(Poly::zero(), |acc, j| &acc + &p[j].scale(&a[i][j]))
    };
    HoloMap::new(row(0), row(1), row(2))
}

/// Conjugates all coefficients: the holomorphic model of `z ↦ conj f(conj z)`.
pub fn mirror(f: &HoloMap) -> HoloMap {
    HoloMap::from_array(f.components().clone().map(|q| q.conj_coeffs()))
        .expect("conjugation preserves coprimality")
}

/// Checks `p₁(p₀p₂′ − p₀′p₂) − p₂(p₀p₁′ − p₀′p₁) = p₀(p₁p₂′ − p₁′p₂)` exactly.
pub fn dependency_identity_check(p: &[Poly; 3]) -> bool {
    let [h01, h02, h12] = wedge(p);
    &(&p[1] * &h02) - &(&p[2] * &h01) == &p[0] * &h12
}

/// A point of the divisor viewed in the symmetric product of the sphere.
#[derive(Clone, Debug, PartialEq)]
pub enum DivisorPoint {
    /// A finite point with an exact value when one is known.
    Finite { exact: Option<GaussianRational>, approx: Complex64 },
    Infinity,
}

impl Divisor {
    pub fn empty() -> Self {
        Divisor { finite_part: Poly::one(), infinity_mult: 0 }
    }

    /// Builds a divisor from a polynomial, normalizing it to be monic.
    pub fn new(finite_part: &Poly, infinity_mult: usize) -> Result<Self> {
        Ok(Divisor { finite_part: finite_part.monic()?, infinity_mult })
    }

    pub fn total_degree(&self) -> usize {
        self.finite_part.deg().unwrap_or(0) + self.infinity_mult
    }

    /// Float approximations of the finite points, with multiplicity, sorted
    /// lexicographically by (re, im).
    pub fn roots_approx(&self) -> Vec<Complex64> {
        let mut r = numeric::roots(&self.finite_part.to_complex_coeffs());
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        r
    }

    /// Exact Gaussian-rational roots when the finite part splits over ℚ(i)
    /// into roots of denominator at most `max_den`.
    pub fn exact_roots(&self, max_den: i64) -> Option<Vec<GaussianRational>> {
        exact_linear_factors(&self.finite_part, max_den)
    }

    /// The multiset of points, with exact finite points where recoverable.
    pub fn points(&self) -> Vec<DivisorPoint> {
        let mut pts: Vec<DivisorPoint> = match self.exact_roots(64) {
            Some(rs) => rs
                .into_iter()
                .map(|r| DivisorPoint::Finite { approx: r.to_complex(), exact: Some(r) })
                .collect(),
            None => self
                .roots_approx()
                .into_iter()
                .map(|z| DivisorPoint::Finite { exact: None, approx: z })
                .collect(),
        };
        pts.extend(std::iter::repeat_n(DivisorPoint::Infinity, self.infinity_mult));
        pts
    }

    /// Inverse of [`Divisor::points`]: the monic polynomial whose zeros are
    /// the finite points, with ∞ counted separately.
    pub fn from_points(points: &[DivisorPoint]) -> Result<Self> {
        let mut finite = Poly::one();
        let mut inf = 0;
        for pt in points {
            match pt {
                DivisorPoint::Infinity => inf += 1,
                DivisorPoint::Finite { exact: Some(r), .. } => {
                    finite = &finite * &Poly::from_roots(std::slice::from_ref(r));
                }
                DivisorPoint::Finite { exact: None, approx } => {
                    let r = GaussianRational::from_complex(*approx)?;
                    finite = &finite * &Poly::from_roots(&[r]);
                }
            }
        }
        Ok(Divisor { finite_part: finite, infinity_mult: inf })
    }
}

/// Splits `p` into exact linear factors by rounding float roots to nearby
/// Gaussian rationals and confirming each by exact division.
pub fn exact_linear_factors(p: &Poly, max_den: i64) -> Option<Vec<GaussianRational>> {
    let mut rest = p.monic().ok()?;
    let mut found = Vec::new();
    while rest.deg()? > 0 {
        let approx = numeric::roots(&rest.to_complex_coeffs());
        let mut hit = None;
        'search: for z in approx {
            for den in 1..=max_den {
                let d = den as f64;
                let cand = GaussianRational::new(
                    BigRational::new(((z.re * d).round() as i64).into(), den.into()),
                    BigRational::new(((z.im * d).round() as i64).into(), den.into()),
                );
                if rest.eval(&cand).is_zero() {
                    hit = Some(cand);
                    break 'search;
                }
            }
        }
        let r = hit?;
        rest = rest.exact_div(&Poly::from_roots(std::slice::from_ref(&r))).ok()?;
        found.push(r);
    }
    found.sort_by(|a, b| {
        let (x, y) = (a.to_complex(), b.to_complex());
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    Some(found)
}

// ---- wire formats ----

#[derive(Serialize, Deserialize)]
struct HoloMapWire {
    k: usize,
    p: [Poly; 3],
}

impl Serialize for HoloMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HoloMapWire { k: self.k, p: self.p.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HoloMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = HoloMapWire::deserialize(d)?;
        let f = HoloMap::from_array(w.p).map_err(serde::de::Error::custom)?;
        if f.k != w.k {
            return Err(serde::de::Error::custom(format!(
                "declared k = {} but the polynomials have degree {}",
                w.k, f.k
            )));
        }
        Ok(f)
    }
}

#[derive(Serialize, Deserialize)]
struct DivisorWire {
    finite: Poly,
    inf: usize,
    #[serde(default)]
    roots_approx: Vec<[f64; 2]>,
}

impl Serialize for Divisor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DivisorWire {
            finite: self.finite_part.clone(),
            inf: self.infinity_mult,
            roots_approx: self.roots_approx().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Divisor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = DivisorWire::deserialize(d)?;
        if w.finite.is_zero() {
            return Err(serde::de::Error::custom("divisor polynomial must be nonzero"));
        }
        Divisor::new(&w.finite, w.inf).map_err(serde::de::Error::custom)
    }
}

impl Serialize for AssociatedCurve {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct W<'a> {
            degree: usize,
            q: &'a [Poly; 3],
        }
        W { degree: self.degree, q: &self.q }.serialize(s)
    }
}

pub fn identity3() -> Matrix3 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { GaussianRational::one() } else { GaussianRational::zero() })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    fn map(a: &[i64], b: &[i64], c: &[i64]) -> HoloMap {
        HoloMap::new(p(a), p(b), p(c)).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert_eq!(map(&[1], &[0, 1], &[0, 0, 1]).degree(), 2);
        assert!(matches!(
            HoloMap::new(p(&[0, 1]), p(&[0, 0, 1]), p(&[0, 0, 0, 1])),
            Err(Error::NotAMap(_))
        ));
        assert_eq!(map(&[1, 0, 0, 1], &[0, 0, 1], &[0, 0, 0, 1]).degree(), 3);
        assert!(matches!(HoloMap::new(Poly::zero(), Poly::zero(), Poly::zero()), Err(Error::NotAMap(_))));
    }

    #[test]
    fn canonical_representative() {
        let f = HoloMap::new(p(&[2]), p(&[0, 4]), p(&[0, 0, 6])).unwrap();
        assert_eq!(f, map(&[1], &[0, 2], &[0, 0, 3]));
        let g = HoloMap::new(Poly::zero(), p(&[3, 3]), p(&[1])).unwrap();
        assert_eq!(g.components()[1], p(&[1, 1]));
    }

    #[test]
    fn fullness_examples() {
        assert!(is_full(&map(&[1], &[0, 1], &[0, 0, 1])));
        assert!(!is_full(&map(&[1], &[0, 1], &[1, 1])));
        assert!(is_full(&map(&[1, 0, 0, 1], &[0, 0, 1], &[0, 0, 0, 1])));
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(wedge_curve(&map(&[1], &[0, 1], &[0, 0, 1])), [p(&[1]), p(&[0, 2]), p(&[0, 0, 1])]);
        assert_eq!(
            wedge_curve(&map(&[1], &[0, 1], &[0, 0, 0, 1])),
            [p(&[1]), p(&[0, 0, 3]), p(&[0, 0, 0, 2])]
        );
        assert_eq!(
            wedge_curve(&map(&[1], &[0, 0, 1], &[0, 0, 0, 0, 1])),
            [p(&[0, 2]), p(&[0, 0, 0, 4]), p(&[0, 0, 0, 0, 0, 2])]
        );
    }

    #[test]
    fn ramification_examples() {
        let r = ramification_data(&map(&[1], &[0, 1], &[0, 0, 1])).unwrap();
        assert_eq!(r.index, 0);
        assert_eq!(r.divisor, Divisor::empty());
        assert_eq!(r.curve.q, [p(&[1]), p(&[0, 2]), p(&[0, 0, 1])]);
        assert_eq!(r.curve.degree, 2);

        let r = ramification_data(&map(&[1], &[0, 1], &[0, 0, 0, 1])).unwrap();
        assert_eq!(r.index, 1);
        assert_eq!(r.divisor, Divisor { finite_part: Poly::one(), infinity_mult: 1 });

        let r = ramification_data(&map(&[1], &[0, 0, 1], &[0, 0, 0, 0, 1])).unwrap();
        assert_eq!(r.index, 2);
        assert_eq!(r.divisor, Divisor { finite_part: p(&[0, 1]), infinity_mult: 1 });
        assert_eq!(r.curve.q, [p(&[2]), p(&[0, 0, 4]), p(&[0, 0, 0, 0, 2])]);
        assert_eq!(r.divisor.total_degree(), r.index);

        assert!(matches!(ramification_data(&map(&[1], &[0, 1], &[1, 1])), Err(Error::NotFull(_))));
    }

    #[test]
    fn automorphism_examples() {
        let f = map(&[1], &[0, 1], &[0, 0, 1]);
        assert_eq!(apply_automorphism(&identity3(), &f).unwrap(), f);

        let diag = matrix3_from_ints([[(1, 0), (0, 0), (0, 0)], [(0, 0), (1, 0), (0, 0)], [(0, 0), (0, 0), (2, 0)]]);
        let g = apply_automorphism(&diag, &f).unwrap();
        assert_eq!(g, map(&[1], &[0, 1], &[0, 0, 2]));
        assert_eq!(ramification_data(&g).unwrap().index, 0);

        let swap = matrix3_from_ints([[(0, 0), (1, 0), (0, 0)], [(1, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (1, 0)]]);
        let f3 = map(&[1], &[0, 1], &[0, 0, 0, 1]);
        let g3 = apply_automorphism(&swap, &f3).unwrap();
        assert_eq!(g3, map(&[0, 1], &[1], &[0, 0, 0, 1]));
        assert_eq!(ramification_data(&g3).unwrap().divisor, ramification_data(&f3).unwrap().divisor);

        let singular = matrix3_from_ints([[(1, 0), (0, 0), (0, 0)], [(1, 0), (0, 0), (0, 0)], [(0, 0), (0, 0), (1, 0)]]);
        assert_eq!(apply_automorphism(&singular, &f), Err(Error::SingularMatrix));
    }

    #[test]
    fn mirror_examples() {
        let f = map(&[1], &[0, 1], &[0, 0, 1]);
        assert_eq!(mirror(&f), f);
        let g = HoloMap::new(Poly::from_gaussian_ints(&[(0, 1)]), p(&[0, 1]), p(&[0, 0, 1])).unwrap();
        let expect = HoloMap::new(Poly::from_gaussian_ints(&[(0, -1)]), p(&[0, 1]), p(&[0, 0, 1])).unwrap();
        assert_eq!(mirror(&g), expect);
        assert_eq!(mirror(&mirror(&g)), g);
    }

    #[test]
    fn dependency_identity_examples() {
        assert!(dependency_identity_check(&[p(&[1]), p(&[0, 1]), p(&[0, 0, 1])]));
        assert!(dependency_identity_check(&[p(&[1, 0, 0, 1]), p(&[0, 0, 1]), p(&[0, 0, 0, 1])]));
        assert!(dependency_identity_check(&[
            Poly::from_gaussian_ints(&[(3, 1), (0, -2), (5, 0), (1, 1), (0, 0), (-4, 7)]),
            Poly::from_gaussian_ints(&[(1, 0), (2, 2), (0, 0), (-1, 0), (6, -3), (2, 0)]),
            Poly::from_gaussian_ints(&[(0, 9), (1, 0), (-7, 1), (0, 0), (0, 0), (1, -1)]),
        ]));
    }

    #[test]
    fn divisor_points_round_trip() {
        let d = Divisor::new(&p(&[-1, 0, 1]), 0).unwrap();
        let pts = d.points();
        assert_eq!(pts.len(), 2);
        assert_eq!(Divisor::from_points(&pts).unwrap(), d);

        let inf = Divisor { finite_part: Poly::one(), infinity_mult: 2 };
        assert_eq!(inf.points(), vec![DivisorPoint::Infinity, DivisorPoint::Infinity]);
        assert_eq!(Divisor::from_points(&inf.points()).unwrap(), inf);

        let i = GaussianRational::i();
        let dbl = Divisor::new(&Poly::from_roots(&[i.clone(), i.clone()]), 0).unwrap();
        let pts = dbl.points();
        assert!(pts.iter().all(|x| matches!(x, DivisorPoint::Finite { exact: Some(r), .. } if *r == i)));
        assert_eq!(Divisor::from_points(&pts).unwrap(), dbl);
    }

    #[test]
    fn holomap_json_rejects_wrong_degree() {
        let f = map(&[1], &[0, 1], &[0, 0, 1]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<HoloMap>(&s).unwrap(), f);
        let bad = s.replacen("\"k\":2", "\"k\":3", 1);
        assert!(serde_json::from_str::<HoloMap>(&bad).is_err());
    }
}
