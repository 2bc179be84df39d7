//! Strata `Hol_{k,r}` of full maps with ramification index `r`: the linear
//! conditions `L(a,p)`, a seeded sampler, numerical codimension, degeneration
//! families and the table of harmonic components.

use nalgebra::DMatrix;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eellswood::{classify_component, ComponentDescriptor};
use crate::error::{Error, Result};
use crate::holomap::{is_full, ramification_data, wedge, Divisor, HoloMap};
use crate::matrix::ExactMatrix;
use crate::numeric::{self, rank_by_gap, C64};
use crate::poly::{poly_gcd, poly_gcd_many, Poly};
use crate::scalar::GaussianRational;

/// `L(a,p): V_k → V_{r−1}`, `u ↦ (p u′ − p′ u) mod a`, as an `r × (k+1)`
/// matrix in the monomial bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LMatrix {
    pub matrix: ExactMatrix,
    pub a: Poly,
    pub p: Poly,
    pub k: usize,
}

fn require_monic(a: &Poly) -> Result<usize> {
    match a.deg() {
        Some(r) if a.is_monic() => Ok(r),
        _ => Err(Error::PreconditionViolated(format!("divisor polynomial {a} is not monic"))),
    }
}

pub fn build_l(a: &Poly, p: &Poly, k: usize) -> Result<LMatrix> {
    let r = require_monic(a)?;
    if p.deg().is_some_and(|d| d > k) {
        return Err(Error::PreconditionViolated(format!("deg {p} exceeds {k}")));
    }
    if !poly_gcd(a, p)?.is_constant() {
        return Err(Error::NotCoprime(format!("{a} and {p} share a root")));
    }
    let dp = p.derivative();
    let mut m = ExactMatrix::zeros(r, k + 1);
    for j in 0..=k {
        let u = Poly::monomial(GaussianRational::one(), j);
        let col = (&(p * &u.derivative()) - &(&dp * &u)).rem(a)?;
        for (i, c) in col.padded_coeffs(r).into_iter().enumerate() {
            m.set(i, j, c);
        }
    }
    Ok(LMatrix { matrix: m, a: a.clone(), p: p.clone(), k })
}

/// Exact kernel basis of `L` as polynomials of degree ≤ k.
pub fn kernel_exact(l: &LMatrix) -> Vec<Poly> {
    l.matrix.kernel().into_iter().map(Poly::new).collect()
}

/// A point of `Hol_{k,r}` with its divisor polynomial `a` and, when `a` and
/// `p₀` are coprime, a basis of `ker L(a, p₀)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumPoint {
    pub a: Poly,
    pub f: HoloMap,
    pub r: usize,
    pub divisor: Divisor,
    #[serde(skip)]
    pub witness: Vec<Poly>,
}

impl StratumPoint {
    /// Checks that `f` is full, that its ramification divisor is exactly the
    /// roots of `a` (nothing at ∞), and computes the kernel witness.
    pub fn new(a: Poly, f: HoloMap) -> Result<Self> {
        require_monic(&a)?;
        if !is_full(&f) {
            return Err(Error::NotFull(format!("{f}")));
        }
        let ram = ramification_data(&f)?;
        if ram.divisor.finite_part != a || ram.divisor.infinity_mult != 0 {
            return Err(Error::PreconditionViolated(format!(
                "ramification divisor of {f} is not the zero set of {a}"
            )));
        }
        let p0 = &f.components()[0];
        let witness = match build_l(&a, p0, f.degree()) {
            Ok(l) => kernel_exact(&l),
            Err(Error::NotCoprime(_)) => Vec::new(),
            Err(e) => return Err(e),
        };
        Ok(Self { r: ram.index, divisor: ram.divisor, a, f, witness })
    }

    pub fn k(&self) -> usize {
        self.f.degree()
    }

    /// `a` and `p₀` coprime: the point lies in the chart where `p₁, p₂` are
    /// kernel vectors of `L(a, p₀)`.
    pub fn in_chart(&self) -> bool {
        poly_gcd(&self.a, &self.f.components()[0]).is_ok_and(|g| g.is_constant())
    }

    /// Re-checks the stored fields, e.g. after deserializing.
    pub fn revalidate(self) -> Result<Self> {
        let fresh = StratumPoint::new(self.a, self.f)?;
        if fresh.r != self.r || fresh.divisor != self.divisor {
            return Err(Error::InvalidInput("stored r or divisor disagrees with the map".into()));
        }
        Ok(fresh)
    }
}

/// Full maps of degree `k` with index `r` exist iff `r ≤ k − 2` and
/// `2r ≤ 3k − 6`.
pub fn check_stratum_bounds(k: usize, r: usize) -> Result<()> {
    if k < 2 || r + 2 > k || 2 * r + 6 > 3 * k {
        return Err(Error::PreconditionViolated(format!("no full maps of degree {k} with ramification index {r}")));
    }
    Ok(())
}

/// Maximum number of rejected draws before [`sample_stratum`] gives up.
pub const MAX_ATTEMPTS: usize = 1000;

fn gaussian_int(rng: &mut ChaCha8Rng, h: i64) -> GaussianRational {
    GaussianRational::from_ints(rng.gen_range(-h..=h), rng.gen_range(-h..=h))
}

fn random_poly(rng: &mut ChaCha8Rng, k: usize, h: i64) -> Poly {
    Poly::new((0..=k).map(|_| gaussian_int(rng, h)).collect())
}

fn combination(rng: &mut ChaCha8Rng, basis: &[Poly]) -> Poly {
    basis.iter().fold(Poly::zero(), |acc, b| &acc + &b.scale(&gaussian_int(rng, 3)))
}

fn attempt(rng: &mut ChaCha8Rng, k: usize, r: usize) -> std::result::Result<StratumPoint, String> {
    let roots: Vec<GaussianRational> = (0..r).map(|_| gaussian_int(rng, 2)).collect();
    let a = Poly::from_roots(&roots);
    let p0 = random_poly(rng, k, 10);
    let l = match build_l(&a, &p0, k) {
        Ok(l) => l,
        Err(e) => return Err(e.to_string()),
    };
    let basis = kernel_exact(&l);
    let p1 = combination(rng, &basis);
    let p2 = combination(rng, &basis);
    let f = HoloMap::new(p0, p1, p2).map_err(|e| e.to_string())?;
    if f.degree() != k {
        return Err(format!("degree {} instead of {k}", f.degree()));
    }
    if !is_full(&f) {
        return Err("triple is not full".into());
    }
    let ram = ramification_data(&f).map_err(|e| e.to_string())?;
    if ram.index != r {
        return Err(format!("ramification index {} instead of {r}", ram.index));
    }
    if ram.divisor.finite_part != a || ram.divisor.infinity_mult != 0 {
        return Err("divisor differs from the roots of a".into());
    }
    let witness = basis;
    Ok(StratumPoint { a, f, r, divisor: ram.divisor, witness })
}

/// Seeded draw from `Hol_{k,r}` through the kernel description: `a` with
/// small Gaussian-integer roots, `p₀` coprime to it, `p₁, p₂` random
/// combinations of `ker L(a, p₀)`, accepted only when exactly ramified at
/// the roots of `a`.
pub fn sample_stratum(k: usize, r: usize, seed: u64) -> Result<StratumPoint> {
    check_stratum_bounds(k, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::new();
    for _ in 0..MAX_ATTEMPTS {
        match attempt(&mut rng, k, r) {
            Ok(pt) => return Ok(pt),
            Err(reason) => last = reason,
        }
    }
    Err(Error::SamplingFailure { attempts: MAX_ATTEMPTS, last_reason: last })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodimensionReport {
    pub rank: usize,
    pub expected_rank: usize,
    pub gap: f64,
    pub singular_values: Vec<f64>,
    /// `3(k+1) − rank`, the dimension of the solution set in coefficient
    /// space at this point.
    pub local_dim: usize,
}

fn constraints(a: &[C64], c: &[C64], k: usize) -> Vec<C64> {
    let p: Vec<&[C64]> = (0..3).map(|i| &c[i * (k + 1)..(i + 1) * (k + 1)]).collect();
    let d: Vec<Vec<C64>> = p.iter().map(|q| numeric::derivative(q)).collect();
    let mut out = Vec::new();
    for j in [1, 2] {
        let h = numeric::poly_sub(&numeric::poly_mul(p[0], &d[j]), &numeric::poly_mul(&d[0], p[j]));
        out.extend(numeric::poly_rem_monic(&h, a));
    }
    out
}

/// Complex Jacobian of the `2r` coefficients of `h₀₁ mod a`, `h₀₂ mod a`
/// with respect to the `3(k+1)` coefficients of the triple, by central
/// differences.
pub fn constraint_jacobian(pt: &StratumPoint) -> DMatrix<C64> {
    let k = pt.k();
    let r = pt.a.deg().unwrap_or(0);
    let a = pt.a.to_complex_coeffs();
    let c: Vec<C64> = pt.f.components().iter().flat_map(|q| {
        let mut v = q.to_complex_coeffs();
        v.resize(k + 1, C64::new(0.0, 0.0));
        v
    }).collect();
    let n = c.len();
    let scale = c.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let step = 1e-3 * scale;
    let mut jac = DMatrix::from_element(2 * r, n, C64::new(0.0, 0.0));
    for j in 0..n {
        let mut plus = c.clone();
        let mut minus = c.clone();
        plus[j] += step;
        minus[j] -= step;
        let (fp, fm) = (constraints(&a, &plus, k), constraints(&a, &minus, k));
        for i in 0..2 * r {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    jac
}

/// Gap threshold for accepting a numerical rank.
pub const RANK_GAP: f64 = 1e6;

pub fn codimension_check(pt: &StratumPoint) -> Result<CodimensionReport> {
    let jac = constraint_jacobian(pt);
    let d = rank_by_gap(&jac, RANK_GAP)?;
    Ok(CodimensionReport {
        rank: d.rank,
        expected_rank: 2 * pt.a.deg().unwrap_or(0),
        gap: d.gap,
        singular_values: d.singular_values,
        local_dim: jac.ncols() - d.rank,
    })
}

/// Ramification index at one parameter value, or the degree it drops to
/// when the triple acquires a common factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyValue {
    Index { r: usize },
    DegreeDrop { degree: usize, r: Option<usize> },
    NotFull,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub description: String,
    /// `(t, value)` at generic parameters.
    pub generic: Vec<(String, FamilyValue)>,
    pub limit: FamilyValue,
    /// The limit index is at least every generic index (or the limit
    /// leaves `Hol_k`).
    pub index_jumps_up: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerationReport {
    pub k: usize,
    pub seed: u64,
    pub families: Vec<FamilyReport>,
}

fn family_value(p: [Poly; 3], k: usize) -> FamilyValue {
    let g = match poly_gcd_many(&p) {
        Ok(g) => g,
        Err(_) => return FamilyValue::NotFull,
    };
    let reduced = if g.is_constant() { p.clone() } else { p.clone().map(|q| q.exact_div(&g).expect("gcd divides")) };
    let f = match HoloMap::from_array(reduced) {
        Ok(f) => f,
        Err(_) => return FamilyValue::NotFull,
    };
    let r = if is_full(&f) { ramification_data(&f).ok().map(|d| d.index) } else { None };
    if f.degree() < k {
        return FamilyValue::DegreeDrop { degree: f.degree(), r };
    }
    match r {
        Some(r) => FamilyValue::Index { r },
        None => FamilyValue::NotFull,
    }
}

/// Evaluates the family `t ↦ f₀ + t·g` at the generic values and at `t = 0`.
pub fn evaluate_family(description: &str, f0: &[Poly; 3], g: &[Poly; 3], k: usize) -> FamilyReport {
    let ts = [(1, 1), (1, 2), (1, 7), (1, 100), (-3, 1000)];
    let generic: Vec<(String, FamilyValue)> = ts
        .iter()
        .map(|&(n, d)| {
            let t = GaussianRational::from_fractions(n, d, 0, 1);
            let p = std::array::from_fn(|i| &f0[i] + &g[i].scale(&t));
            (format!("{n}/{d}"), family_value(p, k))
        })
        .collect();
    let limit = family_value(f0.clone(), k);
    let max_generic = generic
        .iter()
        .filter_map(|(_, v)| match v {
            FamilyValue::Index { r } => Some(*r),
            _ => None,
        })
        .max();
    let index_jumps_up = match (&limit, max_generic) {
        (FamilyValue::Index { r }, Some(m)) => *r >= m,
        (FamilyValue::Index { .. }, None) => true,
        (FamilyValue::DegreeDrop { .. }, _) | (FamilyValue::NotFull, _) => true,
    };
    FamilyReport { description: description.into(), generic, limit, index_jumps_up }
}

/// Two one-parameter families in `Hol_k`: a generic perturbation of a
/// ramified map, and a family whose limit acquires a common root.
pub fn degeneration_family(k: usize, seed: u64) -> Result<DegenerationReport> {
    if k < 3 {
        return Err(Error::PreconditionViolated("degeneration families need k ≥ 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let limit = sample_stratum(k, 1, seed)?;
    let g: [Poly; 3] = std::array::from_fn(|_| random_poly(&mut rng, k, 5));
    let f0 = limit.f.components().clone();
    let mut families = vec![evaluate_family("generic perturbation of a point of Hol_{k,1}", &f0, &g, k)];

    // limit (z − c)·q with q of degree k − 1
    let q = sample_stratum(k - 1, 0, seed.wrapping_add(1))?;
    let c = gaussian_int(&mut rng, 2);
    let lin = Poly::from_roots(std::slice::from_ref(&c));
    let fz: [Poly; 3] = q.f.components().clone().map(|qi| &lin * &qi);
    families.push(evaluate_family("limit with a common root", &fz, &g, k));
    Ok(DegenerationReport { k, seed, families })
}

/// Divisor → multiset of points → divisor.
pub fn divisor_roundtrip(d: &Divisor) -> Result<Divisor> {
    Divisor::from_points(&d.points())
}

/// All `(k′, r)` with `|k′| ≤ max_k`, `r ≤ max_r`, ordered `k′ = 0, 1, …,
/// max_k, −1, …, −max_k` and by `r` within each degree.
pub fn component_table(max_k: usize, max_r: usize) -> Vec<ComponentDescriptor> {
    let max_k = max_k as i64;
    (0..=max_k)
        .chain((1..=max_k).map(|k| -k))
        .flat_map(|kp| (0..=max_r).map(move |r| classify_component(kp, r)))
        .collect()
}

pub fn table_csv(rows: &[ComponentDescriptor]) -> String {
    let mut out = String::from("k',r,E,dim,source_k\n");
    for d in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            d.harmonic_degree, d.r, d.energy, d.complex_dim, d.source_hol_degree
        ));
    }
    out
}

/// `([b], [q]) ↦ [b q]`, from `ℙV_r × Hol_{k−r}` into the triples of
/// degree ≤ k.
pub fn embed(b: &Poly, q: &HoloMap) -> Result<[Poly; 3]> {
    if b.is_zero() {
        return Err(Error::InvalidInput("zero divisor polynomial".into()));
    }
    Ok(q.components().clone().map(|qi| b * &qi))
}

/// Inverse of [`embed`]: the monic common factor and the reduced map.
pub fn factor(p: &[Poly; 3]) -> Result<(Poly, HoloMap)> {
    let b = poly_gcd_many(p)?;
    let q = p.clone().map(|pi| pi.exact_div(&b).expect("gcd divides"));
    Ok((b, HoloMap::from_array(q)?))
}

/// Index of the stratum of `ℙV_k³` containing a nonzero triple: the degree
/// of its common factor as binary forms of degree k, counting a common
/// root at ∞.
pub fn triple_stratum(p: &[Poly; 3], k: usize) -> Result<usize> {
    let g = poly_gcd_many(p)?;
    let top = p.iter().filter_map(Poly::deg).max().unwrap_or(0);
    if top > k {
        return Err(Error::InvalidInput(format!("component degree {top} exceeds {k}")));
    }
    Ok(g.deg().unwrap_or(0) + (k - top))
}

/// Membership in the open stratum: constant triple gcd and top degree
/// exactly k.
pub fn in_open_stratum(p: &[Poly; 3], k: usize) -> bool {
    triple_stratum(p, k).is_ok_and(|s| s == 0)
}

/// `a` divides every wedge component exactly.
pub fn divides_wedge(a: &Poly, f: &HoloMap) -> bool {
    wedge(f.components()).iter().all(|h| h.is_divisible_by(a))
}
