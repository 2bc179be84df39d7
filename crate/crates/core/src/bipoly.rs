//! Polynomials in `z` and `z̄` with Gaussian-rational coefficients.
//!
//! A [`BiPoly`] `Σ c_ij zⁱ z̄ʲ` is treated as a formal object in two
//! independent variables. Evaluation substitutes `z̄ = conj(z)`, which is
//! how smooth (non-holomorphic) lifts of maps into ℂP² are represented
//! exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::poly::Poly;
use crate::scalar::GaussianRational;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BiPoly {
    terms: BTreeMap<(usize, usize), GaussianRational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((usize, usize), GaussianRational)>,
    {
        let mut out = Self::zero();
        for (k, c) in terms {
            out.add_term(k, &c);
        }
        out
    }

    /// `p(z)` viewed as a bi-polynomial with no `z̄` dependence.
    pub fn holomorphic(p: &Poly) -> Self {
        Self::from_terms(p.coeffs().iter().enumerate().map(|(i, c)| ((i, 0), c.clone())))
    }

    /// `conj(p(z)) = Σ conj(cᵢ) z̄ⁱ`.
    pub fn antiholomorphic(p: &Poly) -> Self {
        Self::from_terms(p.coeffs().iter().enumerate().map(|(i, c)| ((0, i), c.conj())))
    }

    fn add_term(&mut self, k: (usize, usize), c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k).or_insert_with(GaussianRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: usize, j: usize) -> GaussianRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest power of `z` and of `z̄` appearing (0 for the zero polynomial).
    pub fn max_degrees(&self) -> (usize, usize) {
        self.terms.keys().fold((0, 0), |(a, b), &(i, j)| (a.max(i), b.max(j)))
    }

    /// Complex conjugate: swaps `(i, j) ↔ (j, i)` and conjugates coefficients.
    pub fn conj(&self) -> BiPoly {
        BiPoly { terms: self.terms.iter().map(|(&(i, j), c)| ((j, i), c.conj())).collect() }
    }

    /// Formal partial derivative in `z`.
    pub fn d_z(&self) -> BiPoly {
        BiPoly {
            terms: self
                .terms
                .iter()
                .filter(|((i, _), _)| *i > 0)
                .map(|(&(i, j), c)| ((i - 1, j), c * &GaussianRational::from_int(i as i64)))
                .collect(),
        }
    }

    /// Formal partial derivative in `z̄`.
    pub fn d_zbar(&self) -> BiPoly {
        BiPoly {
            terms: self
                .terms
                .iter()
                .filter(|((_, j), _)| *j > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c * &GaussianRational::from_int(j as i64)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> BiPoly {
        if c.is_zero() {
            return BiPoly::zero();
        }
        BiPoly { terms: self.terms.iter().map(|(&k, x)| (k, x * c)).collect() }
    }

    /// `w^a w̄^b · q(1/w, 1/w̄)` for `(a, b) ≥ max_degrees`: the same field
    /// expressed in the coordinate `w = 1/z`, up to a real-analytic scalar.
    pub fn inverted(&self, a: usize, b: usize) -> BiPoly {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), c)| {
                    assert!(i <= a && j <= b, "inversion exponents below term degree");
                    ((a - i, b - j), c.clone())
                })
                .collect(),
        }
    }

    /// Exact value at `(z, z̄ = conj z)`.
    pub fn eval(&self, z: &GaussianRational) -> GaussianRational {
        let zb = z.conj();
        self.terms.iter().fold(GaussianRational::zero(), |acc, (&(i, j), c)| {
            let mut t = c.clone();
            for _ in 0..i {
                t = &t * z;
            }
            for _ in 0..j {
                t = &t * &zb;
            }
            &acc + &t
        })
    }

    pub fn eval_f64(&self, z: Complex64) -> Complex64 {
        FloatBiPoly::from(self).eval(z)
    }
}

/// `Σᵢ uᵢ(z) · conj(vᵢ(z))`, the Hermitian pairing of two polynomial
/// vectors as an exact bi-polynomial.
pub fn hermitian_pairing(u: &[Poly; 3], v: &[Poly; 3]) -> BiPoly {
    let mut out = BiPoly::zero();
    for (a, b) in u.iter().zip(v) {
        out = &out + &(&BiPoly::holomorphic(a) * &BiPoly::antiholomorphic(b));
    }
    out
}

/// `Σᵢ uᵢ · conj(vᵢ)` for bi-polynomial vectors.
pub fn hermitian_pairing_bi(u: &[BiPoly], v: &[BiPoly]) -> BiPoly {
    u.iter().zip(v).fold(BiPoly::zero(), |acc, (a, b)| &acc + &(a * &b.conj()))
}

/// Bilinear (non-Hermitian) dot product `Σᵢ uᵢ vᵢ`.
pub fn bilinear_dot(u: &[BiPoly], v: &[BiPoly]) -> BiPoly {
    u.iter().zip(v).fold(BiPoly::zero(), |acc, (a, b)| &acc + &(a * b))
}

impl<'a> Add<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, c);
        }
        out
    }
}

impl<'a> Sub<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, &-c);
        }
        out
    }
}

impl<'a> Mul<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &rhs.terms {
                out.add_term((i + k, j + l), &(a * b));
            }
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly { terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect() }
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| {
                let mut s = format!("{c}");
                if i > 0 {
                    s.push_str(&format!("·z^{i}"));
                }
                if j > 0 {
                    s.push_str(&format!("·zb^{j}"));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiPoly({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct TermWire {
    i: usize,
    j: usize,
    c: GaussianRational,
}

#[derive(Serialize, Deserialize)]
struct BiPolyWire {
    terms: Vec<TermWire>,
}

impl Serialize for BiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BiPolyWire {
            terms: self.terms.iter().map(|(&(i, j), c)| TermWire { i, j, c: c.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = BiPolyWire::deserialize(d)?;
        Ok(BiPoly::from_terms(w.terms.into_iter().map(|t| ((t.i, t.j), t.c))))
    }
}

/// Dense float copy of a [`BiPoly`] for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct FloatBiPoly {
    // coeffs[i][j] multiplies zⁱ z̄ʲ
    coeffs: Vec<Vec<Complex64>>,
}

impl From<&BiPoly> for FloatBiPoly {
    fn from(q: &BiPoly) -> Self {
        let (a, b) = q.max_degrees();
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); b + 1]; a + 1];
        for (&(i, j), c) in q.terms() {
            coeffs[i][j] = c.to_complex();
        }
        FloatBiPoly { coeffs }
    }
}

impl FloatBiPoly {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        // Horner in z over inner Horner in z̄
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, row| {
            let inner = row.iter().rev().fold(Complex64::new(0.0, 0.0), |s, c| s * zb + c);
            acc * z + inner
        })
    }
}
