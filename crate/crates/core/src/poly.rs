//! Dense univariate polynomials in `z` over the Gaussian rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::GaussianRational;

/// Degree of a polynomial. The zero polynomial has degree `NegInfinity`,
/// which orders below every finite degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// `Σ coeffs[i] zⁱ`, stored without trailing zeros. The zero polynomial is
/// the empty coefficient vector.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<GaussianRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::new(vec![c])
    }

    /// `c zⁿ`.
    pub fn monomial(c: GaussianRational, n: usize) -> Self {
        let mut coeffs = vec![GaussianRational::zero(); n + 1];
        coeffs[n] = c;
        Self::new(coeffs)
    }

    /// The identity polynomial `z`.
    pub fn z() -> Self {
        Self::monomial(GaussianRational::one(), 1)
    }

    /// Integer coefficients in ascending powers.
    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| GaussianRational::from_int(x)).collect())
    }

    /// Gaussian-integer coefficients `(re, im)` in ascending powers.
    pub fn from_gaussian_ints(c: &[(i64, i64)]) -> Self {
        Self::new(c.iter().map(|&(a, b)| GaussianRational::from_ints(a, b)).collect())
    }

    /// Monic polynomial `Π (z − rᵢ)`.
    pub fn from_roots(roots: &[GaussianRational]) -> Self {
        roots.iter().fold(Poly::one(), |acc, r| {
            &acc * &Poly::new(vec![-r, GaussianRational::one()])
        })
    }

    /// Exact conversion of float coefficients (binary values, no rounding).
    pub fn from_complex(c: &[Complex64]) -> Result<Self> {
        Ok(Self::new(c.iter().map(|&z| GaussianRational::from_complex(z)).collect::<Result<_>>()?))
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    /// Coefficient of `zⁱ` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> GaussianRational {
        self.coeffs.get(i).cloned().unwrap_or_else(GaussianRational::zero)
    }

    /// Coefficients padded with zeros to length `n`. Truncates nothing: a
    /// polynomial of degree ≥ n yields its full coefficient vector.
    pub fn padded_coeffs(&self, n: usize) -> Vec<GaussianRational> {
        let mut v = self.coeffs.clone();
        if v.len() < n {
            v.resize(n, GaussianRational::zero());
        }
        v
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::NegInfinity,
            n => Degree::Finite(n - 1),
        }
    }

    /// Degree with the zero polynomial mapped to `None`.
    pub fn deg(&self) -> Option<usize> {
        self.degree().finite()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True for nonzero constants and for zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Option<&GaussianRational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * &GaussianRational::from_int(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &GaussianRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Result<Poly> {
        let lc = self.leading().ok_or(Error::DivisionByZero)?;
        Ok(self.scale(&lc.inv()?))
    }

    /// Conjugates every coefficient: `z ↦ conj(p(conj z))`.
    pub fn conj_coeffs(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(GaussianRational::conj).collect() }
    }

    /// `zⁿ p(1/z)`. Requires `n ≥ deg p`.
    pub fn reversed(&self, n: usize) -> Poly {
        assert!(self.deg().is_none_or(|d| d <= n), "reversal degree below polynomial degree");
        let mut c = self.padded_coeffs(n + 1);
        c.reverse();
        Poly::new(c)
    }

    /// Euclidean division `self = q·a + r` with `deg r < deg a`.
    pub fn divrem(&self, a: &Poly) -> Result<(Poly, Poly)> {
        let da = a.deg().ok_or(Error::DivisionByZero)?;
        let lc_inv = a.leading().expect("nonzero divisor").inv()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= da {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![GaussianRational::zero(); rem.len() - da];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + da] * &lc_inv;
            if c.is_zero() {
                continue;
            }
            for (j, aj) in a.coeffs.iter().enumerate() {
                let t = &c * aj;
                rem[i + j] -= &t;
            }
            quot[i] = c;
        }
        rem.truncate(da);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, a: &Poly) -> Result<Poly> {
        Ok(self.divrem(a)?.1)
    }

    /// Exact quotient; errors when `a` does not divide `self`.
    pub fn exact_div(&self, a: &Poly) -> Result<Poly> {
        let (q, r) = self.divrem(a)?;
        if !r.is_zero() {
            return Err(Error::InvalidInput(format!("{a} does not divide {self}")));
        }
        Ok(q)
    }

    /// Whether `a` divides `self` exactly. The zero polynomial divides only zero.
    pub fn is_divisible_by(&self, a: &Poly) -> bool {
        if a.is_zero() {
            return self.is_zero();
        }
        self.rem(a).map(|r| r.is_zero()).unwrap_or(false)
    }

    pub fn eval(&self, z: &GaussianRational) -> GaussianRational {
        self.coeffs.iter().rev().fold(GaussianRational::zero(), |acc, c| &(&acc * z) + c)
    }

    pub fn to_complex_coeffs(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(GaussianRational::to_complex).collect()
    }

    pub fn eval_f64(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_complex())
    }
}

/// Monic greatest common divisor.
pub fn poly_gcd(p: &Poly, q: &Poly) -> Result<Poly> {
    if p.is_zero() && q.is_zero() {
        return Err(Error::ZeroGcd);
    }
    let (mut a, mut b) = (p.clone(), q.clone());
    if a.degree() < b.degree() {
        std::mem::swap(&mut a, &mut b);
    }
    // normalizing each remainder keeps coefficient growth in check
    while !b.is_zero() {
        let r = a.rem(&b)?;
        a = b;
        b = if r.is_zero() { r } else { r.monic()? };
    }
    a.monic()
}

/// Monic gcd of several polynomials, skipping zeros. Errors when all are zero.
pub fn poly_gcd_many<'a, I>(polys: I) -> Result<Poly>
where
    I: IntoIterator<Item = &'a Poly>,
{
    let mut acc: Option<Poly> = None;
    for p in polys {
        if p.is_zero() {
            continue;
        }
        acc = Some(match acc {
            None => p.monic()?,
            Some(g) if g.is_constant() => return Ok(g),
            Some(g) => poly_gcd(&g, p)?,
        });
    }
    acc.ok_or(Error::ZeroGcd)
}

/// `p = q·a + r` with `deg r < deg a`.
pub fn poly_divrem(p: &Poly, a: &Poly) -> Result<(Poly, Poly)> {
    p.divrem(a)
}

pub fn poly_derivative(p: &Poly) -> Poly {
    p.derivative()
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect())
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect())
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![GaussianRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += &(a * b);
                }
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c.is_one()) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{c}z")?,
                (_, true) => write!(f, "z^{i}")?,
                (_, false) => write!(f, "{c}z^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

#[derive(Serialize, Deserialize)]
struct PolyWire {
    coeffs: Vec<GaussianRational>,
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyWire { coeffs: self.coeffs.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        // a bare coefficient array is accepted as well
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Input {
            Wire(PolyWire),
            Bare(Vec<GaussianRational>),
        }
        Ok(Poly::new(match Input::deserialize(d)? {
            Input::Wire(w) => w.coeffs,
            Input::Bare(c) => c,
        }))
    }
}
