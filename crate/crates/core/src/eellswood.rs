//! The Gauss transform of a full holomorphic map: the non-minimal harmonic
//! map `φ₁(z) = f₁(z) ∩ f(z)⊥`, carried as an exact bi-polynomial lift.
//!
//! With `p` a polynomial lift of `f`, the vector
//!
//! ```text
//! V = ⟨p, p⟩ p′ − ⟨p′, p⟩ p
//! ```
//!
//! is the component of `p′` orthogonal to `p`, scaled by `|p|²` so that it
//! stays polynomial in `z` and `z̄`. It lies in the osculating plane spanned
//! by `p` and `p′` and is Hermitian-orthogonal to `p`, so its projective
//! class is `φ₁`. Both facts are checked here as exact identities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bipoly::{bilinear_dot, hermitian_pairing, hermitian_pairing_bi, BiPoly, FloatBiPoly};
use crate::error::{Error, Result};
use crate::holomap::{is_full, ramification_data, wedge_dual, HoloMap};
use crate::poly::Poly;

/// Exact lift of a harmonic map together with its provenance and the
/// integer invariants predicted for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMapRep {
    pub source: HoloMap,
    pub k: usize,
    pub r: usize,
    #[serde(rename = "deg")]
    pub predicted_degree: i64,
    #[serde(rename = "energy")]
    pub predicted_energy: i64,
    pub lift: [BiPoly; 3],
}

impl HarmonicMapRep {
    /// Predicted `E′ = deg f₁ = 2k − 2 − r`.
    pub fn predicted_e_prime(&self) -> i64 {
        2 * self.k as i64 - 2 - self.r as i64
    }

    /// Predicted `E″ = deg f = k`.
    pub fn predicted_e_doubleprime(&self) -> i64 {
        self.k as i64
    }
}

/// `⟨p,p⟩·p′ − ⟨p′,p⟩·p` for any polynomial triple.
pub fn gauss_lift(p: &[Poly; 3]) -> [BiPoly; 3] {
    let dp = p.clone().map(|q| q.derivative());
    let pp = hermitian_pairing(p, p);
    let dpp = hermitian_pairing(&dp, p);
    std::array::from_fn(|i| {
        &(&pp * &BiPoly::holomorphic(&dp[i])) - &(&dpp * &BiPoly::holomorphic(&p[i]))
    })
}

pub fn gauss_transform(f: &HoloMap) -> Result<HarmonicMapRep> {
    if !is_full(f) {
        return Err(Error::NotFull(format!("{f} lies in a projective line")));
    }
    let ram = ramification_data(f)?;
    let k = f.degree();
    let r = ram.index;
    let lift = gauss_lift(f.components());
    debug_assert!(lift.iter().any(|c| !c.is_zero()));
    Ok(HarmonicMapRep {
        source: f.clone(),
        k,
        r,
        predicted_degree: k as i64 - 2 - r as i64,
        predicted_energy: 3 * k as i64 - 2 - r as i64,
        lift,
    })
}

/// `⟨V, p⟩` as an exact bi-polynomial; zero for a correct lift.
pub fn orthogonality_defect(lift: &[BiPoly; 3], p: &[Poly; 3]) -> BiPoly {
    let ph: Vec<BiPoly> = p.iter().map(BiPoly::holomorphic).collect();
    hermitian_pairing_bi(lift, &ph)
}

/// `V · (p × p′)` (bilinear); zero iff `V` lies in the plane spanned by `p`
/// and `p′` wherever that plane is defined.
pub fn plane_defect(lift: &[BiPoly; 3], p: &[Poly; 3]) -> BiPoly {
    let n: Vec<BiPoly> = wedge_dual(p).iter().map(BiPoly::holomorphic).collect();
    bilinear_dot(lift, &n)
}

/// Both containment identities hold exactly and the lift is nonzero.
pub fn certify(rep: &HarmonicMapRep) -> bool {
    let p = rep.source.components();
    rep.lift.iter().any(|c| !c.is_zero())
        && orthogonality_defect(&rep.lift, p).is_zero()
        && plane_defect(&rep.lift, p).is_zero()
}

/// Relative size `|V| / (|p|²|p′|)` below which evaluation is refused.
pub const NEAR_SINGULAR_RATIO: f64 = 1e-8;

/// Unit vector with its largest-modulus component real and positive.
pub fn normalize_phase(v: [Complex64; 3]) -> Option<[Complex64; 3]> {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return None;
    }
    let big = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("three entries");
    let phase = big.conj() / big.norm();
    Some(v.map(|x| x * phase / n))
}

/// Normalized representative of `φ₁(z)`.
pub fn evaluate(rep: &HarmonicMapRep, z: Complex64) -> Result<[Complex64; 3]> {
    let v = rep.lift.each_ref().map(|c| c.eval_f64(z));
    let p = rep.source.eval_f64(z);
    let dp = rep.source.components().each_ref().map(|q| q.derivative().eval_f64(z));
    let norm = |u: &[Complex64; 3]| u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let scale = norm(&p).powi(2) * norm(&dp);
    let nv = norm(&v);
    if !(nv > NEAR_SINGULAR_RATIO * scale) {
        return Err(Error::NearSingular { re: z.re, im: z.im, norm: nv });
    }
    normalize_phase(v).ok_or(Error::NearSingular { re: z.re, im: z.im, norm: nv })
}

/// Evaluation that falls back on nearby points when `z` is (numerically) a
/// zero of the lift. Returns the direction and the radius actually used (0
/// when no perturbation was needed).
pub fn evaluate_regularized(rep: &HarmonicMapRep, z: Complex64) -> Result<([Complex64; 3], f64)> {
    match evaluate(rep, z) {
        Ok(v) => return Ok((v, 0.0)),
        Err(Error::NearSingular { .. }) => {}
        Err(e) => return Err(e),
    }
    let mut radius = 1e-6 * (1.0 + z.norm());
    for _ in 0..8 {
        if let Ok(v) = evaluate(rep, z + Complex64::new(radius, 0.0)) {
            return Ok((v, radius));
        }
        radius *= 10.0;
    }
    Err(Error::NearSingular { re: z.re, im: z.im, norm: 0.0 })
}

/// Fast float evaluation of a bi-polynomial lift.
#[derive(Clone, Debug)]
pub struct FloatLift {
    comps: [FloatBiPoly; 3],
}

impl FloatLift {
    pub fn new(lift: &[BiPoly; 3]) -> Self {
        Self { comps: lift.each_ref().map(FloatBiPoly::from) }
    }

    pub fn eval(&self, z: Complex64) -> [Complex64; 3] {
        self.comps.each_ref().map(|c| c.eval(z))
    }
}

/// A connected component of the non-minimal harmonic maps, labelled by its
/// degree and ramification index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDescriptor {
    pub harmonic_degree: i64,
    pub r: usize,
    pub energy: i64,
    pub complex_dim: i64,
    /// Degree `k = |k′| + r + 2` of the holomorphic maps it comes from.
    pub source_hol_degree: i64,
    /// `3k − 2r + 2`, the dimension formula for the source stratum.
    pub source_stratum_dim: i64,
    /// `r ≤ k − 2` and `2r ≤ 3k − 6`.
    pub realizable: bool,
}

pub fn classify_component(harmonic_degree: i64, r: usize) -> ComponentDescriptor {
    let a = harmonic_degree.abs();
    let ri = r as i64;
    let k = a + ri + 2;
    ComponentDescriptor {
        harmonic_degree,
        r,
        energy: 3 * a + 2 * ri + 4,
        complex_dim: 3 * a + ri + 8,
        source_hol_degree: k,
        source_stratum_dim: 3 * k - 2 * ri + 2,
        realizable: ri <= k - 2 && 2 * ri <= 3 * k - 6,
    }
}
