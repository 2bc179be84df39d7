//! Floating-point helpers: polynomial roots, singular values and numerical
//! rank.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Horner evaluation of ascending-power coefficients.
pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a)
}

pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs.iter().enumerate().skip(1).map(|(i, &a)| a * i as f64).collect()
}

pub fn trim(mut v: Vec<C64>) -> Vec<C64> {
    while v.last().is_some_and(|x| *x == c(0.0, 0.0)) {
        v.pop();
    }
    v
}

pub fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() - b.get(i).copied().unwrap_or_default())
        .collect()
}

/// Remainder of `p` modulo a monic `a`, returned with exactly `deg a`
/// coefficients.
pub fn poly_rem_monic(p: &[C64], a: &[C64]) -> Vec<C64> {
    let r = a.len() - 1;
    let mut rem = p.to_vec();
    if rem.len() > r {
        for i in (r..rem.len()).rev() {
            let q = rem[i];
            if q == c(0.0, 0.0) {
                continue;
            }
            for (j, &aj) in a.iter().enumerate() {
                rem[i - r + j] -= q * aj;
            }
        }
    }
    rem.resize(r, c(0.0, 0.0));
    rem
}

/// `p ∧ p′` of a float triple in the order `(01, 02, 12)`.
pub fn float_wedge(p: &[Vec<C64>; 3]) -> [Vec<C64>; 3] {
    let d = [derivative(&p[0]), derivative(&p[1]), derivative(&p[2])];
    let w = |i: usize, j: usize| poly_sub(&poly_mul(&p[i], &d[j]), &poly_mul(&d[i], &p[j]));
    [w(0, 1), w(0, 2), w(1, 2)]
}

/// Roots of the lowest-degree nonzero component at which every other
/// component is below `tol` relative to its coefficient size.
pub fn approx_common_roots(h: &[Vec<C64>], tol: f64) -> Vec<C64> {
    let hs: Vec<Vec<C64>> = h.iter().map(|q| trim(q.clone())).filter(|q| !q.is_empty()).collect();
    let Some(base) = hs.iter().min_by_key(|q| q.len()) else {
        return Vec::new();
    };
    let small = |q: &[C64], z: C64| {
        let scale: f64 = q.iter().map(|c| c.norm()).sum::<f64>() * z.norm().max(1.0).powi(q.len() as i32);
        horner(q, z).norm() <= tol * scale
    };
    roots(base).into_iter().filter(|&z| hs.iter().all(|q| small(q, z))).collect()
}

/// All complex roots (with multiplicity) by the Aberth–Ehrlich iteration.
/// Leading zero coefficients are trimmed; constants have no roots.
pub fn roots(coeffs: &[C64]) -> Vec<C64> {
    let p = trim(coeffs.to_vec());
    if p.len() <= 1 {
        return Vec::new();
    }
    let n = p.len() - 1;
    let lead = p[n];
    let monic: Vec<C64> = p.iter().map(|&a| a / lead).collect();
    let dp = derivative(&monic);

    // Cauchy bound gives the radius of the initial circle
    let radius = 1.0 + monic[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            C64::from_polar(radius * 0.5, t)
        })
        .collect();

    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let pv = horner(&monic, z[i]);
            if pv == c(0.0, 0.0) {
                continue;
            }
            let ratio = pv / horner(&dp, z[i]);
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let step = ratio / (1.0 - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Result of a gap-based numerical rank decision.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    pub gap: f64,
    pub singular_values: Vec<f64>,
}

/// Numerical rank from the largest ratio between consecutive singular values.
///
/// The sequence is extended by a noise floor `ε·max(m,n)·σ₁`, so that a full
/// rank matrix shows its gap against round-off. The decision is accepted only
/// when the largest gap exceeds `min_gap`.
pub fn rank_by_gap(m: &DMatrix<C64>, min_gap: f64) -> Result<RankDecision> {
    let s = singular_values(m);
    let Some(&top) = s.first() else {
        return Ok(RankDecision { rank: 0, gap: f64::INFINITY, singular_values: s });
    };
    if top == 0.0 {
        return Ok(RankDecision { rank: 0, gap: f64::INFINITY, singular_values: s });
    }
    let floor = f64::EPSILON * (m.nrows().max(m.ncols()) as f64) * top;
    let mut ext: Vec<f64> = s.iter().map(|&x| x.max(floor * 1e-3)).collect();
    ext.push(floor);
    let (rank, gap) = (0..s.len())
        .map(|i| (i + 1, ext[i] / ext[i + 1]))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if gap > min_gap {
        Ok(RankDecision { rank, gap, singular_values: s })
    } else {
        Err(Error::IndeterminateRank { gap })
    }
}

/// Multiplication matrix of the map `(u₀, u₁, u₂) ↦ Σ uᵢ hᵢ` where the `hᵢ`
/// are binary forms of degree `n` (coefficient vectors of length ≤ `n + 1`)
/// and the `uᵢ` range over forms of degree `n − 1`. Its rank is `2n − g` with
/// `g` the degree of the homogeneous gcd, which counts a common root at ∞
/// (all `hᵢ` of degree `< n`) like any finite one.
pub fn forms_sylvester(h: &[Vec<C64>], n: usize) -> DMatrix<C64> {
    assert!(n >= 1, "forms of degree 0 have no Sylvester matrix");
    let rows = 2 * n;
    let cols = h.len() * n;
    let mut m = DMatrix::from_element(rows, cols, c(0.0, 0.0));
    for (b, hi) in h.iter().enumerate() {
        assert!(hi.len() <= n + 1, "form exceeds the stated degree");
        for shift in 0..n {
            for (k, &v) in hi.iter().enumerate() {
                m[(k + shift, b * n + shift)] = v;
            }
        }
    }
    m
}


/// `|h(z)|` relative to `Σ |coefficient| · |z|ʲ`, summed over components.
pub fn relative_size(h: &[Vec<C64>], z: C64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for q in h {
        num += horner(q, z).norm_sqr();
        let mut pw = 1.0;
        let mut s = 0.0;
        for a in q {
            s += a.norm() * pw;
            pw *= z.norm();
        }
        den += s * s;
    }
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}

/// Local minimizers of `|h(z)|` started from the roots of every component,
/// by Gauss–Newton, kept when [`relative_size`] is below `ratio`. Points
/// closer than `1e-6 (1 + |z|)` are merged.
pub fn near_common_zeros(h: &[Vec<C64>], ratio: f64) -> Vec<C64> {
    let hs: Vec<Vec<C64>> = h.iter().map(|q| trim(q.clone())).filter(|q| !q.is_empty()).collect();
    let ds: Vec<Vec<C64>> = hs.iter().map(|q| derivative(q)).collect();
    let mut out: Vec<C64> = Vec::new();
    for q in &hs {
        for mut z in roots(q) {
            for _ in 0..50 {
                let mut num = c(0.0, 0.0);
                let mut den = 0.0;
                for (q, d) in hs.iter().zip(&ds) {
                    let dv = horner(d, z);
                    num += dv.conj() * horner(q, z);
                    den += dv.norm_sqr();
                }
                if !(den > 0.0) {
                    break;
                }
                let step = num / den;
                z -= step;
                if !(step.norm() > 1e-15 * (1.0 + z.norm())) {
                    break;
                }
            }
            if z.is_finite()
                && relative_size(&hs, z) < ratio
                && out.iter().all(|w| (w - z).norm() > 1e-6 * (1.0 + z.norm()))
            {
                out.push(z);
            }
        }
    }
    out
}
