//! Numeric paths inside a stratum `Hol_{k,r}`.
//!
//! A path interpolates `a` and `p₀` linearly and keeps `p₁, p₂` in the kernel
//! of `L(a_t, p₀_t)` by least-squares projection of the interpolated
//! endpoints. Interior points have float coefficients; membership in the
//! stratum is then decided by the singular values of the Sylvester-type
//! matrix of the wedge components.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, forms_sylvester, singular_values, C64};
use crate::quadrature::{integrate_invariants, snap, ChartedField, QuadratureConfig, SNAP_TOLERANCE};
use crate::strata::StratumPoint;

/// Relative size below which a singular value counts as zero.
pub const INDEX_THRESHOLD: f64 = 1e-8;

/// Singular values behind the numeric index decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexCheck {
    /// Number of singular values below `INDEX_THRESHOLD × σ₁`.
    pub index: usize,
    pub largest: f64,
    /// The smallest few singular values, ascending.
    pub tail: Vec<f64>,
}

impl IndexCheck {
    /// The `r` smallest singular values are negligible and the next is not.
    pub fn has_index(&self, r: usize) -> bool {
        self.index == r
    }
}

/// Numeric ramification index of a float triple of degree ≤ k: the number
/// of common roots (with ∞) of `p ∧ p′` as binary forms of degree `2k − 2`.
pub fn numeric_index(p: &[Vec<C64>; 3], k: usize) -> IndexCheck {
    let n = 2 * k - 2;
    let h: Vec<Vec<C64>> = numeric::float_wedge(p)
        .into_iter()
        .map(|mut v| {
            v.truncate(n + 1);
            v
        })
        .collect();
    let s = singular_values(&forms_sylvester(&h, n));
    let largest = s.first().copied().unwrap_or(0.0);
    let index = s.iter().rev().take_while(|&&x| x < INDEX_THRESHOLD * largest).count();
    let tail = s.iter().rev().take(index + 2).copied().collect();
    IndexCheck { index, largest, tail }
}

/// Ratio of the smallest to the largest singular value of the 3 × (k+1)
/// coefficient matrix.
pub fn fullness_ratio(p: &[Vec<C64>; 3], k: usize) -> f64 {
    let m = DMatrix::from_fn(3, k + 1, |i, j| p[i].get(j).copied().unwrap_or_default());
    let s = singular_values(&m);
    if s.len() < 3 || s[0] == 0.0 {
        return 0.0;
    }
    s[2] / s[0]
}

/// Float `L(a, p)` as an `r × (k+1)` matrix.
pub fn float_l(a: &[C64], p: &[C64], k: usize) -> DMatrix<C64> {
    let r = a.len() - 1;
    let dp = numeric::derivative(p);
    let mut m = DMatrix::from_element(r, k + 1, C64::new(0.0, 0.0));
    for j in 0..=k {
        let mut u = vec![C64::new(0.0, 0.0); j + 1];
        u[j] = C64::new(1.0, 0.0);
        let du = numeric::derivative(&u);
        let w = numeric::poly_sub(&numeric::poly_mul(p, &du), &numeric::poly_mul(&dp, &u));
        for (i, c) in numeric::poly_rem_monic(&w, a).into_iter().enumerate() {
            m[(i, j)] = c;
        }
    }
    m
}

/// Orthonormal basis of the numerical kernel of `m` (columns), assuming its
/// rank is `rows`; `None` if the rank is visibly lower.
fn kernel_basis(m: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let (r, n) = m.shape();
    if r == 0 {
        return Some(DMatrix::identity(n, n));
    }
    let mut sq = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    sq.view_mut((0, 0), (r, n)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let top = svd.singular_values[order[0]];
    if svd.singular_values[order[r - 1]] < INDEX_THRESHOLD * top {
        return None;
    }
    let cols: Vec<_> = order[r..].iter().map(|&i| vt.row(i).adjoint()).collect();
    Some(DMatrix::from_columns(&cols))
}

fn project(basis: &DMatrix<C64>, y: &[C64]) -> Vec<C64> {
    let v = nalgebra::DVector::from_column_slice(y);
    let x = basis * (basis.adjoint() * v);
    x.iter().copied().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepChecks {
    pub index: bool,
    pub full: bool,
    pub kernel: bool,
    pub continuity: bool,
}

impl StepChecks {
    pub fn all(&self) -> bool {
        self.index && self.full && self.kernel && self.continuity
    }
}

/// One point along a path: float coefficients of `a` and of the triple
/// (degree ≤ k each), the (possibly complex) parameter it was taken at, and
/// its checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub t: (f64, f64),
    pub a: Vec<(f64, f64)>,
    pub p: [Vec<(f64, f64)>; 3],
    pub checks: StepChecks,
    pub index_tail: Vec<f64>,
    pub repairs: usize,
}

impl PathStep {
    pub fn triple(&self) -> [Vec<C64>; 3] {
        self.p.each_ref().map(|v| v.iter().map(|&(x, y)| C64::new(x, y)).collect())
    }

    pub fn a_coeffs(&self) -> Vec<C64> {
        self.a.iter().map(|&(x, y)| C64::new(x, y)).collect()
    }

    fn coords(&self) -> Vec<C64> {
        let mut v = self.a_coeffs();
        for q in self.triple() {
            v.extend(q);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumPath {
    pub k: usize,
    pub r: usize,
    pub from: StratumPoint,
    pub to: StratumPoint,
    /// Continuity bound: twice the distance between the endpoints divided by
    /// the number of steps.
    pub max_step: f64,
    pub steps: Vec<PathStep>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathOptions {
    /// Per-step retries at complex parameters near the nominal one.
    pub retries: usize,
    /// Bends `β` of the parameter arc `t(s) = s + iβ s(1 − s)`, tried in
    /// order until one gives an accepted path.
    pub bends: Vec<f64>,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self { retries: 8, bends: vec![0.0, 0.5, -0.5, 1.0, -1.0] }
    }
}

fn pad(v: Vec<C64>, n: usize) -> Vec<C64> {
    let mut v = v;
    v.resize(n, C64::new(0.0, 0.0));
    v
}

fn endpoint_coords(pt: &StratumPoint) -> (Vec<C64>, [Vec<C64>; 3]) {
    let k = pt.k();
    (pt.a.to_complex_coeffs(), pt.f.components().each_ref().map(|q| pad(q.to_complex_coeffs(), k + 1)))
}

fn lerp(x: &[C64], y: &[C64], t: C64) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a * (C64::new(1.0, 0.0) - t) + b * t).collect()
}

fn dist(x: &[C64], y: &[C64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

fn to_pairs(v: &[C64]) -> Vec<(f64, f64)> {
    v.iter().map(|z| (z.re, z.im)).collect()
}

struct Interp {
    a: (Vec<C64>, Vec<C64>),
    p: [(Vec<C64>, Vec<C64>); 3],
    k: usize,
    r: usize,
}

impl Interp {
    fn point(&self, t: C64) -> Option<(Vec<C64>, [Vec<C64>; 3], bool)> {
        let a = lerp(&self.a.0, &self.a.1, t);
        let p0 = lerp(&self.p[0].0, &self.p[0].1, t);
        let l = float_l(&a, &p0, self.k);
        let basis = kernel_basis(&l);
        let kernel_ok = basis.is_some();
        let basis = basis?;
        let p1 = project(&basis, &lerp(&self.p[1].0, &self.p[1].1, t));
        let p2 = project(&basis, &lerp(&self.p[2].0, &self.p[2].1, t));
        Some((a, [p0, p1, p2], kernel_ok))
    }

    fn step(&self, t: C64, prev: Option<&[C64]>, max_step: f64, repairs: usize) -> Option<PathStep> {
        let (a, p, kernel) = self.point(t)?;
        let idx = numeric_index(&p, self.k);
        let full = fullness_ratio(&p, self.k) > INDEX_THRESHOLD;
        let mut step = PathStep {
            t: (t.re, t.im),
            a: to_pairs(&a),
            p: p.each_ref().map(|q| to_pairs(q)),
            checks: StepChecks { index: idx.has_index(self.r), full, kernel, continuity: true },
            index_tail: idx.tail,
            repairs,
        };
        if let Some(prev) = prev {
            step.checks.continuity = dist(prev, &step.coords()) <= max_step * (1.0 + 1e-9) + 1e-12;
        }
        Some(step)
    }
}

/// Path of `n_steps` segments from `p` to `q` inside their common stratum.
/// The parameter runs along the arc `s + iβ s(1 − s)`. A failing step is
/// retried at `t ± iδ` near the nominal one; when `retries` fail the next
/// bend is tried, and after the last one the path is abandoned.
pub fn connect(p: &StratumPoint, q: &StratumPoint, n_steps: usize, opts: &PathOptions) -> Result<StratumPath> {
    if n_steps == 0 {
        return Err(Error::InvalidInput("a path needs at least one step".into()));
    }
    let (k, r) = (p.k(), p.r);
    if (q.k(), q.r) != (k, r) {
        return Err(Error::PreconditionViolated(format!(
            "endpoints lie in different strata ({k},{r}) and ({},{})",
            q.k(),
            q.r
        )));
    }
    if !p.in_chart() || !q.in_chart() {
        return Err(Error::PreconditionViolated("an endpoint has a and p₀ sharing a root".into()));
    }
    let (ap, pp) = endpoint_coords(p);
    let (aq, pq) = endpoint_coords(q);
    let interp = Interp {
        a: (ap.clone(), aq.clone()),
        p: [0, 1, 2].map(|i| (pp[i].clone(), pq[i].clone())),
        k,
        r,
    };
    let mut cp = ap.clone();
    let mut cq = aq.clone();
    for i in 0..3 {
        cp.extend(pp[i].iter().copied());
        cq.extend(pq[i].iter().copied());
    }
    let nominal = dist(&cp, &cq) / n_steps as f64;
    let max_step = 2.0 * nominal;

    let mut first_failure = None;
    for &bend in &opts.bends {
        match walk(&interp, n_steps, max_step, bend, opts.retries) {
            Ok(steps) => return Ok(StratumPath { k, r, from: p.clone(), to: q.clone(), max_step, steps }),
            Err(e) => {
                first_failure.get_or_insert(e);
            }
        }
    }
    Err(first_failure.unwrap_or(Error::PathFailure { step: 0, reason: "no parameter arc to try".into() }))
}

fn walk(interp: &Interp, n_steps: usize, max_step: f64, bend: f64, retries: usize) -> Result<Vec<PathStep>> {
    let mut steps: Vec<PathStep> = Vec::with_capacity(n_steps + 1);
    for i in 0..=n_steps {
        let s0 = i as f64 / n_steps as f64;
        let prev = steps.last().map(PathStep::coords);
        let mut accepted = None;
        let mut last_reason = String::from("kernel of L(a, p₀) dropped rank");
        for attempt in 0..=retries {
            // endpoints are exact stratum points and are never moved
            if attempt > 0 && (i == 0 || i == n_steps) {
                break;
            }
            let offset = if attempt == 0 {
                0.0
            } else {
                let m = attempt.div_ceil(2) as f64;
                let sign = if attempt % 2 == 1 { 1.0 } else { -1.0 };
                sign * 0.25 * m / (n_steps as f64 * retries as f64)
            };
            let t = C64::new(s0, bend * s0 * (1.0 - s0) + offset);
            match interp.step(t, prev.as_deref(), max_step, attempt) {
                Some(s) if s.checks.all() => {
                    accepted = Some(s);
                    break;
                }
                Some(s) => last_reason = format!("checks failed at t = {:?}: {:?}", s.t, s.checks),
                None => {}
            }
        }
        match accepted {
            Some(s) => steps.push(s),
            None => return Err(Error::PathFailure { step: i, reason: last_reason }),
        }
    }
    Ok(steps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub index: bool,
    pub full: bool,
    pub continuity: bool,
    pub degree_num: Option<f64>,
    pub energy_num: Option<f64>,
    pub snapped: Option<(i64, i64)>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    pub steps: Vec<StepReport>,
    pub predicted: (i64, i64),
    pub all_ok: bool,
    pub first_failure: Option<usize>,
}

/// Re-checks every step from its stored coefficients, and integrates the
/// invariants of the associated harmonic map at every `quad_every`-th step
/// (and the last). `quad_every = 0` skips quadrature.
pub fn verify_path(path: &StratumPath, quad_every: usize, cfg: &QuadratureConfig) -> PathReport {
    use rayon::prelude::*;
    let (k, r) = (path.k, path.r);
    let predicted = (k as i64 - 2 - r as i64, 3 * k as i64 - 2 - r as i64);
    let n = path.steps.len();
    let steps: Vec<StepReport> = path
        .steps
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let p = s.triple();
            let index = numeric_index(&p, k).has_index(r);
            let full = fullness_ratio(&p, k) > INDEX_THRESHOLD;
            let continuity = i == 0
                || dist(&path.steps[i - 1].coords(), &s.coords()) <= path.max_step * (1.0 + 1e-9) + 1e-12;
            let mut rep = StepReport {
                step: i,
                index,
                full,
                continuity,
                degree_num: None,
                energy_num: None,
                snapped: None,
                ok: index && full && continuity,
            };
            if quad_every > 0 && (i % quad_every == 0 || i + 1 == n) {
                match integrate_invariants(&ChartedField::from_float_map(&p, k), cfg) {
                    Ok(inv) => {
                        let sd = snap(inv.degree, inv.error_estimate);
                        let se = snap(inv.energy, inv.error_estimate);
                        let close = (inv.degree - predicted.0 as f64).abs() < SNAP_TOLERANCE
                            && (inv.energy - predicted.1 as f64).abs() < SNAP_TOLERANCE;
                        rep.degree_num = Some(inv.degree);
                        rep.energy_num = Some(inv.energy);
                        rep.snapped = sd.zip(se);
                        rep.ok &= close && rep.snapped == Some(predicted);
                    }
                    Err(_) => rep.ok = false,
                }
            }
            rep
        })
        .collect();
    let first_failure = steps.iter().position(|s| !s.ok);
    PathReport { all_ok: first_failure.is_none(), first_failure, predicted, steps }
}

/// `step,t_re,t_im,ok,degree,energy` rows for plotting.
pub fn invariant_csv(path: &StratumPath, report: &PathReport) -> String {
    let mut out = String::from("step,t_re,t_im,ok,degree,energy\n");
    for (s, r) in path.steps.iter().zip(&report.steps) {
        let f = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{},{}\n", r.step, s.t.0, s.t.1, r.ok, f(r.degree_num), f(r.energy_num)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holomap::HoloMap;
    use crate::poly::Poly;
    use crate::strata::sample_stratum;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn numeric_index_of_known_maps() {
        let f = |a: &[f64], b: &[f64], d: &[f64]| [a, b, d].map(|v| v.iter().map(|&x| c(x)).collect::<Vec<_>>());
        assert_eq!(numeric_index(&f(&[1.0], &[0.0, 1.0], &[0.0, 0.0, 1.0]), 2).index, 0);
        assert_eq!(numeric_index(&f(&[1.0], &[0.0, 1.0], &[0.0, 0.0, 0.0, 1.0]), 3).index, 1);
        assert_eq!(numeric_index(&f(&[1.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 0.0, 1.0]), 4).index, 2);
    }

    #[test]
    fn float_l_agrees_with_exact() {
        let pt = sample_stratum(4, 2, 3).unwrap();
        let p0 = &pt.f.components()[0];
        let exact = crate::strata::build_l(&pt.a, p0, 4).unwrap();
        let fl = float_l(&pt.a.to_complex_coeffs(), &p0.to_complex_coeffs(), 4);
        for i in 0..2 {
            for j in 0..5 {
                assert!((fl[(i, j)] - exact.matrix.get(i, j).to_complex()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_path() {
        let pt = sample_stratum(3, 1, 5).unwrap();
        let path = connect(&pt, &pt, 10, &PathOptions::default()).unwrap();
        assert_eq!(path.steps.len(), 11);
        assert!(path.steps.iter().all(|s| s.checks.all()));
        assert!(verify_path(&path, 0, &QuadratureConfig::default()).all_ok);
    }

    #[test]
    fn path_in_hol_3_1() {
        let p = sample_stratum(3, 1, 1).unwrap();
        let q = sample_stratum(3, 1, 2).unwrap();
        let path = connect(&p, &q, 50, &PathOptions::default()).unwrap();
        assert_eq!(path.steps.len(), 51);
        let last = path.steps.last().unwrap().triple();
        let target = q.f.components().each_ref().map(|q| q.to_complex_coeffs());
        for i in 0..3 {
            assert!(dist(&last[i], &pad(target[i].clone(), 4)) < 1e-9);
        }
        let report = verify_path(&path, 25, &QuadratureConfig::default());
        assert!(report.all_ok, "{report:?}");
        assert_eq!(report.steps[25].snapped, Some((0, 6)));
    }

    #[test]
    fn different_strata_rejected() {
        let p = sample_stratum(3, 0, 1).unwrap();
        let q = sample_stratum(3, 1, 1).unwrap();
        assert!(matches!(connect(&p, &q, 5, &PathOptions::default()), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn corrupted_step_is_flagged() {
        let p = sample_stratum(3, 1, 1).unwrap();
        let q = sample_stratum(3, 1, 2).unwrap();
        let mut path = connect(&p, &q, 20, &PathOptions::default()).unwrap();
        path.steps[7].p[1][0].0 += 1.0;
        let report = verify_path(&path, 0, &QuadratureConfig::default());
        assert!(!report.all_ok);
        assert_eq!(report.first_failure, Some(7));
    }

    #[test]
    fn unramified_cubic_has_no_tiny_singular_values() {
        let f = HoloMap::new(Poly::from_ints(&[1, 1]), Poly::from_ints(&[0, 1, 0, 1]), Poly::from_ints(&[0, 0, 1, 2]))
            .unwrap();
        let p = f.components().each_ref().map(|q| q.to_complex_coeffs());
        assert!(numeric_index(&p, 3).has_index(0));
        assert!(fullness_ratio(&p, 3) > 1e-3);
    }
}
