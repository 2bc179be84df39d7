//! Fubini–Study degree and energy of a map given by a lift, integrated over
//! two stereographic charts, and a finite-difference harmonicity residual.
//!
//! For a lift `V` the partial energy densities are
//!
//! ```text
//! e′ = |(∂_z V)_⊥|² / |V|²      e″ = |(∂_z̄ V)_⊥|² / |V|²
//! ```
//!
//! where `⊥` is the component orthogonal to `V`. Both are independent of the
//! lift's scaling, and `E′ = (1/π)∬ e′`, `E″ = (1/π)∬ e″`. The chart `|z| ≤ R`
//! and the chart `|w| ≤ R`, `w = 1/z`, are blended by a smooth partition of
//! unity `χ(|z|) + χ(|w|) = 1`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bipoly::{BiPoly, FloatBiPoly};
use crate::eellswood::HarmonicMapRep;
use crate::error::{Error, Result};
use crate::holomap::{ramification_data, HoloMap};
use crate::numeric::{self, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Angular nodes at the coarsest level; Gauss–Legendre nodes per radial
    /// panel are half of this.
    pub resolution: usize,
    /// The charts are blended over `1/R ≤ |z| ≤ R`.
    pub overlap_radius: f64,
    /// Maximum number of refinements after the coarsest level.
    pub levels: usize,
    /// Nodes closer than this to a known zero of the lift are moved out to
    /// this distance.
    pub exclusion_radius: f64,
    /// Refinement stops once consecutive levels agree to this tolerance.
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { resolution: 32, overlap_radius: 2.0, levels: 4, exclusion_radius: 1e-3, tolerance: 1e-9 }
    }
}

impl QuadratureConfig {
    pub fn with_resolution(resolution: usize) -> Self {
        Self { resolution, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 16 {
            return Err(Error::InvalidInput(format!("grid resolution {} < 16", self.resolution)));
        }
        if !(self.exclusion_radius > 0.0) {
            return Err(Error::InvalidInput("exclusion radius must be positive".into()));
        }
        if !(self.overlap_radius > 1.0) || !self.overlap_radius.is_finite() {
            return Err(Error::InvalidInput("overlap radius must be finite and > 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Value and first partials of a lift at a point.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub v: [C64; 3],
    pub dz: [C64; 3],
    pub dzbar: [C64; 3],
}

/// A lift that can be evaluated together with its `∂_z`, `∂_z̄` partials.
#[derive(Clone, Debug)]
pub enum LiftField {
    /// Exact bi-polynomial lift with its exact formal partials.
    Bi { v: [FloatBiPoly; 3], dz: [FloatBiPoly; 3], dzbar: [FloatBiPoly; 3] },
    /// Holomorphic lift `p(z)`.
    Holomorphic { p: [Vec<C64>; 3], dp: [Vec<C64>; 3] },
    /// The Gauss lift of a float triple, with partials from
    /// `∂_z V = |p|² p″ − ⟨p″,p⟩ p` and `∂_z̄ V = ⟨p,p′⟩ p′ − |p′|² p`.
    Gauss { p: [Vec<C64>; 3], dp: [Vec<C64>; 3], ddp: [Vec<C64>; 3] },
}

fn herm(u: &[C64; 3], v: &[C64; 3]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

fn norm_sqr(u: &[C64; 3]) -> f64 {
    u.iter().map(|a| a.norm_sqr()).sum()
}

impl LiftField {
    pub fn from_bipoly(lift: &[BiPoly; 3]) -> Self {
        LiftField::Bi {
            v: lift.each_ref().map(FloatBiPoly::from),
            dz: lift.each_ref().map(|c| FloatBiPoly::from(&c.d_z())),
            dzbar: lift.each_ref().map(|c| FloatBiPoly::from(&c.d_zbar())),
        }
    }

    pub fn holomorphic(p: [Vec<C64>; 3]) -> Self {
        let dp = p.each_ref().map(|q| numeric::derivative(q));
        LiftField::Holomorphic { p, dp }
    }

    pub fn gauss(p: [Vec<C64>; 3]) -> Self {
        let dp = p.each_ref().map(|q| numeric::derivative(q));
        let ddp = dp.each_ref().map(|q| numeric::derivative(q));
        LiftField::Gauss { p, dp, ddp }
    }

    pub fn value(&self, z: C64) -> [C64; 3] {
        match self {
            LiftField::Bi { v, .. } => v.each_ref().map(|c| c.eval(z)),
            LiftField::Holomorphic { p, .. } => p.each_ref().map(|c| numeric::horner(c, z)),
            LiftField::Gauss { p, dp, .. } => {
                let pv = p.each_ref().map(|c| numeric::horner(c, z));
                let dv = dp.each_ref().map(|c| numeric::horner(c, z));
                let (pp, dpp) = (norm_sqr(&pv), herm(&dv, &pv));
                std::array::from_fn(|i| dv[i] * pp - pv[i] * dpp)
            }
        }
    }

    pub fn jet(&self, z: C64) -> Jet {
        let zero = C64::new(0.0, 0.0);
        match self {
            LiftField::Bi { v, dz, dzbar } => Jet {
                v: v.each_ref().map(|c| c.eval(z)),
                dz: dz.each_ref().map(|c| c.eval(z)),
                dzbar: dzbar.each_ref().map(|c| c.eval(z)),
            },
            LiftField::Holomorphic { p, dp } => Jet {
                v: p.each_ref().map(|c| numeric::horner(c, z)),
                dz: dp.each_ref().map(|c| numeric::horner(c, z)),
                dzbar: [zero; 3],
            },
            LiftField::Gauss { p, dp, ddp } => {
                let pv = p.each_ref().map(|c| numeric::horner(c, z));
                let dv = dp.each_ref().map(|c| numeric::horner(c, z));
                let ddv = ddp.each_ref().map(|c| numeric::horner(c, z));
                let pp = norm_sqr(&pv);
                let (dpp, pdp, ddpp) = (herm(&dv, &pv), herm(&pv, &dv), herm(&ddv, &pv));
                let dd = norm_sqr(&dv);
                Jet {
                    v: std::array::from_fn(|i| dv[i] * pp - pv[i] * dpp),
                    dz: std::array::from_fn(|i| ddv[i] * pp - pv[i] * ddpp),
                    dzbar: std::array::from_fn(|i| dv[i] * pdp - pv[i] * dd),
                }
            }
        }
    }
}

/// `(e′, e″)` at a jet, or `None` where the lift vanishes numerically.
pub fn densities(jet: &Jet) -> Option<(f64, f64)> {
    let vv = norm_sqr(&jet.v);
    if !(vv > 0.0) || !vv.is_finite() {
        return None;
    }
    let perp = |d: &[C64; 3]| {
        let c = herm(d, &jet.v) / vv;
        let w: [C64; 3] = std::array::from_fn(|i| d[i] - jet.v[i] * c);
        norm_sqr(&w) / vv
    };
    let e = (perp(&jet.dz), perp(&jet.dzbar));
    (e.0.is_finite() && e.1.is_finite()).then_some(e)
}

/// A lift in both charts with the known zeros of each chart's lift and the
/// points where its density may concentrate.
#[derive(Clone, Debug)]
pub struct ChartedField {
    pub chart_z: LiftField,
    pub chart_w: LiftField,
    pub singular_z: Vec<C64>,
    pub singular_w: Vec<C64>,
    /// Near-zeros of the lift, each integrated on its own refined patch.
    pub hot_z: Vec<C64>,
    pub hot_w: Vec<C64>,
}

/// Relative size of the wedge below which a near-zero gets its own patch.
pub const CONCENTRATION_RATIO: f64 = 0.05;

fn float_triple(f: &HoloMap) -> [Vec<C64>; 3] {
    f.components().each_ref().map(|q| q.to_complex_coeffs())
}

/// Near-zeros of `h` that are not already known zeros.
fn concentration_points(h: &[Vec<C64>; 3], known: &[C64]) -> Vec<C64> {
    numeric::near_common_zeros(h, CONCENTRATION_RATIO)
        .into_iter()
        .filter(|z| known.iter().all(|s| (z - s).norm() > 1e-6 * (1.0 + z.norm())))
        .collect()
}

/// The density of the Gauss transform concentrates near near-zeros of
/// `p ∧ p′` (for `e′`) and of `p` itself (for `e″`).
fn gauss_hot(p: &[Vec<C64>; 3], known: &[C64]) -> Vec<C64> {
    let mut hot = concentration_points(&numeric::float_wedge(p), known);
    for z in concentration_points(p, known) {
        if hot.iter().all(|w| (w - z).norm() > 1e-6 * (1.0 + z.norm())) {
            hot.push(z);
        }
    }
    hot
}

impl ChartedField {
    /// The Gauss transform with its exact bi-polynomial partials. The second
    /// chart uses the Gauss lift of `wᵏ p(1/w)`, whose only zeros are
    /// ramification points of `f` seen from ∞.
    pub fn from_rep(rep: &HarmonicMapRep) -> Result<Self> {
        let g = rep.source.at_infinity();
        let lift_w = crate::eellswood::gauss_lift(g.components());
        let singular_z = ramification_data(&rep.source)?.divisor.roots_approx();
        let singular_w = ramification_data(&g)?.divisor.roots_approx();
        Ok(Self {
            chart_z: LiftField::from_bipoly(&rep.lift),
            chart_w: LiftField::from_bipoly(&lift_w),
            hot_z: gauss_hot(&float_triple(&rep.source), &singular_z),
            hot_w: gauss_hot(&float_triple(&g), &singular_w),
            singular_z,
            singular_w,
        })
    }

    /// Same map, partials from the pointwise formulas on the float triple.
    pub fn from_rep_pointwise(rep: &HarmonicMapRep) -> Result<Self> {
        let g = rep.source.at_infinity();
        let singular_z = ramification_data(&rep.source)?.divisor.roots_approx();
        let singular_w = ramification_data(&g)?.divisor.roots_approx();
        let (pz, pw) = (float_triple(&rep.source), float_triple(&g));
        Ok(Self {
            hot_z: gauss_hot(&pz, &singular_z),
            hot_w: gauss_hot(&pw, &singular_w),
            chart_z: LiftField::gauss(pz),
            chart_w: LiftField::gauss(pw),
            singular_z,
            singular_w,
        })
    }

    /// The holomorphic map itself; its lift never vanishes.
    pub fn from_holomorphic(f: &HoloMap) -> Self {
        let (pz, pw) = (float_triple(f), float_triple(&f.at_infinity()));
        Self {
            hot_z: concentration_points(&pz, &[]),
            hot_w: concentration_points(&pw, &[]),
            chart_z: LiftField::holomorphic(pz),
            chart_w: LiftField::holomorphic(pw),
            singular_z: Vec::new(),
            singular_w: Vec::new(),
        }
    }

    /// An arbitrary bi-polynomial lift. The second chart is
    /// `w^a w̄^b V(1/w)`; zeros of the lift are not located in advance.
    pub fn from_lift(lift: &[BiPoly; 3]) -> Result<Self> {
        if lift.iter().all(BiPoly::is_zero) {
            return Err(Error::InvalidInput("lift is identically zero".into()));
        }
        let (a, b) = lift.iter().map(BiPoly::max_degrees).fold((0, 0), |m, d| (m.0.max(d.0), m.1.max(d.1)));
        let inv = lift.each_ref().map(|c| c.inverted(a, b));
        Ok(Self {
            chart_z: LiftField::from_bipoly(lift),
            chart_w: LiftField::from_bipoly(&inv),
            singular_z: Vec::new(),
            singular_w: Vec::new(),
            hot_z: Vec::new(),
            hot_w: Vec::new(),
        })
    }

    /// Gauss transform of a float triple of degree ≤ `k`, with zeros of the
    /// lift located as approximate common roots of the wedge components.
    pub fn from_float_map(p: &[Vec<C64>; 3], k: usize) -> Self {
        let pad = |q: &Vec<C64>| {
            let mut v = q.clone();
            v.resize(k + 1, C64::new(0.0, 0.0));
            v
        };
        let pz = p.each_ref().map(pad);
        let pw = pz.each_ref().map(|q| q.iter().rev().copied().collect::<Vec<_>>());
        let singular_z = numeric::approx_common_roots(&numeric::float_wedge(&pz), 1e-7);
        let singular_w = numeric::approx_common_roots(&numeric::float_wedge(&pw), 1e-7);
        Self {
            hot_z: gauss_hot(&pz, &singular_z),
            hot_w: gauss_hot(&pw, &singular_w),
            singular_z,
            singular_w,
            chart_z: LiftField::gauss(pz),
            chart_w: LiftField::gauss(pw),
        }
    }
}

/// `χ(ρ)`: 1 for `ρ ≤ 1/R`, 0 for `ρ ≥ R`, smooth, with `χ(ρ) + χ(1/ρ) = 1`.
pub fn partition_weight(rho: f64, overlap_radius: f64) -> f64 {
    smooth_step_down((rho.ln() + overlap_radius.ln()) / (2.0 * overlap_radius.ln()))
}

/// 1 for `t ≤ 0`, 0 for `t ≥ 1`, smooth in between.
fn smooth_step_down(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    b / (a + b)
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let (l, r) = x.split_at(x.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub nodes: usize,
    /// Nodes moved out to the exclusion circle of a known zero.
    pub adjusted: usize,
    /// Nodes where the lift vanished numerically and nothing was added.
    pub dropped: usize,
}

impl LevelStats {
    fn add(&self, o: &LevelStats) -> LevelStats {
        LevelStats { nodes: self.nodes + o.nodes, adjusted: self.adjusted + o.adjusted, dropped: self.dropped + o.dropped }
    }
}

fn radial_panels(r: f64) -> [f64; 6] {
    [0.0, 1.0 / (4.0 * r), 1.0 / (2.0 * r), 1.0 / r, 1.0, r]
}

/// Largest radius of a concentration patch.
const PATCH_RADIUS: f64 = 0.2;
/// Geometric panels of ratio 4 cover a patch down to `ρ · 4⁻¹²`.
const PATCH_PANELS: i32 = 12;

#[derive(Clone, Copy, Debug)]
struct Patch {
    centre: C64,
    radius: f64,
}

impl Patch {
    /// 1 on the inner half of the disc, 0 outside it.
    fn bump(&self, z: C64) -> f64 {
        smooth_step_down(2.0 * (z - self.centre).norm() / self.radius - 1.0)
    }
}

fn patches(hot: &[C64], overlap_radius: f64) -> Vec<Patch> {
    let hot: Vec<C64> = hot.iter().copied().filter(|z| z.norm() < overlap_radius + PATCH_RADIUS).collect();
    hot.iter()
        .map(|&c| {
            let nearest = hot.iter().filter(|&&d| d != c).map(|d| (d - c).norm()).fold(f64::INFINITY, f64::min);
            Patch { centre: c, radius: PATCH_RADIUS.min(0.45 * nearest) }
        })
        .collect()
}

/// Densities at `z` with the exclusion rule applied, accumulated into the
/// two sums with weight `w`.
fn accumulate(
    field: &LiftField,
    singular: &[C64],
    cfg: &QuadratureConfig,
    mut z: C64,
    w: f64,
    e: &mut (Vec<f64>, Vec<f64>),
    stats: &mut LevelStats,
) {
    if let Some(s) = singular.iter().find(|s| (z - **s).norm() < cfg.exclusion_radius) {
        let d = z - s;
        let dir = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        z = s + dir * cfg.exclusion_radius;
        stats.adjusted += 1;
    }
    stats.nodes += 1;
    match densities(&field.jet(z)) {
        Some((a, b)) => {
            e.0.push(w * a);
            e.1.push(w * b);
        }
        None => stats.dropped += 1,
    }
}

fn gl_nodes(panels: &[f64], gl: &GaussLegendre) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in panels.windows(2) {
        let (a, b) = (w[0], w[1]);
        for &(x, wt) in gl.as_node_weight_pairs() {
            out.push((0.5 * ((b - a) * x + (b + a)), 0.5 * (b - a) * wt));
        }
    }
    out
}

/// Sums over polar rows `(ρ, weight)` around `centre`; `weight(z)` is the
/// partition factor at each node.
fn polar_rows(
    field: &LiftField,
    singular: &[C64],
    cfg: &QuadratureConfig,
    centre: C64,
    radial: &[(f64, f64)],
    n_theta: usize,
    weight: &(dyn Fn(C64) -> f64 + Sync),
) -> (f64, f64, LevelStats) {
    let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
    let rows: Vec<(f64, f64, LevelStats)> = radial
        .par_iter()
        .map(|&(rho, wt)| {
            let mut stats = LevelStats::default();
            let mut e = (Vec::with_capacity(n_theta), Vec::with_capacity(n_theta));
            for l in 0..n_theta {
                let z = centre + C64::from_polar(rho, dtheta * (l as f64 + 0.5));
                let w = weight(z);
                if w != 0.0 {
                    accumulate(field, singular, cfg, z, w, &mut e, &mut stats);
                }
            }
            let scale = wt * rho * dtheta;
            (scale * pairwise_sum(&e.0), scale * pairwise_sum(&e.1), stats)
        })
        .collect();
    let e1: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let e2: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let stats = rows.iter().fold(LevelStats::default(), |acc, r| acc.add(&r.2));
    (pairwise_sum(&e1), pairwise_sum(&e2), stats)
}

/// `(∬ χ e′, ∬ χ e″)` over one chart, unnormalized. Discs around near-zeros
/// of the lift are split off with a smooth partition and integrated on
/// geometrically graded polar grids centred on them.
fn integrate_chart(
    field: &LiftField,
    singular: &[C64],
    hot: &[C64],
    cfg: &QuadratureConfig,
    level: usize,
) -> (f64, f64, LevelStats) {
    let n_theta = cfg.resolution << level;
    let m = NonZeroUsize::new((cfg.resolution / 2) << level).expect("resolution ≥ 16");
    let r = cfg.overlap_radius;
    let patches = patches(hot, r);
    let outside = |z: C64, upto: usize| patches[..upto].iter().map(|p| 1.0 - p.bump(z)).product::<f64>();

    let radial = gl_nodes(&radial_panels(r), &GaussLegendre::new(m));
    let main_weight = |z: C64| partition_weight(z.norm(), r) * outside(z, patches.len());
    let (mut e1, mut e2, mut stats) = polar_rows(field, singular, cfg, C64::new(0.0, 0.0), &radial, n_theta, &main_weight);

    let m_local = NonZeroUsize::new((cfg.resolution / 8) << level).expect("resolution ≥ 16");
    let gl_local = GaussLegendre::new(m_local);
    for (j, p) in patches.iter().enumerate() {
        let mut edges = vec![0.0];
        edges.extend((0..=PATCH_PANELS).rev().map(|i| p.radius * 4f64.powi(-i)));
        let radial = gl_nodes(&edges, &gl_local);
        let weight = |z: C64| partition_weight(z.norm(), r) * p.bump(z) * outside(z, j);
        let (a, b, s) = polar_rows(field, singular, cfg, p.centre, &radial, n_theta / 2, &weight);
        e1 += a;
        e2 += b;
        stats = stats.add(&s);
    }
    (e1, e2, stats)
}

/// Integrated invariants with the difference between the two finest levels
/// as error estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub degree: f64,
    pub energy: f64,
    pub e_prime: f64,
    pub e_doubleprime: f64,
    pub error_estimate: f64,
    pub levels_used: usize,
    pub stats: LevelStats,
}

pub fn integrate_invariants(field: &ChartedField, cfg: &QuadratureConfig) -> Result<Invariants> {
    cfg.validate()?;
    let mut prev: Option<(f64, f64)> = None;
    let mut history = Vec::new();
    for level in 0..=cfg.levels {
        let (a1, a2, sa) = integrate_chart(&field.chart_z, &field.singular_z, &field.hot_z, cfg, level);
        let (b1, b2, sb) = integrate_chart(&field.chart_w, &field.singular_w, &field.hot_w, cfg, level);
        let pi = std::f64::consts::PI;
        let cur = ((a1 + b1) / pi, (a2 + b2) / pi);
        let stats = sa.add(&sb);
        history.push(cur);
        if let Some(p) = prev {
            let err = (cur.0 - p.0).abs() + (cur.1 - p.1).abs();
            if err < cfg.tolerance || level == cfg.levels {
                if !(err < 0.5) {
                    return Err(Error::IntegrationFailure(format!(
                        "no convergence after {} levels: (E′, E″) history {history:?}",
                        level + 1
                    )));
                }
                return Ok(Invariants {
                    degree: cur.0 - cur.1,
                    energy: cur.0 + cur.1,
                    e_prime: cur.0,
                    e_doubleprime: cur.1,
                    error_estimate: err,
                    levels_used: level + 1,
                    stats,
                });
            }
        }
        prev = Some(cur);
    }
    Err(Error::IntegrationFailure("refinement needs at least two levels".into()))
}

/// Probe points for the harmonicity residual.
pub const PROBES: [(f64, f64); 8] = [
    (0.31, 0.17),
    (-0.52, 0.43),
    (0.74, -0.61),
    (-0.23, -0.88),
    (1.12, 0.37),
    (-1.07, -0.29),
    (0.08, 1.21),
    (0.57, 0.93),
];

fn projector(field: &LiftField, z: C64) -> Option<[[C64; 3]; 3]> {
    let v = field.value(z);
    let n = norm_sqr(&v);
    if !(n > 0.0) || !n.is_finite() {
        return None;
    }
    Some(std::array::from_fn(|i| std::array::from_fn(|j| v[i] * v[j].conj() / n)))
}

fn commutator_norm(a: &[[C64; 3]; 3], b: &[[C64; 3]; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut c = C64::new(0.0, 0.0);
            for k in 0..3 {
                c += a[i][k] * b[k][j] - b[i][k] * a[k][j];
            }
            s += c.norm_sqr();
        }
    }
    s.sqrt()
}

/// `‖[ΔP, P]‖_F` at `z`, with the five-point Laplacian of step `h`.
pub fn residual_at(field: &LiftField, z: C64, h: f64) -> Option<f64> {
    let p0 = projector(field, z)?;
    let mut lap = [[C64::new(0.0, 0.0); 3]; 3];
    for d in [C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(0.0, h), C64::new(0.0, -h)] {
        let q = projector(field, z + d)?;
        for i in 0..3 {
            for j in 0..3 {
                lap[i][j] += q[i][j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            lap[i][j] = (lap[i][j] - p0[i][j] * 4.0) / (h * h);
        }
    }
    Some(commutator_norm(&lap, &p0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensionSample {
    pub h: f64,
    pub residual: f64,
    pub excluded: Vec<(f64, f64)>,
}

fn usable_probes(singular: &[C64], radius: f64) -> (Vec<C64>, Vec<(f64, f64)>) {
    let mut keep = Vec::new();
    let mut excluded = Vec::new();
    for &(x, y) in &PROBES {
        let z = C64::new(x, y);
        if singular.iter().any(|s| (z - s).norm() < radius) {
            excluded.push((x, y));
        } else {
            keep.push(z);
        }
    }
    (keep, excluded)
}

fn max_residual(field: &LiftField, probes: &[C64], h: f64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for &z in probes {
        let r = residual_at(field, z, h).ok_or(Error::NearSingular { re: z.re, im: z.im, norm: 0.0 })?;
        best = best.max(r);
    }
    Ok(best)
}

/// Maximum residual over the probe points, excluding those within
/// `4h + 0.05` of a known zero of the lift.
pub fn tension_residual_field(field: &ChartedField, h: f64) -> Result<TensionSample> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput("grid step must be positive".into()));
    }
    let (probes, excluded) = usable_probes(&field.singular_z, 4.0 * h + 0.05);
    if probes.is_empty() {
        return Err(Error::PreconditionViolated("every probe point is near a singular point".into()));
    }
    Ok(TensionSample { h, residual: max_residual(&field.chart_z, &probes, h)?, excluded })
}

pub fn tension_residual(phi: &HarmonicMapRep, h: f64) -> Result<f64> {
    Ok(tension_residual_field(&ChartedField::from_rep(phi)?, h)?.residual)
}

/// Residuals at `h0, h0/2, …` over one fixed set of probe points.
pub fn tension_study(field: &ChartedField, h0: f64, halvings: usize) -> Result<Vec<TensionSample>> {
    if !(h0 > 0.0) {
        return Err(Error::InvalidInput("grid step must be positive".into()));
    }
    let (probes, excluded) = usable_probes(&field.singular_z, 4.0 * h0 + 0.05);
    if probes.is_empty() {
        return Err(Error::PreconditionViolated("every probe point is near a singular point".into()));
    }
    (0..=halvings)
        .map(|i| {
            let h = h0 / f64::powi(2.0, i as i32);
            Ok(TensionSample { h, residual: max_residual(&field.chart_z, &probes, h)?, excluded: excluded.clone() })
        })
        .collect()
}

/// Least-squares slope of `log residual` against `log h`.
pub fn convergence_order(samples: &[TensionSample]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.residual > 0.0)
        .map(|s| (s.h.ln(), s.residual.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Integer nearest to `x` when the error estimate allows snapping.
pub fn snap(x: f64, error: f64) -> Option<i64> {
    (error < 0.5).then(|| x.round() as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub degree: bool,
    pub energy: bool,
    pub e_prime: bool,
    pub e_doubleprime: bool,
    pub harmonic: bool,
}

impl Checks {
    pub fn all(&self) -> bool {
        self.degree && self.energy && self.e_prime && self.e_doubleprime && self.harmonic
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub degree_num: f64,
    pub energy_num: f64,
    pub e_prime: f64,
    pub e_doubleprime: f64,
    pub error_estimate: f64,
    pub snapped: Option<(i64, i64)>,
    pub predicted: (i64, i64),
    pub predicted_partial: (i64, i64),
    pub tension_residuals: Vec<(f64, f64)>,
    pub tension_order: Option<f64>,
    pub pass: Checks,
    pub grid: QuadratureConfig,
    pub levels_used: usize,
    pub stats: LevelStats,
}

/// Raw values must be within this of the predicted integers.
pub const SNAP_TOLERANCE: f64 = 1e-2;

/// Quadrature and harmonicity check of a Gauss transform against its
/// predicted invariants.
pub fn verify(rep: &HarmonicMapRep, cfg: &QuadratureConfig) -> Result<VerificationReport> {
    let field = ChartedField::from_rep(rep)?;
    let inv = integrate_invariants(&field, cfg)?;
    let study = tension_study(&field, 0.04, 3)?;
    let order = convergence_order(&study);
    let predicted = (rep.predicted_degree, rep.predicted_energy);
    let partial = (rep.predicted_e_prime(), rep.predicted_e_doubleprime());
    let sd = snap(inv.degree, inv.error_estimate);
    let se = snap(inv.energy, inv.error_estimate);
    let close = |x: f64, n: i64, s: Option<i64>| (x - n as f64).abs() < SNAP_TOLERANCE && s == Some(n);
    let pass = Checks {
        degree: close(inv.degree, predicted.0, sd),
        energy: close(inv.energy, predicted.1, se),
        e_prime: close(inv.e_prime, partial.0, snap(inv.e_prime, inv.error_estimate)),
        e_doubleprime: close(inv.e_doubleprime, partial.1, snap(inv.e_doubleprime, inv.error_estimate)),
        harmonic: order.is_some_and(|o| (1.7..=2.3).contains(&o)),
    };
    Ok(VerificationReport {
        degree_num: inv.degree,
        energy_num: inv.energy,
        e_prime: inv.e_prime,
        e_doubleprime: inv.e_doubleprime,
        error_estimate: inv.error_estimate,
        snapped: sd.zip(se),
        predicted,
        predicted_partial: partial,
        tension_residuals: study.iter().map(|s| (s.h, s.residual)).collect(),
        tension_order: order,
        pass,
        grid: cfg.clone(),
        levels_used: inv.levels_used,
        stats: inv.stats,
    })
}

/// `h,residual` rows for plotting.
pub fn residual_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("h,residual\n");
    for (h, r) in samples {
        out.push_str(&format!("{h:e},{r:e}\n"));
    }
    out
}
