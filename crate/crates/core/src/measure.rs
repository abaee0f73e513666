//! Weighted measures dV_λ = c(n,λ)(1-|x|²)^λ dV, Gauss–Legendre tensor
//! quadrature over ℚ_n rectangles, box volumes, anchored prefix integrals
//! and L^p norms.
//!
//! Every dyadic box is a coordinate rectangle in ℚ_n, so integrals carry the
//! fully separable density c(n,λ)·(n/A)·r^{n-1}(1-r²)^λ·∏ sin^{n-j}θ_j folded
//! into per-axis weight tables; dV is the normalized Lebesgue measure (total
//! mass 1) and A is the full angular weight, so ∫_{𝔹_n} dV_λ = 1.

use crate::boxes::{for_each_ladder, ladder_intervals, radial_interval, DyadicBox};
use crate::error::{Error, Result};
use crate::special::{angular_total, inc_beta_reg, ln_gamma};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Weighted measure dV_λ on 𝔹_n.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MeasureSpec {
    pub n: usize,
    pub lambda: f64,
    /// c(n,λ) of the measure normalization.
    pub c_norm: f64,
    /// c(n,λ)·n / A(n); multiplies the raw Jacobian in every quadrature.
    density_const: f64,
}

impl MeasureSpec {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        let c_norm = normalization_constant(n, lambda)?;
        Ok(Self {
            n,
            lambda,
            c_norm,
            density_const: c_norm * n as f64 / angular_total(n),
        })
    }

    pub fn density_const(&self) -> f64 {
        self.density_const
    }
}

/// c(n,λ) = (2/n)·Γ(n/2+λ+1)/(Γ(n/2)Γ(λ+1)).
pub fn normalization_constant(n: usize, lambda: f64) -> Result<f64> {
    if lambda <= -1.0 {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} <= -1")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} < 2")));
    }
    let h = n as f64 / 2.0;
    Ok(2.0 / n as f64 * (ln_gamma(h + lambda + 1.0) - ln_gamma(h) - ln_gamma(lambda + 1.0)).exp())
}

/// Conjugate exponent pair 1/p + 1/q = 1.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct NormSpec {
    pub p: f64,
    pub q: f64,
}

impl NormSpec {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {p} outside (1, inf)")));
        }
        Ok(Self { p, q: p / (p - 1.0) })
    }
}

/// Tensor Gauss–Legendre grid: nodes per panel and panels per axis
/// (length-1 vectors broadcast to all axes). `refined()` doubles the panels.
#[derive(Debug, Clone, serde::Serialize)]
pub struct QuadratureGrid {
    pub nodes_per_axis: Vec<usize>,
    pub panels_per_axis: Vec<usize>,
    pub refinement_level: u32,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self::uniform(8, 1)
    }
}

impl QuadratureGrid {
    pub fn uniform(nodes: usize, panels: usize) -> Self {
        assert!(nodes >= 2 && panels >= 1);
        Self {
            nodes_per_axis: vec![nodes],
            panels_per_axis: vec![panels],
            refinement_level: 0,
        }
    }

    pub fn nodes_for(&self, axis: usize) -> usize {
        *self
            .nodes_per_axis
            .get(axis)
            .unwrap_or_else(|| self.nodes_per_axis.last().expect("nonempty"))
    }

    pub fn panels_for(&self, axis: usize) -> usize {
        *self
            .panels_per_axis
            .get(axis)
            .unwrap_or_else(|| self.panels_per_axis.last().expect("nonempty"))
    }

    /// One refinement level up: panels doubled on every axis.
    pub fn refined(&self) -> Self {
        Self {
            nodes_per_axis: self.nodes_per_axis.clone(),
            panels_per_axis: self.panels_per_axis.iter().map(|p| p * 2).collect(),
            refinement_level: self.refinement_level + 1,
        }
    }

    /// Companion grid for error estimation: half the nodes, same panels.
    fn coarser(&self) -> Self {
        Self {
            nodes_per_axis: self
                .nodes_per_axis
                .iter()
                .map(|&v| (v / 2).max(2))
                .collect(),
            panels_per_axis: self.panels_per_axis.clone(),
            refinement_level: self.refinement_level,
        }
    }
}

/// A rectangle in ℚ_n coordinates; axis 0 is radial.
#[derive(Debug, Clone)]
pub struct QBox {
    pub intervals: Vec<(f64, f64)>,
}

impl QBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.len() < 2 {
            return Err(Error::InvalidParameter("need at least 2 axes".into()));
        }
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParameter(format!("bad interval ({lo}, {hi})")));
            }
        }
        if intervals[0].0 < 0.0 || intervals[0].1 > 1.0 {
            return Err(Error::OutOfDomain("radial interval outside [0,1]".into()));
        }
        Ok(Self { intervals })
    }

    pub fn from_dyadic(bx: &DyadicBox) -> Self {
        Self {
            intervals: bx.intervals.clone(),
        }
    }

    /// Full-angle shell of generation m: the union of all generation-m boxes.
    pub fn shell(n: usize, m: u32) -> Self {
        let mut intervals = vec![radial_interval(m)];
        for _ in 0..n.saturating_sub(2) {
            intervals.push((0.0, std::f64::consts::PI));
        }
        intervals.push((0.0, std::f64::consts::TAU));
        Self { intervals }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }
}

// ---------------------------------------------------------------------------
// Gauss–Legendre rule (Newton on the Legendre recurrence), cached per order
// ---------------------------------------------------------------------------

fn gl_cache() -> &'static Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights of the order-n Gauss–Legendre rule on [-1, 1].
pub fn gl_rule(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    assert!(n >= 1);
    if let Some(r) = gl_cache().lock().unwrap().get(&n) {
        return r.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let arc = Arc::new((nodes, weights));
    gl_cache().lock().unwrap().insert(n, arc.clone());
    arc
}

// ---------------------------------------------------------------------------
// Per-axis node tables with the separable density folded into the weights
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
struct Axis {
    pos: Vec<f64>,
    w: Vec<f64>,
    cosv: Vec<f64>,
    sinv: Vec<f64>,
}

/// Panel boundaries: `panels` uniform pieces between each pair of consecutive
/// breakpoints (which always include lo and hi).
fn panel_boundaries(lo: f64, hi: f64, panels: usize, breaks: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > lo + 1e-15 && b < hi - 1e-15)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut out = Vec::with_capacity((cuts.len() + 1) * panels + 1);
    out.push(lo);
    let mut prev = lo;
    for &c in cuts.iter().chain(std::iter::once(&hi)) {
        for p in 1..=panels {
            out.push(prev + (c - prev) * p as f64 / panels as f64);
        }
        prev = c;
    }
    out
}

fn fill_axis_radial(
    ax: &mut Axis,
    bounds: &[f64],
    nodes: usize,
    n: usize,
    lambda: f64,
    global_const: f64,
) {
    let rule = gl_rule(nodes);
    let count = (bounds.len() - 1) * nodes;
    ax.pos.clear();
    ax.w.clear();
    ax.pos.reserve(count);
    ax.w.reserve(count);
    let npow = (n - 1) as i32;
    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for i in 0..nodes {
            let r = mid + half * rule.0[i];
            let w2 = 1.0 - r * r;
            ax.pos.push(r);
            ax.w.push(global_const * half * rule.1[i] * r.powi(npow) * w2.powf(lambda));
        }
    }
}

fn fill_axis_angular(ax: &mut Axis, bounds: &[f64], nodes: usize, sin_pow: i32) {
    let rule = gl_rule(nodes);
    let count = (bounds.len() - 1) * nodes;
    ax.pos.clear();
    ax.w.clear();
    ax.cosv.clear();
    ax.sinv.clear();
    ax.pos.reserve(count);
    ax.w.reserve(count);
    ax.cosv.reserve(count);
    ax.sinv.reserve(count);
    for seg in bounds.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for i in 0..nodes {
            let t = mid + half * rule.0[i];
            let (s, c) = t.sin_cos();
            ax.pos.push(t);
            ax.cosv.push(c);
            ax.sinv.push(s);
            let wf = if sin_pow == 0 { 1.0 } else { s.powi(sin_pow) };
            ax.w.push(half * rule.1[i] * wf);
        }
    }
}

fn tensor_integrate<F: Fn(&[f64]) -> Complex64>(f: &F, rad: &Axis, angs: &[Axis]) -> Complex64 {
    let n = angs.len() + 1;
    let mut acc = Complex64::new(0.0, 0.0);
    match n {
        2 => {
            let mut xb = [0.0f64; 2];
            let ang = &angs[0];
            for (i, &r) in rad.pos.iter().enumerate() {
                let wr = rad.w[i];
                for j in 0..ang.pos.len() {
                    xb[0] = r * ang.cosv[j];
                    xb[1] = r * ang.sinv[j];
                    acc += f(&xb) * (wr * ang.w[j]);
                }
            }
        }
        3 => {
            let mut xb = [0.0f64; 3];
            let (a2, a3) = (&angs[0], &angs[1]);
            for (i, &r) in rad.pos.iter().enumerate() {
                let wr = rad.w[i];
                for j in 0..a2.pos.len() {
                    let x1 = r * a2.cosv[j];
                    let pre = r * a2.sinv[j];
                    let wij = wr * a2.w[j];
                    xb[0] = x1;
                    for l in 0..a3.pos.len() {
                        xb[1] = pre * a3.cosv[l];
                        xb[2] = pre * a3.sinv[l];
                        acc += f(&xb) * (wij * a3.w[l]);
                    }
                }
            }
        }
        _ => {
            let mut xb = vec![0.0f64; n];
            for (i, &r) in rad.pos.iter().enumerate() {
                tensor_rec(f, angs, 0, r, rad.w[i], &mut xb, &mut acc);
            }
        }
    }
    acc
}

/// Recursive tail over the angular axes; `ang_idx` indexes into `angs`
/// (= ℚ_n axis ang_idx + 1), `prefix` carries r·sinθ₂⋯sinθ_{ang_idx+1}.
fn tensor_rec<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    angs: &[Axis],
    ang_idx: usize,
    prefix: f64,
    wprod: f64,
    xb: &mut [f64],
    acc: &mut Complex64,
) {
    let n = angs.len() + 1;
    let a = &angs[ang_idx];
    if ang_idx == angs.len() - 1 {
        for j in 0..a.pos.len() {
            xb[n - 2] = prefix * a.cosv[j];
            xb[n - 1] = prefix * a.sinv[j];
            *acc += f(xb) * (wprod * a.w[j]);
        }
    } else {
        for j in 0..a.pos.len() {
            xb[ang_idx] = prefix * a.cosv[j];
            tensor_rec(f, angs, ang_idx + 1, prefix * a.sinv[j], wprod * a.w[j], xb, acc);
        }
    }
}

/// Like `fill_axis_angular` but with uniform panels, no boundary allocation.
fn fill_axis_angular_uniform(
    ax: &mut Axis,
    lo: f64,
    hi: f64,
    panels: usize,
    nodes: usize,
    sin_pow: i32,
) {
    let rule = gl_rule(nodes);
    let count = panels * nodes;
    ax.pos.clear();
    ax.w.clear();
    ax.cosv.clear();
    ax.sinv.clear();
    ax.pos.reserve(count);
    ax.w.reserve(count);
    ax.cosv.reserve(count);
    ax.sinv.reserve(count);
    let width = (hi - lo) / panels as f64;
    for p in 0..panels {
        let a = lo + width * p as f64;
        let half = 0.5 * width;
        let mid = a + half;
        for i in 0..nodes {
            let t = mid + half * rule.0[i];
            let (s, c) = t.sin_cos();
            ax.pos.push(t);
            ax.cosv.push(c);
            ax.sinv.push(s);
            let wf = if sin_pow == 0 { 1.0 } else { s.powi(sin_pow) };
            ax.w.push(half * rule.1[i] * wf);
        }
    }
}

fn build_axes(
    bx: &QBox,
    spec: &MeasureSpec,
    grid: &QuadratureGrid,
    radial_breaks: &[f64],
) -> Vec<Axis> {
    let n = bx.dim();
    let mut axes = vec![Axis::default(); n];
    let (lo, hi) = bx.intervals[0];
    let bounds = panel_boundaries(lo, hi, grid.panels_for(0), radial_breaks);
    fill_axis_radial(
        &mut axes[0],
        &bounds,
        grid.nodes_for(0),
        n,
        spec.lambda,
        spec.density_const,
    );
    for axis in 1..n {
        let (lo, hi) = bx.intervals[axis];
        let bounds = panel_boundaries(lo, hi, grid.panels_for(axis), &[]);
        let sin_pow = (n - 1 - axis) as i32;
        fill_axis_angular(&mut axes[axis], &bounds, grid.nodes_for(axis), sin_pow);
    }
    axes
}

fn eval_box<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    bx: &QBox,
    spec: &MeasureSpec,
    grid: &QuadratureGrid,
    radial_breaks: &[f64],
) -> Result<Complex64> {
    if bx.dim() != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            got: bx.dim(),
        });
    }
    let axes = build_axes(bx, spec, grid, radial_breaks);
    let v = tensor_integrate(f, &axes[0], &axes[1..]);
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite(format!(
            "integrand produced a non-finite value on box {:?}",
            bx.intervals
        )));
    }
    Ok(v)
}

/// Visit every tensor quadrature node of the box as (point, weight) with the
/// full dV_λ density folded into the weight. The building block for batched
/// kernel evaluations that amortize node generation across many integrands.
pub fn quad_nodes<F: FnMut(&[f64], f64)>(
    bx: &QBox,
    spec: &MeasureSpec,
    grid: &QuadratureGrid,
    radial_breaks: &[f64],
    mut visit: F,
) {
    let n = bx.dim();
    let axes = build_axes(bx, spec, grid, radial_breaks);
    let (rad, angs) = (&axes[0], &axes[1..]);
    let mut xb = vec![0.0f64; n];
    for (i, &r) in rad.pos.iter().enumerate() {
        visit_rec(angs, 0, r, rad.w[i], &mut xb, &mut visit);
    }
}

fn visit_rec<F: FnMut(&[f64], f64)>(
    angs: &[Axis],
    ang_idx: usize,
    prefix: f64,
    wprod: f64,
    xb: &mut [f64],
    visit: &mut F,
) {
    let n = angs.len() + 1;
    let a = &angs[ang_idx];
    if ang_idx == angs.len() - 1 {
        for j in 0..a.pos.len() {
            xb[n - 2] = prefix * a.cosv[j];
            xb[n - 1] = prefix * a.sinv[j];
            visit(xb, wprod * a.w[j]);
        }
    } else {
        for j in 0..a.pos.len() {
            xb[ang_idx] = prefix * a.cosv[j];
            visit_rec(angs, ang_idx + 1, prefix * a.sinv[j], wprod * a.w[j], xb, visit);
        }
    }
}

/// ∫_{σ(box)} f dV_λ, with an error estimate from two refinement levels.
pub fn integrate_box<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    bx: &QBox,
    spec: &MeasureSpec,
    grid: &QuadratureGrid,
    radial_breaks: &[f64],
) -> Result<(Complex64, f64)> {
    let fine = eval_box(f, bx, spec, grid, radial_breaks)?;
    let coarse = eval_box(f, bx, spec, &grid.coarser(), radial_breaks)?;
    Ok((fine, (fine - coarse).norm()))
}

/// Weighted volume |B|_λ of a dyadic box.
pub fn box_volume(bx: &DyadicBox, spec: &MeasureSpec, grid: &QuadratureGrid) -> Result<f64> {
    let one = |_: &[f64]| Complex64::new(1.0, 0.0);
    let (v, _) = integrate_box(&one, &QBox::from_dyadic(bx), spec, grid, &[])?;
    Ok(v.re)
}

/// Closed-form |B|_0 (the λ = 0 box integrals are elementary); used as the
/// independent oracle for `box_volume`.
pub fn box_volume_closed_lambda0(bx: &DyadicBox) -> f64 {
    let n = bx.intervals.len();
    let (r0, r1) = bx.intervals[0];
    let mut v = (r1.powi(n as i32) - r0.powi(n as i32)) / n as f64;
    for axis in 1..n {
        let (lo, hi) = bx.intervals[axis];
        v *= crate::special::sin_power_integral(n - 1 - axis, lo, hi);
    }
    v * n as f64 / angular_total(n)
}

/// Exact dV_λ mass of the radial shell r ∈ [r0, r1] (regularized incomplete
/// beta in r²); the 1-D oracle for ball and shell quadratures.
pub fn radial_shell_mass(spec: &MeasureSpec, r0: f64, r1: f64) -> f64 {
    let a = spec.n as f64 / 2.0;
    let b = spec.lambda + 1.0;
    inc_beta_reg(a, b, r1 * r1) - inc_beta_reg(a, b, r0 * r0)
}

fn pairwise_sum(vals: &[Complex64]) -> Complex64 {
    match vals.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => vals[0],
        _ => {
            let mid = vals.len() / 2;
            pairwise_sum(&vals[..mid]) + pairwise_sum(&vals[mid..])
        }
    }
}

fn generation_pass<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    spec: &MeasureSpec,
    m: u32,
    grid: &QuadratureGrid,
    radial_breaks: &[f64],
) -> Complex64 {
    let n = spec.n;
    let (rlo, rhi) = radial_interval(m);
    let rbounds = panel_boundaries(rlo, rhi, grid.panels_for(0), radial_breaks);
    let mut axes = vec![Axis::default(); n];
    fill_axis_radial(
        &mut axes[0],
        &rbounds,
        grid.nodes_for(0),
        n,
        spec.lambda,
        spec.density_const,
    );
    let mask_count = if n >= 3 { 1u32 << (n - 2) } else { 1 };
    let mut intervals = vec![(0.0, 0.0); n];
    let mut chunk_sums: Vec<Complex64> = Vec::with_capacity(1usize << m.min(20));
    let mut cur_k2 = u32::MAX;
    let mut cur = Complex64::new(0.0, 0.0);
    // the radial table is shared across the generation; angular tables are
    // refilled in place per box
    let (rad_axis, ang_axes) = axes.split_at_mut(1);
    for_each_ladder(n, m, |ladder| {
        if ladder[0] != cur_k2 {
            if cur_k2 != u32::MAX {
                chunk_sums.push(cur);
            }
            cur = Complex64::new(0.0, 0.0);
            cur_k2 = ladder[0];
        }
        for mask in 0..mask_count {
            ladder_intervals(n, m, ladder, mask, &mut intervals);
            for axis in 1..n {
                let (lo, hi) = intervals[axis];
                fill_axis_angular_uniform(
                    &mut ang_axes[axis - 1],
                    lo,
                    hi,
                    grid.panels_for(axis),
                    grid.nodes_for(axis),
                    (n - 1 - axis) as i32,
                );
            }
            cur += tensor_integrate(f, &rad_axis[0], ang_axes);
        }
    });
    if cur_k2 != u32::MAX {
        chunk_sums.push(cur);
    }
    pairwise_sum(&chunk_sums)
}

/// Box-assembled ∫_{𝔹_n} f dV_λ over generations 0..=max_gen (covering
/// r < 1 - 2^{-max_gen-1}), with deterministic fixed-order summation and a
/// two-level error estimate.
pub fn integrate_ball<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    spec: &MeasureSpec,
    max_gen: u32,
    grid: &QuadratureGrid,
    radial_breaks: &[f64],
) -> Result<(Complex64, f64)> {
    let mut gen_vals = Vec::with_capacity(max_gen as usize + 1);
    let mut err = 0.0;
    let coarse_grid = grid.coarser();
    for m in 0..=max_gen {
        let v = generation_pass(f, spec, m, grid, radial_breaks);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite(format!("generation {m} sum not finite")));
        }
        let vc = generation_pass(f, spec, m, &coarse_grid, radial_breaks);
        err += (v - vc).norm();
        gen_vals.push(v);
    }
    Ok((pairwise_sum(&gen_vals), err))
}

/// ‖f‖_{p,λ} over the covered region.
pub fn norm_p<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    norm: &NormSpec,
    spec: &MeasureSpec,
    max_gen: u32,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let p = norm.p;
    let g = |x: &[f64]| Complex64::new(f(x).norm().powf(p), 0.0);
    let (v, _) = integrate_ball(&g, spec, max_gen, grid, &[])?;
    Ok(v.re.max(0.0).powf(1.0 / p))
}

// ---------------------------------------------------------------------------
// Anchored prefix integrals over a dyadic box
// ---------------------------------------------------------------------------

/// Cumulative integrals ∫_{B(x^(j), y_g)} ψ dV_λ on a cell grid, anchored at
/// the corner x^(j) and oriented toward y^(j) (reflection-aware).
#[derive(Debug, Clone)]
pub struct PrefixGrid {
    /// Cells per axis (radial axis may exceed the request when breakpoints are inserted).
    pub cells_per_axis: Vec<usize>,
    /// Boundary coordinates per axis in anchored order (length cells+1).
    pub boundaries: Vec<Vec<f64>>,
    /// Prefix values at all corner tuples, row-major over (cells+1) per axis.
    pub values: Vec<Complex64>,
}

impl PrefixGrid {
    pub fn corner_dims(&self) -> Vec<usize> {
        self.cells_per_axis.iter().map(|c| c + 1).collect()
    }

    pub fn value(&self, idx: &[usize]) -> Complex64 {
        let dims = self.corner_dims();
        let mut flat = 0;
        for (i, &d) in idx.iter().zip(&dims) {
            flat = flat * d + i;
        }
        self.values[flat]
    }

    /// Full-box value (the y^(j) corner).
    pub fn total(&self) -> Complex64 {
        *self.values.last().expect("nonempty")
    }

    /// max |prefix| over all corners: the grid approximation of ψ̂ from below.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub fn prefix_integrals<F: Fn(&[f64]) -> Complex64>(
    psi: &F,
    bx: &DyadicBox,
    spec: &MeasureSpec,
    cells_per_axis: usize,
    nodes_per_cell: usize,
    radial_breaks: &[f64],
) -> Result<PrefixGrid> {
    let n = spec.n;
    if bx.intervals.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bx.intervals.len(),
        });
    }
    // natural (ascending) cell boundaries; radial axis also splits at breakpoints
    let mut nat_bounds: Vec<Vec<f64>> = Vec::with_capacity(n);
    for axis in 0..n {
        let (lo, hi) = bx.intervals[axis];
        let breaks: &[f64] = if axis == 0 { radial_breaks } else { &[] };
        nat_bounds.push(panel_boundaries(lo, hi, cells_per_axis, breaks));
    }
    let counts: Vec<usize> = nat_bounds.iter().map(|b| b.len() - 1).collect();
    // per-axis tables: one panel per cell so node index / nodes_per_cell = cell index
    let mut axes = vec![Axis::default(); n];
    fill_axis_radial(
        &mut axes[0],
        &nat_bounds[0],
        nodes_per_cell,
        n,
        spec.lambda,
        spec.density_const,
    );
    for axis in 1..n {
        fill_axis_angular(
            &mut axes[axis],
            &nat_bounds[axis],
            nodes_per_cell,
            (n - 1 - axis) as i32,
        );
    }
    // cell integrals in natural order
    let mut strides = vec![1usize; n];
    for axis in (0..n - 1).rev() {
        strides[axis] = strides[axis + 1] * counts[axis + 1];
    }
    let total_cells: usize = counts.iter().product();
    let mut cells = vec![Complex64::new(0.0, 0.0); total_cells];
    {
        let mut xb = vec![0.0f64; n];
        bin_rec(
            psi,
            &axes,
            0,
            1.0,
            1.0,
            0,
            &strides,
            nodes_per_cell,
            &mut xb,
            &mut cells,
        );
    }
    if cells.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("prefix cell integral not finite".into()));
    }
    // anchored reorder, then inclusive prefix sums on the (cells+1) corner grid
    let corner_dims: Vec<usize> = counts.iter().map(|c| c + 1).collect();
    let mut corner_strides = vec![1usize; n];
    for axis in (0..n - 1).rev() {
        corner_strides[axis] = corner_strides[axis + 1] * corner_dims[axis + 1];
    }
    let total_corners: usize = corner_dims.iter().product();
    let mut values = vec![Complex64::new(0.0, 0.0); total_corners];
    // place each natural cell at corner index (anchored_cell + 1) per axis
    for flat_nat in 0..total_cells {
        let mut rem = flat_nat;
        let mut corner_flat = 0;
        for axis in 0..n {
            let nat = rem / strides[axis];
            rem %= strides[axis];
            let anch = if bx.anchor_at_hi[axis] {
                counts[axis] - 1 - nat
            } else {
                nat
            };
            corner_flat += (anch + 1) * corner_strides[axis];
        }
        values[corner_flat] = cells[flat_nat];
    }
    for axis in 0..n {
        // prefix-sum along `axis`
        for flat in 0..total_corners {
            let idx = (flat / corner_strides[axis]) % corner_dims[axis];
            if idx > 0 {
                values[flat] = values[flat] + values[flat - corner_strides[axis]];
            }
        }
    }
    // boundaries in anchored order
    let boundaries: Vec<Vec<f64>> = nat_bounds
        .iter()
        .zip(&bx.anchor_at_hi)
        .map(|(b, &rev)| {
            if rev {
                b.iter().rev().copied().collect()
            } else {
                b.clone()
            }
        })
        .collect();
    Ok(PrefixGrid {
        cells_per_axis: counts,
        boundaries,
        values,
    })
}

#[allow(clippy::too_many_arguments)]
fn bin_rec<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    axes: &[Axis],
    axis: usize,
    prefix: f64,
    wprod: f64,
    cell_base: usize,
    strides: &[usize],
    npc: usize,
    xb: &mut [f64],
    out: &mut [Complex64],
) {
    let n = axes.len();
    let a = &axes[axis];
    if axis == 0 {
        for (i, &r) in a.pos.iter().enumerate() {
            bin_rec(
                f,
                axes,
                1,
                r,
                a.w[i],
                (i / npc) * strides[0],
                strides,
                npc,
                xb,
                out,
            );
        }
    } else if axis == n - 1 {
        for j in 0..a.pos.len() {
            xb[n - 2] = prefix * a.cosv[j];
            xb[n - 1] = prefix * a.sinv[j];
            out[cell_base + (j / npc) * strides[axis]] += f(xb) * (wprod * a.w[j]);
        }
    } else {
        for j in 0..a.pos.len() {
            xb[axis - 1] = prefix * a.cosv[j];
            bin_rec(
                f,
                axes,
                axis + 1,
                prefix * a.sinv[j],
                wprod * a.w[j],
                cell_base + (j / npc) * strides[axis],
                strides,
                npc,
                xb,
                out,
            );
        }
    }
}
