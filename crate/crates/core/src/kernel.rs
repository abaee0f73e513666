//! Harmonic Bergman kernels and operators: extended zonal harmonics, the
//! truncated reproducing kernel R_λ, the projection P_λ and its maximal
//! variant, the generalized Toeplitz series over dyadic boxes, finite-section
//! matrix elements, and the analytic Bergman kernel of the disk.
//!
//! R_λ(x,y) = Σ_k coeff(k) Z_k(x,y) with coeff(k) = Γ(k+n/2+λ+1)/Γ(k+n/2) ·
//! Γ(n/2)/Γ(n/2+λ+1) and Z_k(x,y) = dim_k (|x||y|)^k G_k(x̂·ŷ), where G_k is
//! the Gegenbauer-type polynomial normalized by G_k(1) = 1 (G_k = Chebyshev
//! for n = 2, Legendre for n = 3). The normalization is pinned by the
//! reproducing-property oracle, not by a printed formula; the series tail is
//! geometric in |x||y| with polynomially growing coefficients.

use crate::boxes::{enumerate_generation, ladder_intervals, radial_interval, BoxId};
use crate::error::{Error, Result};
use crate::geometry::{dot, norm};
use crate::measure::{integrate_box, quad_nodes, MeasureSpec, QBox, QuadratureGrid};
use crate::special::harmonic_dim;
use crate::symbol::Symbol;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Beyond this |x||y| the truncation tail cannot be certified at sane degrees.
const T_REFUSE: f64 = 0.98;
const K_HARD_CAP: usize = 2000;

/// Precomputed series data for one (n, λ).
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub n: usize,
    pub lambda: f64,
    /// coeff(k)·dim_k, k = 0..len-1.
    coef: Vec<f64>,
    /// G_k(u) = rec_a[k]·u·G_{k-1}(u) - rec_b[k]·G_{k-2}(u), k ≥ 2.
    rec_a: Vec<f64>,
    rec_b: Vec<f64>,
}

impl KernelTable {
    pub fn build(n: usize, lambda: f64, k_max: usize) -> Self {
        let h = n as f64 / 2.0;
        let mu = (n as f64 - 2.0) / 2.0;
        let len = k_max + 1;
        let mut coef = Vec::with_capacity(len);
        let mut rec_a = vec![0.0; len];
        let mut rec_b = vec![0.0; len];
        let mut c = 1.0; // coeff(0) = 1
        for k in 0..len {
            coef.push(c * harmonic_dim(n, k));
            c *= (k as f64 + h + lambda + 1.0) / (k as f64 + h);
            if k >= 2 {
                let kf = k as f64;
                rec_a[k] = 2.0 * (kf + mu - 1.0) / (kf + 2.0 * mu - 1.0);
                rec_b[k] = (kf - 1.0) / (kf + 2.0 * mu - 1.0);
            }
        }
        Self {
            n,
            lambda,
            coef,
            rec_a,
            rec_b,
        }
    }

    pub fn k_max(&self) -> usize {
        self.coef.len() - 1
    }

    /// Normalized Gegenbauer-type value G_k(u), |u| ≤ 1.
    pub fn gegenbauer(&self, k: usize, u: f64) -> f64 {
        debug_assert!(k <= self.k_max());
        if k == 0 {
            return 1.0;
        }
        let (mut g0, mut g1) = (1.0, u);
        for j in 2..=k {
            let g2 = self.rec_a[j] * u * g1 - self.rec_b[j] * g0;
            g0 = g1;
            g1 = g2;
        }
        g1
    }

    /// Truncated kernel Σ_{k ≤ k_use} coeff(k)·dim_k·s^k·G_k(u).
    pub fn eval(&self, s: f64, u: f64, k_use: usize) -> f64 {
        debug_assert!(k_use <= self.k_max());
        let mut acc = self.coef[0];
        if k_use == 0 || s == 0.0 {
            return acc;
        }
        let mut sp = s;
        acc += self.coef[1] * sp * u;
        let (mut g0, mut g1) = (1.0, u);
        for k in 2..=k_use {
            let g2 = self.rec_a[k] * u * g1 - self.rec_b[k] * g0;
            g0 = g1;
            g1 = g2;
            sp *= s;
            acc += self.coef[k] * sp * g2;
        }
        acc
    }

    /// Upper bound on Σ_{k > k_from} coeff(k)·dim_k·t^k (|G_k| ≤ 1 on [-1,1]).
    pub fn tail_bound(&self, t: f64, k_from: usize) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut tp = t.powi(k_from as i32 + 1);
        let mut k = k_from + 1;
        loop {
            if k >= self.coef.len() {
                // coefficient ratio decreases in k, so a geometric bound closes the sum
                let last = self.coef.len() - 1;
                let ratio = t * self.coef[last] / self.coef[last - 1];
                let term = self.coef[last] * tp * t.powi((k - last) as i32 - 1);
                return if ratio < 1.0 {
                    sum + term * ratio / (1.0 - ratio)
                } else {
                    f64::INFINITY
                };
            }
            let term = self.coef[k] * tp;
            sum += term;
            let ratio = if k + 1 < self.coef.len() {
                t * self.coef[k + 1] / self.coef[k]
            } else {
                1.0
            };
            if ratio < 1.0 && term * ratio / (1.0 - ratio) < sum * 1e-16 + 1e-300 {
                return sum + term * ratio / (1.0 - ratio);
            }
            tp *= t;
            k += 1;
        }
    }
}

/// Extended zonal harmonic Z_k(x, y) = dim_k |x|^k |y|^k G_k(x̂·ŷ).
pub fn zonal(n: usize, k: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len().max(y.len()),
        });
    }
    if k == 0 {
        return Ok(1.0);
    }
    let (rx, ry) = (norm(x), norm(y));
    if rx == 0.0 || ry == 0.0 {
        return Ok(0.0);
    }
    let u = (dot(x, y) / (rx * ry)).clamp(-1.0, 1.0);
    let table = KernelTable::build(n, 0.0, k);
    Ok(harmonic_dim(n, k) * (rx * ry).powi(k as i32) * table.gegenbauer(k, u))
}

/// Evaluation configuration for kernels, projections and Toeplitz series.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KernelConfig {
    pub lambda: f64,
    /// Series truncation degree K (auto-increased until the tail certificate
    /// passes at the evaluation arguments).
    pub truncation_degree: usize,
    pub tail_tol: f64,
    /// Radial generation cutoff for ball-wide integrals.
    pub max_gen: u32,
    /// Generations resolved box-by-box in the Toeplitz series; deeper
    /// generations are accumulated shell-wise (the generation-m boxes tile
    /// the shell, so the per-generation sums are identical).
    pub boxwise_gen_limit: u32,
    /// Radial nodes and panel policy for the shell integrals.
    pub grid: QuadratureGrid,
}

impl KernelConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            truncation_degree: 60,
            tail_tol: 1e-8,
            max_gen: 24,
            boxwise_gen_limit: 4,
            grid: QuadratureGrid::default(),
        }
    }

    pub fn with_truncation(mut self, k: usize, tail_tol: f64) -> Self {
        self.truncation_degree = k;
        self.tail_tol = tail_tol;
        self
    }

    pub fn with_max_gen(mut self, m: u32) -> Self {
        self.max_gen = m;
        self
    }
}

/// Smallest K ≥ cfg.truncation_degree whose tail certificate passes at
/// argument product t = |x||y|.
pub fn effective_truncation(table: &KernelTable, t: f64, cfg: &KernelConfig) -> Result<usize> {
    if t > T_REFUSE {
        return Err(Error::TruncationInsufficient {
            t,
            tol: cfg.tail_tol,
        });
    }
    let mut k = cfg.truncation_degree.min(table.k_max());
    loop {
        if table.tail_bound(t, k) < cfg.tail_tol {
            return Ok(k);
        }
        if k >= table.k_max() || k >= K_HARD_CAP {
            return Err(Error::TruncationInsufficient {
                t,
                tol: cfg.tail_tol,
            });
        }
        k = (k + 10).min(table.k_max());
    }
}

/// R_λ(x, y), truncated with a certified tail.
pub fn reproducing_kernel(x: &[f64], y: &[f64], cfg: &KernelConfig) -> Result<f64> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let table = KernelTable::build(n, cfg.lambda, (cfg.truncation_degree + 600).min(K_HARD_CAP));
    kernel_value(&table, x, y, cfg)
}

fn kernel_value(table: &KernelTable, x: &[f64], y: &[f64], cfg: &KernelConfig) -> Result<f64> {
    let s = norm(x) * norm(y);
    let k_use = effective_truncation(table, s, cfg)?;
    Ok(table.eval(s, kernel_cos(x, y), k_use))
}

/// Angular-panel plan: enough Gauss–Legendre panels that trigonometric
/// integrands of the given bandwidth are resolved (h·D ≤ 10 with 10-node
/// panels keeps the per-axis error near 1e-10).
fn shell_grid(n: usize, bandwidth: usize, radial_nodes: usize) -> QuadratureGrid {
    let d = bandwidth.max(4) as f64;
    let mut panels = vec![1usize; n];
    let mut nodes = vec![radial_nodes.max(4); n];
    for axis in 1..n {
        let width = if axis == n - 1 { TAU } else { PI };
        panels[axis] = (width * d / 10.0).ceil() as usize;
        nodes[axis] = 10;
    }
    QuadratureGrid {
        nodes_per_axis: nodes,
        panels_per_axis: panels,
        refinement_level: 0,
    }
}

/// Per-box grid for the box-wise Toeplitz phase: panels scale with the box's
/// own angular widths.
fn box_grid(intervals: &[(f64, f64)], bandwidth: usize, radial_nodes: usize) -> QuadratureGrid {
    let d = bandwidth.max(4) as f64;
    let n = intervals.len();
    let mut panels = vec![1usize; n];
    let mut nodes = vec![radial_nodes.max(4); n];
    for axis in 1..n {
        let width = intervals[axis].1 - intervals[axis].0;
        panels[axis] = ((width * d / 10.0).ceil() as usize).max(1);
        nodes[axis] = 10;
    }
    QuadratureGrid {
        nodes_per_axis: nodes,
        panels_per_axis: panels,
        refinement_level: 0,
    }
}

/// P_λ f(x) = ∫ f(y) R_λ(x,y) dV_λ(y), assembled over generation shells
/// through cfg.max_gen. Returns the value and a radial-tail/quadrature error
/// indicator (the magnitude of the last shell's contribution).
pub fn project<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    x: &[f64],
    spec: &MeasureSpec,
    cfg: &KernelConfig,
) -> Result<(Complex64, f64)> {
    let n = spec.n;
    let table = KernelTable::build(n, cfg.lambda, (cfg.truncation_degree + 600).min(K_HARD_CAP));
    let k_use = effective_truncation(&table, norm(x) * covered_radius(cfg), cfg)?;
    let grid = shell_grid(n, k_use + 8, cfg.grid.nodes_for(0));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    for m in 0..=cfg.max_gen {
        let shell = QBox::shell(n, m);
        let g = |y: &[f64]| -> Complex64 {
            let s = norm(x) * norm(y);
            let u = kernel_cos(x, y);
            f(y) * table.eval(s, u, k_use)
        };
        let (v, _) = integrate_box(&g, &shell, spec, &grid, &[])?;
        acc += v;
        last = v.norm();
    }
    Ok((acc, last))
}

fn kernel_cos(x: &[f64], y: &[f64]) -> f64 {
    let d = norm(x) * norm(y);
    if d == 0.0 {
        0.0
    } else {
        (dot(x, y) / d).clamp(-1.0, 1.0)
    }
}

/// Largest |y| reached by the shell assembly: 1 - 2^{-max_gen-1}. The tail
/// certificate only needs to hold at |x| times this.
fn covered_radius(cfg: &KernelConfig) -> f64 {
    1.0 - 0.5f64.powi(cfg.max_gen as i32 + 1)
}

/// Batched projections: many integrands at many evaluation points over one
/// shared node set. Returns values[f_idx][x_idx].
pub fn project_batch(
    fs: &[&dyn Fn(&[f64]) -> Complex64],
    xs: &[Vec<f64>],
    spec: &MeasureSpec,
    cfg: &KernelConfig,
) -> Result<Vec<Vec<Complex64>>> {
    let n = spec.n;
    let table = KernelTable::build(n, cfg.lambda, (cfg.truncation_degree + 600).min(K_HARD_CAP));
    let t_max = xs.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let k_use = effective_truncation(&table, t_max * covered_radius(cfg), cfg)?;
    let grid = shell_grid(n, k_use + 8, cfg.grid.nodes_for(0));
    let mut out = vec![vec![Complex64::new(0.0, 0.0); xs.len()]; fs.len()];
    let mut kvals = vec![0.0f64; xs.len()];
    let mut fvals = vec![Complex64::new(0.0, 0.0); fs.len()];
    for m in 0..=cfg.max_gen {
        let shell = QBox::shell(n, m);
        quad_nodes(&shell, spec, &grid, &[], |y, w| {
            for (kv, x) in kvals.iter_mut().zip(xs) {
                *kv = table.eval(norm(x) * norm(y), kernel_cos(x, y), k_use);
            }
            for (fv, f) in fvals.iter_mut().zip(fs) {
                *fv = f(y) * w;
            }
            for (fi, fv) in fvals.iter().enumerate() {
                let row = &mut out[fi];
                for (xi, kv) in kvals.iter().enumerate() {
                    row[xi] += fv * *kv;
                }
            }
        });
    }
    Ok(out)
}

/// Maximal projection P^M_λ f(x) = ∫ |f||R_λ(x,·)| dV_λ ≥ |P_λ f(x)|.
pub fn maximal_project<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    x: &[f64],
    spec: &MeasureSpec,
    cfg: &KernelConfig,
) -> Result<f64> {
    let n = spec.n;
    let table = KernelTable::build(n, cfg.lambda, (cfg.truncation_degree + 600).min(K_HARD_CAP));
    let k_use = effective_truncation(&table, norm(x) * covered_radius(cfg), cfg)?;
    let grid = shell_grid(n, k_use + 8, cfg.grid.nodes_for(0));
    let mut acc = 0.0;
    for m in 0..=cfg.max_gen {
        let shell = QBox::shell(n, m);
        let g = |y: &[f64]| -> Complex64 {
            let kv = table.eval(norm(x) * norm(y), kernel_cos(x, y), k_use);
            Complex64::new(f(y).norm() * kv.abs(), 0.0)
        };
        let (v, _) = integrate_box(&g, &shell, spec, &grid, &[])?;
        acc += v.re;
    }
    Ok(acc)
}

/// Result of a generalized Toeplitz evaluation.
#[derive(Debug, Clone)]
pub struct ToeplitzEval {
    pub value: Complex64,
    /// Per-generation term sums Σ_{B_j of generation m} P_λ(ψχ_{B_j}f)(x).
    pub per_generation: Vec<(u32, Complex64)>,
    /// Individual box terms for the box-wise generations.
    pub boxwise: Vec<(BoxId, Complex64)>,
    /// False when the late generation sums fail to decay (series suspect).
    pub tail_decaying: bool,
}

/// T_ψ f(x) = Σ_j P_λ(ψ χ_{B_j} f)(x), accumulated in the fixed enumeration
/// order through generation cfg.max_gen. Generations above
/// cfg.boxwise_gen_limit are accumulated shell-at-a-time: within a
/// generation the boxes tile the shell, so the partial sums at generation
/// boundaries are unchanged.
pub fn toeplitz_apply<F: Fn(&[f64]) -> Complex64>(
    psi: &Symbol,
    f: &F,
    x: &[f64],
    spec: &MeasureSpec,
    cfg: &KernelConfig,
) -> Result<ToeplitzEval> {
    let n = spec.n;
    let table = KernelTable::build(n, cfg.lambda, (cfg.truncation_degree + 600).min(K_HARD_CAP));
    let k_use = effective_truncation(&table, norm(x) * covered_radius(cfg), cfg)?;
    let bandwidth = k_use + 8;
    let kernel_f = |y: &[f64]| -> Result<Complex64> {
        Ok(psi.eval(y)? * f(y) * table.eval(norm(x) * norm(y), kernel_cos(x, y), k_use))
    };
    let mut per_generation = Vec::new();
    let mut boxwise = Vec::new();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..=cfg.max_gen {
        let (rlo, rhi) = radial_interval(m);
        let breaks = psi.radial_breaks(rlo, rhi);
        let mut gen_sum = Complex64::new(0.0, 0.0);
        if m <= cfg.boxwise_gen_limit {
            for id in enumerate_generation(n, m) {
                let mut intervals = vec![(0.0, 0.0); n];
                ladder_intervals(n, m, &id.ladder, id.mask, &mut intervals);
                let grid = box_grid(&intervals, bandwidth, cfg.grid.nodes_for(0));
                let bx = QBox::new(intervals)?;
                let g = |y: &[f64]| kernel_f(y).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                let (v, _) = integrate_box(&g, &bx, spec, &grid, &breaks)?;
                boxwise.push((id, v));
                gen_sum += v;
            }
        } else {
            let grid = shell_grid(n, bandwidth, cfg.grid.nodes_for(0));
            let shell = QBox::shell(n, m);
            let g = |y: &[f64]| kernel_f(y).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            let (v, _) = integrate_box(&g, &shell, spec, &grid, &breaks)?;
            gen_sum = v;
        }
        per_generation.push((m, gen_sum));
        acc += gen_sum;
    }
    // decay diagnostic: the last generations must sit well below the peak
    let peak = per_generation
        .iter()
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    let tail = per_generation
        .iter()
        .rev()
        .take(2)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    let tail_decaying = per_generation.len() < 6 || tail <= 0.25 * peak.max(1e-300);
    Ok(ToeplitzEval {
        value: acc,
        per_generation,
        boxwise,
        tail_decaying,
    })
}

/// T_{ψ_ρ} f(x): the series for the truncated symbol. Boxes beyond the
/// truncation radius vanish, so the sum is effectively finite.
pub fn toeplitz_truncated<F: Fn(&[f64]) -> Complex64>(
    psi: &Symbol,
    rho: f64,
    f: &F,
    x: &[f64],
    spec: &MeasureSpec,
    cfg: &KernelConfig,
) -> Result<ToeplitzEval> {
    let truncated = Symbol::truncated(psi.clone(), rho)?;
    // generations entirely beyond rho contribute nothing
    let mut cfg = cfg.clone();
    let mut m = 0u32;
    while m < cfg.max_gen && 1.0 - 0.5f64.powi(m as i32) <= rho {
        m += 1;
    }
    cfg.max_gen = cfg.max_gen.min(m);
    toeplitz_apply(&truncated, f, x, spec, &cfg)
}

/// ⟨T_ψ e_i, e_j⟩_λ = ∫ ψ e_i e_j dV_λ for real harmonic basis elements
/// (P_λ is self-adjoint and fixes e_j).
pub fn matrix_element(
    psi: &Symbol,
    e_i: &crate::basis::HarmonicBasisElement,
    e_j: &crate::basis::HarmonicBasisElement,
    spec: &MeasureSpec,
    cfg: &KernelConfig,
) -> Result<Complex64> {
    if e_i.dim != e_j.dim || e_i.dim != spec.n {
        return Err(Error::DimensionMismatch {
            expected: spec.n,
            got: e_i.dim.max(e_j.dim),
        });
    }
    let bandwidth = e_i.degree + e_j.degree + 8;
    let grid = shell_grid(spec.n, bandwidth, cfg.grid.nodes_for(0).max(8));
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..=cfg.max_gen {
        let (rlo, rhi) = radial_interval(m);
        let breaks = psi.radial_breaks(rlo, rhi);
        let shell = QBox::shell(spec.n, m);
        let g = |y: &[f64]| -> Complex64 {
            let p = psi.eval(y).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            p * (e_i.eval(y) * e_j.eval(y))
        };
        let (v, _) = integrate_box(&g, &shell, spec, &grid, &breaks)?;
        acc += v;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Analytic Bergman space of the unit disk (𝔹₂ as ℂ)
// ---------------------------------------------------------------------------

/// Weighted analytic Bergman kernel of the disk: K^an(z, w) = (1 - z w̄)^{-(2+λ)}.
///
/// Reproduces monomials against dV_λ: ⟨z^k, z^k⟩_λ = k! Γ(λ+2)/Γ(k+λ+2).
pub fn disk_analytic_kernel(z: Complex64, w: Complex64, lambda: f64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - z * w.conj()).powf(-(2.0 + lambda))
}

fn as_complex(y: &[f64]) -> Complex64 {
    Complex64::new(y[0], y[1])
}

/// P^an f(z) over the covered disk.
pub fn project_analytic<F: Fn(Complex64) -> Complex64>(
    f: &F,
    z: Complex64,
    spec: &MeasureSpec,
    cfg: &KernelConfig,
) -> Result<Complex64> {
    if spec.n != 2 {
        return Err(Error::InvalidParameter(
            "analytic disk operators live on n = 2".into(),
        ));
    }
    let bandwidth = analytic_bandwidth(z.norm(), cfg);
    let grid = shell_grid(2, bandwidth, cfg.grid.nodes_for(0));
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..=cfg.max_gen {
        let shell = QBox::shell(2, m);
        let g = |y: &[f64]| {
            let w = as_complex(y);
            f(w) * disk_analytic_kernel(z, w, cfg.lambda)
        };
        let (v, _) = integrate_box(&g, &shell, spec, &grid, &[])?;
        acc += v;
    }
    Ok(acc)
}

/// T^an_ψ f(z) = Σ_j P^an(ψ χ_{B_j} f)(z) over the same dyadic boxes.
pub fn toeplitz_analytic_apply<F: Fn(Complex64) -> Complex64>(
    psi: &Symbol,
    f: &F,
    z: Complex64,
    spec: &MeasureSpec,
    cfg: &KernelConfig,
) -> Result<Complex64> {
    if spec.n != 2 {
        return Err(Error::InvalidParameter(
            "analytic disk operators live on n = 2".into(),
        ));
    }
    let bandwidth = analytic_bandwidth(z.norm(), cfg);
    let grid = shell_grid(2, bandwidth, cfg.grid.nodes_for(0));
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..=cfg.max_gen {
        let (rlo, rhi) = radial_interval(m);
        let breaks = psi.radial_breaks(rlo, rhi);
        let shell = QBox::shell(2, m);
        let g = |y: &[f64]| {
            let w = as_complex(y);
            let p = psi.eval(y).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            p * f(w) * disk_analytic_kernel(z, w, cfg.lambda)
        };
        let (v, _) = integrate_box(&g, &shell, spec, &grid, &breaks)?;
        acc += v;
    }
    Ok(acc)
}

/// Angular bandwidth of (1 - zw̄)^{-(2+λ)} at |z| ≤ t: smallest K with the
/// geometric tail below tail_tol.
fn analytic_bandwidth(t: f64, cfg: &KernelConfig) -> usize {
    let lambda = cfg.lambda;
    if t <= 0.0 {
        return 4;
    }
    let mut c = 1.0f64; // binomial coefficient Γ(k+2+λ)/(k! Γ(2+λ))
    let mut tp = 1.0;
    let mut k = 0usize;
    while k < K_HARD_CAP {
        c *= (k as f64 + 2.0 + lambda) / (k as f64 + 1.0);
        tp *= t;
        let tail = c * tp / (1.0 - t).max(1e-6);
        if tail < cfg.tail_tol.min(1e-8) {
            return k + 8;
        }
        k += 1;
    }
    K_HARD_CAP
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::basis_up_to;
    use crate::measure::{quad_nodes, MeasureSpec};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zonal_basics() {
        // Z_0 = 1, Z_k(0, y) = 0 for k >= 1
        assert_eq!(zonal(3, 0, &[0.0, 0.0, 0.0], &[0.5, 0.1, 0.0]).unwrap(), 1.0);
        for k in 1..5 {
            assert_eq!(zonal(3, k, &[0.0; 3], &[0.5, 0.1, 0.0]).unwrap(), 0.0);
        }
        // symmetry and homogeneity
        let x = [0.3, -0.2, 0.1];
        let y = [0.1, 0.4, -0.3];
        for k in 0..6 {
            let a = zonal(3, k, &x, &y).unwrap();
            let b = zonal(3, k, &y, &x).unwrap();
            assert!((a - b).abs() < 1e-12);
            // scale x by 2 (conceptually outside the ball; homogeneity is algebraic)
            let x2: Vec<f64> = x.iter().map(|v| v * 0.5).collect();
            let c = zonal(3, k, &x2, &y).unwrap();
            assert!((c - a * 0.5f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    /// Sphere quadrature oracle: ∫_{S^{n-1}} Z_k(ξ,·) p = p(ξ) for degree-k
    /// spherical harmonics p; this pins the dim_k·G_k normalization.
    #[test]
    fn zonal_reproduces_on_sphere() {
        for n in [2usize, 3] {
            let spec = MeasureSpec::new(n, 0.0).unwrap();
            // thin shell trick: integrate over a near-unit shell and divide by
            // its mass to emulate normalized surface measure
            let table = KernelTable::build(n, 0.0, 16);
            let xi: Vec<f64> = match n {
                2 => vec![0.6f64.cos(), 0.6f64.sin()],
                _ => vec![0.3, 0.5, (1.0f64 - 0.09 - 0.25).sqrt()],
            };
            for e in basis_up_to(n, 4).unwrap() {
                let k = e.degree;
                let grid = shell_grid(n, k + 10, 6);
                // radial factor separates: ∫ Z_k(ξ,y)p(y) dV over a shell
                // equals (∫ r^{2k+n-1}n dr)·(sphere average); compare ratios
                let shell = QBox::new({
                    let mut iv = vec![(0.90, 0.95)];
                    for a in 1..n {
                        iv.push(if a == n - 1 { (0.0, TAU) } else { (0.0, PI) });
                    }
                    iv
                })
                .unwrap();
                let g = |y: &[f64]| {
                    Complex64::new(
                        zonal_fast(&table, n, k, &xi, y) * e.eval(&unitize(y)),
                        0.0,
                    )
                };
                let (v, _) = integrate_box(&g, &shell, &spec, &grid, &[]).unwrap();
                // radial mass of r^k against n r^{n-1} dr on [0.90, 0.95]
                // (ξ is a unit vector, so only |y|^k contributes radially)
                let p = (k + n) as f64;
                let radial = (0.95f64.powf(p) - 0.90f64.powf(p)) * n as f64 / p;
                let got = v.re / radial;
                let want = e.eval(&xi);
                assert!(
                    (got - want).abs() < 1e-8 * (1.0 + want.abs()),
                    "n={n} deg={k} idx={}: {got} vs {want}",
                    e.index
                );
            }
        }
    }

    fn unitize(y: &[f64]) -> Vec<f64> {
        let r = norm(y);
        y.iter().map(|v| v / r).collect()
    }

    fn zonal_fast(table: &KernelTable, n: usize, k: usize, x: &[f64], y: &[f64]) -> f64 {
        let (rx, ry) = (norm(x), norm(y));
        if k == 0 {
            return 1.0;
        }
        if rx == 0.0 || ry == 0.0 {
            return 0.0;
        }
        let u = (dot(x, y) / (rx * ry)).clamp(-1.0, 1.0);
        harmonic_dim(n, k) * (rx * ry).powi(k as i32) * table.gegenbauer(k, u)
    }

    #[test]
    fn kernel_at_origin_and_symmetry() {
        let cfg = KernelConfig::new(1.0);
        for y in [[0.0, 0.0], [0.3, 0.2], [0.9, 0.0]] {
            let v = reproducing_kernel(&[0.0, 0.0], &y, &cfg).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "R(0,y) = {v}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for _ in 0..30 {
            let x = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
            let y = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
            let a = reproducing_kernel(&x, &y, &cfg).unwrap();
            let b = reproducing_kernel(&y, &x, &cfg).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        // refusal beyond the certified range
        assert!(reproducing_kernel(&[0.999, 0.0], &[0.999, 0.0], &cfg).is_err());
    }

    #[test]
    fn kernel_tail_certificate() {
        // increasing K by 10 changes the value by less than the tail bound
        let cfg = KernelConfig::new(0.5);
        let table = KernelTable::build(3, 0.5, 400);
        let x = [0.5, 0.3, 0.2];
        let y = [0.4, -0.5, 0.3];
        let s = norm(&x) * norm(&y);
        let u = kernel_cos(&x, &y);
        let k0 = effective_truncation(&table, s, &cfg).unwrap();
        let v0 = table.eval(s, u, k0);
        let v1 = table.eval(s, u, k0 + 10);
        assert!((v1 - v0).abs() < cfg.tail_tol);
        // and the bound is a genuine upper bound for the observed remainder
        let v_far = table.eval(s, u, 390);
        assert!((v_far - v0).abs() <= table.tail_bound(s, k0) * 1.000001);
    }

    #[test]
    fn projection_reproduces_constants_and_integrates_kernel() {
        // ∫ R_λ(x,y) dV_λ(y) = 1 for moderate |x| (projection of 1)
        for (n, lambda) in [(2usize, 0.0), (2, 1.0), (3, 1.0)] {
            let spec = MeasureSpec::new(n, lambda).unwrap();
            let cfg = KernelConfig::new(lambda).with_max_gen(20);
            let one = |_: &[f64]| Complex64::new(1.0, 0.0);
            for t in [0.0, 0.4, 0.7] {
                let mut x = vec![0.0; n];
                x[0] = t;
                let (v, _) = project(&one, &x, &spec, &cfg).unwrap();
                assert!(
                    (v.re - 1.0).abs() < 2e-6 && v.im.abs() < 1e-10,
                    "n={n} λ={lambda} t={t}: {v}"
                );
            }
        }
    }

    #[test]
    fn projection_reproduces_low_degree_harmonics() {
        // fast configuration: polynomial integrands are annihilated by the
        // k > deg terms exactly, so a small certified-loose K suffices
        let spec = MeasureSpec::new(2, 1.0).unwrap();
        let cfg = KernelConfig {
            lambda: 1.0,
            truncation_degree: 12,
            tail_tol: f64::INFINITY,
            max_gen: 18,
            boxwise_gen_limit: 2,
            grid: QuadratureGrid::default(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for e in basis_up_to(2, 3).unwrap() {
            let f = |y: &[f64]| Complex64::new(e.eval(y), 0.0);
            for _ in 0..3 {
                let x = [rng.gen_range(-0.45..0.45), rng.gen_range(-0.45..0.45)];
                let (v, _) = project(&f, &x, &spec, &cfg).unwrap();
                let want = e.eval(&x);
                assert!(
                    (v.re - want).abs() < 1e-6 && v.im.abs() < 1e-9,
                    "deg {} idx {}: {v} vs {want}",
                    e.degree,
                    e.index
                );
            }
        }
    }

    #[test]
    fn projection_of_non_harmonic_matches_fourier_oracle() {
        // f = x₁|x|² on the disk: P_λ f = c·x₁ with c = 2/3 (λ=0), 1/2 (λ=1)
        for (lambda, want_c) in [(0.0, 2.0 / 3.0), (1.0, 0.5)] {
            let spec = MeasureSpec::new(2, lambda).unwrap();
            let cfg = KernelConfig {
                lambda,
                truncation_degree: 10,
                tail_tol: f64::INFINITY,
                max_gen: 22,
                boxwise_gen_limit: 2,
                grid: QuadratureGrid::default(),
            };
            let f = |y: &[f64]| Complex64::new(y[0] * (y[0] * y[0] + y[1] * y[1]), 0.0);
            let x = [0.31, -0.12];
            let (v, _) = project(&f, &x, &spec, &cfg).unwrap();
            assert!(
                (v.re - want_c * x[0]).abs() < 1e-6,
                "λ={lambda}: {} vs {}",
                v.re,
                want_c * x[0]
            );
        }
    }

    #[test]
    fn maximal_dominates_projection() {
        let spec = MeasureSpec::new(2, 0.0).unwrap();
        let cfg = KernelConfig::new(0.0).with_max_gen(12).with_truncation(30, 1e-6);
        let f = |y: &[f64]| Complex64::new(y[0] - 0.3 * y[1], 0.2);
        let x = [0.4, 0.1];
        let (p, _) = project(&f, &x, &spec, &cfg).unwrap();
        let m = maximal_project(&f, &x, &spec, &cfg).unwrap();
        assert!(m >= p.norm() - 1e-10, "maximal {m} < |proj| {}", p.norm());
        // f ≡ 1 at the origin: R(0,·) = 1, so the maximal projection equals
        // the covered mass (→ 1 as max_gen grows)
        let one = |_: &[f64]| Complex64::new(1.0, 0.0);
        let m0 = maximal_project(&one, &[0.0, 0.0], &spec, &cfg).unwrap();
        let covered =
            crate::measure::radial_shell_mass(&spec, 0.0, 1.0 - 0.5f64.powi(13));
        assert!((m0 - covered).abs() < 1e-8, "{m0} vs {covered}");
        assert!((m0 - 1.0).abs() < 5e-4);
    }

    #[test]
    fn toeplitz_identity_on_harmonics() {
        // T_1 = identity on harmonic polynomials, T_c = c·T_1
        let spec = MeasureSpec::new(2, 0.0).unwrap();
        let cfg = KernelConfig {
            lambda: 0.0,
            truncation_degree: 12,
            tail_tol: f64::INFINITY,
            max_gen: 22,
            boxwise_gen_limit: 3,
            grid: QuadratureGrid::default(),
        };
        let one = Symbol::constant(Complex64::new(1.0, 0.0));
        let c_sym = Symbol::constant(Complex64::new(0.0, 2.0));
        let e = &basis_up_to(2, 3).unwrap()[4]; // r² sin 2θ
        let f = |y: &[f64]| Complex64::new(e.eval(y), 0.0);
        let x = [0.2, 0.35];
        let got = toeplitz_apply(&one, &f, &x, &spec, &cfg).unwrap();
        assert!(
            (got.value.re - e.eval(&x)).abs() < 1e-6,
            "{} vs {}",
            got.value.re,
            e.eval(&x)
        );
        assert!(got.tail_decaying);
        // partial sums: boxwise terms of the first generations sum to the
        // per-generation log entries
        let g0: Complex64 = got
            .boxwise
            .iter()
            .filter(|(id, _)| id.generation == 0)
            .map(|(_, v)| v)
            .sum();
        assert!((g0 - got.per_generation[0].1).norm() < 1e-14);
        let got_c = toeplitz_apply(&c_sym, &f, &x, &spec, &cfg).unwrap();
        assert!((got_c.value - Complex64::new(0.0, 2.0) * got.value).norm() < 1e-9);
    }

    #[test]
    fn toeplitz_truncated_is_finite_sum() {
        let spec = MeasureSpec::new(2, 0.0).unwrap();
        let cfg = KernelConfig {
            lambda: 0.0,
            truncation_degree: 12,
            tail_tol: f64::INFINITY,
            max_gen: 20,
            boxwise_gen_limit: 2,
            grid: QuadratureGrid::default(),
        };
        let one = Symbol::constant(Complex64::new(1.0, 0.0));
        let f = |_: &[f64]| Complex64::new(1.0, 0.0);
        let x = [0.25, 0.1];
        // rho below the first shell boundary: only generation 0 contributes
        let ev = toeplitz_truncated(&one, 0.49, &f, &x, &spec, &cfg).unwrap();
        for (m, v) in &ev.per_generation {
            if *m > 0 {
                assert!(v.norm() < 1e-14, "generation {m} should vanish");
            }
        }
        // ψ ≡ 1 truncated at 1 - 2^{-5} equals the projection of χ_{ρB}f
        let rho = 1.0 - 0.5f64.powi(5);
        let ev = toeplitz_truncated(&one, rho, &f, &x, &spec, &cfg).unwrap();
        let chi = move |y: &[f64]| {
            if norm(y) <= rho {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let cfg5 = KernelConfig {
            max_gen: 4,
            ..cfg.clone()
        };
        let (p, _) = project(&chi, &x, &spec, &cfg5).unwrap();
        assert!((ev.value - p).norm() < 1e-8, "{} vs {p}", ev.value);
    }

    #[test]
    fn matrix_elements_radial_diagonality() {
        let spec = MeasureSpec::new(2, 0.0).unwrap();
        let cfg = KernelConfig::new(0.0).with_max_gen(14);
        let basis = basis_up_to(2, 4).unwrap();
        let radial = Symbol::Radial(crate::parser::parse("1 - r^2", 2).unwrap());
        // distinct degrees decouple for radial symbols
        for ei in basis.iter().take(5) {
            for ej in basis.iter().take(5) {
                let v = matrix_element(&radial, ei, ej, &spec, &cfg).unwrap();
                if ei.degree != ej.degree || ei.index != ej.index {
                    assert!(v.norm() < 1e-8, "⟨T e{:?}, e{:?}⟩ = {v}", ei.degree, ej.degree);
                }
            }
        }
        // ψ ≡ 1 diagonal equals the closed-form norm²
        let one = Symbol::constant(Complex64::new(1.0, 0.0));
        for e in basis.iter() {
            let v = matrix_element(&one, e, e, &spec, &cfg).unwrap();
            let want = crate::basis::disk_harmonic_norm_sq(e.degree, 0.0);
            // covered-region deficit is ~2^{-15}·(2k+2); stay modest
            assert!(
                (v.re - want).abs() < 1e-3 * want,
                "deg {}: {} vs {want}",
                e.degree,
                v.re
            );
        }
    }

    #[test]
    fn disk_analytic_kernel_reproduces_monomials() {
        let lambda = 0.6;
        let spec = MeasureSpec::new(2, lambda).unwrap();
        let cfg = KernelConfig::new(lambda).with_max_gen(22);
        assert!((disk_analytic_kernel(Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.4), lambda)
            - Complex64::new(1.0, 0.0))
        .norm()
            .abs()
            < 1e-14);
        let z = Complex64::new(0.35, -0.2);
        for k in 0..=4u32 {
            let f = move |w: Complex64| w.powu(k);
            let v = project_analytic(&f, z, &spec, &cfg).unwrap();
            let want = z.powu(k);
            assert!(
                (v - want).norm() < 1e-6,
                "monomial {k}: {v} vs {want}"
            );
        }
    }

    #[test]
    fn quad_nodes_visitor_consistency() {
        // the visitor and integrate_box agree on a shared grid
        let spec = MeasureSpec::new(3, 0.5).unwrap();
        let bx = QBox::shell(3, 2);
        let grid = QuadratureGrid::uniform(4, 2);
        let f = |y: &[f64]| Complex64::new(y[0] * y[0] + 0.3, y[2]);
        let mut acc = Complex64::new(0.0, 0.0);
        quad_nodes(&bx, &spec, &grid, &[], |y, w| acc += f(y) * w);
        let direct = {
            let axes_v = integrate_box(&f, &bx, &spec, &grid, &[]).unwrap();
            axes_v.0
        };
        assert!((acc - direct).norm() < 1e-13);
    }
}
