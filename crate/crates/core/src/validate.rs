//! Numerical validation harness for the quantitative comparability lemmas:
//! Forelli–Rudin, the Schur-test probe, dyadic box properties, the harmonic
//! mean-value inequality over enlarged boxes, integration by parts in
//! spherical boxes, the c_β face integrals, the pointwise growth estimate,
//! norm domination of weighted derivatives, the compact-support projection
//! bound, and kernel derivative growth.
//!
//! Every check reports empirical constants with pass flags against declared
//! thresholds; nothing here is a proof. Sampling is seeded (default 0x5EED)
//! and reruns are bit-identical for a fixed seed.

use crate::basis::{basis_up_to, Poly};
use crate::boxes::{
    box_geometry, distance_to_box, enumerate_generation, pow_half, BoxId, DyadicBox,
    GenerationTable,
};
use crate::error::{Error, Result};
use crate::geometry::{bracket, hyperbolic_distance, norm, weight};
use crate::kernel::{project, reproducing_kernel, KernelConfig};
use crate::measure::{
    integrate_ball, integrate_box, norm_p, MeasureSpec, NormSpec, QBox, QuadratureGrid,
};
use crate::special::sin_power_integral;
use crate::spherical::{sigma_into, to_cartesian, SphericalPoint};
use crate::symbol::Symbol;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 0x5EED;

/// All pass/fail thresholds in one place. The paper's constants are implicit,
/// so these bands are declared, not derived.
#[derive(Debug, Clone, Serialize)]
pub struct Thresholds {
    /// Max/min spread of the Forelli–Rudin ratio across radii.
    pub forelli_spread: f64,
    /// Relative quadrature-error gate for Forelli–Rudin integrals.
    pub forelli_quad_rel_err: f64,
    /// Spread bound for the Schur probe constant.
    pub schur_spread: f64,
    /// Per-generation drift of the |B_j|·2^{mn} band.
    pub volume_drift: f64,
    /// Band bound for diam(B_j)·2^m.
    pub diam_band: f64,
    /// Band bound for the mean-value ratio across generations.
    pub mean_value_band: f64,
    /// Residual bound for integration by parts on polynomial tests.
    pub ibp_residual: f64,
    /// Band bound for the c_β ratios across generations.
    pub cbeta_band: f64,
    /// Constant bound for the pointwise estimate.
    pub pointwise_band: f64,
    /// Constant bound for norm domination ratios.
    pub normdom_band: f64,
    /// Constant bound for the kernel derivative growth constant.
    pub kernel_deriv_band: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            forelli_spread: 10.0,
            forelli_quad_rel_err: 0.01,
            schur_spread: 25.0,
            volume_drift: 0.10,
            diam_band: 10.0,
            mean_value_band: 8.0,
            ibp_residual: 1e-8,
            cbeta_band: 8.0,
            pointwise_band: 40.0,
            normdom_band: 60.0,
            kernel_deriv_band: 200.0,
        }
    }
}

/// Min/max ratio statistics of a comparability check.
#[derive(Debug, Clone, Serialize)]
pub struct RatioStats {
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// max/min ≥ 1.
    pub spread: f64,
    pub pass: bool,
}

impl RatioStats {
    fn from_ratios(ratios: &[f64], spread_bound: f64) -> Self {
        let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
        let spread = if min_ratio > 0.0 {
            max_ratio / min_ratio
        } else {
            f64::INFINITY
        };
        Self {
            samples: ratios.len(),
            min_ratio,
            max_ratio,
            spread,
            pass: spread.is_finite() && spread < spread_bound,
        }
    }
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|u| u / r).collect();
        }
    }
}

// ---------------------------------------------------------------------------
// Forelli–Rudin estimate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ForelliReport {
    pub n: usize,
    pub s: f64,
    pub t: f64,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub stats: RatioStats,
}

/// ∫ (1-|y|²)^t / [x,y]^{n+s+t} dV(y) ≈ (1-|x|²)^{-s}: ratio of the two sides
/// at |x| ∈ radii. Requires s > 0, t > -1; quadrature divergence is flagged.
pub fn check_forelli_rudin(
    n: usize,
    s: f64,
    t: f64,
    radii: &[f64],
    thresholds: &Thresholds,
) -> Result<ForelliReport> {
    if s <= 0.0 {
        return Err(Error::InvalidParameter(format!("s = {s} must be > 0")));
    }
    if t <= -1.0 {
        return Err(Error::InvalidParameter(format!("t = {t} must be > -1")));
    }
    let spec = MeasureSpec::new(n, 0.0)?;
    let grid = QuadratureGrid {
        nodes_per_axis: vec![8],
        panels_per_axis: vec![1, 4],
        refinement_level: 0,
    };
    let mut ratios = Vec::with_capacity(radii.len());
    for &rho in radii {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::OutOfDomain(format!("radius {rho} outside [0,1)")));
        }
        // resolve a few generations past the evaluation radius
        let m_x = if rho > 0.0 {
            (-(1.0 - rho).log2()).ceil() as u32
        } else {
            0
        };
        let max_gen = (m_x + 6).max(10);
        let mut x = vec![0.0; n];
        x[0] = rho;
        let expo = n as f64 + s + t;
        let f = |y: &[f64]| {
            let br = bracket(y, &x).expect("same dim");
            Complex64::new(weight(y).powf(t) / br.powf(expo), 0.0)
        };
        let (v, quad_err) = integrate_ball(&f, &spec, max_gen, &grid, &[])?;
        // estimate of the uncovered boundary-shell contribution: 1-D radial
        // with the exact angular average of [x,y]^{-expo} (the bracket depends
        // only on the angle between x and y)
        let tail = {
            let r0 = 1.0 - pow_half(max_gen + 1);
            let rule = crate::measure::gl_rule(32);
            let wnorm = sin_power_integral(n - 2, 0.0, std::f64::consts::PI);
            let mut acc = 0.0;
            let steps = 24;
            for i in 0..steps {
                let a = r0 + (1.0 - r0) * i as f64 / steps as f64;
                let b = r0 + (1.0 - r0) * (i + 1) as f64 / steps as f64;
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for (gi, gw) in rule.0.iter().zip(&rule.1) {
                    let r = mid + half * gi;
                    let mut ang = 0.0;
                    for (ti, tw) in rule.0.iter().zip(&rule.1) {
                        let theta = std::f64::consts::PI * 0.5 * (ti + 1.0);
                        let br2 = 1.0 - 2.0 * r * rho * theta.cos() + r * r * rho * rho;
                        ang += tw * std::f64::consts::PI * 0.5
                            * theta.sin().powi(n as i32 - 2)
                            * br2.powf(-expo / 2.0);
                    }
                    acc += half
                        * gw
                        * n as f64
                        * r.powi(n as i32 - 1)
                        * (1.0 - r * r).powf(t)
                        * ang
                        / wnorm;
                }
            }
            acc
        };
        if (quad_err + tail) > thresholds.forelli_quad_rel_err * v.re.abs() {
            return Err(Error::Convergence(format!(
                "Forelli–Rudin integral at |x| = {rho}: error estimate {:.3e} (tail {:.3e}) exceeds {:.1}% of value {:.6e}",
                quad_err + tail,
                tail,
                100.0 * thresholds.forelli_quad_rel_err,
                v.re
            )));
        }
        ratios.push(v.re * weight(&x).powf(s));
    }
    let stats = RatioStats::from_ratios(&ratios, thresholds.forelli_spread);
    Ok(ForelliReport {
        n,
        s,
        t,
        radii: radii.to_vec(),
        ratios,
        stats,
    })
}

// ---------------------------------------------------------------------------
// Schur-test probe for Λ_λ
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SchurReport {
    pub n: usize,
    pub lambda: f64,
    pub p: f64,
    pub alpha: f64,
    /// max over samples of ∫ h^q/[x,y]^{n+λ} dV_λ / h(x)^q.
    pub constant_q: f64,
    /// the dual inequality with p in place of q.
    pub constant_p: f64,
    pub stats: RatioStats,
    pub seed: u64,
}

/// Verifies ∫ h(y)^q/[x,y]^{n+λ} dV_λ(y) ≤ C h(x)^q for h = (1-|x|²)^α with
/// -(1+λ)/max(p,q) < α < 0, plus the symmetric dual bound.
pub fn check_schur_probe(
    n: usize,
    lambda: f64,
    p: f64,
    alpha: f64,
    samples: usize,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<SchurReport> {
    let ns = NormSpec::new(p)?;
    let lo = -(1.0 + lambda) / ns.p.max(ns.q);
    if !(lo < alpha && alpha < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} outside ({lo}, 0)"
        )));
    }
    let spec = MeasureSpec::new(n, lambda)?;
    let grid = QuadratureGrid {
        nodes_per_axis: vec![8],
        panels_per_axis: vec![1, 4],
        refinement_level: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios_q = Vec::with_capacity(samples);
    let mut ratios_p = Vec::with_capacity(samples);
    for i in 0..samples {
        // radii biased toward the boundary, up to 0.999
        let t = (i as f64 + rng.gen_range(0.0..1.0)) / samples as f64;
        let rho = 1.0 - 0.999f64 * t.min(1.0) - 0.001 * (1.0 - t);
        let rho = rho.clamp(0.0, 0.999);
        let dir = random_direction(&mut rng, n);
        let x: Vec<f64> = dir.iter().map(|d| d * rho).collect();
        let max_gen = ((-(1.0 - rho).log2()).ceil() as u32 + 3).max(10);
        for (expo, out) in [(ns.q, &mut ratios_q), (ns.p, &mut ratios_p)] {
            let f = |y: &[f64]| {
                let br = bracket(y, &x).expect("same dim");
                Complex64::new(
                    weight(y).powf(alpha * expo) / br.powf(n as f64 + lambda),
                    0.0,
                )
            };
            let (v, _) = integrate_ball(&f, &spec, max_gen, &grid, &[])?;
            out.push(v.re / weight(&x).powf(alpha * expo));
        }
    }
    let stats = RatioStats::from_ratios(&ratios_q, thresholds.schur_spread);
    Ok(SchurReport {
        n,
        lambda,
        p,
        alpha,
        constant_q: ratios_q.iter().cloned().fold(0.0, f64::max),
        constant_p: ratios_p.iter().cloned().fold(0.0, f64::max),
        stats,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Dyadic box properties (i)–(vi)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BandRow {
    pub m: u32,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxPropertiesReport {
    pub n: usize,
    /// (i) |B_j|·2^{mn} bands per generation and the drift verdict.
    pub volume_bands: Vec<BandRow>,
    pub volume_pass: bool,
    /// (ii) sampled diam(B_j)·2^m bands.
    pub diam_bands: Vec<BandRow>,
    pub diam_pass: bool,
    /// (iii) |B_j*|·2^{mn} two-sided bounds (|B_j| below, covering ball above).
    pub enlarged_bounds: Vec<BandRow>,
    pub enlarged_pass: bool,
    /// (iv) empirical max overlap of the B_j* per probed generation.
    pub overlap_max: Vec<(u32, usize)>,
    pub overlap_pass: bool,
    /// (v) shell-bound violations among sampled B_j* points.
    pub shell_violations: usize,
    pub shell_pass: bool,
    /// (vi) per-generation max of [x,a]/[x,b] over a,b ∈ B_j*, and the
    /// e^{d(a,b)}-consistency of every sample.
    pub bracket_constants: Vec<(u32, f64)>,
    pub bracket_pass: bool,
    pub seed: u64,
}

fn sample_in_box(rng: &mut ChaCha8Rng, bx: &DyadicBox) -> Vec<f64> {
    let g: Vec<f64> = bx
        .intervals
        .iter()
        .map(|&(lo, hi)| rng.gen_range(lo..hi))
        .collect();
    let sp = SphericalPoint {
        r: g[0],
        angles: g[1..].to_vec(),
    };
    to_cartesian(&sp)
}

fn sample_in_enlargement(rng: &mut ChaCha8Rng, bx: &DyadicBox) -> Vec<f64> {
    // B_j point plus an offset of length < 2^{-m-2}
    let y = sample_in_box(rng, bx);
    let dir = random_direction(rng, y.len());
    let len = rng.gen_range(0.0..bx.enlargement_radius);
    y.iter().zip(&dir).map(|(a, d)| a + d * len).collect()
}

/// Approximate diameter: max pairwise distance over the 3^n corner/midpoint grid.
fn sampled_diameter(bx: &DyadicBox) -> f64 {
    let n = bx.intervals.len();
    let mut pts = Vec::new();
    let mut idx = vec![0usize; n];
    let mut buf = vec![0.0; n];
    loop {
        let g: Vec<f64> = bx
            .intervals
            .iter()
            .zip(&idx)
            .map(|(&(lo, hi), &i)| lo + (hi - lo) * i as f64 / 2.0)
            .collect();
        sigma_into(&g, &mut buf);
        pts.push(buf.clone());
        let mut axis = 0;
        loop {
            if axis == n {
                let mut best = 0.0f64;
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        let d: f64 = pts[i]
                            .iter()
                            .zip(&pts[j])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        best = best.max(d.sqrt());
                    }
                }
                return best;
            }
            idx[axis] += 1;
            if idx[axis] <= 2 {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

pub fn check_box_properties(
    n: usize,
    max_gen: u32,
    samples: usize,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<BoxPropertiesReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut volume_bands = Vec::new();
    let mut diam_bands = Vec::new();
    let mut enlarged_bounds = Vec::new();
    for m in 0..=max_gen {
        let scale = pow_half(m).powi(-(n as i32));
        let (mut vmin, mut vmax) = (f64::INFINITY, 0.0f64);
        let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
        let (mut emin, mut emax) = (f64::INFINITY, 0.0f64);
        let ids = enumerate_generation(n, m);
        // subsample deep generations; the bands stabilize quickly
        let step = (ids.len() / 512).max(1);
        for id in ids.into_iter().step_by(step) {
            let bx = box_geometry(&id)?;
            let vol = crate::measure::box_volume_closed_lambda0(&bx) * scale;
            vmin = vmin.min(vol);
            vmax = vmax.max(vol);
            let diam = sampled_diameter(&bx) / pow_half(m);
            dmin = dmin.min(diam);
            dmax = dmax.max(diam);
            // (iii): |B| ≤ |B*| ≤ ω_n (diam/2 + 2^{-m-2})^n; in normalized volume
            // ω_n cancels into the unit-ball mass 1·radius^n
            let upper = (diam * pow_half(m) / 2.0 + pow_half(m + 2)).powi(n as i32) * scale;
            emin = emin.min(vol);
            emax = emax.max(upper);
        }
        volume_bands.push(BandRow {
            m,
            min: vmin,
            max: vmax,
        });
        diam_bands.push(BandRow {
            m,
            min: dmin,
            max: dmax,
        });
        enlarged_bounds.push(BandRow {
            m,
            min: emin,
            max: emax,
        });
    }
    // (i) drift of band endpoints between consecutive generations m = 4..max
    let volume_pass = volume_bands
        .windows(2)
        .skip(4.min(volume_bands.len().saturating_sub(1)))
        .all(|w| {
            (w[1].min - w[0].min).abs() <= thresholds.volume_drift * w[0].min
                && (w[1].max - w[0].max).abs() <= thresholds.volume_drift * w[0].max
        });
    let diam_pass = diam_bands.iter().all(|b| {
        b.min > 0.0 && b.max / diam_bands.iter().map(|c| c.min).fold(f64::INFINITY, f64::min)
            < thresholds.diam_band
    });
    let enlarged_pass = enlarged_bounds
        .iter()
        .all(|b| b.min > 0.0 && b.max.is_finite());

    // (iv) overlap counts on self-similar seeded samples for m = 3, 4, 5
    let probe_gens = [3u32, 4, 5];
    let mut overlap_max = Vec::new();
    let unit_samples: Vec<(f64, Vec<f64>)> = (0..samples)
        .map(|_| {
            let t = rng.gen_range(0.0..1.0);
            (t, random_direction(&mut rng, n))
        })
        .collect();
    for &m in &probe_gens {
        let tables: Vec<GenerationTable> = (m.saturating_sub(2)..=m + 2)
            .map(|g| GenerationTable::build(n, g))
            .collect();
        let mut maxc = 0usize;
        for (t, dir) in &unit_samples {
            // self-similar radial placement inside the generation-m shell
            let r = 1.0 - pow_half(m) * (1.0 - 0.5 * t);
            let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
            maxc = maxc.max(crate::boxes::overlap_count(&x, &tables));
        }
        overlap_max.push((m, maxc));
    }
    let overlap_pass = overlap_max.windows(2).all(|w| w[0].1 == w[1].1);

    // (v) shell bounds for B_j* samples
    let mut shell_violations = 0;
    for m in 1..=max_gen.min(6) {
        let ids = enumerate_generation(n, m);
        let step = (ids.len() / 32).max(1);
        for id in ids.into_iter().step_by(step) {
            let bx = box_geometry(&id)?;
            for _ in 0..16 {
                let x = sample_in_enlargement(&mut rng, &bx);
                let gap = 1.0 - norm(&x);
                if gap < pow_half(m + 2) - 1e-12 || gap > pow_half(m) * 2.0 + 1e-12 {
                    shell_violations += 1;
                }
            }
        }
    }
    let shell_pass = shell_violations == 0;

    // (vi) bracket comparability over B_j*
    let mut bracket_constants = Vec::new();
    let mut bracket_pass = true;
    for m in 1..=max_gen.min(6) {
        let ids = enumerate_generation(n, m);
        let step = (ids.len() / 16).max(1);
        let mut cmax = 1.0f64;
        for id in ids.into_iter().step_by(step) {
            let bx = box_geometry(&id)?;
            for _ in 0..8 {
                let a = sample_in_enlargement(&mut rng, &bx);
                let b = sample_in_enlargement(&mut rng, &bx);
                if norm(&a) >= 1.0 || norm(&b) >= 1.0 {
                    continue;
                }
                let x = {
                    let d = random_direction(&mut rng, n);
                    let r: f64 = rng.gen_range(0.0..0.999);
                    d.iter().map(|v| v * r).collect::<Vec<f64>>()
                };
                let ratio = bracket(&x, &a)? / bracket(&x, &b)?;
                let dist = hyperbolic_distance(&a, &b)?;
                if ratio > dist.exp() * (1.0 + 1e-9) || ratio < (-dist).exp() / (1.0 + 1e-9) {
                    bracket_pass = false;
                }
                cmax = cmax.max(ratio.max(1.0 / ratio));
            }
        }
        bracket_constants.push((m, cmax));
    }
    // the constant must not grow with the generation
    let cfirst = bracket_constants.first().map(|&(_, c)| c).unwrap_or(1.0);
    if bracket_constants
        .iter()
        .any(|&(_, c)| c > cfirst * 3.0 + 1.0)
    {
        bracket_pass = false;
    }

    Ok(BoxPropertiesReport {
        n,
        volume_bands,
        volume_pass,
        diam_bands,
        diam_pass,
        enlarged_bounds,
        enlarged_pass,
        overlap_max,
        overlap_pass,
        shell_violations,
        shell_pass,
        bracket_constants,
        bracket_pass,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Mean-value inequality over enlarged boxes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MeanValueReport {
    pub id: BoxId,
    /// max over sampled x ∈ B_j of |f(x)|·|B_j|_λ / ∫_{B_j*} |f| dV_λ.
    pub ratio: f64,
    pub samples: usize,
}

/// |f(x)| ≲ (1/|B_j|_λ) ∫_{B_j*} |f| dV_λ for harmonic f. The enlarged-box
/// integral runs over the ℚ_n bounding rectangle of B_j* with the exact
/// membership indicator (distance to B_j below 2^{-m-2}).
pub fn check_mean_value(
    f: &dyn Fn(&[f64]) -> f64,
    id: &BoxId,
    spec: &MeasureSpec,
    seed: u64,
) -> Result<MeanValueReport> {
    let bx = box_geometry(id)?;
    let n = spec.n;
    let rad = bx.enlargement_radius;
    // bounding rectangle: radial ± rad; angular expansion by rad / (r_lo · sine
    // lower bounds), capped at the full range
    let mut intervals = vec![(
        (bx.intervals[0].0 - rad).max(0.0),
        (bx.intervals[0].1 + rad).min(1.0 - 1e-12),
    )];
    let r_lo = bx.intervals[0].0.max(1e-6);
    let mut sin_floor = 1.0f64;
    for axis in 1..n {
        let (lo, hi) = bx.intervals[axis];
        let margin = rad / (r_lo * sin_floor).max(1e-9);
        let (full_lo, full_hi) = if axis == n - 1 {
            (0.0, std::f64::consts::TAU)
        } else {
            (0.0, std::f64::consts::PI)
        };
        intervals.push(((lo - margin).max(full_lo), (hi + margin).min(full_hi)));
        // sine lower bound over the expanded interval, for the next axis
        let (elo, ehi) = intervals[axis];
        let s = if elo <= 0.0 || ehi >= std::f64::consts::PI {
            0.0
        } else {
            elo.sin().min(ehi.sin())
        };
        sin_floor *= s.max(1e-9);
    }
    let qbox = QBox::new(intervals)?;
    let grid = QuadratureGrid::uniform(4, 8);
    let indicator = |y: &[f64]| -> Complex64 {
        if norm(y) < 1.0 && distance_to_box(y, &bx) < rad {
            Complex64::new(f(y).abs(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let (enl_integral, _) = integrate_box(&indicator, &qbox, spec, &grid, &[])?;
    let vol = crate::measure::box_volume(&bx, spec, &QuadratureGrid::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = 64;
    let mut ratio = 0.0f64;
    for _ in 0..samples {
        let x = sample_in_box(&mut rng, &bx);
        ratio = ratio.max(f(&x).abs() * vol / enl_integral.re.max(1e-300));
    }
    Ok(MeanValueReport {
        id: id.clone(),
        ratio,
        samples,
    })
}

// ---------------------------------------------------------------------------
// Integration by parts in spherical boxes
// ---------------------------------------------------------------------------

/// Plain tensor Gauss–Legendre over a ℚ_n rectangle (raw coordinates, no
/// measure normalization) for real integrands.
fn q_rect_integral(f: &dyn Fn(&[f64]) -> f64, rect: &[(f64, f64)], nodes: usize) -> f64 {
    let rule = crate::measure::gl_rule(nodes);
    let n = rect.len();
    let mut acc = 0.0;
    let mut idx = vec![0usize; n];
    let mut g = vec![0.0; n];
    'outer: loop {
        let mut w = 1.0;
        for a in 0..n {
            let (lo, hi) = rect[a];
            let half = 0.5 * (hi - lo);
            g[a] = 0.5 * (lo + hi) + half * rule.0[idx[a]];
            w *= half * rule.1[idx[a]];
        }
        acc += w * f(&g);
        let mut a = 0;
        loop {
            if a == n {
                break 'outer;
            }
            idx[a] += 1;
            if idx[a] < nodes {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
    acc
}

fn jacobian_flat(g: &[f64]) -> f64 {
    let n = g.len();
    let mut j = g[0].powi(n as i32 - 1);
    for (i, &t) in g[1..n - 1].iter().enumerate() {
        j *= t.sin().powi((n - 2 - i) as i32);
    }
    j
}

#[derive(Debug, Clone, Serialize)]
pub struct IbpReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
}

/// LHS = ∫_{Q(x,y)} F G J_σ w^λ dγ against the integration-by-parts expansion
/// Σ_α s_α ∫_{Q_α} (∫_{Q(x,γ_α)} F J_σ w^λ) D^α G dγ_α with s_α = (-1)^{|α|}
/// (calibrated on the G ≡ 1 case, where only α = 0 survives). F, G are
/// polynomials in the ℚ_n coordinates; D^α G is symbolic.
pub fn check_integration_by_parts(
    f_poly: &Poly,
    g_poly: &Poly,
    rect: &[(f64, f64)],
    lambda: f64,
    thresholds: &Thresholds,
) -> Result<IbpReport> {
    let n = rect.len();
    if f_poly.nvars != n || g_poly.nvars != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f_poly.nvars.max(g_poly.nvars),
        });
    }
    let nodes = 12;
    let dens = |g: &[f64]| jacobian_flat(g) * (1.0 - g[0] * g[0]).powf(lambda);
    let lhs_f = |g: &[f64]| f_poly.eval(g) * g_poly.eval(g) * dens(g);
    let lhs = q_rect_integral(&lhs_f, rect, nodes);
    // u(γ) = ∫_{Q(x,γ)} F J w^λ dτ
    let u = |gpt: &[f64]| -> f64 {
        let sub: Vec<(f64, f64)> = rect
            .iter()
            .zip(gpt)
            .map(|(&(lo, _), &gi)| (lo, gi))
            .collect();
        if sub.iter().any(|&(lo, hi)| hi <= lo) {
            return 0.0;
        }
        let f = |t: &[f64]| f_poly.eval(t) * dens(t);
        q_rect_integral(&f, &sub, nodes)
    };
    let mut rhs = 0.0;
    for mask in 0..(1u32 << n) {
        let alpha: Vec<u8> = (0..n).map(|k| ((mask >> k) & 1) as u8).collect();
        let card: u32 = alpha.iter().map(|&a| a as u32).sum();
        let sign = if card % 2 == 0 { 1.0 } else { -1.0 };
        let dg = g_poly.diff_multi(&alpha);
        if dg.terms.iter().all(|(c, _)| *c == 0.0) {
            continue;
        }
        // integrate over the face: variables with α_k = 1 run over their
        // intervals, the rest sit at the top corner y
        let face: Vec<(f64, f64)> = rect
            .iter()
            .zip(&alpha)
            .map(|(&(lo, hi), &a)| if a == 1 { (lo, hi) } else { (hi, hi) })
            .collect();
        let active: Vec<usize> = (0..n).filter(|&k| alpha[k] == 1).collect();
        if active.is_empty() {
            // zero-dimensional face: evaluation at y
            let y: Vec<f64> = rect.iter().map(|&(_, hi)| hi).collect();
            rhs += sign * u(&y) * dg.eval(&y);
            continue;
        }
        let sub_rect: Vec<(f64, f64)> = active.iter().map(|&k| face[k]).collect();
        let integrand = |s: &[f64]| -> f64 {
            let mut gamma: Vec<f64> = rect.iter().map(|&(_, hi)| hi).collect();
            for (si, &k) in s.iter().zip(&active) {
                gamma[k] = *si;
            }
            u(&gamma) * dg.eval(&gamma)
        };
        // 1-D faces need the plain rule too
        rhs += sign
            * match sub_rect.len() {
                0 => unreachable!(),
                _ => q_rect_integral(&integrand, &sub_rect, nodes),
            };
    }
    let residual = (lhs - rhs).abs();
    Ok(IbpReport {
        lhs,
        rhs,
        residual,
        pass: residual < thresholds.ibp_residual * (1.0 + lhs.abs()),
    })
}

// ---------------------------------------------------------------------------
// c_β face integrals
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CbetaReport {
    pub id: BoxId,
    pub alpha: Vec<u8>,
    pub beta_norm: usize,
    /// (∫_{Q_α(x^(j),y^(j))} c_β dγ_α) · 2^{m|β|}.
    pub ratio: f64,
}

/// c_β(γ) = ∏_{j=2}^{n-1} (sinθ_j)^{max(0, |β| - Σ_{i≤j} α_i)}; the face
/// integral is ≲ 2^{-m|β|}.
pub fn check_cbeta_integral(alpha: &[u8], beta_norm: usize, id: &BoxId) -> Result<CbetaReport> {
    let n = alpha.len();
    if id.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: id.dim(),
        });
    }
    let card: usize = alpha.iter().map(|&a| a as usize).sum();
    if beta_norm == 0 || beta_norm > card {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= |β| <= |α| = {card}, got |β| = {beta_norm}"
        )));
    }
    let bx = box_geometry(id)?;
    // exponent of sinθ_j (axis j-1 here, paper's j = 2..n-1)
    let expo = |j_axis: usize| -> usize {
        let prefix: usize = alpha[..=j_axis].iter().map(|&a| a as usize).sum();
        beta_norm.saturating_sub(prefix)
    };
    let mut integral = 1.0;
    for axis in 0..n {
        let (lo, hi) = bx.intervals[axis];
        let is_theta_mid = axis >= 1 && axis <= n.saturating_sub(2);
        if alpha[axis] == 1 {
            integral *= if is_theta_mid {
                sin_power_integral(expo(axis), lo, hi)
            } else {
                hi - lo
            };
        } else {
            // fixed at the far corner y^(j)
            let y = if bx.anchor_at_hi[axis] { lo } else { hi };
            if is_theta_mid {
                integral *= y.sin().powi(expo(axis) as i32);
            }
        }
    }
    let ratio = integral / pow_half(id.generation).powi(beta_norm as i32);
    Ok(CbetaReport {
        id: id.clone(),
        alpha: alpha.to_vec(),
        beta_norm,
        ratio,
    })
}

// ---------------------------------------------------------------------------
// Pointwise estimate and norm domination
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PointwiseReport {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    /// max over samples of |f(x)| w(x)^{(n+λ)/p} / ‖f‖_{p,λ}.
    pub constant: f64,
    pub samples: usize,
    pub pass: bool,
    pub seed: u64,
}

/// |f(x)| ≲ ‖f‖_{p,λ} / w(x)^{(n+λ)/p} for harmonic f (a random combination
/// of the basis table).
pub fn check_pointwise_estimate(
    n: usize,
    p: f64,
    lambda: f64,
    samples: usize,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<PointwiseReport> {
    let spec = MeasureSpec::new(n, lambda)?;
    let ns = NormSpec::new(p)?;
    let basis = basis_up_to(n, 4)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = |x: &[f64]| -> f64 {
        basis
            .iter()
            .zip(&coeffs)
            .map(|(e, c)| c * e.eval(x))
            .sum()
    };
    let fc = |x: &[f64]| Complex64::new(f(x), 0.0);
    let grid = QuadratureGrid {
        nodes_per_axis: vec![8],
        panels_per_axis: vec![1, 4],
        refinement_level: 0,
    };
    let max_gen = if n == 2 { 12 } else { 9 };
    let fnorm = norm_p(&fc, &ns, &spec, max_gen, &grid)?;
    let mut constant = 0.0f64;
    for _ in 0..samples {
        let dir = random_direction(&mut rng, n);
        let r: f64 = 1.0 - 10f64.powf(rng.gen_range(-3.0..0.0));
        let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
        let ratio = f(&x).abs() * weight(&x).powf((n as f64 + lambda) / p) / fnorm;
        constant = constant.max(ratio);
    }
    Ok(PointwiseReport {
        n,
        p,
        lambda,
        constant,
        samples,
        pass: constant < thresholds.pointwise_band,
        seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormDomReport {
    pub alpha: Vec<u8>,
    pub p: f64,
    pub lambda: f64,
    /// ‖w^{|α|} D^α f‖_{p,λ} / ‖f‖_{p,λ}.
    pub ratio: f64,
    pub pass: bool,
}

/// ‖w^k D^α f‖_{p,λ} ≲ ‖f‖_{p,λ} for harmonic polynomials (derivatives exact).
pub fn check_norm_domination(
    f_poly: &Poly,
    alpha: &[u8],
    p: f64,
    lambda: f64,
    thresholds: &Thresholds,
) -> Result<NormDomReport> {
    let n = f_poly.nvars;
    if alpha.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: alpha.len(),
        });
    }
    let k: usize = alpha.iter().map(|&a| a as usize).sum();
    if k == 0 {
        return Err(Error::InvalidParameter("need |α| >= 1".into()));
    }
    let spec = MeasureSpec::new(n, lambda)?;
    let ns = NormSpec::new(p)?;
    let grid = QuadratureGrid {
        nodes_per_axis: vec![8],
        panels_per_axis: vec![1, 4],
        refinement_level: 0,
    };
    let max_gen = if n == 2 { 12 } else { 9 };
    let df = f_poly.diff_multi(alpha);
    let weighted = |x: &[f64]| Complex64::new(weight(x).powi(k as i32) * df.eval(x), 0.0);
    let plain = |x: &[f64]| Complex64::new(f_poly.eval(x), 0.0);
    let num = norm_p(&weighted, &ns, &spec, max_gen, &grid)?;
    let den = norm_p(&plain, &ns, &spec, max_gen, &grid)?;
    let ratio = if den > 0.0 { num / den } else { 0.0 };
    Ok(NormDomReport {
        alpha: alpha.to_vec(),
        p,
        lambda,
        ratio,
        pass: ratio < thresholds.normdom_band,
    })
}

// ---------------------------------------------------------------------------
// Compact-support projection bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CompactSupportReport {
    pub support_radius: f64,
    pub p: f64,
    pub lambda: f64,
    pub proj_norm: f64,
    pub l1_norm: f64,
    /// ‖P_λ ψ‖_{p,λ} / ‖ψ‖_{1,λ}; 0 when ψ ≡ 0.
    pub ratio: f64,
}

/// ‖P_λ ψ‖_{p,λ} ≤ C(r) ‖ψ‖_{1,λ} for ψ supported in r·𝔹̄_n.
pub fn check_compact_support_bound(
    psi: &Symbol,
    support_radius: f64,
    p: f64,
    lambda: f64,
    n: usize,
) -> Result<CompactSupportReport> {
    if support_radius > 0.9 {
        return Err(Error::InvalidParameter(format!(
            "support radius {support_radius} too close to 1 (kernel boundedness on K × 𝔹_n fails numerically)"
        )));
    }
    let spec = MeasureSpec::new(n, lambda)?;
    let ns = NormSpec::new(p)?;
    // ‖ψ‖_{1,λ} over the support
    let grid = QuadratureGrid {
        nodes_per_axis: vec![8],
        panels_per_axis: vec![1, 4],
        refinement_level: 0,
    };
    let absf = |x: &[f64]| {
        Complex64::new(
            psi.eval(x).map(|v| v.norm()).unwrap_or(f64::NAN),
            0.0,
        )
    };
    let support_gen = crate::boxes::generation_of_radius(support_radius) + 1;
    let breaks = psi.radial_breaks(0.0, 1.0);
    let (l1, _) = integrate_ball(&absf, &spec, support_gen, &grid, &breaks)?;
    let l1 = l1.re;
    if l1 == 0.0 {
        return Ok(CompactSupportReport {
            support_radius,
            p,
            lambda,
            proj_norm: 0.0,
            l1_norm: 0.0,
            ratio: 0.0,
        });
    }
    // P_λψ sampled by the outer norm quadrature; the projection integral only
    // runs over the compact support, so the kernel argument product stays at
    // |x|·(support coverage radius)
    let cfg = KernelConfig::new(lambda)
        .with_truncation(60, 1e-6)
        .with_max_gen(support_gen);
    let pf = |x: &[f64]| -> Complex64 {
        let g = |y: &[f64]| psi.eval(y).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        match project(&g, x, &spec, &cfg) {
            Ok((v, _)) => v,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    let outer_gen = 3;
    let proj_norm = norm_p(&pf, &ns, &spec, outer_gen, &QuadratureGrid::uniform(3, 1))?;
    Ok(CompactSupportReport {
        support_radius,
        p,
        lambda,
        proj_norm,
        l1_norm: l1,
        ratio: proj_norm / l1,
    })
}

// ---------------------------------------------------------------------------
// Kernel derivative growth
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct KernelDerivReport {
    pub n: usize,
    pub lambda: f64,
    /// max over samples of |∂R/∂x_i|·[x,y]^{n+λ+1}.
    pub constant: f64,
    pub samples: usize,
    pub pass: bool,
    pub seed: u64,
}

/// |D_x R_λ(x,y)| ≲ [x,y]^{-n-λ-1}: finite-difference first partials times
/// the bracket power, sampled over |x||y| ≤ 0.9.
pub fn check_kernel_derivative(
    n: usize,
    lambda: f64,
    samples: usize,
    seed: u64,
    thresholds: &Thresholds,
) -> Result<KernelDerivReport> {
    let cfg = KernelConfig::new(lambda).with_truncation(80, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut constant = 0.0f64;
    for _ in 0..samples {
        let dx = random_direction(&mut rng, n);
        let dy = random_direction(&mut rng, n);
        let rx: f64 = rng.gen_range(0.0..0.95);
        let ry: f64 = rng.gen_range(0.0..0.9 / rx.max(0.3)).min(0.95);
        let x: Vec<f64> = dx.iter().map(|v| v * rx).collect();
        let y: Vec<f64> = dy.iter().map(|v| v * ry).collect();
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            if norm(&xp) >= 0.96 {
                continue;
            }
            let d = (reproducing_kernel(&xp, &y, &cfg)? - reproducing_kernel(&xm, &y, &cfg)?)
                / (2.0 * h);
            let br = bracket(&x, &y)?;
            constant = constant.max(d.abs() * br.powf(n as f64 + lambda + 1.0));
        }
    }
    Ok(KernelDerivReport {
        n,
        lambda,
        constant,
        samples,
        pass: constant < thresholds.kernel_deriv_band,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{Profile, Section6Params, Variant};

    #[test]
    fn forelli_rudin_disk() {
        let th = Thresholds::default();
        let rep = check_forelli_rudin(2, 1.0, 0.0, &[0.0, 0.5, 0.9, 0.99], &th).unwrap();
        assert!(rep.stats.pass, "spread {} ratios {:?}", rep.stats.spread, rep.ratios);
        // preconditions
        assert!(check_forelli_rudin(2, 0.0, 0.0, &[0.5], &th).is_err());
        assert!(check_forelli_rudin(2, 1.0, -1.0, &[0.5], &th).is_err());
    }

    #[test]
    fn forelli_rudin_error_gate() {
        // t → -1⁺ stress: the boundary tail dominates and the gate trips
        let th = Thresholds::default();
        let res = check_forelli_rudin(2, 0.05, -0.95, &[0.999], &th);
        assert!(
            matches!(res, Err(Error::Convergence(_))),
            "expected convergence rejection, got {res:?}"
        );
    }

    #[test]
    fn schur_probe_midpoint() {
        let th = Thresholds::default();
        let p = 2.0;
        let lambda = 0.0;
        let alpha = -0.25; // midpoint of (-1/2, 0)
        let rep = check_schur_probe(2, lambda, p, alpha, 12, DEFAULT_SEED, &th).unwrap();
        assert!(rep.constant_q.is_finite() && rep.constant_q > 0.0);
        assert!(rep.constant_p.is_finite());
        assert!(rep.stats.pass, "spread {}", rep.stats.spread);
        // α out of range rejected
        assert!(check_schur_probe(2, lambda, p, 0.1, 4, 1, &th).is_err());
        assert!(check_schur_probe(2, lambda, p, -0.7, 4, 1, &th).is_err());
    }

    #[test]
    fn box_properties_small() {
        let th = Thresholds::default();
        let rep = check_box_properties(2, 8, 600, DEFAULT_SEED, &th).unwrap();
        assert!(rep.volume_pass, "{:?}", rep.volume_bands);
        assert!(rep.diam_pass, "{:?}", rep.diam_bands);
        assert!(rep.enlarged_pass);
        assert!(rep.overlap_pass, "{:?}", rep.overlap_max);
        assert!(rep.shell_pass, "{} violations", rep.shell_violations);
        assert!(rep.bracket_pass, "{:?}", rep.bracket_constants);
    }

    #[test]
    fn mean_value_examples() {
        let spec = MeasureSpec::new(2, 0.0).unwrap();
        let id = BoxId::new(3, vec![2], 0).unwrap();
        // f ≡ 1: ratio = |B|_λ / |B*|_λ < 1
        let one = |_: &[f64]| 1.0;
        let rep = check_mean_value(&one, &id, &spec, DEFAULT_SEED).unwrap();
        assert!(rep.ratio < 1.0 && rep.ratio > 0.1, "ratio {}", rep.ratio);
        // f = x₁ across generations: stable constant
        let f = |x: &[f64]| x[0];
        let mut ratios = Vec::new();
        for m in 2..=5 {
            let id = BoxId::new(m, vec![1], 0).unwrap();
            let rep = check_mean_value(&f, &id, &spec, DEFAULT_SEED).unwrap();
            ratios.push(rep.ratio);
        }
        let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let rmax = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(rmax / rmin < 3.0, "ratios {ratios:?}");
        // a sign change inside the box only helps the inequality
        let g = |x: &[f64]| x[0] - 0.8;
        let id = BoxId::new(2, vec![0], 0).unwrap();
        let rep = check_mean_value(&g, &id, &spec, DEFAULT_SEED).unwrap();
        assert!(rep.ratio.is_finite());
    }

    #[test]
    fn integration_by_parts_calibration_case() {
        // G ≡ 1: all D^α G vanish except α = 0 and the identity is exact
        let th = Thresholds::default();
        let f = Poly::new(2, vec![(1.0, vec![1, 2]), (0.5, vec![0, 0])]);
        let g = Poly::constant(2, 1.0);
        let rect = [(0.1, 0.6), (0.2, 1.0)];
        let rep = check_integration_by_parts(&f, &g, &rect, 0.0, &th).unwrap();
        assert!(rep.residual < 1e-12, "residual {}", rep.residual);
    }

    #[test]
    fn integration_by_parts_closed_form_case() {
        // n = 2, F = 1, G = γ₁γ₂ on [0,1]², λ = 0: LHS = ∫ r²θ dr dθ = 1/6
        let th = Thresholds::default();
        let f = Poly::constant(2, 1.0);
        let g = Poly::new(2, vec![(1.0, vec![1, 1])]);
        let rect = [(0.0, 1.0), (0.0, 1.0)];
        let rep = check_integration_by_parts(&f, &g, &rect, 0.0, &th).unwrap();
        assert!((rep.lhs - 1.0 / 6.0).abs() < 1e-12, "lhs {}", rep.lhs);
        assert!(rep.pass, "residual {}", rep.residual);
    }

    #[test]
    fn integration_by_parts_random_polynomials() {
        let th = Thresholds::default();
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        for n in [2usize, 3] {
            for _ in 0..4 {
                let rand_poly = |rng: &mut ChaCha8Rng| {
                    let mut terms = Vec::new();
                    for _ in 0..4 {
                        let exps: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=3u8)).collect();
                        terms.push((rng.gen_range(-1.0..1.0), exps));
                    }
                    Poly::new(n, terms)
                };
                let f = rand_poly(&mut rng);
                let g = rand_poly(&mut rng);
                let mut rect = vec![(0.2, 0.7)];
                for _ in 1..n {
                    rect.push((rng.gen_range(0.0..0.5), rng.gen_range(0.8..1.5)));
                }
                let rep =
                    check_integration_by_parts(&f, &g, &rect, 0.5, &th).unwrap();
                assert!(
                    rep.pass,
                    "n={n}: residual {} (lhs {}, rhs {})",
                    rep.residual, rep.lhs, rep.rhs
                );
            }
        }
    }

    #[test]
    fn cbeta_radial_edge_case() {
        // |β| = |α| = 1 with α₁ = 1: c_β ≡ 1, integral is the radial edge
        for m in [1u32, 3, 5] {
            let id = BoxId::new(m, vec![0, 0], 0).unwrap();
            let rep = check_cbeta_integral(&[1, 0, 0], 1, &id).unwrap();
            assert!((rep.ratio - 0.5).abs() < 1e-12, "m={m}: {}", rep.ratio);
        }
        // β = 0 and |β| > |α| rejected
        let id = BoxId::new(2, vec![1, 0], 0).unwrap();
        assert!(check_cbeta_integral(&[1, 0, 0], 0, &id).is_err());
        assert!(check_cbeta_integral(&[1, 0, 0], 2, &id).is_err());
    }

    #[test]
    fn cbeta_band_stability() {
        // mixed α on ladder boxes: ratio band stable over generations
        let alpha = [1u8, 1, 0];
        let mut ratios = Vec::new();
        for m in 2..=8u32 {
            let mid = (1u32 << m) / 2;
            let id = BoxId::new(m, vec![mid, mid / 2], 0).unwrap();
            let rep = check_cbeta_integral(&alpha, 2, &id).unwrap();
            ratios.push(rep.ratio);
        }
        let rmax = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(rmax < Thresholds::default().cbeta_band, "{ratios:?}");
        // polar boxes too (k₂ = 0)
        for m in 2..=8u32 {
            let id = BoxId::new(m, vec![0, 0], 0).unwrap();
            let rep = check_cbeta_integral(&alpha, 2, &id).unwrap();
            assert!(rep.ratio < Thresholds::default().cbeta_band);
        }
    }

    #[test]
    fn pointwise_estimate_properties() {
        let th = Thresholds::default();
        let rep = check_pointwise_estimate(2, 2.0, 0.0, 200, DEFAULT_SEED, &th).unwrap();
        assert!(rep.pass, "constant {}", rep.constant);
        // constant for f ≡ 1 is w^{(n+λ)/p} ≤ 1: exercised via the combo anyway;
        // determinism: same seed, same constant
        let rep2 = check_pointwise_estimate(2, 2.0, 0.0, 200, DEFAULT_SEED, &th).unwrap();
        assert_eq!(rep.constant.to_bits(), rep2.constant.to_bits());
    }

    #[test]
    fn norm_domination_closed_form() {
        let th = Thresholds::default();
        // f = x₁, α = e₁: ratio = ‖w‖_{p,λ}/‖x₁‖_{p,λ}
        let f = Poly::new(2, vec![(1.0, vec![1, 0])]);
        let rep = check_norm_domination(&f, &[1, 0], 2.0, 0.0, &th).unwrap();
        // ‖w‖² = ∫(1-r²)² dV = 1/3; ‖x₁‖² = 1/4 → ratio = sqrt(4/3)
        let want = (4.0f64 / 3.0).sqrt();
        assert!(
            (rep.ratio - want).abs() < 5e-4,
            "ratio {} vs {want}",
            rep.ratio
        );
        assert!(rep.pass);
        // constant symbol: derivative vanishes
        let c = Poly::constant(2, 3.0);
        let rep = check_norm_domination(&c, &[1, 0], 2.0, 0.0, &th).unwrap();
        assert_eq!(rep.ratio, 0.0);
    }

    #[test]
    fn compact_support_bound_behaviour() {
        // ψ ≡ 0: ratio defined as 0
        let zero = Symbol::constant(Complex64::new(0.0, 0.0));
        let rep = check_compact_support_bound(&zero, 0.5, 2.0, 0.0, 2).unwrap();
        assert_eq!(rep.ratio, 0.0);
        // radial indicator: finite ratio (P_λ of a radial symbol is the
        // constant ∫ψ dV_λ, so the ratio sits near the covered mass)
        let chi =
            |r: f64| Symbol::truncated(Symbol::constant(Complex64::new(1.0, 0.0)), r).unwrap();
        let rep5 = check_compact_support_bound(&chi(0.5), 0.5, 2.0, 0.0, 2).unwrap();
        assert!(rep5.ratio.is_finite() && rep5.ratio > 0.5 && rep5.ratio <= 1.01);
        // C(r) growth probed with an angular-weighted symbol y₁·χ_{|y|≤r}:
        // the degree-1 component scales like r⁴/r³
        let ang = |r: f64| {
            Symbol::truncated(
                Symbol::Expression(crate::parser::parse("x1", 2).unwrap()),
                r,
            )
            .unwrap()
        };
        let rep5 = check_compact_support_bound(&ang(0.5), 0.5, 2.0, 0.0, 2).unwrap();
        let rep9 = check_compact_support_bound(&ang(0.9), 0.9, 2.0, 0.0, 2).unwrap();
        assert!(
            rep9.ratio > rep5.ratio,
            "C(0.9) = {} vs C(0.5) = {}",
            rep9.ratio,
            rep5.ratio
        );
        // support too close to the boundary rejected
        assert!(check_compact_support_bound(&chi(0.95), 0.95, 2.0, 0.0, 2).is_err());
    }

    #[test]
    fn kernel_derivative_growth() {
        let th = Thresholds::default();
        let rep = check_kernel_derivative(2, 0.0, 40, DEFAULT_SEED, &th).unwrap();
        assert!(rep.constant.is_finite() && rep.constant > 0.0);
        assert!(rep.pass, "constant {}", rep.constant);
    }

    #[test]
    fn oscillating_symbol_keeps_carleson_small_but_average_big() {
        // sanity wiring of validate-level pieces with the oscillating family
        let psi = Symbol::section6(Section6Params {
            profile: Profile::Power { exponent: 1.0 },
            lambda: 0.0,
            n: 2,
            variant: Variant::Bounded,
        })
        .unwrap();
        let spec = MeasureSpec::new(2, 0.0).unwrap();
        let ms = crate::carleson::radial_condition(&psi, &spec, 8).unwrap();
        let mmax = ms.iter().map(|&(_, v)| v).fold(0.0, f64::max);
        assert!(mmax < 3.2, "radial condition exceeded: {mmax}");
    }
}
