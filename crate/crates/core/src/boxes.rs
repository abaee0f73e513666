//! Dyadic spherical boxes: the sets C_k indexed by the ladder set 𝒦, their
//! reflection closure, corners under the mirrored partial order, enlargements
//! B_j* = B_j + 2^{-m-2}𝔹_n, point location and overlap counting.
//!
//! A box of generation m occupies the radial shell [1-2^{-m}, 1-2^{-m-1}].
//! For n ≥ 3 the ladder (k₂, …, k_n) satisfies 0 ≤ k_n ≤ … ≤ k₂ ≤ 2^m - 1,
//! the θ₂ interval is [π/2·k₂·2^{-m}, π/2·(k₂+1)·2^{-m}], intermediate angles
//! are scaled by 1/(k_{j-1}+1) into [0, π/2], the last angle by the same
//! ladder ratio into [0, 2π], and reflections θ_j ↦ π - θ_j (2 ≤ j ≤ n-1)
//! generate the rest of ℚ_n. For n = 2 the decomposition degenerates to the
//! classical disk decomposition: 2^m equal angular intervals per shell and
//! no reflections.

use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::spherical::{sigma_into, to_spherical, SphericalPoint};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Combinatorial index of a dyadic box.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BoxId {
    /// Generation m ≥ 0.
    pub generation: u32,
    /// (k₂, …, k_n); length n-1. For n = 2 the single entry is the angular index.
    pub ladder: Vec<u32>,
    /// Reflection bitmask: bit j ⇔ θ_{j+2} reflected, j = 0..n-3. Always 0 for n = 2.
    pub mask: u32,
}

impl BoxId {
    pub fn new(generation: u32, ladder: Vec<u32>, mask: u32) -> Result<Self> {
        let id = Self { generation, ladder, mask };
        id.validate()?;
        Ok(id)
    }

    pub fn dim(&self) -> usize {
        self.ladder.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::InvalidParameter("ladder must have length >= 1".into()));
        }
        let top = (1u64 << self.generation) - 1;
        if (self.ladder[0] as u64) > top {
            return Err(Error::InvalidParameter(format!(
                "k2 = {} exceeds 2^m - 1 = {top}",
                self.ladder[0]
            )));
        }
        for w in self.ladder.windows(2) {
            if w[1] > w[0] {
                return Err(Error::InvalidParameter(format!(
                    "ladder not nonincreasing: {:?}",
                    self.ladder
                )));
            }
        }
        let mask_bits = if n >= 3 { n - 2 } else { 0 };
        if self.mask >= (1u32 << mask_bits) {
            return Err(Error::InvalidParameter(format!(
                "mask {} out of range for n = {n}",
                self.mask
            )));
        }
        Ok(())
    }
}

/// Geometric realization of a box: ℚ_n intervals and the two opposite
/// corners x^(j) (anchor) and y^(j) under the mirrored partial order.
#[derive(Debug, Clone)]
pub struct DyadicBox {
    pub id: BoxId,
    /// Per-axis intervals in ℚ_n after applying the reflection mask.
    /// Axis 0 is radial, axes 1..n-1 the angles θ₂..θ_n.
    pub intervals: Vec<(f64, f64)>,
    /// Whether the anchor corner x^(j) sits at the `hi` end of each axis
    /// (true exactly for reflected θ_j axes).
    pub anchor_at_hi: Vec<bool>,
    /// Smallest corner x^(j) in the order.
    pub q_min: SphericalPoint,
    /// Largest corner y^(j).
    pub q_max: SphericalPoint,
    /// 2^{-m-2}.
    pub enlargement_radius: f64,
}

/// 2^{-m}, exactly.
pub fn pow_half(m: u32) -> f64 {
    0.5f64.powi(m as i32)
}

/// Radial interval [1-2^{-m}, 1-2^{-m-1}] of generation m.
pub fn radial_interval(m: u32) -> (f64, f64) {
    (1.0 - pow_half(m), 1.0 - pow_half(m + 1))
}

/// Generation shell that contains radius `r` under the half-open convention
/// [1-2^{-m}, 1-2^{-m-1}).
pub fn generation_of_radius(r: f64) -> u32 {
    debug_assert!((0.0..1.0).contains(&r));
    let mut m = if r < 0.5 {
        0
    } else {
        (-(1.0 - r).log2()).floor().max(0.0) as u32
    };
    // exact comparisons fix any logarithm rounding
    while r >= 1.0 - pow_half(m + 1) {
        m += 1;
    }
    while m > 0 && r < 1.0 - pow_half(m) {
        m -= 1;
    }
    m
}

/// Number of boxes in generation m.
pub fn generation_count(n: usize, m: u32) -> u64 {
    let two_m = 1u64 << m;
    if n == 2 {
        return two_m;
    }
    // nonincreasing chains of length n-1 with k₂ ≤ 2^m - 1: C(2^m + n - 2, n - 1)
    let mut chains = 1u128;
    for i in 0..(n - 1) as u128 {
        chains = chains * (two_m as u128 + (n as u128 - 2) - i) / (i + 1);
    }
    (chains as u64) << (n - 2)
}

/// Visit every ladder of generation m in lexicographic order; `f` receives a
/// reused buffer of length n-1.
pub fn for_each_ladder(n: usize, m: u32, mut f: impl FnMut(&[u32])) {
    let top = (1u32 << m) - 1;
    let mut ladder = vec![0u32; n - 1];
    fn rec(axis: usize, hi: u32, ladder: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if axis == ladder.len() {
            f(ladder);
            return;
        }
        for k in 0..=hi {
            ladder[axis] = k;
            if axis + 1 == ladder.len() {
                f(ladder);
            } else {
                rec(axis + 1, k, ladder, f);
            }
        }
    }
    if n == 2 {
        for k in 0..=top {
            ladder[0] = k;
            f(&ladder);
        }
    } else {
        rec(0, top, &mut ladder, &mut f);
    }
}

/// Complete, duplicate-free list of boxes of generation m, ordered
/// lexicographically by (ladder, mask).
pub fn enumerate_generation(n: usize, m: u32) -> Vec<BoxId> {
    let mask_count = if n >= 3 { 1u32 << (n - 2) } else { 1 };
    let mut out = Vec::with_capacity(generation_count(n, m) as usize);
    for_each_ladder(n, m, |ladder| {
        for mask in 0..mask_count {
            out.push(BoxId {
                generation: m,
                ladder: ladder.to_vec(),
                mask,
            });
        }
    });
    out
}

/// ℚ_n intervals of the box (after reflection), written into `out`.
pub fn ladder_intervals(n: usize, m: u32, ladder: &[u32], mask: u32, out: &mut [(f64, f64)]) {
    debug_assert_eq!(out.len(), n);
    out[0] = (1.0 - pow_half(m), 1.0 - pow_half(m + 1));
    if n == 2 {
        let w = TAU * pow_half(m);
        out[1] = (ladder[0] as f64 * w, (ladder[0] + 1) as f64 * w);
        return;
    }
    // θ₂ ladder
    let w2 = FRAC_PI_2 * pow_half(m);
    out[1] = (ladder[0] as f64 * w2, (ladder[0] + 1) as f64 * w2);
    // θ_j, 3 <= j <= n-1, scaled into [0, π/2] by the previous ladder entry
    for j in 2..n - 1 {
        let denom = (ladder[j - 2] + 1) as f64;
        out[j] = (
            FRAC_PI_2 * ladder[j - 1] as f64 / denom,
            FRAC_PI_2 * (ladder[j - 1] + 1) as f64 / denom,
        );
    }
    // θ_n scaled into [0, 2π]
    let denom = (ladder[n - 3] + 1) as f64;
    out[n - 1] = (
        TAU * ladder[n - 2] as f64 / denom,
        TAU * (ladder[n - 2] + 1) as f64 / denom,
    );
    // reflections θ_j ↦ π - θ_j on masked axes (θ₂..θ_{n-1} are axes 1..n-2)
    for bit in 0..n - 2 {
        if mask & (1 << bit) != 0 {
            let (lo, hi) = out[1 + bit];
            out[1 + bit] = (PI - hi, PI - lo);
        }
    }
}

/// Geometric realization with corners under the mirrored order: the anchor
/// x^(j) minimizes r and θ_n and is pole-most in each θ_j axis.
pub fn box_geometry(id: &BoxId) -> Result<DyadicBox> {
    id.validate()?;
    let n = id.dim();
    let m = id.generation;
    let mut intervals = vec![(0.0, 0.0); n];
    ladder_intervals(n, m, &id.ladder, id.mask, &mut intervals);
    let mut anchor_at_hi = vec![false; n];
    for bit in 0..n.saturating_sub(2) {
        anchor_at_hi[1 + bit] = id.mask & (1 << bit) != 0;
    }
    let mut lo_corner = Vec::with_capacity(n - 1);
    let mut hi_corner = Vec::with_capacity(n - 1);
    for axis in 1..n {
        let (lo, hi) = intervals[axis];
        if anchor_at_hi[axis] {
            lo_corner.push(hi);
            hi_corner.push(lo);
        } else {
            lo_corner.push(lo);
            hi_corner.push(hi);
        }
    }
    let q_min = SphericalPoint {
        r: intervals[0].0,
        angles: lo_corner,
    };
    let q_max = SphericalPoint {
        r: intervals[0].1,
        angles: hi_corner,
    };
    Ok(DyadicBox {
        id: id.clone(),
        intervals,
        anchor_at_hi,
        q_min,
        q_max,
        enlargement_radius: pow_half(m + 2),
    })
}

/// Locate the unique box containing x under the half-open convention
/// (intervals are [lo, hi) with the terminal interval of each axis closed).
pub fn locate(x: &[f64]) -> Result<BoxId> {
    let n = x.len();
    let r = norm(x);
    if r >= 1.0 {
        return Err(Error::OutOfDomain(format!("|x| = {r} >= 1")));
    }
    let m = generation_of_radius(r);
    let g = to_spherical(x);
    if n == 2 {
        let w = TAU * pow_half(m);
        let k = ((g.angles[0] / w) as u32).min((1u32 << m) - 1);
        return Ok(BoxId {
            generation: m,
            ladder: vec![k],
            mask: 0,
        });
    }
    // fold reflected axes and record the mask
    let mut mask = 0u32;
    let mut folded = g.angles.clone();
    for (bit, t) in folded.iter_mut().enumerate().take(n - 2) {
        if *t > FRAC_PI_2 {
            *t = PI - *t;
            mask |= 1 << bit;
        }
    }
    let mut ladder = vec![0u32; n - 1];
    let w2 = FRAC_PI_2 * pow_half(m);
    ladder[0] = ((folded[0] / w2) as u32).min((1u32 << m) - 1);
    for j in 2..n - 1 {
        let denom = (ladder[j - 2] + 1) as f64;
        let w = FRAC_PI_2 / denom;
        ladder[j - 1] = ((folded[j - 1] / w) as u32).min(ladder[j - 2]);
    }
    let denom = (ladder[n - 3] + 1) as f64;
    let w = TAU / denom;
    ladder[n - 2] = ((g.angles[n - 2] / w) as u32).min(ladder[n - 3]);
    Ok(BoxId {
        generation: m,
        ladder,
        mask,
    })
}

/// Euclidean distance from x to the box, by coordinate clamping in ℚ_n
/// followed by projected-gradient refinement over the ℚ_n rectangle.
///
/// Accuracy target is enlargement_radius / 100; misclassification by
/// `enlarged_contains` is confined to a shell of that width around ∂B_j*.
pub fn distance_to_box(x: &[f64], bx: &DyadicBox) -> f64 {
    let n = x.len();
    debug_assert_eq!(n, bx.intervals.len());
    let g = to_spherical(x);
    let mut q: Vec<f64> = Vec::with_capacity(n);
    q.push(g.r.clamp(bx.intervals[0].0, bx.intervals[0].1));
    for axis in 1..n {
        let (lo, hi) = bx.intervals[axis];
        let t = g.angles[axis - 1];
        if axis == n - 1 {
            // periodic axis: try t, t ± 2π and keep the closest clamp
            let mut best = t.clamp(lo, hi);
            let mut bestd = (t - best).abs();
            for cand in [t - TAU, t + TAU] {
                let c = cand.clamp(lo, hi);
                if (cand - c).abs() < bestd {
                    bestd = (cand - c).abs();
                    best = c;
                }
            }
            q.push(best);
        } else {
            q.push(t.clamp(lo, hi));
        }
    }
    let inside = q[0] == g.r && q[1..].iter().zip(&g.angles).all(|(a, b)| a == b);
    if inside {
        return 0.0;
    }
    let tol = bx.enlargement_radius / 100.0;
    let mut y = vec![0.0; n];
    sigma_into(&q, &mut y);
    let mut dist2 = dist_sq(x, &y);
    // projected gradient descent with backtracking on |x - σ(q)|²
    let mut grad = vec![0.0; n];
    let mut step = 0.25 * bx.enlargement_radius;
    for _ in 0..120 {
        sigma_gradient(x, &q, &mut grad);
        let gnorm = norm(&grad);
        if gnorm * step < tol * tol / 10.0 {
            break;
        }
        let mut improved = false;
        while step > 1e-18 {
            let mut qn = q.clone();
            for axis in 0..n {
                let (lo, hi) = bx.intervals[axis];
                qn[axis] = (q[axis] - step * grad[axis] / gnorm.max(1e-300)).clamp(lo, hi);
            }
            sigma_into(&qn, &mut y);
            let d2 = dist_sq(x, &y);
            if d2 < dist2 - 1e-30 {
                q = qn;
                dist2 = d2;
                improved = true;
                step *= 1.3;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    dist2.sqrt()
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// ∇_q |x - σ(q)|² = -2 J_σ(q)ᵀ (x - σ(q)).
fn sigma_gradient(x: &[f64], q: &[f64], grad: &mut [f64]) {
    let n = q.len();
    let mut y = vec![0.0; n];
    sigma_into(q, &mut y);
    let resid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    // column l of J_σ = ∂σ/∂q_l
    let mut col = vec![0.0; n];
    for l in 0..n {
        sigma_partial(q, l, &mut col);
        grad[l] = -2.0 * col.iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// ∂σ/∂q_l written into `out`; q = (r, θ₂, …, θ_n).
///
/// Component x_k (0-based) is r·sin q₁⋯sin q_k·cos q_{k+1} for k < n-1 and
/// r·sin q₁⋯sin q_{n-1} for the last one, so differentiating swaps exactly
/// one trigonometric factor.
fn sigma_partial(q: &[f64], l: usize, out: &mut [f64]) {
    let n = q.len();
    if l == 0 {
        // ∂σ/∂r = σ(1, θ)
        let mut unit = q.to_vec();
        unit[0] = 1.0;
        sigma_into(&unit, out);
        return;
    }
    let r = q[0];
    for k in 0..n {
        let nsin = if k == n - 1 { n - 1 } else { k };
        let has_cos = k < n - 1;
        if l > nsin && !(has_cos && l == k + 1) {
            out[k] = 0.0;
            continue;
        }
        let mut v = r;
        for j in 1..=nsin {
            v *= if j == l { q[j].cos() } else { q[j].sin() };
        }
        if has_cos {
            v *= if l == k + 1 { -q[k + 1].sin() } else { q[k + 1].cos() };
        }
        out[k] = v;
    }
}

/// x ∈ B_j* ⇔ dist(x, B_j) < 2^{-m-2}.
pub fn enlarged_contains(id: &BoxId, x: &[f64]) -> Result<bool> {
    let bx = box_geometry(id)?;
    Ok(distance_to_box(x, &bx) < bx.enlargement_radius)
}

/// Precomputed geometry of all boxes of one generation, for fast overlap queries.
pub struct GenerationTable {
    pub n: usize,
    pub m: u32,
    pub boxes: Vec<CachedBox>,
}

pub struct CachedBox {
    pub geom: DyadicBox,
    pub center: Vec<f64>,
    /// Lipschitz circumscribed-radius bound: any box point is within this of the center.
    pub radius_bound: f64,
}

impl GenerationTable {
    pub fn build(n: usize, m: u32) -> Self {
        let ids = enumerate_generation(n, m);
        let boxes = ids
            .iter()
            .map(|id| {
                let geom = box_geometry(id).expect("enumerated id is valid");
                let mid: Vec<f64> = geom
                    .intervals
                    .iter()
                    .map(|&(lo, hi)| 0.5 * (lo + hi))
                    .collect();
                let mut center = vec![0.0; n];
                sigma_into(&mid, &mut center);
                // |σ(q) - σ(q')| <= Δr + Σ_l L_l Δθ_l with
                // L_l = r_hi · ∏_{2<=j<l} max sinθ_j; halved for center-to-corner
                let r_hi = geom.intervals[0].1;
                let mut bound = geom.intervals[0].1 - geom.intervals[0].0;
                let mut sin_prod = r_hi;
                for axis in 1..n {
                    let (lo, hi) = geom.intervals[axis];
                    bound += sin_prod * (hi - lo);
                    let max_sin = if lo <= FRAC_PI_2 && FRAC_PI_2 <= hi {
                        1.0
                    } else {
                        lo.sin().max(hi.sin())
                    };
                    sin_prod *= max_sin;
                }
                CachedBox {
                    geom,
                    center,
                    radius_bound: 0.5 * bound + 1e-12,
                }
            })
            .collect();
        Self { n, m, boxes }
    }
}

/// Number of boxes across the given tables whose enlargement B_j* contains x.
pub fn overlap_count(x: &[f64], tables: &[GenerationTable]) -> usize {
    let mut count = 0;
    for table in tables {
        let rad = pow_half(table.m + 2);
        for cb in &table.boxes {
            let d_center = dist_sq(x, &cb.center).sqrt();
            if d_center > cb.radius_bound + rad {
                continue;
            }
            if distance_to_box(x, &cb.geom) < rad {
                count += 1;
            }
        }
    }
    count
}
