//! The coordinate map σ : ℚ_n → 𝔹_n, its Jacobian and a.e. inverse.
//!
//! ℚ_n = [0,1) × [0,π]^{n-2} × [0,2π] and
//! σ(r, θ₂, …, θ_n) = (r cosθ₂, r sinθ₂ cosθ₃, …, r sinθ₂⋯sinθ_{n-1} sinθ_n).
//! For n = 2 there is a single angle ranging over [0, 2π].

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

/// A point of ℚ_n: radius in [0,1) and angles (θ₂, …, θ_n).
///
/// `angles.len() == dim - 1`; the last angle lives in [0, 2π], the others
/// in [0, π].
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub angles: Vec<f64>,
}

impl SphericalPoint {
    pub fn new(r: f64, angles: Vec<f64>) -> Result<Self> {
        let n = angles.len() + 1;
        if n < 2 {
            return Err(Error::InvalidParameter("need at least one angle".into()));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(Error::OutOfDomain(format!("r = {r} outside [0,1)")));
        }
        let last = angles.len() - 1;
        for (i, &t) in angles.iter().enumerate() {
            let hi = if i == last { TAU } else { PI };
            if !(0.0..=hi + 1e-12).contains(&t) {
                return Err(Error::OutOfDomain(format!(
                    "theta_{} = {t} outside [0, {hi}]",
                    i + 2
                )));
            }
        }
        Ok(Self { r, angles })
    }

    pub fn dim(&self) -> usize {
        self.angles.len() + 1
    }
}

/// σ as a slice function: `g = [r, θ₂, …, θ_n]`, output written to `out`.
///
/// This is the allocation-free core used by the quadrature hot loops.
pub fn sigma_into(g: &[f64], out: &mut [f64]) {
    let n = g.len();
    debug_assert_eq!(out.len(), n);
    let mut prefix = g[0]; // r · sinθ₂ ⋯ sinθ_j as j advances
    for j in 0..n - 2 {
        let t = g[j + 1];
        out[j] = prefix * t.cos();
        prefix *= t.sin();
    }
    let tn = g[n - 1];
    out[n - 2] = prefix * tn.cos();
    out[n - 1] = prefix * tn.sin();
}

/// σ(g) for a validated spherical point.
pub fn to_cartesian(g: &SphericalPoint) -> Vec<f64> {
    let n = g.dim();
    let mut flat = Vec::with_capacity(n);
    flat.push(g.r);
    flat.extend_from_slice(&g.angles);
    let mut out = vec![0.0; n];
    sigma_into(&flat, &mut out);
    out
}

/// Almost-everywhere inverse of σ.
///
/// Convention at singular points: once a sine vanishes all later angles are 0;
/// θ_n is computed with atan2 and wrapped into [0, 2π).
pub fn to_spherical(x: &[f64]) -> SphericalPoint {
    let n = x.len();
    let r = crate::geometry::norm(x);
    let mut angles = vec![0.0; n - 1];
    if r == 0.0 {
        return SphericalPoint { r, angles };
    }
    // tail norms t_j = |(x_j, ..., x_n)|, 1-indexed like the paper's coordinates
    let mut tail = vec![0.0f64; n + 1];
    for j in (0..n).rev() {
        tail[j] = (tail[j + 1].powi(2) + x[j] * x[j]).sqrt();
    }
    for j in 0..n - 2 {
        if tail[j] == 0.0 {
            break; // all remaining angles stay 0
        }
        angles[j] = tail[j + 1].atan2(x[j]); // in [0, π] since tail >= 0
    }
    let tn = x[n - 1].atan2(x[n - 2]);
    angles[n - 2] = if tn < 0.0 { tn + TAU } else { tn };
    if angles[n - 2] >= TAU {
        angles[n - 2] = 0.0;
    }
    SphericalPoint { r, angles }
}

/// Jacobian J_σ = r^{n-1} sin^{n-2}θ₂ sin^{n-3}θ₃ ⋯ sinθ_{n-1} (n = 2: just r).
pub fn jacobian(g: &SphericalPoint) -> f64 {
    let n = g.dim();
    let mut j = g.r.powi((n - 1) as i32);
    for (i, &t) in g.angles.iter().enumerate().take(n.saturating_sub(2)) {
        j *= t.sin().powi((n - 2 - i) as i32);
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_examples() {
        // n = 3, (0.5, π/2, 0) -> (0, 0.5, 0)
        let g = SphericalPoint::new(0.5, vec![PI / 2.0, 0.0]).unwrap();
        let x = to_cartesian(&g);
        assert!(x[0].abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15 && x[2].abs() < 1e-15);
        // r = 0 -> origin regardless of angles
        let g = SphericalPoint::new(0.0, vec![1.0, 2.0]).unwrap();
        assert!(crate::geometry::norm(&to_cartesian(&g)) == 0.0);
        // n = 2, (0.3, 0) -> (0.3, 0)
        let g = SphericalPoint::new(0.3, vec![0.0]).unwrap();
        let x = to_cartesian(&g);
        assert!((x[0] - 0.3).abs() < 1e-15 && x[1].abs() < 1e-15);
        // |σ(g)| = r
        let g = SphericalPoint::new(0.77, vec![0.3, 1.1, 4.0]).unwrap();
        assert!((crate::geometry::norm(&to_cartesian(&g)) - 0.77).abs() < 1e-14);
    }

    #[test]
    fn inverse_examples() {
        let g = to_spherical(&[0.0, 0.5, 0.0]);
        assert!((g.r - 0.5).abs() < 1e-15);
        assert!((g.angles[0] - PI / 2.0).abs() < 1e-15);
        assert!(g.angles[1].abs() < 1e-15);

        let g = to_spherical(&[0.0, 0.0, 0.0]);
        assert_eq!(g.r, 0.0);
        assert!(g.angles.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for n in [2usize, 3, 4, 5] {
            for _ in 0..2500 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
                if crate::geometry::norm(&x) >= 0.999 {
                    continue;
                }
                let g = to_spherical(&x);
                let back = to_cartesian(&g);
                let err: f64 = back
                    .iter()
                    .zip(&x)
                    .map(|(u, v)| (u - v).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12, "round trip failed n={n}, err={err}");
            }
        }
    }

    #[test]
    fn jacobian_values() {
        // n = 3: r² sinθ₂
        let g = SphericalPoint::new(0.5, vec![PI / 2.0, 1.3]).unwrap();
        assert!((jacobian(&g) - 0.25).abs() < 1e-15);
        // θ₂ = 0 is singular for n >= 3
        let g = SphericalPoint::new(0.5, vec![0.0, 1.3]).unwrap();
        assert_eq!(jacobian(&g), 0.0);
        // n = 2: J = r
        let g = SphericalPoint::new(0.8, vec![2.0]).unwrap();
        assert!((jacobian(&g) - 0.8).abs() < 1e-15);
        // nonnegative everywhere in range
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let g = SphericalPoint::new(
                rng.gen_range(0.0..1.0),
                vec![rng.gen_range(0.0..PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU)],
            )
            .unwrap();
            assert!(jacobian(&g) >= 0.0);
        }
    }
}
