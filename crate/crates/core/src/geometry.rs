//! Euclidean / Möbius / hyperbolic geometry of the unit ball 𝔹_n.
//!
//! The four primitives here — the weight w(x) = 1 - |x|², the bracket
//! [x,a] = (1 - 2x·a + |x|²|a|²)^{1/2}, the Möbius involution φ_a and the
//! Poincaré distance — control every estimate downstream, so they are kept
//! as plain slice functions with a thin validating wrapper type on top.

use crate::error::{Error, Result};

/// A point of 𝔹_n (or its closure, where an operation permits |x| = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianPoint {
    pub coords: Vec<f64>,
}

impl CartesianPoint {
    /// Point strictly inside the unit ball.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be >= 2, got {}",
                coords.len()
            )));
        }
        let r = norm(&coords);
        if r >= 1.0 {
            return Err(Error::OutOfDomain(format!("|x| = {r} >= 1")));
        }
        Ok(Self { coords })
    }

    /// Point of the closed ball.
    pub fn new_closed(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be >= 2, got {}",
                coords.len()
            )));
        }
        let r = norm(&coords);
        if r > 1.0 + 1e-14 {
            return Err(Error::OutOfDomain(format!("|x| = {r} > 1")));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn check_same_dim(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

/// w(x) = 1 - |x|².
pub fn weight(x: &[f64]) -> f64 {
    1.0 - norm_sq(x)
}

/// The bracket [x,a] = (1 - 2 x·a + |x|²|a|²)^{1/2}.
///
/// Symmetric, and bounded below by 1 - |x||a| ≥ max(w(x), w(a))/2.
pub fn bracket(x: &[f64], a: &[f64]) -> Result<f64> {
    check_same_dim(x, a)?;
    let v = 1.0 - 2.0 * dot(x, a) + norm_sq(x) * norm_sq(a);
    // rounding can push the radicand a hair below zero when x ≈ a near the boundary
    Ok(v.max(0.0).sqrt())
}

/// Möbius transformation φ_a(x) = (|x-a|² a - (1-|a|²)(x-a)) / [x,a]².
///
/// An involution of 𝔹_n onto itself with φ_a(a) = 0.
pub fn mobius(a: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_same_dim(a, x)?;
    if norm(a) >= 1.0 {
        return Err(Error::OutOfDomain(format!("|a| = {} >= 1", norm(a))));
    }
    if norm(x) >= 1.0 {
        return Err(Error::OutOfDomain(format!("|x| = {} >= 1", norm(x))));
    }
    let diff: Vec<f64> = x.iter().zip(a).map(|(xi, ai)| xi - ai).collect();
    let d2 = norm_sq(&diff);
    let wa = weight(a);
    let br2 = 1.0 - 2.0 * dot(x, a) + norm_sq(x) * norm_sq(a);
    Ok(a.iter()
        .zip(&diff)
        .map(|(ai, di)| (d2 * ai - wa * di) / br2)
        .collect())
}

/// Poincaré (hyperbolic) distance d(a,b) = log((1+|φ_a(b)|)/(1-|φ_a(b)|)).
pub fn hyperbolic_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let t = norm(&mobius(a, b)?);
    Ok(((1.0 + t) / (1.0 - t)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_ball_point(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> Vec<f64> {
        // rejection sampling in the cube, then radial rescale
        loop {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = norm(&x);
            if r < 1.0 && r > 1e-6 {
                let target = rng.gen_range(0.0f64..rmax);
                return x.iter().map(|v| v * target / r).collect();
            }
        }
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(&[0.0, 0.0]), 1.0);
        assert!((weight(&[1.0, 0.0])).abs() < 1e-15);
        assert!((weight(&[0.6, 0.0]) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn bracket_examples() {
        // a = 0 kills both non-constant terms
        assert_eq!(bracket(&[0.3, 0.4], &[0.0, 0.0]).unwrap(), 1.0);
        // direct evaluation: sqrt(1 - 0.6 + 0.09) = 0.7
        assert!((bracket(&[0.6, 0.0], &[0.5, 0.0]).unwrap() - 0.7).abs() < 1e-15);
        // [a,a] = 1 - |a|² = w(a)
        let a = [0.2, -0.5, 0.1];
        assert!((bracket(&a, &a).unwrap() - weight(&a)).abs() < 1e-14);
        // dimension mismatch rejected
        assert!(bracket(&[0.1, 0.2], &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn mobius_examples() {
        let a = [0.3, -0.2, 0.4];
        let img = mobius(&a, &a).unwrap();
        assert!(norm(&img) < 1e-14, "φ_a(a) = 0");
        let back = mobius(&a, &[0.0, 0.0, 0.0]).unwrap();
        for (u, v) in back.iter().zip(&a) {
            assert!((u - v).abs() < 1e-14, "φ_a(0) = a");
        }
        let neg = mobius(&[0.0, 0.0], &[0.3, -0.6]).unwrap();
        assert!((neg[0] + 0.3).abs() < 1e-15 && (neg[1] - 0.6).abs() < 1e-15, "φ_0 = -id");
        assert!(mobius(&[1.0, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn hyperbolic_distance_examples() {
        let a = [0.3, 0.4];
        assert!(hyperbolic_distance(&a, &a).unwrap() < 1e-14);
        // closed form d(0,a) = log((1+|a|)/(1-|a|)) at |a| = 0.5
        let d = hyperbolic_distance(&[0.0, 0.0], &[0.5, 0.0]).unwrap();
        assert!((d - 3.0f64.ln()).abs() < 1e-14);
        // symmetry on random pairs
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for _ in 0..100 {
            let a = random_ball_point(&mut rng, 3, 0.95);
            let b = random_ball_point(&mut rng, 3, 0.95);
            let d1 = hyperbolic_distance(&a, &b).unwrap();
            let d2 = hyperbolic_distance(&b, &a).unwrap();
            assert!((d1 - d2).abs() < 1e-11);
        }
    }

    #[test]
    fn identity_2_1a_and_involution() {
        // 1 - |φ_a(x)|² = w(a)w(x)/[x,a]²  and  φ_a(φ_a(x)) = x
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
        for n in [2usize, 3, 4] {
            for _ in 0..1000 {
                let a = random_ball_point(&mut rng, n, 0.98);
                let x = random_ball_point(&mut rng, n, 0.98);
                let img = mobius(&a, &x).unwrap();
                let lhs = 1.0 - norm_sq(&img);
                let rhs = weight(&a) * weight(&x) / bracket(&x, &a).unwrap().powi(2);
                assert!((lhs - rhs).abs() < 1e-12, "identity 2.1a failed (n={n})");
                let back = mobius(&a, &img).unwrap();
                let err: f64 = back
                    .iter()
                    .zip(&x)
                    .map(|(u, v)| (u - v).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12, "involution failed (n={n}, err={err})");
            }
        }
    }

    #[test]
    fn composition_identity() {
        // [φ_a(x), φ_a(y)]² = |φ_a'(x)||φ_a'(y)| [x,y]²  with |φ_a'(x)| = w(a)/[x,a]²
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED + 1);
        for _ in 0..1000 {
            let n = 3;
            let a = random_ball_point(&mut rng, n, 0.95);
            let x = random_ball_point(&mut rng, n, 0.95);
            let y = random_ball_point(&mut rng, n, 0.95);
            let fx = mobius(&a, &x).unwrap();
            let fy = mobius(&a, &y).unwrap();
            let lhs = bracket(&fx, &fy).unwrap().powi(2);
            let da_x = weight(&a) / bracket(&x, &a).unwrap().powi(2);
            let da_y = weight(&a) / bracket(&y, &a).unwrap().powi(2);
            let rhs = da_x * da_y * bracket(&x, &y).unwrap().powi(2);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn bracket_controlled_by_metric() {
        // e^{-d(a,b)} <= [x,a]/[x,b] <= e^{d(a,b)}
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED + 2);
        for _ in 0..1000 {
            let n = 2;
            let x = random_ball_point(&mut rng, n, 0.99);
            let a = random_ball_point(&mut rng, n, 0.99);
            let b = random_ball_point(&mut rng, n, 0.99);
            let ratio = bracket(&x, &a).unwrap() / bracket(&x, &b).unwrap();
            let d = hyperbolic_distance(&a, &b).unwrap();
            let slack = 1.0 + 1e-10;
            assert!(ratio <= d.exp() * slack && ratio >= (-d).exp() / slack);
        }
    }

    #[test]
    fn bracket_lower_bound() {
        // [x,a] >= 1 - |x||a| >= max(w(x), w(a))/2
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED + 3);
        for _ in 0..500 {
            let x = random_ball_point(&mut rng, 3, 0.999);
            let a = random_ball_point(&mut rng, 3, 0.999);
            let br = bracket(&x, &a).unwrap();
            assert!(br >= 1.0 - norm(&x) * norm(&a) - 1e-14);
            assert!(br >= weight(&x).max(weight(&a)) / 2.0 - 1e-14);
        }
    }
}
