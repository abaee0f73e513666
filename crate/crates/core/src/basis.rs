//! Real solid harmonics of degree ≤ 4 in dimensions 2 and 3, as exact
//! polynomial tables, plus a small multivariate polynomial type with exact
//! differentiation (used wherever derivatives must not carry quadrature
//! noise).

use crate::error::{Error, Result};
use crate::special::gamma_ratio;

/// Sparse multivariate polynomial with f64 coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub nvars: usize,
    /// (coefficient, exponent per variable)
    pub terms: Vec<(f64, Vec<u8>)>,
}

impl Poly {
    pub fn new(nvars: usize, terms: Vec<(f64, Vec<u8>)>) -> Self {
        debug_assert!(terms.iter().all(|(_, e)| e.len() == nvars));
        Self { nvars, terms }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::new(nvars, vec![(c, vec![0; nvars])])
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        let mut acc = 0.0;
        for (c, exps) in &self.terms {
            let mut t = *c;
            for (xi, &e) in x.iter().zip(exps) {
                if e > 0 {
                    t *= xi.powi(e as i32);
                }
            }
            acc += t;
        }
        acc
    }

    /// ∂/∂x_var, exact.
    pub fn diff(&self, var: usize) -> Poly {
        let mut terms = Vec::new();
        for (c, exps) in &self.terms {
            let e = exps[var];
            if e > 0 {
                let mut ne = exps.clone();
                ne[var] = e - 1;
                terms.push((c * e as f64, ne));
            }
        }
        if terms.is_empty() {
            return Poly::constant(self.nvars, 0.0);
        }
        Poly::new(self.nvars, terms)
    }

    /// Iterated partial D^α.
    pub fn diff_multi(&self, alpha: &[u8]) -> Poly {
        let mut p = self.clone();
        for (var, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                p = p.diff(var);
            }
        }
        p
    }

    pub fn laplacian(&self) -> Poly {
        let mut acc = Poly::constant(self.nvars, 0.0);
        for v in 0..self.nvars {
            acc = acc.add(&self.diff(v).diff(v));
        }
        acc
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Poly::new(self.nvars, terms).collect_terms()
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly::new(
            self.nvars,
            self.terms.iter().map(|(a, e)| (a * c, e.clone())).collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut terms = Vec::new();
        for (a, ea) in &self.terms {
            for (b, eb) in &other.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(u, v)| u + v).collect();
                terms.push((a * b, e));
            }
        }
        Poly::new(self.nvars, terms).collect_terms()
    }

    fn collect_terms(mut self) -> Poly {
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut out: Vec<(f64, Vec<u8>)> = Vec::with_capacity(self.terms.len());
        for (c, e) in self.terms {
            if let Some(last) = out.last_mut() {
                if last.1 == e {
                    last.0 += c;
                    continue;
                }
            }
            out.push((c, e));
        }
        out.retain(|(c, _)| *c != 0.0);
        if out.is_empty() {
            out.push((0.0, vec![0; self.nvars]));
        }
        Poly {
            nvars: self.nvars,
            terms: out,
        }
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(_, e)| e.iter().map(|&v| v as usize).sum())
            .max()
            .unwrap_or(0)
    }
}

/// One real solid harmonic from the fixed table.
#[derive(Debug, Clone)]
pub struct HarmonicBasisElement {
    pub dim: usize,
    pub degree: usize,
    /// Index within the degree (table order).
    pub index: usize,
    pub poly: Poly,
}

impl HarmonicBasisElement {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.poly.eval(x)
    }
}

fn p2(terms: &[(f64, [u8; 2])]) -> Poly {
    Poly::new(2, terms.iter().map(|(c, e)| (*c, e.to_vec())).collect())
}

fn p3(terms: &[(f64, [u8; 3])]) -> Poly {
    Poly::new(3, terms.iter().map(|(c, e)| (*c, e.to_vec())).collect())
}

/// Solid harmonics of the given degree; n ∈ {2, 3}, degree ≤ 4.
pub fn harmonics_of_degree(n: usize, degree: usize) -> Result<Vec<Poly>> {
    if degree > 4 {
        return Err(Error::InvalidParameter(format!(
            "basis tables stop at degree 4, requested {degree}"
        )));
    }
    match n {
        2 => Ok(match degree {
            // r^k cos kθ and r^k sin kθ
            0 => vec![p2(&[(1.0, [0, 0])])],
            1 => vec![p2(&[(1.0, [1, 0])]), p2(&[(1.0, [0, 1])])],
            2 => vec![
                p2(&[(1.0, [2, 0]), (-1.0, [0, 2])]),
                p2(&[(2.0, [1, 1])]),
            ],
            3 => vec![
                p2(&[(1.0, [3, 0]), (-3.0, [1, 2])]),
                p2(&[(3.0, [2, 1]), (-1.0, [0, 3])]),
            ],
            _ => vec![
                p2(&[(1.0, [4, 0]), (-6.0, [2, 2]), (1.0, [0, 4])]),
                p2(&[(4.0, [3, 1]), (-4.0, [1, 3])]),
            ],
        }),
        3 => Ok(match degree {
            0 => vec![p3(&[(1.0, [0, 0, 0])])],
            1 => vec![
                p3(&[(1.0, [1, 0, 0])]),
                p3(&[(1.0, [0, 1, 0])]),
                p3(&[(1.0, [0, 0, 1])]),
            ],
            2 => vec![
                p3(&[(1.0, [1, 1, 0])]),
                p3(&[(1.0, [0, 1, 1])]),
                p3(&[(1.0, [1, 0, 1])]),
                p3(&[(1.0, [2, 0, 0]), (-1.0, [0, 2, 0])]),
                p3(&[(2.0, [0, 0, 2]), (-1.0, [2, 0, 0]), (-1.0, [0, 2, 0])]),
            ],
            3 => vec![
                // z(2z² - 3x² - 3y²)
                p3(&[(2.0, [0, 0, 3]), (-3.0, [2, 0, 1]), (-3.0, [0, 2, 1])]),
                // x(4z² - x² - y²), y(4z² - x² - y²)
                p3(&[(4.0, [1, 0, 2]), (-1.0, [3, 0, 0]), (-1.0, [1, 2, 0])]),
                p3(&[(4.0, [0, 1, 2]), (-1.0, [2, 1, 0]), (-1.0, [0, 3, 0])]),
                // z(x² - y²), xyz
                p3(&[(1.0, [2, 0, 1]), (-1.0, [0, 2, 1])]),
                p3(&[(1.0, [1, 1, 1])]),
                // x(x² - 3y²), y(3x² - y²)
                p3(&[(1.0, [3, 0, 0]), (-3.0, [1, 2, 0])]),
                p3(&[(3.0, [2, 1, 0]), (-1.0, [0, 3, 0])]),
            ],
            _ => vec![
                // 35z⁴ - 30z²ρ² + 3ρ⁴ expanded
                p3(&[
                    (8.0, [0, 0, 4]),
                    (3.0, [4, 0, 0]),
                    (3.0, [0, 4, 0]),
                    (6.0, [2, 2, 0]),
                    (-24.0, [2, 0, 2]),
                    (-24.0, [0, 2, 2]),
                ]),
                // xz(7z² - 3ρ²), yz(7z² - 3ρ²)
                p3(&[(4.0, [1, 0, 3]), (-3.0, [3, 0, 1]), (-3.0, [1, 2, 1])]),
                p3(&[(4.0, [0, 1, 3]), (-3.0, [2, 1, 1]), (-3.0, [0, 3, 1])]),
                // (x² - y²)(7z² - ρ²), xy(7z² - ρ²)
                p3(&[
                    (6.0, [2, 0, 2]),
                    (-6.0, [0, 2, 2]),
                    (-1.0, [4, 0, 0]),
                    (1.0, [0, 4, 0]),
                ]),
                p3(&[(6.0, [1, 1, 2]), (-1.0, [3, 1, 0]), (-1.0, [1, 3, 0])]),
                // zx(x² - 3y²), zy(3x² - y²)
                p3(&[(1.0, [3, 0, 1]), (-3.0, [1, 2, 1])]),
                p3(&[(3.0, [2, 1, 1]), (-1.0, [0, 3, 1])]),
                // x⁴ - 6x²y² + y⁴, xy(x² - y²)
                p3(&[(1.0, [4, 0, 0]), (-6.0, [2, 2, 0]), (1.0, [0, 4, 0])]),
                p3(&[(1.0, [3, 1, 0]), (-1.0, [1, 3, 0])]),
            ],
        }),
        _ => Err(Error::InvalidParameter(format!(
            "basis tables exist for n = 2, 3 only, requested n = {n}"
        ))),
    }
}

/// All table harmonics of degree ≤ max_degree.
pub fn basis_up_to(n: usize, max_degree: usize) -> Result<Vec<HarmonicBasisElement>> {
    let mut out = Vec::new();
    for degree in 0..=max_degree {
        for (index, poly) in harmonics_of_degree(n, degree)?.into_iter().enumerate() {
            out.push(HarmonicBasisElement {
                dim: n,
                degree,
                index,
                poly,
            });
        }
    }
    Ok(out)
}

/// Closed-form ‖r^k cos kθ‖²_{2,λ} = ‖r^k sin kθ‖²_{2,λ} on the disk:
/// (1/2)·k!·Γ(λ+2)/Γ(k+λ+2) for k ≥ 1, and 1 for the constant.
pub fn disk_harmonic_norm_sq(k: usize, lambda: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut fact = 1.0;
    for i in 1..=k {
        fact *= i as f64;
    }
    0.5 * fact * gamma_ratio(lambda + 2.0, k as f64 + lambda + 2.0)
}
