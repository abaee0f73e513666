//! Symbols ψ ∈ L¹_loc on 𝔹_n: constants, radial expressions, general parsed
//! expressions, the oscillating radial family whose modulus can grow
//! arbitrarily fast while the induced operator stays bounded (or compact),
//! truncations ψ_ρ and box restrictions ψχ_{B_j}.

use crate::boxes::{locate, radial_interval, BoxId};
use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::parser::{evaluate, evaluate_radial, parse, Expr};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Radial profile f on [1, ∞) for the oscillating family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Profile {
    Const { value: f64 },
    Power { exponent: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Const { value } => *value,
            Profile::Power { exponent } => powf_fast(x, *exponent),
        }
    }
}

/// x^s, routed through powi for integer s (hot in knot searches).
fn powf_fast(x: f64, s: f64) -> f64 {
    if s == s.round() && s.abs() < 64.0 {
        x.powi(s as i32)
    } else {
        x.powf(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// g(x) = ∫_1^x f(y)/y^{1-λ} dy: bounded Toeplitz operator.
    Bounded,
    /// g(x) = ∫_1^x f(y) y^λ dy: compact Toeplitz operator.
    Compact,
}

/// Parameters of the oscillating radial symbol
/// ψ(r) = r^{-n+1} (1-r²)^{-λ} f((1-r)^{-1}) exp(iπ g((1-r)^{-1})).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section6Params {
    pub profile: Profile,
    pub lambda: f64,
    pub n: usize,
    pub variant: Variant,
}

impl Section6Params {
    /// Requires inf_{x ≥ 1} f(x) x^λ > 0 (and λ > -1, n ≥ 2).
    pub fn validate(&self) -> Result<()> {
        if self.lambda <= -1.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda = {} <= -1",
                self.lambda
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter("n must be >= 2".into()));
        }
        let ok = match self.profile {
            Profile::Const { value } => value > 0.0 && self.lambda >= 0.0,
            Profile::Power { exponent } => exponent >= 0.0 && exponent + self.lambda >= 0.0,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "profile {:?} with lambda = {} violates inf f(x)x^λ > 0",
                self.profile, self.lambda
            )));
        }
        Ok(())
    }

    /// g(x) in closed form for the builtin profiles; strictly increasing, g(1) = 0.
    pub fn g_of(&self, x: f64) -> Result<f64> {
        if x < 1.0 {
            return Err(Error::OutOfDomain(format!("g requires x >= 1, got {x}")));
        }
        // exponent of y inside the integrand: f(y)·y^{λ-1} (bounded) or f(y)·y^λ (compact)
        let (coef, expo) = self.g_integrand_power();
        Ok(if expo == -1.0 {
            coef * x.ln()
        } else {
            coef * (powf_fast(x, expo + 1.0) - 1.0) / (expo + 1.0)
        })
    }

    /// g'(x) = f(x)/x^{1-λ} (bounded) or f(x)x^λ (compact); always > 0.
    pub fn g_prime(&self, x: f64) -> f64 {
        let (coef, expo) = self.g_integrand_power();
        coef * powf_fast(x, expo)
    }

    fn g_integrand_power(&self) -> (f64, f64) {
        let base = match self.variant {
            Variant::Bounded => self.lambda - 1.0,
            Variant::Compact => self.lambda,
        };
        match self.profile {
            Profile::Const { value } => (value, base),
            Profile::Power { exponent } => (1.0, base + exponent),
        }
    }

    /// ψ at radius r ∈ (0, 1).
    pub fn eval_radius(&self, r: f64) -> Result<Complex64> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::OutOfDomain(format!("radius {r} outside [0,1)")));
        }
        if r == 0.0 && self.n >= 2 {
            return Err(Error::NonFinite(
                "oscillating symbol is singular at the origin (r^{1-n} factor)".into(),
            ));
        }
        let x = 1.0 / (1.0 - r);
        let modulus = r.powi(1 - self.n as i32)
            * powf_fast(1.0 - r * r, -self.lambda)
            * self.profile.eval(x);
        let phase = PI * self.g_of(x)?;
        Ok(Complex64::from_polar(modulus, phase))
    }

    /// All radii in [rlo, rhi] with g((1-r)^{-1}) ∈ ℤ, ascending. Bisection on
    /// the monotone g with Newton acceleration inside the bracket.
    pub fn knots_in(&self, rlo: f64, rhi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.for_each_knot_in(rlo, rhi, |r| out.push(r));
        out
    }

    /// Streaming variant of `knots_in`; knots arrive in ascending order. Deep
    /// generations of fast-phase profiles carry millions of knots, so callers
    /// that only march through them should not materialize the list.
    pub fn for_each_knot_in(&self, rlo: f64, rhi: f64, mut visit: impl FnMut(f64)) {
        let xlo = 1.0 / (1.0 - rlo);
        let xhi = 1.0 / (1.0 - rhi);
        let glo = self.g_of(xlo).expect("xlo >= 1");
        let ghi = self.g_of(xhi).expect("xhi >= 1");
        let q0 = glo.ceil() as i64;
        let q1 = ghi.floor() as i64;
        if q1 < q0 {
            return;
        }
        let mut lo = rlo;
        for q in q0..=q1 {
            let target = q as f64;
            if (glo - target).abs() < 1e-14 {
                visit(rlo);
                continue;
            }
            let r = self.solve_knot(lo, rhi, target);
            // knots are encountered in ascending order; shrink the bracket
            lo = r;
            visit(r);
        }
    }

    fn solve_knot(&self, mut lo: f64, mut hi: f64, target: f64) -> f64 {
        let h = |r: f64| self.g_of(1.0 / (1.0 - r)).unwrap() - target;
        let mut flo = h(lo);
        let mut r = 0.5 * (lo + hi);
        let mut best = (r, f64::INFINITY);
        for iter in 0..200 {
            let fr = h(r);
            if fr.abs() < best.1 {
                best = (r, fr.abs());
            }
            if fr == 0.0 {
                break;
            }
            if (fr > 0.0) == (flo > 0.0) {
                lo = r;
                flo = fr;
            } else {
                hi = r;
            }
            if hi - lo <= f64::EPSILON * hi.abs() {
                break;
            }
            // Newton step clamped to the bracket, with periodic plain bisection
            let next = if iter % 4 == 3 {
                0.5 * (lo + hi)
            } else {
                let x = 1.0 / (1.0 - r);
                let slope = self.g_prime(x) * x * x;
                let cand = r - fr / slope;
                if cand > lo && cand < hi {
                    cand
                } else {
                    0.5 * (lo + hi)
                }
            };
            if (next - r).abs() <= f64::EPSILON * r.abs() {
                break;
            }
            r = next;
        }
        // the bracket has collapsed to ulp scale; keep the endpoint with the
        // smallest residual
        for cand in [lo, hi] {
            let fc = h(cand).abs();
            if fc < best.1 {
                best = (cand, fc);
            }
        }
        best.0
    }

    /// Knots inside the generation-m radial shell, ascending.
    pub fn oscillation_knots(&self, m: u32) -> Vec<f64> {
        let (rlo, rhi) = radial_interval(m);
        self.knots_in(rlo, rhi)
    }
}

/// A complex-valued symbol on 𝔹_n.
#[derive(Debug, Clone)]
pub enum Symbol {
    Constant(Complex64),
    /// Expression in the radius variable r only.
    Radial(Expr),
    /// General parsed expression in r, t_j, x_i.
    Expression(Expr),
    Section6(Section6Params),
    Truncated { inner: Box<Symbol>, rho: f64 },
    BoxRestricted { inner: Box<Symbol>, id: BoxId },
}

impl Symbol {
    pub fn constant(c: Complex64) -> Self {
        Symbol::Constant(c)
    }

    /// Builds the oscillating family after checking the inf-condition.
    pub fn section6(params: Section6Params) -> Result<Self> {
        params.validate()?;
        Ok(Symbol::Section6(params))
    }

    pub fn truncated(inner: Symbol, rho: f64) -> Result<Self> {
        if !(0.0 < rho && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho = {rho} outside (0,1)")));
        }
        Ok(Symbol::Truncated {
            inner: Box::new(inner),
            rho,
        })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        match self {
            Symbol::Constant(c) => Ok(*c),
            Symbol::Radial(e) => evaluate_radial(e, norm(x)),
            Symbol::Expression(e) => evaluate(e, x),
            Symbol::Section6(p) => {
                if x.len() != p.n {
                    return Err(Error::DimensionMismatch {
                        expected: p.n,
                        got: x.len(),
                    });
                }
                p.eval_radius(norm(x))
            }
            Symbol::Truncated { inner, rho } => {
                if norm(x) > *rho {
                    Ok(Complex64::new(0.0, 0.0))
                } else {
                    inner.eval(x)
                }
            }
            Symbol::BoxRestricted { inner, id } => {
                if locate(x)? == *id {
                    inner.eval(x)
                } else {
                    Ok(Complex64::new(0.0, 0.0))
                }
            }
        }
    }

    /// Whether evaluation depends on |x| only.
    pub fn is_radial(&self) -> bool {
        match self {
            Symbol::Constant(_) | Symbol::Radial(_) | Symbol::Section6(_) => true,
            Symbol::Expression(e) => e.is_radial(),
            Symbol::Truncated { inner, .. } => inner.is_radial(),
            Symbol::BoxRestricted { .. } => false,
        }
    }

    /// Radial evaluation; requires `is_radial()`.
    pub fn eval_radial(&self, r: f64) -> Result<Complex64> {
        match self {
            Symbol::Constant(c) => Ok(*c),
            Symbol::Radial(e) | Symbol::Expression(e) => evaluate_radial(e, r),
            Symbol::Section6(p) => p.eval_radius(r),
            Symbol::Truncated { inner, rho } => {
                if r > *rho {
                    Ok(Complex64::new(0.0, 0.0))
                } else {
                    inner.eval_radial(r)
                }
            }
            Symbol::BoxRestricted { .. } => Err(Error::InvalidParameter(
                "box-restricted symbol is not radial".into(),
            )),
        }
    }

    /// Radial integration breakpoints inside [rlo, rhi]: oscillation knots and
    /// truncation radii. Quadrature panels are split there so the running
    /// integral is sampled at every integrand sign change.
    pub fn radial_breaks(&self, rlo: f64, rhi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breaks(rlo, rhi, &mut out);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        out
    }

    fn collect_breaks(&self, rlo: f64, rhi: f64, out: &mut Vec<f64>) {
        match self {
            Symbol::Section6(p) => out.extend(p.knots_in(rlo, rhi)),
            Symbol::Truncated { inner, rho } => {
                if *rho > rlo && *rho < rhi {
                    out.push(*rho);
                }
                inner.collect_breaks(rlo, rhi, out);
            }
            Symbol::BoxRestricted { inner, .. } => inner.collect_breaks(rlo, rhi, out),
            _ => {}
        }
    }
}

// ---------------------------------------------------------------------------
// JSON wire form
// ---------------------------------------------------------------------------

/// Serialized symbol description accepted by the CLI (`--symbol`) and report
/// files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymbolSpec {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Radial {
        text: String,
    },
    Expression {
        text: String,
    },
    Section6 {
        profile: Profile,
        lambda: f64,
        variant: Variant,
    },
    Truncated {
        rho: f64,
        inner: Box<SymbolSpec>,
    },
}

impl SymbolSpec {
    /// Instantiate on 𝔹_n.
    pub fn build(&self, n: usize) -> Result<Symbol> {
        match self {
            SymbolSpec::Constant { re, im } => Ok(Symbol::Constant(Complex64::new(*re, *im))),
            SymbolSpec::Radial { text } => {
                let e = parse(text, n)?;
                if !e.is_radial() {
                    return Err(Error::InvalidParameter(format!(
                        "radial symbol text {text:?} uses non-radial variables"
                    )));
                }
                Ok(Symbol::Radial(e))
            }
            SymbolSpec::Expression { text } => Ok(Symbol::Expression(parse(text, n)?)),
            SymbolSpec::Section6 {
                profile,
                lambda,
                variant,
            } => Symbol::section6(Section6Params {
                profile: *profile,
                lambda: *lambda,
                n,
                variant: *variant,
            }),
            SymbolSpec::Truncated { rho, inner } => Symbol::truncated(inner.build(n)?, *rho),
        }
    }
}
