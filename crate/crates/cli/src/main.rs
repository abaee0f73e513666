//! Command-line front end: dyadic decomposition dumps, box volume tables,
//! weak-Carleson certificates, the oscillating-symbol boundedness table,
//! Toeplitz/kernel evaluation and the lemma validation suite.
//!
//! Exit codes: 0 success, 2 configuration/parse error, 3 numerical-convergence
//! gate failure.

use bergman_ball::boxes::{box_geometry, enumerate_generation};
use bergman_ball::carleson::{carleson_report, radial_condition, CarlesonOptions};
use bergman_ball::error::Error as CoreError;
use bergman_ball::kernel::{reproducing_kernel, toeplitz_apply, KernelConfig};
use bergman_ball::measure::{box_volume, box_volume_closed_lambda0, MeasureSpec, QuadratureGrid};
use bergman_ball::parser;
use bergman_ball::symbol::{Profile, Symbol, SymbolSpec, Variant};
use bergman_ball::validate::{self, Thresholds, DEFAULT_SEED};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bergman-ball",
    about = "Dyadic spherical-box analysis of Toeplitz operators on weighted harmonic Bergman spaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Common {
    /// Ambient dimension n of the ball (n >= 2).
    #[arg(long = "dim", default_value_t = 2)]
    dim: usize,
    /// Weight exponent λ > -1 of dV_λ.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Integrability exponent p in (1, ∞).
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Deepest box generation (0..=16).
    #[arg(long = "max-gen", default_value_t = 4)]
    max_gen: u32,
    /// Quadrature override as "nodes" or "nodes,panels".
    #[arg(long)]
    grid: Option<String>,
    /// Sampling seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Symbol as a JSON spec document.
    #[arg(long)]
    symbol: Option<String>,
    /// Symbol as an expression in r, t2..tn, x1..xn.
    #[arg(long = "symbol-expr")]
    symbol_expr: Option<String>,
    /// Output file (stdout when omitted). Writes are atomic.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump the dyadic boxes with corners and volumes.
    Decompose(Common),
    /// Per-box volume table (m, ladder, mask, volume_0, volume_lambda).
    Volumes(Common),
    /// Weak-Carleson certificate report for a symbol.
    Carleson(Common),
    /// Boundedness table M_m for the oscillating radial family.
    Example6 {
        #[command(flatten)]
        common: Common,
        /// bounded (phase ∫ f/y^{1-λ}) or compact (phase ∫ f·y^λ).
        #[arg(long, value_enum, default_value = "bounded")]
        variant: VariantArg,
        /// Profile "const:c" or "power:s".
        #[arg(long, default_value = "const:1")]
        profile: String,
    },
    /// Apply the generalized Toeplitz operator at points.
    Toeplitz {
        #[command(flatten)]
        common: Common,
        /// The operand f as an expression.
        #[arg(long)]
        f: String,
        /// Evaluation points "x1,x2[,...]" (repeatable).
        #[arg(long = "at", required = true)]
        at: Vec<String>,
        /// Radial shell depth for the series tail (box depth stays at --max-gen).
        #[arg(long = "shell-depth", default_value_t = 24)]
        shell_depth: u32,
    },
    /// Evaluate the reproducing kernel R_λ(x, y).
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Run the lemma validation checks.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Subset of checks (default: all).
        #[arg(long)]
        checks: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Bounded,
    Compact,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    if let Some(core) = e.downcast_ref::<CoreError>() {
        match core {
            CoreError::Convergence(_)
            | CoreError::NonFinite(_)
            | CoreError::TruncationInsufficient { .. } => 3,
            _ => 2,
        }
    } else {
        2
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Decompose(c) => cmd_decompose(&c),
        Cmd::Volumes(c) => cmd_volumes(&c),
        Cmd::Carleson(c) => cmd_carleson(&c),
        Cmd::Example6 {
            common,
            variant,
            profile,
        } => cmd_example6(&common, variant, &profile),
        Cmd::Toeplitz {
            common,
            f,
            at,
            shell_depth,
        } => cmd_toeplitz(&common, &f, &at, shell_depth),
        Cmd::Kernel { common, x, y } => cmd_kernel(&common, &x, &y),
        Cmd::Validate { common, checks } => cmd_validate(&common, &checks),
    }
}

fn check_common(c: &Common) -> anyhow::Result<()> {
    if c.dim < 2 {
        anyhow::bail!(CoreError::InvalidParameter(format!("--dim {} < 2", c.dim)));
    }
    if c.lambda <= -1.0 {
        anyhow::bail!(CoreError::InvalidParameter(format!(
            "--lambda {} <= -1",
            c.lambda
        )));
    }
    if !(c.p > 1.0 && c.p.is_finite()) {
        anyhow::bail!(CoreError::InvalidParameter(format!(
            "--p {} outside (1, inf)",
            c.p
        )));
    }
    if c.max_gen > 16 {
        anyhow::bail!(CoreError::InvalidParameter(format!(
            "--max-gen {} exceeds the cost guard 16",
            c.max_gen
        )));
    }
    Ok(())
}

fn grid_of(c: &Common) -> anyhow::Result<QuadratureGrid> {
    match &c.grid {
        None => Ok(QuadratureGrid::default()),
        Some(s) => {
            let parts: Vec<&str> = s.split(',').collect();
            let nodes: usize = parts[0]
                .trim()
                .parse()
                .map_err(|_| CoreError::InvalidParameter(format!("bad --grid '{s}'")))?;
            let panels: usize = if parts.len() > 1 {
                parts[1]
                    .trim()
                    .parse()
                    .map_err(|_| CoreError::InvalidParameter(format!("bad --grid '{s}'")))?
            } else {
                1
            };
            if nodes < 2 || panels < 1 || parts.len() > 2 {
                anyhow::bail!(CoreError::InvalidParameter(format!("bad --grid '{s}'")));
            }
            Ok(QuadratureGrid::uniform(nodes, panels))
        }
    }
}

fn symbol_of(c: &Common) -> anyhow::Result<Symbol> {
    match (&c.symbol, &c.symbol_expr) {
        (Some(_), Some(_)) => anyhow::bail!(CoreError::InvalidParameter(
            "--symbol and --symbol-expr are mutually exclusive".into()
        )),
        (Some(js), None) => {
            let spec: SymbolSpec = serde_json::from_str(js)
                .map_err(|e| CoreError::InvalidParameter(format!("bad --symbol JSON: {e}")))?;
            Ok(spec.build(c.dim)?)
        }
        (None, Some(text)) => Ok(Symbol::Expression(parser::parse(text, c.dim)?)),
        (None, None) => anyhow::bail!(CoreError::InvalidParameter(
            "a symbol is required (--symbol or --symbol-expr)".into()
        )),
    }
}

fn parse_point(s: &str, dim: usize) -> anyhow::Result<Vec<f64>> {
    let coords: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let coords = coords.map_err(|_| CoreError::InvalidParameter(format!("bad point '{s}'")))?;
    if coords.len() != dim {
        anyhow::bail!(CoreError::DimensionMismatch {
            expected: dim,
            got: coords.len(),
        });
    }
    Ok(coords)
}

/// Atomic write: temp file in the target directory, then rename. No partial
/// output files on error paths.
fn emit(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        None => {
            print!("{content}");
            if !content.ends_with('\n') {
                println!();
            }
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().unwrap_or_else(|| Path::new("."));
            let tmp = dir.join(format!(
                ".{}.tmp-{}",
                path.file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "out".into()),
                std::process::id()
            ));
            {
                let mut f = std::fs::File::create(&tmp)?;
                f.write_all(content.as_bytes())?;
                f.sync_all()?;
            }
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
    }
}

/// 17 significant digits for CSV cells.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

// ---------------------------------------------------------------------------
// decompose / volumes
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BoxRecord {
    id: IdRecord,
    q_min: Vec<f64>,
    q_max: Vec<f64>,
    volume: f64,
    volume_lambda: f64,
}

#[derive(Serialize)]
struct IdRecord {
    m: u32,
    ladder: Vec<u32>,
    mask: u32,
}

fn collect_boxes(c: &Common) -> anyhow::Result<Vec<BoxRecord>> {
    let spec = MeasureSpec::new(c.dim, c.lambda)?;
    let grid = grid_of(c)?;
    let mut records = Vec::new();
    for m in 0..=c.max_gen {
        for id in enumerate_generation(c.dim, m) {
            let bx = box_geometry(&id)?;
            let volume = box_volume_closed_lambda0(&bx);
            let volume_lambda = if c.lambda == 0.0 {
                volume
            } else {
                box_volume(&bx, &spec, &grid)?
            };
            let mut q_min = vec![bx.q_min.r];
            q_min.extend_from_slice(&bx.q_min.angles);
            let mut q_max = vec![bx.q_max.r];
            q_max.extend_from_slice(&bx.q_max.angles);
            records.push(BoxRecord {
                id: IdRecord {
                    m,
                    ladder: id.ladder.clone(),
                    mask: id.mask,
                },
                q_min,
                q_max,
                volume,
                volume_lambda,
            });
        }
    }
    Ok(records)
}

fn ladder_cell(ladder: &[u32]) -> String {
    ladder
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn cmd_decompose(c: &Common) -> anyhow::Result<()> {
    check_common(c)?;
    let records = collect_boxes(c)?;
    let content = match c.format {
        Format::Json => serde_json::to_string_pretty(&records)?,
        Format::Csv => {
            let mut s = String::from("m,ladder,mask,q_min,q_max,volume,volume_lambda\n");
            for r in &records {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.id.m,
                    ladder_cell(&r.id.ladder),
                    r.id.mask,
                    r.q_min.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(";"),
                    r.q_max.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(";"),
                    fmt17(r.volume),
                    fmt17(r.volume_lambda)
                ));
            }
            s
        }
    };
    emit(&c.out, &content)
}

fn cmd_volumes(c: &Common) -> anyhow::Result<()> {
    check_common(c)?;
    let records = collect_boxes(c)?;
    let content = match c.format {
        Format::Json => serde_json::to_string_pretty(&records)?,
        Format::Csv => {
            let mut s = String::from("m,ladder,mask,volume_0,volume_lambda\n");
            for r in &records {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.id.m,
                    ladder_cell(&r.id.ladder),
                    r.id.mask,
                    fmt17(r.volume),
                    fmt17(r.volume_lambda)
                ));
            }
            s
        }
    };
    emit(&c.out, &content)
}

// ---------------------------------------------------------------------------
// carleson
// ---------------------------------------------------------------------------

fn cmd_carleson(c: &Common) -> anyhow::Result<()> {
    check_common(c)?;
    let spec = MeasureSpec::new(c.dim, c.lambda)?;
    let psi = symbol_of(c)?;
    let opts = CarlesonOptions {
        max_gen: c.max_gen,
        record_boxes: c.max_gen <= 8,
        ..Default::default()
    };
    let report = carleson_report(&psi, &spec, &opts)?;
    let content = match c.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Csv => {
            let mut s = String::from("m,ladder,mask,psi_hat,volume_lambda,ratio\n");
            for row in &report.boxes {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.id.generation,
                    ladder_cell(&row.id.ladder),
                    row.id.mask,
                    fmt17(row.psi_hat),
                    fmt17(row.volume_lambda),
                    fmt17(row.ratio)
                ));
            }
            s
        }
    };
    emit(&c.out, &content)?;
    // convergence gate on the prefix-grid refinement
    let [a, b] = report.grid_convergence;
    if (a - b).abs() > 0.05 * b.abs().max(1e-12) {
        anyhow::bail!(CoreError::Convergence(format!(
            "c_psi estimate moved {a:.6e} -> {b:.6e} under grid refinement"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// example6
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Example6Row {
    m: u32,
    m_m: f64,
    pass: bool,
}

fn cmd_example6(c: &Common, variant: VariantArg, profile: &str) -> anyhow::Result<()> {
    check_common(c)?;
    let profile = parse_profile(profile)?;
    let variant = match variant {
        VariantArg::Bounded => Variant::Bounded,
        VariantArg::Compact => Variant::Compact,
    };
    let spec = MeasureSpec::new(c.dim, c.lambda)?;
    let psi = Symbol::section6(bergman_ball::symbol::Section6Params {
        profile,
        lambda: c.lambda,
        n: c.dim,
        variant,
    })?;
    let ms = radial_condition(&psi, &spec, c.max_gen)?;
    let bound = 3.0 + 0.2;
    let rows: Vec<Example6Row> = ms
        .iter()
        .map(|&(m, v)| Example6Row {
            m,
            m_m: v,
            pass: v <= bound,
        })
        .collect();
    let mut table = String::from("m      M_m                      pass\n");
    for r in &rows {
        table.push_str(&format!("{:<6} {:<24.17} {}\n", r.m, r.m_m, r.pass));
    }
    if c.out.is_some() {
        println!("{table}");
        let content = serde_json::to_string_pretty(&rows)?;
        emit(&c.out, &content)
    } else {
        emit(&None, &table)
    }
}

fn parse_profile(s: &str) -> anyhow::Result<Profile> {
    let (kind, val) = s
        .split_once(':')
        .ok_or_else(|| CoreError::InvalidParameter(format!("bad --profile '{s}'")))?;
    let v: f64 = val
        .trim()
        .parse()
        .map_err(|_| CoreError::InvalidParameter(format!("bad --profile value '{val}'")))?;
    match kind.trim() {
        "const" => Ok(Profile::Const { value: v }),
        "power" => Ok(Profile::Power { exponent: v }),
        other => anyhow::bail!(CoreError::InvalidParameter(format!(
            "unknown profile kind '{other}'"
        ))),
    }
}

// ---------------------------------------------------------------------------
// toeplitz / kernel
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ToeplitzRecord {
    x: Vec<f64>,
    value_re: f64,
    value_im: f64,
    tail_estimate: f64,
    generations_used: u32,
    tail_decaying: bool,
}

fn cmd_toeplitz(c: &Common, f_text: &str, at: &[String], shell_depth: u32) -> anyhow::Result<()> {
    check_common(c)?;
    if shell_depth > 40 {
        anyhow::bail!(CoreError::InvalidParameter(format!(
            "--shell-depth {shell_depth} exceeds 40"
        )));
    }
    let spec = MeasureSpec::new(c.dim, c.lambda)?;
    let psi = symbol_of(c)?;
    let f_ast = parser::parse(f_text, c.dim)?;
    let f = |y: &[f64]| parser::evaluate(&f_ast, y).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let cfg = KernelConfig {
        lambda: c.lambda,
        truncation_degree: 60,
        tail_tol: 1e-6,
        max_gen: shell_depth.max(c.max_gen),
        boxwise_gen_limit: c.max_gen.min(4),
        grid: grid_of(c)?,
    };
    let mut records = Vec::new();
    for point in at {
        let x = parse_point(point, c.dim)?;
        let ev = toeplitz_apply(&psi, &f, &x, &spec, &cfg)?;
        let tail = ev
            .per_generation
            .iter()
            .rev()
            .take(2)
            .map(|(_, v)| v.norm())
            .sum::<f64>();
        records.push(ToeplitzRecord {
            x,
            value_re: ev.value.re,
            value_im: ev.value.im,
            tail_estimate: tail,
            generations_used: cfg.max_gen,
            tail_decaying: ev.tail_decaying,
        });
    }
    if records
        .iter()
        .any(|r| !r.value_re.is_finite() || !r.value_im.is_finite())
    {
        anyhow::bail!(CoreError::NonFinite(
            "Toeplitz series produced a non-finite value".into()
        ));
    }
    let content = serde_json::to_string_pretty(&records)?;
    emit(&c.out, &content)
}

#[derive(Serialize)]
struct KernelRecord {
    x: Vec<f64>,
    y: Vec<f64>,
    value: f64,
}

fn cmd_kernel(c: &Common, xs: &str, ys: &str) -> anyhow::Result<()> {
    check_common(c)?;
    let x = parse_point(xs, c.dim)?;
    let y = parse_point(ys, c.dim)?;
    let cfg = KernelConfig::new(c.lambda);
    let value = reproducing_kernel(&x, &y, &cfg)?;
    let content = serde_json::to_string_pretty(&KernelRecord { x, y, value })?;
    emit(&c.out, &content)
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(c: &Common, checks: &[String]) -> anyhow::Result<()> {
    check_common(c)?;
    let th = Thresholds::default();
    let all = [
        "forelli_rudin",
        "schur_probe",
        "box_properties",
        "mean_value",
        "integration_by_parts",
        "cbeta_integral",
        "pointwise_estimate",
        "norm_domination",
        "compact_support_bound",
        "kernel_derivative",
    ];
    let selected: Vec<&str> = if checks.is_empty() {
        all.to_vec()
    } else {
        let mut sel = Vec::new();
        for ch in checks {
            if !all.contains(&ch.as_str()) {
                anyhow::bail!(CoreError::InvalidParameter(format!(
                    "unknown check '{ch}' (available: {})",
                    all.join(", ")
                )));
            }
            sel.push(ch.as_str());
        }
        sel
    };
    let n = c.dim;
    let seed = c.seed;
    let mut doc: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    doc.insert("thresholds".into(), serde_json::to_value(&th)?);
    doc.insert("seed".into(), serde_json::to_value(seed)?);
    for name in selected {
        let value = match name {
            "forelli_rudin" => serde_json::to_value(validate::check_forelli_rudin(
                n,
                1.0,
                0.0,
                &[0.0, 0.5, 0.9, 0.99, 0.999],
                &th,
            )?)?,
            "schur_probe" => {
                let q = c.p / (c.p - 1.0);
                serde_json::to_value(validate::check_schur_probe(
                    n,
                    c.lambda,
                    c.p,
                    -(1.0 + c.lambda) / (2.0 * c.p.max(q)),
                    16,
                    seed,
                    &th,
                )?)?
            }
            "box_properties" => serde_json::to_value(validate::check_box_properties(
                n,
                c.max_gen.max(6),
                2000,
                seed,
                &th,
            )?)?,
            "mean_value" => {
                let spec = MeasureSpec::new(n, c.lambda)?;
                let mut rows = Vec::new();
                for m in 2..=4u32 {
                    let ladder = vec![0u32; n - 1];
                    let id = bergman_ball::boxes::BoxId::new(m, ladder, 0)?;
                    let f = |x: &[f64]| x[0];
                    rows.push(validate::check_mean_value(&f, &id, &spec, seed)?);
                }
                serde_json::to_value(rows)?
            }
            "integration_by_parts" => {
                use bergman_ball::basis::Poly;
                let f = Poly::new(n, vec![(1.0, {
                    let mut e = vec![0u8; n];
                    e[0] = 1;
                    e
                })]);
                let g = Poly::new(n, vec![(1.0, vec![1u8; n])]);
                let mut rect = vec![(0.2, 0.7)];
                for a in 1..n {
                    rect.push(if a == n - 1 { (0.1, 1.4) } else { (0.2, 1.2) });
                }
                serde_json::to_value(validate::check_integration_by_parts(
                    &f, &g, &rect, c.lambda, &th,
                )?)?
            }
            "cbeta_integral" => {
                let mut rows = Vec::new();
                if n >= 3 {
                    let mut alpha = vec![0u8; n];
                    alpha[0] = 1;
                    alpha[1] = 1;
                    for m in 2..=8u32 {
                        let mid = (1u32 << m) / 2;
                        let mut ladder = vec![mid; n - 1];
                        for (i, v) in ladder.iter_mut().enumerate() {
                            *v = mid >> i.min(8);
                        }
                        let id = bergman_ball::boxes::BoxId::new(m, ladder, 0)?;
                        rows.push(validate::check_cbeta_integral(&alpha, 2, &id)?);
                    }
                } else {
                    let alpha = vec![1u8, 0];
                    for m in 2..=8u32 {
                        let id = bergman_ball::boxes::BoxId::new(m, vec![0], 0)?;
                        rows.push(validate::check_cbeta_integral(&alpha, 1, &id)?);
                    }
                }
                serde_json::to_value(rows)?
            }
            "pointwise_estimate" => serde_json::to_value(validate::check_pointwise_estimate(
                n, c.p, c.lambda, 400, seed, &th,
            )?)?,
            "norm_domination" => {
                use bergman_ball::basis::Poly;
                let f = Poly::new(n, vec![(1.0, {
                    let mut e = vec![0u8; n];
                    e[0] = 1;
                    e
                })]);
                let mut alpha = vec![0u8; n];
                alpha[0] = 1;
                serde_json::to_value(validate::check_norm_domination(
                    &f, &alpha, c.p, c.lambda, &th,
                )?)?
            }
            "compact_support_bound" => {
                let chi = Symbol::truncated(Symbol::Constant(Complex64::new(1.0, 0.0)), 0.5)?;
                serde_json::to_value(validate::check_compact_support_bound(
                    &chi, 0.5, c.p, c.lambda, n,
                )?)?
            }
            "kernel_derivative" => serde_json::to_value(validate::check_kernel_derivative(
                n, c.lambda, 30, seed, &th,
            )?)?,
            _ => unreachable!(),
        };
        doc.insert(name.to_string(), value);
    }
    let content = serde_json::to_string_pretty(&doc)?;
    emit(&c.out, &content)
}
