//! Command-line front end: JSON in, JSON out, pipeline orchestration.
//!
//! Every subcommand accepts `-` for stdin so pipelines compose, e.g.
//! `uepframe catalog show daubechies4 | uepframe construct sdp -`.
//! Exit codes: 0 success/passed, 1 verification failed, 2
//! infeasible/stalled, 3 input error.

use crate::analysis::existence_verdict;
use crate::format::{terms_to_poly, FrameFile, MaskFile, TermJson};
use crate::isotypical::{subqmf_poly, Mask};
use crate::sdp_frame::{construct_frame_sdp, SdpError, SolveOptions, SupportSet};
use crate::sos_frame::{builtin_certificate, construct_from_sos, CertError, SosCertificate};
use crate::verify::{
    check_subqmf_grid, default_grid_points, grid_values, sum_rules_order, verify_frame,
    DEFAULT_TOLERANCE,
};
use clap::{Parser, Subcommand};
use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser)]
#[command(name = "uepframe", version, about = "Tight wavelet frames at the symbol level")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Built-in masks
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Re-verify a frame file against the UEP identities
    Verify {
        /// Frame JSON file, or - for stdin
        frame: String,
    },
    /// Sample the sub-QMF polynomial f on a uniform grid
    Subqmf {
        /// Mask JSON file, or - for stdin
        mask: String,
        /// Grid points per axis
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Sum-rules (zero-condition) order of a mask
    Sumrules {
        /// Mask JSON file, or - for stdin
        mask: String,
    },
    /// Zeros of f, Hessians, and the existence verdict
    Analyze {
        /// Mask JSON file, or - for stdin
        mask: String,
        /// Write f sampled on the default grid as CSV
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Build a tight frame
    Construct {
        #[command(subcommand)]
        route: ConstructRoute,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Names and parameters of the built-in masks
    List,
    /// Emit one mask as JSON
    Show {
        name: String,
        /// Parameter assignment NAME=VALUE (value may be a fraction like 1/16)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
    },
}

#[derive(Subcommand)]
enum ConstructRoute {
    /// From a sum-of-hermitian-squares certificate
    Sos {
        /// Mask JSON file, or - for stdin
        mask: String,
        /// Certificate: JSON file, or builtin name
        /// (boxspline111, butterfly, interp3d[:lambda=X], sqrt3-partial)
        #[arg(long)]
        cert: String,
    },
    /// By semidefinite feasibility over a support set
    Sdp {
        /// Mask JSON file, or - for stdin
        mask: String,
        /// Support set box:lo1,hi1[,lo2,hi2,...]; default supp(p)
        #[arg(long)]
        support: Option<String>,
        /// Iteration cap for the feasibility solve
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        /// Feasibility residual tolerance
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

/// Parses the argument vector (without the program name) and runs the
/// subcommand, returning the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let argv = std::iter::once("uepframe".to_string()).chain(args);
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Catalog { action } => catalog_cmd(action),
        Command::Verify { frame } => verify_cmd(&frame),
        Command::Subqmf { mask, grid } => subqmf_cmd(&mask, grid),
        Command::Sumrules { mask } => sumrules_cmd(&mask),
        Command::Analyze { mask, plot } => analyze_cmd(&mask, plot),
        Command::Construct { route } => match route {
            ConstructRoute::Sos { mask, cert } => construct_sos_cmd(&mask, &cert),
            ConstructRoute::Sdp {
                mask,
                support,
                max_iter,
                tol,
            } => construct_sdp_cmd(&mask, support.as_deref(), max_iter, tol),
        },
    }
}

fn read_source(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::input(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("reading {path}: {e}")))
    }
}

fn load_mask_file(path: &str) -> Result<MaskFile, Failure> {
    serde_json::from_str(&read_source(path)?)
        .map_err(|e| Failure::input(format!("parsing mask JSON: {e}")))
}

fn load_mask(path: &str) -> Result<(Mask, MaskFile), Failure> {
    let file = load_mask_file(path)?;
    let mask = file
        .to_mask()
        .map_err(|e| Failure::input(format!("invalid mask: {e}")))?;
    Ok((mask, file))
}

fn emit<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::input(format!("serializing output: {e}")))?;
    println!("{json}");
    Ok(())
}

/// Accepts plain floats and fractions like `1/16`.
pub fn parse_numeric(s: &str) -> Option<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().ok()?;
        let d: f64 = den.trim().parse().ok()?;
        if d == 0.0 {
            return None;
        }
        Some(n / d)
    } else {
        s.trim().parse().ok()
    }
}

fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for p in pairs {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("expected NAME=VALUE, got '{p}'")))?;
        let value = parse_numeric(v)
            .ok_or_else(|| Failure::input(format!("cannot parse value '{v}'")))?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

fn catalog_cmd(action: CatalogAction) -> Result<i32, Failure> {
    match action {
        CatalogAction::List => {
            emit(&crate::catalog::entries())?;
            Ok(EXIT_OK)
        }
        CatalogAction::Show { name, params } => {
            let params = parse_params(&params)?;
            let mask = crate::catalog::get(&name, &params)
                .map_err(|e| Failure::input(e.to_string()))?;
            let mut meta: BTreeMap<String, serde_json::Value> = BTreeMap::new();
            meta.insert("name".into(), serde_json::Value::String(name.clone()));
            if let Some(spec) = crate::catalog::entries()
                .into_iter()
                .find(|e| e.name == name)
                .and_then(|e| e.param)
            {
                let value = params.get(spec.name).copied().unwrap_or(spec.default);
                meta.insert(
                    "params".into(),
                    serde_json::json!({ spec.name: value }),
                );
            }
            emit(&MaskFile::from_mask(&mask, meta))?;
            Ok(EXIT_OK)
        }
    }
}

fn verify_cmd(path: &str) -> Result<i32, Failure> {
    let file: FrameFile = serde_json::from_str(&read_source(path)?)
        .map_err(|e| Failure::input(format!("parsing frame JSON: {e}")))?;
    let frame = file
        .to_frame()
        .map_err(|e| Failure::input(format!("invalid frame: {e}")))?;
    let tol = file
        .report
        .as_ref()
        .map(|r| r.tolerance)
        .unwrap_or(DEFAULT_TOLERANCE);
    let report = verify_frame(&frame, tol);
    let passed = report.passed;
    emit(&report)?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}

fn subqmf_cmd(path: &str, grid: Option<usize>) -> Result<i32, Failure> {
    let (mask, _) = load_mask(path)?;
    let n = grid.unwrap_or_else(|| default_grid_points(mask.dim()));
    if n < 2 {
        return Err(Failure::input("grid must have at least 2 points per axis"));
    }
    let result = check_subqmf_grid(&mask, n);
    let negative = result.min_value < -crate::analysis::ZERO_TOL;
    emit(&result)?;
    Ok(if negative { EXIT_FAILED } else { EXIT_OK })
}

const SUM_RULES_MAX_ORDER: usize = 8;

fn sumrules_cmd(path: &str) -> Result<i32, Failure> {
    let (mask, _) = load_mask(path)?;
    let order = sum_rules_order(&mask, SUM_RULES_MAX_ORDER);
    emit(&serde_json::json!({ "order": order, "maxOrder": SUM_RULES_MAX_ORDER }))?;
    Ok(EXIT_OK)
}

fn analyze_cmd(path: &str, plot: Option<PathBuf>) -> Result<i32, Failure> {
    let (mask, _) = load_mask(path)?;
    if let Some(out) = plot {
        write_plot_csv(&mask, &out)?;
    }
    let report = existence_verdict(&mask);
    emit(&report)?;
    Ok(EXIT_OK)
}

fn write_plot_csv(mask: &Mask, out: &PathBuf) -> Result<(), Failure> {
    let d = mask.dim();
    let n = default_grid_points(d);
    let f = subqmf_poly(mask);
    let vals = grid_values(&f, n);
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut text = String::new();
    for k in 1..=d {
        text.push_str(&format!("omega{k},"));
    }
    text.push_str("f\n");
    for (idx, v) in vals.iter().enumerate() {
        let mut rest = idx;
        let mut coords = vec![0f64; d];
        for k in (0..d).rev() {
            coords[k] = step * (rest % n) as f64;
            rest /= n;
        }
        for c in &coords {
            text.push_str(&format!("{c:.12},"));
        }
        text.push_str(&format!("{:.15e}\n", v.re));
    }
    std::fs::write(out, text)
        .map_err(|e| Failure::input(format!("writing {}: {e}", out.display())))
}

const BUILTIN_CERTS: [&str; 4] = ["boxspline111", "butterfly", "interp3d", "sqrt3-partial"];

fn resolve_certificate(
    spec: &str,
    mask: &Mask,
    mask_file: &MaskFile,
) -> Result<SosCertificate, Failure> {
    let (base, inline_params) = match spec.split_once(':') {
        Some((b, rest)) => (b, Some(rest)),
        None => (spec, None),
    };
    if BUILTIN_CERTS.contains(&base) {
        let mut params = BTreeMap::new();
        if let Some(raw) = inline_params {
            let pairs: Vec<String> = raw.split(',').map(str::to_string).collect();
            params = parse_params(&pairs)?;
        } else if base == "interp3d" {
            // fall back to the lambda recorded in the mask's metadata
            if let Some(v) = mask_file
                .meta
                .get("params")
                .and_then(|p| p.get("lambda"))
                .and_then(|v| v.as_f64())
            {
                params.insert("lambda".to_string(), v);
            }
        }
        return builtin_certificate(base, &params).map_err(|e| Failure::input(e.to_string()));
    }
    let text = read_source(spec)?;
    let terms: Vec<Vec<TermJson>> = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("parsing certificate JSON: {e}")))?;
    let squares = terms
        .iter()
        .map(|t| terms_to_poly(mask.dim(), t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::input(format!("invalid certificate: {e}")))?;
    Ok(SosCertificate::new(squares))
}

fn construct_sos_cmd(mask_path: &str, cert_spec: &str) -> Result<i32, Failure> {
    let (mask, mask_file) = load_mask(mask_path)?;
    let cert = resolve_certificate(cert_spec, &mask, &mask_file)?;
    let frame = construct_from_sos(&mask, &cert).map_err(|e| match e {
        CertError::UnknownBuiltin(_)
        | CertError::UnknownParam(..)
        | CertError::ParamOutOfRange { .. }
        | CertError::Dimension { .. } => Failure::input(e.to_string()),
        other => Failure {
            code: EXIT_FAILED,
            message: other.to_string(),
        },
    })?;
    let report = verify_frame(&frame, DEFAULT_TOLERANCE);
    emit(&FrameFile::from_frame(&frame, report))?;
    Ok(EXIT_OK)
}

fn parse_support(spec: &str, dim: usize) -> Result<SupportSet, Failure> {
    let body = spec
        .strip_prefix("box:")
        .ok_or_else(|| Failure::input("support must look like box:lo1,hi1[,lo2,hi2,...]"))?;
    let nums: Vec<i64> = body
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::input(format!("parsing support bounds: {e}")))?;
    if nums.len() != 2 * dim {
        return Err(Failure::input(format!(
            "support needs {} bounds for dimension {dim}, got {}",
            2 * dim,
            nums.len()
        )));
    }
    let lo: Vec<i64> = nums.iter().step_by(2).copied().collect();
    let hi: Vec<i64> = nums.iter().skip(1).step_by(2).copied().collect();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return Err(Failure::input("support box is empty"));
    }
    Ok(SupportSet::from_box(&lo, &hi))
}

fn construct_sdp_cmd(
    mask_path: &str,
    support: Option<&str>,
    max_iter: Option<usize>,
    tol: Option<f64>,
) -> Result<i32, Failure> {
    let (mask, _) = load_mask(mask_path)?;
    let support = match support {
        Some(s) => parse_support(s, mask.dim())?,
        None => SupportSet::from_poly(mask.poly()),
    };
    let mut opts = SolveOptions::default();
    if let Some(m) = max_iter {
        opts.max_iterations = m;
    }
    if let Some(t) = tol {
        opts.residual_tol = t;
    }
    let frame = construct_frame_sdp(&mask, &support, &opts).map_err(|e| match e {
        SdpError::MissingExponent(_) => Failure::input(e.to_string()),
        SdpError::Infeasible { .. } | SdpError::NoGenerators => Failure {
            code: EXIT_INFEASIBLE,
            message: e.to_string(),
        },
        other => Failure {
            code: EXIT_FAILED,
            message: other.to_string(),
        },
    })?;
    let report = verify_frame(&frame, crate::sdp_frame::SDP_POST_VERIFY_TOL);
    emit(&FrameFile::from_frame(&frame, report))?;
    Ok(EXIT_OK)
}
