//! Command-line front end for the q-plane operator-algebra library.
//!
//! Subcommands: `kgroups` (ranks and generators), `pair` (one index
//! pairing), `verify` (named verification suites, persisted to a run
//! store), `decompose` (write a projection class in the generator basis),
//! and `selftest` (built-in configs, no store).
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or config
//! error, 3 numeric non-convergence.

use std::env;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use qplane::funcspace::{Endpoint, GridSpec, Interval};
use qplane::ktheory::{decompose_class, kgroups, KClassVector, KtheoryError};
use qplane::pairing::{pair, KHomClass, PairError, PairOptions};
use qplane::projlib::{self, ProjError, Projection};
use qplane::report_store::{RunRecord, RunStore, StoreError};
use qplane::scaled::ScaledRational;
use qplane::spectral::{SpectralSet, SpectrumKind};
use qplane::suites::{self, SuiteError};
use qplane::BigRational;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Write a line to stdout, exiting quietly if the reader closed the pipe
/// (e.g. `qplane ... | head`).
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut o = std::io::stdout();
        if write!(o, $($arg)*).and_then(|_| o.flush()).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(
    name = "qplane",
    version,
    about = "Projections, index pairings, and K-groups over q-scaled spectra"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print K-group ranks and generators (unital and non-unital).
    Kgroups {
        /// Path to a JSON config file.
        #[arg(long)]
        config: PathBuf,
        /// Emit a machine-readable JSON report instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Compute one index pairing ⟨hom, class⟩.
    Pair {
        #[arg(long)]
        config: PathBuf,
        /// Projection class: unit | bott:N | pr:N | chi:[lo,hi) (endpoints
        /// are rationals, q, or q^k; ( and [ choose openness).
        #[arg(long)]
        class: String,
        /// K-homology class: ev0 | evinf | F:IDX | F:y=RAT.
        #[arg(long)]
        hom: String,
        #[arg(long)]
        json: bool,
    },
    /// Run a verification suite and append the outcome to the run store.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// tip | teo | corollaries | algebra | all
        #[arg(long, default_value = "all")]
        suite: String,
        /// Run store path (falls back to QPLANE_STORE, then
        /// ./qplane-runs.ndjson).
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write a projection class in the K₀ generator basis.
    Decompose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        class: String,
        /// Decompose in the non-unital lattice (no unit generator).
        #[arg(long)]
        non_unital: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run every suite on built-in configs; nothing is persisted.
    Selftest {
        #[arg(long)]
        json: bool,
    },
}

struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl From<PairError> for CliError {
    fn from(e: PairError) -> Self {
        let code = match &e {
            PairError::NonConvergence { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<KtheoryError> for CliError {
    fn from(e: KtheoryError) -> Self {
        let code = match &e {
            KtheoryError::NonIntegral { .. } => 3,
            KtheoryError::OutsideLattice(_) => 1,
            KtheoryError::Pair(PairError::NonConvergence { .. }) => 3,
            KtheoryError::Pair(_) => 2,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<ProjError> for CliError {
    fn from(e: ProjError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<SuiteError> for CliError {
    fn from(e: SuiteError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::usage(e.to_string())
    }
}

struct Config {
    x: SpectralSet,
    opts: PairOptions,
    grid: GridSpec,
    raw: Value,
}

fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    BigRational::from_str(s.trim())
        .map_err(|_| CliError::usage(format!("not a rational: \"{}\" (write p/q or an integer)", s)))
}

fn load_config(path: &PathBuf) -> Result<Config, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {}", path.display(), e)))?;
    let raw: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config is not valid JSON: {}", e)))?;
    let obj = raw
        .as_object()
        .ok_or_else(|| CliError::usage("config must be a JSON object"))?;

    let q_str = obj
        .get("q")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::usage("config needs a rational string field \"q\""))?;
    let q = parse_rational(q_str)?;

    let x = match obj.get("spectrum") {
        Some(Value::String(s)) if s == "full" => SpectralSet::full(q),
        Some(Value::Object(m)) => {
            let list = m.get("intervals").and_then(Value::as_array).ok_or_else(|| {
                CliError::usage("spectrum object needs an \"intervals\" array of [lo, hi] pairs")
            })?;
            let mut intervals = Vec::new();
            for item in list {
                let ends = item
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| CliError::usage("each interval must be a [lo, hi] pair"))?;
                let lo = ends[0]
                    .as_str()
                    .ok_or_else(|| CliError::usage("interval endpoints must be rational strings"))?;
                let hi = ends[1]
                    .as_str()
                    .ok_or_else(|| CliError::usage("interval endpoints must be rational strings"))?;
                intervals.push((parse_rational(lo)?, parse_rational(hi)?));
            }
            SpectralSet::generic(q, intervals)
        }
        _ => {
            return Err(CliError::usage(
                "config field \"spectrum\" must be \"full\" or {\"intervals\": [[lo, hi], ...]}",
            ))
        }
    }
    .map_err(|e| CliError::usage(format!("invalid spectrum: {}", e)))?;

    let mut opts = PairOptions::default();
    let mut grid = GridSpec::default();
    if let Some(o) = obj.get("options") {
        let om = o
            .as_object()
            .ok_or_else(|| CliError::usage("config field \"options\" must be an object"))?;
        for (key, value) in om {
            match key.as_str() {
                "tol" => opts.tol = opt_f64(key, value)?,
                "integer_tol" => opts.integer_tol = opt_f64(key, value)?,
                "initial_window" => opts.initial_window = opt_usize(key, value)?,
                "max_window" => opts.max_window = opt_usize(key, value)?,
                "grid_density" => grid.points_per_domain = opt_usize(key, value)?,
                other => {
                    return Err(CliError::usage(format!(
                        "unknown option \"{}\" (tol, integer_tol, initial_window, max_window, grid_density)",
                        other
                    )))
                }
            }
        }
    }
    if let Ok(s) = env::var("QPLANE_MAX_WINDOW") {
        opts.max_window = s.parse().map_err(|_| {
            CliError::usage("QPLANE_MAX_WINDOW must be a positive integer")
        })?;
    }

    Ok(Config { x, opts, grid, raw })
}

fn opt_f64(key: &str, v: &Value) -> Result<f64, CliError> {
    v.as_f64()
        .filter(|t| t.is_finite() && *t >= 0.0)
        .ok_or_else(|| CliError::usage(format!("option \"{}\" must be a finite number ≥ 0", key)))
}

fn opt_usize(key: &str, v: &Value) -> Result<usize, CliError> {
    v.as_u64()
        .filter(|t| *t > 0)
        .map(|t| t as usize)
        .ok_or_else(|| CliError::usage(format!("option \"{}\" must be a positive integer", key)))
}

fn parse_endpoint(tok: &str) -> Result<ScaledRational, CliError> {
    let t = tok.trim();
    if t == "q" {
        return Ok(ScaledRational::q_power(1));
    }
    if let Some(exp) = t.strip_prefix("q^") {
        let m: i64 = exp
            .parse()
            .map_err(|_| CliError::usage(format!("bad exponent in \"{}\"", t)))?;
        return Ok(ScaledRational::q_power(m));
    }
    Ok(ScaledRational::from_rational(parse_rational(t)?))
}

fn parse_interval(s: &str) -> Result<Interval, CliError> {
    let s = s.trim();
    let bad = || {
        CliError::usage(format!(
            "bad interval \"{}\" (expected e.g. [0,q) or (q^3,1) — endpoints are rationals, q, or q^k)",
            s
        ))
    };
    let first = s.chars().next().ok_or_else(bad)?;
    let last = s.chars().last().ok_or_else(bad)?;
    let lo_closed = match first {
        '[' => true,
        '(' => false,
        _ => return Err(bad()),
    };
    let hi_closed = match last {
        ']' => true,
        ')' => false,
        _ => return Err(bad()),
    };
    let inner = &s[first.len_utf8()..s.len() - last.len_utf8()];
    let (lo_s, hi_s) = inner.split_once(',').ok_or_else(bad)?;
    let lo = parse_endpoint(lo_s)?;
    let hi = match hi_s.trim() {
        "inf" | "oo" | "∞" => Endpoint::Infinity,
        t => Endpoint::Finite(parse_endpoint(t)?),
    };
    Ok(Interval::new(lo, lo_closed, hi, hi_closed))
}

fn parse_class(spec: &str, x: &SpectralSet) -> Result<Projection, CliError> {
    if spec == "unit" || spec == "1" {
        return Ok(projlib::unit(x));
    }
    if let Some(rest) = spec.strip_prefix("bott:") {
        let n: i64 = rest
            .parse()
            .map_err(|_| CliError::usage(format!("bott wants an integer index, got \"{}\"", rest)))?;
        return Ok(projlib::bott(n, x)?);
    }
    if let Some(rest) = spec.strip_prefix("pr:") {
        let n: i64 = rest
            .parse()
            .map_err(|_| CliError::usage(format!("pr wants a positive integer, got \"{}\"", rest)))?;
        return Ok(projlib::powers_rieffel(n, x)?);
    }
    if let Some(rest) = spec.strip_prefix("chi:") {
        let iv = parse_interval(rest)?;
        return Ok(projlib::indicator(&iv, x)?);
    }
    Err(CliError::usage(format!(
        "unknown class \"{}\" (use unit, bott:N, pr:N, or chi:[lo,hi))",
        spec
    )))
}

fn parse_hom(spec: &str, x: &SpectralSet) -> Result<KHomClass, CliError> {
    match spec {
        "ev0" => return Ok(KHomClass::Ev0),
        "evinf" => return Ok(KHomClass::EvInf),
        _ => {}
    }
    let rest = spec.strip_prefix("F:").ok_or_else(|| {
        CliError::usage(format!(
            "unknown K-homology class \"{}\" (use ev0, evinf, F:IDX, or F:y=RAT)",
            spec
        ))
    })?;
    if let Some(y) = rest.strip_prefix("y=") {
        return Ok(KHomClass::Fredholm {
            gamma: None,
            y: parse_rational(y)?,
        });
    }
    let idx: usize = rest.parse().map_err(|_| {
        CliError::usage(format!("F wants a component index or y=RAT, got \"{}\"", rest))
    })?;
    match x.kind() {
        SpectrumKind::Full => {
            if idx == 0 {
                Ok(KHomClass::Fredholm {
                    gamma: None,
                    y: suites::default_witness(x),
                })
            } else {
                Err(CliError::usage(
                    "the full spectrum carries a single Fredholm class, F:0",
                ))
            }
        }
        SpectrumKind::Generic => {
            let g = x
                .gap_structure()
                .map_err(|e| CliError::usage(e.to_string()))?;
            let comp = g.components.get(idx).ok_or_else(|| {
                CliError::usage(format!(
                    "component index {} out of range (the spectrum has {})",
                    idx,
                    g.components.len()
                ))
            })?;
            Ok(KHomClass::Fredholm {
                gamma: Some(idx),
                y: comp.witness.clone(),
            })
        }
    }
}

/// Render a decomposition with concrete gap samples; the lowest gap prints
/// as [χ_(q,1)] since its class only depends on the gap (q, min Y).
fn format_class_vector(v: &KClassVector, x: &SpectralSet) -> Result<String, CliError> {
    let mut terms: Vec<(i64, String)> = Vec::new();
    match v {
        KClassVector::Full { winding, unit } => {
            if let Some(m) = unit {
                terms.push((*m, "[1]".to_string()));
            }
            terms.push((*winding, "[R_1]".to_string()));
        }
        KClassVector::Generic {
            l,
            gap_coeffs,
            unit,
        } => {
            let g = x
                .gap_structure()
                .map_err(|e| CliError::usage(e.to_string()))?;
            if let Some(m) = unit {
                terms.push((*m, "[1]".to_string()));
            }
            terms.push((*l, "[χ_[0,q)]".to_string()));
            for (j, n) in gap_coeffs.iter().enumerate() {
                let name = if j + 1 == gap_coeffs.len() {
                    "[χ_(q,1)]".to_string()
                } else {
                    format!("[χ_({},1)]", g.gaps[j].sample)
                };
                terms.push((*n, name));
            }
        }
    }
    let mut out = String::new();
    for (coeff, name) in terms {
        if coeff == 0 {
            continue;
        }
        let mag = coeff.abs();
        let piece = if mag == 1 {
            name
        } else {
            format!("{}·{}", mag, name)
        };
        if out.is_empty() {
            if coeff < 0 {
                out.push('−');
            }
            out.push_str(&piece);
        } else {
            out.push_str(if coeff < 0 { " − " } else { " + " });
            out.push_str(&piece);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    Ok(out)
}

fn print_report(command: &str, config: &Value, payload: Value) {
    let report = json!({
        "command": command,
        "config": config,
        "payload": payload,
        "tool_version": VERSION,
    });
    outln!("{}", report);
}

fn cmd_kgroups(cfg: &Config, json_mode: bool) -> Result<i32, CliError> {
    let mut lines = Vec::new();
    let mut variants = Vec::new();
    for unital in [true, false] {
        let r = kgroups(&cfg.x, unital);
        let gens: Vec<String> = r.generators.iter().map(|g| g.to_string()).collect();
        lines.push(format!(
            "K0 = Z^{}, K1 = 0 ({})",
            r.k0_rank,
            if unital { "unital" } else { "non-unital" }
        ));
        lines.push(format!("  generators: {}", gens.join(", ")));
        variants.push(json!({
            "unital": unital,
            "k0_rank": r.k0_rank,
            "k1_rank": r.k1_rank,
            "generators": gens,
        }));
    }
    if json_mode {
        print_report("kgroups", &cfg.raw, json!({ "variants": variants }));
    } else {
        outln!("{}", lines.join("\n"));
    }
    Ok(0)
}

fn cmd_pair(cfg: &Config, class: &str, hom: &str, json_mode: bool) -> Result<i32, CliError> {
    let p = parse_class(class, &cfg.x)?;
    let h = parse_hom(hom, &cfg.x)?;
    let r = pair(&h, p.matrix(), &cfg.opts)?;
    if json_mode {
        print_report(
            "pair",
            &cfg.raw,
            json!({
                "class": p.label(),
                "hom": h.to_string(),
                "raw": r.raw,
                "rounded": r.rounded,
                "residual": r.residual,
                "window_used": r.window_used,
                "window_exact": r.window_exact,
                "integral": r.integral,
            }),
        );
    } else {
        let flag = if r.integral {
            String::new()
        } else {
            format!("  (non-integral: raw {})", r.raw)
        };
        outln!("⟨{}, {}⟩ = {}{}", h, p.label(), r.rounded, flag);
        outln!(
            "  residual {:.3e}, window {}{}",
            r.residual,
            r.window_used,
            if r.window_exact { " (exact)" } else { "" }
        );
    }
    Ok(0)
}

fn resolve_store(cli_store: Option<PathBuf>) -> PathBuf {
    cli_store
        .or_else(|| env::var_os("QPLANE_STORE").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("./qplane-runs.ndjson"))
}

fn cmd_verify(
    cfg: &Config,
    suite: &str,
    store: Option<PathBuf>,
    json_mode: bool,
) -> Result<i32, CliError> {
    let reports = suites::run_named(suite, &cfg.x, &cfg.opts, &cfg.grid)?;
    let pass = reports.iter().all(|r| r.pass);
    let payload = json!({
        "suite": suite,
        "pass": pass,
        "suites": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    });

    let store_path = resolve_store(store);
    let record = RunRecord::new(&cfg.raw, suite, payload.clone(), pass, VERSION);
    let id = RunStore::new(&store_path).append(&record)?;
    eprintln!("stored as run {} in {}", id, store_path.display());

    if json_mode {
        print_report("verify", &cfg.raw, payload);
    } else {
        for r in &reports {
            outln!("{}", r.render_text());
            outln!();
        }
        outln!("verify {}: {}", suite, if pass { "pass" } else { "FAIL" });
    }
    Ok(if pass { 0 } else { 1 })
}

fn cmd_decompose(
    cfg: &Config,
    class: &str,
    non_unital: bool,
    json_mode: bool,
) -> Result<i32, CliError> {
    let p = parse_class(class, &cfg.x)?;
    let v = decompose_class(p.matrix(), !non_unital, &cfg.opts)?;
    let rhs = format_class_vector(&v, &cfg.x)?;
    let identity = format!("[{}] = {}", p.label(), rhs);
    if json_mode {
        print_report(
            "decompose",
            &cfg.raw,
            json!({
                "class": p.label(),
                "unital": !non_unital,
                "identity": identity,
            }),
        );
    } else {
        outln!("{}", identity);
    }
    Ok(0)
}

fn cmd_selftest(json_mode: bool) -> Result<i32, CliError> {
    let rat = |s: &str| BigRational::from_str(s).expect("built-in rational");
    let builtins: Vec<(Value, SpectralSet)> = vec![
        (
            json!({"q": "1/2", "spectrum": "full"}),
            SpectralSet::full(rat("1/2")).expect("built-in config"),
        ),
        (
            json!({"q": "1/2", "spectrum": {"intervals": [
                ["13/25", "11/20"], ["3/5", "31/50"], ["7/10", "18/25"]
            ]}}),
            SpectralSet::generic(
                rat("1/2"),
                vec![
                    (rat("13/25"), rat("11/20")),
                    (rat("3/5"), rat("31/50")),
                    (rat("7/10"), rat("18/25")),
                ],
            )
            .expect("built-in config"),
        ),
    ];
    let opts = PairOptions::default();
    let grid = GridSpec::default();
    let mut all_pass = true;
    let mut configs = Vec::new();
    let mut text = String::new();
    for (raw, x) in &builtins {
        let reports = suites::run_all(x, &opts, &grid)?;
        let pass = reports.iter().all(|r| r.pass);
        all_pass &= pass;
        text.push_str(&format!("config {}\n", raw));
        for r in &reports {
            text.push_str(&r.render_text());
            text.push('\n');
        }
        text.push_str(&format!(
            "config result: {}\n\n",
            if pass { "pass" } else { "FAIL" }
        ));
        configs.push(json!({
            "config": raw,
            "pass": pass,
            "suites": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        }));
    }
    if json_mode {
        print_report(
            "selftest",
            &Value::Null,
            json!({ "pass": all_pass, "configs": configs }),
        );
    } else {
        out!("{}", text);
        outln!("selftest: {}", if all_pass { "pass" } else { "FAIL" });
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Kgroups { config, json } => cmd_kgroups(&load_config(&config)?, json),
        Cmd::Pair {
            config,
            class,
            hom,
            json,
        } => cmd_pair(&load_config(&config)?, &class, &hom, json),
        Cmd::Verify {
            config,
            suite,
            store,
            json,
        } => cmd_verify(&load_config(&config)?, &suite, store, json),
        Cmd::Decompose {
            config,
            class,
            non_unital,
            json,
        } => cmd_decompose(&load_config(&config)?, &class, non_unital, json),
        Cmd::Selftest { json } => cmd_selftest(json),
    }
}

fn main() {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    };
    std::process::exit(code);
}
