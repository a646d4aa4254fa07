//! `dpfib` command-line front end.
//!
//! Exit codes: 0 success (and `ObstructionWitnessed`), 2 a check failed,
//! 3 not applicable, 4 partial evidence, 5 budget exceeded, 64 usage or
//! input error, 70 internal inconsistency, 74 output error.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use dpfib::critical::{census_report, classify_critical_point, CritRecord, ScanOptions};
use dpfib::family::{classify, enumerate_families, EnumerationBounds, FamilyParams, VerdictTag};
use dpfib::pipeline::{run_pipeline, Overall, PipelineOptions, PipelineReport, Sabotage};
use dpfib::restriction::{verify_surjectivity_case, SurjectivityCase, SurjectivityParams};
use dpfib::{selftest, Bidegree, BundleSpec, Chart, Error, Fe, Field, Poly};

const EXIT_FAILED: u8 = 2;
const EXIT_NOT_APPLICABLE: u8 = 3;
const EXIT_PARTIAL: u8 = 4;
const EXIT_BUDGET: u8 = 5;
const EXIT_USAGE: u8 = 64;
const EXIT_INTERNAL: u8 = 70;
const EXIT_IO: u8 = 74;

/// Name of the environment variable holding the worker thread count.
const THREADS_VAR: &str = "DPFIB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "dpfib", version, about = "Degeneration checks for del Pezzo fibrations over finite fields")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// JSON file with a section per command; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify one family.
    Classify(ClassifyArgs),
    /// Classify every valid family within parameter bounds.
    Enumerate(EnumerateArgs),
    /// Monomial basis of a graded piece of a Cox ring.
    Basis(BasisArgs),
    /// Critical points of a polynomial.
    Crit(CritArgs),
    /// Surjectivity of a jet restriction map.
    Restrict(RestrictArgs),
    /// Build and check a special member of a family.
    Pipeline(PipelineArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

/// Error raised for invalid flag combinations and missing values.
#[derive(Debug)]
struct Usage(String);

impl Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn required<T>(v: Option<T>, flag: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| usage(format!("missing --{flag}")))
}

/// `println!` that returns write errors instead of panicking.
macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        writeln!(std::io::stdout().lock(), $($t)*)?;
    }};
}

/// Fills unset flags from the config section.
macro_rules! merge {
    ($flags:expr, $cfg:expr, $($field:ident),*) => {
        $( if $flags.$field.is_none() { $flags.$field = $cfg.$field; } )*
    };
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct FamilyArgs {
    /// Del Pezzo degree: 1, 2 or 3.
    #[arg(long)]
    degree: Option<u32>,
    /// Total dimension; the base is P^{n-2}.
    #[arg(long)]
    n: Option<i64>,
    /// `λ,μ` (degree 1), `λ,μ,ν` (degree 2) or `θ,λ,μ,ν` (degree 3).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Option<Vec<i64>>,
}

impl FamilyArgs {
    fn merge(&mut self, cfg: FamilyArgs) {
        merge!(self, cfg, degree, n, params);
    }

    fn family(&self) -> anyhow::Result<FamilyParams> {
        let degree = required(self.degree, "degree")?;
        let n = required(self.n, "n")?;
        let params = required(self.params.clone(), "params")?;
        FamilyParams::from_list(degree, n, &params).map_err(|e| usage(e.to_string()))
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct EnumerateArgs {
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    n: Option<i64>,
    /// Upper bound for every twist.
    #[arg(long, alias = "max")]
    max_twist: Option<i64>,
    /// Upper bound for θ (degree 3); defaults to twice the twist bound.
    #[arg(long)]
    max_theta: Option<i64>,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct BundleArgs {
    /// JSON file with `base_dim`, `twists`, `weights` and optional `names`.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Base dimension, when no spec file is given.
    #[arg(long)]
    base_dim: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    twists: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<u32>>,
    /// Inline bundle (config file only).
    #[arg(skip)]
    bundle: Option<BundleSpec>,
}

impl BundleArgs {
    fn merge(&mut self, cfg: BundleArgs) {
        merge!(self, cfg, spec, base_dim, twists, weights, bundle);
    }

    fn given(&self) -> bool {
        self.spec.is_some() || self.bundle.is_some() || self.twists.is_some()
    }

    fn bundle(&self) -> anyhow::Result<BundleSpec> {
        if let Some(path) = &self.spec {
            let spec: BundleSpec = read_json(path)?;
            spec.validate().map_err(|e| usage(e.to_string()))?;
            return Ok(spec);
        }
        if let Some(b) = &self.bundle {
            b.validate().map_err(|e| usage(e.to_string()))?;
            return Ok(b.clone());
        }
        let twists = required(self.twists.clone(), "twists (or --spec)")?;
        let weights = required(self.weights.clone(), "weights")?;
        BundleSpec::new(self.base_dim.unwrap_or(1), twists, weights).map_err(|e| usage(e.to_string()))
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct BasisArgs {
    #[command(flatten)]
    #[serde(flatten)]
    bundle: BundleArgs,
    /// `α,β`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bidegree: Option<Vec<i64>>,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct CritArgs {
    /// `GF(p^k)` or `GF(q)`.
    #[arg(long)]
    field: Option<String>,
    /// The polynomial, e.g. `x^2*y + g^3*z^3`.
    #[arg(long)]
    poly: Option<String>,
    /// Affine variable names (default `x0,x1,...` by count with `--nvars`).
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    #[arg(long)]
    nvars: Option<usize>,
    /// Classify only at this point (chart coordinates with a bundle).
    #[arg(long, value_delimiter = ',')]
    point: Option<Vec<String>>,
    /// With a bundle: `i,j` for the chart `U_{i,j}`; all charts otherwise.
    #[arg(long, value_delimiter = ',')]
    chart: Option<Vec<usize>>,
    #[arg(long)]
    budget: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    bundle: BundleArgs,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct RestrictArgs {
    /// Case 1-4: third order on U_x, fourth order on U_x, second order on
    /// the y-stratum, second order on the z-stratum.
    #[arg(long)]
    case: Option<u32>,
    /// Weight of z.
    #[arg(long)]
    m: Option<u32>,
    /// Fiber degree of the bidegree.
    #[arg(long)]
    d: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<i64>,
    /// Base degree; defaults to the bound of the case.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<i64>,
    #[arg(long)]
    base_dim: Option<usize>,
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct PipelineArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Several seeds; one report per seed.
    #[arg(long, value_delimiter = ',', conflicts_with = "seed")]
    seeds: Option<Vec<u64>>,
    /// Write the report (JSON lines with several seeds) to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long)]
    max_attempts: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    /// Negative control: `shared_root_of_coefficients`,
    /// `vanishing_locus_coefficient`, `square_coefficient` or
    /// `planted_degenerate_point`.
    #[arg(long)]
    sabotage: Option<String>,
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct SelftestArgs {
    /// Criterion ids to run (default all).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u32>>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// The config section for `command`, or defaults.
fn section<T: DeserializeOwned + Default>(config: &Option<Value>, command: &str) -> anyhow::Result<T> {
    let Some(v) = config.as_ref().and_then(|c| c.get(command)) else {
        return Ok(T::default());
    };
    let obj = v.as_object().ok_or_else(|| usage(format!("config section `{command}` must be an object")))?;
    // the keys are the long flags of the command, plus an inline `bundle`
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(command).expect("known command");
    let mut allowed: Vec<String> = sub
        .get_arguments()
        .filter(|a| !a.is_global_set())
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    if allowed.iter().any(|a| a == "spec") {
        allowed.push("bundle".into());
    }
    if let Some(k) = obj.keys().find(|k| !allowed.contains(k)) {
        return Err(usage(format!("unknown key `{k}` in config section `{command}`")));
    }
    serde_json::from_value(v.clone()).map_err(|e| usage(format!("config section `{command}`: {e}")))
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<Option<Value>> {
    let Some(path) = path else { return Ok(None) };
    let v: Value = read_json(path)?;
    let obj = v.as_object().ok_or_else(|| usage("config must be a JSON object"))?;
    const COMMANDS: [&str; 7] = ["classify", "enumerate", "basis", "crit", "restrict", "pipeline", "selftest"];
    if let Some(k) = obj.keys().find(|k| !COMMANDS.contains(&k.as_str())) {
        return Err(usage(format!("unknown config section `{k}`")));
    }
    Ok(Some(v))
}

fn parse_field(s: &Option<String>) -> anyhow::Result<Field> {
    let s = required(s.clone(), "field")?;
    Field::parse(&s).map_err(|e| usage(e.to_string()))
}

fn print_json<T: Serialize>(v: &T) -> anyhow::Result<()> {
    outln!("{}", serde_json::to_string(v)?);
    Ok(())
}

fn monomial_string(names: &[String], exps: &[u32]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .zip(names)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, n)| if e == 1 { n.clone() } else { format!("{n}^{e}") })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn cmd_classify(mut args: ClassifyArgs, cfg: &Option<Value>, json: bool) -> anyhow::Result<u8> {
    args.family.merge(section::<ClassifyArgs>(cfg, "classify")?.family);
    let v = classify(&args.family.family()?);
    if json {
        print_json(&v)?;
    } else {
        outln!("{}: {:?}", v.params, v.tag);
        if let Some(m) = &v.sheaf_m {
            outln!("  route {:?}, M = O{}", m.route, m.cited);
        }
        for r in &v.reasons {
            outln!("  {r}");
        }
    }
    Ok(if v.tag == VerdictTag::Invalid { EXIT_NOT_APPLICABLE } else { 0 })
}

fn cmd_enumerate(mut args: EnumerateArgs, cfg: &Option<Value>, json: bool) -> anyhow::Result<u8> {
    let c: EnumerateArgs = section(cfg, "enumerate")?;
    merge!(args, c, degree, n, max_twist, max_theta);
    let degree = required(args.degree, "degree")?;
    let n = required(args.n, "n")?;
    let max_twist = args.max_twist.unwrap_or(3);
    let bounds = EnumerationBounds {
        max_twist,
        max_theta: args.max_theta.unwrap_or(2 * max_twist),
    };
    let all = enumerate_families(degree, n, bounds).map_err(|e| usage(e.to_string()))?;
    for (p, v) in &all {
        if json {
            print_json(v)?;
        } else {
            let m = v.sheaf_m.as_ref().map_or("-".to_string(), |m| m.cited.to_string());
            outln!("{:<22} {:<24} M = {}", p.to_string(), format!("{:?}", v.tag), m);
        }
    }
    if !json {
        outln!("{} families", all.len());
    }
    Ok(0)
}

#[derive(Serialize)]
struct BasisOutput {
    spec: BundleSpec,
    bidegree: Bidegree,
    count: usize,
    monomials: Vec<String>,
}

fn cmd_basis(mut args: BasisArgs, cfg: &Option<Value>, json: bool) -> anyhow::Result<u8> {
    let c: BasisArgs = section(cfg, "basis")?;
    args.bundle.merge(c.bundle);
    merge!(args, c, bidegree);
    let spec = args.bundle.bundle()?;
    let bd = required(args.bidegree, "bidegree")?;
    if bd.len() != 2 {
        return Err(usage("--bidegree takes two integers α,β"));
    }
    let bd = Bidegree::new(bd[0], bd[1]);
    let names = spec.var_names();
    let monomials: Vec<String> = spec.monomial_basis(bd).iter().map(|e| monomial_string(&names, e)).collect();
    if json {
        print_json(&BasisOutput {
            spec,
            bidegree: bd,
            count: monomials.len(),
            monomials,
        })?;
    } else {
        outln!("{} monomials of bidegree {bd}", monomials.len());
        for m in &monomials {
            outln!("  {m}");
        }
    }
    Ok(0)
}

fn parse_point(field: &Field, coords: &[String], n: usize) -> anyhow::Result<Vec<Fe>> {
    if coords.len() != n {
        return Err(usage(format!("--point needs {n} coordinates, got {}", coords.len())));
    }
    coords
        .iter()
        .map(|c| field.parse_coeff(c).map_err(|e| usage(e.to_string())))
        .collect()
}

fn print_records(records: &[CritRecord]) -> anyhow::Result<()> {
    for r in records {
        let chart = r.chart.map_or(String::new(), |c| format!("U({},{}) ", c.i, c.j));
        let length = match r.local_length {
            Some(l) => format!("{l:?}"),
            None => "-".into(),
        };
        outln!(
            "  {chart}({})  {:?}  hessian rank {}  length {length}",
            r.coordinates.join(", "),
            r.classification,
            r.hessian_rank
        );
    }
    Ok(())
}

fn cmd_crit(mut args: CritArgs, cfg: &Option<Value>, json: bool) -> anyhow::Result<u8> {
    let c: CritArgs = section(cfg, "crit")?;
    args.bundle.merge(c.bundle);
    merge!(args, c, field, poly, vars, nvars, point, chart, budget);
    let field = parse_field(&args.field)?;
    let text = required(args.poly.clone(), "poly")?;
    let budget = args.budget.unwrap_or(dpfib::field::DEFAULT_BUDGET);
    let opts = ScanOptions {
        budget,
        filter: None,
    };
    // (chart, affine polynomial) pairs to examine
    let mut targets: Vec<(Option<Chart>, Poly)> = Vec::new();
    if args.bundle.given() {
        let spec = args.bundle.bundle()?;
        let f = spec.parse_poly(&field, &text).map_err(|e| usage(e.to_string()))?;
        let charts = match &args.chart {
            Some(ij) if ij.len() == 2 => vec![spec.chart(ij[0], ij[1]).map_err(|e| usage(e.to_string()))?],
            Some(_) => return Err(usage("--chart takes i,j")),
            None => spec.charts(),
        };
        for ch in charts {
            targets.push((Some(ch), spec.dehomogenize(&f, ch)?));
        }
    } else {
        let names = match (&args.vars, args.nvars) {
            (Some(v), _) => v.clone(),
            (None, Some(k)) => dpfib::poly::indexed_names("x", k),
            (None, None) => return Err(usage("give --vars, --nvars or a bundle")),
        };
        let f = Poly::parse(&text, &field, Arc::new(names)).map_err(|e| usage(e.to_string()))?;
        targets.push((None, f));
    }
    if let Some(coords) = &args.point {
        if targets.len() != 1 {
            return Err(usage("--point with a bundle needs --chart"));
        }
        let (chart, f) = &targets[0];
        let pt = parse_point(&field, coords, f.nvars())?;
        let mut r = classify_critical_point(f, &pt)?;
        r.chart = *chart;
        if json {
            print_json(&r)?;
        } else {
            print_records(std::slice::from_ref(&r))?;
        }
        return Ok(0);
    }
    for (chart, f) in &targets {
        let report = census_report(f, *chart, &opts)?;
        if json {
            print_json(&report)?;
        } else {
            let where_ = chart.map_or(String::new(), |c| format!(" on U({},{})", c.i, c.j));
            outln!(
                "{} critical points{where_} over {}: {} nondegenerate, {} almost nondegenerate, {} degenerate",
                report.records.len(),
                report.field,
                report.counts.nondegenerate,
                report.counts.almost,
                report.counts.degenerate
            );
            print_records(&report.records)?;
        }
    }
    Ok(0)
}

fn cmd_restrict(mut args: RestrictArgs, cfg: &Option<Value>, json: bool) -> anyhow::Result<u8> {
    let c: RestrictArgs = section(cfg, "restrict")?;
    merge!(args, c, case, m, d, lambda, mu, delta, base_dim, field, samples, seed);
    let case = SurjectivityCase::from_number(required(args.case, "case")?).map_err(|e| usage(e.to_string()))?;
    let mut params = SurjectivityParams {
        m: required(args.m, "m")?,
        d: required(args.d, "d")?,
        lambda: args.lambda.unwrap_or(0),
        mu: args.mu.unwrap_or(0),
        delta: 0,
        base_dim: args.base_dim.unwrap_or(1),
    };
    params.delta = args.delta.unwrap_or_else(|| params.delta_bound(case));
    let field = parse_field(&args.field)?;
    let report = verify_surjectivity_case(case, params, &field, args.samples.unwrap_or(100), args.seed.unwrap_or(0))?;
    if json {
        print_json(&report)?;
    } else {
        outln!(
            "case {} (jet order {}), m={} d={} λ={} μ={} δ={} over {}: hypotheses {}",
            report.case,
            report.jet_order,
            params.m,
            params.d,
            params.lambda,
            params.mu,
            params.delta,
            report.field,
            if report.hypotheses_hold { "hold" } else { "fail" }
        );
        let bad = report.samples.iter().filter(|s| !s.surjective).count();
        outln!(
            "  standard point: rank {} of {} ({})",
            report.standard_point.rank,
            report.standard_point.jet_dim,
            if report.standard_point.surjective { "surjective" } else { "not surjective" }
        );
        outln!("  {} sampled points, {bad} not surjective", report.samples.len());
    }
    Ok(if report.all_surjective { 0 } else { EXIT_FAILED })
}

fn overall_code(o: Overall) -> u8 {
    match o {
        Overall::ObstructionWitnessed => 0,
        Overall::Failed => EXIT_FAILED,
        Overall::PartialEvidence => EXIT_PARTIAL,
    }
}

fn print_pipeline(r: &PipelineReport) -> anyhow::Result<()> {
    outln!("{} over {} seed {}: {:?}", r.params, r.field, r.seed, r.overall);
    outln!("  route {:?}, M = O{} (h0 > 0: {})", r.route, r.sheaf_m.cited, r.h0_nonzero);
    if let Some(m) = &r.member {
        outln!("  branch section: {}", m.branch_section);
    }
    outln!("  attempts: {}", r.attempts.len());
    if let Some(s) = &r.smoothness_outside {
        for c in &s.checks {
            outln!("  smoothness {} [{}]: {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.evidence);
        }
    }
    for c in &r.c2_structure {
        let ok = c.report.checks.iter().all(|k| k.passed);
        outln!("  locus {} on U({},{}): {}", c.locus, c.chart.i, c.chart.j, if ok { "ok" } else { "FAIL" });
    }
    for c in &r.census {
        let counts: Vec<String> = c
            .scans
            .iter()
            .map(|s| format!("{}: {}/{}/{}", s.field, s.counts.nondegenerate, s.counts.almost, s.counts.degenerate))
            .collect();
        outln!("  census U({},{}) nondeg/almost/degenerate {}", c.chart.i, c.chart.j, counts.join(", "));
    }
    for i in &r.incomplete {
        outln!("  incomplete: {i}");
    }
    for f in &r.failures {
        outln!("  failure: {f}");
    }
    Ok(())
}

fn cmd_pipeline(mut args: PipelineArgs, cfg: &Option<Value>, json: bool) -> anyhow::Result<u8> {
    let c: PipelineArgs = section(cfg, "pipeline")?;
    args.family.merge(c.family);
    if args.seed.is_none() && args.seeds.is_none() {
        args.seed = c.seed;
        args.seeds = c.seeds;
    }
    merge!(args, c, field, out, max_attempts, budget, sabotage);
    let params = args.family.family()?;
    let field = parse_field(&args.field)?;
    let mut opts = PipelineOptions::default();
    if let Some(k) = args.max_attempts {
        opts.max_attempts = k;
    }
    if let Some(b) = args.budget {
        opts.budget = b;
        opts.locus.budget = b;
    }
    if let Some(s) = &args.sabotage {
        let s: Sabotage =
            serde_json::from_value(Value::String(s.clone())).map_err(|_| usage(format!("unknown sabotage `{s}`")))?;
        opts.sabotage = Some(s);
    }
    let seeds = match (args.seed, args.seeds) {
        (Some(s), _) => vec![s],
        (None, Some(v)) if !v.is_empty() => v,
        _ => vec![0],
    };
    let mut reports = Vec::new();
    for seed in seeds {
        let r = run_pipeline(&params, &field, seed, &opts)?;
        if json {
            print_json(&r)?;
        } else {
            print_pipeline(&r)?;
        }
        reports.push(r);
    }
    // Failed outranks PartialEvidence
    let worst = reports
        .iter()
        .map(|r| overall_code(r.overall))
        .max_by_key(|&c| match c {
            0 => 0,
            EXIT_PARTIAL => 1,
            _ => 2,
        })
        .unwrap_or(0);
    if let Some(path) = &args.out {
        let text = match reports.as_slice() {
            [one] => serde_json::to_string_pretty(one)?,
            many => many.iter().map(serde_json::to_string).collect::<Result<Vec<_>, _>>()?.join("\n"),
        };
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(worst)
}

fn cmd_selftest(mut args: SelftestArgs, cfg: &Option<Value>, json: bool) -> anyhow::Result<u8> {
    let c: SelftestArgs = section(cfg, "selftest")?;
    merge!(args, c, only);
    let ids: Vec<u32> = match args.only {
        Some(v) => v,
        None => selftest::CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut all_ok = true;
    for id in ids {
        let r = selftest::run_criterion(id).ok_or_else(|| usage(format!("no criterion {id}")))?;
        all_ok &= r.passed;
        if json {
            print_json(&r)?;
        } else {
            outln!("{}", r.line());
        }
    }
    Ok(if all_ok { 0 } else { EXIT_FAILED })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    if let Some(io) = e.downcast_ref::<std::io::Error>() {
        // a closed pipe downstream is not an error of ours
        return if io.kind() == std::io::ErrorKind::BrokenPipe { 0 } else { EXIT_IO };
    }
    match e.downcast_ref::<Error>() {
        Some(Error::NotApplicable(_)) => EXIT_NOT_APPLICABLE,
        Some(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
        Some(Error::RetriesExhausted { .. }) => EXIT_FAILED,
        Some(Error::Inconsistent(_)) => EXIT_INTERNAL,
        Some(_) => EXIT_USAGE,
        None => EXIT_INTERNAL,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.parse().map_err(|_| usage(format!("{THREADS_VAR}={v} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    configure_threads()?;
    let cfg = load_config(&cli.config)?;
    let json = cli.json;
    match cli.command {
        Command::Classify(a) => cmd_classify(a, &cfg, json),
        Command::Enumerate(a) => cmd_enumerate(a, &cfg, json),
        Command::Basis(a) => cmd_basis(a, &cfg, json),
        Command::Crit(a) => cmd_crit(a, &cfg, json),
        Command::Restrict(a) => cmd_restrict(a, &cfg, json),
        Command::Pipeline(a) => cmd_pipeline(a, &cfg, json),
        Command::Selftest(a) => cmd_selftest(a, &cfg, json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
