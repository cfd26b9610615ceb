//! Command-line front end: `indexes`, `certify`, `scan`, `catalog`.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::certificate::{certify_minimum, Certificate, CertifyOptions};
use crate::configurations::{catalog, default_witnesses, resolve, Configuration, CATALOG};
use crate::design_analysis::{index_sums, IndexReport, DEFAULT_INDEX_TOL};
use crate::error::{Error, Result};
use crate::json;
use crate::potentials::PotentialSpec;
use crate::sphere_search::{scan, ScanBudget, ScanOptions, ScanResult};

pub const REPORT_SCHEMA: &str = "spherepot.report/1";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spherepot", version, about = "Certified minima of potentials of spherical configurations")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Leave wall time out of reports so that output is byte-reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalized Gegenbauer pair sums, index set and design strength.
    Indexes(IndexesArgs),
    /// Polynomial certificate for the minimum of a potential.
    Certify(CertifyArgs),
    /// Multistart search for the minimum of a potential.
    Scan(ScanArgs),
    /// Built-in configurations.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Debug, Args)]
pub struct IndexesArgs {
    /// Catalog name or point file.
    pub config: String,
    #[arg(long, default_value_t = 20)]
    pub nmax: usize,
    #[arg(long, default_value_t = DEFAULT_INDEX_TOL)]
    pub tol: f64,
    /// e.g. `strength=5,nontrivial=8,14`; non-trivial indexes listed must be present.
    #[arg(long)]
    pub expect: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub config: String,
    /// `riesz:s=1`, `log`, `gauss:sigma=1`, `poly:c0,c1,...`
    #[arg(long)]
    pub potential: String,
    /// Defaults to the known minimizers of catalog configurations.
    #[arg(long)]
    pub witnesses: Option<String>,
    #[arg(long, default_value_t = CertifyOptions::default().witness_tol)]
    pub witness_tol: f64,
    #[arg(long, default_value_t = DEFAULT_INDEX_TOL)]
    pub index_tol: f64,
    #[arg(long, default_value_t = CertifyOptions::default().lower_bound_grid)]
    pub sweep: usize,
    #[arg(long, default_value_t = CertifyOptions::default().identity_samples)]
    pub identity_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub identity_seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub config: String,
    #[arg(long)]
    pub potential: String,
    #[arg(long)]
    pub witnesses: Option<String>,
    #[arg(long, default_value_t = ScanBudget::default().grid)]
    pub grid: usize,
    #[arg(long, default_value_t = ScanBudget::default().restarts)]
    pub restarts: usize,
    #[arg(long, default_value_t = ScanBudget::default().max_iter)]
    pub max_iter: usize,
    #[arg(long, default_value_t = ScanOptions::default().rng_seed)]
    pub rng_seed: u64,
    #[arg(long, default_value_t = ScanOptions::default().gtol)]
    pub gtol: f64,
    #[arg(long, default_value_t = ScanOptions::default().value_tol)]
    pub value_tol: f64,
    #[arg(long, default_value_t = ScanOptions::default().cluster_radius)]
    pub cluster_radius: f64,
    #[arg(long, default_value_t = ScanOptions::default().match_radius)]
    pub match_radius: f64,
    /// Allowed shortfall of the best value below the certified minimum,
    /// relative to `1 + |certified_min|`.
    #[arg(long, default_value_t = 1e-8)]
    pub soundness_tol: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// Names of the built-in configurations.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Write a configuration in the point-file format.
    Dump {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Output {
    Indexes(IndexReport),
    Certificate(Box<Certificate>),
    Scan(Box<ScanOutput>),
    Catalog(Vec<CatalogEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutput {
    pub scan: ScanResult,
    /// Certificate minimum when the witnesses admit one.
    pub certified_min: Option<f64>,
    pub certificate_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub d: usize,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    pub inputs: serde_json::Map<String, serde_json::Value>,
    pub outputs: Option<Output>,
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            command: command.to_string(),
            inputs: serde_json::Map::new(),
            outputs: None,
            error: None,
            checks: Vec::new(),
            pass: false,
            exit_code: EXIT_PASS,
            wall_time_s: None,
        }
    }

    fn input(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.inputs.insert(key.to_string(), v);
    }

    fn finish(&mut self) {
        self.pass = self.error.is_none() && self.checks.iter().all(|c| c.pass);
        if self.error.is_none() {
            self.exit_code = if self.pass { EXIT_PASS } else { EXIT_MISMATCH };
        }
    }

    fn fail(&mut self, e: &Error) {
        self.error = Some(e.to_string());
        self.exit_code = e.exit_code();
        self.pass = false;
    }
}

/// Parses `strength=5,nontrivial=8,14`: a bare number continues the
/// previous key's list.
pub fn parse_expect(spec: &str) -> std::result::Result<(Option<usize>, Vec<usize>), String> {
    let (mut strength, mut nontrivial) = (None, Vec::new());
    let mut key = "";
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let val = match tok.split_once('=') {
            Some((k, v)) => {
                key = k.trim();
                v.trim()
            }
            None => tok,
        };
        let n: usize = val.parse().map_err(|_| format!("`{val}` is not a non-negative integer"))?;
        match key {
            "strength" if strength.is_none() => strength = Some(n),
            "strength" => return Err("strength takes a single value".into()),
            "nontrivial" => nontrivial.push(n),
            "" => return Err(format!("`{tok}` has no key")),
            other => return Err(format!("unknown key `{other}` (expected strength or nontrivial)")),
        }
    }
    Ok((strength, nontrivial))
}

fn fmt_set(v: &[usize]) -> String {
    let s: Vec<String> = v.iter().map(|n| n.to_string()).collect();
    format!("{{{}}}", s.join(", "))
}

fn witnesses_for(config_arg: &str, explicit: Option<&str>) -> Result<Option<Configuration>> {
    match explicit {
        Some(w) => resolve(w).map(Some),
        None => Ok(default_witnesses(config_arg)),
    }
}

fn parse_potential(s: &str) -> Result<PotentialSpec> {
    s.parse()
}

pub fn cmd_indexes(args: &IndexesArgs) -> RunReport {
    let mut r = RunReport::new("indexes");
    r.input("config", &args.config);
    r.input("nmax", args.nmax);
    r.input("tol", args.tol);
    r.input("expect", &args.expect);
    let expect = match args.expect.as_deref().map(parse_expect).transpose() {
        Ok(e) => e,
        Err(msg) => {
            r.error = Some(format!("invalid --expect: {msg}"));
            r.exit_code = EXIT_USAGE;
            return r;
        }
    };
    let c = match resolve(&args.config) {
        Ok(c) => c,
        Err(e) => {
            r.fail(&e);
            return r;
        }
    };
    r.input("label", c.label());
    r.input("d", c.d());
    r.input("n_points", c.len());
    let rep = index_sums(&c, args.nmax, args.tol);
    if let Some((strength, nontrivial)) = expect {
        if let Some(s) = strength {
            r.checks.push(Check::new(
                "strength",
                rep.strength == s,
                format!("expected {s}, found {}", rep.strength),
            ));
        }
        if !nontrivial.is_empty() {
            let missing: Vec<usize> = nontrivial.iter().copied().filter(|n| !rep.nontrivial.contains(n)).collect();
            r.checks.push(Check::new(
                "nontrivial",
                missing.is_empty(),
                format!(
                    "expected {} among {}, missing {}",
                    fmt_set(&nontrivial),
                    fmt_set(&rep.nontrivial),
                    fmt_set(&missing)
                ),
            ));
        }
    }
    r.outputs = Some(Output::Indexes(rep));
    r.finish();
    r
}

pub fn cmd_certify(args: &CertifyArgs) -> RunReport {
    let mut r = RunReport::new("certify");
    r.input("config", &args.config);
    r.input("potential", &args.potential);
    r.input("witnesses", &args.witnesses);
    let opts = CertifyOptions {
        witness_tol: args.witness_tol,
        index_tol: args.index_tol,
        lower_bound_grid: args.sweep,
        identity_samples: args.identity_samples,
        identity_seed: args.identity_seed,
        ..Default::default()
    };
    r.input("options", opts);
    let run = || -> Result<Certificate> {
        let c = resolve(&args.config)?;
        let f = parse_potential(&args.potential)?;
        let w = witnesses_for(&args.config, args.witnesses.as_deref())?
            .ok_or_else(|| Error::UnknownConfiguration(format!("no default witnesses for `{}`; pass --witnesses", args.config)))?;
        certify_minimum(&c, &f, &w, &opts)
    };
    match run() {
        Ok(cert) => {
            r.checks.push(Check::new(
                "certificate",
                cert.valid,
                format!("certified_min = {:.17e}", cert.certified_min),
            ));
            r.outputs = Some(Output::Certificate(Box::new(cert)));
            r.finish();
        }
        Err(e) => r.fail(&e),
    }
    r
}

pub fn cmd_scan(args: &ScanArgs) -> RunReport {
    let mut r = RunReport::new("scan");
    r.input("config", &args.config);
    r.input("potential", &args.potential);
    r.input("witnesses", &args.witnesses);
    let opts = ScanOptions {
        budget: ScanBudget {
            grid: args.grid,
            restarts: args.restarts,
            max_iter: args.max_iter,
        },
        rng_seed: args.rng_seed,
        gtol: args.gtol,
        value_tol: args.value_tol,
        cluster_radius: args.cluster_radius,
        match_radius: args.match_radius,
        ..Default::default()
    };
    r.input("options", opts);
    r.input("soundness_tol", args.soundness_tol);
    if opts.budget.max_iter == 0 || (args.grid == 0 && args.restarts == 0) {
        r.error = Some("scan budget must be positive".into());
        r.exit_code = EXIT_USAGE;
        return r;
    }
    let setup = || -> Result<(Configuration, PotentialSpec, Option<Configuration>)> {
        Ok((
            resolve(&args.config)?,
            parse_potential(&args.potential)?,
            witnesses_for(&args.config, args.witnesses.as_deref())?,
        ))
    };
    let (c, f, w) = match setup() {
        Ok(x) => x,
        Err(e) => {
            r.fail(&e);
            return r;
        }
    };
    let needed = if c.d() == 2 { args.grid } else { args.restarts };
    if needed == 0 {
        r.error = Some(format!(
            "scan budget must be positive (--{} is 0)",
            if c.d() == 2 { "grid" } else { "restarts" }
        ));
        r.exit_code = EXIT_USAGE;
        return r;
    }

    let res = scan(&c, &f, w.as_ref(), &opts);
    let (certified_min, certificate_error) = match &w {
        Some(w) => match certify_minimum(&c, &f, w, &CertifyOptions::default()) {
            Ok(cert) if cert.valid => (Some(cert.certified_min), None),
            Ok(_) => (None, Some("certificate residuals fail".to_string())),
            Err(e) => (None, Some(e.to_string())),
        },
        None => (None, None),
    };

    if w.is_some() {
        r.checks.push(Check::new(
            "matched",
            res.matched,
            format!(
                "{} cluster(s), {} unmatched, max witness distance {:e}",
                res.cluster_reps.len(),
                res.unmatched_clusters,
                res.max_witness_distance
            ),
        ));
    }
    if let Some(cm) = certified_min {
        let floor = cm - args.soundness_tol * (1.0 + cm.abs());
        r.checks.push(Check::new(
            "soundness",
            res.best_value >= floor,
            format!("best {:.17e} vs certified {:.17e}", res.best_value, cm),
        ));
    }
    if !res.flat {
        r.checks.push(Check::new(
            "stationarity",
            res.max_rep_grad_norm < opts.converged_grad,
            format!("max gradient norm at cluster representatives {:e}", res.max_rep_grad_norm),
        ));
    }
    r.outputs = Some(Output::Scan(Box::new(ScanOutput {
        scan: res,
        certified_min,
        certificate_error,
    })));
    r.finish();
    if w.is_none() && r.checks.is_empty() {
        // Nothing to compare against; the run itself succeeded.
        r.pass = true;
        r.exit_code = EXIT_PASS;
    }
    r
}

fn catalog_entries() -> Vec<CatalogEntry> {
    CATALOG
        .iter()
        .map(|&name| {
            let c = catalog(name).expect("catalog name");
            CatalogEntry {
                name: name.to_string(),
                d: c.d(),
                n_points: c.len(),
            }
        })
        .collect()
}

fn render_indexes(rep: &IndexReport) -> String {
    let mut s = format!("{} (d = {}, N = {})\n", rep.label, rep.d, rep.n_points);
    s.push_str(&format!("{:>4}  {:>24}  zero\n", "n", "S_n"));
    for is in &rep.sums {
        s.push_str(&format!(
            "{:>4}  {:>24.16e}  {}\n",
            is.n,
            is.value,
            if rep.contains(is.n) { "yes" } else { "" }
        ));
    }
    s.push_str(&format!("strength: {}\n", rep.strength));
    s.push_str(&format!("non-trivial indexes: {}\n", fmt_set(&rep.nontrivial)));
    s
}

fn render_certificate(c: &Certificate) -> String {
    let mut s = format!(
        "{} / {} / witnesses {} ({} points)\n",
        c.config, c.potential, c.witness.label, c.witness.count
    );
    s.push_str(&format!("m = {}, nodes = {:?}\n", c.m, c.nodes));
    s.push_str(&format!("node conditions: {} ({})\n", c.node_conditions.pass, c.node_conditions.summary()));
    s.push_str(&format!("mu0 = {:e}, mu1 = {:e}\n", c.mu0, c.mu1));
    s.push_str(&format!("certified min   = {:.17e}\n", c.certified_min));
    s.push_str(&format!("witness value   = {:.17e}\n", c.witness.value));
    let res = &c.residuals;
    s.push_str(&format!(
        "residuals: ortho {:e}, interp {:e}, skipped coeff {:e}, lower bound {:e}, identity {:e}\n",
        res.ortho, res.interp, res.skipped_coeff, res.lower_bound.min_gap, res.constant_identity
    ));
    for n in &c.notes {
        s.push_str(&format!("note: {n}\n"));
    }
    s.push_str(if c.valid { "VALID\n" } else { "INVALID\n" });
    s
}

fn render_scan(o: &ScanOutput) -> String {
    let r = &o.scan;
    let mut s = format!("{} / {}: {} seeds, {} iterations\n", r.label, r.potential, r.seeds, r.total_iterations);
    s.push_str(&format!("best value      = {:.17e}\n", r.best_value));
    if let Some(cm) = o.certified_min {
        s.push_str(&format!("certified min   = {cm:.17e}\n"));
    }
    if let Some(e) = &o.certificate_error {
        s.push_str(&format!("certificate: {e}\n"));
    }
    if r.flat {
        s.push_str("flat potential: every point is a minimizer\n");
    } else {
        s.push_str(&format!(
            "{} near-best minimizers in {} clusters; {} unmatched\n",
            r.near_best,
            r.cluster_reps.len(),
            r.unmatched_clusters
        ));
    }
    s
}

/// Renders the report: JSON, or a plain summary.
pub fn render(r: &RunReport, as_json: bool) -> Result<String> {
    if as_json {
        return json::to_string(r).map(|s| s + "\n");
    }
    let mut s = match &r.outputs {
        Some(Output::Indexes(rep)) => render_indexes(rep),
        Some(Output::Certificate(c)) => render_certificate(c),
        Some(Output::Scan(o)) => render_scan(o),
        Some(Output::Catalog(v)) => v
            .iter()
            .map(|e| format!("{:<14} d = {}  N = {}\n", e.name, e.d, e.n_points))
            .collect(),
        None => String::new(),
    };
    for c in &r.checks {
        s.push_str(&format!("[{}] {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    if let Some(t) = r.wall_time_s {
        s.push_str(&format!("wall time {t:.3} s\n"));
    }
    Ok(s)
}

/// Runs the parsed command line; returns the text for stdout, the text for
/// stderr, and the exit code.
pub fn run(cli: &Cli) -> (String, String, i32) {
    if let Some(n) = cli.threads {
        if n == 0 {
            return (String::new(), "--threads must be at least 1\n".into(), EXIT_USAGE);
        }
        // Fails only if the pool already exists, e.g. on a second call in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let (mut report, as_json) = match &cli.command {
        Command::Indexes(a) => (cmd_indexes(a), a.json),
        Command::Certify(a) => (cmd_certify(a), a.json),
        Command::Scan(a) => (cmd_scan(a), a.json),
        Command::Catalog(CatalogCommand::List { json }) => {
            let mut r = RunReport::new("catalog list");
            r.outputs = Some(Output::Catalog(catalog_entries()));
            r.finish();
            (r, *json)
        }
        Command::Catalog(CatalogCommand::Dump { name, output }) => {
            return match catalog(name) {
                None => (String::new(), format!("error: {}\n", Error::UnknownConfiguration(name.clone())), EXIT_USAGE),
                Some(c) => match output {
                    None => (c.to_text(), String::new(), EXIT_PASS),
                    Some(p) => match c.save(p) {
                        Ok(()) => (String::new(), String::new(), EXIT_PASS),
                        Err(e) => (String::new(), format!("error: {e}\n"), e.exit_code()),
                    },
                },
            };
        }
    };
    if !cli.no_timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let err = report.error.as_ref().map(|e| format!("error: {e}\n")).unwrap_or_default();
    match render(&report, as_json) {
        Ok(out) => (out, err, report.exit_code),
        Err(e) => (String::new(), format!("error: {e}\n"), EXIT_NUMERICAL),
    }
}
