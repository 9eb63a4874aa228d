//! Scenario runner for the juntalab verifiers and extractors.
//!
//! Every subcommand builds a space and a function from compact descriptors,
//! runs the requested checks, and prints a delimited report with the header
//! `check,left,right,slack,pass`, one row per check. Values print in fixed
//! 12-digit scientific notation, so a fixed scenario and seed produce
//! byte-identical reports on every run. Exit status: 0 when all checks pass
//! (or an extraction succeeds), 1 when a check fails or an extraction gives
//! up, 2 for configuration problems, 3 when a scenario exceeds its state
//! budget.

use std::env;
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use juntalab::continuous::{
    self, FastPath, GridSet, LineModel, Monotonicity, ProductLineSpace, SmoothFn,
};
use juntalab::error::{Error, FailedExtraction};
use juntalab::functions;
use juntalab::influence;
use juntalab::junta::{self, ErrorNorm};
use juntalab::report::TwoSidedReport;
use juntalab::semigroup::{self, Generator, LsiMethod};
use juntalab::slice;
use juntalab::spaces::{self, MarkovSpace, SpaceKind};
use juntalab::tolerances;

const REPORT_HEADER: &str = "check,left,right,slack,pass";
const SWEEP_POINT_BUDGET: usize = 10_000;

// ---------------------------------------------------------------------------
// outcome and error plumbing
// ---------------------------------------------------------------------------

enum CliError {
    /// Configuration problems: bad flags, bad descriptors, parse errors.
    Usage(String),
    /// A scenario larger than the state budget allows.
    Capacity(String),
    /// A well-posed run whose result is negative (extraction gave up).
    Failed(String),
}

type CliResult<T> = Result<T, CliError>;

fn core_err(e: Error) -> CliError {
    match e {
        Error::BudgetExceeded { needed, budget } => {
            CliError::Capacity(format!("needs {needed} states, budget is {budget}"))
        }
        Error::ExtractionFailed(fe) => CliError::Failed(render_failed(&fe)),
        other => CliError::Usage(other.to_string()),
    }
}

fn render_failed(fe: &FailedExtraction) -> String {
    let kept: Vec<String> = fe.kept_set.iter().map(|i| (i + 1).to_string()).collect();
    format!(
        "extraction_failed=true\nbest_kept_set={}\nmeasured_error={:.12e}\ntarget={:.12e}\nretries={}\n",
        if kept.is_empty() {
            "-".into()
        } else {
            kept.join(",")
        },
        fe.measured,
        fe.target,
        fe.retries
    )
}

struct Outcome {
    text: String,
    all_pass: bool,
    out_path: Option<String>,
}

impl Outcome {
    fn finish(self) -> ExitCode {
        print!("{}", self.text);
        if let Some(path) = &self.out_path {
            if let Err(e) = fs::write(path, &self.text) {
                eprintln!("cannot write {path}: {e}");
                return ExitCode::from(2);
            }
        }
        if self.all_pass {
            ExitCode::from(0)
        } else {
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(outcome) => outcome.finish(),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `juntalab help` for usage");
            ExitCode::from(2)
        }
        Err(CliError::Capacity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Failed(text)) => {
            print!("{text}");
            ExitCode::from(1)
        }
    }
}

// ---------------------------------------------------------------------------
// flag and config parsing
// ---------------------------------------------------------------------------

/// Flags in command-line order; repeated keys are kept (needed for --grid).
struct Flags {
    entries: Vec<(String, String)>,
}

impl Flags {
    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    fn f64exp(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(v, key),
        }
    }

    fn f64opt(&self, key: &str) -> CliResult<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_f64(v, key).map(Some),
        }
    }

    fn usize_exp(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_usize(v, key),
        }
    }

    fn u64exp(&self, key: &str, default: u64) -> CliResult<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| {
                CliError::Usage(format!("--{key}: expected an integer, got '{v}'"))
            }),
        }
    }
}

fn parse_f64(v: &str, key: &str) -> CliResult<f64> {
    v.parse::<f64>()
        .map_err(|_| CliError::Usage(format!("--{key}: expected a number, got '{v}'")))
}

fn parse_usize(v: &str, key: &str) -> CliResult<usize> {
    v.parse::<usize>()
        .map_err(|_| CliError::Usage(format!("--{key}: expected an integer, got '{v}'")))
}

/// Parse `--key value` / `--key=value` pairs, then merge config-file entries
/// underneath them (explicit flags win).
fn parse_flags(args: &[String], allowed: &[&str]) -> CliResult<Flags> {
    let mut entries = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let Some(stripped) = arg.strip_prefix("--") else {
            return Err(CliError::Usage(format!(
                "expected a --flag, got '{arg}' (argument {})",
                i + 1
            )));
        };
        let (key, value) = if let Some((k, v)) = stripped.split_once('=') {
            (k.to_string(), v.to_string())
        } else {
            let Some(v) = args.get(i + 1) else {
                return Err(CliError::Usage(format!("--{stripped} is missing its value")));
            };
            i += 1;
            (stripped.to_string(), v.clone())
        };
        if !allowed.contains(&key.as_str()) && key != "config" {
            return Err(CliError::Usage(format!(
                "unknown flag --{key}; this subcommand accepts: {}",
                allowed
                    .iter()
                    .map(|a| format!("--{a}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        entries.push((key, value));
        i += 1;
    }
    if let Some(idx) = entries.iter().position(|(k, _)| k == "config") {
        let path = entries[idx].1.clone();
        let from_file = load_config(&path, allowed)?;
        // file entries sit underneath explicit flags
        let mut merged = from_file;
        merged.extend(entries.into_iter().filter(|(k, _)| k != "config"));
        entries = merged;
    }
    Ok(Flags { entries })
}

/// Flat key=value config with section headers. `[scenario]` keys map to
/// flags of the same name, `[grid]` lines append sweep axes, `[output]`
/// holds `out=`.
fn load_config(path: &str, allowed: &[&str]) -> CliResult<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{path}: cannot read config: {e}")))?;
    let mut entries = Vec::new();
    let mut section = String::from("scenario");
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let loc = format!("{path}:{}", lineno + 1);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            match name {
                "scenario" | "grid" | "output" => section = name.to_string(),
                other => {
                    return Err(CliError::Usage(format!(
                        "{loc}: unknown section [{other}] (expected [scenario], [grid], or [output])"
                    )))
                }
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{loc}: expected key=value, got '{line}'")));
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        match section.as_str() {
            "grid" => entries.push(("grid".to_string(), format!("{key}={value}"))),
            "output" => {
                if key != "out" {
                    return Err(CliError::Usage(format!(
                        "{loc}: [output] understands only out=, got '{key}'"
                    )));
                }
                entries.push((key, value));
            }
            _ => {
                if !allowed.contains(&key.as_str()) {
                    return Err(CliError::Usage(format!(
                        "{loc}: '{key}' is not a flag of this subcommand"
                    )));
                }
                entries.push((key, value));
            }
        }
    }
    Ok(entries)
}

// ---------------------------------------------------------------------------
// descriptors
// ---------------------------------------------------------------------------

/// `kind:key=value,key=value` with an optional parameter block.
#[derive(Clone)]
struct Descriptor {
    kind: String,
    params: Vec<(String, String)>,
}

impl Descriptor {
    fn parse(text: &str, what: &str) -> CliResult<Descriptor> {
        let (kind, rest) = match text.split_once(':') {
            Some((k, r)) => (k, r),
            None => (text, ""),
        };
        if kind.is_empty() {
            return Err(CliError::Usage(format!("{what} '{text}': empty kind")));
        }
        let mut params = Vec::new();
        if !rest.is_empty() {
            // a path parameter may contain '=' and ','; treat file specially
            if kind == "file" {
                params.push(("path".to_string(), rest.to_string()));
            } else {
                for piece in rest.split(',') {
                    let Some((k, v)) = piece.split_once('=') else {
                        return Err(CliError::Usage(format!(
                            "{what} '{text}': expected key=value, got '{piece}'"
                        )));
                    };
                    params.push((k.to_string(), v.to_string()));
                }
            }
        }
        Ok(Descriptor {
            kind: kind.to_string(),
            params,
        })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn set(&mut self, key: &str, value: &str) {
        if let Some(slot) = self.params.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value.to_string();
        } else {
            self.params.push((key.to_string(), value.to_string()));
        }
    }

    fn f64req(&self, key: &str, what: &str) -> CliResult<f64> {
        let v = self.get(key).ok_or_else(|| {
            CliError::Usage(format!("{what} '{}' needs {key}=", self.kind))
        })?;
        parse_f64(v, key)
    }

    fn f64or(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(v, key),
        }
    }

    fn usize_req(&self, key: &str, what: &str) -> CliResult<usize> {
        let v = self.get(key).ok_or_else(|| {
            CliError::Usage(format!("{what} '{}' needs {key}=", self.kind))
        })?;
        parse_usize(v, key)
    }

    fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_usize(v, key),
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// State count a space descriptor will materialize, before building it.
fn projected_states(desc: &Descriptor) -> CliResult<u128> {
    Ok(match desc.kind.as_str() {
        "cube" => 1u128 << desc.usize_req("n", "space").map(|n| n.min(127))?,
        "torus" => {
            let n = desc.usize_req("n", "space")?;
            let m = desc.usize_req("m", "space")?;
            (m as u128).checked_pow(n.min(127) as u32).unwrap_or(u128::MAX)
        }
        "slice" => {
            let n = desc.usize_req("n", "space")?;
            let k = desc.usize_req("k", "space")?;
            spaces::binomial(n, k)
        }
        "symmetric" => factorial(desc.usize_req("n", "space")?.min(34)),
        other => {
            return Err(CliError::Usage(format!(
                "unknown space kind '{other}' (expected cube, torus, slice, or symmetric)"
            )))
        }
    })
}

fn build_space(desc: &Descriptor, budget: usize) -> CliResult<MarkovSpace> {
    let needed = projected_states(desc)?;
    if needed > budget as u128 {
        return Err(CliError::Capacity(format!(
            "space '{}' needs {needed} states, budget is {budget}",
            desc.kind
        )));
    }
    let space = match desc.kind.as_str() {
        "cube" => {
            let n = desc.usize_req("n", "space")?;
            let p = desc.f64or("p", 0.5)?;
            spaces::build_biased_cube(n, p)
        }
        "torus" => {
            let n = desc.usize_req("n", "space")?;
            let m = desc.usize_req("m", "space")?;
            spaces::build_torus(n, m)
        }
        "slice" => {
            let n = desc.usize_req("n", "space")?;
            let k = desc.usize_req("k", "space")?;
            spaces::build_slice(n, k)
        }
        "symmetric" => {
            let n = desc.usize_req("n", "space")?;
            spaces::build_symmetric_group(n)
        }
        _ => unreachable!("projected_states validated the kind"),
    };
    space.map_err(core_err)
}

fn read_values_file(path: &str, expected: usize) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{path}: cannot read values: {e}")))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::Usage(format!("{path}:{}: expected a number, got '{line}'", lineno + 1))
        })?;
        out.push(v);
    }
    if out.len() != expected {
        return Err(CliError::Usage(format!(
            "{path}: {} values for a space of {expected} states",
            out.len()
        )));
    }
    Ok(out)
}

/// Built-in function families plus values files.
fn build_function(space: &MarkovSpace, text: &str, seed: u64) -> CliResult<Vec<f64>> {
    let desc = Descriptor::parse(text, "function")?;
    let table = match desc.kind.as_str() {
        "dictator" => functions::dictator(space).map_err(core_err)?,
        "majority" => functions::majority(space).map_err(core_err)?,
        "parity" => functions::parity(space).map_err(core_err)?,
        "tribes" => functions::tribes(space).map_err(core_err)?,
        "random" => {
            let s = desc
                .get("seed")
                .map(|v| {
                    v.parse::<u64>().map_err(|_| {
                        CliError::Usage(format!("function seed: expected an integer, got '{v}'"))
                    })
                })
                .transpose()?
                .unwrap_or(seed);
            functions::random_table(space, s)
        }
        "planted-junta" => {
            let k = desc.usize_req("k", "function")?;
            let noise = desc.f64or("noise", 0.0)?;
            let s = desc
                .get("seed")
                .map(|v| {
                    v.parse::<u64>().map_err(|_| {
                        CliError::Usage(format!("function seed: expected an integer, got '{v}'"))
                    })
                })
                .transpose()?
                .unwrap_or(seed);
            functions::planted_junta(space, k, noise, s)
                .map_err(core_err)?
                .0
        }
        "file" => {
            let path = desc.get("path").expect("file descriptor keeps its path");
            read_values_file(path, space.n_states)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown function '{other}' (expected dictator, majority, parity, tribes, \
                 random[:seed=..], planted-junta:k=..[,noise=..][,seed=..], or file:PATH)"
            )))
        }
    };
    Ok(table)
}

// ---------------------------------------------------------------------------
// report assembly
// ---------------------------------------------------------------------------

struct Report {
    rows: Vec<String>,
    comments: Vec<String>,
    failures: usize,
    total: usize,
    tol_override: Option<f64>,
}

impl Report {
    fn new(tol_override: Option<f64>) -> Self {
        Report {
            rows: Vec::new(),
            comments: Vec::new(),
            failures: 0,
            total: 0,
            tol_override,
        }
    }

    fn push(&mut self, mut rep: TwoSidedReport) {
        if let Some(tol) = self.tol_override {
            rep.tolerance = tol;
        }
        self.total += 1;
        if !rep.pass() {
            self.failures += 1;
        }
        self.rows.push(rep.render_row());
    }

    fn push_row(&mut self, name: &str, left: f64, right: f64, slack: f64, pass: bool) {
        self.total += 1;
        if !pass {
            self.failures += 1;
        }
        self.rows.push(format!(
            "{name},{left:.12e},{right:.12e},{slack:.12e},{pass}"
        ));
    }

    fn comment(&mut self, text: String) {
        self.comments.push(format!("# {text}"));
    }

    fn render(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        for c in &self.comments {
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&format!(
            "# summary: {} passed, {} failed\n",
            self.total - self.failures,
            self.failures
        ));
        out
    }

    fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

/// Insert a sweep-point suffix into a rendered row's check name.
fn suffix_row(row: &str, suffix: &str) -> String {
    match row.split_once(',') {
        Some((name, rest)) => format!("{name}[{suffix}],{rest}"),
        None => row.to_string(),
    }
}

// ---------------------------------------------------------------------------
// discrete scenario runner
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct Scenario {
    space: Descriptor,
    func: Option<String>,
    checks: Vec<String>,
    t: f64,
    eta: f64,
    q: f64,
    rho: Option<f64>,
    seed: u64,
    budget: usize,
    tol: Option<f64>,
}

fn scenario_from_flags(flags: &Flags, need_space: bool) -> CliResult<Scenario> {
    let space_text = match flags.get("space") {
        Some(s) => s.to_string(),
        None if need_space => return Err(CliError::Usage("--space is required".into())),
        None => String::from("cube:n=1"),
    };
    let checks: Vec<String> = flags
        .get("check")
        .map(|s| {
            s.split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect()
        })
        .unwrap_or_default();
    Ok(Scenario {
        space: Descriptor::parse(&space_text, "space")?,
        func: flags.get("fn").map(|s| s.to_string()),
        checks,
        t: flags.f64exp("t", 0.25)?,
        eta: flags.f64exp("eta", 0.1)?,
        q: flags.f64exp("q", 3.0)?,
        rho: flags.f64opt("rho")?,
        seed: flags.u64exp("seed", 0)?,
        budget: flags.usize_exp("budget-states", tolerances::STATE_BUDGET)?,
        tol: flags.f64opt("tol")?,
    })
}

fn gap_reference(space: &MarkovSpace) -> Option<f64> {
    match space.kind {
        SpaceKind::Cube { .. } | SpaceKind::Product { .. } => Some(1.0),
        SpaceKind::Torus { m, .. } => {
            Some((1.0 - (2.0 * std::f64::consts::PI / m as f64).cos()) / 2.0)
        }
        SpaceKind::Slice { n, .. } => Some(2.0 / (n as f64 - 1.0)),
        SpaceKind::Symmetric { .. } => None,
    }
}

/// All verify-style checks on a discrete space. Functions are built lazily
/// so purely spectral checks need no --fn.
fn run_discrete_checks(scenario: &Scenario) -> CliResult<Report> {
    if scenario.checks.is_empty() {
        return Err(CliError::Usage("no checks requested".into()));
    }
    let space = build_space(&scenario.space, scenario.budget)?;
    let gen = semigroup::generator(&space);
    let mut table: Option<Vec<f64>> = None;
    let mut report = Report::new(scenario.tol);
    for check in &scenario.checks {
        run_one_check(scenario, &space, &gen, check, &mut table, &mut report)?;
    }
    Ok(report)
}

fn need_fn<'a>(
    scenario: &Scenario,
    space: &MarkovSpace,
    table: &'a mut Option<Vec<f64>>,
    check: &str,
) -> CliResult<&'a Vec<f64>> {
    if table.is_none() {
        let Some(func) = &scenario.func else {
            return Err(CliError::Usage(format!("check '{check}' needs --fn")));
        };
        *table = Some(build_function(space, func, scenario.seed)?);
    }
    Ok(table.as_ref().expect("just filled"))
}

fn resolve_rho(scenario: &Scenario, gen: &Generator) -> CliResult<f64> {
    match scenario.rho {
        Some(r) if r > 0.0 && r.is_finite() => Ok(r),
        Some(r) => Err(CliError::Usage(format!(
            "--rho must be positive and finite, got {r}"
        ))),
        None => semigroup::certified_lsi_floor(gen).map_err(core_err),
    }
}

fn run_one_check(
    scenario: &Scenario,
    space: &MarkovSpace,
    gen: &Generator,
    check: &str,
    table: &mut Option<Vec<f64>>,
    report: &mut Report,
) -> CliResult<()> {
    match check {
        "spectral-gap" => {
            let measured = semigroup::spectral_gap(gen).map_err(core_err)?;
            let reference = gap_reference(space).unwrap_or(measured);
            report.push(TwoSidedReport::equality(
                "spectral-gap",
                measured,
                reference,
                tolerances::SLACK,
            ));
        }
        "lsi-floor" => {
            let floor = semigroup::certified_lsi_floor(gen).map_err(core_err)?;
            let gap = semigroup::spectral_gap(gen).map_err(core_err)?;
            report.push(TwoSidedReport::new(
                "lsi-floor",
                floor,
                gap,
                tolerances::SLACK,
            ));
        }
        "lsi" => {
            let SpaceKind::Cube { p, .. } = space.kind else {
                return Err(CliError::Usage(
                    "check 'lsi' compares the closed form against the numeric search \
                     and is defined on the cube only"
                        .into(),
                ));
            };
            let exact = semigroup::two_point_rho(p);
            let numeric = semigroup::log_sobolev_constant(
                gen,
                LsiMethod::NumericSearch {
                    iters_per_start: semigroup::DEFAULT_SEARCH_ITERS,
                },
            )
            .map_err(core_err)?;
            report.push(TwoSidedReport::equality("lsi", numeric, exact, 1e-4));
        }
        "hyper" => {
            let rho = resolve_rho(scenario, gen)?;
            let f = need_fn(scenario, space, table, check)?;
            let hyper = semigroup::hypercontractivity_check(gen, rho, f, scenario.t, scenario.q)
                .map_err(core_err)?;
            report.push(TwoSidedReport::new(
                "hyper",
                hyper.evolved_q_norm,
                hyper.input_p_norm,
                tolerances::SLACK,
            ));
        }
        "bakry" => {
            let f = need_fn(scenario, space, table, check)?;
            report.push(junta::bakry_check(gen, f, scenario.t).map_err(core_err)?);
        }
        "lemma-la" => {
            let rho = resolve_rho(scenario, gen)?;
            let f = need_fn(scenario, space, table, check)?;
            // the bound assumes max_i ‖L_i f‖_∞ = 1; rescale to match
            let profile = influence::influence_profile(space, f).map_err(core_err)?;
            let max_sup = profile.max_sup_norm();
            if max_sup <= 0.0 {
                return Err(CliError::Usage(
                    "check 'lemma-la' needs a non-constant function".into(),
                ));
            }
            let scaled: Vec<f64> = f.iter().map(|v| v / max_sup).collect();
            report.push(
                junta::lemma_la_check(space, gen, rho, &scaled, scenario.eta, scenario.t)
                    .map_err(core_err)?,
            );
        }
        "martingale" => {
            let f = need_fn(scenario, space, table, check)?;
            let all: Vec<usize> = (0..space.n_directions()).collect();
            let m = junta::reverse_martingale_check(space, f, &all).map_err(core_err)?;
            let pass = m.gap.abs() <= m.tolerance;
            let sum: f64 = m.increments.iter().sum();
            report.push_row("martingale", m.total, sum, m.gap, pass);
        }
        "decay" => {
            let rho = resolve_rho(scenario, gen)?;
            let f = need_fn(scenario, space, table, check)?;
            // the decay bound is for ±1-valued functions; round first
            let rounded: Vec<f64> = f
                .iter()
                .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            for rep in junta::boolean_decay_check(gen, rho, &rounded, scenario.t).map_err(core_err)?
            {
                report.push(rep);
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown check '{other}' (available: spectral-gap, lsi-floor, lsi, hyper, \
                 bakry, lemma-la, martingale, decay)"
            )))
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

fn dispatch(args: &[String]) -> CliResult<Outcome> {
    let Some(command) = args.first() else {
        return Err(CliError::Usage("no subcommand given".into()));
    };
    if command == "--help" || command == "-h" || command == "help" {
        return Ok(help(args.get(1).map(|s| s.as_str())));
    }
    if args.iter().any(|a| a == "--help" || a == "-h") {
        return Ok(help(Some(command.as_str())));
    }
    match command.as_str() {
        "spaces" => cmd_spaces(&args[1..]),
        "verify" => cmd_verify(&args[1..]),
        "junta" => cmd_junta(&args[1..]),
        "slice" => cmd_slice(&args[1..]),
        "continuous" => cmd_continuous(&args[1..]),
        "sweep" => cmd_sweep(&args[1..]),
        other => Err(CliError::Usage(format!(
            "unknown subcommand '{other}' (expected spaces, verify, junta, slice, \
             continuous, or sweep)"
        ))),
    }
}

fn expect_subword<'a>(args: &'a [String], wanted: &[&str], parent: &str) -> CliResult<&'a str> {
    match args.first() {
        Some(w) if wanted.contains(&w.as_str()) => Ok(w.as_str()),
        Some(w) => Err(CliError::Usage(format!(
            "'{parent} {w}' is not a command; expected {parent} {}",
            wanted.join("|")
        ))),
        None => Err(CliError::Usage(format!(
            "'{parent}' needs a word: {parent} {}",
            wanted.join("|")
        ))),
    }
}

// ---- spaces info ----------------------------------------------------------

fn cmd_spaces(args: &[String]) -> CliResult<Outcome> {
    expect_subword(args, &["info"], "spaces")?;
    let flags = parse_flags(
        &args[1..],
        &["space", "potential", "nodes", "budget-states", "out"],
    )?;
    let budget = flags.usize_exp("budget-states", tolerances::STATE_BUDGET)?;
    let mut text = String::new();
    if let Some(pot) = flags.get("potential") {
        let nodes = flags.usize_exp("nodes", 129)?;
        let model = build_potential(pot, nodes)?;
        let n_nodes = model.n_nodes();
        writeln!(text, "potential={pot}").unwrap();
        writeln!(text, "nodes={n_nodes}").unwrap();
        writeln!(text, "grid_lo={:.12e}", model.nodes()[0]).unwrap();
        writeln!(text, "grid_hi={:.12e}", model.nodes()[n_nodes - 1]).unwrap();
        writeln!(text, "step={:.12e}", model.h()).unwrap();
        writeln!(text, "curvature_bound={:.12e}", model.kappa()).unwrap();
        let path = match model.fast_path() {
            FastPath::ExactGaussianHermite { max_degree } => {
                format!("hermite(max_degree={max_degree})")
            }
            FastPath::GridOnly => "grid".to_string(),
        };
        writeln!(text, "fast_path={path}").unwrap();
        match continuous::spectral_gap_line(&model) {
            Ok(gap) => writeln!(text, "spectral_gap={gap:.12e}").unwrap(),
            Err(Error::BudgetExceeded { .. }) => {
                writeln!(text, "spectral_gap=unavailable (dense budget)").unwrap()
            }
            Err(e) => return Err(core_err(e)),
        }
        if let Ok(floor) = continuous::certified_line_lsi_floor(&model) {
            writeln!(text, "lsi_floor={floor:.12e}").unwrap();
        }
    } else {
        let Some(space_text) = flags.get("space") else {
            return Err(CliError::Usage(
                "spaces info needs --space or --potential".into(),
            ));
        };
        let desc = Descriptor::parse(space_text, "space")?;
        let space = build_space(&desc, budget)?;
        writeln!(text, "space={}", space.kind.describe()).unwrap();
        writeln!(text, "states={}", space.n_states).unwrap();
        writeln!(text, "directions={}", space.n_directions()).unwrap();
        writeln!(text, "generator_scale={:.12e}", space.generator_scale()).unwrap();
        writeln!(text, "normalization={}", space.normalization.as_str()).unwrap();
        let w_min = space.measure.iter().cloned().fold(f64::INFINITY, f64::min);
        let w_max = space.measure.iter().cloned().fold(0.0, f64::max);
        writeln!(text, "measure_min={w_min:.12e}").unwrap();
        writeln!(text, "measure_max={w_max:.12e}").unwrap();
        let gen = semigroup::generator(&space);
        match semigroup::spectral_gap(&gen) {
            Ok(gap) => {
                writeln!(text, "spectral_gap={gap:.12e}").unwrap();
                if let Some(reference) = gap_reference(&space) {
                    writeln!(text, "spectral_gap_reference={reference:.12e}").unwrap();
                }
            }
            Err(Error::BudgetExceeded { .. }) => {
                writeln!(text, "spectral_gap=unavailable (dense budget)").unwrap()
            }
            Err(e) => return Err(core_err(e)),
        }
        match semigroup::certified_lsi_floor(&gen) {
            Ok(floor) => writeln!(text, "lsi_floor={floor:.12e}").unwrap(),
            Err(Error::BudgetExceeded { .. }) => {
                writeln!(text, "lsi_floor=unavailable (dense budget)").unwrap()
            }
            Err(e) => return Err(core_err(e)),
        }
    }
    Ok(Outcome {
        text,
        all_pass: true,
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

// ---- verify ----------------------------------------------------------------

const VERIFY_FLAGS: &[&str] = &[
    "space",
    "fn",
    "check",
    "t",
    "eta",
    "q",
    "rho",
    "seed",
    "budget-states",
    "tol",
    "out",
];

fn cmd_verify(args: &[String]) -> CliResult<Outcome> {
    let flags = parse_flags(args, VERIFY_FLAGS)?;
    let scenario = scenario_from_flags(&flags, true)?;
    let report = run_discrete_checks(&scenario)?;
    Ok(Outcome {
        text: report.render(),
        all_pass: report.all_pass(),
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

// ---- junta extract ----------------------------------------------------------

fn cmd_junta(args: &[String]) -> CliResult<Outcome> {
    expect_subword(args, &["extract"], "junta")?;
    let flags = parse_flags(
        &args[1..],
        &[
            "space",
            "fn",
            "eps",
            "norm",
            "rho",
            "seed",
            "budget-states",
            "out",
        ],
    )?;
    let scenario = scenario_from_flags(&flags, true)?;
    let eps = match flags.get("eps") {
        Some(v) => parse_f64(v, "eps")?,
        None => return Err(CliError::Usage("junta extract needs --eps".into())),
    };
    let norm = match flags.get("norm").unwrap_or("l2") {
        "l2" => ErrorNorm::L2,
        "l1" => ErrorNorm::L1,
        other => {
            return Err(CliError::Usage(format!(
                "--norm: expected l2 or l1, got '{other}'"
            )))
        }
    };
    let space = build_space(&scenario.space, scenario.budget)?;
    let Some(func) = &scenario.func else {
        return Err(CliError::Usage("junta extract needs --fn".into()));
    };
    let f = build_function(&space, func, scenario.seed)?;
    let gen = semigroup::generator(&space);
    let rho = resolve_rho(&scenario, &gen)?;
    let (_, cert) = if matches!(space.kind, SpaceKind::Slice { .. }) {
        slice::slice_extract_junta(&space, &gen, rho, &f, eps).map_err(core_err)?
    } else {
        junta::extract_junta(&space, &gen, rho, &f, eps, norm).map_err(core_err)?
    };
    Ok(Outcome {
        text: cert.render(),
        all_pass: true,
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

// ---- slice ------------------------------------------------------------------

fn slice_space_of(scenario: &Scenario) -> CliResult<(MarkovSpace, usize, usize)> {
    if scenario.space.kind != "slice" {
        return Err(CliError::Usage(format!(
            "this command needs --space slice:n=..,k=.., got '{}'",
            scenario.space.kind
        )));
    }
    let space = build_space(&scenario.space, scenario.budget)?;
    let SpaceKind::Slice { n, k } = space.kind else {
        unreachable!("built from a slice descriptor")
    };
    Ok((space, n, k))
}

fn cmd_slice(args: &[String]) -> CliResult<Outcome> {
    let word = expect_subword(args, &["basis", "verify", "extract"], "slice")?;
    match word {
        "basis" => cmd_slice_basis(&args[1..]),
        "verify" => cmd_slice_verify(&args[1..]),
        "extract" => cmd_slice_extract(&args[1..]),
        _ => unreachable!(),
    }
}

fn cmd_slice_basis(args: &[String]) -> CliResult<Outcome> {
    let flags = parse_flags(args, &["space", "seed", "budget-states", "tol", "out"])?;
    let scenario = scenario_from_flags(&flags, true)?;
    let (space, n, k) = slice_space_of(&scenario)?;
    let basis = slice::build_basis(n, k).map_err(core_err)?;
    let mut report = Report::new(scenario.tol);
    push_basis_rows(&mut report, &space, &basis, scenario.seed)?;
    let mut text = slice::render_basis(&basis);
    text.push_str(&report.render());
    Ok(Outcome {
        text,
        all_pass: report.all_pass(),
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

fn push_basis_rows(
    report: &mut Report,
    space: &MarkovSpace,
    basis: &slice::SliceBasis,
    seed: u64,
) -> CliResult<()> {
    // pairwise orthogonality over the actual inner products
    let mut worst = 0.0f64;
    for (a, ea) in basis.entries.iter().enumerate() {
        for eb in basis.entries.iter().skip(a + 1) {
            worst = worst.max(space.inner(&ea.table, &eb.table).abs());
        }
    }
    report.push(TwoSidedReport::new(
        "basis-orthogonality",
        worst,
        0.0,
        tolerances::BASIS_ORTHO,
    ));
    // completeness: a seeded random function reconstructs exactly
    let f = functions::random_table(space, seed);
    let coeffs = slice::fourier_expand(basis, &f).map_err(core_err)?;
    let back = slice::reconstruct(basis, &coeffs).map_err(core_err)?;
    let diff: Vec<f64> = f.iter().zip(&back).map(|(x, y)| x - y).collect();
    report.push(TwoSidedReport::new(
        "basis-reconstruct",
        space.l2_norm_sq(&diff).sqrt(),
        0.0,
        tolerances::BASIS_RECONSTRUCT,
    ));
    // Parseval: ‖f‖₂² = Σ f̂(B)²‖χ_B‖₂²
    let lhs = space.l2_norm_sq(&f);
    let rhs: f64 = coeffs
        .iter()
        .zip(&basis.entries)
        .map(|(c, e)| c * c * e.norm_sq)
        .sum();
    report.push(TwoSidedReport::equality(
        "parseval",
        lhs,
        rhs,
        tolerances::PARSEVAL,
    ));
    Ok(())
}

const SLICE_CHECKS: &str =
    "spectrum, basis, parseval, influence-identity, rescaled-decay, hyperbool, ineq10";

fn cmd_slice_verify(args: &[String]) -> CliResult<Outcome> {
    let flags = parse_flags(
        args,
        &[
            "space",
            "fn",
            "check",
            "t",
            "prefix",
            "rho",
            "seed",
            "budget-states",
            "tol",
            "out",
        ],
    )?;
    let scenario = scenario_from_flags(&flags, true)?;
    if scenario.checks.is_empty() {
        return Err(CliError::Usage("no checks requested".into()));
    }
    let (space, n, k) = slice_space_of(&scenario)?;
    let gen = semigroup::generator(&space);
    let mut basis: Option<slice::SliceBasis> = None;
    let mut table: Option<Vec<f64>> = None;
    let mut report = Report::new(scenario.tol);
    let prefix = flags.usize_exp("prefix", n)?;
    for check in &scenario.checks {
        match check.as_str() {
            "spectrum" => report.push(slice::spectrum_check(&space).map_err(core_err)?),
            "basis" | "parseval" => {
                if basis.is_none() {
                    basis = Some(slice::build_basis(n, k).map_err(core_err)?);
                }
                push_basis_rows(
                    &mut report,
                    &space,
                    basis.as_ref().expect("just built"),
                    scenario.seed,
                )?;
            }
            "influence-identity" => {
                if basis.is_none() {
                    basis = Some(slice::build_basis(n, k).map_err(core_err)?);
                }
                let f = need_fn(&scenario, &space, &mut table, check)?;
                report.push(
                    slice::influence_identity_check(
                        basis.as_ref().expect("just built"),
                        &space,
                        f,
                        prefix,
                    )
                    .map_err(core_err)?,
                );
            }
            "rescaled-decay" => {
                if basis.is_none() {
                    basis = Some(slice::build_basis(n, k).map_err(core_err)?);
                }
                let b = basis.as_ref().expect("just built");
                let mut worst = 0.0f64;
                for e in &b.entries {
                    let evolved = slice::rescaled_evolve(&gen, &e.table, scenario.t)
                        .map_err(core_err)?;
                    let d = e.top.degree() as f64;
                    let factor =
                        (-scenario.t * d * (n as f64 + 1.0 - d) / n as f64).exp();
                    let want: Vec<f64> = e.table.iter().map(|v| v * factor).collect();
                    let diff: Vec<f64> =
                        evolved.iter().zip(&want).map(|(x, y)| x - y).collect();
                    worst = worst.max(space.l2_norm_sq(&diff).sqrt());
                }
                report.push(TwoSidedReport::new(
                    "rescaled-decay",
                    worst,
                    0.0,
                    tolerances::RESCALED_DECAY,
                ));
            }
            "hyperbool" => {
                let rho = resolve_rho(&scenario, &gen)?;
                let f = need_fn(&scenario, &space, &mut table, check)?;
                report.push(
                    slice::hyperbool_check(&gen, rho, f, 0, scenario.t).map_err(core_err)?,
                );
            }
            "ineq10" => {
                if basis.is_none() {
                    basis = Some(slice::build_basis(n, k).map_err(core_err)?);
                }
                let f = need_fn(&scenario, &space, &mut table, check)?;
                let m = prefix.min(n - 1);
                report.push(
                    slice::inequality10_check(
                        basis.as_ref().expect("just built"),
                        &space,
                        f,
                        scenario.t,
                        m,
                    )
                    .map_err(core_err)?,
                );
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown slice check '{other}' (available: {SLICE_CHECKS})"
                )))
            }
        }
    }
    Ok(Outcome {
        text: report.render(),
        all_pass: report.all_pass(),
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

fn cmd_slice_extract(args: &[String]) -> CliResult<Outcome> {
    let flags = parse_flags(
        args,
        &["space", "fn", "eps", "rho", "seed", "budget-states", "out"],
    )?;
    let scenario = scenario_from_flags(&flags, true)?;
    let eps = match flags.get("eps") {
        Some(v) => parse_f64(v, "eps")?,
        None => return Err(CliError::Usage("slice extract needs --eps".into())),
    };
    let (space, _, _) = slice_space_of(&scenario)?;
    let Some(func) = &scenario.func else {
        return Err(CliError::Usage("slice extract needs --fn".into()));
    };
    let f = build_function(&space, func, scenario.seed)?;
    let gen = semigroup::generator(&space);
    let rho = resolve_rho(&scenario, &gen)?;
    let (_, cert) = slice::slice_extract_junta(&space, &gen, rho, &f, eps).map_err(core_err)?;
    Ok(Outcome {
        text: cert.render(),
        all_pass: true,
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

// ---- continuous -------------------------------------------------------------

fn build_potential(text: &str, nodes: usize) -> CliResult<LineModel> {
    let desc = Descriptor::parse(text, "potential")?;
    match desc.kind.as_str() {
        "gaussian" => continuous::gaussian_model(nodes).map_err(core_err),
        "boltzmann" => {
            let p = desc.f64req("p", "potential")?;
            continuous::boltzmann_model(p, nodes).map_err(core_err)
        }
        "quartic" => {
            let a = desc.f64req("a", "potential")?;
            let b = desc.f64req("b", "potential")?;
            continuous::quartic_model(a, b, nodes).map_err(core_err)
        }
        "file" => {
            let path = desc.get("path").expect("file descriptor keeps its path");
            build_tabulated_potential(path, nodes)
        }
        other => Err(CliError::Usage(format!(
            "unknown potential '{other}' (expected gaussian, boltzmann:p=.., \
             quartic:a=..,b=.., or file:PATH)"
        ))),
    }
}

/// Tabulated potential: rows `x v v' v''` (whitespace or comma separated),
/// strictly increasing x. The closures interpolate linearly inside the
/// table and extend linearly beyond it, and the declared curvature bound is
/// the least tabulated v''.
fn build_tabulated_potential(path: &str, nodes: usize) -> CliResult<LineModel> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{path}: cannot read potential: {e}")))?;
    let mut rows: Vec<[f64; 4]> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if cols.len() != 4 {
            return Err(CliError::Usage(format!(
                "{path}:{}: expected 4 columns (x, v, v', v''), got {}",
                lineno + 1,
                cols.len()
            )));
        }
        let mut row = [0.0f64; 4];
        for (slot, col) in row.iter_mut().zip(&cols) {
            *slot = col.parse().map_err(|_| {
                CliError::Usage(format!(
                    "{path}:{}: expected a number, got '{col}'",
                    lineno + 1
                ))
            })?;
        }
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(CliError::Usage(format!(
            "{path}: a tabulated potential needs at least 2 rows"
        )));
    }
    for pair in rows.windows(2) {
        if pair[1][0] <= pair[0][0] {
            return Err(CliError::Usage(format!(
                "{path}: x column must increase strictly ({} then {})",
                pair[0][0], pair[1][0]
            )));
        }
    }
    let kappa = rows.iter().map(|r| r[3]).fold(f64::INFINITY, f64::min);
    let interp = move |rows: Vec<(f64, f64)>| {
        move |x: f64| -> f64 {
            let first = rows[0];
            let last = rows[rows.len() - 1];
            if x <= first.0 {
                let second = rows[1];
                let slope = (second.1 - first.1) / (second.0 - first.0);
                return first.1 + slope * (x - first.0);
            }
            if x >= last.0 {
                let prev = rows[rows.len() - 2];
                let slope = (last.1 - prev.1) / (last.0 - prev.0);
                return last.1 + slope * (x - last.0);
            }
            let j = rows.partition_point(|r| r.0 <= x).max(1);
            let (x0, y0) = rows[j - 1];
            let (x1, y1) = rows[j];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    };
    let v_rows: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let vp_rows: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[2])).collect();
    let vpp_rows: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[3])).collect();
    continuous::build_line_model(
        interp(v_rows),
        interp(vp_rows),
        interp(vpp_rows),
        kappa,
        nodes,
    )
    .map_err(core_err)
}

fn build_smooth_fn(space: &ProductLineSpace, text: &str, seed: u64) -> CliResult<SmoothFn> {
    let desc = Descriptor::parse(text, "function")?;
    match desc.kind.as_str() {
        "coordinate" => {
            let axis = desc.usize_or("axis", 1)?;
            if axis == 0 || axis > space.n() {
                return Err(CliError::Usage(format!(
                    "coordinate axis {axis} out of range 1..={}",
                    space.n()
                )));
            }
            let values: Vec<f64> = (0..space.n_states())
                .map(|i| space.node(i, axis - 1))
                .collect();
            let partials: Vec<Vec<f64>> = (0..space.n())
                .map(|a| {
                    vec![if a == axis - 1 { 1.0 } else { 0.0 }; space.n_states()]
                })
                .collect();
            Ok(SmoothFn::with_partials(values, partials))
        }
        "random-poly" => {
            let degree = desc.usize_or("degree", 3)?;
            let terms = desc.usize_or("terms", 6)?;
            let s = desc
                .get("seed")
                .map(|v| {
                    v.parse::<u64>().map_err(|_| {
                        CliError::Usage(format!("function seed: expected an integer, got '{v}'"))
                    })
                })
                .transpose()?
                .unwrap_or(seed);
            continuous::random_polynomial(space, degree, terms, s).map_err(core_err)
        }
        "file" => {
            let path = desc.get("path").expect("file descriptor keeps its path");
            let values = read_values_file(path, space.n_states())?;
            Ok(SmoothFn::from_values(values))
        }
        other => Err(CliError::Usage(format!(
            "unknown continuous function '{other}' (expected coordinate:axis=.., \
             random-poly:degree=..,terms=..,seed=.., or file:PATH)"
        ))),
    }
}

fn build_grid_set(space: &ProductLineSpace, text: &str) -> CliResult<GridSet> {
    let desc = Descriptor::parse(text, "set")?;
    match desc.kind.as_str() {
        "halfspace" => {
            let axis = desc.usize_or("axis", 1)?;
            let c = desc.f64or("c", 0.0)?;
            if axis == 0 || axis > space.n() {
                return Err(CliError::Usage(format!(
                    "halfspace axis {axis} out of range 1..={}",
                    space.n()
                )));
            }
            continuous::grid_set_from(space, |x| x[axis - 1] <= c, Monotonicity::Decreasing)
                .map_err(core_err)
        }
        "orthant" => {
            let c = desc.f64or("c", 0.0)?;
            continuous::grid_set_from(space, |x| x.iter().all(|&v| v <= c), Monotonicity::Decreasing)
                .map_err(core_err)
        }
        other => Err(CliError::Usage(format!(
            "unknown set '{other}' (expected halfspace:axis=..,c=.. or orthant:c=..)"
        ))),
    }
}

const CONTINUOUS_CHECKS: &str =
    "commutation, reverse-poincare, ledoux, contraction, chain, ou-decay, influence-set";

fn cmd_continuous(args: &[String]) -> CliResult<Outcome> {
    let word = expect_subword(args, &["verify", "extract"], "continuous")?;
    let flags = parse_flags(
        &args[1..],
        &[
            "potential",
            "nodes",
            "n",
            "fn",
            "set",
            "check",
            "t",
            "t-set",
            "eps",
            "rho",
            "seed",
            "budget-states",
            "tol",
            "out",
        ],
    )?;
    let potential = flags.get("potential").unwrap_or("gaussian").to_string();
    let nodes = flags.usize_exp("nodes", 129)?;
    let n = flags.usize_exp("n", 1)?;
    let budget = flags.usize_exp("budget-states", tolerances::STATE_BUDGET)?;
    let needed = (nodes as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(CliError::Capacity(format!(
            "continuous grid needs {needed} states, budget is {budget}"
        )));
    }
    let model = build_potential(&potential, nodes)?;
    let space = continuous::product_space(model, n).map_err(core_err)?;
    let seed = flags.u64exp("seed", 0)?;
    let t = flags.f64exp("t", 0.5)?;
    let tol = flags.f64opt("tol")?;
    let rho = match flags.f64opt("rho")? {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => {
            return Err(CliError::Usage(format!(
                "--rho must be positive and finite, got {r}"
            )))
        }
        None => continuous::certified_line_lsi_floor(space.factor()).map_err(core_err)?,
    };
    match word {
        "verify" => continuous_verify(&flags, &space, &potential, seed, t, rho, tol),
        "extract" => continuous_extract(&flags, &space, seed, rho),
        _ => unreachable!(),
    }
}

fn parse_axis_list(text: &str, n: usize) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for piece in text.split(',') {
        let axis = parse_usize(piece.trim(), "t-set")?;
        if axis == 0 || axis > n {
            return Err(CliError::Usage(format!(
                "--t-set: axis {axis} out of range 1..={n}"
            )));
        }
        let zero_based = axis - 1;
        if out.contains(&zero_based) {
            return Err(CliError::Usage(format!("--t-set: axis {axis} repeats")));
        }
        out.push(zero_based);
    }
    Ok(out)
}

fn continuous_verify(
    flags: &Flags,
    space: &ProductLineSpace,
    potential: &str,
    seed: u64,
    t: f64,
    rho: f64,
    tol: Option<f64>,
) -> CliResult<Outcome> {
    let checks: Vec<String> = flags
        .get("check")
        .map(|s| {
            s.split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect()
        })
        .unwrap_or_default();
    if checks.is_empty() {
        return Err(CliError::Usage("no checks requested".into()));
    }
    let mut report = Report::new(tol);
    let mut smooth: Option<SmoothFn> = None;
    let need_smooth = |smooth: &mut Option<SmoothFn>, check: &str| -> CliResult<SmoothFn> {
        if smooth.is_none() {
            let Some(fn_text) = flags.get("fn") else {
                return Err(CliError::Usage(format!("check '{check}' needs --fn")));
            };
            *smooth = Some(build_smooth_fn(space, fn_text, seed)?);
        }
        Ok(smooth.as_ref().expect("just built").clone())
    };
    for check in &checks {
        match check.as_str() {
            "commutation" => {
                let f = need_smooth(&mut smooth, check)?;
                let rep = continuous::commutation_check(space, &f, t).map_err(core_err)?;
                for r in rep.strict {
                    report.push(r);
                }
                for (i, s) in rep.signed_slack.iter().enumerate() {
                    report.comment(format!(
                        "commutation-signed[{}] kappa_eff={:.12e} slack={s:.12e}",
                        i + 1,
                        rep.kappa_eff
                    ));
                }
            }
            "reverse-poincare" => {
                let f = need_smooth(&mut smooth, check)?;
                for r in continuous::reverse_poincare_check(space, &f, t).map_err(core_err)? {
                    report.push(r);
                }
            }
            "ledoux" => {
                let f = need_smooth(&mut smooth, check)?;
                report.push(continuous::ledoux_l1_check(space, &f, t).map_err(core_err)?);
            }
            "contraction" => {
                let f = need_smooth(&mut smooth, check)?;
                for r in continuous::derivative_l1_contraction_check(space, &f, t)
                    .map_err(core_err)?
                {
                    report.push(r);
                }
            }
            "chain" => {
                let f = need_smooth(&mut smooth, check)?;
                let t_set = match flags.get("t-set") {
                    Some(text) => parse_axis_list(text, space.n())?,
                    None => (0..space.n()).collect(),
                };
                report.push(
                    continuous::chained_projection_check(space, rho, &f, t, &t_set)
                        .map_err(core_err)?,
                );
            }
            "ou-decay" => {
                if !potential.starts_with("gaussian") {
                    return Err(CliError::Usage(
                        "check 'ou-decay' compares against e^{-kt}, which is the \
                         gaussian spectrum; use --potential gaussian"
                            .into(),
                    ));
                }
                let factor = space.factor();
                let psi = continuous::hermite_table(factor.nodes(), 12);
                for (k, table) in psi.iter().enumerate().skip(1) {
                    let evolved =
                        continuous::evolve_line_grid(factor, table, t).map_err(core_err)?;
                    let measured =
                        factor.inner(&evolved, table) / factor.l2_norm_sq(table);
                    report.push(TwoSidedReport::equality(
                        format!("ou-decay[{k}]"),
                        measured,
                        (-(k as f64) * t).exp(),
                        2e-4,
                    ));
                }
            }
            "influence-set" => {
                let Some(set_text) = flags.get("set") else {
                    return Err(CliError::Usage("check 'influence-set' needs --set".into()));
                };
                let set = build_grid_set(space, set_text)?;
                let rep = continuous::geometric_influence_report(space, &set).map_err(core_err)?;
                for (i, v) in rep.per_coordinate.iter().enumerate() {
                    report.comment(format!("set-influence[{}]={v:.12e}", i + 1));
                }
                let boundary = rep.boundary_uniform.ok_or_else(|| {
                    CliError::Usage("influence-set needs a monotone set".into())
                })?;
                report.push(TwoSidedReport::equality(
                    "set-boundary-identity",
                    rep.total,
                    boundary,
                    5e-4,
                ));
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown continuous check '{other}' (available: {CONTINUOUS_CHECKS})"
                )))
            }
        }
    }
    Ok(Outcome {
        text: report.render(),
        all_pass: report.all_pass(),
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

fn continuous_extract(
    flags: &Flags,
    space: &ProductLineSpace,
    seed: u64,
    rho: f64,
) -> CliResult<Outcome> {
    let eps = match flags.get("eps") {
        Some(v) => parse_f64(v, "eps")?,
        None => return Err(CliError::Usage("continuous extract needs --eps".into())),
    };
    let text = if let Some(set_text) = flags.get("set") {
        let set = build_grid_set(space, set_text)?;
        let (found, cert) = continuous::monotone_set_junta(space, &set, eps).map_err(core_err)?;
        let mut out = cert.render();
        writeln!(out, "result_measure={:.12e}", continuous::set_measure(space, &found)).unwrap();
        writeln!(out, "result_monotone={:?}", found.monotonicity).unwrap();
        out
    } else if let Some(fn_text) = flags.get("fn") {
        let f = build_smooth_fn(space, fn_text, seed)?;
        let (_, cert) = continuous::continuous_extract_junta(space, rho, &f, eps).map_err(core_err)?;
        cert.render()
    } else {
        return Err(CliError::Usage(
            "continuous extract needs --fn or --set".into(),
        ));
    };
    Ok(Outcome {
        text,
        all_pass: true,
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

// ---- sweep -------------------------------------------------------------------

struct GridAxis {
    key: String,
    values: Vec<String>,
}

fn parse_grid_axis(text: &str) -> CliResult<GridAxis> {
    let Some((key, values_text)) = text.split_once('=') else {
        return Err(CliError::Usage(format!(
            "--grid: expected key=values, got '{text}'"
        )));
    };
    let values: Vec<String> = if let Some((lo, hi)) = values_text.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| {
            CliError::Usage(format!("--grid {key}: range start '{lo}' is not an integer"))
        })?;
        let hi: i64 = hi.trim().parse().map_err(|_| {
            CliError::Usage(format!("--grid {key}: range end '{hi}' is not an integer"))
        })?;
        if hi < lo {
            return Err(CliError::Usage(format!(
                "--grid {key}: empty range {lo}..{hi}"
            )));
        }
        (lo..=hi).map(|v| v.to_string()).collect()
    } else {
        values_text
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect()
    };
    if values.is_empty() {
        return Err(CliError::Usage(format!("--grid {key}: empty grid")));
    }
    Ok(GridAxis {
        key: key.trim().to_string(),
        values,
    })
}

fn apply_override(scenario: &mut Scenario, key: &str, value: &str) -> CliResult<()> {
    match key {
        "n" | "m" | "p" | "k" => scenario.space.set(key, value),
        "t" => scenario.t = parse_f64(value, key)?,
        "eta" => scenario.eta = parse_f64(value, key)?,
        "q" => scenario.q = parse_f64(value, key)?,
        "rho" => scenario.rho = Some(parse_f64(value, key)?),
        "seed" => {
            scenario.seed = value.parse::<u64>().map_err(|_| {
                CliError::Usage(format!("grid seed: expected an integer, got '{value}'"))
            })?
        }
        other => {
            return Err(CliError::Usage(format!(
                "--grid key '{other}' is not sweepable (use n, m, p, k, t, eta, q, rho, or seed)"
            )))
        }
    }
    Ok(())
}

fn cmd_sweep(args: &[String]) -> CliResult<Outcome> {
    let mut allowed = VERIFY_FLAGS.to_vec();
    allowed.push("grid");
    let flags = parse_flags(args, &allowed)?;
    let scenario = scenario_from_flags(&flags, true)?;
    if scenario.checks.is_empty() {
        return Err(CliError::Usage("no checks requested".into()));
    }
    let axes: Vec<GridAxis> = flags
        .get_all("grid")
        .into_iter()
        .map(parse_grid_axis)
        .collect::<CliResult<_>>()?;
    if axes.is_empty() {
        return Err(CliError::Usage("sweep needs at least one --grid axis".into()));
    }
    let points: usize = axes.iter().map(|a| a.values.len()).product();
    if points == 0 {
        return Err(CliError::Usage("empty grid".into()));
    }
    if points > SWEEP_POINT_BUDGET {
        return Err(CliError::Capacity(format!(
            "sweep grid has {points} points, budget is {SWEEP_POINT_BUDGET}"
        )));
    }

    // materialize the grid points row-major, first axis outermost
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(combos.len() * axis.values.len());
        for combo in &combos {
            for v in &axis.values {
                let mut c = combo.clone();
                c.push((axis.key.clone(), v.clone()));
                next.push(c);
            }
        }
        combos = next;
    }

    // run the points on a small thread pool, keeping report order
    let results: Vec<CliResult<Vec<String>>> = run_points(&scenario, &combos);
    let mut report_rows = Vec::new();
    let mut failures = 0usize;
    let mut total = 0usize;
    for rows in results {
        for row in rows? {
            total += 1;
            if row.ends_with(",false") {
                failures += 1;
            }
            report_rows.push(row);
        }
    }
    let mut text = String::from(REPORT_HEADER);
    text.push('\n');
    for row in &report_rows {
        text.push_str(row);
        text.push('\n');
    }
    write!(
        text,
        "# summary: {} passed, {failures} failed\n",
        total - failures
    )
    .unwrap();
    Ok(Outcome {
        text,
        all_pass: failures == 0,
        out_path: flags.get("out").map(|s| s.to_string()),
    })
}

fn run_points(scenario: &Scenario, combos: &[Vec<(String, String)>]) -> Vec<CliResult<Vec<String>>> {
    let worker = |combo: &Vec<(String, String)>| -> CliResult<Vec<String>> {
        let mut point = scenario.clone();
        for (key, value) in combo {
            apply_override(&mut point, key, value)?;
        }
        let suffix: Vec<String> = combo.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let suffix = suffix.join(",");
        let report = run_discrete_checks(&point)?;
        Ok(report
            .rows
            .iter()
            .map(|row| suffix_row(row, &suffix))
            .collect())
    };
    let threads = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(combos.len())
        .max(1);
    if threads == 1 {
        return combos.iter().map(worker).collect();
    }
    let chunk = combos.len().div_ceil(threads);
    let mut results: Vec<CliResult<Vec<String>>> = Vec::with_capacity(combos.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = combos
            .chunks(chunk)
            .map(|block| scope.spawn(move || block.iter().map(worker).collect::<Vec<_>>()))
            .collect();
        for handle in handles {
            results.extend(handle.join().expect("sweep worker panicked"));
        }
    });
    results
}

// ---------------------------------------------------------------------------
// help
// ---------------------------------------------------------------------------

fn help(topic: Option<&str>) -> Outcome {
    let text = match topic {
        Some("spaces") => SPACES_HELP,
        Some("verify") => VERIFY_HELP,
        Some("junta") => JUNTA_HELP,
        Some("slice") => SLICE_HELP,
        Some("continuous") => CONTINUOUS_HELP,
        Some("sweep") => SWEEP_HELP,
        _ => OVERVIEW_HELP,
    };
    Outcome {
        text: text.to_string(),
        all_pass: true,
        out_path: None,
    }
}

const OVERVIEW_HELP: &str = "\
juntalab: verifiers and extractors for junta approximation on product and
Schreier-graph Markov spaces, slices of the cube, and discretized
log-concave measures on R^n.

usage: juntalab <command> [flags]

commands:
  spaces info   describe a space: states, spectral gap, log-Sobolev floor
  verify        run inequality checks on a space and function
  junta extract extract a junta approximation with a certificate
  slice         slice-of-the-cube basis, spectrum, and extraction commands
  continuous    checks and extraction on discretized measures e^{-v(x)}dx
  sweep         run verify checks over a parameter grid

common flags:
  --seed N           seed for built-in random functions (default 0)
  --budget-states N  refuse spaces larger than N states (default 262144)
  --tol X            override every check tolerance in the report
  --out FILE         also write the report to FILE
  --config FILE      load flags from a key=value file with [scenario],
                     [grid], and [output] sections; explicit flags win

reports are delimited text: check,left,right,slack,pass with slack =
right - left; a check passes when slack >= -tolerance. Fixed seeds give
byte-identical reports. Exit status: 0 all pass, 1 some check failed or an
extraction gave up, 2 configuration error, 3 over budget.

run `juntalab help <command>` for the command's checks and their
inequalities.
";

const SPACES_HELP: &str = "\
usage: juntalab spaces info --space DESC
       juntalab spaces info --potential DESC [--nodes N]

Prints the space's construction data: state count, walk directions,
generator scale, measure extremes, the spectral gap of the generator
(with its closed form where one exists: 1 for products, (1-cos(2pi/m))/2
for the rescaled torus walk, 2/(n-1) for the slice transposition walk),
and the certified log-Sobolev floor 2*lambda*(1-2w)/ln(1/w - 1) in terms
of the gap lambda and the least stationary weight w.

space descriptors:
  cube:n=6,p=0.5    biased cube, p = weight of the -1 face (default 0.5)
  torus:n=3,m=5     n-fold cycle of size m with the rescaled shift walk
  slice:n=5,k=2     k-subsets of n points with the transposition walk
  symmetric:n=4     the symmetric group with the transposition walk

potential descriptors (continuous measures e^{-v(x)}dx on a grid):
  gaussian          v = x^2/2
  boltzmann:p=3     v = |x|^p, p >= 2
  quartic:a=1,b=1   v = a*x^4 - b*x^2 (curvature bound -2b)
  file:PATH         tabulated rows x v v' v''
";

const VERIFY_HELP: &str = "\
usage: juntalab verify --space DESC --fn DESC --check LIST [flags]

flags: --t (time, default 0.25), --eta (influence threshold, default 0.1),
--q (norm exponent, default 3), --rho (log-Sobolev constant; defaults to
the certified floor), --seed, --tol, --out.

function descriptors: dictator, majority, parity, tribes,
random[:seed=..], planted-junta:k=..[,noise=..][,seed=..], file:PATH
(one value per state-rank line).

checks:
  spectral-gap  least positive eigenvalue of -L against its closed form
  lsi-floor     certified log-Sobolev floor <= spectral gap
  lsi           cube only: numeric minimization of 2E(f,f)/Ent(f^2)
                against the closed two-point form
  hyper         |P_t f|_q <= |f|_p with p = 1 + (q-1)e^{-2 rho t}
  bakry         |f - P_t f|_2^2 <= t * E(f,f)
  lemma-la      |P_t f - avg_T P_t f|_2^2 <= I(f) * eta^alpha over the
                low-influence set T = {i : I_i(f) <= eta}, where
                alpha = (1-e^{-2 rho t})/(1+e^{-2 rho t}); the function
                is rescaled so max_i |L_i f|_inf = 1 first
  martingale    |g - avg_T g|_2^2 equals the sum of the squared
                increments of coordinate-by-coordinate averaging
  decay         |L_i P_t f|_2^2 <= I_i(f)^beta per coordinate with
                beta = 2/(1+e^{-rho t}), after rounding f to +-1
";

const JUNTA_HELP: &str = "\
usage: juntalab junta extract --space DESC --fn DESC --eps X [flags]

Runs the smoothing-projection-rounding pipeline: evolve to time t chosen
from eps, drop coordinates with influence at or below a threshold eta,
average them out, and verify the realized error directly. The threshold
starts at the larger of the solved value (I(f) * eta^alpha = eps/2) and
the top influence, and descends one distinct influence level per failed
round. Prints the certificate (kept coordinates 1-indexed, eta, t, alpha,
both bound values, measured error, retries). Slice spaces route through
the slice pipeline automatically.

flags: --norm l2|l1 (default l2), --rho (defaults to the certified
floor), --seed, --out. Exit 0 with a certificate, 1 if extraction gives
up (the best attempt is reported).
";

const SLICE_HELP: &str = "\
usage: juntalab slice basis   --space slice:n=..,k=.. [flags]
       juntalab slice verify  --space slice:n=..,k=.. --check LIST [flags]
       juntalab slice extract --space slice:n=..,k=.. --fn DESC --eps X

slice basis prints the orthogonal basis (one row per vector: top set,
eigenvalue, squared norm, values) plus its verification rows.

slice verify checks:
  spectrum            dense spectrum of the transposition walk against
                      the closed multiset 2d(n+1-d)/(n(n-1)) with
                      multiplicities C(n,d) - C(n,d-1)
  basis               pairwise orthogonality and exact reconstruction
  parseval            |f|_2^2 = sum of coefficient^2 * basis norm^2
  influence-identity  prefix influence sum against the spectral form
                      (--prefix, default n)
  rescaled-decay      basis vectors decay exactly like
                      e^{-t d(n+1-d)/n} under the rescaled semigroup
  hyperbool           one transposition difference of the evolved
                      function against the hypercontractive norm bound
  ineq10              projection residual of the evolved function
                      against its prefix influence (--prefix kept
                      coordinates)

slice extract runs the junta pipeline adapted to the slice: the kept set
is a vertex set produced by greedy covering of the high-influence
transpositions, and the error bound uses the rescaled semigroup's
log-Sobolev constant rho * (n-1)/2.
";

const CONTINUOUS_HELP: &str = "\
usage: juntalab continuous verify  --potential DESC [--nodes N] [--n D]
                                   (--fn DESC | --set DESC) --check LIST
       juntalab continuous extract --potential DESC [--nodes N] [--n D]
                                   (--fn DESC | --set DESC) --eps X

The measure e^{-v(x)}dx is discretized as a birth-death chain on a
uniform grid (rates (1/h^2)sqrt(w_j±1/w_j)); products take D independent
copies. Functions: coordinate:axis=.., random-poly:degree=..,terms=..,
seed=.. (tensor Hermite with analytic partial derivatives), file:PATH.
Sets: halfspace:axis=..,c=.. and orthant:c=.. (both monotone).

checks (all on convex potentials unless noted):
  commutation      |grad P_t f| <= P_t|grad f| per coordinate; the
                   signed variant with factor e^{-kappa t} is recorded
                   as a comment (it is an equality for one-signed
                   derivatives, so only its slack is informative)
  reverse-poincare |grad P_t f|_2^2 <= |f|_2^2/(2t), the pointwise form
                   2|grad P_t f|^2 <= (P_t f^2 - (P_t f)^2)/t, and
                   sup|grad P_t f| <= sup|f|/sqrt(2t)
  ledoux           |f - P_t f|_1 <= 2 sqrt(t) |grad f|_1
  contraction      |d_i P_t f|_1 <= |d_i f|_1 per coordinate
  chain            |P_t f - avg_T P_t f|_2^2 <= (1/rho) *
                   (sum_T |d_i f|_1^2)^a * (|f|_2^2/t)^{1-a},
                   a = alpha(rho, t/2); --t-set picks T (1-indexed)
  ou-decay         gaussian only: grid evolution of the degree-k
                   Hermite polynomial decays like e^{-kt}, k <= 12
  influence-set    total geometric influence of a monotone set equals
                   its uniform-enlargement boundary (needs --set)

continuous extract with --fn extracts a junta in L1 with certificate
bounds 4 sqrt(t) I(f) and (1/sqrt(rho t)) eta^{a/2} |f|_2^{1-a} I(f);
with --set it mollifies the indicator, extracts, rounds at 1/2, and
reports the symmetric difference.
";

const SWEEP_HELP: &str = "\
usage: juntalab sweep --space DESC [--fn DESC] --check LIST
                      --grid key=values [--grid key=values ...]

Runs the verify checks at every point of the Cartesian grid, row-major
with the first --grid axis outermost, one report row per check per
point; the check name carries the point, e.g. spectral-gap[m=4]. Grid
values are comma lists (t=0.1,0.2,0.4) or inclusive integer ranges
(m=2..8). Sweepable keys: n, m, p, k (space parameters) and t, eta, q,
rho, seed (scenario parameters). Points run in parallel; the report
order is deterministic, so a fixed scenario and seed give byte-identical
output. An empty grid is a configuration error.

example: --space torus:n=1,m=2 --check spectral-gap --grid m=2..8
         sweeps the torus size and checks each gap against
         (1 - cos(2 pi / m))/2.
";
