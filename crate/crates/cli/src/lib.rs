//! JSON batch frontend for the `mdcrt` library.
//!
//! Every command reads one JSON document (a file, or stdin) and writes one
//! JSON document followed by a newline. Exit status is 0 on success, 1 on a
//! domain error reported by the library and 2 on malformed input.

pub mod json;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mdcrt::freqsim::{self, EndToEndOptions, SignalSpec, Tone};
use mdcrt::lattice::{self, fpd, in_half_lattice, in_shifted_lattice_sum, lattice_of};
use mdcrt::mdcrt::{self as crt, Congruence};
use mdcrt::multivec::{self, AuditEvent, ModuliSet, ResidueSetSystem, Verdict};
use mdcrt::pairvec::{self, OneDimProblem, PairSystem};
use mdcrt::{BigInt, IntMatrix, IntVector};
use num_complex::Complex;
use serde_json::{json, Map, Value};

use json::{Node, Parsed, SchemaError};

#[derive(Parser, Debug)]
#[command(name = "mdcrt", version, about = "Chinese remaindering with integer matrix moduli")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Io {
    /// Input JSON document; stdin when omitted or `-`.
    pub input: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RangeArgs {
    /// Number of unknown vectors; overrides the document's `rho`.
    #[arg(long)]
    pub rho: Option<usize>,
    /// JSON file of lcrm overrides, `[{"subset": [...], "lcrm": [[...]]}]`.
    #[arg(long)]
    pub overrides: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Canonical least common right multiple of the moduli.
    Lcrm(Io),
    /// Points of the fundamental parallelepiped of a matrix.
    Fpd {
        #[command(flatten)]
        io: Io,
        /// Emit the points as CSV with columns x1..xD.
        #[arg(long)]
        csv: bool,
    },
    /// Vector remainder and quotient.
    Rem(Io),
    /// Solve a system of congruences.
    Crt(Io),
    /// Determinable range for several unknown vectors.
    Neta {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Reconstruct several vectors from unordered residue sets.
    SolveMulti {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Reconstruct two vectors whose difference meets the pair condition.
    SolvePair(Io),
    /// Test a difference against the pair condition.
    CheckCondition(Io),
    /// Compare the one-dimensional condition set with the earlier ones.
    OnedimCompare(Io),
    /// Sample tones, detect residues and recover the frequencies.
    Simulate {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Peak threshold as a fraction of the largest bin.
        #[arg(long)]
        threshold: Option<f64>,
        /// Use the two-vector reconstruction with prior information.
        #[arg(long)]
        prior: bool,
    },
    /// Worst-case CRT solve count.
    Bound(Io),
}

impl Command {
    pub fn io(&self) -> &Io {
        match self {
            Command::Lcrm(io)
            | Command::Rem(io)
            | Command::Crt(io)
            | Command::SolvePair(io)
            | Command::CheckCondition(io)
            | Command::OnedimCompare(io)
            | Command::Bound(io) => io,
            Command::Fpd { io, .. }
            | Command::Neta { io, .. }
            | Command::SolveMulti { io, .. }
            | Command::Simulate { io, .. } => io,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Schema(SchemaError),
    Domain(mdcrt::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(e) if !is_input_error(e) => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Schema(e) => json!({"error": {"kind": "SchemaError", "pointer": e.pointer, "message": e.message}}),
            CliError::Domain(e) => json!({"error": {"kind": e.name(), "message": e.to_string()}}),
            CliError::Io(msg) => json!({"error": {"kind": "IoError", "message": msg}}),
        }
    }
}

fn is_input_error(e: &mdcrt::Error) -> bool {
    use mdcrt::Error::*;
    matches!(e, DimensionMismatch { .. } | NotSquare { .. } | InvalidOverride { .. } | InvalidInput(_))
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Schema(e)
    }
}

impl From<mdcrt::Error> for CliError {
    fn from(e: mdcrt::Error) -> Self {
        CliError::Domain(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Json(Value),
    Csv(String),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Json(v) => format!("{v}\n"),
            Output::Csv(s) => s.clone(),
        }
    }
}

fn read_json(path: Option<&Path>) -> Result<Value, CliError> {
    let text = match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(e.to_string()))?;
            s
        }
    };
    serde_json::from_str(&text)
        .map_err(|e| CliError::Schema(SchemaError { pointer: "/".into(), message: format!("invalid JSON: {e}") }))
}

/// Runs one command. `overrides` is the parsed `--overrides` document.
pub fn execute(command: &Command, input: &Value, overrides: Option<&Value>) -> Result<Output, CliError> {
    let root = Node::root(input);
    let out = match command {
        Command::Lcrm(_) => lcrm(root)?,
        Command::Fpd { csv, .. } => return fpd_points(root, *csv),
        Command::Rem(_) => rem(root)?,
        Command::Crt(_) => solve_crt(root)?,
        Command::Neta { range, .. } => neta(root, range.rho, overrides)?,
        Command::SolveMulti { range, .. } => solve_multi(root, range.rho, overrides)?,
        Command::SolvePair(_) => solve_pair(root)?,
        Command::CheckCondition(_) => check_condition(root)?,
        Command::OnedimCompare(_) => onedim_compare(root)?,
        Command::Simulate { range, seed, threshold, prior, .. } => {
            simulate(root, range.rho, overrides, *seed, *threshold, *prior)?
        }
        Command::Bound(_) => bound(root)?,
    };
    Ok(Output::Json(out))
}

/// Reads input, executes, writes the result, and returns the exit code.
/// Errors go to stderr as a JSON document.
pub fn run(cli: &Cli) -> i32 {
    let result = (|| {
        let io = cli.command.io();
        let input = read_json(io.input.as_deref())?;
        let overrides = match &cli.command {
            Command::Neta { range, .. } | Command::SolveMulti { range, .. } | Command::Simulate { range, .. } => {
                range.overrides.as_deref().map(|p| read_json(Some(p))).transpose()?
            }
            _ => None,
        };
        let rendered = execute(&cli.command, &input, overrides.as_ref())?.render();
        match &io.out {
            Some(p) => fs::write(p, rendered).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => io::stdout().write_all(rendered.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
        }
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn moduli_set(root: Node<'_>) -> Result<ModuliSet<BigInt>, CliError> {
    Ok(ModuliSet::new(root.field("moduli", json::moduli)?)?)
}

/// Residue sets whose vectors match the moduli dimension.
fn residue_sets(root: Node<'_>, dim: usize) -> Parsed<Vec<Vec<IntVector>>> {
    root.field("sets", |n| n.non_empty_items(|s| s.non_empty_items(json::vector_of(dim))))
}

/// `--overrides` wins over the document's `overrides`.
fn range_overrides(root: Node<'_>, flag: Option<&Value>) -> Parsed<Option<BTreeMap<Vec<usize>, IntMatrix>>> {
    match flag {
        Some(doc) => json::overrides(Node::root(doc)).map(Some),
        None => root.optional("overrides", json::overrides),
    }
}

fn rho_of(root: Node<'_>, flag: Option<usize>) -> Parsed<usize> {
    match flag {
        Some(r) => Ok(r),
        None => root.field("rho", json::usize_value),
    }
}

fn lcrm(root: Node<'_>) -> Result<Value, CliError> {
    root.object(&["moduli"])?;
    let ms = root.field("moduli", json::moduli)?;
    let r = lattice::lcrm(&ms)?;
    let det = lattice_of(&r)?.volume();
    Ok(json!({"lcrm": json::write_matrix(&r), "det": json::write_int(&det)}))
}

fn fpd_points(root: Node<'_>, csv: bool) -> Result<Output, CliError> {
    root.object(&["matrix"])?;
    let m = root.field("matrix", json::matrix)?;
    let f = fpd(&m)?;
    let points = f.sorted_points();
    if csv {
        let header: Vec<String> = (1..=m.rows()).map(|i| format!("x{i}")).collect();
        let mut s = header.join(",") + "\n";
        for p in &points {
            s += &p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            s.push('\n');
        }
        return Ok(Output::Csv(s));
    }
    Ok(Output::Json(json!({"size": json::write_int(&f.size()), "points": json::write_vectors(&points)})))
}

fn rem(root: Node<'_>) -> Result<Value, CliError> {
    root.object(&["matrix", "vector"])?;
    let m = root.field("matrix", json::matrix)?;
    let f = root.field("vector", json::vector_of(m.rows()))?;
    let d = lattice::vector_remainder(&f, &m)?;
    Ok(json!({"remainder": json::write_vector(&d.remainder), "quotient": json::write_vector(&d.quotient)}))
}

fn solve_crt(root: Node<'_>) -> Result<Value, CliError> {
    root.object(&["congruences"])?;
    let pairs = root.field("congruences", |n| {
        n.non_empty_items(|c| {
            c.object(&["modulus", "residue"])?;
            let m = c.field("modulus", json::matrix)?;
            let r = c.field("residue", json::vector_of(m.rows()))?;
            Ok((m, r))
        })
    })?;
    let system = pairs
        .into_iter()
        .map(|(m, r)| Congruence::new(m, r))
        .collect::<mdcrt::Result<Vec<_>>>()?;
    let s = crt::solve(&system)?;
    Ok(json!({"value": json::write_vector(&s.value), "modulus": json::write_matrix(&s.combined_modulus)}))
}

fn neta(root: Node<'_>, rho_flag: Option<usize>, flag: Option<&Value>) -> Result<Value, CliError> {
    root.object(&["moduli", "rho", "overrides"])?;
    let ms = moduli_set(root)?;
    let rho = rho_of(root, rho_flag)?;
    let overrides = range_overrides(root, flag)?;
    let range = multivec::compute_range(&ms, rho, overrides.as_ref())?;
    let points = range.points();
    let lcrms: Vec<Value> = range
        .subset_lcrms()
        .iter()
        .map(|(s, m)| json!({"subset": json::write_indices(s), "lcrm": json::write_matrix(m)}))
        .collect();
    Ok(json!({
        "eta": range.eta(),
        "alpha": range.alpha(),
        "rho": rho,
        "size": points.len(),
        "points": json::write_vectors(&points),
        "subset_lcrms": lcrms,
    }))
}

fn verdict_json(v: &Verdict, obj: &mut Map<String, Value>) {
    let name = match v {
        Verdict::Accepted => "accepted",
        Verdict::NoSolution => "no_solution",
        Verdict::OutsideRange => "outside_range",
        Verdict::ResidueMismatch { set_index } => {
            obj.insert("mismatch_set".into(), json!(set_index));
            "residue_mismatch"
        }
        Verdict::AlreadyFound => "already_found",
    };
    obj.insert("verdict".into(), json!(name));
}

fn optional_vector(v: &Option<IntVector>) -> Value {
    v.as_ref().map_or(Value::Null, json::write_vector)
}

pub fn audit_json(events: &[AuditEvent<BigInt>]) -> Value {
    let one = |e: &AuditEvent<BigInt>| -> Value {
        match e {
            AuditEvent::FastPath { set_index } => json!({"event": "fast_path", "set": set_index}),
            AuditEvent::Candidate { round, tuple, subset, value, candidate, verdict } => {
                let mut obj = Map::new();
                obj.insert("event".into(), json!("candidate"));
                obj.insert("round".into(), json!(round));
                obj.insert("tuple".into(), json::write_vectors(tuple));
                obj.insert("subset".into(), json::write_indices(subset));
                obj.insert("value".into(), optional_vector(value));
                obj.insert("candidate".into(), optional_vector(candidate));
                verdict_json(verdict, &mut obj);
                Value::Object(obj)
            }
            AuditEvent::EmptySet { round, set_index } => json!({"event": "empty_set", "round": round, "set": set_index}),
            AuditEvent::Correction { round, steps } => {
                let steps: Vec<Value> = steps
                    .iter()
                    .map(|s| {
                        json!({
                            "set": s.set_index,
                            "removed": json::write_vector(&s.removed),
                            "restored": json::write_vector(&s.restored),
                        })
                    })
                    .collect();
                json!({"event": "correction", "round": round, "steps": steps})
            }
            AuditEvent::Rollback { round } => json!({"event": "rollback", "round": round}),
            AuditEvent::AuditFailed { vectors } => {
                json!({"event": "audit_failed", "vectors": json::write_vectors(vectors)})
            }
            AuditEvent::PairDifference { d_star } => {
                json!({"event": "pair_difference", "d_star": json::write_vector(d_star)})
            }
        }
    };
    Value::Array(events.iter().map(one).collect())
}

fn solve_multi(root: Node<'_>, rho_flag: Option<usize>, flag: Option<&Value>) -> Result<Value, CliError> {
    root.object(&["moduli", "sets", "rho", "overrides"])?;
    let ms = moduli_set(root)?;
    let sets = residue_sets(root, ms.dim())?;
    let rho = rho_of(root, rho_flag)?;
    let overrides = range_overrides(root, flag)?;
    let system = ResidueSetSystem::new(&ms, sets, rho)?;
    let range = multivec::compute_range(&ms, rho, overrides.as_ref())?;
    let out = multivec::reconstruct(&ms, &system, &range)?;
    Ok(json!({
        "vectors": json::write_vectors(&out.vectors),
        "crt_invocations": out.crt_invocations,
        "audit": audit_json(&out.rounds),
    }))
}

fn solve_pair(root: Node<'_>) -> Result<Value, CliError> {
    root.object(&["moduli", "sets", "lcrm"])?;
    let ms = moduli_set(root)?;
    let sets = residue_sets(root, ms.dim())?;
    let r = match root.optional("lcrm", json::matrix)? {
        Some(r) => r,
        None => lattice::lcrm(&ms.moduli())?,
    };
    let ps = PairSystem::new(ms, sets)?;
    let out = pairvec::reconstruct_pair(&ps, &r)?;
    Ok(json!({"d_star": json::write_vector(&out.d_star), "vectors": json::write_vectors(&out.vectors)}))
}

fn check_condition(root: Node<'_>) -> Result<Value, CliError> {
    root.object(&["moduli", "difference"])?;
    let ms = moduli_set(root)?;
    let d = root.field("difference", json::vector_of(ms.dim()))?;
    let lat = lattice_of(&lattice::lcrm(&ms.moduli())?)?;
    let shifts = pairvec::common_difference_set(&ms);
    let forward = in_shifted_lattice_sum(&d, &lat, &shifts);
    let backward = in_shifted_lattice_sum(&-&d, &lat, &shifts);
    let mut half = false;
    for m in ms.moduli() {
        half |= in_half_lattice(&d, &m)?;
    }
    Ok(json!({
        "satisfied": (forward || backward) && !half,
        "difference_in_sum": forward,
        "negation_in_sum": backward,
        "in_half_lattice": half,
    }))
}

fn int_set<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> Value {
    Value::Array(xs.into_iter().map(json::write_int).collect())
}

fn onedim_compare(root: Node<'_>) -> Result<Value, CliError> {
    root.object(&["moduli"])?;
    let moduli = root.field("moduli", |n| n.non_empty_items(json::int))?;
    let p = OneDimProblem::new(moduli)?;
    let cond = pairvec::onedim_condition_set(&p);
    let prior = pairvec::onedim_prior_sets(&p);
    let strict = |s: &std::collections::BTreeSet<BigInt>| s.is_subset(&cond) && s.len() < cond.len();
    Ok(json!({
        "lcm": json::write_int(p.lcm()),
        "condition_set": int_set(&cond),
        "half_smallest": int_set(&prior.half_smallest),
        "all_odd": int_set(&prior.all_odd),
        "largest_exceeds_twice_smallest": int_set(&prior.largest_exceeds_twice_smallest),
        "strict_subsets": {
            "half_smallest": strict(&prior.half_smallest),
            "all_odd": strict(&prior.all_odd),
            "largest_exceeds_twice_smallest": strict(&prior.largest_exceeds_twice_smallest),
        },
    }))
}

fn tone(dim: usize) -> impl Fn(Node<'_>) -> Parsed<Tone<f64, BigInt>> {
    move |n| {
        n.object(&["frequency", "amplitude"])?;
        let frequency = n.field("frequency", json::vector_of(dim))?;
        let amplitude = n
            .optional("amplitude", |a| match a.value {
                serde_json::Value::Array(_) => {
                    let parts = a.items(json::real)?;
                    match parts[..] {
                        [re, im] => Ok(Complex::new(re, im)),
                        _ => a.error("expected [re, im]"),
                    }
                }
                _ => Ok(Complex::new(json::real(a)?, 0.0)),
            })?
            .unwrap_or(Complex::new(1.0, 0.0));
        Ok(Tone { amplitude, frequency })
    }
}

fn simulate(
    root: Node<'_>,
    rho_flag: Option<usize>,
    flag: Option<&Value>,
    seed: u64,
    threshold_flag: Option<f64>,
    prior_flag: bool,
) -> Result<Value, CliError> {
    root.object(&["moduli", "tones", "noise", "rho", "threshold", "prior", "overrides"])?;
    let ms = moduli_set(root)?;
    let tones = root.field("tones", |n| n.non_empty_items(tone(ms.dim())))?;
    let mut spec = SignalSpec::new(tones)?;
    if let Some(sigma) = root.optional("noise", json::real)? {
        spec = spec.with_noise(sigma)?;
    }
    let rho = match rho_flag {
        Some(r) => r,
        None => root.optional("rho", json::usize_value)?.unwrap_or(spec.tones().len()),
    };
    let threshold = match threshold_flag {
        Some(t) => t,
        None => root.optional("threshold", json::real)?.unwrap_or(0.5),
    };
    let prior = prior_flag || root.optional("prior", json::boolean)?.unwrap_or(false);
    let overrides = range_overrides(root, flag)?;
    let detected = freqsim::detect_system(&spec, &ms, seed, rho, threshold)?;
    let options = EndToEndOptions { rho: Some(rho), threshold, prior, overrides };
    let out = freqsim::end_to_end(&spec, &ms, seed, &options)?;
    let sets: Vec<Value> = detected.iter().map(json::write_vectors).collect();
    Ok(json!({
        "residue_sets": sets,
        "vectors": json::write_vectors(&out.vectors),
        "crt_invocations": out.crt_invocations,
        "audit": audit_json(&out.rounds),
    }))
}

fn bound(root: Node<'_>) -> Result<Value, CliError> {
    root.object(&["gamma", "rho"])?;
    let gamma = root.field("gamma", json::usize_value)?;
    let rho = root.field("rho", json::usize_value)?;
    if rho == 0 || rho > gamma {
        return root.field("rho", |n| n.error(format!("need 1 <= rho <= gamma = {gamma}"))).map_err(Into::into);
    }
    let b = multivec::crt_invocation_bound(gamma, rho);
    Ok(json!({"gamma": gamma, "rho": rho, "bound": json::write_int(&BigInt::from(b))}))
}
