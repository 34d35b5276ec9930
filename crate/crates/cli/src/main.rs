use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;
use wctlab::campaign::{default_classes, run_campaign, CampaignConfig, Generator, VerdictRecord};
use wctlab::criteria::{best_criterion, parse_class_list, DEFAULT_CRITERION_TOL};
use wctlab::io::{MatrixFile, Scenario};
use wctlab::oracles::{block_witness, oracle_wct, OracleConfig, WitnessOutcome};
use wctlab::recognizer::recover_structure;
use wctlab::spectral::spectral_summary;
use wctlab::{Error, OpMatrix, OperatorClass, Status, Verdict};

const CLEAN: u8 = 0;
const FOUND: u8 = 1;
const INVALID: u8 = 2;

/// Set when the JSON report goes to stdout; the summary then goes to stderr.
static SUMMARY_TO_STDERR: AtomicBool = AtomicBool::new(false);

macro_rules! say {
    ($($arg:tt)*) => {
        if SUMMARY_TO_STDERR.load(Ordering::Relaxed) { eprint!($($arg)*) } else { print!($($arg)*) }
    };
}

macro_rules! sayln {
    ($($arg:tt)*) => { say!("{}\n", format_args!($($arg)*)) };
}

#[derive(Parser)]
#[command(name = "wctlab", version, about = "Weighted conditional expectation operator lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form class criteria on a scenario.
    Check {
        scenario: PathBuf,
        /// Comma-separated class ids, e.g. `q*p,(n,k)=1,2,abs-k=1.5`.
        #[arg(long)]
        classes: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CRITERION_TOL)]
        tol: f64,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Analytic and numeric spectra, Riesz idempotents, kernel checks.
    Spectrum {
        scenario: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Closed-form polar factors and the Aluthge transform.
    Polar {
        scenario: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Search for a vector violating a class definition.
    Oracle {
        scenario: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Random scenarios, criterion against oracle.
    Campaign {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated generator names.
        #[arg(long, default_value = "generic")]
        generators: String,
        /// Comma-separated class ids; empty for a spectral-only report.
        #[arg(long)]
        classes: Option<String>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        max_atoms: usize,
        #[arg(long, default_value_t = 4)]
        max_blocks: usize,
        #[arg(long, default_value_t = DEFAULT_CRITERION_TOL)]
        tol: f64,
        /// Skip per-scenario spectral summaries.
        #[arg(long)]
        no_spectral: bool,
        /// Record the wall-clock time in the report.
        #[arg(long)]
        timestamp: bool,
        /// Write each disagreement as a scenario file in this directory.
        #[arg(long)]
        replay_dir: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Decide whether a matrix is `f ↦ E(wf)` and recover the structure.
    Recognize {
        matrix: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

type Outcome = Result<u8, Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_target = match &cli.command {
        Command::Check { json, .. }
        | Command::Spectrum { json, .. }
        | Command::Polar { json, .. }
        | Command::Oracle { json, .. }
        | Command::Campaign { json, .. }
        | Command::Recognize { json, .. } => json.clone(),
    };
    SUMMARY_TO_STDERR.store(json_target.as_deref() == Some(Path::new("-")), Ordering::Relaxed);
    let r = match cli.command {
        Command::Check { scenario, classes, tol, json } => check(&scenario, classes.as_deref(), tol, json.as_deref()),
        Command::Spectrum { scenario, json } => spectrum(&scenario, json.as_deref()),
        Command::Polar { scenario, json } => polar(&scenario, json.as_deref()),
        Command::Oracle { scenario, class, samples, seed, tol, json } => {
            oracle(&scenario, &class, OracleConfig { samples, seed, tol, ..Default::default() }, json.as_deref())
        }
        Command::Campaign {
            count,
            seed,
            generators,
            classes,
            samples,
            max_atoms,
            max_blocks,
            tol,
            no_spectral,
            timestamp,
            replay_dir,
            json,
        } => (|| {
            let cfg = CampaignConfig {
                count,
                seed,
                max_atoms,
                max_blocks,
                generators: generators.split(',').map(str::parse).collect::<Result<Vec<Generator>, _>>()?,
                classes: parse_classes(classes.as_deref())?,
                oracle: OracleConfig { samples, seed, ..Default::default() },
                tol,
                spectral: !no_spectral,
            };
            campaign(&cfg, timestamp, replay_dir.as_deref(), json.as_deref())
        })(),
        Command::Recognize { matrix, json } => recognize(&matrix, json.as_deref()),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INVALID)
        }
    }
}

fn in_file(path: &Path, e: Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Scenario, Error> {
    Scenario::read(path).map_err(|e| in_file(path, e))
}

fn parse_classes(s: Option<&str>) -> Result<Vec<OperatorClass>, Error> {
    match s {
        None => Ok(default_classes()),
        Some(s) if s.trim().is_empty() => Ok(Vec::new()),
        Some(s) => parse_class_list(s),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let Some(out) = out else { return Ok(()) };
    let text = serde_json::to_string_pretty(value)? + "\n";
    if out == Path::new("-") {
        print!("{text}");
    } else {
        fs::write(out, text)?;
    }
    Ok(())
}

fn fmt_status(s: Status) -> &'static str {
    match s {
        Status::Holds => "holds",
        Status::Fails => "FAILS",
        Status::Unknown => "unknown",
    }
}

#[derive(Serialize)]
struct CheckEntry {
    class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    criterion: Option<VerdictRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    block_witness: Option<VerdictRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct CheckReport {
    label: String,
    classes: Vec<CheckEntry>,
}

fn check(path: &Path, classes: Option<&str>, tol: f64, json: Option<&Path>) -> Outcome {
    let s = load(path)?;
    let t = s.op()?;
    let mut any_fail = false;
    let mut entries = Vec::new();
    for class in parse_classes(classes)? {
        let mut entry = CheckEntry { class: class.to_string(), criterion: None, block_witness: None, note: None };
        match best_criterion(&t, class, tol)? {
            None => {
                entry.note = Some("no closed-form criterion; use `wctlab oracle`".into());
                sayln!("{:<16} -        (no criterion)", entry.class);
            }
            Some(v) => {
                any_fail |= v.fails();
                say!("{:<16} {:<8} margin {:+.3e}  {:?}", entry.class, fmt_status(v.status), v.margin, v.basis);
                if let Some(a) = v.witness_atom {
                    say!("  at {}", t.space().atom(a));
                    if v.fails() {
                        match block_witness(&t, a, class, tol)? {
                            WitnessOutcome::Found { vector, sides } => {
                                let w = Verdict {
                                    status: Status::Fails,
                                    margin: sides.slack(),
                                    boundary: false,
                                    basis: wctlab::criteria::Basis::BlockWitness,
                                    witness_atom: Some(a),
                                    witness_vector: Some(vector),
                                };
                                say!("  witness lhs {:.6e} > rhs {:.6e}", sides.lhs, sides.rhs);
                                entry.block_witness = Some(VerdictRecord::new(&w, &t, Some(class)));
                            }
                            WitnessOutcome::NotFound { diagnostic } => entry.note = Some(diagnostic),
                        }
                    }
                }
                say!("\n");
                entry.criterion = Some(VerdictRecord::new(&v, &t, Some(class)));
            }
        }
        entries.push(entry);
    }
    emit(&CheckReport { label: s.label, classes: entries }, json)?;
    Ok(if any_fail { FOUND } else { CLEAN })
}

fn fmt_set(v: &[wctlab::Complex64]) -> String {
    let items: Vec<String> = v
        .iter()
        .map(|z| if z.im == 0.0 { format!("{:.6}", z.re) } else { format!("{:.6}{:+.6}i", z.re, z.im) })
        .collect();
    format!("{{{}}}", items.join(", "))
}

fn spectrum(path: &Path, json: Option<&Path>) -> Outcome {
    let t = load(path)?.op()?;
    let r = spectral_summary(&t)?;
    let sp = &r.spectrum;
    sayln!("analytic  {}", fmt_set(&sp.analytic));
    sayln!("numeric   {}", fmt_set(&sp.numeric));
    sayln!("hausdorff {:.3e} ({})", sp.hausdorff, if sp.agreement { "agree" } else { "DISAGREE" });
    sayln!("sigma_p   {}", fmt_set(&sp.sigma_p));
    sayln!("sigma_jp  {}", fmt_set(&sp.sigma_jp));
    sayln!("sigma_a   {}", fmt_set(&sp.sigma_a));
    sayln!("sigma_ja  {}", fmt_set(&sp.sigma_ja));
    if !sp.zero_rule_matches {
        sayln!("note: S∩G = X but 0 ∈ σ without E(uw) vanishing (finite-dimensional kernel)");
    }
    for c in &r.riesz {
        sayln!(
            "riesz at {}: idempotency {:.2e}, self-adjoint {}, kernel inclusion {}",
            fmt_set(&[c.mu]),
            c.idempotency_defect,
            c.self_adjoint,
            c.kernel_inclusion
        );
    }
    let k = &r.kernel_checks;
    sayln!("kernel checks: hypothesis {}, all pass {}", fmt_status(k.hypothesis), k.all_pass);
    emit(&r, json)?;
    let bad = !sp.agreement || k.contradiction || r.riesz.iter().any(|c| !c.consistent);
    Ok(if bad { FOUND } else { CLEAN })
}

#[derive(Serialize)]
struct PolarReport {
    modulus: Vec<Vec<[f64; 2]>>,
    isometry: Vec<Vec<[f64; 2]>>,
    aluthge: Vec<Vec<[f64; 2]>>,
    norm: f64,
    factorization_defect: f64,
    partial_isometry_defect: f64,
    modulus_min_eigenvalue: f64,
}

fn print_matrix(name: &str, m: &OpMatrix) {
    sayln!("{name}:");
    for row in m.to_rows() {
        let cells: Vec<String> = row
            .iter()
            .map(|[re, im]| if *im == 0.0 { format!("{re:>10.6}") } else { format!("{re:>10.6}{im:+.6}i") })
            .collect();
        sayln!("  {}", cells.join(" "));
    }
}

fn polar(path: &Path, json: Option<&Path>) -> Outcome {
    let t = load(path)?.op()?;
    let m = t.to_matrix();
    let p = t.polar();
    let al = t.aluthge();
    let fact = p.isometry.mul(&p.modulus).dist(&m);
    let piso = p.isometry.mul(&p.isometry.adjoint()).mul(&p.isometry).dist(&p.isometry);
    let min_eig = p.modulus.min_hermitian_eigenvalue();
    print_matrix("|T|", &p.modulus);
    print_matrix("U", &p.isometry);
    print_matrix("Aluthge", &al);
    sayln!("‖T‖ = {:.12}", t.op_norm());
    sayln!("‖U|T| − T‖ = {fact:.3e}, ‖UU*U − U‖ = {piso:.3e}, min eig |T| = {min_eig:.3e}");
    emit(
        &PolarReport {
            modulus: p.modulus.to_rows(),
            isometry: p.isometry.to_rows(),
            aluthge: al.to_rows(),
            norm: t.op_norm(),
            factorization_defect: fact,
            partial_isometry_defect: piso,
            modulus_min_eigenvalue: min_eig,
        },
        json,
    )?;
    let scale = t.op_norm().max(1.0);
    let bad = fact > 1e-10 * scale || piso > 1e-10 || min_eig < -1e-10 * scale;
    Ok(if bad { FOUND } else { CLEAN })
}

#[derive(Serialize)]
struct OracleReport {
    class: String,
    samples: usize,
    seed: u64,
    oracle: VerdictRecord,
}

fn oracle(path: &Path, class: &str, cfg: OracleConfig, json: Option<&Path>) -> Outcome {
    let t = load(path)?.op()?;
    let class: OperatorClass = class.parse()?;
    let v = oracle_wct(&t, class, &cfg)?;
    let rec = VerdictRecord::new(&v, &t, Some(class));
    match (&v.status, &rec.witness_sides) {
        (Status::Fails, Some(s)) => sayln!("{class}: counterexample found, lhs {:.6e} > rhs {:.6e}", s.lhs, s.rhs),
        _ => sayln!("{class}: no counterexample in {} samples (worst margin {:+.3e})", cfg.samples, v.margin),
    }
    emit(&OracleReport { class: class.to_string(), samples: cfg.samples, seed: cfg.seed, oracle: rec }, json)?;
    Ok(if v.fails() { FOUND } else { CLEAN })
}

fn campaign(cfg: &CampaignConfig, timestamp: bool, replay: Option<&Path>, json: Option<&Path>) -> Outcome {
    let mut r = run_campaign(cfg)?;
    if timestamp {
        r.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    sayln!("{} scenarios, seed {}", cfg.count, cfg.seed);
    for t in &r.totals {
        sayln!(
            "{:<16} holds {:>5} fails {:>5} unknown {:>5} | oracle fails {:>5} | agree {:>5} conflict {} unresolved {}",
            t.class, t.holds, t.fails, t.unknown, t.oracle_fails, t.agree, t.conflict, t.unresolved
        );
    }
    if cfg.spectral {
        sayln!("spectral mismatches {}, zero-rule notes {}", r.spectral_mismatches, r.zero_rule_mismatches);
    }
    if let Some(dir) = replay {
        fs::create_dir_all(dir)?;
        for d in &r.disagreements {
            let text = serde_json::to_string_pretty(&d.scenario)? + "\n";
            let name = format!("{:06}-{}.json", d.index, d.class.replace(|c: char| !c.is_ascii_alphanumeric(), "_"));
            fs::write(dir.join(name), text)?;
        }
    }
    sayln!("disagreements: {}", r.disagreements.len());
    emit(&r, json)?;
    Ok(if r.has_disagreements() || r.spectral_mismatches > 0 { FOUND } else { CLEAN })
}

fn recognize(path: &Path, json: Option<&Path>) -> Outcome {
    let m = MatrixFile::read(path).map_err(|e| in_file(path, e))?;
    let r = recover_structure(&m)?;
    for c in &r.conditions {
        let d = c.defect.map(|d| format!("{d:.3e}")).unwrap_or_else(|| "automatic".into());
        sayln!("{:<18} {} ({d})", c.name, if c.passed { "pass" } else { "FAIL" });
    }
    let rep = r.report(&m);
    match (&rep.partition, &rep.weight) {
        (Some(p), Some(w)) if r.is_wct_form => {
            sayln!("recognized: blocks {p:?}, w = {w:?}");
        }
        _ => sayln!("not of the form f ↦ E(wf): {}", r.failed_condition.unwrap_or("?")),
    }
    emit(&rep, json)?;
    Ok(if r.is_wct_form { CLEAN } else { FOUND })
}
