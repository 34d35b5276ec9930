//! Random scenarios and the criterion-versus-oracle campaign.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{best_criterion, Basis, OperatorClass, Status, Verdict, DEFAULT_CRITERION_TOL};
use crate::error::{Error, Result};
use crate::io::{func_to_repr, ComplexRepr, Scenario, ScenarioFile};
use crate::measure::{Func, MeasureSpace, Partition};
use crate::operator::WctOp;
use crate::oracles::{block_witness, definition_sides, oracle_wct, OracleConfig, WitnessOutcome};
use crate::spectral::{spectral_summary, SpectralSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Independent random `u`, `w`.
    Generic,
    /// `u = c_B·w̄` on each block.
    CauchySchwarzEquality,
    /// `u` constant on blocks.
    AMeasurableU,
    /// `w ≡ 0` on one block.
    ZeroWBlock,
    /// `E(uw) = 0` on one block with at least two atoms.
    NilpotentLike,
}

impl Generator {
    pub const ALL: [Generator; 5] = [
        Generator::Generic,
        Generator::CauchySchwarzEquality,
        Generator::AMeasurableU,
        Generator::ZeroWBlock,
        Generator::NilpotentLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Generic => "generic",
            Generator::CauchySchwarzEquality => "cauchy_schwarz_equality",
            Generator::AMeasurableU => "a_measurable_u",
            Generator::ZeroWBlock => "zero_w_block",
            Generator::NilpotentLike => "nilpotent_like",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown generator {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub count: usize,
    pub seed: u64,
    pub max_atoms: usize,
    pub max_blocks: usize,
    pub generators: Vec<Generator>,
    pub classes: Vec<OperatorClass>,
    pub oracle: OracleConfig,
    pub tol: f64,
    /// Attach spectral summaries to each scenario.
    pub spectral: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            count: 100,
            seed: 0,
            max_atoms: 8,
            max_blocks: 4,
            generators: vec![Generator::Generic],
            classes: default_classes(),
            oracle: OracleConfig::default(),
            tol: DEFAULT_CRITERION_TOL,
            spectral: true,
        }
    }
}

pub fn default_classes() -> Vec<OperatorClass> {
    vec![
        OperatorClass::Paranormal,
        OperatorClass::StarParanormal,
        OperatorClass::QuasiStarParanormal,
        OperatorClass::AbsoluteK { k: 1.0 },
        OperatorClass::NkQuasiStar { n: 1, k: 1 },
        OperatorClass::NkQuasiStar { n: 2, k: 2 },
        OperatorClass::NStar { n: 2 },
    ]
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter("count must be at least 1".into()));
        }
        if self.max_atoms < 2 || self.max_blocks < 1 || self.max_blocks > self.max_atoms {
            return Err(Error::InvalidParameter(
                "need max_atoms ≥ 2 and max_atoms ≥ max_blocks ≥ 1".into(),
            ));
        }
        if self.generators.is_empty() {
            return Err(Error::InvalidParameter("at least one generator is required".into()));
        }
        for c in &self.classes {
            c.validate()?;
        }
        self.oracle.validate()
    }
}

fn entry(rng: &mut ChaCha8Rng) -> Complex64 {
    if rng.random_bool(0.1) {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::from_polar(rng.random_range(0.0..=2.0), rng.random_range(0.0..TAU))
    }
}

fn nonzero_entry(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.1..=2.0), rng.random_range(0.0..TAU))
}

fn random_func(rng: &mut ChaCha8Rng, n: usize) -> Func {
    Func::new((0..n).map(|_| entry(rng)).collect())
}

/// Every block nonempty; at least one block has two or more atoms.
fn random_partition(rng: &mut ChaCha8Rng, n: usize, max_blocks: usize, min_blocks: usize) -> Partition {
    let hi = max_blocks.min(n - 1).max(min_blocks);
    let b = rng.random_range(min_blocks..=hi);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut label = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        label[i] = if pos < b { pos } else { rng.random_range(0..b) };
    }
    Partition::from_labels(&label)
}

/// The `index`-th scenario of a campaign. Depends only on
/// `(seed, index, max_atoms, max_blocks, generators)`.
pub fn generate(cfg: &CampaignConfig, index: usize) -> Result<Scenario> {
    if index >= cfg.count {
        return Err(Error::InvalidParameter(format!("index {index} ≥ count {}", cfg.count)));
    }
    let g = cfg.generators[index % cfg.generators.len()];
    generate_with(g, cfg.seed, index as u64, cfg.max_atoms, cfg.max_blocks)
}

pub fn generate_with(g: Generator, seed: u64, index: u64, max_atoms: usize, max_blocks: usize) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.random_range(2..=max_atoms.max(2));
    let mu: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..=2.0)).collect();
    let space = MeasureSpace::with_weights(mu)?;
    let min_blocks = if g == Generator::ZeroWBlock { 2 } else { 1 };
    let partition = random_partition(&mut rng, n, max_blocks.max(min_blocks), min_blocks);
    let mut w = random_func(&mut rng, n);
    let mut u = random_func(&mut rng, n);
    let blocks = partition.blocks().to_vec();
    match g {
        Generator::Generic => {}
        Generator::CauchySchwarzEquality => {
            let mut v = u.into_values();
            for b in &blocks {
                let c = nonzero_entry(&mut rng);
                for &i in b {
                    v[i] = c * w[i].conj();
                }
            }
            u = Func::new(v);
        }
        Generator::AMeasurableU => {
            let mut v = u.into_values();
            for b in &blocks {
                let c = entry(&mut rng);
                for &i in b {
                    v[i] = c;
                }
            }
            u = Func::new(v);
        }
        Generator::ZeroWBlock => {
            let b = &blocks[rng.random_range(0..blocks.len())];
            let mut v = w.into_values();
            for &i in b {
                v[i] = Complex64::new(0.0, 0.0);
            }
            w = Func::new(v);
        }
        Generator::NilpotentLike => {
            let big: Vec<&Vec<usize>> = blocks.iter().filter(|b| b.len() > 1).collect();
            let b = big[rng.random_range(0..big.len())];
            let mut wv = w.into_values();
            let mut uv = u.into_values();
            for &i in b {
                wv[i] = nonzero_entry(&mut rng);
                uv[i] = nonzero_entry(&mut rng);
            }
            // Remove the component of u along w̄ so that Σ u w μ = 0 on b.
            let mu = space.mu();
            let num: Complex64 = b.iter().map(|&i| uv[i] * wv[i] * mu[i]).sum();
            let den: f64 = b.iter().map(|&i| wv[i].norm_sqr() * mu[i]).sum();
            for &i in b {
                uv[i] -= num / den * wv[i].conj();
            }
            u = Func::new(uv);
            w = Func::new(wv);
        }
    }
    Scenario::new(space, partition, u, w, format!("{g}-{index}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    /// Criterion and oracle (or block witness) say the same thing.
    Agree,
    /// Criterion Holds, oracle found a violating vector.
    Conflict,
    /// Criterion Fails, but neither the oracle nor the block search found a
    /// violating vector.
    Unresolved,
    /// Criterion returned Unknown.
    Inconclusive,
    /// No closed-form criterion for the class.
    OracleOnly,
}

impl Agreement {
    pub fn is_disagreement(self) -> bool {
        matches!(self, Agreement::Conflict | Agreement::Unresolved)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub status: Status,
    pub margin: f64,
    pub boundary: bool,
    pub basis: Basis,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_atom: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_vector: Option<Vec<ComplexRepr>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_sides: Option<Sides>,
}

impl VerdictRecord {
    /// `class` and `t` are used to re-evaluate a witness vector's two sides.
    pub fn new(v: &Verdict, t: &WctOp, class: Option<OperatorClass>) -> Self {
        let sides = match (&v.witness_vector, class) {
            (Some(x), Some(c)) => definition_sides(&t.to_matrix(), c, x).ok().map(|s| Sides { lhs: s.lhs, rhs: s.rhs }),
            _ => None,
        };
        Self {
            status: v.status,
            margin: v.margin,
            boundary: v.boundary,
            basis: v.basis,
            witness_atom: v.witness_atom.map(|i| t.space().atom(i).to_string()),
            witness_vector: v.witness_vector.as_ref().map(func_to_repr),
            witness_sides: sides,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassResult {
    pub class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<VerdictRecord>,
    pub oracle: VerdictRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_witness: Option<VerdictRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub agreement: Agreement,
}

/// Cross-checks one class on one operator.
pub fn check_class(t: &WctOp, class: OperatorClass, oracle_cfg: &OracleConfig, tol: f64) -> Result<ClassResult> {
    let crit = best_criterion(t, class, tol)?;
    let oracle = oracle_wct(t, class, oracle_cfg)?;
    let mut witness = None;
    let mut diagnostic = None;
    let agreement = match &crit {
        None => Agreement::OracleOnly,
        Some(c) => match c.status {
            Status::Unknown => Agreement::Inconclusive,
            Status::Holds if oracle.fails() => Agreement::Conflict,
            Status::Holds => Agreement::Agree,
            Status::Fails => {
                let found = match c.witness_atom {
                    Some(atom) => match block_witness(t, atom, class, tol)? {
                        WitnessOutcome::Found { vector, sides } => {
                            witness = Some(Verdict {
                                status: Status::Fails,
                                margin: sides.slack(),
                                boundary: false,
                                basis: Basis::BlockWitness,
                                witness_atom: Some(atom),
                                witness_vector: Some(vector),
                            });
                            true
                        }
                        WitnessOutcome::NotFound { diagnostic: d } => {
                            diagnostic = Some(d);
                            false
                        }
                    },
                    None => false,
                };
                if found || oracle.fails() { Agreement::Agree } else { Agreement::Unresolved }
            }
        },
    };
    Ok(ClassResult {
        class: class.to_string(),
        criterion: crit.as_ref().map(|v| VerdictRecord::new(v, t, Some(class))),
        oracle: VerdictRecord::new(&oracle, t, Some(class)),
        block_witness: witness.as_ref().map(|v| VerdictRecord::new(v, t, Some(class))),
        diagnostic,
        agreement,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub index: usize,
    pub label: String,
    pub atoms: usize,
    pub blocks: usize,
    pub classes: Vec<ClassResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub index: usize,
    pub class: String,
    pub agreement: Agreement,
    pub scenario: ScenarioFile,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassTotals {
    pub class: String,
    pub holds: usize,
    pub fails: usize,
    pub unknown: usize,
    pub agree: usize,
    pub conflict: usize,
    pub unresolved: usize,
    pub inconclusive: usize,
    pub oracle_only: usize,
    pub oracle_fails: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigRecord {
    pub count: usize,
    pub seed: u64,
    pub max_atoms: usize,
    pub max_blocks: usize,
    pub generators: Vec<Generator>,
    pub classes: Vec<String>,
    pub samples: usize,
    pub oracle_seed: u64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub config: ConfigRecord,
    pub totals: Vec<ClassTotals>,
    pub spectral_mismatches: usize,
    pub zero_rule_mismatches: usize,
    pub disagreements: Vec<Disagreement>,
    pub scenarios: Vec<ScenarioResult>,
}

impl CampaignReport {
    pub fn has_disagreements(&self) -> bool {
        !self.disagreements.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

fn run_one(cfg: &CampaignConfig, index: usize) -> Result<(ScenarioResult, Vec<Disagreement>)> {
    let s = generate(cfg, index)?;
    let t = s.op()?;
    // Each scenario gets its own oracle stream.
    let oracle_cfg = OracleConfig { seed: cfg.oracle.seed.wrapping_add(index as u64), ..cfg.oracle };
    let mut classes = Vec::with_capacity(cfg.classes.len());
    let mut bad = Vec::new();
    for &c in &cfg.classes {
        let r = check_class(&t, c, &oracle_cfg, cfg.tol)?;
        if r.agreement.is_disagreement() {
            bad.push(Disagreement { index, class: r.class.clone(), agreement: r.agreement, scenario: s.to_file() });
        }
        classes.push(r);
    }
    let (spectral, spectral_error) = if cfg.spectral {
        match spectral_summary(&t) {
            Ok(x) => (Some(x), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    let result = ScenarioResult {
        index,
        label: s.label.clone(),
        atoms: t.dim(),
        blocks: t.partition().num_blocks(),
        classes,
        spectral,
        spectral_error,
    };
    Ok((result, bad))
}

/// Runs every scenario (in parallel) and merges results in index order.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let results: Vec<(ScenarioResult, Vec<Disagreement>)> =
        (0..cfg.count).into_par_iter().map(|i| run_one(cfg, i)).collect::<Result<_>>()?;

    let mut totals: Vec<ClassTotals> =
        cfg.classes.iter().map(|c| ClassTotals { class: c.to_string(), ..Default::default() }).collect();
    let mut disagreements = Vec::new();
    let mut scenarios = Vec::with_capacity(results.len());
    let (mut spectral_mismatches, mut zero_rule_mismatches) = (0, 0);
    for (r, bad) in results {
        for (tot, c) in totals.iter_mut().zip(&r.classes) {
            match c.criterion.as_ref().map(|v| v.status) {
                Some(Status::Holds) => tot.holds += 1,
                Some(Status::Fails) => tot.fails += 1,
                Some(Status::Unknown) => tot.unknown += 1,
                None => {}
            }
            if c.oracle.status == Status::Fails {
                tot.oracle_fails += 1;
            }
            match c.agreement {
                Agreement::Agree => tot.agree += 1,
                Agreement::Conflict => tot.conflict += 1,
                Agreement::Unresolved => tot.unresolved += 1,
                Agreement::Inconclusive => tot.inconclusive += 1,
                Agreement::OracleOnly => tot.oracle_only += 1,
            }
        }
        if let Some(sp) = &r.spectral {
            spectral_mismatches += usize::from(!sp.spectrum.agreement);
            zero_rule_mismatches += usize::from(!sp.spectrum.zero_rule_matches);
        }
        disagreements.extend(bad);
        scenarios.push(r);
    }
    Ok(CampaignReport {
        timestamp: None,
        config: ConfigRecord {
            count: cfg.count,
            seed: cfg.seed,
            max_atoms: cfg.max_atoms,
            max_blocks: cfg.max_blocks,
            generators: cfg.generators.clone(),
            classes: cfg.classes.iter().map(|c| c.to_string()).collect(),
            samples: cfg.oracle.samples,
            oracle_seed: cfg.oracle.seed,
            tol: cfg.tol,
        },
        totals,
        spectral_mismatches,
        zero_rule_mismatches,
        disagreements,
        scenarios,
    })
}
