//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report reads top to
//! bottom. Exits nonzero if any criterion fails or the total time exceeds
//! the budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use wctlab::campaign::{check_class, generate_with, run_campaign, Agreement, CampaignConfig, Generator};
use wctlab::criteria::{
    crit_equivalences, crit_k_quasi_star, crit_nk_quasi_star, crit_quasi_star_paranormal, nk_curves, CriterionCurve,
    DEFAULT_CRITERION_TOL,
};
use wctlab::io::Scenario;
use wctlab::measure::{cond_exp, inner, integral};
use wctlab::oracles::{block_witness, oracle_wct, OracleConfig, WitnessOutcome};
use wctlab::recognizer::{cond_exp_matrix, recover_structure, IDEMPOTENT};
use wctlab::spectral::{
    default_radius, kernel_consequences, riesz_idempotent, riesz_idempotent_matrix, riesz_self_adjointness, spectrum,
    RIESZ_POINTS,
};
use wctlab::{Complex64, Func, MeasureSpace, OpMatrix, OperatorClass, Partition, Status, WctOp};

const BUDGET: Duration = Duration::from_secs(60);
const MAX_ATOMS: usize = 8;
const MAX_BLOCKS: usize = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn scenario(g: Generator, seed: u64, index: u64) -> Scenario {
    generate_with(g, seed, index, MAX_ATOMS, MAX_BLOCKS).expect("generator output is valid")
}

fn op(g: Generator, seed: u64, index: u64) -> WctOp {
    scenario(g, seed, index).op().expect("generator output is valid")
}

/// `count` operators cycling through every generator.
fn mixed(seed: u64, count: usize) -> Vec<WctOp> {
    (0..count).map(|i| op(Generator::ALL[i % Generator::ALL.len()], seed, i as u64)).collect()
}

fn real_op(mu: &[f64], p: Partition, u: &[f64], w: &[f64]) -> WctOp {
    WctOp::new(MeasureSpace::with_weights(mu.to_vec()).unwrap(), p, Func::from_real(u), Func::from_real(w)).unwrap()
}

fn scenario_a() -> WctOp {
    real_op(&[0.5, 0.5], Partition::trivial(2), &[1.0, 2.0], &[2.0, 1.0])
}

fn scenario_b() -> WctOp {
    real_op(&[0.5, 0.5], Partition::trivial(2), &[1.0, 1.0], &[1.0, 1.0])
}

fn scenario_c() -> WctOp {
    real_op(&[0.2, 1.4, 0.9], Partition::discrete(3), &[1.0, -2.0, 0.5], &[3.0, 1.0, 2.0])
}

fn random_func(rng: &mut ChaCha8Rng, n: usize) -> Func {
    Func::new((0..n).map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect())
}

fn max_entry_diff(a: &OpMatrix, b: &OpMatrix) -> f64 {
    (a.entries() - b.entries()).iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn c1_cond_exp_laws() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let s = scenario(Generator::Generic, 101, i);
        let (x, p) = (&s.space, &s.partition);
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let f = random_func(&mut rng, x.len());
        let g = random_func(&mut rng, x.len());
        let e = |h: &Func| cond_exp(h, p, x).unwrap();
        let (ef, eg) = (e(&f), e(&g));
        worst = worst
            .max(e(&ef).dist_max(&ef))
            .max((inner(&ef, &g, x).unwrap() - inner(&f, &eg, x).unwrap()).norm())
            .max(e(&(&f * &eg)).dist_max(&(&ef * &eg)))
            .max((integral(&ef, x).unwrap() - integral(&f, x).unwrap()).norm());
    }
    outcome(worst <= 1e-12, format!("1000 cases, worst defect {worst:.1e} (tol 1e-12)"))
}

fn c2_norm() -> Outcome {
    let worst = mixed(102, 1000).iter().fold(0.0f64, |w, t| {
        let numeric = t.to_matrix().op_norm();
        w.max((t.op_norm() - numeric).abs() / numeric.max(f64::MIN_POSITIVE))
    });
    let a = scenario_a();
    let (closed, numeric) = (a.op_norm(), a.to_matrix().op_norm());
    let exact = closed == 2.5 && numeric == 2.5;
    outcome(
        worst <= 1e-9 && exact,
        format!("1000 cases, worst relative error {worst:.1e} (tol 1e-9); scenario A closed {closed}, numeric {numeric}"),
    )
}

fn c3_polar() -> Outcome {
    // Zero-w blocks give degenerate G; swapping u and w gives degenerate S.
    let mut ops = mixed(103, 800);
    for i in 0..200u64 {
        let s = scenario(Generator::ZeroWBlock, 103, 1000 + i);
        let (u, w) = if i % 2 == 0 { (s.u, s.w) } else { (s.w, s.u) };
        ops.push(WctOp::new(s.space, s.partition, u, w).unwrap());
    }
    let mut worst: f64 = 0.0;
    let mut kernel_mismatch = 0;
    for t in &ops {
        let m = t.to_matrix();
        let p = t.polar();
        let (u, a) = (&p.isometry, &p.modulus);
        let s = m.op_norm().max(1.0);
        worst = worst
            .max(u.mul(a).dist(&m) / s)
            .max(u.mul(&u.adjoint()).mul(u).dist(u))
            .max(a.hermitian_defect() / s)
            .max((-a.min_hermitian_eigenvalue() / s).max(0.0));
        // U*U and |T| are positive, so the kernel of their sum is the
        // intersection of the kernels.
        let rank = |x: &OpMatrix| x.rank(1e-9);
        let (ru, ra, rs) = (rank(u), rank(a), rank(&u.adjoint().mul(u).add(a)));
        if ru != ra || ra != rs {
            kernel_mismatch += 1;
        }
    }
    outcome(
        worst <= 1e-10 && kernel_mismatch == 0,
        format!("{} cases, worst defect {worst:.1e} (tol 1e-10), kernel mismatches {kernel_mismatch}", ops.len()),
    )
}

fn c4_power() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, t) in mixed(104, 500).iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let f = random_func(&mut rng, t.dim());
        let mut g = f.clone();
        for n in 1..=6 {
            g = t.apply(&g).unwrap();
            let scale = t.op_norm().max(1.0).powi(n) * f.max_abs();
            worst = worst.max(t.power_apply(n as u32, &f).unwrap().dist_max(&g) / scale);
        }
    }
    outcome(worst <= 1e-10, format!("500 cases, n ≤ 6, worst relative defect {worst:.1e} (tol 1e-10)"))
}

fn c5_quasi_star() -> Outcome {
    let cfg = OracleConfig { samples: 2000, ..OracleConfig::default() };
    let class = OperatorClass::QuasiStarParanormal;
    let rows: Vec<(Generator, u64, Status, bool, bool)> = (0..2000u64)
        .into_par_iter()
        .map(|i| {
            let g = if i % 2 == 0 { Generator::CauchySchwarzEquality } else { Generator::Generic };
            let t = op(g, 105, i);
            let v = crit_quasi_star_paranormal(&t, DEFAULT_CRITERION_TOL);
            let (conflict, witnessed) = match v.status {
                Status::Holds => {
                    let o = oracle_wct(&t, class, &OracleConfig { seed: i, ..cfg }).unwrap();
                    (o.fails(), false)
                }
                _ => {
                    let atom = v.witness_atom.expect("failing verdict names an atom");
                    let w = block_witness(&t, atom, class, DEFAULT_CRITERION_TOL).unwrap();
                    (false, matches!(w, WitnessOutcome::Found { .. }))
                }
            };
            (g, i, v.status, conflict, witnessed)
        })
        .collect();
    let conflicts = rows.iter().filter(|r| r.3).count();
    let fails: Vec<_> = rows.iter().filter(|r| r.2 == Status::Fails).collect();
    let witnessed = fails.iter().filter(|r| r.4).count();
    for r in fails.iter().filter(|r| !r.4) {
        eprintln!("residual (replay with `wctlab check`):\n{}", scenario(r.0, 105, r.1).to_json());
    }
    let rate = witnessed as f64 / fails.len().max(1) as f64;
    let generic: Vec<_> = rows.iter().filter(|r| r.0 == Generator::Generic).collect();
    let generic_fail = generic.iter().filter(|r| r.2 == Status::Fails).count() as f64 / generic.len() as f64;
    outcome(
        conflicts == 0 && rate >= 0.99 && generic_fail >= 0.90,
        format!(
            "2000 cases, {conflicts} oracle conflicts, witnesses {witnessed}/{} ({:.1}%, need 99%), generic failure rate {:.1}% (need 90%)",
            fails.len(),
            100.0 * rate,
            100.0 * generic_fail
        ),
    )
}

const GRID_LO: f64 = 1e-6;
const GRID_HI: f64 = 1e6;
const GRID_MARGIN: f64 = 1e-9;

enum GridCheck {
    Agree,
    /// The analytic minimiser `b/c` lies outside the grid; `h` evaluated
    /// there confirms the analytic sign.
    OutOfRange,
    Disagree { analytic: f64, grid: f64 },
}

fn relative_h(c: &CriterionCurve, t: f64) -> f64 {
    let p = c.power;
    let scale = c.a.abs() + (1.0 + p) * t.powf(p) * c.b + p * t.powf(p + 1.0) * c.c;
    if scale > 0.0 { c.eval(t) / scale } else { 0.0 }
}

fn grid_check(c: &CriterionCurve) -> GridCheck {
    let grid = (0..10_000)
        .map(|j| GRID_LO * (GRID_HI / GRID_LO).powf(j as f64 / 9_999.0))
        .map(|t| relative_h(c, t))
        .fold(f64::INFINITY, f64::min);
    let analytic = c.relative_slack();
    if (analytic < -GRID_MARGIN) == (grid < -GRID_MARGIN) || analytic.abs() <= GRID_MARGIN {
        return GridCheck::Agree;
    }
    match c.minimizer() {
        Some(t) if !(GRID_LO..=GRID_HI).contains(&t) && (relative_h(c, t) < 0.0) == (analytic < 0.0) => {
            GridCheck::OutOfRange
        }
        _ => GridCheck::Disagree { analytic, grid },
    }
}

fn c6_nk() -> Outcome {
    let ops = mixed(106, 1000);
    let pairs = [(1, 1), (1, 2), (2, 1), (2, 2)];
    let curves: Vec<(u32, u32, CriterionCurve)> = ops
        .iter()
        .flat_map(|t| pairs.iter().flat_map(move |&(n, k)| nk_curves(t, n, k).unwrap().into_iter().map(move |c| (n, k, c))))
        .collect();
    let checks: Vec<GridCheck> = curves.par_iter().map(|(_, _, c)| grid_check(c)).collect();
    let out_of_range = checks.iter().filter(|g| matches!(g, GridCheck::OutOfRange)).count();
    let mut grid_bad = 0;
    for ((n, k, c), g) in curves.iter().zip(&checks) {
        if let GridCheck::Disagree { analytic, grid } = g {
            grid_bad += 1;
            eprintln!("grid disagreement (n,k)=({n},{k}): analytic {analytic:.3e}, grid {grid:.3e}, curve {c:?}");
        }
    }
    let k_mismatch = ops
        .iter()
        .flat_map(|t| (1..=3).map(move |k| (t, k)))
        .filter(|&(t, k)| crit_k_quasi_star(t, k, DEFAULT_CRITERION_TOL).unwrap() != crit_nk_quasi_star(t, 1, k, DEFAULT_CRITERION_TOL).unwrap())
        .count();
    let cfg = OracleConfig { samples: 2000, ..OracleConfig::default() };
    let disagreements: usize = ops
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            pairs
                .iter()
                .filter(|&&(n, k)| {
                    let class = OperatorClass::NkQuasiStar { n, k };
                    let r = check_class(t, class, &OracleConfig { seed: i as u64, ..cfg }, DEFAULT_CRITERION_TOL).unwrap();
                    r.agreement.is_disagreement()
                })
                .count()
        })
        .sum();
    outcome(
        grid_bad == 0 && k_mismatch == 0 && disagreements == 0,
        format!(
            "{} atom curves, {grid_bad} grid disagreements ({out_of_range} minimisers outside the grid, checked at b/c); k-q*p vs (1,k) mismatches {k_mismatch}; oracle disagreements {disagreements}",
            curves.len()
        ),
    )
}

fn c7_equivalences() -> Outcome {
    let cfg = OracleConfig { samples: 2000, ..OracleConfig::default() };
    let gens = [Generator::Generic, Generator::CauchySchwarzEquality, Generator::AMeasurableU];
    let mut ops = Vec::new();
    let mut i = 0u64;
    while ops.len() < 500 {
        let t = op(gens[i as usize % gens.len()], 107, i);
        if t.cond().g.is_full() {
            ops.push(t);
        }
        i += 1;
    }
    let bad: usize = ops
        .par_iter()
        .enumerate()
        .filter(|(i, t)| {
            let rep = crit_equivalences(t, DEFAULT_CRITERION_TOL);
            let r = check_class(
                t,
                OperatorClass::QuasiStarParanormal,
                &OracleConfig { seed: *i as u64, ..cfg },
                DEFAULT_CRITERION_TOL,
            )
            .unwrap();
            !(rep.abc_equivalent && r.agreement == Agreement::Agree && rep.quasi_star_a_class == rep.pointwise.holds())
        })
        .count();
    let gated = (0..100u64)
        .filter(|&i| {
            let rep = crit_equivalences(&op(Generator::ZeroWBlock, 107, 10_000 + i), DEFAULT_CRITERION_TOL);
            !rep.g_is_full && !rep.abc_equivalent && !rep.d_equivalent
        })
        .count();
    outcome(
        bad == 0 && gated == 100,
        format!("{} cases with G = X, {bad} disagreements among (a), (b), (c); gating withheld on {gated}/100 zero-w cases", ops.len()),
    )
}

fn c8_spectrum() -> Outcome {
    let worst = mixed(108, 1000).iter().map(|t| spectrum(t).hausdorff).fold(0.0, f64::max);
    let a: Vec<Complex64> = spectrum(&scenario_a()).analytic;
    let a_ok = a.len() == 2 && a.iter().any(|z| z.norm() == 0.0) && a.iter().any(|z| (z - 2.0).norm() <= 1e-12);
    outcome(worst <= 1e-8 && a_ok, format!("1000 cases, worst Hausdorff {worst:.1e} (tol 1e-8); scenario A {a:?}"))
}

fn c9_adjoint() -> Outcome {
    let ops = mixed(109, 1000);
    let non_uniform = ops.iter().filter(|t| t.space().mu().windows(2).any(|w| w[0] != w[1])).count();
    let worst = ops.iter().fold(0.0f64, |w, t| {
        let m = t.to_matrix();
        w.max(max_entry_diff(&t.adjoint().to_matrix(), &m.adjoint()))
    });
    outcome(
        worst <= 1e-12 && non_uniform == ops.len(),
        format!("1000 cases ({non_uniform} non-uniform μ), worst entry defect {worst:.1e} (tol 1e-12)"),
    )
}

fn c10_riesz() -> Outcome {
    let one = Complex64::new(1.0, 0.0);
    let mut notes = Vec::new();
    let mut pass = true;

    let a = scenario_a();
    let two = Complex64::new(2.0, 0.0);
    let m = a.to_matrix();
    let r = riesz_idempotent(&a, two, default_radius(&m, two).unwrap(), RIESZ_POINTS).unwrap();
    let half = r.projector.dist(&m.scale(Complex64::new(0.5, 0.0)));
    let ca = riesz_self_adjointness(&a, two).unwrap();
    pass &= half <= 1e-8 && !ca.self_adjoint && !ca.kernel_inclusion;
    notes.push(format!("A: ‖E₂ − T/2‖ {half:.1e}, self-adjoint {} inclusion {}", ca.self_adjoint, ca.kernel_inclusion));

    let cb = riesz_self_adjointness(&scenario_b(), one).unwrap();
    pass &= cb.self_adjoint && cb.kernel_inclusion;
    let c = scenario_c();
    let cc: Vec<_> = c.block_values().into_iter().map(|mu| riesz_self_adjointness(&c, mu).unwrap()).collect();
    pass &= cc.iter().all(|x| x.self_adjoint && x.kernel_inclusion);
    notes.push(format!("B, C: both true {}", cb.self_adjoint && cb.kernel_inclusion && cc.iter().all(|x| x.self_adjoint)));

    // Idempotency at every isolated nonzero point of A, B, C and of random scenarios.
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let mut ops = vec![scenario_a(), scenario_b(), scenario_c()];
    ops.extend(mixed(110, 200));
    for t in &ops {
        let m = t.to_matrix();
        for mu in spectrum(t).analytic.into_iter().filter(|z| z.norm() > 1e-6) {
            let r = riesz_idempotent_matrix(&m, mu, default_radius(&m, mu).unwrap(), RIESZ_POINTS).unwrap();
            worst = worst.max(r.idempotency_defect / r.projector.op_norm().powi(2).max(1.0));
            points += 1;
        }
    }
    pass &= worst <= 1e-8;
    notes.push(format!("{points} points, worst idempotency defect {worst:.1e} (tol 1e-8)"));
    outcome(pass, notes.join("; "))
}

fn c11_kernel() -> Outcome {
    let gens = [Generator::CauchySchwarzEquality, Generator::AMeasurableU, Generator::Generic];
    let mut qualifying = Vec::new();
    let mut i = 0u64;
    while qualifying.len() < 500 {
        let t = op(gens[i as usize % gens.len()], 111, i);
        let holds = [(1, 1), (1, 2), (2, 1), (2, 2)]
            .iter()
            .all(|&(n, k)| crit_nk_quasi_star(&t, n, k, DEFAULT_CRITERION_TOL).unwrap().holds());
        if holds {
            qualifying.push(t);
        }
        i += 1;
    }
    let violations = qualifying
        .par_iter()
        .filter(|t| {
            let k = kernel_consequences(t).unwrap();
            k.hypothesis != Status::Holds || !k.all_pass
        })
        .count();
    outcome(violations == 0, format!("{} qualifying of {i} drawn, {violations} violations", qualifying.len()))
}

fn c12_recognizer() -> Outcome {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let s = scenario(Generator::Generic, 112, i);
        let (x, p) = (&s.space, &s.partition);
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let mut w: Vec<f64> =
            (0..x.len()).map(|_| if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.05..3.0) }).collect();
        for block in p.blocks() {
            let mut avg = block.iter().map(|&j| w[j] * x.mu()[j]).sum::<f64>() / x.measure_of(block);
            if avg == 0.0 {
                w[block[0]] = 1.0;
                avg = x.mu()[block[0]] / x.measure_of(block);
            }
            for &j in block {
                w[j] /= avg;
            }
        }
        let r = recover_structure(&cond_exp_matrix(x, p, &w).unwrap()).unwrap();
        let weight_err = r
            .weight
            .as_ref()
            .map(|v| v.iter().zip(&w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .unwrap_or(f64::INFINITY);
        worst = worst.max(r.rebuild_defect.unwrap_or(f64::INFINITY));
        if !r.is_wct_form || r.partition.as_ref() != Some(p) || weight_err > 1e-10 {
            failures += 1;
        }
    }
    let x = MeasureSpace::with_weights(vec![0.3, 1.1, 0.6, 2.0]).unwrap();
    let identity = recover_structure(&OpMatrix::identity(&x)).unwrap().is_wct_form;
    let p = Partition::new(vec![vec![0, 2], vec![1, 3]], 4).unwrap();
    let plain = recover_structure(&cond_exp_matrix(&x, &p, &[1.0; 4]).unwrap()).unwrap().is_wct_form;
    let a = recover_structure(&scenario_a().to_matrix()).unwrap();
    let a_rejected = !a.is_wct_form && a.failed_condition == Some(IDEMPOTENT);
    outcome(
        failures == 0 && worst <= 1e-10 && identity && plain && a_rejected,
        format!(
            "1000 instances, {failures} failures, worst rebuild defect {worst:.1e} (tol 1e-10); identity {identity}, E {plain}, scenario A rejected at {:?}",
            a.failed_condition
        ),
    )
}

fn c13_determinism() -> Outcome {
    let cfg = CampaignConfig {
        count: 40,
        seed: 113,
        generators: Generator::ALL.to_vec(),
        oracle: OracleConfig { samples: 300, ..OracleConfig::default() },
        ..CampaignConfig::default()
    };
    let first = run_campaign(&cfg).unwrap().to_json();
    let second = run_campaign(&cfg).unwrap().to_json();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| run_campaign(&cfg).unwrap().to_json());
    outcome(
        first == second && first == serial,
        format!("40-scenario campaign, repeat identical {}, single-thread identical {}", first == second, first == serial),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("conditional expectation laws", c1_cond_exp_laws),
        ("norm formula", c2_norm),
        ("polar decomposition", c3_polar),
        ("power formula", c4_power),
        ("quasi-*-paranormal criterion", c5_quasi_star),
        ("(n,k) criterion and grid scan", c6_nk),
        ("quasi-*-paranormal equivalences", c7_equivalences),
        ("spectrum", c8_spectrum),
        ("adjoint identity", c9_adjoint),
        ("Riesz idempotents", c10_riesz),
        ("kernel consequences", c11_kernel),
        ("recognizer", c12_recognizer),
        ("determinism", c13_determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {:<34} {:>6.2}s  {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            t0.elapsed().as_secs_f64(),
            o.detail
        );
    }
    let total = start.elapsed();
    let in_budget = total <= BUDGET;
    println!(
        "{} total {:.2}s (budget {}s), {} of 13 criteria passed",
        if in_budget { "PASS" } else { "FAIL" },
        total.as_secs_f64(),
        BUDGET.as_secs(),
        13 - failed
    );
    if failed == 0 && in_budget { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
