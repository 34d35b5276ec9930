//! Recognising conditional-expectation-type operators `f ↦ E(wf)`.
//!
//! A matrix is of this form iff it is lattice positive, idempotent, fixes the
//! constant function `1`, and its range is closed under pointwise modulus.
//! "Positive" here means entrywise nonnegative in atom coordinates (the
//! Riesz-space notion), **not** positive semidefinite. Order continuity holds
//! for every linear map in finite dimension and is recorded, not tested.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::matrix::OpMatrix;
use crate::measure::{inner, norm, Func, Partition};
use crate::operator::WctOp;

/// Threshold for every test in this module, relative to the matrix size.
pub const RECOGNIZER_TOL: f64 = 1e-10;

pub const POSITIVITY: &str = "positivity";
pub const IDEMPOTENT: &str = "T²=T";
pub const FIXES_ONE: &str = "T1=1";
pub const SUBLATTICE: &str = "range sublattice";
pub const ORDER_CONTINUITY: &str = "order continuity";
pub const REBUILD: &str = "rebuild";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub passed: bool,
    /// Size of the violation (0 when exact); `None` when not measured.
    pub defect: Option<f64>,
}

fn entry_scale(m: &OpMatrix) -> f64 {
    m.entries().iter().fold(1.0f64, |a, z| a.max(z.norm()))
}

/// Evaluates the four conditions plus order continuity, in that order.
pub fn check_conditions(m: &OpMatrix) -> Result<Vec<Condition>> {
    let n = m.dim();
    let space = m.space();
    let scale = entry_scale(m);
    let tol = RECOGNIZER_TOL * scale;

    let neg = m
        .entries()
        .iter()
        .map(|z| (-z.re).max(0.0).max(z.im.abs()))
        .fold(0.0, f64::max);

    let idem = m.mul(m).dist(m);

    let one = Func::ones(n);
    let t1 = m.apply(&one)?;
    let fix = t1.dist_max(&one);

    // `|f|` must lie in the range for every f in a spanning set of it.
    let basis = m.range_basis(tol);
    let mut lattice: f64 = 0.0;
    for f in &basis {
        let g = f.map(|z| Complex64::new(z.norm(), 0.0));
        let mut r = g.clone();
        for b in &basis {
            r = &r - &b.scale(inner(&g, b, space)?);
        }
        lattice = lattice.max(norm(&r, space)?);
    }

    Ok(vec![
        Condition { name: POSITIVITY, passed: neg <= tol, defect: Some(neg) },
        Condition { name: IDEMPOTENT, passed: idem <= tol, defect: Some(idem) },
        Condition { name: FIXES_ONE, passed: fix <= tol, defect: Some(fix) },
        Condition { name: SUBLATTICE, passed: lattice <= 1e-8, defect: Some(lattice) },
        Condition { name: ORDER_CONTINUITY, passed: true, defect: None },
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionResult {
    pub is_wct_form: bool,
    pub conditions: Vec<Condition>,
    pub partition: Option<Partition>,
    pub weight: Option<Vec<f64>>,
    pub failed_condition: Option<&'static str>,
    pub rebuild_defect: Option<f64>,
}

/// Report form with atom ids in place of indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecognitionReport {
    pub is_wct_form: bool,
    pub failed_condition: Option<&'static str>,
    pub conditions: Vec<Condition>,
    pub partition: Option<Vec<Vec<String>>>,
    pub weight: Option<Vec<f64>>,
    pub rebuild_defect: Option<f64>,
}

impl RecognitionResult {
    pub fn report(&self, m: &OpMatrix) -> RecognitionReport {
        let ids = m.space().atoms();
        RecognitionReport {
            is_wct_form: self.is_wct_form,
            failed_condition: self.failed_condition,
            conditions: self.conditions.clone(),
            partition: self
                .partition
                .as_ref()
                .map(|p| p.blocks().iter().map(|b| b.iter().map(|&i| ids[i].clone()).collect()).collect()),
            weight: self.weight.clone(),
            rebuild_defect: self.rebuild_defect,
        }
    }
}

/// Matrix of `f ↦ E(wf)`.
pub fn cond_exp_matrix(space: &crate::measure::MeasureSpace, partition: &Partition, w: &[f64]) -> Result<OpMatrix> {
    let n = space.len();
    let t = WctOp::new(space.clone(), partition.clone(), Func::from_real(w), Func::ones(n))?;
    Ok(t.to_matrix())
}

/// Runs [`check_conditions`] and, if everything passes, recovers the
/// partition (groups of identical rows) and the weight
/// `w_j = T_ij·μ(B)/μ_j`, then rebuilds and compares.
pub fn recover_structure(m: &OpMatrix) -> Result<RecognitionResult> {
    let conditions = check_conditions(m)?;
    if let Some(c) = conditions.iter().find(|c| !c.passed) {
        return Ok(RecognitionResult {
            is_wct_form: false,
            failed_condition: Some(c.name),
            conditions,
            partition: None,
            weight: None,
            rebuild_defect: None,
        });
    }
    let n = m.dim();
    let e = m.entries();
    let tol = RECOGNIZER_TOL * entry_scale(m);
    let same_row = |i: usize, k: usize| (0..n).all(|j| (e[(i, j)] - e[(k, j)]).norm() <= tol);

    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        if label[i] != usize::MAX {
            continue;
        }
        label[i] = next;
        for k in i + 1..n {
            if label[k] == usize::MAX && same_row(i, k) {
                label[k] = next;
            }
        }
        next += 1;
    }
    let partition = Partition::from_labels(&label);

    let space = m.space();
    let mut weight = vec![0.0; n];
    for block in partition.blocks() {
        let mb = space.measure_of(block);
        let i = block[0];
        for &j in block {
            weight[j] = e[(i, j)].re * mb / space.mu()[j];
        }
        let avg: f64 = block.iter().map(|&j| weight[j] * space.mu()[j]).sum::<f64>() / mb;
        if avg > 0.0 {
            for &j in block {
                weight[j] /= avg;
            }
        }
    }

    let rebuilt = cond_exp_matrix(space, &partition, &weight)?;
    let defect = (rebuilt.entries() - m.entries()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let ok = defect <= tol;
    Ok(RecognitionResult {
        is_wct_form: ok,
        failed_condition: if ok { None } else { Some(REBUILD) },
        conditions,
        partition: Some(partition),
        weight: Some(weight),
        rebuild_defect: Some(defect),
    })
}
