//! Pointwise membership criteria for the paranormal-type classes.
//!
//! Every class below is defined by positivity of an operator pencil in a
//! parameter `t > 0`. For `T = M_w E M_u` each pencil collapses to a
//! multiplication operator composed with `M_ū E M_u`, so membership reduces
//! to a scalar inequality per atom of the form
//!
//! ```text
//! h(t) = a − (1+p)·tᵖ·b + p·tᵖ⁺¹·c ≥ 0   for all t > 0.
//! ```
//!
//! With `c > 0` the minimum sits at `t* = b/c` and the condition becomes
//! `a·cᵖ ≥ bᵖ⁺¹`. [`CriterionCurve`] holds `(p, a, b, c)` and does that
//! elimination in one place.
//!
//! Some classes only have a necessary and a separate sufficient condition;
//! those return [`Status::Unknown`] when the two disagree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{cond_exp, Func};
use crate::operator::WctOp;

/// Holds/Fails boundary, relative to the size of the terms being compared.
pub const DEFAULT_CRITERION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Unknown,
}

/// How a verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// An if-and-only-if criterion.
    Exact,
    /// The exact criterion that requires `u` to be `A`-measurable.
    ExactMeasurableU,
    /// A necessary condition failed.
    Necessary,
    /// A sufficient condition held.
    Sufficient,
    /// Necessary condition passed, sufficient condition failed.
    Inconclusive,
    /// Random search for a counterexample.
    Sampling,
    /// Constructed counterexample on one block.
    BlockWitness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// Worst normalised slack. Negative means violated.
    pub margin: f64,
    /// The decisive inequality holds with equality up to tolerance.
    pub boundary: bool,
    pub basis: Basis,
    pub witness_atom: Option<usize>,
    pub witness_vector: Option<Func>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn fails(&self) -> bool {
        self.status == Status::Fails
    }
}

/// The operator classes covered by criteria and oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorClass {
    Paranormal,
    MParanormal { m: f64 },
    StarParanormal,
    QuasiStarParanormal,
    AbsoluteK { k: f64 },
    NkQuasiStar { n: u32, k: u32 },
    NStar { n: u32 },
    KQuasiStar { k: u32 },
}

impl OperatorClass {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            OperatorClass::MParanormal { m } if !(m > 0.0 && m.is_finite()) => bad(format!("M must be positive, got {m}")),
            OperatorClass::AbsoluteK { k } if !(k > 0.0 && k.is_finite()) => bad(format!("k must be positive, got {k}")),
            OperatorClass::NkQuasiStar { n, k } if n == 0 || k == 0 => bad(format!("n and k must be at least 1, got ({n},{k})")),
            OperatorClass::NStar { n } if n == 0 => bad("n must be at least 1".into()),
            OperatorClass::KQuasiStar { k } if k == 0 => bad("k must be at least 1".into()),
            _ => Ok(()),
        }
    }

    /// Short name without parameters.
    pub fn name(&self) -> &'static str {
        match self {
            OperatorClass::Paranormal => "paranormal",
            OperatorClass::MParanormal { .. } => "m-paranormal",
            OperatorClass::StarParanormal => "*-paranormal",
            OperatorClass::QuasiStarParanormal => "quasi-*-paranormal",
            OperatorClass::AbsoluteK { .. } => "absolute-k-paranormal",
            OperatorClass::NkQuasiStar { .. } => "(n,k)-quasi-*-paranormal",
            OperatorClass::NStar { .. } => "n-*-paranormal",
            OperatorClass::KQuasiStar { .. } => "k-quasi-*-paranormal",
        }
    }

    /// Parameters as `(name, value)` pairs, for reports.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            OperatorClass::MParanormal { m } => vec![("M", m)],
            OperatorClass::AbsoluteK { k } => vec![("k", k)],
            OperatorClass::NkQuasiStar { n, k } => vec![("n", n as f64), ("k", k as f64)],
            OperatorClass::NStar { n } => vec![("n", n as f64)],
            OperatorClass::KQuasiStar { k } => vec![("k", k as f64)],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for OperatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorClass::Paranormal => write!(f, "paranormal"),
            OperatorClass::MParanormal { m } => write!(f, "m-paranormal={m}"),
            OperatorClass::StarParanormal => write!(f, "*-paranormal"),
            OperatorClass::QuasiStarParanormal => write!(f, "q*p"),
            OperatorClass::AbsoluteK { k } => write!(f, "abs-k={k}"),
            OperatorClass::NkQuasiStar { n, k } => write!(f, "(n,k)={n},{k}"),
            OperatorClass::NStar { n } => write!(f, "n*={n}"),
            OperatorClass::KQuasiStar { k } => write!(f, "k-q*p={k}"),
        }
    }
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what} value {s:?}")))
}

impl FromStr for OperatorClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (key, val) = match s.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (s, None),
        };
        fn need<'a>(key: &str, v: Option<&'a str>) -> Result<&'a str> {
            v.ok_or_else(|| Error::Parse(format!("class {key:?} needs a parameter")))
        }
        let class = match key {
            "paranormal" | "p" => OperatorClass::Paranormal,
            "m-paranormal" | "m-p" => OperatorClass::MParanormal { m: parse_num(need(key, val)?, "M")? },
            "*-paranormal" | "*p" | "star" => OperatorClass::StarParanormal,
            "q*p" | "quasi-*-paranormal" => OperatorClass::QuasiStarParanormal,
            "abs-k" | "absolute-k" => OperatorClass::AbsoluteK { k: parse_num(need(key, val)?, "k")? },
            "(n,k)" | "nk" => {
                let v = need(key, val)?;
                let (n, k) = v
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("(n,k) needs two values, got {v:?}")))?;
                OperatorClass::NkQuasiStar { n: parse_num(n, "n")?, k: parse_num(k, "k")? }
            }
            "n*" | "n-*-paranormal" => OperatorClass::NStar { n: parse_num(need(key, val)?, "n")? },
            "k-q*p" | "k-quasi-*-paranormal" => OperatorClass::KQuasiStar { k: parse_num(need(key, val)?, "k")? },
            _ => return Err(Error::Parse(format!("unknown class {key:?}"))),
        };
        if val.is_some() && class.params().is_empty() {
            return Err(Error::Parse(format!("class {key:?} takes no parameter")));
        }
        class.validate()?;
        Ok(class)
    }
}

/// Parses a comma-separated class list such as `q*p,(n,k)=1,2,abs-k=1.5`.
/// The `(n,k)` entry consumes the following item as its second value.
pub fn parse_class_list(s: &str) -> Result<Vec<OperatorClass>> {
    let mut pieces = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                pieces.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(&s[start..]);
    let mut out = Vec::new();
    let mut items = pieces.into_iter().map(str::trim).filter(|t| !t.is_empty());
    while let Some(item) = items.next() {
        if item.starts_with("(n,k)=") || item.starts_with("nk=") {
            let second = items
                .next()
                .ok_or_else(|| Error::Parse(format!("{item:?} is missing its k value")))?;
            out.push(format!("{item},{second}").parse()?);
        } else {
            out.push(item.parse()?);
        }
    }
    Ok(out)
}

/// Per-atom coefficients of `h(t) = a − (1+p)tᵖb + p·tᵖ⁺¹c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionCurve {
    pub power: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CriterionCurve {
    pub fn eval(&self, t: f64) -> f64 {
        let p = self.power;
        self.a - (1.0 + p) * t.powf(p) * self.b + p * t.powf(p + 1.0) * self.c
    }

    /// Where `h` attains its minimum over `t > 0`, if it does.
    pub fn minimizer(&self) -> Option<f64> {
        (self.c > 0.0 && self.b > 0.0).then(|| self.b / self.c)
    }

    /// A quantity with the sign of `inf_{t>0} h(t)`, and the size of the terms
    /// it was formed from.
    pub fn reduced(&self) -> (f64, f64) {
        let p = self.power;
        if self.b <= 0.0 {
            // h is increasing; the infimum is h(0⁺) = a.
            return (self.a, self.a.abs());
        }
        if self.c <= 0.0 {
            // h → −∞ as t → ∞.
            return (-self.b, self.b);
        }
        let lhs = self.a * self.c.powf(p);
        let rhs = self.b.powf(p + 1.0);
        (lhs - rhs, lhs.abs().max(rhs))
    }

    /// `reduced` divided by its scale; zero when everything vanishes.
    pub fn relative_slack(&self) -> f64 {
        let (s, scale) = self.reduced();
        if scale > 0.0 { s / scale } else { 0.0 }
    }
}

fn finish(slacks: &[f64], tol: f64, basis: Basis) -> Verdict {
    let (worst_atom, margin) = slacks
        .iter()
        .copied()
        .enumerate()
        .fold((None, f64::INFINITY), |(ai, m), (i, s)| if s < m { (Some(i), s) } else { (ai, m) });
    let margin = if margin.is_finite() { margin } else { 0.0 };
    let fails = margin < -tol;
    Verdict {
        status: if fails { Status::Fails } else { Status::Holds },
        margin,
        boundary: !fails && margin.abs() <= tol,
        basis,
        witness_atom: if fails { worst_atom } else { None },
        witness_vector: None,
    }
}

/// Combines a necessary condition (per-atom slacks) with a sufficient one.
fn three_valued(necessary: &[f64], sufficient: bool, tol: f64) -> Verdict {
    let mut v = finish(necessary, tol, Basis::Necessary);
    if v.status == Status::Holds {
        if sufficient {
            v.basis = Basis::Sufficient;
        } else {
            v.status = Status::Unknown;
            v.basis = Basis::Inconclusive;
        }
    }
    v
}

fn atoms(t: &WctOp) -> std::ops::Range<usize> {
    0..t.dim()
}

/// `E(|u|²)E(|w|²) ≤ |E(uw)|²` on `G`, per atom (relative slack).
pub fn quasi_star_slacks(t: &WctOp) -> Vec<f64> {
    let cd = t.cond();
    atoms(t)
        .map(|i| {
            if !cd.g.contains(i) {
                return 0.0;
            }
            let lhs = cd.eu2_at(i) * cd.ew2_at(i);
            let rhs = cd.abs_euw_sq_at(i);
            let scale = lhs.max(rhs);
            if scale > 0.0 { (rhs - lhs) / scale } else { 0.0 }
        })
        .collect()
}

/// Quasi-*-paranormality: holds iff `E(|u|²)E(|w|²) ≤ |E(uw)|²` on `G`.
pub fn crit_quasi_star_paranormal(t: &WctOp, tol: f64) -> Verdict {
    finish(&quasi_star_slacks(t), tol, Basis::Exact)
}

/// `(M²|E(uw)|²E|w|² − 2λE|w|²)|E(u)|² + λ² ≥ 0` as a curve in `λ`.
pub fn m_paranormal_necessary_curves(t: &WctOp, m: f64) -> Vec<CriterionCurve> {
    let cd = t.cond();
    atoms(t)
        .map(|i| {
            let ew2 = cd.ew2_at(i);
            let eu_sq = cd.abs_eu_sq_at(i);
            CriterionCurve { power: 1.0, a: m * m * cd.abs_euw_sq_at(i) * ew2 * eu_sq, b: ew2 * eu_sq, c: 1.0 }
        })
        .collect()
}

/// `M²|E(uw)|²E|w|² − 2λE|w|² ≥ 0` for every `λ > 0` forces `E|w|² = 0`.
fn slope_free(t: &WctOp) -> bool {
    t.cond().g.is_empty()
}

pub fn crit_m_paranormal(t: &WctOp, m: f64, tol: f64) -> Result<Verdict> {
    OperatorClass::MParanormal { m }.validate()?;
    let slacks: Vec<f64> = m_paranormal_necessary_curves(t, m).iter().map(CriterionCurve::relative_slack).collect();
    Ok(three_valued(&slacks, slope_free(t), tol))
}

pub fn crit_paranormal(t: &WctOp, tol: f64) -> Verdict {
    crit_m_paranormal(t, 1.0, tol).expect("M = 1 is valid")
}

fn require_measurable_u(t: &WctOp) -> Result<()> {
    if t.u_is_measurable() {
        Ok(())
    } else {
        Err(Error::Precondition("u is not constant on the blocks of the partition".into()))
    }
}

/// M-paranormality for `A`-measurable `u`: `(M²|uE(w)|²E|w|² − 2λE|w|²)|u|² + λ² ≥ 0`.
pub fn m_paranormal_measurable_curves(t: &WctOp, m: f64) -> Result<Vec<CriterionCurve>> {
    require_measurable_u(t)?;
    let cd = t.cond();
    let ew = cond_exp(t.w(), t.partition(), t.space())?;
    Ok(atoms(t)
        .map(|i| {
            let u_sq = t.u()[i].norm_sqr();
            let ew2 = cd.ew2_at(i);
            let u_ew_sq = (t.u()[i] * ew[i]).norm_sqr();
            CriterionCurve { power: 1.0, a: m * m * u_ew_sq * ew2 * u_sq, b: ew2 * u_sq, c: 1.0 }
        })
        .collect())
}

pub fn crit_m_paranormal_ameasurable(t: &WctOp, m: f64, tol: f64) -> Result<Verdict> {
    OperatorClass::MParanormal { m }.validate()?;
    let slacks: Vec<f64> = m_paranormal_measurable_curves(t, m)?.iter().map(CriterionCurve::relative_slack).collect();
    Ok(finish(&slacks, tol, Basis::ExactMeasurableU))
}

/// Necessary condition for absolute-k-paranormality, tested on `A`-measurable
/// functions: `E|u|²^{k−1} χ_S E|w|²^k |E(uw)|² |E(u)|² − (k+1)λᵏ E|w|² |E(u)|² + kλᵏ⁺¹ ≥ 0`.
pub fn absolute_k_necessary_curves(t: &WctOp, k: f64) -> Vec<CriterionCurve> {
    let cd = t.cond();
    atoms(t)
        .map(|i| {
            let ew2 = cd.ew2_at(i);
            let eu_sq = cd.abs_eu_sq_at(i);
            let a = if cd.s.contains(i) {
                cd.eu2_at(i).powf(k - 1.0) * ew2.powf(k) * cd.abs_euw_sq_at(i) * eu_sq
            } else {
                0.0
            };
            CriterionCurve { power: k, a, b: ew2 * eu_sq, c: 1.0 }
        })
        .collect()
}

/// The same inequality with `E(u) = u`, `E(|u|²) = |u|²`, `E(uw) = uE(w)`;
/// an exact criterion when `u` is `A`-measurable.
pub fn absolute_k_measurable_curves(t: &WctOp, k: f64) -> Result<Vec<CriterionCurve>> {
    require_measurable_u(t)?;
    let cd = t.cond();
    let ew = cond_exp(t.w(), t.partition(), t.space())?;
    Ok(atoms(t)
        .map(|i| {
            let u_sq = t.u()[i].norm_sqr();
            let ew2 = cd.ew2_at(i);
            let a = if cd.s.contains(i) { u_sq.powf(k + 1.0) * ew[i].norm_sqr() * ew2.powf(k) } else { 0.0 };
            CriterionCurve { power: k, a, b: ew2 * u_sq, c: 1.0 }
        })
        .collect())
}

/// The measurable-`u` inequality with its factors grouped exactly as
/// `(|uE(w)|²|u|^{2k−2} χ_S E|w|²^k |u|² − (k+1)λᵏE|w|²)|u|² + kλᵏ⁺¹`.
/// Kept for comparison: it carries two extra powers of `|u|²` in the leading
/// term and is not a sound criterion on its own.
pub fn absolute_k_measurable_literal_curves(t: &WctOp, k: f64) -> Result<Vec<CriterionCurve>> {
    require_measurable_u(t)?;
    let cd = t.cond();
    let ew = cond_exp(t.w(), t.partition(), t.space())?;
    Ok(atoms(t)
        .map(|i| {
            let u_sq = t.u()[i].norm_sqr();
            let ew2 = cd.ew2_at(i);
            let a = if cd.s.contains(i) {
                (t.u()[i] * ew[i]).norm_sqr() * u_sq.powf(k - 1.0) * ew2.powf(k) * u_sq * u_sq
            } else {
                0.0
            };
            CriterionCurve { power: k, a, b: ew2 * u_sq, c: 1.0 }
        })
        .collect())
}

pub fn crit_absolute_k(t: &WctOp, k: f64, tol: f64) -> Result<Verdict> {
    OperatorClass::AbsoluteK { k }.validate()?;
    if t.u_is_measurable() {
        let slacks: Vec<f64> = absolute_k_measurable_curves(t, k)?.iter().map(CriterionCurve::relative_slack).collect();
        return Ok(finish(&slacks, tol, Basis::ExactMeasurableU));
    }
    let slacks: Vec<f64> = absolute_k_necessary_curves(t, k).iter().map(CriterionCurve::relative_slack).collect();
    Ok(three_valued(&slacks, slope_free(t), tol))
}

/// Verdict of the literal measurable-`u` reading, see
/// [`absolute_k_measurable_literal_curves`].
pub fn crit_absolute_k_literal(t: &WctOp, k: f64, tol: f64) -> Result<Verdict> {
    OperatorClass::AbsoluteK { k }.validate()?;
    let slacks: Vec<f64> = absolute_k_measurable_literal_curves(t, k)?.iter().map(CriterionCurve::relative_slack).collect();
    Ok(finish(&slacks, tol, Basis::ExactMeasurableU))
}

/// `α_μ = a − (1+n)μⁿb + nμⁿ⁺¹c` with
/// `a = |E(uw)|^{2(n+k)}E|w|²`, `b = |E(uw)|^{2(k−1)}(E|w|²)²E|u|²`,
/// `c = |E(uw)|^{2(k−1)}E|w|²`. For `k = 1` the `|E(uw)|⁰` factor is `1`
/// everywhere, including where `E(uw)` vanishes.
pub fn nk_curves(t: &WctOp, n: u32, k: u32) -> Result<Vec<CriterionCurve>> {
    OperatorClass::NkQuasiStar { n, k }.validate()?;
    let cd = t.cond();
    Ok(atoms(t)
        .map(|i| {
            let e = cd.abs_euw_sq_at(i);
            let ew2 = cd.ew2_at(i);
            let lead = e.powi((k - 1) as i32);
            CriterionCurve {
                power: n as f64,
                a: e.powi((n + k) as i32) * ew2,
                b: lead * ew2 * ew2 * cd.eu2_at(i),
                c: lead * ew2,
            }
        })
        .collect())
}

pub fn crit_nk_quasi_star(t: &WctOp, n: u32, k: u32, tol: f64) -> Result<Verdict> {
    let slacks: Vec<f64> = nk_curves(t, n, k)?.iter().map(CriterionCurve::relative_slack).collect();
    Ok(finish(&slacks, tol, Basis::Exact))
}

/// n-*-paranormality. The pencil coefficients carry `|E(uw)|⁻²`; multiplying
/// through by `|E(uw)|²` (positive where it is defined) gives
/// `a = |E(uw)|^{2n+2}E|w|²`, `b = (E|w|²)²E|u|²`, `c = E|w|²`, which is
/// defined on every atom.
pub fn n_star_curves(t: &WctOp, n: u32) -> Result<Vec<CriterionCurve>> {
    OperatorClass::NStar { n }.validate()?;
    let cd = t.cond();
    Ok(atoms(t)
        .map(|i| {
            let e = cd.abs_euw_sq_at(i);
            let ew2 = cd.ew2_at(i);
            CriterionCurve { power: n as f64, a: e.powi(n as i32 + 1) * ew2, b: ew2 * ew2 * cd.eu2_at(i), c: ew2 }
        })
        .collect())
}

pub fn crit_n_star(t: &WctOp, n: u32, tol: f64) -> Result<Verdict> {
    let slacks: Vec<f64> = n_star_curves(t, n)?.iter().map(CriterionCurve::relative_slack).collect();
    Ok(finish(&slacks, tol, Basis::Exact))
}

/// k-quasi-*-paranormality is the `n = 1` case of `(n,k)`.
pub fn crit_k_quasi_star(t: &WctOp, k: u32, tol: f64) -> Result<Verdict> {
    crit_nk_quasi_star(t, 1, k, tol)
}

/// Criterion verdict for a class, or `None` when no criterion exists
/// (*-paranormality).
pub fn criterion(t: &WctOp, class: OperatorClass, tol: f64) -> Result<Option<Verdict>> {
    class.validate()?;
    Ok(Some(match class {
        OperatorClass::Paranormal => crit_paranormal(t, tol),
        OperatorClass::MParanormal { m } => crit_m_paranormal(t, m, tol)?,
        OperatorClass::StarParanormal => return Ok(None),
        OperatorClass::QuasiStarParanormal => crit_quasi_star_paranormal(t, tol),
        OperatorClass::AbsoluteK { k } => crit_absolute_k(t, k, tol)?,
        OperatorClass::NkQuasiStar { n, k } => crit_nk_quasi_star(t, n, k, tol)?,
        OperatorClass::NStar { n } => crit_n_star(t, n, tol)?,
        OperatorClass::KQuasiStar { k } => crit_k_quasi_star(t, k, tol)?,
    }))
}

/// Like [`criterion`], but an inconclusive M-paranormal verdict is settled by
/// the measurable-`u` criterion when `u` allows it.
pub fn best_criterion(t: &WctOp, class: OperatorClass, tol: f64) -> Result<Option<Verdict>> {
    let v = criterion(t, class, tol)?;
    if let Some(v) = &v {
        if v.status == Status::Unknown && t.u_is_measurable() {
            let m = match class {
                OperatorClass::Paranormal => Some(1.0),
                OperatorClass::MParanormal { m } => Some(m),
                _ => None,
            };
            if let Some(m) = m {
                return Ok(Some(crit_m_paranormal_ameasurable(t, m, tol)?));
            }
        }
    }
    Ok(v)
}

/// Per-atom relative slacks of the condition that decides (or refutes) the
/// class. Negative entries are violating atoms.
pub fn atom_slacks(t: &WctOp, class: OperatorClass) -> Result<Option<Vec<f64>>> {
    class.validate()?;
    let rel = |c: Vec<CriterionCurve>| c.iter().map(CriterionCurve::relative_slack).collect::<Vec<_>>();
    Ok(Some(match class {
        OperatorClass::Paranormal => rel(m_paranormal_necessary_curves(t, 1.0)),
        OperatorClass::MParanormal { m } => rel(m_paranormal_necessary_curves(t, m)),
        OperatorClass::StarParanormal => return Ok(None),
        OperatorClass::QuasiStarParanormal => quasi_star_slacks(t),
        OperatorClass::AbsoluteK { k } => {
            if t.u_is_measurable() {
                rel(absolute_k_measurable_curves(t, k)?)
            } else {
                rel(absolute_k_necessary_curves(t, k))
            }
        }
        OperatorClass::NkQuasiStar { n, k } => rel(nk_curves(t, n, k)?),
        OperatorClass::NStar { n } => rel(n_star_curves(t, n)?),
        OperatorClass::KQuasiStar { k } => rel(nk_curves(t, 1, k)?),
    }))
}

/// Which equivalences among quasi-*-paranormality (a), quasi-*-A-class (b),
/// the pointwise inequality (c) and A-class (d) are certified for `T`.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// The pointwise inequality, evaluated on `G`.
    pub pointwise: Verdict,
    /// `G = X`.
    pub g_is_full: bool,
    /// `S(E(u)) = X`.
    pub eu_support_full: bool,
    /// (a) ⇔ (b) ⇔ (c) certified.
    pub abc_equivalent: bool,
    /// (d) joins the equivalence.
    pub d_equivalent: bool,
    /// `T*|T²|T ≥ T*|T*|²T`, checked numerically.
    pub quasi_star_a_class: bool,
    /// `|T|² ≤ |T²|`, checked numerically.
    pub a_class: bool,
}

/// Weighted PSD test with tolerance relative to `scale`.
fn is_psd(m: &crate::matrix::OpMatrix, scale: f64) -> bool {
    m.min_hermitian_eigenvalue() >= -1e-9 * scale.max(f64::MIN_POSITIVE)
}

pub fn crit_equivalences(t: &WctOp, tol: f64) -> EquivalenceReport {
    let pointwise = crit_quasi_star_paranormal(t, tol);
    let cd = t.cond();
    let g_is_full = cd.g.is_full();
    let eu = cond_exp(t.u(), t.partition(), t.space()).expect("valid operator");
    let eu_support_full = crate::measure::support_rel(&eu, t.support_tol()).is_full();

    let m = t.to_matrix();
    let adj = m.adjoint();
    let t2 = m.mul(&m);
    let abs_t2 = adj.mul(&adj).mul(&t2).psd_sqrt();
    let abs_t_sq = adj.mul(&m);
    let abs_tstar_sq = m.mul(&adj);
    let norm = m.op_norm();

    let a_class = is_psd(&abs_t2.sub(&abs_t_sq), norm * norm);
    let qa = adj.mul(&abs_t2.sub(&abs_tstar_sq)).mul(&m);
    let quasi_star_a_class = is_psd(&qa, norm.powi(4));

    EquivalenceReport {
        pointwise,
        g_is_full,
        eu_support_full,
        abc_equivalent: g_is_full,
        d_equivalent: g_is_full && eu_support_full,
        quasi_star_a_class,
        a_class,
    }
}
