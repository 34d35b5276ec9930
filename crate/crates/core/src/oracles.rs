//! Definition-level falsifiers for the paranormal-type classes.
//!
//! Each class is a homogeneous norm inequality `lhs(x) ≤ rhs(x)`:
//!
//! | class                  | lhs               | rhs                          |
//! |------------------------|-------------------|------------------------------|
//! | M-paranormal           | `‖Tx‖²`           | `M‖T²x‖‖x‖`                  |
//! | *-paranormal           | `‖T*x‖²`          | `‖T²x‖‖x‖`                   |
//! | quasi-*-paranormal     | `‖T*Tx‖²`         | `‖T³x‖‖Tx‖`                  |
//! | absolute-k-paranormal  | `‖Tx‖ᵏ⁺¹`         | `‖|T|ᵏTx‖‖x‖ᵏ`               |
//! | (n,k)-quasi-*          | `‖T*Tᵏx‖ⁿ⁺¹`      | `‖Tⁿ⁺ᵏ⁺¹x‖‖Tᵏx‖ⁿ`            |
//! | n-*-paranormal         | `‖T*x‖ⁿ⁺¹`        | `‖Tⁿ⁺¹x‖‖x‖ⁿ`                |
//!
//! For a fixed vector, "pencil ≥ 0 for every λ > 0" is the same statement as
//! the norm inequality (minimise the quadratic or power in λ), so each sample
//! is checked exactly. What sampling cannot do is cover the whole sphere:
//! a clean run is evidence, not proof.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::criteria::{atom_slacks, Basis, OperatorClass, Status, Verdict};
use crate::error::{check_dim, Error, Result};
use crate::matrix::{from_frame_vector, CMatrix, OpMatrix};
use crate::measure::{norm, Func, Partition};
use crate::operator::WctOp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Coordinate-ascent sweeps around the worst sample.
    pub ascent_steps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { samples: 2000, seed: 0, tol: 1e-10, ascent_steps: 50 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Both sides of a definitional inequality at one vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
    /// `νᵈ‖x‖ᵖ`, where `d` is the total degree in `T` and `ν` the norm of `T`
    /// on the reducing blocks `x` touches. Sets the noise floor.
    pub scale: f64,
}

impl Sides {
    /// `(rhs − lhs)` normalised; negative when violated.
    pub fn slack(&self) -> f64 {
        let denom = self.lhs.max(self.rhs) + self.scale;
        if denom > 0.0 { (self.rhs - self.lhs) / denom } else { 0.0 }
    }

    pub fn violated(&self, tol: f64) -> bool {
        self.slack() < -tol
    }
}

/// `lhs = ‖A y‖ᵖ`, `rhs = factor · ‖B y‖ · ‖C y‖^q` in the unit frame.
struct Inequality {
    a: CMatrix,
    p: f64,
    b: CMatrix,
    c: Option<CMatrix>,
    q: f64,
    factor: f64,
    degree: f64,
    blocks: ReducingBlocks,
}

fn norm_of_product(m: &CMatrix, y: &[Complex64]) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        let mut s = Complex64::new(0.0, 0.0);
        for (j, yj) in y.iter().enumerate() {
            s += m[(i, j)] * yj;
        }
        acc += s.norm_sqr();
    }
    acc.sqrt()
}

fn vec_norm(y: &[Complex64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn spectral_norm(m: &CMatrix) -> f64 {
    crate::matrix::singular_values(m).first().copied().unwrap_or(0.0)
}

/// Total degree in `T` of either side.
fn degree(class: OperatorClass) -> f64 {
    match class {
        OperatorClass::Paranormal | OperatorClass::MParanormal { .. } | OperatorClass::StarParanormal => 2.0,
        OperatorClass::QuasiStarParanormal => 4.0,
        OperatorClass::AbsoluteK { k } => k + 1.0,
        OperatorClass::NkQuasiStar { .. } | OperatorClass::KQuasiStar { .. } => {
            let (n, k) = nk_params(class);
            ((k + 1) * (n + 1)) as f64
        }
        OperatorClass::NStar { n } => n as f64 + 1.0,
    }
}

/// Connected components of the sparsity pattern of `T + T*`. Each spans a
/// reducing subspace, so a vector supported on some components never sees
/// the rest of `T`, in exact or floating-point arithmetic.
struct ReducingBlocks {
    comp_of: Vec<usize>,
    norms: Vec<f64>,
}

impl ReducingBlocks {
    fn new(m: &OpMatrix) -> Self {
        let n = m.dim();
        let e = m.entries();
        let zero = Complex64::new(0.0, 0.0);
        let mut comp_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if comp_of[start] != usize::MAX {
                continue;
            }
            let c = members.len();
            let mut stack = vec![start];
            let mut group = Vec::new();
            comp_of[start] = c;
            while let Some(i) = stack.pop() {
                group.push(i);
                for j in 0..n {
                    if comp_of[j] == usize::MAX && (e[(i, j)] != zero || e[(j, i)] != zero) {
                        comp_of[j] = c;
                        stack.push(j);
                    }
                }
            }
            members.push(group);
        }
        let t = m.unitary_frame();
        let norms = members
            .iter()
            .map(|g| spectral_norm(&t.select_rows(g.iter()).select_columns(g.iter())))
            .collect();
        Self { comp_of, norms }
    }

    fn norm_touching(&self, nonzero: impl Fn(usize) -> bool) -> f64 {
        (0..self.comp_of.len())
            .filter(|&i| nonzero(i))
            .map(|i| self.norms[self.comp_of[i]])
            .fold(0.0, f64::max)
    }
}

fn nk_params(class: OperatorClass) -> (u32, u32) {
    match class {
        OperatorClass::NkQuasiStar { n, k } => (n, k),
        OperatorClass::KQuasiStar { k } => (1, k),
        _ => unreachable!("not an (n,k) class"),
    }
}

fn mpow(m: &CMatrix, n: u32) -> CMatrix {
    let mut acc = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..n {
        acc = &acc * m;
    }
    acc
}

impl Inequality {
    fn new(m: &OpMatrix, class: OperatorClass) -> Result<Self> {
        class.validate()?;
        let t = m.unitary_frame();
        let ts = t.adjoint();
        let (a, p, b, c, q, factor) = match class {
            OperatorClass::Paranormal => (t.clone(), 2.0, &t * &t, None, 1.0, 1.0),
            OperatorClass::MParanormal { m } => (t.clone(), 2.0, &t * &t, None, 1.0, m),
            OperatorClass::StarParanormal => (ts, 2.0, &t * &t, None, 1.0, 1.0),
            OperatorClass::QuasiStarParanormal => (&ts * &t, 2.0, mpow(&t, 3), Some(t.clone()), 1.0, 1.0),
            OperatorClass::AbsoluteK { k } => {
                let abs_k = OpMatrix::from_unitary_frame(&ts * &t, m.space())?.psd_power(k / 2.0).unitary_frame();
                (t.clone(), k + 1.0, abs_k * &t, None, k, 1.0)
            }
            OperatorClass::NkQuasiStar { .. } | OperatorClass::KQuasiStar { .. } => {
                let (n, k) = nk_params(class);
                let tk = mpow(&t, k);
                (&ts * &tk, n as f64 + 1.0, mpow(&t, n + k + 1), Some(tk), n as f64, 1.0)
            }
            OperatorClass::NStar { n } => (ts, n as f64 + 1.0, mpow(&t, n + 1), None, n as f64, 1.0),
        };
        Ok(Self { a, p, b, c, q, factor, degree: degree(class), blocks: ReducingBlocks::new(m) })
    }

    fn sides(&self, y: &[Complex64]) -> Sides {
        let ny = vec_norm(y);
        let lhs = norm_of_product(&self.a, y).powf(self.p);
        let cy = match &self.c {
            Some(c) => norm_of_product(c, y),
            None => ny,
        };
        let rhs = self.factor * norm_of_product(&self.b, y) * cy.powf(self.q);
        let nu = self.blocks.norm_touching(|i| y[i] != Complex64::new(0.0, 0.0));
        Sides { lhs, rhs, scale: nu.powf(self.degree) * ny.powf(self.p) }
    }
}

/// Evaluates the definitional inequality at `x` by applying `T` step by step
/// in atom coordinates. Independent of the precomputed-matrix path used for
/// sampling; witnesses are re-checked here.
///
/// | class | lhs | rhs |
/// |---|---|---|
/// | paranormal, M-paranormal | `‖Tx‖²` | `M‖T²x‖‖x‖` |
/// | *-paranormal | `‖T*x‖²` | `‖T²x‖‖x‖` |
/// | quasi-*-paranormal | `‖T*Tx‖²` | `‖T³x‖‖Tx‖` |
/// | absolute-k | `‖Tx‖^{k+1}` | `‖\|T\|ᵏTx‖‖x‖ᵏ` |
/// | (n,k) | `‖T*Tᵏx‖^{n+1}` | `‖T^{n+k+1}x‖‖Tᵏx‖ⁿ` |
/// | n-* | `‖T*x‖^{n+1}` | `‖T^{n+1}x‖‖x‖ⁿ` |
pub fn definition_sides(m: &OpMatrix, class: OperatorClass, x: &Func) -> Result<Sides> {
    class.validate()?;
    check_dim(m.dim(), x.len())?;
    let space = m.space();
    let nrm = |f: &Func| norm(f, space).expect("same space");
    let adj = m.adjoint();
    let apply_n = |f: &Func, n: u32| -> Func {
        let mut g = f.clone();
        for _ in 0..n {
            g = m.apply(&g).expect("same space");
        }
        g
    };
    let nx = nrm(x);
    let (lhs, rhs, p) = match class {
        OperatorClass::Paranormal | OperatorClass::MParanormal { .. } => {
            let factor = if let OperatorClass::MParanormal { m } = class { m } else { 1.0 };
            (nrm(&apply_n(x, 1)).powi(2), factor * nrm(&apply_n(x, 2)) * nx, 2.0)
        }
        OperatorClass::StarParanormal => (nrm(&adj.apply(x)?).powi(2), nrm(&apply_n(x, 2)) * nx, 2.0),
        OperatorClass::QuasiStarParanormal => {
            let tx = apply_n(x, 1);
            (nrm(&adj.apply(&tx)?).powi(2), nrm(&apply_n(x, 3)) * nrm(&tx), 2.0)
        }
        OperatorClass::AbsoluteK { k } => {
            let tx = apply_n(x, 1);
            let abs_k = adj.mul(m).psd_power(k / 2.0);
            (nrm(&tx).powf(k + 1.0), nrm(&abs_k.apply(&tx)?) * nx.powf(k), k + 1.0)
        }
        OperatorClass::NkQuasiStar { .. } | OperatorClass::KQuasiStar { .. } => {
            let (n, k) = nk_params(class);
            let tkx = apply_n(x, k);
            let p = n as f64 + 1.0;
            (nrm(&adj.apply(&tkx)?).powf(p), nrm(&apply_n(&tkx, n + 1)) * nrm(&tkx).powi(n as i32), p)
        }
        OperatorClass::NStar { n } => {
            let p = n as f64 + 1.0;
            (nrm(&adj.apply(x)?).powf(p), nrm(&apply_n(x, n + 1)) * nx.powi(n as i32), p)
        }
    };
    let nu = ReducingBlocks::new(m).norm_touching(|i| x[i] != Complex64::new(0.0, 0.0));
    Ok(Sides { lhs, rhs, scale: nu.powf(degree(class)) * nx.powf(p) })
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, support: Option<&[usize]>) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    match support {
        Some(idx) => {
            for &i in idx {
                y[i] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        }
        None => {
            for z in &mut y {
                *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        }
    }
    y
}

fn normalize(y: &mut [Complex64]) {
    let n = vec_norm(y);
    if n > 0.0 {
        for z in y.iter_mut() {
            *z /= n;
        }
    }
}

/// Gradient-free coordinate ascent on the normalised violation `−slack`.
fn refine(ineq: &Inequality, start: &[Complex64], steps: usize) -> (Vec<Complex64>, Sides) {
    let mut y = start.to_vec();
    let mut best = ineq.sides(&y);
    let mut h = 0.1;
    for _ in 0..steps {
        let mut improved = false;
        for j in 0..y.len() {
            for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                for sign in [1.0, -1.0] {
                    let mut cand = y.clone();
                    cand[j] += dir * (sign * h);
                    normalize(&mut cand);
                    let s = ineq.sides(&cand);
                    if s.slack() < best.slack() {
                        y = cand;
                        best = s;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
            if h < 1e-12 {
                break;
            }
        }
    }
    (y, best)
}

/// Searches for a unit vector violating the class inequality for `m`.
/// Samples: coordinate vectors, vectors supported on single blocks (when a
/// partition is given), then complex Gaussian vectors, all normalised in the
/// μ-weighted norm; followed by local refinement of the worst one.
pub fn oracle_with_blocks(
    m: &OpMatrix,
    class: OperatorClass,
    cfg: &OracleConfig,
    blocks: Option<&Partition>,
) -> Result<Verdict> {
    cfg.validate()?;
    let ineq = Inequality::new(m, class)?;
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut targeted: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            y[j] = Complex64::new(1.0, 0.0);
            y
        })
        .collect();
    if let Some(p) = blocks {
        check_dim(n, p.num_atoms())?;
        for block in p.blocks().iter().filter(|b| b.len() > 1) {
            for _ in 0..4 {
                targeted.push(gaussian(&mut rng, n, Some(block)));
            }
        }
    }

    let mut worst: Option<(Vec<Complex64>, Sides)> = None;
    let mut first_violation: Option<(Vec<Complex64>, Sides)> = None;
    for idx in 0..cfg.samples {
        let mut y = if idx < targeted.len() { targeted[idx].clone() } else { gaussian(&mut rng, n, None) };
        normalize(&mut y);
        let s = ineq.sides(&y);
        if s.violated(cfg.tol) && first_violation.is_none() {
            first_violation = Some((y.clone(), s));
        }
        if worst.as_ref().is_none_or(|(_, w)| s.slack() < w.slack()) {
            worst = Some((y, s));
        }
    }
    let (y0, s0) = worst.expect("at least one sample");
    let (y1, s1) = refine(&ineq, &y0, cfg.ascent_steps);
    let (y, s) = if s1.slack() <= s0.slack() { (y1, s1) } else { (y0, s0) };
    let (y, s) = match (s.violated(cfg.tol), first_violation) {
        (false, Some(v)) => v,
        _ => (y, s),
    };

    let fails = s.violated(cfg.tol);
    let witness = fails.then(|| {
        let v = nalgebra::DVector::from_column_slice(&y);
        from_frame_vector(&v, m.space())
    });
    Ok(Verdict {
        status: if fails { Status::Fails } else { Status::Holds },
        margin: s.slack(),
        boundary: !fails && s.slack().abs() <= cfg.tol,
        basis: Basis::Sampling,
        witness_atom: None,
        witness_vector: witness,
    })
}

pub fn oracle(m: &OpMatrix, class: OperatorClass, cfg: &OracleConfig) -> Result<Verdict> {
    oracle_with_blocks(m, class, cfg, None)
}

/// Oracle on `T`'s matrix with block-targeted samples.
pub fn oracle_wct(t: &WctOp, class: OperatorClass, cfg: &OracleConfig) -> Result<Verdict> {
    oracle_with_blocks(&t.to_matrix(), class, cfg, Some(t.partition()))
}

pub fn oracle_paranormal(m: &OpMatrix, cfg: &OracleConfig) -> Result<Verdict> {
    oracle(m, OperatorClass::Paranormal, cfg)
}

pub fn oracle_m_paranormal(m: &OpMatrix, bound: f64, cfg: &OracleConfig) -> Result<Verdict> {
    oracle(m, OperatorClass::MParanormal { m: bound }, cfg)
}

pub fn oracle_star_paranormal(m: &OpMatrix, cfg: &OracleConfig) -> Result<Verdict> {
    oracle(m, OperatorClass::StarParanormal, cfg)
}

pub fn oracle_quasi_star_paranormal(m: &OpMatrix, cfg: &OracleConfig) -> Result<Verdict> {
    oracle(m, OperatorClass::QuasiStarParanormal, cfg)
}

pub fn oracle_absolute_k(m: &OpMatrix, k: f64, cfg: &OracleConfig) -> Result<Verdict> {
    oracle(m, OperatorClass::AbsoluteK { k }, cfg)
}

pub fn oracle_nk_quasi_star(m: &OpMatrix, n: u32, k: u32, cfg: &OracleConfig) -> Result<Verdict> {
    oracle(m, OperatorClass::NkQuasiStar { n, k }, cfg)
}

pub fn oracle_n_star(m: &OpMatrix, n: u32, cfg: &OracleConfig) -> Result<Verdict> {
    oracle(m, OperatorClass::NStar { n }, cfg)
}

/// Result of [`block_witness`].
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessOutcome {
    Found { vector: Func, sides: Sides },
    NotFound { diagnostic: String },
}

impl WitnessOutcome {
    pub fn vector(&self) -> Option<&Func> {
        match self {
            WitnessOutcome::Found { vector, .. } => Some(vector),
            WitnessOutcome::NotFound { .. } => None,
        }
    }
}

/// Builds a violating vector supported on the block of a criterion-failing
/// atom. On that block `T` is the rank-one map `f ↦ w·E(uf)`, so the useful
/// directions are `ū·χ_B` (the co-range) and `w·χ_B` (the range) and their
/// combinations.
pub fn block_witness(t: &WctOp, atom: usize, class: OperatorClass, tol: f64) -> Result<WitnessOutcome> {
    if atom >= t.dim() {
        return Err(Error::InvalidParameter(format!("atom index {atom} out of range")));
    }
    let slacks = atom_slacks(t, class)?
        .ok_or_else(|| Error::Precondition(format!("no pointwise criterion for {}", class.name())))?;
    if slacks[atom] >= -tol {
        return Err(Error::Precondition(format!(
            "atom {} does not violate the {} criterion (slack {:.3e})",
            t.space().atom(atom),
            class.name(),
            slacks[atom]
        )));
    }
    let n = t.dim();
    let block = t.partition().block_containing(atom).to_vec();
    let co_range = t.u().conj().restrict(&block);
    let range = t.w().restrict(&block);
    let mut candidates = vec![co_range.clone(), range.clone(), Func::indicator(n, &block)];
    for s in [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(2.0, 0.0),
    ] {
        candidates.push(&co_range + &range.scale(s));
    }

    let m = t.to_matrix();
    let mut best: Option<(Func, Sides)> = None;
    for c in candidates {
        if c.max_abs() == 0.0 {
            continue;
        }
        let s = definition_sides(&m, class, &c)?;
        if best.as_ref().is_none_or(|(_, b)| s.slack() < b.slack()) {
            best = Some((c, s));
        }
    }
    Ok(match best {
        Some((vector, sides)) if sides.violated(tol) => WitnessOutcome::Found { vector, sides },
        Some((_, sides)) => WitnessOutcome::NotFound {
            diagnostic: format!(
                "best block-supported candidate on atom {} has slack {:.3e} (lhs {:.6e}, rhs {:.6e})",
                t.space().atom(atom),
                sides.slack(),
                sides.lhs,
                sides.rhs
            ),
        },
        None => WitnessOutcome::NotFound { diagnostic: "u and w vanish on the block".into() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::crit_quasi_star_paranormal;
    use crate::measure::MeasureSpace;

    fn op(u: &[f64], w: &[f64], p: Partition) -> WctOp {
        let n = u.len();
        WctOp::new(MeasureSpace::uniform(n).unwrap(), p, Func::from_real(u), Func::from_real(w)).unwrap()
    }

    fn scenario_a() -> WctOp {
        op(&[1.0, 2.0], &[2.0, 1.0], Partition::trivial(2))
    }

    fn scenario_b() -> WctOp {
        op(&[1.0, 1.0], &[1.0, 1.0], Partition::trivial(2))
    }

    fn scenario_c() -> WctOp {
        let x = MeasureSpace::with_weights(vec![0.2, 1.4, 0.9]).unwrap();
        WctOp::new(x, Partition::discrete(3), Func::from_real(&[1.0, -2.0, 0.5]), Func::from_real(&[3.0, 1.0, 2.0])).unwrap()
    }

    fn nilpotent() -> WctOp {
        op(&[1.0, 0.0], &[0.0, 1.0], Partition::trivial(2))
    }

    fn cfg() -> OracleConfig {
        OracleConfig { samples: 500, seed: 7, ..Default::default() }
    }

    fn assert_sound(m: &OpMatrix, class: OperatorClass, v: &Verdict) {
        assert_eq!(v.status, Status::Fails);
        let x = v.witness_vector.as_ref().expect("fails carries a witness");
        assert!(definition_sides(m, class, x).unwrap().violated(1e-10));
    }

    #[test]
    fn paranormal_oracle() {
        assert!(oracle_paranormal(&scenario_b().to_matrix(), &cfg()).unwrap().holds());
        assert!(oracle_paranormal(&scenario_c().to_matrix(), &cfg()).unwrap().holds());
        let m = nilpotent().to_matrix();
        let v = oracle_paranormal(&m, &cfg()).unwrap();
        assert_sound(&m, OperatorClass::Paranormal, &v);
    }

    #[test]
    fn star_paranormal_oracle() {
        assert!(oracle_star_paranormal(&scenario_b().to_matrix(), &cfg()).unwrap().holds());
        let m = nilpotent().to_matrix();
        assert_sound(&m, OperatorClass::StarParanormal, &oracle_star_paranormal(&m, &cfg()).unwrap());
        let zero = OpMatrix::zeros(&MeasureSpace::uniform(3).unwrap());
        assert!(oracle_star_paranormal(&zero, &cfg()).unwrap().holds());
    }

    #[test]
    fn quasi_star_oracle() {
        let m = scenario_a().to_matrix();
        assert_sound(&m, OperatorClass::QuasiStarParanormal, &oracle_quasi_star_paranormal(&m, &cfg()).unwrap());
        assert!(oracle_quasi_star_paranormal(&scenario_b().to_matrix(), &cfg()).unwrap().holds());
        assert!(oracle_quasi_star_paranormal(&scenario_c().to_matrix(), &cfg()).unwrap().holds());
    }

    #[test]
    fn m_paranormal_oracle() {
        let m = scenario_a().to_matrix();
        assert!(oracle_m_paranormal(&m, 100.0, &cfg()).unwrap().holds());
        let b = scenario_b().to_matrix();
        assert_sound(&b, OperatorClass::MParanormal { m: 0.5 }, &oracle_m_paranormal(&b, 0.5, &cfg()).unwrap());
        let zero = OpMatrix::zeros(&MeasureSpace::uniform(2).unwrap());
        for bound in [0.1, 1.0, 10.0] {
            assert!(oracle_m_paranormal(&zero, bound, &cfg()).unwrap().holds());
        }
    }

    #[test]
    fn absolute_k_oracle() {
        assert!(oracle_absolute_k(&scenario_b().to_matrix(), 2.0, &cfg()).unwrap().holds());
        for k in [0.5, 1.0, 2.5] {
            assert!(oracle_absolute_k(&scenario_c().to_matrix(), k, &cfg()).unwrap().holds());
        }
        let m = nilpotent().to_matrix();
        assert_sound(&m, OperatorClass::AbsoluteK { k: 1.0 }, &oracle_absolute_k(&m, 1.0, &cfg()).unwrap());
    }

    #[test]
    fn nk_oracle() {
        let m = scenario_a().to_matrix();
        assert_sound(&m, OperatorClass::NkQuasiStar { n: 1, k: 1 }, &oracle_nk_quasi_star(&m, 1, 1, &cfg()).unwrap());
        for (n, k) in [(1, 1), (2, 1), (1, 2), (3, 2)] {
            assert!(oracle_nk_quasi_star(&scenario_b().to_matrix(), n, k, &cfg()).unwrap().holds());
        }
        // T² = 0: for k ≥ 2 both sides vanish.
        assert!(oracle_nk_quasi_star(&nilpotent().to_matrix(), 1, 2, &cfg()).unwrap().holds());
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = scenario_a().to_matrix();
        let a = oracle_quasi_star_paranormal(&m, &cfg()).unwrap();
        let b = oracle_quasi_star_paranormal(&m, &cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn block_witness_scenario_a() {
        let t = scenario_a();
        let v = crit_quasi_star_paranormal(&t, 1e-10);
        let atom = v.witness_atom.unwrap();
        let w1 = block_witness(&t, atom, OperatorClass::QuasiStarParanormal, 1e-10).unwrap();
        let x = w1.vector().expect("witness found");
        let s = definition_sides(&t.to_matrix(), OperatorClass::QuasiStarParanormal, x).unwrap();
        assert!(s.lhs > s.rhs);
        let w2 = block_witness(&t, atom, OperatorClass::NkQuasiStar { n: 1, k: 1 }, 1e-10).unwrap();
        assert_eq!(w1.vector(), w2.vector());
    }

    #[test]
    fn block_witness_rejects_holding_atom() {
        let t = scenario_b();
        assert!(matches!(
            block_witness(&t, 0, OperatorClass::QuasiStarParanormal, 1e-10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn config_validation() {
        let m = scenario_b().to_matrix();
        let bad = OracleConfig { samples: 0, ..Default::default() };
        assert!(oracle_paranormal(&m, &bad).is_err());
    }
}
