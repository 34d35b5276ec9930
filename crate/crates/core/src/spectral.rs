//! Spectra, Riesz idempotents and kernel structure.
//!
//! On a finite atomic space `T` is a direct sum of rank-one block maps
//! `f ↦ w·E(uf)` restricted to each block, so every nonzero eigenvalue is a
//! block value of `E(uw)` with eigenvector `w·χ_B`, and `0` is an eigenvalue
//! as soon as some block has more than one atom or `u` or `w` vanishes on a
//! block. The analytic sets below come from that description; the numeric
//! eigensolver is the cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::criteria::{crit_nk_quasi_star, Basis, Status, Verdict, DEFAULT_CRITERION_TOL};
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, OpMatrix};
use crate::measure::{inner, Func};
use crate::operator::WctOp;

/// Eigenvalues closer than this (times `max(1, ‖T‖)`) are one spectral point.
/// Defective zero eigenvalues split by about `√ε·‖T‖` in floating point, so
/// this has to sit well above `1e-8`.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Analytic and numeric sets must agree to this Hausdorff distance.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// Rank and kernel decisions, times `max(1, ‖T‖)`.
pub const RANK_TOL: f64 = 1e-10;

fn scale_of(m: &OpMatrix) -> f64 {
    m.op_norm().max(1.0)
}

fn order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg()))
}

/// Merges points closer than `tol` (single linkage) and returns cluster
/// means, ordered by modulus then argument.
pub fn cluster(values: &[Complex64], tol: f64) -> Vec<Complex64> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &z in values {
        let hits: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|y| (y - z).norm() <= tol))
            .map(|(i, _)| i)
            .collect();
        match hits.split_first() {
            None => groups.push(vec![z]),
            Some((&first, rest)) => {
                for &i in rest.iter().rev() {
                    let g = groups.remove(i);
                    groups[first].extend(g);
                }
                groups[first].push(z);
            }
        }
    }
    let mut out: Vec<Complex64> =
        groups.iter().map(|g| g.iter().sum::<Complex64>() / g.len() as f64).collect();
    out.sort_by(order);
    out
}

/// Hausdorff distance between two finite sets; `∞` if exactly one is empty.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

fn without_zero(set: &[Complex64], tol: f64) -> Vec<Complex64> {
    set.iter().copied().filter(|z| z.norm() > tol).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub analytic: Vec<Complex64>,
    pub numeric: Vec<Complex64>,
    pub sigma_p: Vec<Complex64>,
    pub sigma_jp: Vec<Complex64>,
    pub sigma_a: Vec<Complex64>,
    pub sigma_ja: Vec<Complex64>,
    pub hausdorff: f64,
    pub agreement: bool,
    /// `S ∩ G` is every atom.
    pub sg_full: bool,
    /// `E(uw)` vanishes on at least one block.
    pub euw_vanishes: bool,
    /// When `S ∩ G = X`: does "0 ∈ σ iff `E(uw)` vanishes somewhere" match
    /// the actual spectrum? Always true otherwise.
    pub zero_rule_matches: bool,
}

/// Nonzero block values of `E(uw)`, deduplicated.
fn nonzero_block_values(t: &WctOp, tol: f64) -> Vec<Complex64> {
    let vals: Vec<Complex64> = t.block_values().into_iter().filter(|z| z.norm() > 0.0).collect();
    without_zero(&cluster(&vals, tol), 0.0)
}

/// `rank T`, counted blockwise: one per block on which both `u` and `w`
/// are nonzero.
pub fn analytic_rank(t: &WctOp) -> usize {
    let cd = t.cond();
    let sg = cd.s.intersect(&cd.g);
    t.partition().blocks().iter().filter(|b| sg.contains(b[0])).count()
}

/// Block values of `E(uw)`, plus `0` when `T` is singular.
pub fn analytic_spectrum(t: &WctOp) -> Vec<Complex64> {
    let tol = CLUSTER_TOL * t.op_norm().max(1.0);
    let mut vals = nonzero_block_values(t, tol);
    if analytic_rank(t) < t.dim() {
        vals.push(Complex64::new(0.0, 0.0));
    }
    cluster(&vals, tol)
}

/// Clustered eigenvalues of the materialised matrix.
pub fn numeric_spectrum(m: &OpMatrix) -> Vec<Complex64> {
    cluster(&m.eigenvalues(), CLUSTER_TOL * scale_of(m))
}

/// Nonzero eigenvalues are the block values of `E(uw)` (each block of
/// positive measure carries its eigenvector `w·χ_B`); `0` is included iff
/// `ker T ≠ {0}`. In finite dimension this is the whole spectrum.
pub fn point_spectrum(t: &WctOp) -> Vec<Complex64> {
    analytic_spectrum(t)
}

/// Points of the numeric spectrum at which `T − λ` and `T* − λ̄` share a
/// null vector.
pub fn joint_point_spectrum(t: &WctOp) -> Vec<Complex64> {
    let m = t.to_matrix();
    let tol = SPECTRUM_TOL * scale_of(&m);
    numeric_spectrum(&m)
        .into_iter()
        .filter(|&l| m.joint_min_singular_value(l) <= tol)
        .collect()
}

/// `(σ_a, σ_ja)`. Candidates are the numeric eigenvalues, since `σ_a = σ`
/// in finite dimension; `σ_ja` uses the stacked pair `[(T − λ); (T* − λ̄)]`.
pub fn approx_spectra(t: &WctOp) -> (Vec<Complex64>, Vec<Complex64>) {
    let m = t.to_matrix();
    let tol = SPECTRUM_TOL * scale_of(&m);
    let cand = numeric_spectrum(&m);
    let a = cand.iter().copied().filter(|&l| m.min_singular_value_shifted(l) <= tol).collect();
    let ja = cand.iter().copied().filter(|&l| m.joint_min_singular_value(l) <= tol).collect();
    (a, ja)
}

pub fn spectrum(t: &WctOp) -> SpectrumReport {
    let m = t.to_matrix();
    let analytic = analytic_spectrum(t);
    let numeric = numeric_spectrum(&m);
    let h = hausdorff(&analytic, &numeric);
    let cd = t.cond();
    let sg_full = cd.s.intersect(&cd.g).is_full();
    let euw_vanishes = t.block_values().iter().any(|z| z.norm() == 0.0);
    let zero_in = analytic.iter().any(|z| z.norm() == 0.0);
    let (sigma_a, sigma_ja) = approx_spectra(t);
    SpectrumReport {
        sigma_p: point_spectrum(t),
        sigma_jp: joint_point_spectrum(t),
        sigma_a,
        sigma_ja,
        hausdorff: h,
        agreement: h <= SPECTRUM_TOL,
        zero_rule_matches: !sg_full || zero_in == euw_vanishes,
        sg_full,
        euw_vanishes,
        analytic,
        numeric,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RieszData {
    pub mu: Complex64,
    pub radius: f64,
    pub projector: OpMatrix,
    pub contour_points: usize,
    /// `‖E² − E‖`.
    pub idempotency_defect: f64,
    /// `‖E − E*‖`, weighted adjoint.
    pub self_adjoint_defect: f64,
}

fn check_spectral_point(m: &OpMatrix, mu: Complex64) -> Result<Vec<Complex64>> {
    let s = scale_of(m);
    let spec = numeric_spectrum(m);
    if !spec.iter().any(|l| (l - mu).norm() <= CLUSTER_TOL * s) {
        return Err(Error::Precondition(format!("{mu} is not in the spectrum")));
    }
    Ok(spec.into_iter().filter(|l| (l - mu).norm() > CLUSTER_TOL * s).collect())
}

/// Half the distance from `mu` to the rest of the spectrum (or `|mu|/2`, or 1).
pub fn default_radius(m: &OpMatrix, mu: Complex64) -> Result<f64> {
    let others = check_spectral_point(m, mu)?;
    let d = others.iter().map(|l| (l - mu).norm()).fold(f64::INFINITY, f64::min);
    Ok(if d.is_finite() { d / 2.0 } else if mu.norm() > 0.0 { mu.norm() / 2.0 } else { 1.0 })
}

/// Riesz idempotent at `mu` by the trapezoidal rule on the circle
/// `|z − mu| = radius`:
/// `E = (1/N) Σ r·e^{iθ_j} (z_j − T)⁻¹`.
pub fn riesz_idempotent_matrix(m: &OpMatrix, mu: Complex64, radius: f64, points: usize) -> Result<RieszData> {
    if !(radius > 0.0) || points < 4 {
        return Err(Error::InvalidParameter("radius must be positive and points at least 4".into()));
    }
    let others = check_spectral_point(m, mu)?;
    let s = scale_of(m);
    if radius <= CLUSTER_TOL * s {
        return Err(Error::InvalidParameter(format!("radius {radius} is below the clustering scale")));
    }
    if let Some(l) = others.iter().find(|l| (*l - mu).norm() <= radius * (1.0 + 1e-9)) {
        return Err(Error::Precondition(format!(
            "circle of radius {radius} around {mu} reaches the spectral point {l}"
        )));
    }
    let t = m.unitary_frame();
    let n = m.dim();
    let id = CMatrix::identity(n, n);
    let mut acc = CMatrix::zeros(n, n);
    for j in 0..points {
        let theta = 2.0 * PI * j as f64 / points as f64;
        let e = Complex64::from_polar(radius, theta);
        let z = mu + e;
        let res = (&id * z - &t)
            .try_inverse()
            .ok_or_else(|| Error::Invariant(format!("resolvent singular at {z}")))?;
        acc += res * e;
    }
    acc /= Complex64::new(points as f64, 0.0);
    let projector = OpMatrix::from_unitary_frame(acc, m.space())?;
    let idempotency_defect = projector.mul(&projector).dist(&projector);
    let self_adjoint_defect = projector.hermitian_defect();
    Ok(RieszData { mu, radius, projector, contour_points: points, idempotency_defect, self_adjoint_defect })
}

pub fn riesz_idempotent(t: &WctOp, mu: Complex64, radius: f64, points: usize) -> Result<RieszData> {
    riesz_idempotent_matrix(&t.to_matrix(), mu, radius, points)
}

/// `dim ker Aᵖ` for `p = 1..=max`. Each step applies `A` to an orthonormal
/// basis of the previous range, so singular values are always compared with
/// `abs_tol` at the scale of `‖A‖` rather than `‖A‖ᵖ`.
fn power_kernel_dims(a: &OpMatrix, max: u32, abs_tol: f64) -> Vec<usize> {
    let f = a.unitary_frame();
    let n = a.dim();
    let mut basis = CMatrix::identity(n, n);
    let mut dims = Vec::with_capacity(max as usize);
    for _ in 0..max {
        let d = crate::matrix::svd(&(&f * &basis));
        let r = d.s.iter().filter(|&&x| x > abs_tol).count();
        basis = d.u.columns(0, r).into_owned();
        dims.push(n - r);
    }
    dims
}

/// `ker(M − μ) = ker(M − μ)²`, i.e. no Jordan block at `μ`.
pub fn simple_pole_check_matrix(m: &OpMatrix, mu: Complex64) -> Result<Verdict> {
    if mu.norm() == 0.0 {
        return Err(Error::Precondition("simple-pole check needs a nonzero point".into()));
    }
    check_spectral_point(m, mu)?;
    let s = scale_of(m);
    let a = m.shift(mu);
    let d = power_kernel_dims(&a, 2, RANK_TOL * s);
    let (d1, d2) = (d[0], d[1]);
    let ok = d1 == d2;
    Ok(Verdict {
        status: if ok { Status::Holds } else { Status::Fails },
        margin: d1 as f64 - d2 as f64,
        boundary: false,
        basis: Basis::Exact,
        witness_atom: None,
        witness_vector: None,
    })
}

pub fn simple_pole_check(t: &WctOp, mu: Complex64) -> Result<Verdict> {
    simple_pole_check_matrix(&t.to_matrix(), mu)
}

/// Largest `‖(M* − λ̄)x‖` over a μ-orthonormal basis of `ker(M − λ)`.
fn inclusion_residual(m: &OpMatrix, adj: &OpMatrix, lambda: Complex64, tol: f64) -> Result<f64> {
    let shifted = adj.shift(lambda.conj());
    let mut worst: f64 = 0.0;
    for x in m.shift(lambda).kernel_basis(tol) {
        worst = worst.max(crate::measure::norm(&shifted.apply(&x)?, m.space())?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RieszCheck {
    pub mu: Complex64,
    pub radius: f64,
    pub contour_points: usize,
    pub idempotency_defect: f64,
    pub self_adjoint_defect: f64,
    /// `E_μ = E_μ*`.
    pub self_adjoint: bool,
    /// `ker(T − μ) ⊆ ker(T* − μ̄)`.
    pub kernel_inclusion: bool,
    pub consistent: bool,
}

impl RieszCheck {
    pub fn verdict(&self) -> Verdict {
        Verdict {
            status: if self.consistent { Status::Holds } else { Status::Fails },
            margin: -self.self_adjoint_defect,
            boundary: false,
            basis: Basis::Exact,
            witness_atom: None,
            witness_vector: None,
        }
    }
}

pub const RIESZ_POINTS: usize = 64;

/// Decides self-adjointness of `E_μ` and the kernel inclusion separately;
/// `consistent` records whether the two agree.
pub fn riesz_self_adjointness(t: &WctOp, mu: Complex64) -> Result<RieszCheck> {
    let m = t.to_matrix();
    let radius = default_radius(&m, mu)?;
    let r = riesz_idempotent_matrix(&m, mu, radius, RIESZ_POINTS)?;
    let s = scale_of(&m);
    let self_adjoint = r.self_adjoint_defect <= 1e-8 * r.projector.op_norm().max(1.0);
    let kernel_inclusion = inclusion_residual(&m, &m.adjoint(), mu, RANK_TOL * s)? <= 1e-8 * s;
    Ok(RieszCheck {
        mu,
        radius,
        contour_points: r.contour_points,
        idempotency_defect: r.idempotency_defect,
        self_adjoint_defect: r.self_adjoint_defect,
        self_adjoint,
        kernel_inclusion,
        consistent: self_adjoint == kernel_inclusion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionCheck {
    pub lambda: Complex64,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityCheck {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub max_inner: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationCheck {
    /// The eigenvalue, or `None` for the power check on `T` itself.
    pub lambda: Option<Complex64>,
    pub power: u32,
    pub kernel_dims: (usize, usize),
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    /// (n,k)-quasi-*-paranormal for every `(n,k) ∈ {1,2}²`.
    pub hypothesis: Status,
    pub inclusion: Vec<InclusionCheck>,
    pub orthogonality: Vec<OrthogonalityCheck>,
    pub stabilization: Vec<StabilizationCheck>,
    /// `σ_p∖{0} = σ_jp∖{0}` and `σ_a∖{0} = σ_ja∖{0}`.
    pub spectra_coincide: bool,
    pub all_pass: bool,
    /// Hypothesis holds but some consequence failed.
    pub contradiction: bool,
}

pub const KERNEL_CHECK_TOL: f64 = 1e-10;

pub fn kernel_consequences(t: &WctOp) -> Result<KernelReport> {
    let mut statuses = Vec::new();
    for n in 1..=2 {
        for k in 1..=2 {
            statuses.push(crit_nk_quasi_star(t, n, k, DEFAULT_CRITERION_TOL)?.status);
        }
    }
    let hypothesis = if statuses.iter().all(|s| *s == Status::Holds) {
        Status::Holds
    } else if statuses.contains(&Status::Fails) {
        Status::Fails
    } else {
        Status::Unknown
    };

    let m = t.to_matrix();
    let adj = m.adjoint();
    let s = scale_of(&m);
    let ktol = RANK_TOL * s;
    let spec = analytic_spectrum(t);
    let nonzero: Vec<Complex64> = spec.iter().copied().filter(|z| z.norm() > 0.0).collect();

    let mut inclusion = Vec::new();
    let mut stabilization = Vec::new();
    for &l in &nonzero {
        let residual = inclusion_residual(&m, &adj, l, ktol)?;
        inclusion.push(InclusionCheck { lambda: l, residual, passed: residual <= KERNEL_CHECK_TOL * s });
        let a = m.shift(l);
        let d = power_kernel_dims(&a, 2, ktol);
        let dims = (d[0], d[1]);
        stabilization.push(StabilizationCheck { lambda: Some(l), power: 1, kernel_dims: dims, passed: dims.0 == dims.1 });
    }
    let powers = power_kernel_dims(&m, 4, ktol);
    for k in 1..=2u32 {
        let dims = (powers[k as usize], powers[k as usize + 1]);
        stabilization.push(StabilizationCheck { lambda: None, power: k + 1, kernel_dims: dims, passed: dims.0 == dims.1 });
    }

    let bases: Vec<(Complex64, Vec<Func>)> = spec.iter().map(|&l| (l, m.shift(l).kernel_basis(ktol))).collect();
    let mut orthogonality = Vec::new();
    for (i, (l, xs)) in bases.iter().enumerate() {
        for (mu, ys) in &bases[i + 1..] {
            let mut worst: f64 = 0.0;
            for x in xs {
                for y in ys {
                    worst = worst.max(inner(x, y, m.space())?.norm());
                }
            }
            orthogonality.push(OrthogonalityCheck { lambda: *l, mu: *mu, max_inner: worst, passed: worst <= KERNEL_CHECK_TOL });
        }
    }

    let ztol = CLUSTER_TOL * s;
    let same = |a: &[Complex64], b: &[Complex64]| {
        let (a, b) = (without_zero(a, ztol), without_zero(b, ztol));
        a.len() == b.len() && hausdorff(&a, &b) <= SPECTRUM_TOL * s
    };
    let (sa, sja) = approx_spectra(t);
    let spectra_coincide = same(&point_spectrum(t), &joint_point_spectrum(t)) && same(&sa, &sja);

    let all_pass = spectra_coincide
        && inclusion.iter().all(|c| c.passed)
        && orthogonality.iter().all(|c| c.passed)
        && stabilization.iter().all(|c| c.passed);
    Ok(KernelReport {
        hypothesis,
        inclusion,
        orthogonality,
        stabilization,
        spectra_coincide,
        all_pass,
        contradiction: hypothesis == Status::Holds && !all_pass,
    })
}

/// Everything above in one serialisable record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub spectrum: SpectrumReport,
    pub riesz: Vec<RieszCheck>,
    pub kernel_checks: KernelReport,
}

pub fn spectral_summary(t: &WctOp) -> Result<SpectralSummary> {
    let spectrum = spectrum(t);
    let mut riesz = Vec::new();
    for &mu in spectrum.numeric.iter().filter(|z| z.norm() > CLUSTER_TOL * t.op_norm().max(1.0)) {
        riesz.push(riesz_self_adjointness(t, mu)?);
    }
    Ok(SpectralSummary { spectrum, riesz, kernel_checks: kernel_consequences(t)? })
}

/// Rank-one check used in tests: `T(w·χ_B) = E(uw)|_B · w·χ_B`.
pub fn block_eigenvector_defect(t: &WctOp) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (b, lambda) in t.partition().blocks().iter().zip(t.block_values()) {
        let v = t.w().restrict(b);
        let tv = t.apply(&v)?;
        worst = worst.max((&tv - &v.scale(lambda)).max_abs());
    }
    Ok(worst)
}
