//! Dense operator matrices on `L²(μ)` for a finite measure space.
//!
//! Entries act on atom coordinates, but every adjoint, norm and spectral
//! decomposition is taken with respect to the μ-weighted inner product. In
//! coordinates the weighted adjoint is `D⁻¹ Mᴴ D` with `D = diag(μ)`.
//! Internally the "unitary frame" `D^{1/2} M D^{-1/2}` turns all of that into
//! ordinary Hermitian linear algebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::measure::{Func, MeasureSpace};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct OpMatrix {
    entries: CMatrix,
    space: MeasureSpace,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl OpMatrix {
    pub fn new(entries: CMatrix, space: MeasureSpace) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Precondition(format!(
                "operator matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_dim(space.len(), entries.nrows())?;
        Ok(Self { entries, space })
    }

    pub fn identity(space: &MeasureSpace) -> Self {
        let n = space.len();
        Self { entries: CMatrix::identity(n, n), space: space.clone() }
    }

    pub fn zeros(space: &MeasureSpace) -> Self {
        let n = space.len();
        Self { entries: CMatrix::zeros(n, n), space: space.clone() }
    }

    /// Matrix whose columns are the images of the coordinate basis.
    pub fn from_columns(space: &MeasureSpace, cols: &[Func]) -> Result<Self> {
        check_dim(space.len(), cols.len())?;
        let n = space.len();
        let mut m = CMatrix::zeros(n, n);
        for (j, c) in cols.iter().enumerate() {
            check_dim(n, c.len())?;
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        Self::new(m, space.clone())
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn with_entries(&self, entries: CMatrix) -> Self {
        Self { entries, space: self.space.clone() }
    }

    pub fn apply(&self, f: &Func) -> Result<Func> {
        check_dim(self.dim(), f.len())?;
        let v = DVector::from_column_slice(f.values());
        Ok(Func::new((&self.entries * v).iter().copied().collect()))
    }

    /// Adjoint with respect to the μ-weighted inner product.
    pub fn adjoint(&self) -> Self {
        let mu = self.space.mu();
        let n = self.dim();
        let mut out = self.entries.adjoint();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= mu[j] / mu[i];
            }
        }
        self.with_entries(out)
    }

    pub fn mul(&self, rhs: &OpMatrix) -> Self {
        self.with_entries(&self.entries * &rhs.entries)
    }

    pub fn add(&self, rhs: &OpMatrix) -> Self {
        self.with_entries(&self.entries + &rhs.entries)
    }

    pub fn sub(&self, rhs: &OpMatrix) -> Self {
        self.with_entries(&self.entries - &rhs.entries)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with_entries(&self.entries * c)
    }

    /// `M − λI`.
    pub fn shift(&self, lambda: Complex64) -> Self {
        let mut out = self.entries.clone();
        for i in 0..self.dim() {
            out[(i, i)] -= lambda;
        }
        self.with_entries(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..n {
            acc = &acc * &self.entries;
        }
        self.with_entries(acc)
    }

    /// `D^{1/2} M D^{-1/2}`: the same operator seen in a μ-orthonormal basis.
    pub fn unitary_frame(&self) -> CMatrix {
        let mu = self.space.mu();
        let n = self.dim();
        let mut out = self.entries.clone();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= (mu[i] / mu[j]).sqrt();
            }
        }
        out
    }

    pub fn from_unitary_frame(m: CMatrix, space: &MeasureSpace) -> Result<Self> {
        check_dim(space.len(), m.nrows())?;
        let mu = space.mu();
        let n = m.nrows();
        let mut out = m;
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] *= (mu[j] / mu[i]).sqrt();
            }
        }
        Self::new(out, space.clone())
    }

    /// Singular values w.r.t. the weighted inner product, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.unitary_frame())
    }

    /// Operator norm on `L²(μ)`: square root of the top eigenvalue of `FᴴF`
    /// in the unitary frame.
    pub fn op_norm(&self) -> f64 {
        let f = self.unitary_frame();
        let g = to_faer(&(f.adjoint() * &f));
        let ev = g.self_adjoint_eigenvalues(faer::Side::Lower).expect("Hermitian eigensolver converges");
        ev.iter().copied().fold(0.0, f64::max).sqrt()
    }

    /// Weighted operator norm of `self − other`.
    pub fn dist(&self, other: &OpMatrix) -> f64 {
        self.sub(other).op_norm()
    }

    /// Numerical rank with threshold `rel_tol · ‖M‖`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let s = self.singular_values();
        let top = s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        s.iter().filter(|&&x| x > rel_tol * top).count()
    }

    /// A μ-orthonormal basis of the kernel. Singular values at or below
    /// `abs_tol` count as zero.
    pub fn kernel_basis(&self, abs_tol: f64) -> Vec<Func> {
        null_space(&self.unitary_frame(), abs_tol)
            .into_iter()
            .map(|v| from_frame_vector(&v, &self.space))
            .collect()
    }

    /// A μ-orthonormal basis of the range.
    pub fn range_basis(&self, abs_tol: f64) -> Vec<Func> {
        let d = svd(&self.unitary_frame());
        d.s.iter()
            .enumerate()
            .filter(|(_, &s)| s > abs_tol)
            .map(|(k, _)| from_frame_vector(&d.u.column(k).into_owned(), &self.space))
            .collect()
    }

    /// Largest deviation from weighted self-adjointness, `‖M − M*‖`.
    pub fn hermitian_defect(&self) -> f64 {
        self.dist(&self.adjoint())
    }

    /// Eigenvalues of the weighted-Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let f = hermitian_part(&self.unitary_frame());
        let mut ev: Vec<f64> = SymmetricEigen::new(f).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `P^p` for a weighted-PSD `P`, via the spectral decomposition of its
    /// Hermitian part. Eigenvalues below `1e-13·λ_max` are treated as zero so
    /// that roundoff in the kernel does not turn into `√ε`-sized garbage.
    pub fn psd_power(&self, p: f64) -> Self {
        let f = hermitian_part(&self.unitary_frame());
        let eig = SymmetricEigen::new(f);
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let cut = 1e-13 * top;
        let powered: Vec<Complex64> = eig
            .eigenvalues
            .iter()
            .map(|&l| if l <= cut { re(0.0) } else { re(l.powf(p)) })
            .collect();
        let d = CMatrix::from_diagonal(&DVector::from_vec(powered));
        let m = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        Self::from_unitary_frame(m, &self.space).expect("same dimension")
    }

    pub fn psd_sqrt(&self) -> Self {
        self.psd_power(0.5)
    }

    /// Eigenvalues (with multiplicity) from a complex Schur factorisation.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let schur = Schur::new(self.unitary_frame());
        let (_, t) = schur.unpack();
        (0..t.nrows()).map(|i| t[(i, i)]).collect()
    }

    /// Smallest weighted singular value of `M − λ`.
    pub fn min_singular_value_shifted(&self, lambda: Complex64) -> f64 {
        let s = self.shift(lambda).singular_values();
        s.last().copied().unwrap_or(0.0)
    }

    /// Smallest singular value of the stacked pair `[(M − λ); (M* − λ̄)]`.
    /// It vanishes exactly when `M` and `M*` share an eigenvector at `(λ, λ̄)`.
    pub fn joint_min_singular_value(&self, lambda: Complex64) -> f64 {
        let a = self.shift(lambda).unitary_frame();
        let b = self.adjoint().shift(lambda.conj()).unitary_frame();
        let n = self.dim();
        let mut stacked = CMatrix::zeros(2 * n, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&a);
        stacked.view_mut((n, 0), (n, n)).copy_from(&b);
        singular_values(&stacked).last().copied().unwrap_or(0.0)
    }

    /// Row-major `[re, im]` pairs, the report serialisation of a matrix.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| {
                let z = self.entries[(i, j)];
                [z.re, z.im]
            }).collect())
            .collect()
    }
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * re(0.5)
}

/// Full SVD, singular values descending. Computed with faer: nalgebra's
/// bidiagonal SVD returns wrong factors on some rank-deficient inputs.
pub(crate) struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

fn to_faer(m: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn svd(m: &CMatrix) -> Svd {
    let (r, c) = m.shape();
    let d = to_faer(m).svd().expect("SVD of a finite matrix converges");
    let s: Vec<f64> = (0..r.min(c)).map(|k| d.S().column_vector()[k].re).collect();
    let mut order: Vec<usize> = (0..r.min(c)).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let perm = |k: usize| order.get(k).copied().unwrap_or(k);
    let (fu, fv) = (d.U(), d.V());
    let u = CMatrix::from_fn(r, r, |i, k| fu[(i, perm(k))]);
    let v = CMatrix::from_fn(c, c, |i, k| fv[(i, perm(k))]);
    Svd { u, s: order.iter().map(|&k| s[k]).collect(), v }
}

/// Singular values, descending.
pub(crate) fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(m).singular_values().expect("SVD of a finite matrix converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Right singular vectors for singular values `≤ abs_tol` (standard inner
/// product). Columns beyond the row count have singular value zero.
pub(crate) fn null_space(m: &CMatrix, abs_tol: f64) -> Vec<DVector<Complex64>> {
    if m.ncols() == 0 {
        return Vec::new();
    }
    let d = svd(m);
    (0..m.ncols())
        .filter(|&k| d.s.get(k).copied().unwrap_or(0.0) <= abs_tol)
        .map(|k| d.v.column(k).into_owned())
        .collect()
}

/// Atom coordinates of a unit-frame vector `y = D^{1/2} x`.
pub(crate) fn from_frame_vector(v: &DVector<Complex64>, space: &MeasureSpace) -> Func {
    Func::new(v.iter().zip(space.mu()).map(|(z, m)| z / m.sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::inner;

    fn c(a: f64, b: f64) -> Complex64 {
        Complex64::new(a, b)
    }

    fn sample() -> OpMatrix {
        let x = MeasureSpace::with_weights(vec![0.2, 1.5, 0.7]).unwrap();
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 0.5), c(2.0, 0.0), c(0.0, 1.0), c(0.5, 0.0), c(1.0, 0.0), c(3.0, 0.0), c(0.0, 0.0), c(1.0, -1.0), c(2.0, 0.0)],
        );
        OpMatrix::new(m, x).unwrap()
    }

    #[test]
    fn weighted_adjoint_satisfies_defining_identity() {
        let m = sample();
        let f = Func::new(vec![c(1.0, -2.0), c(0.3, 0.0), c(0.0, 4.0)]);
        let g = Func::new(vec![c(0.0, 1.0), c(-1.0, 0.5), c(2.0, 2.0)]);
        let lhs = inner(&m.apply(&f).unwrap(), &g, m.space()).unwrap();
        let rhs = inner(&f, &m.adjoint().apply(&g).unwrap(), m.space()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(m.adjoint().adjoint().dist(&m) < 1e-12);
    }

    #[test]
    fn unitary_frame_round_trip() {
        let m = sample();
        let back = OpMatrix::from_unitary_frame(m.unitary_frame(), m.space()).unwrap();
        assert!(back.dist(&m) < 1e-13);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let m = sample();
        let p = m.adjoint().mul(&m);
        let r = p.psd_sqrt();
        assert!(r.mul(&r).dist(&p) < 1e-10);
        assert!(r.hermitian_defect() < 1e-10);
        assert!(r.min_hermitian_eigenvalue() > -1e-12);
    }

    #[test]
    fn kernel_and_rank() {
        let x = MeasureSpace::with_weights(vec![0.5, 2.0]).unwrap();
        let m = OpMatrix::new(CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]), x).unwrap();
        assert_eq!(m.rank(1e-10), 1);
        let k = m.kernel_basis(1e-10 * m.op_norm());
        assert_eq!(k.len(), 1);
        assert!(m.apply(&k[0]).unwrap().max_abs() < 1e-12);
        assert!((crate::measure::norm(&k[0], m.space()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let x = MeasureSpace::uniform(2).unwrap();
        let m = OpMatrix::new(CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(-1.0, 1.0)]), x).unwrap();
        let mut ev = m.eigenvalues();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-1.0, 1.0)).norm() < 1e-12);
        assert!((ev[1] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_square_rejected() {
        let x = MeasureSpace::uniform(2).unwrap();
        assert!(OpMatrix::new(CMatrix::zeros(2, 3), x).is_err());
    }
}
