//! The weighted conditional type operator `T = M_w E M_u`, i.e. `f ↦ w·E(uf)`.

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::matrix::OpMatrix;
use crate::measure::{cond_data, cond_exp, is_measurable, CondData, Func, MeasureSpace, Partition, DEFAULT_SUPPORT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct WctOp {
    space: MeasureSpace,
    partition: Partition,
    u: Func,
    w: Func,
    cond: CondData,
    support_tol: f64,
}

/// The factors of `T = U|T|`.
#[derive(Debug, Clone)]
pub struct Polar {
    pub isometry: OpMatrix,
    pub modulus: OpMatrix,
}

impl WctOp {
    pub fn new(space: MeasureSpace, partition: Partition, u: Func, w: Func) -> Result<Self> {
        Self::with_support_tol(space, partition, u, w, DEFAULT_SUPPORT_TOL)
    }

    pub fn with_support_tol(
        space: MeasureSpace,
        partition: Partition,
        u: Func,
        w: Func,
        support_tol: f64,
    ) -> Result<Self> {
        check_dim(space.len(), partition.num_atoms())?;
        let cond = cond_data(&u, &w, &partition, &space, support_tol)?;
        Ok(Self { space, partition, u, w, cond, support_tol })
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn u(&self) -> &Func {
        &self.u
    }

    pub fn w(&self) -> &Func {
        &self.w
    }

    pub fn cond(&self) -> &CondData {
        &self.cond
    }

    pub fn support_tol(&self) -> f64 {
        self.support_tol
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    /// Whether `u` is `A`-measurable (constant on every block).
    pub fn u_is_measurable(&self) -> bool {
        is_measurable(&self.u, &self.partition, 1e-12)
    }

    fn e(&self, f: &Func) -> Func {
        cond_exp(f, &self.partition, &self.space).expect("dimensions checked at construction")
    }

    /// `Tf = w·E(uf)`.
    pub fn apply(&self, f: &Func) -> Result<Func> {
        check_dim(self.dim(), f.len())?;
        Ok(&self.w * &self.e(&(&self.u * f)))
    }

    /// Column `j` is `T e_j`.
    pub fn to_matrix(&self) -> OpMatrix {
        let n = self.dim();
        let cols: Vec<Func> = (0..n)
            .map(|j| self.apply(&Func::basis(n, j)).expect("basis has right length"))
            .collect();
        OpMatrix::from_columns(&self.space, &cols).expect("square by construction")
    }

    /// `T* = M_ū E M_w̄`.
    pub fn adjoint(&self) -> WctOp {
        WctOp::with_support_tol(
            self.space.clone(),
            self.partition.clone(),
            self.w.conj(),
            self.u.conj(),
            self.support_tol,
        )
        .expect("adjoint of a valid operator is valid")
    }

    /// `‖T‖ = ‖(E|w|²)^{1/2}(E|u|²)^{1/2}‖_∞`.
    pub fn op_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| (self.cond.eu2[i].re * self.cond.ew2[i].re).max(0.0).sqrt())
            .fold(0.0, f64::max)
    }

    /// `Tⁿf = E(uw)ⁿ⁻¹ · w · E(uf)`.
    pub fn power_apply(&self, n: u32, f: &Func) -> Result<Func> {
        if n == 0 {
            return Err(Error::InvalidParameter("power must be at least 1".into()));
        }
        let tf = self.apply(f)?;
        Ok(Func::new(
            tf.values()
                .iter()
                .zip(self.cond.euw.values())
                .map(|(t, e)| t * e.powu(n - 1))
                .collect(),
        ))
    }

    /// Closed-form polar factors:
    ///
    /// ```text
    /// |T| f = (E|w|² / E|u|²)^{1/2} χ_S ū E(uf)
    ///   U f = (χ_{S∩G} / (E|w|² E|u|²))^{1/2} w E(uf)
    /// ```
    ///
    /// Off the supports the ratios are taken to be zero.
    pub fn polar(&self) -> Polar {
        let n = self.dim();
        let cd = &self.cond;
        let mut modulus_coef = vec![0.0; n];
        let mut iso_coef = vec![0.0; n];
        for i in 0..n {
            let (eu2, ew2) = (cd.eu2_at(i), cd.ew2_at(i));
            if cd.s.contains(i) {
                modulus_coef[i] = (ew2 / eu2).sqrt();
            }
            if cd.s.contains(i) && cd.g.contains(i) {
                iso_coef[i] = 1.0 / (ew2 * eu2).sqrt();
            }
        }
        let ubar = self.u.conj();
        let col = |coef: &[f64], left: &Func, j: usize| -> Func {
            let euf = self.e(&(&self.u * &Func::basis(n, j)));
            Func::new((0..n).map(|i| left[i] * euf[i] * coef[i]).collect())
        };
        let modulus_cols: Vec<Func> = (0..n).map(|j| col(&modulus_coef, &ubar, j)).collect();
        let iso_cols: Vec<Func> = (0..n).map(|j| col(&iso_coef, &self.w, j)).collect();
        Polar {
            isometry: OpMatrix::from_columns(&self.space, &iso_cols).expect("square"),
            modulus: OpMatrix::from_columns(&self.space, &modulus_cols).expect("square"),
        }
    }

    /// `T̂ = |T|^{1/2} U |T|^{1/2}`, with the square root computed numerically
    /// from the closed-form `|T|`.
    pub fn aluthge(&self) -> OpMatrix {
        let p = self.polar();
        let root = p.modulus.psd_sqrt();
        root.mul(&p.isometry).mul(&root)
    }

    /// Number of atoms in the block containing `atom`.
    pub fn block_size(&self, atom: usize) -> usize {
        self.partition.block_containing(atom).len()
    }

    /// `E(uw)` on each block, in block order (support-chopped).
    pub fn block_values(&self) -> Vec<Complex64> {
        self.partition.blocks().iter().map(|b| self.cond.euw_at(b[0])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: f64) -> Complex64 {
        Complex64::new(a, 0.0)
    }

    fn scenario_a() -> WctOp {
        WctOp::new(
            MeasureSpace::uniform(2).unwrap(),
            Partition::trivial(2),
            Func::from_real(&[1.0, 2.0]),
            Func::from_real(&[2.0, 1.0]),
        )
        .unwrap()
    }

    fn scenario_b() -> WctOp {
        WctOp::new(MeasureSpace::uniform(2).unwrap(), Partition::trivial(2), Func::ones(2), Func::ones(2)).unwrap()
    }

    fn assert_matrix(m: &OpMatrix, rows: &[[f64; 2]]) {
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((m.entries()[(i, j)] - c(*v)).norm() < 1e-14, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn apply_scenario_a() {
        let t = scenario_a();
        let tf = t.apply(&Func::from_real(&[1.0, 0.0])).unwrap();
        assert_eq!(tf.values(), &[c(1.0), c(0.5)]);
    }

    #[test]
    fn apply_discrete_is_multiplication() {
        let x = MeasureSpace::with_weights(vec![0.4, 1.0, 3.0]).unwrap();
        let u = Func::new(vec![Complex64::new(1.0, 1.0), c(2.0), c(-1.0)]);
        let w = Func::new(vec![c(3.0), Complex64::new(0.0, 1.0), c(0.5)]);
        let t = WctOp::new(x, Partition::discrete(3), u.clone(), w.clone()).unwrap();
        let f = Func::new(vec![c(1.0), c(2.0), Complex64::new(0.0, -1.0)]);
        let expected = &(&u * &w) * &f;
        assert!(t.apply(&f).unwrap().dist_max(&expected) < 1e-15);
    }

    #[test]
    fn scenario_b_is_conditional_expectation() {
        let t = scenario_b();
        let f = Func::from_real(&[3.0, -1.0]);
        assert_eq!(t.apply(&f).unwrap().values(), &[c(1.0), c(1.0)]);
        assert!((t.op_norm() - 1.0).abs() < 1e-15);
        for n in 1..5 {
            assert_eq!(t.power_apply(n, &f).unwrap().values(), &[c(1.0), c(1.0)]);
        }
    }

    #[test]
    fn matrix_scenario_a() {
        let m = scenario_a().to_matrix();
        assert_matrix(&m, &[[1.0, 2.0], [0.5, 1.0]]);
    }

    #[test]
    fn matrix_trivial_cases() {
        let x = MeasureSpace::with_weights(vec![0.3, 0.9]).unwrap();
        let id = WctOp::new(x.clone(), Partition::discrete(2), Func::ones(2), Func::ones(2)).unwrap();
        assert_matrix(&id.to_matrix(), &[[1.0, 0.0], [0.0, 1.0]]);
        let zero = WctOp::new(x, Partition::trivial(2), Func::ones(2), Func::zeros(2)).unwrap();
        assert_matrix(&zero.to_matrix(), &[[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(zero.op_norm(), 0.0);
    }

    #[test]
    fn adjoint_scenario_a_matches_weighted_adjoint() {
        let t = scenario_a();
        let m = t.to_matrix();
        let adj = t.adjoint().to_matrix();
        // With uniform mass the weighted adjoint is the conjugate transpose.
        assert_matrix(&adj, &[[1.0, 0.5], [2.0, 1.0]]);
        assert!(adj.dist(&m.adjoint()) < 1e-14);
        assert_eq!(t.adjoint().adjoint(), t);
        let b = scenario_b();
        assert!(b.adjoint().to_matrix().dist(&b.to_matrix()) < 1e-15);
    }

    #[test]
    fn norm_scenario_a() {
        let t = scenario_a();
        assert_eq!(t.op_norm(), 2.5);
        assert!((t.to_matrix().op_norm() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn power_scenario_a() {
        let t = scenario_a();
        let f = Func::from_real(&[1.0, 0.0]);
        let t2 = t.power_apply(2, &f).unwrap();
        assert_eq!(t2.values(), &[c(2.0), c(1.0)]);
        assert_eq!(t2, t.apply(&t.apply(&f).unwrap()).unwrap());
        assert_eq!(t.power_apply(1, &f).unwrap(), t.apply(&f).unwrap());
        assert!(matches!(t.power_apply(0, &f), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn polar_scenario_a() {
        let t = scenario_a();
        let p = t.polar();
        // |T| f = ū E(uf), U f = (2/5) w E(uf)
        assert_matrix(&p.modulus, &[[0.5, 1.0], [1.0, 2.0]]);
        assert_matrix(&p.isometry, &[[0.4, 0.8], [0.2, 0.4]]);
        assert!(p.isometry.mul(&p.modulus).dist(&t.to_matrix()) < 1e-10);
    }

    #[test]
    fn polar_scenario_b_and_zero() {
        let b = scenario_b();
        let p = b.polar();
        assert!(p.modulus.dist(&b.to_matrix()) < 1e-15);
        assert!(p.isometry.dist(&b.to_matrix()) < 1e-15);

        let z = WctOp::new(MeasureSpace::uniform(2).unwrap(), Partition::trivial(2), Func::ones(2), Func::zeros(2)).unwrap();
        let p = z.polar();
        assert_eq!(p.modulus.op_norm(), 0.0);
        assert_eq!(p.isometry.op_norm(), 0.0);
    }

    #[test]
    fn aluthge_examples() {
        let b = scenario_b();
        assert!(b.aluthge().dist(&b.to_matrix()) < 1e-12);

        let a = scenario_a().aluthge();
        let ev = a.eigenvalues();
        let top = ev.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
        assert!((top - c(2.0)).norm() < 1e-8);

        let x = MeasureSpace::with_weights(vec![0.2, 0.5, 1.3]).unwrap();
        let t = WctOp::new(x, Partition::discrete(3), Func::from_real(&[1.0, 2.0, 0.5]), Func::from_real(&[3.0, 0.25, 4.0])).unwrap();
        assert!(t.aluthge().dist(&t.to_matrix()) < 1e-12);
    }
}
