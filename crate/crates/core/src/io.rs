//! Scenario and matrix files.
//!
//! Complex numbers are written as `[re, im]`; plain numbers are accepted on
//! input as real values.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, OpMatrix};
use crate::measure::{Func, MeasureSpace, Partition};
use crate::operator::WctOp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexRepr> for Complex64 {
    fn from(c: ComplexRepr) -> Self {
        match c {
            ComplexRepr::Pair([re, im]) => Complex64::new(re, im),
            ComplexRepr::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

impl From<Complex64> for ComplexRepr {
    fn from(z: Complex64) -> Self {
        ComplexRepr::Pair([z.re, z.im])
    }
}

pub fn func_to_repr(f: &Func) -> Vec<ComplexRepr> {
    f.values().iter().map(|&z| z.into()).collect()
}

fn func_from_repr(v: &[ComplexRepr], n: usize, name: &str) -> Result<Func> {
    if v.len() != n {
        return Err(Error::Parse(format!("{name} has {} entries, expected {n}", v.len())));
    }
    let f = Func::new(v.iter().map(|&c| c.into()).collect());
    if f.values().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Parse(format!("{name} has a non-finite entry")));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub atoms: Vec<String>,
    pub mu: Vec<f64>,
    pub partition: Vec<Vec<String>>,
    pub u: Vec<ComplexRepr>,
    pub w: Vec<ComplexRepr>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

/// A `(space, partition, u, w)` quadruple with a free-form label.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: MeasureSpace,
    pub partition: Partition,
    pub u: Func,
    pub w: Func,
    pub label: String,
}

impl Scenario {
    pub fn new(space: MeasureSpace, partition: Partition, u: Func, w: Func, label: impl Into<String>) -> Result<Self> {
        let n = space.len();
        if partition.num_atoms() != n || u.len() != n || w.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: partition.num_atoms().max(u.len()).max(w.len()) });
        }
        Ok(Self { space, partition, u, w, label: label.into() })
    }

    pub fn op(&self) -> Result<WctOp> {
        WctOp::new(self.space.clone(), self.partition.clone(), self.u.clone(), self.w.clone())
    }

    pub fn to_file(&self) -> ScenarioFile {
        let ids = self.space.atoms();
        ScenarioFile {
            atoms: ids.to_vec(),
            mu: self.space.mu().to_vec(),
            partition: self
                .partition
                .blocks()
                .iter()
                .map(|b| b.iter().map(|&i| ids[i].clone()).collect())
                .collect(),
            u: func_to_repr(&self.u),
            w: func_to_repr(&self.w),
            label: self.label.clone(),
        }
    }

    pub fn from_file(f: ScenarioFile) -> Result<Self> {
        if f.atoms.len() != f.mu.len() {
            return Err(Error::Parse(format!("{} atoms but {} masses", f.atoms.len(), f.mu.len())));
        }
        let space = MeasureSpace::new(f.atoms, f.mu)?;
        let n = space.len();
        let mut blocks = Vec::with_capacity(f.partition.len());
        for block in &f.partition {
            let idx = block
                .iter()
                .map(|id| space.index_of(id).ok_or_else(|| Error::Parse(format!("unknown atom id {id:?} in partition"))))
                .collect::<Result<Vec<_>>>()?;
            blocks.push(idx);
        }
        let partition = Partition::new(blocks, n)?;
        let u = func_from_repr(&f.u, n, "u")?;
        let w = func_from_repr(&f.w, n, "w")?;
        Ok(Self { space, partition, u, w, label: f.label })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain data")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub atoms: Vec<String>,
    pub mu: Vec<f64>,
    pub matrix: Vec<Vec<ComplexRepr>>,
}

impl MatrixFile {
    pub fn from_op(m: &OpMatrix) -> Self {
        let e = m.entries();
        Self {
            atoms: m.space().atoms().to_vec(),
            mu: m.space().mu().to_vec(),
            matrix: (0..m.dim()).map(|i| (0..m.dim()).map(|j| e[(i, j)].into()).collect()).collect(),
        }
    }

    pub fn into_op(self) -> Result<OpMatrix> {
        if self.atoms.len() != self.mu.len() {
            return Err(Error::Parse(format!("{} atoms but {} masses", self.atoms.len(), self.mu.len())));
        }
        let space = MeasureSpace::new(self.atoms, self.mu)?;
        let n = space.len();
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!("matrix must be {n}×{n}")));
        }
        let flat: Vec<Complex64> = self.matrix.iter().flatten().map(|&c| c.into()).collect();
        if flat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix has a non-finite entry".into()));
        }
        OpMatrix::new(CMatrix::from_row_slice(n, n, &flat), space)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<OpMatrix> {
        let f: MatrixFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        f.into_op()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: &str = r#"{"atoms": ["x1", "x2"], "mu": [0.5, 0.5], "partition": [["x1", "x2"]],
        "u": [[1, 0], [2, 0]], "w": [2, [1, 0]]}"#;

    #[test]
    fn parses_and_round_trips() {
        let s = Scenario::from_json(A).unwrap();
        assert_eq!(s.op().unwrap().op_norm(), 2.5);
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            A.replace("[0.5, 0.5]", "[0.5, 0.0]"),
            A.replace("[0.5, 0.5]", "[0.5]"),
            A.replace(r#"[["x1", "x2"]]"#, r#"[["x1", "x3"]]"#),
            A.replace(r#"[["x1", "x2"]]"#, r#"[["x1"]]"#),
            A.replace(r#""w": [2, [1, 0]]"#, r#""w": [2]"#),
            A.replace("\"u\"", "\"v\""),
        ];
        for b in bad {
            assert!(Scenario::from_json(&b).is_err(), "{b}");
        }
    }

    #[test]
    fn matrix_file() {
        let m = Scenario::from_json(A).unwrap().op().unwrap().to_matrix();
        let f = MatrixFile::from_op(&m);
        let back = f.clone().into_op().unwrap();
        assert_eq!(back, m);
        let mut ragged = f;
        ragged.matrix[1].pop();
        assert!(ragged.into_op().is_err());
    }
}
