//! JSON encodings of matrices, sequences and witnesses.
//!
//! Matrices are `{"rows": n, "cols": m, "data": [...]}` in row-major order,
//! each entry either `[re, im]` or a plain real number.

use std::io::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{FrameError, Result};
use crate::fusion::{FusionPair, FusionSequence, QWitness};
use crate::linalg::{Matrix, Subspace, Tolerance, C64};
use crate::ovframe::OvSequence;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Entry>,
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| Entry::Complex([m[(i, j)].re, m[(i, j)].im]))
            .collect();
        MatrixJson { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = FrameError;

    fn try_from(j: MatrixJson) -> Result<Matrix> {
        if j.data.len() != j.rows * j.cols {
            return Err(FrameError::Parse(format!(
                "matrix declares {}x{} but has {} entries",
                j.rows,
                j.cols,
                j.data.len()
            )));
        }
        let entries: Vec<C64> = j
            .data
            .iter()
            .map(|e| match e {
                Entry::Complex([re, im]) => C64::new(*re, *im),
                Entry::Real(re) => C64::new(*re, 0.0),
            })
            .collect();
        let m = Matrix::from_row_slice(j.rows, j.cols, &entries);
        crate::linalg::check_finite(&m)?;
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OvJson {
    Blocks { domain_dim: usize, codomain_dim: usize, blocks: Vec<MatrixJson> },
    Vectors { vectors: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    basis: MatrixJson,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct FusionJson {
    ambient_dim: usize,
    pairs: Vec<PairJson>,
}

#[derive(Serialize, Deserialize)]
struct WitnessJson {
    #[serde(rename = "Q")]
    q: Vec<MatrixJson>,
}

fn parse<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| FrameError::Parse(e.to_string()))
}

fn from_value<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| FrameError::Parse(e.to_string()))
}

pub fn matrix_from_json(s: &str) -> Result<Matrix> {
    parse::<MatrixJson>(s)?.try_into()
}

pub fn matrix_to_value(m: &Matrix) -> Value {
    serde_json::to_value(MatrixJson::from(m)).expect("serializable")
}

fn matrices(list: Vec<MatrixJson>) -> Result<Vec<Matrix>> {
    list.into_iter().map(Matrix::try_from).collect()
}

fn ov_from_value(v: Value) -> Result<OvSequence> {
    match from_value::<OvJson>(v)? {
        OvJson::Blocks { domain_dim, codomain_dim, blocks } => {
            OvSequence::new(domain_dim, codomain_dim, matrices(blocks)?)
        }
        OvJson::Vectors { vectors } => {
            let cols: Vec<Matrix> = vectors.iter().map(|v| crate::linalg::real_vector(v)).collect();
            OvSequence::from_vectors(&cols)
        }
    }
}

pub fn ov_from_json(s: &str) -> Result<OvSequence> {
    ov_from_value(parse(s)?)
}

pub fn ov_to_value(a: &OvSequence) -> Value {
    let json = OvJson::Blocks {
        domain_dim: a.domain_dim(),
        codomain_dim: a.codomain_dim(),
        blocks: a.blocks().iter().map(MatrixJson::from).collect(),
    };
    serde_json::to_value(json).expect("serializable")
}

fn fusion_from_value(v: Value, tol: &Tolerance) -> Result<FusionSequence> {
    let json: FusionJson = from_value(v)?;
    let pairs = json
        .pairs
        .into_iter()
        .map(|p| {
            let basis = Matrix::try_from(p.basis)?;
            if basis.nrows() != json.ambient_dim {
                return Err(FrameError::InvalidInput(format!(
                    "basis has {} rows, expected {}",
                    basis.nrows(),
                    json.ambient_dim
                )));
            }
            Ok(FusionPair::new(Subspace::span(&basis, tol)?, p.weight))
        })
        .collect::<Result<Vec<_>>>()?;
    FusionSequence::new(json.ambient_dim, pairs)
}

/// Bases need not be orthonormal; the subspace is their span.
pub fn fusion_from_json(s: &str, tol: &Tolerance) -> Result<FusionSequence> {
    fusion_from_value(parse(s)?, tol)
}

pub fn fusion_to_value(w: &FusionSequence) -> Value {
    let json = FusionJson {
        ambient_dim: w.ambient_dim(),
        pairs: w
            .pairs()
            .iter()
            .map(|p| PairJson { basis: MatrixJson::from(p.subspace.basis()), weight: p.weight })
            .collect(),
    };
    serde_json::to_value(json).expect("serializable")
}

pub fn witness_from_json(s: &str) -> Result<QWitness> {
    Ok(QWitness { q: matrices(parse::<WitnessJson>(s)?.q)? })
}

pub fn witness_to_value(q: &QWitness) -> Value {
    let json = WitnessJson { q: q.q.iter().map(MatrixJson::from).collect() };
    serde_json::to_value(json).expect("serializable")
}

/// Either kind of frame input.
#[derive(Clone, Debug)]
pub enum FrameInput {
    Ov(OvSequence),
    Fusion(FusionSequence),
}

/// Dispatches on the presence of `pairs`.
pub fn frame_from_json(s: &str, tol: &Tolerance) -> Result<FrameInput> {
    let v: Value = parse(s)?;
    if v.get("pairs").is_some() {
        Ok(FrameInput::Fusion(fusion_from_value(v, tol)?))
    } else {
        Ok(FrameInput::Ov(ov_from_value(v)?))
    }
}

/// Writes floats as `{:.16e}`, 17 significant digits, so output is exact
/// and byte-stable.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactFloats;

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Serializes `value` with [`ExactFloats`]. Non-finite numbers become `null`.
pub fn to_exact_json<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats);
    value.serialize(&mut ser).expect("writing to memory");
    String::from_utf8(out).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, from_real_rows};

    #[test]
    fn real_entries_are_promoted() {
        let m = matrix_from_json(r#"{"rows": 2, "cols": 1, "data": [1.5, [0, -2]]}"#).unwrap();
        assert_eq!(m[(0, 0)], C64::new(1.5, 0.0));
        assert_eq!(m[(1, 0)], C64::new(0.0, -2.0));
    }

    #[test]
    fn bad_matrices_are_parse_errors() {
        let short = matrix_from_json(r#"{"rows": 2, "cols": 2, "data": [1, 2, 3]}"#);
        assert!(matches!(short, Err(FrameError::Parse(_))));
        assert!(matches!(matrix_from_json("{"), Err(FrameError::Parse(_))));
        assert!(matches!(matrix_from_json(r#"{"rows": 1, "cols": 1, "data": ["x"]}"#), Err(FrameError::Parse(_))));
    }

    #[test]
    fn exact_round_trip() {
        let m = from_real_rows(&[&[0.1, 1.0 / 3.0], &[std::f64::consts::PI, -2e-300]]);
        let text = to_exact_json(&matrix_to_value(&m));
        assert!(text.contains("3.3333333333333331e-1"));
        assert_eq!(dist(&matrix_from_json(&text).unwrap(), &m), 0.0);
    }

    #[test]
    fn vector_shorthand() {
        let a = ov_from_json(r#"{"vectors": [[1, 0], [0, 1], [1, 1]]}"#).unwrap();
        assert_eq!((a.len(), a.domain_dim(), a.codomain_dim()), (3, 2, 1));
        let back = ov_from_json(&to_exact_json(&ov_to_value(&a))).unwrap();
        assert_eq!(dist(&back.analysis_operator(), &a.analysis_operator()), 0.0);
    }

    #[test]
    fn fusion_and_dispatch() {
        let t = Tolerance::default();
        let s = r#"{"ambient_dim": 2, "pairs": [
            {"basis": {"rows": 2, "cols": 1, "data": [2, 0]}, "weight": 1},
            {"basis": {"rows": 2, "cols": 0, "data": []}, "weight": 0}]}"#;
        let FrameInput::Fusion(w) = frame_from_json(s, &t).unwrap() else { panic!() };
        assert_eq!(w.pairs()[0].subspace.dim(), 1);
        assert!(w.pairs()[1].is_degenerate());
        let back = fusion_from_json(&to_exact_json(&fusion_to_value(&w)), &t).unwrap();
        assert_eq!(back.weights(), w.weights());
        let bad = r#"{"ambient_dim": 3, "pairs": [{"basis": {"rows": 2, "cols": 1, "data": [1, 0]}, "weight": 1}]}"#;
        assert!(fusion_from_json(bad, &t).is_err());
    }

    #[test]
    fn witness_round_trip() {
        let q = QWitness { q: vec![from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]])] };
        let back = witness_from_json(&to_exact_json(&witness_to_value(&q))).unwrap();
        assert_eq!(dist(&back.q[0], &q.q[0]), 0.0);
    }
}
