use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::linalg::exact::{primitive, HybridSpan};
use crate::linalg::{dot, Matrix, Subspace};
use crate::transform::{radial_map, ForsterPiece};
use crate::{Mat, Space};

use super::LearnerError;

/// One band rule: claims `x ∈ V` with `|w·f_A(x)| ≥ t` and predicts
/// `sign(w·f_A(x))`.
#[derive(Clone, Debug)]
pub struct Stage {
    pub subspace: Space,
    pub generators: Vec<Vec<i64>>,
    pub transform: Mat,
    pub w: Vec<f64>,
    pub threshold: f64,
    exact: HybridSpan,
}

impl Stage {
    pub fn new(subspace: Space, generators: Vec<Vec<i64>>, transform: Mat, w: Vec<f64>, threshold: f64) -> Result<Self, LearnerError> {
        let k = subspace.dim();
        if transform.rows() != k || transform.cols() != k || w.len() != k || generators.len() != k {
            return Err(LearnerError::Malformed("stage shapes do not match the subspace".into()));
        }
        if !(threshold >= 0.0) {
            return Err(LearnerError::Malformed("negative threshold".into()));
        }
        let mut exact = HybridSpan::new(subspace.ambient_dim());
        for g in &generators {
            exact.insert(&primitive(g));
        }
        if exact.rank() != k {
            return Err(LearnerError::Malformed("generators do not span the subspace".into()));
        }
        Ok(Self { subspace, generators, transform, w, threshold, exact })
    }

    pub fn from_piece(piece: &ForsterPiece, w: Vec<f64>, threshold: f64) -> Result<Self, LearnerError> {
        Self::new(piece.subspace.clone(), piece.generators.clone(), piece.transform.clone(), w, threshold)
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.exact.rank() == x.len() || self.exact.contains(&primitive(x))
    }

    /// `f_A(x)` in subspace coordinates; `x` must lie in `V`.
    pub fn map(&self, x: &[i64]) -> Vec<f64> {
        let xf: Vec<f64> = x.iter().map(|&c| c as f64).collect();
        radial_map(&self.transform, &self.subspace.coords(&xf)).expect("nonzero point of the subspace")
    }

    pub fn claims(&self, x: &[i64]) -> Option<i8> {
        if !self.contains(x) {
            return None;
        }
        let s = dot(&self.w, &self.map(x));
        (s.abs() >= self.threshold).then_some(if s >= 0.0 { 1 } else { -1 })
    }

    pub fn to_record(&self) -> StageRecord {
        let b = self.subspace.basis();
        StageRecord {
            subspace_basis: (0..b.cols()).map(|j| b.col(j)).collect(),
            generators: self.generators.clone(),
            transform: self.transform.to_rows(),
            w: self.w.clone(),
            threshold: self.threshold,
        }
    }

    pub fn from_record(rec: StageRecord) -> Result<Self, LearnerError> {
        let ambient = rec.subspace_basis.first().map(Vec::len).ok_or(LearnerError::Malformed("empty basis".into()))?;
        let basis = Matrix::from_columns(&rec.subspace_basis, ambient).map_err(|e| LearnerError::Malformed(e.to_string()))?;
        let subspace = Subspace::from_orthonormal(basis).map_err(|e| LearnerError::Malformed(e.to_string()))?;
        let transform = Matrix::from_rows(&rec.transform).map_err(|e| LearnerError::Malformed(e.to_string()))?;
        Self::new(subspace, rec.generators, transform, rec.w, rec.threshold)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageRecord {
    pub subspace_basis: Vec<Vec<f64>>,
    pub generators: Vec<Vec<i64>>,
    pub transform: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    pub threshold: f64,
}

/// Chain of stages; the first stage that claims a point decides its label,
/// and unclaimed points get `None` (abstain).
#[derive(Clone, Debug)]
pub struct PartialClassifier {
    dim: usize,
    stages: Vec<Stage>,
}

impl PartialClassifier {
    pub fn new(dim: usize) -> Self {
        Self { dim, stages: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn push(&mut self, stage: Stage) -> Result<(), LearnerError> {
        if stage.subspace.ambient_dim() != self.dim {
            return Err(LearnerError::Malformed("stage dimension".into()));
        }
        self.stages.push(stage);
        Ok(())
    }

    pub fn predict(&self, x: &[i64]) -> Option<i8> {
        self.stages.iter().find_map(|s| s.claims(x))
    }

    /// Abstentions resolved to +1.
    pub fn predict_total(&self, x: &[i64]) -> i8 {
        self.predict(x).unwrap_or(1)
    }

    pub fn to_record(&self) -> ClassifierRecord {
        ClassifierRecord { dim: self.dim, stages: self.stages.iter().map(Stage::to_record).collect(), default_label: 1 }
    }

    pub fn from_record(rec: ClassifierRecord) -> Result<Self, LearnerError> {
        let mut h = Self::new(rec.dim);
        for s in rec.stages {
            h.push(Stage::from_record(s)?)?;
        }
        Ok(h)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifierRecord {
    pub dim: usize,
    pub stages: Vec<StageRecord>,
    /// Label used where every stage abstains.
    pub default_label: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    /// Misclassification rate over the claimed points (0 when none is claimed).
    pub claimed_error: f64,
    pub coverage: f64,
    /// Misclassification rate with abstentions resolved to +1.
    pub total_error: f64,
}

pub fn evaluate_classifier(h: &PartialClassifier, test: &LabeledDataset) -> Evaluation {
    let (mut claimed, mut wrong_claimed, mut wrong_total) = (0usize, 0usize, 0usize);
    for (x, y) in test.iter() {
        match h.predict(x) {
            Some(p) => {
                claimed += 1;
                if p != y {
                    wrong_claimed += 1;
                    wrong_total += 1;
                }
            }
            None => {
                if y != 1 {
                    wrong_total += 1;
                }
            }
        }
    }
    let n = test.len().max(1) as f64;
    Evaluation {
        claimed_error: if claimed == 0 { 0.0 } else { wrong_claimed as f64 / claimed as f64 },
        coverage: claimed as f64 / n,
        total_error: wrong_total as f64 / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PointSet;

    fn data(pts: &[(&[i64], i8)]) -> LabeledDataset {
        let base = PointSet::new(pts[0].0.len(), pts.iter().map(|p| p.0.to_vec()).collect()).unwrap();
        LabeledDataset::new(base, pts.iter().map(|p| p.1).collect()).unwrap()
    }

    fn full_stage(w: Vec<f64>, t: f64) -> Stage {
        Stage::new(Space::full(2), vec![vec![1, 0], vec![0, 1]], Matrix::identity(2), w, t).unwrap()
    }

    #[test]
    fn always_plus_one() {
        let mut h = PartialClassifier::new(2);
        h.push(full_stage(vec![0.0, 0.0], 0.0)).unwrap();
        let e = evaluate_classifier(&h, &data(&[(&[1, 2], 1), (&[-3, 1], 1)]));
        assert_eq!((e.claimed_error, e.coverage, e.total_error), (0.0, 1.0, 0.0));
    }

    #[test]
    fn always_abstain() {
        let h = PartialClassifier::new(2);
        let e = evaluate_classifier(&h, &data(&[(&[1, 2], 1), (&[-3, 1], -1), (&[2, 2], -1), (&[1, 1], 1)]));
        assert_eq!((e.coverage, e.total_error), (0.0, 0.5));
    }

    #[test]
    fn two_stage_chain_by_hand() {
        // Stage 1: the x-axis line, predicts sign(x1) everywhere on it.
        let line = crate::linalg::span_of(&[vec![1.0, 0.0]]).unwrap();
        let s1 = Stage::new(line, vec![vec![1, 0]], Matrix::identity(1), vec![1.0], 0.0).unwrap();
        // Stage 2: the plane, claims |x2|/‖x‖ ≥ 0.5 and predicts sign(x2).
        let s2 = full_stage(vec![0.0, 1.0], 0.5);
        let mut h = PartialClassifier::new(2);
        h.push(s1).unwrap();
        h.push(s2).unwrap();
        let pts: [(&[i64], i8); 6] = [(&[3, 0], 1), (&[-2, 0], 1), (&[1, 5], 1), (&[1, -5], 1), (&[5, 1], -1), (&[-4, -1], 1)];
        let preds: Vec<Option<i8>> = pts.iter().map(|p| h.predict(p.0)).collect();
        assert_eq!(preds, vec![Some(1), Some(-1), Some(1), Some(-1), None, None]);
        let e = evaluate_classifier(&h, &data(&pts));
        assert_eq!(e.coverage, 4.0 / 6.0);
        assert_eq!(e.claimed_error, 2.0 / 4.0);
        assert_eq!(e.total_error, 3.0 / 6.0);
    }

    #[test]
    fn record_round_trip() {
        let mut h = PartialClassifier::new(2);
        h.push(full_stage(vec![0.6, -0.8], 0.1)).unwrap();
        let text = crate::json::to_string(&h.to_record()).unwrap();
        let back = PartialClassifier::from_record(serde_json::from_str(&text).unwrap()).unwrap();
        for x in [[1i64, 2], [5, -1], [-3, -3]] {
            assert_eq!(back.predict(&x), h.predict(&x));
        }
    }
}
