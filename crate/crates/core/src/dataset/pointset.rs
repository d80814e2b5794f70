use super::DatasetError;

/// Number of bits `b` with `|c| < 2^b`.
pub fn bit_length(c: i64) -> u32 {
    64 - c.unsigned_abs().leading_zeros()
}

/// Finite multiset of nonzero integer points in a common dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<i64>>,
    bit_complexity: u32,
}

impl PointSet {
    /// Validates dimensions and the no-zero-vector invariant. Errors carry the
    /// 1-based row of the offending point.
    pub fn new(dim: usize, points: Vec<Vec<i64>>) -> Result<Self, DatasetError> {
        if dim == 0 {
            return Err(DatasetError::Parse { line: 0, msg: "dimension must be positive".into() });
        }
        let mut bits = 0;
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(DatasetError::DimensionMismatch { line: i + 1, expected: dim, found: p.len() });
            }
            if p.iter().all(|&c| c == 0) {
                return Err(DatasetError::ZeroPoint { line: i + 1 });
            }
            if p.iter().any(|&c| c == i64::MIN) {
                return Err(DatasetError::Parse { line: i + 1, msg: "coordinate out of range".into() });
            }
            bits = p.iter().fold(bits, |b, &c| b.max(bit_length(c)));
        }
        Ok(Self { dim, points, bit_complexity: bits })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.points[i]
    }

    pub fn bit_complexity(&self) -> u32 {
        self.bit_complexity
    }

    pub fn as_refs(&self) -> Vec<&[i64]> {
        self.points.iter().map(Vec::as_slice).collect()
    }

    /// Sub-multiset at the given indices (in that order).
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        let points: Vec<Vec<i64>> = indices.iter().map(|&i| self.points[i].clone()).collect();
        let bits = points.iter().flatten().fold(0, |b, &c| b.max(bit_length(c)));
        PointSet { dim: self.dim, points, bit_complexity: bits }
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.iter().map(|&c| c as f64).collect()).collect()
    }
}

/// Labeled sample: points with ±1 labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledDataset {
    base: PointSet,
    labels: Vec<i8>,
}

impl LabeledDataset {
    pub fn new(base: PointSet, labels: Vec<i8>) -> Result<Self, DatasetError> {
        if labels.len() != base.len() {
            return Err(DatasetError::LengthMismatch { points: base.len(), labels: labels.len() });
        }
        if let Some(i) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(DatasetError::InvalidLabel { line: i + 1 });
        }
        Ok(Self { base, labels })
    }

    pub fn base(&self) -> &PointSet {
        &self.base
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], i8)> {
        self.base.points().iter().map(Vec::as_slice).zip(self.labels.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_lengths() {
        assert_eq!(bit_length(0), 0);
        assert_eq!(bit_length(1), 1);
        assert_eq!(bit_length(-1), 1);
        assert_eq!(bit_length(16), 5);
        assert_eq!(bit_length(15), 4);
        assert_eq!(bit_length(1 << 40), 41);
    }

    #[test]
    fn zero_point_rejected() {
        let err = PointSet::new(2, vec![vec![1, 0], vec![0, 0]]).unwrap_err();
        assert_eq!(err, DatasetError::ZeroPoint { line: 2 });
    }

    #[test]
    fn labels_validated() {
        let base = PointSet::new(1, vec![vec![1], vec![2]]).unwrap();
        assert!(LabeledDataset::new(base.clone(), vec![1]).is_err());
        assert!(LabeledDataset::new(base.clone(), vec![1, 0]).is_err());
        assert!(LabeledDataset::new(base, vec![1, -1]).is_ok());
    }
}
