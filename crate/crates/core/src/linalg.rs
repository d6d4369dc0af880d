//! Row-major matrices and the small amount of dense linear algebra the
//! crate needs (dot products, matrix-vector products, orthonormalization).

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Dense row-major matrix of `f64`.
///
/// Used for covariate tables (`n × D`), score matrices (`n₂ × |A|`), and
/// rotation matrices (`D × D`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowMatrix {
    data: Vec<f64>,
    cols: usize,
}

impl RowMatrix {
    pub fn new(cols: usize) -> Self {
        assert!(cols > 0, "matrix must have at least one column");
        Self {
            data: Vec::new(),
            cols,
        }
    }

    pub fn with_capacity(rows: usize, cols: usize) -> Self {
        assert!(cols > 0, "matrix must have at least one column");
        Self {
            data: Vec::with_capacity(rows * cols),
            cols,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "need at least one row");
        let cols = rows[0].len();
        let mut m = Self::with_capacity(rows.len(), cols);
        for r in rows {
            m.push_row(r);
        }
        m
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row length must match column count");
        self.data.extend_from_slice(row);
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    /// Matrix-vector product `self · v`.
    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "vector length must match columns");
        self.iter_rows().map(|r| dot(r, v)).collect()
    }

    /// Product with the transpose, `selfᵀ · v`.
    pub fn transpose_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows(), "vector length must match rows");
        let mut out = vec![0.0; self.cols];
        for (r, &vi) in self.iter_rows().zip(v) {
            for (o, &rj) in out.iter_mut().zip(r) {
                *o += vi * rj;
            }
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Seeded random orthogonal matrix: modified Gram-Schmidt on a Gaussian
/// draw, with a deterministic sign convention (positive diagonal).
///
/// Two orthogonalization passes keep `‖QᵀQ − I‖_max` around machine
/// precision for the dimensions used here (D ≤ 64).
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> RowMatrix {
    assert!(dim >= 1);
    let normal = rand_distr::StandardNormal;
    let mut cols: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.sample(normal)).collect())
        .collect();

    for j in 0..dim {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = dot(&cols[j], &cols[k]);
                let prev = cols[k].clone();
                for (cj, pk) in cols[j].iter_mut().zip(&prev) {
                    *cj -= proj * pk;
                }
            }
        }
        let norm = dot(&cols[j], &cols[j]).sqrt();
        assert!(norm > 1e-12, "degenerate Gaussian draw");
        for c in cols[j].iter_mut() {
            *c /= norm;
        }
        if cols[j][j] < 0.0 {
            for c in cols[j].iter_mut() {
                *c = -*c;
            }
        }
    }

    // cols[j] is the j-th column; store row-major.
    let mut m = RowMatrix::with_capacity(dim, dim);
    for i in 0..dim {
        let row: Vec<f64> = (0..dim).map(|j| cols[j][i]).collect();
        m.push_row(&row);
    }
    m
}

/// Identity matrix as a `RowMatrix`.
pub fn identity(dim: usize) -> RowMatrix {
    let mut m = RowMatrix::with_capacity(dim, dim);
    for i in 0..dim {
        let mut row = vec![0.0; dim];
        row[i] = 1.0;
        m.push_row(&row);
    }
    m
}

/// Max-abs deviation of `QᵀQ` from the identity.
pub fn orthogonality_defect(q: &RowMatrix) -> f64 {
    let d = q.cols();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += q.row(k)[i] * q.row(k)[j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_orthogonal_is_orthogonal() {
        for dim in [2, 3, 10, 30] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let q = random_orthogonal(dim, &mut rng);
            assert!(
                orthogonality_defect(&q) < 1e-10,
                "defect too large at dim {dim}"
            );
        }
    }

    #[test]
    fn random_orthogonal_is_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(random_orthogonal(8, &mut a), random_orthogonal(8, &mut b));
    }

    #[test]
    fn transpose_vec_matches_manual() {
        let m = RowMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let v = vec![1.0, 0.5, 2.0];
        assert_eq!(m.transpose_vec(&v), vec![1.0 + 1.5 + 10.0, 2.0 + 2.0 + 12.0]);
    }
}
