//! Dense exact matrices over a [`FieldSpec`].

use crate::field::{FieldElem, FieldSpec};

/// Row-major dense matrix. Rows may be empty only when `cols == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    cols: usize,
    rows: Vec<Vec<FieldElem>>,
}

impl Matrix {
    pub fn new(field: FieldSpec, cols: usize, rows: Vec<Vec<FieldElem>>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Matrix { field, cols, rows }
    }

    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix::new(field, cols, vec![vec![field.zero(); cols]; rows])
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.rows[i][i] = field.one();
        }
        m
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Vec<FieldElem>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<FieldElem>> {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElem {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.rows[i][j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let rows = (0..self.cols)
            .map(|j| self.rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        Matrix::new(self.field, self.rows.len(), rows)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.nrows());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..other.cols)
                    .map(|j| {
                        r.iter()
                            .zip(other.rows.iter())
                            .fold(self.field.zero(), |acc, (a, row)| acc + a * &row[j])
                    })
                    .collect()
            })
            .collect();
        Matrix::new(self.field, other.cols, rows)
    }

    pub fn apply(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(v.len(), self.cols);
        self.rows.iter().map(|r| dot(self.field, r, v)).collect()
    }

    /// Reduced row-echelon form with zero rows dropped, plus pivot columns.
    pub fn rref(&self) -> (Vec<Vec<FieldElem>>, Vec<usize>) {
        let mut m = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == m.len() {
                break;
            }
            let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let inv = m[r][c].inverse().expect("pivot is nonzero");
            for x in m[r].iter_mut() {
                *x = &*x * &inv;
            }
            for i in 0..m.len() {
                if i != r && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for j in c..self.cols {
                        let sub = &f * &m[r][j];
                        m[i][j] = &m[i][j] - &sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : M v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<FieldElem>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![self.field.zero(); self.cols];
                v[f] = self.field.one();
                for (row, &pc) in r.iter().zip(&pivots) {
                    v[pc] = -&row[f];
                }
                v
            })
            .collect()
    }

    /// Bareiss fraction-free elimination. Requires a square matrix.
    pub fn determinant(&self) -> FieldElem {
        let n = self.rows.len();
        assert_eq!(n, self.cols, "determinant of a non-square matrix");
        if n == 0 {
            return self.field.one();
        }
        let mut m = self.rows.clone();
        let mut sign_flip = false;
        let mut prev = self.field.one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                    return self.field.zero();
                };
                m.swap(k, p);
                sign_flip = !sign_flip;
            }
            let prev_inv = prev.inverse().expect("Bareiss pivot nonzero");
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                    m[i][j] = &t * &prev_inv;
                }
                m[i][k] = self.field.zero();
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if sign_flip {
            -d
        } else {
            d
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows.len() == self.cols && self.rank() == self.cols
    }
}

pub fn dot(field: FieldSpec, a: &[FieldElem], b: &[FieldElem]) -> FieldElem {
    a.iter()
        .zip(b)
        .fold(field.zero(), |acc, (x, y)| acc + x * y)
}

/// Rank of the matrix whose rows are `vectors`.
pub fn rank_of(field: FieldSpec, cols: usize, vectors: &[Vec<FieldElem>]) -> usize {
    Matrix::new(field, cols, vectors.to_vec()).rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(field: FieldSpec, rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::new(
            field,
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| field.from_i64(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn determinant_matches_expansion() {
        let q = FieldSpec::rationals();
        let a = m(q, &[&[2, -1, 0], &[1, 3, 4], &[0, 5, -2]]);
        // 2(3·-2 - 4·5) - (-1)(1·-2 - 0) + 0 = -52 - 2
        assert_eq!(a.determinant(), q.from_i64(-54));
        let b = m(q, &[&[0, 1], &[1, 0]]);
        assert_eq!(b.determinant(), q.from_i64(-1));
        let f5 = FieldSpec::prime(5).unwrap();
        assert_eq!(m(f5, &[&[1, 2], &[3, 4]]).determinant(), f5.from_i64(-2));
    }

    #[test]
    fn nullspace_is_annihilated() {
        let q = FieldSpec::rationals();
        let a = m(q, &[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        assert_eq!(a.rank(), 2);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(a.apply(v).iter().all(|x| x.is_zero()));
        }
    }
}
