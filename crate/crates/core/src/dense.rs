//! Small dense matrices for the walk oracle: row-major storage, matrix
//! products and a cyclic Jacobi eigenvalue solver for symmetric input.

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `self * other`.
    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row_k = &other.data[k * n..(k + 1) * n];
                let row_out = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in row_out.iter_mut().zip(row_k) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `v * self` for a row vector `v`.
    pub fn vecmul_left(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let n = self.n;
        let mut out = vec![0.0; n];
        for (k, a) in v.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            let row = &self.data[k * n..(k + 1) * n];
            for (o, b) in out.iter_mut().zip(row) {
                *o += a * b;
            }
        }
        out
    }

    /// `self * v` for a column vector `v`.
    pub fn vecmul_right(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Add `weight * other` into `self`.
    pub fn add_scaled(&mut self, other: &SquareMatrix, weight: f64) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += weight * b;
        }
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, returned
/// in ascending order.
///
/// Input symmetry is the caller's responsibility; the walk oracle only
/// feeds in matrices symmetrized analytically.
pub fn symmetric_eigenvalues(m: &SquareMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut a = m.clone();
    if n == 1 {
        return vec![a[(0, 0)]];
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&a)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

fn frobenius(m: &SquareMatrix) -> f64 {
    m.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_against_hand_computation() {
        let mut a = SquareMatrix::zeros(2);
        a[(0, 0)] = 1.0;
        a[(0, 1)] = 2.0;
        a[(1, 0)] = 3.0;
        a[(1, 1)] = 4.0;
        let mut b = SquareMatrix::zeros(2);
        b[(0, 0)] = 0.0;
        b[(0, 1)] = 1.0;
        b[(1, 0)] = 1.0;
        b[(1, 1)] = 1.0;
        let c = a.matmul(&b);
        assert_eq!(c[(0, 0)], 2.0);
        assert_eq!(c[(0, 1)], 3.0);
        assert_eq!(c[(1, 0)], 4.0);
        assert_eq!(c[(1, 1)], 7.0);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let mut m = SquareMatrix::zeros(2);
        m[(0, 0)] = 2.0;
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        m[(1, 1)] = 2.0;
        let eig = symmetric_eigenvalues(&m);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_diagonal_passthrough() {
        let mut m = SquareMatrix::zeros(3);
        m[(0, 0)] = -1.0;
        m[(1, 1)] = 5.0;
        m[(2, 2)] = 2.0;
        let eig = symmetric_eigenvalues(&m);
        assert_eq!(eig, vec![-1.0, 2.0, 5.0]);
    }

    #[test]
    fn jacobi_matches_trace_and_det_on_random_symmetric() {
        use crate::stream::derive_stream;
        use rand::Rng;
        let mut rng = derive_stream(11, "jacobi", 0);
        let n = 8;
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen::<f64>() - 0.5;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let eig = symmetric_eigenvalues(&m);
        let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
        let eig_sum: f64 = eig.iter().sum();
        assert!((trace - eig_sum).abs() < 1e-10);
        // sum of squares equals Frobenius norm squared for symmetric input
        let fro2: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let eig2: f64 = eig.iter().map(|x| x * x).sum();
        assert!((fro2 - eig2).abs() < 1e-10);
    }
}
