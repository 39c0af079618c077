//! Small dense linear algebra.
//!
//! [`exact`] runs Gauss–Jordan elimination over any exact field (used with
//! `BigRational`) so conservation laws come out with zero residual.
//! [`dense`] holds the floating point kernels: Householder QR with column
//! pivoting for ranks, kernels and minimum-norm least squares, plus Cholesky.

pub mod exact {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_rational::BigRational;
    use num_traits::{Num, One, Signed, ToPrimitive, Zero};
    use std::ops::Neg;

    pub type Q = BigRational;

    pub fn q(n: i64) -> Q {
        Q::from_integer(BigInt::from(n))
    }

    /// Exact rational value of a finite float.
    pub fn q_from_f64(x: f64) -> Option<Q> {
        Q::from_float(x)
    }

    /// Reduces `m` in place to reduced row echelon form; returns pivot columns.
    pub fn rref<F>(m: &mut [Vec<F>]) -> Vec<usize>
    where
        F: Num + Clone + Neg<Output = F>,
    {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let inv = F::one() / m[r][c].clone();
            for x in m[r].iter_mut() {
                *x = x.clone() * inv.clone();
            }
            for i in 0..rows {
                if i == r || m[i][c].is_zero() {
                    continue;
                }
                let f = m[i][c].clone();
                for j in 0..cols {
                    let d = f.clone() * m[r][j].clone();
                    m[i][j] = m[i][j].clone() - d;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank<F>(m: &[Vec<F>]) -> usize
    where
        F: Num + Clone + Neg<Output = F>,
    {
        let mut w = m.to_vec();
        rref(&mut w).len()
    }

    /// Basis of the right kernel `{x : m x = 0}`, one vector per free column.
    pub fn kernel<F>(m: &[Vec<F>], cols: usize) -> Vec<Vec<F>>
    where
        F: Num + Clone + Neg<Output = F>,
    {
        let mut w = m.to_vec();
        let pivots = rref(&mut w);
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![F::zero(); cols];
                v[f] = F::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -w[row][f].clone();
                }
                v
            })
            .collect()
    }

    pub fn transpose<F: Clone>(m: &[Vec<F>], cols: usize) -> Vec<Vec<F>> {
        (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
    }

    pub fn mat_vec<F>(m: &[Vec<F>], v: &[F]) -> Vec<F>
    where
        F: Num + Clone,
    {
        m.iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    /// Scales a rational vector to the primitive integer vector on the same ray.
    pub fn primitive_integer(v: &[Q]) -> Vec<BigInt> {
        let lcm = v
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if gcd.is_zero() {
            return ints;
        }
        ints.into_iter().map(|x| x / &gcd).collect()
    }

    pub fn to_i64_vec(v: &[BigInt]) -> Option<Vec<i64>> {
        v.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn to_f64(x: &Q) -> f64 {
        x.to_f64().unwrap_or(f64::NAN)
    }

    /// `true` when `a` and `b` span the same subspace of `F^dim`.
    pub fn same_span<F>(a: &[Vec<F>], b: &[Vec<F>]) -> bool
    where
        F: Num + Clone + Neg<Output = F>,
    {
        let ra = rank(a);
        let rb = rank(b);
        let mut both = a.to_vec();
        both.extend_from_slice(b);
        ra == rb && rank(&both) == ra
    }

    pub fn is_zero_vec<F: Zero>(v: &[F]) -> bool {
        v.iter().all(Zero::is_zero)
    }

    pub fn abs_max(v: &[Q]) -> Q {
        v.iter().fold(Q::zero(), |m, x| if x.abs() > m { x.abs() } else { m })
    }
}

pub mod dense {
    use crate::scalar::Real;

    /// Row-major dense matrix.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Mat<R> {
        pub rows: usize,
        pub cols: usize,
        pub data: Vec<R>,
    }

    impl<R: Real> Mat<R> {
        pub fn zeros(rows: usize, cols: usize) -> Self {
            Self {
                rows,
                cols,
                data: vec![R::zero(); rows * cols],
            }
        }

        pub fn identity(n: usize) -> Self {
            let mut m = Self::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = R::one();
            }
            m
        }

        pub fn from_rows(rows: &[Vec<R>]) -> Self {
            let r = rows.len();
            let c = rows.first().map_or(0, Vec::len);
            let mut m = Self::zeros(r, c);
            for (i, row) in rows.iter().enumerate() {
                assert_eq!(row.len(), c, "ragged matrix");
                m.data[i * c..(i + 1) * c].copy_from_slice(row);
            }
            m
        }

        pub fn from_columns(rows: usize, columns: &[Vec<R>]) -> Self {
            let mut m = Self::zeros(rows, columns.len());
            for (j, col) in columns.iter().enumerate() {
                for (i, &x) in col.iter().enumerate() {
                    m[(i, j)] = x;
                }
            }
            m
        }

        pub fn column(&self, j: usize) -> Vec<R> {
            (0..self.rows).map(|i| self[(i, j)]).collect()
        }

        pub fn row(&self, i: usize) -> &[R] {
            &self.data[i * self.cols..(i + 1) * self.cols]
        }

        pub fn transpose(&self) -> Self {
            let mut t = Self::zeros(self.cols, self.rows);
            for i in 0..self.rows {
                for j in 0..self.cols {
                    t[(j, i)] = self[(i, j)];
                }
            }
            t
        }

        pub fn mul_vec(&self, v: &[R]) -> Vec<R> {
            assert_eq!(v.len(), self.cols);
            (0..self.rows)
                .map(|i| crate::scalar::dot(self.row(i), v))
                .collect()
        }

        pub fn tr_mul_vec(&self, v: &[R]) -> Vec<R> {
            assert_eq!(v.len(), self.rows);
            let mut out = vec![R::zero(); self.cols];
            for i in 0..self.rows {
                for j in 0..self.cols {
                    out[j] = out[j] + self[(i, j)] * v[i];
                }
            }
            out
        }

        pub fn mul(&self, other: &Self) -> Self {
            assert_eq!(self.cols, other.rows);
            let mut out = Self::zeros(self.rows, other.cols);
            for i in 0..self.rows {
                for k in 0..self.cols {
                    let a = self[(i, k)];
                    if a == R::zero() {
                        continue;
                    }
                    for j in 0..other.cols {
                        out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                    }
                }
            }
            out
        }

        pub fn frobenius(&self) -> R {
            self.data.iter().map(|&x| x * x).sum::<R>().sqrt()
        }

        pub fn to_rows(&self) -> Vec<Vec<R>> {
            (0..self.rows).map(|i| self.row(i).to_vec()).collect()
        }
    }

    impl<R> std::ops::Index<(usize, usize)> for Mat<R> {
        type Output = R;
        fn index(&self, (i, j): (usize, usize)) -> &R {
            &self.data[i * self.cols + j]
        }
    }

    impl<R> std::ops::IndexMut<(usize, usize)> for Mat<R> {
        fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut R {
            &mut self.data[i * self.cols + j]
        }
    }

    /// Householder QR with column pivoting: `A P = Q R`.
    #[derive(Debug, Clone)]
    pub struct PivotedQr<R> {
        /// Full orthogonal factor, `rows x rows`.
        pub q: Mat<R>,
        /// Upper triangular factor, `rows x cols`.
        pub r: Mat<R>,
        pub perm: Vec<usize>,
        pub rank: usize,
    }

    /// Numerical rank uses `|R_kk| > rel_tol * ||A||_F`.
    pub fn pivoted_qr<R: Real>(a: &Mat<R>, rel_tol: R) -> PivotedQr<R> {
        let (m, n) = (a.rows, a.cols);
        let mut r = a.clone();
        let mut q = Mat::identity(m);
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = rel_tol * a.frobenius();
        let steps = m.min(n);
        let mut rank = 0;
        for k in 0..steps {
            // pivot on the largest remaining column norm
            let (best, best_norm) = (k..n)
                .map(|j| {
                    let s: R = (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum();
                    (j, s)
                })
                .fold((k, -R::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best_norm.sqrt() <= threshold {
                break;
            }
            if best != k {
                for i in 0..m {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }
            let mut v: Vec<R> = (k..m).map(|i| r[(i, k)]).collect();
            let alpha = {
                let nrm = crate::scalar::norm2(&v);
                if v[0] > R::zero() {
                    -nrm
                } else {
                    nrm
                }
            };
            v[0] = v[0] - alpha;
            let vnorm2: R = crate::scalar::dot(&v, &v);
            if vnorm2 > R::zero() {
                let two = R::lit(2.0);
                for j in k..n {
                    let s: R = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
                    let f = two * s / vnorm2;
                    for i in k..m {
                        r[(i, j)] = r[(i, j)] - f * v[i - k];
                    }
                }
                // accumulate Q = Q H
                for i in 0..m {
                    let s: R = (k..m).map(|l| q[(i, l)] * v[l - k]).sum();
                    let f = two * s / vnorm2;
                    for l in k..m {
                        q[(i, l)] = q[(i, l)] - f * v[l - k];
                    }
                }
            }
            for i in (k + 1)..m {
                r[(i, k)] = R::zero();
            }
            rank += 1;
        }
        PivotedQr { q, r, perm, rank }
    }

    /// Orthonormal basis of `ker A` (vectors of length `A.cols`).
    pub fn null_space<R: Real>(a: &Mat<R>, rel_tol: R) -> Vec<Vec<R>> {
        let f = pivoted_qr(&a.transpose(), rel_tol);
        (f.rank..a.cols).map(|j| f.q.column(j)).collect()
    }

    /// Orthonormal basis of `Im A` (vectors of length `A.rows`).
    pub fn column_space<R: Real>(a: &Mat<R>, rel_tol: R) -> Vec<Vec<R>> {
        let f = pivoted_qr(a, rel_tol);
        (0..f.rank).map(|j| f.q.column(j)).collect()
    }

    /// Minimum-norm least-squares solution of `A x = b`; also returns `||A x - b||_2`.
    pub fn min_norm_solve<R: Real>(a: &Mat<R>, b: &[R], rel_tol: R) -> (Vec<R>, R) {
        let row_space: Vec<Vec<R>> = {
            let f = pivoted_qr(&a.transpose(), rel_tol);
            (0..f.rank).map(|j| f.q.column(j)).collect()
        };
        let k = row_space.len();
        if k == 0 {
            return (vec![R::zero(); a.cols], crate::scalar::norm2(b));
        }
        let w = Mat::from_columns(a.cols, &row_space);
        let aw = a.mul(&w);
        // aw has full column rank: plain Householder QR + back substitution
        let f = pivoted_qr(&aw, R::zero());
        let qtb = f.q.tr_mul_vec(b);
        let mut y_perm = vec![R::zero(); k];
        for i in (0..f.rank).rev() {
            let mut s = qtb[i];
            for j in (i + 1)..f.rank {
                s = s - f.r[(i, j)] * y_perm[j];
            }
            y_perm[i] = s / f.r[(i, i)];
        }
        let mut y = vec![R::zero(); k];
        for (pos, &orig) in f.perm.iter().enumerate() {
            y[orig] = y_perm[pos];
        }
        let x = w.mul_vec(&y);
        let ax = a.mul_vec(&x);
        let res: Vec<R> = ax.iter().zip(b).map(|(&p, &q)| p - q).collect();
        (x, crate::scalar::norm2(&res))
    }

    /// Solves `A x = b` for symmetric positive definite `A`; `None` if not SPD.
    pub fn cholesky_solve<R: Real>(a: &Mat<R>, b: &[R]) -> Option<Vec<R>> {
        let n = a.rows;
        let mut l = Mat::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > R::zero()) || !d.is_finite() {
                return None;
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        let mut y = vec![R::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)];
        }
        let mut x = vec![R::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s = s - l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        Some(x)
    }

    /// Modified Gram–Schmidt (two passes); drops numerically dependent vectors.
    pub fn orthonormalize<R: Real>(vectors: &[Vec<R>]) -> Vec<Vec<R>> {
        let mut out: Vec<Vec<R>> = Vec::new();
        for v in vectors {
            let scale = crate::scalar::norm2(v);
            if scale == R::zero() {
                continue;
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for u in &out {
                    let c = crate::scalar::dot(u, &w);
                    for (wi, &ui) in w.iter_mut().zip(u) {
                        *wi = *wi - c * ui;
                    }
                }
            }
            let nrm = crate::scalar::norm2(&w);
            if nrm > R::lit(1e-10) * scale {
                out.push(w.into_iter().map(|x| x / nrm).collect());
            }
        }
        out
    }
}
