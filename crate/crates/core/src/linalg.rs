//! Dense matrices over any [`Scalar`], with Gaussian elimination for ranks,
//! kernels, inverses and linear solves.
//!
//! In exact modes elimination tests pivots for exact zero. In float mode a
//! pivot counts as zero below `1e-10 · max|entry|`.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: fmt::Debug> fmt::Debug for Mat<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn scalar(n: usize, s: &S) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<S>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (r, x) in col.iter().enumerate() {
                m[(r, c)] = x.clone();
            }
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[S]) {
        assert_eq!(v.len(), self.rows);
        for (r, x) in v.iter().enumerate() {
            self[(r, c)] = x.clone();
        }
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let t = a.times(b);
                    let slot = &mut out[(i, j)];
                    *slot = slot.plus(&t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (a, x) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.plus(&a.times(x));
                    }
                }
                acc
            })
            .collect()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.plus(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.minus(b))
    }

    pub fn scale(&self, s: &S) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.times(s)).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.negated()).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn pow(&self, e: u32) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
    }

    /// Evaluates `Σ coeffs[i] · self^i` by Horner's rule.
    pub fn eval_poly(&self, coeffs: &[S]) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        let mut acc = Self::zeros(n, n);
        for c in coeffs.iter().rev() {
            acc = acc.mul(self).add(&Self::scalar(n, c));
        }
        acc
    }

    pub fn block_diag(blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    m[(r0 + r, c0 + c)] = b[(r, c)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].to_c64())
    }

    /// Dense row-major JSON with scalars in the mode's wire format.
    pub fn to_json(&self) -> Value {
        Value::Array((0..self.rows).map(|r| Value::Array(self.row(r).iter().map(|x| x.to_json()).collect())).collect())
    }

    fn pivot_tol(&self) -> f64 {
        if S::is_exact() {
            0.0
        } else {
            1e-10 * self.max_abs().max(1.0)
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let tol = self.pivot_tol();
        let negligible = |x: &S| x.is_zero() || x.magnitude() <= tol;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let best = (row..m.rows)
                .filter(|&r| !negligible(&m[(r, col)]))
                .max_by(|&a, &b| m[(a, col)].magnitude().total_cmp(&m[(b, col)].magnitude()));
            let Some(p) = best else {
                for r in row..m.rows {
                    m[(r, col)] = S::zero();
                }
                continue;
            };
            if p != row {
                for c in 0..m.cols {
                    m.data.swap(p * m.cols + c, row * m.cols + c);
                }
            }
            let inv = m[(row, col)].recip().expect("pivot is nonzero");
            for c in col..m.cols {
                m[(row, c)] = m[(row, c)].times(&inv);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let f = m[(r, col)].clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let t = f.times(&m[(row, c)]);
                    m[(r, c)] = m[(r, c)].minus(&t);
                }
                m[(r, col)] = S::zero();
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![S::zero(); self.cols];
                v[free] = S::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = r[(i, free)].negated();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self[(r, c)].clone()
            } else if c - n == r {
                S::one()
            } else {
                S::zero()
            }
        });
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(Self::from_fn(n, n, |r, c| red[(r, n + c)].clone()))
    }

    /// Some solution of `self · x = b`, or `None` if inconsistent.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        assert_eq!(b.len(), self.rows);
        let aug = Self::from_fn(self.rows, self.cols + 1, |r, c| if c < self.cols { self[(r, c)].clone() } else { b[r].clone() });
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = red[(i, self.cols)].clone();
        }
        Some(x)
    }
}

/// Modulus of the largest entry of a vector.
pub fn vec_max_abs<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
}

pub fn vec_add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.plus(y)).collect()
}

pub fn vec_sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.minus(y)).collect()
}

pub fn vec_scale<S: Scalar>(a: &[S], s: &S) -> Vec<S> {
    a.iter().map(|x| x.times(s)).collect()
}

/// Floating-point helpers on `nalgebra` matrices.
pub mod dense {
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;

    pub type CMat = DMatrix<Complex64>;

    pub fn max_abs(m: &CMat) -> f64 {
        m.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn singular_values(m: &CMat) -> Vec<f64> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Vec::new();
        }
        let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Numerical rank with threshold `rel_tol · σ_max` (and an absolute
    /// floor of `rel_tol` for matrices whose entries are O(1)).
    pub fn rank(m: &CMat, rel_tol: f64) -> usize {
        let s = singular_values(m);
        let Some(&top) = s.first() else { return 0 };
        let cut = rel_tol * top.max(1.0);
        s.iter().filter(|&&x| x > cut).count()
    }

    /// Right singular vectors (full `c×c` V) and singular values of `m`.
    fn right_svd(m: &CMat) -> (Vec<f64>, CMat) {
        let (r, c) = (m.nrows(), m.ncols());
        // thin SVD yields a full V only when r >= c; pad with zero rows otherwise
        let padded;
        let src = if r >= c {
            m
        } else {
            let mut sq = CMat::zeros(c, c);
            sq.view_mut((0, 0), (r, c)).copy_from(m);
            padded = sq;
            &padded
        };
        let svd = src.clone().svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        (svd.singular_values.iter().copied().collect(), vt.adjoint())
    }

    /// Orthonormal basis (columns) of the null space of `m`, of dimension
    /// `dim` if given, otherwise determined by `rel_tol`.
    pub fn null_space(m: &CMat, dim: Option<usize>, rel_tol: f64) -> CMat {
        let (r, c) = (m.nrows(), m.ncols());
        if c == 0 {
            return CMat::zeros(0, 0);
        }
        if r == 0 {
            return CMat::identity(c, c);
        }
        let (s, v) = right_svd(m);
        let top = s.iter().copied().fold(0.0, f64::max);
        let k = dim.unwrap_or_else(|| {
            let cut = rel_tol * top.max(1.0);
            c - s.iter().filter(|&&x| x > cut).count().min(c)
        });
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
        let mut out = CMat::zeros(c, k);
        for (j, &idx) in order.iter().take(k).enumerate() {
            out.column_mut(j).copy_from(&v.column(idx));
        }
        out
    }

    /// Orthonormal basis of the column space of `m`.
    pub fn range(m: &CMat, rel_tol: f64) -> CMat {
        let (r, c) = (m.nrows(), m.ncols());
        if r == 0 || c == 0 {
            return CMat::zeros(r, 0);
        }
        let svd = m.clone().svd(true, false);
        let u = svd.u.expect("requested U");
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let cut = rel_tol * top.max(1.0);
        let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > cut).collect();
        let mut out = CMat::zeros(r, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            out.column_mut(j).copy_from(&u.column(i));
        }
        out
    }

    /// Modified Gram–Schmidt on the columns, dropping dependent ones.
    pub fn orthonormalize(m: &CMat) -> CMat {
        let mut cols: Vec<DVector<Complex64>> = Vec::new();
        for j in 0..m.ncols() {
            let mut v = m.column(j).into_owned();
            for _ in 0..2 {
                for q in &cols {
                    let proj = q.dotc(&v);
                    v -= q * proj;
                }
            }
            let n = v.norm();
            if n > 1e-12 {
                cols.push(v / Complex64::new(n, 0.0));
            }
        }
        if cols.is_empty() {
            return CMat::zeros(m.nrows(), 0);
        }
        CMat::from_columns(&cols)
    }

    /// Eigenvalues of a general complex matrix (complex Schur form).
    pub fn eigenvalues(m: &CMat) -> Vec<Complex64> {
        if m.nrows() == 0 {
            return Vec::new();
        }
        let n = m.nrows();
        let max_iter = 100 * n.max(10);
        if let Some(s) = nalgebra::linalg::Schur::try_new(m.clone(), 1e-14, max_iter) {
            return diagonal(&s.unpack().1);
        }
        // QR shifts can stall on permutation-like matrices; a fixed random
        // unitary similarity breaks the symmetry without moving the spectrum
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..8 {
            let g = CMat::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let q = g.qr().q();
            let conj = q.adjoint() * m * &q;
            if let Some(s) = nalgebra::linalg::Schur::try_new(conj, 1e-14, max_iter) {
                return diagonal(&s.unpack().1);
            }
        }
        panic!("complex Schur decomposition failed to converge");
    }

    fn diagonal(t: &CMat) -> Vec<Complex64> {
        (0..t.nrows()).map(|i| t[(i, i)]).collect()
    }

    /// Eigen-decomposition of a Hermitian matrix: ascending real
    /// eigenvalues and the matching orthonormal eigenvectors.
    pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
        let n = m.nrows();
        if n == 0 {
            return (Vec::new(), CMat::zeros(0, 0));
        }
        let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::linalg::SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vecs = CMat::zeros(n, n);
        for (j, &i) in order.iter().enumerate() {
            vecs.column_mut(j).copy_from(&eig.eigenvectors.column(i));
        }
        (vals, vecs)
    }

    pub fn real(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn q(rows: &[&[i64]]) -> Mat<BigRational> {
        Mat::from_fn(rows.len(), rows[0].len(), |r, c| BigRational::from_i64(rows[r][c]))
    }

    #[test]
    fn rank_and_kernel_exact() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let ker = m.kernel();
        assert_eq!(ker.len(), 1);
        assert!(m.mul_vec(&ker[0]).iter().all(Scalar::is_zero));
    }

    #[test]
    fn inverse_exact() {
        let m = q(&[&[2, 1], &[7, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(2));
        assert!(q(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = q(&[&[1, 1], &[1, 1]]);
        assert!(m.solve(&[ratio(1, 1), ratio(2, 1)]).is_none());
        let x = m.solve(&[ratio(3, 1), ratio(3, 1)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![ratio(3, 1), ratio(3, 1)]);
    }

    #[test]
    fn poly_eval_matches_powers() {
        let m = q(&[&[0, 1], &[1, 1]]);
        // 2 - 3x + x^3
        let c = [ratio(2, 1), ratio(-3, 1), ratio(0, 1), ratio(1, 1)];
        let direct = Mat::scalar(2, &ratio(2, 1)).sub(&m.scale(&ratio(3, 1))).add(&m.pow(3));
        assert_eq!(m.eval_poly(&c), direct);
    }

    #[test]
    fn dense_null_space_and_range() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6]]).to_dmatrix();
        let ns = dense::null_space(&m, None, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!(dense::max_abs(&(&m * &ns)) < 1e-12);
        assert_eq!(dense::range(&m, 1e-12).ncols(), 1);
        let tall = q(&[&[1, 0], &[0, 0], &[0, 0]]).to_dmatrix();
        let ns = dense::null_space(&tall, None, 1e-12);
        assert_eq!(ns.ncols(), 1);
        assert!(dense::max_abs(&(&tall * &ns)) < 1e-12);
    }

    #[test]
    fn dense_eigenvalues_of_rotation() {
        let m = q(&[&[0, -1], &[1, 0]]).to_dmatrix();
        let mut ev = dense::eigenvalues(&m);
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }
}
