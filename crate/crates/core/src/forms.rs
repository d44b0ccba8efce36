//! Truncated graded space of noncommutative differential forms
//! `Ω^n A = A ⊗ Ā^{⊗n}`, `0 ≤ n ≤ n_max`, with the differential `d`, the
//! Hochschild boundary `b`, the Karoubi operator `k`, the numbering
//! operator `N` and the rescaled Laplacian `L = bNd + Ndb`.
//!
//! Basis vectors of `Ω^n` are tuples `(i0, i1, …, in)` of internal algebra
//! basis indices, `i0 ∈ 0..dim`, `ij ∈ 1..dim`, enumerated lexicographically.
//! The tuple stands for `e_{i0} de_{i1} … de_{in}`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::algebra::{Algebra, AlgebraElement};
use crate::error::{Error, Result};
use crate::linalg::{vec_add, Mat};
use crate::scalar::Scalar;

/// Default cap on the dimension of the top degree of a window.
pub const DEFAULT_DIM_CAP: usize = 20_000;

/// A (possibly inhomogeneous) form: degree → coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<S> {
    pub components: BTreeMap<usize, Vec<S>>,
}

impl<S: Scalar> Form<S> {
    pub fn zero() -> Self {
        Self { components: BTreeMap::new() }
    }

    pub fn homogeneous(degree: usize, coeffs: Vec<S>) -> Self {
        let mut components = BTreeMap::new();
        components.insert(degree, coeffs);
        Self { components }
    }

    pub fn component(&self, degree: usize) -> Option<&Vec<S>> {
        self.components.get(&degree)
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(|v| v.iter().all(|x| x.is_zero()))
    }

    /// Drops zero components, so that equality compares only nonzero data.
    pub fn normalized(mut self) -> Self {
        self.components.retain(|_, v| v.iter().any(|x| !x.is_zero()));
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (deg, v) in &other.components {
            out.add_component(*deg, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&S::from_i64(-1)))
    }

    pub fn scale(&self, s: &S) -> Self {
        Self { components: self.components.iter().map(|(d, v)| (*d, v.iter().map(|x| x.times(s)).collect())).collect() }
    }

    fn add_component(&mut self, degree: usize, v: &[S]) {
        match self.components.get_mut(&degree) {
            Some(existing) => *existing = vec_add(existing, v),
            None => {
                self.components.insert(degree, v.to_vec());
            }
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.components.values().flat_map(|v| v.iter()).map(|x| x.magnitude()).fold(0.0, f64::max)
    }
}

/// Block-diagonal operator of fixed degree shift; missing blocks are zero.
#[derive(Clone, Debug)]
pub struct GradedOperator<S> {
    pub name: &'static str,
    pub degree_shift: i32,
    pub blocks: BTreeMap<usize, Mat<S>>,
}

impl<S: Scalar> GradedOperator<S> {
    pub fn block(&self, degree: usize) -> Option<&Mat<S>> {
        self.blocks.get(&degree)
    }
}

/// All assembled operators of a window.
#[derive(Clone, Debug)]
pub struct OperatorSet<S> {
    pub d: GradedOperator<S>,
    pub b: GradedOperator<S>,
    pub k: GradedOperator<S>,
    pub numbering: GradedOperator<S>,
    pub one_minus_k: GradedOperator<S>,
    pub laplacian: GradedOperator<S>,
    /// Per degree `n ≤ n_max − 1`: max-entry residual of `(bd + db) − (1 − k)`.
    pub laplacian_identity_residuals: BTreeMap<usize, f64>,
}

impl<S: Scalar> OperatorSet<S> {
    pub fn n_max(&self) -> usize {
        self.k.blocks.len() - 1
    }

    /// Max-entry residuals of the identities on `Ω^n` that fit in the
    /// window: `d² = 0`, `b² = 0`, `kb = bk`, `kd = dk`, `bd + db = 1 − k`,
    /// `k^{n+1}d = d`, `k^n = 1 + bk^n d`, `k^{n+1} = 1 − db` and
    /// `(k^n − 1)(k^{n+1} − 1) = 0`.
    pub fn identity_residuals(&self, n: usize) -> BTreeMap<String, f64> {
        let mut r = BTreeMap::new();
        let n_max = self.n_max();
        let d = |m: usize| self.d.block(m).expect("d below n_max");
        let b = |m: usize| self.b.block(m).expect("b above 0");
        let k = |m: usize| self.k.block(m).expect("k on every degree");
        let kn_blk = k(n);
        let dim = kn_blk.rows();
        let id = Mat::<S>::identity(dim);
        if n + 2 <= n_max {
            r.insert("d_squared".into(), d(n + 1).mul(d(n)).max_abs());
        }
        if n >= 2 {
            r.insert("b_squared".into(), b(n - 1).mul(b(n)).max_abs());
        }
        if n >= 1 {
            r.insert("kb_eq_bk".into(), k(n - 1).mul(b(n)).sub(&b(n).mul(kn_blk)).max_abs());
        }
        let kn = kn_blk.pow(n as u32);
        let kn1 = kn.mul(kn_blk);
        if n < n_max {
            let dn = d(n);
            let k_next = k(n + 1);
            r.insert("kd_eq_dk".into(), k_next.mul(dn).sub(&dn.mul(kn_blk)).max_abs());
            r.insert("bd_plus_db_eq_1_minus_k".into(), self.laplacian_identity_residuals[&n]);
            r.insert("k_pow_n1_d_eq_d".into(), k_next.pow(n as u32 + 1).mul(dn).sub(dn).max_abs());
            let bkd = b(n + 1).mul(&k_next.pow(n as u32)).mul(dn);
            r.insert("k_pow_n_eq_1_plus_bknd".into(), kn.sub(&id.add(&bkd)).max_abs());
            let db = if n == 0 { Mat::zeros(dim, dim) } else { d(n - 1).mul(b(n)) };
            r.insert("k_pow_n1_eq_1_minus_db".into(), kn1.sub(&id.sub(&db)).max_abs());
        }
        r.insert("karoubi_polynomial".into(), kn.sub(&id).mul(&kn1.sub(&id)).max_abs());
        r
    }
}

#[derive(Default)]
struct OperatorCache<S> {
    d: Vec<OnceLock<Mat<S>>>,
    b: Vec<OnceLock<Mat<S>>>,
    k: Vec<OnceLock<Mat<S>>>,
}

pub struct FormsWindow<S> {
    algebra: Arc<Algebra<S>>,
    n_max: usize,
    degree_dims: Vec<usize>,
    cache: OperatorCache<S>,
}

impl<S: Scalar> std::fmt::Debug for FormsWindow<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FormsWindow")
            .field("dim", &self.algebra.dim())
            .field("n_max", &self.n_max)
            .field("degree_dims", &self.degree_dims)
            .finish()
    }
}

/// One term `sign · (a0, a1, …, an)` with full algebra vectors in every
/// slot; slots past the first are reduced when tensored.
struct Term<S> {
    sign: i64,
    slots: Vec<Vec<S>>,
}

impl<S: Scalar> FormsWindow<S> {
    pub fn new(algebra: Arc<Algebra<S>>, n_max: usize) -> Result<Self> {
        Self::with_cap(algebra, n_max, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(algebra: Arc<Algebra<S>>, n_max: usize, cap: usize) -> Result<Self> {
        let dim = algebra.dim();
        let mut degree_dims = Vec::with_capacity(n_max + 1);
        let mut cur = dim;
        for n in 0..=n_max {
            if cur > cap {
                return Err(Error::WindowTooLarge { degree: n, dim: cur, cap });
            }
            degree_dims.push(cur);
            cur = cur.saturating_mul(dim - 1);
        }
        let slots = || (0..=n_max).map(|_| OnceLock::new()).collect();
        Ok(Self { algebra, n_max, degree_dims, cache: OperatorCache { d: slots(), b: slots(), k: slots() } })
    }

    pub fn algebra(&self) -> &Algebra<S> {
        &self.algebra
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn degree_dims(&self) -> &[usize] {
        &self.degree_dims
    }

    pub fn dim(&self, degree: usize) -> usize {
        self.degree_dims[degree]
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.n_max {
            return Err(Error::DegreeOutOfWindow { degree, n_max: self.n_max });
        }
        Ok(())
    }

    /// Basis tuple of index `idx` in degree `n`.
    pub fn basis_tuple(&self, n: usize, idx: usize) -> Vec<usize> {
        let red = self.algebra.dim() - 1;
        let mut t = vec![0; n + 1];
        let mut rest = idx;
        for slot in (1..=n).rev() {
            t[slot] = rest % red + 1;
            rest /= red;
        }
        t[0] = rest;
        t
    }

    /// Index of a basis tuple in its degree.
    pub fn basis_index(&self, tuple: &[usize]) -> usize {
        let red = self.algebra.dim() - 1;
        tuple[1..].iter().fold(tuple[0], |acc, &i| acc * red + (i - 1))
    }

    /// Human-readable name such as `x dx dx` or `dE12`.
    pub fn basis_label(&self, n: usize, idx: usize) -> String {
        let t = self.basis_tuple(n, idx);
        let labels = self.algebra.labels();
        let mut parts = Vec::new();
        if t[0] != 0 || n == 0 {
            parts.push(labels[t[0]].clone());
        }
        parts.extend(t[1..].iter().map(|&i| format!("d{}", labels[i])));
        parts.join(" ")
    }

    pub fn basis_form(&self, tuple: &[usize]) -> Form<S> {
        let n = tuple.len() - 1;
        let mut v = vec![S::zero(); self.dim(n)];
        v[self.basis_index(tuple)] = S::one();
        Form::homogeneous(n, v)
    }

    /// The form `a0 da1 … dan` for arbitrary algebra elements.
    pub fn elementary_form(&self, slots: &[AlgebraElement<S>]) -> Result<Form<S>> {
        let n = slots.len().checked_sub(1).ok_or_else(|| Error::ShapeMismatch("empty tuple".into()))?;
        self.check_degree(n)?;
        for s in slots {
            if s.coeffs.len() != self.algebra.dim() {
                return Err(Error::DimMismatch { expected: self.algebra.dim(), got: s.coeffs.len() });
            }
        }
        let mut out = vec![S::zero(); self.dim(n)];
        let vecs: Vec<Vec<S>> = slots.iter().map(|s| s.coeffs.clone()).collect();
        self.accumulate(&mut out, &S::one(), &vecs);
        Ok(Form::homogeneous(n, out))
    }

    fn unit_vec(&self, i: usize) -> Vec<S> {
        let mut v = vec![S::zero(); self.algebra.dim()];
        v[i] = S::one();
        v
    }

    /// Adds `coeff · a0 ⊗ ā1 ⊗ … ⊗ ān` to `out`.
    fn accumulate(&self, out: &mut [S], coeff: &S, slots: &[Vec<S>]) {
        let red = self.algebra.dim() - 1;
        fn rec<S: Scalar>(out: &mut [S], red: usize, slots: &[Vec<S>], pos: usize, index: usize, acc: S) {
            if pos == slots.len() {
                out[index] = out[index].plus(&acc);
                return;
            }
            let (start, radix) = if pos == 0 { (0, 0) } else { (1, red) };
            for (i, c) in slots[pos].iter().enumerate().skip(start) {
                if c.is_zero() {
                    continue;
                }
                let next = if pos == 0 { i } else { index * radix + (i - 1) };
                rec(out, red, slots, pos + 1, next, acc.times(c));
            }
        }
        if slots.len() > 1 && red == 0 {
            return;
        }
        rec(out, red, slots, 0, 0, coeff.clone());
    }

    fn expand(&self, degree: usize, terms: &[Term<S>]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim(degree)];
        for t in terms {
            debug_assert_eq!(t.slots.len(), degree + 1);
            self.accumulate(&mut out, &S::from_i64(t.sign), &t.slots);
        }
        out
    }

    fn mul_alg(&self, x: &[S], y: &[S]) -> Vec<S> {
        self.algebra.mul_coeffs(x, y)
    }

    /// `b(a0, …, an) = Σ_{j<n} (−1)^j (…, a_j a_{j+1}, …) + (−1)^n (an a0, a1, …, a_{n−1})`.
    fn b_terms(&self, slots: &[Vec<S>]) -> Vec<Term<S>> {
        let n = slots.len() - 1;
        if n == 0 {
            return Vec::new();
        }
        let mut terms = Vec::with_capacity(n + 1);
        for j in 0..n {
            let mut s: Vec<Vec<S>> = Vec::with_capacity(n);
            s.extend_from_slice(&slots[..j]);
            s.push(self.mul_alg(&slots[j], &slots[j + 1]));
            s.extend_from_slice(&slots[j + 2..]);
            terms.push(Term { sign: if j % 2 == 0 { 1 } else { -1 }, slots: s });
        }
        let mut s = Vec::with_capacity(n);
        s.push(self.mul_alg(&slots[n], &slots[0]));
        s.extend_from_slice(&slots[1..n]);
        terms.push(Term { sign: if n.is_multiple_of(2) { 1 } else { -1 }, slots: s });
        terms
    }

    /// `k(a0, …, an) = (−1)^n (an, a0, …, a_{n−1}) + (−1)^{n−1} (1, an a0, a1, …, a_{n−1})`,
    /// and the identity in degree 0.
    fn k_terms(&self, slots: &[Vec<S>]) -> Vec<Term<S>> {
        let n = slots.len() - 1;
        if n == 0 {
            return vec![Term { sign: 1, slots: slots.to_vec() }];
        }
        let sign_n = if n.is_multiple_of(2) { 1 } else { -1 };
        let mut first = Vec::with_capacity(n + 1);
        first.push(slots[n].clone());
        first.extend_from_slice(&slots[..n]);
        let mut second = Vec::with_capacity(n + 1);
        second.push(self.unit_vec(0));
        second.push(self.mul_alg(&slots[n], &slots[0]));
        second.extend_from_slice(&slots[1..n]);
        vec![Term { sign: sign_n, slots: first }, Term { sign: -sign_n, slots: second }]
    }

    /// `(a0, …, ap)·(b0, …, bq) = Σ_{i=0}^{p} (−1)^{p−i} (c0, …, c_i c_{i+1}, …)` where `c`
    /// is the concatenation `(a0, …, ap, b0, …, bq)`.
    fn product_terms(&self, left: &[Vec<S>], right: &[Vec<S>]) -> Vec<Term<S>> {
        let p = left.len() - 1;
        let concat: Vec<&Vec<S>> = left.iter().chain(right.iter()).collect();
        (0..=p)
            .map(|i| {
                let mut s: Vec<Vec<S>> = Vec::with_capacity(concat.len() - 1);
                s.extend(concat[..i].iter().map(|v| (*v).clone()));
                s.push(self.mul_alg(concat[i], concat[i + 1]));
                s.extend(concat[i + 2..].iter().map(|v| (*v).clone()));
                Term { sign: if (p - i).is_multiple_of(2) { 1 } else { -1 }, slots: s }
            })
            .collect()
    }

    fn tuple_slots(&self, tuple: &[usize]) -> Vec<Vec<S>> {
        tuple.iter().map(|&i| self.unit_vec(i)).collect()
    }

    fn assemble(&self, from: usize, to: usize, f: impl Fn(&[Vec<S>]) -> Vec<Term<S>>) -> Mat<S> {
        let cols: Vec<Vec<S>> = (0..self.dim(from))
            .map(|j| {
                let slots = self.tuple_slots(&self.basis_tuple(from, j));
                self.expand(to, &f(&slots))
            })
            .collect();
        Mat::from_columns(self.dim(to), &cols)
    }

    /// Matrix of `d: Ω^n → Ω^{n+1}`, `n < n_max`.
    pub fn d_matrix(&self, n: usize) -> Result<&Mat<S>> {
        if n >= self.n_max {
            return Err(Error::DegreeOutOfWindow { degree: n + 1, n_max: self.n_max });
        }
        Ok(self.cache.d[n].get_or_init(|| {
            let mut m = Mat::zeros(self.dim(n + 1), self.dim(n));
            for j in 0..self.dim(n) {
                let t = self.basis_tuple(n, j);
                if t[0] == 0 {
                    continue; // d(1, …) has a reduced unit in slot 1
                }
                let mut image = Vec::with_capacity(n + 2);
                image.push(0);
                image.extend_from_slice(&t);
                m[(self.basis_index(&image), j)] = S::one();
            }
            m
        }))
    }

    /// Matrix of `b: Ω^n → Ω^{n−1}`; `Ω^0 → 0` is the `0 × dim A` matrix.
    pub fn b_matrix(&self, n: usize) -> Result<&Mat<S>> {
        self.check_degree(n)?;
        Ok(self.cache.b[n].get_or_init(|| if n == 0 { Mat::zeros(0, self.dim(0)) } else { self.assemble(n, n - 1, |s| self.b_terms(s)) }))
    }

    /// Matrix of `k: Ω^n → Ω^n`.
    pub fn k_matrix(&self, n: usize) -> Result<&Mat<S>> {
        self.check_degree(n)?;
        Ok(self.cache.k[n].get_or_init(|| self.assemble(n, n, |s| self.k_terms(s))))
    }

    fn apply_blocks(&self, form: &Form<S>, shift: i32, block: impl Fn(usize) -> Result<Option<Mat<S>>>) -> Result<Form<S>> {
        let mut out = Form::zero();
        for (&deg, v) in &form.components {
            self.check_degree(deg)?;
            if v.len() != self.dim(deg) {
                return Err(Error::DimMismatch { expected: self.dim(deg), got: v.len() });
            }
            if let Some(m) = block(deg)? {
                let target = (deg as i64 + shift as i64) as usize;
                out.add_component(target, &m.mul_vec(v));
            }
        }
        Ok(out)
    }

    pub fn apply_d(&self, form: &Form<S>) -> Result<Form<S>> {
        self.apply_blocks(form, 1, |deg| Ok(Some(self.d_matrix(deg)?.clone())))
    }

    pub fn apply_b(&self, form: &Form<S>) -> Result<Form<S>> {
        self.apply_blocks(form, -1, |deg| if deg == 0 { Ok(None) } else { Ok(Some(self.b_matrix(deg)?.clone())) })
    }

    pub fn apply_k(&self, form: &Form<S>) -> Result<Form<S>> {
        self.apply_blocks(form, 0, |deg| Ok(Some(self.k_matrix(deg)?.clone())))
    }

    /// Product in `ΩA`, extending the algebra product and satisfying the
    /// Leibniz rule.
    pub fn multiply_forms(&self, u: &Form<S>, v: &Form<S>) -> Result<Form<S>> {
        let mut out = Form::zero();
        for (&p, x) in &u.components {
            for (&q, y) in &v.components {
                if x.iter().all(|c| c.is_zero()) || y.iter().all(|c| c.is_zero()) {
                    continue;
                }
                self.check_degree(p + q)?;
                let mut acc = vec![S::zero(); self.dim(p + q)];
                for (i, xi) in x.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                    let left = self.tuple_slots(&self.basis_tuple(p, i));
                    for (j, yj) in y.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                        let right = self.tuple_slots(&self.basis_tuple(q, j));
                        let w = xi.times(yj);
                        for t in self.product_terms(&left, &right) {
                            self.accumulate(&mut acc, &w.scaled_by_i64(t.sign), &t.slots);
                        }
                    }
                }
                out.add_component(p + q, &acc);
            }
        }
        Ok(out)
    }

    /// Assembles `d, b, k, N, 1 − k, L` on every degree where they fit in
    /// the window. `1 − k` is computed both as `I − k` and as `bd + db`; the
    /// discrepancy per degree is returned in `laplacian_identity_residuals`.
    pub fn operator_matrices(&self) -> Result<OperatorSet<S>> {
        let n_max = self.n_max;
        // warm the caches concurrently; every block is a pure function of the basis
        (0..=n_max).into_par_iter().try_for_each(|n| -> Result<()> {
            self.k_matrix(n)?;
            self.b_matrix(n)?;
            if n < n_max {
                self.d_matrix(n)?;
            }
            Ok(())
        })?;

        let mut d = GradedOperator { name: "d", degree_shift: 1, blocks: BTreeMap::new() };
        let mut b = GradedOperator { name: "b", degree_shift: -1, blocks: BTreeMap::new() };
        let mut k = GradedOperator { name: "k", degree_shift: 0, blocks: BTreeMap::new() };
        let mut numbering = GradedOperator { name: "N", degree_shift: 0, blocks: BTreeMap::new() };
        let mut one_minus_k = GradedOperator { name: "1-k", degree_shift: 0, blocks: BTreeMap::new() };
        let mut laplacian = GradedOperator { name: "L", degree_shift: 0, blocks: BTreeMap::new() };
        let mut laplacian_identity_residuals = BTreeMap::new();

        for n in 0..=n_max {
            let dim = self.dim(n);
            let kn = self.k_matrix(n)?.clone();
            let bn = self.b_matrix(n)?.clone();
            let direct = Mat::identity(dim).sub(&kn);
            if n < n_max {
                let dn = self.d_matrix(n)?.clone();
                let bd = self.b_matrix(n + 1)?.mul(&dn);
                let db = if n == 0 { Mat::zeros(dim, dim) } else { self.d_matrix(n - 1)?.mul(&bn) };
                let via_bd = bd.add(&db);
                laplacian_identity_residuals.insert(n, via_bd.sub(&direct).max_abs());
                let lap = bd.scale(&S::from_i64(n as i64 + 1)).add(&db.scale(&S::from_i64(n as i64)));
                laplacian.blocks.insert(n, lap);
                d.blocks.insert(n, dn);
            }
            if n > 0 {
                b.blocks.insert(n, bn);
            }
            numbering.blocks.insert(n, Mat::scalar(dim, &S::from_i64(n as i64)));
            one_minus_k.blocks.insert(n, direct);
            k.blocks.insert(n, kn);
        }
        Ok(OperatorSet { d, b, k, numbering, one_minus_k, laplacian, laplacian_identity_residuals })
    }
}
