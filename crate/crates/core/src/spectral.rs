//! Harmonic decomposition for the Karoubi operator: the spectral projection
//! `P` onto `Ker(1−k)²`, its complement `P⊥`, the Green's operator `G`, the
//! exact/coexact splitting of `P⊥ΩA`, and the rescaled Laplacian check.
//!
//! In exact modes `P` is a polynomial in `k`: writing
//! `(x^n − 1)(x^{n+1} − 1) = (x − 1)²·q(x)`, Bézout gives `r ≡ 1 mod (x−1)²`,
//! `r ≡ 0 mod q`, and `P = r(k)`. Float mode uses an eigenprojection built
//! from singular-vector bases of `Ker(k − 1)²` and its left counterpart.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Form, FormsWindow, OperatorSet};
use crate::linalg::dense::{self, CMat};
use crate::linalg::Mat;
use crate::poly::Poly;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    /// Eigenvalues within this distance of 1 are counted as the eigenvalue 1.
    pub cluster_tol: f64,
    /// Eigenvalues must lie within this distance of an admissible root of unity.
    pub root_tol: f64,
    /// Residual threshold for identities checked in float mode.
    pub float_residual_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { cluster_tol: 1e-8, root_tol: 1e-6, float_residual_tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueEntry {
    pub re: f64,
    pub im: f64,
    /// Order of the root of unity.
    pub order: usize,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct SpectralData<S> {
    pub degree: usize,
    pub p: Mat<S>,
    pub p_perp: Mat<S>,
    pub g: Option<Mat<S>>,
    pub eigenvalue_report: Vec<EigenvalueEntry>,
}

/// Polynomial `r` with `r ≡ 1 mod (x−1)²` and `r ≡ 0 mod q`, where
/// `(x^n − 1)(x^{n+1} − 1) = (x−1)² q`. Requires `n ≥ 1`.
pub fn projector_polynomial(n: usize) -> Poly {
    assert!(n >= 1, "degree 0 has k = 1 and P = 1");
    let m = Poly::x_pow_minus_one(n).mul(&Poly::x_pow_minus_one(n + 1));
    let sq = Poly::from_i64(&[1, -2, 1]);
    let (q, rem) = m.div_rem(&sq);
    debug_assert!(rem.is_zero());
    let (g, _s, t) = sq.ext_gcd(&q);
    debug_assert_eq!(g, Poly::one());
    // t·q ≡ 1 mod (x−1)² and ≡ 0 mod q
    t.mul(&q).div_rem(&m).1
}

fn poly_to_scalars<S: Scalar>(p: &Poly) -> Vec<S> {
    p.coeffs().iter().map(|c: &BigRational| S::from_rational(c)).collect()
}

/// `P = r(k)` for the Karoubi block in degree `n`.
pub fn crt_projection<S: Scalar>(k: &Mat<S>, n: usize) -> Mat<S> {
    if n == 0 {
        return Mat::identity(k.rows());
    }
    k.eval_poly(&poly_to_scalars(&projector_polynomial(n)))
}

/// `(k^n − 1)(k^{n+1} − 1)`.
pub fn karoubi_polynomial<S: Scalar>(k: &Mat<S>, n: usize) -> Mat<S> {
    let id = Mat::identity(k.rows());
    let kn = k.pow(n as u32);
    let kn1 = kn.mul(k);
    kn.sub(&id).mul(&kn1.sub(&id))
}

fn admissible_roots(n: usize) -> Vec<(usize, Complex64)> {
    // primitive roots of unity of every order dividing n or n+1
    let mut out: Vec<(usize, Complex64)> = Vec::new();
    for order in 1..=(n + 1) {
        if !(n.is_multiple_of(order) || (n + 1).is_multiple_of(order)) {
            continue;
        }
        for j in 0..order {
            if num_integer::gcd(j, order) != 1 && !(order == 1 && j == 0) {
                continue;
            }
            let t = 2.0 * PI * j as f64 / order as f64;
            out.push((order, Complex64::new(t.cos(), t.sin())));
        }
    }
    out
}

fn classify_eigenvalues(n: usize, eig: &[Complex64], root_tol: f64) -> Result<Vec<EigenvalueEntry>> {
    let roots = admissible_roots(n);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &z in eig {
        let (best, dist) = roots
            .iter()
            .enumerate()
            .map(|(i, (_, r))| (i, (z - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least the root 1");
        if dist > root_tol {
            return Err(Error::NonUnitRootEigenvalue { degree: n, eigenvalue: format!("{z}") });
        }
        *counts.entry(best).or_default() += 1;
    }
    let mut entries: Vec<EigenvalueEntry> = counts
        .into_iter()
        .map(|(i, m)| {
            let (order, r) = roots[i];
            EigenvalueEntry { re: clean(r.re), im: clean(r.im), order, multiplicity: m }
        })
        .collect();
    entries.sort_by(|a, b| {
        let ta = a.im.atan2(a.re).rem_euclid(2.0 * PI);
        let tb = b.im.atan2(b.re).rem_euclid(2.0 * PI);
        ta.total_cmp(&tb)
    });
    Ok(entries)
}

fn clean(x: f64) -> f64 {
    // snap roundoff in cos/sin of rational angles so reports are stable
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Eigenvalues of the `k` block, each identified with the admissible root
/// of unity it approximates.
pub fn spectrum_report<S: Scalar>(window: &FormsWindow<S>, degree: usize, cfg: &SpectralConfig) -> Result<Vec<EigenvalueEntry>> {
    let k = window.k_matrix(degree)?;
    if degree == 0 {
        return Ok(vec![EigenvalueEntry { re: 1.0, im: 0.0, order: 1, multiplicity: k.rows() }]);
    }
    let eig = dense::eigenvalues(&k.to_dmatrix());
    classify_eigenvalues(degree, &eig, cfg.root_tol)
}

/// Spectral projection onto the generalized 1-eigenspace computed from
/// floating-point eigen/singular-value data only.
pub fn eigen_projection(k: &CMat, degree: usize, cfg: &SpectralConfig) -> Result<CMat> {
    let n = k.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let eig = dense::eigenvalues(k);
    // half the gap between 1 and its nearest admissible neighbour
    let gap = if degree == 0 {
        1.0
    } else {
        (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, 2.0 * PI / (degree as f64 + 1.0))).norm() / 2.0
    };
    let mut mult = 0;
    for &z in &eig {
        let dist = (z - Complex64::new(1.0, 0.0)).norm();
        if dist < cfg.cluster_tol {
            mult += 1;
        } else if dist < gap {
            return Err(Error::NumericalRankAmbiguous { eigenvalue: format!("{z}"), distance: dist });
        }
    }
    if mult == 0 {
        return Ok(CMat::zeros(n, n));
    }
    if mult == n {
        return Ok(CMat::identity(n, n));
    }
    let shifted = k - CMat::identity(n, n);
    let sq = &shifted * &shifted;
    let right = dense::null_space(&sq, Some(mult), 0.0);
    let left = dense::null_space(&sq.adjoint(), Some(mult), 0.0);
    let pairing = left.adjoint() * &right;
    let inv = pairing.try_inverse().ok_or(Error::NumericalRankAmbiguous { eigenvalue: "1".into(), distance: 0.0 })?;
    Ok(right * inv * left.adjoint())
}

fn from_dense<S: Scalar>(m: &DMatrix<Complex64>) -> Mat<S> {
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| S::from_c64(m[(r, c)]))
}

/// `P` and `P⊥` for degree `degree`; exact CRT route in exact modes,
/// eigenprojection in float mode.
pub fn harmonic_projection<S: Scalar>(window: &FormsWindow<S>, degree: usize, cfg: &SpectralConfig) -> Result<SpectralData<S>> {
    let k = window.k_matrix(degree)?;
    let relation = karoubi_polynomial(k, degree);
    let residual = relation.max_abs();
    let ok = if S::is_exact() { relation.is_zero() } else { residual < cfg.float_residual_tol };
    if !ok {
        return Err(Error::PolynomialRelationViolated { degree, residual });
    }
    let p = if S::is_exact() { crt_projection(k, degree) } else { from_dense(&eigen_projection(&k.to_dmatrix(), degree, cfg)?) };
    let p_perp = Mat::identity(k.rows()).sub(&p);
    let eigenvalue_report = spectrum_report(window, degree, cfg)?;
    Ok(SpectralData { degree, p, p_perp, g: None, eigenvalue_report })
}

/// Green's operator: inverse of `1 − k` on `Im P⊥`, zero on `Im P`.
pub fn greens_from_projection<S: Scalar>(k: &Mat<S>, data: &SpectralData<S>) -> Result<Mat<S>> {
    let n = k.rows();
    // M = (1 − k) + P is invertible and commutes with P; G = M⁻¹ P⊥
    let m = Mat::identity(n).sub(k).add(&data.p);
    let inv = m.inverse().ok_or(Error::SingularOnComplement { degree: data.degree })?;
    Ok(inv.mul(&data.p_perp))
}

pub fn greens_operator<S: Scalar>(window: &FormsWindow<S>, degree: usize, cfg: &SpectralConfig) -> Result<SpectralData<S>> {
    let mut data = harmonic_projection(window, degree, cfg)?;
    data.g = Some(greens_from_projection(window.k_matrix(degree)?, &data)?);
    Ok(data)
}

/// Harmonic, exact and coexact parts of a form.
#[derive(Clone, Debug)]
pub struct HodgeSplit<S> {
    pub harmonic: Form<S>,
    pub d_part: Form<S>,
    pub b_part: Form<S>,
    /// `d_part` lies in `Im d`.
    pub d_part_exact: bool,
    /// `b_part` lies in `Im b`.
    pub b_part_coexact: bool,
}

fn in_column_space<S: Scalar>(a: &Mat<S>, v: &[S]) -> bool {
    if v.iter().all(|x| x.is_zero() || (!S::is_exact() && x.magnitude() < 1e-12)) {
        return true;
    }
    if a.cols() == 0 {
        return false;
    }
    match a.solve(v) {
        None => false,
        Some(x) => {
            if S::is_exact() {
                true
            } else {
                let r = a.mul_vec(&x);
                r.iter().zip(v).all(|(p, q)| p.minus(q).magnitude() < 1e-9)
            }
        }
    }
}

/// Splits each homogeneous component `ω` of degree `n ≤ n_max − 1` as
/// `Pω + (G d b) P⊥ω + (G b d) P⊥ω`.
pub fn hodge_split<S: Scalar>(window: &FormsWindow<S>, form: &Form<S>, cfg: &SpectralConfig) -> Result<HodgeSplit<S>> {
    let mut harmonic = Form::zero();
    let mut d_part = Form::zero();
    let mut b_part = Form::zero();
    let mut d_part_exact = true;
    let mut b_part_coexact = true;
    for (&n, v) in &form.components {
        if n + 1 > window.n_max() {
            return Err(Error::DegreeOutOfWindow { degree: n + 1, n_max: window.n_max() });
        }
        if v.len() != window.dim(n) {
            return Err(Error::DimMismatch { expected: window.dim(n), got: v.len() });
        }
        let data = greens_operator(window, n, cfg)?;
        let g = data.g.as_ref().expect("filled");
        let h = data.p.mul_vec(v);
        let w = data.p_perp.mul_vec(v);
        let dn = window.d_matrix(n)?;
        let bn1 = window.b_matrix(n + 1)?;
        let bd = g.mul_vec(&bn1.mul_vec(&dn.mul_vec(&w)));
        let db = if n == 0 {
            vec![S::zero(); window.dim(0)]
        } else {
            let dprev = window.d_matrix(n - 1)?;
            g.mul_vec(&dprev.mul_vec(&window.b_matrix(n)?.mul_vec(&w)))
        };
        if n > 0 {
            d_part_exact &= in_column_space(window.d_matrix(n - 1)?, &db);
        } else {
            d_part_exact &= db.iter().all(|x| x.is_zero());
        }
        b_part_coexact &= in_column_space(bn1, &bd);
        harmonic = harmonic.add(&Form::homogeneous(n, h));
        d_part = d_part.add(&Form::homogeneous(n, db));
        b_part = b_part.add(&Form::homogeneous(n, bd));
    }
    Ok(HodgeSplit { harmonic, d_part, b_part, d_part_exact, b_part_coexact })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplacianCheck {
    /// Max-entry norm of `L·P`.
    pub norm_on_p: f64,
    /// Smallest singular value of `L` restricted to `Im P⊥`; `None` when
    /// `P⊥ = 0`.
    pub min_singular_on_p_perp: Option<f64>,
}

/// Checks that `L = bNd + Ndb` vanishes on `Im P` and is injective on `Im P⊥`.
pub fn rescaled_laplacian_check<S: Scalar>(window: &FormsWindow<S>, degree: usize, cfg: &SpectralConfig) -> Result<LaplacianCheck> {
    if degree + 1 > window.n_max() {
        return Err(Error::DegreeOutOfWindow { degree: degree + 1, n_max: window.n_max() });
    }
    let data = harmonic_projection(window, degree, cfg)?;
    let lap = rescaled_laplacian(window, degree)?;
    let norm_on_p = lap.mul(&data.p).max_abs();
    let basis = dense::range(&data.p_perp.to_dmatrix(), 1e-10);
    let min_singular_on_p_perp = if basis.ncols() == 0 {
        None
    } else {
        let sv = dense::singular_values(&(lap.to_dmatrix() * basis));
        sv.last().copied()
    };
    Ok(LaplacianCheck { norm_on_p, min_singular_on_p_perp })
}

/// `L_n = (n+1)·b d + n·d b` on `Ω^n`, `n ≤ n_max − 1`.
pub fn rescaled_laplacian<S: Scalar>(window: &FormsWindow<S>, n: usize) -> Result<Mat<S>> {
    let bd = window.b_matrix(n + 1)?.mul(window.d_matrix(n)?);
    let dim = window.dim(n);
    let db = if n == 0 { Mat::zeros(dim, dim) } else { window.d_matrix(n - 1)?.mul(window.b_matrix(n)?) };
    Ok(bd.scale(&S::from_i64(n as i64 + 1)).add(&db.scale(&S::from_i64(n as i64))))
}

/// Spectral data with `G` for every degree of a window, plus the assembled
/// operators; the basis for all invariant checks.
pub struct SpectralAnalysis<'w, S> {
    pub window: &'w FormsWindow<S>,
    pub ops: OperatorSet<S>,
    pub degrees: Vec<SpectralData<S>>,
    pub cfg: SpectralConfig,
}

/// Named residuals for one degree. Exact modes expect every value to be 0.
pub type Residuals = BTreeMap<String, f64>;

impl<'w, S: Scalar> SpectralAnalysis<'w, S> {
    pub fn new(window: &'w FormsWindow<S>, cfg: SpectralConfig) -> Result<Self> {
        let ops = window.operator_matrices()?;
        let degrees = (0..=window.n_max()).into_par_iter().map(|n| greens_operator(window, n, &cfg)).collect::<Result<Vec<_>>>()?;
        Ok(Self { window, ops, degrees, cfg })
    }

    pub fn n_max(&self) -> usize {
        self.window.n_max()
    }

    fn k(&self, n: usize) -> &Mat<S> {
        self.ops.k.block(n).expect("k on every degree")
    }

    fn d(&self, n: usize) -> &Mat<S> {
        self.ops.d.block(n).expect("d below n_max")
    }

    fn b(&self, n: usize) -> &Mat<S> {
        self.ops.b.block(n).expect("b above 0")
    }

    fn g(&self, n: usize) -> &Mat<S> {
        self.degrees[n].g.as_ref().expect("G computed")
    }

    fn p(&self, n: usize) -> &Mat<S> {
        &self.degrees[n].p
    }

    /// Every identity checked on degree `n`, as max-entry residuals.
    /// Rank identities contribute the absolute rank discrepancy.
    pub fn residuals(&self, n: usize) -> Residuals {
        let mut r = Residuals::new();
        let n_max = self.n_max();
        let dim = self.window.dim(n);
        let id = Mat::<S>::identity(dim);
        let k = self.k(n);
        let one_minus_k = id.sub(k);
        let p = self.p(n);
        let p_perp = &self.degrees[n].p_perp;
        let g = self.g(n);
        r.extend(self.ops.identity_residuals(n));
        let mut put = |name: &str, v: f64| {
            r.insert(name.to_string(), v);
        };

        // harmonic projection
        put("p_idempotent", p.mul(p).sub(p).max_abs());
        put("p_p_perp_zero", p.mul(p_perp).max_abs());
        put("one_minus_k_sq_p", one_minus_k.mul(&one_minus_k).mul(p).max_abs());
        put("p_commutes_k", p.mul(k).sub(&k.mul(p)).max_abs());
        let rank_p = p.rank();
        let sq = one_minus_k.mul(&one_minus_k);
        let rank_sq = sq.rank();
        put("rank_p_plus_rank_sq_minus_dim", (rank_p + rank_sq).abs_diff(dim) as f64);
        put("rank_p_minus_dim_ker_sq", rank_p.abs_diff(sq.kernel().len()) as f64);
        if n < n_max {
            let dn = self.d(n);
            put("p_commutes_d", self.p(n + 1).mul(dn).sub(&dn.mul(p)).max_abs());
            let bn1 = self.b(n + 1);
            put("p_commutes_b", p.mul(bn1).sub(&bn1.mul(self.p(n + 1))).max_abs());
        }

        // Green's operator
        put("g_p_zero", g.mul(p).max_abs());
        put("g_one_minus_k", g.mul(&one_minus_k).sub(p_perp).max_abs());
        put("one_minus_k_g", one_minus_k.mul(g).sub(p_perp).max_abs());
        put("resolvent", one_minus_k.mul(g).add(p).sub(&id).max_abs());
        if n < n_max {
            let dn = self.d(n);
            put("g_commutes_d", self.g(n + 1).mul(dn).sub(&dn.mul(g)).max_abs());
            let bn1 = self.b(n + 1);
            put("g_commutes_b", g.mul(bn1).sub(&bn1.mul(self.g(n + 1))).max_abs());

            // exact/coexact splitting on Im P⊥
            let gbd = g.mul(bn1).mul(dn);
            let gdb = if n == 0 { Mat::zeros(dim, dim) } else { g.mul(self.d(n - 1)).mul(self.b(n)) };
            let bd_db = if n == 0 { bn1.mul(dn) } else { bn1.mul(dn).add(&self.d(n - 1).mul(self.b(n))) };
            put("g_bd_plus_db_eq_p_perp", g.mul(&bd_db).sub(p_perp).max_abs());
            put("gdb_plus_gbd_eq_p_perp", gdb.add(&gbd).mul(p_perp).sub(p_perp).max_abs());
            put("gdb_idempotent", gdb.mul(&gdb).mul(p_perp).sub(&gdb.mul(p_perp)).max_abs());
            put("gbd_idempotent", gbd.mul(&gbd).mul(p_perp).sub(&gbd.mul(p_perp)).max_abs());
            let image_gdb = gdb.mul(p_perp);
            let image_gbd = gbd.mul(p_perp);
            let in_d = if n == 0 { image_gdb.is_zero() } else { contains_columns(self.d(n - 1), &image_gdb) };
            put("gdb_image_in_im_d", if in_d { 0.0 } else { 1.0 });
            put("gbd_image_in_im_b", if contains_columns(bn1, &image_gbd) { 0.0 } else { 1.0 });

            // rescaled Laplacian
            let lap = self.ops.laplacian.block(n).expect("L below n_max");
            put("laplacian_on_p", lap.mul(p).max_abs());
        }
        r
    }

    /// Whether `P⊥Ω^n = d PΩ^{n−1} + b PΩ^{n+1}` holds literally (the
    /// statement-level reading with `P` in place of `P⊥`).
    pub fn literal_splitting_reading(&self, n: usize) -> Option<bool> {
        if n + 1 > self.n_max() {
            return None;
        }
        let p_perp = &self.degrees[n].p_perp;
        let mut cols: Vec<Vec<S>> = Vec::new();
        if n > 0 {
            let dp = self.d(n - 1).mul(self.p(n - 1));
            cols.extend((0..dp.cols()).map(|c| dp.column(c)));
        }
        let bp = self.b(n + 1).mul(self.p(n + 1));
        cols.extend((0..bp.cols()).map(|c| bp.column(c)));
        let span = Mat::from_columns(self.window.dim(n), &cols);
        let both = hcat(&span, p_perp);
        Some(span.rank() == p_perp.rank() && both.rank() == p_perp.rank())
    }

    /// Threshold a residual must stay below: exact zero in exact modes.
    pub fn passes(&self, residual: f64) -> bool {
        if S::is_exact() {
            residual == 0.0
        } else {
            residual < self.cfg.float_residual_tol
        }
    }
}

fn hcat<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> Mat<S> {
    assert_eq!(a.rows(), b.rows());
    Mat::from_fn(a.rows(), a.cols() + b.cols(), |r, c| if c < a.cols() { a[(r, c)].clone() } else { b[(r, c - a.cols())].clone() })
}

/// Column space of `b` is contained in that of `a`.
pub fn contains_columns<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> bool {
    if b.is_zero() {
        return true;
    }
    a.rank() == hcat(a, b).rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::examples::*;
    use num_traits::Zero;
    use std::sync::Arc;

    type Q = BigRational;

    fn q(v: i64) -> Q {
        Q::from_i64(v)
    }

    fn dual(n_max: usize) -> FormsWindow<Q> {
        FormsWindow::new(Arc::new(dual_numbers()), n_max).unwrap()
    }

    #[test]
    fn projector_polynomial_congruences() {
        for n in 1..7 {
            let r = projector_polynomial(n);
            let sq = Poly::from_i64(&[1, -2, 1]);
            let m = Poly::x_pow_minus_one(n).mul(&Poly::x_pow_minus_one(n + 1));
            let (qpoly, _) = m.div_rem(&sq);
            assert_eq!(r.sub(&Poly::one()).div_rem(&sq).1, Poly(vec![]), "n={n}");
            assert!(r.div_rem(&qpoly).1.is_zero(), "n={n}");
        }
    }

    #[test]
    fn degree_zero_projection_is_identity() {
        for (_, a) in suite::<Q>() {
            let w = FormsWindow::new(Arc::new(a), 1).unwrap();
            let data = harmonic_projection(&w, 0, &SpectralConfig::default()).unwrap();
            assert_eq!(data.p, Mat::identity(w.dim(0)));
        }
    }

    #[test]
    fn dual_numbers_degree_one() {
        let w = dual(3);
        let cfg = SpectralConfig::default();
        let data = greens_operator(&w, 1, &cfg).unwrap();
        assert_eq!(data.p, Mat::from_fn(2, 2, |r, c| if r == 0 && c == 0 { q(1) } else { q(0) }));
        // G(x dx) = ½ x dx
        let g = data.g.unwrap();
        assert_eq!(g.mul_vec(&[q(0), q(1)]), vec![q(0), BigRational::new(1.into(), 2.into())]);
        assert_eq!(g.mul_vec(&[q(1), q(0)]), vec![q(0), q(0)]);
        let report = spectrum_report(&w, 1, &cfg).unwrap();
        assert_eq!(report.len(), 2);
        assert_eq!((report[0].re, report[0].multiplicity), (1.0, 1));
        assert_eq!((report[1].re, report[1].multiplicity), (-1.0, 1));
    }

    #[test]
    fn dual_numbers_hodge_split() {
        let w = dual(3);
        let cfg = SpectralConfig::default();
        let dx = w.basis_form(&[0, 1]);
        let s = hodge_split(&w, &dx, &cfg).unwrap();
        assert_eq!(s.harmonic, dx);
        assert!(s.d_part.is_zero() && s.b_part.is_zero());
        let xdx = w.basis_form(&[1, 1]);
        let s = hodge_split(&w, &xdx, &cfg).unwrap();
        assert!(s.harmonic.is_zero() && s.d_part.is_zero());
        assert_eq!(s.b_part, xdx);
        assert!(s.b_part_coexact && s.d_part_exact);
        let s = hodge_split(&w, &Form::homogeneous(1, vec![q(0), q(0)]), &cfg).unwrap();
        assert!(s.harmonic.is_zero() && s.d_part.is_zero() && s.b_part.is_zero());
    }

    #[test]
    fn dual_numbers_laplacian_check() {
        let w = dual(3);
        let cfg = SpectralConfig::default();
        let c = rescaled_laplacian_check(&w, 1, &cfg).unwrap();
        assert_eq!(c.norm_on_p, 0.0);
        // L(x dx) = 2·b(d(x dx)) = 4 x dx
        assert!((c.min_singular_on_p_perp.unwrap() - 4.0).abs() < 1e-12);
        let c0 = rescaled_laplacian_check(&w, 0, &cfg).unwrap();
        assert_eq!(c0.norm_on_p, 0.0);
        assert_eq!(c0.min_singular_on_p_perp, None);
    }

    #[test]
    fn m2_degree_one_ranks() {
        let w = FormsWindow::<Q>::new(Arc::new(m2()), 2).unwrap();
        let data = harmonic_projection(&w, 1, &SpectralConfig::default()).unwrap();
        assert_eq!(data.p.rank() + data.p_perp.rank(), 12);
    }

    #[test]
    fn m2_degree_two_spectrum_is_admissible() {
        let w = FormsWindow::<Q>::new(Arc::new(m2()), 2).unwrap();
        let report = spectrum_report(&w, 2, &SpectralConfig::default()).unwrap();
        let total: usize = report.iter().map(|e| e.multiplicity).sum();
        assert_eq!(total, 36);
        assert!(report.iter().all(|e| 2 % e.order == 0 || 3 % e.order == 0));
    }

    #[test]
    fn crt_matches_eigen_projection() {
        let cfg = SpectralConfig::default();
        for (name, a) in suite::<Q>() {
            let n_max = if name == "m2" { 2 } else { 3 };
            let w = FormsWindow::new(Arc::new(a), n_max).unwrap();
            for n in 0..n_max {
                let k = w.k_matrix(n).unwrap();
                let exact = crt_projection(k, n).to_dmatrix();
                let float = eigen_projection(&k.to_dmatrix(), n, &cfg).unwrap();
                assert!(dense::max_abs(&(exact - float)) < 1e-10, "{name} degree {n}");
            }
        }
    }

    #[test]
    fn all_residuals_vanish_on_dual_numbers() {
        let w = dual(4);
        let an = SpectralAnalysis::new(&w, SpectralConfig::default()).unwrap();
        for n in 0..=4 {
            for (name, v) in an.residuals(n) {
                assert!(v.is_zero(), "degree {n}: {name} = {v}");
            }
        }
    }

    #[test]
    fn nonunit_root_detected() {
        let eig = [Complex64::new(2.0, 0.0)];
        assert!(matches!(classify_eigenvalues(2, &eig, 1e-6), Err(Error::NonUnitRootEigenvalue { .. })));
    }

    #[test]
    fn ambiguous_eigenvalue_detected() {
        let k = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.01, 0.0)]));
        assert!(matches!(eigen_projection(&k, 2, &SpectralConfig::default()), Err(Error::NumericalRankAmbiguous { .. })));
    }
}
