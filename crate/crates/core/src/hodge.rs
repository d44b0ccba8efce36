//! Finite-dimensional Hodge theory for cochain complexes with inner
//! products: adjoints, Laplacians, harmonic decomposition, ζ-regularized
//! determinants, Ray–Singer torsion and the Abelian Chern–Simons partition
//! function.
//!
//! All spectral work is done in whitened coordinates: with `G_k = L_k L_k^H`
//! the operator `L_{k+1}^H D_k L_k^{-H}` is the matrix of `D_k` in
//! `G`-orthonormal bases, so every Laplacian becomes Hermitian.

use std::path::Path;

use nalgebra::{Cholesky, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::dense::{self, CMat};
use crate::linalg::Mat;
use crate::scalar::{GaussianRational, Scalar, ScalarMode};

/// Relative threshold below which a Laplacian eigenvalue counts as zero.
pub const KERNEL_REL_TOL: f64 = 1e-10;
/// Float tolerance for `D_{k+1} D_k = 0` and Gram symmetry.
pub const COMPLEX_TOL: f64 = 1e-12;

type CVec = DVector<Complex64>;

#[derive(Clone, Debug)]
pub struct CochainComplex {
    dims: Vec<usize>,
    differentials: Vec<CMat>,
    grams: Vec<CMat>,
    /// Cholesky factors of the Gram matrices.
    chol: Vec<CMat>,
}

impl CochainComplex {
    /// Validates shapes, `D_{k+1} D_k = 0` and positivity of the Gram
    /// matrices (identity when absent).
    pub fn new(dims: Vec<usize>, differentials: Vec<CMat>, grams: Option<Vec<CMat>>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::ShapeMismatch("a complex needs at least one degree".into()));
        }
        if differentials.len() + 1 != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} degrees need {} differentials, got {}",
                dims.len(),
                dims.len() - 1,
                differentials.len()
            )));
        }
        for (k, d) in differentials.iter().enumerate() {
            if d.nrows() != dims[k + 1] || d.ncols() != dims[k] {
                return Err(Error::ShapeMismatch(format!("D_{k} is {}x{}, expected {}x{}", d.nrows(), d.ncols(), dims[k + 1], dims[k])));
            }
        }
        for k in 0..differentials.len().saturating_sub(1) {
            let prod = &differentials[k + 1] * &differentials[k];
            let scale = dense::max_abs(&differentials[k + 1]).max(dense::max_abs(&differentials[k])).max(1.0);
            let residual = dense::max_abs(&prod);
            if residual > COMPLEX_TOL * scale * scale {
                return Err(Error::NotAComplex { degree: k, residual });
            }
        }
        let grams = grams.unwrap_or_else(|| dims.iter().map(|&n| CMat::identity(n, n)).collect());
        if grams.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!("{} Gram matrices for {} degrees", grams.len(), dims.len())));
        }
        let mut chol = Vec::with_capacity(grams.len());
        for (k, g) in grams.iter().enumerate() {
            if g.nrows() != dims[k] || g.ncols() != dims[k] {
                return Err(Error::ShapeMismatch(format!(
                    "Gram matrix {k} is {}x{}, expected {}x{}",
                    g.nrows(),
                    g.ncols(),
                    dims[k],
                    dims[k]
                )));
            }
            if dense::max_abs(&(g - g.adjoint())) > COMPLEX_TOL * dense::max_abs(g).max(1.0) {
                return Err(Error::BadGram { degree: k });
            }
            let (vals, _) = dense::hermitian_eigen(g);
            if vals.first().is_some_and(|&v| v <= 0.0) {
                return Err(Error::BadGram { degree: k });
            }
            let c = Cholesky::new(g.clone()).ok_or(Error::BadGram { degree: k })?;
            chol.push(c.l());
        }
        Ok(Self { dims, differentials, grams, chol })
    }

    pub fn from_differentials(dims: Vec<usize>, differentials: Vec<CMat>) -> Result<Self> {
        Self::new(dims, differentials, None)
    }

    /// Top degree `p`.
    pub fn length(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn differential(&self, k: usize) -> &CMat {
        &self.differentials[k]
    }

    pub fn gram(&self, k: usize) -> &CMat {
        &self.grams[k]
    }

    /// `D_k: C^k → C^{k+1}`, or the zero map outside `0..p`.
    fn d_or_zero(&self, k: isize) -> CMat {
        let p = self.length() as isize;
        if k < 0 || k >= p {
            let src = if k < 0 { 0 } else { self.dims[k as usize] };
            let dst = if k + 1 > p || k + 1 < 0 { 0 } else { self.dims[(k + 1) as usize] };
            return CMat::zeros(dst, src);
        }
        self.differentials[k as usize].clone()
    }

    /// `D_k` in `G`-orthonormal coordinates.
    pub fn whitened_differential(&self, k: isize) -> CMat {
        let d = self.d_or_zero(k);
        if k < 0 || k >= self.length() as isize {
            return d;
        }
        let k = k as usize;
        let lo = &self.chol[k];
        let hi = &self.chol[k + 1];
        // L_{k+1}^H D L_k^{-H}
        let left = hi.adjoint() * d;
        solve_upper_right(&left, &lo.adjoint())
    }

    /// `D_k^* = G_k^{-1} D_k^H G_{k+1}`.
    pub fn adjoint(&self, k: usize) -> CMat {
        let d = &self.differentials[k];
        let rhs = d.adjoint() * &self.grams[k + 1];
        Cholesky::new(self.grams[k].clone()).expect("validated Gram").solve(&rhs)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let len = self.dims.len().max(other.dims.len());
        let dim = |c: &Self, k: usize| c.dims.get(k).copied().unwrap_or(0);
        let dims: Vec<usize> = (0..len).map(|k| dim(self, k) + dim(other, k)).collect();
        let block = |a: CMat, b: CMat| {
            let mut m = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
            m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(&a);
            m.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols())).copy_from(&b);
            m
        };
        let pad = |c: &Self, k: usize| {
            if k < c.length() {
                c.differentials[k].clone()
            } else {
                CMat::zeros(dim(c, k + 1), dim(c, k))
            }
        };
        let gram = |c: &Self, k: usize| if k < c.dims.len() { c.grams[k].clone() } else { CMat::zeros(0, 0) };
        let diffs = (0..len - 1).map(|k| block(pad(self, k), pad(other, k))).collect();
        let grams = (0..len).map(|k| block(gram(self, k), gram(other, k))).collect();
        Self::new(dims, diffs, Some(grams))
    }

    /// The complex `U_{k+1} D_k U_k^H` with Gram matrices `U_k G_k U_k^H`,
    /// for unitaries `U_k`.
    pub fn conjugated(&self, unitaries: &[CMat]) -> Result<Self> {
        let diffs = (0..self.length()).map(|k| &unitaries[k + 1] * &self.differentials[k] * unitaries[k].adjoint()).collect();
        let grams = (0..self.dims.len()).map(|k| &unitaries[k] * &self.grams[k] * unitaries[k].adjoint()).collect();
        Self::new(self.dims.clone(), diffs, Some(grams))
    }

    pub fn to_file(&self) -> ComplexFile {
        let mat = |m: &CMat| -> Vec<Vec<Value>> { (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)].to_json()).collect()).collect() };
        ComplexFile {
            dims: self.dims.clone(),
            differentials: self.differentials.iter().map(mat).collect(),
            gram: Some(self.grams.iter().map(mat).collect()),
            scalars: Some(ScalarMode::Float),
        }
    }
}

// X · U^{-1} for upper-triangular U.
fn solve_upper_right(x: &CMat, u: &CMat) -> CMat {
    if u.nrows() == 0 {
        return x.clone();
    }
    // (X U^{-1})^H = U^{-H} X^H and U^H is lower triangular
    let lower = u.adjoint();
    let sol = lower.solve_lower_triangular(&x.adjoint()).expect("Cholesky factor is invertible");
    sol.adjoint()
}

/// On-disk complex description. Matrix entries use the wire format of the
/// declared scalar mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexFile {
    pub dims: Vec<usize>,
    pub differentials: Vec<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<Vec<Value>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalars: Option<ScalarMode>,
}

fn parse_matrix<S: Scalar>(rows: &[Vec<Value>], nrows: usize, ncols: usize, what: &str) -> Result<Mat<S>> {
    // zero-size matrices may be written as [] regardless of the other side
    if nrows == 0 || ncols == 0 {
        return Ok(Mat::zeros(nrows, ncols));
    }
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ShapeMismatch(format!("{what} should be {nrows}x{ncols}")));
    }
    let data = rows.iter().flatten().map(S::from_json).collect::<Result<Vec<_>>>()?;
    Ok(Mat::from_row_major(nrows, ncols, data))
}

fn load_in_mode<S: Scalar>(file: &ComplexFile) -> Result<CochainComplex> {
    let dims = file.dims.clone();
    if dims.is_empty() || file.differentials.len() + 1 != dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} degrees need {} differentials, got {}",
            dims.len(),
            dims.len().saturating_sub(1),
            file.differentials.len()
        )));
    }
    let mut diffs: Vec<Mat<S>> = Vec::new();
    for (k, rows) in file.differentials.iter().enumerate() {
        diffs.push(parse_matrix(rows, dims[k + 1], dims[k], &format!("D_{k}"))?);
    }
    if S::is_exact() {
        for k in 0..diffs.len().saturating_sub(1) {
            let prod = diffs[k + 1].mul(&diffs[k]);
            if !prod.is_zero() {
                return Err(Error::NotAComplex { degree: k, residual: prod.max_abs() });
            }
        }
    }
    let grams = match &file.gram {
        None => None,
        Some(gs) => {
            if gs.len() != dims.len() {
                return Err(Error::ShapeMismatch(format!("{} Gram matrices for {} degrees", gs.len(), dims.len())));
            }
            let mut out = Vec::new();
            for (k, rows) in gs.iter().enumerate() {
                out.push(parse_matrix::<S>(rows, dims[k], dims[k], &format!("Gram matrix {k}"))?.to_dmatrix());
            }
            Some(out)
        }
    };
    CochainComplex::new(dims, diffs.iter().map(Mat::to_dmatrix).collect(), grams)
}

impl ComplexFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build(&self) -> Result<CochainComplex> {
        match self.scalars.unwrap_or_default() {
            ScalarMode::Rational => load_in_mode::<BigRational>(self),
            ScalarMode::Gaussian => load_in_mode::<GaussianRational>(self),
            ScalarMode::Float => load_in_mode::<Complex64>(self),
        }
    }
}

pub fn load_complex(path: impl AsRef<Path>) -> Result<CochainComplex> {
    ComplexFile::load(path)?.build()
}

/// Orthogonal pieces of a cochain: `v = harmonic + exact + coexact`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub harmonic: CVec,
    pub exact: CVec,
    pub coexact: CVec,
}

#[derive(Clone, Debug)]
pub struct HodgePackage {
    /// `Δ_k = D_{k−1} D_{k−1}^* + D_k^* D_k` in the original coordinates.
    pub laplacians: Vec<CMat>,
    pub adjoints: Vec<CMat>,
    /// `G`-orthonormal bases (columns) of `Ker Δ_k`.
    pub harmonic_bases: Vec<CMat>,
    pub betti: Vec<usize>,
    /// Ascending eigenvalues of each `Δ_k`.
    pub spectra: Vec<Vec<f64>>,
    whitened_laplacians: Vec<CMat>,
}

fn kernel_cut(eigs: &[f64]) -> f64 {
    let top = eigs.iter().copied().fold(0.0, f64::max);
    KERNEL_REL_TOL * top
}

pub fn hodge_package(c: &CochainComplex) -> HodgePackage {
    let p = c.length();
    let adjoints: Vec<CMat> = (0..p).map(|k| c.adjoint(k)).collect();
    let mut laplacians = Vec::new();
    let mut whitened_laplacians = Vec::new();
    let mut harmonic_bases = Vec::new();
    let mut betti = Vec::new();
    let mut spectra = Vec::new();
    for k in 0..=p {
        let n = c.dims[k];
        let mut lap = CMat::zeros(n, n);
        if k > 0 {
            lap += &c.differentials[k - 1] * &adjoints[k - 1];
        }
        if k < p {
            lap += &adjoints[k] * &c.differentials[k];
        }
        let dm = c.whitened_differential(k as isize - 1);
        let dk = c.whitened_differential(k as isize);
        let white = &dm * dm.adjoint() + dk.adjoint() * &dk;
        let (vals, vecs) = dense::hermitian_eigen(&white);
        let cut = kernel_cut(&vals);
        let ker: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= cut).collect();
        let mut basis = CMat::zeros(n, ker.len());
        for (j, &i) in ker.iter().enumerate() {
            let y = vecs.column(i).into_owned();
            basis.set_column(j, &unwhiten(&c.chol[k], &y));
        }
        betti.push(ker.len());
        harmonic_bases.push(basis);
        spectra.push(vals);
        laplacians.push(lap);
        whitened_laplacians.push(white);
    }
    HodgePackage { laplacians, adjoints, harmonic_bases, betti, spectra, whitened_laplacians }
}

// x = L^{-H} y
fn unwhiten(l: &CMat, y: &CVec) -> CVec {
    if l.nrows() == 0 {
        return y.clone();
    }
    l.adjoint().solve_upper_triangular(y).expect("Cholesky factor is invertible")
}

// y = L^H x
fn whiten(l: &CMat, x: &CVec) -> CVec {
    l.adjoint() * x
}

fn project(basis: &CMat, y: &CVec) -> CVec {
    if basis.ncols() == 0 {
        return CVec::zeros(y.len());
    }
    basis * (basis.adjoint() * y)
}

impl HodgePackage {
    /// Splits `v ∈ C^k` into its harmonic, exact (`Im D_{k−1}`) and coexact
    /// (`Im D_k^*`) parts. Each part is computed as its own orthogonal
    /// projection, so the re-summation is an independent check.
    pub fn decompose(&self, c: &CochainComplex, k: usize, v: &CVec) -> Result<Decomposition> {
        if k > c.length() {
            return Err(Error::DegreeOutOfWindow { degree: k, n_max: c.length() });
        }
        if v.len() != c.dims[k] {
            return Err(Error::DimMismatch { expected: c.dims[k], got: v.len() });
        }
        let l = &c.chol[k];
        let y = whiten(l, v);
        let (vals, vecs) = dense::hermitian_eigen(&self.whitened_laplacians[k]);
        let cut = kernel_cut(&vals);
        let ker: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= cut).collect();
        let mut h = CMat::zeros(y.len(), ker.len());
        for (j, &i) in ker.iter().enumerate() {
            h.set_column(j, &vecs.column(i).into_owned());
        }
        let exact_basis = dense::range(&c.whitened_differential(k as isize - 1), KERNEL_REL_TOL);
        let coexact_basis = dense::range(&c.whitened_differential(k as isize).adjoint(), KERNEL_REL_TOL);
        Ok(Decomposition {
            harmonic: unwhiten(l, &project(&h, &y)),
            exact: unwhiten(l, &project(&exact_basis, &y)),
            coexact: unwhiten(l, &project(&coexact_basis, &y)),
        })
    }
}

/// `Ker Δ_k = Ker D_k ∩ Ker D_{k−1}^*`, read off from the singular values
/// of the stacked operator `[D_k; D_{k−1}^*]` in whitened coordinates. The
/// singular values are square roots of the Laplacian eigenvalues, so
/// exponentially small gaps (Witten deformation) stay resolvable.
/// Returns a `G`-orthonormal basis of the kernel.
pub fn harmonic_basis_svd(c: &CochainComplex, k: usize, rel_tol: f64) -> CMat {
    let n = c.dims[k];
    let dk = c.whitened_differential(k as isize);
    let dm = c.whitened_differential(k as isize - 1).adjoint();
    let mut stacked = CMat::zeros(dk.nrows() + dm.nrows(), n);
    stacked.view_mut((0, 0), (dk.nrows(), n)).copy_from(&dk);
    stacked.view_mut((dk.nrows(), 0), (dm.nrows(), n)).copy_from(&dm);
    let null = if stacked.nrows() == 0 { CMat::identity(n, n) } else { dense::null_space(&stacked, None, rel_tol) };
    let mut out = CMat::zeros(n, null.ncols());
    for j in 0..null.ncols() {
        out.set_column(j, &unwhiten(&c.chol[k], &null.column(j).into_owned()));
    }
    out
}

/// `G`-inner product `<a, b> = a^H G b`.
pub fn inner(c: &CochainComplex, k: usize, a: &CVec, b: &CVec) -> Complex64 {
    (a.adjoint() * &c.grams[k] * b)[(0, 0)]
}

/// Betti numbers from `dim Ker D_k − rank D_{k−1}`.
pub fn rank_nullity_betti(c: &CochainComplex) -> Vec<usize> {
    let p = c.length();
    (0..=p)
        .map(|k| {
            let ker = if k < p { c.dims[k] - dense::rank(&c.differentials[k], KERNEL_REL_TOL) } else { c.dims[k] };
            let im = if k > 0 { dense::rank(&c.differentials[k - 1], KERNEL_REL_TOL) } else { 0 };
            ker - im
        })
        .collect()
}

/// `det′` of a list of eigenvalues of a positive semidefinite operator:
/// the product of those above the kernel threshold, 1 if there are none.
pub fn det_prime(eigs: &[f64]) -> Result<f64> {
    let top = eigs.iter().copied().fold(0.0, f64::max);
    let floor = KERNEL_REL_TOL * top.max(1.0);
    if let Some(&neg) = eigs.iter().find(|&&x| x < -floor) {
        return Err(Error::NegativeEigenvalue { eigenvalue: neg });
    }
    let cut = kernel_cut(eigs);
    Ok(eigs.iter().filter(|&&x| x > cut).product())
}

/// `ζ'(0)` in the convention `ζ'(0) = −d/ds Σ λ^{−s}|_{s=0} = Σ log λ`,
/// summed over the nonzero spectrum.
pub fn zeta_prime_at_zero(eigs: &[f64]) -> Result<f64> {
    det_prime(eigs)?;
    let cut = kernel_cut(eigs);
    Ok(eigs.iter().filter(|&&x| x > cut).map(|x| x.ln()).sum())
}

/// `det′` of a Hermitian positive semidefinite matrix.
pub fn zeta_det(op: &CMat) -> Result<f64> {
    if dense::max_abs(&(op - op.adjoint())) > 1e-10 * dense::max_abs(op).max(1.0) {
        return Err(Error::ShapeMismatch("zeta_det needs a Hermitian operator".into()));
    }
    let (vals, _) = dense::hermitian_eigen(op);
    det_prime(&vals)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub betti: Vec<usize>,
    pub det_prime: Vec<f64>,
    /// `ζ'_{Δ_i}(0) = log det′ Δ_i`.
    pub zeta_prime_values: Vec<f64>,
    pub log_torsion: f64,
    pub torsion: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cs_partition: Option<f64>,
}

pub fn rs_torsion(c: &CochainComplex) -> Result<TorsionReport> {
    let pkg = hodge_package(c);
    let det_prime = pkg.spectra.iter().map(|s| det_prime(s)).collect::<Result<Vec<_>>>()?;
    let zeta_prime_values = pkg.spectra.iter().map(|s| zeta_prime_at_zero(s)).collect::<Result<Vec<_>>>()?;
    for (i, (&d, &z)) in det_prime.iter().zip(&zeta_prime_values).enumerate() {
        debug_assert!((d.ln() - z).abs() < 1e-9 * z.abs().max(1.0), "ζ' path disagrees in degree {i}");
    }
    let log_torsion =
        0.5 * zeta_prime_values.iter().enumerate().map(|(i, z)| if i % 2 == 0 { i as f64 * z } else { -(i as f64) * z }).sum::<f64>();
    let cs_partition = (c.length() >= 1).then(|| cs_from_dets(det_prime[0], det_prime[1]));
    Ok(TorsionReport { betti: pkg.betti, det_prime, zeta_prime_values, log_torsion, torsion: log_torsion.exp(), cs_partition })
}

fn cs_from_dets(det0: f64, det1: f64) -> f64 {
    det1.powf(-0.25) * det0.powf(0.75)
}

/// `Z = det′(Δ₁)^{−1/4} · det′(Δ₀)^{3/4}`.
pub fn abelian_cs_partition(c: &CochainComplex) -> Result<f64> {
    if c.length() < 1 {
        return Err(Error::ShapeMismatch("the Chern–Simons formula needs degrees 0 and 1".into()));
    }
    let pkg = hodge_package(c);
    Ok(cs_from_dets(det_prime(&pkg.spectra[0])?, det_prime(&pkg.spectra[1])?))
}

/// `N`-point circle with holonomy `alpha`: `C⁰ = C¹ = ℂ^N` and
/// `D₀ = S_α − I`, where `(S_α f)_j = f_{j+1}` and the wrap-around edge
/// picks up the factor `alpha`.
pub fn twisted_circle_complex(alpha: Complex64, n: usize) -> Result<CochainComplex> {
    if n == 0 {
        return Err(Error::LeafTooSmall(0));
    }
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::ShapeMismatch(format!("holonomy {alpha} is not a unit scalar")));
    }
    let mut d = -CMat::identity(n, n);
    for j in 0..n {
        if j + 1 < n {
            d[(j, j + 1)] += Complex64::new(1.0, 0.0);
        } else {
            d[(j, 0)] += alpha;
        }
    }
    CochainComplex::from_differentials(vec![n, n], vec![d])
}

/// Random complex with known cohomology: a direct sum of `h_k`-dimensional
/// cohomology and `r_k`-dimensional acyclic pieces `R^k ≅ B^{k+1}`, scrambled
/// by random invertible changes of basis, with random Gram matrices.
/// Returns the complex and the Betti numbers it was built with.
pub fn random_complex(rng: &mut impl Rng, max_dim: usize) -> (CochainComplex, Vec<usize>) {
    loop {
        let p = rng.random_range(1..=3usize);
        let h: Vec<usize> = (0..=p).map(|_| rng.random_range(0..=2usize)).collect();
        let r: Vec<usize> = (0..=p).map(|k| if k == p { 0 } else { rng.random_range(0..=2usize) }).collect();
        let dims: Vec<usize> = (0..=p).map(|k| h[k] + r[k] + if k > 0 { r[k - 1] } else { 0 }).collect();
        if dims.iter().any(|&d| d > max_dim) || dims.iter().all(|&d| d == 0) {
            continue;
        }
        // coordinates of C^k: [H^k | B^k | R^k]
        let standard: Vec<CMat> = (0..p)
            .map(|k| {
                let mut m = CMat::zeros(dims[k + 1], dims[k]);
                let src = h[k] + if k > 0 { r[k - 1] } else { 0 };
                for i in 0..r[k] {
                    m[(h[k + 1] + i, src + i)] = Complex64::new(1.0, 0.0);
                }
                m
            })
            .collect();
        let mut rand_mat = |n: usize| CMat::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let changes: Vec<CMat> = dims.iter().map(|&n| rand_mat(n) + CMat::identity(n, n) * Complex64::new(2.0, 0.0)).collect();
        let Some(inverses) = changes.iter().map(|a| a.clone().try_inverse()).collect::<Option<Vec<_>>>() else { continue };
        let diffs: Vec<CMat> = (0..p).map(|k| &changes[k + 1] * &standard[k] * &inverses[k]).collect();
        let grams: Vec<CMat> = dims
            .iter()
            .map(|&n| {
                let m = rand_mat(n);
                &m * m.adjoint() + CMat::identity(n, n)
            })
            .collect();
        match CochainComplex::new(dims, diffs, Some(grams)) {
            Ok(c) => return (c, h),
            Err(_) => continue,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn real_mat(rows: usize, cols: usize, v: &[f64]) -> CMat {
        CMat::from_row_slice(rows, cols, &v.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    #[test]
    fn trivial_circle_betti() {
        let cx = CochainComplex::from_differentials(vec![1, 1], vec![CMat::zeros(1, 1)]).unwrap();
        assert_eq!(hodge_package(&cx).betti, vec![1, 1]);
        let t = rs_torsion(&cx).unwrap();
        assert_eq!(t.log_torsion, 0.0);
        assert_eq!(t.det_prime, vec![1.0, 1.0]);
    }

    #[test]
    fn one_by_one_acyclic() {
        let cx = CochainComplex::from_differentials(vec![1, 1], vec![real_mat(1, 1, &[-2.0])]).unwrap();
        assert_eq!(hodge_package(&cx).betti, vec![0, 0]);
    }

    #[test]
    fn not_a_complex() {
        let d0 = real_mat(1, 1, &[1.0]);
        let d1 = real_mat(1, 1, &[1.0]);
        let err = CochainComplex::from_differentials(vec![1, 1, 1], vec![d0, d1]).unwrap_err();
        assert!(matches!(err, Error::NotAComplex { degree: 0, .. }));
    }

    #[test]
    fn bad_gram_rejected() {
        let g = vec![real_mat(1, 1, &[-1.0]), CMat::identity(1, 1)];
        let err = CochainComplex::new(vec![1, 1], vec![CMat::zeros(1, 1)], Some(g)).unwrap_err();
        assert_eq!(err, Error::BadGram { degree: 0 });
    }

    #[test]
    fn det_prime_examples() {
        assert_eq!(det_prime(&[0.0, 2.0, 3.0]).unwrap(), 6.0);
        assert!((zeta_det(&CMat::identity(4, 4)).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(det_prime(&[-1.0, 2.0]), Err(Error::NegativeEigenvalue { .. })));
        assert_eq!(det_prime(&[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn twisted_circle_determinants() {
        for (alpha, expected) in [(c(-1.0), 4.0), (Complex64::new(0.0, 1.0), 2.0)] {
            for n in [3, 5, 8, 17] {
                let cx = twisted_circle_complex(alpha, n).unwrap();
                let t = rs_torsion(&cx).unwrap();
                assert_eq!(t.betti, vec![0, 0]);
                assert!((t.det_prime[0] - expected).abs() < 1e-9, "alpha={alpha} n={n}: {}", t.det_prime[0]);
                assert!((t.det_prime[1] - expected).abs() < 1e-9);
            }
        }
        let t = rs_torsion(&twisted_circle_complex(c(-1.0), 8).unwrap()).unwrap();
        assert!((t.log_torsion + 2f64.ln()).abs() < 1e-10);
        assert!((t.torsion - 0.5).abs() < 1e-10);
        assert!((t.cs_partition.unwrap() - 2.0).abs() < 1e-10);
        assert_eq!(hodge_package(&twisted_circle_complex(c(1.0), 6).unwrap()).betti, vec![1, 1]);
    }

    #[test]
    fn engineered_cs_partition() {
        // Δ₀ = D₀^H D₀ = 2, Δ₁ = D₀D₀^H + D₁^H D₁ has det′ 4
        let d0 = real_mat(2, 1, &[1.0, 1.0]);
        let d1 = real_mat(1, 2, &[1.0, -1.0]);
        let cx = CochainComplex::from_differentials(vec![1, 2, 1], vec![d0, d1]).unwrap();
        let z = abelian_cs_partition(&cx).unwrap();
        assert!((z - 2f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn torsion_additive_under_direct_sum() {
        let a = twisted_circle_complex(c(-1.0), 3).unwrap();
        let b = twisted_circle_complex(Complex64::new(0.0, 1.0), 5).unwrap();
        let s = a.direct_sum(&b).unwrap();
        let lhs = rs_torsion(&s).unwrap().log_torsion;
        let rhs = rs_torsion(&a).unwrap().log_torsion + rs_torsion(&b).unwrap().log_torsion;
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn random_complexes_hodge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (cx, h) = random_complex(&mut rng, 8);
            let pkg = hodge_package(&cx);
            assert_eq!(pkg.betti, h);
            assert_eq!(rank_nullity_betti(&cx), h);
            for k in 0..=cx.length() {
                let v = CVec::from_fn(cx.dims()[k], |i, _| Complex64::new(i as f64 + 1.0, -0.5));
                let parts = pkg.decompose(&cx, k, &v).unwrap();
                let sum = &parts.harmonic + &parts.exact + &parts.coexact;
                assert!((sum - &v).norm() < 1e-10);
                assert!(inner(&cx, k, &parts.harmonic, &parts.exact).norm() < 1e-10);
                assert!(inner(&cx, k, &parts.exact, &parts.coexact).norm() < 1e-10);
                // Δ is G-self-adjoint and kills the harmonic part
                assert!((&pkg.laplacians[k] * &parts.harmonic).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn harmonic_vector_decomposes_to_itself() {
        let cx = twisted_circle_complex(c(1.0), 5).unwrap();
        let pkg = hodge_package(&cx);
        let h = pkg.harmonic_bases[0].column(0).into_owned();
        let parts = pkg.decompose(&cx, 0, &h).unwrap();
        assert!((parts.harmonic - &h).norm() < 1e-12);
        assert!(parts.exact.norm() < 1e-12 && parts.coexact.norm() < 1e-12);
    }

    #[test]
    fn file_round_trip_and_exact_validation() {
        let text = r#"{"dims":[1,1,1],"differentials":[[[1]],[[[1,1]]]],"scalars":"rational"}"#;
        let f: ComplexFile = serde_json::from_str(text).unwrap();
        assert!(matches!(f.build(), Err(Error::NotAComplex { .. })));
        let cx = twisted_circle_complex(c(-1.0), 4).unwrap();
        let back = cx.to_file().build().unwrap();
        assert_eq!(back.differential(0), cx.differential(0));
    }
}
