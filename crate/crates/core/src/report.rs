//! Serializable reports emitted by the command-line tool. Every report
//! carries `"schema": 1`; field order and map ordering are fixed so equal
//! inputs give byte-identical JSON.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{product_checks, ProductChecks};
use crate::error::Result;
use crate::forms::FormsWindow;
use crate::hodge::{self, CochainComplex, TorsionReport};
use crate::scalar::{Scalar, ScalarMode};
use crate::spectral::{rescaled_laplacian_check, EigenvalueEntry, LaplacianCheck, SpectralAnalysis, SpectralConfig};
use crate::tangential::{MorseScanReport, WittenSweepReport};

pub const SCHEMA: u32 = 1;

/// Float residual threshold used when a report is computed in float mode.
pub const FLOAT_RESIDUAL_TOL: f64 = 1e-10;

fn residual_ok<S: Scalar>(r: f64) -> bool {
    if S::is_exact() {
        r == 0.0
    } else {
        r < FLOAT_RESIDUAL_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSummary {
    pub name: String,
    pub dim: usize,
    pub labels: Vec<String>,
}

fn summary<S: Scalar>(name: &str, window: &FormsWindow<S>) -> AlgebraSummary {
    let a = window.algebra();
    AlgebraSummary { name: name.to_string(), dim: a.dim(), labels: a.labels().to_vec() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcReport {
    pub schema: u32,
    pub algebra: AlgebraSummary,
    pub scalar: ScalarMode,
    pub n_max: usize,
    pub degree_dims: Vec<usize>,
    pub seed: u64,
    /// Per degree, residuals of the identities that fit in the window.
    pub residuals: BTreeMap<usize, BTreeMap<String, f64>>,
    pub products: ProductChecks,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<BTreeMap<String, BTreeMap<usize, serde_json::Value>>>,
    pub passed: bool,
}

pub fn nc_report<S: Scalar>(name: &str, window: &FormsWindow<S>, seed: u64, random_checks: usize, with_matrices: bool) -> Result<NcReport> {
    let ops = window.operator_matrices()?;
    let residuals: BTreeMap<usize, BTreeMap<String, f64>> = (0..=window.n_max()).map(|n| (n, ops.identity_residuals(n))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let products = product_checks(window, random_checks, &mut rng)?;
    let passed = residuals.values().flat_map(|m| m.values()).all(|&r| residual_ok::<S>(r)) && residual_ok::<S>(products.max_residual());
    let matrices = with_matrices.then(|| {
        [&ops.d, &ops.b, &ops.k, &ops.numbering, &ops.one_minus_k, &ops.laplacian]
            .iter()
            .map(|op| (op.name.to_string(), op.blocks.iter().map(|(&n, m)| (n, m.to_json())).collect()))
            .collect()
    });
    Ok(NcReport {
        schema: SCHEMA,
        algebra: summary(name, window),
        scalar: S::MODE,
        n_max: window.n_max(),
        degree_dims: window.degree_dims().to_vec(),
        seed,
        residuals,
        products,
        matrices,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: usize,
    pub dim: usize,
    pub rank_p: usize,
    pub rank_p_perp: usize,
    pub eigenvalues: Vec<EigenvalueEntry>,
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laplacian: Option<LaplacianCheck>,
    /// Whether `P⊥Ω^n = dPΩ^{n−1} + bPΩ^{n+1}` holds (reported, not asserted).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_statement_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub schema: u32,
    pub algebra: AlgebraSummary,
    pub scalar: ScalarMode,
    pub n_max: usize,
    pub degree_dims: Vec<usize>,
    pub degrees: Vec<DegreeReport>,
    pub passed: bool,
}

pub fn spectral_report<S: Scalar>(name: &str, window: &FormsWindow<S>, cfg: SpectralConfig) -> Result<SpectralReport> {
    let analysis = SpectralAnalysis::new(window, cfg)?;
    let degrees = (0..=window.n_max())
        .into_par_iter()
        .map(|n| -> Result<DegreeReport> {
            let data = &analysis.degrees[n];
            let laplacian = if n < window.n_max() { Some(rescaled_laplacian_check(window, n, &cfg)?) } else { None };
            Ok(DegreeReport {
                degree: n,
                dim: window.dim(n),
                rank_p: data.p.rank(),
                rank_p_perp: data.p_perp.rank(),
                eigenvalues: data.eigenvalue_report.clone(),
                residuals: analysis.residuals(n),
                laplacian,
                literal_statement_holds: analysis.literal_splitting_reading(n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = degrees.iter().all(|d| {
        d.residuals.values().all(|&r| residual_ok::<S>(r))
            && d.laplacian.as_ref().is_none_or(|l| residual_ok::<S>(l.norm_on_p) && l.min_singular_on_p_perp.is_none_or(|s| s > 1e-10))
    });
    Ok(SpectralReport {
        schema: SCHEMA,
        algebra: summary(name, window),
        scalar: S::MODE,
        n_max: window.n_max(),
        degree_dims: window.degree_dims().to_vec(),
        degrees,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HodgeReport {
    pub schema: u32,
    pub dims: Vec<usize>,
    pub betti: Vec<usize>,
    pub betti_rank_nullity: Vec<usize>,
    pub laplacian_spectra: Vec<Vec<f64>>,
    pub det_prime: Vec<f64>,
    pub passed: bool,
}

pub fn hodge_report(c: &CochainComplex) -> Result<HodgeReport> {
    let pkg = hodge::hodge_package(c);
    let betti_rank_nullity = hodge::rank_nullity_betti(c);
    let det_prime = pkg.spectra.iter().map(|s| hodge::det_prime(s)).collect::<Result<Vec<_>>>()?;
    Ok(HodgeReport {
        schema: SCHEMA,
        dims: c.dims().to_vec(),
        passed: pkg.betti == betti_rank_nullity,
        betti: pkg.betti,
        betti_rank_nullity,
        laplacian_spectra: pkg.spectra,
        det_prime,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionOutput {
    pub schema: u32,
    #[serde(flatten)]
    pub torsion: TorsionReport,
}

pub fn torsion_output(c: &CochainComplex) -> Result<TorsionOutput> {
    Ok(TorsionOutput { schema: SCHEMA, torsion: hodge::rs_torsion(c)? })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsOutput {
    pub schema: u32,
    pub det_prime_0: f64,
    pub det_prime_1: f64,
    pub cs_partition: f64,
}

pub fn cs_output(c: &CochainComplex) -> Result<CsOutput> {
    let t = hodge::rs_torsion(c)?;
    Ok(CsOutput { schema: SCHEMA, det_prime_0: t.det_prime[0], det_prime_1: t.det_prime[1], cs_partition: hodge::abelian_cs_partition(c)? })
}

/// `degree,index,eigenvalue` rows of every Laplacian spectrum.
pub fn spectra_csv(c: &CochainComplex) -> String {
    let pkg = hodge::hodge_package(c);
    let mut out = String::from("degree,index,eigenvalue\n");
    for (k, s) in pkg.spectra.iter().enumerate() {
        for (i, x) in s.iter().enumerate() {
            out.push_str(&format!("{k},{i},{x}\n"));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WittenOutput {
    pub schema: u32,
    #[serde(flatten)]
    pub sweep: WittenSweepReport,
    pub passed: bool,
}

pub fn witten_csv(r: &WittenSweepReport) -> String {
    let degrees = r.betti_table.first().map_or(0, Vec::len);
    let mut out = String::from("tau");
    for k in 0..degrees {
        out.push_str(&format!(",beta_{k}"));
    }
    out.push('\n');
    for (t, row) in r.tau_values.iter().zip(&r.betti_table) {
        out.push_str(&t.to_string());
        for b in row {
            out.push_str(&format!(",{b}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseOutput {
    pub schema: u32,
    #[serde(flatten)]
    pub scan: MorseScanReport,
}

pub fn morse_csv(r: &MorseScanReport) -> String {
    let mut out = String::from("h,v,classification,index,hessian,family,birth_death_rank_ok\n");
    for s in &r.singularities {
        let cls = match s.classification {
            crate::tangential::morse::Classification::Morse => "morse",
            crate::tangential::morse::Classification::Degenerate => "degenerate",
        };
        let bd = s.birth_death_rank_ok.map_or(String::new(), |b| b.to_string());
        out.push_str(&format!("{},{},{cls},{},{},{},{bd}\n", s.h, s.v, s.index, s.tangential_hessian, s.family));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GvOutput {
    pub schema: u32,
    #[serde(flatten)]
    pub gv: crate::tangential::GvReport,
    /// GV at twice the resolution, and the difference.
    pub gv_doubled: f64,
    pub doubling_residual: f64,
    pub passed: bool,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
