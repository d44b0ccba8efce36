use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{diag, leaf_grams, FoliationModel, LeafSpec};
use crate::error::{Error, Result};
use crate::hodge::{harmonic_basis_svd, CochainComplex};
use crate::linalg::dense::{self, CMat};

/// Relative singular-value threshold for kernels of leafwise Laplacians.
pub const KERNEL_TOL: f64 = 1e-8;

/// Per-degree diagonal of `E_τ^{(k)}`: `e^{τφ}` averaged over the vertices
/// of each cell (geometric mean, i.e. `e^{τ·mean φ}`).
pub fn cell_exponentials(model: &FoliationModel, phi_row: &[f64], tau: f64) -> Vec<Vec<f64>> {
    model
        .cells
        .iter()
        .map(|cells| {
            cells
                .iter()
                .map(|verts| {
                    let mean = verts.iter().map(|&v| phi_row[v]).sum::<f64>() / verts.len() as f64;
                    (tau * mean).exp()
                })
                .collect()
        })
        .collect()
}

/// `D_τ^k = (E^{(k+1)})^{-1} D^k E^{(k)}` on each leaf, with the
/// undeformed inner products.
pub fn witten_complex(model: &FoliationModel, phi: &[Vec<f64>], tau: f64) -> Result<Vec<CochainComplex>> {
    check_phi(model, phi)?;
    (0..model.leaf_count()).map(|s| witten_leaf(model, &phi[s], tau, s)).collect()
}

fn check_phi(model: &FoliationModel, phi: &[Vec<f64>]) -> Result<()> {
    let nv = model.leaf.vertex_count();
    if phi.len() != model.leaf_count() || phi.iter().any(|r| r.len() != nv) {
        return Err(Error::ShapeMismatch(format!("phi needs {} rows of {} vertex values", model.leaf_count(), nv)));
    }
    Ok(())
}

fn deform(d: &CMat, lo: &[f64], hi: &[f64]) -> CMat {
    let mut out = d.clone();
    for r in 0..d.nrows() {
        for c in 0..d.ncols() {
            if d[(r, c)] != num_complex::Complex64::new(0.0, 0.0) {
                out[(r, c)] = d[(r, c)] * (lo[c] / hi[r]);
            }
        }
    }
    out
}

fn witten_leaf(model: &FoliationModel, phi_row: &[f64], tau: f64, sample: usize) -> Result<CochainComplex> {
    let e = cell_exponentials(model, phi_row, tau);
    let diffs = model.differentials.iter().enumerate().map(|(k, d)| deform(d, &e[k], &e[k + 1])).collect();
    let dims = model.leaf_dims().to_vec();
    let grams = leaf_grams(&dims, model.metric_scale[sample]);
    CochainComplex::new(dims, diffs, Some(grams))
}

pub fn kernel_dims(c: &CochainComplex) -> Vec<usize> {
    (0..=c.length()).map(|k| harmonic_basis_svd(c, k, KERNEL_TOL).ncols()).collect()
}

/// `β_k = Σ_v w_v · dim Ker Δ_k` over the sampled leaves.
pub fn tangential_betti(model: &FoliationModel) -> Vec<f64> {
    let per_leaf: Vec<Vec<usize>> = (0..model.leaf_count()).into_par_iter().map(|s| kernel_dims(model.leaf_complex(s))).collect();
    weighted(&model.weights, &per_leaf)
}

fn weighted(weights: &[f64], per_leaf: &[Vec<usize>]) -> Vec<f64> {
    let degrees = per_leaf.first().map_or(0, Vec::len);
    (0..degrees).map(|k| weights.iter().zip(per_leaf).map(|(w, dims)| w * dims[k] as f64).sum()).collect()
}

/// `G`-orthogonal projection onto the span of `G`-orthonormal columns.
fn projector(basis: &CMat, gram: &CMat) -> CMat {
    basis * basis.adjoint() * gram
}

/// Ranks of `U^k_τ = Q^k_τ T^k Q^k`, where `Q` and `Q_τ` project onto the
/// harmonic spaces and `T^k` multiplies by `(E^{(k)})^{-1}`.
pub fn intertwiner_ranks(undeformed: &CochainComplex, deformed: &CochainComplex, exps: &[Vec<f64>]) -> Vec<usize> {
    (0..=undeformed.length())
        .map(|k| {
            let q = projector(&harmonic_basis_svd(undeformed, k, KERNEL_TOL), undeformed.gram(k));
            let q_tau = projector(&harmonic_basis_svd(deformed, k, KERNEL_TOL), deformed.gram(k));
            let inv: Vec<f64> = exps[k].iter().map(|x| 1.0 / x).collect();
            let u = q_tau * diag(&inv) * q;
            dense::rank(&u, KERNEL_TOL)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WittenSweepReport {
    pub leaf: LeafSpec,
    pub weights: Vec<f64>,
    pub tau_values: Vec<f64>,
    /// `betti_table[t][k] = β_k(τ_t)`.
    pub betti_table: Vec<Vec<f64>>,
    /// `kernel_dims[t][leaf][k] = dim Ker Δ^k_{τ_t}` on each sampled leaf.
    pub kernel_dims: Vec<Vec<Vec<usize>>>,
    /// `intertwiner_ranks[t][leaf][k] = rank U^k_{τ_t}`.
    pub intertwiner_ranks: Vec<Vec<Vec<usize>>>,
    /// τ values whose Betti numbers differ from those at the first τ.
    pub flagged_tau: Vec<f64>,
    /// Every intertwiner rank equals the matching kernel dimension.
    pub intertwiners_ok: bool,
    /// `Σ_k (−1)^k β_k(τ_0)`.
    pub euler_weighted: f64,
    /// `Σ_v w_v Σ_k (−1)^k dim C^k`.
    pub euler_from_ranks: f64,
}

impl WittenSweepReport {
    pub fn constant(&self) -> bool {
        self.flagged_tau.is_empty()
    }
}

pub fn witten_betti_sweep(model: &FoliationModel, phi: &[Vec<f64>], taus: &[f64]) -> Result<WittenSweepReport> {
    check_phi(model, phi)?;
    if let Some(t) = taus.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::ShapeMismatch(format!("tau must be non-negative, got {t}")));
    }
    let leaves = model.leaf_count();
    let jobs: Vec<(usize, usize)> = (0..taus.len()).flat_map(|t| (0..leaves).map(move |s| (t, s))).collect();
    let results = jobs
        .par_iter()
        .map(|&(t, s)| -> Result<(Vec<usize>, Vec<usize>)> {
            let deformed = witten_leaf(model, &phi[s], taus[t], s)?;
            let exps = cell_exponentials(model, &phi[s], taus[t]);
            let dims = kernel_dims(&deformed);
            let ranks = intertwiner_ranks(model.leaf_complex(s), &deformed, &exps);
            Ok((dims, ranks))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut kernel_dims = vec![Vec::with_capacity(leaves); taus.len()];
    let mut intertwiner_ranks = vec![Vec::with_capacity(leaves); taus.len()];
    for (&(t, _), (dims, ranks)) in jobs.iter().zip(results) {
        kernel_dims[t].push(dims);
        intertwiner_ranks[t].push(ranks);
    }
    let betti_table: Vec<Vec<f64>> = kernel_dims.iter().map(|per_leaf| weighted(&model.weights, per_leaf)).collect();
    let flagged_tau = taus.iter().zip(&kernel_dims).filter(|(_, dims)| Some(*dims) != kernel_dims.first()).map(|(&t, _)| t).collect();
    let intertwiners_ok = kernel_dims.iter().flatten().zip(intertwiner_ranks.iter().flatten()).all(|(a, b)| a == b);
    let alt = |v: &[f64]| v.iter().enumerate().map(|(k, x)| if k % 2 == 0 { *x } else { -x }).sum::<f64>();
    let euler_weighted = betti_table.first().map_or(0.0, |b| alt(b));
    let dims: Vec<f64> = model.leaf_dims().iter().map(|&d| d as f64).collect();
    let euler_from_ranks = model.weights.iter().sum::<f64>() * alt(&dims);
    Ok(WittenSweepReport {
        leaf: model.leaf,
        weights: model.weights.clone(),
        tau_values: taus.to_vec(),
        betti_table,
        kernel_dims,
        intertwiner_ranks,
        flagged_tau,
        intertwiners_ok,
        euler_weighted,
        euler_from_ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tangential::model::{make_model, PhiSpec};

    const TAUS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 5.0];

    #[test]
    fn tau_zero_is_bit_identical() {
        let m = FoliationModel::uniform(LeafSpec::Torus { n: 5 }, 2).unwrap();
        let phi = m.sample_phi(&PhiSpec::Random { seed: 2, modes: 3 }).unwrap();
        let w = witten_complex(&m, &phi, 0.0).unwrap();
        for (s, c) in w.iter().enumerate() {
            for k in 0..c.length() {
                assert_eq!(c.differential(k), m.leaf_complex(s).differential(k));
            }
        }
    }

    #[test]
    fn constant_phi_keeps_laplacian() {
        let m = FoliationModel::uniform(LeafSpec::Circle { n: 9 }, 1).unwrap();
        let phi = m.sample_phi(&PhiSpec::Builtin("constant".into())).unwrap();
        let w = witten_complex(&m, &phi, 3.0).unwrap();
        assert_eq!(w[0].differential(0), m.leaf_complex(0).differential(0));
    }

    #[test]
    fn circle_sweep_constant() {
        let m = FoliationModel::uniform(LeafSpec::Circle { n: 16 }, 4).unwrap();
        let phi = m.sample_phi(&PhiSpec::Builtin("cos-h".into())).unwrap();
        let r = witten_betti_sweep(&m, &phi, &TAUS).unwrap();
        assert!(r.constant(), "{:?}", r.betti_table);
        assert!(r.intertwiners_ok, "{:?}", r.intertwiner_ranks);
        for row in &r.betti_table {
            assert!((row[0] - 1.0).abs() < 1e-12 && (row[1] - 1.0).abs() < 1e-12);
        }
        assert!((r.euler_weighted - r.euler_from_ranks).abs() < 1e-12);
    }

    #[test]
    fn torus_sweep_constant() {
        let m = make_model(LeafSpec::Torus { n: 8 }, vec![0.1, 0.6], vec![0.3, 0.7], Some(vec![1.0, 2.0])).unwrap();
        let phi = m.sample_phi(&PhiSpec::Random { seed: 11, modes: 4 }).unwrap();
        let r = witten_betti_sweep(&m, &phi, &[0.0, 1.0, 2.0]).unwrap();
        assert!(r.constant(), "{:?}", r.kernel_dims);
        assert!(r.intertwiners_ok, "{:?}", r.intertwiner_ranks);
        for (a, b) in r.betti_table[0].iter().zip([1.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_do_not_change_identical_leaves() {
        let one = FoliationModel::uniform(LeafSpec::Circle { n: 8 }, 1).unwrap();
        let two = make_model(LeafSpec::Circle { n: 8 }, vec![0.0, 0.5], vec![0.3, 0.7], None).unwrap();
        let (a, b) = (tangential_betti(&one), tangential_betti(&two));
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}
