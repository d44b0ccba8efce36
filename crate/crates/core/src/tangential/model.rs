use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodge::CochainComplex;
use crate::linalg::dense::CMat;

/// Discretization of a single leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LeafSpec {
    /// `n` points on a circle; vertex `i` sits at `h = i/n`.
    Circle { n: usize },
    /// `n × n` torus; vertex `(i, j)` sits at `(h, w) = (i/n, j/n)`, index `i·n + j`.
    Torus { n: usize },
}

impl LeafSpec {
    pub fn points_per_side(&self) -> usize {
        match *self {
            LeafSpec::Circle { n } | LeafSpec::Torus { n } => n,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            LeafSpec::Circle { .. } => 1,
            LeafSpec::Torus { .. } => 2,
        }
    }

    pub fn vertex_count(&self) -> usize {
        match *self {
            LeafSpec::Circle { n } => n,
            LeafSpec::Torus { n } => n * n,
        }
    }

    /// Leaf coordinates `(h, w)` of each vertex (`w = 0` on circles).
    pub fn vertex_coords(&self) -> Vec<(f64, f64)> {
        match *self {
            LeafSpec::Circle { n } => (0..n).map(|i| (i as f64 / n as f64, 0.0)).collect(),
            LeafSpec::Torus { n } => (0..n * n).map(|v| ((v / n) as f64 / n as f64, (v % n) as f64 / n as f64)).collect(),
        }
    }

    /// Differentials of the leaf complex and, per degree, the vertices
    /// spanned by each cell (used to average `φ` over cells).
    pub fn complex_data(&self) -> (Vec<usize>, Vec<CMat>, Vec<Vec<Vec<usize>>>) {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            LeafSpec::Circle { n } => {
                let mut d0 = CMat::zeros(n, n);
                let mut edges = Vec::with_capacity(n);
                for i in 0..n {
                    let j = (i + 1) % n;
                    d0[(i, j)] += one;
                    d0[(i, i)] -= one;
                    edges.push(vec![i, j]);
                }
                let verts = (0..n).map(|i| vec![i]).collect();
                (vec![n, n], vec![d0], vec![verts, edges])
            }
            LeafSpec::Torus { n } => {
                let v = |i: usize, j: usize| (i % n) * n + (j % n);
                // edges: horizontal h(i,j) = 2(i·n+j), vertical v(i,j) = 2(i·n+j)+1
                let he = |i: usize, j: usize| 2 * v(i, j);
                let ve = |i: usize, j: usize| 2 * v(i, j) + 1;
                let nv = n * n;
                let mut d0 = CMat::zeros(2 * nv, nv);
                let mut d1 = CMat::zeros(nv, 2 * nv);
                let mut edges = vec![Vec::new(); 2 * nv];
                let mut faces = Vec::with_capacity(nv);
                for i in 0..n {
                    for j in 0..n {
                        d0[(he(i, j), v(i + 1, j))] += one;
                        d0[(he(i, j), v(i, j))] -= one;
                        d0[(ve(i, j), v(i, j + 1))] += one;
                        d0[(ve(i, j), v(i, j))] -= one;
                        edges[he(i, j)] = vec![v(i, j), v(i + 1, j)];
                        edges[ve(i, j)] = vec![v(i, j), v(i, j + 1)];
                        let f = v(i, j);
                        d1[(f, he(i, j))] += one;
                        d1[(f, ve(i + 1, j))] += one;
                        d1[(f, he(i, j + 1))] -= one;
                        d1[(f, ve(i, j))] -= one;
                        faces.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
                    }
                }
                let verts = (0..nv).map(|i| vec![i]).collect();
                (vec![nv, 2 * nv, nv], vec![d0, d1], vec![verts, edges, faces])
            }
        }
    }
}

/// Product foliation `leaf × {sampled transversal points}` with the
/// transverse measure given by positive weights summing to one.
#[derive(Clone, Debug)]
pub struct FoliationModel {
    pub leaf: LeafSpec,
    /// Transversal coordinates `v` of the sampled leaves.
    pub samples: Vec<f64>,
    pub weights: Vec<f64>,
    /// Per-leaf metric scale `s`: the Gram matrix on `k`-cochains is `s^k·I`.
    pub metric_scale: Vec<f64>,
    pub(crate) differentials: Vec<CMat>,
    pub(crate) cells: Vec<Vec<Vec<usize>>>,
    leaves: Vec<CochainComplex>,
}

const WEIGHT_TOL: f64 = 1e-12;

pub fn make_model(leaf: LeafSpec, samples: Vec<f64>, weights: Vec<f64>, metric_scale: Option<Vec<f64>>) -> Result<FoliationModel> {
    let n = leaf.points_per_side();
    if n < 3 {
        return Err(Error::LeafTooSmall(n));
    }
    if samples.is_empty() || samples.len() != weights.len() {
        return Err(Error::BadWeights(format!("{} samples with {} weights", samples.len(), weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::BadWeights(format!("weight {w} is not positive")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    let metric_scale = metric_scale.unwrap_or_else(|| vec![1.0; samples.len()]);
    if metric_scale.len() != samples.len() || metric_scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::ShapeMismatch("metric_scale needs one positive entry per sample".into()));
    }
    let (dims, differentials, cells) = leaf.complex_data();
    let leaves = metric_scale
        .iter()
        .map(|&s| CochainComplex::new(dims.clone(), differentials.clone(), Some(leaf_grams(&dims, s))))
        .collect::<Result<Vec<_>>>()?;
    Ok(FoliationModel { leaf, samples, weights, metric_scale, differentials, cells, leaves })
}

pub(crate) fn leaf_grams(dims: &[usize], scale: f64) -> Vec<CMat> {
    dims.iter().enumerate().map(|(k, &n)| CMat::identity(n, n) * Complex64::new(scale.powi(k as i32), 0.0)).collect()
}

impl FoliationModel {
    /// `n` equally spaced transversal samples with uniform weights.
    pub fn uniform(leaf: LeafSpec, n_samples: usize) -> Result<Self> {
        let samples = (0..n_samples).map(|i| i as f64 / n_samples as f64).collect();
        make_model(leaf, samples, vec![1.0 / n_samples as f64; n_samples], None)
    }

    pub fn leaf_complex(&self, sample: usize) -> &CochainComplex {
        &self.leaves[sample]
    }

    pub fn leaf_count(&self) -> usize {
        self.samples.len()
    }

    pub fn leaf_dims(&self) -> &[usize] {
        self.leaves[0].dims()
    }

    /// `φ` sampled at every vertex of every sampled leaf.
    pub fn sample_phi(&self, phi: &PhiSpec) -> Result<Vec<Vec<f64>>> {
        let coords = self.leaf.vertex_coords();
        match phi {
            PhiSpec::Builtin(name) => {
                let f = builtin_phi(name)?;
                Ok(self.samples.iter().map(|&v| coords.iter().map(|&(h, w)| f(h, w, v)).collect()).collect())
            }
            PhiSpec::Random { seed, modes } => {
                let field = RandomField::new(*seed, *modes);
                Ok(self.samples.iter().map(|&v| coords.iter().map(|&(h, w)| field.eval(h, w, v)).collect()).collect())
            }
            PhiSpec::Sampled(values) => {
                if values.len() != self.leaf_count() || values.iter().any(|row| row.len() != coords.len()) {
                    return Err(Error::ShapeMismatch(format!("phi needs {} rows of {} values", self.leaf_count(), coords.len())));
                }
                Ok(values.clone())
            }
        }
    }
}

type PhiFn = fn(f64, f64, f64) -> f64;

fn builtin_phi(name: &str) -> Result<PhiFn> {
    Ok(match name {
        "cos-h" => |h, _, _| (2.0 * PI * h).cos(),
        "zero" => |_, _, _| 0.0,
        "constant" => |_, _, _| 1.0,
        "cos-h-cos-w" => |h, w, v| (2.0 * PI * h).cos() + 0.5 * (2.0 * PI * (w + v)).cos(),
        other => return Err(Error::Parse(format!("unknown builtin phi '{other}'"))),
    })
}

/// Leafwise function `φ(h, w; v)` on the sampled leaves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiSpec {
    /// One of `cos-h`, `cos-h-cos-w`, `zero`, `constant`.
    Builtin(String),
    /// Seeded trigonometric polynomial with values in `[-1, 1]`.
    Random { seed: u64, modes: usize },
    /// Explicit values, one row per sampled leaf.
    Sampled(Vec<Vec<f64>>),
}

/// Smooth random function: a normalized sum of low-frequency Fourier modes
/// in the leaf coordinates whose phases drift with `v`.
#[derive(Clone, Debug)]
pub struct RandomField {
    terms: Vec<(f64, i32, i32, f64, f64)>,
}

impl RandomField {
    pub fn new(seed: u64, modes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms: Vec<(f64, i32, i32, f64, f64)> = (0..modes.max(1))
            .map(|_| {
                let a = rng.random_range(0.2..1.0);
                let m1 = rng.random_range(-2..=2);
                let m2 = rng.random_range(-2..=2);
                (a, m1, m2, rng.random_range(0.0..2.0 * PI), rng.random_range(-1.0..1.0))
            })
            .collect();
        let total: f64 = terms.iter().map(|t| t.0).sum();
        for t in &mut terms {
            t.0 /= total;
        }
        Self { terms }
    }

    pub fn eval(&self, h: f64, w: f64, v: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, m1, m2, phase, drift)| a * (2.0 * PI * (m1 as f64 * h + m2 as f64 * w) + phase + 2.0 * PI * drift * v).cos())
            .sum()
    }
}

/// On-disk model: leaf, transversal sampling, optional metric, `φ` and τ list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub leaf: LeafSpec,
    pub transversal: Transversal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_scale: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transversal {
    pub samples: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ModelFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build(&self) -> Result<FoliationModel> {
        make_model(self.leaf, self.transversal.samples.clone(), self.transversal.weights.clone(), self.metric_scale.clone())
    }
}

pub(crate) fn diag(values: &[f64]) -> CMat {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodge::{hodge_package, rank_nullity_betti};

    #[test]
    fn circle_model_valid() {
        let m = FoliationModel::uniform(LeafSpec::Circle { n: 16 }, 4).unwrap();
        assert_eq!(m.leaf_count(), 4);
        assert_eq!(hodge_package(m.leaf_complex(0)).betti, vec![1, 1]);
    }

    #[test]
    fn bad_weights() {
        let err = make_model(LeafSpec::Circle { n: 8 }, vec![0.0, 0.5], vec![-0.5, 1.5], None).unwrap_err();
        assert!(matches!(err, Error::BadWeights(_)));
        let err = make_model(LeafSpec::Circle { n: 8 }, vec![0.0, 0.5], vec![0.5, 0.6], None).unwrap_err();
        assert!(matches!(err, Error::BadWeights(_)));
        assert_eq!(make_model(LeafSpec::Circle { n: 2 }, vec![0.0], vec![1.0], None).unwrap_err(), Error::LeafTooSmall(2));
    }

    #[test]
    fn torus_leaf_betti() {
        let m = FoliationModel::uniform(LeafSpec::Torus { n: 8 }, 1).unwrap();
        let c = m.leaf_complex(0);
        assert_eq!(hodge_package(c).betti, vec![1, 2, 1]);
        assert_eq!(rank_nullity_betti(c), vec![1, 2, 1]);
    }

    #[test]
    fn random_field_bounded() {
        let f = RandomField::new(5, 4);
        for i in 0..50 {
            let x = i as f64 / 50.0;
            assert!(f.eval(x, 1.0 - x, 0.3).abs() <= 1.0 + 1e-12);
        }
        assert_eq!(f.eval(0.1, 0.2, 0.3), RandomField::new(5, 4).eval(0.1, 0.2, 0.3));
    }

    #[test]
    fn model_file_parses() {
        let text = r#"{"leaf":{"kind":"torus","n":6},"transversal":{"samples":[0.0,0.5],"weights":[0.3,0.7]},"phi":{"random":{"seed":1,"modes":3}},"tau":[0,1]}"#;
        let f: ModelFile = serde_json::from_str(text).unwrap();
        let m = f.build().unwrap();
        let phi = m.sample_phi(f.phi.as_ref().unwrap()).unwrap();
        assert_eq!(phi.len(), 2);
        assert_eq!(phi[0].len(), 36);
    }
}
