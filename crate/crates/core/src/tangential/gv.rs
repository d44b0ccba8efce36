//! Godbillon–Vey integral of a codimension-one plane field `ker ω` on the
//! flat torus `T³ = [0,1)³`, with periodic spectral derivatives.
//!
//! Forms are identified with vector fields: `ω ↔ (P, Q, R)`, `dω ↔ curl ω`,
//! `ω∧dω ↔ ω·curl ω`, `θ∧ω ↔ θ×ω` and `θ∧dθ ↔ θ·curl θ`.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sup |ω·curl ω|`.
pub const INTEGRABILITY_TOL: f64 = 1e-8;
/// `|ω|` below this anywhere on the grid is treated as vanishing.
pub const VANISHING_TOL: f64 = 1e-8;

/// Scalar field on an `n³` grid, index `(i·n + j)·n + k` for `(x_i, y_j, z_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub n: usize,
    pub values: Vec<f64>,
}

impl Field {
    pub fn from_fn(n: usize, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let h = 1.0 / n as f64;
        let mut values = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    values.push(f(i as f64 * h, j as f64 * h, k as f64 * h));
                }
            }
        }
        Self { n, values }
    }

    fn zip(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self { n: self.n, values: self.values.iter().zip(&o.values).map(|(a, b)| f(*a, *b)).collect() }
    }

    fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

type Vector = [Field; 3];

struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Spectral {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    /// `∂f/∂x_axis` by exact differentiation of the trigonometric interpolant.
    fn derivative(&self, f: &Field, axis: usize) -> Field {
        let n = self.n;
        let stride = [n * n, n, 1][axis];
        let mut out = vec![0.0; f.values.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for base in 0..n * n * n {
            // visit each line once, at its first point
            if !(base / stride).is_multiple_of(n) {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = Complex64::new(f.values[base + t * stride], 0.0);
            }
            self.forward.process(&mut line);
            for (m, c) in line.iter_mut().enumerate() {
                let freq = if 2 * m < n {
                    m as f64
                } else if 2 * m == n {
                    0.0
                } else {
                    m as f64 - n as f64
                };
                *c *= Complex64::new(0.0, 2.0 * PI * freq / n as f64);
            }
            self.inverse.process(&mut line);
            for (t, c) in line.iter().enumerate() {
                out[base + t * stride] = c.re;
            }
        }
        Field { n, values: out }
    }

    fn curl(&self, w: &Vector) -> Vector {
        let d = |f: &Field, a: usize| self.derivative(f, a);
        [
            d(&w[2], 1).zip(&d(&w[1], 2), |a, b| a - b),
            d(&w[0], 2).zip(&d(&w[2], 0), |a, b| a - b),
            d(&w[1], 0).zip(&d(&w[0], 1), |a, b| a - b),
        ]
    }
}

fn dot(a: &Vector, b: &Vector) -> Field {
    let n = a[0].n;
    Field { n, values: (0..a[0].values.len()).map(|i| (0..3).map(|c| a[c].values[i] * b[c].values[i]).sum()).collect() }
}

fn cross(a: &Vector, b: &Vector) -> Vector {
    let at = |c: usize, i: usize| a[c].values[i];
    let bt = |c: usize, i: usize| b[c].values[i];
    let n = a[0].n;
    let len = a[0].values.len();
    let comp = |x: usize, y: usize| Field { n, values: (0..len).map(|i| at(x, i) * bt(y, i) - at(y, i) * bt(x, i)).collect() };
    [comp(1, 2), comp(2, 0), comp(0, 1)]
}

/// The defining 1-form `ω = P dx + Q dy + R dz`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaSpec {
    /// `dz`, `dz+sin(2piz)dx`, `(2+cos(2pix))dz` or `dz+x dy`.
    Builtin(String),
    /// Sampled coefficients on an `n³` grid.
    Sampled { n: usize, p: Vec<f64>, q: Vec<f64>, r: Vec<f64> },
}

type Coeffs = [fn(f64, f64, f64) -> f64; 3];

fn builtin_omega(name: &str) -> Result<Coeffs> {
    Ok(match name {
        "dz" => [|_, _, _| 0.0, |_, _, _| 0.0, |_, _, _| 1.0],
        "dz+sin(2piz)dx" => [|_, _, z| (2.0 * PI * z).sin(), |_, _, _| 0.0, |_, _, _| 1.0],
        "dz+x dy" => [|_, _, _| 0.0, |x, _, _| x, |_, _, _| 1.0],
        "(2+cos(2pix))dz" => [|_, _, _| 0.0, |_, _, _| 0.0, |x, _, _| 2.0 + (2.0 * PI * x).cos()],
        other => return Err(Error::Parse(format!("unknown builtin ω '{other}'"))),
    })
}

impl OmegaSpec {
    pub fn builtin(name: &str) -> Self {
        Self::Builtin(name.to_string())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Samples `ω` on an `n³` grid; sampled inputs must already be `n³`.
    pub fn sample(&self, n: usize) -> Result<Vector> {
        match self {
            Self::Builtin(name) => {
                let [p, q, r] = builtin_omega(name)?;
                Ok([Field::from_fn(n, p), Field::from_fn(n, q), Field::from_fn(n, r)])
            }
            Self::Sampled { n: m, p, q, r } => {
                if *m != n {
                    return Err(Error::ShapeMismatch(format!("ω is sampled on {m}³, asked for {n}³")));
                }
                let len = n * n * n;
                if p.len() != len || q.len() != len || r.len() != len {
                    return Err(Error::ShapeMismatch(format!("each coefficient array needs {len} values")));
                }
                Ok([Field { n, values: p.clone() }, Field { n, values: q.clone() }, Field { n, values: r.clone() }])
            }
        }
    }

    /// Native resolution for sampled inputs.
    pub fn native_n(&self) -> Option<usize> {
        match self {
            Self::Sampled { n, .. } => Some(*n),
            Self::Builtin(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GvReport {
    pub n: usize,
    pub min_omega_norm: f64,
    /// `sup |ω∧dω|`.
    pub integrability_residual: f64,
    /// `sup |dω − θ∧ω|` for the computed `θ`.
    pub theta_residual: f64,
    /// `∫ θ∧dθ`.
    pub gv: f64,
    /// `∫ θ'∧dθ'` for `θ' = θ + h·ω`, `h = cos(2πx) + ½ sin(2πy)`.
    pub gv_gauge: f64,
    pub gauge_residual: f64,
}

fn gauge_function(x: f64, y: f64, _z: f64) -> f64 {
    (2.0 * PI * x).cos() + 0.5 * (2.0 * PI * y).sin()
}

/// `θ = (ω × curl ω)/|ω|²` solves `dω = θ∧ω` with minimal norm at every point.
pub fn godbillon_vey(omega: &OmegaSpec, n: usize) -> Result<GvReport> {
    if n < 8 {
        return Err(Error::GridTooCoarse(format!("Godbillon–Vey needs at least 8³ points, got {n}³")));
    }
    let w = omega.sample(n)?;
    let sp = Spectral::new(n);
    let norm2 = dot(&w, &w);
    let min_omega_norm = norm2.values.iter().fold(f64::INFINITY, |m, x| m.min(x.sqrt()));
    if min_omega_norm < VANISHING_TOL {
        return Err(Error::VanishingOmega { min_norm: min_omega_norm });
    }
    let c = sp.curl(&w);
    let integrability_residual = dot(&w, &c).sup();
    if integrability_residual > INTEGRABILITY_TOL {
        return Err(Error::NotIntegrable { residual: integrability_residual });
    }
    let wc = cross(&w, &c);
    let theta: Vector = wc.map(|f| f.zip(&norm2, |a, b| a / b));
    let tw = cross(&theta, &w);
    let theta_residual = (0..3).map(|i| c[i].zip(&tw[i], |a, b| a - b).sup()).fold(0.0, f64::max);
    let gv = dot(&theta, &sp.curl(&theta)).mean();
    let h = Field::from_fn(n, gauge_function);
    let shifted: Vector = [0, 1, 2].map(|i| theta[i].zip(&w[i].zip(&h, |a, b| a * b), |a, b| a + b));
    let gv_gauge = dot(&shifted, &sp.curl(&shifted)).mean();
    Ok(GvReport { n, min_omega_norm, integrability_residual, theta_residual, gv, gv_gauge, gauge_residual: (gv - gv_gauge).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_derivative_exact_on_trig() {
        let n = 16;
        let sp = Spectral::new(n);
        let f = Field::from_fn(n, |x, y, z| (2.0 * PI * x).sin() * (4.0 * PI * y).cos() + (6.0 * PI * z).sin());
        let dy = sp.derivative(&f, 1);
        let exact = Field::from_fn(n, |x, y, _| -4.0 * PI * (2.0 * PI * x).sin() * (4.0 * PI * y).sin());
        assert!(dy.zip(&exact, |a, b| a - b).sup() < 1e-11);
        let dz = sp.derivative(&f, 2);
        let exact = Field::from_fn(n, |_, _, z| 6.0 * PI * (6.0 * PI * z).cos());
        assert!(dz.zip(&exact, |a, b| a - b).sup() < 1e-11);
    }

    #[test]
    fn dz_has_zero_gv() {
        let r = godbillon_vey(&OmegaSpec::builtin("dz"), 8).unwrap();
        assert_eq!(r.gv, 0.0);
        assert_eq!(r.integrability_residual, 0.0);
    }

    #[test]
    fn sine_example() {
        let a = godbillon_vey(&OmegaSpec::builtin("dz+sin(2piz)dx"), 16).unwrap();
        let b = godbillon_vey(&OmegaSpec::builtin("dz+sin(2piz)dx"), 32).unwrap();
        assert!(a.integrability_residual < 1e-8);
        assert!(a.theta_residual < 1e-9, "{}", a.theta_residual);
        assert!(a.gv.abs() < 1e-6 && a.gauge_residual < 1e-6);
        assert!((a.gv - b.gv).abs() < 1e-6);
    }

    #[test]
    fn contact_form_not_integrable() {
        assert!(matches!(godbillon_vey(&OmegaSpec::builtin("dz+x dy"), 16), Err(Error::NotIntegrable { .. })));
    }

    #[test]
    fn vanishing_and_coarse() {
        let n = 8;
        let zero = OmegaSpec::Sampled { n, p: vec![0.0; 512], q: vec![0.0; 512], r: vec![0.0; 512] };
        assert!(matches!(godbillon_vey(&zero, 8), Err(Error::VanishingOmega { .. })));
        assert!(matches!(godbillon_vey(&OmegaSpec::builtin("dz"), 4), Err(Error::GridTooCoarse(_))));
    }
}
