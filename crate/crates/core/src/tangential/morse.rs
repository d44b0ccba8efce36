//! Tangential singularities of a function on a chart `(h, v)` of a
//! foliation with one leaf direction `h` and one transverse direction `v`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Functions with analytic leaf derivatives up to third order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorseFunction {
    /// `cos(2πh)` on `[0,1) × [0,1)`, periodic in `h`.
    CosH,
    /// `h³/3 − v·h` on `[−1,1] × [−½,1]`: the birth–death normal form.
    CubicBd,
    /// `cos(2πh) + a·sin(2πv)·sin(2πh)`, periodic in `h`.
    TiltedCos {
        a: f64,
    },
    Constant {
        c: f64,
    },
}

impl MorseFunction {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "cos-h" => Self::CosH,
            "cubic-bd" => Self::CubicBd,
            "tilted-cos" => Self::TiltedCos { a: 0.5 },
            "constant" => Self::Constant { c: 1.0 },
            other => return Err(Error::Parse(format!("unknown Morse function '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::CosH => "cos-h",
            Self::CubicBd => "cubic-bd",
            Self::TiltedCos { .. } => "tilted-cos",
            Self::Constant { .. } => "constant",
        }
    }

    /// `((h_min, h_max), (v_min, v_max))`.
    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        match self {
            Self::CubicBd => ((-1.0, 1.0), (-0.5, 1.0)),
            _ => ((0.0, 1.0), (0.0, 1.0)),
        }
    }

    pub fn periodic_h(&self) -> bool {
        !matches!(self, Self::CubicBd)
    }

    pub fn phi(&self, h: f64, v: f64) -> f64 {
        let t = 2.0 * PI * h;
        match *self {
            Self::CosH => t.cos(),
            Self::CubicBd => h * h * h / 3.0 - v * h,
            Self::TiltedCos { a } => t.cos() + a * (2.0 * PI * v).sin() * t.sin(),
            Self::Constant { c } => c,
        }
    }

    /// `(φ_h, φ_hh, φ_hv, φ_hhh, φ_hhv)`.
    pub fn derivatives(&self, h: f64, v: f64) -> [f64; 5] {
        let w = 2.0 * PI;
        let t = w * h;
        match *self {
            Self::CosH => [-w * t.sin(), -w * w * t.cos(), 0.0, w.powi(3) * t.sin(), 0.0],
            Self::CubicBd => [h * h - v, 2.0 * h, -1.0, 2.0, 0.0],
            Self::TiltedCos { a } => {
                let (s, c) = ((w * v).sin(), (w * v).cos());
                [
                    -w * t.sin() + a * s * w * t.cos(),
                    -w * w * t.cos() - a * s * w * w * t.sin(),
                    a * w * c * w * t.cos(),
                    w.powi(3) * t.sin() - a * s * w.powi(3) * t.cos(),
                    -a * w * c * w * w * t.sin(),
                ]
            }
            Self::Constant { .. } => [0.0; 5],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub nh: usize,
    pub nv: usize,
    /// Bisection steps allowed per bracket.
    pub max_refine: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { nh: 64, nv: 16, max_refine: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Morse,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub h: f64,
    pub v: f64,
    pub leaf_gradient_norm: f64,
    /// `d²_F φ` (a 1×1 matrix for one leaf direction).
    pub tangential_hessian: f64,
    pub det: f64,
    /// Number of negative Hessian eigenvalues.
    pub index: usize,
    pub classification: Classification,
    /// Birth–death test: the Jacobian of `(d_F φ, det d²_F φ)` has rank ≥ 1
    /// (degenerate points only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub birth_death_rank_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<[[f64; 2]; 2]>,
    /// At Morse points: the singular set's tangent `(−φ_hv, φ_hh)` has a
    /// nonzero transverse component.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transverse: Option<bool>,
    pub family: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseScanReport {
    pub function: String,
    pub grid: ScanGrid,
    pub cell_width: f64,
    pub singularities: Vec<Singularity>,
    pub families: usize,
    pub morse_count: usize,
    pub degenerate_count: usize,
    /// `index_counts[i]` = number of Morse points of index `i`.
    pub index_counts: Vec<usize>,
    /// False when some transversal row is singular along the whole leaf.
    pub almost_morse: bool,
    /// Transverse measure (uniform over rows) of the rows carrying a
    /// degenerate point.
    pub degenerate_weight: f64,
}

struct Row<'a> {
    f: &'a MorseFunction,
    v: f64,
    hs: Vec<f64>,
    periodic: bool,
    width: f64,
}

impl Row<'_> {
    fn intervals(&self) -> Vec<(f64, f64)> {
        let n = self.hs.len();
        let mut out: Vec<(f64, f64)> = self.hs.windows(2).map(|w| (w[0], w[1])).collect();
        if self.periodic {
            out.push((self.hs[n - 1], self.hs[0] + self.width));
        }
        out
    }

    fn bisect(&self, which: usize, mut a: f64, mut b: f64, max_refine: usize) -> Result<f64> {
        let g = |h: f64| self.f.derivatives(h, self.v)[which];
        let mut fa = g(a);
        for _ in 0..max_refine {
            let m = 0.5 * (a + b);
            if m <= a || m >= b || b - a < 1e-15 {
                return Ok(m);
            }
            let fm = g(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if (fa < 0.0) == (fm < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        if b - a < 1e-12 {
            Ok(0.5 * (a + b))
        } else {
            Err(Error::GridTooCoarse(format!("bracket [{a}, {b}] at v = {} unresolved", self.v)))
        }
    }

    fn wrap(&self, h: f64) -> f64 {
        if self.periodic && h >= self.hs[0] + self.width {
            h - self.width
        } else {
            h
        }
    }

    fn distance(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        if self.periodic {
            d.min(self.width - d)
        } else {
            d
        }
    }

    /// Zeros of `φ_h` along the row, including tangential double zeros.
    fn zeros(&self, grad_tol: f64, max_refine: usize) -> Result<Vec<f64>> {
        let mut roots: Vec<f64> = Vec::new();
        let d = |h: f64, i: usize| self.f.derivatives(h, self.v)[i];
        for &h in &self.hs {
            if d(h, 0) == 0.0 {
                roots.push(h);
            }
        }
        for (a, b) in self.intervals() {
            let (fa, fb) = (d(a, 0), d(b, 0));
            if fa * fb < 0.0 {
                roots.push(self.wrap(self.bisect(0, a, b, max_refine)?));
            }
            // double zeros: φ_hh changes sign where φ_h touches zero
            let (ga, gb) = (d(a, 1), d(b, 1));
            if ga * gb < 0.0 {
                let h = self.wrap(self.bisect(1, a, b, max_refine)?);
                if d(h, 0).abs() <= grad_tol {
                    roots.push(h);
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::new();
        for r in roots {
            if out.iter().all(|&s| self.distance(r, s) > 1e-9) {
                out.push(r);
            }
        }
        Ok(out)
    }
}

fn rank2(j: &[[f64; 2]; 2], tol: f64) -> usize {
    let m = nalgebra::Matrix2::new(j[0][0], j[0][1], j[1][0], j[1][1]);
    m.singular_values().iter().filter(|&&s| s > tol).count()
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Follows a zero of `φ_h` from `(h, v_from)` to the row `v_to` by
/// predictor–corrector continuation; `None` if the branch is lost.
fn track(f: &MorseFunction, mut h: f64, v_from: f64, v_to: f64, grad_tol: f64) -> Option<f64> {
    const STEPS: usize = 32;
    for s in 1..=STEPS {
        let v_prev = v_from + (v_to - v_from) * (s - 1) as f64 / STEPS as f64;
        let v = v_from + (v_to - v_from) * s as f64 / STEPS as f64;
        let d = f.derivatives(h, v_prev);
        if d[1].abs() > 1e-12 {
            let predicted = h - d[2] / d[1] * (v - v_prev);
            if predicted.is_finite() && (predicted - h).abs() < 0.25 {
                h = predicted;
            }
        }
        for _ in 0..60 {
            let d = f.derivatives(h, v);
            if d[0].abs() <= grad_tol || d[1] == 0.0 {
                break;
            }
            let step = d[0] / d[1];
            h -= step.clamp(-0.05, 0.05);
        }
    }
    let d = f.derivatives(h, v_to);
    (d[0].abs() <= 1e3 * grad_tol).then_some(h)
}

/// Locates and classifies the zeros of `d_F φ` on a `nh × nv` grid.
pub fn morse_scan(f: &MorseFunction, grid: &ScanGrid) -> Result<MorseScanReport> {
    if grid.nh < 8 || grid.nv < 1 {
        return Err(Error::GridTooCoarse(format!("need nh ≥ 8 and nv ≥ 1, got {}×{}", grid.nh, grid.nv)));
    }
    let ((h0, h1), (v0, v1)) = f.domain();
    let periodic = f.periodic_h();
    let width = h1 - h0;
    let hs: Vec<f64> = if periodic {
        (0..grid.nh).map(|i| h0 + width * i as f64 / grid.nh as f64).collect()
    } else {
        (0..grid.nh).map(|i| h0 + width * i as f64 / (grid.nh - 1) as f64).collect()
    };
    let vs: Vec<f64> =
        if grid.nv == 1 { vec![v0] } else { (0..grid.nv).map(|j| v0 + (v1 - v0) * j as f64 / (grid.nv - 1) as f64).collect() };
    let cell_width = if periodic { width / grid.nh as f64 } else { width / (grid.nh - 1) as f64 };

    // scales for the relative tolerances
    let mut grad_scale: f64 = 0.0;
    let mut hess_scale: f64 = 0.0;
    for &v in &vs {
        for &h in &hs {
            let d = f.derivatives(h, v);
            grad_scale = grad_scale.max(d[0].abs());
            hess_scale = hess_scale.max(d[1].abs());
        }
    }
    let grad_tol = 1e-9 * grad_scale.max(1.0);
    let det_tol = 1e-8 * hess_scale.max(1.0);

    let mut points: Vec<(usize, f64)> = Vec::new();
    let mut flat_rows = 0usize;
    let mut rows_with_degenerate = vec![false; vs.len()];
    for (j, &v) in vs.iter().enumerate() {
        let row = Row { f, v, hs: hs.clone(), periodic, width };
        if hs.iter().all(|&h| f.derivatives(h, v)[0].abs() <= grad_tol) {
            flat_rows += 1;
            points.extend(hs.iter().map(|&h| (j, h)));
            continue;
        }
        points.extend(row.zeros(grad_tol, grid.max_refine)?.into_iter().map(|h| (j, h)));
    }

    let mut singularities: Vec<Singularity> = points
        .iter()
        .map(|&(j, h)| {
            let v = vs[j];
            let d = f.derivatives(h, v);
            let det = d[1];
            let morse = det.abs() > det_tol;
            let (birth_death_rank_ok, jacobian, transverse) = if morse {
                let x = (-d[2], d[1]);
                (None, None, Some(x.1.abs() > 1e-8 * x.0.hypot(x.1)))
            } else {
                let jac = [[d[1], d[2]], [d[3], d[4]]];
                let tol = 1e-8 * hess_scale.max(1.0);
                (Some(rank2(&jac, tol) >= 1), Some(jac), None)
            };
            if !morse {
                rows_with_degenerate[j] = true;
            }
            Singularity {
                h,
                v,
                leaf_gradient_norm: d[0].abs(),
                tangential_hessian: d[1],
                det,
                index: usize::from(morse && d[1] < 0.0),
                classification: if morse { Classification::Morse } else { Classification::Degenerate },
                birth_death_rank_ok,
                jacobian,
                transverse,
                family: 0,
            }
        })
        .collect();

    // link points on adjacent rows into families
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let link = 2.5 * cell_width;
    let row_dist = |a: f64, b: f64| {
        let d = (a - b).abs();
        if periodic {
            d.min(width - d)
        } else {
            d
        }
    };
    let mut start = 0;
    while start < n {
        let j = points[start].0;
        let end = (start..n).find(|&i| points[i].0 != j).unwrap_or(n);
        let next_end = (end..n).find(|&i| points[i].0 != j + 1).unwrap_or(n);
        for a in start..end {
            for b in end..next_end {
                let (va, vb) = (vs[points[a].0], vs[points[b].0]);
                let up = track(f, points[a].1, va, vb, grad_tol);
                let down = track(f, points[b].1, vb, va, grad_tol);
                let connected = match (up, down) {
                    (None, None) => row_dist(points[a].1, points[b].1) <= link,
                    _ => up.is_some_and(|h| row_dist(h, points[b].1) <= link) || down.is_some_and(|h| row_dist(h, points[a].1) <= link),
                };
                if connected {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
            if a + 1 < end
                && row_dist(points[a].1, points[a + 1].1) <= 1.01 * cell_width
                && singularities[a].classification == Classification::Degenerate
            {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, a + 1));
                parent[ra] = rb;
            }
        }
        start = end;
    }
    let mut labels: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let id = match labels.iter().position(|&x| x == r) {
            Some(p) => p,
            None => {
                labels.push(r);
                labels.len() - 1
            }
        };
        singularities[i].family = id;
    }

    let morse_count = singularities.iter().filter(|s| s.classification == Classification::Morse).count();
    let mut index_counts = vec![0usize; 2];
    for s in singularities.iter().filter(|s| s.classification == Classification::Morse) {
        index_counts[s.index] += 1;
    }
    Ok(MorseScanReport {
        function: f.name().to_string(),
        grid: *grid,
        cell_width,
        families: labels.len(),
        morse_count,
        degenerate_count: n - morse_count,
        index_counts,
        almost_morse: flat_rows == 0,
        degenerate_weight: rows_with_degenerate.iter().filter(|&&x| x).count() as f64 / vs.len() as f64,
        singularities,
    })
}
