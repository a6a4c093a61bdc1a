//! Minimization over rank-1 projective qubit measurements.
//!
//! A coarse `(theta, phi)` grid locates the basin and a two-dimensional downhill
//! simplex polishes the best grid point. Everything is deterministic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::tensor::{ComplexMatrix, C64};

/// Projective qubit measurement `{|v><v|, I - |v><v|}` with
/// `|v> = (cos(theta/2), e^{i phi} sin(theta/2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitMeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl QubitMeasurementBasis {
    pub const COMPUTATIONAL: Self = Self {
        theta: 0.0,
        phi: 0.0,
    };

    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }.canonical()
    }

    /// Maps the angles into `theta in [0, pi]`, `phi in [0, 2pi)` without changing
    /// the projector `|v><v|`.
    pub fn canonical(self) -> Self {
        let mut theta = self.theta.rem_euclid(2.0 * PI);
        let mut phi = self.phi;
        if theta > PI {
            // cos(t/2) < 0 region: |v> -> -|v'> with t' = 2pi - t, phi' = phi + pi
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        Self {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        }
    }

    /// The two orthonormal outcome vectors.
    pub fn vectors(&self) -> [[C64; 2]; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        [[C64::new(c, 0.0), e * s], [-e.conj() * s, C64::new(c, 0.0)]]
    }

    pub fn projectors(&self) -> [ComplexMatrix; 2] {
        let [v0, v1] = self.vectors();
        [ComplexMatrix::outer(&v0), ComplexMatrix::outer(&v1)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// Refinement stops once the simplex diameter drops below this.
    pub simplex_tol: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid_theta: 64,
            grid_phi: 128,
            simplex_tol: 1e-7,
            max_iterations: 5_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub grid_best: f64,
    pub refined_best: f64,
    pub theta: f64,
    pub phi: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerOutcome {
    pub basis: QubitMeasurementBasis,
    pub value: f64,
    pub report: OptimizerReport,
}

/// Grid search followed by Nelder-Mead refinement. The returned value never exceeds
/// the best grid value.
pub fn optimize_qubit_measurement<F>(objective: F, settings: &OptimizerSettings) -> OptimizerOutcome
where
    F: Fn(QubitMeasurementBasis) -> f64,
{
    let eval = |p: [f64; 2]| {
        objective(QubitMeasurementBasis {
            theta: p[0],
            phi: p[1],
        })
    };

    let nt = settings.grid_theta.max(1);
    let np = settings.grid_phi.max(1);
    let d_theta = if nt > 1 { PI / (nt - 1) as f64 } else { PI };
    let d_phi = 2.0 * PI / np as f64;

    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..nt {
        let theta = if nt > 1 { i as f64 * d_theta } else { 0.0 };
        for j in 0..np {
            let p = [theta, j as f64 * d_phi];
            let v = eval(p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    let grid_best = best.1;

    let (point, value, iterations) = nelder_mead(
        eval,
        best.0,
        best.1,
        [0.5 * d_theta, 0.5 * d_phi],
        settings.simplex_tol,
        settings.max_iterations,
    );
    let basis = QubitMeasurementBasis {
        theta: point[0],
        phi: point[1],
    }
    .canonical();
    OptimizerOutcome {
        basis,
        value,
        report: OptimizerReport {
            grid_best,
            refined_best: value,
            theta: basis.theta,
            phi: basis.phi,
            iterations,
        },
    }
}

type Vertex = ([f64; 2], f64);

fn diameter(s: &[Vertex; 3]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..3 {
        for j in i + 1..3 {
            let dx = s[i].0[0] - s[j].0[0];
            let dy = s[i].0[1] - s[j].0[1];
            d = d.max((dx * dx + dy * dy).sqrt());
        }
    }
    d
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2) on
/// an axis-aligned initial simplex.
fn nelder_mead<F>(
    f: F,
    start: [f64; 2],
    f_start: f64,
    step: [f64; 2],
    tol: f64,
    max_iterations: usize,
) -> ([f64; 2], f64, usize)
where
    F: Fn([f64; 2]) -> f64,
{
    let p1 = [start[0] + step[0], start[1]];
    let p2 = [start[0], start[1] + step[1]];
    let mut s: [Vertex; 3] = [(start, f_start), (p1, f(p1)), (p2, f(p2))];
    let mut iterations = 0;

    while iterations < max_iterations {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&s) < tol {
            break;
        }
        iterations += 1;
        let centroid = lerp(s[0].0, s[1].0, 0.5);
        let worst = s[2];

        let xr = lerp(centroid, worst.0, -1.0);
        let fr = f(xr);
        if fr < s[0].1 {
            let xe = lerp(centroid, worst.0, -2.0);
            let fe = f(xe);
            s[2] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < s[1].1 {
            s[2] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = lerp(centroid, xr, 0.5);
            (xc, f(xc))
        } else {
            let xc = lerp(centroid, worst.0, 0.5);
            (xc, f(xc))
        };
        if fc <= fr.min(worst.1) {
            s[2] = (xc, fc);
            continue;
        }
        let best = s[0].0;
        for v in s.iter_mut().skip(1) {
            let x = lerp(best, v.0, 0.5);
            *v = (x, f(x));
        }
    }
    s.sort_by(|a, b| a.1.total_cmp(&b.1));
    (s[0].0, s[0].1, iterations)
}
