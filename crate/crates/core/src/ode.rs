//! Adaptive Dormand–Prince 5(4) integration with its fourth-order dense output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated when `None`.
    pub h0: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-10,
            h0: None,
            h_min: 1e-12,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            ..OdeOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.h_min > 0.0) {
            return Err(Error::Validation("ODE tolerances and h_min must be positive".into()));
        }
        Ok(())
    }
}

/// Why an integration ended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Stop {
    Completed,
    /// The guard rejected the state at `t`.
    Guard { t: f64, reason: String },
    /// The right-hand side was undefined or the step size collapsed at `t`.
    StepFailure { t: f64, reason: String },
}

/// Accepted steps with derivatives and, per step, the extra coefficient of
/// the continuous extension.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub dys: Vec<Vec<f64>>,
    /// `dense[i]` belongs to the step from `ts[i]` to `ts[i + 1]`. It is
    /// unchanged when a step is reversed; an empty entry gives cubic Hermite.
    pub dense: Vec<Vec<f64>>,
    pub stop: Stop,
    pub rejected: usize,
}

impl Trajectory {
    pub fn t_final(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// Range covered, as `(min, max)`.
    pub fn span(&self) -> (f64, f64) {
        let (a, b) = (self.ts[0], self.t_final());
        (a.min(b), a.max(b))
    }

    /// Dense output; `None` outside the covered range.
    ///
    /// With `θ = (t − t₀)/h`, `Δ = y₁ − y₀`, `A = h·y₀′ − Δ` and
    /// `B = 2Δ − h·y₀′ − h·y₁′`, the interpolant is
    /// `(1−θ)y₀ + θy₁ + θ(1−θ)(A + θB + θ(1−θ)r)`, which is symmetric under
    /// reversing the step.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let (lo, hi) = self.span();
        if !(lo..=hi).contains(&t) {
            return None;
        }
        if self.ts.len() == 1 {
            return Some(self.ys[0].clone());
        }
        let forward = self.ts[1] > self.ts[0];
        let pos = if forward {
            self.ts.partition_point(|&s| s <= t)
        } else {
            self.ts.partition_point(|&s| s >= t)
        };
        let i = pos.clamp(1, self.ts.len() - 1) - 1;
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let th = (t - t0) / h;
        let r = self.dense.get(i).filter(|r| !r.is_empty());
        Some(
            (0..self.ys[i].len())
                .map(|k| {
                    let (y0, y1) = (self.ys[i][k], self.ys[i + 1][k]);
                    let d = y1 - y0;
                    let a = h * self.dys[i][k] - d;
                    let b = 2.0 * d - h * self.dys[i][k] - h * self.dys[i + 1][k];
                    let r = r.map_or(0.0, |r| r[k]);
                    (1.0 - th) * y0 + th * y1 + th * (1.0 - th) * (a + th * b + th * (1.0 - th) * r)
                })
                .collect(),
        )
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (the last row of `A`, FSAL).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
/// Continuous-extension weights (Hairer's `dopri5`).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `f` returns `None` where the field is undefined; the step is then
/// retried smaller. `guard` is checked on every accepted state and ends the
/// run with its message.
pub fn dopri5<F, G>(f: F, t0: f64, y0: &[f64], t_end: f64, opts: &OdeOptions, guard: G) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Option<Vec<f64>>,
    G: Fn(f64, &[f64]) -> Option<String>,
{
    opts.validate()?;
    let n = y0.len();
    let k0 = f(t0, y0).ok_or_else(|| Error::Numeric(format!("vector field undefined at the initial point t = {t0}")))?;
    if let Some(reason) = guard(t0, y0) {
        return Err(Error::Numeric(format!("initial state rejected: {reason}")));
    }
    let mut traj = Trajectory {
        ts: vec![t0],
        ys: vec![y0.to_vec()],
        dys: vec![k0.clone()],
        dense: Vec::new(),
        stop: Stop::Completed,
        rejected: 0,
    };
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(traj);
    }
    let dir = span.signum();
    let scale = |y: &[f64], k: usize| opts.atol + opts.rtol * y[k].abs();
    let mut h = match opts.h0 {
        Some(h) => h.abs(),
        None => {
            let d0 = (0..n).map(|k| (y0[k] / scale(y0, k)).powi(2)).sum::<f64>().sqrt();
            let d1 = (0..n).map(|k| (k0[k] / scale(y0, k)).powi(2)).sum::<f64>().sqrt();
            if d0 < 1e-5 || d1 < 1e-5 {
                1e-6
            } else {
                0.01 * d0 / d1
            }
        }
    }
    .min(span.abs());
    let (mut t, mut y, mut k1) = (t0, y0.to_vec(), k0);
    let mut ks = vec![vec![0.0; n]; 7];
    for _ in 0..opts.max_steps {
        if (t_end - t) * dir <= 0.0 {
            return Ok(traj);
        }
        let last = (t + dir * h - t_end) * dir >= 0.0;
        let hs = if last { t_end - t } else { dir * h };
        ks[0].clone_from(&k1);
        let mut defined = true;
        let mut ynew = vec![0.0; n];
        for stage in 1..7 {
            let yi: Vec<f64> = (0..n)
                .map(|k| y[k] + hs * (0..stage).map(|j| A[stage][j] * ks[j][k]).sum::<f64>())
                .collect();
            match f(t + C[stage] * hs, &yi) {
                Some(v) => ks[stage] = v,
                None => {
                    defined = false;
                    break;
                }
            }
            if stage == 6 {
                ynew = yi;
            }
        }
        let err = if defined {
            let e2 = (0..n)
                .map(|k| {
                    let e = hs * (0..7).map(|j| (B5[j] - B4[j]) * ks[j][k]).sum::<f64>();
                    let sc = opts.atol + opts.rtol * y[k].abs().max(ynew[k].abs());
                    (e / sc).powi(2)
                })
                .sum::<f64>()
                / n as f64;
            e2.sqrt()
        } else {
            f64::INFINITY
        };
        if err <= 1.0 {
            let tn = if last { t_end } else { t + hs };
            if let Some(reason) = guard(tn, &ynew) {
                traj.stop = Stop::Guard { t: tn, reason };
                return Ok(traj);
            }
            t = tn;
            y = ynew;
            k1 = ks[6].clone();
            traj.ts.push(t);
            traj.ys.push(y.clone());
            traj.dys.push(k1.clone());
            traj.dense.push((0..n).map(|k| hs * (0..7).map(|j| D[j] * ks[j][k]).sum::<f64>()).collect());
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = hs.abs() * fac;
        } else {
            traj.rejected += 1;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h = hs.abs() * fac;
            if h < opts.h_min {
                traj.stop = Stop::StepFailure {
                    t,
                    reason: if defined {
                        format!("step size fell below {:e}", opts.h_min)
                    } else {
                        "vector field undefined ahead of this point".into()
                    },
                };
                return Ok(traj);
            }
        }
    }
    traj.stop = Stop::StepFailure {
        t,
        reason: format!("exceeded {} steps", opts.max_steps),
    };
    Ok(traj)
}
