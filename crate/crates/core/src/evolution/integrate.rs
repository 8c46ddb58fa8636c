//! Explicit integrators for `y' = f(t, y)`: forward Euler and the
//! Dormand–Prince 5(4) embedded pair with PI step-size control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OdePoint {
    pub t: f64,
    pub y: Vec<f64>,
    /// Size of the step that produced this point.
    pub step: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Accepted points (the initial point excluded) plus the abort reason, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub points: Vec<OdePoint>,
    pub failure: Option<Error>,
    pub stats: IntegrationStats,
}

impl Integration {
    pub fn into_result(self) -> Result<Vec<OdePoint>> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self.points),
        }
    }

    pub fn final_y(&self) -> Option<&[f64]> {
        self.points.last().map(|p| p.y.as_slice())
    }
}

fn check_finite(v: &[f64], step: usize, t: f64) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration {
            step,
            t,
            reason: "non-finite right-hand side".into(),
        })
    }
}

fn check_horizon(t_final: f64) -> Result<()> {
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::Config(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    Ok(())
}

fn with_step<T>(r: Result<T>, step: usize, t: f64) -> Result<T> {
    r.map_err(|e| match e {
        Error::Integration { .. } => e,
        other => Error::Integration {
            step,
            t,
            reason: other.to_string(),
        },
    })
}

/// Forward Euler with `n_steps` equal steps, rates taken at the left endpoint.
pub fn euler<F>(mut f: F, y0: &[f64], t_final: f64, n_steps: usize) -> Result<Integration>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    check_horizon(t_final)?;
    if n_steps == 0 {
        return Err(Error::Config("Euler needs at least one step".into()));
    }
    let h = t_final / n_steps as f64;
    let mut y = y0.to_vec();
    let mut points = Vec::with_capacity(n_steps);
    let mut stats = IntegrationStats::default();
    for k in 0..n_steps {
        let t = k as f64 * h;
        let dy = match with_step(f(t, &y), k, t).and_then(|d| check_finite(&d, k, t).map(|_| d)) {
            Ok(d) => d,
            Err(e) => {
                return Ok(Integration {
                    points,
                    failure: Some(e),
                    stats,
                })
            }
        };
        stats.rhs_evals += 1;
        for (yi, di) in y.iter_mut().zip(&dy) {
            *yi += h * di;
        }
        stats.accepted += 1;
        let t_next = if k + 1 == n_steps {
            t_final
        } else {
            (k + 1) as f64 * h
        };
        points.push(OdePoint {
            t: t_next,
            y: y.clone(),
            step: h,
        });
    }
    Ok(Integration {
        points,
        failure: None,
        stats,
    })
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (equal to the last row of `A`, hence FSAL).
#[cfg(test)]
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// `B − B̂` with `B̂` the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk54Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    /// Component whose accepted values are projected to be nondecreasing.
    pub nondecreasing: Option<usize>,
}

impl Rk54Options {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_steps: 100_000,
            h0: None,
            nondecreasing: None,
        }
    }
}

impl Default for Rk54Options {
    fn default() -> Self {
        Self::new(1e-6, 1e-8)
    }
}

struct Stepper<F> {
    f: F,
    evals: usize,
}

impl<F> Stepper<F>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    fn eval(&mut self, t: f64, y: &[f64], step: usize) -> Result<Vec<f64>> {
        self.evals += 1;
        let d = with_step((self.f)(t, y), step, t)?;
        if d.len() != y.len() {
            return Err(Error::Integration {
                step,
                t,
                reason: format!(
                    "rhs returned {} components for a state of {}",
                    d.len(),
                    y.len()
                ),
            });
        }
        check_finite(&d, step, t)?;
        Ok(d)
    }

    /// One Dormand–Prince step from `(t, y)` with `k1 = f(t, y)`.
    /// Returns the fifth-order solution, its derivative (FSAL) and the error vector.
    fn step(
        &mut self,
        t: f64,
        y: &[f64],
        k1: &[f64],
        h: f64,
        idx: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = y.len();
        let mut ks: Vec<Vec<f64>> = Vec::with_capacity(7);
        ks.push(k1.to_vec());
        let mut stage = vec![0.0; n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, k) in ks.iter().enumerate() {
                    acc += A[s][j] * k[i];
                }
                stage[i] = y[i] + h * acc;
            }
            ks.push(self.eval(t + C[s] * h, &stage, idx)?);
        }
        // Stage 7 is evaluated at the fifth-order solution itself.
        let y_new = stage;
        let mut err = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for (s, k) in ks.iter().enumerate() {
                acc += E[s] * k[i];
            }
            err[i] = h * acc;
        }
        let k7 = ks.pop().expect("seven stages");
        Ok((y_new, k7, err))
    }
}

fn err_norm(err: &[f64], y: &[f64], y_new: &[f64], opts: &Rk54Options) -> f64 {
    err.iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| (e / (opts.abs_tol + opts.rel_tol * a.abs().max(b.abs()))).abs())
        .fold(0.0, f64::max)
}

fn max_scaled(v: &[f64], y: &[f64], opts: &Rk54Options) -> f64 {
    v.iter()
        .zip(y)
        .map(|(x, yi)| (x / (opts.abs_tol + opts.rel_tol * yi.abs())).abs())
        .fold(0.0, f64::max)
}

/// Adaptive Dormand–Prince 5(4).
///
/// The error test is componentwise: `|err_i| ≤ abs_tol + rel_tol·max(|y_i|, |y_new_i|)`.
/// Only accepted steps are recorded; the last one lands exactly on `t_final`.
pub fn rk54<F>(f: F, y0: &[f64], t_final: f64, opts: Rk54Options) -> Result<Integration>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    check_horizon(t_final)?;
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) {
        return Err(Error::Config("RK54 tolerances must be positive".into()));
    }
    const SAFETY: f64 = 0.9;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;
    const BETA: f64 = 0.04;
    let expo1 = 0.2 - 0.75 * BETA;
    let h_min = 1e-12 * t_final;

    let mut st = Stepper { f, evals: 0 };
    let mut stats = IntegrationStats::default();
    let mut points = Vec::new();
    let mut t = 0.0;
    let mut y = y0.to_vec();

    macro_rules! bail {
        ($e:expr) => {{
            stats.rhs_evals = st.evals;
            return Ok(Integration {
                points,
                failure: Some($e),
                stats,
            });
        }};
    }

    let mut k1 = match st.eval(t, &y, 0) {
        Ok(k) => k,
        Err(e) => bail!(e),
    };

    let mut h = match opts.h0 {
        Some(h) => h.min(t_final),
        None => {
            // Hairer's starting-step heuristic.
            let d0 = max_scaled(&y, &y, &opts);
            let d1 = max_scaled(&k1, &y, &opts);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 {
                1e-6
            } else {
                0.01 * d0 / d1
            };
            let h0 = h0.min(t_final);
            let y1: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + h0 * b).collect();
            let k2 = match st.eval(t + h0, &y1, 0) {
                Ok(k) => k,
                Err(e) => bail!(e),
            };
            let diff: Vec<f64> = k2.iter().zip(&k1).map(|(a, b)| a - b).collect();
            let d2 = max_scaled(&diff, &y, &opts) / h0;
            let der12 = d1.max(d2);
            if der12 <= 1e-15 {
                // Nothing moves: cover the whole horizon at once.
                t_final
            } else {
                (100.0 * h0).min((0.01 / der12).powf(0.2)).min(t_final)
            }
        }
    };

    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut idx = 0usize;
    while t < t_final {
        if stats.accepted + stats.rejected >= opts.max_steps {
            bail!(Error::Integration {
                step: idx,
                t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let mut last = false;
        if t + h >= t_final || t_final - (t + h) < h_min {
            h = t_final - t;
            last = true;
        }
        if h < h_min {
            bail!(Error::Integration {
                step: idx,
                t,
                reason: format!("step size {h:e} below {h_min:e}"),
            });
        }
        let (y_new, k_new, err) = match st.step(t, &y, &k1, h, idx) {
            Ok(r) => r,
            Err(e) => bail!(e),
        };
        let en = err_norm(&err, &y, &y_new, &opts);
        if en <= 1.0 {
            let fac = if en == 0.0 {
                FAC_MAX
            } else {
                let fac11 = en.powf(expo1);
                let q = fac11 / err_old.powf(BETA) / SAFETY;
                (1.0 / q.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN)).min(FAC_MAX)
            };
            err_old = en.max(1e-4);
            t = if last { t_final } else { t + h };
            let mut y_new = y_new;
            if let Some(m) = opts.nondecreasing {
                y_new[m] = y_new[m].max(y[m]);
            }
            y = y_new;
            k1 = k_new;
            stats.accepted += 1;
            points.push(OdePoint {
                t,
                y: y.clone(),
                step: h,
            });
            idx += 1;
            let mut h_next = h * fac;
            if last_rejected {
                h_next = h_next.min(h);
            }
            last_rejected = false;
            h = h_next;
        } else {
            let fac11 = en.powf(expo1);
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            stats.rejected += 1;
            last_rejected = true;
        }
    }
    stats.rhs_evals = st.evals;
    Ok(Integration {
        points,
        failure: None,
        stats,
    })
}

/// Dormand–Prince fifth-order solution with a fixed step count, for order studies.
pub fn rk54_fixed<F>(f: F, y0: &[f64], t_final: f64, n_steps: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    check_horizon(t_final)?;
    if n_steps == 0 {
        return Err(Error::Config("RK54 needs at least one step".into()));
    }
    let h = t_final / n_steps as f64;
    let mut st = Stepper { f, evals: 0 };
    let mut y = y0.to_vec();
    let mut k1 = st.eval(0.0, &y, 0)?;
    for k in 0..n_steps {
        let (y_new, k_new, _) = st.step(k as f64 * h, &y, &k1, h, k)?;
        y = y_new;
        k1 = k_new;
    }
    Ok(y)
}
