//! Explicit Runge-Kutta integration of a two-component state.
//!
//! The right-hand side may refuse to evaluate (returning an error); both
//! steppers then halve the step and retry, up to [`MAX_HALVINGS`] times.

use serde::{Deserialize, Serialize};

/// Consecutive step halvings allowed after a failed right-hand side.
pub const MAX_HALVINGS: u32 = 20;

/// Clean steps needed before one halving is forgiven.
const RELAX_AFTER: u32 = 8;

pub type State = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub dt_initial: f64,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive,
            dt_initial: 1e-3,
            tol: 1e-8,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt_initial.is_finite() && self.dt_initial > 0.0) {
            return Err("dt_initial must be > 0".into());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err("tol must be > 0".into());
        }
        if self.max_steps == 0 {
            return Err("max_steps must be >= 1".into());
        }
        Ok(())
    }
}

/// Why an integration stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure<E> {
    /// The right-hand side kept failing after all halvings.
    Rhs(E),
    StepBudget,
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t_end`, calling `observe` after
/// every accepted step.
pub fn integrate<E, R, O>(
    rhs: R,
    t0: f64,
    y0: State,
    t_end: f64,
    config: &IntegratorConfig,
    mut observe: O,
) -> Result<State, Failure<E>>
where
    R: Fn(f64, &State) -> Result<State, E>,
    O: FnMut(f64, &State),
{
    match config.method {
        Method::Rk4Fixed => rk4(&rhs, t0, y0, t_end, config, &mut observe),
        Method::Rk45Adaptive => dopri5(&rhs, t0, y0, t_end, config, &mut observe),
    }
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn rk4_step<E, R>(rhs: &R, t: f64, y: &State, h: f64) -> Result<State, E>
where
    R: Fn(f64, &State) -> Result<State, E>,
{
    let k1 = rhs(t, y)?;
    let k2 = rhs(t + 0.5 * h, &axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = rhs(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = rhs(t + h, &axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

fn rk4<E, R, O>(rhs: &R, t0: f64, y0: State, t_end: f64, config: &IntegratorConfig, observe: &mut O) -> Result<State, Failure<E>>
where
    R: Fn(f64, &State) -> Result<State, E>,
    O: FnMut(f64, &State),
{
    let span = t_end - t0;
    if span <= 0.0 {
        return Ok(y0);
    }
    let n = (span / config.dt_initial).ceil().max(1.0) as usize;
    if n > config.max_steps {
        return Err(Failure::StepBudget);
    }
    let h = span / n as f64;
    let mut y = y0;
    for i in 0..n {
        let t = t0 + h * i as f64;
        let t_next = if i + 1 == n { t_end } else { t0 + h * (i + 1) as f64 };
        // A failing evaluation splits this step into 2^k substeps.
        let mut halvings = 0;
        let mut sub = 1usize;
        loop {
            let hs = (t_next - t) / sub as f64;
            let mut ys = y;
            let mut failure = None;
            for j in 0..sub {
                match rk4_step(rhs, t + hs * j as f64, &ys, hs) {
                    Ok(next) => ys = next,
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            match failure {
                None => {
                    y = ys;
                    break;
                }
                Some(e) if halvings >= MAX_HALVINGS => return Err(Failure::Rhs(e)),
                Some(_) => {
                    halvings += 1;
                    sub *= 2;
                }
            }
        }
        observe(t_next, &y);
    }
    Ok(y)
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Trial {
    y: State,
    k7: State,
    err: f64,
}

fn dopri_trial<E, R>(rhs: &R, t: f64, y: &State, k1: &State, h: f64, tol: f64) -> Result<Trial, E>
where
    R: Fn(f64, &State) -> Result<State, E>,
{
    let k2 = rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = rhs(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = rhs(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = rhs(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = rhs(t + h, &y_new)?;
    let mut sum = 0.0;
    for i in 0..2 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = tol + tol * y[i].abs().max(y_new[i].abs());
        sum += (e / scale) * (e / scale);
    }
    Ok(Trial {
        y: y_new,
        k7,
        err: (0.5 * sum).sqrt(),
    })
}

fn dopri5<E, R, O>(rhs: &R, t0: f64, y0: State, t_end: f64, config: &IntegratorConfig, observe: &mut O) -> Result<State, Failure<E>>
where
    R: Fn(f64, &State) -> Result<State, E>,
    O: FnMut(f64, &State),
{
    let span = t_end - t0;
    if span <= 0.0 {
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = config.dt_initial.min(span);
    let mut k1 = first_slope(rhs, t, &y)?;
    let mut steps = 0usize;
    // After a failed evaluation the step is capped; the cap is relaxed one
    // halving at a time after RELAX_AFTER clean steps.
    let mut halvings = 0u32;
    let mut cap = f64::INFINITY;
    let mut clean = 0u32;
    while t < t_end {
        if steps >= config.max_steps {
            return Err(Failure::StepBudget);
        }
        steps += 1;
        h = h.min(cap);
        let last = t + h >= t_end || (t_end - (t + h)) <= 1e-12 * span;
        let h_try = if last { t_end - t } else { h };
        match dopri_trial(rhs, t, &y, &k1, h_try, config.tol) {
            Err(e) => {
                if halvings >= MAX_HALVINGS {
                    return Err(Failure::Rhs(e));
                }
                halvings += 1;
                clean = 0;
                h = 0.5 * h_try;
                cap = h;
            }
            Ok(trial) if trial.err <= 1.0 => {
                if halvings > 0 {
                    clean += 1;
                    if clean >= RELAX_AFTER {
                        clean = 0;
                        halvings -= 1;
                        cap = if halvings == 0 { f64::INFINITY } else { 2.0 * cap };
                    }
                }
                t = if last { t_end } else { t + h_try };
                y = trial.y;
                k1 = trial.k7;
                observe(t, &y);
                h = h_try * step_factor(trial.err);
            }
            Ok(trial) => {
                h = h_try * step_factor(trial.err).min(1.0);
            }
        }
    }
    Ok(y)
}

fn first_slope<E, R>(rhs: &R, t: f64, y: &State) -> Result<State, Failure<E>>
where
    R: Fn(f64, &State) -> Result<State, E>,
{
    rhs(t, y).map_err(Failure::Rhs)
}

fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}
