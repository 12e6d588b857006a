//! Fixed-step integration of the delay systems.
//!
//! All simulators use a classical four-stage one-step scheme on a uniform
//! grid. Lagged values are read from the stored solution through cubic
//! Hermite interpolation on the stored values and derivatives; times before
//! zero come from the history.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, ChainForm, ModelError, ModelParams};

/// States whose magnitude exceeds this end the run.
pub const BLOW_UP: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid history: {0}")]
    History(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// Initial function on `(-inf, 0]`, given in original coordinates `(x, y)`.
/// Tabulated histories are linearly interpolated and held constant before
/// their first sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HistorySpec {
    Constant { point: [f64; 2] },
    PerturbedEquilibrium { delta: f64 },
    Tabulated { times: Vec<f64>, values: Vec<[f64; 2]> },
}

impl Default for HistorySpec {
    fn default() -> Self {
        HistorySpec::PerturbedEquilibrium { delta: 0.01 }
    }
}

/// A validated history ready for evaluation.
#[derive(Debug, Clone)]
enum History {
    Constant([f64; 2]),
    Table { times: Vec<f64>, values: Vec<[f64; 2]> },
}

impl History {
    fn build(spec: &HistorySpec, p: &ModelParams, max_lag: f64) -> Result<Self, IntegrateError> {
        match spec {
            HistorySpec::Constant { point } => {
                if !point.iter().all(|v| v.is_finite()) {
                    return Err(IntegrateError::History("constant history must be finite".into()));
                }
                Ok(History::Constant(*point))
            }
            HistorySpec::PerturbedEquilibrium { delta } => {
                if !delta.is_finite() {
                    return Err(IntegrateError::History("delta must be finite".into()));
                }
                let l0 = model::equilibria(p)?.0;
                Ok(History::Constant([l0.x + delta, l0.y + delta]))
            }
            HistorySpec::Tabulated { times, values } => {
                if times.len() != values.len() || times.is_empty() {
                    return Err(IntegrateError::History("times and values must be nonempty and of equal length".into()));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(IntegrateError::History("sample times must be strictly increasing".into()));
                }
                if times.iter().chain(values.iter().flatten()).any(|v| !v.is_finite()) {
                    return Err(IntegrateError::History("samples must be finite".into()));
                }
                let (first, last) = (times[0], times[times.len() - 1]);
                if last != 0.0 || first > -max_lag {
                    return Err(IntegrateError::History(format!(
                        "samples must span [-{max_lag}, 0], got [{first}, {last}]"
                    )));
                }
                Ok(History::Table { times: times.clone(), values: values.clone() })
            }
        }
    }

    fn eval(&self, t: f64) -> [f64; 2] {
        match self {
            History::Constant(p) => *p,
            History::Table { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[k - 1], times[k]);
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                let (a, b) = (values[k - 1], values[k]);
                [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
            }
        }
    }

    /// `q int_0^inf e^(-q s) h_i(-s) ds`, exact for piecewise linear data.
    fn weak_average(&self, i: usize, q: f64) -> f64 {
        match self {
            History::Constant(p) => p[i],
            History::Table { times, values } => {
                let mut acc = 0.0;
                for k in (1..times.len()).rev() {
                    // segment s in [s0, s1] with s = -t
                    let (s0, s1) = (-times[k], -times[k - 1]);
                    let (v0, v1) = (values[k][i], values[k - 1][i]);
                    let slope = (v1 - v0) / (s1 - s0);
                    // int q e^(-q s) (v0 + slope (s - s0)) ds over [s0, s1]
                    let (e0, e1) = ((-q * s0).exp(), (-q * s1).exp());
                    acc += v0 * (e0 - e1) + slope * ((e0 - e1) / q - (s1 - s0) * e1);
                }
                let tail_start = -times[0];
                acc + values[0][i] * (-q * tail_start).exp()
            }
        }
    }
}

/// Which system a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum SimCase {
    DiracDirac { tau1: f64, tau2: f64 },
    Chain { tau1: f64, q2: f64, form: ChainForm },
    Quadrature { tau1: f64, q2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub params: ModelParams,
    pub case: SimCase,
    pub history: HistorySpec,
    pub dt: f64,
    pub t_end: f64,
    /// Added to each stored state to recover original coordinates.
    pub origin: Vec<f64>,
}

/// Uniform-grid solution. States are stored row-major in simulator
/// coordinates; [`physical`](Self::physical) adds `meta.origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    pub data: Vec<f64>,
    pub blew_up: bool,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    /// State `k` in original coordinates.
    pub fn physical(&self, k: usize) -> Vec<f64> {
        self.state(k).iter().zip(&self.meta.origin).map(|(u, o)| u + o).collect()
    }

    pub fn component(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        let o = self.meta.origin[i];
        (0..self.len()).map(move |k| self.data[k * self.dim + i] + o)
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Integration horizon and step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub t_end: f64,
    pub dt: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { t_end: 500.0, dt: 1e-3 }
    }
}

impl SimOptions {
    fn validate(&self) -> Result<usize, IntegrateError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(IntegrateError::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(IntegrateError::InvalidArgument(format!("t_end must be positive, got {}", self.t_end)));
        }
        Ok((self.t_end / self.dt).round().max(1.0) as usize)
    }
}

fn check_lag(name: &str, v: f64) -> Result<(), IntegrateError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(IntegrateError::InvalidArgument(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn check_rate(q2: f64) -> Result<(), IntegrateError> {
    if q2.is_finite() && q2 > 0.0 {
        Ok(())
    } else {
        Err(IntegrateError::InvalidArgument(format!("q2 must be positive, got {q2}")))
    }
}

fn warn_step(dt: f64, lags: &[f64]) {
    let min_lag = lags.iter().copied().filter(|&t| t > 0.0).fold(f64::INFINITY, f64::min);
    if min_lag.is_finite() && dt > min_lag / 4.0 {
        log::warn!("dt = {dt} exceeds a quarter of the smallest lag {min_lag}; lag interpolation loses accuracy");
    }
}

/// Stored solution with derivatives, plus the history before time zero.
struct Record<'a, const N: usize> {
    dt: f64,
    u: Vec<[f64; N]>,
    du: Vec<[f64; N]>,
    history: &'a dyn Fn(f64) -> [f64; N],
}

impl<const N: usize> Record<'_, N> {
    /// Component `i` at time `s` (any `s <= ` the current stage time).
    fn at(&self, i: usize, s: f64) -> f64 {
        if s <= 0.0 {
            return (self.history)(s)[i];
        }
        // derivatives lag the values by one entry while a step is finished
        let last = self.du.len() - 1;
        let pos = s / self.dt;
        let k = pos.floor() as usize;
        if k >= last {
            // only reached for lags shorter than one step
            let h = s - last as f64 * self.dt;
            return self.u[last][i] + h * self.du[last][i];
        }
        let th = pos - k as f64;
        let (y0, y1) = (self.u[k][i], self.u[k + 1][i]);
        let (d0, d1) = (self.du[k][i] * self.dt, self.du[k + 1][i] * self.dt);
        let th2 = th * th;
        let th3 = th2 * th;
        (2.0 * th3 - 3.0 * th2 + 1.0) * y0
            + (th3 - 2.0 * th2 + th) * d0
            + (-2.0 * th3 + 3.0 * th2) * y1
            + (th3 - th2) * d1
    }
}

fn axpy<const N: usize>(u: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| u[i] + h * k[i])
}

fn out_of_bounds<const N: usize>(u: &[f64; N]) -> bool {
    u.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP)
}

/// Classical RK4 on the stored record; returns the record and blow-up flag.
fn run_rk4<const N: usize, F>(u0: [f64; N], steps: usize, dt: f64, history: &dyn Fn(f64) -> [f64; N], rhs: F) -> (Vec<[f64; N]>, bool)
where
    F: Fn(f64, &[f64; N], &Record<'_, N>) -> [f64; N],
{
    let mut rec = Record { dt, u: Vec::with_capacity(steps + 1), du: Vec::with_capacity(steps + 1), history };
    rec.u.push(u0);
    rec.du.push([0.0; N]);
    rec.du[0] = rhs(0.0, &u0, &rec);
    let mut blew_up = false;
    for n in 0..steps {
        let t = n as f64 * dt;
        let u = rec.u[n];
        let k1 = rec.du[n];
        let k2 = rhs(t + dt / 2.0, &axpy(&u, dt / 2.0, &k1), &rec);
        let k3 = rhs(t + dt / 2.0, &axpy(&u, dt / 2.0, &k2), &rec);
        let k4 = rhs(t + dt, &axpy(&u, dt, &k3), &rec);
        let next: [f64; N] = std::array::from_fn(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        if out_of_bounds(&next) {
            blew_up = true;
            break;
        }
        rec.u.push(next);
        let d = rhs(t + dt, &next, &rec);
        if out_of_bounds(&d) {
            rec.u.pop();
            blew_up = true;
            break;
        }
        rec.du.push(d);
    }
    (rec.u, blew_up)
}

fn pack<const N: usize>(u: Vec<[f64; N]>, dt: f64, blew_up: bool, meta: TrajectoryMeta) -> Trajectory {
    let times = (0..u.len()).map(|n| n as f64 * dt).collect();
    let data = u.into_iter().flatten().collect();
    Trajectory { dim: N, times, data, blew_up, meta }
}

/// Point lags `tau1` on `x` and `tau2` on `y`, original coordinates.
pub fn simulate_dd(p: &ModelParams, tau1: f64, tau2: f64, history: &HistorySpec, opts: &SimOptions) -> Result<Trajectory, IntegrateError> {
    p.require_admissible()?;
    check_lag("tau1", tau1)?;
    check_lag("tau2", tau2)?;
    let steps = opts.validate()?;
    warn_step(opts.dt, &[tau1, tau2]);
    let hist = History::build(history, p, tau1.max(tau2))?;
    let h = |t: f64| hist.eval(t);
    let rhs = |t: f64, u: &[f64; 2], rec: &Record<'_, 2>| {
        let xl = if tau1 == 0.0 { u[0] } else { rec.at(0, t - tau1) };
        let yl = if tau2 == 0.0 { u[1] } else { rec.at(1, t - tau2) };
        model::rhs_original(p, u[0], u[1], xl, yl)
    };
    let (u, blew_up) = run_rk4(hist.eval(0.0), steps, opts.dt, &h, rhs);
    let meta = TrajectoryMeta {
        params: *p,
        case: SimCase::DiracDirac { tau1, tau2 },
        history: history.clone(),
        dt: opts.dt,
        t_end: opts.t_end,
        origin: vec![0.0, 0.0],
    };
    Ok(pack(u, opts.dt, blew_up, meta))
}

/// Chain system for a point lag on `x` and a weak kernel on `y`, in
/// coordinates translated by `L0`. The third component is the weak-kernel
/// average of `x2`, initialized from the history.
pub fn simulate_chain(
    p: &ModelParams,
    tau1: f64,
    q2: f64,
    form: ChainForm,
    history: &HistorySpec,
    opts: &SimOptions,
) -> Result<Trajectory, IntegrateError> {
    check_lag("tau1", tau1)?;
    check_rate(q2)?;
    let steps = opts.validate()?;
    warn_step(opts.dt, &[tau1]);
    let l0 = model::equilibria(p)?.0;
    let hist = History::build(history, p, tau1)?;
    let shifted = |t: f64| {
        let [x, y] = hist.eval(t);
        [x - l0.x, y - l0.y, 0.0]
    };
    let lag_ix = model::chain_lagged_component(form);
    let rhs = |t: f64, u: &[f64; 3], rec: &Record<'_, 3>| {
        let lagged = if tau1 == 0.0 { u[lag_ix] } else { rec.at(lag_ix, t - tau1) };
        model::rhs_chain(p, &l0, q2, *u, lagged)
    };
    let [x1, x2, _] = shifted(0.0);
    let x3 = hist.weak_average(1, q2) - l0.y;
    let (u, blew_up) = run_rk4([x1, x2, x3], steps, opts.dt, &shifted, rhs);
    let meta = TrajectoryMeta {
        params: *p,
        case: SimCase::Chain { tau1, q2, form },
        history: history.clone(),
        dt: opts.dt,
        t_end: opts.t_end,
        origin: vec![l0.x, l0.y, l0.y],
    };
    Ok(pack(u, opts.dt, blew_up, meta))
}

/// Oracle for the weak-kernel system in original coordinates. The state is
/// `(x, y, z)` with `z(t) = int_0^inf q2 e^(-q2 s) y(t - s) ds`; the linear
/// decay of `z` is integrated exactly (integrating-factor RK4).
pub fn simulate_quadrature_weak(p: &ModelParams, tau1: f64, q2: f64, history: &HistorySpec, opts: &SimOptions) -> Result<Trajectory, IntegrateError> {
    p.require_admissible()?;
    check_lag("tau1", tau1)?;
    check_rate(q2)?;
    let steps = opts.validate()?;
    warn_step(opts.dt, &[tau1]);
    let hist = History::build(history, p, tau1)?;
    let dt = opts.dt;
    let h_fn = |t: f64| {
        let [x, y] = hist.eval(t);
        [x, y, 0.0]
    };
    // N(u) with the linear part -q2 z split off
    let nonlin = |t: f64, u: &[f64; 3], rec: &Record<'_, 3>| {
        let xl = if tau1 == 0.0 { u[0] } else { rec.at(0, t - tau1) };
        [
            p.a1 * u[0] - p.a2 * u[0] * u[1],
            p.b1 * xl * u[2] - p.b2 * u[0] - p.b3 * u[1] + p.b4,
            q2 * u[1],
        ]
    };
    let full = |t: f64, u: &[f64; 3], rec: &Record<'_, 3>| {
        let mut d = nonlin(t, u, rec);
        d[2] -= q2 * u[2];
        d
    };
    let e_full = (-q2 * dt).exp();
    let e_half = (-q2 * dt / 2.0).exp();
    let prop = |e: f64, u: &[f64; 3]| [u[0], u[1], e * u[2]];

    let [x0, y0] = hist.eval(0.0);
    let u0 = [x0, y0, hist.weak_average(1, q2)];
    let mut rec = Record { dt, u: Vec::with_capacity(steps + 1), du: Vec::with_capacity(steps + 1), history: &h_fn };
    rec.u.push(u0);
    rec.du.push([0.0; 3]);
    rec.du[0] = full(0.0, &u0, &rec);
    let mut blew_up = false;
    for n in 0..steps {
        let t = n as f64 * dt;
        let u = rec.u[n];
        let k1 = nonlin(t, &u, &rec);
        let k2 = nonlin(t + dt / 2.0, &prop(e_half, &axpy(&u, dt / 2.0, &k1)), &rec);
        let k3 = nonlin(t + dt / 2.0, &axpy(&prop(e_half, &u), dt / 2.0, &k2), &rec);
        let k4 = nonlin(t + dt, &axpy(&prop(e_full, &u), dt, &prop(e_half, &k3)), &rec);
        let eu = prop(e_full, &u);
        let (ek1, ek23) = (prop(e_full, &k1), prop(e_half, &[k2[0] + k3[0], k2[1] + k3[1], k2[2] + k3[2]]));
        let next: [f64; 3] = std::array::from_fn(|i| eu[i] + dt / 6.0 * (ek1[i] + 2.0 * ek23[i] + k4[i]));
        if out_of_bounds(&next) {
            blew_up = true;
            break;
        }
        rec.u.push(next);
        let d = full(t + dt, &next, &rec);
        if out_of_bounds(&d) {
            rec.u.pop();
            blew_up = true;
            break;
        }
        rec.du.push(d);
    }
    let meta = TrajectoryMeta {
        params: *p,
        case: SimCase::Quadrature { tau1, q2 },
        history: history.clone(),
        dt,
        t_end: opts.t_end,
        origin: vec![0.0; 3],
    };
    Ok(pack(rec.u, dt, blew_up, meta))
}

/// Long-run behavior of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationSummary {
    /// Sup-norm distance to the reference point over the final 20%.
    pub final_distance: f64,
    pub converged: bool,
    /// Mean spacing of upward mean-crossings of `x`, last ten cycles.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub period_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplitude: Option<f64>,
    pub cycles_used: usize,
    pub min_x: f64,
    pub min_y: f64,
    pub negative_population: bool,
}

const MIN_SAMPLES: usize = 100;
const MAX_CYCLES: usize = 10;

/// Classifies a trajectory against the reference point `target` (original
/// coordinates, one entry per stored component).
pub fn summarize(traj: &Trajectory, target: &[f64], tol: f64) -> Result<OscillationSummary, IntegrateError> {
    if traj.blew_up {
        return Err(IntegrateError::InsufficientData(format!("run blew up at t = {}", traj.final_time())));
    }
    let n = traj.len();
    if n < MIN_SAMPLES {
        return Err(IntegrateError::InsufficientData(format!("{n} samples, need at least {MIN_SAMPLES}")));
    }
    if target.len() != traj.dim {
        return Err(IntegrateError::InvalidArgument(format!("target has {} entries, trajectory has {}", target.len(), traj.dim)));
    }
    let tail_start = n - n / 5;
    let mut final_distance: f64 = 0.0;
    for k in tail_start..n {
        for (v, t) in traj.physical(k).iter().zip(target) {
            final_distance = final_distance.max((v - t).abs());
        }
    }
    let converged = final_distance < tol;

    let xs: Vec<f64> = traj.component(0).collect();
    let ys: Vec<f64> = traj.component(1).collect();
    let min_x = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let min_y = ys.iter().copied().fold(f64::INFINITY, f64::min);

    let (period_estimate, amplitude, cycles_used) = if converged {
        (None, None, 0)
    } else {
        oscillation(&traj.times, &xs)
    };
    Ok(OscillationSummary {
        final_distance,
        converged,
        period_estimate,
        amplitude,
        cycles_used,
        min_x,
        min_y,
        negative_population: min_x < 0.0 || min_y < 0.0,
    })
}

fn oscillation(times: &[f64], xs: &[f64]) -> (Option<f64>, Option<f64>, usize) {
    let half = xs.len() / 2;
    let (t, x) = (&times[half..], &xs[half..]);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut ups = Vec::new();
    for k in 1..x.len() {
        if x[k - 1] < mean && x[k] >= mean {
            let w = (mean - x[k - 1]) / (x[k] - x[k - 1]);
            ups.push(t[k - 1] + w * (t[k] - t[k - 1]));
        }
    }
    if ups.len() < 2 {
        return (None, None, 0);
    }
    let first = ups.len().saturating_sub(MAX_CYCLES + 1);
    let used = &ups[first..];
    let cycles = used.len() - 1;
    let period = (used[cycles] - used[0]) / cycles as f64;
    let k0 = t.partition_point(|&s| s < used[0]);
    let window = &x[k0..];
    let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
    (Some(period), Some((hi - lo) / 2.0), cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::equilibria;

    fn at_l0(p: &ModelParams) -> HistorySpec {
        let l0 = equilibria(p).unwrap().0;
        HistorySpec::Constant { point: [l0.x, l0.y] }
    }

    #[test]
    fn equilibrium_is_preserved() {
        let p = ModelParams::reference();
        let l0 = equilibria(&p).unwrap().0;
        let opts = SimOptions { t_end: 10.0, dt: 1e-3 };
        let dd = simulate_dd(&p, 1.0, 0.5, &at_l0(&p), &opts).unwrap();
        let ch = simulate_chain(&p, 1.0, 0.3, ChainForm::Corrected, &at_l0(&p), &opts).unwrap();
        let qw = simulate_quadrature_weak(&p, 1.0, 0.3, &at_l0(&p), &opts).unwrap();
        for k in 0..dd.len() {
            assert!((dd.state(k)[0] - l0.x).abs() < 1e-9 && (dd.state(k)[1] - l0.y).abs() < 1e-9);
            assert!(ch.state(k).iter().all(|v| v.abs() < 1e-9));
            let q = qw.state(k);
            assert!((q[0] - l0.x).abs() < 1e-9 && (q[1] - l0.y).abs() < 1e-9 && (q[2] - l0.y).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_history_gives_exact_weak_average() {
        let p = ModelParams::reference();
        let h = HistorySpec::Constant { point: [0.3, 1.7] };
        let opts = SimOptions { t_end: 0.01, dt: 1e-3 };
        let l0 = equilibria(&p).unwrap().0;
        let ch = simulate_chain(&p, 1.0, 0.1, ChainForm::Corrected, &h, &opts).unwrap();
        assert_eq!(ch.physical(0)[2], 1.7 - l0.y + l0.y);
        assert_eq!(ch.state(0)[2], 1.7 - l0.y);
    }

    #[test]
    fn tabulated_weak_average_is_exact_for_lines() {
        // h(t) = 2 + t on [-T, 0], constant 2 - T before
        let t_span = 30.0;
        let times: Vec<f64> = (0..=60).map(|k| -t_span + k as f64 * 0.5).collect();
        let values: Vec<[f64; 2]> = times.iter().map(|&t| [0.0, 2.0 + t]).collect();
        let h = History::build(&HistorySpec::Tabulated { times, values }, &ModelParams::reference(), 1.0).unwrap();
        let q: f64 = 0.4;
        let exact = 2.0 - (1.0 - (-q * t_span).exp()) / q;
        assert!((h.weak_average(1, q) - exact).abs() < 1e-12);
    }

    #[test]
    fn tabulated_history_validation() {
        let p = ModelParams::reference();
        let short = HistorySpec::Tabulated { times: vec![-0.5, 0.0], values: vec![[1.0, 1.0]; 2] };
        assert!(matches!(simulate_dd(&p, 1.0, 0.0, &short, &SimOptions::default()), Err(IntegrateError::History(_))));
        let unsorted = HistorySpec::Tabulated { times: vec![-2.0, -2.0, 0.0], values: vec![[1.0, 1.0]; 3] };
        assert!(matches!(simulate_dd(&p, 1.0, 0.0, &unsorted, &SimOptions::default()), Err(IntegrateError::History(_))));
    }

    #[test]
    fn zero_state_chain_stays_zero() {
        let p = ModelParams::reference();
        let opts = SimOptions { t_end: 5.0, dt: 1e-2 };
        let ch = simulate_chain(&p, 0.5, 2.0, ChainForm::AsPrinted, &at_l0(&p), &opts).unwrap();
        assert!(ch.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn undelayed_run_decays() {
        let p = ModelParams::reference();
        let l0 = equilibria(&p).unwrap().0;
        let opts = SimOptions { t_end: 200.0, dt: 1e-2 };
        let tr = simulate_dd(&p, 0.0, 0.0, &HistorySpec::default(), &opts).unwrap();
        let s = summarize(&tr, &[l0.x, l0.y], 1e-6).unwrap();
        assert!(s.converged, "{s:?}");
        assert!(s.period_estimate.is_none());
    }

    #[test]
    fn bad_options_are_rejected() {
        let p = ModelParams::reference();
        let h = HistorySpec::default();
        assert!(simulate_dd(&p, 1.0, 1.0, &h, &SimOptions { t_end: 1.0, dt: 0.0 }).is_err());
        assert!(simulate_dd(&p, -1.0, 1.0, &h, &SimOptions::default()).is_err());
        assert!(simulate_chain(&p, 1.0, 0.0, ChainForm::Corrected, &h, &SimOptions::default()).is_err());
    }

    fn synthetic(values: impl Fn(f64) -> [f64; 2], n: usize, dt: f64) -> Trajectory {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let data = times.iter().flat_map(|&t| values(t)).collect();
        Trajectory {
            dim: 2,
            times,
            data,
            blew_up: false,
            meta: TrajectoryMeta {
                params: ModelParams::reference(),
                case: SimCase::DiracDirac { tau1: 0.0, tau2: 0.0 },
                history: HistorySpec::default(),
                dt,
                t_end: n as f64 * dt,
                origin: vec![0.0, 0.0],
            },
        }
    }

    #[test]
    fn summary_of_sinusoid() {
        let w = 0.6;
        let tr = synthetic(|t| [0.2 + 0.1 * (w * t).sin(), 2.5], 400_000, 1e-3);
        let s = summarize(&tr, &[0.2, 2.5], 1e-4).unwrap();
        assert!(!s.converged);
        let period = s.period_estimate.unwrap();
        assert!((period - 2.0 * std::f64::consts::PI / w).abs() < 1e-2 * period);
        assert!((s.amplitude.unwrap() - 0.1).abs() < 1e-3);
        assert_eq!(s.cycles_used, 10);
    }

    #[test]
    fn summary_of_constant_and_blown_up() {
        let tr = synthetic(|_| [0.2, 2.5], 1000, 1e-2);
        let s = summarize(&tr, &[0.2, 2.5], 1e-9).unwrap();
        assert!(s.converged && s.period_estimate.is_none() && s.amplitude.is_none());
        let mut bad = tr.clone();
        bad.blew_up = true;
        assert!(matches!(summarize(&bad, &[0.2, 2.5], 1e-9), Err(IntegrateError::InsufficientData(_))));
        let short = synthetic(|_| [0.2, 2.5], 50, 1e-2);
        assert!(matches!(summarize(&short, &[0.2, 2.5], 1e-9), Err(IntegrateError::InsufficientData(_))));
    }

    #[test]
    fn blow_up_truncates_with_flag() {
        // large lag on an unstable setting drives the run out of bounds
        let p = ModelParams::new(2.5, 1.0, 1.0, 0.4, 0.95, 2.0);
        let h = HistorySpec::Constant { point: [50.0, 0.0] };
        let tr = simulate_dd(&p, 30.0, 30.0, &h, &SimOptions { t_end: 200.0, dt: 1e-2 }).unwrap();
        assert!(tr.blew_up);
        assert!(tr.data.iter().all(|v| v.is_finite() && v.abs() <= BLOW_UP));
    }
}
