//! Time integration of the `(U, N)` dynamics and trajectory diagnostics.

use serde::Serialize;

use crate::equilibrium::{availability, availability_gradient, ReferenceEquilibrium};
use crate::error::{Error, Result};
use crate::kinetics::vector_field;
use crate::linalg::dense;
use crate::network::{EnergyMode, Matrices, NetworkSpec};
use crate::scalar::{dot, norm2, norm_inf, tolerance, Real};
use crate::thermo::State;

/// A first order system `y' = f(t, y)` on an open domain.
pub trait OdeSystem<R> {
    fn dim(&self) -> usize;
    /// Writes `f(t, y)` into `dy`; returns `false` when `y` is outside the domain.
    fn rhs(&self, t: R, y: &[R], dy: &mut [R]) -> bool;
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorOptions<R> {
    pub rtol: R,
    pub atol: R,
    pub t_end: R,
    pub max_step: Option<R>,
    pub initial_step: Option<R>,
    /// Emit samples on a uniform grid of this spacing (dense output)
    /// instead of at every accepted step.
    pub sample_every: Option<R>,
    pub max_steps: usize,
    /// Stop once `||f||_inf < atol` holds for this many accepted steps in a row.
    pub rest_steps: Option<usize>,
}

impl<R: Real> IntegratorOptions<R> {
    pub fn new(t_end: R) -> Self {
        Self {
            rtol: R::lit(1e-8),
            atol: R::lit(1e-10),
            t_end,
            max_step: None,
            initial_step: None,
            sample_every: None,
            max_steps: 2_000_000,
            rest_steps: Some(5),
        }
    }

    pub fn tolerances(mut self, rtol: R, atol: R) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Reached `t_end`.
    Finished,
    /// Vector field stayed below `atol`.
    AtRest,
    /// Step size collapsed, usually at the edge of the domain.
    StepUnderflow,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<R> {
    pub times: Vec<R>,
    pub values: Vec<Vec<R>>,
    pub termination: Termination,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn error_norm<R: Real>(err: &[R], y0: &[R], y1: &[R], rtol: R, atol: R) -> R {
    let s: R = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(&e, (&a, &b))| {
            let sk = atol + rtol * a.abs().max(b.abs());
            (e / sk) * (e / sk)
        })
        .sum();
    (s / R::count(err.len().max(1))).sqrt()
}

/// Stages of one Dormand–Prince step; `k[0]` must hold `f(t, y)` on entry.
/// Returns the 5th order update or `None` if a stage left the domain.
fn stages<R: Real, S: OdeSystem<R>>(sys: &S, t: R, y: &[R], h: R, k: &mut [Vec<R>; 7]) -> Option<Vec<R>> {
    let n = y.len();
    let mut tmp = vec![R::zero(); n];
    for s in 1..7 {
        for i in 0..n {
            let mut acc = R::zero();
            for (j, kj) in k.iter().enumerate().take(s) {
                acc = acc + R::lit(A[s][j]) * kj[i];
            }
            tmp[i] = y[i] + h * acc;
        }
        if !sys.rhs(t + R::lit(C[s]) * h, &tmp, &mut k[s]) {
            return None;
        }
    }
    // A[6] equals the 5th order weights, so the last stage point is y_new
    Some(tmp)
}

/// One fixed step of the 5th order Dormand–Prince formula.
pub fn fixed_step<R: Real, S: OdeSystem<R>>(sys: &S, t: R, y: &[R], h: R) -> Option<Vec<R>> {
    let n = y.len();
    let mut k: [Vec<R>; 7] = std::array::from_fn(|_| vec![R::zero(); n]);
    if !sys.rhs(t, y, &mut k[0]) {
        return None;
    }
    stages(sys, t, y, h, &mut k)
}

fn initial_step<R: Real, S: OdeSystem<R>>(sys: &S, t: R, y: &[R], f0: &[R], rtol: R, atol: R, hmax: R) -> R {
    let n = y.len();
    let sc: Vec<R> = y.iter().map(|&v| atol + rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&sc).map(|(&v, &s)| (v / s) * (v / s)).sum::<R>() / R::count(n)).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(&v, &s)| (v / s) * (v / s)).sum::<R>() / R::count(n)).sqrt();
    let tiny = R::lit(1e-10);
    let mut h = if d0 < tiny || d1 < tiny {
        R::lit(1e-6)
    } else {
        R::lit(0.01) * d0 / d1
    };
    h = h.min(hmax);
    let y1: Vec<R> = y.iter().zip(f0).map(|(&a, &b)| a + h * b).collect();
    let mut f1 = vec![R::zero(); n];
    if !sys.rhs(t + h, &y1, &mut f1) {
        return (h * R::lit(0.01)).max(R::lit(1e-12));
    }
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((&a, &b), &s)| ((a - b) / s) * ((a - b) / s))
        .sum::<R>()
        / R::count(n))
    .sqrt()
        / h;
    let big = d1.max(d2);
    let h1 = if big <= R::lit(1e-15) {
        (h * R::lit(1e-3)).max(R::lit(1e-6))
    } else {
        (R::lit(0.01) / big).powf(R::lit(0.2))
    };
    (R::lit(100.0) * h).min(h1).min(hmax)
}

/// Adaptive Dormand–Prince 5(4) with PI step control and dense output.
/// Steps whose result leaves the domain are rejected and halved.
pub fn dopri5<R: Real, S: OdeSystem<R>>(sys: &S, t0: R, y0: &[R], opts: &IntegratorOptions<R>) -> Solution<R> {
    let n = y0.len();
    let beta = R::lit(0.04);
    let expo1 = R::lit(0.2) - beta * R::lit(0.75);
    let safe = R::lit(0.9);
    let facc1 = R::lit(5.0); // 1 / 0.2
    let facc2 = R::lit(0.1); // 1 / 10
    let span = opts.t_end - t0;
    let hmax = opts.max_step.unwrap_or(span).min(span);
    let hmin = span.abs() * R::epsilon() * R::lit(16.0);

    let mut sol = Solution {
        times: vec![t0],
        values: vec![y0.to_vec()],
        termination: Termination::Finished,
        accepted: 0,
        rejected: 0,
        evaluations: 0,
    };
    if !(span > R::zero()) {
        return sol;
    }
    let mut k: [Vec<R>; 7] = std::array::from_fn(|_| vec![R::zero(); n]);
    let mut t = t0;
    let mut y = y0.to_vec();
    if !sys.rhs(t, &y, &mut k[0]) {
        sol.termination = Termination::StepUnderflow;
        return sol;
    }
    sol.evaluations += 1;
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| initial_step(sys, t, &y, &k[0], opts.rtol, opts.atol, hmax));
    let mut facold = R::lit(1e-4);
    let mut last_rejected = false;
    let mut quiet = 0usize;
    let mut next_sample = opts.sample_every.map(|dt| t0 + dt);
    let mut steps = 0usize;

    loop {
        if steps == opts.max_steps {
            sol.termination = Termination::MaxSteps;
            break;
        }
        steps += 1;
        if t + h > opts.t_end || (opts.t_end - (t + h)).abs() <= hmin {
            h = opts.t_end - t;
        }
        if h < hmin {
            sol.termination = Termination::StepUnderflow;
            break;
        }
        let y_new = stages(sys, t, &y, h, &mut k);
        sol.evaluations += 6;
        let Some(y_new) = y_new else {
            // a stage left the domain
            h = h * R::lit(0.5);
            sol.rejected += 1;
            last_rejected = true;
            continue;
        };
        // FSAL: the last stage is f(t + h, y_new)
        let f_new = k[6].clone();
        let err_vec: Vec<R> = (0..n)
            .map(|i| h * (0..7).map(|s| R::lit(E[s]) * k[s][i]).sum::<R>())
            .collect();
        let err = error_norm(&err_vec, &y, &y_new, opts.rtol, opts.atol);
        let fac11 = err.powf(expo1);
        if err <= R::one() {
            let fac = (fac11 / facold.powf(beta)) / safe;
            let fac = facc2.max(facc1.min(fac));
            let mut h_new = h / fac;
            facold = err.max(R::lit(1e-4));
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            sol.accepted += 1;

            let t_new = t + h;
            if let (Some(dt), Some(ts)) = (opts.sample_every, next_sample.as_mut()) {
                // dense output coefficients
                let ydiff: Vec<R> = y_new.iter().zip(&y).map(|(&a, &b)| a - b).collect();
                let c2: Vec<R> = (0..n).map(|i| h * k[0][i] - ydiff[i]).collect();
                let c3: Vec<R> = (0..n).map(|i| ydiff[i] - h * f_new[i] - c2[i]).collect();
                let c4: Vec<R> = (0..n)
                    .map(|i| h * (0..7).map(|s| R::lit(D[s]) * k[s][i]).sum::<R>())
                    .collect();
                while *ts < t_new - hmin {
                    let th = (*ts - t) / h;
                    let th1 = R::one() - th;
                    let v: Vec<R> = (0..n)
                        .map(|i| y[i] + th * (ydiff[i] + th1 * (c2[i] + th * (c3[i] + th1 * c4[i]))))
                        .collect();
                    sol.times.push(*ts);
                    sol.values.push(v);
                    *ts = *ts + dt;
                }
            }
            t = t_new;
            y = y_new;
            k[0] = f_new;
            if opts.sample_every.is_none() || (opts.t_end - t).abs() <= hmin {
                sol.times.push(t);
                sol.values.push(y.clone());
            }
            if let Some(need) = opts.rest_steps {
                if norm_inf(&k[0]) < opts.atol {
                    quiet += 1;
                    if quiet >= need {
                        if sol.times.last() != Some(&t) {
                            sol.times.push(t);
                            sol.values.push(y.clone());
                        }
                        sol.termination = Termination::AtRest;
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            if (opts.t_end - t).abs() <= hmin {
                sol.termination = Termination::Finished;
                break;
            }
            h = h_new.min(hmax);
        } else {
            h = h / facc1.min(fac11 / safe);
            sol.rejected += 1;
            last_rejected = true;
        }
    }
    sol
}

/// The network dynamics as an ODE in `y = (U, N)`.
pub struct NetworkOde<'a, R> {
    pub spec: &'a NetworkSpec<R>,
}

impl<R: Real> OdeSystem<R> for NetworkOde<'_, R> {
    fn dim(&self) -> usize {
        self.spec.n_species() + 1
    }

    fn rhs(&self, _t: R, y: &[R], dy: &mut [R]) -> bool {
        let st = State::from_slice(y);
        match vector_field(self.spec, &st) {
            Ok((du, dn)) => {
                dy[0] = du;
                dy[1..].copy_from_slice(&dn);
                dy.iter().all(|x| x.is_finite())
            }
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<R> {
    pub times: Vec<R>,
    pub states: Vec<State<R>>,
    pub temperatures: Vec<R>,
    /// `S_A` per sample when a reference is attached.
    pub availability: Option<Vec<R>>,
    pub termination: Termination,
    pub accepted: usize,
    pub rejected: usize,
}

impl<R: Real> Trajectory<R> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &State<R> {
        self.states.last().expect("nonempty trajectory")
    }

    /// Fills `availability` with `S_A` relative to `reference`.
    pub fn attach_reference(&mut self, spec: &NetworkSpec<R>, reference: &ReferenceEquilibrium<R>) -> Result<()> {
        self.availability = Some(
            self.states
                .iter()
                .map(|s| availability(spec, reference, s))
                .collect::<Result<_>>()?,
        );
        Ok(())
    }
}

pub fn integrate<R: Real>(spec: &NetworkSpec<R>, state0: &State<R>, opts: &IntegratorOptions<R>) -> Result<Trajectory<R>> {
    spec.thermo.temperature_of(state0)?;
    if spec.energy_mode == EnergyMode::Isothermal {
        let surface = spec.thermo.internal_energy(spec.bath_temperature(), &state0.amounts);
        if (state0.energy - surface).abs() > tolerance::<R>(1e-9) * (R::one() + surface.abs()) {
            return Err(Error::Domain(format!(
                "isothermal runs start on U = N^T u(T_env) = {surface}, got U = {}",
                state0.energy
            )));
        }
    }
    if !(opts.rtol > R::zero() && opts.atol > R::zero()) {
        return Err(Error::Domain("tolerances must be positive".into()));
    }
    let sol = dopri5(&NetworkOde { spec }, R::zero(), &state0.to_vec(), opts);
    let states: Vec<State<R>> = sol.values.iter().map(|v| State::from_slice(v)).collect();
    let temperatures = states
        .iter()
        .map(|s| spec.thermo.temperature_of(s))
        .collect::<Result<Vec<R>>>()
        .map_err(|e| Error::Integration {
            t: sol.times.last().map_or(0.0, |t| t.to_f64_lossy()),
            message: e.to_string(),
        })?;
    Ok(Trajectory {
        times: sol.times,
        states,
        temperatures,
        availability: None,
        termination: sol.termination,
        accepted: sol.accepted,
        rejected: sol.rejected,
    })
}

/// `max_t max_c |c^T (x(t) - x(0))| / (1 + ||x(0)||)` over the kernel basis of
/// `Gamma~^T`.
pub fn class_drift<R: Real>(mats: &Matrices<R>, traj: &Trajectory<R>) -> R {
    let Some(first) = traj.states.first() else {
        return R::zero();
    };
    let x0 = first.to_vec();
    let scale = R::one() + norm2(&x0);
    let mut worst = R::zero();
    for s in &traj.states {
        let dx: Vec<R> = s.to_vec().iter().zip(&x0).map(|(&a, &b)| a - b).collect();
        for c in &mats.ker_basis {
            let nc = norm2(c);
            worst = worst.max(dot(c, &dx).abs() / (nc * scale));
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport<R> {
    pub availability: Vec<R>,
    /// Analytic `dS_A/dt = grad S_A . f` per sample.
    pub rate: Vec<R>,
    /// Roundoff scale of each `rate` entry.
    pub rate_scale: Vec<R>,
    /// Heat exchange share of `rate`, `-sum k (T - T*)^2 / (T* T)`.
    pub heat_dissipation: Vec<R>,
    /// Largest forward difference `S_A(t_{i+1}) - S_A(t_i)`.
    pub worst_increase: R,
    /// Largest `rate / rate_scale`.
    pub worst_rate: R,
    pub monotone: bool,
    pub dissipative: bool,
    /// Norm of the projection of `grad S_A` onto `Im Gamma~` per sample.
    pub gradient_projection: Vec<R>,
}

pub fn heat_dissipation<R: Real>(spec: &NetworkSpec<R>, t: R, t_star: R) -> R {
    spec.heat_exchanges()
        .into_iter()
        .map(|j| -spec.reactions[j].k * (t - t_star) * (t - t_star) / (t_star * t))
        .sum()
}

/// `S_A` along a trajectory together with its analytic time derivative.
pub fn lyapunov_trace<R: Real>(
    spec: &NetworkSpec<R>,
    mats: &Matrices<R>,
    reference: &ReferenceEquilibrium<R>,
    traj: &Trajectory<R>,
) -> Result<LyapunovReport<R>> {
    let im = dense::orthonormalize(&mats.im_basis);
    let mut sa = Vec::with_capacity(traj.len());
    let mut rate = Vec::with_capacity(traj.len());
    let mut rate_scale = Vec::with_capacity(traj.len());
    let mut heat = Vec::with_capacity(traj.len());
    let mut proj = Vec::with_capacity(traj.len());
    for (s, &t) in traj.states.iter().zip(&traj.temperatures) {
        sa.push(availability(spec, reference, s)?);
        let g = availability_gradient(spec, reference, s)?;
        let (du, dn) = vector_field(spec, s)?;
        let mut f = vec![du];
        f.extend(dn);
        rate.push(dot(&g, &f));
        rate_scale.push(R::one() + g.iter().zip(&f).map(|(&a, &b)| (a * b).abs()).sum::<R>());
        heat.push(heat_dissipation(spec, t, reference.t_star));
        let p: R = im.iter().map(|b| dot(b, &g).powi(2)).sum::<R>().sqrt();
        proj.push(p);
    }
    let worst_increase = sa
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(R::neg_infinity(), R::max);
    let worst_rate = rate
        .iter()
        .zip(&rate_scale)
        .map(|(&r, &s)| r / s)
        .fold(R::neg_infinity(), R::max);
    let s0 = sa.first().copied().unwrap_or_else(R::zero);
    Ok(LyapunovReport {
        monotone: sa.len() < 2 || worst_increase <= tolerance::<R>(1e-8) * (R::one() + s0),
        dissipative: rate.is_empty() || worst_rate <= tolerance::<R>(1e-12),
        availability: sa,
        rate,
        rate_scale,
        heat_dissipation: heat,
        worst_increase,
        worst_rate,
        gradient_projection: proj,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport<R> {
    pub converged: bool,
    /// Max-norm distance of the last sample to the target.
    pub terminal_distance: R,
    /// First sample time after which every sample is within `tol`.
    pub first_time_within: Option<R>,
    /// Distances are nonincreasing from `first_time_within` onward.
    pub monotone_tail: bool,
}

pub fn converged_state<R: Real>(traj: &Trajectory<R>, target: &State<R>, tol: R) -> ConvergenceReport<R> {
    let tv = target.to_vec();
    let dist: Vec<R> = traj
        .states
        .iter()
        .map(|s| {
            s.to_vec()
                .iter()
                .zip(&tv)
                .fold(R::zero(), |m, (&a, &b)| m.max((a - b).abs()))
        })
        .collect();
    let terminal = dist.last().copied().unwrap_or_else(R::infinity);
    // first index of the final run of samples inside the ball
    let mut start = None;
    for (i, &d) in dist.iter().enumerate().rev() {
        if d < tol {
            start = Some(i);
        } else {
            break;
        }
    }
    let monotone_tail = start.is_some_and(|i| dist[i..].windows(2).all(|w| w[1] <= w[0] + R::epsilon() * tol));
    ConvergenceReport {
        converged: terminal < tol,
        terminal_distance: terminal,
        first_time_within: start.map(|i| traj.times[i]),
        monotone_tail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{equilibrium_in_class, reference_equilibrium};
    use crate::network::{build_matrices, parse_network};

    struct Decay;
    impl OdeSystem<f64> for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> bool {
            dy[0] = -y[0];
            y[0] > 0.0
        }
    }

    #[test]
    fn exponential_decay_accuracy() {
        let opts = IntegratorOptions {
            rest_steps: None,
            ..IntegratorOptions::new(5.0).tolerances(1e-10, 1e-12)
        };
        let sol = dopri5(&Decay, 0.0, &[1.0], &opts);
        assert_eq!(sol.termination, Termination::Finished);
        assert_eq!(*sol.times.last().unwrap(), 5.0);
        let y = sol.values.last().unwrap()[0];
        assert!((y - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn dense_output_on_grid() {
        let opts = IntegratorOptions {
            rest_steps: None,
            sample_every: Some(0.25),
            ..IntegratorOptions::new(2.0).tolerances(1e-10, 1e-12)
        };
        let sol = dopri5(&Decay, 0.0, &[1.0], &opts);
        assert_eq!(sol.times.len(), 9);
        for (t, v) in sol.times.iter().zip(&sol.values) {
            assert!((v[0] - (-t).exp()).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let err = |h: f64| {
            let mut y = vec![1.0];
            let steps = (1.0 / h).round() as usize;
            for i in 0..steps {
                y = fixed_step(&Decay, i as f64 * h, &y, h).unwrap();
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!(order > 4.5, "order {order}");
    }

    #[test]
    fn equilibrium_start_stays_put() {
        let s: NetworkSpec<f64> = parse_network(
            "[species]\nX1 { p = 1.5 }\nX2 { p = 1.5 }\nX3 { p = 1.5 }\n[reactions]\nX1 + X2 <-> X3 { kf = 2, kb = 1 }\n",
        )
        .unwrap();
        let st = State::new(6.0, vec![1.0, 1.0, 2.0]);
        let tr = integrate(&s, &st, &IntegratorOptions::new(100.0)).unwrap();
        for x in &tr.states {
            for (a, b) in x.to_vec().iter().zip(st.to_vec()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn example_relaxes_to_class_equilibrium() {
        let s: NetworkSpec<f64> = parse_network(
            "[species]\nX1 { p = 1.5 }\nX2 { p = 1.5 }\nX3 { p = 1.5 }\n[reactions]\nX1 + X2 <-> X3 { kf = 2, kb = 1 }\n",
        )
        .unwrap();
        let m = build_matrices(&s);
        let r = reference_equilibrium(&s, &m).unwrap();
        let o = State::new(6.0, vec![2.0, 2.0, 1.0]);
        let mut tr = integrate(&s, &o, &IntegratorOptions::new(200.0)).unwrap();
        let eq = equilibrium_in_class(&s, &m, &r, &o).unwrap();
        let c = converged_state(&tr, &eq.state, 1e-6);
        assert!(c.converged, "{c:?}");
        assert!(class_drift(&m, &tr) < 1e-8);
        tr.attach_reference(&s, &r).unwrap();
        let l = lyapunov_trace(&s, &m, &r, &tr).unwrap();
        assert!(l.monotone && l.dissipative);
    }

    #[test]
    fn convergence_report_edge_cases() {
        let s: NetworkSpec<f64> =
            parse_network("[constants]\nT_env = 2\n[species]\nA { p = 1.5 }\n[reactions]\n@heat { k = 1 }\n").unwrap();
        let st = State::new(3.0, vec![1.0]);
        let tr = integrate(&s, &st, &IntegratorOptions::new(1.0)).unwrap();
        let c = converged_state(&tr, &st, 1e-12);
        assert_eq!(c.first_time_within, Some(0.0));
        let c = converged_state(&tr, &st, 0.0);
        assert!(!c.converged);
        assert_eq!(c.first_time_within, None);
    }
}
