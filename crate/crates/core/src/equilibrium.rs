//! Detailed balance, reference equilibria, availability and the
//! equilibrium of a compatibility class.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinetics::rates_at;
use crate::linalg::dense::{self, Mat};
use crate::linalg::exact::{self, q};
use crate::network::{EnergyMode, Matrices, NetworkSpec, ReactionKind};
use crate::scalar::{dot, norm2, tolerance, Real};
use crate::thermo::State;

/// A detailed balanced equilibrium used as the origin of the availability
/// and Legendre functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceEquilibrium<R> {
    pub state: State<R>,
    #[serde(rename = "T_star")]
    pub t_star: R,
    pub mu_star: Vec<R>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WegscheiderReport<R> {
    pub holds: bool,
    pub worst_residual: R,
    /// Integer basis of `ker Gamma` over the chemical reactions.
    pub basis: Vec<Vec<i64>>,
    pub residuals: Vec<R>,
}

fn require_reversible<R: Real>(spec: &NetworkSpec<R>) -> Result<()> {
    match spec.unpaired().first() {
        Some(&index) => Err(Error::Irreversible { index }),
        None => Ok(()),
    }
}

/// Checks `sum_j lambda_j (ln k_j - ln k_rev(j)) = 0` on an integer basis of
/// `ker Gamma` restricted to chemical reactions.
pub fn wegscheider_check<R: Real>(spec: &NetworkSpec<R>, mats: &Matrices<R>) -> Result<WegscheiderReport<R>> {
    if let Some(index) = spec
        .unpaired()
        .into_iter()
        .find(|&j| spec.reactions[j].kind == ReactionKind::Chemical)
    {
        return Err(Error::Irreversible { index });
    }
    let cr: Vec<usize> = (0..spec.n_reactions())
        .filter(|&j| spec.reactions[j].kind == ReactionKind::Chemical)
        .collect();
    let gamma_cr: Vec<Vec<_>> = mats
        .gamma
        .iter()
        .map(|row| cr.iter().map(|&j| q(row[j])).collect())
        .collect();
    let basis: Vec<Vec<i64>> = exact::kernel(&gamma_cr, cr.len())
        .iter()
        .map(|v| exact::to_i64_vec(&exact::primitive_integer(v)).expect("small integers"))
        .collect();
    let log_ratio: Vec<R> = cr
        .iter()
        .map(|&j| {
            let p = spec.reactions[j].pair.expect("checked above");
            spec.reactions[j].k.ln() - spec.reactions[p].k.ln()
        })
        .collect();
    let residuals: Vec<R> = basis
        .iter()
        .map(|lam| {
            lam.iter()
                .zip(&log_ratio)
                .map(|(&l, &x)| R::lit(l as f64) * x)
                .sum::<R>()
                .abs()
        })
        .collect();
    let worst = residuals.iter().fold(R::zero(), |m, &x| m.max(x));
    Ok(WegscheiderReport {
        holds: worst < tolerance(1e-10),
        worst_residual: worst,
        basis,
        residuals,
    })
}

/// `T_env` for networks coupled to a bath, 1 for isolated ones.
pub fn default_reference_temperature<R: Real>(spec: &NetworkSpec<R>) -> R {
    if spec.has_open_boundary() || spec.energy_mode == EnergyMode::Isothermal {
        spec.bath_temperature()
    } else {
        R::one()
    }
}

pub fn reference_equilibrium<R: Real>(spec: &NetworkSpec<R>, mats: &Matrices<R>) -> Result<ReferenceEquilibrium<R>> {
    reference_equilibrium_at(spec, mats, default_reference_temperature(spec))
}

/// Builds a detailed balanced equilibrium at temperature `t_star`.
///
/// Works in `x = mu / (kappa T*)`, where each pair demands
/// `(y_p - y_s)^T x = ln(k_f / k_b) - (g_f^AS - g_b^AS)(T*) / (kappa T*)`.
/// Complex potentials are first fixed along a spanning forest of the
/// complex graph (the zero complex pinned at 0), then `Y^T x = phi` is
/// solved with minimum norm; if that is inconsistent the pair equations are
/// solved directly.
pub fn reference_equilibrium_at<R: Real>(
    spec: &NetworkSpec<R>,
    mats: &Matrices<R>,
    t_star: R,
) -> Result<ReferenceEquilibrium<R>> {
    require_reversible(spec)?;
    if !(t_star > R::zero()) {
        return Err(Error::NonpositiveTemperature);
    }
    let n = spec.n_species();
    let m = spec.n_complexes();
    let kts = spec.kappa() * t_star;
    let pairs = mats.pairs.clone();
    let weight: Vec<R> = pairs
        .iter()
        .map(|&(f, b)| {
            let (rf, rb) = (&spec.reactions[f], &spec.reactions[b]);
            (rf.k / rb.k).ln() - (rf.gas.eval(t_star) - rb.gas.eval(t_star)) / kts
        })
        .collect();
    let edges: Vec<(usize, usize, R)> = pairs
        .iter()
        .zip(&weight)
        .map(|(&(f, _), &w)| {
            let r = &spec.reactions[f];
            (spec.complex_index(&r.substrate), spec.complex_index(&r.product), w)
        })
        .collect();

    // complex potentials on a spanning forest
    let mut phi: Vec<Option<R>> = vec![None; m];
    let mut adj: Vec<Vec<(usize, R)>> = vec![Vec::new(); m];
    for &(s, p, w) in &edges {
        adj[s].push((p, w));
        adj[p].push((s, -w));
    }
    let zero = spec.complexes.iter().position(|c| c.is_zero());
    let roots = zero.into_iter().chain(0..m);
    for root in roots {
        if phi[root].is_some() {
            continue;
        }
        phi[root] = Some(R::zero());
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            let pa = phi[a].unwrap();
            for &(b, w) in &adj[a] {
                if phi[b].is_none() {
                    phi[b] = Some(pa + w);
                    queue.push_back(b);
                }
            }
        }
    }
    let phi: Vec<R> = phi.into_iter().map(|x| x.unwrap_or_else(R::zero)).collect();

    let tol = tolerance::<R>(1e-12);
    let y_t = Mat::from_rows(
        &spec
            .complexes
            .iter()
            .map(|c| c.dense(n).iter().map(|&x| R::lit(x as f64)).collect())
            .collect::<Vec<Vec<R>>>(),
    );
    let accept = |res: R, rhs: &[R]| res <= tolerance::<R>(1e-10) * (R::one() + norm2(rhs));
    let (mut x, res) = dense::min_norm_solve(&y_t, &phi, tol);
    if !accept(res, &phi) {
        let rows: Vec<Vec<R>> = edges
            .iter()
            .map(|&(s, p, _)| {
                let ys = spec.complexes[s].dense(n);
                let yp = spec.complexes[p].dense(n);
                ys.iter().zip(&yp).map(|(&a, &b)| R::lit((b - a) as f64)).collect()
            })
            .collect();
        let a = Mat::from_rows(&rows);
        let (x2, res2) = if rows.is_empty() {
            (vec![R::zero(); n], R::zero())
        } else {
            dense::min_norm_solve(&a, &weight, tol)
        };
        if !accept(res2, &weight) {
            return Err(Error::NoDetailedBalance {
                residual: res2.to_f64_lossy(),
            });
        }
        x = x2;
    }

    let reduced_g = spec.thermo.reduced_free_energies(t_star);
    let amounts: Vec<R> = x.iter().zip(&reduced_g).map(|(&xi, &gi)| (xi - gi).exp()).collect();
    if let Some(index) = amounts.iter().position(|a| !(a.is_finite() && *a > R::zero())) {
        return Err(Error::NonpositiveAmount { index });
    }
    let energy = spec.thermo.internal_energy(t_star, &amounts);
    let state = State::new(energy, amounts);
    let worst = detailed_balance_residual(spec, &state)?
        .iter()
        .fold(R::zero(), |w, p| w.max(p.rate));
    if !(worst < tolerance(1e-10)) {
        return Err(Error::NoDetailedBalance {
            residual: worst.to_f64_lossy(),
        });
    }
    let mu_star = spec.thermo.chemical_potentials(t_star, &state.amounts);
    Ok(ReferenceEquilibrium {
        state,
        t_star,
        mu_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairResidual<R> {
    pub forward: usize,
    pub backward: usize,
    /// `|v_f - v_b| / max(v_f, v_b)`.
    pub rate: R,
    /// `|Delta U_f + Delta U_b|`; `|Delta U|` for heat exchange.
    pub energy: R,
}

/// Per-pair rate and energy imbalance; heat exchanges appear as self-pairs.
pub fn detailed_balance_residual<R: Real>(spec: &NetworkSpec<R>, state: &State<R>) -> Result<Vec<PairResidual<R>>> {
    let t = spec.thermo.temperature_of(state)?;
    let v = rates_at(spec, t, &state.amounts);
    let mut out: Vec<PairResidual<R>> = spec
        .pairs()
        .into_iter()
        .map(|(f, b)| PairResidual {
            forward: f,
            backward: b,
            rate: (v[f] - v[b]).abs() / v[f].max(v[b]),
            energy: (spec.energy_change(f, t) + spec.energy_change(b, t)).abs(),
        })
        .collect();
    out.extend(spec.heat_exchanges().into_iter().map(|j| PairResidual {
        forward: j,
        backward: j,
        rate: R::zero(),
        energy: spec.energy_change(j, t).abs(),
    }));
    Ok(out)
}

/// `S_A = -S + (U - U*)/T* - (mu*/T*)^T (N - N*) + S*`.
pub fn availability<R: Real>(spec: &NetworkSpec<R>, reference: &ReferenceEquilibrium<R>, state: &State<R>) -> Result<R> {
    let s = spec.thermo.entropy(state)?;
    let s_star = spec.thermo.entropy(&reference.state)?;
    let ts = reference.t_star;
    let dn: R = reference
        .mu_star
        .iter()
        .zip(state.amounts.iter().zip(&reference.state.amounts))
        .map(|(&mu, (&a, &b))| mu / ts * (a - b))
        .sum();
    Ok(-s + (state.energy - reference.state.energy) / ts - dn + s_star)
}

/// `(1/T* - 1/T, mu/T - mu*/T*)`.
pub fn availability_gradient<R: Real>(
    spec: &NetworkSpec<R>,
    reference: &ReferenceEquilibrium<R>,
    state: &State<R>,
) -> Result<Vec<R>> {
    let d = dual_of_state(spec, reference, state)?;
    Ok(d.to_vec())
}

/// `G_A(N) = N^T (Ln N - Ln N*) - 1^T (N - N*)`.
pub fn pseudo_helmholtz<R: Real>(n: &[R], n_star: &[R]) -> R {
    n.iter()
        .zip(n_star)
        .map(|(&a, &b)| a * (a.ln() - b.ln()) - (a - b))
        .sum()
}

/// Dual coordinates `beta = 1/T* - 1/T`, `gamma = mu/T - mu*/T*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPoint<R> {
    pub beta: R,
    pub gamma: Vec<R>,
}

impl<R: Real> DualPoint<R> {
    pub fn zero(n: usize) -> Self {
        Self {
            beta: R::zero(),
            gamma: vec![R::zero(); n],
        }
    }

    pub fn to_vec(&self) -> Vec<R> {
        let mut v = Vec::with_capacity(self.gamma.len() + 1);
        v.push(self.beta);
        v.extend_from_slice(&self.gamma);
        v
    }

    pub fn from_slice(v: &[R]) -> Self {
        Self {
            beta: v[0],
            gamma: v[1..].to_vec(),
        }
    }
}

pub fn dual_of_state<R: Real>(
    spec: &NetworkSpec<R>,
    reference: &ReferenceEquilibrium<R>,
    state: &State<R>,
) -> Result<DualPoint<R>> {
    let t = spec.thermo.temperature_of(state)?;
    let mu = spec.thermo.chemical_potentials(t, &state.amounts);
    let ts = reference.t_star;
    Ok(DualPoint {
        beta: ts.recip() - t.recip(),
        gamma: mu
            .iter()
            .zip(&reference.mu_star)
            .map(|(&m, &ms)| m / t - ms / ts)
            .collect(),
    })
}

/// Inverse of [`dual_of_state`]: `T = (1/T* - beta)^-1`,
/// `N_i = Z_i(T) exp((gamma_i + mu*_i/T*)/kappa)`, `U = N^T u(T)`.
pub fn state_of_dual<R: Real>(
    spec: &NetworkSpec<R>,
    reference: &ReferenceEquilibrium<R>,
    dual: &DualPoint<R>,
) -> Result<State<R>> {
    let inv = reference.t_star.recip() - dual.beta;
    if !(inv > R::zero()) {
        return Err(Error::Domain(format!(
            "beta = {} is not below 1/T* = {}",
            dual.beta,
            reference.t_star.recip()
        )));
    }
    let t = inv.recip();
    let k = spec.constants();
    let kappa = k.kappa;
    let amounts: Vec<R> = spec
        .species()
        .iter()
        .zip(&dual.gamma)
        .zip(&reference.mu_star)
        .map(|((s, &g), &ms)| (s.ln_partition(t, k) + (g + ms / reference.t_star) / kappa).exp())
        .collect();
    let energy = spec.thermo.internal_energy(t, &amounts);
    Ok(State::new(energy, amounts))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreEval<R> {
    pub value: R,
    /// `(U(beta, gamma) - U^o, N(beta, gamma) - N^o)`.
    pub gradient: Vec<R>,
    pub hessian: Mat<R>,
}

/// Shifted Legendre transform `L_A` anchored at an origin state, normalized
/// so that `L_A` vanishes at the origin's own dual point.
#[derive(Debug, Clone)]
pub struct Legendre<'a, R> {
    spec: &'a NetworkSpec<R>,
    reference: &'a ReferenceEquilibrium<R>,
    origin: State<R>,
    offset: R,
}

impl<'a, R: Real> Legendre<'a, R> {
    pub fn new(spec: &'a NetworkSpec<R>, reference: &'a ReferenceEquilibrium<R>, origin: &State<R>) -> Result<Self> {
        spec.thermo.temperature_of(origin)?;
        let mut l = Self {
            spec,
            reference,
            origin: origin.clone(),
            offset: R::zero(),
        };
        let d0 = dual_of_state(spec, reference, origin)?;
        l.offset = l.raw(&d0)?;
        Ok(l)
    }

    fn raw(&self, dual: &DualPoint<R>) -> Result<R> {
        let st = state_of_dual(self.spec, self.reference, dual)?;
        let kappa = self.spec.kappa();
        let total: R = st.amounts.iter().copied().sum();
        Ok(kappa * total - dual.beta * self.origin.energy - dot(&dual.gamma, &self.origin.amounts))
    }

    pub fn origin(&self) -> &State<R> {
        &self.origin
    }

    /// Value only; `+inf` outside the domain or on overflow.
    pub fn value(&self, dual: &DualPoint<R>) -> R {
        match self.raw(dual) {
            Ok(v) if v.is_finite() => v - self.offset,
            _ => R::infinity(),
        }
    }

    pub fn evaluate(&self, dual: &DualPoint<R>) -> Result<LegendreEval<R>> {
        let st = state_of_dual(self.spec, self.reference, dual)?;
        let t = (self.reference.t_star.recip() - dual.beta).recip();
        let k = self.spec.constants();
        let kappa = k.kappa;
        let n = self.spec.n_species();
        let total: R = st.amounts.iter().copied().sum();
        let value = kappa * total - dual.beta * self.origin.energy - dot(&dual.gamma, &self.origin.amounts) - self.offset;
        let mut gradient = Vec::with_capacity(n + 1);
        gradient.push(st.energy - self.origin.energy);
        gradient.extend(st.amounts.iter().zip(&self.origin.amounts).map(|(&a, &b)| a - b));
        let u = self.spec.thermo.energies(t);
        let mut h = Mat::zeros(n + 1, n + 1);
        let mut hbb = R::zero();
        for (i, s) in self.spec.species().iter().enumerate() {
            let ni = st.amounts[i];
            h[(i + 1, i + 1)] = ni / kappa;
            h[(0, i + 1)] = ni * u[i] / kappa;
            h[(i + 1, 0)] = h[(0, i + 1)];
            hbb = hbb + ni * u[i] * u[i] / kappa + ni * s.heat_capacity(k) * t * t;
        }
        h[(0, 0)] = hbb;
        Ok(LegendreEval {
            value,
            gradient,
            hessian: h,
        })
    }
}

pub fn legendre_l_a<R: Real>(
    spec: &NetworkSpec<R>,
    reference: &ReferenceEquilibrium<R>,
    origin: &State<R>,
    dual: &DualPoint<R>,
) -> Result<LegendreEval<R>> {
    Legendre::new(spec, reference, origin)?.evaluate(dual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Projected gradient tolerance, scaled by `1 + |L_A|`.
    pub gradient_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tol: 1e-9,
            armijo: 1e-4,
            backtrack: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult<R> {
    pub state: State<R>,
    #[serde(rename = "T")]
    pub temperature: R,
    pub dual: DualPoint<R>,
    pub iterations: usize,
    pub gradient_norm: R,
    /// `L_A` at the optimum.
    pub value: R,
    pub rate_residuals: Vec<R>,
    pub energy_residuals: Vec<R>,
}

/// Orthonormal basis of `ker Gamma~^T` as columns of an `(n+1) x k` matrix.
pub fn dual_subspace<R: Real>(mats: &Matrices<R>) -> Mat<R> {
    let q = dense::orthonormalize(&mats.ker_basis);
    Mat::from_columns(mats.n + 1, &q)
}

/// Unique detailed balanced equilibrium in the class of `origin`, found by
/// damped Newton on `theta -> L_A(Q theta)`.
pub fn equilibrium_in_class<R: Real>(
    spec: &NetworkSpec<R>,
    mats: &Matrices<R>,
    reference: &ReferenceEquilibrium<R>,
    origin: &State<R>,
) -> Result<EquilibriumResult<R>> {
    equilibrium_in_class_from(spec, mats, reference, origin, None, &SolverOptions::default())
}

/// As [`equilibrium_in_class`] with an optional starting `theta` and options.
pub fn equilibrium_in_class_from<R: Real>(
    spec: &NetworkSpec<R>,
    mats: &Matrices<R>,
    reference: &ReferenceEquilibrium<R>,
    origin: &State<R>,
    theta0: Option<&[R]>,
    opts: &SolverOptions,
) -> Result<EquilibriumResult<R>> {
    if spec.energy_mode == EnergyMode::Isothermal {
        let te = spec.bath_temperature();
        let surface = spec.thermo.internal_energy(te, &origin.amounts);
        if (origin.energy - surface).abs() > tolerance::<R>(1e-9) * (R::one() + surface.abs()) {
            return Err(Error::Domain(format!(
                "isothermal origin must satisfy U = N^T u(T_env); U = {}, N^T u(T_env) = {}",
                origin.energy, surface
            )));
        }
    }
    let l = Legendre::new(spec, reference, origin)?;
    let q = dual_subspace(mats);
    let k = q.cols;
    let mut theta: Vec<R> = match theta0 {
        Some(t) if t.len() == k => t.to_vec(),
        Some(t) => {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: t.len(),
            })
        }
        None => vec![R::zero(); k],
    };
    let to_dual = |th: &[R]| DualPoint::from_slice(&q.mul_vec(th));
    let gtol = tolerance::<R>(opts.gradient_tol);
    let armijo = R::lit(opts.armijo);
    let shrink = R::lit(opts.backtrack);

    let mut dual = to_dual(&theta);
    let mut eval = l.evaluate(&dual)?;
    let mut iterations = 0;
    let mut gnorm;
    loop {
        let g = q.tr_mul_vec(&eval.gradient);
        gnorm = norm2(&g);
        if gnorm <= gtol * (R::one() + eval.value.abs()) {
            break;
        }
        if iterations == opts.max_iterations {
            return Err(Error::NotConverged {
                iterations,
                gradient_norm: gnorm.to_f64_lossy(),
            });
        }
        iterations += 1;
        let h = q.transpose().mul(&eval.hessian).mul(&q);
        let neg_g: Vec<R> = g.iter().map(|&x| -x).collect();
        let mut step = dense::cholesky_solve(&h, &neg_g).unwrap_or_else(|| neg_g.clone());
        let mut slope = dot(&g, &step);
        if !(slope < R::zero()) {
            step = neg_g.clone();
            slope = -gnorm * gnorm;
        }
        // below this the decrease of L_A is lost in its rounding, so progress
        // is judged by the projected gradient instead
        let flat = -slope <= R::lit(64.0) * R::epsilon() * (R::one() + eval.value.abs());
        let mut alpha = R::one();
        let mut accepted = false;
        for _ in 0..80 {
            let trial: Vec<R> = theta.iter().zip(&step).map(|(&a, &s)| a + alpha * s).collect();
            let d = to_dual(&trial);
            let next = if flat {
                l.evaluate(&d)
                    .ok()
                    .filter(|e| e.value.is_finite() && norm2(&q.tr_mul_vec(&e.gradient)) < gnorm)
            } else {
                let v = l.value(&d);
                if v <= eval.value + armijo * alpha * slope {
                    Some(l.evaluate(&d)?)
                } else {
                    None
                }
            };
            if let Some(e) = next {
                theta = trial;
                dual = d;
                eval = e;
                accepted = true;
                break;
            }
            alpha = alpha * shrink;
        }
        if !accepted {
            // no decrease representable: stationary to working precision
            let scale = R::one() + norm2(&origin.to_vec());
            if gnorm <= tolerance::<R>(1e-11) * scale {
                break;
            }
            return Err(Error::NotConverged {
                iterations,
                gradient_norm: gnorm.to_f64_lossy(),
            });
        }
    }
    let state = state_of_dual(spec, reference, &dual)?;
    let temperature = spec.thermo.temperature_of(&state)?;
    let residuals = detailed_balance_residual(spec, &state)?;
    Ok(EquilibriumResult {
        temperature,
        dual,
        iterations,
        gradient_norm: gnorm,
        value: eval.value,
        rate_residuals: residuals.iter().map(|p| p.rate).collect(),
        energy_residuals: residuals.iter().map(|p| p.energy).collect(),
        state,
    })
}
