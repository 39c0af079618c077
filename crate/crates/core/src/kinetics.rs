//! Eyring rates and the `(U, N)` vector field.
//!
//! The rate of reaction `j` is
//! `v_j = k_j T exp(-(g_j^AS(T) - y_s^T g(T)) / (kappa T)) prod_i N_i^{y_s,i}`.
//! Inflows and heat exchange reduce to `v = k`, outflows to `v = k N_i`.

use serde::Serialize;

use crate::equilibrium::{detailed_balance_residual, ReferenceEquilibrium};
use crate::error::{Error, Result};
use crate::linalg::dense::Mat;
use crate::network::{Activation, Matrices, NetworkSpec, ReactionKind};
use crate::scalar::Real;
use crate::thermo::State;

/// Residual below which a reference counts as detailed balanced.
pub const BALANCE_TOL: f64 = 1e-10;

/// `ln v_j` from the general formula, at temperature `t` and log amounts `ln_n`.
fn ln_rate_general<R: Real>(spec: &NetworkSpec<R>, j: usize, t: R, g: &[R], ln_n: &[R]) -> R {
    let r = &spec.reactions[j];
    let kt = spec.kappa() * t;
    r.k.ln() + t.ln() - (r.gas.eval(t) - r.substrate.dot(g)) / kt + r.substrate.dot(ln_n)
}

/// Rate of every reaction using only the general Eyring expression.
pub fn reaction_rates_general<R: Real>(spec: &NetworkSpec<R>, state: &State<R>) -> Result<Vec<R>> {
    let t = spec.thermo.temperature_of(state)?;
    let g = spec.thermo.free_energies(t);
    let ln_n: Vec<R> = state.amounts.iter().map(|x| x.ln()).collect();
    Ok((0..spec.n_reactions())
        .map(|j| ln_rate_general(spec, j, t, &g, &ln_n).exp())
        .collect())
}

/// Rates at a known temperature; flux and heat-exchange rates use their
/// closed forms.
pub fn rates_at<R: Real>(spec: &NetworkSpec<R>, t: R, n: &[R]) -> Vec<R> {
    let g = spec.thermo.free_energies(t);
    let ln_n: Vec<R> = n.iter().map(|x| x.ln()).collect();
    spec.reactions
        .iter()
        .enumerate()
        .map(|(j, r)| match r.kind {
            ReactionKind::Chemical => ln_rate_general(spec, j, t, &g, &ln_n).exp(),
            ReactionKind::Inflow | ReactionKind::HeatExchange => r.k,
            ReactionKind::Outflow => r.k * n[r.substrate.as_single().expect("outflow of one species")],
        })
        .collect()
}

pub fn reaction_rates<R: Real>(spec: &NetworkSpec<R>, state: &State<R>) -> Result<Vec<R>> {
    let t = spec.thermo.temperature_of(state)?;
    Ok(rates_at(spec, t, &state.amounts))
}

/// `(dU/dt, dN/dt)` from per-reaction rates at temperature `t`.
fn assemble<R: Real>(spec: &NetworkSpec<R>, t: R, v: &[R]) -> (R, Vec<R>) {
    let mut du = R::zero();
    let mut dn = vec![R::zero(); spec.n_species()];
    let u_env = spec.t_env.map(|te| spec.thermo.energies(te));
    let u_t = spec.thermo.energies(t);
    for (j, r) in spec.reactions.iter().enumerate() {
        for &(i, c) in &r.product.terms {
            dn[i] = dn[i] + R::count(c as usize) * v[j];
        }
        for &(i, c) in &r.substrate.terms {
            dn[i] = dn[i] - R::count(c as usize) * v[j];
        }
        let delta = match r.kind {
            ReactionKind::Chemical => match &u_env {
                Some(u) if spec.energy_mode == crate::network::EnergyMode::Isothermal => {
                    r.product.dot(u) - r.substrate.dot(u)
                }
                _ => R::zero(),
            },
            ReactionKind::Inflow => u_env.as_ref().expect("T_env")[r.product.as_single().unwrap()],
            ReactionKind::Outflow => -u_t[r.substrate.as_single().unwrap()],
            ReactionKind::HeatExchange => spec.bath_temperature() - t,
        };
        du = du + delta * v[j];
    }
    (du, dn)
}

/// Right-hand side of the dynamics: `(dU/dt; dN/dt) = (Delta U; Gamma) v`.
pub fn vector_field<R: Real>(spec: &NetworkSpec<R>, state: &State<R>) -> Result<(R, Vec<R>)> {
    let t = spec.thermo.temperature_of(state)?;
    let v = rates_at(spec, t, &state.amounts);
    Ok(assemble(spec, t, &v))
}

/// Conductances of a detailed balanced reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conductances<R> {
    pub t_star: R,
    pub kappa: R,
    /// Forward rate of each chemical pair at the reference.
    pub cr_reference: Vec<R>,
    pub cr_gas: Vec<Activation<R>>,
    /// `K_IO`, one entry per flux pair.
    pub io: Vec<R>,
}

impl<R: Real> Conductances<R> {
    /// Diagonal of `K_CR(T)`.
    pub fn cr(&self, t: R) -> Vec<R> {
        let kt = self.kappa * t;
        let kts = self.kappa * self.t_star;
        self.cr_gas
            .iter()
            .zip(&self.cr_reference)
            .map(|(g, &v)| (t / self.t_star) * (-g.eval(t) / kt + g.eval(self.t_star) / kts).exp() * v)
            .collect()
    }
}

fn require_reversible<R: Real>(spec: &NetworkSpec<R>) -> Result<()> {
    match spec.unpaired().first() {
        Some(&index) => Err(Error::Irreversible { index }),
        None => Ok(()),
    }
}

pub fn conductance_matrices<R: Real>(
    spec: &NetworkSpec<R>,
    reference: &ReferenceEquilibrium<R>,
) -> Result<Conductances<R>> {
    require_reversible(spec)?;
    let residuals = detailed_balance_residual(spec, &reference.state)?;
    let rate = residuals.iter().map(|p| p.rate.to_f64_lossy()).fold(0.0, f64::max);
    let energy = residuals.iter().map(|p| p.energy.to_f64_lossy()).fold(0.0, f64::max);
    let scale = 1.0 + reference.state.energy.abs().to_f64_lossy();
    if !(rate < BALANCE_TOL && energy < BALANCE_TOL * scale) {
        return Err(Error::NotDetailedBalanced { rate, energy });
    }
    let t_star = reference.t_star;
    let v = rates_at(spec, t_star, &reference.state.amounts);
    let cr_pairs = spec.chemical_pairs();
    for &(f, b) in &cr_pairs {
        // both members must give the same conductance
        let rel = (v[f] - v[b]).abs() / v[f].max(v[b]);
        if !(rel.to_f64_lossy() < BALANCE_TOL) {
            return Err(Error::NotDetailedBalanced { rate: rel.to_f64_lossy(), energy });
        }
    }
    Ok(Conductances {
        t_star,
        kappa: spec.kappa(),
        cr_reference: cr_pairs.iter().map(|&(f, _)| v[f]).collect(),
        cr_gas: cr_pairs.iter().map(|&(f, _)| spec.reactions[f].gas).collect(),
        io: spec.flux_pairs().iter().map(|&(f, _)| v[f]).collect(),
    })
}

/// Rates rebuilt from the conductance form; equal to [`rates_at`] on
/// detailed balanced networks.
pub fn compact_rates<R: Real>(
    spec: &NetworkSpec<R>,
    reference: &ReferenceEquilibrium<R>,
    cond: &Conductances<R>,
    t: R,
    n: &[R],
) -> Vec<R> {
    let kappa = spec.kappa();
    let mu = spec.thermo.chemical_potentials(t, n);
    // mu / (kappa T) - mu* / (kappa T*)
    let w: Vec<R> = mu
        .iter()
        .zip(&reference.mu_star)
        .map(|(&m, &ms)| m / (kappa * t) - ms / (kappa * reference.t_star))
        .collect();
    let ln_ratio: Vec<R> = n
        .iter()
        .zip(&reference.state.amounts)
        .map(|(&x, &xs)| x.ln() - xs.ln())
        .collect();
    let k_cr = cond.cr(t);
    let mut v = vec![R::zero(); spec.n_reactions()];
    for (p, &(f, b)) in spec.chemical_pairs().iter().enumerate() {
        v[f] = k_cr[p] * spec.reactions[f].substrate.dot(&w).exp();
        v[b] = k_cr[p] * spec.reactions[b].substrate.dot(&w).exp();
    }
    for (p, &(f, b)) in spec.flux_pairs().iter().enumerate() {
        v[f] = cond.io[p] * spec.reactions[f].substrate.dot(&ln_ratio).exp();
        v[b] = cond.io[p] * spec.reactions[b].substrate.dot(&ln_ratio).exp();
    }
    for j in spec.heat_exchanges() {
        v[j] = spec.reactions[j].k;
    }
    v
}

/// Vector field in the detailed balanced form
/// `dN/dt = -Y B_CR K_CR(T) B_CR^T Exp(Y^T w) - Y B_IO K_IO B_IO^T Exp(Y^T (Ln N - Ln N*))`.
pub fn compact_vector_field<R: Real>(
    spec: &NetworkSpec<R>,
    mats: &Matrices<R>,
    reference: &ReferenceEquilibrium<R>,
    cond: &Conductances<R>,
    state: &State<R>,
) -> Result<(R, Vec<R>)> {
    let t = spec.thermo.temperature_of(state)?;
    let n = &state.amounts;
    let kappa = spec.kappa();
    let mu = spec.thermo.chemical_potentials(t, n);
    let w: Vec<R> = mu
        .iter()
        .zip(&reference.mu_star)
        .map(|(&m, &ms)| m / (kappa * t) - ms / (kappa * reference.t_star))
        .collect();
    let ln_ratio: Vec<R> = n
        .iter()
        .zip(&reference.state.amounts)
        .map(|(&x, &xs)| x.ln() - xs.ln())
        .collect();
    // Exp(Y^T w) per complex
    let exp_cr: Vec<R> = spec.complexes.iter().map(|c| c.dot(&w).exp()).collect();
    let exp_io: Vec<R> = spec.complexes.iter().map(|c| c.dot(&ln_ratio).exp()).collect();
    let k_cr = cond.cr(t);
    let ns = spec.n_species();
    let mut dn = vec![R::zero(); ns];
    let mut push = |col: usize, k: R, exps: &[R]| {
        // -Y b k b^T e for one column b of B
        let s: R = (0..mats.m).map(|c| R::lit(mats.b[c][col] as f64) * exps[c]).sum();
        for (i, d) in dn.iter_mut().enumerate() {
            let yb: i64 = (0..mats.m).map(|c| mats.y[i][c] * mats.b[c][col]).sum();
            *d = *d - R::lit(yb as f64) * k * s;
        }
    };
    for (p, col) in mats.b_columns(true).enumerate() {
        push(col, k_cr[p], &exp_cr);
    }
    for (p, col) in mats.b_columns(false).enumerate() {
        push(col, cond.io[p], &exp_io);
    }
    let v = compact_rates(spec, reference, cond, t, n);
    let mut du = R::zero();
    for (j, r) in spec.reactions.iter().enumerate() {
        du = du
            + match r.kind {
                ReactionKind::HeatExchange => r.k * (reference.t_star - t),
                _ => spec.energy_change(j, t) * v[j],
            };
    }
    Ok((du, dn))
}

/// `L = B diag(k) B^T` for an integer `B` (`m x p`).
pub fn laplacian<R: Real>(b: &[Vec<i64>], k: &[R]) -> Result<Mat<R>> {
    if let Some(bad) = k.iter().position(|x| !(*x > R::zero())) {
        return Err(Error::Domain(format!("conductance {bad} is not positive")));
    }
    let m = b.len();
    let mut l = Mat::zeros(m, m);
    for (p, &kp) in k.iter().enumerate() {
        for a in 0..m {
            if b[a][p] == 0 {
                continue;
            }
            for c in 0..m {
                l[(a, c)] = l[(a, c)] + R::lit((b[a][p] * b[c][p]) as f64) * kp;
            }
        }
    }
    Ok(l)
}

/// `gamma^T L Exp(gamma)`.
pub fn laplacian_form<R: Real>(l: &Mat<R>, gamma: &[R]) -> R {
    let e: Vec<R> = gamma.iter().map(|x| x.exp()).collect();
    crate::scalar::dot(gamma, &l.mul_vec(&e))
}

/// Dissipation of flux reaction `j` at temperature `t` relative to `t_star`:
/// `(1/T* - 1/T) Delta U_j + (g(T)/T - g(T*)/T*)^T (Y D)_j`.
/// Zero at `T = T*` and negative elsewhere.
pub fn flux_dissipation<R: Real>(spec: &NetworkSpec<R>, j: usize, t: R, t_star: R) -> R {
    let r = &spec.reactions[j];
    let k = spec.constants();
    let (i, sign, du) = match r.kind {
        ReactionKind::Inflow => {
            let i = r.product.as_single().unwrap();
            (i, R::one(), spec.thermo.species[i].energy(t_star, k))
        }
        ReactionKind::Outflow => {
            let i = r.substrate.as_single().unwrap();
            (i, -R::one(), -spec.thermo.species[i].energy(t, k))
        }
        _ => return R::zero(),
    };
    let s = &spec.thermo.species[i];
    (t_star.recip() - t.recip()) * du + sign * (s.free_energy_over_t(t, k) - s.free_energy_over_t(t_star, k))
}
