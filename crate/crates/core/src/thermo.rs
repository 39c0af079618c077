//! Statistical thermodynamics of an ideal mixture in a unit volume.
//!
//! Every species carries a partition function of the closed form
//! `Z(T) = z * T^p * exp(-e / (kappa T))`, which yields
//!
//! * `u(T) = e + kappa p T`
//! * `g(T) = e - kappa T ln z - kappa p T ln T`
//! * `s(T) = (u - g) / T`
//! * `c(T) = kappa p`
//!
//! The whole system is described by `(U, N)`; temperature follows from
//! inverting `U = N^T u(T)`, which is linear in `T` for this family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Product of Avogadro's number and Boltzmann's constant, i.e. the molar gas constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoConstants<R> {
    pub kappa: R,
}

impl<R: Real> Default for ThermoConstants<R> {
    fn default() -> Self {
        Self { kappa: R::one() }
    }
}

impl<R: Real> ThermoConstants<R> {
    pub fn new(kappa: R) -> Result<Self> {
        if !(kappa > R::zero()) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { kappa })
    }
}

/// Per-species partition-function parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesThermo<R> {
    pub name: String,
    pub z: R,
    pub p: R,
    pub e: R,
}

/// Molar quantities of one species at a given temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MolarQuantities<R> {
    pub partition: R,
    pub energy: R,
    pub free_energy: R,
    pub entropy: R,
    pub heat_capacity: R,
}

fn check_temperature<R: Real>(t: R) -> Result<()> {
    if t > R::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveTemperature)
    }
}

impl<R: Real> SpeciesThermo<R> {
    pub fn new(name: impl Into<String>, z: R, p: R, e: R) -> Result<Self> {
        let name = name.into();
        if !(z > R::zero()) {
            return Err(Error::Domain(format!("species {name}: z must be positive")));
        }
        if !(p > R::zero()) {
            return Err(Error::Domain(format!("species {name}: p must be positive")));
        }
        if !(e >= R::zero()) {
            return Err(Error::Domain(format!("species {name}: e must be nonnegative")));
        }
        Ok(Self { name, z, p, e })
    }

    pub fn partition(&self, t: R, k: &ThermoConstants<R>) -> R {
        self.z * t.powf(self.p) * (-self.e / (k.kappa * t)).exp()
    }

    /// `ln Z(T)`, evaluated without forming `Z`.
    pub fn ln_partition(&self, t: R, k: &ThermoConstants<R>) -> R {
        self.z.ln() + self.p * t.ln() - self.e / (k.kappa * t)
    }

    pub fn energy(&self, t: R, k: &ThermoConstants<R>) -> R {
        self.e + k.kappa * self.p * t
    }

    pub fn free_energy(&self, t: R, k: &ThermoConstants<R>) -> R {
        self.e - k.kappa * t * self.z.ln() - k.kappa * self.p * t * t.ln()
    }

    /// `g(T) / T`, which stays finite as `T -> 0+` only through `e / T`.
    pub fn free_energy_over_t(&self, t: R, k: &ThermoConstants<R>) -> R {
        -k.kappa * self.ln_partition(t, k)
    }

    pub fn entropy(&self, t: R, k: &ThermoConstants<R>) -> R {
        (self.energy(t, k) - self.free_energy(t, k)) / t
    }

    pub fn heat_capacity(&self, k: &ThermoConstants<R>) -> R {
        k.kappa * self.p
    }

    pub fn molar_quantities(&self, t: R, k: &ThermoConstants<R>) -> Result<MolarQuantities<R>> {
        check_temperature(t)?;
        let energy = self.energy(t, k);
        let free_energy = self.free_energy(t, k);
        Ok(MolarQuantities {
            partition: self.partition(t, k),
            energy,
            free_energy,
            entropy: (energy - free_energy) / t,
            heat_capacity: self.heat_capacity(k),
        })
    }
}

/// Thermodynamic state `(U, N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State<R> {
    #[serde(rename = "U")]
    pub energy: R,
    #[serde(rename = "N")]
    pub amounts: Vec<R>,
}

impl<R: Real> State<R> {
    pub fn new(energy: R, amounts: Vec<R>) -> Self {
        Self { energy, amounts }
    }

    /// Packs the state as `(U, N_1, ..., N_n)`.
    pub fn to_vec(&self) -> Vec<R> {
        let mut v = Vec::with_capacity(self.amounts.len() + 1);
        v.push(self.energy);
        v.extend_from_slice(&self.amounts);
        v
    }

    pub fn from_slice(v: &[R]) -> Self {
        Self {
            energy: v[0],
            amounts: v[1..].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.amounts.len() + 1
    }
}

/// Temperature and potentials derived from a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedState<R> {
    #[serde(rename = "T")]
    pub temperature: R,
    pub mu: Vec<R>,
    #[serde(rename = "S")]
    pub entropy: R,
    #[serde(rename = "G")]
    pub free_energy: R,
    #[serde(rename = "C")]
    pub heat_capacity: R,
}

/// The species list together with the constants: everything needed to map
/// a state to its thermodynamic potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoModel<R> {
    pub constants: ThermoConstants<R>,
    pub species: Vec<SpeciesThermo<R>>,
}

impl<R: Real> ThermoModel<R> {
    pub fn new(constants: ThermoConstants<R>, species: Vec<SpeciesThermo<R>>) -> Self {
        Self { constants, species }
    }

    pub fn kappa(&self) -> R {
        self.constants.kappa
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn energies(&self, t: R) -> Vec<R> {
        self.species.iter().map(|s| s.energy(t, &self.constants)).collect()
    }

    pub fn free_energies(&self, t: R) -> Vec<R> {
        self.species
            .iter()
            .map(|s| s.free_energy(t, &self.constants))
            .collect()
    }

    /// `g_i(T) / (kappa T) = -ln Z_i(T)`.
    pub fn reduced_free_energies(&self, t: R) -> Vec<R> {
        self.species
            .iter()
            .map(|s| -s.ln_partition(t, &self.constants))
            .collect()
    }

    /// `N^T u(T)`.
    pub fn internal_energy(&self, t: R, n: &[R]) -> R {
        self.species
            .iter()
            .zip(n)
            .map(|(s, &ni)| ni * s.energy(t, &self.constants))
            .sum()
    }

    /// `G(T, N) = sum_i (g_i(T) - kappa T) N_i + kappa T N_i ln N_i`.
    pub fn free_energy(&self, t: R, n: &[R]) -> R {
        let k = self.kappa();
        self.species
            .iter()
            .zip(n)
            .map(|(s, &ni)| (s.free_energy(t, &self.constants) - k * t) * ni + k * t * ni * ni.ln())
            .sum()
    }

    /// Heat capacity `dU/dT` at fixed amounts.
    pub fn heat_capacity(&self, n: &[R]) -> R {
        self.species
            .iter()
            .zip(n)
            .map(|(s, &ni)| ni * s.heat_capacity(&self.constants))
            .sum()
    }

    pub fn check_state(&self, state: &State<R>) -> Result<()> {
        if state.amounts.len() != self.species.len() {
            return Err(Error::DimensionMismatch {
                expected: self.species.len(),
                got: state.amounts.len(),
            });
        }
        if let Some(index) = state
            .amounts
            .iter()
            .position(|&x| !(x > R::zero()) || !x.is_finite())
        {
            return Err(Error::NonpositiveAmount { index });
        }
        Ok(())
    }

    /// Inverts `U = N^T u(T)`; closed form for the power-law family.
    pub fn temperature_of(&self, state: &State<R>) -> Result<R> {
        self.check_state(state)?;
        let ground: R = self
            .species
            .iter()
            .zip(&state.amounts)
            .map(|(s, &n)| n * s.e)
            .sum();
        let excess = state.energy - ground;
        if !(excess > R::zero()) {
            return Err(Error::NonpositiveTemperature);
        }
        let t = excess / self.heat_capacity(&state.amounts);
        check_temperature(t)?;
        Ok(t)
    }

    /// `mu_i = g_i(T) + kappa T ln N_i`.
    pub fn chemical_potentials(&self, t: R, n: &[R]) -> Vec<R> {
        let k = self.kappa();
        self.species
            .iter()
            .zip(n)
            .map(|(s, &ni)| s.free_energy(t, &self.constants) + k * t * ni.ln())
            .collect()
    }

    /// `mu_i / (kappa T) = ln N_i + g_i(T) / (kappa T)`.
    pub fn reduced_potentials(&self, t: R, n: &[R]) -> Vec<R> {
        self.species
            .iter()
            .zip(n)
            .map(|(s, &ni)| ni.ln() - s.ln_partition(t, &self.constants))
            .collect()
    }

    pub fn system_potentials(&self, state: &State<R>) -> Result<ResolvedState<R>> {
        let t = self.temperature_of(state)?;
        let g = self.free_energy(t, &state.amounts);
        Ok(ResolvedState {
            temperature: t,
            mu: self.chemical_potentials(t, &state.amounts),
            entropy: (state.energy - g) / t,
            free_energy: g,
            heat_capacity: self.heat_capacity(&state.amounts),
        })
    }

    /// Entropy as a function of `(U, N)`.
    pub fn entropy(&self, state: &State<R>) -> Result<R> {
        let t = self.temperature_of(state)?;
        Ok((state.energy - self.free_energy(t, &state.amounts)) / t)
    }

    /// `(dS/dU, dS/dN) = (1/T, -mu/T)`.
    pub fn entropy_gradient(&self, state: &State<R>) -> Result<(R, Vec<R>)> {
        let t = self.temperature_of(state)?;
        let mu = self.chemical_potentials(t, &state.amounts);
        Ok((t.recip(), mu.into_iter().map(|m| -m / t).collect()))
    }
}
