//! Reaction network description: species, complexes, classified reactions.
//!
//! Reactions are kept in a normalized order: chemical reactions (paired
//! forward/backward first, then irreversible ones), mass in/out fluxes
//! (paired in/out first), heat exchanges last. A reversible pair always
//! occupies two adjacent slots with the forward member first.

mod matrices;
mod parse;
mod validate;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use matrices::{build_matrices, kernel_image, GammaTildeForm, KernelImage, Matrices};
pub use parse::{parse_document, parse_network};
pub use validate::{validate_conditions, ConditionStatus, ValidationReport};

use crate::scalar::Real;
use crate::thermo::{SpeciesThermo, ThermoConstants, ThermoModel};

/// Integer combination of species; terms are sorted by species index and
/// carry positive coefficients. The empty complex is the zero complex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Complex {
    pub terms: Vec<(usize, u32)>,
}

impl Complex {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(species: usize) -> Self {
        Self {
            terms: vec![(species, 1)],
        }
    }

    /// Builds a canonical complex, merging repeated species.
    pub fn from_terms(terms: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map: std::collections::BTreeMap<usize, u32> = Default::default();
        for (s, c) in terms {
            *map.entry(s).or_default() += c;
        }
        Self {
            terms: map.into_iter().filter(|&(_, c)| c > 0).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, species: usize) -> u32 {
        self.terms
            .iter()
            .find(|&&(s, _)| s == species)
            .map_or(0, |&(_, c)| c)
    }

    /// Single species with coefficient one, if that is what this complex is.
    pub fn as_single(&self) -> Option<usize> {
        match self.terms.as_slice() {
            [(s, 1)] => Some(*s),
            _ => None,
        }
    }

    pub fn dense(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        for &(s, c) in &self.terms {
            v[s] = i64::from(c);
        }
        v
    }

    /// `y^T x`.
    pub fn dot<R: Real>(&self, x: &[R]) -> R {
        self.terms
            .iter()
            .map(|&(s, c)| R::count(c as usize) * x[s])
            .sum()
    }

    pub fn render(&self, species: &[SpeciesThermo<impl Real>]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(s, c)| {
                if c == 1 {
                    species[s].name.clone()
                } else {
                    format!("{c} {}", species[s].name)
                }
            })
            .collect();
        parts.join(" + ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReactionKind {
    #[serde(rename = "CR")]
    Chemical,
    #[serde(rename = "IO_IN")]
    Inflow,
    #[serde(rename = "IO_OUT")]
    Outflow,
    #[serde(rename = "HE")]
    HeatExchange,
}

impl ReactionKind {
    pub fn is_flux(self) -> bool {
        matches!(self, Self::Inflow | Self::Outflow)
    }

    fn block(self) -> u8 {
        match self {
            Self::Chemical => 0,
            Self::Inflow | Self::Outflow => 1,
            Self::HeatExchange => 2,
        }
    }
}

/// Activated-state free energy `g(T) = a + b T + c T ln T`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Activation<R> {
    pub a: R,
    pub b: R,
    pub c: R,
}

impl<R: Real> Activation<R> {
    pub fn new(a: R, b: R, c: R) -> Self {
        Self { a, b, c }
    }

    pub fn eval(&self, t: R) -> R {
        self.a + self.b * t + self.c * t * t.ln()
    }

    /// `kappa T ln T`, the barrier of inflows and heat exchange.
    pub fn flux(kappa: R) -> Self {
        Self::new(R::zero(), R::zero(), kappa)
    }

    /// `kappa T ln T + g_i(T)`, the barrier of an outflow of species `i`.
    pub fn outflow(kappa: R, species: &SpeciesThermo<R>) -> Self {
        Self::new(species.e, -kappa * species.z.ln(), kappa * (R::one() - species.p))
    }

    pub(crate) fn approx_eq(&self, other: &Self, rel: R) -> bool {
        let close = |x: R, y: R| (x - y).abs() <= rel * (R::one() + x.abs().max(y.abs()));
        close(self.a, other.a) && close(self.b, other.b) && close(self.c, other.c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reaction<R> {
    pub kind: ReactionKind,
    pub substrate: Complex,
    pub product: Complex,
    /// Rate constant `k~ > 0`.
    pub k: R,
    pub gas: Activation<R>,
    /// Index of the reverse reaction; heat exchanges pair with themselves.
    pub pair: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyMode {
    /// Chemical reactions leave `U` unchanged.
    #[default]
    Isolated,
    /// Chemical reactions exchange `(y' - y)^T u(T_env)` with a bath.
    Isothermal,
}

/// A parsed and normalized network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec<R> {
    pub thermo: ThermoModel<R>,
    #[serde(rename = "T_env")]
    pub t_env: Option<R>,
    pub energy_mode: EnergyMode,
    /// Every reaction must be paired when set.
    pub reversible: bool,
    pub reactions: Vec<Reaction<R>>,
    /// Distinct complexes in order of first appearance.
    pub complexes: Vec<Complex>,
}

/// Reaction counts per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct KindCounts {
    pub cr: usize,
    pub io: usize,
    pub he: usize,
}

impl<R: Real> NetworkSpec<R> {
    /// Assembles a spec from reactions in any order, normalizing the order
    /// and interning complexes. Pair indices in `reactions` refer to the
    /// input order and are remapped.
    pub fn assemble(
        thermo: ThermoModel<R>,
        t_env: Option<R>,
        energy_mode: EnergyMode,
        reversible: bool,
        reactions: Vec<Reaction<R>>,
    ) -> Self {
        let order = normalized_order(&reactions);
        let mut position = vec![0; reactions.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let reactions: Vec<Reaction<R>> = order
            .iter()
            .map(|&old| {
                let mut r = reactions[old].clone();
                r.pair = r.pair.map(|p| position[p]);
                r
            })
            .collect();
        let mut complexes: Vec<Complex> = Vec::new();
        for r in &reactions {
            for c in [&r.substrate, &r.product] {
                if !complexes.contains(c) {
                    complexes.push(c.clone());
                }
            }
        }
        Self {
            thermo,
            t_env,
            energy_mode,
            reversible,
            reactions,
            complexes,
        }
    }

    pub fn constants(&self) -> &ThermoConstants<R> {
        &self.thermo.constants
    }

    pub fn species(&self) -> &[SpeciesThermo<R>] {
        &self.thermo.species
    }

    pub fn n_species(&self) -> usize {
        self.thermo.species.len()
    }

    pub fn n_complexes(&self) -> usize {
        self.complexes.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn kappa(&self) -> R {
        self.thermo.constants.kappa
    }

    pub fn counts(&self) -> KindCounts {
        let mut c = KindCounts::default();
        for r in &self.reactions {
            match r.kind {
                ReactionKind::Chemical => c.cr += 1,
                ReactionKind::Inflow | ReactionKind::Outflow => c.io += 1,
                ReactionKind::HeatExchange => c.he += 1,
            }
        }
        c
    }

    pub fn has_open_boundary(&self) -> bool {
        self.reactions.iter().any(|r| r.kind != ReactionKind::Chemical)
    }

    pub fn complex_index(&self, c: &Complex) -> usize {
        self.complexes
            .iter()
            .position(|x| x == c)
            .expect("complex interned at assembly")
    }

    /// Forward/backward index pairs in column order of `B`
    /// (chemical pairs first, then flux pairs).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.pairs_of(|k| k == ReactionKind::Chemical)
            .into_iter()
            .chain(self.pairs_of(ReactionKind::is_flux))
            .collect()
    }

    pub fn chemical_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs_of(|k| k == ReactionKind::Chemical)
    }

    pub fn flux_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs_of(ReactionKind::is_flux)
    }

    fn pairs_of(&self, keep: impl Fn(ReactionKind) -> bool) -> Vec<(usize, usize)> {
        self.reactions
            .iter()
            .enumerate()
            .filter(|(_, r)| keep(r.kind))
            .filter_map(|(j, r)| r.pair.filter(|&p| p > j).map(|p| (j, p)))
            .collect()
    }

    pub fn heat_exchanges(&self) -> Vec<usize> {
        self.reactions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind == ReactionKind::HeatExchange)
            .map(|(j, _)| j)
            .collect()
    }

    /// Reactions without a reverse partner.
    pub fn unpaired(&self) -> Vec<usize> {
        self.reactions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.pair.is_none())
            .map(|(j, _)| j)
            .collect()
    }

    pub fn is_reversible(&self) -> bool {
        self.reactions.iter().all(|r| r.pair.is_some())
    }

    /// Bath temperature; callers only ask for it when the network needs one.
    pub fn bath_temperature(&self) -> R {
        self.t_env.expect("T_env validated at parse time")
    }

    /// Energy change per firing of reaction `j` at system temperature `t`.
    pub fn energy_change(&self, j: usize, t: R) -> R {
        let r = &self.reactions[j];
        let k = self.constants();
        match r.kind {
            ReactionKind::Chemical => match self.energy_mode {
                EnergyMode::Isolated => R::zero(),
                EnergyMode::Isothermal => {
                    let u = self.thermo.energies(self.bath_temperature());
                    r.product.dot(&u) - r.substrate.dot(&u)
                }
            },
            ReactionKind::Inflow => {
                let i = r.product.as_single().expect("inflow product is one species");
                self.thermo.species[i].energy(self.bath_temperature(), k)
            }
            ReactionKind::Outflow => {
                let i = r.substrate.as_single().expect("outflow substrate is one species");
                -self.thermo.species[i].energy(t, k)
            }
            ReactionKind::HeatExchange => self.bath_temperature() - t,
        }
    }

    /// `Delta U` is the same constant for every state.
    pub fn energy_change_is_constant(&self) -> bool {
        !self.has_open_boundary()
    }

    /// Serializes back into the input language.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let k = self.kappa();
        let _ = writeln!(out, "[constants]");
        let _ = writeln!(out, "kappa = {:?}", k.to_f64_lossy());
        if let Some(t) = self.t_env {
            let _ = writeln!(out, "T_env = {:?}", t.to_f64_lossy());
        }
        let mode = match self.energy_mode {
            EnergyMode::Isolated => "isolated",
            EnergyMode::Isothermal => "isothermal",
        };
        let _ = writeln!(out, "energy_mode = {mode}");
        if self.reversible {
            let _ = writeln!(out, "reversible = true");
        }
        let _ = writeln!(out, "\n[species]");
        for s in self.species() {
            let _ = writeln!(
                out,
                "{} {{ z = {:?}, p = {:?}, e = {:?} }}",
                s.name,
                s.z.to_f64_lossy(),
                s.p.to_f64_lossy(),
                s.e.to_f64_lossy()
            );
        }
        let _ = writeln!(out, "\n[reactions]");
        let species = self.species();
        let gas = |g: &Activation<R>| {
            format!(
                "({:?}, {:?}, {:?})",
                g.a.to_f64_lossy(),
                g.b.to_f64_lossy(),
                g.c.to_f64_lossy()
            )
        };
        let mut done = vec![false; self.reactions.len()];
        for (j, r) in self.reactions.iter().enumerate() {
            if done[j] {
                continue;
            }
            done[j] = true;
            match r.kind {
                ReactionKind::Chemical => {
                    let partner = r.pair.map(|p| &self.reactions[p]);
                    match partner {
                        Some(b) if b.gas == r.gas => {
                            done[r.pair.unwrap()] = true;
                            let _ = writeln!(
                                out,
                                "{} <-> {} {{ kf = {:?}, kb = {:?}, gas = {} }}",
                                r.substrate.render(species),
                                r.product.render(species),
                                r.k.to_f64_lossy(),
                                b.k.to_f64_lossy(),
                                gas(&r.gas)
                            );
                        }
                        _ => {
                            let _ = writeln!(
                                out,
                                "{} -> {} {{ k = {:?}, gas = {} }}",
                                r.substrate.render(species),
                                r.product.render(species),
                                r.k.to_f64_lossy(),
                                gas(&r.gas)
                            );
                        }
                    }
                }
                ReactionKind::Inflow => {
                    let i = r.product.as_single().unwrap();
                    let _ = writeln!(out, "@in {} {{ k = {:?} }}", species[i].name, r.k.to_f64_lossy());
                }
                ReactionKind::Outflow => {
                    let i = r.substrate.as_single().unwrap();
                    let _ = writeln!(out, "@out {} {{ k = {:?} }}", species[i].name, r.k.to_f64_lossy());
                }
                ReactionKind::HeatExchange => {
                    let _ = writeln!(out, "@heat {{ k = {:?} }}", r.k.to_f64_lossy());
                }
            }
        }
        out
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<S: Real>(&self) -> NetworkSpec<S> {
        let c = |x: R| S::lit(x.to_f64_lossy());
        NetworkSpec {
            thermo: ThermoModel {
                constants: ThermoConstants {
                    kappa: c(self.kappa()),
                },
                species: self
                    .species()
                    .iter()
                    .map(|s| SpeciesThermo {
                        name: s.name.clone(),
                        z: c(s.z),
                        p: c(s.p),
                        e: c(s.e),
                    })
                    .collect(),
            },
            t_env: self.t_env.map(c),
            energy_mode: self.energy_mode,
            reversible: self.reversible,
            reactions: self
                .reactions
                .iter()
                .map(|r| Reaction {
                    kind: r.kind,
                    substrate: r.substrate.clone(),
                    product: r.product.clone(),
                    k: c(r.k),
                    gas: Activation::new(c(r.gas.a), c(r.gas.b), c(r.gas.c)),
                    pair: r.pair,
                })
                .collect(),
            complexes: self.complexes.clone(),
        }
    }

    pub fn species_index(&self) -> HashMap<&str, usize> {
        self.species()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.as_str(), i))
            .collect()
    }
}

/// CR pairs, CR singles, IO pairs, IO singles, HE; stable within each group.
fn normalized_order<R>(reactions: &[Reaction<R>]) -> Vec<usize> {
    let mut order = Vec::with_capacity(reactions.len());
    for block in 0..3u8 {
        let in_block: Vec<usize> = (0..reactions.len())
            .filter(|&j| reactions[j].kind.block() == block)
            .collect();
        let mut placed = vec![false; reactions.len()];
        for &j in &in_block {
            if placed[j] {
                continue;
            }
            match reactions[j].pair {
                Some(p) if p != j => {
                    // inflow leads an in/out pair regardless of input order
                    let (first, second) = if reactions[p].kind == ReactionKind::Inflow {
                        (p, j)
                    } else {
                        (j, p)
                    };
                    order.push(first);
                    order.push(second);
                    placed[j] = true;
                    placed[p] = true;
                }
                _ => {}
            }
        }
        for &j in &in_block {
            if !placed[j] {
                order.push(j);
            }
        }
    }
    order
}
