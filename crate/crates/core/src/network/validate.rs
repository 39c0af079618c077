use serde::Serialize;

use super::{Activation, EnergyMode, NetworkSpec, ReactionKind};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionStatus {
    pub condition: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Species indices for Condition 1, reaction indices otherwise.
    pub offending: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub conditions: Vec<ConditionStatus>,
    /// Reactions with no reverse partner. Simulation accepts them, balance
    /// analysis does not.
    pub unpaired: Vec<usize>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn condition(&self, c: u8) -> &ConditionStatus {
        &self.conditions[usize::from(c) - 1]
    }
}

fn status(condition: u8, name: &'static str, offending: Vec<usize>, detail: String) -> ConditionStatus {
    ConditionStatus {
        condition,
        name,
        passed: offending.is_empty(),
        offending,
        detail,
    }
}

fn list(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
}

pub fn validate_conditions<R: Real>(spec: &NetworkSpec<R>) -> ValidationReport {
    let species = spec.species();
    let kappa = spec.kappa();

    // 1: partition functions grow without bound
    let bad: Vec<usize> = species
        .iter()
        .enumerate()
        .filter(|(_, s)| !(s.p > R::zero() && s.z > R::zero()))
        .map(|(i, _)| i)
        .collect();
    let names: Vec<&str> = bad.iter().map(|&i| species[i].name.as_str()).collect();
    let c1 = status(
        1,
        "partition functions unbounded in T",
        bad,
        if names.is_empty() {
            "every species has p > 0".into()
        } else {
            format!("p <= 0 for {}", names.join(", "))
        },
    );

    // 2: classification and block order CR, IO, HE
    let mut bad = Vec::new();
    let mut last_block = 0u8;
    for (j, r) in spec.reactions.iter().enumerate() {
        let shape_ok = match r.kind {
            ReactionKind::Chemical => !r.substrate.is_zero() && !r.product.is_zero() && r.substrate != r.product,
            ReactionKind::Inflow => r.substrate.is_zero() && r.product.as_single().is_some(),
            ReactionKind::Outflow => r.product.is_zero() && r.substrate.as_single().is_some(),
            ReactionKind::HeatExchange => r.substrate.is_zero() && r.product.is_zero(),
        };
        let block = r.kind.block();
        if !shape_ok || block < last_block || !(r.k > R::zero()) {
            bad.push(j);
        }
        last_block = last_block.max(block);
    }
    let detail = if bad.is_empty() {
        let c = spec.counts();
        format!("r_CR = {}, r_IO = {}, r_HE = {}", c.cr, c.io, c.he)
    } else {
        format!("misclassified or misordered reactions {}", list(&bad))
    };
    let c2 = status(2, "reaction classes and ordering", bad, detail);

    // 3: energy bookkeeping branch
    let bad: Vec<usize> = match spec.energy_mode {
        EnergyMode::Isolated => Vec::new(),
        EnergyMode::Isothermal => spec
            .reactions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind != ReactionKind::Chemical)
            .map(|(j, _)| j)
            .collect(),
    };
    let missing_bath = spec.t_env.is_none() && (spec.has_open_boundary() || spec.energy_mode == EnergyMode::Isothermal);
    let detail = if !bad.is_empty() {
        format!("isothermal mode forbids mass or heat exchange, found reactions {}", list(&bad))
    } else if missing_bath {
        "T_env required".into()
    } else {
        match spec.energy_mode {
            EnergyMode::Isolated => "chemical reactions conserve U".into(),
            EnergyMode::Isothermal => "chemical reactions exchange energy at T_env".into(),
        }
    };
    let mut c3 = status(3, "energy balance of reactions", bad, detail);
    c3.passed &= !missing_bath;

    // 4: synthesized barriers of fluxes and heat exchange
    let tol = R::lit(1e-12);
    let bad: Vec<usize> = spec
        .reactions
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            let expected = match r.kind {
                ReactionKind::Chemical => return false,
                ReactionKind::Inflow | ReactionKind::HeatExchange => Activation::flux(kappa),
                ReactionKind::Outflow => match r.substrate.as_single() {
                    Some(i) => Activation::outflow(kappa, &species[i]),
                    None => return true,
                },
            };
            !r.gas.approx_eq(&expected, tol)
        })
        .map(|(j, _)| j)
        .collect();
    let detail = if bad.is_empty() {
        "flux and heat-exchange barriers are kappa T ln T (+ g_i)".into()
    } else {
        format!("unexpected activation model on reactions {}", list(&bad))
    };
    let c4 = status(4, "activation free energy of fluxes", bad, detail);

    // 5: paired chemical reactions share the activated state
    let mut bad = Vec::new();
    let mut pairs_named = Vec::new();
    for (f, b) in spec.chemical_pairs() {
        if spec.reactions[f].gas != spec.reactions[b].gas {
            bad.push(f);
            bad.push(b);
            pairs_named.push(format!(
                "({f}, {b}) `{} -> {}`",
                spec.reactions[f].substrate.render(species),
                spec.reactions[f].product.render(species)
            ));
        }
    }
    let detail = if bad.is_empty() {
        "paired reactions share activation models".into()
    } else {
        format!("activation models differ in pair {}", pairs_named.join("; "))
    };
    let c5 = status(5, "shared activated state of reversible pairs", bad, detail);

    ValidationReport {
        conditions: vec![c1, c2, c3, c4, c5],
        unpaired: spec.unpaired(),
    }
}
