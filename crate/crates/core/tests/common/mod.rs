#![allow(dead_code)]

use nicrn::equilibrium::{reference_equilibrium, ReferenceEquilibrium};
use nicrn::network::{build_matrices, parse_network, EnergyMode, Matrices, NetworkSpec};
use nicrn::networks;
use nicrn::thermo::State;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn load(text: &str) -> (NetworkSpec<f64>, Matrices<f64>) {
    let spec = parse_network::<f64>(text).unwrap();
    let mats = build_matrices(&spec);
    (spec, mats)
}

pub type Bundled = (&'static str, NetworkSpec<f64>, Matrices<f64>, ReferenceEquilibrium<f64>);

/// Bundled networks that admit a detailed balanced reference.
pub fn balanced() -> Vec<Bundled> {
    networks::ALL
        .iter()
        .filter(|(name, _)| *name != "triangle_unbalanced.crn")
        .map(|(name, text)| {
            let (spec, mats) = load(text);
            let reference = reference_equilibrium(&spec, &mats).unwrap();
            (*name, spec, mats, reference)
        })
        .collect()
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Random positive state; on the bath surface in isothermal mode.
pub fn random_state(spec: &NetworkSpec<f64>, rng: &mut ChaCha8Rng) -> State<f64> {
    let n: Vec<f64> = (0..spec.n_species()).map(|_| log_uniform(rng, 0.2, 5.0)).collect();
    let t = match spec.energy_mode {
        EnergyMode::Isothermal => spec.t_env.unwrap(),
        EnergyMode::Isolated => log_uniform(rng, 0.3, 3.0) * spec.t_env.unwrap_or(1.0),
    };
    State::new(spec.thermo.internal_energy(t, &n), n)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
