mod common;

use nicrn::equilibrium::{
    availability, availability_gradient, detailed_balance_residual, dual_of_state, dual_subspace,
    equilibrium_in_class, equilibrium_in_class_from, pseudo_helmholtz, reference_equilibrium, state_of_dual,
    wegscheider_check, DualPoint, Legendre, SolverOptions,
};
use nicrn::kinetics::vector_field;
use nicrn::linalg::dense;
use nicrn::network::{build_matrices, parse_network, EnergyMode};
use nicrn::networks;
use nicrn::thermo::State;
use nicrn::Error;
use rand::Rng;

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn example_reference_is_closed_form() {
    let (spec, mats) = common::load(networks::EXAMPLE_ISOLATED);
    let r = reference_equilibrium(&spec, &mats).unwrap();
    assert_eq!(r.t_star, 1.0);
    for (a, b) in r.state.amounts.iter().zip([1.0, 1.0, 2.0]) {
        assert!(common::rel_err(*a, b) < 1e-12);
    }
    assert!(common::rel_err(r.state.energy, 6.0) < 1e-12);
}

#[test]
fn balanced_inflow_outflow_reference() {
    let text = "[constants]\nT_env = 1\n[species]\nA { z = 1, p = 1.5, e = 0 }\n[reactions]\n@in A { k = 0.7 }\n@out A { k = 0.7 }\n";
    let (spec, mats) = common::load(text);
    let r = reference_equilibrium(&spec, &mats).unwrap();
    assert!((r.state.amounts[0] - 1.0).abs() < 1e-14);
}

#[test]
fn example_class_equilibrium_matches_bisection() {
    let (spec, mats) = common::load(networks::EXAMPLE_ISOLATED);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    let origin = State::new(6.0, vec![2.0, 2.0, 1.0]);
    let res = equilibrium_in_class(&spec, &mats, &reference, &origin).unwrap();
    // N = (3 - w, 3 - w, w), T = 4 / (6 - w), balance 2 (3 - w)^2 = w T^1.5
    let w = bisect(|w| 2.0 * (3.0 - w).powi(2) - w * (4.0 / (6.0 - w)).powf(1.5), 0.0, 3.0);
    let expected = [6.0, 3.0 - w, 3.0 - w, w];
    assert!(common::max_abs_diff(&res.state.to_vec(), &expected) < 1e-8, "{:?} vs {expected:?}", res.state);
    assert!((res.temperature - 4.0 / (6.0 - w)).abs() < 1e-8);
}

#[test]
fn availability_matches_termwise_oracle() {
    let (spec, mats) = common::load(networks::EXAMPLE_ISOLATED);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    let ln2 = 2f64.ln();
    // S = (U - sum (g_i - T) N_i - T sum N_i ln N_i) / T with g = -1.5 T ln T
    let entropy = |u: f64, n: [f64; 3]| {
        let total: f64 = n.iter().sum();
        let t = u / (1.5 * total);
        let g = -1.5 * t * t.ln();
        let nln: f64 = n.iter().map(|x| x * x.ln()).sum();
        (u - (g - t) * total - t * nln) / t
    };
    let s = entropy(6.0, [2.0, 2.0, 1.0]);
    let s_star = entropy(6.0, [1.0, 1.0, 2.0]);
    // mu* = (0, 0, ln 2), T* = 1
    let oracle = -s + s_star - ln2 * (1.0 - 2.0);
    let value = availability(&spec, &reference, &State::new(6.0, vec![2.0, 2.0, 1.0])).unwrap();
    assert!(value > 0.0);
    assert!((value - oracle).abs() < 1e-12 * (1.0 + oracle.abs()), "{value} vs {oracle}");
    assert!(availability(&spec, &reference, &reference.state).unwrap().abs() < 1e-14);
}

#[test]
fn pseudo_helmholtz_values() {
    let ln2 = 2f64.ln();
    assert!((pseudo_helmholtz(&[2.0, 2.0, 1.0], &[1.0, 1.0, 2.0]) - (3.0 * ln2 - 1.0)).abs() < 1e-14);
    assert_eq!(pseudo_helmholtz(&[1.0, 3.0], &[1.0, 3.0]), 0.0);
    let n_star = [0.5, 1.5, 2.0];
    let total: f64 = n_star.iter().sum();
    for c in [0.1, 0.5, 1.0, 2.0, 7.0] {
        let n: Vec<f64> = n_star.iter().map(|x| c * x).collect();
        let expected = c * c.ln() * total - (c - 1.0) * total;
        let got = pseudo_helmholtz(&n, &n_star);
        assert!((got - expected).abs() < 1e-12 * (1.0 + expected.abs()));
        assert!(got >= 0.0);
    }
}

#[test]
fn isothermal_availability_is_scaled_pseudo_helmholtz() {
    let text = "[constants]\nkappa = 2.0\nT_env = 1.7\nenergy_mode = isothermal\n[species]\nA { z = 2, p = 1.5, e = 0.3 }\nB { z = 0.5, p = 2.5, e = 0.1 }\nC { z = 1, p = 1.5, e = 0.8 }\n[reactions]\nA + B <-> C { kf = 1.3, kb = 0.6, gas = (2, 0.1, 0.4) }\n2 A <-> B { kf = 0.4, kb = 0.9, gas = (1.5, 0, 1) }\n";
    let (spec, mats) = common::load(text);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    assert_eq!(reference.t_star, 1.7);
    let mut rng = common::rng(31);
    for _ in 0..100 {
        let st = common::random_state(&spec, &mut rng);
        let s_a = availability(&spec, &reference, &st).unwrap();
        let g_a = pseudo_helmholtz(&st.amounts, &reference.state.amounts);
        assert!(common::rel_err(s_a, spec.kappa() * g_a) < 1e-12, "{s_a} vs {g_a}");
    }
}

#[test]
fn availability_positive_with_matching_gradient() {
    let mut rng = common::rng(32);
    for (name, spec, _, reference) in common::balanced() {
        assert!(availability(&spec, &reference, &reference.state).unwrap().abs() < 1e-12);
        for _ in 0..30 {
            let st = common::random_state(&spec, &mut rng);
            let s_a = availability(&spec, &reference, &st).unwrap();
            assert!(s_a > 0.0, "{name}");
            if spec.energy_mode == EnergyMode::Isothermal {
                continue;
            }
            let g = availability_gradient(&spec, &reference, &st).unwrap();
            let x = st.to_vec();
            for i in 0..x.len() {
                let h = 1e-6 * x[i].abs().max(1.0);
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                let fd = (availability(&spec, &reference, &State::from_slice(&a)).unwrap()
                    - availability(&spec, &reference, &State::from_slice(&b)).unwrap())
                    / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-5 * g[i].abs().max(1.0), "{name} [{i}]: {fd} vs {}", g[i]);
            }
        }
    }
}

#[test]
fn duality_round_trip() {
    let mut rng = common::rng(33);
    for (_, spec, _, reference) in common::balanced() {
        for _ in 0..200 {
            let st = common::random_state(&spec, &mut rng);
            let d = dual_of_state(&spec, &reference, &st).unwrap();
            let back = state_of_dual(&spec, &reference, &d).unwrap();
            for (a, b) in back.to_vec().iter().zip(st.to_vec()) {
                assert!(common::rel_err(*a, b) < 1e-10);
            }
        }
    }
}

fn random_dual(spec: &nicrn::Network, reference: &nicrn::equilibrium::ReferenceEquilibrium<f64>, rng: &mut rand_chacha::ChaCha8Rng) -> DualPoint<f64> {
    let mut st = common::random_state(spec, rng);
    if spec.energy_mode == EnergyMode::Isothermal {
        // leave the surface so beta varies too
        let t = common::log_uniform(rng, 0.3, 3.0) * spec.t_env.unwrap();
        st.energy = spec.thermo.internal_energy(t, &st.amounts);
    }
    dual_of_state(spec, reference, &st).unwrap()
}

#[test]
fn legendre_convexity() {
    let mut rng = common::rng(34);
    for (name, spec, _, reference) in common::balanced() {
        let origin = common::random_state(&spec, &mut rng);
        let l = Legendre::new(&spec, &reference, &origin).unwrap();
        let d0 = dual_of_state(&spec, &reference, &origin).unwrap();
        assert!(l.value(&d0).abs() < 1e-12);
        for _ in 0..200 {
            let d1 = random_dual(&spec, &reference, &mut rng).to_vec();
            let d2 = random_dual(&spec, &reference, &mut rng).to_vec();
            let t: f64 = rng.gen_range(0.0..1.0);
            let mix = |t: f64| DualPoint::from_slice(&d1.iter().zip(&d2).map(|(a, b)| t * a + (1.0 - t) * b).collect::<Vec<_>>());
            let (l1, l2) = (l.value(&DualPoint::from_slice(&d1)), l.value(&DualPoint::from_slice(&d2)));
            let scale = 1.0 + l1.abs() + l2.abs();
            assert!(l.value(&mix(t)) <= t * l1 + (1.0 - t) * l2 + 1e-12 * scale, "{name}");
            assert!(l.value(&mix(0.5)) < 0.5 * (l1 + l2), "{name}: not strict");
        }
    }
}

#[test]
fn legendre_gradient_and_hessian_match_finite_differences() {
    let mut rng = common::rng(35);
    for (name, spec, _, reference) in common::balanced() {
        let origin = common::random_state(&spec, &mut rng);
        let l = Legendre::new(&spec, &reference, &origin).unwrap();
        for _ in 0..100 {
            let d = random_dual(&spec, &reference, &mut rng).to_vec();
            let e = l.evaluate(&DualPoint::from_slice(&d)).unwrap();
            for i in 0..d.len() {
                let h = 1e-6 * d[i].abs().max(1.0);
                let shifted = |s: f64| {
                    let mut x = d.clone();
                    x[i] += s * h;
                    DualPoint::from_slice(&x)
                };
                let fd = (l.value(&shifted(1.0)) - l.value(&shifted(-1.0))) / (2.0 * h);
                let g = e.gradient[i];
                let scale = g.abs().max(1.0).max(1e-3 * e.value.abs());
                assert!((fd - g).abs() < 1e-5 * scale, "{name} [{i}]: {fd} vs {g}");
                let gp = l.evaluate(&shifted(1.0)).unwrap().gradient;
                let gm = l.evaluate(&shifted(-1.0)).unwrap().gradient;
                for k in 0..d.len() {
                    let fd = (gp[k] - gm[k]) / (2.0 * h);
                    let hk = e.hessian[(k, i)];
                    assert!((fd - hk).abs() < 1e-5 * hk.abs().max(1.0), "{name} H[{k},{i}]: {fd} vs {hk}");
                }
            }
        }
    }
}

#[test]
fn legendre_blows_up_toward_domain_edge() {
    let (spec, mats) = common::load(networks::EXAMPLE_ISOLATED);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    let l = Legendre::new(&spec, &reference, &State::new(6.0, vec![2.0, 2.0, 1.0])).unwrap();
    let edge = 1.0 / reference.t_star;
    let mut gap = 1.0;
    let mut crossed = None;
    while gap >= 1e-8 {
        let d = DualPoint {
            beta: edge - gap,
            gamma: vec![0.0; 3],
        };
        if l.value(&d) > 1e6 {
            crossed = Some(gap);
            break;
        }
        gap *= 0.5;
    }
    assert!(crossed.is_some());
    assert!(l.value(&DualPoint { beta: edge, gamma: vec![0.0; 3] }).is_infinite());
    assert!(state_of_dual(&spec, &reference, &DualPoint { beta: edge, gamma: vec![0.0; 3] }).is_err());
}

#[test]
fn sublevel_sets_are_bounded_along_rays() {
    let mut rng = common::rng(36);
    for (name, spec, mats, reference) in common::balanced() {
        let origin = common::random_state(&spec, &mut rng);
        let l = Legendre::new(&spec, &reference, &origin).unwrap();
        let q = dual_subspace(&mats);
        if q.cols == 0 {
            continue;
        }
        let zero = l.value(&DualPoint::zero(spec.n_species()));
        for _ in 0..20 {
            let theta: Vec<f64> = (0..q.cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dir = q.mul_vec(&theta);
            let mut s = 0.1;
            let mut exited = false;
            for _ in 0..80 {
                let d = DualPoint::from_slice(&dir.iter().map(|x| s * x).collect::<Vec<_>>());
                if l.value(&d) > zero {
                    exited = true;
                    break;
                }
                s *= 2.0;
            }
            assert!(exited, "{name}: ray {theta:?} stays in the sublevel set");
        }
    }
}

fn projection_onto_image(mats: &nicrn::NetworkMatrices, v: &[f64]) -> f64 {
    let basis = dense::orthonormalize(&mats.im_basis);
    basis
        .iter()
        .map(|b| b.iter().zip(v).map(|(x, y)| x * y).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn computed_equilibria_are_detailed_balanced() {
    let mut rng = common::rng(37);
    for (name, spec, mats, reference) in common::balanced() {
        for _ in 0..10 {
            let origin = common::random_state(&spec, &mut rng);
            let res = equilibrium_in_class(&spec, &mats, &reference, &origin).unwrap();
            let x = res.state.to_vec();
            let scale = 1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let (du, dn) = vector_field(&spec, &res.state).unwrap();
            assert!(du.abs() < 1e-8 * scale && dn.iter().all(|v| v.abs() < 1e-8 * scale), "{name}: {du} {dn:?}");
            let g = availability_gradient(&spec, &reference, &res.state).unwrap();
            assert!(projection_onto_image(&mats, &g) < 1e-8, "{name}");
            for p in detailed_balance_residual(&spec, &res.state).unwrap() {
                assert!(p.rate < 1e-8 && p.energy < 1e-8 * scale, "{name}: {p:?}");
            }
            // same compatibility class as the origin
            let x0 = origin.to_vec();
            for c in &mats.ker_basis {
                let drift: f64 = c.iter().zip(x.iter().zip(&x0)).map(|(ci, (a, b))| ci * (a - b)).sum();
                assert!(drift.abs() < 1e-9 * scale, "{name}: {drift}");
            }
            if spec.has_open_boundary() {
                assert!((res.temperature - spec.t_env.unwrap()).abs() < 1e-9, "{name}");
            }
        }
    }
}

#[test]
fn equilibrium_is_unique_over_restarts() {
    let mut rng = common::rng(38);
    let opts = SolverOptions::default();
    for (name, spec, mats, reference) in common::balanced() {
        let origin = common::random_state(&spec, &mut rng);
        let base = equilibrium_in_class(&spec, &mats, &reference, &origin).unwrap();
        let q = dual_subspace(&mats);
        let mut starts = 0;
        while starts < 10 {
            let theta: Vec<f64> = (0..q.cols).map(|_| rng.gen_range(-1.5..1.5)).collect();
            if q.mul_vec(&theta).first().is_some_and(|&b| b >= 0.9 / reference.t_star) {
                continue;
            }
            starts += 1;
            let res = equilibrium_in_class_from(&spec, &mats, &reference, &origin, Some(&theta), &opts).unwrap();
            let diff = common::max_abs_diff(&res.state.to_vec(), &base.state.to_vec());
            assert!(diff < 1e-7, "{name}: {diff}");
        }
    }
}

#[test]
fn reference_origin_is_its_own_equilibrium() {
    for (name, spec, mats, reference) in common::balanced() {
        let res = equilibrium_in_class(&spec, &mats, &reference, &reference.state).unwrap();
        assert!(common::max_abs_diff(&res.state.to_vec(), &reference.state.to_vec()) < 1e-10, "{name}");
    }
}

#[test]
fn isothermal_origin_must_sit_on_surface() {
    let (spec, mats) = common::load(networks::EXAMPLE_ISOTHERMAL);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    let off = State::new(9.0, vec![2.0, 2.0, 1.0]);
    assert!(equilibrium_in_class(&spec, &mats, &reference, &off).is_err());
}

#[test]
fn wegscheider_discriminates_triangles() {
    let (spec, mats) = common::load(networks::TRIANGLE_BALANCED);
    let w = wegscheider_check(&spec, &mats).unwrap();
    assert!(w.holds);
    assert_eq!(w.worst_residual, 0.0);

    let (spec, mats) = common::load(networks::TRIANGLE_UNBALANCED);
    let w = wegscheider_check(&spec, &mats).unwrap();
    assert!(!w.holds);
    assert!((w.worst_residual - 2f64.ln()).abs() < 1e-12);
    assert!(matches!(reference_equilibrium(&spec, &mats), Err(Error::NoDetailedBalance { .. })));

    let (spec, mats) = common::load(networks::EXAMPLE_ISOLATED);
    let w = wegscheider_check(&spec, &mats).unwrap();
    assert!(w.holds && w.worst_residual == 0.0);
}

#[test]
fn irreversible_networks_are_refused() {
    let text = "[species]\nA { p = 1.5 }\nB { p = 1.5 }\n[reactions]\nA -> B { k = 1, gas = (0, 0, 0) }\n";
    let spec = parse_network::<f64>(text).unwrap();
    let mats = build_matrices(&spec);
    assert!(matches!(wegscheider_check(&spec, &mats), Err(Error::Irreversible { index: 0 })));
    assert!(matches!(reference_equilibrium(&spec, &mats), Err(Error::Irreversible { .. })));
}

#[test]
fn pair_residuals() {
    let (spec, _) = common::load(networks::EXAMPLE_ISOLATED);
    for p in detailed_balance_residual(&spec, &State::new(6.0, vec![1.0, 1.0, 2.0])).unwrap() {
        assert!(p.rate < 1e-14 && p.energy < 1e-14);
    }
    let off = detailed_balance_residual(&spec, &State::new(6.0, vec![2.0, 2.0, 1.0])).unwrap();
    assert!(off[0].rate > 0.0);

    let (spec, _) = common::load(networks::HEAT_ONLY);
    let n = vec![1.3];
    let st = State::new(spec.thermo.internal_energy(2.0, &n), n);
    let r = detailed_balance_residual(&spec, &st).unwrap();
    assert_eq!(r.len(), 1);
    assert!(r[0].rate == 0.0 && r[0].energy < 1e-15);
}

#[test]
fn single_precision_equilibrium() {
    let spec = parse_network::<f32>(networks::EXAMPLE_ISOLATED).unwrap();
    let mats = build_matrices(&spec);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    assert!((reference.state.amounts[2] - 2.0).abs() < 1e-5);
    let res = equilibrium_in_class(&spec, &mats, &reference, &State::new(6.0f32, vec![2.0, 2.0, 1.0])).unwrap();
    let w = res.state.amounts[2];
    let t = 4.0 / (6.0 - w);
    assert!((2.0 * (3.0 - w).powi(2) - w * t.powf(1.5)).abs() < 1e-4);
}
