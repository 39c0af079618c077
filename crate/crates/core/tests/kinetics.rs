#![allow(clippy::needless_range_loop)]
mod common;

use nalgebra::{DMatrix, DVector};
use nicrn::equilibrium::reference_equilibrium;
use nicrn::kinetics::{
    compact_vector_field, conductance_matrices, flux_dissipation, laplacian, laplacian_form, rates_at, vector_field,
};
use nicrn::networks;
use nicrn::thermo::State;
use rand::Rng;

#[test]
fn compact_form_equals_direct_form() {
    let mut rng = common::rng(21);
    for (name, spec, mats, reference) in common::balanced() {
        let cond = conductance_matrices(&spec, &reference).unwrap();
        for _ in 0..1000 {
            let st = common::random_state(&spec, &mut rng);
            let (du, dn) = vector_field(&spec, &st).unwrap();
            let (cu, cn) = compact_vector_field(&spec, &mats, &reference, &cond, &st).unwrap();
            let mut direct = vec![du];
            direct.extend(dn);
            let mut compact = vec![cu];
            compact.extend(cn);
            // relative to the size of the individual reaction terms
            let t = spec.thermo.temperature_of(&st).unwrap();
            let v = rates_at(&spec, t, &st.amounts);
            let flux_scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>() * (1.0 + t + st.energy.abs());
            for (a, b) in direct.iter().zip(&compact) {
                assert!(
                    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-3 * flux_scale),
                    "{name}: {direct:?} vs {compact:?}"
                );
            }
        }
    }
}

#[test]
fn example_rates_vanish_at_reference() {
    let (spec, _) = common::load(networks::EXAMPLE_ISOLATED);
    let (du, dn) = vector_field(&spec, &State::new(6.0, vec![1.0, 1.0, 2.0])).unwrap();
    assert_eq!(du, 0.0);
    assert!(dn.iter().all(|x| x.abs() < 1e-14));
    let v = rates_at(&spec, 1.0, &[1.0, 1.0, 2.0]);
    assert!((v[0] - 2.0).abs() < 1e-14 && (v[1] - 2.0).abs() < 1e-14);
}

#[test]
fn example_conductances() {
    let (spec, mats) = common::load(networks::EXAMPLE_ISOLATED);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    let cond = conductance_matrices(&spec, &reference).unwrap();
    assert!((cond.cr(1.0)[0] - 2.0).abs() < 1e-13);
    for t in [0.3, 0.8, 2.5] {
        assert!((cond.cr(t)[0] - 2.0 * t).abs() < 1e-12 * t);
    }
}

#[test]
fn open_network_termwise_field() {
    let text = "[constants]\nT_env = 1.3\n[species]\nX1 { z = 1, p = 1.5, e = 0 }\n[reactions]\n@in X1 { k = 0.5 }\n@out X1 { k = 0.5 }\n";
    let (spec, mats) = common::load(text);
    let te = 1.3;
    let n = vec![2.0];
    let st = State::new(spec.thermo.internal_energy(te, &n), n);
    let (du, dn) = vector_field(&spec, &st).unwrap();
    assert!((dn[0] + 0.5).abs() < 1e-14);
    assert!((du - (0.5 * 1.5 * te - 1.0 * 1.5 * te)).abs() < 1e-13);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    let cond = conductance_matrices(&spec, &reference).unwrap();
    assert!((cond.io[0] - 0.5).abs() < 1e-14);
}

#[test]
fn heat_exchange_idle_at_bath_temperature() {
    let (spec, _) = common::load(networks::HEAT_ONLY);
    let n = vec![1.7];
    let st = State::new(spec.thermo.internal_energy(2.0, &n), n);
    let (du, dn) = vector_field(&spec, &st).unwrap();
    assert!(du.abs() < 1e-15);
    assert_eq!(dn, vec![0.0]);
}

#[test]
fn isothermal_surface_is_invariant() {
    let (spec, _) = common::load(networks::EXAMPLE_ISOTHERMAL);
    let te = spec.t_env.unwrap();
    let u = spec.thermo.energies(te);
    let mut rng = common::rng(22);
    for _ in 0..1000 {
        let st = common::random_state(&spec, &mut rng);
        let (du, dn) = vector_field(&spec, &st).unwrap();
        let surface: f64 = u.iter().zip(&dn).map(|(a, b)| a * b).sum();
        let scale = 1.0 + du.abs() + u.iter().zip(&dn).map(|(a, b)| (a * b).abs()).sum::<f64>();
        assert!((du - surface).abs() < 1e-12 * scale);
    }
}

#[test]
fn isothermal_compact_form_is_single_conductance() {
    let (spec, mats) = common::load(networks::EXAMPLE_ISOTHERMAL);
    let reference = reference_equilibrium(&spec, &mats).unwrap();
    let cond = conductance_matrices(&spec, &reference).unwrap();
    let mut rng = common::rng(23);
    let y = DMatrix::from_fn(mats.n, mats.m, |i, c| mats.y[i][c] as f64);
    let b = DMatrix::from_fn(mats.m, mats.pairs.len(), |c, p| mats.b[c][p] as f64);
    let k = DMatrix::from_diagonal(&DVector::from_vec(cond.cr_reference.clone()));
    for _ in 0..100 {
        let st = common::random_state(&spec, &mut rng);
        let w = DVector::from_iterator(
            mats.n,
            st.amounts.iter().zip(&reference.state.amounts).map(|(a, s)| a.ln() - s.ln()),
        );
        let e = (y.transpose() * w).map(f64::exp);
        let expected = -(&y * &b * &k * b.transpose() * e);
        let (_, dn) = compact_vector_field(&spec, &mats, &reference, &cond, &st).unwrap();
        for (a, b) in dn.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn flux_dissipation_sign_pattern() {
    for text in [networks::OPEN_IO_HE, networks::LUXR] {
        let (spec, _) = common::load(text);
        let ts = spec.t_env.unwrap();
        let flux: Vec<usize> = (0..spec.n_reactions())
            .filter(|&j| spec.reactions[j].kind.is_flux())
            .collect();
        assert!(!flux.is_empty());
        for &j in &flux {
            assert!(flux_dissipation(&spec, j, ts, ts).abs() < 1e-12);
            for i in 1..400 {
                let t = ts * (0.1f64).powf(1.0 - i as f64 / 200.0);
                if (t - ts).abs() < 1e-9 {
                    continue;
                }
                assert!(flux_dissipation(&spec, j, t, ts) < 0.0, "reaction {j} at T = {t}");
            }
        }
    }
}

#[test]
fn laplacian_is_balanced() {
    let mut rng = common::rng(24);
    let l = laplacian(&[vec![-1], vec![1]], &[2.0]).unwrap();
    assert_eq!(l.to_rows(), vec![vec![2.0, -2.0], vec![-2.0, 2.0]]);
    for _ in 0..100 {
        let m = rng.gen_range(2..6);
        let p = rng.gen_range(1..6);
        let mut b = vec![vec![0i64; p]; m];
        for col in 0..p {
            let s = rng.gen_range(0..m);
            let mut t = rng.gen_range(0..m - 1);
            if t >= s {
                t += 1;
            }
            b[s][col] = -1;
            b[t][col] = 1;
        }
        let k: Vec<f64> = (0..p).map(|_| rng.gen_range(0.01..10.0)).collect();
        let l = laplacian(&b, &k).unwrap();
        for a in 0..m {
            let row: f64 = (0..m).map(|c| l[(a, c)]).sum();
            let col: f64 = (0..m).map(|c| l[(c, a)]).sum();
            assert!(row.abs() < 1e-12 && col.abs() < 1e-12);
            assert!(l[(a, a)] >= 0.0);
            for c in 0..m {
                if c != a {
                    assert!(l[(a, c)] <= 0.0);
                }
            }
        }
    }
    assert!(laplacian(&[vec![-1], vec![1]], &[0.0]).is_err());
}

#[test]
fn laplacian_form_is_nonnegative() {
    let mut rng = common::rng(25);
    let pools: Vec<Vec<Vec<i64>>> = common::balanced()
        .into_iter()
        .map(|(_, _, mats, _)| mats.b)
        .filter(|b| !b.is_empty() && !b[0].is_empty())
        .collect();
    for i in 0..1000 {
        let b = &pools[i % pools.len()];
        let k: Vec<f64> = (0..b[0].len()).map(|_| rng.gen_range(0.01..10.0)).collect();
        let l = laplacian(b, &k).unwrap();
        let gamma: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-4.0..4.0)).collect();
        assert!(laplacian_form(&l, &gamma) >= -1e-12);
        // constant gamma lies in ker B^T
        let c = rng.gen_range(-3.0..3.0);
        assert!(laplacian_form(&l, &vec![c; b.len()]).abs() < 1e-10);
    }
}

#[test]
fn rates_stay_finite_and_positive() {
    let mut rng = common::rng(26);
    for (_, spec, _, _) in common::balanced() {
        for i in 0..=120 {
            let t = 10f64.powf(-6.0 + i as f64 * 0.1);
            let n: Vec<f64> = (0..spec.n_species()).map(|_| rng.gen_range(0.01..10.0)).collect();
            for v in rates_at(&spec, t, &n) {
                // barriers with a > 0 underflow to 0 far below T = a / 700
                assert!(v.is_finite() && v >= 0.0, "T = {t}: {v}");
                assert!(t < 1e-2 || v > 0.0, "T = {t}: {v}");
            }
        }
    }
}
