use std::sync::Arc;

use num::rational::Rational64;
use proptest::prelude::*;
use radial_nlw::analysis::*;
use radial_nlw::linear_wave::{bump, channel_check, random_compact_data, FreeWave, SUITE_TIMES};
use radial_nlw::nonlinear_wave::{evolve, EvolutionConfig, Sign, Status, Trajectory};
use radial_nlw::soliton::{default_tail_radius, extend_inward_report, tail_fixed_point};
use radial_nlw::spectral::{low_pass, lp_project, sobolev_norm, Side, SobolevIndex};
use radial_nlw::{FieldPair, OriginRule, RadialGrid, Spacing};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn smooth(r: f64, a: f64, b: f64, c: f64) -> f64 {
    a * (-b * r * r).exp() + c * bump(r, 0.5, 3.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_radii_increase(r_min in 0.0f64..5.0, len in 0.1f64..50.0, n in 2usize..2000, geometric in any::<bool>()) {
        let spacing = if geometric { Spacing::Geometric } else { Spacing::Uniform };
        let lo = if geometric { r_min + 1e-3 } else { r_min };
        let g = RadialGrid::new(lo, lo + len, n, spacing).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert!(g.radii().windows(2).all(|w| w[1] > w[0]));
        if !geometric {
            let h = len / (n - 1) as f64;
            prop_assert!(g.radii().windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * (lo + len)));
        }
    }

    #[test]
    fn reduced_round_trip(a in -3.0f64..3.0, b in 0.1f64..4.0, c in -2.0f64..2.0, r0 in 0.01f64..1.0) {
        let g = Arc::new(RadialGrid::new(r0, r0 + 8.0, 801, Spacing::Uniform).unwrap());
        let f = FieldPair::from_fn(g, |r| smooth(r, a, b, c), |r| smooth(r, c, b, a));
        let back = FieldPair::from_reduced(&f.to_reduced(), OriginRule::Forbid).unwrap();
        for i in 0..f.u.len() {
            prop_assert!((back.u[i] - f.u[i]).abs() <= 2.0 * f64::EPSILON * f.u[i].abs());
            prop_assert!((back.ut[i] - f.ut[i]).abs() <= 2.0 * f64::EPSILON * f.ut[i].abs());
        }
    }

    #[test]
    fn center_cutoff_is_idempotent(a in -3.0f64..3.0, b in 0.1f64..4.0, c in -2.0f64..2.0, big_r in 0.1f64..6.0) {
        let g = Arc::new(RadialGrid::uniform_from_origin(8.0, 1.0 / 64.0).unwrap());
        let f = FieldPair::from_fn(g, |r| smooth(r, a, b, c), |r| smooth(r, c, b, a));
        let once = f.center_cutoff(big_r).unwrap();
        let twice = once.center_cutoff(big_r).unwrap();
        prop_assert_eq!(once.u, twice.u);
        prop_assert_eq!(once.ut, twice.ut);
    }

    #[test]
    fn ring_energy_is_additive(a in -3.0f64..3.0, b in 0.1f64..4.0, c in -2.0f64..2.0, x in 0.1f64..2.0, y in 2.1f64..4.0, z in 4.1f64..7.0) {
        let g = Arc::new(RadialGrid::uniform_from_origin(8.0, 1.0 / 256.0).unwrap());
        let f = FieldPair::from_fn(g, |r| smooth(r, a, b, c), |r| smooth(r, c, b, a));
        let whole = f.ring_energy(x, z).unwrap();
        let parts = f.ring_energy(x, y).unwrap() + f.ring_energy(y, z).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-6 * whole.max(1e-3));
    }

    #[test]
    fn reduction_identity_small(a in -3.0f64..3.0, b in 0.2f64..2.0, c in -2.0f64..2.0, lo in 0.1f64..1.0, hi in 1.5f64..5.0) {
        let g = Arc::new(RadialGrid::uniform_from_origin(8.0, 8.0 / 4096.0).unwrap());
        let f = FieldPair::from_fn(g, |r| smooth(r, a, b, c), |r| smooth(r, c, b, a));
        prop_assert!(f.reduction_identity_residual(lo, hi).unwrap() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sobolev_norm_scaling(s in 0.0f64..1.2, lambda in 0.6f64..1.8) {
        let g = RadialGrid::new(0.0, 40.0, 8001, Spacing::Uniform).unwrap();
        let idx = SobolevIndex::new(s).unwrap();
        let base: Vec<f64> = g.radii().iter().map(|r| (-r * r / 2.0).exp()).collect();
        let scaled: Vec<f64> = g.radii().iter().map(|r| lambda.powf(-(1.5 - s)) * (-(r / lambda).powi(2) / 2.0).exp()).collect();
        let n0 = sobolev_norm(&g, &base, idx).unwrap().value;
        let n1 = sobolev_norm(&g, &scaled, idx).unwrap().value;
        prop_assert!((n1 / n0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn projections_nest_and_partition(a in 0.5f64..4.0, width in 0.5f64..2.0) {
        // m_{<A} is smooth, so m² ≠ m on its transition band; the exact
        // multiplier identity is m_{<2A} m_{<A} = m_{<A}.
        let (m1, m2) = (low_pass(a), low_pass(2.0 * a));
        for i in 0..=400 {
            let rho = i as f64 * a / 100.0;
            prop_assert_eq!(m2(rho) * m1(rho), m1(rho));
        }
        let g = RadialGrid::new(0.0, 20.0, 4001, Spacing::Uniform).unwrap();
        let f: Vec<f64> = g.radii().iter().map(|r| (-(r / width).powi(2)).exp()).collect();
        let once = lp_project(&g, &f, a, Side::Below).unwrap();
        let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let high = lp_project(&g, &f, a, Side::Above).unwrap();
        prop_assert!(once.iter().zip(&high).zip(&f).all(|((l, h), v)| (l + h - v).abs() < 1e-12 * scale));
    }

    #[test]
    fn free_wave_energy_and_recombination(seed in any::<u64>(), k in -768i32..768) {
        // Lattice times shift the characteristics by whole nodes; off the
        // lattice the cubic interpolation error enters the energy.
        let t = k as f64 / 128.0;
        let g = Arc::new(RadialGrid::uniform_from_origin(16.0, 1.0 / 128.0).unwrap());
        let data = random_compact_data(&mut ChaCha8Rng::seed_from_u64(seed), g, 6.0);
        let wave = FreeWave::new(&data).unwrap();
        let e0 = wave.energy_1d(0.0, 0.0);
        let e = wave.energy_1d(0.0, t);
        prop_assert!((e - e0).abs() <= 1e-10 * e0.max(1e-12));
        let ch = wave.characteristics(t);
        let (wt, wr) = ch.recombine();
        for i in 0..wt.len() {
            prop_assert_eq!(ch.z1[i] + ch.z2[i], 2.0 * wt[i]);
            prop_assert!((ch.z2[i] - ch.z1[i] - 2.0 * wr[i]).abs() <= 4.0 * f64::EPSILON * (ch.z1[i].abs() + ch.z2[i].abs()));
        }
    }

    #[test]
    fn channel_holds_in_some_direction(seed in any::<u64>(), big_r in 0.5f64..2.0) {
        let g = Arc::new(RadialGrid::uniform_from_origin(16.0, 1.0 / 256.0).unwrap());
        let data = random_compact_data(&mut ChaCha8Rng::seed_from_u64(seed), g, 6.0);
        let rep = channel_check(&data, big_r, &SUITE_TIMES);
        prop_assert!(rep.is_ok(), "{:?}", rep.err());
    }

    #[test]
    fn nonlinear_finite_speed(amp in 0.1f64..1.5, a in 0.5f64..2.5, focusing in any::<bool>()) {
        let t_final = 2.0;
        let g = Arc::new(RadialGrid::uniform_from_origin(8.0, 1.0 / 32.0).unwrap());
        let f0 = FieldPair::from_fn(g, |r| amp * bump(r, 0.0, a), |_| 0.0);
        let sign = if focusing { Sign::Focusing } else { Sign::Defocusing };
        let mut cfg = EvolutionConfig::new(4.0, sign, t_final);
        cfg.cfl = 1.0;
        cfg.snapshot_interval = Some(0.5);
        let tr = evolve(&f0, &cfg).unwrap();
        // Kick-drift-kick carries u_t one node ahead of u.
        let h = 1.0 / 32.0;
        let reach = |v: &[f64], r: &[f64]| r.iter().zip(v).filter(|(_, x)| x.abs() > 1e-10).map(|(r, _)| *r).fold(0.0, f64::max);
        for (t, s) in tr.times.iter().zip(&tr.snapshots) {
            prop_assert!(reach(&s.u, s.radii()) <= a + t + 1e-9, "t={} u reach {}", t, reach(&s.u, s.radii()));
            prop_assert!(reach(&s.ut, s.radii()) <= a + t + h + 1e-9, "t={} ut reach {}", t, reach(&s.ut, s.radii()));
        }
    }

    #[test]
    fn inward_extension_is_lyapunov_monotone(p in 4.0f64..5.0) {
        let tail = tail_fixed_point(p, default_tail_radius(p), 1e-12).unwrap();
        let (_, lyap) = extend_inward_report(&tail, 1e-3).unwrap();
        prop_assert!(lyap.samples.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-8)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spacetime_norm_is_homogeneous(k in -50.0f64..50.0, q in 1.0f64..8.0, r in 1.0f64..8.0) {
        let grid = Arc::new(RadialGrid::uniform_from_origin(5.0, 0.05).unwrap());
        let times: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let slices: Vec<Vec<f64>> = times.iter().map(|t| grid.radii().iter().map(|x| (1.0 + t) * (-x * x).exp()).collect()).collect();
        let scaled: Vec<Vec<f64>> = slices.iter().map(|s| s.iter().map(|v| k * v).collect()).collect();
        let a: Vec<&[f64]> = slices.iter().map(|s| s.as_slice()).collect();
        let b: Vec<&[f64]> = scaled.iter().map(|s| s.as_slice()).collect();
        let (n0, _) = spacetime_norm_samples(&grid, &times, &a, q, r).unwrap();
        let (n1, _) = spacetime_norm_samples(&grid, &times, &b, q, r).unwrap();
        prop_assert!((n1 - k.abs() * n0).abs() <= 1e-12 * k.abs().max(1.0) * n0);
    }

    #[test]
    fn g_below_one_inside(beta in 1e-6f64..(1.0 - 1e-6)) {
        prop_assert!(g(beta) < 1.0);
        prop_assert!(ladder_increment(beta) > 0.0);
    }

    #[test]
    fn ladder_is_monotone_and_bounded(p in 3.01f64..5.0, frac in 0.0f64..0.99) {
        let lo = 2.0 / (p - 1.0);
        let beta0 = lo + frac * (1.0 - lo);
        prop_assume!(beta0 < 1.0);
        let st = decay_ladder(p, beta0).unwrap();
        prop_assert!(st.reached);
        prop_assert!(st.steps() < LADDER_MAX_STEPS);
        prop_assert!(st.beta.windows(2).all(|w| w[1] > w[0] && w[1] <= 1.0));
    }

    #[test]
    fn exponent_constants_consistent(num in 301i64..500) {
        let p = Rational64::new(num, 100);
        let c = regularity_constants(p).unwrap();
        prop_assert!(c.sigma2 <= c.sigma1);
        prop_assert!(c.kappa > Rational64::new(0, 1) && c.kappa < Rational64::new(2, 5));
        prop_assert_eq!(c.s_p, critical_exponent(p).unwrap());
        let pair = interpolation_kappa(p, c.s_p).unwrap();
        prop_assert!(pair.admissibility.sum <= Rational64::new(1, 2));
    }

    #[test]
    fn recurrence_accepts_power_laws(omega in 0.2f64..1.0, c in 0.5f64..1.0) {
        let s = move |x: f64| c * (-omega * x).exp();
        let params = Recurrence { alpha: 1.0 / 3.0, beta: 2.0 / 3.0, l: 3.0, omega, c: 2.0, ln_a_min: 1.0, ln_a_max: 400.0 };
        let rep = recurrence_decay_check(&s, params).unwrap();
        prop_assert!(matches!(rep.verdict, RecurrenceVerdict::Decays { .. }), "{:?}", rep.verdict);
        prop_assert!((rep.fitted_exponent - omega).abs() < 1e-9);
    }
}

#[test]
fn zero_trajectory_f_beta_is_zero() {
    let grid = Arc::new(RadialGrid::uniform_from_origin(4.0, 0.1).unwrap());
    let snaps = vec![FieldPair::zeros(grid.clone()); 3];
    let traj = Trajectory {
        config: EvolutionConfig::new(4.0, Sign::Defocusing, 1.0),
        grid,
        times: vec![0.0, 0.5, 1.0],
        snapshots: snaps,
        status: Status::Completed,
        energies: vec![0.0; 3],
    };
    let f = fbeta_profile(&traj, 0.9).unwrap();
    assert!(f.f.iter().all(|v| *v == 0.0));
    assert_eq!(radial_lebesgue(&traj.grid, &traj.snapshots[0].u, 4.0), 0.0);
}
