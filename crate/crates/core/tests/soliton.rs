use std::sync::Arc;
use std::time::Instant;

use radial_nlw::soliton::*;

fn explicit_p5(r: f64) -> f64 {
    3f64.sqrt() / (1.0 + 3.0 * r * r).sqrt()
}

fn p4_profile() -> SolitonProfile {
    let big_r = default_tail_radius(4.0);
    construct(4.0, big_r, 1e-5, 1e-13).unwrap()
}

#[test]
fn p5_pipeline_matches_explicit_ground_state() {
    let start = Instant::now();
    let tail = tail_fixed_point(5.0, 10.0, 1e-14).unwrap();
    let s = extend_inward(&tail, 1e-2).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    for (r, y) in s.radii().iter().zip(&s.y) {
        if *r >= 1e-2 * (1.0 - 1e-12) && *r <= 1e2 {
            worst = worst.max((y - explicit_p5(*r)).abs() / explicit_p5(*r));
        }
    }
    println!("p=5 pipeline: sup rel err {worst:.3e}, {elapsed:.3} s, {} tail iterations", tail.iterations);
    assert!(worst < 1e-6);
    assert!(elapsed < 10.0);
}

#[test]
fn p5_tail_value_at_ten() {
    let tail = tail_fixed_point(5.0, 10.0, 1e-14).unwrap();
    let exact = 3f64.sqrt() * 10.0 / (1.0 + 300.0f64).sqrt() - 1.0;
    println!("phi(10) = {:.6e}, closed form {exact:.6e}, -1/(6r^2) = {:.6e}", tail.phi[0], -1.0 / 600.0);
    assert!((tail.phi[0] - exact).abs() < 1e-9);
    assert!(((tail.phi[0] + 1.0 / 600.0) / (1.0 / 600.0)).abs() < 5e-3);
}

#[test]
fn tail_contraction_and_envelope() {
    for p in [3.5, 4.0, 4.5, 5.0] {
        let big_r = default_tail_radius(p);
        let t = tail_fixed_point(p, big_r, 1e-13).unwrap();
        println!(
            "p={p}: R={big_r}, iterations {}, observed factor {:.3e} <= bound {:.3e}, envelope slope {:.4}, C {:.4}, truncation {:.2e}",
            t.iterations, t.contraction_factor, t.contraction_bound, t.envelope_slope, t.envelope_c, t.truncation_error
        );
        assert!(t.contraction_factor <= t.contraction_bound);
        assert!(t.envelope_slope <= 3.0 - p + 0.05);
        assert!(t.phi.iter().all(|v| v.abs() <= t.envelope_c * 1.000001 * big_r.powf(3.0 - p)));
    }
}

#[test]
fn small_radius_is_rejected_with_suggestion() {
    match tail_fixed_point(4.0, 1.0, 1e-12) {
        Err(SolitonError::WeakContraction { suggested, .. }) => assert!(contraction_bound(4.0, suggested) < 0.5),
        other => panic!("expected weak contraction, got {other:?}"),
    }
}

#[test]
fn singular_solution_constant_and_residual() {
    let g = log_grid(1e-3, 1e3, 50).unwrap();
    for p in [3.5, 4.0, 4.5] {
        let s = explicit_singular(p, g.clone()).unwrap();
        let res = s.residual().into_iter().fold(0.0, f64::max);
        println!("W1 p={p}: C={:.6}, max relative residual {res:.2e}", singular_constant(p));
        assert!(res < 1e-12);
    }
    // C^3 = θ(1-θ) = 2/9 at p = 4, from substituting C r^{-2/3}.
    let c = singular_constant(4.0);
    assert!((c.powi(3) - 2.0 / 9.0).abs() < 1e-15);
    assert!((c - 0.60571).abs() < 1e-5);
    assert!(explicit_singular(5.0, g.clone()).is_err());
}

#[test]
fn singular_solution_scale_covariance() {
    let g = log_grid(1e-2, 1e2, 20).unwrap();
    let s = explicit_singular(4.0, g).unwrap();
    let theta = s.theta();
    let c = singular_constant(4.0);
    for lambda in [0.5f64, 2.0, 7.0] {
        for (r, y) in s.radii().iter().zip(&s.y) {
            let scaled = lambda.powf(theta) * c * (lambda * r).powf(-theta);
            assert!((scaled - y).abs() <= 1e-13 * y.abs());
        }
    }
}

#[test]
fn aubin_talenti_family() {
    let g = log_grid(1e-3, 1e3, 40).unwrap();
    let w = aubin_talenti(5.0, 1.0, 1.0, g.clone()).unwrap();
    assert!((aubin_talenti_value(1.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
    assert!((w.y[0] - 1.0).abs() < 1e-6);
    let res = w.residual().into_iter().fold(0.0, f64::max);
    println!("Aubin-Talenti residual {res:.2e}");
    assert!(res < 1e-12);
    // λ^{-1/2} W_1(r/λ) is the λ member.
    for lambda in [0.25f64, 3.0] {
        let m = aubin_talenti(5.0, lambda, -1.0, g.clone()).unwrap();
        for (r, y) in m.radii().iter().zip(&m.y) {
            let expect = -lambda.powf(-0.5) * aubin_talenti_value(1.0, 1.0, r / lambda);
            assert!((y - expect).abs() <= 1e-14 * expect.abs());
        }
        assert!(m.residual().into_iter().fold(0.0, f64::max) < 1e-12);
    }
    assert!(aubin_talenti(4.0, 1.0, 1.0, g.clone()).is_err());
    assert!(aubin_talenti(5.0, 0.0, 1.0, g).is_err());
}

#[test]
fn inward_extension_lyapunov_and_positivity() {
    for p in [3.5, 4.0, 4.5] {
        let big_r = default_tail_radius(p);
        let tail = tail_fixed_point(p, big_r, 1e-13).unwrap();
        let (s, lyap) = extend_inward_report(&tail, 1e-4).unwrap();
        let theta = s.theta();
        let v0 = s.radii()[0].powf(theta) * s.y[0];
        println!(
            "p={p}: R={big_r}, {} accepted / {} rejected steps, max Lyapunov increase {:.2e}, v(r_min)={v0:.5}, C={:.5}, residual {:.2e}",
            lyap.accepted_steps,
            lyap.rejected_steps,
            lyap.max_relative_increase,
            singular_constant(p),
            s.max_interior_residual()
        );
        assert!(lyap.samples.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-8)));
        assert!(s.y.iter().all(|y| *y > 0.0));
        assert!(s.max_interior_residual() < 1e-6);
    }
}

#[test]
fn residual_decreases_under_tolerance_tightening() {
    // The profile pipeline at p = 5 against the closed form, with coarse and
    // fine tail tolerance.
    let err = |tol: f64| {
        let tail = tail_fixed_point(5.0, 10.0, tol).unwrap();
        let s = extend_inward(&tail, 1e-2).unwrap();
        s.radii().iter().zip(&s.y).map(|(r, y)| ((y - explicit_p5(*r)) / explicit_p5(*r)).abs()).fold(0.0, f64::max)
    };
    let (a, b) = (err(1e-4), err(1e-12));
    println!("p=5 error at tail tol 1e-4: {a:.2e}, at 1e-12: {b:.2e}");
    assert!(b < a);
}

#[test]
fn p4_diagnostics_flag_singular_profile() {
    let s = p4_profile();
    let d = soliton_diagnostics(&s).unwrap();
    println!(
        "p=4: tail deviation {:?}, r^2|W'| {:?}, amplitude {:.6}, v floor {:.4} vs median {:.4}",
        d.tail_deviation, d.derivative_envelope, d.tail_amplitude, d.v_floor, d.v_median
    );
    let last: Vec<String> = d.pieces.iter().rev().take(12).map(|x| format!("{:.3e}:{:.4}/{:.4}", x.eps, x.norm, x.cumulative)).collect();
    println!("p=4 dyadic pieces (innermost first): {}", last.join(" "));
    println!("p=4 inner {:?}", d.inner);
    println!("p=4 outer {:?}", d.outer);
    assert!(d.nontrivial);
    assert!(d.tail_bounded);
    assert!(d.singular);
    assert!(d.divergent);
    // The squared cumulative norm keeps gaining a fixed amount per decade of
    // ε instead of converging.
    let n = d.pieces.len();
    let gain = |k: usize| d.pieces[k].cumulative.powi(2) - d.pieces[k - 3].cumulative.powi(2);
    println!("p=4 squared-norm gain per decade: {:.3} then {:.3}", gain(n - 8), gain(n - 1));
    assert!(gain(n - 1) >= 0.5 * gain(n - 8));
}

#[test]
fn p5_ground_state_is_flagged_regular() {
    let g = log_grid(1e-4, 1e4, 200).unwrap();
    let w = aubin_talenti(5.0, 1.0 / 3.0, 1.0, g).unwrap();
    let d = soliton_diagnostics(&w).unwrap();
    println!("p=5: amplitude {:.6}, v floor {:.3e} vs median {:.3e}, divergent {}", d.tail_amplitude, d.v_floor, d.v_median, d.divergent);
    assert!(d.tail_bounded);
    assert!(!d.singular);
    assert!(!d.divergent);
}

#[test]
fn zero_profile_diagnostics() {
    let g = log_grid(1e-3, 1e3, 50).unwrap();
    let d = soliton_diagnostics(&SolitonProfile::zero(g, 4.0)).unwrap();
    assert!(!d.nontrivial && !d.singular && !d.divergent);
    assert_eq!(d.tail_deviation, [0.0, 0.0]);
    assert_eq!(d.derivative_envelope, [0.0, 0.0]);
    assert!(d.pieces.iter().all(|x| x.norm == 0.0));
}

#[test]
fn diagnostics_need_four_decades() {
    let g = log_grid(1.0, 100.0, 50).unwrap();
    let w = aubin_talenti(5.0, 1.0, 1.0, g).unwrap();
    assert!(matches!(soliton_diagnostics(&w), Err(SolitonError::Range { .. })));
}

#[test]
fn v_monotone_on_inner_and_outer_intervals() {
    let s = p4_profile();
    let d = soliton_diagnostics(&s).unwrap();
    assert!(d.outer.monotone, "{:?}", d.outer);
    assert_eq!(d.outer.positive_local_max + d.outer.negative_local_min, 0);
    assert!(d.inner.monotone, "{:?}", d.inner);
    assert_eq!(d.inner.positive_local_max + d.inner.negative_local_min, 0);
}

#[test]
fn truncated_soliton_scaling() {
    let s = Arc::new(p4_profile());
    let radii: Vec<f64> = (0..9).map(|k| 100.0 * 10f64.powf(k as f64 / 4.0)).collect();
    let fit = v_r_scaling(s.clone(), &radii, None).unwrap();
    println!(
        "p=4 V_R: Y slope {:.4} (expected {:.4}), companion slope {:.4} (expected {:.4})",
        fit.y_slope, fit.y_expected, fit.companion_slope, fit.companion_expected
    );
    assert!(fit.within(0.05));
    let v = truncated_soliton(s.clone(), 100.0).unwrap();
    assert_eq!(v.eval(0.0, 5.0), v.eval(105.0, -5.0));
    assert_eq!(v.eval(500.0, 5.0), s.eval(500.0));
    assert!(truncated_soliton(s.clone(), s.grid.r_min() / 2.0).is_err());
}

#[test]
fn truncated_norm_matches_direct_quadrature() {
    // A finite window compared with brute-force nested quadrature of V_R.
    let s = Arc::new(p4_profile());
    let v = truncated_soliton(s.clone(), 50.0).unwrap();
    let (q, e, window) = (48.0 / 11.0, 48.0 / 7.0, 200.0);
    let fast = v.spacetime_norm(q, e, Some(window));
    let nt = 400;
    let ht = window / nt as f64;
    let slice = |t: f64| {
        let a = 50.0 + t;
        let nx = 4000;
        let lmax = (1e9f64 / a).ln();
        let hx = lmax / nx as f64;
        let mut acc = 0.0;
        for i in 0..=nx {
            let x = a * (i as f64 * hx).exp();
            let w = if i == 0 || i == nx { 0.5 } else { 1.0 };
            acc += w * x.powi(3) * v.eval(x, t).abs().powf(e);
        }
        4.0 * std::f64::consts::PI * (acc * hx + v.eval(0.0, t).abs().powf(e) * a.powi(3) / 3.0)
    };
    let mut acc = 0.0;
    for i in 0..=nt {
        let w = if i == 0 || i == nt { 0.5 } else { 1.0 };
        acc += w * slice(i as f64 * ht).powf(q / e);
    }
    let brute = (2.0 * acc * ht).powf(1.0 / q);
    println!("windowed Y norm: {fast:.8e} vs brute force {brute:.8e}");
    assert!((fast - brute).abs() < 1e-3 * brute);
}

#[test]
fn zero_profile_gives_zero_norms() {
    let g = log_grid(1e-2, 1e4, 50).unwrap();
    let v = truncated_soliton(Arc::new(SolitonProfile::zero(g, 4.0)), 10.0).unwrap();
    let n = v.norms(None).unwrap();
    assert_eq!((n.y_norm, n.companion_norm), (0.0, 0.0));
}
