//! Cross-checks between the parametric pipelines and the direct
//! integration / monodromy oracle. These are the keystone equivalences: the
//! quadrature formulas on one side, a plain ODE solver on the other.

use num_complex::Complex;
use wavepar_core::complexband::parametric_from_c;
use wavepar_core::families::{
    complex_increment, FamilyOrbit, PotentialFamily, Sign,
};
use wavepar_core::oracle::{classify_band, monodromy, BandKind};
use wavepar_core::profile::{reconstruct_q_of_x, Modulation, PhaseProfile};
use wavepar_core::realband::{
    phase_from_x, psi_of_x, real_parametric_curve, stopband_metrics, stopband_psi_grid, w_of_psi,
    CurveOptions,
};

/// Build the stop-band medium for a pure sine profile over one period.
fn stopband_medium(b2: f64, nodes: usize) -> (PhaseProfile<f64>, wavepar_core::RefractiveProfile64)
{
    let p = PhaseProfile::single_sine(1.0, b2).unwrap();
    let grid = stopband_psi_grid(0.0, 1, nodes);
    let curve = real_parametric_curve(&p, &grid, CurveOptions::default()).unwrap();
    let medium = reconstruct_q_of_x(&p, &curve, 1.0).unwrap();
    (p, medium)
}

#[test]
fn stopband_attenuation_matches_monodromy() {
    // ln |lambda_max| = nu within 1e-6 relative; |trace| > 2.
    for &b2 in &[0.1, 0.2, 0.4] {
        let (p, medium) = stopband_medium(b2, 4096);
        let metrics = stopband_metrics(&p, 1e-12).unwrap();
        let mono = monodromy(&medium).unwrap();

        assert!((mono.det - 1.0).abs() < 1e-8, "b2={b2}: det {}", mono.det);
        assert!(mono.trace.abs() > 2.0, "b2={b2}: trace {}", mono.trace);
        assert_eq!(classify_band(&mono, 1e-9), BandKind::Stop);

        let ln_lambda = mono.multipliers.0.norm().ln();
        let rel = (ln_lambda - metrics.nu).abs() / metrics.nu;
        assert!(
            rel < 1e-6,
            "b2={b2}: ln|lambda| {ln_lambda} vs nu {} (rel {rel:.2e})",
            metrics.nu
        );

        // The attenuating multiplier magnitude is exp(-nu).
        let small = mono.multipliers.1.norm();
        assert!(((-metrics.nu).exp() - small).abs() / small < 1e-6);

        // Spatial period from the metrics matches the curve's.
        let period = medium.spatial_period().unwrap();
        assert!(
            (period - metrics.spatial_period).abs() < 1e-9,
            "b2={b2}: chi {} vs {}",
            period,
            metrics.spatial_period
        );
    }
}

#[test]
fn multi_harmonic_attenuation_only_sees_b2() {
    // nu = (pi/2) b2 for any profile: every other harmonic integrates to
    // zero against sin(2 psi). The monodromy oracle must still agree even
    // though chi and the medium shape change with all coefficients.
    let p = PhaseProfile::new(1.0, 0.1, vec![0.15, 0.05], vec![0.2, -0.1]).unwrap();
    let metrics = stopband_metrics(&p, 1e-12).unwrap();
    assert!(
        (metrics.nu - std::f64::consts::PI / 2.0 * 0.2).abs() < 1e-11,
        "nu {}",
        metrics.nu
    );

    let grid = stopband_psi_grid(0.0, 1, 4096);
    let curve = real_parametric_curve(&p, &grid, CurveOptions::default()).unwrap();
    let medium = reconstruct_q_of_x(&p, &curve, 1.0).unwrap();
    let mono = monodromy(&medium).unwrap();
    let ln_lambda = mono.multipliers.0.norm().ln();
    assert!(
        (ln_lambda - metrics.nu).abs() / metrics.nu < 1e-6,
        "ln|lambda| {ln_lambda} vs nu {}",
        metrics.nu
    );
}

#[test]
fn random_profiles_attenuation_matches_monodromy() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let m = rng.gen_range(1..=3);
        let mut a: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.25..0.25)).collect();
        let mut b: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.25..0.25)).collect();
        // Keep a genuine stop band and a safely monotone X branch.
        if b[0].abs() < 0.05 {
            b[0] = 0.15;
        }
        a.truncate(m);
        b.truncate(m);
        let q0 = rng.gen_range(0.5..2.0);
        let p = PhaseProfile::new(q0, rng.gen_range(-0.2..0.2), a, b).unwrap();

        let metrics = stopband_metrics(&p, 1e-12).unwrap();
        let grid = stopband_psi_grid(0.0, 1, 4096);
        let curve = real_parametric_curve(&p, &grid, CurveOptions::default()).unwrap();
        if !curve.monotone_x() {
            continue;
        }
        let medium = reconstruct_q_of_x(&p, &curve, 1.0).unwrap();
        let mono = monodromy(&medium).unwrap();
        let ln_lambda = mono.multipliers.0.norm().ln();
        assert!(
            (ln_lambda - metrics.nu.abs()).abs() / metrics.nu.abs() < 1e-6,
            "profile {p:?}: ln|lambda| {ln_lambda} vs |nu| {}",
            metrics.nu.abs()
        );
        // The attenuating exponent is -nu/chi.
        assert!(
            (mono.exponent_mu.re + metrics.nu.abs() / metrics.spatial_period).abs()
                < 1e-6 * (metrics.nu.abs() / metrics.spatial_period),
            "exponent {} vs {}",
            mono.exponent_mu.re,
            -metrics.nu.abs() / metrics.spatial_period
        );
    }
}

#[test]
fn quadratic_minus_family_monodromy_phase() {
    // Second even family through the full transmission pipeline.
    let family: PotentialFamily<f64> =
        PotentialFamily::quadratic_minus(1.5, 0.0, 1.7).unwrap();
    let (chi_inc, eta) = complex_increment(&family, 1e-11).unwrap();
    assert!(chi_inc.abs() < 1e-9);

    let orbit = FamilyOrbit::new(family, Sign::Plus, 0.0, 1.0).unwrap();
    let tau = orbit.tau();
    let cfun = orbit.cfunction(1, 4096).unwrap();
    let curve = parametric_from_c(&orbit, &cfun, CurveOptions::default(), Some(tau)).unwrap();
    let medium = reconstruct_q_of_x(&orbit, &curve, 1.0).unwrap();
    let mono = monodromy(&medium).unwrap();
    assert!(
        (mono.trace - 2.0 * eta.cos()).abs() < 1e-5,
        "trace {} vs 2cos(eta) {}",
        mono.trace,
        2.0 * eta.cos()
    );
}

#[test]
fn standing_wave_satisfies_wave_equation() {
    // w(x) = W(psi(x)) from the parametric quadratures, second differences
    // against q^2 w on a uniform x grid.
    let p = PhaseProfile::single_sine(1.0, 0.2).unwrap();
    let metrics = stopband_metrics(&p, 1e-12).unwrap();
    let chi = metrics.spatial_period;

    let h = chi / 4096.0;
    let n = 2048usize;
    let w_at = |x: f64| -> f64 {
        let psi = psi_of_x(&p, 0.0, 0.0, x).unwrap();
        w_of_psi(&p, 0.0, psi)
    };
    let mut sup_w: f64 = 0.0;
    let mut sup_res: f64 = 0.0;
    for j in 1..n {
        let x = 0.1 + h * j as f64;
        let (wm, w0, wp) = (w_at(x - h), w_at(x), w_at(x + h));
        let psi = psi_of_x(&p, 0.0, 0.0, x).unwrap();
        let q = p.eval_q(psi);
        let second = (wp - 2.0 * w0 + wm) / (h * h);
        sup_res = sup_res.max((second + q * q * w0).abs());
        sup_w = sup_w.max((q * q * w0).abs());
    }
    assert!(
        sup_res / sup_w < 1e-6,
        "relative residual {:.3e}",
        sup_res / sup_w
    );
}

#[test]
fn even_family_monodromy_phase_matches_eta() {
    // Quartic a=0.4, b=1: reconstruct the medium from the orbit, then
    // trace = 2 cos(eta) within 1e-5 and |trace| <= 2.
    let family: PotentialFamily<f64> = PotentialFamily::quartic(0.4, 1.0).unwrap();
    let (_, eta) = complex_increment(&family, 1e-11).unwrap();

    let orbit = FamilyOrbit::new(family, Sign::Plus, 0.0, 1.0).unwrap();
    let tau = orbit.tau();
    let cfun = orbit.cfunction(1, 4096).unwrap();
    let curve = parametric_from_c(&orbit, &cfun, CurveOptions::default(), Some(tau)).unwrap();
    assert!(curve.monotone_x(), "X must be monotone for this family");

    let medium = reconstruct_q_of_x(&orbit, &curve, 1.0).unwrap();
    assert!(medium.spatial_period().is_some());
    let mono = monodromy(&medium).unwrap();

    assert!((mono.det - 1.0).abs() < 1e-8);
    assert!(mono.trace.abs() <= 2.0, "trace {}", mono.trace);
    assert_eq!(classify_band(&mono, 1e-6), BandKind::Transmission);
    assert!(
        (mono.trace - 2.0 * eta.cos()).abs() < 1e-5,
        "trace {} vs 2 cos(eta) = {}",
        mono.trace,
        2.0 * eta.cos()
    );

    // Monodromy phase equals |eta| mod 2 pi.
    let phase = mono.exponent_mu.im * mono.spatial_period;
    let eta_mod = {
        let m = eta.abs() % (2.0 * std::f64::consts::PI);
        m.min(2.0 * std::f64::consts::PI - m)
    };
    assert!(
        (phase - eta_mod).abs() < 1e-5,
        "phase {phase} vs |eta| mod 2pi = {eta_mod}"
    );
}

#[test]
fn constant_family_monodromy_phase() {
    // Constant c: |eta| = pi, so the medium sits exactly at a band edge
    // (trace = 2 cos(pi) = -2). Use the exponential-G medium over one tau.
    let family: PotentialFamily<f64> = PotentialFamily::constant(2.0).unwrap();
    let (chi_inc, eta) = complex_increment(&family, 1e-11).unwrap();
    assert!(chi_inc.abs() < 1e-9);
    assert!((eta.abs() - std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn monodromy_grid_refinement_converges() {
    let (_, medium_a) = stopband_medium(0.2, 2048);
    let (_, medium_b) = stopband_medium(0.2, 4096);
    let ma = monodromy(&medium_a).unwrap();
    let mb = monodromy(&medium_b).unwrap();
    let d = (ma.exponent_mu - mb.exponent_mu).norm();
    assert!(d < 1e-7, "exponent shift {d:.3e} under refinement");
}

#[test]
fn reconstruction_round_trip_off_nodes() {
    // Q(psi(x)) from the monotone inversion reproduces the sampled medium at
    // off-node points to 1e-8 (2048+ nodes per period).
    let p = PhaseProfile::single_sine(1.0, 0.2).unwrap();
    let grid = stopband_psi_grid(0.0, 1, 4096);
    let curve = real_parametric_curve(&p, &grid, CurveOptions::default()).unwrap();
    let medium = reconstruct_q_of_x(&p, &curve, 1.0).unwrap();
    let inv = wavepar_core::profile::PsiOfX::new(&curve).unwrap();

    let x_lo = medium.x_grid()[0];
    let x_hi = *medium.x_grid().last().unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..500 {
        let x = x_lo + (x_hi - x_lo) * (j as f64 + 0.41) / 500.0;
        let q_interp = p.eval_q(inv.eval(x));
        let q_exact = p.eval_q(psi_of_x(&p, 0.0, 0.0, x).unwrap());
        worst = worst.max((q_interp - q_exact).abs());
    }
    assert!(worst < 1e-8, "round-trip error {worst:.3e}");

    // min/max of q over a period are q0 exp(-|b2|), q0 exp(|b2|).
    let q_min = medium.q_values().iter().cloned().fold(f64::INFINITY, f64::min);
    let q_max = medium.q_values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((q_min - (-0.2f64).exp()).abs() < 1e-6);
    assert!((q_max - (0.2f64).exp()).abs() < 1e-6);
}

#[test]
fn optimizer_profile_verified_against_monodromy() {
    // The returned best profile's nu agrees with the direct Floquet
    // exponent of its reconstructed medium.
    use wavepar_core::design::{optimize_profile, DesignSpec, Objective};
    let spec = DesignSpec {
        m_max: 1,
        bounds: vec![(0.0, 0.0), (-0.5, 0.5)],
        objective: Objective::MaximizeNu,
        max_evals: 1000,
        seed: 11,
    };
    let res = optimize_profile::<f64>(&spec).unwrap();
    let grid = stopband_psi_grid(0.0, 1, 4096);
    let curve = real_parametric_curve(&res.best, &grid, CurveOptions::default()).unwrap();
    let medium = reconstruct_q_of_x(&res.best, &curve, 1.0).unwrap();
    let mono = monodromy(&medium).unwrap();
    let ln_lambda = mono.multipliers.0.norm().ln();
    assert!(
        (ln_lambda - res.metrics.nu).abs() / res.metrics.nu < 1e-6,
        "nu {} vs oracle {ln_lambda}",
        res.metrics.nu
    );
}

#[test]
fn quasi_phase_agrees_with_phase_equation_on_real_wave() {
    // Three routes to psi(x) on the same stop-band medium: the quasi-phase
    // integral of the directly integrated wave, the phase ODE, and the
    // parametric construction. All must agree.
    let (p, medium) = stopband_medium(0.2, 4096);
    let sol = wavepar_core::oracle::integrate_wave(
        &medium,
        Complex::new(0.0, 0.0),
        Complex::new(1.0, 0.0),
    )
    .unwrap();
    let psi_quasi = wavepar_core::complexband::quasi_phase(
        &sol.w,
        &sol.wprime,
        medium.q_values(),
        medium.x_grid(),
    )
    .unwrap();
    let psi_ode = phase_from_x(&medium, 0.0).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in psi_quasi.iter().zip(psi_ode.iter()) {
        worst = worst.max((a - b).abs());
    }
    assert!(worst < 1e-6, "quasi-phase vs phase ODE differ by {worst:.3e}");

    // And against the parametric psi (the curve was built on 4096 nodes of
    // one pi-period starting at psi = 0, in step with the x grid).
    let grid = stopband_psi_grid(0.0, 1, 4096);
    let curve = real_parametric_curve(&p, &grid, CurveOptions::default()).unwrap();
    let mut worst2: f64 = 0.0;
    for (i, psi) in psi_quasi.iter().enumerate() {
        worst2 = worst2.max((psi - curve.psi()[i]).abs());
    }
    assert!(worst2 < 1e-6, "quasi-phase vs parametric psi {worst2:.3e}");
}

#[test]
fn plane_wave_quasi_phase_equals_real_phase() {
    // For w = exp(i q0 x) the quasi-phase is q0 (x - x0), matching the real
    // case's psi up to the integration constant.
    let q0 = 1.7;
    let n = 400;
    let x: Vec<f64> = (0..=n).map(|i| i as f64 * 0.01).collect();
    let w: Vec<Complex<f64>> = x.iter().map(|&xi| Complex::new(0.0, q0 * xi).exp()).collect();
    let wp: Vec<Complex<f64>> = w.iter().map(|&wi| wi * Complex::new(0.0, q0)).collect();
    let q = vec![q0; n + 1];
    let psi = wavepar_core::complexband::quasi_phase(&w, &wp, &q, &x).unwrap();
    for (xi, p) in x.iter().zip(psi.iter()) {
        assert!((p - q0 * xi).abs() < 1e-10);
    }
}
