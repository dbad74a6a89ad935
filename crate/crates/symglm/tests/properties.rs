//! Cross-module property tests: coordinate-change invariance of the
//! transfer function, the two-of-three structure theorem, parasitism
//! versus implicitness, and the stepping-engine invariants (map inversion,
//! start/finish inversion, start symmetry, even global error).

use num_complex::Complex64;
use proptest::prelude::*;
use symglm::analysis::{check_gsym_structural, check_gsymplectic, parasitism_factors, transfer_function};
use symglm::integrator::{integrate_final, GlmStepper, OdeProblem, RunConfig};
use symglm::problems;
use symglm::rational::{rat, rint, Rat, RatMat};
use symglm::tableau::{equivalence_transform, registry, GlmTableau, StartScheme, StartVariant};

const GLM_NAMES: [&str; 9] = [
    "4123A", "4123B", "4123C", "4223A", "4124A", "4124B", "4124C", "4124D", "4124E",
];

const STEPPABLE: [&str; 11] = [
    "4123A", "4123B", "4123C", "4223A", "4124A", "4124B", "4124C", "4124D", "4124E", "midpoint",
    "suzuki4115",
];

fn apply_l(m: &GlmTableau, y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let l = &m.floats().l;
    let r = m.r;
    let d = y[0].len();
    (0..r)
        .map(|i| (0..d).map(|k| (0..r).map(|j| l[i][j] * y[j][k]).sum()).collect())
        .collect()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// The transfer function is invariant under any coordinate change of the
/// value space (checked at 20 off-circle points per transform).
fn transfer_invariant_under(t: &RatMat, m: &GlmTableau) -> Result<(), TestCaseError> {
    let transformed = match equivalence_transform(m, t) {
        Ok(x) => x,
        Err(_) => return Ok(()), // singular or ill-conditioned draw
    };
    for k in 0..20 {
        let angle = 0.37 + 0.31 * k as f64;
        let radius = if k % 2 == 0 { 2.0 + 0.1 * k as f64 } else { 0.4 };
        let zeta = Complex64::from_polar(radius, angle);
        let n0 = transfer_function(m, zeta).unwrap();
        let n1 = transfer_function(&transformed, zeta).unwrap();
        let scale = n0.max_abs().max(1.0);
        prop_assert!(
            n1.sub(&n0).max_abs() <= 1e-12 * scale,
            "transfer function changed under equivalence transform"
        );
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transfer_function_is_a_coordinate_free_fingerprint(
        a in -6i128..=6,
        b in -6i128..=6,
        c in -6i128..=6,
        d in -6i128..=6,
    ) {
        let t = RatMat::from_rows(vec![
            vec![rint(a), rint(b)],
            vec![rint(c), rint(d)],
        ]);
        let m = &registry().lookup("4123A").unwrap().tableau;
        transfer_invariant_under(&t, m)?;
    }

    #[test]
    fn manifest_roundtrip(
        h in 1e-6f64..1.0,
        t in 1.0f64..1e7,
        stride in 1usize..1000,
        seed in any::<u64>(),
        compensated in any::<bool>(),
    ) {
        use symglm::manifest::ExperimentManifest;
        let mut m = ExperimentManifest::new("4124B", "kepler", h, t);
        m.stride = stride;
        m.seed = seed;
        m.compensated = compensated;
        let back = ExperimentManifest::parse(&m.to_string()).unwrap();
        prop_assert_eq!(m, back);
    }
}

#[test]
fn transfer_invariance_at_specific_point() {
    // Diagonal scaling at zeta = 2 + i, residual below 1e-13.
    let m = &registry().lookup("4123A").unwrap().tableau;
    let t = RatMat::diag(&[rint(1), rat(3, 2)]);
    let transformed = equivalence_transform(m, &t).unwrap();
    let zeta = Complex64::new(2.0, 1.0);
    let n0 = transfer_function(m, zeta).unwrap();
    let n1 = transfer_function(&transformed, zeta).unwrap();
    assert!(n1.sub(&n0).max_abs() < 1e-13);
}

#[test]
fn two_of_three_structure() {
    // Symmetry plus G-symplecticity forces P D N(zeta) to be Hermitian;
    // for a symmetric method that is not G-symplectic the third property
    // must fail as well.
    let pdn_hermitian_residual = |name: &str| -> f64 {
        let m = &registry().lookup(name).unwrap().tableau;
        let f = m.floats();
        let s = m.s;
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let zeta = Complex64::new(1.1 + 0.3 * k as f64, 0.0);
            let n = transfer_function(m, zeta).unwrap();
            // D = diag of the first row of B, P = stage reversal.
            let mut pdn = vec![vec![0.0; s]; s];
            for i in 0..s {
                for j in 0..s {
                    pdn[i][j] = f.b[0][s - 1 - i] * n[(s - 1 - i, j)].re;
                }
            }
            for i in 0..s {
                for j in 0..s {
                    worst = worst.max((pdn[i][j] - pdn[j][i]).abs());
                }
            }
        }
        worst
    };
    let e_4124b = registry().lookup("4124B").unwrap();
    assert!(symglm::analysis::check_symmetry(&e_4124b.tableau).pass);
    assert!(check_gsymplectic(&e_4124b.tableau, e_4124b.gsym.as_ref().unwrap()).pass);
    assert!(
        pdn_hermitian_residual("4124B") < 1e-12,
        "4124B: all three properties hold"
    );
    assert!(
        pdn_hermitian_residual("4123A") > 1e-3,
        "4123A: symmetric but not G-symplectic, so the third property fails"
    );
}

#[test]
fn parasitism_free_methods_are_implicit() {
    // A consistent symmetric parasitism-free method cannot be explicit.
    for name in GLM_NAMES {
        let m = &registry().lookup(name).unwrap().tableau;
        let factors = parasitism_factors(m).unwrap();
        assert!(factors.iter().all(|f| f.to_f64() == 0.0), "{name}");
        assert!(
            m.implicit_stages() >= 1,
            "{name}: parasitism-free symmetric method must have an implicit stage"
        );
    }
}

#[test]
fn gsym_structural_acceptance_pattern() {
    // The structure conditions hold exactly for the G-symplectic method
    // and fail for the three rs = 23 methods with D = diag(B row 1).
    assert!(check_gsym_structural(&registry().lookup("4124B").unwrap().tableau).pass);
    for name in ["4123A", "4123B", "4123C"] {
        assert!(
            !check_gsym_structural(&registry().lookup(name).unwrap().tableau).pass,
            "{name}"
        );
    }
}

#[test]
fn step_inversion_all_methods_all_problems() {
    // L M_-h L M_h = id on every benchmark problem at two step sizes.
    let specs = problems::all_problems();
    for name in STEPPABLE {
        let entry = registry().lookup(name).unwrap();
        for spec in &specs {
            let prob = spec.ode_problem();
            for h in [1e-2, 1e-3] {
                let cfg = RunConfig::new(name, h, 1.0);
                let mut st = GlmStepper::new(entry, &prob, &cfg).unwrap();
                let mut y = st.start(&prob.y0, h).unwrap();
                let orig = y.clone();
                st.step(&mut y, h).unwrap();
                let mut back = apply_l(&entry.tableau, &y);
                st.step(&mut back, -h).unwrap();
                let round = apply_l(&entry.tableau, &back);
                let err = max_diff(&round, &orig);
                assert!(
                    err <= 100.0 * cfg.newton_tol,
                    "{name} on {} at h={h}: round-trip error {err:.3e}",
                    spec.name
                );
            }
        }
    }
}

#[test]
fn finish_inverts_start_on_all_problems() {
    let specs = problems::all_problems();
    for name in STEPPABLE {
        let entry = registry().lookup(name).unwrap();
        for spec in &specs {
            let prob = spec.ode_problem();
            let h = 0.01;
            let cfg = RunConfig::new(name, h, 1.0);
            let mut st = GlmStepper::new(entry, &prob, &cfg).unwrap();
            let y = st.start(&prob.y0, h).unwrap();
            let est = st.finish(&y, h).unwrap();
            let err = est
                .iter()
                .zip(&prob.y0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(
                err <= 10.0 * cfg.newton_tol,
                "{name} on {}: finish(start(y0)) error {err:.3e}",
                spec.name
            );
        }
    }
}

#[test]
fn starts_respect_time_reversal() {
    // Pair and half-difference starts satisfy S_-h = L S_h to round-off;
    // the explicit shift start of the L = I family is symmetric only
    // through its construction order, so its defect decays as h^5.
    let prob = problems::kepler().ode_problem();
    for name in GLM_NAMES {
        let entry = registry().lookup(name).unwrap();
        let StartScheme::Triple(triple) = &entry.start else {
            panic!()
        };
        let cfg = RunConfig::new(name, 0.01, 1.0);
        let mut st = GlmStepper::new(entry, &prob, &cfg).unwrap();
        let defect = |h: f64, st: &mut GlmStepper| -> f64 {
            let plus = st.start(&prob.y0, h).unwrap();
            let minus = st.start(&prob.y0, -h).unwrap();
            max_diff(&minus, &apply_l(&entry.tableau, &plus))
        };
        match triple.variant {
            StartVariant::Pair | StartVariant::HalfDifference => {
                let d = defect(0.01, &mut st);
                assert!(d <= 10.0 * cfg.newton_tol, "{name}: start symmetry defect {d:.3e}");
            }
            StartVariant::Shift => {
                let d1 = defect(0.01, &mut st);
                let d2 = defect(0.005, &mut st);
                assert!(d1 < 2e-8, "{name}: shift-start defect too large: {d1:.3e}");
                let ratio = d1 / d2;
                assert!(
                    (24.0..40.0).contains(&ratio),
                    "{name}: shift-start defect must decay as h^5, got ratio {ratio}"
                );
            }
        }
    }
}

#[test]
fn global_error_is_even_in_h() {
    // Richardson fit e(h) = c4 h^4 + c6 h^6 over four step sizes on one
    // orbit; residuals must stay below 5% of the measured errors, which
    // rules out a significant odd term.
    let prob = problems::kepler().ode_problem();
    let t2pi = std::f64::consts::TAU;
    let cfg = RunConfig::new("richardson", 0.01, t2pi);
    let reference = registry().lookup("suzuki4115").unwrap();
    let y_ref = integrate_final(reference, &prob, 0.005 / 20.0, t2pi, &cfg).unwrap();
    for name in ["4123A", "4124D"] {
        let entry = registry().lookup(name).unwrap();
        let hs = [0.04, 0.02, 0.01, 0.005];
        let es: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let y = integrate_final(entry, &prob, h, t2pi, &cfg).unwrap();
                y.iter()
                    .zip(&y_ref)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (h, e) in hs.iter().zip(&es) {
            let (x4, x6) = (h.powi(4), h.powi(6));
            a11 += x4 * x4;
            a12 += x4 * x6;
            a22 += x6 * x6;
            b1 += x4 * e;
            b2 += x6 * e;
        }
        let det = a11 * a22 - a12 * a12;
        let c4 = (b1 * a22 - b2 * a12) / det;
        let c6 = (a11 * b2 - a12 * b1) / det;
        for (h, e) in hs.iter().zip(&es) {
            let fit = c4 * h.powi(4) + c6 * h.powi(6);
            let rel = (fit - e).abs() / e;
            assert!(rel < 0.05, "{name} at h={h}: even-power fit residual {rel:.4}");
        }
    }
}

#[test]
fn frozen_regressions() {
    use symglm::analysis::{imaginary_axis_scan, k0_bisect};
    // Imaginary-axis interval edge of 4123A, first measured by bisection
    // and frozen to three digits.
    let m = &registry().lookup("4123A").unwrap().tableau;
    let k0 = k0_bisect(m, 4.0);
    assert!((k0 - 2.360).abs() < 2e-3, "4123A k0 = {k0}");
    let scan = imaginary_axis_scan(m, 4.0, 400);
    assert!((scan.k0_estimate - 2.35).abs() <= 0.011, "scan k0 = {}", scan.k0_estimate);

    // Double-pendulum initial energy, frozen at registration time.
    let dp = problems::double_pendulum();
    let h0 = dp.hamiltonian(&dp.y0).unwrap();
    assert!((h0 - 2.99913261372835827).abs() < 1e-12, "H(y0) = {h0}");
}

#[test]
fn domain_error_aborts_run_with_partial_trajectory() {
    // Radial infall (zero angular momentum) reaches the Kepler collision
    // guard; the run aborts and keeps the samples gathered on the way in.
    let spec = problems::kepler();
    let mut prob: OdeProblem = spec.ode_problem();
    prob.y0 = vec![-0.5, 0.0, 1.0, 0.0];
    let entry = registry().lookup("4123A").unwrap();
    let mut cfg = RunConfig::new("4123A", 0.01, 50.0);
    cfg.sample_stride = 1;
    let failure = symglm::integrator::run(entry, &prob, &cfg).unwrap_err();
    assert!(!failure.partial.samples.is_empty());
    let last_t = failure.partial.samples.last().unwrap().t;
    assert!(last_t > 0.1 && last_t < 50.0, "aborted at t = {last_t}");
}
