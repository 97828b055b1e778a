use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

use nclandau::cli::{audit, audit_pairs};
use nclandau::fock_oracle::{
    build_fock_matrix, dynamical_matrix, hermitian_eigenvalues, oracle_invariants,
};
use nclandau::hamiltonian::{
    assemble, landau_params, quadratic_form, symmetric_gauge_for, symmetric_params, PhysicalSystem,
    Prescription, QuadraticForm,
};
use nclandau::representations::{
    commutator_table, landau_gauge, make_representation, CommutatorMatrix, GaugePair, NcParameters,
    PI_X, PI_Y, X, Y,
};
use nclandau::spectra::{
    eigenfrequencies, invariants, ladder_coefficients, paper_invariants_from, spectrum, Convention,
    EigenFrequencies, ModeInvariants,
};

/// A system strictly inside the symmetric-gauge domain: `ϑ = f·ħ/(mω_c)`, `f < 0.95`.
fn system() -> impl Strategy<Value = PhysicalSystem> {
    (
        0.5..2.0f64,
        0.5..2.0f64,
        0.0..2.0f64,
        0.0..2.0f64,
        0.2..2.0f64,
        0.0..0.95f64,
    )
        .prop_map(|(hbar, m, w1, w2, wc, f)| {
            PhysicalSystem::new(hbar, m, w1, w2, wc, f * hbar / (m * wc)).unwrap()
        })
}

fn gauge() -> impl Strategy<Value = GaugePair> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(r, s)| GaugePair::new(r, s))
}

fn away_from_pole(sys: &PhysicalSystem, g: GaugePair) -> bool {
    sys.nc_parameters()
        .gauge_pole()
        .is_none_or(|p| (g.r - p).abs() >= 0.05 * p.abs().max(1.0))
}

fn quadratic() -> impl Strategy<Value = QuadraticForm> {
    (
        0.2..5.0f64,
        0.2..5.0f64,
        0.0..5.0f64,
        0.0..5.0f64,
        -3.0..3.0f64,
        -3.0..3.0f64,
    )
        .prop_map(|(m1, m2, o1, o2, l1, l2)| QuadraticForm::new(m1, m2, o1, o2, l1, l2).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Round-off scale of `P`: the sum of the magnitudes of its four terms.
fn p_scale(q: &QuadraticForm) -> f64 {
    let (a, b, k1, k2, l1, l2) = (q.a(), q.b(), q.k1(), q.k2(), q.l1, q.l2);
    (a * b * k1 * k2).abs()
        + (b * k1 * l2 * l2).abs()
        + (a * k2 * l1 * l1).abs()
        + (l1 * l2).powi(2)
        + 1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn commutators_hit_target_in_every_gauge(sys in system(), g in gauge()) {
        prop_assume!(away_from_pole(&sys, g));
        let nc = sys.nc_parameters();
        let table = commutator_table(&make_representation(&nc, g).unwrap());
        prop_assert!(table.is_antisymmetric());
        prop_assert!(table.relative_deviation(&CommutatorMatrix::target(&nc)) <= 1e-12);
    }

    #[test]
    fn coordinate_rows_depend_only_on_s(sys in system(), g in gauge(), r2 in -2.0..2.0f64) {
        let other = GaugePair::new(r2, g.s);
        prop_assume!(away_from_pole(&sys, g) && away_from_pole(&sys, other));
        let nc = sys.nc_parameters();
        let a = make_representation(&nc, g).unwrap();
        let b = make_representation(&nc, other).unwrap();
        prop_assert_eq!(a.row(X), b.row(X));
        prop_assert_eq!(a.row(Y), b.row(Y));
        // structural zeros of the family
        prop_assert_eq!([a.row(X)[1], a.row(X)[2]], [0.0, 0.0]);
        prop_assert_eq!([a.row(Y)[0], a.row(Y)[3]], [0.0, 0.0]);
        prop_assert_eq!([a.row(PI_X)[0], a.row(PI_X)[3]], [0.0, 0.0]);
        prop_assert_eq!([a.row(PI_Y)[1], a.row(PI_Y)[2]], [0.0, 0.0]);
    }

    #[test]
    fn invariants_are_gauge_independent(sys in system(), g in gauge()) {
        prop_assume!(away_from_pole(&sys, g));
        let reference = invariants(&quadratic_form(&sys, Prescription::GroupTheoretic(landau_gauge())).unwrap());
        let inv = invariants(&quadratic_form(&sys, Prescription::GroupTheoretic(g)).unwrap());
        prop_assert!(close(inv.s, reference.s, 1e-10), "{:?} vs {:?}", inv, reference);
        prop_assert!(close(inv.p, reference.p, 1e-10), "{:?} vs {:?}", inv, reference);
    }

    #[test]
    fn symmetric_and_landau_frequencies_agree(sys in system()) {
        let lan = spectrum(&quadratic_form(&sys, Prescription::GroupTheoretic(landau_gauge())).unwrap(), Convention::OracleValidated).unwrap();
        let sym_gauge = Prescription::GroupTheoretic(symmetric_gauge_for(&sys).unwrap());
        let sym = spectrum(&quadratic_form(&sys, sym_gauge).unwrap(), Convention::OracleValidated).unwrap();
        let scale = lan.omega_tilde_1.max(1.0);
        prop_assert!((sym.omega_tilde_1 - lan.omega_tilde_1).abs() <= 1e-10 * scale);
        prop_assert!((sym.omega_tilde_2 - lan.omega_tilde_2).abs() <= 1e-7 * scale,
            "{:?} vs {:?}", sym, lan);
    }

    #[test]
    fn invariants_match_closed_form(sys in system(), g in gauge()) {
        prop_assume!(away_from_pole(&sys, g));
        let (hbar, m, w1, w2, wc, th) = (sys.hbar(), sys.m(), sys.omega1(), sys.omega2(), sys.omega_c(), sys.theta());
        let s = w1 * w1 + w2 * w2 + wc * wc + (m * th / hbar).powi(2) * w1 * w1 * w2 * w2;
        let p = (w1 * w2 * (1.0 - m * wc * th / hbar)).powi(2);
        let qf = quadratic_form(&sys, Prescription::GroupTheoretic(g)).unwrap();
        let inv = invariants(&qf);
        prop_assert!(close(inv.s, s, 1e-10) && close(inv.p, p, 1e-10), "{:?} vs ({}, {})", inv, s, p);
    }

    #[test]
    fn closed_form_parameters_match_assembly(sys in system()) {
        let nc = sys.nc_parameters();
        let sym = assemble(&sys, &make_representation(&nc, symmetric_gauge_for(&sys).unwrap()).unwrap()).unwrap();
        let lan = assemble(&sys, &make_representation(&nc, landau_gauge()).unwrap()).unwrap();
        prop_assert!(symmetric_params(&sys).unwrap().max_relative_difference(&sym) <= 1e-12);
        prop_assert!(landau_params(&sys).unwrap().max_relative_difference(&lan) <= 1e-12);
    }

    #[test]
    fn commutative_limit_makes_prescriptions_agree(sys in system(), g in gauge()) {
        let sys = sys.with_theta(0.0).unwrap();
        let reference = invariants(&quadratic_form(&sys, Prescription::GroupTheoretic(landau_gauge())).unwrap());
        for p in [Prescription::GroupTheoretic(g), Prescription::NmpSymmetric, Prescription::NmpLandau] {
            let inv = invariants(&quadratic_form(&sys, p).unwrap());
            prop_assert!(close(inv.s, reference.s, 1e-12) && close(inv.p, reference.p, 1e-12), "{:?}: {:?} vs {:?}", p, inv, reference);
        }
    }

    #[test]
    fn no_field_no_deformation_decouples(hbar in 0.5..2.0f64, m in 0.5..2.0f64, w1 in 0.1..2.0f64, w2 in 0.1..2.0f64, g in gauge()) {
        let sys = PhysicalSystem::new(hbar, m, w1, w2, 0.0, 0.0).unwrap();
        for p in [Prescription::GroupTheoretic(g), Prescription::NmpSymmetric, Prescription::NmpLandau] {
            let q = quadratic_form(&sys, p).unwrap();
            prop_assert_eq!((q.l1, q.l2), (0.0, 0.0));
            prop_assert!(close(q.m1, m, 1e-14) && close(q.m2, m, 1e-14));
            prop_assert!(close(q.omega1(), w1, 1e-14) && close(q.omega2(), w2, 1e-14));
        }
    }

    #[test]
    fn scaling_covariance(sys in system(), lambda in 0.25..4.0f64) {
        let scaled = PhysicalSystem::new(
            sys.hbar(), sys.m(),
            lambda * sys.omega1(), lambda * sys.omega2(), lambda * sys.omega_c(),
            sys.theta() / lambda,
        ).unwrap();
        let f = |s: &PhysicalSystem| spectrum(&quadratic_form(s, Prescription::GroupTheoretic(landau_gauge())).unwrap(), Convention::OracleValidated).unwrap();
        let (a, b) = (f(&sys), f(&scaled));
        let scale = b.omega_tilde_1.max(1.0);
        prop_assert!((b.omega_tilde_1 - lambda * a.omega_tilde_1).abs() <= 1e-10 * scale);
        prop_assert!((b.omega_tilde_2 - lambda * a.omega_tilde_2).abs() <= 1e-7 * scale, "{:?} vs {:?}", a, b);
    }

    #[test]
    fn polynomial_identity(q in quadratic()) {
        let a = dynamical_matrix(&q);
        prop_assert!(a.trace() == 0.0);
        let oracle = oracle_invariants(&a).unwrap();
        let inv = invariants(&q);
        prop_assert!(close(oracle.s, inv.s, 1e-12));
        prop_assert!((oracle.p - inv.p).abs() <= 1e-12 * p_scale(&q), "{:?} vs {:?}", oracle, inv);
    }

    #[test]
    fn vieta_closure(w1 in 0.0..5.0f64, w2 in 0.0..5.0f64) {
        let (hi, lo) = (w1.max(w2), w1.min(w2));
        let inv = ModeInvariants::new(hi * hi + lo * lo, hi * hi * lo * lo);
        let f = eigenfrequencies(&inv).unwrap();
        let back = f.invariants();
        prop_assert!(close(back.s, inv.s, 1e-12) && close(back.p, inv.p, 1e-12));
        prop_assert!(f.omega_tilde_1 >= f.omega_tilde_2 && f.omega_tilde_2 >= 0.0);
    }

    #[test]
    fn halved_ladder_reconciles_printed_convention(sys in system()) {
        let qf = quadratic_form(&sys, Prescription::GroupTheoretic(landau_gauge())).unwrap();
        prop_assume!(qf.omega1() > 0.0 && qf.omega2() > 0.0);
        let halved = paper_invariants_from(&qf, &ladder_coefficients(&qf).unwrap().halved());
        let inv = invariants(&qf);
        prop_assert!(close(halved.s, inv.s, 1e-10) && (halved.p - inv.p).abs() <= 1e-10 * p_scale(&qf), "{:?} vs {:?}", halved, inv);
    }
}

#[test]
fn audit_over_one_hundred_pairs() {
    for (w1, w2, theta) in [(1.0, 1.0, 0.3), (1.5, 1.0, 0.7), (0.0, 0.0, 0.5)] {
        let sys = PhysicalSystem::new(1.0, 1.0, w1, w2, 1.0, theta).unwrap();
        let pairs = audit_pairs(&sys, 100, 42, Some(landau_gauge()));
        assert_eq!(pairs.len(), 100);
        assert_eq!(pairs[0], landau_gauge());
        let report = audit(&sys, &pairs).unwrap();
        assert!(report.passed(), "{:?}", report.failure);
        assert_eq!((report.samples[0].ds, report.samples[0].dp), (0.0, 0.0));
        assert!(report.max_ds <= 1e-10 && report.max_dp <= 1e-10);
    }
}

#[test]
fn audit_pairs_are_seeded_and_avoid_the_pole() {
    let sys = PhysicalSystem::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.8).unwrap();
    let a = audit_pairs(&sys, 500, 9, None);
    assert_eq!(a, audit_pairs(&sys, 500, 9, None));
    assert_ne!(a, audit_pairs(&sys, 500, 10, None));
    let pole = sys.nc_parameters().gauge_pole().unwrap();
    assert!(a.iter().all(|g| (g.r - pole).abs() >= 0.05 * pole.max(1.0)));
    assert!(a
        .iter()
        .all(|g| (-2.0..=2.0).contains(&g.r) && (-2.0..=2.0).contains(&g.s)));
}

#[test]
fn printed_convention_differs_without_halving() {
    let sys = PhysicalSystem::new(1.0, 1.0, 0.0, 0.0, 1.0, 0.0).unwrap();
    let qf = symmetric_params(&sys).unwrap();
    let printed = spectrum(&qf, Convention::PaperPrinted).unwrap();
    let validated = spectrum(&qf, Convention::OracleValidated).unwrap();
    assert_eq!((printed.omega_tilde_1, printed.omega_tilde_2), (1.5, 0.5));
    assert_eq!(
        (validated.omega_tilde_1, validated.omega_tilde_2),
        (1.0, 0.0)
    );
}

fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut h = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    for i in 0..n {
        h[(i, i)] = Complex::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

#[test]
fn hermitian_eigenvalues_satisfy_trace_identities() {
    for (n, seed) in [(1, 1), (5, 2), (40, 3), (120, 4)] {
        let h = random_hermitian(n, seed);
        let values = hermitian_eigenvalues(&h).unwrap();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let norm = h.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
        let trace: f64 = (0..n).map(|i| h[(i, i)].re).sum();
        assert!((values.iter().sum::<f64>() - trace).abs() <= 1e-10 * norm);
        let frob: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        let sq: f64 = values.iter().map(|v| v * v).sum();
        assert!((sq - frob).abs() <= 1e-10 * norm * norm);
    }
}

#[test]
fn fock_ground_state_descends_monotonically() {
    for (w1, w2, theta) in [
        (1.0, 1.0, 0.0),
        (1.0, 1.0, 0.5),
        (1.5, 1.0, 0.3),
        (1.5, 1.0, 0.9),
    ] {
        let sys = PhysicalSystem::new(1.0, 1.0, w1, w2, 1.0, theta).unwrap();
        for p in [
            Prescription::GroupTheoretic(landau_gauge()),
            Prescription::NmpLandau,
        ] {
            let qf = quadratic_form(&sys, p).unwrap();
            let f = spectrum(&qf, Convention::OracleValidated).unwrap();
            let exact = sys.hbar() * (f.omega_tilde_1 + f.omega_tilde_2) / 2.0;
            let grounds: Vec<f64> = [4, 8, 12, 16, 24, 32]
                .iter()
                .map(|&n| {
                    build_fock_matrix(&qf, sys.hbar(), n)
                        .unwrap()
                        .lowest_eigenvalues(1)
                        .unwrap()[0]
                })
                .collect();
            for w in grounds.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{p:?} {grounds:?}");
            }
            assert!(
                grounds.iter().all(|&e| e >= exact - 1e-10),
                "{p:?} {grounds:?} vs {exact}"
            );
        }
    }
}

#[test]
fn fock_couplings_respect_parity_sectors() {
    let sys = PhysicalSystem::new(1.0, 1.0, 1.5, 1.0, 1.0, 0.4).unwrap();
    for p in [
        Prescription::GroupTheoretic(landau_gauge()),
        Prescription::NmpSymmetric,
    ] {
        let qf = quadratic_form(&sys, p).unwrap();
        let f = build_fock_matrix(&qf, 1.0, 9).unwrap();
        assert!(f.conserves_parity());
        for &(row, col, _) in f.couplings() {
            let ((a1, a2), (b1, b2)) = (f.quanta(row), f.quanta(col));
            assert_eq!(a1.abs_diff(b1), 1);
            assert_eq!(a2.abs_diff(b2), 1);
        }
        let h = f.to_dense();
        let [even, odd] = f.parity_blocks();
        let mut blocks: Vec<f64> = hermitian_eigenvalues(&even).unwrap();
        blocks.extend(hermitian_eigenvalues(&odd).unwrap());
        blocks.sort_by(f64::total_cmp);
        let full = hermitian_eigenvalues(&h).unwrap();
        for (a, b) in blocks.iter().zip(&full) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn isotropic_oracle_example() {
    let sys = PhysicalSystem::new(1.0, 1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
    let qf = quadratic_form(&sys, Prescription::GroupTheoretic(landau_gauge())).unwrap();
    let f: EigenFrequencies = spectrum(&qf, Convention::OracleValidated).unwrap();
    let report = nclandau::fock_oracle::compare(&f, &qf, 1.0, &Default::default()).unwrap();
    let fock = report.fock.as_ref().unwrap();
    assert!(fock.converged && fock.max_rel_deviation <= 1e-6);
    assert!(report.check().is_ok());
    // representation check: degenerate parameters are rejected outright
    assert!(NcParameters::new(1.0, 1.0, 1.0, 1.0)
        .unwrap()
        .is_degenerate());
}
