//! Randomized invariants of the lattice calculus, the dynamics and the
//! Gaussian limit.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssepclt_core::harness::Estimate;
use ssepclt_core::observables::{Link, Observable};
use ssepclt_core::ou::{covariance_v, covariance_v_quadrature, BandLimitedProfile, NoisePrefactor};
use ssepclt_core::ssep::{exact_two_point, sample_initial, simulate, Configuration};
use ssepclt_core::torus::{
    extend, inner_product_discrete, project, GridField, Lattice, ModeIndex, SpectralField,
};

fn grid_field() -> impl Strategy<Value = GridField> {
    (1usize..=2, 1usize..=5).prop_flat_map(|(d, n)| {
        let lat = Lattice::new(n, d).unwrap();
        prop::collection::vec(-3.0f64..3.0, lat.sites())
            .prop_map(move |v| GridField::new(lat, v).unwrap())
    })
}

fn profile() -> impl Strategy<Value = BandLimitedProfile> {
    (0.3f64..0.7, -0.15f64..0.15, -0.1f64..0.1, 0.0f64..6.28).prop_map(|(c, a1, a2, p)| {
        BandLimitedProfile::from_terms(
            1,
            &[
                (ModeIndex::from(0), c, 0.0),
                (ModeIndex::from(1), a1, p),
                (ModeIndex::from(2), a2, 0.0),
            ],
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_inverts_interpolation(f in grid_field()) {
        let back = project(&extend(&f), f.lattice()).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_preserves_inner_products(f in grid_field()) {
        let discrete = inner_product_discrete(&f, &f).unwrap();
        let spectral = extend(&f).l2_norm().powi(2);
        prop_assert!((discrete - spectral).abs() < 1e-12 * (1.0 + discrete));
    }

    #[test]
    fn dynamics_conserve_particles(n in 1usize..=6, seed in any::<u64>(), t in 0.0f64..0.5) {
        let lat = Lattice::new(n, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = GridField::constant(lat, 0.4);
        let start = sample_initial(&rho, &mut rng).unwrap();
        let end: Configuration = simulate(&start, t, &mut rng).unwrap();
        prop_assert_eq!(start.count(), end.count());
    }

    #[test]
    fn noise_covariance_is_positive_semidefinite(rho in profile(), t in 0.0f64..0.4) {
        let v = covariance_v(&rho, t, 4, NoisePrefactor::FourPiSq).unwrap();
        let eig = nalgebra::SymmetricEigen::new(v.matrix().clone()).eigenvalues.min();
        prop_assert!(eig >= -1e-12, "{eig}");
        prop_assert!((v.matrix() - v.matrix().transpose()).amax() < 1e-14);
    }

    #[test]
    fn closed_form_covariance_matches_quadrature(rho in profile(), t in 0.001f64..0.2) {
        let a = covariance_v(&rho, t, 2, NoisePrefactor::FourPiSq).unwrap();
        let b = covariance_v_quadrature(&rho, t, 2, NoisePrefactor::FourPiSq, 400).unwrap();
        prop_assert!((a.matrix() - b.matrix()).amax() < 1e-7);
    }

    #[test]
    fn lattice_and_spectral_routes_agree(
        n in 2usize..=6,
        seed in any::<u64>(),
        amp in 0.2f64..2.0,
        freq in 0.1f64..2.0,
    ) {
        let lat = Lattice::new(n, 1).unwrap();
        let phi = SpectralField::cosine(1, &ModeIndex::from(1), amp, 0.3).unwrap();
        let psi = SpectralField::cosine(1, &ModeIndex::from(2), 1.0, 0.0).unwrap();
        let obs = Observable::smooth(Link::Cos { freq }, vec![phi, psi]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..lat.sites())
            .map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0))
            .collect();
        let zeta = GridField::new(lat, values).unwrap();
        let a = obs.eval_on_particle(&zeta).unwrap();
        let b = obs.eval_on_gaussian_sample(&extend(&zeta)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn two_point_table_is_a_covariance(n in 1usize..=5, c in 0.1f64..0.9, t in 0.0f64..0.3) {
        let lat = Lattice::new(n, 1).unwrap();
        let rho = GridField::from_fn(lat, |x| c + 0.08 * x[0].cos());
        let table = exact_two_point(&rho, t).unwrap();
        let sites = lat.sites();
        let r = table.rho_t().values();
        let m = nalgebra::DMatrix::from_fn(sites, sites, |x, y| {
            if x == y { r[x] * (1.0 - r[x]) } else { table.get(x, y) }
        });
        let eig = nalgebra::SymmetricEigen::new(m).eigenvalues.min();
        prop_assert!(eig >= -1e-12, "{eig}");
    }

    #[test]
    fn stderr_scales_with_samples(
        samples in prop::collection::vec(-5.0f64..5.0, 2..64),
        scale in -4.0f64..4.0,
        shift in -10.0f64..10.0,
    ) {
        let base = Estimate::from_samples(&samples).unwrap();
        let moved: Vec<f64> = samples.iter().map(|v| scale * v + shift).collect();
        let e = Estimate::from_samples(&moved).unwrap();
        prop_assert!((e.stderr - scale.abs() * base.stderr).abs() < 1e-9 * (1.0 + base.stderr));
        prop_assert!((e.value - (scale * base.value + shift)).abs() < 1e-9 * (1.0 + shift.abs()));
        prop_assert!(e.stderr >= 0.0);
    }
}

#[test]
fn constant_samples_have_zero_stderr() {
    let e = Estimate::from_samples(&[0.25; 17]).unwrap();
    assert_eq!(e.value, 0.25);
    assert_eq!(e.stderr, 0.0);
}

#[cfg(feature = "parallel")]
#[test]
fn execution_modes_agree_bit_for_bit() {
    use ssepclt_core::harness::{
        monte_carlo_expectation, Engine, Execution, ExperimentConfig, ModeTerm, ObservableSpec,
        Zeta0Mode,
    };
    let cfg = ExperimentConfig {
        d: 1,
        n_list: vec![4],
        t: 0.05,
        rho0: vec![
            ModeTerm::new(vec![0], 0.5, 0.0),
            ModeTerm::new(vec![1], 0.2, 0.0),
        ],
        observable: ObservableSpec::Linear {
            phi: vec![ModeTerm::new(vec![1], 1.0, 0.0)],
        },
        zeta0: Zeta0Mode::MatchedGaussian,
        replicas: 64,
        master_seed: 99,
        noise_prefactor: NoisePrefactor::FourPiSq,
        truncation: None,
        engine: Engine::MonteCarlo,
        gaussian_replica_factor: 10,
        slope_gate: None,
        synthetic: None,
    };
    let seq = monte_carlo_expectation(&cfg, 4, Execution::Sequential).unwrap();
    let par = monte_carlo_expectation(&cfg, 4, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
}
