use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sasaki_calib::calibration::{
    antipodal_pushforward, coefficients, graph_density, graph_density_full, omega_eval, phi_d, random_dplane,
    random_rotation, random_sasaki_tuple, random_unit_tangent_point, rigidity_residual, sasaki_frame,
    tau_coefficients, tau_subset_sum, theta_eval, DPlane,
};
use sasaki_calib::fields::GraphBlocks;
use sasaki_calib::linalg::{gram_det, Matrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Matrix {
    let a = random_rotation(rng, d);
    let b = random_rotation(rng, d);
    let diag: Vec<f64> = (0..d).map(|i| scale * (0.2 + i as f64 / d as f64)).collect();
    a.matmul(&Matrix::from_diag(&diag)).unwrap().matmul(&b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tau_interpolation_matches_subset_sums(half in 1usize..=3, seed in any::<u64>()) {
        let d = 2 * half;
        let plane = random_dplane(&mut rng(seed), d);
        let tau = tau_coefficients(&plane).unwrap();
        for (k, t) in tau.iter().enumerate() {
            let oracle = tau_subset_sum(&plane, k).unwrap();
            prop_assert!((t - oracle).abs() <= 1e-10 * oracle.abs().max(1.0), "k={k}: {t} vs {oracle}");
        }
    }

    #[test]
    fn schur_density_matches_full_gram(half in 2usize..=3, scale in 0.0f64..3.0, bs in 0.0f64..3.0, seed in any::<u64>()) {
        let d = 2 * half;
        let mut r = rng(seed);
        let m = random_matrix(&mut r, d, scale);
        let b: Vec<f64> = random_rotation(&mut r, d).column(0).iter().map(|x| bs * x).collect();
        let blocks = GraphBlocks::from_parts(b, m).unwrap();
        let schur = graph_density(&blocks).unwrap();
        let full = graph_density_full(&blocks).unwrap();
        prop_assert!((schur - full).abs() <= 1e-10 * full, "{schur} vs {full}");
    }

    #[test]
    fn density_dominates_phi(half in 2usize..=3, scale in 0.0f64..3.0, bs in 0.0f64..3.0, seed in any::<u64>()) {
        let d = 2 * half;
        let coeff = coefficients(half).unwrap();
        let mut r = rng(seed);
        let m = random_matrix(&mut r, d, scale);
        let b: Vec<f64> = random_rotation(&mut r, d).column(0).iter().map(|x| bs * x).collect();
        let phi = phi_d(&coeff, &m).unwrap();
        let dens = graph_density(&GraphBlocks::from_parts(b, m).unwrap()).unwrap();
        prop_assert!(dens >= phi - 1e-10 * dens, "{dens} < {phi}");
    }

    #[test]
    fn theta_is_frame_independent(half in 1usize..=3, seed in any::<u64>()) {
        let d = 2 * half;
        let coeff = coefficients(half.max(2)).unwrap();
        prop_assume!(coeff.d() == d);
        let mut r = rng(seed);
        let plane = random_dplane(&mut r, d);
        let q = random_rotation(&mut r, d);
        let a = theta_eval(&coeff, &plane).unwrap();
        let b = theta_eval(&coeff, &plane.rotated(&q).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn omega_is_antipodally_invariant(seed in any::<u64>()) {
        let coeff = coefficients(2).unwrap();
        let mut r = rng(seed);
        let y = random_unit_tangent_point(&mut r, 5);
        let frame = sasaki_frame(&y).unwrap();
        let tuple = random_sasaki_tuple(&mut r, &frame);
        let value = omega_eval(&coeff, &frame, &tuple).unwrap();
        let image_frame = sasaki_frame(&y.antipodal()).unwrap();
        let image: Vec<_> = tuple.iter().map(antipodal_pushforward).collect();
        let pulled = omega_eval(&coeff, &image_frame, &image).unwrap();
        prop_assert!((value - pulled).abs() <= 1e-10, "{value} vs {pulled}");
        prop_assert!(value.abs() <= 1.0 + 1e-9);
    }
}

#[test]
fn equality_exactly_for_scalar_blocks() {
    let coeff = coefficients(2).unwrap();
    for lambda in [-2.0, -0.3, 0.0, 0.7, 5.0] {
        let m = Matrix::identity(4).scaled(lambda);
        let blocks = GraphBlocks::from_parts(vec![0.0; 4], m.clone()).unwrap();
        let dens = graph_density(&blocks).unwrap();
        let phi = phi_d(&coeff, &m).unwrap();
        assert!((dens - phi).abs() < 1e-12 * dens, "λ={lambda}: {dens} vs {phi}");
        assert_eq!(rigidity_residual(&blocks), (0.0, 0.0));
    }
    let mut r = rng(11);
    for _ in 0..200 {
        let m = random_matrix(&mut r, 4, 1.0);
        let b = random_rotation(&mut r, 4).column(0);
        let blocks = GraphBlocks::from_parts(b, m.clone()).unwrap();
        let gap = graph_density(&blocks).unwrap() - phi_d(&coeff, &m).unwrap();
        assert!(gap > 1e-6, "strict inequality expected, gap {gap}");
    }
}

#[test]
fn diagonal_planes_are_calibrated() {
    for m in [2, 3] {
        let coeff = coefficients(m).unwrap();
        for k in 0..=64 {
            let phi = k as f64 * std::f64::consts::PI / 32.0;
            let v = theta_eval(&coeff, &DPlane::diagonal(2 * m, phi)).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "m={m} φ={phi}: {v}");
        }
    }
}

#[test]
fn gram_det_of_scalar_matrix() {
    let m = Matrix::identity(6).scaled(2.0);
    assert!((gram_det(&m) - 5f64.powi(6)).abs() < 1e-9);
}
