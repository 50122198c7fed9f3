use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sasaki_calib::calibration::random_rotation;
use sasaki_calib::fields::{
    adapted_frame, derivative_or_fd, graph_blocks_in_frame, hopf_field, perturbed_hopf_field, radial_field,
    rotated_hopf_field, UnitField,
};
use sasaki_calib::quadrature::sample_uniform;
use sasaki_calib::sphere::{geodesic_distance, SpherePoint};

const UNIT_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fields() -> Vec<UnitField> {
    let q = random_rotation(&mut ChaCha8Rng::seed_from_u64(4), 6);
    vec![
        hopf_field(2).unwrap(),
        rotated_hopf_field(2, &q).unwrap(),
        perturbed_hopf_field(2, 0.3).unwrap(),
        radial_field(&SpherePoint::basis(5, 6)),
    ]
}

#[test]
fn unit_and_tangent_on_ten_thousand_samples() {
    let pole = SpherePoint::basis(5, 6);
    for f in fields() {
        for x in sample_uniform(5, 21).unwrap().take(10_000) {
            let r = geodesic_distance(&x, &pole);
            if r < 1e-3 || r > std::f64::consts::PI - 1e-3 {
                continue;
            }
            let v = f.eval_coords(x.coords()).unwrap();
            assert!((dot(&v, &v).sqrt() - 1.0).abs() < UNIT_TOL, "{}", f.name());
            assert!(dot(&v, x.coords()).abs() < UNIT_TOL, "{}", f.name());
        }
    }
}

fn random_tangent(x: &[f64], seed: u64) -> Vec<f64> {
    let q = random_rotation(&mut ChaCha8Rng::seed_from_u64(seed), x.len());
    let g = q.column(0);
    let c = dot(&g, x);
    g.iter().zip(x).map(|(a, b)| a - c * b).collect()
}

#[test]
fn central_differences_are_second_order() {
    for f in fields() {
        if !f.has_derivative() {
            continue;
        }
        let fd = f.without_derivative();
        for (k, x) in sample_uniform(5, 8).unwrap().take(20).enumerate() {
            let dir = random_tangent(x.coords(), k as u64);
            let exact = derivative_or_fd(&f, x.coords(), &dir, 1e-5).unwrap();
            let err = |h: f64| {
                let approx = derivative_or_fd(&fd, x.coords(), &dir, h).unwrap();
                approx.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            };
            let (e1, e2) = (err(2e-2), err(1e-2));
            if e1 < 1e-11 {
                continue;
            }
            let ratio = e1 / e2;
            assert!((3.5..4.5).contains(&ratio), "{}: ratio {ratio} ({e1} → {e2})", f.name());
        }
    }
}

#[test]
fn b_column_norm_is_frame_independent() {
    let f = perturbed_hopf_field(2, 0.3).unwrap();
    for (k, x) in sample_uniform(5, 9).unwrap().take(50).enumerate() {
        let v = f.eval_coords(x.coords()).unwrap();
        let base = adapted_frame(x.coords(), &v).unwrap();
        let b0 = graph_blocks_in_frame(&f, x.coords(), base.clone(), 1e-5).unwrap();
        let q = random_rotation(&mut ChaCha8Rng::seed_from_u64(k as u64), 4);
        let mut rotated = vec![v.clone()];
        for j in 0..4 {
            let col: Vec<f64> = (0..6).map(|i| (0..4).map(|l| base[l + 1][i] * q.get(l, j)).sum()).collect();
            rotated.push(col);
        }
        let b1 = graph_blocks_in_frame(&f, x.coords(), rotated, 1e-5).unwrap();
        let n0 = dot(b0.b(), b0.b()).sqrt();
        let n1 = dot(b1.b(), b1.b()).sqrt();
        assert!((n0 - n1).abs() < 1e-8, "{n0} vs {n1}");
    }
}
