use super::*;
use crate::grid::make_grid;
use proptest::prelude::*;

fn gaussian(g: GridSpec) -> RealField {
    RealField::from_fn(g, |x| (-x[0] * x[0] - x[1] * x[1]).exp()).unwrap()
}

fn box_field(g: GridSpec) -> RealField {
    RealField::from_fn(g, |x| f64::from(x[0].abs() <= 5.0 && x[1].abs() <= 5.0)).unwrap()
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Midpoint quadrature of the continuous transform, summed term by term.
fn direct_transform(f: &RealField) -> Vec<Complex64> {
    let g = *f.grid();
    let norm = (2.0 * PI).powf(-(g.n_dims() as f64) / 2.0) * g.cell();
    let xi = g.axis_frequencies();
    (0..g.len())
        .map(|k| {
            let [ka, kb] = g.unflatten(k);
            let (xa, xb) = (xi[ka], if g.n_dims() == 2 { xi[kb] } else { 0.0 });
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &v) in f.values().iter().enumerate() {
                let x = g.node(j);
                s += v * Complex64::from_polar(1.0, -(x[0] * xa + x[1] * xb));
            }
            s * norm
        })
        .collect()
}

#[test]
fn gaussian_transform_matches_closed_form() {
    let g = make_grid(2, 10.0, 256).unwrap();
    let spec = forward_ft(&gaussian(g)).unwrap();
    let mut worst = 0.0_f64;
    for (k, c) in spec.coeffs().iter().enumerate() {
        let r = g.xi_abs(k);
        let exact = 0.5 * (-r * r / 4.0).exp();
        worst = worst.max((c - exact).norm());
    }
    assert!(worst <= 1e-10, "max abs error {worst:e}");
}

#[test]
fn fft_path_matches_direct_sum() {
    for dims in [1, 2] {
        let g = make_grid(dims, 2.5, 16).unwrap();
        let f = RealField::from_fn(g, |x| (0.7 * x[0]).sin() + (x[1] - 0.3).powi(2) * 0.1 + 0.2)
            .unwrap();
        let fast = forward_ft(&f).unwrap();
        let slow = direct_transform(&f);
        let scale = slow.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-12 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn zero_and_linearity() {
    let g = make_grid(2, 10.0, 64).unwrap();
    let z = forward_ft(&RealField::zeros(g)).unwrap();
    assert!(z.coeffs().iter().all(|c| c.norm() == 0.0));
    let a = gaussian(g);
    let b = box_field(g);
    let sum = forward_ft(&a.add(&b).unwrap()).unwrap();
    let fa = forward_ft(&a).unwrap();
    let fb = forward_ft(&b).unwrap();
    let scale = sum.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    for ((s, x), y) in sum.coeffs().iter().zip(fa.coeffs()).zip(fb.coeffs()) {
        assert!((s - x - y).norm() <= 1e-12 * scale);
    }
}

#[test]
fn roundtrip_recovers_samples() {
    let g = make_grid(2, 10.0, 256).unwrap();
    for f in [gaussian(g), box_field(g)] {
        let back = inverse_ft(&forward_ft(&f).unwrap()).unwrap();
        assert!(rel_l2(back.values(), f.values()) <= 1e-12);
    }
}

#[test]
fn broken_symmetry_is_rejected() {
    let g = make_grid(2, 10.0, 32).unwrap();
    let mut spec = forward_ft(&gaussian(g)).unwrap();
    for c in spec.coeffs_mut() {
        *c *= Complex64::new(0.0, 1.0);
    }
    assert!(matches!(inverse_ft(&spec), Err(Error::Consistency { .. })));
}

#[test]
fn norm_examples() {
    let g = make_grid(2, 10.0, 256).unwrap();
    assert_eq!(l2_norm(&RealField::zeros(g)), 0.0);
    let one = RealField::from_fn(g, |_| 1.0).unwrap();
    assert!((l2_norm(&one) - 20.0).abs() < 1e-12);
    let gauss = gaussian(g);
    assert!((l2_norm(&gauss) - (PI / 2.0).sqrt()).abs() < 1e-12);
    let c = -3.7;
    assert!(
        (l2_norm(&gauss.scaled(c)) - c.abs() * l2_norm(&gauss)).abs()
            <= 1e-14 * l2_norm(&gauss) * 4.0
    );
}

#[test]
fn sobolev_examples() {
    let g = make_grid(2, 10.0, 256).unwrap();
    let gauss = gaussian(g);
    let p0 = sobolev_norm(&gauss, 0.0).unwrap();
    assert!((p0 - l2_norm(&gauss)).abs() <= 1e-12 * p0);
    // ∫ (1+|ξ|²)² e^{-|ξ|²/2} / 4 dξ = (2π + 8π + 16π) / 4
    let p2 = sobolev_norm(&gauss, 2.0).unwrap();
    assert!((p2 - (6.5 * PI).sqrt()).abs() <= 1e-10, "{p2}");
    // p = 1 reduces to ‖f‖² + ‖∇f‖² = π/2 + π
    let p1 = sobolev_norm(&gauss, 1.0).unwrap();
    assert!((p1 - (1.5 * PI).sqrt()).abs() <= 1e-10, "{p1}");
    assert_eq!(sobolev_norm(&RealField::zeros(g), 7.0).unwrap(), 0.0);
    assert!(sobolev_norm(&gauss, -1.0).is_err());
}

#[test]
fn plancherel_and_even_symmetry() {
    let g = make_grid(2, 10.0, 128).unwrap();
    let f = RealField::from_fn(g, |x| {
        (-(x[0] * x[0]) / 2.0 - x[1].abs()).exp() * (1.0 + x[1] * x[1])
    })
    .unwrap();
    let plan = FourierPlan::new(g, Execution::default());
    let spec = plan.forward(&f).unwrap();
    let a = plan.l2_norm(&f);
    assert!((a - plan.spectral_norm(&spec, None)).abs() <= 1e-10 * a);

    // even in both coordinates: the transform is real
    let even = gaussian(g);
    let s = plan.forward(&even).unwrap();
    let re: f64 = s.coeffs().iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    let im: f64 = s.coeffs().iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    assert!(im <= 1e-10 * re);
}

#[test]
fn refinement_keeps_shared_frequencies() {
    let coarse = make_grid(2, 10.0, 128).unwrap();
    let fine = make_grid(2, 10.0, 256).unwrap();
    let a = forward_ft(&gaussian(coarse)).unwrap();
    let b = forward_ft(&gaussian(fine)).unwrap();
    for k in 0..coarse.len() {
        let [i, j] = coarse.unflatten(k);
        let fk = (i + 64) * 256 + (j + 64);
        assert!((a.coeffs()[k] - b.coeffs()[fk]).norm() <= 1e-8);
    }
}

#[test]
fn strategies_are_bit_identical() {
    let g = make_grid(2, 10.0, 128).unwrap();
    let f = box_field(g);
    let s = FourierPlan::new(g, Execution::Sequential);
    let p = FourierPlan::new(g, Execution::Parallel);
    let (a, b) = (s.forward(&f).unwrap(), p.forward(&f).unwrap());
    assert_eq!(a, b);
    assert_eq!(s.inverse(&a).unwrap(), p.inverse(&b).unwrap());
    assert_eq!(s.l2_norm(&f).to_bits(), p.l2_norm(&f).to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roundtrip_and_parseval_on_random_fields(vals in prop::collection::vec(-1e3f64..1e3, 64)) {
        prop_assume!(vals.iter().any(|v| v.abs() > 1e-3));
        let g = make_grid(2, 3.0, 8).unwrap();
        let f = RealField::new(g, vals).unwrap();
        let plan = FourierPlan::new(g, Execution::Sequential);
        let spec = plan.forward(&f).unwrap();
        let back = plan.inverse(&spec).unwrap();
        prop_assert!(rel_l2(back.values(), f.values()) <= 1e-12);
        let a = plan.l2_norm(&f);
        prop_assert!((a - plan.spectral_norm(&spec, None)).abs() <= 1e-12 * a);
    }
}
