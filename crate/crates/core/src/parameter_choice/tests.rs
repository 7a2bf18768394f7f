use super::*;
use crate::grid::{make_grid, GridSpec};
use crate::operators::DiffusionModel;
use crate::spectral::l2_norm;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Example-1 data at `T = 1` plus noise scaled to `perc` percent; returns `(g^δ, δ)`.
fn noisy_data(g: GridSpec, perc: f64, seed: u64) -> (RealField, f64) {
    let model = DiffusionModel::exact(0.8, 1.0).unwrap();
    let solver = Solver::new(g, Execution::default());
    let u0 = RealField::from_fn(g, |x| (-x[0] * x[0] - x[1] * x[1]).exp()).unwrap();
    let exact = solver.forward_solve(&u0, &model, 1.0).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let eps: Vec<f64> = (0..g.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let eps = RealField::new(g, eps).unwrap();
    let eta = perc / 100.0 * l2_norm(&exact) / l2_norm(&eps);
    let noisy = exact.add(&eps.scaled(eta)).unwrap();
    (noisy, eta * l2_norm(&eps))
}

fn setup(perc: f64, seed: u64) -> (Solver, RealField, f64, Discrepancy) {
    let g = make_grid(2, 10.0, 128).unwrap();
    let solver = Solver::new(g, Execution::default());
    let (data, delta) = noisy_data(g, perc, seed);
    let d = Discrepancy::new(&solver, &data).unwrap();
    (solver, data, delta, d)
}

#[test]
fn apriori_examples() {
    assert!((apriori_alpha(1e-3, 1.0, 2.0, 0.0).unwrap() - 0.177828).abs() < 1e-6);
    assert!((apriori_alpha(0.0, 1.0, 2.0, 1e-4).unwrap() - 0.1).abs() < 1e-14);
    let v = apriori_alpha(0.01, 2.0, 4.0, 0.0).unwrap();
    assert!((v - (0.005_f64.ln() / 6.0).exp()).abs() < 1e-15);
    assert!((v - 0.41352).abs() < 1e-5);
    assert!(apriori_alpha(0.0, 1.0, 2.0, 0.0).is_err());
    assert!(apriori_alpha(1e-3, 0.0, 2.0, 0.0).is_err());
    assert!(apriori_alpha(1e-3, 1.0, 0.0, 0.0).is_err());
}

#[test]
fn noise_condition_examples() {
    let g = make_grid(1, 1.0, 8).unwrap();
    // constant 1/√2 on [-1, 1] has unit norm
    let f = RealField::from_fn(g, |_| std::f64::consts::FRAC_1_SQRT_2).unwrap();
    assert!((l2_norm(&f) - 1.0).abs() < 1e-15);
    assert!(check_noise_condition(&f, 0.5, 1.01));
    assert!(!check_noise_condition(&f, 1.0, 1.01));
    assert!(!check_noise_condition(&f, 0.0, 1.01));
}

#[test]
fn discrepancy_examples() {
    let (solver, data, _, d) = setup(1.0, 3);
    let mp = MollifierParams::default();
    assert_eq!(d.eval(0.0, &mp), 0.0);
    let big = d.eval(1e6, &mp);
    assert!((big - d.saturation()).abs() <= 1e-12 * big);
    assert!(big < d.data_norm());

    // node-wise frequency sum, no radial grouping
    let spec = solver.plan().forward(&data).unwrap();
    let g = solver.grid();
    let direct: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let m = 1.0 - (-0.5 * (0.5 * g.xi_abs(k)).powi(4)).exp();
            m * m * c.norm_sqr()
        })
        .sum::<f64>()
        * g.freq_cell();
    let v = d.eval(0.5, &mp);
    assert!((v - direct.sqrt()).abs() <= 1e-12 * v);

    let residual = data.sub(&solver.mollify(&data, 0.5, &mp).unwrap()).unwrap();
    assert!((v - l2_norm(&residual)).abs() <= 1e-12 * v);
    assert!((discrepancy(&data, 0.5, &mp).unwrap() - v).abs() <= 1e-14 * v);
}

#[test]
fn geometric_search_brackets_the_threshold() {
    let (_, _, delta, d) = setup(1.0, 11);
    let mp = MollifierParams::default();
    let cfg = MorozovConfig::default();
    let sel = d.geometric(delta, &mp, &cfg).unwrap();
    assert!(sel.alpha > 0.0 && sel.alpha <= 10.0);
    assert!(sel.iterations >= 1);
    assert!(d.eval(sel.alpha, &mp) <= cfg.theta * delta);
    assert!(d.eval(sel.alpha / cfg.q, &mp) > cfg.theta * delta);
}

#[test]
fn geometric_search_returns_alpha0_when_already_below() {
    let (_, _, _, d) = setup(1.0, 5);
    let mp = MollifierParams::default();
    let cfg = MorozovConfig::default();
    let v0 = d.eval(cfg.alpha0, &mp);
    let delta = 0.5 * (v0 + d.data_norm()) / cfg.theta;
    let sel = d.geometric(delta, &mp, &cfg).unwrap();
    assert_eq!((sel.alpha, sel.iterations), (cfg.alpha0, 0));
}

#[test]
fn geometric_search_reports_exhaustion() {
    let g = make_grid(1, 5.0, 64).unwrap();
    let data = RealField::from_fn(g, |x| (-x[0] * x[0]).exp() * (3.0 * x[0]).cos()).unwrap();
    let solver = Solver::new(g, Execution::Sequential);
    let d = Discrepancy::new(&solver, &data).unwrap();
    let cfg = MorozovConfig::new(1.01, 0.99, 10.0, 3).unwrap();
    let err = d
        .geometric(1e-6, &MollifierParams::default(), &cfg)
        .unwrap_err();
    assert!(matches!(err, Error::IterationLimit { max_iters: 3, .. }));
}

#[test]
fn bisection_hits_the_threshold() {
    let (_, _, delta, d) = setup(1.0, 11);
    let mp = MollifierParams::default();
    let cfg = MorozovConfig::default();
    let geo = d.geometric(delta, &mp, &cfg).unwrap().alpha;
    let bis = d.bisect(delta, &mp, cfg.theta, 1e-6).unwrap();
    let target = cfg.theta * delta;
    assert!((bis.discrepancy - target).abs() <= 1e-6 * target);
    assert!(
        bis.alpha >= geo * cfg.q && bis.alpha <= geo / cfg.q,
        "{} vs {geo}",
        bis.alpha
    );
}

#[test]
fn bisection_extends_upward_and_reports_failures() {
    // a wide domain keeps v strictly increasing well past α0 = 10
    let g = make_grid(2, 40.0, 128).unwrap();
    let solver = Solver::new(g, Execution::default());
    let (data, _) = noisy_data(g, 1.0, 2);
    let d = Discrepancy::new(&solver, &data).unwrap();
    let mp = MollifierParams::default();
    let sat = d.saturation();
    let near_sat = d.eval(20.0, &mp) / 1.01;
    assert!(near_sat < sat / 1.01);
    let bis = d.bisect(near_sat, &mp, 1.01, 1e-6).unwrap();
    assert!(
        bis.alpha > 10.0 && (bis.alpha - 20.0).abs() < 1.0,
        "{}",
        bis.alpha
    );
    assert!(matches!(
        d.bisect(d.data_norm() / 1.01, &mp, 1.01, 1e-6),
        Err(Error::NoiseCondition { .. })
    ));
    // between the saturation level and the data norm
    let between = 0.5 * (sat + d.data_norm()) / 1.01;
    assert!(matches!(
        d.bisect(between, &mp, 1.01, 1e-6),
        Err(Error::Bracket(_))
    ));
}

#[test]
fn discrepancy_is_monotone_on_a_ladder() {
    let (_, _, _, d) = setup(1.0, 4);
    let mp = MollifierParams::default();
    let mut prev = 0.0;
    for k in 0..100 {
        let alpha = 1e-3 * 10f64.powf(5.0 * k as f64 / 99.0);
        let v = d.eval(alpha, &mp);
        assert!(v >= prev);
        prev = v;
    }
}

#[test]
fn selections_are_scale_equivariant() {
    let g = make_grid(2, 10.0, 128).unwrap();
    let solver = Solver::new(g, Execution::default());
    let (data, delta) = noisy_data(g, 1.0, 8);
    let mp = MollifierParams::default();
    let cfg = MorozovConfig::default();
    let base = Discrepancy::new(&solver, &data).unwrap();
    let a_geo = base.geometric(delta, &mp, &cfg).unwrap().alpha;
    let a_bis = base.bisect(delta, &mp, cfg.theta, 1e-6).unwrap().alpha;
    for c in [1e-3, 7.5] {
        let scaled = Discrepancy::new(&solver, &data.scaled(c)).unwrap();
        let g2 = scaled.geometric(c * delta, &mp, &cfg).unwrap().alpha;
        let b2 = scaled
            .bisect(c * delta, &mp, cfg.theta, 1e-6)
            .unwrap()
            .alpha;
        assert!((g2 - a_geo).abs() <= 1e-10 * a_geo);
        assert!((b2 - a_bis).abs() <= 1e-10 * a_bis);
    }
}

#[test]
fn selected_alpha_shrinks_with_noise() {
    let mp = MollifierParams::default();
    let cfg = MorozovConfig::default();
    let mut prev = f64::INFINITY;
    for (i, perc) in [8.0, 4.0, 2.0, 1.0, 0.5].into_iter().enumerate() {
        let (_, _, delta, d) = setup(perc, 100 + i as u64);
        let a = d.geometric(delta, &mp, &cfg).unwrap().alpha;
        assert!(a <= prev / cfg.q, "{perc}%: {a} after {prev}");
        prev = a;
    }
}

#[test]
fn config_validation() {
    assert!(MorozovConfig::new(1.0, 0.99, 10.0, 10).is_err());
    assert!(MorozovConfig::new(1.01, 1.0, 10.0, 10).is_err());
    assert!(MorozovConfig::new(1.01, 0.99, 0.0, 10).is_err());
    assert!(MorozovConfig::new(1.01, 0.99, 10.0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrepancy_is_nondecreasing(
        vals in prop::collection::vec(-1.0f64..1.0, 256),
        a in 1e-4f64..1e2,
        b in 1e-4f64..1e2,
    ) {
        let g = make_grid(2, 4.0, 16).unwrap();
        let f = RealField::new(g, vals).unwrap();
        let solver = Solver::new(g, Execution::Sequential);
        let d = Discrepancy::new(&solver, &f).unwrap();
        let mp = MollifierParams::default();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(d.eval(lo, &mp) <= d.eval(hi, &mp));
        prop_assert!(d.eval(hi, &mp) <= d.data_norm() * (1.0 + 1e-12));
    }
}
