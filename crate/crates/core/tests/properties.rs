use std::f64::consts::{LN_2, PI};

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aerial_link::analysis::{
    gcq_rate, gcq_rate_bits, laplace_derivatives, laplace_transform, serving_distance_pdf,
    void_integral_i1, Mode, Model,
};
use aerial_link::quadrature::{integrate, Tolerance};
use aerial_link::simulator::estimate_ccdf;
use aerial_link::{
    compute_footprint, coverage_curve, fading_cdf, interference_moments,
    interference_moments_closed_form, los_probability, los_step_function, path_loss, sample_fading,
    AntennaConfig, CoverageMethod, Environment, LinkState, ScenarioConfig,
};

fn urban(h_u: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::urban_default();
    cfg.h_u = h_u;
    cfg
}

/// LoS probability written out from the blockage model directly.
fn los_oracle(r: f64, h_u: f64, h_b: f64, env: &Environment) -> f64 {
    let m = (r * (env.a * env.b).sqrt() / 1000.0 - 1.0).floor();
    if m < 0.0 {
        return 1.0;
    }
    let m = m as i64;
    (0..=m)
        .map(|n| {
            let h = h_u - (n as f64 + 0.5) * (h_u - h_b) / (m as f64 + 1.0);
            1.0 - (-h * h / (2.0 * env.c * env.c)).exp()
        })
        .product()
}

fn gamma_cdf_oracle(omega: f64, m: u32) -> f64 {
    let x = m as f64 * omega;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..m {
        term *= x / k as f64;
        sum += term;
    }
    1.0 - (-x).exp() * sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn los_probability_steps_down_with_distance(
        r in 0.0..3000.0f64,
        dr in 0.0..500.0f64,
        h_u in 1.0..300.0f64,
    ) {
        let env = Environment::urban();
        let h_b = 25.0;
        let near = los_probability(r, h_u, h_b, &env);
        let far = los_probability(r + dr, h_u, h_b, &env);
        prop_assert!(far <= near);
        prop_assert!((0.0..=1.0).contains(&near));
        let oracle = los_oracle(r, h_u, h_b, &env);
        prop_assert!((near - oracle).abs() <= 1e-12 * oracle.max(1e-300));
        let step = los_step_function(&env, h_u, h_b, 2000.0);
        prop_assert_eq!(step.value(r), near);
    }

    #[test]
    fn los_probability_rises_with_altitude(r in 0.0..3000.0f64, h in 25.0..300.0f64, dh in 0.0..100.0f64) {
        let env = Environment::urban();
        prop_assert!(los_probability(r, h + dh, 25.0, &env) >= los_probability(r, h, 25.0, &env));
    }

    #[test]
    fn fading_cdf_is_a_distribution(omega in 0.0..20.0f64, d in 0.0..5.0f64, m in 1u32..6) {
        let f = fading_cdf(omega, m);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(fading_cdf(omega + d, m) >= f);
        prop_assert!((f - gamma_cdf_oracle(omega, m)).abs() < 1e-12);
    }
}

#[test]
fn fading_cdf_limits() {
    for m in 1..6 {
        assert_eq!(fading_cdf(0.0, m), 0.0);
        assert!(fading_cdf(1e3, m) > 1.0 - 1e-12);
    }
}

#[test]
fn sampled_fading_moments() {
    let n = 1_000_000;
    for m in [1u32, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + m as u64);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_fading(m, &mut rng);
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / n as f64;
        let second = s2 / n as f64;
        assert_relative_eq!(mean, 1.0, max_relative = 1e-2);
        assert_relative_eq!(second, (m as f64 + 1.0) / m as f64, max_relative = 1e-2);
    }
}

/// `Σ_v ∫ f_v(r) 2 r w(r) dr` over the model domain.
fn pdf_mass(cfg: &ScenarioConfig) -> f64 {
    let model = Model::new(cfg, Mode::Full).unwrap();
    let (lo, hi) = model.domain();
    let env = &cfg.env;
    let mut points = vec![lo];
    let mut k = 0;
    while env.breakpoint(k) < hi.min(20_000.0) {
        if env.breakpoint(k) > lo {
            points.push(env.breakpoint(k));
        }
        k += 1;
    }
    points.extend(
        model
            .footprint()
            .angular_breakpoints()
            .into_iter()
            .filter(|&r| r > lo && r < hi),
    );
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let f = |r: f64| {
        let dens: f64 = LinkState::BOTH
            .iter()
            .map(|&v| model.serving_density(v, r).unwrap())
            .sum();
        2.0 * r * model.weight(r) * dens
    };
    integrate(f, &points, &Tolerance::new(1e-10, 1e-9))
        .unwrap()
        .0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn serving_distance_pdf_normalizes_on_tilted_footprints(
        lambda in 1.0..50.0f64,
        bw in 30.0..90.0f64,
        tilt in 0.0..40.0f64,
        h_u in 50.0..200.0f64,
    ) {
        let mut cfg = urban(h_u);
        cfg.set_lambda_per_km2(lambda);
        cfg.antenna = AntennaConfig::directional(bw, tilt).unwrap();
        let area = cfg.footprint().unwrap().area();
        let expected = 1.0 - (-cfg.lambda * area).exp();
        let mass = pdf_mass(&cfg);
        prop_assert!((mass - expected).abs() < 1e-4, "mass {} vs {}", mass, expected);
    }

    #[test]
    fn serving_distance_pdf_normalizes_for_omni(lambda in 1.0..50.0f64, h_u in 1.5..200.0f64) {
        let mut cfg = urban(h_u);
        cfg.set_lambda_per_km2(lambda);
        let r = aerial_link::analysis::truncation_radius(&cfg, &cfg.channel());
        let expected = 1.0 - (-cfg.lambda * PI * r * r).exp();
        let mass = pdf_mass(&cfg);
        prop_assert!((mass - expected).abs() < 1e-4, "mass {} vs {}", mass, expected);
    }

    #[test]
    fn plateau_sum_moments_match_quadrature(r_s in 20.0..2000.0f64, h_u in 30.0..200.0f64) {
        let cfg = urban(h_u);
        let numeric = interference_moments(r_s, &cfg).unwrap();
        let closed = interference_moments_closed_form(r_s, &cfg).unwrap();
        prop_assert!((numeric.mean / closed.mean - 1.0).abs() < 1e-8);
        prop_assert!((numeric.variance / closed.variance - 1.0).abs() < 1e-8);
    }

    #[test]
    fn laplace_derivatives_match_finite_differences(
        r_s in 30.0..800.0f64,
        u in -1.0..1.0f64,
        los in proptest::bool::ANY,
        h_u in prop_oneof![Just(1.5), Just(100.0)],
    ) {
        let cfg = urban(h_u);
        let v = if los { LinkState::Los } else { LinkState::Nlos };
        let ch = cfg.channel();
        let y = 10f64.powf(u) / (ch.tx_gain() * path_loss(r_s, cfg.delta_h(), v, &ch));
        let d = laplace_derivatives(v, r_s, y, 3, &cfg).unwrap();
        // Keep the stencil where ln L changes by a few percent at most.
        let h = 0.02 * y / d[0].ln().abs().max(1.0);
        let l = |k: f64| laplace_transform(v, r_s, y + k * h, &cfg).unwrap();
        let (m2, m1, p1, p2) = (l(-2.0), l(-1.0), l(1.0), l(2.0));
        let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let d2 = (-m2 + 16.0 * m1 - 30.0 * d[0] + 16.0 * p1 - p2) / (12.0 * h * h);
        prop_assert!(d[0] > 0.0 && d[1] < 0.0 && d[2] > 0.0);
        prop_assert!((d[1] / d1 - 1.0).abs() < 1e-4, "first {} vs {}", d[1], d1);
        prop_assert!((d[2] / d2 - 1.0).abs() < 1e-4, "second {} vs {}", d[2], d2);
    }
}

#[test]
fn gauss_chebyshev_rate_of_harmonic_ccdf() {
    let harmonic = |t: &[f64]| Ok(t.iter().map(|t| 1.0 / (1.0 + t)).collect());
    assert_relative_eq!(
        gcq_rate_bits(harmonic, 64, 8.0).unwrap(),
        1.0 / LN_2,
        max_relative = 1e-4
    );
    assert_relative_eq!(
        gcq_rate(harmonic, 256).unwrap(),
        1.0 / LN_2,
        max_relative = 1e-4
    );
}

#[test]
fn omni_sentinel_has_full_weight_everywhere() {
    let fp = compute_footprint(75.0, &AntennaConfig::omnidirectional()).unwrap();
    for r in [0.0, 1.0, 100.0, 1e4, 1e7] {
        assert_eq!(fp.angular_extent(r).unwrap().weight(), PI);
        assert_eq!(fp.weight(r), PI);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// An untilted cone is a disk; inside it the footprint pipeline must
    /// agree with the omnidirectional one.
    #[test]
    fn untilted_disk_matches_omni_inside_its_radius(r_s in 5.0..400.0f64, lambda in 1.0..30.0f64) {
        let mut omni = urban(100.0);
        omni.set_lambda_per_km2(lambda);
        let mut disk = omni.clone();
        disk.antenna = AntennaConfig::directional(170.0, 0.0).unwrap();
        let radius = disk.footprint().unwrap().inscribed_radius();
        prop_assert!(radius > 800.0);
        for xi in LinkState::BOTH {
            let a = void_integral_i1(xi, LinkState::Los, r_s, &omni).unwrap();
            let b = void_integral_i1(xi, LinkState::Los, r_s, &disk).unwrap();
            prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-300));
        }
        let a = serving_distance_pdf(LinkState::Los, r_s, &omni).unwrap();
        let b = serving_distance_pdf(LinkState::Los, r_s, &disk).unwrap();
        prop_assert!((a / b - 1.0).abs() < 1e-6);
    }
}

fn db_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf((lo + (hi - lo) * i as f64 / (n - 1) as f64) / 10.0))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn exact_coverage_falls_with_threshold(
        h_u in 1.5..200.0f64,
        lambda in 1.0..30.0f64,
        directional in proptest::bool::ANY,
    ) {
        let mut cfg = urban(h_u);
        cfg.set_lambda_per_km2(lambda);
        if directional && h_u > 30.0 {
            cfg.antenna = AntennaConfig::directional(60.0, 20.0).unwrap();
        }
        let t = db_grid(-15.0, 30.0, 16);
        let curve = coverage_curve(&cfg, &t, CoverageMethod::Exact).unwrap();
        for w in curve.windows(2) {
            prop_assert!(w[1].p_cov <= w[0].p_cov + 1e-9);
        }
        prop_assert!(curve.iter().all(|c| (0.0..=1.0 + 1e-9).contains(&c.p_cov)));
    }

    #[test]
    fn sampled_coverage_falls_with_threshold(seed in 0u64..1000, h_u in 1.5..200.0f64) {
        let cfg = urban(h_u);
        let t = db_grid(-15.0, 30.0, 16);
        let est = estimate_ccdf(&cfg, &t, 2000, seed).unwrap();
        for w in est.windows(2) {
            prop_assert!(w[1].value <= w[0].value);
        }
    }
}

#[test]
fn fixed_seed_reruns_are_identical() {
    let mut cfg = urban(100.0);
    cfg.antenna = AntennaConfig::directional(60.0, 20.0).unwrap();
    let t = db_grid(-10.0, 20.0, 13);
    let run = || serde_json::to_string(&estimate_ccdf(&cfg, &t, 5000, 42).unwrap()).unwrap();
    assert_eq!(run(), run());
    let other = serde_json::to_string(&estimate_ccdf(&cfg, &t, 5000, 43).unwrap()).unwrap();
    assert_ne!(run(), other);
}
