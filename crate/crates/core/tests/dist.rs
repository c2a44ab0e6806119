use proptest::prelude::*;
use statcp::dist::{poisson_below, std_normal_cdf, DistSpec};

// Oracle: Lanczos log-gamma, Simpson integration of the density, bisection.

fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn t_density(df: f64, x: f64) -> f64 {
    let c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

fn chi2_density(k: f64, x: f64) -> f64 {
    let h = k / 2.0;
    if x <= 0.0 {
        return if h == 1.0 { 0.5 } else { 0.0 };
    }
    ((h - 1.0) * x.ln() - x / 2.0 - h * 2f64.ln() - ln_gamma(h)).exp()
}

fn f_density(d1: f64, d2: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_beta = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
    let l = 0.5 * (d1 * (d1 * x).ln() + d2 * d2.ln() - (d1 + d2) * (d1 * x + d2).ln()) - x.ln() - ln_beta;
    l.exp()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn invert(cdf: &dyn Fn(f64) -> f64, p: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn oracle_t_quantile(df: f64, p: f64) -> f64 {
    let cdf = |x: f64| 0.5 + simpson(&|u| t_density(df, u), 0.0, x, 4000);
    invert(&cdf, p, -50.0, 50.0)
}

fn oracle_chi2_quantile(k: f64, p: f64) -> f64 {
    let cdf = |x: f64| simpson(&|u| chi2_density(k, u), 0.0, x, 4000);
    invert(&cdf, p, 0.0, 200.0)
}

fn oracle_f_quantile(d1: f64, d2: f64, p: f64) -> f64 {
    // substitute u = v² to tame the density near zero
    let cdf = |x: f64| simpson(&|v| 2.0 * v * f_density(d1, d2, v * v), 0.0, x.sqrt(), 6000);
    invert(&cdf, p, 0.0, 500.0)
}

#[test]
fn student_t_quantile_matches_oracle() {
    let q = DistSpec::student_t(19.0).unwrap().quantile(0.975).unwrap();
    assert!((q - oracle_t_quantile(19.0, 0.975)).abs() < 1e-4);
    assert!((q - 2.09302).abs() < 1e-4, "{q}");
    let q15 = DistSpec::student_t(15.0).unwrap().quantile(0.975).unwrap();
    assert!((q15 - oracle_t_quantile(15.0, 0.975)).abs() < 1e-4);
    assert!((q15 - 2.13145).abs() < 1e-4, "{q15}");
}

#[test]
fn chi_squared_quantiles_match_oracle() {
    let q5 = DistSpec::chi_squared(5.0).unwrap().quantile(0.95).unwrap();
    assert!((q5 - oracle_chi2_quantile(5.0, 0.95)).abs() < 1e-4);
    assert!((q5 - 11.0705).abs() < 1e-4, "{q5}");
    let q2 = DistSpec::chi_squared(2.0).unwrap().quantile(0.90).unwrap();
    assert!((q2 - (-2.0 * 0.1f64.ln())).abs() < 1e-4);
    assert!((q2 - oracle_chi2_quantile(2.0, 0.90)).abs() < 1e-4);
}

#[test]
fn fisher_f_quantile_matches_oracle() {
    let q = DistSpec::fisher_f(2.0, 15.0).unwrap().quantile(0.95).unwrap();
    assert!((q - oracle_f_quantile(2.0, 15.0, 0.95)).abs() < 1e-3);
    assert!((q - 3.6823).abs() < 1e-3, "{q}");
}

#[test]
fn hotelling_quantile_is_scaled_f() {
    let q = DistSpec::hotelling_t2(3, 5).unwrap().quantile(0.95).unwrap();
    let f = oracle_f_quantile(3.0, 3.0, 0.95);
    assert!((q - 5.0 * f).abs() < 1e-2, "{q} vs {}", 5.0 * f);
    assert!((q - 46.383).abs() < 1e-2, "{q}");
}

#[test]
fn quantile_inverts_cdf_to_high_precision() {
    for d in [
        DistSpec::student_t(7.0).unwrap(),
        DistSpec::chi_squared(3.0).unwrap(),
        DistSpec::fisher_f(4.0, 9.0).unwrap(),
        DistSpec::normal(1.0, 2.0).unwrap(),
    ] {
        for p in [0.01, 0.3, 0.9, 0.999] {
            let x = d.quantile(p).unwrap();
            assert!((d.cdf(x) - p).abs() < 1e-9, "{d:?} {p}");
        }
    }
}

#[test]
fn poisson_left_limit_excludes_the_bound() {
    let rate: f64 = 5.0;
    let mass = |k: u32| (-rate).exp() * rate.powi(k as i32) / (1..=k).map(f64::from).product::<f64>();
    assert!((poisson_below(3.0, rate) - (mass(0) + mass(1) + mass(2))).abs() < 1e-12);
    assert!((poisson_below(2.5, rate) - (mass(0) + mass(1) + mass(2))).abs() < 1e-12);
    assert_eq!(poisson_below(0.0, rate), 0.0);
    assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-15);
}

fn family() -> impl Strategy<Value = DistSpec> {
    prop_oneof![
        (1.0..60.0f64).prop_map(|v| DistSpec::student_t(v).unwrap()),
        (1.0..60.0f64).prop_map(|k| DistSpec::chi_squared(k).unwrap()),
        (1.0..30.0f64, 1.0..60.0f64).prop_map(|(a, b)| DistSpec::fisher_f(a, b).unwrap()),
        (1u32..5, 0u32..30).prop_map(|(p, extra)| DistSpec::hotelling_t2(p, p + extra).unwrap()),
        (-5.0..5.0f64, 0.1..5.0f64).prop_map(|(m, s)| DistSpec::normal(m, s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn round_trip_in_the_central_mass(d in family(), p in 0.005..0.995f64) {
        let x = d.quantile(p).unwrap();
        let back = d.quantile(d.cdf(x)).unwrap();
        prop_assert!((back - x).abs() <= 1e-6, "{:?}: {} -> {}", d, x, back);
    }

    #[test]
    fn cdf_and_quantile_are_increasing(d in family(), p in 0.01..0.98f64, dp in 0.001..0.01f64) {
        let a = d.quantile(p).unwrap();
        let b = d.quantile(p + dp).unwrap();
        prop_assert!(a < b);
        prop_assert!(d.cdf(a) < d.cdf(b));
    }

    #[test]
    fn student_t_is_symmetric(df in 1.0..100.0f64, p in 0.01..0.99f64) {
        let d = DistSpec::student_t(df).unwrap();
        let a = d.quantile(p).unwrap();
        let b = d.quantile(1.0 - p).unwrap();
        prop_assert!((a + b).abs() < 1e-7 * a.abs().max(1.0));
    }
}
