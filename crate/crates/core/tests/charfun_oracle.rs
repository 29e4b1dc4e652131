mod common;

use num_complex::Complex64;
use toa_outage::charfun::{
    expectation_over_ccdf, gil_pelaez_ccdf, phi_rii, phi_t_aux, phi_xn, tabulate_ccdf, AggregateRiiCf,
    CharacteristicFunction,
};
use toa_outage::{AnnulusModel, QuadratureSpec};

fn model(n: usize) -> AnnulusModel {
    AnnulusModel::new(1.0, 10.0, n, 1.0).unwrap()
}

#[test]
fn phi_rii_matches_direct_quadrature() {
    let m = model(3);
    let mut worst: f64 = 0.0;
    for &t in &common::log_space(1e-2, 1e3, 200) {
        for s in [t, -t] {
            let d = (phi_rii(&m, s) - common::phi_rii_direct(1.0, 10.0, s)).norm();
            worst = worst.max(d);
        }
    }
    assert!(worst < 1e-9, "{worst}");
    let other = AnnulusModel::new(2.0, 3.0, 3, 1.0).unwrap();
    for t in [0.5, 7.0, 60.0] {
        let d = (phi_rii(&other, t) - common::phi_rii_direct(2.0, 3.0, t)).norm();
        assert!(d < 1e-9, "{t}: {d}");
    }
}

#[test]
fn values_at_the_origin() {
    let m = model(4);
    assert_eq!(phi_rii(&m, 0.0), Complex64::new(1.0, 0.0));
    assert_eq!(phi_xn(&m, 0.0), Complex64::new(1.0, 0.0));
    assert_eq!(phi_t_aux(&m, 0.3, 0.0).unwrap(), Complex64::new(1.0, 0.0));
    for t in [0.1, 2.0, 40.0] {
        assert!((phi_t_aux(&m, 0.0, t).unwrap() - phi_rii(&m, t)).norm() < 1e-15);
    }
    assert!(phi_t_aux(&m, 1.5, 1.0).is_err());
}

#[test]
fn conjugate_symmetry_and_modulus() {
    let m = model(5);
    for &t in &common::log_space(1e-3, 1e6, 300) {
        let p = phi_rii(&m, t);
        assert_eq!(phi_rii(&m, -t), p.conj());
        assert!(p.norm() <= 1.0 + 1e-12);
        let x = phi_xn(&m, t);
        assert!(x.norm() <= p.norm().powi(5) * (1.0 + 1e-12) + 1e-300);
    }
}

#[test]
fn aggregate_decays_like_power_n() {
    for n in 3..=8 {
        let m = model(n);
        let mut worst: f64 = 0.0;
        for &t in &common::log_space(1e2, 1e5, 100) {
            worst = worst.max(phi_xn(&m, t).norm() * t.powi(n as i32));
        }
        // |φ_A(t)| <= 2 d_max⁴ / ((d_max² - d_min²) t)
        let c: f64 = 2.0 * 1e4 / 99.0;
        assert!(worst <= c.powi(n as i32) * (1.0 + 1e-9), "N = {n}: {worst}");
    }
}

#[test]
fn aggregate_and_auxiliary_match_monte_carlo() {
    let samples = 1_000_000;
    let m = model(3);
    let xs = common::sample_xn(3, 1.0, 10.0, samples, 11);
    for t in [0.5, 2.0, 5.0, 12.0, 30.0] {
        let d = (phi_xn(&m, t) - common::empirical_cf(&xs, t)).norm();
        assert!(d < 3e-3, "t = {t}: {d}");
    }
    // T = (1-u) A_1 - u (A_2 + ... + A_N) at u = 1/N
    let n = 4;
    let u = 1.0 / n as f64;
    let ts: Vec<f64> = {
        let a = common::sample_xn(1, 1.0, 10.0, samples * n, 12);
        a.chunks_exact(n).map(|c| (1.0 - u) * c[0] - u * c[1..].iter().sum::<f64>()).collect()
    };
    let m = model(n);
    for t in [0.7, 3.0, 9.0, 25.0] {
        let d = (phi_t_aux(&m, u, t).unwrap() - common::empirical_cf(&ts, t)).norm();
        assert!(d < 3e-3, "t = {t}: {d}");
    }
}

#[test]
fn gil_pelaez_outside_support() {
    let q = QuadratureSpec::default();
    let m = model(5);
    let cf = AggregateRiiCf::new(&m);
    let (lo, hi) = cf.support();
    assert!((lo - 5.0 / 100.0).abs() < 1e-15 && (hi - 5.0).abs() < 1e-15);
    assert!((gil_pelaez_ccdf(&cf, 0.9 * lo, &q).unwrap() - 1.0).abs() < 1e-4);
    assert!(gil_pelaez_ccdf(&cf, 1.1 * hi, &q).unwrap().abs() < 1e-4);
}

#[test]
fn gil_pelaez_at_monte_carlo_median() {
    let q = QuadratureSpec::default();
    let m = model(5);
    let xs = common::sorted(common::sample_xn(5, 1.0, 10.0, 1_000_000, 21));
    let median = 0.5 * (xs[xs.len() / 2 - 1] + xs[xs.len() / 2]);
    let p = gil_pelaez_ccdf(&AggregateRiiCf::new(&m), median, &q).unwrap();
    assert!((p - 0.5).abs() < 5e-3, "{p}");
}

#[test]
fn gil_pelaez_matches_empirical_ccdf() {
    let q = QuadratureSpec::default();
    for n in [3, 6] {
        let m = model(n);
        let cf = AggregateRiiCf::new(&m);
        let xs = common::sorted(common::sample_xn(n, 1.0, 10.0, 1_000_000, 30 + n as u64));
        let (lo, hi) = (xs[0], xs[xs.len() - 1]);
        let mut worst: f64 = 0.0;
        let mut prev = 1.0;
        for k in 0..200 {
            let x = lo + (hi - lo) * (k as f64 + 0.5) / 200.0;
            let p = gil_pelaez_ccdf(&cf, x, &q).unwrap();
            assert!(p <= prev + 1e-6, "ripple at {x}");
            prev = p;
            worst = worst.max((p - common::empirical_ccdf(&xs, x)).abs());
        }
        assert!(worst < 5e-3, "N = {n}: {worst}");
    }
}

#[test]
fn tabulated_ccdf_agrees_with_pointwise_inversion() {
    let q = QuadratureSpec::default();
    let m = model(4);
    let cf = AggregateRiiCf::new(&m);
    let (lo, hi) = cf.support();
    let table = tabulate_ccdf(&cf, lo, hi, 512, &q).unwrap();
    for k in (3..512).step_by(37) {
        let x = table.abscissae()[k];
        let direct = gil_pelaez_ccdf(&cf, x, &q).unwrap();
        assert!((table.values()[k] - direct).abs() < 1e-6, "{x}");
    }
    assert!(table.values().windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn expectations_over_the_aggregate_ccdf() {
    let q = QuadratureSpec::default();
    let m = model(5);
    let cf = AggregateRiiCf::new(&m);
    let (lo, hi) = cf.support();
    let table = tabulate_ccdf(&cf, lo, hi, 4096, &q).unwrap();
    let one = expectation_over_ccdf(|_| 1.0, &table, 1e-6).unwrap();
    assert!((one - 1.0).abs() < 1e-6);
    let mean = expectation_over_ccdf(|x| x, &table, 1e-4).unwrap();
    let exact = 5.0 * 100f64.ln() / 99.0;
    assert!((mean - exact).abs() < 1e-4, "{mean} vs {exact}");
    let c = 0.3;
    let ind = expectation_over_ccdf(|x| if x > c { 1.0 } else { 0.0 }, &table, 1.0).unwrap();
    let grid_step = (hi - lo) / 4095.0;
    let lo_val = table.at(c + grid_step);
    let hi_val = table.at(c - grid_step);
    assert!(ind >= lo_val - 1e-9 && ind <= hi_val + 1e-9);
}
