//! Independent oracles: numerical integration of densities, finite
//! differences, and closed forms computed by hand.

#![allow(clippy::too_many_arguments)]

use std::f64::consts::PI;

use deceit_stats::logistic::{log_likelihood, score};
use deceit_stats::special::{chi2_sf, normal_sf, student_t_sf};
use deceit_stats::*;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, 1e-14, 50)
}

/// Γ(n/2) for positive integer n by recursion from Γ(1) and Γ(1/2).
fn gamma_half(n: u32) -> f64 {
    let (mut g, mut v) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while v < n as f64 / 2.0 {
        g *= v;
        v += 1.0;
    }
    g
}

fn chi2_oracle(x: f64, df: u32) -> f64 {
    let k = df as f64 / 2.0;
    let c = 1.0 / (2f64.powf(k) * gamma_half(df));
    // t = u^2 removes the singularity at 0 for df = 1.
    let f = |u: f64| {
        let t = u * u;
        let dens = if t == 0.0 {
            if df == 1 { c } else { 0.0 }
        } else {
            c * t.powf(k - 1.0) * (-t / 2.0).exp()
        };
        if df == 1 && t == 0.0 { 2.0 * c } else { dens * 2.0 * u }
    };
    // Integrate the tail directly when it is small, otherwise 1 - cdf.
    if x > df as f64 + 10.0 {
        let upper = (x + 200.0).sqrt();
        integrate(&f, x.sqrt(), upper)
    } else {
        1.0 - integrate(&f, 0.0, x.sqrt())
    }
}

fn normal_oracle(z: f64) -> f64 {
    let phi = |t: f64| (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
    if z > 3.0 {
        integrate(&phi, z, z + 40.0)
    } else {
        0.5 - integrate(&phi, 0.0, z)
    }
}

fn t_oracle(t: f64, df: u32) -> f64 {
    let v = df as f64;
    let c = gamma_half(df + 1) / ((v * PI).sqrt() * gamma_half(df));
    let dens = |x: f64| c * (1.0 + x * x / v).powf(-(v + 1.0) / 2.0);
    0.5 - integrate(&dens, 0.0, t)
}

#[test]
fn chi_squared_tail_matches_integration() {
    for df in [1u32, 2, 3, 4, 5, 7, 10] {
        for x in [0.05, 0.5, 1.0, 2.5, 3.84, 6.667, 10.0, 18.0, 30.0] {
            let got = chi2_sf(x, df as f64);
            let want = chi2_oracle(x, df);
            assert!((got - want).abs() < 1e-8, "df={df} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn normal_tail_matches_integration() {
    for z in [-3.0, -1.0, 0.0, 0.3, 1.0, 1.96, 2.8284, 4.0, 6.0, 9.8] {
        let got = normal_sf(z);
        let want = if z < 0.0 { 1.0 - normal_oracle(-z) } else { normal_oracle(z) };
        assert!((got - want).abs() < 1e-8, "z={z}: {got} vs {want}");
    }
}

#[test]
fn student_t_tail_matches_integration() {
    for df in [1u32, 2, 3, 5, 8, 20] {
        for t in [0.0, 0.4, 1.0, 2.0, 3.5, 6.0] {
            let got = student_t_sf(t, df as f64);
            let want = t_oracle(t, df);
            assert!((got - want).abs() < 1e-8, "df={df} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn chi_squared_examples_by_hand() {
    // Every expected count is 15; each cell contributes 25/15.
    let r = chi_squared(&[vec![10.0, 20.0], vec![20.0, 10.0]]).unwrap();
    assert!((r.statistic - 100.0 / 15.0).abs() < 1e-12);
    assert_eq!(r.df, 1);
    assert!((r.p_value - chi2_oracle(100.0 / 15.0, 1)).abs() < 1e-8);
    assert!((r.p_value - 0.00982).abs() < 5e-5);

    let r = chi_squared(&[vec![5.0, 0.0], vec![0.0, 5.0]]).unwrap();
    assert!((r.statistic - 10.0).abs() < 1e-12);

    let r = chi_squared(&[vec![3.0, 7.0, 2.0], vec![3.0, 7.0, 2.0]]).unwrap();
    assert_eq!(r.statistic, 0.0);
    assert!((r.p_value - 1.0).abs() < 1e-12);
}

#[test]
fn z_and_odds_ratio_examples_by_hand() {
    let r = two_prop_z(60, 100, 40, 100).unwrap();
    assert!((r.z - 0.2 / 0.005f64.sqrt()).abs() < 1e-12);
    assert!((r.p_value - 2.0 * normal_oracle(r.z)).abs() < 1e-8);
    let r = two_prop_z(50, 100, 50, 100).unwrap();
    assert_eq!(r.z, 0.0);
    assert!((r.p_value - 1.0).abs() < 1e-12);
    assert!(two_prop_z(0, 10, 0, 10).is_err());

    let r = odds_ratio(10, 20, 5, 40).unwrap();
    assert!((r.odds_ratio - 4.0).abs() < 1e-12);
    let se = 0.375f64.sqrt();
    assert!((r.ci_low - (4f64.ln() - 1.96 * se).exp()).abs() < 1e-12);
    assert!((r.ci_high - (4f64.ln() + 1.96 * se).exp()).abs() < 1e-12);
    assert!((r.ci_low - 1.204).abs() < 1e-3);
    assert!((r.ci_high - 13.29).abs() < 1e-2);
}

#[test]
fn spearman_matches_rank_difference_formula() {
    let x = [4.0, 9.0, 1.0, 7.0, 3.0, 8.0, 2.0];
    let y = [2.0, 8.0, 3.0, 9.0, 1.0, 5.0, 4.0];
    // Without ties ρ = 1 - 6 Σd² / (n(n² - 1)).
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| v.iter().filter(|b| *b < a).count() as f64 + 1.0)
            .collect()
    };
    let (rx, ry) = (rank(&x), rank(&y));
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    let n = x.len() as f64;
    let want = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    let got = spearman(&x, &y).unwrap();
    assert!((got.coefficient - want).abs() < 1e-12);
    let t = want * ((n - 2.0) / (1.0 - want * want)).sqrt();
    assert!((got.p_value - 2.0 * t_oracle(t, 5)).abs() < 1e-8);
}

/// Deterministic pseudo-random stream for synthetic designs.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn synthetic(n: usize) -> (Design, Vec<bool>) {
    let mut rng = Lcg(7);
    let names = [
        "num_crew",
        "num_impostors",
        "num_discussions",
        "num_ejects",
        "words_per_discussion",
        "words_per_utterance",
    ];
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut y = Vec::new();
    for _ in 0..n {
        let crew = 3.0 + (rng.next() * 4.0).floor();
        let imp = 1.0 + (rng.next() * 3.0).floor();
        let disc = (rng.next() * 6.0).floor();
        let ej = (rng.next() * (disc + 1.0)).floor();
        let wpd = 40.0 + 200.0 * rng.next();
        let wpu = 5.0 + 30.0 * rng.next();
        let eta = 0.3 * crew - 1.2 * imp + 0.1 * disc + 0.6 * ej - 0.002 * wpd + 0.01 * wpu;
        y.push(rng.next() < 1.0 / (1.0 + (-eta).exp()));
        for (c, v) in cols.iter_mut().zip([crew, imp, disc, ej, wpd, wpu]) {
            c.push(v);
        }
    }
    let columns: Vec<(&str, Vec<f64>)> = names.iter().copied().zip(cols).collect();
    (Design::new(&columns).unwrap(), y)
}

#[test]
fn gradient_vanishes_at_optimum_by_finite_differences() {
    let (design, y) = synthetic(600);
    let fit = logistic_fit(&design, &y).unwrap();
    assert!(fit.converged);
    let beta = fit.beta();
    let x = design.matrix();
    let ll = |b: &[f64]| log_likelihood(&design, &y, b);
    let mut norm2 = 0.0;
    for j in 0..beta.len() {
        // Five-point stencil, step scaled to the column's magnitude.
        let rms = (x.column(j).norm_squared() / x.nrows() as f64).sqrt();
        let h = 1e-3 / rms;
        let at = |k: f64| {
            let mut b = beta.clone();
            b[j] += k * h;
            ll(&b)
        };
        let g = (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * h);
        norm2 += g * g;
    }
    assert!(norm2.sqrt() < 1e-6, "finite-difference gradient norm {}", norm2.sqrt());
    assert!(score(&design, &y, &beta).iter().all(|s| s.abs() < 1e-8));
}

#[test]
fn full_model_reports_predictors_in_order() {
    let (design, y) = synthetic(400);
    let fit = logistic_fit(&design, &y).unwrap();
    let names: Vec<&str> = fit.coefficients.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "intercept",
            "num_crew",
            "num_impostors",
            "num_discussions",
            "num_ejects",
            "words_per_discussion",
            "words_per_utterance"
        ]
    );
    for c in &fit.coefficients {
        assert!((c.ci_low - (c.estimate - 1.96 * c.se)).abs() < 1e-12);
    }
    assert!(fit.coefficient("num_impostors").unwrap().estimate < 0.0);
}
