//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. `OPUC_LONG_RUN=1` adds the N = 8000 rate reproduction.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use opuc_core::entropy::{entropy_at, fit_both, geometric_gaps};
use opuc_core::experiments::{
    figure2_from_records, poisson_example_check, rate_experiment, tail_start, theorem1_sweep, window_exponent,
    PolarGrid, RateConfig, UvGrid,
};
use opuc_core::measures::DEFAULT_MOMENT_TOL;
use opuc_core::opuc::szego_polynomials;
use opuc_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEBESGUE_TOL: f64 = 1e-12;
const LEBESGUE_BUDGET: Duration = Duration::from_secs(1);
const BERNSTEIN_SZEGO_TOL: f64 = 1e-8;
const BERNSTEIN_SZEGO_COEFF_TOL: f64 = 1e-10;
const ENTROPY_ORACLE_TOL: f64 = 1e-8;
const ENTROPY_ORACLE_BUDGET: Duration = Duration::from_secs(30);
const EXPONENT_TOL: f64 = 0.05;
const EXPONENT_GAP_RANGE: (f64, f64) = (1e-4, 1e-1);
const EXPONENT_POINTS: usize = 16;
const EXPONENT_BUDGET: Duration = Duration::from_secs(300);
const POISSON_NS: [usize; 4] = [100, 200, 400, 800];
const POISSON_BUDGET: Duration = Duration::from_secs(300);
const RATE_N: usize = 2000;
const RATE_STEP: usize = 20;
const RATE_TOL: f64 = 0.05;
const RATE_BUDGET: Duration = Duration::from_secs(900);
const SOLVER_TOL: f64 = 1e-8;
const MODIFIED_STEP_TOL: f64 = 1e-10;
const THEOREM1_NS: [usize; 5] = [50, 100, 200, 400, 800];
/// Largest accepted max/min spread of the empirical ratio over the sweep.
const THEOREM1_SPREAD: f64 = 10.0;
const LONG_N: usize = 8000;
const LONG_ALPHA: (f64, f64) = (0.3936, 0.0005);
const LONG_CONSTANT: (f64, f64) = (0.0379, 0.0005);

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(o: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    if elapsed <= budget {
        o
    } else {
        outcome(false, format!("{}; over budget {:?}", o.detail, budget))
    }
}

fn pipeline(w: &CircleWeight, n: usize) -> Arc<VerblunskyCoefficients> {
    let m = compute_moments(w, n + 1, DEFAULT_MOMENT_TOL).unwrap();
    Arc::new(levinson(&m).unwrap())
}

fn lebesgue_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let one = c(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for n in [5usize, 50, 500] {
        let ctx = KernelContext::new(pipeline(&CircleWeight::lebesgue(), n), n).unwrap();
        for _ in 0..100 {
            let mut near = || one + Complex64::from_polar(rng.gen::<f64>().sqrt() / n as f64, rng.gen_range(-3.2..3.2));
            let (z1, z2) = (near(), near());
            worst = worst.max(ctx.deviation(one, z1, z2).unwrap().deviation);
        }
    }
    let o = outcome(worst <= LEBESGUE_TOL, format!("max deviation {worst:.3e} (tol {LEBESGUE_TOL:e})"));
    within_budget(o, start.elapsed(), LEBESGUE_BUDGET)
}

fn bernstein_szego() -> Outcome {
    let lambda = c(0.5, 0.0);
    let rho2 = 1.0 - lambda.norm_sqr();
    let v = pipeline(&CircleWeight::poisson(lambda).unwrap(), 512);
    let a0_err = (v.coefficients()[0] - lambda).norm();
    let tail = v.coefficients()[1..].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut poly_err: f64 = 0.0;
    let mut diag_err: f64 = 0.0;
    let mut literal_gap: f64 = 0.0;
    let ns = [2usize, 16, 128, 512];
    for r in [0.3, 0.9, 0.999, 1.001] {
        for j in 0..8 {
            let z = Complex64::from_polar(r, 0.3 + j as f64 * 0.785);
            let mut walker = SzegoWalker::new(&v, z);
            for n in 1..=512 {
                walker.step(&v);
                if ns.contains(&n) || n == 1 {
                    let phi = (z.powi(n as i32) - lambda.conj() * z.powi(n as i32 - 1)) / rho2.sqrt();
                    let phi_star = (1.0 - lambda * z) / rho2.sqrt();
                    let scale = phi.norm().max(1.0);
                    poly_err = poly_err.max((walker.phi() - phi).norm() / scale);
                    poly_err = poly_err.max((walker.phi_star() - phi_star).norm());
                }
            }
            let r2 = z.norm_sqr();
            for &n in &ns {
                let got = KernelContext::new(v.clone(), n).unwrap().cd_kernel(z, z).unwrap().re;
                // φ_0 = 1; the degree >= 1 closed form covers k = 1 .. n-1
                let expect = 1.0 + (z - lambda.conj()).norm_sqr() / rho2 * (1.0 - r2.powi(n as i32 - 1)) / (1.0 - r2);
                diag_err = diag_err.max((got - expect).abs() / expect);
                let literal = (z - lambda.conj()).norm_sqr() / (r2 * rho2) * (1.0 - r2.powi(n as i32)) / (1.0 - r2);
                literal_gap = literal_gap.max((got - literal).abs() / got);
            }
        }
    }
    let pass = a0_err <= BERNSTEIN_SZEGO_COEFF_TOL
        && tail < BERNSTEIN_SZEGO_COEFF_TOL
        && poly_err <= BERNSTEIN_SZEGO_TOL
        && diag_err <= BERNSTEIN_SZEGO_TOL;
    outcome(
        pass,
        format!(
            "|a0 - 0.5| {a0_err:.1e}, max|a_k| (k>=1) {tail:.1e}, phi/phi* err {poly_err:.1e}, \
             diagonal err {diag_err:.1e} (closed form with phi_0 = 1; the form summing the \
             degree>=1 expression from k = 0 differs by up to {literal_gap:.2e})"
        ),
    )
}

fn entropy_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for lambda in [0.3, 0.5, 0.9] {
        let w = CircleWeight::poisson(c(lambda, 0.0)).unwrap();
        for r in [0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999, 0.9999] {
            for j in 0..10 {
                let z = Complex64::from_polar(r, j as f64 * std::f64::consts::PI / 5.0);
                let expect = ((1.0 - (lambda * z).norm_sqr()) / (1.0 - lambda * lambda)).ln();
                worst = worst.max((entropy_at(&w, z).unwrap() - expect).abs());
            }
        }
    }
    let o = outcome(worst <= ENTROPY_ORACLE_TOL, format!("max error {worst:.2e} over 3 x 100 points"));
    within_budget(o, start.elapsed(), ENTROPY_ORACLE_BUDGET)
}

fn entropy_exponents() -> Outcome {
    let start = Instant::now();
    let gaps = geometric_gaps(EXPONENT_GAP_RANGE.0, EXPONENT_GAP_RANGE.1, EXPONENT_POINTS).unwrap();
    let profile = |s: f64| {
        let mut p = entropy_profile(&CircleWeight::holder(s).unwrap(), c(1.0, 0.0), &gaps).unwrap();
        fit_both(&mut p).unwrap();
        p
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, target) in [(0.4, 0.8), (0.2, 0.4), (1.0, 1.0)] {
        let beta = profile(s).plain.unwrap().exponent;
        let ok = (beta - target).abs() <= EXPONENT_TOL;
        pass &= ok;
        parts.push(format!("s={s}: beta {beta:.4} (target {target}±{EXPONENT_TOL}) {}", if ok { "ok" } else { "MISS" }));
    }
    let half = profile(0.5);
    let (plain, logc) = (half.plain.unwrap().max_rel_residual, half.log_corrected.unwrap().max_rel_residual);
    let ok = logc < plain;
    pass &= ok;
    parts.push(format!("s=0.5: residual log-corrected {logc:.3} vs plain {plain:.3} {}", if ok { "ok" } else { "MISS" }));
    within_budget(outcome(pass, parts.join("; ")), start.elapsed(), EXPONENT_BUDGET)
}

fn poisson_scaling() -> Outcome {
    let start = Instant::now();
    let check = poisson_example_check(c(0.5, 0.0), &POISSON_NS, UvGrid::default(), DEFAULT_MOMENT_TOL, &MomentCache::new())
        .unwrap();
    let values: Vec<String> = check.rows.iter().map(|r| format!("{}: {:.4}", r.n, r.n_sup)).collect();
    let o = outcome(
        check.within_band,
        format!("n·sup = [{}], band ratio {:.3} (max 4)", values.join(", "), check.band_ratio.unwrap_or(f64::NAN)),
    );
    within_budget(o, start.elapsed(), POISSON_BUDGET)
}

fn rate_run(s: f64, n_max: usize, cache: &MomentCache) -> Vec<RateRecord> {
    let w = normalize_weight(&CircleWeight::holder(s).unwrap()).unwrap();
    rate_experiment(&w, &RateConfig::new(n_max, RATE_STEP), cache).unwrap()
}

fn rate_reproduction(cache: &MomentCache) -> Outcome {
    let start = Instant::now();
    let records = rate_run(0.4, RATE_N, cache);
    let alpha = window_exponent(&records, tail_start(RATE_N)).unwrap();
    let o = outcome(
        (alpha - 0.4).abs() <= RATE_TOL,
        format!("tail alpha {alpha:.4} (target 0.4±{RATE_TOL}), final alphaCand {:.5}", records.last().unwrap().alpha_cand.unwrap()),
    );
    within_budget(o, start.elapsed(), RATE_BUDGET)
}

fn rate_small_s(cache: &MomentCache) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.1, 0.2] {
        let records = rate_run(s, RATE_N, cache);
        let alpha = window_exponent(&records, tail_start(RATE_N)).unwrap();
        let fig = figure2_from_records(&records, s).unwrap();
        let dominates = fig.f1_dominates_tail == Some(true);
        let ok = (alpha - s).abs() <= RATE_TOL && dominates;
        pass &= ok;
        parts.push(format!("s={s}: slope {:.4}, f1 >= f2 on tail: {dominates}", -alpha));
    }
    within_budget(outcome(pass, parts.join("; ")), start.elapsed(), RATE_BUDGET)
}

fn solver_cross_checks() -> Outcome {
    let weights = [
        CircleWeight::lebesgue(),
        CircleWeight::poisson(c(0.5, 0.0)).unwrap(),
        CircleWeight::poisson(c(-0.2, 0.6)).unwrap(),
        normalize_weight(&CircleWeight::holder(0.4).unwrap()).unwrap(),
        CircleWeight::holder(1.0).unwrap(),
    ];
    let mut dense_err: f64 = 0.0;
    let mut ortho_err: f64 = 0.0;
    for w in &weights {
        let m = compute_moments(w, 257, DEFAULT_MOMENT_TOL).unwrap();
        let polys = szego_polynomials(&levinson(&m).unwrap(), 256).unwrap();
        for n in [1usize, 2, 5, 32, 100, 256] {
            let dense = dense_orthonormal(&m, n);
            for (a, b) in dense.iter().zip(polys.phi(n)) {
                dense_err = dense_err.max((a - b).norm());
            }
        }
        for j in 0..=64 {
            for k in j..=64 {
                let g = inner(&m, polys.phi(j), polys.phi(k));
                ortho_err = ortho_err.max((g - if j == k { 1.0 } else { 0.0 }).norm());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut disk = |r: f64| Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(-3.2..3.2));
    let mut modified_step: f64 = 0.0;
    for _ in 0..100 {
        let n = 1 + (disk(1.0).norm() * 40.0) as usize;
        let v = VerblunskyCoefficients::new((0..n).map(|_| disk(0.9)).collect(), 1.0).unwrap();
        let (a, z1, z2) = (disk(0.999), disk(1.5), disk(1.5));
        let (mut w1, mut w2) = (SzegoWalker::new(&v, z1), SzegoWalker::new(&v, z2));
        for _ in 0..n - 1 {
            w1.step(&v);
            w2.step(&v);
        }
        let (mut t1, mut t2) = (w1, w2);
        w1.step(&v);
        w2.step(&v);
        t1.step_with(a);
        t2.step_with(a);
        let cd = |p: &SzegoWalker, q: &SzegoWalker| q.phi_star().conj() * p.phi_star() - q.phi().conj() * p.phi();
        let scale = w1.phi_star().norm() * w2.phi_star().norm() + 1.0;
        modified_step = modified_step.max((cd(&t1, &t2) - cd(&w1, &w2)).norm() / scale);
    }
    outcome(
        dense_err <= SOLVER_TOL && ortho_err < SOLVER_TOL && modified_step < MODIFIED_STEP_TOL,
        format!("dense vs Levinson {dense_err:.1e}, orthonormality {ortho_err:.1e}, modified-step identity {modified_step:.1e}"),
    )
}

fn theorem1_boundedness(cache: &MomentCache) -> Outcome {
    let w = normalize_weight(&CircleWeight::holder(0.4).unwrap()).unwrap();
    let sweep = theorem1_sweep(&w, c(1.0, 0.0), 1.0, &THEOREM1_NS, PolarGrid::default(), DEFAULT_MOMENT_TOL, cache).unwrap();
    let ratios: Vec<String> = sweep
        .reports
        .iter()
        .map(|r| format!("{}: {:.4}", r.n, r.empirical_ratio.unwrap_or(f64::NAN)))
        .collect();
    let consistent = sweep.reports.iter().all(|r| r.consistent && r.empirical_ratio.is_some());
    let spread = sweep.ratio_range.map(|(lo, hi)| hi / lo).unwrap_or(f64::INFINITY);
    outcome(
        consistent && spread <= THEOREM1_SPREAD,
        format!("empirical ratio [{}], spread {spread:.3} (max {THEOREM1_SPREAD})", ratios.join(", ")),
    )
}

fn long_run(cache: &MomentCache) -> Outcome {
    let records = rate_run(0.4, LONG_N, cache);
    let last7: Vec<f64> = records.iter().rev().take(7).rev().map(|r| r.alpha_cand.unwrap()).collect();
    let constant = records.last().unwrap().c_alpha_cand.unwrap();
    let alpha_ok = last7.iter().all(|a| (a - LONG_ALPHA.0).abs() <= LONG_ALPHA.1);
    let c_ok = (constant - LONG_CONSTANT.0).abs() <= LONG_CONSTANT.1;
    outcome(
        alpha_ok && c_ok,
        format!(
            "last alphaCand {:?} (target {}±{}), C {constant:.5} (target {}±{})",
            last7.iter().map(|a| format!("{a:.5}")).collect::<Vec<_>>(),
            LONG_ALPHA.0,
            LONG_ALPHA.1,
            LONG_CONSTANT.0,
            LONG_CONSTANT.1
        ),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    // cargo passes harness flags such as --list; there is nothing to list
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let cache = MomentCache::new();
    let criteria: Vec<Criterion> = vec![
        ("1 Lebesgue exactness", Box::new(lebesgue_exactness)),
        ("2 Bernstein-Szego oracle", Box::new(bernstein_szego)),
        ("3 entropy oracle", Box::new(entropy_oracle)),
        ("4 entropy exponents", Box::new(entropy_exponents)),
        ("5 Poisson 1/n scaling", Box::new(poisson_scaling)),
        ("6 rate reproduction s=0.4, N=2000", Box::new(|| rate_reproduction(&cache))),
        ("7 rate s=0.1, 0.2, N=2000", Box::new(|| rate_small_s(&cache))),
        ("8 solver cross-checks", Box::new(solver_cross_checks)),
        ("T1 empirical ratio bounded over n", Box::new(|| theorem1_boundedness(&cache))),
    ];
    let mut failures = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let o = run();
        failures += usize::from(!o.pass);
        println!(
            "{} criterion {name}: {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if std::env::var("OPUC_LONG_RUN").is_ok_and(|v| v == "1") {
        let start = Instant::now();
        let o = long_run(&cache);
        failures += usize::from(!o.pass);
        println!(
            "{} long-run N=8000 reproduction: {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    } else {
        println!("SKIP long-run N=8000 reproduction (set OPUC_LONG_RUN=1)");
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
