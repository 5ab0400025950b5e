//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs the full simulation grid at 200 replications, the mean-estimate grid
//! at 1000, the kurtosis table at 10⁴ draws, the distance-covariance oracle
//! and the property suite. Expect tens of minutes on a single core.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;

use svarica::dcov::{dist_cov_fast, DistCovConfig};
use svarica::montecarlo::{kurtosis_quantile_table, Cell, CellReport, Scope};
use svarica::seed::{derive_seed, rng};
use svarica::{dist_cov, run_grid, ExperimentGrid, MonteCarloReport};

const SEED: u64 = 20240101;
const GRID_REPS: usize = 200;
const MEAN_REPS: usize = 1000;

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.details.push(format!("{} {what}", if ok { "ok  " } else { "MISS" }));
    }
}

fn cell<'a>(r: &'a MonteCarloReport, label: &str) -> &'a CellReport {
    let c = Cell::parse(label).unwrap();
    r.cells.iter().find(|x| x.cell == c).expect("cell in report")
}

fn col(names: &[String], name: &str) -> usize {
    names.iter().position(|n| n == name).unwrap_or_else(|| panic!("column {name}"))
}

fn criterion_1(r: &MonteCarloReport, elapsed: Duration) -> Outcome {
    let mut o = Outcome::new();
    let names = r.grid.panel_a_columns();
    for c in &r.cells {
        let l = c.cell.label();
        for s in ["u", "u2"] {
            let v = c.panel_a[col(&names, s)];
            o.check((0.06..=0.14).contains(&v), format!("{l} {s}: {v:.3} in 0.10 ± 0.04"));
        }
        let v = c.panel_a[col(&names, "e0")];
        o.check(v >= 0.95, format!("{l} e0: {v:.3} ≥ 0.95"));
    }
    for l in ["NLT-HL", "NLT-LL", "LT-LL"] {
        let v = cell(r, l).panel_a[col(&names, "uhat(et0)")];
        o.check(v <= 0.05, format!("{l} uhat(et0): {v:.3} ≤ 0.05"));
    }
    let v = cell(r, "LT-HL").panel_a[col(&names, "uhat(et1)")];
    o.check((0.05..=0.25).contains(&v), format!("LT-HL uhat(et1): {v:.3} in [0.05, 0.25]"));
    let workers = rayon::current_num_threads();
    let mins = elapsed.as_secs_f64() / 60.0;
    o.check(mins <= 30.0, format!("grid runtime {mins:.1} min ≤ 30 with {workers} worker(s)"));
    o
}

fn criterion_2(r: &MonteCarloReport) -> Outcome {
    let mut o = Outcome::new();
    let a = r.grid.panel_a_columns();
    let b = r.grid.panel_b_columns();
    for c in &r.cells {
        for k in 0..r.grid.whiteners.len() {
            for (pa, pb) in [(format!("et{k}"), format!("eh{k}")), (format!("uhat(et{k})"), format!("uhat(eh{k})"))] {
                let (va, vb) = (c.panel_a[col(&a, &pa)], c.panel_b[col(&b, &pb)]);
                o.check((va - vb).abs() <= 0.05, format!("{} {pb} {vb:.3} vs {pa} {va:.3}", c.cell.label()));
            }
        }
    }
    o
}

fn criterion_3(r: &MonteCarloReport) -> Outcome {
    let mut o = Outcome::new();
    let names = r.grid.panel_c_columns();
    let targets = [("NLT-HL", 0.151, 0.151), ("LT-HL", 0.118, 0.122), ("NLT-LL", 0.101, 0.086), ("LT-LL", 0.103, 0.101)];
    for (l, t_obs, t_est) in targets {
        let c = cell(r, l);
        let (vo, ve) = (c.panel_c[col(&names, "et0")], c.panel_c[col(&names, "eh0")]);
        o.check((vo - t_obs).abs() <= 0.05, format!("{l} et0 {vo:.3} vs {t_obs}"));
        o.check((ve - t_est).abs() <= 0.05, format!("{l} eh0 {ve:.3} vs {t_est}"));
    }
    let c = cell(r, "LT-HL");
    let (e0, e1) = (c.panel_c[col(&names, "et0")], c.panel_c[col(&names, "et1")]);
    o.check(e1 - e0 >= 0.2, format!("LT-HL ordering penalty et1 − et0 = {e1:.3} − {e0:.3} = {:.3} ≥ 0.2", e1 - e0));
    o
}

fn m(rows: [[f64; 3]; 3]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| rows[i][j])
}

fn criterion_4(r: &MonteCarloReport) -> Outcome {
    let mut o = Outcome::new();
    let a_ref = [
        ("NLT-HL", m([[0.192, 0.002, -0.007], [0.293, 0.602, -0.007], [0.400, 0.300, 0.800]])),
        ("NLT-LL", m([[0.193, 0.000, -0.007], [0.298, 0.598, -0.004], [0.399, 0.303, 0.798]])),
        ("LT-HL", m([[0.190, 0.003, -0.009], [0.296, 0.598, -0.005], [0.399, 0.301, 0.798]])),
        ("LT-LL", m([[0.195, 0.001, -0.003], [0.303, 0.593, -0.002], [0.401, 0.303, 0.792]])),
    ];
    let b_ref = [
        ("NLT-HL", m([[1.582, 2.091, 0.005], [1.582, 0.693, -0.001], [0.000, -0.002, 0.987]])),
        ("NLT-LL", m([[1.584, 2.104, 0.005], [1.558, 0.724, 0.003], [-0.002, -0.001, 1.000]])),
        ("LT-HL", m([[0.999, -0.003, -0.005], [0.749, 1.231, 0.015], [0.999, 0.202, 1.319]])),
        ("LT-LL", m([[0.985, 0.017, -0.001], [0.727, 1.240, 0.002], [0.976, 0.220, 1.334]])),
    ];
    for (what, refs) in [("mean A", &a_ref), ("mean B", &b_ref)] {
        for (l, want) in refs.iter() {
            let c = cell(r, l);
            let got = if what == "mean A" { &c.mean_a } else { &c.mean_b };
            let (i, j) = (0..9).map(|k| (k / 3, k % 3)).max_by(|&p, &q| (got[p] - want[p]).abs().total_cmp(&(got[q] - want[q]).abs())).unwrap();
            let dev = (got[(i, j)] - want[(i, j)]).abs();
            o.check(dev <= 0.03, format!("{l} {what}: largest deviation {dev:.4} at ({},{}) ({:.3} vs {:.3})", i + 1, j + 1, got[(i, j)], want[(i, j)]));
        }
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let table = kurtosis_quantile_table(&[500, 1000], 1.0, 10_000, SEED).unwrap();
    let mid = table.probs.iter().position(|&p| p == 0.5).expect("median column");
    let (q500, q1000) = (&table.rows[0].1, &table.rows[1].1);
    for (t, q, want) in [(500, q500, 225.9), (1000, q1000, 445.6)] {
        let v = q[mid];
        o.check((v - want).abs() <= 0.1 * want, format!("T={t} median {v:.1} within 10% of {want}"));
    }
    for (k, p) in table.probs.iter().enumerate() {
        let ratio = q1000[k] / q500[k];
        o.check((1.7..=2.3).contains(&ratio), format!("q{p}: ratio {ratio:.3} in [1.7, 2.3]"));
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let cfg = DistCovConfig::default();
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let mut r = rng(derive_seed(SEED, &[6, i]));
        let t = r.random_range(2..=60usize);
        // Every fourth instance uses small integers to force ties.
        let draw = |r: &mut svarica::seed::Rng| if i % 4 == 0 { r.random_range(-3..=3) as f64 } else { r.random_range(-10.0..10.0) };
        let x: Vec<f64> = (0..t).map(|_| draw(&mut r)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v * v.signum() + draw(&mut r)).collect();
        let fast = dist_cov_fast(&x, &y, 1.0).unwrap();
        let naive = dist_cov(&DMatrix::from_column_slice(t, 1, &x), &DMatrix::from_column_slice(t, 1, &y), &cfg).unwrap();
        let oracle = common::dcov_oracle(&x, &y);
        // A zero statistic (constant input) is compared in absolute terms.
        let scale = if naive == 0.0 { 1.0 } else { naive.abs() };
        worst = worst.max((fast - naive).abs() / scale).max((oracle - naive).abs() / scale);
    }
    o.check(worst <= 1e-10, format!("1000 instances, worst relative error {worst:.2e} ≤ 1e-10"));
    for (x, y) in [([0.5f64, 2.0], [1.0f64, -3.0]), ([-1.25, 4.0], [0.0, 0.75]), ([3.0, 3.0], [1.0, 2.0])] {
        let hand = (x[1] - x[0]).abs() * (y[1] - y[0]).abs() / 4.0;
        let fast = dist_cov_fast(&x, &y, 1.0).unwrap();
        let naive = dist_cov(&DMatrix::from_column_slice(2, 1, &x), &DMatrix::from_column_slice(2, 1, &y), &cfg).unwrap();
        o.check(fast == hand && naive == hand, format!("T=2 {x:?},{y:?}: fast {fast} naive {naive} hand {hand}"));
    }
    o
}

fn run_property<S: Strategy>(o: &mut Outcome, name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) {
    let mut runner = TestRunner::new(Config { cases: 256, failure_persistence: None, ..Config::default() });
    let result = runner.run(&strategy, test);
    o.check(result.is_ok(), match result {
        Ok(()) => format!("{name}: 256 cases"),
        Err(e) => format!("{name}: {e}"),
    });
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    run_property(&mut o, "whitened covariance identity (1e-8)", (30usize..200, 2usize..6, any::<u64>()), |(t, n, s)| common::check_whitening(t, n, s));
    run_property(&mut o, "Ω normalization invariants", (2usize..6, any::<u64>()), |(n, s)| common::check_omega(n, s));
    run_property(&mut o, "Amari invariance under PΛ (1e-10)", (2usize..6, any::<u64>()), |(n, s)| common::check_amari(n, s));
    run_property(&mut o, "MA recursion identity", (1usize..5, 1usize..4, any::<u64>()), |(n, p, s)| common::check_ma(n, p, s));
    run_property(&mut o, "h=0 local projection equals B̂ (1e-8)", (2usize..4, 1usize..3, any::<u64>()), |(n, p, s)| common::check_lp_impact(n, p, s));
    let rate = common::null_rejection_rate(500, 100, derive_seed(SEED, &[7, 1]));
    o.check((0.07..=0.13).contains(&rate), format!("null calibration: P(p ≤ 0.1) = {rate:.3} in 0.10 ± 0.03 over 500 reps"));
    let (s11, s21) = common::rate_slopes(500, derive_seed(SEED, &[7, 2]));
    o.check(s21 < s11, format!("rate ordering: log-RMSE slope Â21 {s21:.3} steeper than Â11 {s11:.3}"));
    o
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut emit = |n: usize, title: &'static str, o: Outcome| {
        println!("acceptance criterion {n}: {} ({title})", if o.pass { "PASS" } else { "FAIL" });
        for d in &o.details {
            println!("    {d}");
        }
        results.push((n, title, o));
    };

    emit(6, "fast distance covariance oracle", criterion_6());
    emit(7, "property suite", criterion_7());
    emit(5, "kurtosis quantile table", criterion_5());

    let mut means = ExperimentGrid::new(MEAN_REPS, SEED);
    means.scope = Scope::MeanEstimates;
    let means = run_grid(&means).expect("mean-estimate grid");
    emit(4, "mean estimate tables", criterion_4(&means));

    let t0 = Instant::now();
    let grid = run_grid(&ExperimentGrid::new(GRID_REPS, SEED)).expect("simulation grid");
    let elapsed = t0.elapsed();
    emit(1, "observed-error rejection rates", criterion_1(&grid, elapsed));
    emit(2, "estimated-residual rejection rates", criterion_2(&grid));
    emit(3, "Amari distances", criterion_3(&grid));

    results.sort_by_key(|r| r.0);
    println!("\nacceptance summary ({:.1} min):", started.elapsed().as_secs_f64() / 60.0);
    for (n, title, o) in &results {
        println!("  criterion {n}: {} ({title})", if o.pass { "PASS" } else { "FAIL" });
    }
    if results.iter().all(|r| r.2.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
