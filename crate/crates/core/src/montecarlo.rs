//! Replication engine for the simulation grid and the kurtosis-quantile table.
//!
//! Replication `r` of cell `c` uses the seed `derive_seed(master, [c, r])`
//! with `c` the cell's fixed index in [`Cell::ALL`], so any subset of cells
//! or reps reproduces the same draws. Aggregation folds replications in index
//! order.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{fmt_num, TimeSeriesMatrix};
use crate::dcov::DistCovConfig;
use crate::distributions::{sample_shock, ShockSpec};
use crate::error::{Error, Result};
use crate::ica::{align_columns, amari_mixing, estimate_unmixing, IcaOptions};
use crate::independence::{permutation_decision, squared, DEFAULT_PERMUTATIONS};
use crate::seed::derive_seed;
use crate::stats::{moment_ratio_kurtosis, quantiles};
use crate::svar::design::{self, Noise, Structure};
use crate::svar::{simulate, DEFAULT_BURN_IN};
use crate::var::{fit_var, VarOptions};
use crate::whiten::{whiten, WhitenVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub structure: Structure,
    pub noise: Noise,
}

impl Cell {
    /// Grid cells in report order.
    pub const ALL: [Cell; 4] = [
        Cell { structure: Structure::Nlt, noise: Noise::Hl },
        Cell { structure: Structure::Lt, noise: Noise::Hl },
        Cell { structure: Structure::Nlt, noise: Noise::Ll },
        Cell { structure: Structure::Lt, noise: Noise::Ll },
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("every cell is listed")
    }

    pub fn label(self) -> String {
        format!("{}-{}", self.structure.label(), self.noise.label())
    }

    pub fn parse(label: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(label))
            .ok_or_else(|| Error::Parameter(format!("unknown cell {label:?}, expected one of NLT-HL, LT-HL, NLT-LL, LT-LL")))
    }
}

/// The four whiteners of the grid, in column order.
pub fn grid_whiteners() -> Vec<WhitenVariant> {
    vec![
        WhitenVariant::Cholesky { ordering: vec![0, 1, 2] },
        WhitenVariant::Cholesky { ordering: vec![1, 2, 0] },
        WhitenVariant::CovarianceSvd,
        WhitenVariant::DataSvd,
    ]
}

/// Optimizer settings used inside the grid: one local search from the
/// identity rotation with a narrow first bracket, so the result depends on
/// where the whitener starts the search.
pub fn grid_ica_options() -> IcaOptions {
    IcaOptions { restarts: 1, initial_step: 0.1, ..IcaOptions::default() }
}

/// What each replication computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Independence tests and Amari distances for every whitener, plus mean
    /// estimates.
    Full,
    /// Only the VAR fit and one identification on estimated residuals with
    /// the first whitener.
    MeanEstimates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub cells: Vec<Cell>,
    pub t: usize,
    pub burn_in: usize,
    pub reps: usize,
    pub permutations: usize,
    /// Rejection threshold for the reported fractions.
    pub level: f64,
    pub var_lags: usize,
    pub whiteners: Vec<WhitenVariant>,
    pub ica: IcaOptions,
    pub dcov: DistCovConfig,
    pub scope: Scope,
    pub seed: u64,
}

impl ExperimentGrid {
    pub fn new(reps: usize, seed: u64) -> Self {
        Self {
            cells: Cell::ALL.to_vec(),
            t: 400,
            burn_in: DEFAULT_BURN_IN,
            reps,
            permutations: DEFAULT_PERMUTATIONS,
            level: 0.1,
            var_lags: 1,
            whiteners: grid_whiteners(),
            ica: grid_ica_options(),
            dcov: DistCovConfig::default(),
            scope: Scope::Full,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() || self.reps == 0 || self.whiteners.is_empty() {
            return Err(Error::Parameter("grid needs at least one cell, rep and whitener".into()));
        }
        if self.t < 50 {
            return Err(Error::Parameter(format!("T = {} is too short for the grid", self.t)));
        }
        if !(self.level > 0.0 && self.level < 1.0) || self.permutations == 0 {
            return Err(Error::Parameter("level must lie in (0, 1) and permutations be positive".into()));
        }
        self.ica.validate()?;
        self.dcov.validate()
    }

    /// Series names of the observed-errors panel.
    pub fn panel_a_columns(&self) -> Vec<String> {
        let k = self.whiteners.len();
        let mut c = vec!["u".to_string(), "u2".into(), "e0".into()];
        c.extend((0..k).map(|i| format!("et{i}")));
        c.extend((0..k).map(|i| format!("uhat(et{i})")));
        c
    }

    /// Series names of the estimated-residuals panel.
    pub fn panel_b_columns(&self) -> Vec<String> {
        let k = self.whiteners.len();
        let mut c: Vec<String> = (0..k).map(|i| format!("eh{i}")).collect();
        c.extend((0..k).map(|i| format!("uhat(eh{i})")));
        c
    }

    pub fn panel_c_columns(&self) -> Vec<String> {
        let k = self.whiteners.len();
        (0..k).map(|i| format!("et{i}")).chain((0..k).map(|i| format!("eh{i}"))).collect()
    }
}

/// Output of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub panel_a: Vec<bool>,
    pub panel_b: Vec<bool>,
    pub amari_a: Vec<f64>,
    pub amari_b: Vec<f64>,
    pub a_hat: DMatrix<f64>,
    /// Mixing estimate from estimated residuals and the first whitener, with
    /// unit-norm unmixing rows, columns matched to the true `B` by signed
    /// permutation.
    pub b_hat: DMatrix<f64>,
}


/// Runs replication `rep` of `cell`.
pub fn run_replication(grid: &ExperimentGrid, cell: Cell, rep: usize) -> Result<RepOutcome> {
    let rep_seed = derive_seed(grid.seed, &[cell.index() as u64, rep as u64]);
    let model = design::model(cell.structure, cell.noise, None);
    let b_true = model.mixing().clone();
    let (y, u) = simulate(&model, grid.t, grid.burn_in, derive_seed(rep_seed, &[0]))?;
    let fit = fit_var(&y, VarOptions::new(grid.var_lags), None)?;
    let a_hat = fit.lags[0].clone();
    let ica_opts = |k: usize| IcaOptions { seed: derive_seed(rep_seed, &[2, k as u64]), ..grid.ica.clone() };

    if grid.scope == Scope::MeanEstimates {
        let r = estimate_unmixing(&fit.residuals, &grid.whiteners[0], &grid.dcov, &ica_opts(0))?;
        return Ok(RepOutcome {
            panel_a: Vec::new(),
            panel_b: Vec::new(),
            amari_a: Vec::new(),
            amari_b: vec![amari_mixing(&r.b_hat, &b_true)?],
            a_hat,
            b_hat: align_columns(&r.b_omega, &b_true)?.0,
        });
    }

    let mut test_index = 0u64;
    let mut reject = |s: &DMatrix<f64>| -> Result<bool> {
        test_index += 1;
        let seed = derive_seed(rep_seed, &[1, test_index]);
        Ok(permutation_decision(s, grid.permutations, &grid.dcov, seed, grid.level)?.reject)
    };

    let e = &u.values * b_true.transpose();
    let k = grid.whiteners.len();
    let mut panel_a = vec![reject(&u.values)?, reject(&squared(&u.values))?, reject(&e)?];
    let mut shock_tests = Vec::with_capacity(k);
    let mut amari_a = Vec::with_capacity(k);
    for (i, v) in grid.whiteners.iter().enumerate() {
        let (et, _) = whiten(&e, v)?;
        panel_a.push(reject(&et)?);
        let r = estimate_unmixing(&e, v, &grid.dcov, &ica_opts(i))?;
        amari_a.push(amari_mixing(&r.b_hat, &b_true)?);
        shock_tests.push(r.shocks);
    }
    for s in &shock_tests {
        panel_a.push(reject(s)?);
    }

    let mut panel_b = Vec::with_capacity(2 * k);
    let mut shock_tests = Vec::with_capacity(k);
    let mut amari_b = Vec::with_capacity(k);
    let mut b_hat = None;
    for (i, v) in grid.whiteners.iter().enumerate() {
        let (eh, _) = whiten(&fit.residuals, v)?;
        panel_b.push(reject(&eh)?);
        let r = estimate_unmixing(&fit.residuals, v, &grid.dcov, &ica_opts(k + i))?;
        amari_b.push(amari_mixing(&r.b_hat, &b_true)?);
        if i == 0 {
            b_hat = Some(align_columns(&r.b_omega, &b_true)?.0);
        }
        shock_tests.push(r.shocks);
    }
    for s in &shock_tests {
        panel_b.push(reject(s)?);
    }
    Ok(RepOutcome { panel_a, panel_b, amari_a, amari_b, a_hat, b_hat: b_hat.expect("at least one whitener") })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepFailure {
    pub rep: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: Cell,
    pub completed: usize,
    pub failures: Vec<RepFailure>,
    /// Rejection fractions in [`ExperimentGrid::panel_a_columns`] order.
    pub panel_a: Vec<f64>,
    pub panel_b: Vec<f64>,
    /// Mean Amari distances, observed errors then estimated residuals.
    pub panel_c: Vec<f64>,
    pub mean_a: DMatrix<f64>,
    pub mean_b: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub grid: ExperimentGrid,
    pub cells: Vec<CellReport>,
}

fn mean_flags(outcomes: &[RepOutcome], f: impl Fn(&RepOutcome) -> &Vec<bool>) -> Vec<f64> {
    let width = outcomes.first().map_or(0, |o| f(o).len());
    (0..width)
        .map(|j| outcomes.iter().filter(|o| f(o)[j]).count() as f64 / outcomes.len() as f64)
        .collect()
}

fn mean_values(outcomes: &[RepOutcome], f: impl Fn(&RepOutcome) -> &Vec<f64>) -> Vec<f64> {
    let width = outcomes.first().map_or(0, |o| f(o).len());
    (0..width)
        .map(|j| outcomes.iter().map(|o| f(o)[j]).sum::<f64>() / outcomes.len() as f64)
        .collect()
}

fn mean_matrix(outcomes: &[RepOutcome], f: impl Fn(&RepOutcome) -> &DMatrix<f64>) -> DMatrix<f64> {
    let first = f(&outcomes[0]);
    let sum = outcomes.iter().fold(DMatrix::zeros(first.nrows(), first.ncols()), |acc, o| acc + f(o));
    sum / outcomes.len() as f64
}

/// Runs every replication of every cell in parallel and aggregates in
/// replication order. More than 1% failed replications in a cell abort.
pub fn run_grid(grid: &ExperimentGrid) -> Result<MonteCarloReport> {
    grid.validate()?;
    let mut cells = Vec::with_capacity(grid.cells.len());
    for &cell in &grid.cells {
        let results: Vec<Result<RepOutcome>> = (0..grid.reps).into_par_iter().map(|r| run_replication(grid, cell, r)).collect();
        let mut outcomes = Vec::with_capacity(grid.reps);
        let mut failures = Vec::new();
        for (rep, r) in results.into_iter().enumerate() {
            match r {
                Ok(o) => outcomes.push(o),
                Err(e) => {
                    let seed = derive_seed(grid.seed, &[cell.index() as u64, rep as u64]);
                    log::warn!("{} replication {rep} (seed {seed}) failed: {e}", cell.label());
                    failures.push(RepFailure { rep, seed, message: e.to_string() });
                }
            }
        }
        if failures.len() * 100 > grid.reps || outcomes.is_empty() {
            return Err(Error::MonteCarlo { failed: failures.len(), attempted: grid.reps });
        }
        let mut panel_c = mean_values(&outcomes, |o| &o.amari_a);
        panel_c.extend(mean_values(&outcomes, |o| &o.amari_b));
        cells.push(CellReport {
            cell,
            completed: outcomes.len(),
            panel_a: mean_flags(&outcomes, |o| &o.panel_a),
            panel_b: mean_flags(&outcomes, |o| &o.panel_b),
            panel_c,
            mean_a: mean_matrix(&outcomes, |o| &o.a_hat),
            mean_b: mean_matrix(&outcomes, |o| &o.b_hat),
            failures,
        });
    }
    Ok(MonteCarloReport { grid: grid.clone(), cells })
}

pub const KURTOSIS_PROBS: [f64; 9] = [0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KurtosisTable {
    pub alpha: f64,
    pub draws: usize,
    pub seed: u64,
    pub probs: Vec<f64>,
    /// `(T, quantiles)` per sample length.
    pub rows: Vec<(usize, Vec<f64>)>,
}

/// Quantiles of the moment-ratio kurtosis `T Σx⁴ / (Σx²)²` of IID Pareto
/// samples of each length in `lengths`.
pub fn kurtosis_quantile_table(lengths: &[usize], alpha: f64, draws: usize, seed: u64) -> Result<KurtosisTable> {
    let spec = ShockSpec::Pareto { alpha };
    spec.validate()?;
    if draws == 0 || lengths.iter().any(|&t| t < 2) {
        return Err(Error::Parameter("need positive draws and sample lengths of at least 2".into()));
    }
    let rows = lengths
        .iter()
        .map(|&t| {
            let values: Vec<f64> = (0..draws)
                .into_par_iter()
                .map(|d| moment_ratio_kurtosis(&sample_shock(&spec, t, derive_seed(seed, &[t as u64, d as u64]))?))
                .collect::<Result<_>>()?;
            Ok((t, quantiles(&values, &KURTOSIS_PROBS)))
        })
        .collect::<Result<_>>()?;
    Ok(KurtosisTable { alpha, draws, seed, probs: KURTOSIS_PROBS.to_vec(), rows })
}

fn write_rows<W: Write>(w: W, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&header)?;
    for r in rows {
        out.write_record(&r)?;
    }
    out.flush()?;
    Ok(())
}

fn panel_rows(report: &MonteCarloReport, f: impl Fn(&CellReport) -> &Vec<f64>) -> Vec<Vec<String>> {
    report
        .cells
        .iter()
        .map(|c| std::iter::once(c.cell.label()).chain(f(c).iter().map(|&v| fmt_num(v))).collect())
        .collect()
}

fn matrix_rows(report: &MonteCarloReport, truth: impl Fn(Cell) -> DMatrix<f64>, f: impl Fn(&CellReport) -> &DMatrix<f64>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for c in &report.cells {
        for (kind, m) in [("true", truth(c.cell)), ("mean", f(c).clone())] {
            for i in 0..m.nrows() {
                let mut r = vec![c.cell.label(), kind.to_string(), (i + 1).to_string()];
                r.extend(m.row(i).iter().map(|&v| fmt_num(v)));
                rows.push(r);
            }
        }
    }
    rows
}

pub fn write_panel_a<W: Write>(w: W, report: &MonteCarloReport) -> Result<()> {
    let header = std::iter::once("cell".to_string()).chain(report.grid.panel_a_columns()).collect();
    write_rows(w, header, panel_rows(report, |c| &c.panel_a))
}

pub fn write_panel_b<W: Write>(w: W, report: &MonteCarloReport) -> Result<()> {
    let header = std::iter::once("cell".to_string()).chain(report.grid.panel_b_columns()).collect();
    write_rows(w, header, panel_rows(report, |c| &c.panel_b))
}

pub fn write_panel_c<W: Write>(w: W, report: &MonteCarloReport) -> Result<()> {
    let header = std::iter::once("cell".to_string()).chain(report.grid.panel_c_columns()).collect();
    write_rows(w, header, panel_rows(report, |c| &c.panel_c))
}

fn matrix_header(prefix: &str, n: usize) -> Vec<String> {
    let mut h = vec!["cell".to_string(), "kind".into(), "row".into()];
    h.extend((1..=n).map(|j| format!("{prefix}{j}")));
    h
}

pub fn write_mean_a<W: Write>(w: W, report: &MonteCarloReport) -> Result<()> {
    write_rows(w, matrix_header("a", 3), matrix_rows(report, |_| design::lag_matrix(), |c| &c.mean_a))
}

pub fn write_mean_b<W: Write>(w: W, report: &MonteCarloReport) -> Result<()> {
    write_rows(w, matrix_header("b", 3), matrix_rows(report, |c| c.structure.true_wb().1, |c| &c.mean_b))
}

pub fn write_kurtosis_table<W: Write>(w: W, table: &KurtosisTable) -> Result<()> {
    let mut header = vec!["T".to_string()];
    header.extend(table.probs.iter().map(|p| format!("q{}", fmt_num(*p))));
    let rows = table
        .rows
        .iter()
        .map(|(t, q)| std::iter::once(t.to_string()).chain(q.iter().map(|&v| fmt_num(v))).collect())
        .collect();
    write_rows(w, header, rows)
}

/// Writes the grid CSVs into `dir` and returns their file names.
pub fn write_report(dir: &Path, report: &MonteCarloReport) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    type Writer = fn(fs::File, &MonteCarloReport) -> Result<()>;
    let files: [(&str, Writer); 5] = [
        ("panelA.csv", |f, r| write_panel_a(f, r)),
        ("panelB.csv", |f, r| write_panel_b(f, r)),
        ("panelC.csv", |f, r| write_panel_c(f, r)),
        ("meanA.csv", |f, r| write_mean_a(f, r)),
        ("meanB.csv", |f, r| write_mean_b(f, r)),
    ];
    // The mean-estimates scope has no panels.
    let skip = if report.grid.scope == Scope::MeanEstimates { 3 } else { 0 };
    let mut names = Vec::new();
    for (name, write) in files.into_iter().skip(skip) {
        write(fs::File::create(dir.join(name))?, report)?;
        names.push(name.to_string());
    }
    Ok(names)
}

/// Simulated observations and true shocks of one replication, for
/// inspection outside the grid.
pub fn replication_data(grid: &ExperimentGrid, cell: Cell, rep: usize) -> Result<(TimeSeriesMatrix, TimeSeriesMatrix)> {
    let rep_seed = derive_seed(grid.seed, &[cell.index() as u64, rep as u64]);
    let model = design::model(cell.structure, cell.noise, None);
    simulate(&model, grid.t, grid.burn_in, derive_seed(rep_seed, &[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_labels_roundtrip() {
        for c in Cell::ALL {
            assert_eq!(Cell::parse(&c.label()).unwrap(), c);
        }
        assert_eq!(Cell::ALL.map(|c| c.label()), ["NLT-HL", "LT-HL", "NLT-LL", "LT-LL"]);
        assert!(Cell::parse("XX").is_err());
    }

    #[test]
    fn column_names() {
        let g = ExperimentGrid::new(1, 0);
        assert_eq!(g.panel_a_columns().len(), 11);
        assert_eq!(g.panel_b_columns().len(), 8);
        assert_eq!(g.panel_c_columns(), ["et0", "et1", "et2", "et3", "eh0", "eh1", "eh2", "eh3"]);
    }

    #[test]
    fn mean_scope_is_reproducible_and_written() {
        let mut g = ExperimentGrid::new(3, 5);
        g.scope = Scope::MeanEstimates;
        g.cells = vec![Cell::ALL[3]];
        let a = run_grid(&g).unwrap();
        let b = run_grid(&g).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells[0].completed, 3);
        assert!(a.cells[0].mean_b.iter().all(|v| v.is_finite()));
        let mut buf = Vec::new();
        write_mean_b(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("cell,kind,row,b1,b2,b3\nLT-LL,true,1,"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn kurtosis_bounded_by_length() {
        let t = kurtosis_quantile_table(&[50, 100], 1.0, 200, 1).unwrap();
        for (len, q) in &t.rows {
            assert!(q.iter().all(|&v| v > 0.0 && v < *len as f64));
            assert!(q.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
