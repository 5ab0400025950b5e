use nalgebra::DMatrix;
use serde::Serialize;
use svarica::data::write_matrix_csv;
use svarica::independence::{squared, test_battery, BatteryRow};
use svarica::irf::{irf_choleski, irf_local_projection, irf_var_implied, unit_effect_rescale, unit_effect_rescale_ica, write_table3, LpControls};
use svarica::montecarlo::{kurtosis_quantile_table, write_kurtosis_table, write_report, Cell, Scope};
use svarica::svar::{design, HlSpec, ModelConfig};
use svarica::var::{low_frequency_detrend, purge_exogenous};
use svarica::whiten::kurtosis_order;
use svarica::{
    estimate_unmixing, fit_var, ingest_csv, label_disaster_shock, run_grid, simulate, DistCovConfig, Error, ExperimentGrid, IcaOptions, IcaResult,
    Result, SignRule, TimeSeriesMatrix, VarFit, VarOptions, WhitenVariant,
};

use crate::cli::*;
use crate::output::Outputs;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 2.0 {
        Ok(())
    } else {
        invalid(format!("--beta must lie in (0, 2), got {beta}"))
    }
}

fn check_positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return invalid(format!("--{name} must be positive"));
    }
    Ok(())
}

impl DataArgs {
    fn validate(&self) -> Result<()> {
        check_positive("lags", self.lags)
    }

    /// Reads, purges and detrends the input, then fits the VAR.
    fn prepare(&self) -> Result<(TimeSeriesMatrix, VarFit)> {
        let mut y = ingest_csv(&self.input)?;
        if let Some(path) = &self.exog {
            let x = ingest_csv(path)?;
            y = purge_exogenous(&y, &x, self.exog_lags)?;
        }
        if self.q_cosines > 0 {
            y = low_frequency_detrend(&y, self.q_cosines)?;
        }
        let fit = fit_var(&y, VarOptions { p: self.lags, intercept: !self.no_intercept }, None)?;
        Ok((y, fit))
    }
}

impl IcaArgs {
    fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        check_positive("restarts", self.restarts)?;
        if self.ordering != "kurtosis" {
            parse_ordering(&self.ordering)?;
        }
        parse_sign_rule(&self.sign_rule)?;
        Ok(())
    }

    fn variant(&self, residuals: &DMatrix<f64>) -> Result<WhitenVariant> {
        Ok(match self.whitener {
            WhitenerKind::Cholesky => WhitenVariant::Cholesky { ordering: self.cholesky_ordering(residuals)? },
            WhitenerKind::CovarianceSvd => WhitenVariant::CovarianceSvd,
            WhitenerKind::DataSvd => WhitenVariant::DataSvd,
        })
    }

    fn cholesky_ordering(&self, residuals: &DMatrix<f64>) -> Result<Vec<usize>> {
        let ordering = if self.ordering == "kurtosis" { kurtosis_order(residuals)? } else { parse_ordering(&self.ordering)? };
        if ordering.len() != residuals.ncols() {
            return invalid(format!("--ordering has {} entries for {} variables", ordering.len(), residuals.ncols()));
        }
        Ok(ordering)
    }

    /// Runs the identification and applies the sign rule to the disaster shock.
    fn identify(&self, residuals: &DMatrix<f64>) -> Result<IcaResult> {
        let variant = self.variant(residuals)?;
        let opts = IcaOptions { restarts: self.restarts, seed: self.seed, ..IcaOptions::default() };
        let result = estimate_unmixing(residuals, &variant, &DistCovConfig::new(self.beta)?, &opts)?;
        if !result.report.converged {
            log::warn!("rotation search stopped after {} sweeps without converging", result.report.sweeps);
        }
        let rule = parse_sign_rule(&self.sign_rule)?;
        if rule == SignRule::None {
            return Ok(result);
        }
        Ok(label_disaster_shock(result, rule)?.1)
    }
}

/// Parses a 1-based comma list such as `2,3,1` into 0-based indices.
fn parse_ordering(s: &str) -> Result<Vec<usize>> {
    let ordering: Vec<usize> = s
        .split(',')
        .map(|v| match v.trim().parse::<usize>() {
            Ok(i) if i > 0 => Ok(i - 1),
            _ => invalid(format!("--ordering entry {v:?} is not a positive integer")),
        })
        .collect::<Result<_>>()?;
    let mut sorted = ordering.clone();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &v)| i != v) {
        return invalid(format!("--ordering {s:?} is not a permutation of 1..{}", ordering.len()));
    }
    Ok(ordering)
}

fn parse_sign_rule(s: &str) -> Result<SignRule> {
    if s == "none" {
        return Ok(SignRule::None);
    }
    let (kind, var) = s.split_once(':').ok_or_else(|| Error::Parameter(format!("--sign-rule {s:?}: expected none, negative:<var> or positive:<var>")))?;
    let var = match var.parse::<usize>() {
        Ok(v) if v > 0 => v - 1,
        _ => return invalid(format!("--sign-rule variable {var:?} is not a positive integer")),
    };
    match kind {
        "negative" => Ok(SignRule::ImpactNegative(var)),
        "positive" => Ok(SignRule::ImpactPositive(var)),
        _ => invalid(format!("--sign-rule kind {kind:?}: expected negative or positive")),
    }
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn write_matrix(out: &mut Outputs, name: &str, header: &[String], m: &DMatrix<f64>) -> Result<()> {
    let f = out.file(name)?;
    write_matrix_csv(f, header, m)
}

fn write_series(out: &mut Outputs, name: &str, s: &TimeSeriesMatrix) -> Result<()> {
    let f = out.file(name)?;
    s.write_csv(f)
}

/// `values` as a series aligned with the last rows of `y`.
fn tail_series(y: &TimeSeriesMatrix, values: DMatrix<f64>, names: Vec<String>) -> TimeSeriesMatrix {
    let start = y.len() - values.nrows();
    TimeSeriesMatrix { values, names, dates: y.dates.as_ref().map(|d| d[start..].to_vec()) }
}

fn write_battery(out: &mut Outputs, rows: &[BatteryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out.file("pvalues.csv")?);
    w.write_record(["series", "statistic", "p_value"])?;
    for r in rows {
        w.write_record([r.series.clone(), svarica::data::fmt_num(r.statistic), svarica::data::fmt_num(r.p_value)])?;
    }
    w.flush()?;
    Ok(())
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct IcaSummary {
    whitener: String,
    variables: Vec<String>,
    objective: f64,
    kurtosis: Vec<f64>,
    angles: Vec<f64>,
    w_hat: Vec<Vec<f64>>,
    b_hat: Vec<Vec<f64>>,
    w_omega: Vec<Vec<f64>>,
    b_omega: Vec<Vec<f64>>,
    rotation: Vec<Vec<f64>>,
    converged: bool,
    sweeps: usize,
    evaluations: usize,
    restarts: usize,
    best_restart: usize,
}

impl IcaSummary {
    fn new(r: &IcaResult, variables: &[String]) -> Self {
        Self {
            whitener: r.whitener.variant.label(),
            variables: variables.to_vec(),
            objective: r.objective,
            kurtosis: r.kurtosis.clone(),
            angles: r.angles.clone(),
            w_hat: rows_of(&r.w_hat),
            b_hat: rows_of(&r.b_hat),
            w_omega: rows_of(&r.w_omega),
            b_omega: rows_of(&r.b_omega),
            rotation: rows_of(&r.o_hat),
            converged: r.report.converged,
            sweeps: r.report.sweeps,
            evaluations: r.report.evaluations,
            restarts: r.report.restarts,
            best_restart: r.report.best_restart,
        }
    }
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    check_positive("length", args.length)?;
    if let Some(a) = args.hl_alpha {
        if !(a > 0.0 && a < 2.0) {
            return invalid(format!("--hl-alpha must lie in (0, 2), got {a}"));
        }
    }
    let cell = args.cell.as_deref().map(Cell::parse).transpose()?;
    let model = match (&args.model, cell) {
        (Some(path), _) => ModelConfig::from_toml_str(&std::fs::read_to_string(path)?)?.build()?,
        (None, Some(c)) => design::model(c.structure, c.noise, args.hl_alpha.map(HlSpec::new)),
        (None, None) => return invalid("one of --model and --cell is required"),
    };
    let (y, u) = simulate(&model, args.length, args.burn_in, args.seed)?;
    let mut out = Outputs::create(&args.out)?;
    write_series(&mut out, "data.csv", &y)?;
    write_series(&mut out, "shocks.csv", &u)?;
    out.write_string("model.toml", &ModelConfig::from_model(&model).to_toml_string()?)?;
    out.commit("simulate", Some(args.seed), args)
}

pub fn estimate_cmd(args: &EstimateArgs) -> Result<()> {
    args.data.validate()?;
    let (y, fit) = args.data.prepare()?;
    let n = y.dim();
    let mut out = Outputs::create(&args.out)?;
    let mut header = vec!["equation".to_string()];
    if fit.intercept.is_some() {
        header.push("const".into());
    }
    for h in 1..=fit.p {
        header.extend(y.names.iter().map(|v| format!("{v}.l{h}")));
    }
    let mut w = csv::Writer::from_writer(out.file("coefficients.csv")?);
    w.write_record(&header)?;
    for i in 0..n {
        let mut rec = vec![y.names[i].clone()];
        if let Some(c) = &fit.intercept {
            rec.push(svarica::data::fmt_num(c[i]));
        }
        for a in &fit.lags {
            rec.extend(a.row(i).iter().map(|&v| svarica::data::fmt_num(v)));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    drop(w);
    write_series(&mut out, "residuals.csv", &tail_series(&y, fit.residuals.clone(), y.names.clone()))?;
    write_matrix(&mut out, "residual_cov.csv", &y.names, &fit.residual_cov)?;
    out.commit("estimate", None, args)
}

pub fn identify_cmd(args: &IdentifyArgs) -> Result<()> {
    args.data.validate()?;
    args.ica.validate()?;
    check_positive("permutations", args.permutations)?;
    let (y, fit) = args.data.prepare()?;
    let result = args.ica.identify(&fit.residuals)?;
    let n = y.dim();
    let cfg = DistCovConfig::new(args.ica.beta)?;
    let battery = test_battery(
        &[
            ("uhat".into(), result.shocks.clone()),
            ("uhat2".into(), squared(&result.shocks)),
            ("ehat".into(), fit.residuals.clone()),
            ("ehat2".into(), squared(&fit.residuals)),
        ],
        args.permutations,
        &cfg,
        args.ica.seed,
    )?;

    let mut out = Outputs::create(&args.out)?;
    let json = serde_json::to_string_pretty(&IcaSummary::new(&result, &y.names)).map_err(|e| Error::Internal(e.to_string()))?;
    out.write_string("ica.json", &(json + "\n"))?;
    write_series(&mut out, "shocks.csv", &tail_series(&y, result.shocks.clone(), numbered("u", n)))?;
    write_matrix(&mut out, "b_hat.csv", &numbered("u", n), &result.b_hat)?;
    write_matrix(&mut out, "w_hat.csv", &y.names, &result.w_hat)?;
    write_series(&mut out, "residuals.csv", &tail_series(&y, fit.residuals.clone(), y.names.clone()))?;
    write_battery(&mut out, &battery)?;
    out.commit("identify", Some(args.ica.seed), args)
}

pub fn test_cmd(args: &TestArgs) -> Result<()> {
    check_beta(args.beta)?;
    check_positive("permutations", args.permutations)?;
    let s = ingest_csv(&args.input)?;
    let mut series = vec![("input".to_string(), s.values.clone())];
    if args.squared {
        series.push(("input2".into(), squared(&s.values)));
    }
    let battery = test_battery(&series, args.permutations, &DistCovConfig::new(args.beta)?, args.seed)?;
    let mut out = Outputs::create(&args.out)?;
    write_battery(&mut out, &battery)?;
    out.commit("test", Some(args.seed), args)
}

/// File-name-safe version of a variable name.
fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn irf_cmd(args: &IrfArgs) -> Result<()> {
    args.data.validate()?;
    args.ica.validate()?;
    check_positive("shock", args.shock)?;
    if args.unit_effect == Some(0) {
        return invalid("--unit-effect is a 1-based variable index");
    }
    let (y, fit) = args.data.prepare()?;
    let n = y.dim();
    let shock = args.shock - 1;
    if shock >= n {
        return invalid(format!("--shock {} exceeds the {n} variables", args.shock));
    }
    let target = args.unit_effect.map(|v| v - 1);
    if target.is_some_and(|t| t >= n) {
        return invalid(format!("--unit-effect exceeds the {n} variables"));
    }

    let mut result = args.ica.identify(&fit.residuals)?;
    if let Some(t) = target {
        result = unit_effect_rescale_ica(&result, shock, t)?.0;
    }
    let var = irf_var_implied(&fit.lags, &result.b_hat, shock, args.horizon)?;
    let controls = LpControls { lags: fit.p, other_shocks: !args.lp_no_other_shocks, intercept: !args.data.no_intercept };
    let lp = irf_local_projection(&y.values, &result.shocks, shock, controls, args.horizon)?;
    let ordering = args.ica.cholesky_ordering(&fit.residuals)?;
    let mut chol = irf_choleski(&fit.lags, &fit.residual_cov, &ordering, shock, args.horizon)?;
    if let Some(t) = target {
        chol = unit_effect_rescale(&chol, t)?;
    }

    let mut out = Outputs::create(&args.out)?;
    for (i, name) in y.names.iter().enumerate() {
        let f = out.file(&format!("irf_{}.csv", file_stem(name)))?;
        write_table3(f, i, &var, &lp, &chol)?;
    }
    out.commit("irf", Some(args.ica.seed), args)
}

pub fn montecarlo_cmd(args: &MonteCarloArgs) -> Result<()> {
    check_positive("reps", args.reps)?;
    check_positive("permutations", args.permutations)?;
    check_positive("kurtosis-draws", args.kurtosis_draws)?;
    let mut grid = ExperimentGrid::new(args.reps, args.seed);
    if !args.cells.is_empty() {
        grid.cells = args.cells.iter().map(|c| Cell::parse(c)).collect::<Result<_>>()?;
    }
    grid.t = args.length;
    grid.permutations = args.permutations;
    grid.scope = match args.scope {
        ScopeArg::Full => Scope::Full,
        ScopeArg::Means => Scope::MeanEstimates,
    };
    grid.validate()?;

    let mut out = Outputs::create(&args.out)?;
    let report = run_grid(&grid)?;
    // Register the names first so a failed write still cleans up.
    let names: Vec<&str> = match grid.scope {
        Scope::Full => vec!["panelA.csv", "panelB.csv", "panelC.csv", "meanA.csv", "meanB.csv"],
        Scope::MeanEstimates => vec!["meanA.csv", "meanB.csv"],
    };
    for name in names {
        out.path(name);
    }
    write_report(out.dir(), &report)?;
    let table = kurtosis_quantile_table(&[500, 1000], 1.0, args.kurtosis_draws, args.seed)?;
    write_kurtosis_table(out.file("kurtosis_quantiles.csv")?, &table)?;
    out.commit("montecarlo", Some(args.seed), args)
}

pub fn kurtosis_cmd(args: &KurtosisArgs) -> Result<()> {
    check_positive("draws", args.draws)?;
    if args.lengths.is_empty() || args.lengths.iter().any(|&t| t < 2) {
        return invalid("--lengths must list sample lengths of at least 2");
    }
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        return invalid(format!("--alpha must be positive, got {}", args.alpha));
    }
    let table = kurtosis_quantile_table(&args.lengths, args.alpha, args.draws, args.seed)?;
    let mut out = Outputs::create(&args.out)?;
    write_kurtosis_table(out.file("kurtosis_quantiles.csv")?, &table)?;
    out.commit("kurtosis-table", Some(args.seed), args)
}

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::Identify(a) => identify_cmd(a),
        Command::Test(a) => test_cmd(a),
        Command::Irf(a) => irf_cmd(a),
        Command::Montecarlo(a) => montecarlo_cmd(a),
        Command::KurtosisTable(a) => kurtosis_cmd(a),
    }
}
