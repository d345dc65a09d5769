use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sncpa_core::{
    chi2_quantile, normal_two_sided_critical, q_scalar, q_scalar_onestep, q_vector, q_vector_onestep, t_dm, t_gw,
    t_sn, transform, Bandwidth, HacConfig, HorizonCheck, Matrix, TestResult, TransformedSeries,
};
use sncpa_sim::cache::default_cache_dir;
use sncpa_sim::limit::{quantile_table, Functional, FunctionalFamily, STANDARD_PROBS};
use sncpa_sim::montecarlo::{power_points, run_grid, DgpKind, ExperimentGrid, Statistic, PAPER_D, PAPER_DELTA};
use sncpa_sim::reference::published_critical_values;
use sncpa_sim::replicate::{check_power, compare_size, ReplicationTarget, INDICATIVE_REPS};
use sncpa_sim::{CriticalValueCache, SimulationPolicy};

use crate::input::InputTable;
use crate::svg::{line_chart, Series, PALETTE};
use crate::{CacheArgs, CliError, CritvalsArgs, PlotPowerArgs, ReplicateArgs, StatChoice, TestArgs};

/// Maps statistic errors to CLI errors, naming the degeneracy.
pub fn stat_error(e: &sncpa_core::Error) -> CliError {
    use sncpa_core::Error as E;
    let name = match e {
        E::DegenerateRange { .. } => "DegenerateRange",
        E::SingularNormalizer { .. } => "SingularNormalizer",
        E::SingularHac => "SingularHac",
        E::DegenerateNormalizer => "DegenerateNormalizer",
        E::NotPositiveDefinite { .. } => "NotPositiveDefinite",
        _ => return CliError::Usage(e.to_string()),
    };
    let hint = match e {
        E::DegenerateRange { .. } | E::DegenerateNormalizer => "the CUSUM path is flat; is the series constant?",
        _ => "test-function columns are (nearly) collinear or constant",
    };
    CliError::Degenerate(format!("{name}: {e} ({hint})"))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn open_cache(args: &CacheArgs) -> Result<CriticalValueCache, CliError> {
    let dir = args.cache_dir.clone().unwrap_or_else(default_cache_dir);
    let policy = SimulationPolicy::Simulate { steps: args.cv_steps, reps: args.cv_reps, seed: args.cv_seed };
    let cache = CriticalValueCache::open(&dir, policy)?.require(args.cv_steps, args.cv_reps);
    for (path, why) in cache.skipped() {
        eprintln!("warning: ignoring cache file {}: {why}", path.display());
    }
    for t in published_critical_values()? {
        cache.insert(t);
    }
    Ok(cache)
}

fn parse_bandwidth(s: &str) -> Result<HacConfig, CliError> {
    match s {
        "horizon" => Ok(HacConfig::horizon_lag()),
        "auto" => Ok(HacConfig::default()),
        "nw94" => Ok(HacConfig::sandwich_defaults()),
        lag => lag
            .parse::<usize>()
            .map(|l| HacConfig { bandwidth: Bandwidth::Fixed(l), ..HacConfig::default() })
            .map_err(|_| CliError::Usage(format!("--hac-bandwidth: expected horizon, auto, nw94 or a lag, got '{s}'"))),
    }
}

/// One computed statistic with the provenance of its critical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub result: TestResult<f64>,
    pub critical_value_source: String,
}

fn proposed(
    series: &TransformedSeries<f64>,
    one_step: bool,
    cache: &CriticalValueCache,
    alpha: f64,
) -> Result<TestReport, CliError> {
    let q = series.q();
    let (result, family) = match (q, one_step) {
        (1, false) => (q_scalar(series), Functional::RangeRatio),
        (1, true) => (q_scalar_onestep(series, HorizonCheck::Enforce), Functional::RangeRatio),
        (_, false) => (q_vector(series), Functional::MatrixCusumForm(q)),
        (_, true) => (q_vector_onestep(series, HorizonCheck::Enforce), Functional::ComponentRangeSum(q)),
    };
    let result = result.map_err(|e| stat_error(&e))?;
    let cv = cache.critical_value(&FunctionalFamily::null(family), alpha)?;
    Ok(TestReport { result: result.with_decision(alpha, cv.value), critical_value_source: cv.table_id })
}

pub fn test(a: TestArgs) -> Result<(), CliError> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {}", a.alpha)));
    }
    if a.tau == 0 {
        return Err(CliError::Usage("--tau must be at least 1".into()));
    }
    let hac = parse_bandwidth(&a.hac_bandwidth)?;
    let table = InputTable::read(&a.file)?;
    let n = table.n();
    table.require(std::iter::once(a.loss_col.as_str()).chain(a.h_cols.iter().map(String::as_str)))?;
    let loss = table.column(&a.loss_col)?;
    let mut h_cols: Vec<Vec<f64>> = Vec::new();
    if a.intercept || a.h_cols.is_empty() {
        h_cols.push(vec![1.0; n]);
    }
    for c in &a.h_cols {
        h_cols.push(table.column(c)?);
    }
    let mut warnings = Vec::new();
    if n < 10 {
        warnings.push(format!("only {n} observations; the limiting critical values are unreliable this far from asymptotics"));
    } else if n < 50 {
        warnings.push(format!("only {n} observations; small-sample size distortions are likely"));
    }
    let q = h_cols.len();
    if n <= q {
        return Err(CliError::Usage(format!("need more observations than test-function columns (n = {n}, q = {q})")));
    }
    let h = Matrix::from_columns(&h_cols).map_err(|e| CliError::Usage(e.to_string()))?;
    let series = transform(&loss, &h, a.tau).map_err(|e| stat_error(&e))?;
    let last = Matrix::column_vector(h_cols.last().expect("at least one column"));
    let scalar_series = transform(&loss, &last, a.tau).map_err(|e| stat_error(&e))?;
    let one_step = a.tau == 1 && !a.force_multistep;
    let cache = open_cache(&a.cache)?;

    let wanted: Vec<StatChoice> = match a.stat {
        StatChoice::All => vec![StatChoice::Q2, StatChoice::Q1, StatChoice::SnDm, StatChoice::Gw, StatChoice::Dm],
        s => vec![s],
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for s in wanted {
        let r = match s {
            StatChoice::Q1 => proposed(&scalar_series, one_step, &cache, a.alpha),
            StatChoice::Q2 => proposed(&series, one_step, &cache, a.alpha),
            StatChoice::SnDm => t_sn(&loss, a.tau).map_err(|e| stat_error(&e)).and_then(|r| {
                let cv = cache.critical_value(&Functional::ShaoScalar.into(), a.alpha)?;
                Ok(TestReport { result: r.with_decision(a.alpha, cv.value), critical_value_source: cv.table_id })
            }),
            StatChoice::Gw => t_gw(&series, &hac).map_err(|e| stat_error(&e)).and_then(|r| {
                let cv = chi2_quantile(q, 1.0 - a.alpha).map_err(|e| stat_error(&e))?;
                Ok(TestReport { result: r.with_decision(a.alpha, cv), critical_value_source: format!("chi2({q})") })
            }),
            StatChoice::Dm => t_dm(&loss, a.tau, &hac).map_err(|e| stat_error(&e)).and_then(|r| {
                let cv = normal_two_sided_critical(a.alpha).map_err(|e| stat_error(&e))?;
                Ok(TestReport { result: r.with_decision(a.alpha, cv), critical_value_source: "normal two-sided".into() })
            }),
            StatChoice::All => unreachable!(),
        };
        match r {
            Ok(mut rep) => {
                rep.result.warnings.extend(warnings.iter().cloned());
                reports.push(rep);
            }
            Err(e @ CliError::Degenerate(_)) => failures.push(e),
            Err(e) => return Err(e),
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "n = {n}, q = {q}, tau = {}, alpha = {}", a.tau, a.alpha);
    for w in &warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for r in &reports {
        let d = &r.result.decisions[0];
        let _ = writeln!(
            out,
            "{:<11} {:>12.4}  critical value {:>9.4}  {}",
            r.result.family.label(),
            r.result.statistic,
            d.critical_value,
            if d.reject { "reject" } else { "do not reject" }
        );
        let _ = writeln!(out, "            critical value from {}", r.critical_value_source);
    }
    print!("{out}");
    if let Some(path) = &a.json {
        let text = serde_json::to_string_pretty(&reports).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        if path.as_os_str() == "-" {
            print!("{text}");
        } else {
            write_file(path, &text)?;
        }
    }
    match failures.into_iter().next() {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

pub fn critvals(a: CritvalsArgs) -> Result<(), CliError> {
    let functional = Functional::from_slug(&a.family, a.q)?;
    let family = if a.noncentrality.is_empty() {
        FunctionalFamily::null(functional)
    } else {
        FunctionalFamily::noncentral(functional, a.noncentrality.clone())?
    };
    if a.reps < INDICATIVE_REPS {
        eprintln!("warning: {} replications give a quick table only; tail quantiles are imprecise", a.reps);
    }
    let probs = if a.probs.is_empty() { STANDARD_PROBS.to_vec() } else { a.probs.clone() };
    let table = quantile_table(&family, a.steps, a.reps, &probs, a.seed)?;
    if table.redraws > 0 {
        eprintln!("note: {} draws had a singular bridge Gram matrix and were redrawn", table.redraws);
    }
    let text = table.to_json()?;
    match &a.out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn indicative(reps: usize) -> &'static str {
    if reps < INDICATIVE_REPS {
        " (indicative only: too few replications for the published tolerances)"
    } else {
        ""
    }
}

pub fn replicate(a: ReplicateArgs) -> Result<(), CliError> {
    let target = ReplicationTarget::parse(&a.table).map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = target.grid(a.seed).with_reps(a.reps);
    let cache = open_cache(&a.cache)?;
    let report = run_grid(&grid, &cache)?;
    let id = target.id();
    let note = indicative(a.reps);
    if let Some(dir) = &a.out {
        write_file(&dir.join(format!("{id}.csv")), &report.to_csv())?;
        write_file(&dir.join(format!("{id}.json")), &report.to_json()?)?;
    }
    match target {
        ReplicationTarget::Size { .. } => {
            let cmp = compare_size(&report, &id)?;
            if let Some(dir) = &a.out {
                write_file(&dir.join(format!("{id}-comparison.csv")), &cmp.to_csv())?;
            } else {
                print!("{}", cmp.to_csv());
            }
            println!("{id}: B = {}{note}", a.reps);
            for s in Statistic::ALL {
                let rate = cmp.pass_rate(&[s]);
                let verdict = if rate >= 0.95 { "pass" } else { "fail" };
                println!("  {:<5} {:5.1}% of cells within tolerance  {verdict}", s.label(), 100.0 * rate);
            }
            let sn = cmp.pass_rate(&[Statistic::Q2, Statistic::Q1, Statistic::TSn]);
            println!("  self-normalized columns: {:.1}% within tolerance ({})", 100.0 * sn, if sn >= 0.95 { "pass" } else { "fail" });
        }
        ReplicationTarget::Power { .. } => {
            let mut csv = String::from("statistic,param,tau,check,pass\n");
            println!("{id}: B = {}{note}", a.reps);
            for c in check_power(&report) {
                let _ = writeln!(csv, "{},{},{},{},{}", c.statistic, c.param, c.tau, c.description, c.pass);
                println!(
                    "  {:<5} param {:<4} tau {}  {}  {}",
                    c.statistic.label(),
                    c.param,
                    c.tau,
                    c.description,
                    if c.pass { "pass" } else { "fail" }
                );
            }
            if let Some(dir) = &a.out {
                write_file(&dir.join(format!("{id}-checks.csv")), &csv)?;
            }
        }
    }
    if report.total_failures() > 0 {
        eprintln!("note: {} statistic evaluations failed and were not counted as rejections", report.total_failures());
    }
    Ok(())
}

pub fn plot_power(a: PlotPowerArgs) -> Result<(), CliError> {
    let dgp = DgpKind::parse(&a.dgp).map_err(|e| CliError::Usage(e.to_string()))?;
    let drift = a.drift.unwrap_or(match dgp {
        DgpKind::Dgp1 => PAPER_DELTA,
        DgpKind::Dgp2 => PAPER_D,
    });
    let mut grid = ExperimentGrid::paper_power(dgp, a.seed).with_reps(a.reps);
    grid.params = vec![a.param];
    grid.drifts = vec![drift];
    grid.levels = vec![0.05];
    if !a.n.is_empty() {
        grid.n_values = a.n.clone();
    }
    let cache = open_cache(&a.cache)?;
    let report = run_grid(&grid, &cache)?;
    let pts = power_points(&report);

    let mut csv = String::from("statistic,tau,n,power\n");
    for p in &pts {
        let _ = writeln!(csv, "{},{},{},{:.4}", p.statistic, p.tau, p.n, p.power);
    }
    let mut series = Vec::new();
    for (i, s) in Statistic::ALL.iter().enumerate() {
        for &tau in &grid.taus {
            let points: Vec<(f64, f64)> =
                pts.iter().filter(|p| p.statistic == *s && p.tau == tau).map(|p| (p.n as f64, p.power)).collect();
            if !points.is_empty() {
                series.push(Series { label: format!("{s}, tau={tau}"), color: PALETTE[i], dashed: tau != 2, points });
            }
        }
    }
    let param = if dgp == DgpKind::Dgp1 { "rho" } else { "p" };
    let title = format!("Power at 5%, {} ({param} = {}, drift = {drift}, B = {})", dgp.slug().to_uppercase(), a.param, a.reps);
    let svg = line_chart(&title, "n", "rejection frequency", 0.05, &series);
    write_file(&a.out, &svg)?;
    let csv_path: PathBuf = a.out.with_extension("csv");
    write_file(&csv_path, &csv)?;
    println!("wrote {} and {}{}", a.out.display(), csv_path.display(), indicative(a.reps));
    Ok(())
}
