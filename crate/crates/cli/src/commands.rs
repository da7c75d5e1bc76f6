use std::fmt::Write as _;
use std::path::Path;

use edgedist::dist::{self, cdf, moment_grid, moments, uniform_grid, Beta, DistRequest, DistTable};
use edgedist::jet::aj_sequence;
use edgedist::oracle::{nystrom_d2, nystrom_d4, DEFAULT_NODES};
use edgedist::painleve::{format_sci, q0_asymptotic, q1_asymptotic, solve, solve_at_lambda, PainleveSolution, SolverConfig};
use edgedist::rmt::{self, Ensemble, EnsembleConfig, PercentileReport, SimulationRun};
use serde_json::{json, Value};

use crate::args::{Check, EnsembleArg, MomentsArgs, PercentilesArgs, SimulateArgs, TableArgs, VerifyArgs, WishartArgs};
use crate::output::{write_atomic, CliError, Report};

type CliResult<T> = Result<T, CliError>;

/// Largest tolerated fraction of failed replicates.
const MAX_FAILURE_FRACTION: f64 = 1e-3;

fn parse_beta(b: &str) -> CliResult<Beta> {
    let v: u32 = b.parse().map_err(|_| CliError::Usage(format!("bad beta {b:?}")))?;
    Ok(Beta::from_int(v)?)
}

fn solution(config: &SolverConfig) -> CliResult<PainleveSolution> {
    config.validate()?;
    solve(config).map_err(|e| CliError::Numerical(e.to_string()))
}

fn table_csv(table: &DistTable) -> CliResult<String> {
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

pub fn table(a: &TableArgs, config: &SolverConfig) -> CliResult<Report> {
    let beta = parse_beta(&a.beta)?;
    let sol = solution(config)?;
    if let Some(path) = &a.dump_solution {
        let mut buf = Vec::new();
        sol.write_csv(&mut buf)?;
        write_atomic(path, &buf)?;
    }
    let mut csv = String::new();
    let mut blocks = Vec::new();
    for &m in &a.m {
        let mut req = DistRequest::new(beta, m);
        req.tw_convention = a.tw_convention;
        let table = match a.s {
            Some(s) => {
                // Five points around s feed the centred density stencil.
                req.s_grid = (-2..=2).map(|i| s + i as f64 * a.s_step).collect();
                let mut t = cdf(&req, &sol)?;
                t.rows = vec![t.rows[2]];
                t.rows[0].s = s;
                t
            }
            None => {
                req.s_grid = uniform_grid(a.s_min, a.s_max, a.s_step)?;
                cdf(&req, &sol)?
            }
        };
        let _ = writeln!(csv, "# beta={beta} m={m}");
        csv.push_str(&table_csv(&table)?);
        blocks.push(json!({ "beta": beta.as_int(), "m": m, "rows": table.rows }));
    }
    let mut report = Report::new(csv, json!({ "tables": blocks }));
    if a.tw_convention && beta == Beta::Four {
        report.notes.push("convention: Tracy-Widom (argument scaled by sqrt 2)".into());
    }
    Ok(report)
}

pub fn moments_cmd(a: &MomentsArgs, config: &SolverConfig) -> CliResult<Report> {
    let beta = parse_beta(&a.beta)?;
    let sol = solution(config)?;
    let mut csv = String::from("beta,m,mean,sd,skewness,kurtosis\n");
    let mut rows = Vec::new();
    for &m in &a.m {
        let mut req = DistRequest::new(beta, m);
        req.s_grid = moment_grid();
        req.tw_convention = a.tw_convention;
        let stats = moments(&cdf(&req, &sol)?)?;
        let _ = writeln!(
            csv,
            "{beta},{m},{},{},{},{}",
            format_sci(stats.mean),
            format_sci(stats.sd),
            format_sci(stats.skewness),
            format_sci(stats.kurtosis)
        );
        rows.push(json!({ "beta": beta.as_int(), "m": m, "stats": stats }));
    }
    Ok(Report::new(csv, json!({ "moments": rows })))
}

fn ensemble_beta(e: Ensemble) -> Beta {
    match e {
        Ensemble::Gue => Beta::Two,
        Ensemble::Gse => Beta::Four,
        Ensemble::Goe | Ensemble::Wishart { .. } => Beta::One,
    }
}

fn theoretical_tables(beta: Beta, count: usize, config: &SolverConfig) -> CliResult<Vec<DistTable>> {
    let sol = solution(config)?;
    (1..=count)
        .map(|m| {
            let mut req = DistRequest::new(beta, m);
            req.s_grid = moment_grid();
            Ok(cdf(&req, &sol)?)
        })
        .collect()
}

fn percentile_csv(report: &PercentileReport) -> String {
    let mut csv = String::from("percentile,k,ordinate,proportion\n");
    for row in &report.rows {
        for (k, (s, p)) in row.ordinates.iter().zip(&row.proportions).enumerate() {
            let _ = writeln!(csv, "{},{},{},{}", format_sci(row.percentile), k + 1, format_sci(*s), format_sci(*p));
        }
    }
    csv
}

fn run_ensemble(cfg: EnsembleConfig, percentiles: &[f64], solver: &SolverConfig) -> CliResult<Report> {
    cfg.validate()?;
    let run: SimulationRun = rmt::simulate(&cfg)?;
    if run.failure_fraction() > MAX_FAILURE_FRACTION {
        let (rep, why) = &run.failures[0];
        return Err(CliError::Numerical(format!(
            "{} of {} replicates failed (first: rep {rep}: {why})",
            run.failures.len(),
            cfg.reps
        )));
    }
    let mut csv = String::from("rep,k,lhat\n");
    for (rep, s) in &run.samples {
        for (k, v) in s.scaled_top.iter().enumerate() {
            let _ = writeln!(csv, "{rep},{},{}", k + 1, format_sci(*v));
        }
    }
    let columns: Vec<Vec<f64>> = (0..cfg.top_k).map(|k| run.column(k)).collect();
    let mut summaries = Vec::new();
    if run.samples.len() >= 2 {
        csv.push_str("# summary\nk,mean,sd,skewness,kurtosis\n");
        for (k, c) in columns.iter().enumerate() {
            let st = rmt::summarize(c)?;
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                k + 1,
                format_sci(st.mean),
                format_sci(st.sd),
                format_sci(st.skewness),
                format_sci(st.kurtosis)
            );
            summaries.push(json!({ "k": k + 1, "stats": st }));
        }
    }
    let mut pct_json = Value::Null;
    if !percentiles.is_empty() {
        let tables = theoretical_tables(ensemble_beta(cfg.ensemble), cfg.top_k, solver)?;
        let report = rmt::percentile_report(&columns, &tables, percentiles)?;
        csv.push_str("# percentiles\n");
        csv.push_str(&percentile_csv(&report));
        pct_json = serde_json::to_value(&report).expect("report serializes");
    }
    let samples: Vec<Value> = run
        .samples
        .iter()
        .map(|(rep, s)| json!({ "rep": rep, "lhat": s.scaled_top, "raw": s.raw_top }))
        .collect();
    let mut report = Report::new(
        csv,
        json!({
            "config": cfg,
            "samples": samples,
            "summary": summaries,
            "percentiles": pct_json,
            "failed_reps": run.failures.iter().map(|(r, _)| r).collect::<Vec<_>>(),
        }),
    );
    report.seed = Some(cfg.seed);
    if !run.failures.is_empty() {
        report.notes.push(format!("failed reps: {}", run.failures.len()));
    }
    Ok(report)
}

pub fn simulate(a: &SimulateArgs, solver: &SolverConfig) -> CliResult<Report> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this ensemble")));
    let cfg = match a.ensemble {
        EnsembleArg::Wishart => {
            let (rows, cols) = (need(a.rows, "rows")?, need(a.cols, "cols")?);
            EnsembleConfig::wishart(rows, cols, a.reps, a.seed, a.top_k)
        }
        other => {
            let e = match other {
                EnsembleArg::Goe => Ensemble::Goe,
                EnsembleArg::Gue => Ensemble::Gue,
                _ => Ensemble::Gse,
            };
            EnsembleConfig::new(e, need(a.n, "n")?, a.reps, a.seed, a.top_k)
        }
    };
    run_ensemble(cfg, &a.percentiles, solver)
}

pub fn wishart(a: &WishartArgs, solver: &SolverConfig) -> CliResult<Report> {
    let cfg = EnsembleConfig::wishart(a.rows, a.cols, a.reps, a.seed, a.top_k);
    run_ensemble(cfg, &a.percentiles, solver)
}

/// Reads the first `rep,k,lhat` block of a CSV file into per-index columns.
pub fn read_samples(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Usage(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["rep", "k", "lhat"] {
        return Err(CliError::Usage(format!("{} does not start with a rep,k,lhat block", path.display())));
    }
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Usage(e.to_string()))?;
        if record.len() != 3 {
            break;
        }
        let parsed = (record[1].parse::<usize>(), record[2].parse::<f64>());
        let (Ok(k), Ok(v)) = parsed else { break };
        if k == 0 {
            return Err(CliError::Usage("eigenvalue index k starts at 1".into()));
        }
        if columns.len() < k {
            columns.resize(k, Vec::new());
        }
        columns[k - 1].push(v);
    }
    if columns.is_empty() {
        return Err(CliError::Usage(format!("no samples in {}", path.display())));
    }
    Ok(columns)
}

pub fn percentiles(a: &PercentilesArgs, solver: &SolverConfig) -> CliResult<Report> {
    let beta = parse_beta(&a.beta)?;
    let columns = read_samples(&a.input)?;
    let tables = theoretical_tables(beta, columns.len(), solver)?;
    let report = rmt::percentile_report(&columns, &tables, &a.percentiles)?;
    Ok(Report::new(
        percentile_csv(&report),
        serde_json::to_value(&report).expect("report serializes"),
    ))
}

struct Outcome {
    check: &'static str,
    quantity: String,
    residual: f64,
    threshold: f64,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.residual <= self.threshold
    }
}

fn check_aj(out: &mut Vec<Outcome>) -> CliResult<()> {
    let seq = aj_sequence(8)?;
    out.push(Outcome {
        check: "aj",
        quantity: "max relative gap for j <= 8".into(),
        residual: seq.max_relative_gap(),
        threshold: 1e-12,
    });
    Ok(())
}

fn check_asymptotics(sol: &PainleveSolution, out: &mut Vec<Outcome>) -> CliResult<()> {
    let k = sol
        .index_of(-8.0)
        .ok_or_else(|| CliError::Usage("x = -8 is not on the solver grid".into()))?;
    let q0 = q0_asymptotic(16.0)?;
    let q1 = q1_asymptotic(16.0)?;
    out.push(Outcome {
        check: "asymptotics",
        quantity: "relative q0 gap at x=-8".into(),
        residual: ((sol.q()[k].coeff(0) - q0) / q0).abs(),
        threshold: 1e-6,
    });
    if sol.order() >= 1 {
        out.push(Outcome {
            check: "asymptotics",
            quantity: "relative q1 gap at x=-8".into(),
            residual: ((sol.q()[k].coeff(1) - q1) / q1).abs(),
            threshold: 1e-4,
        });
    }
    Ok(())
}

fn check_oracle(sol: &PainleveSolution, config: &SolverConfig, out: &mut Vec<Outcome>) -> CliResult<()> {
    let lattice = [-6.0, -4.0, -2.0, 0.0, 2.0, 4.0];
    let mut worst = 0.0f64;
    for s in lattice {
        let p = dist::d2_jet(s, sol)?.value();
        worst = worst.max((p - nystrom_d2(s, 1.0, DEFAULT_NODES)?).abs());
    }
    out.push(Outcome {
        check: "oracle",
        quantity: "D2 at lambda=1".into(),
        residual: worst,
        threshold: 1e-8,
    });
    let half = solve_at_lambda(0.5, config).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut worst = 0.0f64;
    for s in lattice {
        worst = worst.max((half.d2(s)? - nystrom_d2(s, 0.5, DEFAULT_NODES)?).abs());
    }
    out.push(Outcome {
        check: "oracle",
        quantity: "D2 at lambda=0.5".into(),
        residual: worst,
        threshold: 1e-6,
    });
    let mut worst = 0.0f64;
    for s in [-2.0, 0.0] {
        worst = worst.max((dist::d4_jet(s, sol)?.value() - nystrom_d4(s, DEFAULT_NODES)?).abs());
    }
    out.push(Outcome {
        check: "oracle",
        quantity: "D4 at lambda=1".into(),
        residual: worst,
        threshold: 1e-6,
    });
    Ok(())
}

fn check_interlacing(sol: &PainleveSolution, m: Option<usize>, out: &mut Vec<Outcome>) -> CliResult<()> {
    let indices: Vec<usize> = match m {
        Some(m) => vec![m],
        None => vec![1, 2],
    };
    for m in indices {
        out.push(Outcome {
            check: "interlacing",
            quantity: format!("sup |F4 at m={m} - F1 at m={}|", 2 * m),
            residual: dist::interlacing_residual(m, sol)?,
            threshold: if m == 1 { 1e-5 } else { 1e-4 },
        });
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs, config: &SolverConfig) -> CliResult<Report> {
    let mut outcomes = Vec::new();
    let wants = |c: Check| a.check == c || a.check == Check::All;
    if wants(Check::Aj) {
        check_aj(&mut outcomes)?;
    }
    if wants(Check::Asymptotics) || wants(Check::Oracle) || wants(Check::Interlacing) {
        let sol = solution(config)?;
        if wants(Check::Asymptotics) {
            check_asymptotics(&sol, &mut outcomes)?;
        }
        if wants(Check::Oracle) {
            check_oracle(&sol, config, &mut outcomes)?;
        }
        if wants(Check::Interlacing) {
            check_interlacing(&sol, a.m, &mut outcomes)?;
        }
    }
    let mut csv = String::from("check,quantity,residual,threshold,pass\n");
    let mut rows = Vec::new();
    for o in &outcomes {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            o.check,
            o.quantity,
            format_sci(o.residual),
            format_sci(o.threshold),
            o.passed()
        );
        rows.push(json!({
            "check": o.check,
            "quantity": o.quantity,
            "residual": o.residual,
            "threshold": o.threshold,
            "pass": o.passed(),
        }));
    }
    let mut report = Report::new(csv, json!({ "checks": rows }));
    if let Some(bad) = outcomes.iter().find(|o| !o.passed()) {
        report.failure = Some(format!(
            "{} ({}): residual {:e} exceeds {:e}",
            bad.check, bad.quantity, bad.residual, bad.threshold
        ));
    }
    Ok(report)
}
