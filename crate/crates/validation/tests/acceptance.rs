use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use edgedist::dist::{cdf, interlacing_residual, moment_grid, moments, Beta, DistRequest, DistTable};
use edgedist::jet::aj_sequence;
use edgedist::oracle::{nystrom_d2, nystrom_d4};
use edgedist::painleve::{format_sci, q0_asymptotic, q1_asymptotic, solve, solve_at_lambda, PainleveSolution, SolverConfig};
use edgedist::rmt::{ks_distance, percentile_report, simulate, table_cdf, Ensemble, EnsembleConfig, SimulationRun};
use edgedist_validation::{Checks, Verdict};

const PERCENTILES: [f64; 3] = [0.90, 0.95, 0.99];

fn moment_table(beta: Beta, m: usize, sol: &PainleveSolution) -> DistTable {
    let mut req = DistRequest::new(beta, m);
    req.s_grid = moment_grid();
    cdf(&req, sol).expect("moment table")
}

fn check_moments(checks: &mut Checks, beta: Beta, rows: &[[f64; 4]], tol: f64, sol: &PainleveSolution) {
    for (k, want) in rows.iter().enumerate() {
        let m = k + 1;
        let s = moments(&moment_table(beta, m, sol)).expect("moments");
        let got = [s.mean, s.sd, s.skewness, s.kurtosis];
        for (name, (g, w)) in ["mean", "sd", "skewness", "kurtosis"].iter().zip(got.iter().zip(want)) {
            checks.close(format!("β={beta} m={m} {name} {g:.6}"), *g, *w, tol);
        }
    }
}

fn criterion_1() -> Checks {
    let start = Instant::now();
    let sol = solve(&SolverConfig::default()).expect("solve");
    let mut c = Checks::new();
    check_moments(
        &mut c,
        Beta::Two,
        &[[-1.771087, 0.901773, 0.224084, 0.093448], [-3.675440, 0.735214, 0.125000, 0.021650]],
        1e-3,
        &sol,
    );
    c.bound("solve and quadrature seconds", start.elapsed().as_secs_f64(), 60.0);
    c
}

fn criterion_2(sol: &PainleveSolution) -> Checks {
    let mut c = Checks::new();
    check_moments(
        &mut c,
        Beta::One,
        &[
            [-1.206548, 1.267941, 0.293115, 0.163186],
            [-3.262424, 1.017574, 0.165531, 0.049262],
            [-4.821636, 0.906849, 0.117557, 0.019506],
            [-6.162036, 0.838537, 0.092305, 0.007802],
        ],
        2e-3,
        sol,
    );
    c
}

fn criterion_3(sol: &PainleveSolution) -> Checks {
    let mut c = Checks::new();
    c.bound("m=1 residual", interlacing_residual(1, sol).expect("m=1"), 1e-5);
    c.bound("m=2 residual", interlacing_residual(2, sol).expect("m=2"), 1e-4);
    c
}

fn criterion_4(sol: &PainleveSolution) -> Checks {
    let mut c = Checks::new();
    let half = solve_at_lambda(0.5, sol.config()).expect("λ = 0.5 profile");
    for s in [-6.0, -4.0, -2.0, 0.0, 2.0, 4.0] {
        let i0 = sol.integrals_at(s).expect("integrals").i.value();
        c.close(format!("D2 λ=1 s={s}"), (-i0).exp(), nystrom_d2(s, 1.0, 200).expect("nyström"), 1e-8);
        c.close(
            format!("D2 λ=0.5 s={s}"),
            half.d2(s).expect("λ = 0.5 value"),
            nystrom_d2(s, 0.5, 200).expect("nyström"),
            1e-6,
        );
    }
    for s in [-2.0, 0.0] {
        let ints = sol.integrals_at(s).expect("integrals");
        let painleve = (-ints.i.value()).exp() * (0.5 * ints.j.value()).cosh().powi(2);
        c.close(format!("D4 s={s}"), painleve, nystrom_d4(s, 200).expect("nyström"), 1e-6);
    }
    c
}

fn criterion_5(sol: &PainleveSolution) -> Checks {
    let mut c = Checks::new();
    let k = sol.index_of(-8.0).expect("grid point at -8");
    c.close_relative("q0 at -8", sol.q()[k].coeff(0), q0_asymptotic(16.0).expect("q0"), 1e-6);
    c.close_relative("q1 at -8", sol.q()[k].coeff(1), q1_asymptotic(16.0).expect("q1"), 1e-4);
    c
}

fn criterion_6() -> Checks {
    let mut c = Checks::new();
    c.bound("max relative gap, j <= 8", aj_sequence(8).expect("aj").max_relative_gap(), 1e-12);
    c
}

fn wishart_block(c: &mut Checks, n: usize, p: usize, reps: u64, seed: u64, want: [[f64; 3]; 3], tol: f64, tables: &[DistTable]) {
    let run = simulate(&EnsembleConfig::wishart(n, p, reps, seed, 3)).expect("wishart run");
    c.require(format!("{n}x{p} replicate failures"), run.failures.is_empty());
    let columns: Vec<Vec<f64>> = (0..3).map(|k| run.column(k)).collect();
    let report = percentile_report(&columns, tables, &PERCENTILES).expect("percentiles");
    for (row, want_row) in report.rows.iter().zip(want) {
        for (j, (got, w)) in row.proportions.iter().zip(want_row).enumerate() {
            c.close(format!("{n}x{p} λ{} p={}", j + 1, row.percentile), *got, w, tol);
        }
    }
}

fn criterion_7(sol: &PainleveSolution) -> Checks {
    let tables: Vec<DistTable> = (1..=3).map(|m| cdf(&DistRequest::new(Beta::One, m), sol).expect("table")).collect();
    let mut c = Checks::new();
    // Rows are percentiles 0.90, 0.95, 0.99; columns λ₁, λ₂, λ₃.
    wishart_block(
        &mut c,
        100,
        100,
        10_000,
        2024,
        [[0.902, 0.891, 0.901], [0.951, 0.948, 0.950], [0.992, 0.991, 0.991]],
        0.02,
        &tables,
    );
    wishart_block(
        &mut c,
        400,
        100,
        5_000,
        2025,
        [[0.898, 0.894, 0.884], [0.947, 0.950, 0.941], [0.989, 0.991, 0.989]],
        0.025,
        &tables,
    );
    c
}

fn criterion_8(sol: &PainleveSolution) -> Checks {
    let run = simulate(&EnsembleConfig::new(Ensemble::Goe, 400, 5000, 400, 4)).expect("goe run");
    let mut c = Checks::new();
    c.require("GOE replicate failures", run.failures.is_empty());
    for m in 1..=4 {
        let table = cdf(&DistRequest::new(Beta::One, m), sol).expect("table");
        let ks = ks_distance(&run.column(m - 1), |s| table_cdf(&table, s));
        c.bound(format!("KS m={m}"), ks, 0.05);
    }
    c
}

fn sample_csv(run: &SimulationRun) -> String {
    let mut out = String::from("rep,k,lhat\n");
    for (rep, s) in &run.samples {
        for (k, v) in s.scaled_top.iter().enumerate() {
            let _ = writeln!(out, "{rep},{},{}", k + 1, format_sci(*v));
        }
    }
    out
}

fn second_difference(v: &[f64], i: usize, h: f64) -> f64 {
    (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] + 16.0 * v[i + 1] - v[i + 2]) / (12.0 * h * h)
}

fn criterion_9(sol: &PainleveSolution) -> Checks {
    let mut c = Checks::new();
    let families = [(Beta::One, 4), (Beta::Two, 2), (Beta::Four, 2)];
    for (beta, top) in families {
        for tw in [false, true] {
            if tw && beta != Beta::Four {
                continue;
            }
            let mut prev: Option<DistTable> = None;
            for m in 1..=top {
                let mut req = DistRequest::new(beta, m);
                req.tw_convention = tw;
                let t = cdf(&req, sol).expect("table");
                let tag = format!("β={beta}{} m={m}", if tw { " tw" } else { "" });
                c.require(
                    format!("{tag} F in [0,1]"),
                    t.rows.iter().all(|r| (0.0..=1.0).contains(&r.cdf)),
                );
                c.require(
                    format!("{tag} F nondecreasing"),
                    t.rows.windows(2).all(|w| w[1].cdf >= w[0].cdf),
                );
                if let Some(p) = &prev {
                    c.require(
                        format!("{tag} F(s,m) >= F(s,m-1)"),
                        p.rows.iter().zip(&t.rows).all(|(a, b)| b.cdf >= a.cdf),
                    );
                }
                let h = t.rows[1].s - t.rows[0].s;
                let integral: f64 = t.rows.windows(2).map(|w| 0.5 * h * (w[0].density + w[1].density)).sum();
                let range = t.rows[t.rows.len() - 1].cdf - t.rows[0].cdf;
                c.close(format!("{tag} density mass"), integral, range, 1e-6);
                prev = Some(t);
            }
        }
    }

    let h = sol.config().grid_step;
    let q0: Vec<f64> = sol.q().iter().map(|j| j.coeff(0)).collect();
    let q1: Vec<f64> = sol.q().iter().map(|j| j.coeff(1)).collect();
    let (mut r0, mut r1) = (0.0f64, 0.0f64);
    for i in 2..sol.grid().len() - 2 {
        let x = sol.grid()[i];
        r0 = r0.max((second_difference(&q0, i, h) - x * q0[i] - 2.0 * q0[i].powi(3)).abs());
        let rhs = x * q1[i] + 6.0 * q0[i] * q0[i] * q1[i];
        let scale = q1[i].abs().max(rhs.abs()).max(1e-300);
        r1 = r1.max(((second_difference(&q1, i, h) - rhs) / scale).abs());
    }
    c.bound("Painlevé II residual", r0, 1e-8);
    c.bound("variational relative residual", r1, 1e-7);
    c.require("Hastings–McLeod positivity", q0.iter().all(|v| *v > 0.0));

    let cfg = EnsembleConfig::new(Ensemble::Goe, 60, 200, 99, 3);
    let a = sample_csv(&simulate(&cfg).expect("run"));
    let b = sample_csv(&simulate(&cfg).expect("rerun"));
    c.require("bit-identical rerun", a == b);
    c
}

fn run(id: u32, title: &'static str, f: impl FnOnce() -> Checks) -> Verdict {
    let start = Instant::now();
    let checks = f();
    let v = Verdict {
        id,
        title,
        passed: checks.passed(),
        detail: checks.summary(),
        elapsed: start.elapsed(),
    };
    println!("{v}");
    v
}

fn main() -> ExitCode {
    let start = Instant::now();
    let sol = solve(&SolverConfig::default()).expect("default solve");
    let sol_time = start.elapsed().as_secs_f64();
    println!("acceptance: Painlevé solve in {sol_time:.2} s");

    let verdicts = [
        run(1, "β=2 moments", criterion_1),
        run(2, "β=1 moments", || criterion_2(&sol)),
        run(3, "interlacing", || criterion_3(&sol)),
        run(4, "Fredholm oracle", || criterion_4(&sol)),
        run(5, "asymptotic patching", || criterion_5(&sol)),
        run(6, "jet algebra", criterion_6),
        run(7, "Wishart percentiles", || criterion_7(&sol)),
        run(8, "GOE edge KS", || criterion_8(&sol)),
        run(9, "property suite", || criterion_9(&sol)),
    ];
    let failed: Vec<u32> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", verdicts.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
