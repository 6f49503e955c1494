mod args;
mod input;

use std::fs;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use perm_moments::asymptotics::{asymptotic_expect, reduction_check, ReductionReport};
use perm_moments::classfun::{expect_gf, moments_of, AngleDistribution, CoeffGrid, MomentTable, Randomization};
use perm_moments::feller::{default_length, mc_expect_w1, mc_expect_w1_infinity, FellerEstimate};
use perm_moments::groups::{brute_force_group, expect_group_exact, expect_group_gf, GroupKind, Observable};
use perm_moments::verify::{run_suite, Suite};
use serde::Serialize;

use args::{Cli, Command, ExpectArgs, Format, OutputArgs, Route, SimulateArgs, TableArgs, VerifyArgs};
use input::{CliError, CliResult};

#[derive(Debug, Clone, Copy, Serialize)]
struct C {
    re: f64,
    im: f64,
}

impl From<Complex64> for C {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: &'a str,
    kind: &'a str,
    message: &'a str,
}

fn diagnose(e: &CliError) {
    let d = Diagnostic { error: e.class, kind: e.kind, message: &e.message };
    eprintln!("{}", serde_json::to_string(&d).expect("plain strings serialize"));
}

fn name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default()
}

fn emit(out: &OutputArgs, text: &str) -> CliResult<()> {
    let mut text = text.to_owned();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &out.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError { class: "validation", kind: "io", message: format!("{}: {e}", path.display()) }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError { class: "internal", kind: "io", message: e.to_string() })
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("records serialize")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct ExpectRecord {
    command: &'static str,
    group: String,
    route: String,
    variant: String,
    n: usize,
    x1: C,
    x2: C,
    value: C,
    stderr: Option<f64>,
    trials: Option<u64>,
    seed: Option<u64>,
    truncation_bound: Option<f64>,
}

fn moments_for(f: &CoeffGrid, dist: &AngleDistribution) -> CliResult<MomentTable> {
    let (k1, k2) = f.bounds();
    Ok(moments_of(dist, k1, k2)?)
}

fn require_symmetric(group: GroupKind, what: &str) -> CliResult<()> {
    if group != GroupKind::SymmetricS {
        return Err(CliError::validation(format!("{what} is available for --group s only")));
    }
    Ok(())
}

/// `f̃` for the Feller routes, which take `θ ≡ 1`.
fn folded_univariate(obs: &Observable, dist: &AngleDistribution, variant: Randomization) -> CliResult<CoeffGrid> {
    if variant != Randomization::W1 {
        return Err(CliError::validation("the Feller routes randomize per cycle; use --variant w1"));
    }
    let f = obs.grid();
    Ok(f.fold_moments(&moments_for(&f, dist)?)?)
}

fn check_tolerance(tolerance: Option<f64>, bound: Option<f64>) -> CliResult<()> {
    let Some(tolerance) = tolerance else {
        return Ok(());
    };
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(CliError::validation("--tolerance must be non-negative"));
    }
    match bound {
        Some(bound) if bound > tolerance => Err(perm_moments::Error::TruncationExceeded { bound, tolerance }.into()),
        _ => Ok(()),
    }
}

fn cmd_expect(a: &ExpectArgs) -> CliResult<()> {
    let obs = input::observable(&a.f)?;
    let x = input::point(&a.x)?;
    let dist = input::distribution(&a.dist)?;
    let variant = input::variant(a.dist.variant);
    let group = input::group(a.group);
    let order = a.order.unwrap_or(a.n);
    let f = obs.grid();

    let none = (None, None, None);
    let (value, bound, (stderr, trials, seed)) = match a.route {
        Route::Exact => (expect_group_exact(group, &obs, &dist, variant, &x, a.n)?, None, none),
        Route::Gf if group == GroupKind::SymmetricS => {
            let v = expect_gf(&f, &moments_for(&f, &dist)?, variant, &x, a.n, order)?;
            (v.value, Some(v.truncation_bound), none)
        }
        Route::Gf => (expect_group_gf(group, &obs, &dist, variant, &x, a.n, order)?, None, none),
        Route::Mc => {
            require_symmetric(group, "the Feller route")?;
            if a.trials == 0 {
                return Err(CliError::validation("--trials must be positive"));
            }
            let folded = folded_univariate(&obs, &dist, variant)?;
            let e = mc_expect_w1(&folded, x.x1, a.n, a.trials, a.seed)?;
            (e.value(), None, (Some(e.stderr), Some(e.trials), Some(a.seed)))
        }
        Route::Brute => {
            if a.trials == 0 {
                return Err(CliError::validation("--trials must be positive"));
            }
            let e = brute_force_group(group, &obs, &dist, variant, &x, a.n, a.trials, a.seed)?;
            (e.mean, None, (Some(e.stderr), Some(e.trials), Some(a.seed)))
        }
        Route::Asym => {
            require_symmetric(group, "the asymptotic route")?;
            let r = asymptotic_expect(&f, &moments_for(&f, &dist)?, variant, &x, a.n)?;
            (r.leading, Some(r.constant_tail_bound), none)
        }
    };
    let record = ExpectRecord {
        command: "expect",
        group: name(&a.group),
        route: name(&a.route),
        variant: name(&a.dist.variant),
        n: a.n,
        x1: x.x1.into(),
        x2: x.x2.into(),
        value: value.into(),
        stderr,
        trials,
        seed,
        truncation_bound: bound,
    };
    check_tolerance(a.tolerance, bound)?;
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&record),
        Format::Csv => format!(
            "group,route,variant,n,value_re,value_im,stderr,truncation_bound\n{},{},{},{},{:e},{:e},{},{}",
            record.group, record.route, record.variant, record.n, value.re, value.im, opt(stderr), opt(bound)
        ),
    };
    emit(&a.output, &text)
}

#[derive(Serialize)]
struct TableRow {
    n: usize,
    expect: C,
    asym: C,
    ratio_abs: Option<f64>,
}

fn cmd_table(a: &TableArgs) -> CliResult<()> {
    let obs = input::observable(&a.f)?;
    let x = input::point(&a.x)?;
    let dist = input::distribution(&a.dist)?;
    let variant = input::variant(a.dist.variant);
    let ns = input::n_range(&a.n_range)?;
    let f = obs.grid();
    let alpha = moments_for(&f, &dist)?;
    let report = if ns.is_empty() {
        perm_moments::classfun::check_strict_domain(&f, &x)?;
        None
    } else {
        Some(reduction_check(&f, &alpha, variant, &x, &ns)?)
    };
    let rows = report.as_ref().map(|r| r.rows.as_slice()).unwrap_or(&[]);
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => report.as_ref().map(ReductionReport::to_csv).unwrap_or_else(|| ReductionReport::CSV_HEADER.to_owned()),
        Format::Json => json(
            &rows
                .iter()
                .map(|r| TableRow {
                    n: r.n,
                    expect: r.expect.into(),
                    asym: r.asym.into(),
                    ratio_abs: r.ratio_abs.is_finite().then_some(r.ratio_abs),
                })
                .collect::<Vec<_>>(),
        ),
    };
    emit(&a.output, &text)
}

#[derive(Serialize)]
struct VerifyRecord<'a> {
    command: &'static str,
    passed: bool,
    #[serde(flatten)]
    report: &'a perm_moments::verify::SuiteReport,
}

fn csv_field(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<()> {
    let suite: Suite = a.suite.parse().map_err(|_| {
        let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
        CliError::validation(format!("unknown suite {:?}; expected one of {}", a.suite, names.join(", ")))
    })?;
    let report = run_suite(suite, a.seed)?;
    let passed = report.passed();
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&VerifyRecord { command: "verify", passed, report: &report }),
        Format::Csv => {
            let mut s = String::from("suite,property,passed,detail\n");
            for p in &report.properties {
                s.push_str(&format!("{},{},{},{}\n", report.suite, p.property, p.passed, csv_field(&p.detail)));
            }
            s
        }
    };
    emit(&a.output, &text)?;
    if !passed {
        let failed: Vec<_> = report.properties.iter().filter(|p| !p.passed).map(|p| p.property.as_str()).collect();
        return Err(CliError { class: "numerical", kind: "verification_failed", message: failed.join(", ") });
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<()> {
    let obs = input::observable(&a.f)?;
    let x = input::point(&a.x)?;
    let dist = input::distribution(&a.dist)?;
    if a.trials == 0 {
        return Err(CliError::validation("--trials must be positive"));
    }
    let folded = folded_univariate(&obs, &dist, input::variant(a.dist.variant))?;
    let e: FellerEstimate = match a.n {
        Some(n) => {
            if a.length.is_some_and(|l| l != n) {
                return Err(CliError::validation("for finite n the sample length is n; --length applies to --limit"));
            }
            mc_expect_w1(&folded, x.x1, n, a.trials, a.seed)?
        }
        None => {
            let len = a.length.unwrap_or_else(|| default_length(0));
            if len == 0 {
                return Err(CliError::validation("--length must be positive"));
            }
            mc_expect_w1_infinity(&folded, x.x1, len, a.trials, a.seed)?
        }
    };
    check_tolerance(a.tolerance, Some(e.tail_bound))?;
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&e),
        Format::Csv => format!(
            "value_re,value_im,stderr,trials,seed,L,tail_bound\n{:e},{:e},{:e},{},{},{},{:e}",
            e.value_re, e.value_im, e.stderr, e.trials, e.seed, e.length, e.tail_bound
        ),
    };
    emit(&a.output, &text)
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("PERM_MOMENTS_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::validation(format!("PERM_MOMENTS_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError { class: "internal", kind: "thread_pool", message: e.to_string() })
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Expect(a) => cmd_expect(a),
        Command::Table(a) => cmd_table(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            diagnose(&CliError { class: "validation", kind: "usage", message: message.trim().to_owned() });
            return ExitCode::from(2);
        }
    };
    panic::set_hook(Box::new(|info| {
        diagnose(&CliError { class: "internal", kind: "panic", message: info.to_string() });
    }));
    match panic::catch_unwind(AssertUnwindSafe(|| run(&cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            diagnose(&e);
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(4),
    }
}
