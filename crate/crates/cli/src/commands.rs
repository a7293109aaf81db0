use std::fs;
use std::path::Path;

use stekloff_core::ball::{self, Family};
use stekloff_core::blockop::penalty::DEFAULT_LAMBDAS;
use stekloff_core::blockop::{
    self, make_model, Blocks, Dims, DiscreteModel, ModelFile, Side, SpectralKnobs, VerifyReport,
};
use stekloff_core::radial::{self, Problem};
use stekloff_core::{sweep, Error as CoreError, Execution};

use crate::config::{Format, ProblemArg, RunConfig, SideArg};
use crate::error::CliError;
use crate::output::{output_dir, write_json, Table};

pub const DEFAULT_OMEGA: f64 = 1.0;
pub const DEFAULT_N_MAX: i64 = 10;
pub const DEFAULT_DIMS: [usize; 3] = [20, 20, 10];
pub const DEFAULT_SEEDS: u64 = 10;
pub const DEFAULT_GRID: usize = 101;
pub const DEFAULT_BASIS: usize = 32;
/// Basis sizes of the convergence rows written by `modified`.
pub const CONVERGENCE_SIZES: [usize; 4] = [4, 8, 16, 32];

fn format_of(c: &RunConfig) -> Format {
    c.format.unwrap_or(Format::Csv)
}

/// Lists the files written, one per line.
pub type Written = Vec<std::path::PathBuf>;

pub fn ball_spectrum(c: &RunConfig) -> Result<Written, CliError> {
    let omega = c.omega.unwrap_or(DEFAULT_OMEGA);
    let n_max = c.n_max.unwrap_or(DEFAULT_N_MAX);
    if n_max < 1 {
        return Err(CliError::Usage(format!("--n-max must be >= 1, got {n_max}")));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(CoreError::Domain(format!("omega must be finite and > 0, got {omega}")).into());
    }
    let mut poles: Vec<String> = Vec::new();
    for n in 1..=n_max {
        for (fam, r) in [
            (Family::TE, ball::te_eigenvalue(n, omega)),
            (Family::TM, ball::tm_eigenvalue(n, omega)),
        ] {
            match r {
                Err(CoreError::Pole { .. }) => poles.push(format!("{fam} {n}")),
                Err(e) => return Err(e.into()),
                Ok(_) => {}
            }
        }
    }
    if !poles.is_empty() {
        return Err(CoreError::Domain(format!(
            "omega = {omega} is a pole frequency for degrees: {}",
            poles.join(", ")
        ))
        .into());
    }
    let modes = ball::ball_spectrum(omega, n_max)?;
    let mut t = Table::new(&["family", "degree", "omega", "lambda", "multiplicity", "residual"]);
    for m in modes {
        t.push(vec![
            m.mode.family.to_string().into(),
            m.mode.degree.into(),
            m.omega.unwrap_or(omega).into(),
            m.lambda.into(),
            m.multiplicity.into(),
            m.residual.into(),
        ]);
    }
    let dir = output_dir(c.out.as_deref())?;
    Ok(vec![t.write(&dir, "ball_spectrum", format_of(c))?])
}

/// Loads `--model` (a file or a built-in name) or builds a random model.
fn load_model(c: &RunConfig, seed: u64) -> Result<DiscreteModel, CliError> {
    let omega = c.omega.unwrap_or(DEFAULT_OMEGA);
    match c.model.as_deref() {
        Some("example-golden") => Ok(DiscreteModel::example_golden().with_omega(omega)?),
        Some("example-empty") => Ok(DiscreteModel::example_empty().with_omega(omega)?),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            let file: ModelFile = serde_json::from_str(&text)
                .map_err(|e| CoreError::Domain(format!("{path}: malformed model file: {e}")))?;
            Ok(file.into_model(c.omega)?)
        }
        None => {
            let [v, w1, w2] = c.dims.unwrap_or(DEFAULT_DIMS);
            Ok(make_model(
                Dims::new(v, w1, w2),
                seed,
                omega,
                &SpectralKnobs::default(),
            )?)
        }
    }
}

fn model_label(c: &RunConfig, seed: u64) -> String {
    match c.model.as_deref() {
        Some(name @ ("example-golden" | "example-empty")) => name.replace('-', "_"),
        Some(path) => Path::new(path)
            .file_stem()
            .map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned()),
        None => format!("seed{seed}"),
    }
}

pub fn model_verify(c: &RunConfig) -> Result<Written, CliError> {
    let seeds: Vec<u64> = match (&c.model, &c.seeds) {
        (Some(_), _) => vec![0],
        (None, Some(s)) => s.clone(),
        (None, None) => (0..DEFAULT_SEEDS).collect(),
    };
    let dir = output_dir(c.out.as_deref())?;
    let results = sweep::map(Execution::best(), &seeds, |&seed| -> Result<VerifyReport, CliError> {
        let model = load_model(c, seed)?;
        Ok(blockop::verify_model(&model, &DEFAULT_LAMBDAS, Execution::best())?)
    });
    let mut written = Vec::new();
    let mut failures = Vec::new();
    for (seed, r) in seeds.iter().zip(results) {
        let report = r?;
        let label = model_label(c, *seed);
        let path = dir.join(format!("model_verify_{label}.json"));
        write_json(&path, &report)?;
        written.push(path);
        let audit_failures: Vec<&String> = report.audits.iter().filter(|(_, e)| !e.pass).map(|(k, _)| k).collect();
        if !audit_failures.is_empty() {
            eprintln!("{label}: audit failures recorded: {audit_failures:?}");
        }
        for f in report.failures() {
            failures.push(format!("{label}: {f}"));
        }
    }
    if failures.is_empty() {
        Ok(written)
    } else {
        for p in &written {
            println!("{}", p.display());
        }
        Err(CliError::Disagreement(failures.join("; ")))
    }
}

fn side_of(c: &RunConfig) -> Side {
    match c.side.unwrap_or(SideArg::W1) {
        SideArg::W1 => Side::W1,
        SideArg::V => Side::V,
    }
}

pub fn tau_curves(c: &RunConfig) -> Result<Written, CliError> {
    let seed = c.seeds.as_ref().and_then(|s| s.first().copied()).unwrap_or(0);
    let model = load_model(c, seed)?;
    let side = side_of(c);
    let b = Blocks::new(&model)?;
    let window = match c.window {
        Some(w) => w,
        None => match side {
            Side::W1 => {
                let r = 0.9 * b.w1_validity().min(1e3);
                (-r, r)
            }
            Side::V => (0.0, 0.9 * b.v_validity().min(1e3)),
        },
    };
    let n = c.grid.unwrap_or(DEFAULT_GRID);
    if n < 2 {
        return Err(CliError::Usage(format!("--grid must be >= 2, got {n}")));
    }
    let grid: Vec<f64> = (0..n)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (n - 1) as f64)
        .collect();
    let curves = blockop::tau::tau_curves_with(&b, side, &grid, None, Execution::best())?;
    let roots = blockop::tau::fixed_point_eigensolve_with(&b, side, window, None, Execution::best())?;

    let mut t = Table::new(&["side", "branch", "lambda", "tau"]);
    for cv in &curves {
        for &(l, tau) in &cv.samples {
            t.push(vec![side.to_string().into(), cv.branch.into(), l.into(), tau.into()]);
        }
    }
    let mut f = Table::new(&["side", "branch", "lambda_star"]);
    for r in &roots.roots {
        f.push(vec![side.to_string().into(), r.branch.into(), r.lambda_star.into()]);
    }
    let dir = output_dir(c.out.as_deref())?;
    let fmt = format_of(c);
    Ok(vec![
        t.write(&dir, "tau_curves", fmt)?,
        f.write(&dir, "fixed_points", fmt)?,
    ])
}

pub fn modified(c: &RunConfig) -> Result<Written, CliError> {
    let n_max = c.n_max.unwrap_or(DEFAULT_N_MAX);
    if n_max < 1 {
        return Err(CliError::Usage(format!("--n-max must be >= 1, got {n_max}")));
    }
    let m = c.basis.unwrap_or(DEFAULT_BASIS);
    let omega = c.omega.unwrap_or(DEFAULT_OMEGA);
    let problems: Vec<Problem> = match c.problem.unwrap_or(ProblemArg::Both) {
        ProblemArg::ScalarLb => vec![Problem::ScalarLB],
        ProblemArg::SProjection => vec![Problem::SProjection],
        ProblemArg::Both => vec![Problem::ScalarLB, Problem::SProjection],
    };
    let jobs: Vec<(Problem, i64)> = problems
        .iter()
        .flat_map(|&p| (1..=n_max).map(move |n| (p, n)))
        .collect();
    let solved = sweep::map(Execution::best(), &jobs, |&(p, n)| match p {
        Problem::ScalarLB => radial::scalar_lb_solve(n, m),
        _ => radial::s_projection_solve(n, omega, m),
    });
    let mut t = Table::new(&["problem", "degree", "basis_size", "lambda"]);
    for r in solved {
        let r = r?;
        for &l in &r.eigenvalues {
            t.push(vec![
                r.problem.to_string().into(),
                r.degree.into(),
                r.basis_size.into(),
                l.into(),
            ]);
        }
    }
    let studies = sweep::map(Execution::best(), &jobs, |&(p, n)| {
        radial::convergence_study(p, n, omega, &CONVERGENCE_SIZES)
    });
    let mut cv = Table::new(&["problem", "degree", "basis_size", "lambda", "reference", "error"]);
    for rows in studies {
        for r in rows? {
            cv.push(vec![
                r.problem.to_string().into(),
                r.degree.into(),
                r.basis_size.into(),
                r.lambda.into(),
                r.reference.into(),
                r.error.into(),
            ]);
        }
    }
    let dir = output_dir(c.out.as_deref())?;
    let fmt = format_of(c);
    Ok(vec![
        t.write(&dir, "modified", fmt)?,
        cv.write(&dir, "modified_convergence", fmt)?,
    ])
}
