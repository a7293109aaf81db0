//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p stekloff-cli --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use stekloff_core::ball::{self, Family};
use stekloff_core::blockop::lemma::random_pair;
use stekloff_core::blockop::model::block;
use stekloff_core::blockop::penalty::{random_rhs, DEFAULT_LAMBDAS};
use stekloff_core::blockop::verify::{v_agreement, w1_agreement};
use stekloff_core::blockop::{
    abstract_lemma_check, direct_solve, fixed_point_eigensolve, gap_check, gap_constants, make_model,
    penalty_experiment, Blocks, Dims, DiscreteModel, Side, SpectralKnobs,
};
use stekloff_core::radial::{self, Problem};
use stekloff_core::specfun::sph_bessel_series_path;
use stekloff_core::{linalg, Execution};

// Pinned tolerances and limits.
const BALL_N_MAX: i64 = 40;
const TM_TAIL_MAX: f64 = 0.03;
const TE_TAIL_MIN: f64 = 40.0;
const BALL_SECONDS: f64 = 1.0;
const RESIDUAL_TOL: f64 = 1e-9;
const SECOND_PATH_TOL: f64 = 1e-10;
const TM_1_QUOTED: f64 = -0.5574073;
const TE_1_QUOTED: f64 = 1.7940186;
const QUOTED_TOL: f64 = 1e-6;
const GAP_MODELS: u64 = 100;
const GAP_SECONDS: f64 = 30.0;
const AGREEMENT_MODELS: u64 = 50;
const AGREEMENT_MAX_DIM: usize = 60;
const AGREEMENT_TOL: f64 = 1e-8;
const HAND_ROOT_TOL: f64 = 1e-12;
const LEMMA_PAIRS: u64 = 50;
const LEMMA_MAX_DIM: usize = 40;
const LEMMA_TOL: f64 = 1e-9;
const PENALTY_MODELS: u64 = 10;
const PENALTY_SLOPE: f64 = -1.0;
const PENALTY_SLOPE_TOL: f64 = 0.1;
const KTILDE_TOL: f64 = 1e-13;
const RANK_TOL: f64 = 1e-9;
const SCALAR_TOL: f64 = 1e-10;
const TE_RADIAL_TOL: f64 = 1e-6;
const TE_RADIAL_BASIS: usize = 32;
const TE_RADIAL_N_MAX: i64 = 10;
const ACCUMULATION_W1: [usize; 3] = [10, 40, 160];
const ACCUMULATION_BAND: f64 = 0.05;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn knobs() -> SpectralKnobs {
    SpectralKnobs::default()
}

fn random(d: Dims, seed: u64) -> Result<DiscreteModel, String> {
    make_model(d, seed, 1.0, &knobs()).map_err(e2s)
}

/// Dimensions of the `k`-th agreement model, total at most 60.
fn agreement_dims(k: u64) -> Dims {
    let k = k as usize;
    Dims::new(1 + (7 * k) % 24, 1 + (11 * k + 3) % 24, (5 * k) % 12)
}

fn ball_two_families() -> Outcome {
    let t = Instant::now();
    let spec = ball::ball_spectrum(1.0, BALL_N_MAX).map_err(e2s)?;
    let secs = t.elapsed().as_secs_f64();
    let series = |fam: Family| -> Vec<f64> {
        let mut v: Vec<_> = spec.iter().filter(|d| d.mode.family == fam).collect();
        v.sort_by_key(|d| d.mode.degree);
        v.iter().map(|d| d.lambda).collect()
    };
    let (tm, te) = (series(Family::TM), series(Family::TE));
    ensure(tm.len() == 40 && te.len() == 40, || "missing degrees".into())?;
    ensure(tm.iter().all(|&l| l < 0.0), || "a TM value is not negative".into())?;
    ensure(tm.windows(2).all(|w| w[0] < w[1]), || "TM not increasing".into())?;
    ensure(tm[39].abs() < TM_TAIL_MAX, || format!("|TM(40)| = {}", tm[39].abs()))?;
    ensure(te.iter().all(|&l| l > 0.0), || "a TE value is not positive".into())?;
    ensure(te.windows(2).all(|w| w[0] < w[1]), || "TE not increasing".into())?;
    ensure(te[39] > TE_TAIL_MIN, || format!("TE(40) = {}", te[39]))?;
    ensure(secs < BALL_SECONDS, || format!("took {secs:.3} s"))?;
    Ok(format!(
        "TM(40) = {:.4e}, TE(40) = {:.3}, {:.1} ms",
        tm[39],
        te[39],
        secs * 1e3
    ))
}

fn oracle_values() -> Outcome {
    let tm = ball::tm_eigenvalue(1, 1.0).map_err(e2s)?;
    let te = ball::te_eigenvalue(1, 1.0).map_err(e2s)?;
    let b = sph_bessel_series_path(1, 1.0).map_err(e2s)?;
    let te2 = (b.value + b.derivative) / b.value;
    let tm2 = -b.value / (b.value + b.derivative);
    ensure(tm.residual <= RESIDUAL_TOL && te.residual <= RESIDUAL_TOL, || {
        format!("residuals {:.2e}, {:.2e}", tm.residual, te.residual)
    })?;
    let d = (tm.lambda - tm2).abs().max((te.lambda - te2).abs());
    ensure(d <= SECOND_PATH_TOL, || format!("second path differs by {d:.2e}"))?;
    ensure(
        (tm.lambda - TM_1_QUOTED).abs() <= QUOTED_TOL && (te.lambda - TE_1_QUOTED).abs() <= QUOTED_TOL,
        || format!("TM {} TE {}", tm.lambda, te.lambda),
    )?;
    Ok(format!(
        "TM = {:.10}, TE = {:.10}, residuals {:.1e}/{:.1e}, second path {:.1e}",
        tm.lambda, te.lambda, tm.residual, te.residual, d
    ))
}

fn gap_theorems() -> Outcome {
    let t = Instant::now();
    let mut min_c0 = f64::INFINITY;
    for seed in 0..GAP_MODELS {
        let m = random(Dims::new(20, 20, 10), seed)?;
        let c = gap_constants(&m).map_err(|e| format!("seed {seed}: {e}"))?;
        let d = direct_solve(&m).map_err(e2s)?;
        let chk = gap_check(&d.eigenvalues, &c);
        ensure(chk.pass, || {
            format!("seed {seed}: counterexamples {:?}", chk.counterexamples)
        })?;
        min_c0 = min_c0.min(c.c0);
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < GAP_SECONDS, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{GAP_MODELS} models clean, smallest c0 = {min_c0:.3e}, {secs:.1} s"
    ))
}

fn schur_vs_brute_force() -> Outcome {
    let mut compared = 0usize;
    let mut worst = 0.0f64;
    for k in 0..AGREEMENT_MODELS {
        let d = agreement_dims(k);
        ensure(d.total() <= AGREEMENT_MAX_DIM, || format!("{d:?} too large"))?;
        let m = random(d, 1000 + k)?;
        let b = Blocks::new(&m).map_err(e2s)?;
        let c = gap_constants(&m).map_err(|e| format!("model {k}: {e}"))?;
        let eig = direct_solve(&m).map_err(e2s)?.eigenvalues;
        let w1 = w1_agreement(&b, &c, &eig, Execution::best()).map_err(e2s)?;
        let v = v_agreement(&b, &eig, Execution::best()).map_err(e2s)?;
        for s in [w1, v].into_iter().flatten() {
            ensure(s.direct.len() == s.fixed_point.len(), || {
                format!(
                    "model {k} {}: {} direct vs {} fixed points",
                    s.side,
                    s.direct.len(),
                    s.fixed_point.len()
                )
            })?;
            ensure(s.max_deviation <= AGREEMENT_TOL, || {
                format!("model {k} {}: deviation {:.2e}", s.side, s.max_deviation)
            })?;
            compared += s.direct.len();
            worst = worst.max(s.max_deviation);
        }
    }
    let g = DiscreteModel::example_golden();
    let minus = fixed_point_eigensolve(&g, Side::W1, (-0.9, 0.0), None).map_err(e2s)?;
    let plus = fixed_point_eigensolve(&g, Side::V, (0.0, 0.99), None).map_err(e2s)?;
    let want = ((1.0 - 5f64.sqrt()) / 2.0, (1.0 + 5f64.sqrt()) / 2.0);
    ensure(
        minus.roots.len() == 1 && (minus.roots[0].lambda_star - want.0).abs() <= HAND_ROOT_TOL,
        || format!("golden W1 roots {:?}", minus.roots),
    )?;
    ensure(
        plus.roots.len() == 1 && (plus.roots[0].lambda_star - want.1).abs() <= HAND_ROOT_TOL,
        || format!("golden V roots {:?}", plus.roots),
    )?;
    let e = DiscreteModel::example_empty();
    let ew = fixed_point_eigensolve(&e, Side::W1, (-0.9, 0.9), None).map_err(e2s)?;
    let ev = fixed_point_eigensolve(&e, Side::V, (0.0, 0.9), None).map_err(e2s)?;
    ensure(ew.roots.is_empty() && ev.roots.is_empty(), || {
        "empty model produced roots".into()
    })?;
    ensure(direct_solve(&e).map_err(e2s)?.eigenvalues.is_empty(), || {
        "empty model has eigenvalues".into()
    })?;
    Ok(format!(
        "{AGREEMENT_MODELS} models, {compared} eigenvalues matched, worst {worst:.1e}; hand models exact"
    ))
}

fn abstract_lemma() -> Outcome {
    let mut worst = 0.0f64;
    let mut negatives = 0usize;
    for s in 0..LEMMA_PAIRS {
        let dim = 2 + (s as usize * 13) % (LEMMA_MAX_DIM - 1);
        let kernel = (s as usize) % (dim / 2 + 1);
        let neg = (s as usize % 4).min(dim - kernel);
        let (k, g) = random_pair(dim, kernel, neg, 500 + s);
        let r = abstract_lemma_check(&k, &g).map_err(e2s)?;
        ensure(
            r.hypotheses.i_plus_g_invertible && r.hypotheses.projected_invertible,
            || format!("pair {s}: hypotheses fail {:?}", r.hypotheses),
        )?;
        ensure(r.spectra_agree && r.max_deviation <= LEMMA_TOL, || {
            format!("pair {s}: deviation {:.2e}", r.max_deviation)
        })?;
        ensure(r.predicted_negative == r.brute_force_negative, || {
            format!(
                "pair {s}: predicted {} vs {}",
                r.predicted_negative, r.brute_force_negative
            )
        })?;
        worst = worst.max(r.max_deviation);
        negatives += r.brute_force_negative;
    }
    Ok(format!(
        "{LEMMA_PAIRS} pairs, worst deviation {worst:.1e}, {negatives} negative products counted exactly"
    ))
}

fn penalty_rate() -> Outcome {
    let mut slopes = Vec::new();
    let mut max_ratio = 0.0f64;
    for seed in 0..PENALTY_MODELS {
        let m = random(Dims::new(16, 16, 8), seed)?;
        let r = penalty_experiment(&m, &random_rhs(40, seed), &DEFAULT_LAMBDAS).map_err(e2s)?;
        let s = r.slope.ok_or_else(|| format!("seed {seed}: no slope"))?;
        ensure((s - PENALTY_SLOPE).abs() <= PENALTY_SLOPE_TOL, || {
            format!("seed {seed}: slope {s:.4}")
        })?;
        slopes.push(s);
        max_ratio = r.decade_ratios.iter().copied().fold(max_ratio, f64::max);
    }
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "slopes in [{lo:.3}, {hi:.3}], largest decade ratio {max_ratio:.3}"
    ))
}

fn k_tilde_identity() -> Outcome {
    let mut models: Vec<DiscreteModel> = vec![DiscreteModel::example_golden(), DiscreteModel::example_empty()];
    for k in 0..AGREEMENT_MODELS {
        models.push(random(agreement_dims(k), 1000 + k)?);
    }
    let mut worst = 0.0f64;
    let mut rank_checks = 0usize;
    for (i, m) in models.iter().enumerate() {
        let b = Blocks::new(m).map_err(e2s)?;
        let bv = block(&m.b_tr, 0..m.b_tr.nrows(), m.dims.v_range());
        let want = bv.transpose() * &m.p_grad * &bv;
        let diff = (b.k_tilde(0.0).map_err(e2s)? - want).amax();
        ensure(diff <= KTILDE_TOL, || format!("model {i}: |K~(0) - B*PB| = {diff:.2e}"))?;
        worst = worst.max(diff);

        let Ok(c) = gap_constants(m) else { continue };
        let expected = m.dims.v - linalg::rank(&bv, RANK_TOL);
        for frac in [0.1, 0.5, 0.9] {
            let lt = frac / c.c_infty;
            let k = b.k_tilde(lt).map_err(e2s)?;
            let nullity = m.dims.v - linalg::rank(&k, RANK_TOL);
            ensure(nullity == expected, || {
                format!("model {i}, lambda~ {lt:.3e}: nullity {nullity} vs {expected}")
            })?;
            rank_checks += 1;
        }
    }
    Ok(format!(
        "{} models, worst difference {worst:.1e}, {rank_checks} kernel ranks equal",
        models.len()
    ))
}

fn run_cli(args: &[&str], out: &Path) -> Result<(i32, String), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_stekloff"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(e2s)?;
    Ok((
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    ))
}

fn read(p: &Path) -> Result<Vec<u8>, String> {
    fs::read(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn modified_scalar() -> Outcome {
    let mut worst = 0.0f64;
    for l in 1..=9 {
        let r = radial::scalar_lb_solve(l, 8).map_err(e2s)?;
        let want = -1.0 / (l as f64 + 1.0);
        let d = r
            .eigenvalues
            .iter()
            .map(|x| (x - want).abs())
            .fold(f64::INFINITY, f64::min);
        ensure(d <= SCALAR_TOL, || format!("l = {l}: error {d:.2e}"))?;
        worst = worst.max(d);
    }
    let dir = tempfile::tempdir().map_err(e2s)?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (omega, out) in [("7.3", &a), ("1.0", &b)] {
        let (code, err) = run_cli(
            &["modified", "--problem", "scalar-lb", "--n-max", "9", "--omega", omega],
            out,
        )?;
        ensure(code == 0, || format!("modified exited {code}: {err}"))?;
    }
    for f in ["modified.csv", "modified_convergence.csv"] {
        ensure(read(&a.join(f))? == read(&b.join(f))?, || {
            format!("{f} depends on omega")
        })?;
    }
    Ok(format!(
        "l = 1..9 worst error {worst:.1e}; omega 7.3 and 1.0 outputs byte-identical"
    ))
}

fn te_radial() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=TE_RADIAL_N_MAX {
        let rows = radial::convergence_study(Problem::TE, n, 1.0, &[TE_RADIAL_BASIS]).map_err(e2s)?;
        let e = rows[0].error;
        ensure(e <= TE_RADIAL_TOL, || format!("n = {n}: error {e:.2e}"))?;
        worst = worst.max(e);
    }
    Ok(format!(
        "n = 1..{TE_RADIAL_N_MAX} at basis {TE_RADIAL_BASIS}: worst error {worst:.1e}"
    ))
}

fn accumulation() -> Outcome {
    let mut counts = Vec::new();
    for w1 in ACCUMULATION_W1 {
        let m = random(Dims::new(20, w1, 10), 0)?;
        let d = direct_solve(&m).map_err(e2s)?;
        let c = gap_constants(&m).map_err(e2s)?;
        let inside = d.eigenvalues.iter().filter(|&&l| l > 0.0 && l < c.c0).count();
        ensure(inside == 0, || format!("W1 = {w1}: {inside} eigenvalues in (0, c0)"))?;
        counts.push(
            d.eigenvalues
                .iter()
                .filter(|&&l| l > -ACCUMULATION_BAND && l < 0.0)
                .count(),
        );
    }
    ensure(counts[1] >= 3 * counts[0] && counts[2] >= 3 * counts[1], || {
        format!("counts {counts:?}")
    })?;
    Ok(format!(
        "eigenvalues in (-{ACCUMULATION_BAND}, 0) for W1 = {ACCUMULATION_W1:?}: {counts:?}"
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(e2s)?;
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "omega = 1.0\ndims = 8,8,4\nseeds = 3\nn_max = 6\ngrid = 21\nbasis = 16\n",
    )
    .map_err(e2s)?;
    let cfg = cfg.to_str().ok_or("non-utf8 temp path")?;
    let runs: [&[&str]; 5] = [
        &["ball-spectrum", "--config", cfg],
        &["model-verify", "--config", cfg],
        &["tau-curves", "--config", cfg],
        &["tau-curves", "--config", cfg, "--side", "v", "--format", "json"],
        &["modified", "--config", cfg],
    ];
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let (a, b) = (dir.path().join(format!("{i}a")), dir.path().join(format!("{i}b")));
        for out in [&a, &b] {
            let (code, err) = run_cli(args, out)?;
            ensure(code == 0, || format!("{args:?} exited {code}: {err}"))?;
        }
        let mut names: Vec<_> = fs::read_dir(&a)
            .map_err(e2s)?
            .map(|e| e.map(|e| e.file_name()))
            .collect::<Result<_, _>>()
            .map_err(e2s)?;
        names.sort();
        ensure(!names.is_empty(), || format!("{args:?} wrote nothing"))?;
        for n in names {
            ensure(read(&a.join(&n))? == read(&b.join(&n))?, || {
                format!("{args:?}: {n:?} differs")
            })?;
            files += 1;
        }
    }
    Ok(format!(
        "{} commands run twice, {files} files byte-identical",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("ball two-family structure", ball_two_families),
        ("ball oracle values", oracle_values),
        ("gap theorems on 100 models", gap_theorems),
        ("Schur fixed points vs brute force", schur_vs_brute_force),
        ("abstract spectral lemma", abstract_lemma),
        ("penalty rate", penalty_rate),
        ("K~_V(0) identity and kernel rank", k_tilde_identity),
        ("modified scalar spectrum", modified_scalar),
        ("TE radial Galerkin convergence", te_radial),
        ("accumulation surrogate", accumulation),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
