//! Run configuration: flat `key = value` files merged with flags (flags win).

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::CliError;

pub const KEYS: [&str; 12] = [
    "omega", "n_max", "dims", "seeds", "window", "grid", "basis", "format", "out", "model", "side", "problem",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideArg {
    W1,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemArg {
    ScalarLb,
    SProjection,
    Both,
}

/// Settings shared by every subcommand; unset values fall back to defaults
/// when the command runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub omega: Option<f64>,
    pub n_max: Option<i64>,
    pub dims: Option<[usize; 3]>,
    pub seeds: Option<Vec<u64>>,
    pub window: Option<(f64, f64)>,
    pub grid: Option<usize>,
    pub basis: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub model: Option<String>,
    pub side: Option<SideArg>,
    pub problem: Option<ProblemArg>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse()
        .map_err(|_| usage(format!("{key}: not a number: {v:?}")))
}

pub fn parse_dims(v: &str) -> Result<[usize; 3], CliError> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(usage(format!("dims must be V,W1,W2, got {v:?}")));
    }
    let mut out = [0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| usage(format!("dims: bad entry {p:?}")))?;
    }
    Ok(out)
}

/// `N` means seeds `0..N`; `a..b` a half-open range; `a,b,c` an explicit list.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>, CliError> {
    let v = v.trim();
    let bad = || usage(format!("seeds: expected N, a..b or a,b,c, got {v:?}"));
    if let Some((a, b)) = v.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b <= a {
            return Err(bad());
        }
        return Ok((a..b).collect());
    }
    if v.contains(',') {
        return v.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect();
    }
    let n: u64 = v.parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    Ok((0..n).collect())
}

pub fn parse_window(v: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = v
        .split_once(',')
        .ok_or_else(|| usage(format!("window must be a,b, got {v:?}")))?;
    let (a, b) = (parse_f64("window", a)?, parse_f64("window", b)?);
    if !(a < b) {
        return Err(usage(format!("window needs a < b, got ({a}, {b})")));
    }
    Ok((a, b))
}

pub fn parse_format(v: &str) -> Result<Format, CliError> {
    match v.trim() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        o => Err(usage(format!("format must be csv or json, got {o:?}"))),
    }
}

pub fn parse_side(v: &str) -> Result<SideArg, CliError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "w1" => Ok(SideArg::W1),
        "v" => Ok(SideArg::V),
        o => Err(usage(format!("side must be w1 or v, got {o:?}"))),
    }
}

pub fn parse_problem(v: &str) -> Result<ProblemArg, CliError> {
    match v.trim() {
        "scalar-lb" => Ok(ProblemArg::ScalarLb),
        "s-projection" => Ok(ProblemArg::SProjection),
        "both" => Ok(ProblemArg::Both),
        o => Err(usage(format!(
            "problem must be scalar-lb, s-projection or both, got {o:?}"
        ))),
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize, CliError> {
    v.trim()
        .parse()
        .map_err(|_| usage(format!("{key}: not a non-negative integer: {v:?}")))
}

impl RunConfig {
    /// Parses a `key = value` file body. Blank lines and `#` comments are
    /// skipped; unknown or repeated keys are rejected.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(usage(format!("config line {}: unknown key {k:?}", i + 1)));
            }
            if seen.contains(&k) {
                return Err(usage(format!("config line {}: duplicate key {k:?}", i + 1)));
            }
            seen.push(k);
            c.set(k, v)?;
        }
        Ok(c)
    }

    fn set(&mut self, k: &str, v: &str) -> Result<(), CliError> {
        match k {
            "omega" => self.omega = Some(parse_f64(k, v)?),
            "n_max" => self.n_max = Some(v.parse().map_err(|_| usage(format!("n_max: bad integer {v:?}")))?),
            "dims" => self.dims = Some(parse_dims(v)?),
            "seeds" => self.seeds = Some(parse_seeds(v)?),
            "window" => self.window = Some(parse_window(v)?),
            "grid" => self.grid = Some(parse_usize(k, v)?),
            "basis" => self.basis = Some(parse_usize(k, v)?),
            "format" => self.format = Some(parse_format(v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "model" => self.model = Some(v.to_string()),
            "side" => self.side = Some(parse_side(v)?),
            "problem" => self.problem = Some(parse_problem(v)?),
            _ => unreachable!("key list checked by caller"),
        }
        Ok(())
    }

    /// Serializes the set keys in the file format accepted by [`parse`](Self::parse).
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(x) = self.omega {
            put("omega", format!("{x:?}"));
        }
        if let Some(x) = self.n_max {
            put("n_max", x.to_string());
        }
        if let Some([a, b, c]) = self.dims {
            put("dims", format!("{a},{b},{c}"));
        }
        if let Some(x) = &self.seeds {
            put("seeds", x.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        }
        if let Some((a, b)) = self.window {
            put("window", format!("{a:?},{b:?}"));
        }
        if let Some(x) = self.grid {
            put("grid", x.to_string());
        }
        if let Some(x) = self.basis {
            put("basis", x.to_string());
        }
        if let Some(x) = self.format {
            put("format", if x == Format::Csv { "csv" } else { "json" }.into());
        }
        if let Some(x) = &self.out {
            put("out", x.display().to_string());
        }
        if let Some(x) = &self.model {
            put("model", x.clone());
        }
        if let Some(x) = self.side {
            put("side", if x == SideArg::W1 { "w1" } else { "v" }.into());
        }
        if let Some(x) = self.problem {
            let v = match x {
                ProblemArg::ScalarLb => "scalar-lb",
                ProblemArg::SProjection => "s-projection",
                ProblemArg::Both => "both",
            };
            put("problem", v.into());
        }
        s
    }

    /// Values set in `over` replace those in `self`.
    pub fn merged(self, over: RunConfig) -> RunConfig {
        RunConfig {
            omega: over.omega.or(self.omega),
            n_max: over.n_max.or(self.n_max),
            dims: over.dims.or(self.dims),
            seeds: over.seeds.or(self.seeds),
            window: over.window.or(self.window),
            grid: over.grid.or(self.grid),
            basis: over.basis.or(self.basis),
            format: over.format.or(self.format),
            out: over.out.or(self.out),
            model: over.model.or(self.model),
            side: over.side.or(self.side),
            problem: over.problem.or(self.problem),
        }
    }
}
