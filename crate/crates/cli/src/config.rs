//! Run configuration: `key = value` lines, `#` comments, optional
//! `[section]` headers. Several `key=value` tokens may share a line when none
//! of them contains spaces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use esqpt_core::potentials::{Model, PathKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Where the offending entry came from, e.g. a file name or `--set`.
    pub origin: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.origin, l, self.message),
            None => write!(f, "{}: {}", self.origin, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Spectrum,
    Flow,
    Density,
    Classical,
    Thermo,
    Wavefunction,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathSel {
    /// No λ path; the coefficients `a`, `b` are used as given.
    Fixed,
    V1,
    V2,
    Collective,
}

impl PathSel {
    pub fn kind(self) -> Option<PathKind> {
        match self {
            PathSel::Fixed => None,
            PathSel::V1 => Some(PathKind::CuspFirstOrder),
            PathSel::V2 => Some(PathKind::CuspSecondOrder),
            PathSel::Collective => Some(PathKind::Collective),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig1a,
    Fig1b,
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityMethod {
    /// Histogram of a converged spectrum.
    Spectrum,
    /// Counting function at the bin edges (no eigenvectors, no full spectrum).
    Counting,
}

macro_rules! keyword_enum {
    ($t:ty, $($name:literal => $v:expr),+ $(,)?) => {
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($v),)+
                    _ => Err(format!("expected one of {}", [$($name),+].join(", "))),
                }
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = match self { $(x if *x == $v => $name,)+ _ => unreachable!() };
                f.write_str(s)
            }
        }
    };
}

keyword_enum!(Command,
    "spectrum" => Command::Spectrum, "flow" => Command::Flow, "density" => Command::Density,
    "classical" => Command::Classical, "thermo" => Command::Thermo,
    "wavefunction" => Command::Wavefunction, "report" => Command::Report);
keyword_enum!(PathSel, "fixed" => PathSel::Fixed, "v1" => PathSel::V1, "v2" => PathSel::V2, "collective" => PathSel::Collective);
keyword_enum!(Figure, "fig1a" => Figure::Fig1a, "fig1b" => Figure::Fig1b, "fig2" => Figure::Fig2, "fig3" => Figure::Fig3, "fig4" => Figure::Fig4);
keyword_enum!(DensityMethod, "spectrum" => DensityMethod::Spectrum, "counting" => DensityMethod::Counting);

fn model_from_str(s: &str) -> Result<Model, String> {
    match s {
        "cusp" => Ok(Model::Cusp),
        "collective" => Ok(Model::Collective),
        _ => Err("expected one of cusp, collective".into()),
    }
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Cusp => "cusp",
        Model::Collective => "collective",
    }
}

/// `(section, key)` for every accepted key, in serialization order.
pub const KEYS: &[(&str, &str)] = &[
    ("", "command"),
    ("", "figure"),
    ("model", "model"),
    ("model", "path"),
    ("model", "a"),
    ("model", "b"),
    ("model", "K"),
    ("grid", "lambda_min"),
    ("grid", "lambda_max"),
    ("grid", "lambda_steps"),
    ("grid", "lambdas"),
    ("grid", "t_min"),
    ("grid", "t_max"),
    ("grid", "t_steps"),
    ("grid", "e_min"),
    ("grid", "e_max"),
    ("grid", "e_steps"),
    ("grid", "bin_width"),
    ("grid", "levels"),
    ("grid", "points"),
    ("grid", "extent"),
    ("solver", "num_levels"),
    ("solver", "tol"),
    ("solver", "cap_1d"),
    ("solver", "cap_2d"),
    ("solver", "density_method"),
    ("solver", "density_target"),
    ("output", "output_dir"),
    ("output", "workers"),
    ("output", "note"),
];

fn section_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(_, k)| *k == key).map(|(s, _)| *s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub figure: Option<Figure>,
    pub model: Model,
    pub path: PathSel,
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_steps: usize,
    /// Explicit λ values; replace the evenly spaced grid when present.
    pub lambdas: Option<Vec<f64>>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    /// Energy window; derived from the spectrum when absent.
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub e_steps: usize,
    /// Histogram bin width; chosen from the spectrum when absent.
    pub bin_width: Option<f64>,
    /// Level indices for `wavefunction`.
    pub levels: Vec<usize>,
    /// Sampling points per coordinate for `wavefunction`.
    pub points: usize,
    /// Half-width of the sampled coordinate range; classical extent when absent.
    pub extent: Option<f64>,
    pub num_levels: usize,
    pub tol: f64,
    pub cap_1d: usize,
    pub cap_2d: usize,
    pub density_method: DensityMethod,
    /// Overrides `K` for `density`: the Weyl estimate puts this many levels
    /// below the top of the energy window.
    pub density_target: Option<f64>,
    pub output_dir: PathBuf,
    /// 0 lets the pool decide.
    pub workers: usize,
    pub note: Option<String>,
    /// Keys given explicitly; everything else holds its default.
    pub explicit: BTreeSet<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Spectrum,
            figure: None,
            model: Model::Cusp,
            path: PathSel::Fixed,
            a: -1.0,
            b: 0.0,
            k: 1e-2,
            lambda_min: -0.6,
            lambda_max: 0.6,
            lambda_steps: 201,
            lambdas: None,
            t_min: 0.01,
            t_max: 0.2,
            t_steps: 20,
            e_min: None,
            e_max: None,
            e_steps: 200,
            bin_width: None,
            levels: vec![4],
            points: 401,
            extent: None,
            num_levels: 60,
            tol: 1e-10,
            cap_1d: 4096,
            cap_2d: 8000,
            density_method: DensityMethod::Spectrum,
            density_target: None,
            output_dir: PathBuf::from("out"),
            workers: 0,
            note: None,
            explicit: BTreeSet::new(),
        }
    }
}

/// One `key = value` occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: String,
    pub line: Option<usize>,
}

impl Entry {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError { origin: self.origin.clone(), line: self.line, message: message.into() }
    }
}

/// Splits a configuration text into entries without interpreting values.
pub fn entries(text: &str, origin: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out: Vec<Entry> = Vec::new();
    let mut section = String::new();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |m: String| ConfigError { origin: origin.to_string(), line: Some(line_no), message: m };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| err(format!("malformed section header `{line}`")))?.trim();
            if !KEYS.iter().any(|(s, _)| !s.is_empty() && *s == name) {
                return Err(err(format!("unknown section `[{name}]`")));
            }
            section = name.to_string();
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let pairs: Vec<(String, String)> = if tokens.len() > 1 && tokens.iter().all(|t| t.contains('=') && !t.starts_with('=')) {
            tokens
                .iter()
                .map(|t| {
                    let (k, v) = t.split_once('=').unwrap();
                    (k.to_string(), v.to_string())
                })
                .collect()
        } else {
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            vec![(k.trim().to_string(), v.trim().to_string())]
        };
        for (key, value) in pairs {
            let Some(home) = section_of(&key) else {
                return Err(err(format!("unknown key `{key}`")));
            };
            if !section.is_empty() && home != section {
                return Err(err(format!("key `{key}` belongs in {}, not [{section}]", if home.is_empty() { "the top level".to_string() } else { format!("[{home}]") })));
            }
            if value.is_empty() {
                return Err(err(format!("missing value for `{key}`")));
            }
            if !seen.insert(key.clone()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            out.push(Entry { key, value, origin: origin.to_string(), line: Some(line_no) });
        }
    }
    Ok(out)
}

/// A `--set key=value` override.
pub fn override_entry(text: &str, index: usize) -> Result<Entry, ConfigError> {
    let origin = format!("--set #{}", index + 1);
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| ConfigError { origin: origin.clone(), line: None, message: format!("expected key=value, found `{text}`") })?;
    let (key, value) = (k.trim().to_string(), v.trim().to_string());
    if section_of(&key).is_none() {
        return Err(ConfigError { origin, line: None, message: format!("unknown key `{key}`") });
    }
    Ok(Entry { key, value, origin, line: None })
}

fn real(e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = e.value.parse().map_err(|_| e.err(format!("`{}` expects a real number, found `{}`", e.key, e.value)))?;
    if !v.is_finite() {
        return Err(e.err(format!("`{}` must be finite", e.key)));
    }
    Ok(v)
}

fn count(e: &Entry) -> Result<usize, ConfigError> {
    e.value.parse().map_err(|_| e.err(format!("`{}` expects a non-negative integer, found `{}`", e.key, e.value)))
}

fn keyword<T: FromStr<Err = String>>(e: &Entry) -> Result<T, ConfigError> {
    e.value.parse().map_err(|m: String| e.err(format!("`{}`: {m}, found `{}`", e.key, e.value)))
}

/// Builds a validated configuration from entries; later entries override
/// earlier ones with the same key.
pub fn build(list: &[Entry]) -> Result<RunConfig, ConfigError> {
    let mut last: BTreeMap<&str, &Entry> = BTreeMap::new();
    for e in list {
        last.insert(e.key.as_str(), e);
    }
    let mut c = RunConfig::default();
    for (&key, e) in &last {
        match key {
            "command" => c.command = keyword(e)?,
            "figure" => c.figure = Some(keyword(e)?),
            "model" => c.model = model_from_str(&e.value).map_err(|m| e.err(format!("`model`: {m}, found `{}`", e.value)))?,
            "path" => c.path = keyword(e)?,
            "a" => c.a = real(e)?,
            "b" => c.b = real(e)?,
            "K" => c.k = real(e)?,
            "lambda_min" => c.lambda_min = real(e)?,
            "lambda_max" => c.lambda_max = real(e)?,
            "lambda_steps" => c.lambda_steps = count(e)?,
            "lambdas" => {
                let v = e
                    .value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| e.err(format!("`lambdas` expects comma-separated reals, found `{}`", e.value)))?;
                if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(e.err("`lambdas` must be finite and strictly ascending"));
                }
                c.lambdas = Some(v);
            }
            "t_min" => c.t_min = real(e)?,
            "t_max" => c.t_max = real(e)?,
            "t_steps" => c.t_steps = count(e)?,
            "e_min" => c.e_min = Some(real(e)?),
            "e_max" => c.e_max = Some(real(e)?),
            "e_steps" => c.e_steps = count(e)?,
            "bin_width" => c.bin_width = Some(real(e)?),
            "levels" => {
                c.levels = e
                    .value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| e.err(format!("`levels` expects comma-separated level indices, found `{}`", e.value)))?
            }
            "points" => c.points = count(e)?,
            "extent" => c.extent = Some(real(e)?),
            "num_levels" => c.num_levels = count(e)?,
            "tol" => c.tol = real(e)?,
            "cap_1d" => c.cap_1d = count(e)?,
            "cap_2d" => c.cap_2d = count(e)?,
            "density_method" => c.density_method = keyword(e)?,
            "density_target" => c.density_target = Some(real(e)?),
            "output_dir" => c.output_dir = PathBuf::from(&e.value),
            "workers" => c.workers = count(e)?,
            "note" => c.note = Some(e.value.clone()),
            _ => unreachable!("keys are checked when entries are read"),
        }
        c.explicit.insert(key.to_string());
    }
    validate(&c, &last)?;
    Ok(c)
}

fn validate(c: &RunConfig, at: &BTreeMap<&str, &Entry>) -> Result<(), ConfigError> {
    // blame the last-mentioned key of a constraint
    let fail = |keys: &[&str], message: String| -> ConfigError {
        let blamed = keys
            .iter()
            .filter_map(|k| at.get(k))
            .max_by_key(|e| (e.line.is_none(), e.line))
            .copied();
        match blamed {
            Some(e) => e.err(message),
            None => ConfigError { origin: "defaults".into(), line: None, message },
        }
    };
    if !(c.k > 0.0) {
        return Err(fail(&["K"], format!("K must be > 0, got {}", c.k)));
    }
    if !(c.tol > 0.0) {
        return Err(fail(&["tol"], format!("tol must be > 0, got {}", c.tol)));
    }
    if c.num_levels == 0 {
        return Err(fail(&["num_levels"], "num_levels must be at least 1".into()));
    }
    if c.lambda_steps == 0 {
        return Err(fail(&["lambda_steps"], "lambda_steps must be at least 1".into()));
    }
    let lambda_ok = if c.lambda_steps == 1 { c.lambda_min <= c.lambda_max } else { c.lambda_min < c.lambda_max };
    if !lambda_ok {
        return Err(fail(&["lambda_min", "lambda_max", "lambda_steps"], format!("lambda range must be ordered: lambda_min = {} is not below lambda_max = {}", c.lambda_min, c.lambda_max)));
    }
    if !(c.t_min > 0.0) {
        return Err(fail(&["t_min"], format!("t_min must be > 0, got {}", c.t_min)));
    }
    if c.t_steps == 0 {
        return Err(fail(&["t_steps"], "t_steps must be at least 1".into()));
    }
    if !(c.t_min < c.t_max || (c.t_steps == 1 && c.t_min <= c.t_max)) {
        return Err(fail(&["t_min", "t_max"], format!("temperature range must be ordered: t_min = {} is not below t_max = {}", c.t_min, c.t_max)));
    }
    if let (Some(lo), Some(hi)) = (c.e_min, c.e_max) {
        if !(lo < hi) {
            return Err(fail(&["e_min", "e_max"], format!("energy window must be ordered: e_min = {lo} is not below e_max = {hi}")));
        }
    }
    if c.e_steps < 2 {
        return Err(fail(&["e_steps"], "e_steps must be at least 2".into()));
    }
    if let Some(w) = c.bin_width {
        if !(w > 0.0) {
            return Err(fail(&["bin_width"], format!("bin_width must be > 0, got {w}")));
        }
    }
    if let Some(x) = c.extent {
        if !(x > 0.0) {
            return Err(fail(&["extent"], format!("extent must be > 0, got {x}")));
        }
    }
    if let Some(t) = c.density_target {
        if !(t >= 1.0) {
            return Err(fail(&["density_target"], format!("density_target must be at least 1, got {t}")));
        }
    }
    if c.points < 2 {
        return Err(fail(&["points"], "points must be at least 2".into()));
    }
    if c.levels.is_empty() {
        return Err(fail(&["levels"], "levels must name at least one level".into()));
    }
    if c.cap_1d == 0 || c.cap_2d == 0 {
        return Err(fail(&["cap_1d", "cap_2d"], "basis caps must be positive".into()));
    }
    if let Some(kind) = c.path.kind() {
        if kind.model() != c.model {
            return Err(fail(&["path", "model"], format!("path `{}` does not belong to the {} model", c.path, model_name(c.model))));
        }
    }
    if matches!(c.command, Command::Flow | Command::Thermo) && c.path == PathSel::Fixed {
        return Err(fail(&["command", "path"], format!("`{}` needs a λ path (v1, v2 or collective)", c.command)));
    }
    if c.command == Command::Report && c.figure.is_none() {
        return Err(fail(&["command", "figure"], "`report` needs a figure (fig1a, fig1b, fig2, fig3, fig4)".into()));
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    build(&entries(text, "config")?)
}

fn fmt_real(x: f64) -> String {
    // shortest representation that parses back to the same double
    format!("{x:?}")
}

impl RunConfig {
    fn value_of(&self, key: &str) -> Option<String> {
        Some(match key {
            "command" => self.command.to_string(),
            "figure" => self.figure?.to_string(),
            "model" => model_name(self.model).to_string(),
            "path" => self.path.to_string(),
            "a" => fmt_real(self.a),
            "b" => fmt_real(self.b),
            "K" => fmt_real(self.k),
            "lambda_min" => fmt_real(self.lambda_min),
            "lambda_max" => fmt_real(self.lambda_max),
            "lambda_steps" => self.lambda_steps.to_string(),
            "lambdas" => self.lambdas.as_ref()?.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(","),
            "t_min" => fmt_real(self.t_min),
            "t_max" => fmt_real(self.t_max),
            "t_steps" => self.t_steps.to_string(),
            "e_min" => fmt_real(self.e_min?),
            "e_max" => fmt_real(self.e_max?),
            "e_steps" => self.e_steps.to_string(),
            "bin_width" => fmt_real(self.bin_width?),
            "levels" => self.levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","),
            "points" => self.points.to_string(),
            "extent" => fmt_real(self.extent?),
            "num_levels" => self.num_levels.to_string(),
            "tol" => fmt_real(self.tol),
            "cap_1d" => self.cap_1d.to_string(),
            "cap_2d" => self.cap_2d.to_string(),
            "density_method" => self.density_method.to_string(),
            "density_target" => fmt_real(self.density_target?),
            "output_dir" => self.output_dir.display().to_string(),
            "workers" => self.workers.to_string(),
            "note" => self.note.clone()?,
            _ => return None,
        })
    }

    /// Configuration text that parses back to `self`. Defaults are written
    /// as comments so that their provenance survives the round trip.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for &(section, key) in KEYS {
            if section != current {
                out.push_str(&format!("\n[{section}]\n"));
                current = section;
            }
            match self.value_of(key) {
                Some(v) if self.explicit.contains(key) => out.push_str(&format!("{key} = {v}\n")),
                Some(v) => out.push_str(&format!("# {key} = {v}  (default)\n")),
                None => out.push_str(&format!("# {key} unset\n")),
            }
        }
        out.trim_start().to_string()
    }

    pub fn path_kind(&self) -> Option<PathKind> {
        self.path.kind()
    }

    /// λ grid points, evenly spaced and including both ends.
    pub fn lambda_grid(&self) -> Vec<f64> {
        if let Some(v) = &self.lambdas {
            return v.clone();
        }
        linspace(self.lambda_min, self.lambda_max, self.lambda_steps)
    }

    pub fn temperature_grid(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.t_steps)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_one_line() {
        let c = parse_config("command=spectrum model=cusp a=-1 b=0 K=0.01").unwrap();
        assert_eq!(c.command, Command::Spectrum);
        assert_eq!(c.k, 0.01);
        assert_eq!(c.num_levels, 60);
        assert!(c.explicit.contains("K") && !c.explicit.contains("tol"));
    }

    #[test]
    fn zero_k_names_constraint() {
        let e = parse_config("command = spectrum\nK = 0\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("K must be > 0"), "{e}");
    }

    #[test]
    fn reversed_lambda_range() {
        let e = parse_config("command = flow\npath = v1\nlambda_min = 0.5\nlambda_max = 0.1\n").unwrap_err();
        assert_eq!(e.line, Some(4));
        assert!(e.message.contains("ordered"), "{e}");
    }

    #[test]
    fn strict_keys_and_sections() {
        let e = parse_config("command = spectrum\nKK = 1\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("unknown key"));
        let e = parse_config("[grid]\nK = 1\n").unwrap_err();
        assert!(e.message.contains("[model]"), "{e}");
        assert!(parse_config("[nope]\n").is_err());
        let e = parse_config("a = 1\na = 2\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_config("tol = fast\n").unwrap_err();
        assert!(e.message.contains("real number"));
    }

    #[test]
    fn path_model_consistency() {
        assert!(parse_config("model = collective\npath = v1\n").is_err());
        assert!(parse_config("command = flow\n").is_err());
        assert!(parse_config("command = report\n").is_err());
        assert!(parse_config("command = report\nfigure = fig2\n").is_ok());
    }

    #[test]
    fn sections_and_comments() {
        let text = "command = thermo # canonical tables\n[model]\npath = v2\nK = 2e-2\n\n[grid]\nt_min=0.05 t_max=0.3\n[output]\nnote = downscaled from K=1e-4 # to stay quick\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.path, PathSel::V2);
        assert_eq!(c.t_max, 0.3);
        assert_eq!(c.note.as_deref(), Some("downscaled from K=1e-4"));
    }

    #[test]
    fn round_trip() {
        let text = "command = density\nmodel = collective\na = 0.22\nb = 1\nK = 3e-4\ne_min = -0.008\ne_max = 0.012\nbin_width = 0.0003\ndensity_method = counting\nlevels = 0,4,7\nlambdas = -0.1,0.22,0.5\nnote = three slopes\n";
        let c = parse_config(text).unwrap();
        let again = parse_config(&c.serialize()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.serialize(), c.serialize());
    }

    #[test]
    fn overrides_win() {
        let mut list = entries("command = spectrum\nK = 0.01\n", "file").unwrap();
        list.push(override_entry("K=0.02", 0).unwrap());
        let c = build(&list).unwrap();
        assert_eq!(c.k, 0.02);
        let e = build(&[override_entry("K=-1", 0).unwrap()]).unwrap_err();
        assert_eq!(e.origin, "--set #1");
        assert!(override_entry("nokey", 0).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(-1.0, 1.0, 3), vec![-1.0, 0.0, 1.0]);
        assert_eq!(linspace(0.3, 0.3, 1), vec![0.3]);
        let g = linspace(-0.6, 0.6, 121);
        assert_eq!(*g.last().unwrap(), 0.6);
    }
}
