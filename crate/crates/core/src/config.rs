//! Run configuration: flat UTF-8 `section.key = value` lines with `#`
//! comments. Unknown and duplicate keys are errors, so a misspelled
//! parameter never silently falls back to a default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::data::{Displacement, InitialData, Velocity};
use crate::error::{Error, Result};
use crate::grid::{BoundaryRule, Grid1D};
use crate::potential::{PotentialFamily, PotentialSpec};

/// Margin added to `support radius + T` when checking the domain size.
pub const TRUNCATION_MARGIN: f64 = 10.0;

const KNOWN_KEYS: &[&str] = &[
    "domain.L",
    "domain.n",
    "domain.bc",
    "time.dt",
    "time.T",
    "time.sample_every",
    "potential.family",
    "potential.V0",
    "potential.alpha",
    "data.family",
    "data.amplitude",
    "data.radius",
    "data.sigma",
    "data.k",
    "data.u1",
    "flags.antiderivative_check",
    "flags.store_states",
    "flags.appendix_checks",
    "output.csv_path",
    "output.svg_path",
    "output.report_path",
    "output.sweep_csv_path",
    "output.verification_csv_path",
    "fit.t_min",
    "fit.t_max",
    "sweep.V0",
    "sweep.alpha",
    "sweep.amplitude",
    "sweep.baseline",
];

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub half_width: f64,
    pub n: usize,
    pub bc: BoundaryRule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    /// Carry the nodal antiderivative `w = ∫ u` and keep state snapshots.
    pub antiderivative_check: bool,
    /// Keep `(u, v)` snapshots at every sample.
    pub store_states: bool,
    pub appendix_checks: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputConfig {
    pub csv_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub sweep_csv_path: Option<PathBuf>,
    pub verification_csv_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitWindow {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepConfig {
    pub v0: Vec<f64>,
    pub alpha: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// Add a `V ≡ 0` row run with the same solver.
    pub baseline: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub time: TimeConfig,
    pub potential: PotentialSpec,
    pub data: InitialData,
    pub flags: Flags,
    pub output: OutputConfig,
    pub fit: FitWindow,
    pub sweep: SweepConfig,
}

struct Entry {
    line: usize,
    value: String,
}

struct Parsed<'a> {
    origin: &'a str,
    entries: BTreeMap<String, Entry>,
}

impl Parsed<'_> {
    fn parse_err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line,
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        match self.raw(key) {
            Some(e) => self.convert(key, e),
            None => Err(Error::Config(format!(
                "{}: missing required key '{key}'",
                self.origin
            ))),
        }
    }

    fn optional<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(|e| self.convert(key, e)).transpose()
    }

    fn convert<T: std::str::FromStr>(&self, key: &str, e: &Entry) -> Result<T> {
        e.value
            .parse()
            .map_err(|_| self.parse_err(e.line, format!("invalid value '{}' for '{key}'", e.value)))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let Some(e) = self.raw(key) else {
            return Ok(Vec::new());
        };
        e.value
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    self.parse_err(e.line, format!("invalid list item '{}' for '{key}'", s.trim()))
                })
            })
            .collect()
    }

    fn with_line<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        match (r, self.raw(key)) {
            (Err(Error::Config(msg)), Some(e)) => Err(self.parse_err(e.line, msg)),
            (r, _) => r,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses configuration text; `origin` names the source in diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut parsed = Parsed {
            origin,
            entries: BTreeMap::new(),
        };
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(parsed.parse_err(line, format!("expected 'section.key = value', got '{content}'")));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(parsed.parse_err(line, format!("unknown key '{key}'")));
            }
            if value.is_empty() {
                return Err(parsed.parse_err(line, format!("empty value for '{key}'")));
            }
            if let Some(prev) = parsed.entries.get(key) {
                return Err(parsed.parse_err(
                    line,
                    format!("duplicate key '{key}' (first set on line {})", prev.line),
                ));
            }
            parsed.entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Self::from_parsed(&parsed)
    }

    fn from_parsed(p: &Parsed) -> Result<Self> {
        let bc = match p.raw("domain.bc") {
            Some(e) => p.with_line("domain.bc", e.value.parse::<BoundaryRule>())?,
            None => BoundaryRule::Dirichlet,
        };
        let domain = DomainConfig {
            half_width: p.required("domain.L")?,
            n: p.required("domain.n")?,
            bc,
        };
        let time = TimeConfig {
            dt: p.required("time.dt")?,
            t_end: p.required("time.T")?,
            sample_every: p.optional("time.sample_every")?.unwrap_or(1),
        };

        let family_text: String = p.required("potential.family")?;
        let family = p.with_line("potential.family", family_text.parse::<PotentialFamily>())?;
        let potential = if family == PotentialFamily::Zero {
            PotentialSpec::zero()
        } else {
            let v0: f64 = p.required("potential.V0")?;
            let alpha: f64 = p.required("potential.alpha")?;
            p.with_line("potential.V0", PotentialSpec::new(family, v0, alpha))?
        };

        let amplitude = p.optional("data.amplitude")?.unwrap_or(1.0);
        let radius = p.optional("data.radius")?.unwrap_or(5.0);
        let sigma = p.optional("data.sigma")?.unwrap_or(1.0);
        let k = p.optional("data.k")?.unwrap_or(1.0);
        let data_family: String = p.required("data.family")?;
        let displacement = match data_family.as_str() {
            "bump" => Displacement::Bump { amplitude, radius },
            "gaussian" => Displacement::Gaussian { amplitude, sigma },
            "fourier-mode" | "mode" => Displacement::FourierMode { amplitude, k },
            "zero" => Displacement::Zero,
            other => {
                return Err(p.parse_err(
                    p.raw("data.family").map_or(0, |e| e.line),
                    format!("unknown data family '{other}' (expected bump, gaussian, zero or fourier-mode)"),
                ))
            }
        };
        let u1_text: String = p.optional("data.u1")?.unwrap_or_else(|| "zero".into());
        let velocity = match u1_text.as_str() {
            "zero" => Velocity::Zero,
            "gaussian-derivative" => Velocity::GaussianDerivative { amplitude, sigma },
            other => {
                return Err(p.parse_err(
                    p.raw("data.u1").map_or(0, |e| e.line),
                    format!("unknown u1 family '{other}' (expected zero or gaussian-derivative)"),
                ))
            }
        };

        let flags = Flags {
            antiderivative_check: p.optional("flags.antiderivative_check")?.unwrap_or(false),
            store_states: p.optional("flags.store_states")?.unwrap_or(false),
            appendix_checks: p.optional("flags.appendix_checks")?.unwrap_or(false),
        };
        let output = OutputConfig {
            csv_path: p.optional::<String>("output.csv_path")?.map(PathBuf::from),
            svg_path: p.optional::<String>("output.svg_path")?.map(PathBuf::from),
            report_path: p.optional::<String>("output.report_path")?.map(PathBuf::from),
            sweep_csv_path: p.optional::<String>("output.sweep_csv_path")?.map(PathBuf::from),
            verification_csv_path: p
                .optional::<String>("output.verification_csv_path")?
                .map(PathBuf::from),
        };
        let fit = FitWindow {
            t_min: p.optional("fit.t_min")?,
            t_max: p.optional("fit.t_max")?,
        };
        let sweep = SweepConfig {
            v0: p.list("sweep.V0")?,
            alpha: p.list("sweep.alpha")?,
            amplitude: p.list("sweep.amplitude")?,
            baseline: p.optional("sweep.baseline")?.unwrap_or(false),
        };

        let config = RunConfig {
            domain,
            time,
            potential,
            data: InitialData {
                displacement,
                velocity,
            },
            flags,
            output,
            fit,
            sweep,
        };
        config.check().map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", p.origin)),
            other => other,
        })?;
        Ok(config)
    }

    /// Structural checks on parameter ranges.
    pub fn check(&self) -> Result<()> {
        Grid1D::new(self.domain.half_width, self.domain.n, self.domain.bc)?;
        if !(self.time.dt.is_finite() && self.time.dt > 0.0) {
            return Err(Error::Config(format!("time.dt must be positive, got {}", self.time.dt)));
        }
        if !(self.time.t_end.is_finite() && self.time.t_end > 0.0) {
            return Err(Error::Config(format!("time.T must be positive, got {}", self.time.t_end)));
        }
        if self.time.sample_every == 0 {
            return Err(Error::Config("time.sample_every must be at least 1".into()));
        }
        if let (Some(a), Some(b)) = (self.fit.t_min, self.fit.t_max) {
            if !(a < b) {
                return Err(Error::Config(format!("fit window [{a}, {b}] is empty")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.domain.half_width, self.domain.n, self.domain.bc)
    }

    pub fn steps(&self) -> usize {
        (self.time.t_end / self.time.dt).round().max(1.0) as usize
    }

    /// Non-fatal observations about the configuration, e.g. a domain too
    /// small for truncation to stay negligible up to `T`.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.domain.bc == BoundaryRule::Dirichlet {
            if let Some(r) = self.data.support_radius() {
                let needed = r + self.time.t_end + TRUNCATION_MARGIN;
                if self.domain.half_width < needed {
                    out.push(format!(
                        "domain half-width L = {} is below data radius + T + {} = {needed}; truncation effects may be visible",
                        self.domain.half_width, TRUNCATION_MARGIN
                    ));
                }
            }
        }
        let steps = self.time.t_end / self.time.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            out.push(format!(
                "T = {} is not a multiple of dt = {}; the run ends at t = {}",
                self.time.t_end,
                self.time.dt,
                self.steps() as f64 * self.time.dt
            ));
        }
        out
    }

    /// The reference configuration: bump data (A = 1, R = 5), `u1 = 0`,
    /// `V = 0.5 (1 + x²)^{-1/2}`, `L = 80`, `h = 0.05`, `dt = 2e-3`, `T = 50`.
    pub fn canonical() -> Self {
        RunConfig {
            domain: DomainConfig {
                half_width: 80.0,
                n: 3199,
                bc: BoundaryRule::Dirichlet,
            },
            time: TimeConfig {
                dt: 2e-3,
                t_end: 50.0,
                sample_every: 50,
            },
            potential: PotentialSpec::algebraic(0.5, 1.0).expect("valid constants"),
            data: InitialData::bump(1.0, 5.0),
            flags: Flags::default(),
            output: OutputConfig::default(),
            fit: FitWindow::default(),
            sweep: SweepConfig::default(),
        }
    }

    /// Serializes back to the text format; `parse(to_text())` round-trips.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "domain.L = {}", self.domain.half_width);
        let _ = writeln!(s, "domain.n = {}", self.domain.n);
        let _ = writeln!(s, "domain.bc = {}", self.domain.bc);
        let _ = writeln!(s, "time.dt = {}", self.time.dt);
        let _ = writeln!(s, "time.T = {}", self.time.t_end);
        let _ = writeln!(s, "time.sample_every = {}", self.time.sample_every);
        let _ = writeln!(s, "potential.family = {}", self.potential.family());
        if self.potential.family() != PotentialFamily::Zero {
            let _ = writeln!(s, "potential.V0 = {}", self.potential.v0());
            let _ = writeln!(s, "potential.alpha = {}", self.potential.alpha());
        }
        let (family, amplitude) = match self.data.displacement {
            Displacement::Bump { amplitude, radius } => {
                let _ = writeln!(s, "data.radius = {radius}");
                ("bump", amplitude)
            }
            Displacement::Gaussian { amplitude, sigma } => {
                let _ = writeln!(s, "data.sigma = {sigma}");
                ("gaussian", amplitude)
            }
            Displacement::FourierMode { amplitude, k } => {
                let _ = writeln!(s, "data.k = {k}");
                ("fourier-mode", amplitude)
            }
            Displacement::Zero => ("zero", 1.0),
        };
        let _ = writeln!(s, "data.family = {family}");
        let _ = writeln!(s, "data.amplitude = {amplitude}");
        match self.data.velocity {
            Velocity::Zero => {
                let _ = writeln!(s, "data.u1 = zero");
            }
            Velocity::GaussianDerivative { sigma, .. } => {
                let _ = writeln!(s, "data.u1 = gaussian-derivative");
                if !matches!(self.data.displacement, Displacement::Gaussian { .. }) {
                    let _ = writeln!(s, "data.sigma = {sigma}");
                }
            }
        }
        let _ = writeln!(s, "flags.antiderivative_check = {}", self.flags.antiderivative_check);
        let _ = writeln!(s, "flags.store_states = {}", self.flags.store_states);
        let _ = writeln!(s, "flags.appendix_checks = {}", self.flags.appendix_checks);
        let paths = [
            ("output.csv_path", &self.output.csv_path),
            ("output.svg_path", &self.output.svg_path),
            ("output.report_path", &self.output.report_path),
            ("output.sweep_csv_path", &self.output.sweep_csv_path),
            ("output.verification_csv_path", &self.output.verification_csv_path),
        ];
        for (key, path) in paths {
            if let Some(p) = path {
                let _ = writeln!(s, "{key} = {}", p.display());
            }
        }
        if let Some(t) = self.fit.t_min {
            let _ = writeln!(s, "fit.t_min = {t}");
        }
        if let Some(t) = self.fit.t_max {
            let _ = writeln!(s, "fit.t_max = {t}");
        }
        let lists = [
            ("sweep.V0", &self.sweep.v0),
            ("sweep.alpha", &self.sweep.alpha),
            ("sweep.amplitude", &self.sweep.amplitude),
        ];
        for (key, values) in lists {
            if !values.is_empty() {
                let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "{key} = {}", joined.join(", "));
            }
        }
        if self.sweep.baseline {
            let _ = writeln!(s, "sweep.baseline = true");
        }
        s
    }
}
