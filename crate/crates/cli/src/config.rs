//! Flat `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::CliError;
use crate::format::parse_complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FixedPoint,
    Olver,
    Both,
}

impl Method {
    pub fn fixed_point(self) -> bool {
        matches!(self, Method::FixedPoint | Method::Both)
    }

    pub fn olver(self) -> bool {
        matches!(self, Method::Olver | Method::Both)
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fixedpoint" => Ok(Method::FixedPoint),
            "olver" => Ok(Method::Olver),
            "both" => Ok(Method::Both),
            _ => Err(CliError::Config(format!("unknown method `{s}` (fixedpoint, olver, both)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Plus,
    Minus,
}

impl FromStr for Kind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "plus" => Ok(Kind::Plus),
            "minus" => Ok(Kind::Minus),
            _ => Err(CliError::Config(format!("unknown kind `{s}` (plus, minus)"))),
        }
    }
}

/// Where Minus data come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialDataSource {
    /// `ybar0` and `y1` as written in the config.
    Given,
    /// Data of the Bessel-K example at `z0 = 1`; requires `rhs = unit`.
    Example,
}

impl FromStr for InitialDataSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "given" => Ok(InitialDataSource::Given),
            "example" => Ok(InitialDataSource::Example),
            _ => Err(CliError::Config(format!("unknown initial_data `{s}` (given, example)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(CliError::Config(format!("unknown format `{s}` (csv, markdown)"))),
        }
    }
}

/// The two built-in example tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Table1,
    Table2,
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "table1" => Ok(Preset::Table1),
            "table2" => Ok(Preset::Table2),
            _ => Err(CliError::Config(format!("unknown preset `{s}` (table1, table2)"))),
        }
    }
}

/// One target point with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case {
    pub z: Complex64,
    pub lambda: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub kind: Kind,
    pub lambda: Vec<Complex64>,
    pub z: Vec<Complex64>,
    pub n: Vec<usize>,
    pub rhs: String,
    pub y0: Complex64,
    pub anchor: Complex64,
    pub ybar0: Complex64,
    pub y1: Complex64,
    pub initial_data: InitialDataSource,
    pub tol: f64,
    pub max_order: usize,
    /// Extra Olver terms: the order-`n` cell uses `n + offset` terms.
    /// Defaults to 1 for Plus problems and 0 for Minus problems.
    pub olver_order_offset: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub preset: Option<Preset>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Both,
            kind: Kind::Plus,
            lambda: Vec::new(),
            z: Vec::new(),
            n: vec![1, 3, 5],
            rhs: "unit".into(),
            y0: Complex64::new(1.0, 0.0),
            anchor: Complex64::new(1.0, 0.0),
            ybar0: Complex64::new(1.0, 0.0),
            y1: Complex64::new(0.0, 0.0),
            initial_data: InitialDataSource::Given,
            tol: 1e-12,
            max_order: 200,
            olver_order_offset: None,
            output: None,
            format: Format::Markdown,
            threads: None,
            preset: None,
        }
    }
}

fn complex_list(value: &str) -> Result<Vec<Complex64>, CliError> {
    value.split(',').map(|s| parse_complex(s.trim())).collect()
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Config(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Configuration of a built-in table.
    pub fn preset(preset: Preset) -> Self {
        let base = Self { preset: Some(preset), initial_data: InitialDataSource::Example, ..Self::default() };
        match preset {
            Preset::Table1 => Self { kind: Kind::Plus, ..base },
            Preset::Table2 => Self { kind: Kind::Minus, ..base },
        }
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected `key = value`", lineno + 1)));
            };
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        // A preset supplies defaults that the remaining keys may override.
        let mut config = match pairs.iter().find(|(k, _)| k == "preset") {
            Some((_, v)) => Self::preset(v.parse()?),
            None => Self::default(),
        };
        for (key, value) in &pairs {
            config.set(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "method" => self.method = value.parse()?,
            "kind" => self.kind = value.parse()?,
            "lambda" => self.lambda = complex_list(value)?,
            "z" => self.z = complex_list(value)?,
            "n" => {
                self.n = value.split(',').map(|s| parse::<usize>(key, s.trim())).collect::<Result<_, _>>()?
            }
            "rhs" => self.rhs = value.to_string(),
            "y0" => self.y0 = parse_complex(value)?,
            "anchor" => self.anchor = parse_complex(value)?,
            "ybar0" => self.ybar0 = parse_complex(value)?,
            "y1" => self.y1 = parse_complex(value)?,
            "initial_data" => self.initial_data = value.parse()?,
            "tol" => self.tol = parse(key, value)?,
            "max_order" => self.max_order = parse(key, value)?,
            "olver_order_offset" => self.olver_order_offset = Some(parse(key, value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "threads" => self.threads = Some(parse(key, value)?),
            "preset" => self.preset = Some(value.parse()?),
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Checks every parameter, the rhs name and the option ranges.
    pub fn validate(&self) -> Result<(), CliError> {
        for &l in self.cases().iter().map(|c| &c.lambda) {
            largeparam::LargeParameter::new(l).map_err(|e| CliError::Config(e.to_string()))?;
        }
        let entry = crate::registry::lookup(&self.rhs)
            .ok_or_else(|| CliError::Config(format!("unknown rhs `{}`", self.rhs)))?;
        if self.initial_data == InitialDataSource::Example && self.kind == Kind::Minus && self.rhs != "unit" {
            return Err(CliError::Config("initial_data = example needs rhs = unit".into()));
        }
        if self.method == Method::Olver && !entry.linear {
            return Err(CliError::Config(format!("method olver needs a linear rhs, `{}` is nonlinear", self.rhs)));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(CliError::Config("n must list positive orders".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        if self.preset.is_none() && (self.z.is_empty() || self.lambda.is_empty()) {
            return Err(CliError::Config("both z and lambda must be given".into()));
        }
        Ok(())
    }

    /// Target points with their parameters, in table order.
    pub fn cases(&self) -> Vec<Case> {
        let cross = |zs: &[Complex64], ls: &[Complex64]| -> Vec<Case> {
            zs.iter().flat_map(|&z| ls.iter().map(move |&lambda| Case { z, lambda })).collect()
        };
        let r = |x: f64| Complex64::new(x, 0.0);
        match self.preset {
            // Explicit lists override the preset's cases.
            _ if !self.z.is_empty() && !self.lambda.is_empty() => cross(&self.z, &self.lambda),
            Some(Preset::Table1) => {
                let mut cases = cross(&[r(1.0)], &[r(0.75), r(5.0), r(100.0), r(500.0)]);
                cases.extend(cross(&[r(-2.0)], &[r(5.0), Complex64::new(50.0, -2.0), r(100.0)]));
                cases
            }
            Some(Preset::Table2) => {
                let mut cases = cross(&[r(0.5)], &[r(0.75), r(5.0), Complex64::new(25.0, 5.0), r(50.0)]);
                cases.extend(cross(&[Complex64::new(-1.0, 0.25)], &[r(0.75), r(5.0), r(25.0), r(50.0)]));
                cases
            }
            None => cross(&self.z, &self.lambda),
        }
    }

    pub fn olver_offset(&self) -> usize {
        self.olver_order_offset.unwrap_or(match self.kind {
            Kind::Plus => 1,
            Kind::Minus => 0,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::FixedPoint => "fixedpoint",
            Method::Olver => "olver",
            Method::Both => "both",
        })
    }
}
