//! Command-line harness: configuration, outputs and plots.

pub mod cli;
pub mod meshio;
pub mod rates;
pub mod svg;

use std::path::PathBuf;

use crate::adaptivity::{AfemOptions, Mode};
use crate::benchmarks::PROBLEM_NAMES;
use crate::error::{Error, Result};
use crate::forms::RhsVariant;
use crate::solvers::NewtonOptions;

pub const OUT_ENV: &str = "MORLEY_ADAPT_OUT";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub mode: Mode,
    pub theta: f64,
    pub eps: Option<f64>,
    pub max_ndof: usize,
    pub quad_degree: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    pub warm_start: bool,
    pub nodal_rhs: bool,
    pub damping: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "square-layer".into(),
            mode: Mode::Adaptive,
            theta: 0.25,
            eps: None,
            max_ndof: 20_000,
            quad_degree: 4,
            out_dir: PathBuf::from("out"),
            seed: 0,
            threads: None,
            warm_start: false,
            nodal_rhs: false,
            damping: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid value '{value}' for '{key}'"),
    })
}

impl RunConfig {
    /// Applies `key = value` lines on top of `self`; `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            let (key, value) = s.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected key = value, got '{s}'"),
            })?;
            let (key, value) = (key.trim().replace('_', "-"), value.trim());
            match key.as_str() {
                "problem" => self.problem = value.to_string(),
                "mode" => self.mode = value.parse()?,
                "theta" => self.theta = parse(&key, value, line)?,
                "eps" => self.eps = Some(parse(&key, value, line)?),
                "max-ndof" => self.max_ndof = parse(&key, value, line)?,
                "quad-degree" => self.quad_degree = parse(&key, value, line)?,
                "out" => self.out_dir = PathBuf::from(value),
                "seed" => self.seed = parse(&key, value, line)?,
                "threads" => self.threads = Some(parse(&key, value, line)?),
                "warm-start" => self.warm_start = parse(&key, value, line)?,
                "nodal-rhs" => self.nodal_rhs = parse(&key, value, line)?,
                "damping" => self.damping = parse(&key, value, line)?,
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key '{key}'"),
                    })
                }
            }
        }
        Ok(())
    }

    /// Key = value text that [`RunConfig::apply_kv`] reads back.
    pub fn to_kv(&self) -> String {
        let mut s = format!(
            "problem = {}\nmode = {}\ntheta = {}\nmax-ndof = {}\nquad-degree = {}\nout = {}\nseed = {}\nwarm-start = {}\nnodal-rhs = {}\ndamping = {}\n",
            self.problem,
            match self.mode {
                Mode::Uniform => "uniform",
                Mode::Adaptive => "adaptive",
            },
            self.theta,
            self.max_ndof,
            self.quad_degree,
            self.out_dir.display(),
            self.seed,
            self.warm_start,
            self.nodal_rhs,
            self.damping,
        );
        if let Some(e) = self.eps {
            s.push_str(&format!("eps = {e}\n"));
        }
        if let Some(t) = self.threads {
            s.push_str(&format!("threads = {t}\n"));
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if !PROBLEM_NAMES.contains(&self.problem.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "unknown problem '{}' (expected one of {})",
                self.problem,
                PROBLEM_NAMES.join(", ")
            )));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidParameter(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::InvalidParameter(format!("eps must be positive, got {e}")));
            }
        }
        if self.quad_degree == 0 {
            return Err(Error::InvalidParameter("quadrature degree must be positive".into()));
        }
        Ok(())
    }

    pub fn afem_options(&self) -> AfemOptions {
        AfemOptions {
            theta: self.theta,
            max_ndof: self.max_ndof,
            mode: self.mode,
            quad_degree: self.quad_degree,
            newton: NewtonOptions {
                damping: self.damping,
                ..Default::default()
            },
            rhs_variant: if self.nodal_rhs { RhsVariant::Nodal } else { RhsVariant::Morley },
            warm_start: self.warm_start,
        }
    }
}
