//! Experiment configuration: flat `key = value` lines grouped under
//! `[experiment name]` headers. `#` starts a comment.
//!
//! ```text
//! [gaussian-grid]
//! methods = dca-primal, simiter, dense
//! generator = gaussian
//! N = 200, 400
//! d = 100
//! s = 5
//! tol = 1e-3
//! seed = 1
//! ```
//!
//! `N`, `d`, `s` and `tol` accept comma lists; the experiment runs on their
//! cartesian product.

use std::str::FromStr;
use std::time::Duration;

use crate::error::{Error, Result};

use super::harness::MethodId;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSpec {
    /// `scale * rate^i`.
    Exponential { scale: f64, rate: f64 },
    /// Evenly spaced from `first` to `last`.
    Linear { first: f64, last: f64 },
    List(Vec<f64>),
}

impl SpectrumSpec {
    pub fn values(&self, len: usize) -> Vec<f64> {
        match self {
            Self::Exponential { scale, rate } => super::generate::exponential_spectrum(len, *scale, *rate),
            Self::Linear { first, last } => super::generate::linear_spectrum(len, *first, *last),
            Self::List(v) => v.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Exponential { scale, rate } => format!("exp:{scale},{rate}"),
            Self::Linear { first, last } => format!("linear:{first},{last}"),
            Self::List(v) => format!(
                "list:{}",
                v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Gaussian,
    FixedSpectrum(SpectrumSpec),
    Contaminated {
        base: Box<GeneratorSpec>,
        fraction: f64,
        noise_sigma: f64,
    },
}

impl GeneratorSpec {
    pub fn label(&self) -> String {
        match self {
            Self::Gaussian => "gaussian".into(),
            Self::FixedSpectrum(s) => format!("fixed-spectrum[{}]", s.label()),
            Self::Contaminated {
                base,
                fraction,
                noise_sigma,
            } => format!("contaminated[{};{fraction};{noise_sigma}]", base.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n_samples: usize,
    pub n_features: usize,
    pub components: usize,
    pub tol: f64,
    pub seed: u64,
    pub generator: GeneratorSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchStopping {
    /// Relative error to the known optimum; methods without one fall back
    /// to relative objective change.
    RelErr,
    RelObj,
    Angle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub methods: Vec<MethodId>,
    pub problems: Vec<ProblemSpec>,
    pub reps: usize,
    pub warmup: usize,
    pub max_iters: usize,
    pub time_budget: Duration,
    pub stopping: BenchStopping,
}

/// Position of a value in the config text, for error messages.
#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn parse_err<T>(pos: Pos, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    })
}

fn parse_one<T: FromStr>(raw: &str, pos: Pos, key: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_or_else(|_| parse_err(pos, format!("bad value '{}' for {key}", raw.trim())), Ok)
}

fn parse_list<T: FromStr>(raw: &str, pos: Pos, key: &str) -> Result<Vec<T>> {
    let items: Result<Vec<T>> = raw.split(',').map(|p| parse_one(p, pos, key)).collect();
    let items = items?;
    if items.is_empty() {
        return parse_err(pos, format!("{key} is empty"));
    }
    Ok(items)
}

fn parse_spectrum(raw: &str, pos: Pos) -> Result<SpectrumSpec> {
    let Some((kind, args)) = raw.split_once(':') else {
        return parse_err(pos, "spectrum must look like exp:SCALE,RATE | linear:FIRST,LAST | list:V1,V2,..");
    };
    let nums: Vec<f64> = parse_list(args, pos, "spectrum")?;
    match (kind.trim(), nums.as_slice()) {
        ("exp", [scale, rate]) => Ok(SpectrumSpec::Exponential {
            scale: *scale,
            rate: *rate,
        }),
        ("linear", [first, last]) => Ok(SpectrumSpec::Linear {
            first: *first,
            last: *last,
        }),
        ("list", _) => Ok(SpectrumSpec::List(nums)),
        _ => parse_err(pos, format!("unknown spectrum '{raw}'")),
    }
}

#[derive(Default)]
struct Section {
    name: String,
    header: Option<Pos>,
    entries: Vec<(String, String, Pos)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(&str, Pos)> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, p)| (v.as_str(), *p))
    }

    fn scalar<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            Some((v, p)) => parse_one(v, p, key),
            None => Ok(default),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        match self.get(key) {
            Some((v, p)) => parse_list(v, p, key),
            None => parse_err(self.header.unwrap_or(Pos { line: 1, column: 1 }), format!("[{}] is missing '{key}'", self.name)),
        }
    }

    fn build(&self) -> Result<Experiment> {
        const KNOWN: [&str; 16] = [
            "methods", "generator", "base", "N", "d", "s", "tol", "seed", "reps", "warmup", "max_iters",
            "time_budget", "stopping", "spectrum", "fraction", "noise_sigma",
        ];
        for (k, _, p) in &self.entries {
            if !KNOWN.contains(&k.as_str()) {
                return parse_err(*p, format!("unknown key '{k}'"));
            }
        }
        let methods: Vec<MethodId> = self.list("methods")?;
        let ns: Vec<usize> = self.list("N")?;
        let ds: Vec<usize> = self.list("d")?;
        let ss: Vec<usize> = self.list("s")?;
        let tols: Vec<f64> = match self.get("tol") {
            Some(_) => self.list("tol")?,
            None => vec![1e-6],
        };
        let seed: u64 = self.scalar("seed", 0)?;
        let reps: usize = self.scalar("reps", 5)?;
        let warmup: usize = self.scalar("warmup", 1)?;
        let max_iters: usize = self.scalar("max_iters", 10_000)?;
        let budget: f64 = self.scalar("time_budget", 5.0)?;
        if reps == 0 || max_iters == 0 || !(budget > 0.0) {
            return parse_err(self.header.unwrap_or(Pos { line: 1, column: 1 }), "reps, max_iters and time_budget must be positive");
        }
        let stopping = match self.get("stopping") {
            None => BenchStopping::RelErr,
            Some((v, p)) => match v {
                "rel-err" => BenchStopping::RelErr,
                "rel-obj" => BenchStopping::RelObj,
                "angle" => BenchStopping::Angle,
                other => return parse_err(p, format!("unknown stopping '{other}'")),
            },
        };
        let generator = self.generator("generator")?;
        for (v, p) in [self.get("tol")].into_iter().flatten() {
            if tols.iter().any(|t| !(*t > 0.0)) {
                return parse_err(p, format!("tol must be positive: {v}"));
            }
        }
        let mut problems = Vec::new();
        for &n in &ns {
            for &d in &ds {
                for &s in &ss {
                    for &tol in &tols {
                        if s == 0 || s > n.min(d) {
                            let p = self.get("s").map_or(Pos { line: 1, column: 1 }, |(_, p)| p);
                            return parse_err(p, format!("s = {s} must lie in 1..=min(N, d) = {}", n.min(d)));
                        }
                        problems.push(ProblemSpec {
                            n_samples: n,
                            n_features: d,
                            components: s,
                            tol,
                            seed,
                            generator: generator.clone(),
                        });
                    }
                }
            }
        }
        Ok(Experiment {
            name: self.name.clone(),
            methods,
            problems,
            reps,
            warmup,
            max_iters,
            time_budget: Duration::from_secs_f64(budget),
            stopping,
        })
    }

    fn generator(&self, key: &str) -> Result<GeneratorSpec> {
        let (raw, pos) = self.get(key).unwrap_or(("gaussian", Pos { line: 1, column: 1 }));
        match raw {
            "gaussian" => Ok(GeneratorSpec::Gaussian),
            "fixed-spectrum" => match self.get("spectrum") {
                Some((v, p)) => Ok(GeneratorSpec::FixedSpectrum(parse_spectrum(v, p)?)),
                None => parse_err(pos, "fixed-spectrum needs a 'spectrum' key"),
            },
            "contaminated" if key == "generator" => {
                let base = match self.get("base") {
                    Some(_) => self.generator("base")?,
                    None => GeneratorSpec::Gaussian,
                };
                let fraction: f64 = self.scalar("fraction", 0.15)?;
                let noise_sigma: f64 = self.scalar("noise_sigma", 15.0)?;
                if !(0.0..=1.0).contains(&fraction) {
                    return parse_err(self.get("fraction").map_or(pos, |(_, p)| p), "fraction must lie in [0, 1]");
                }
                if !(noise_sigma > 0.0) {
                    return parse_err(self.get("noise_sigma").map_or(pos, |(_, p)| p), "noise_sigma must be positive");
                }
                Ok(GeneratorSpec::Contaminated {
                    base: Box::new(base),
                    fraction,
                    noise_sigma,
                })
            }
            other => parse_err(pos, format!("unknown generator '{other}'")),
        }
    }
}

/// Parses every section of a config file.
pub fn parse_config(text: &str) -> Result<Vec<Experiment>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let at = |col: usize| Pos {
            line: line_no,
            column: col + 1,
        };
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return parse_err(at(indent + trimmed.len()), "section header is missing ']'");
            };
            let name = name.trim();
            if name.is_empty() {
                return parse_err(at(indent + 1), "empty section name");
            }
            if sections.iter().any(|s| s.name == name) {
                return parse_err(at(indent + 1), format!("duplicate section '{name}'"));
            }
            sections.push(Section {
                name: name.to_string(),
                header: Some(at(indent)),
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = content.find('=') else {
            return parse_err(at(indent), "expected 'key = value' or '[section]'");
        };
        let key = content[..eq].trim();
        if key.is_empty() {
            return parse_err(at(indent), "missing key before '='");
        }
        let value_part = &content[eq + 1..];
        let value_col = eq + 1 + (value_part.len() - value_part.trim_start().len());
        let value = value_part.trim();
        if value.is_empty() {
            return parse_err(at(value_col), format!("missing value for '{key}'"));
        }
        let Some(section) = sections.last_mut() else {
            return parse_err(at(indent), "key outside of any [section]");
        };
        section.entries.push((key.to_string(), value.to_string(), at(value_col)));
    }
    if sections.is_empty() {
        return parse_err(Pos { line: 1, column: 1 }, "config has no [section]");
    }
    sections.iter().map(Section::build).collect()
}
