//! Run configuration and the flat key=value config-file format.
//!
//! A config file holds one `[section]` per run, the section name being the
//! subcommand; keys mirror the CLI flags. Parsing is strict: unknown keys and
//! unknown sections are errors naming the offender. A config round-trips
//! losslessly through `to_file_section` / `parse`.

use rabi_ncho::error::{Error, Result};
use rabi_ncho::model::{ModelFamily, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Perturb,
    Fk,
    Zeta,
    Fiber,
    Sector,
    Symcheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Perturb => "perturb",
            Command::Fk => "fk",
            Command::Zeta => "zeta",
            Command::Fiber => "fiber",
            Command::Sector => "sector",
            Command::Symcheck => "symcheck",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "spectrum" => Command::Spectrum,
            "perturb" => Command::Perturb,
            "fk" => Command::Fk,
            "zeta" => Command::Zeta,
            "fiber" => Command::Fiber,
            "sector" => Command::Sector,
            "symcheck" => Command::Symcheck,
            other => return Err(Error::InvalidArgument(format!("unknown command '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown output format '{other}' (csv or json)"
                )))
            }
        })
    }
}

/// Everything a run needs; (config, seed) fully determines the artifacts.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub family: ModelFamily,
    pub delta: f64,
    pub g: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_coef: f64,
    pub s_coef: f64,
    /// number of converged eigenvalues requested
    pub k: usize,
    /// fixed truncation level for non-escalating operations
    pub n_max: usize,
    pub tol: f64,
    /// semigroup horizon
    pub t: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// quadrature nodes per inter-jump interval
    pub nodes: usize,
    pub s_grid: Vec<f64>,
    pub tau: f64,
    /// subcommand mode (see each command's help)
    pub mode: String,
    pub sequence: Vec<f64>,
    pub window_lo: f64,
    pub window_hi: f64,
    pub k_max: usize,
    /// FK test vector names: const, up, down, x2, ground
    pub left: String,
    pub right: String,
    pub output: Option<String>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Spectrum,
            family: ModelFamily::Rabi2p,
            delta: 0.0,
            g: 0.0,
            alpha: 2.0,
            beta: 2.0,
            t_coef: 0.0,
            s_coef: 1.0,
            k: 8,
            n_max: 128,
            tol: 1e-8,
            t: 1.0,
            n_samples: 100_000,
            seed: 1,
            nodes: 16,
            s_grid: vec![2.0],
            tau: 0.5,
            mode: String::new(),
            sequence: Vec::new(),
            window_lo: 0.0,
            window_hi: 5.0,
            k_max: 8,
            left: "const".into(),
            right: "const".into(),
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn model(&self) -> ModelSpec<f64> {
        ModelSpec {
            family: self.family,
            delta: self.delta,
            g: self.g,
            alpha: self.alpha,
            beta: self.beta,
            t_coef: self.t_coef,
            s_coef: self.s_coef,
        }
    }

    /// Apply one key=value pair (config file or flag plumbing).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad float '{v}' for key '{key}'")))
        };
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad integer '{v}' for key '{key}'")))
        };
        let parse_list = |v: &str| -> Result<Vec<f64>> {
            v.split(',')
                .map(|p| {
                    p.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidArgument(format!("bad float '{p}' in list for key '{key}'"))
                    })
                })
                .collect()
        };
        match key {
            "family" => self.family = ModelFamily::parse(value)?,
            "delta" => self.delta = parse_f64(value)?,
            "g" => self.g = parse_f64(value)?,
            "alpha" => self.alpha = parse_f64(value)?,
            "beta" => self.beta = parse_f64(value)?,
            "t_coef" => self.t_coef = parse_f64(value)?,
            "s_coef" => self.s_coef = parse_f64(value)?,
            "k" => self.k = parse_usize(value)?,
            "n_max" => self.n_max = parse_usize(value)?,
            "tol" => self.tol = parse_f64(value)?,
            "t" => self.t = parse_f64(value)?,
            "n_samples" => self.n_samples = parse_usize(value)?,
            "seed" => {
                self.seed = value.parse::<u64>().map_err(|_| {
                    Error::InvalidArgument(format!("bad seed '{value}'"))
                })?
            }
            "nodes" => self.nodes = parse_usize(value)?,
            "s_grid" => self.s_grid = parse_list(value)?,
            "tau" => self.tau = parse_f64(value)?,
            "mode" => self.mode = value.to_string(),
            "sequence" => self.sequence = parse_list(value)?,
            "window_lo" => self.window_lo = parse_f64(value)?,
            "window_hi" => self.window_hi = parse_f64(value)?,
            "k_max" => self.k_max = parse_usize(value)?,
            "left" => self.left = value.to_string(),
            "right" => self.right = value.to_string(),
            "output" => self.output = Some(value.to_string()),
            "format" => self.format = OutputFormat::parse(value)?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key '{other}'"
                )))
            }
        }
        Ok(())
    }

    /// Serialize as one config-file section (lossless round trip).
    pub fn to_file_section(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("[{}]\n", self.command.name());
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("family", self.family.name().into());
        kv("delta", self.delta.to_string());
        kv("g", self.g.to_string());
        kv("alpha", self.alpha.to_string());
        kv("beta", self.beta.to_string());
        kv("t_coef", self.t_coef.to_string());
        kv("s_coef", self.s_coef.to_string());
        kv("k", self.k.to_string());
        kv("n_max", self.n_max.to_string());
        kv("tol", self.tol.to_string());
        kv("t", self.t.to_string());
        kv("n_samples", self.n_samples.to_string());
        kv("seed", self.seed.to_string());
        kv("nodes", self.nodes.to_string());
        kv("s_grid", list(&self.s_grid));
        kv("tau", self.tau.to_string());
        if !self.mode.is_empty() {
            kv("mode", self.mode.clone());
        }
        if !self.sequence.is_empty() {
            kv("sequence", list(&self.sequence));
        }
        kv("window_lo", self.window_lo.to_string());
        kv("window_hi", self.window_hi.to_string());
        kv("k_max", self.k_max.to_string());
        kv("left", self.left.clone());
        kv("right", self.right.clone());
        if let Some(o) = &self.output {
            kv("output", o.clone());
        }
        kv("format", self.format.name().into());
        s
    }

    /// Parse a config file into the run list (strict schema).
    pub fn parse_file(text: &str) -> Result<Vec<RunConfig>> {
        let mut runs: Vec<RunConfig> = Vec::new();
        let mut current: Option<RunConfig> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(section) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                if let Some(done) = current.take() {
                    runs.push(done);
                }
                let mut cfg = RunConfig::default();
                cfg.command = Command::parse(section.trim())?;
                current = Some(cfg);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidArgument(format!(
                    "line {}: expected key = value, got '{line}'",
                    lineno + 1
                )));
            };
            let Some(cfg) = current.as_mut() else {
                return Err(Error::InvalidArgument(format!(
                    "line {}: key outside of a [section]",
                    lineno + 1
                )));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        if let Some(done) = current.take() {
            runs.push(done);
        }
        if runs.is_empty() {
            return Err(Error::InvalidArgument("config file contains no runs".into()));
        }
        Ok(runs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mut cfg = RunConfig::default();
        cfg.command = Command::Zeta;
        cfg.family = ModelFamily::Ncho;
        cfg.alpha = 3.0;
        cfg.beta = 2.5;
        cfg.s_grid = vec![1.5, 2.0, 3.0];
        cfg.mode = "value".into();
        cfg.output = Some("z.csv".into());
        let text = cfg.to_file_section();
        let parsed = RunConfig::parse_file(&text).unwrap();
        assert_eq!(parsed.len(), 1);
        let p = &parsed[0];
        assert_eq!(p.command, Command::Zeta);
        assert_eq!(p.family, ModelFamily::Ncho);
        assert_eq!(p.alpha, 3.0);
        assert_eq!(p.s_grid, vec![1.5, 2.0, 3.0]);
        assert_eq!(p.mode, "value");
        assert_eq!(p.output.as_deref(), Some("z.csv"));
        // and the round trip is lossless
        assert_eq!(p.to_file_section(), text);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse_file("[spectrum]\nfoo = 1\n").unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(RunConfig::parse_file("[plot]\n").is_err());
    }

    #[test]
    fn multiple_sections() {
        let text = "[spectrum]\ng = 0.1\n\n[zeta]\ns_grid = 2\n";
        let runs = RunConfig::parse_file(text).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].command, Command::Spectrum);
        assert_eq!(runs[1].command, Command::Zeta);
    }
}
