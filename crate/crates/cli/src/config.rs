//! Plain-text pipeline configuration: `key = value` lines with `#` comments.
//!
//! Sources are applied in order: defaults, the config file, `SUBDIFF_*`
//! environment variables (only with `--env-override`), command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use subdiff_core::experiments::{PipelineSettings, RNG_ALGORITHM};
use subdiff_core::field::fmt_f64;
use subdiff_core::operators::MollifierParams;
use subdiff_core::parameter_choice::MorozovConfig;
use subdiff_core::{Execution, GridSpec};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "SUBDIFF_";

pub const KEYS: [&str; 16] = [
    "gamma",
    "T",
    "L",
    "N",
    "tau",
    "s",
    "theta",
    "q",
    "alpha0",
    "max_iters",
    "seed",
    "output_dir",
    "h",
    "fallback_alpha",
    "refined_synthesis",
    "execution",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub gamma: f64,
    pub final_time: f64,
    pub half_width: f64,
    pub points: usize,
    pub tau: f64,
    pub s: f64,
    pub theta: f64,
    pub q: f64,
    pub alpha0: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Perturbation level of the inversion evaluator; `None` is exact.
    pub h: Option<f64>,
    pub fallback_alpha: Option<f64>,
    pub refined_synthesis: bool,
    pub execution: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            gamma: 0.8,
            final_time: 1.0,
            half_width: 10.0,
            points: 256,
            tau: 0.5,
            s: 4.0,
            theta: 1.01,
            q: 0.99,
            alpha0: 10.0,
            max_iters: 5000,
            seed: 0,
            output_dir: PathBuf::from("out"),
            h: None,
            fallback_alpha: None,
            refined_synthesis: false,
            execution: Execution::default(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn parse_opt(v: &str) -> Result<Option<f64>, String> {
    if v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse_num(v).map(Some)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), fmt_f64)
}

impl PipelineConfig {
    /// Sets one key from its text form. `Err` carries a message without the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "gamma" => self.gamma = parse_num(value)?,
            "T" => self.final_time = parse_num(value)?,
            "L" => self.half_width = parse_num(value)?,
            "N" => self.points = parse_num(value)?,
            "tau" => self.tau = parse_num(value)?,
            "s" => self.s = parse_num(value)?,
            "theta" => self.theta = parse_num(value)?,
            "q" => self.q = parse_num(value)?,
            "alpha0" => self.alpha0 = parse_num(value)?,
            "max_iters" => self.max_iters = parse_num(value)?,
            "seed" => self.seed = parse_num(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "h" => self.h = parse_opt(value)?,
            "fallback_alpha" => self.fallback_alpha = parse_opt(value)?,
            "refined_synthesis" => self.refined_synthesis = parse_num(value)?,
            "execution" => {
                self.execution = match value {
                    "parallel" => Execution::Parallel,
                    "sequential" => Execution::Sequential,
                    _ => {
                        return Err(format!(
                            "expected `parallel` or `sequential`, got `{value}`"
                        ))
                    }
                }
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "gamma" => fmt_f64(self.gamma),
            "T" => fmt_f64(self.final_time),
            "L" => fmt_f64(self.half_width),
            "N" => self.points.to_string(),
            "tau" => fmt_f64(self.tau),
            "s" => fmt_f64(self.s),
            "theta" => fmt_f64(self.theta),
            "q" => fmt_f64(self.q),
            "alpha0" => fmt_f64(self.alpha0),
            "max_iters" => self.max_iters.to_string(),
            "seed" => self.seed.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            "h" => fmt_opt(self.h),
            "fallback_alpha" => fmt_opt(self.fallback_alpha),
            "refined_synthesis" => self.refined_synthesis.to_string(),
            "execution" => match self.execution {
                Execution::Parallel => "parallel".into(),
                Execution::Sequential => "sequential".into(),
            },
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::invalid(key, msg));
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma", format!("must lie in (0, 1), got {}", self.gamma));
        }
        if !pos(self.final_time) {
            return bad("T", format!("must be > 0, got {}", self.final_time));
        }
        if !pos(self.half_width) {
            return bad("L", format!("must be > 0, got {}", self.half_width));
        }
        if self.points < 8 || !self.points.is_power_of_two() {
            return bad(
                "N",
                format!("must be a power of two >= 8, got {}", self.points),
            );
        }
        if !pos(self.tau) {
            return bad("tau", format!("must be > 0, got {}", self.tau));
        }
        if !pos(self.s) {
            return bad("s", format!("must be > 0, got {}", self.s));
        }
        if !(self.theta.is_finite() && self.theta > 1.0) {
            return bad("theta", format!("must be > 1, got {}", self.theta));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return bad("q", format!("must lie in (0, 1), got {}", self.q));
        }
        if !pos(self.alpha0) {
            return bad("alpha0", format!("must be > 0, got {}", self.alpha0));
        }
        if self.max_iters == 0 {
            return bad("max_iters", "must be >= 1".into());
        }
        if let Some(h) = self.h {
            if !(h.is_finite() && h >= 0.0) {
                return bad("h", format!("must be >= 0, got {h}"));
            }
        }
        if let Some(a) = self.fallback_alpha {
            if !pos(a) {
                return bad("fallback_alpha", format!("must be > 0, got {a}"));
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> Result<PipelineSettings, CliError> {
        self.validate()?;
        Ok(PipelineSettings {
            grid: GridSpec::new(2, self.half_width, self.points)?,
            gamma: self.gamma,
            final_time: self.final_time,
            mollifier: MollifierParams::new(self.tau, self.s)?,
            morozov: MorozovConfig::new(self.theta, self.q, self.alpha0, self.max_iters)?,
            h: self.h,
            fallback_alpha: self.fallback_alpha,
            refined_synthesis: self.refined_synthesis,
            exec: self.execution,
        })
    }

    /// Effective configuration in the file format, preceded by `#` context lines.
    pub fn echo(&self, command: &str) -> String {
        let mut out = String::from("# subdiff effective configuration\n");
        let _ = writeln!(out, "# command: {command}");
        let _ = writeln!(out, "# rng: {RNG_ALGORITHM}");
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).unwrap_or_default());
        }
        out
    }
}

/// `(line, key, value)`.
pub type Assignment = (usize, String, String);

/// Every assignment in `text`; `Err` holds the offending line and a message.
pub fn parse_lines(text: &str) -> Result<Vec<Assignment>, (usize, String)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err((i + 1, format!("expected `key = value`, got `{line}`")));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err((i + 1, "missing key".into()));
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn env_var_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_ascii_uppercase())
}

/// Where configuration values come from.
#[derive(Debug, Default, Clone)]
pub struct Sources {
    pub file: Option<PathBuf>,
    pub env_override: bool,
    /// Flag values in command-line order.
    pub flags: Vec<(&'static str, String)>,
}

impl Sources {
    pub fn load(&self, env: impl Fn(&str) -> Option<String>) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            apply_file(&mut cfg, path, &text)?;
        }
        if self.env_override {
            for key in KEYS {
                let name = env_var_name(key);
                if let Some(v) = env(&name) {
                    cfg.set(key, v.trim())
                        .map_err(|msg| CliError::invalid(key, format!("{msg} (from {name})")))?;
                }
            }
        }
        for (key, v) in &self.flags {
            cfg.set(key, v).map_err(|msg| CliError::invalid(key, msg))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn apply_file(cfg: &mut PipelineConfig, path: &Path, text: &str) -> Result<(), CliError> {
    let parse_err = |line, msg| CliError::ConfigParse {
        path: path.display().to_string(),
        line,
        msg,
    };
    for (line, key, value) in parse_lines(text).map_err(|(l, m)| parse_err(l, m))? {
        cfg.set(&key, &value).map_err(|msg| {
            parse_err(
                line,
                if KEYS.contains(&key.as_str()) {
                    format!("{key}: {msg}")
                } else {
                    msg
                },
            )
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn empty_file_gives_defaults() {
        let f = file("# nothing here\n\n");
        let s = Sources {
            file: Some(f.path().into()),
            ..Sources::default()
        };
        let cfg = s.load(no_env).unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        let d = PipelineConfig::default();
        assert_eq!(
            (d.gamma, d.final_time, d.half_width, d.points),
            (0.8, 1.0, 10.0, 256)
        );
        assert_eq!(
            (d.tau, d.s, d.theta, d.q, d.alpha0),
            (0.5, 4.0, 1.01, 0.99, 10.0)
        );
    }

    #[test]
    fn flags_override_the_file() {
        let f = file("gamma = 0.5\nN = 64 # coarse\n");
        let s = Sources {
            file: Some(f.path().into()),
            env_override: false,
            flags: vec![("gamma", "0.9".into())],
        };
        let cfg = s.load(no_env).unwrap();
        assert_eq!((cfg.gamma, cfg.points), (0.9, 64));
    }

    #[test]
    fn environment_applies_only_when_requested() {
        let f = file("gamma = 0.5\n");
        let env = |name: &str| match name {
            "SUBDIFF_GAMMA" => Some("0.3".to_string()),
            "SUBDIFF_MAX_ITERS" => Some("77".to_string()),
            _ => None,
        };
        let mut s = Sources {
            file: Some(f.path().into()),
            ..Sources::default()
        };
        assert_eq!(s.load(env).unwrap().gamma, 0.5);
        s.env_override = true;
        let cfg = s.load(env).unwrap();
        assert_eq!((cfg.gamma, cfg.max_iters), (0.3, 77));
        s.flags.push(("gamma", "0.6".into()));
        assert_eq!(s.load(env).unwrap().gamma, 0.6);
    }

    #[test]
    fn validation_names_the_key() {
        let f = file("gamma = 1.5\n");
        let s = Sources {
            file: Some(f.path().into()),
            ..Sources::default()
        };
        match s.load(no_env) {
            Err(CliError::Invalid { key, .. }) => assert_eq!(key, "gamma"),
            other => panic!("unexpected {other:?}"),
        }
        let mut cfg = PipelineConfig::default();
        for (key, v) in [
            ("N", "100"),
            ("q", "1"),
            ("theta", "1"),
            ("tau", "0"),
            ("fallback_alpha", "-1"),
        ] {
            let mut c = cfg.clone();
            c.set(key, v).unwrap();
            match c.validate() {
                Err(CliError::Invalid { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{key}: unexpected {other:?}"),
            }
        }
        cfg.set("h", "none").unwrap();
        assert_eq!(cfg.h, None);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for (text, want) in [
            ("gamma = 0.5\nbogus = 3\n", 2),
            ("\n\ngamma 0.5\n", 3),
            ("N = 256\nseed = -4\n", 2),
        ] {
            let f = file(text);
            let s = Sources {
                file: Some(f.path().into()),
                ..Sources::default()
            };
            match s.load(no_env) {
                Err(CliError::ConfigParse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn echo_parses_back_to_the_same_config() {
        let mut cfg = PipelineConfig::default();
        for (k, v) in [
            ("gamma", "0.65"),
            ("h", "0.001"),
            ("seed", "12"),
            ("execution", "sequential"),
        ] {
            cfg.set(k, v).unwrap();
        }
        cfg.output_dir = PathBuf::from("some dir/out");
        let f = file(&cfg.echo("example --id 1"));
        let s = Sources {
            file: Some(f.path().into()),
            ..Sources::default()
        };
        assert_eq!(s.load(no_env).unwrap(), cfg);
        for key in KEYS {
            assert!(cfg.get(key).is_some());
        }
        assert!(cfg.get("nope").is_none());
    }
}
