use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Moments,
    Bt,
    Hull,
    Sadh,
    Approx,
    Catalog,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Moments,
        Command::Bt,
        Command::Hull,
        Command::Sadh,
        Command::Approx,
        Command::Catalog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Bt => "bt",
            Command::Hull => "hull",
            Command::Sadh => "sadh",
            Command::Approx => "approx",
            Command::Catalog => "catalog",
        }
    }

    /// Acceptance criteria the subcommand reproduces.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Command::Moments => &[1, 8],
            Command::Bt => &[2],
            Command::Hull => &[3, 4],
            Command::Sadh => &[5],
            Command::Approx => &[6, 7],
            Command::Catalog => &[7],
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Command::Moments => "moment test on elliptic surfaces; CR residuals on zbar-z",
            Command::Bt => "Gaussian convolution approximants on w = |z|^2",
            Command::Hull => "iterated disc hulls (zbar-z, signature-quadric, torus, torus-prime)",
            Command::Sadh => "shrinking dilation families from a stage-1 cloud on zbar-z",
            Command::Approx => "fiberwise graph approximation with a verification grid",
            Command::Catalog => "surface catalog and the condition (*) probe",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown subcommand `{s}`")))
    }
}

/// Every knob of a run. Stored next to the artifacts as `config.txt`, which
/// re-runs to identical outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub surface: Option<String>,
    pub lambda: Option<f64>,
    pub f: Option<String>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub t_grid: Vec<f64>,
    pub k_max: usize,
    pub mesh: usize,
    pub tol: f64,
    pub epsilon: Option<f64>,
    pub n_grid: Vec<f64>,
    pub degree: usize,
    pub degree_z: usize,
    pub degree_s: usize,
    pub box_radius: f64,
    pub grid: usize,
    pub stages: usize,
    pub samples: usize,
    pub c: f64,
    pub tar_epsilon: f64,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
    pub attach_tol: f64,
    pub boundary_mesh: usize,
    pub polys: usize,
    pub alpha: Vec<u32>,
    pub t_mesh: usize,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            surface: None,
            lambda: None,
            f: None,
            seed: 0,
            threads: None,
            out: None,
            t_grid: vec![0.1, 0.2, 0.4],
            k_max: 4,
            mesh: 256,
            tol: 1e-8,
            epsilon: None,
            n_grid: vec![16.0, 64.0, 256.0],
            degree: 8,
            degree_z: 16,
            degree_s: 24,
            box_radius: 0.5,
            grid: 101,
            stages: 2,
            samples: 100,
            c: 4.0,
            tar_epsilon: 0.02,
            k1: None,
            k2: None,
            k3: None,
            attach_tol: 1e-8,
            boundary_mesh: 64,
            polys: 50,
            alpha: vec![1, 1, 2],
            t_mesh: 64,
        }
    }

    /// Sets one key from its text form; keys are the `to_kv` names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        let bad = || CliError::Usage(format!("bad value for `{key}`: `{value}`"));
        fn num<T: FromStr>(v: &str, bad: impl Fn() -> CliError) -> Result<T, CliError> {
            v.parse().map_err(|_| bad())
        }
        fn list<T: FromStr>(v: &str, bad: impl Fn() -> CliError) -> Result<Vec<T>, CliError> {
            v.split(',')
                .map(|x| x.trim().parse().map_err(|_| bad()))
                .collect()
        }
        fn opt<T: FromStr>(v: &str, bad: impl Fn() -> CliError) -> Result<Option<T>, CliError> {
            if v.is_empty() || v == "none" {
                Ok(None)
            } else {
                v.parse().map(Some).map_err(|_| bad())
            }
        }
        let text = |v: &str| (!v.is_empty() && v != "none").then(|| v.to_string());
        match key {
            "command" => self.command = value.parse()?,
            "surface" => self.surface = text(value),
            "lambda" => self.lambda = opt(value, bad)?,
            "f" => self.f = text(value),
            "seed" => self.seed = num(value, bad)?,
            "threads" => self.threads = opt(value, bad)?,
            "out" => self.out = text(value).map(PathBuf::from),
            "t_grid" => self.t_grid = list(value, bad)?,
            "k_max" => self.k_max = num(value, bad)?,
            "mesh" => self.mesh = num(value, bad)?,
            "tol" => self.tol = num(value, bad)?,
            "epsilon" => self.epsilon = opt(value, bad)?,
            "n_grid" => self.n_grid = list(value, bad)?,
            "degree" => self.degree = num(value, bad)?,
            "degree_z" => self.degree_z = num(value, bad)?,
            "degree_s" => self.degree_s = num(value, bad)?,
            "box" => self.box_radius = num(value, bad)?,
            "grid" => self.grid = num(value, bad)?,
            "stages" => self.stages = num(value, bad)?,
            "samples" => self.samples = num(value, bad)?,
            "c" => self.c = num(value, bad)?,
            "tar_epsilon" => self.tar_epsilon = num(value, bad)?,
            "k1" => self.k1 = opt(value, bad)?,
            "k2" => self.k2 = opt(value, bad)?,
            "k3" => self.k3 = opt(value, bad)?,
            "attach_tol" => self.attach_tol = num(value, bad)?,
            "boundary_mesh" => self.boundary_mesh = num(value, bad)?,
            "polys" => self.polys = num(value, bad)?,
            "alpha" => self.alpha = list(value, bad)?,
            "t_mesh" => self.t_mesh = num(value, bad)?,
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<(), CliError> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected key = value, got `{line}`")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Parses a stored config; `command` must be present.
    pub fn from_kv(text: &str) -> Result<Self, CliError> {
        let command = text
            .lines()
            .filter_map(|l| l.split('#').next()?.split_once('='))
            .find(|(k, _)| k.trim() == "command")
            .ok_or_else(|| CliError::Usage("config has no `command`".into()))?
            .1
            .trim()
            .parse()?;
        let mut cfg = ExperimentConfig::new(command);
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or("none".to_string(), |x| x.to_string())
        }
        let mut m = BTreeMap::new();
        m.insert("command", self.command.to_string());
        m.insert("surface", opt(&self.surface));
        m.insert("lambda", opt(&self.lambda));
        m.insert("f", opt(&self.f));
        m.insert("seed", self.seed.to_string());
        m.insert("threads", opt(&self.threads));
        m.insert(
            "out",
            opt(&self.out.as_ref().map(|p| p.display().to_string())),
        );
        m.insert("t_grid", join(&self.t_grid));
        m.insert("k_max", self.k_max.to_string());
        m.insert("mesh", self.mesh.to_string());
        m.insert("tol", self.tol.to_string());
        m.insert("epsilon", opt(&self.epsilon));
        m.insert("n_grid", join(&self.n_grid));
        m.insert("degree", self.degree.to_string());
        m.insert("degree_z", self.degree_z.to_string());
        m.insert("degree_s", self.degree_s.to_string());
        m.insert("box", self.box_radius.to_string());
        m.insert("grid", self.grid.to_string());
        m.insert("stages", self.stages.to_string());
        m.insert("samples", self.samples.to_string());
        m.insert("c", self.c.to_string());
        m.insert("tar_epsilon", self.tar_epsilon.to_string());
        m.insert("k1", opt(&self.k1));
        m.insert("k2", opt(&self.k2));
        m.insert("k3", opt(&self.k3));
        m.insert("attach_tol", self.attach_tol.to_string());
        m.insert("boundary_mesh", self.boundary_mesh.to_string());
        m.insert("polys", self.polys.to_string());
        m.insert("alpha", join(&self.alpha));
        m.insert("t_mesh", self.t_mesh.to_string());
        m.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Output directory: `out` if set, else `$CRLAB_OUT`, else `crlab-out`.
    pub fn output_dir(&self) -> PathBuf {
        if let Some(o) = &self.out {
            return o.clone();
        }
        std::env::var_os("CRLAB_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("crlab-out"))
    }
}
