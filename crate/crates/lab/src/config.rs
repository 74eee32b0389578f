//! Flat `key = value` run configuration with command-line overrides.

use crate::emit::fmt17;
use crate::error::{LabError, Result};
use aclab_core::elliptic::layer_nodes_per_eps;
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "ACLAB_OUT";

/// Smallest admissible number of grid nodes across one ε of the layer.
pub const MIN_NODES_PER_EPS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Profiles,
    Dirichlet,
    BalancedEnergy,
    ExpansionOrder,
    VariationCheck,
    Spectrum,
    MountainPass,
    StrongMinmax,
    Descend,
    Diagnose,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Profiles,
        Kind::Dirichlet,
        Kind::BalancedEnergy,
        Kind::ExpansionOrder,
        Kind::VariationCheck,
        Kind::Spectrum,
        Kind::MountainPass,
        Kind::StrongMinmax,
        Kind::Descend,
        Kind::Diagnose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Profiles => "profiles",
            Kind::Dirichlet => "dirichlet",
            Kind::BalancedEnergy => "balanced-energy",
            Kind::ExpansionOrder => "expansion-order",
            Kind::VariationCheck => "variation-check",
            Kind::Spectrum => "spectrum",
            Kind::MountainPass => "mountain-pass",
            Kind::StrongMinmax => "strong-minmax",
            Kind::Descend => "descend",
            Kind::Diagnose => "diagnose",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::Invalid(format!("unknown experiment kind '{s}'")))
    }
}

/// Which Neumann strip carries the hypersurface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strip {
    /// x ∈ [−π, π]
    Centred,
    /// x ∈ [0, 2π]
    Shifted,
}

impl Strip {
    pub fn name(self) -> &'static str {
        match self {
            Strip::Centred => "centred",
            Strip::Shifted => "shifted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: Kind,
    pub a: f64,
    pub b: f64,
    pub one_d: bool,
    pub eps: Vec<f64>,
    /// Columns of the x-grid on each side.
    pub res: usize,
    pub ny: usize,
    pub strip: Strip,
    /// Position of the base circle.
    pub c: f64,
    pub r: f64,
    pub delta: f64,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    /// Fourier mode of the variation direction (0 = constant).
    pub mode: usize,
    pub z_max: f64,
    pub profile_res: usize,
    pub steps: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults, adjusted per kind to the settings the experiment was tuned for.
    pub fn new(kind: Kind) -> Self {
        let mut cfg = Self::base(kind);
        match kind {
            Kind::BalancedEnergy => {
                cfg.one_d = true;
                cfg.ny = 1;
                cfg.eps = vec![0.02];
            }
            Kind::ExpansionOrder => {
                // the residual drops below the O(dx^2) floor of coarser grids
                cfg.res = 801;
                cfg.ny = 1;
                cfg.eps = vec![0.08, 0.04, 0.02];
            }
            Kind::VariationCheck => {
                cfg.ny = 16;
                cfg.c = 0.4;
            }
            Kind::Spectrum => cfg.ny = 32,
            Kind::MountainPass => {
                cfg.r = 0.7;
                cfg.delta = 0.1;
            }
            Kind::Descend => {
                cfg.r = 0.1;
                cfg.delta = 0.05;
                cfg.trials = 10;
            }
            _ => {}
        }
        cfg
    }

    fn base(kind: Kind) -> Self {
        Self {
            kind,
            a: 2.0,
            b: 0.3,
            one_d: false,
            eps: vec![0.05],
            res: 161,
            ny: 8,
            strip: Strip::Centred,
            c: 0.0,
            r: 0.2,
            delta: 0.1,
            m: 33,
            trials: 20,
            seed: 0,
            mode: 0,
            z_max: 30.0,
            profile_res: 4096,
            steps: 400,
            out: None,
        }
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(kind: Kind, text: &str) -> Result<Self> {
        let mut cfg = Self::new(kind);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::Parse { line: i + 1, msg: format!("expected key = value, got '{line}'") })?;
            cfg.set(k.trim(), v.trim())
                .map_err(|msg| LabError::Parse { line: i + 1, msg })?;
        }
        Ok(cfg)
    }

    pub fn load(kind: Kind, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LabError::Io { path: path.display().to_string(), source })?;
        Self::parse(kind, &text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("bad value '{v}' for {key}"))
        }
        match key {
            "kind" => {
                if value != self.kind.name() {
                    return Err(format!("config is for '{value}', run requested '{}'", self.kind));
                }
            }
            "a" => self.a = num(key, value)?,
            "b" => self.b = num(key, value)?,
            "one_d" => self.one_d = num(key, value)?,
            "eps" => {
                self.eps = value
                    .split(',')
                    .map(|s| num(key, s.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "res" => self.res = num(key, value)?,
            "ny" => self.ny = num(key, value)?,
            "strip" => {
                self.strip = match value {
                    "centred" => Strip::Centred,
                    "shifted" => Strip::Shifted,
                    _ => return Err(format!("strip must be centred or shifted, got '{value}'")),
                }
            }
            "c" => self.c = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "mode" => self.mode = num(key, value)?,
            "z_max" => self.z_max = num(key, value)?,
            "profile_res" => self.profile_res = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Check the invariants; the message names the one violated.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Invalid(m));
        if self.eps.is_empty() {
            return bad("eps list is empty".into());
        }
        if self.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad("eps list must be positive".into());
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps list must be strictly descending".into());
        }
        let per_eps = layer_nodes_per_eps(self.res);
        if per_eps < MIN_NODES_PER_EPS {
            return bad(format!(
                "resolution {} gives {per_eps:.2} nodes per eps at eps = {}, need >= {MIN_NODES_PER_EPS}",
                self.res,
                self.eps.last().unwrap()
            ));
        }
        if self.ny < 1 || (self.one_d && self.ny != 1) {
            return bad("ny must be >= 1 (exactly 1 in 1-D)".into());
        }
        if !(self.a > self.b.abs() && self.b.is_finite()) {
            return bad("metric needs a > |b|".into());
        }
        if !(self.r > 0.0 && self.delta > 0.0) {
            return bad("admissible radii r and delta must be positive".into());
        }
        if self.m < 3 {
            return bad("path needs m >= 3 nodes".into());
        }
        Ok(())
    }

    /// Canonical text of every setting that affects results.
    pub fn canonical(&self) -> String {
        let eps: Vec<String> = self.eps.iter().map(|e| fmt17(*e)).collect();
        format!(
            "kind={}\na={}\nb={}\none_d={}\neps={}\nres={}\nny={}\nstrip={}\nc={}\nr={}\ndelta={}\nm={}\ntrials={}\nseed={}\nmode={}\nz_max={}\nprofile_res={}\nsteps={}\n",
            self.kind,
            fmt17(self.a),
            fmt17(self.b),
            self.one_d,
            eps.join(","),
            self.res,
            self.ny,
            self.strip.name(),
            fmt17(self.c),
            fmt17(self.r),
            fmt17(self.delta),
            self.m,
            self.trials,
            self.seed,
            self.mode,
            fmt17(self.z_max),
            self.profile_res,
            self.steps,
        )
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Explicit `out`, else `$ACLAB_OUT/<kind>-<hash>`, else `./aclab-out/<kind>-<hash>`.
    pub fn output_dir(&self) -> PathBuf {
        if let Some(out) = &self.out {
            return out.clone();
        }
        let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("aclab-out"));
        root.join(format!("{}-{}", self.kind, &self.hash()[..12]))
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub eps: Option<Vec<f64>>,
    pub res: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(e) = &self.eps {
            cfg.eps = e.clone();
        }
        if let Some(r) = self.res {
            cfg.res = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
    }
}
