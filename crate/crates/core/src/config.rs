//! Run configuration: one TOML or JSON file per experiment plus dotted-path overrides.
//!
//! Every section has defaults, unknown keys are rejected, and validation errors name
//! the offending field (`grid.n_cells: ...`).

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, Stretch};
use crate::params::Params;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelCfg,
    pub grid: GridCfg,
    pub spectral: SpectralCfg,
    pub family: FamilyCfg,
    pub evolve: EvolveCfg,
    pub modulate: ModulateCfg,
    pub virial: VirialCfg,
    pub lorentz: LorentzCfg,
    /// Recorded in the manifest; only used by randomized checks.
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModelCfg {
    pub d: usize,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridCfg {
    pub n_cells: usize,
    pub r_max: f64,
    /// `uniform` or `sinh:<kappa>`.
    pub stretch: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralCfg {
    pub clamp: f64,
    pub tol: f64,
    pub max_refine: usize,
    /// Run the full eigenvalue scan of the linearized operator.
    pub scan: bool,
    pub zero_tol: f64,
    /// Cross-check `e₀` with the shooting oracle.
    pub shooting: bool,
    /// Directory for cached eigenpairs (none disables caching).
    pub cache_dir: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyCfg {
    /// `+1` for `W⁺`, `-1` for `W⁻`.
    pub sign: i32,
    pub order: usize,
    /// Data time `t₀` is set by `e^{-e₀t₀} = q_start`.
    pub q_start: f64,
    /// Slope-fit window length in units of `1/e₀`.
    pub slope_span: f64,
    pub slope_points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveCfg {
    /// `wminus`, `wplus`, `ground`, `gaussian` or `file`.
    pub data: String,
    /// Multiplies `ground` and `gaussian` data.
    pub amplitude: f64,
    pub width: f64,
    /// Container file for `data = "file"`.
    pub input: Option<String>,
    /// `start:end` offsets from the data time; `end` may be written `<x>/e0`.
    pub t_span: String,
    pub dt: f64,
    pub sample_every: usize,
    /// Write a field container every this many samples (0 disables).
    pub snapshot_every: usize,
    pub free: bool,
    pub sponge: f64,
    pub blowup_factor: f64,
    pub energy_tol: f64,
    pub local_r0: f64,
    /// Any of `modulation`, `virial`.
    pub observers: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModulateCfg {
    /// Container files to decompose, in time order (`t` header key used when present).
    pub inputs: Vec<String>,
    /// `δ₀` as a fraction of `‖∇W‖²`.
    pub delta0_fraction: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct VirialCfg {
    pub radius: f64,
    /// Macro step of the second time difference.
    pub h: f64,
    /// Number of check points along the run.
    pub samples: usize,
    /// Per-sample tolerance is `c_dt·dt² + floor·R²`.
    pub c_dt: f64,
    pub floor: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LorentzCfg {
    /// Container file; the ground state when absent.
    pub input: Option<String>,
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    /// Also report the weak (`ρ = ∞`) quasi-norm.
    pub weak: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            model: ModelCfg::default(),
            grid: GridCfg::default(),
            spectral: SpectralCfg::default(),
            family: FamilyCfg::default(),
            evolve: EvolveCfg::default(),
            modulate: ModulateCfg::default(),
            virial: VirialCfg::default(),
            lorentz: LorentzCfg::default(),
            seed: 0,
        }
    }
}

impl Default for ModelCfg {
    fn default() -> Self {
        ModelCfg { d: 3, b: 0.3 }
    }
}

impl Default for GridCfg {
    fn default() -> Self {
        GridCfg { n_cells: 2048, r_max: 100.0, stretch: "sinh:6".into() }
    }
}

impl Default for SpectralCfg {
    fn default() -> Self {
        SpectralCfg { clamp: 1e-4, tol: 1e-12, max_refine: 8, scan: false, zero_tol: 1e-3, shooting: false, cache_dir: None }
    }
}

impl Default for FamilyCfg {
    fn default() -> Self {
        FamilyCfg { sign: -1, order: 3, q_start: 0.05, slope_span: 3.0, slope_points: 25 }
    }
}

impl Default for EvolveCfg {
    fn default() -> Self {
        EvolveCfg {
            data: "wminus".into(),
            amplitude: 1.0,
            width: 1.0,
            input: None,
            t_span: "0:2/e0".into(),
            dt: 1e-4,
            sample_every: 100,
            snapshot_every: 0,
            free: false,
            sponge: 0.0,
            blowup_factor: 50.0,
            energy_tol: 1e-2,
            local_r0: 1.0,
            observers: vec!["modulation".into(), "virial".into()],
        }
    }
}

impl Default for ModulateCfg {
    fn default() -> Self {
        ModulateCfg { inputs: vec![], delta0_fraction: 0.05 }
    }
}

impl Default for VirialCfg {
    fn default() -> Self {
        VirialCfg { radius: 10.0, h: 0.01, samples: 8, c_dt: 1e4, floor: 1e-4 }
    }
}

impl Default for LorentzCfg {
    fn default() -> Self {
        LorentzCfg { input: None, r: vec![2.0, 3.0, 6.0], rho: vec![1.0, 2.0], weak: true }
    }
}

fn field_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {msg}"))
}

/// Parsed `t_span`: offsets from the data time, the end optionally in units of `1/e₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSpan {
    pub start: f64,
    pub end: f64,
    pub end_in_e0_units: bool,
}

impl TimeSpan {
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| field_err("evolve.t_span", format!("expected start:end, got {s:?}")))?;
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| field_err("evolve.t_span", format!("{x:?} is not a number")));
        let start = num(a)?;
        let (end, unit) = match b.trim().strip_suffix("/e0") {
            Some(x) => (num(x)?, true),
            None => (num(b)?, false),
        };
        if !(start.is_finite() && end.is_finite()) || start == end && !unit {
            return Err(field_err("evolve.t_span", "empty or non-finite span"));
        }
        Ok(TimeSpan { start, end, end_in_e0_units: unit })
    }

    /// `(start, end)` offsets given `e₀`.
    pub fn resolve(&self, e0: Option<f64>) -> Result<(f64, f64)> {
        if self.end_in_e0_units {
            let e0 = e0.ok_or_else(|| field_err("evolve.t_span", "`/e0` needs W± data"))?;
            Ok((self.start, self.end / e0))
        } else {
            Ok((self.start, self.end))
        }
    }
}

impl Config {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let json = path.extension().is_some_and(|e| e == "json");
        Self::from_text(&text, json)
    }

    pub fn from_text(text: &str, json: bool) -> Result<Self> {
        let value = if json {
            serde_json::from_str::<serde_json::Value>(text).map_err(|e| Error::Config(format!("json: {e}")))?
        } else {
            let t: toml::Value = toml::from_str(text).map_err(|e| Error::Config(format!("toml: {e}")))?;
            serde_json::to_value(t).map_err(|e| Error::Config(e.to_string()))?
        };
        Self::from_value(value)
    }

    fn from_value(value: serde_json::Value) -> Result<Self> {
        let cfg: Config = serde_path_to_error::deserialize(value).map_err(|e| {
            let p = e.path().to_string();
            Error::Config(format!("{}: {}", if p == "." { "config".into() } else { p }, e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `section.key=value` overrides; values are parsed as TOML (bare words become strings).
    pub fn with_overrides(&self, sets: &[String]) -> Result<Self> {
        let mut v = serde_json::to_value(self).map_err(|e| Error::Config(e.to_string()))?;
        for s in sets {
            let (path, raw) = s.split_once('=').ok_or_else(|| Error::Config(format!("override {s:?}: expected key=value")))?;
            let val: serde_json::Value = match toml::from_str::<toml::Table>(&format!("x = {raw}")) {
                Ok(t) => serde_json::to_value(&t["x"]).map_err(|e| Error::Config(e.to_string()))?,
                Err(_) => serde_json::Value::String(raw.to_string()),
            };
            let mut node = &mut v;
            let parts: Vec<&str> = path.trim().split('.').collect();
            for (i, p) in parts.iter().enumerate() {
                let obj = node.as_object_mut().ok_or_else(|| field_err(path, "not a section"))?;
                if i + 1 == parts.len() {
                    if !obj.contains_key(*p) && !matches!(*p, "cache_dir" | "input") {
                        return Err(field_err(path, "unknown field"));
                    }
                    obj.insert(p.to_string(), val.clone());
                    break;
                }
                node = obj.get_mut(*p).ok_or_else(|| field_err(path, "unknown section"))?;
            }
        }
        Self::from_value(v)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(3..=5).contains(&m.d) {
            return Err(field_err("model.d", format!("must be 3, 4 or 5, got {}", m.d)));
        }
        Params::new(m.d, m.b).map_err(|e| field_err("model.b", e))?;
        let g = &self.grid;
        if g.n_cells < 16 {
            return Err(field_err("grid.n_cells", format!("must be at least 16, got {}", g.n_cells)));
        }
        if !(g.r_max > 0.0 && g.r_max.is_finite()) {
            return Err(field_err("grid.r_max", format!("must be positive, got {}", g.r_max)));
        }
        Stretch::parse(&g.stretch).ok_or_else(|| field_err("grid.stretch", format!("expected `uniform` or `sinh:<kappa>`, got {:?}", g.stretch)))?;
        let s = &self.spectral;
        if !(s.clamp > 0.0) || !(s.tol > 0.0) || !(s.zero_tol > 0.0) {
            return Err(field_err("spectral", "clamp, tol and zero_tol must be positive"));
        }
        let f = &self.family;
        if f.sign != 1 && f.sign != -1 {
            return Err(field_err("family.sign", format!("must be 1 or -1, got {}", f.sign)));
        }
        if f.order == 0 || f.order > crate::approx::K_MAX {
            return Err(field_err("family.order", format!("must be in 1..={}, got {}", crate::approx::K_MAX, f.order)));
        }
        if !(f.q_start > 0.0 && f.q_start < 1.0) {
            return Err(field_err("family.q_start", format!("must lie in (0,1), got {}", f.q_start)));
        }
        if f.slope_points < 3 || !(f.slope_span > 0.0) {
            return Err(field_err("family.slope_points", "need at least 3 points over a positive span"));
        }
        let e = &self.evolve;
        if !["wminus", "wplus", "ground", "gaussian", "file"].contains(&e.data.as_str()) {
            return Err(field_err("evolve.data", format!("unknown data kind {:?}", e.data)));
        }
        if e.data == "file" && e.input.is_none() {
            return Err(field_err("evolve.input", "required when data = \"file\""));
        }
        TimeSpan::parse(&e.t_span)?;
        if !(e.dt > 0.0) || e.sample_every == 0 {
            return Err(field_err("evolve.dt", "dt and sample_every must be positive"));
        }
        if let Some(o) = e.observers.iter().find(|o| !["modulation", "virial"].contains(&o.as_str())) {
            return Err(field_err("evolve.observers", format!("unknown observer {o:?}")));
        }
        if !(self.virial.radius > 0.0) || !(self.virial.h > 0.0) || self.virial.samples == 0 {
            return Err(field_err("virial", "radius, h and samples must be positive"));
        }
        if self.lorentz.r.iter().any(|&r| !(r > 0.0)) || self.lorentz.rho.iter().any(|&r| !(r > 0.0)) {
            return Err(field_err("lorentz", "exponents must be positive"));
        }
        if !(self.modulate.delta0_fraction > 0.0) {
            return Err(field_err("modulate.delta0_fraction", "must be positive"));
        }
        Ok(())
    }

    pub fn params(&self) -> Params<f64> {
        Params::new(self.model.d, self.model.b).expect("validated")
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid<f64>>> {
        let st = Stretch::parse(&self.grid.stretch).expect("validated");
        Ok(Arc::new(RadialGrid::new(self.model.d, self.grid.n_cells, self.grid.r_max, st)?))
    }

    /// Canonical JSON (sorted keys).
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("serializable");
        serde_json::to_string(&v).expect("serializable")
    }

    /// SHA-256 of [`Config::canonical_json`].
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_json().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
