//! Run configuration: JSON schema, defaults and validation.

use std::path::{Path, PathBuf};

use discofield_core::field::ModelConfig;
use discofield_core::hermite::QuadratureSpec;
use discofield_core::mass::MassSectorParams;
use discofield_core::operator::GridSpec;
use discofield_core::relativistic::{on_shell, DispersionTensor, FourMeans, DEFAULT_DIMENSION_CAP};
use nalgebra::Matrix4;
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::report::{obj, Node};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config: {0}")]
    Validation(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation(msg.into())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub hermite: f64,
    pub spectrum_ladder: f64,
    pub grid_relative: f64,
    pub convergence_order: f64,
    pub mass_spectrum: f64,
    pub mass_forms: f64,
    pub tensor_spectrum: f64,
    pub commutator: f64,
    pub hermiticity: f64,
    pub clifford: f64,
    pub factorization: f64,
    pub constraint_relative: f64,
    pub constraint_accuracy: f64,
    pub resonance: f64,
    pub scalar_residual: f64,
    pub nullspace: f64,
    pub translation: f64,
    pub fermion_factor: f64,
    pub fermion_floor: f64,
    pub fermion_degeneracy: f64,
    pub baseline: f64,
    pub off_shell_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermite: 1e-8,
            spectrum_ladder: 1e-12,
            grid_relative: 1e-3,
            convergence_order: 0.3,
            mass_spectrum: 1e-12,
            mass_forms: 1e-14,
            tensor_spectrum: 1e-10,
            commutator: 1e-12,
            hermiticity: 1e-12,
            clifford: 1e-13,
            factorization: 1e-10,
            constraint_relative: 1e-10,
            constraint_accuracy: 1e-10,
            resonance: 1e-12,
            scalar_residual: 1e-9,
            nullspace: 1e-10,
            translation: 1e-12,
            fermion_factor: 10.0,
            fermion_floor: 1e-12,
            fermion_degeneracy: 1e-10,
            baseline: 1e-12,
            off_shell_floor: 1e-8,
        }
    }
}

impl Tolerances {
    /// Multiplies every residual tolerance by `s`. The convergence band,
    /// the consistency factor, the degeneracy threshold and the off-shell
    /// floor are not residual bounds and stay as they are.
    pub fn scaled(&self, s: f64) -> Self {
        let mut t = self.clone();
        for v in [
            &mut t.hermite,
            &mut t.spectrum_ladder,
            &mut t.grid_relative,
            &mut t.mass_spectrum,
            &mut t.mass_forms,
            &mut t.tensor_spectrum,
            &mut t.commutator,
            &mut t.hermiticity,
            &mut t.clifford,
            &mut t.factorization,
            &mut t.constraint_relative,
            &mut t.constraint_accuracy,
            &mut t.resonance,
            &mut t.scalar_residual,
            &mut t.nullspace,
            &mut t.translation,
            &mut t.fermion_floor,
            &mut t.baseline,
        ] {
            *v *= s;
        }
        t
    }

    fn fields(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("hermite", self.hermite),
            ("spectrum_ladder", self.spectrum_ladder),
            ("grid_relative", self.grid_relative),
            ("convergence_order", self.convergence_order),
            ("mass_spectrum", self.mass_spectrum),
            ("mass_forms", self.mass_forms),
            ("tensor_spectrum", self.tensor_spectrum),
            ("commutator", self.commutator),
            ("hermiticity", self.hermiticity),
            ("clifford", self.clifford),
            ("factorization", self.factorization),
            ("constraint_relative", self.constraint_relative),
            ("constraint_accuracy", self.constraint_accuracy),
            ("resonance", self.resonance),
            ("scalar_residual", self.scalar_residual),
            ("nullspace", self.nullspace),
            ("translation", self.translation),
            ("fermion_factor", self.fermion_factor),
            ("fermion_floor", self.fermion_floor),
            ("fermion_degeneracy", self.fermion_degeneracy),
            ("baseline", self.baseline),
            ("off_shell_floor", self.off_shell_floor),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct Cutoffs {
    pub one_d: usize,
    pub mass: usize,
    pub tensor: [usize; 4],
    pub scalar: [usize; 5],
    pub fermion: [usize; 5],
    pub dimension_cap: usize,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self {
            one_d: 32,
            mass: 16,
            tensor: [3; 4],
            scalar: [4, 4, 4, 4, 8],
            fermion: [2; 5],
            dimension_cap: DEFAULT_DIMENSION_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct GridSettings {
    pub points: usize,
    pub half_width: f64,
    pub refinement: Vec<usize>,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            points: 1024,
            half_width: 8.0,
            refinement: vec![256, 512, 1024],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct HermiteSettings {
    pub max_n: usize,
    pub parameter_sets: usize,
    pub quadrature_order: usize,
}

impl Default for HermiteSettings {
    fn default() -> Self {
        Self {
            max_n: 20,
            parameter_sets: 10,
            quadrature_order: 64,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
struct RawConfig {
    #[serde(rename = "B")]
    b: Option<Value>,
    #[serde(rename = "M")]
    mass: Option<f64>,
    dm: Option<f64>,
    #[serde(rename = "T")]
    tau_mean: Option<f64>,
    #[serde(rename = "X")]
    x: Option<[f64; 4]>,
    #[serde(rename = "Pvec")]
    pvec: Option<[f64; 3]>,
    #[serde(rename = "P0")]
    p0: Option<f64>,
    max_n: Option<usize>,
    cutoffs: Option<Cutoffs>,
    grid: Option<GridSettings>,
    hermite: Option<HermiteSettings>,
    sample_points: Option<usize>,
    tolerances: Option<Tolerances>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

pub const DEFAULT_B_DIAG: [f64; 4] = [4.0, 1.0, 1.0, 1.0];
pub const DEFAULT_SEED: u64 = 42;

/// Fully validated configuration with every default materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub b: [[f64; 4]; 4],
    pub mass: f64,
    pub dm: f64,
    pub tau_mean: f64,
    pub x: [f64; 4],
    pub p: [f64; 4],
    /// `P0` was filled in from the mass shell.
    pub p0_completed: bool,
    pub max_n: usize,
    pub cutoffs: Cutoffs,
    pub grid: GridSettings,
    pub hermite: HermiteSettings,
    pub sample_points: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    model: ModelConfig<f64>,
}

impl RunConfig {
    pub fn model(&self) -> &ModelConfig<f64> {
        &self.model
    }

    pub fn b_is_diagonal(&self) -> bool {
        self.model.b().is_diagonal()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_output_dir(mut self, dir: PathBuf) -> Self {
        self.output_dir = Some(dir);
        self
    }

    pub fn with_dimension_cap(mut self, cap: usize) -> Result<Self, ConfigError> {
        if cap == 0 {
            return Err(invalid("cutoff cap must be positive"));
        }
        self.cutoffs.dimension_cap = cap;
        Ok(self)
    }

    pub fn with_tolerance_scale(mut self, s: f64) -> Result<Self, ConfigError> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(invalid(format!(
                "tolerance scale must be positive and finite, got {s}"
            )));
        }
        self.tolerances = self.tolerances.scaled(s);
        Ok(self)
    }

    /// Echo of the resolved configuration for reports. The output directory
    /// is left out so reports do not depend on where they are written.
    pub fn echo(&self) -> Node {
        let c = &self.cutoffs;
        obj([
            (
                "B",
                Node::from(self.b.iter().map(|r| Node::from(*r)).collect::<Vec<_>>()),
            ),
            ("M", self.mass.into()),
            ("dm", self.dm.into()),
            ("T", self.tau_mean.into()),
            ("X", self.x.into()),
            ("P", self.p.into()),
            ("P0_completed", self.p0_completed.into()),
            ("max_n", self.max_n.into()),
            (
                "cutoffs",
                obj([
                    ("one_d", c.one_d.into()),
                    ("mass", c.mass.into()),
                    ("tensor", c.tensor.into()),
                    ("scalar", c.scalar.into()),
                    ("fermion", c.fermion.into()),
                    ("dimension_cap", c.dimension_cap.into()),
                ]),
            ),
            (
                "grid",
                obj([
                    ("points", self.grid.points.into()),
                    ("half_width", self.grid.half_width.into()),
                    ("refinement", self.grid.refinement.clone().into()),
                ]),
            ),
            (
                "hermite",
                obj([
                    ("max_n", self.hermite.max_n.into()),
                    ("parameter_sets", self.hermite.parameter_sets.into()),
                    ("quadrature_order", self.hermite.quadrature_order.into()),
                ]),
            ),
            ("sample_points", self.sample_points.into()),
            (
                "tolerances",
                obj(self
                    .tolerances
                    .fields()
                    .into_iter()
                    .map(|(k, v)| (k, Node::from(v)))),
            ),
            ("seed", self.seed.into()),
        ])
    }
}

/// The built-in configuration: `B = diag(4,1,1,1)`, `M = 1`, `dm = 1`, at rest.
pub fn default_config() -> RunConfig {
    parse_config("{}").expect("built-in defaults are valid")
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if !value.is_object() {
        return Err(invalid("top level must be a JSON object"));
    }
    let mut unknown = Vec::new();
    let raw: RawConfig = serde_ignored::deserialize(value, |path| {
        unknown.push(path.to_string().replace(".?", "").replace("?.", ""))
    })
    .map_err(|e| invalid(e.to_string()))?;
    if let Some(Value::Object(m)) = &raw.b {
        unknown.extend(m.keys().filter(|k| *k != "diag").map(|k| format!("B.{k}")));
    }
    if !unknown.is_empty() {
        return Err(invalid(format!("unknown keys: {}", unknown.join(", "))));
    }
    resolve(raw)
}

fn parse_tensor(v: &Value) -> Result<Matrix4<f64>, ConfigError> {
    let shape = || invalid("B must be {\"diag\": [4 numbers]} or a 4x4 array");
    match v {
        Value::Object(m) => {
            let d: [f64; 4] = serde_json::from_value(m.get("diag").cloned().ok_or_else(shape)?)
                .map_err(|_| shape())?;
            Ok(Matrix4::from_diagonal(&d.into()))
        }
        Value::Array(_) => {
            let rows: [[f64; 4]; 4] = serde_json::from_value(v.clone()).map_err(|_| shape())?;
            Ok(Matrix4::from_fn(|i, j| rows[i][j]))
        }
        _ => Err(shape()),
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let bm = match &raw.b {
        Some(v) => parse_tensor(v)?,
        None => Matrix4::from_diagonal(&DEFAULT_B_DIAG.into()),
    };
    let b = DispersionTensor::new(bm).map_err(|e| invalid(format!("B: {e}")))?;
    let mass = raw.mass.unwrap_or(1.0);
    let dm = raw.dm.unwrap_or(1.0);
    let tau_mean = raw.tau_mean.unwrap_or(0.0);
    let x = raw.x.unwrap_or([0.0; 4]);
    let pvec = raw.pvec.unwrap_or([0.0; 3]);
    if !mass.is_finite() || !x.iter().chain(&pvec).all(|v| v.is_finite()) {
        return Err(invalid("means and mass must be finite"));
    }
    let mass_params =
        MassSectorParams::new(mass, tau_mean, dm).map_err(|e| invalid(e.to_string()))?;
    let (p, p0_completed) = match raw.p0 {
        Some(p0) => ([p0, pvec[0], pvec[1], pvec[2]], false),
        None => (
            on_shell(mass, pvec).map_err(|e| invalid(e.to_string()))?,
            true,
        ),
    };
    let model = ModelConfig::new(b, FourMeans::new(x, p), mass_params)
        .map_err(|e| invalid(format!("mass shell violated: {e}")))?;

    let cutoffs = raw.cutoffs.unwrap_or_default();
    if cutoffs.one_d < 4 || cutoffs.mass < 4 {
        return Err(invalid("one_d and mass cutoffs must be >= 4"));
    }
    if cutoffs
        .tensor
        .iter()
        .chain(&cutoffs.scalar)
        .chain(&cutoffs.fermion)
        .any(|&n| n < 2)
    {
        return Err(invalid("product basis cutoffs must be >= 2"));
    }
    if cutoffs.dimension_cap == 0 {
        return Err(invalid("dimension_cap must be positive"));
    }
    let grid = raw.grid.unwrap_or_default();
    GridSpec::new(grid.half_width, grid.points).map_err(|e| invalid(format!("grid: {e}")))?;
    if grid.refinement.len() < 2 || grid.refinement.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(
            "grid.refinement needs at least two increasing point counts",
        ));
    }
    for &n in &grid.refinement {
        GridSpec::new(grid.half_width, n).map_err(|e| invalid(format!("grid.refinement: {e}")))?;
    }
    let hermite = raw.hermite.unwrap_or_default();
    QuadratureSpec::with_order(hermite.quadrature_order)
        .map_err(|e| invalid(format!("hermite: {e}")))?;
    if hermite.quadrature_order < hermite.max_n + 2 {
        return Err(invalid(format!(
            "hermite.quadrature_order {} cannot resolve max_n {}",
            hermite.quadrature_order, hermite.max_n
        )));
    }
    let tolerances = raw.tolerances.unwrap_or_default();
    if let Some((k, v)) = tolerances
        .fields()
        .into_iter()
        .find(|(_, v)| !(*v > 0.0) || !v.is_finite())
    {
        return Err(invalid(format!("tolerance {k} must be positive, got {v}")));
    }
    let sample_points = raw
        .sample_points
        .unwrap_or(discofield_core::sampling::DEFAULT_GAUSSIAN_POINTS);
    if sample_points == 0 {
        return Err(invalid("sample_points must be positive"));
    }
    Ok(RunConfig {
        b: std::array::from_fn(|i| std::array::from_fn(|j| model.b().get(i, j))),
        mass,
        dm,
        tau_mean,
        x,
        p,
        p0_completed,
        max_n: raw.max_n.unwrap_or(2),
        cutoffs,
        grid,
        hermite,
        sample_points,
        tolerances,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        output_dir: raw.output_dir,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_on_shell() {
        let c = default_config();
        assert_eq!(c.p, [1.0, 0.0, 0.0, 0.0]);
        assert!(c.p0_completed);
        assert!(c.b_is_diagonal());
    }

    #[test]
    fn full_tensor_form() {
        let c = parse_config(r#"{"B": [[2,0.1,0,0],[0.1,1,0,0],[0,0,1,0],[0,0,0,1]]}"#).unwrap();
        assert!(!c.b_is_diagonal());
        assert_eq!(c.b[0][1], 0.1);
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_config("{\n  \"M\": 1,\n  oops\n}") {
            Err(ConfigError::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nested_unknown_keys_are_listed() {
        let err = parse_config(r#"{"tolerances": {"hermit": 1e-8}, "grid": {"pts": 3}, "B": {"diag": [1,1,1,1], "x": 1}}"#)
            .unwrap_err()
            .to_string();
        for k in ["tolerances.hermit", "grid.pts", "B.x"] {
            assert!(err.contains(k), "{err}");
        }
    }

    #[test]
    fn explicit_p0_must_be_on_shell() {
        assert!(parse_config(r#"{"M": 1, "P0": 1, "Pvec": [0,0,0]}"#).is_ok());
        let err = parse_config(r#"{"M": 1, "P0": 2, "Pvec": [0,0,0]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("mass shell"), "{err}");
    }

    #[test]
    fn tolerance_scale() {
        let c = default_config().with_tolerance_scale(10.0).unwrap();
        assert_eq!(c.tolerances.hermite, 1e-7);
        assert_eq!(c.tolerances.fermion_factor, 10.0);
        assert!(default_config().with_tolerance_scale(0.0).is_err());
    }
}
