//! Scenario configuration: a single JSON document. Complex numbers are
//! `[re, im]` pairs and matrices are row-major lists of rows.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use weylstrip_core::dirac::{PlaneWave, SampledPotential};
use weylstrip_core::verify::ClosedForm;
use weylstrip_core::{CMat, PotentialProfile, Signature, SpectralParameter, C64};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Weyl,
    Evolve,
    Quarterplane,
    Recover,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Weyl => "weyl",
            Mode::Evolve => "evolve",
            Mode::Quarterplane => "quarterplane",
            Mode::Recover => "recover",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

pub type Complex = [f64; 2];
pub type MatrixSpec = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigSpec {
    pub m1: usize,
    pub m2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Constant {
        value: MatrixSpec,
    },
    PlaneWave {
        amplitude: MatrixSpec,
        wavenumber: f64,
        /// Offset added to the dispersion-relation frequency (non-solutions).
        #[serde(default)]
        frequency_shift: f64,
    },
    Sampled {
        grid: Vec<f64>,
        values: Vec<MatrixSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Zero,
    PlaneWave { amplitude: MatrixSpec, wavenumber: f64 },
    /// Boundary sample file; relative paths resolve against the config file.
    Csv { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub x_max: f64,
    pub t_max: f64,
    pub steps: usize,
    /// Chebyshev degree of boundary fits.
    pub degree: usize,
    pub jet_order: usize,
    /// Finite-difference spacing for residual checks.
    pub h: f64,
    /// Spatial point of the factorization check.
    pub x: f64,
    /// Lower bound on `Im z` in the quarter-plane domain.
    pub min_im: f64,
}

impl Default for Grids {
    fn default() -> Self {
        Self { x_max: 20.0, t_max: 1.0, steps: 4, degree: 40, jet_order: 8, h: 0.01, x: 1.0, min_im: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ode_tol: f64,
    pub accept_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode_tol: 1e-10, accept_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub sig: SigSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default)]
    pub z_list: Vec<Complex>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative paths resolve against; not part of the schema.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

pub fn matrix(spec: &MatrixSpec, rows: usize, cols: usize, what: &str) -> Result<CMat, CliError> {
    if spec.len() != rows || spec.iter().any(|r| r.len() != cols) {
        return Err(schema(format!("{what} must be a {rows}x{cols} matrix of [re, im] pairs")));
    }
    let m = CMat::from_fn(rows, cols, |r, c| C64::new(spec[r][c][0], spec[r][c][1]));
    if m.iter().any(|z| !z.is_finite()) {
        return Err(schema(format!("{what} has non-finite entries")));
    }
    Ok(m)
}

impl ScenarioConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn signature(&self) -> Result<Signature, CliError> {
        Signature::new(self.sig.m1, self.sig.m2).map_err(|e| schema(e.to_string()))
    }

    /// Checks that do not depend on numerics.
    pub fn validate(&self, mode: Mode) -> Result<(), CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(schema(format!("config mode '{}' does not match requested mode '{}'", m.name(), mode.name())));
            }
        }
        self.signature()?;
        for (i, z) in self.z_list.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(schema(format!("z_list[{i}] is not finite")));
            }
            let ok = if mode == Mode::Verify { z[1] >= 0.0 } else { z[1] > 0.0 };
            if !ok {
                return Err(schema(format!("z_list[{i}] = [{}, {}] must have Im z > 0 (Im z >= 0 in verify mode)", z[0], z[1])));
            }
        }
        let g = &self.grids;
        for (name, v) in [("x_max", g.x_max), ("t_max", g.t_max), ("h", g.h)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(schema(format!("grids.{name} must be positive and finite")));
            }
        }
        if !(g.x >= 0.0) || !(g.min_im > 0.0) {
            return Err(schema("grids.x must be nonnegative and grids.min_im positive"));
        }
        if g.steps == 0 {
            return Err(schema("grids.steps must be at least 1"));
        }
        for (name, v) in [("ode_tol", self.tolerances.ode_tol), ("accept_tol", self.tolerances.accept_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(schema(format!("tolerances.{name} must be positive and finite")));
            }
        }
        match mode {
            Mode::Weyl | Mode::Evolve | Mode::Verify if self.potential.is_none() => {
                Err(schema(format!("mode '{}' needs a potential", mode.name())))
            }
            Mode::Quarterplane | Mode::Recover if self.boundary.is_none() => {
                Err(schema(format!("mode '{}' needs a boundary", mode.name())))
            }
            _ => Ok(()),
        }
    }

    pub fn spectral_points(&self) -> Result<Vec<SpectralParameter>, CliError> {
        self.z_list
            .iter()
            .map(|z| SpectralParameter::new(z[0], z[1]).map_err(|e| schema(e.to_string())))
            .collect()
    }

    pub fn profile(&self) -> Result<PotentialProfile, CliError> {
        let sig = self.signature()?;
        let spec = self.potential.as_ref().ok_or_else(|| schema("missing potential"))?;
        Ok(match spec {
            PotentialSpec::Zero => PotentialProfile::Zero(sig),
            PotentialSpec::Constant { value } => PotentialProfile::Constant(matrix(value, sig.m1(), sig.m2(), "potential.value")?),
            PotentialSpec::PlaneWave { .. } => match self.closed_form()? {
                ClosedForm::PlaneWave(p) => PotentialProfile::PlaneWave(p),
                ClosedForm::Zero(s) => PotentialProfile::Zero(s),
            },
            PotentialSpec::Sampled { grid, values } => {
                let samples = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| matrix(v, sig.m1(), sig.m2(), &format!("potential.values[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                PotentialProfile::Sampled(SampledPotential::new(grid.clone(), samples).map_err(|e| schema(e.to_string()))?)
            }
        })
    }

    /// The potential as an exact dNLS field (zero or plane wave).
    pub fn closed_form(&self) -> Result<ClosedForm, CliError> {
        let sig = self.signature()?;
        match self.potential.as_ref() {
            Some(PotentialSpec::Zero) => Ok(ClosedForm::Zero(sig)),
            Some(PotentialSpec::PlaneWave { amplitude, wavenumber, frequency_shift }) => {
                let q = matrix(amplitude, sig.m1(), sig.m2(), "potential.amplitude")?;
                let field = if *frequency_shift == 0.0 {
                    weylstrip_core::verify::plane_wave(&q, *wavenumber)
                } else {
                    weylstrip_core::verify::perturbed_plane_wave(&q, *wavenumber, *frequency_shift)
                };
                field.map_err(|e| schema(format!("potential: {e}")))
            }
            _ => Err(schema("this mode needs a closed-form potential (kind zero or plane_wave)")),
        }
    }

    /// The boundary as a closed-form field, when it is one.
    pub fn boundary_closed_form(&self) -> Result<Option<ClosedForm>, CliError> {
        let sig = self.signature()?;
        match self.boundary.as_ref() {
            Some(BoundarySpec::Zero) => Ok(Some(ClosedForm::Zero(sig))),
            Some(BoundarySpec::PlaneWave { amplitude, wavenumber }) => {
                let q = matrix(amplitude, sig.m1(), sig.m2(), "boundary.amplitude")?;
                let gamma = weylstrip_core::linalg::op_norm(&q);
                if gamma == 0.0 {
                    return Ok(Some(ClosedForm::Zero(sig)));
                }
                let w = (wavenumber * wavenumber + 2.0 * gamma * gamma) / 2.0;
                let p = PlaneWave::new(q, *wavenumber, w).map_err(|e| schema(format!("boundary: {e}")))?;
                Ok(Some(ClosedForm::PlaneWave(p)))
            }
            _ => Ok(None),
        }
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ScenarioConfig::from_json(r#"{"sig": {"m1": 1, "m2": 1}, "potential": {"kind": "zero"}, "z_list": [[0, 1]]}"#, Path::new(".")).unwrap();
        assert_eq!(cfg.grids, Grids::default());
        cfg.validate(Mode::Weyl).unwrap();
    }

    #[test]
    fn unknown_field_is_schema_error() {
        let err = ScenarioConfig::from_json(r#"{"sig": {"m1": 1, "m2": 1}, "bogus": 3}"#, Path::new(".")).unwrap_err();
        assert!(matches!(err, CliError::Schema(_)));
    }

    #[test]
    fn real_z_only_in_verify() {
        let cfg = ScenarioConfig::from_json(r#"{"sig": {"m1": 1, "m2": 1}, "potential": {"kind": "zero"}, "z_list": [[0.5, 0]]}"#, Path::new(".")).unwrap();
        assert!(cfg.validate(Mode::Weyl).is_err());
        assert!(cfg.validate(Mode::Verify).is_ok());
    }

    #[test]
    fn matrix_shape_checked() {
        let spec: MatrixSpec = vec![vec![[1.0, 0.0]], vec![[0.0, 1.0]]];
        assert!(matrix(&spec, 2, 1, "m").is_ok());
        assert!(matrix(&spec, 1, 2, "m").is_err());
    }
}
