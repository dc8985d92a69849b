use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spin_ent::eigensolver::DEFAULT_SEED;
use spin_ent::scan::{validate_grid, DEFAULT_MASK_RADIUS};
use spin_ent::{Frame, Lattice, LatticeKind, ModelParams, SolverOptions, Tau1Variant};

/// A run manifest. Every field except the lattice has a default, so a
/// minimal file only names the lattice and the field grid or bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Bracket>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub kind: LatticeKind,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub delta_y: f64,
    #[serde(default = "one")]
    pub delta_z: f64,
    #[serde(default)]
    pub frame: Frame,
}

fn one() -> f64 {
    1.0
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            delta_y: 0.0,
            delta_z: 1.0,
            frame: Frame::Original,
        }
    }
}

/// Either an explicit list of fields or `start:step:stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Values { values: Vec<f64> },
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        let pts = match self {
            GridSpec::Values { values } => values.clone(),
            GridSpec::Range { start, stop, step } => {
                if !(step.is_finite() && *step > 0.0) {
                    return Err(format!("grid step must be positive, got {step}"));
                }
                if !(start.is_finite() && stop.is_finite() && stop >= start) {
                    return Err(format!("grid needs start <= stop, got {start}..{stop}"));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| start + step * i as f64).collect()
            }
        };
        validate_grid(&pts).map_err(|e| e.to_string())?;
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_tol() -> f64 {
    SolverOptions::default().tol
}

fn default_max_iter() -> usize {
    SolverOptions::default().max_iter
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverConfig {
            tol: o.tol,
            max_iter: o.max_iter,
            seed: o.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub emit_plots: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            emit_plots: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default)]
    pub tau1: Tau1Variant,
    #[serde(default = "default_mask")]
    pub mask_radius: f64,
    /// Factorizing field used to mask the dip search. Taken from the closed
    /// form on XYX chains, or located inside `bracket`, when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_f: Option<f64>,
}

fn default_mask() -> f64 {
    DEFAULT_MASK_RADIUS
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            tau1: Tau1Variant::default(),
            mask_radius: DEFAULT_MASK_RADIUS,
            h_f: None,
        }
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub emit_plots: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(tol) = o.tol {
            self.solver.tol = tol;
        }
        if let Some(m) = o.max_iter {
            self.solver.max_iter = m;
        }
        if let Some(s) = o.seed {
            self.solver.seed = s;
        }
        if o.emit_plots {
            self.output.emit_plots = true;
        }
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
    }

    pub fn lattice(&self) -> Result<Lattice, String> {
        Lattice::new(self.lattice.kind, self.lattice.length).map_err(|e| e.to_string())
    }

    /// Model at zero field; sweeps set the field per point.
    pub fn params(&self) -> Result<ModelParams, String> {
        ModelParams::new(self.model.delta_y, self.model.delta_z, 0.0)
            .map(|p| p.with_frame(self.model.frame))
            .map_err(|e| e.to_string())
    }

    pub fn solver(&self) -> Result<SolverOptions, String> {
        let o = SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            seed: self.solver.seed,
        };
        o.validate().map_err(|e| e.to_string())?;
        Ok(o)
    }

    pub fn grid(&self) -> Result<Vec<f64>, String> {
        self.grid
            .as_ref()
            .ok_or_else(|| "config has no [grid]".to_string())?
            .points()
    }

    pub fn bracket(&self) -> Result<(f64, f64), String> {
        let b = self.bracket.ok_or_else(|| "config has no [bracket]".to_string())?;
        if !(b.lo.is_finite() && b.hi.is_finite() && 0.0 <= b.lo && b.lo < b.hi) {
            return Err(format!("bracket needs 0 <= lo < hi, got [{}, {}]", b.lo, b.hi));
        }
        Ok((b.lo, b.hi))
    }

    /// Checks everything every subcommand needs.
    pub fn validate(&self) -> Result<(), String> {
        self.lattice()?;
        self.params()?;
        self.solver()?;
        if let Some(g) = &self.grid {
            g.points()?;
        }
        if self.bracket.is_some() {
            self.bracket()?;
        }
        let m = self.detector.mask_radius;
        if !(m.is_finite() && m >= 0.0) {
            return Err(format!("mask_radius must be non-negative, got {m}"));
        }
        Ok(())
    }
}
