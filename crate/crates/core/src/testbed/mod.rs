//! Deterministic desk-scale testbeds.
//!
//! Two stand-ins for policy ensembles: seeded synthetic reward landscapes
//! whose optima are displaced from the nominal point by configurable
//! sim-to-real gaps, and a two-link planar arm task where a controller
//! conditioned on virtual link lengths drives a gap-perturbed true arm.

pub mod arm;
pub mod landscape;

pub use arm::{arm_forward_kinematics, arm_rollout, make_arm_ensemble, ArmPolicy, ArmTask};
pub use landscape::{
    make_landscape_ensemble, make_landscape_ensemble_with, EnsembleMeta, Landscape, LandscapeSpec,
};

use crate::error::{Error, Result};
use crate::mpbo::PolicyEvaluator;
use crate::params::ParamVector;

/// The three kinds of source/target discrepancy a testbed can emulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    None,
    Kinematic,
    Dynamic,
    Environment,
}

impl GapKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GapKind::None => "none",
            GapKind::Kinematic => "kinematic",
            GapKind::Dynamic => "dynamic",
            GapKind::Environment => "environment",
        }
    }
}

impl std::str::FromStr for GapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(GapKind::None),
            "kinematic" => Ok(GapKind::Kinematic),
            "dynamic" => Ok(GapKind::Dynamic),
            "environment" => Ok(GapKind::Environment),
            other => Err(Error::Config(format!("unknown gap kind '{other}'"))),
        }
    }
}

/// A perturbation applied to a testbed task.
///
/// `magnitude` is dimensionless in `[0, 1]` and scales kind-specific units
/// documented by each testbed; it is ignored for `GapKind::None`. `seed`
/// decorrelates gap geometry across otherwise identical configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct GapConfig {
    pub kind: GapKind,
    pub magnitude: f64,
    pub seed: u64,
}

impl GapConfig {
    pub fn none() -> Self {
        Self {
            kind: GapKind::None,
            magnitude: 0.0,
            seed: 0,
        }
    }

    pub fn new(kind: GapKind, magnitude: f64, seed: u64) -> Result<Self> {
        if kind != GapKind::None && !(0.0..=1.0).contains(&magnitude) {
            return Err(Error::Config(format!(
                "gap magnitude {magnitude} outside [0, 1]"
            )));
        }
        Ok(Self {
            kind,
            magnitude,
            seed,
        })
    }
}

/// Default rollouts averaged per grid cell.
pub const DEFAULT_GRID_EVALS: usize = 15;

/// One cell of a 2-D reward-landscape slice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub x: f64,
    pub y: f64,
    pub reward: f64,
}

/// Evaluate a 2-D slice of an evaluator's reward landscape on a
/// `resolution x resolution` grid over `[0.5, 1.5]^2`, averaging `n_eval`
/// rollouts per cell.
///
/// Four-dimensional evaluators are probed with parameters tied in groups of
/// two, `[x, x, y, y]`; two-dimensional evaluators directly with `(x, y)`.
/// Rows are emitted row-major: the x grid index varies slowest.
pub fn landscape_grid_dump(
    evaluator: &mut PolicyEvaluator,
    resolution: usize,
    n_eval: usize,
) -> Result<Vec<GridCell>> {
    if resolution < 2 {
        return Err(Error::Config("grid resolution must be >= 2".into()));
    }
    if n_eval < 1 {
        return Err(Error::Config("n_eval must be >= 1".into()));
    }
    let tie = match evaluator.dim() {
        2 => false,
        4 => true,
        d => {
            return Err(Error::Config(format!(
                "grid dump supports dimension 2 or 4, evaluator has {d}"
            )))
        }
    };

    let coord = |i: usize| 0.5 + i as f64 / (resolution - 1) as f64;
    let mut cells = Vec::with_capacity(resolution * resolution);
    for ix in 0..resolution {
        let x = coord(ix);
        for iy in 0..resolution {
            let y = coord(iy);
            let point = if tie {
                ParamVector::new(vec![x, x, y, y])
            } else {
                ParamVector::new(vec![x, y])
            };
            let mut sum = 0.0;
            for _ in 0..n_eval {
                sum += evaluator.evaluate(&point);
            }
            cells.push(GridCell {
                x,
                y,
                reward: sum / n_eval as f64,
            });
        }
    }
    Ok(cells)
}

/// Render grid cells as CSV with a `x,y,reward` header and nine significant
/// digits per value.
pub fn grid_to_csv(cells: &[GridCell]) -> String {
    let mut out = String::with_capacity(cells.len() * 40 + 16);
    out.push_str("x,y,reward\n");
    for cell in cells {
        out.push_str(&format!("{:.8e},{:.8e},{:.8e}\n", cell.x, cell.y, cell.reward));
    }
    out
}
