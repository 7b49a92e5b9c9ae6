//! Seeded synthetic reward landscapes over the `[0.5, 1.5]^4` box.
//!
//! Each landscape is a sum of smooth Gaussian bumps: one broad hill and one
//! narrow peak sharing a center, plus seeded secondary bumps elsewhere. With
//! no gap the shared center sits on the nominal point `(1, 1, 1, 1)`; a gap
//! displaces it inside the tied-parameter plane `[a, a, b, b]` by a
//! seed-dependent direction with norm proportional to the gap magnitude, so
//! the nominal input lands in a low-reward region while a 2-D tied slice
//! still passes through the optimum.

use super::GapConfig;
use crate::error::{Error, Result};
use crate::mpbo::PolicyEvaluator;
use crate::params::ParamVector;
use crate::rng::{derive_seed, RngStream};

const DIM: usize = 4;

/// Broad structure shared by every landscape.
const BROAD_AMPLITUDE: f64 = 0.4;
const BROAD_WIDTH: f64 = 0.6;
/// Narrow peak on top of the broad hill.
const MAIN_AMPLITUDE: f64 = 0.6;
const MAIN_WIDTH: f64 = 0.22;
/// Uniform elevation granted to the designed-best ensemble member. Raising
/// the whole surface (not just the peak) mirrors a policy that transfers
/// better across its entire conditioning range and lifts its mean reward,
/// which is what the bandit value keys on.
const BEST_BONUS: f64 = 0.5;
/// Secondary bump shape ranges.
const SECONDARY_AMPLITUDE: (f64, f64) = (0.15, 0.25);
const SECONDARY_WIDTH: (f64, f64) = (0.08, 0.15);
/// Secondary bumps keep away from the peak and from each other.
const MIN_DIST_FROM_MAIN: f64 = 0.45;
const MIN_DIST_PAIRWISE: f64 = 0.30;
/// Bump centers stay inside this margin of the box.
const CENTER_MARGIN: f64 = 0.1;

/// Peak displacement per unit gap magnitude, by gap kind.
const KINEMATIC_SHIFT: f64 = 0.6;
const DYNAMIC_SHIFT: f64 = 0.7;
const ENVIRONMENT_SHIFT: f64 = 0.8;

/// Defaults used by [`make_landscape_ensemble`].
pub const DEFAULT_N_MODES: usize = 4;
pub const DEFAULT_NOISE_STD: f64 = 0.02;

/// Stream tag for per-policy evaluation noise.
const TAG_NOISE: u64 = 0x4C4E;
/// Stream tag for ensemble construction.
const TAG_BUILD: u64 = 0x4C42;

/// Recipe for one deterministic landscape.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSpec {
    /// Stands in for the training seed of one policy.
    pub policy_seed: u64,
    pub gap: GapConfig,
    /// Total bump count: the main peak plus `n_modes - 1` secondary bumps.
    pub n_modes: usize,
    /// Std of the Gaussian noise added per rollout.
    pub noise_std: f64,
}

impl LandscapeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 1 {
            return Err(Error::Config("n_modes must be >= 1".into()));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::Config("noise_std must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Bump {
    center: Vec<f64>,
    amplitude: f64,
    width: f64,
}

impl Bump {
    fn value(&self, p: &[f64]) -> f64 {
        let mut sq = 0.0;
        for i in 0..p.len() {
            let d = p[i] - self.center[i];
            sq += d * d;
        }
        self.amplitude * (-0.5 * sq / (self.width * self.width)).exp()
    }
}

/// A deterministic noise-free reward surface over the 4-D box.
#[derive(Debug, Clone)]
pub struct Landscape {
    baseline: f64,
    bumps: Vec<Bump>,
    peak: ParamVector,
}

impl Landscape {
    pub fn from_spec(spec: &LandscapeSpec) -> Result<Self> {
        Self::build(spec, 0.0)
    }

    fn build(spec: &LandscapeSpec, baseline: f64) -> Result<Self> {
        spec.validate()?;
        let mut rng = RngStream::new(spec.policy_seed);

        // Direction of the gap displacement inside the tied plane, one
        // angle drawn per (policy_seed, gap seed) pair.
        let mut dir_rng = RngStream::new(derive_seed(spec.policy_seed, spec.gap.seed));
        let angle = std::f64::consts::TAU * dir_rng.next_f64();
        let shift = displacement_norm(&spec.gap) / std::f64::consts::SQRT_2;
        let (da, db) = (shift * angle.cos(), shift * angle.sin());
        let raw_center = [1.0 + da, 1.0 + da, 1.0 + db, 1.0 + db];
        let center: Vec<f64> = raw_center
            .iter()
            .map(|c| c.clamp(0.5 + CENTER_MARGIN, 1.5 - CENTER_MARGIN))
            .collect();

        let mut bumps = vec![
            Bump {
                center: center.clone(),
                amplitude: BROAD_AMPLITUDE,
                width: BROAD_WIDTH,
            },
            Bump {
                center: center.clone(),
                amplitude: MAIN_AMPLITUDE,
                width: MAIN_WIDTH,
            },
        ];

        let mut secondary_centers: Vec<Vec<f64>> = Vec::new();
        for _ in 1..spec.n_modes {
            let mut candidate = draw_center(&mut rng);
            for _attempt in 0..60 {
                let clear_of_main = dist(&candidate, &center) >= MIN_DIST_FROM_MAIN;
                let clear_of_peers = secondary_centers
                    .iter()
                    .all(|c| dist(&candidate, c) >= MIN_DIST_PAIRWISE);
                if clear_of_main && clear_of_peers {
                    break;
                }
                candidate = draw_center(&mut rng);
            }
            let amplitude = rng.next_in(SECONDARY_AMPLITUDE.0, SECONDARY_AMPLITUDE.1);
            let width = rng.next_in(SECONDARY_WIDTH.0, SECONDARY_WIDTH.1);
            secondary_centers.push(candidate.clone());
            bumps.push(Bump {
                center: candidate,
                amplitude,
                width,
            });
        }

        Ok(Self {
            baseline,
            bumps,
            peak: ParamVector::new(center),
        })
    }

    /// Noise-free reward at a point. Finite for every finite input.
    pub fn value(&self, p: &ParamVector) -> f64 {
        debug_assert_eq!(p.dim(), DIM);
        self.baseline + self.bumps.iter().map(|b| b.value(p.values())).sum::<f64>()
    }

    /// Center of the main peak (the designed optimum).
    pub fn peak(&self) -> &ParamVector {
        &self.peak
    }
}

fn displacement_norm(gap: &GapConfig) -> f64 {
    use super::GapKind::*;
    match gap.kind {
        None => 0.0,
        Kinematic => KINEMATIC_SHIFT * gap.magnitude,
        Dynamic => DYNAMIC_SHIFT * gap.magnitude,
        Environment => ENVIRONMENT_SHIFT * gap.magnitude,
    }
}

fn draw_center(rng: &mut RngStream) -> Vec<f64> {
    (0..DIM)
        .map(|_| rng.next_in(0.5 + CENTER_MARGIN, 1.5 - CENTER_MARGIN))
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Ground truth for an ensemble: which member was built best and where each
/// member's peak sits.
#[derive(Debug, Clone)]
pub struct EnsembleMeta {
    /// Index of the member whose peak amplitude carries [`BEST_BONUS`].
    pub designed_best: usize,
    /// Main peak location per member.
    pub peaks: Vec<ParamVector>,
    /// Noise-free reward at each member's peak.
    pub peak_values: Vec<f64>,
    pub noise_std: f64,
}

/// Build `m` landscape evaluators sharing one gap configuration.
///
/// Exactly one member, chosen from `master_seed`, is elevated by 0.5 reward
/// everywhere, so its global max is 0.5 above the rest and best-policy
/// identification has an unambiguous ground truth. Each evaluator adds
/// seeded Gaussian noise per rollout.
pub fn make_landscape_ensemble(
    m: usize,
    gap: &GapConfig,
    master_seed: u64,
) -> Result<(Vec<PolicyEvaluator>, EnsembleMeta)> {
    make_landscape_ensemble_with(m, gap, master_seed, DEFAULT_N_MODES, DEFAULT_NOISE_STD)
}

/// [`make_landscape_ensemble`] with explicit mode count and noise level.
pub fn make_landscape_ensemble_with(
    m: usize,
    gap: &GapConfig,
    master_seed: u64,
    n_modes: usize,
    noise_std: f64,
) -> Result<(Vec<PolicyEvaluator>, EnsembleMeta)> {
    if m < 1 {
        return Err(Error::Config("ensemble needs at least one policy".into()));
    }
    let mut master = RngStream::new(derive_seed(master_seed, TAG_BUILD));
    let designed_best = master.next_index(m);

    let mut evaluators = Vec::with_capacity(m);
    let mut peaks = Vec::with_capacity(m);
    let mut peak_values = Vec::with_capacity(m);
    for j in 0..m {
        let policy_seed = master.next_u64();
        let spec = LandscapeSpec {
            policy_seed,
            gap: gap.clone(),
            n_modes,
            noise_std,
        };
        let baseline = if j == designed_best { BEST_BONUS } else { 0.0 };
        let landscape = Landscape::build(&spec, baseline)?;
        peaks.push(landscape.peak().clone());
        peak_values.push(landscape.value(landscape.peak()));

        let mut noise = RngStream::new(derive_seed(policy_seed, TAG_NOISE));
        evaluators.push(PolicyEvaluator::new(j, DIM, move |p| {
            landscape.value(p) + noise_std * noise.next_gaussian()
        }));
    }

    Ok((
        evaluators,
        EnsembleMeta {
            designed_best,
            peaks,
            peak_values,
            noise_std,
        },
    ))
}
