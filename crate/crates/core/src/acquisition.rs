//! Expected improvement and its maximizer over the search box.
//!
//! The maximizer scores 1024 uniform candidates drawn from the caller's
//! stream, then refines the best one with 32 iterations of coordinate-wise
//! golden-section search clipped to the box. Everything is deterministic
//! given the stream state; among equal-scoring candidates the first in
//! candidate order wins.

use crate::error::Result;
use crate::gp::GpModel;
use crate::params::{ParamBox, ParamVector};
use crate::rng::RngStream;

/// Number of uniform candidates scored per proposal.
pub const N_CANDIDATES: usize = 1024;
/// Coordinate-wise golden-section refinement iterations per proposal.
pub const REFINE_ITERATIONS: usize = 32;
/// Relative interval width at which one golden-section line search stops.
const LINE_SEARCH_TOL: f64 = 1e-9;
/// Inverse golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_TAU: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_TAU * (-0.5 * z * z).exp()
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected improvement of a Gaussian belief `N(mean, std^2)` over the
/// incumbent `best_observed`:
/// `(mean - best) * cdf(z) + std * pdf(z)` with `z = (mean - best) / std`.
///
/// Degenerates to `max(mean - best, 0)` at zero std. Never negative.
pub fn expected_improvement(mean: f64, std: f64, best_observed: f64) -> f64 {
    let std = std.max(0.0);
    let gap = mean - best_observed;
    if std == 0.0 {
        return gap.max(0.0);
    }
    let z = gap / std;
    (gap * normal_cdf(z) + std * normal_pdf(z)).max(0.0)
}

/// A per-policy proposal: the next point to try and its expected
/// improvement in standardized units.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub point: ParamVector,
    pub expected_improvement: f64,
}

/// Propose the next sample point for one policy's posterior.
///
/// The incumbent is the largest standardized target in the model's own
/// buffer. Consumes exactly `N_CANDIDATES * dim` uniform draws.
pub fn sample_next(model: &GpModel, space: &ParamBox, rng: &mut RngStream) -> Result<Proposal> {
    let dim = space.dim();
    // Prior incumbent for an unfitted model; callers normally fit first.
    let incumbent = model.best_standardized_target().unwrap_or(0.0);
    let ei_at = |unit: &[f64]| {
        let (mean, var) = model.predict_unit(unit);
        expected_improvement(mean, var.sqrt(), incumbent)
    };

    let mut best_unit = vec![0.5; dim];
    let mut best_ei = f64::NEG_INFINITY;
    let mut candidate = vec![0.0; dim];
    for _ in 0..N_CANDIDATES {
        for slot in candidate.iter_mut() {
            *slot = rng.next_f64();
        }
        let ei = ei_at(&candidate);
        if ei > best_ei {
            best_ei = ei;
            best_unit.copy_from_slice(&candidate);
        }
    }

    for iter in 0..REFINE_ITERATIONS {
        let coord = iter % dim;
        let (v, ei) = golden_section_coord(&ei_at, &best_unit, coord);
        if ei > best_ei {
            best_ei = ei;
            best_unit[coord] = v;
        }
    }

    Ok(Proposal {
        point: space.denormalize(&best_unit),
        expected_improvement: best_ei.max(0.0),
    })
}

/// Golden-section line search along one unit-cube coordinate.
///
/// Returns the best probed coordinate value and its score. The best probe is
/// tracked explicitly so a multimodal slice can never move the caller to a
/// worse point than it already holds.
fn golden_section_coord<F: Fn(&[f64]) -> f64>(
    score: &F,
    point: &[f64],
    coord: usize,
) -> (f64, f64) {
    let mut probe = point.to_vec();
    let mut eval = |v: f64| {
        probe[coord] = v;
        score(&probe)
    };

    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    let (mut best_v, mut best_f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };

    while b - a > LINE_SEARCH_TOL {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
            if f1 > best_f {
                best_f = f1;
                best_v = x1;
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
            if f2 > best_f {
                best_f = f2;
                best_v = x2;
            }
        }
    }
    (best_v, best_f)
}
