//! Multi-policy Bayesian optimization over black-box reward evaluators.
//!
//! Given an ensemble of policies that can each be evaluated in a target
//! environment for a scalar reward, this crate spends a fixed rollout
//! budget finding the best (policy, parameter) pair. Each policy gets its
//! own Gaussian-process posterior and expected-improvement proposal; a
//! bandit-style upper-confidence value decides which single policy is
//! evaluated each iteration, and only that policy's posterior is updated.
//!
//! The [`testbed`] module provides deterministic desk-scale ensembles
//! (synthetic gap-perturbed reward landscapes and a two-link arm task) so
//! the adaptation behavior can be tested end to end without any learned
//! policies.
//!
//! ```
//! use mpbo_core::{mpbo_run, MpboConfig, ParamBox, RngStream};
//! use mpbo_core::testbed::{make_landscape_ensemble, GapConfig, GapKind};
//!
//! let gap = GapConfig::new(GapKind::Kinematic, 0.5, 0).unwrap();
//! let (mut policies, meta) = make_landscape_ensemble(3, &gap, 42).unwrap();
//! let space = ParamBox::link_scale(4);
//! let mut rng = RngStream::new(7);
//! let result = mpbo_run(&mut policies, &space, &MpboConfig::new(30), &mut rng).unwrap();
//! assert_eq!(result.allocation.iter().sum::<usize>(), 30);
//! assert!(meta.designed_best < 3);
//! ```

pub mod acquisition;
pub mod error;
pub mod gp;
pub mod mpbo;
pub mod params;
pub mod rng;
pub mod testbed;

pub use acquisition::{expected_improvement, sample_next, Proposal};
pub use error::{Error, Result};
pub use gp::{kernel_eval, GpModel, KernelParams, RewardScaler, SampleBuffer};
pub use mpbo::{
    baseline_equal_split, baseline_random_search, baseline_round_robin, mpbo_run, single_policy_bo,
    ucb_value, AdaptationResult, MpboConfig, MpboState, PolicyEvaluator, TraceEntry,
};
pub use params::{ParamBox, ParamVector};
pub use rng::{derive_seed, RngStream};
