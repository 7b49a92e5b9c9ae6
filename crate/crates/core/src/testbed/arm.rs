//! Two-link planar arm task with a virtual-kinematics controller.
//!
//! The controller computes desired joint angles by closed-form inverse
//! kinematics under *virtual* link lengths and drives the *true* arm with a
//! proportional law at 50 Hz. Gaps perturb the true arm: constant joint
//! offsets added to commanded angles (kinematic), a torque scale shrinking
//! every per-step angle change (dynamic), and a drag decelerating
//! end-effector progress (environment). Reward per target is
//! `max(0, 1 - final_distance / 0.5 m)`; a rollout sums over the
//! trajectory. The whole simulation is deterministic.

use super::GapConfig;
use crate::error::{Error, Result};
use crate::mpbo::PolicyEvaluator;
use crate::params::ParamVector;
use crate::rng::{derive_seed, RngStream};

/// Control rate and per-target step count.
const DT: f64 = 0.02;
pub const DEFAULT_STEPS_PER_TARGET: usize = 50;
/// Proportional gain of the default controller.
const DEFAULT_GAIN: f64 = 6.0;
/// Joint velocity limit, rad/s.
const JOINT_SPEED_LIMIT: f64 = 3.0;
/// Distance scale of the per-target reward.
const REWARD_DISTANCE_REF: f64 = 0.5;
/// Targets must sit at least this far inside the true arm's reach.
const REACH_MARGIN: f64 = 0.05;
/// Start pose of every rollout, radians.
const START_POSE: (f64, f64) = (0.4, 0.6);
/// Nominal link length the virtual scale factors multiply, meters.
const NOMINAL_LINK: f64 = 1.0;

/// Arm gap units per unit magnitude: joint offsets (rad), torque-scale
/// reduction, and end-effector drag (N*s/m).
const KINEMATIC_OFFSETS: (f64, f64) = (0.4, -0.2);
const DYNAMIC_TORQUE_DROP: f64 = 0.8;
const ENVIRONMENT_DRAG: f64 = 2.0;

/// Per-policy controller variation ranges for [`make_arm_ensemble`].
const GAIN_RANGE: (f64, f64) = (4.0, 8.0);
const BIAS_RANGE: (f64, f64) = (-0.05, 0.05);

/// Stream tag for ensemble construction.
const TAG_BUILD: u64 = 0x4142;

/// The true arm and the trajectory it must track.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmTask {
    /// True link lengths, meters.
    pub true_lengths: (f64, f64),
    /// Constant offsets added to commanded joint angles, radians.
    pub joint_offsets: (f64, f64),
    /// Fraction of each per-step angle change that survives, in `(0, 1]`.
    pub torque_scale: f64,
    /// End-effector drag coefficient, N*s/m equivalent.
    pub drag: f64,
    /// Target end-effector points, meters.
    pub trajectory: Vec<(f64, f64)>,
    pub steps_per_target: usize,
}

impl ArmTask {
    pub fn new(
        true_lengths: (f64, f64),
        joint_offsets: (f64, f64),
        torque_scale: f64,
        drag: f64,
        trajectory: Vec<(f64, f64)>,
        steps_per_target: usize,
    ) -> Result<Self> {
        if !(true_lengths.0 > 0.0 && true_lengths.1 > 0.0) {
            return Err(Error::Config("link lengths must be positive".into()));
        }
        if !(torque_scale > 0.0 && torque_scale <= 1.0) {
            return Err(Error::Config(format!(
                "torque_scale {torque_scale} outside (0, 1]"
            )));
        }
        if !(drag.is_finite() && drag >= 0.0) {
            return Err(Error::Config("drag must be non-negative".into()));
        }
        if steps_per_target < 1 {
            return Err(Error::Config("steps_per_target must be >= 1".into()));
        }
        let reach = true_lengths.0 + true_lengths.1 - REACH_MARGIN;
        for (x, y) in &trajectory {
            if (x * x + y * y).sqrt() > reach {
                return Err(Error::Config(format!(
                    "target ({x}, {y}) outside the true arm's reach"
                )));
            }
        }
        Ok(Self {
            true_lengths,
            joint_offsets,
            torque_scale,
            drag,
            trajectory,
            steps_per_target,
        })
    }

    /// Unit-length links, no perturbation.
    pub fn nominal(trajectory: Vec<(f64, f64)>) -> Result<Self> {
        Self::new((1.0, 1.0), (0.0, 0.0), 1.0, 0.0, trajectory, DEFAULT_STEPS_PER_TARGET)
    }

    /// Nominal arm perturbed by a gap: kinematic maps to joint offsets
    /// `magnitude * (0.4, -0.2)` rad, dynamic to a torque scale
    /// `1 - 0.8 * magnitude`, environment to a drag `2 * magnitude`.
    pub fn with_gap(gap: &GapConfig, trajectory: Vec<(f64, f64)>) -> Result<Self> {
        use super::GapKind::*;
        let mut task = Self::nominal(trajectory)?;
        match gap.kind {
            None => {}
            Kinematic => {
                task.joint_offsets = (
                    KINEMATIC_OFFSETS.0 * gap.magnitude,
                    KINEMATIC_OFFSETS.1 * gap.magnitude,
                );
            }
            Dynamic => {
                task.torque_scale = 1.0 - DYNAMIC_TORQUE_DROP * gap.magnitude;
            }
            Environment => {
                task.drag = ENVIRONMENT_DRAG * gap.magnitude;
            }
        }
        Ok(task)
    }

    /// Tracking targets used by [`make_arm_ensemble`].
    pub fn default_trajectory() -> Vec<(f64, f64)> {
        vec![(1.2, 0.9), (0.9, 1.3), (1.5, 0.4)]
    }
}

/// Planar two-link forward kinematics.
pub fn arm_forward_kinematics(lengths: (f64, f64), angles: (f64, f64)) -> (f64, f64) {
    let (l1, l2) = lengths;
    let (q1, q2) = angles;
    (
        l1 * q1.cos() + l2 * (q1 + q2).cos(),
        l1 * q1.sin() + l2 * (q1 + q2).sin(),
    )
}

/// Closed-form two-link inverse kinematics with the elbow clamped to the
/// nearest reachable configuration when the target is out of reach for the
/// assumed lengths.
fn inverse_kinematics(lengths: (f64, f64), target: (f64, f64)) -> (f64, f64) {
    let (l1, l2) = lengths;
    let (x, y) = target;
    let cos_q2 = ((x * x + y * y - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let q2 = cos_q2.acos();
    let q1 = y.atan2(x) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
    (q1, q2)
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    } else if a < -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}

/// One rollout with the default controller gain and no controller bias.
///
/// `virtual_lengths` are the two link-length scale factors in
/// `[0.5, 1.5]^2` conditioning the controller's internal kinematic model.
pub fn arm_rollout(task: &ArmTask, virtual_lengths: &ParamVector) -> Result<f64> {
    rollout_with_controller(task, virtual_lengths, DEFAULT_GAIN, (0.0, 0.0))
}

fn rollout_with_controller(
    task: &ArmTask,
    virtual_lengths: &ParamVector,
    gain: f64,
    command_bias: (f64, f64),
) -> Result<f64> {
    if virtual_lengths.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: virtual_lengths.dim(),
        });
    }
    let v = virtual_lengths.values();
    let assumed = (v[0] * NOMINAL_LINK, v[1] * NOMINAL_LINK);

    let mut q = START_POSE;
    let mut total = 0.0;
    for &target in &task.trajectory {
        let desired = inverse_kinematics(assumed, target);
        // The true arm applies its offsets (and the controller its own
        // bias) on top of the commanded setpoint.
        let setpoint = (
            desired.0 + command_bias.0 + task.joint_offsets.0,
            desired.1 + command_bias.1 + task.joint_offsets.1,
        );
        for _ in 0..task.steps_per_target {
            let w1 = (gain * wrap_angle(setpoint.0 - q.0)).clamp(-JOINT_SPEED_LIMIT, JOINT_SPEED_LIMIT);
            let w2 = (gain * wrap_angle(setpoint.1 - q.1)).clamp(-JOINT_SPEED_LIMIT, JOINT_SPEED_LIMIT);
            let mut dq = (task.torque_scale * w1 * DT, task.torque_scale * w2 * DT);

            if task.drag > 0.0 {
                let before = arm_forward_kinematics(task.true_lengths, q);
                let after = arm_forward_kinematics(task.true_lengths, (q.0 + dq.0, q.1 + dq.1));
                let speed = ((after.0 - before.0).powi(2) + (after.1 - before.1).powi(2)).sqrt() / DT;
                let damping = 1.0 / (1.0 + task.drag * speed);
                dq = (dq.0 * damping, dq.1 * damping);
            }

            q = (q.0 + dq.0, q.1 + dq.1);
        }
        let ee = arm_forward_kinematics(task.true_lengths, q);
        let distance = ((ee.0 - target.0).powi(2) + (ee.1 - target.1).powi(2)).sqrt();
        total += (1.0 - distance / REWARD_DISTANCE_REF).max(0.0);
    }
    Ok(total)
}

/// One policy of an arm ensemble: the shared task plus this policy's own
/// controller quirks (a gain and a small command bias, both seeded).
#[derive(Debug, Clone, PartialEq)]
pub struct ArmPolicy {
    pub task: ArmTask,
    pub gain: f64,
    pub command_bias: (f64, f64),
}

impl ArmPolicy {
    /// Deterministic reward for a virtual-length input.
    pub fn rollout(&self, virtual_lengths: &ParamVector) -> Result<f64> {
        rollout_with_controller(&self.task, virtual_lengths, self.gain, self.command_bias)
    }
}

/// Build `m` arm evaluators sharing one gap-perturbed task, with
/// per-policy controller variation drawn from `master_seed`. The returned
/// policy descriptors allow grid-searching the same deterministic rewards
/// the evaluators produce.
pub fn make_arm_ensemble(
    m: usize,
    gap: &GapConfig,
    master_seed: u64,
) -> Result<(Vec<PolicyEvaluator>, Vec<ArmPolicy>)> {
    if m < 1 {
        return Err(Error::Config("ensemble needs at least one policy".into()));
    }
    let task = ArmTask::with_gap(gap, ArmTask::default_trajectory())?;
    let mut master = RngStream::new(derive_seed(master_seed, TAG_BUILD));

    let mut evaluators = Vec::with_capacity(m);
    let mut policies = Vec::with_capacity(m);
    for j in 0..m {
        let policy = ArmPolicy {
            task: task.clone(),
            gain: master.next_in(GAIN_RANGE.0, GAIN_RANGE.1),
            command_bias: (
                master.next_in(BIAS_RANGE.0, BIAS_RANGE.1),
                master.next_in(BIAS_RANGE.0, BIAS_RANGE.1),
            ),
        };
        policies.push(policy.clone());
        evaluators.push(PolicyEvaluator::new(j, 2, move |p| {
            policy.rollout(p).expect("arm ensemble evaluates 2-D inputs")
        }));
    }
    Ok((evaluators, policies))
}
