//! Budget-constrained adaptation over an ensemble of black-box evaluators.
//!
//! Each policy keeps its own sample buffer and GP posterior. One adaptation
//! step asks every posterior for a proposal (a point plus its expected
//! improvement), scores each policy with an upper-confidence-bound value on
//! its pooled-normalized mean reward, evaluates only the policy with the
//! largest `u * e` product, and refits that policy's GP alone. Rollouts
//! spent initializing the buffers count against the total budget.
//!
//! [`baseline_equal_split`], [`baseline_round_robin`] and
//! [`baseline_random_search`] share the same result contract so allocators
//! can be compared on paired seeds.

use std::fmt;

use crate::acquisition::{sample_next, Proposal};
use crate::error::{Error, Result};
use crate::gp::{GpModel, KernelParams, RewardScaler, SampleBuffer};
use crate::params::{ParamBox, ParamVector};
use crate::rng::RngStream;

/// A black-box reward evaluator standing in for one policy in one target
/// environment. Stochastic evaluators draw from their own seeded stream, so
/// evaluation order is the only thing that matters for reproducibility.
pub struct PolicyEvaluator {
    policy_id: usize,
    dim: usize,
    eval: Box<dyn FnMut(&ParamVector) -> f64>,
}

impl PolicyEvaluator {
    pub fn new(policy_id: usize, dim: usize, eval: impl FnMut(&ParamVector) -> f64 + 'static) -> Self {
        Self {
            policy_id,
            dim,
            eval: Box::new(eval),
        }
    }

    pub fn policy_id(&self) -> usize {
        self.policy_id
    }

    /// Dimension of the parameter box this evaluator accepts.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Spend one rollout at `params`.
    pub fn evaluate(&mut self, params: &ParamVector) -> f64 {
        (self.eval)(params)
    }
}

impl fmt::Debug for PolicyEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolicyEvaluator")
            .field("policy_id", &self.policy_id)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

/// Knobs of one adaptation run.
#[derive(Debug, Clone)]
pub struct MpboConfig {
    /// Total rollouts allowed, initialization included.
    pub budget: usize,
    /// Uniform random rollouts per policy before the guided loop.
    pub n_init: usize,
    /// Exploration factor `c` of the UCB value.
    pub exploration: f64,
    /// Kernel override; defaults per box dimension when `None`.
    pub kernel: Option<KernelParams>,
}

impl Default for MpboConfig {
    fn default() -> Self {
        Self {
            budget: 30,
            n_init: 2,
            exploration: 1.0,
            kernel: None,
        }
    }
}

impl MpboConfig {
    pub fn new(budget: usize) -> Self {
        Self {
            budget,
            ..Self::default()
        }
    }

    fn resolve_kernel(&self, dim: usize) -> KernelParams {
        self.kernel.clone().unwrap_or_else(|| KernelParams::defaults(dim))
    }
}

/// One rollout in an adaptation run. Initialization rollouts carry
/// iteration 0; guided rollouts carry the loop iteration that chose them,
/// starting at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub policy: usize,
    pub params: ParamVector,
    pub reward: f64,
}

/// Outcome of one adaptation run: the best rollout seen, how the budget was
/// allocated across policies, and the full rollout trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationResult {
    pub best_policy: usize,
    pub best_params: ParamVector,
    pub best_reward: f64,
    pub allocation: Vec<usize>,
    pub trace: Vec<TraceEntry>,
}

impl AdaptationResult {
    /// Assemble the result contract from a complete trace: the best entry is
    /// the first strict maximum, the allocation counts rollouts per policy.
    fn from_trace(trace: Vec<TraceEntry>, n_policies: usize) -> Self {
        debug_assert!(!trace.is_empty());
        let mut allocation = vec![0usize; n_policies];
        let mut best = 0;
        for (i, entry) in trace.iter().enumerate() {
            allocation[entry.policy] += 1;
            if entry.reward > trace[best].reward {
                best = i;
            }
        }
        Self {
            best_policy: trace[best].policy,
            best_params: trace[best].params.clone(),
            best_reward: trace[best].reward,
            allocation,
            trace,
        }
    }
}

/// UCB value of one policy: `mean_reward + c * sqrt(ln(t) / n)`.
///
/// `t` is the loop iteration (from 1) and `n` the number of rollouts the
/// policy has received. The orchestrator passes `mean_reward` min-max
/// normalized over all observations pooled across policies, which keeps the
/// value non-negative so the `u * e` product preserves ordering.
pub fn ucb_value(mean_reward: f64, t: f64, n: usize, c: f64) -> Result<f64> {
    if t.is_nan() || t < 1.0 {
        return Err(Error::Precondition(format!("iteration t must be >= 1, got {t}")));
    }
    if n < 1 {
        return Err(Error::Precondition("rollout count n must be >= 1".into()));
    }
    Ok(mean_reward + c * (t.ln() / n as f64).sqrt())
}

/// How one guided step picks the policy to evaluate.
enum Selection {
    /// Argmax of the `u * e` product, lowest index on ties.
    UcbTimesEi,
    /// Cycle policies in index order regardless of scores.
    RoundRobin,
}

/// Mutable state of one adaptation run over `M` policies.
#[derive(Debug)]
pub struct MpboState {
    space: ParamBox,
    kernel: KernelParams,
    exploration: f64,
    budget: usize,
    spent: usize,
    iteration: usize,
    ensemble: Vec<GpModel>,
    buffers: Vec<SampleBuffer>,
    counts: Vec<usize>,
    trace: Vec<TraceEntry>,
}

impl MpboState {
    /// Draw and evaluate `n_init` uniform points per policy and fit every
    /// GP once. Consumes `M * n_init` rollouts from the budget.
    pub fn init(
        policies: &mut [PolicyEvaluator],
        space: &ParamBox,
        config: &MpboConfig,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let m = policies.len();
        if m < 1 {
            return Err(Error::Config("need at least one policy".into()));
        }
        if config.n_init < 1 {
            return Err(Error::Config("n_init must be >= 1".into()));
        }
        if m * config.n_init > config.budget {
            return Err(Error::Config(format!(
                "budget {} too small for {} policies with n_init {}",
                config.budget, m, config.n_init
            )));
        }
        for p in policies.iter() {
            if p.dim() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    actual: p.dim(),
                });
            }
        }
        let kernel = config.resolve_kernel(space.dim());
        kernel.validate()?;

        let mut buffers: Vec<SampleBuffer> = (0..m).map(|_| SampleBuffer::new()).collect();
        let mut trace = Vec::with_capacity(config.budget);
        for (j, policy) in policies.iter_mut().enumerate() {
            for _ in 0..config.n_init {
                let params = space.sample(rng);
                let reward = policy.evaluate(&params);
                buffers[j].push(params.clone(), reward);
                trace.push(TraceEntry {
                    iteration: 0,
                    policy: j,
                    params,
                    reward,
                });
            }
        }

        let pooled = pooled_scaler(&buffers);
        let ensemble = buffers
            .iter()
            .map(|buf| GpModel::fit(buf, kernel.clone(), space, center_scaler(buf, &pooled)))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            space: space.clone(),
            kernel,
            exploration: config.exploration,
            budget: config.budget,
            spent: m * config.n_init,
            iteration: 1,
            ensemble,
            buffers,
            counts: vec![config.n_init; m],
            trace,
        })
    }

    /// One guided rollout: propose for every policy, pick the argmax of
    /// `u * e`, evaluate it, refit only the winner's GP.
    pub fn step(&mut self, policies: &mut [PolicyEvaluator], rng: &mut RngStream) -> Result<()> {
        self.step_with(policies, rng, Selection::UcbTimesEi)
    }

    fn step_with(
        &mut self,
        policies: &mut [PolicyEvaluator],
        rng: &mut RngStream,
        selection: Selection,
    ) -> Result<()> {
        if self.spent >= self.budget {
            return Err(Error::BudgetExhausted {
                spent: self.spent,
                budget: self.budget,
            });
        }

        // Proposals consume the stream in policy order, for every policy,
        // regardless of how the winner is selected.
        let proposals = self
            .ensemble
            .iter()
            .map(|model| sample_next(model, &self.space, rng))
            .collect::<Result<Vec<Proposal>>>()?;

        let winner = match selection {
            Selection::UcbTimesEi => {
                let (lo, hi) = pooled_reward_range(&self.buffers);
                let mut best_j = 0;
                let mut best_score = f64::NEG_INFINITY;
                for (j, proposal) in proposals.iter().enumerate() {
                    let rewards = self.buffers[j].rewards();
                    let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
                    let mean_norm = min_max_normalize(mean, lo, hi);
                    let u = ucb_value(mean_norm, self.iteration as f64, self.counts[j], self.exploration)?;
                    let score = u * proposal.expected_improvement;
                    if score > best_score {
                        best_score = score;
                        best_j = j;
                    }
                }
                best_j
            }
            Selection::RoundRobin => (self.iteration - 1) % self.ensemble.len(),
        };

        let params = proposals[winner].point.clone();
        let reward = policies[winner].evaluate(&params);
        self.buffers[winner].push(params.clone(), reward);
        self.counts[winner] += 1;
        self.spent += 1;

        // Targets are scaled by the std pooled across the whole ensemble,
        // but only the winner's posterior is refit.
        let pooled = pooled_scaler(&self.buffers);
        let scaler = center_scaler(&self.buffers[winner], &pooled);
        self.ensemble[winner] = GpModel::fit(&self.buffers[winner], self.kernel.clone(), &self.space, scaler)?;

        self.trace.push(TraceEntry {
            iteration: self.iteration,
            policy: winner,
            params,
            reward,
        });
        self.iteration += 1;
        Ok(())
    }

    pub fn spent(&self) -> usize {
        self.spent
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Loop iteration `t`; 1 until the first guided step completes.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn models(&self) -> &[GpModel] {
        &self.ensemble
    }

    pub fn buffers(&self) -> &[SampleBuffer] {
        &self.buffers
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn into_result(self) -> AdaptationResult {
        let m = self.ensemble.len();
        AdaptationResult::from_trace(self.trace, m)
    }
}

/// Run the full adaptation loop: initialize, then step until the budget is
/// spent.
pub fn mpbo_run(
    policies: &mut [PolicyEvaluator],
    space: &ParamBox,
    config: &MpboConfig,
    rng: &mut RngStream,
) -> Result<AdaptationResult> {
    let mut state = MpboState::init(policies, space, config, rng)?;
    while state.spent() < state.budget() {
        state.step(policies, rng)?;
    }
    Ok(state.into_result())
}

/// Plain single-policy Bayesian optimization: initialize, then always
/// propose-evaluate-refit the one policy. Used by [`baseline_equal_split`]
/// and as the reference the degenerate `M = 1` ensemble must reproduce.
pub fn single_policy_bo(
    policy: &mut PolicyEvaluator,
    space: &ParamBox,
    budget: usize,
    n_init: usize,
    kernel: Option<KernelParams>,
    rng: &mut RngStream,
) -> Result<AdaptationResult> {
    if n_init < 1 {
        return Err(Error::Config("n_init must be >= 1".into()));
    }
    if n_init > budget {
        return Err(Error::Config(format!(
            "budget {budget} too small for n_init {n_init}"
        )));
    }
    if policy.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            actual: policy.dim(),
        });
    }
    let kernel = kernel.unwrap_or_else(|| KernelParams::defaults(space.dim()));
    kernel.validate()?;
    let id = policy.policy_id();

    let mut buffer = SampleBuffer::new();
    let mut trace = Vec::with_capacity(budget);
    for _ in 0..n_init {
        let params = space.sample(rng);
        let reward = policy.evaluate(&params);
        buffer.push(params.clone(), reward);
        trace.push(TraceEntry {
            iteration: 0,
            policy: id,
            params,
            reward,
        });
    }
    let mut model = GpModel::fit_standardized(&buffer, kernel.clone(), space)?;

    for t in 1..=(budget - n_init) {
        let proposal = sample_next(&model, space, rng)?;
        let reward = policy.evaluate(&proposal.point);
        buffer.push(proposal.point.clone(), reward);
        model = GpModel::fit_standardized(&buffer, kernel.clone(), space)?;
        trace.push(TraceEntry {
            iteration: t,
            policy: id,
            params: proposal.point,
            reward,
        });
    }

    Ok(AdaptationResult::from_trace(trace, id + 1))
}

/// Split the budget evenly and run independent single-policy BO per policy.
///
/// The budget must be divisible by the number of policies.
pub fn baseline_equal_split(
    policies: &mut [PolicyEvaluator],
    space: &ParamBox,
    config: &MpboConfig,
    rng: &mut RngStream,
) -> Result<AdaptationResult> {
    let m = policies.len();
    if m < 1 {
        return Err(Error::Config("need at least one policy".into()));
    }
    if !config.budget.is_multiple_of(m) {
        return Err(Error::Config(format!(
            "budget {} not divisible by {} policies",
            config.budget, m
        )));
    }
    let per_policy = config.budget / m;
    let mut trace = Vec::with_capacity(config.budget);
    for policy in policies.iter_mut() {
        let sub = single_policy_bo(policy, space, per_policy, config.n_init, config.kernel.clone(), rng)?;
        trace.extend(sub.trace);
    }
    Ok(AdaptationResult::from_trace(trace, m))
}

/// Ablation of the selection rule: proposals are computed exactly as in
/// [`mpbo_run`] but the evaluated policy cycles in index order.
pub fn baseline_round_robin(
    policies: &mut [PolicyEvaluator],
    space: &ParamBox,
    config: &MpboConfig,
    rng: &mut RngStream,
) -> Result<AdaptationResult> {
    let mut state = MpboState::init(policies, space, config, rng)?;
    while state.spent() < state.budget() {
        state.step_with(policies, rng, Selection::RoundRobin)?;
    }
    Ok(state.into_result())
}

/// Sanity floor: uniform random (policy, params) pairs, no model at all.
pub fn baseline_random_search(
    policies: &mut [PolicyEvaluator],
    space: &ParamBox,
    budget: usize,
    rng: &mut RngStream,
) -> Result<AdaptationResult> {
    let m = policies.len();
    if m < 1 {
        return Err(Error::Config("need at least one policy".into()));
    }
    if budget < 1 {
        return Err(Error::Config("budget must be >= 1".into()));
    }
    let mut trace = Vec::with_capacity(budget);
    for t in 1..=budget {
        let j = rng.next_index(m);
        let params = space.sample(rng);
        let reward = policies[j].evaluate(&params);
        trace.push(TraceEntry {
            iteration: t,
            policy: j,
            params,
            reward,
        });
    }
    Ok(AdaptationResult::from_trace(trace, m))
}

/// Reward statistics pooled over every policy's buffer.
fn pooled_scaler(buffers: &[SampleBuffer]) -> RewardScaler {
    RewardScaler::from_rewards(buffers.iter().flat_map(|b| b.rewards().iter().copied()))
}

/// Standardizer for one policy's fit: centered at the policy's own mean
/// reward, scaled by the pooled std.
///
/// Centering globally instead would park every GP's prior mean at the
/// pooled average, which inflates expected improvement for weak policies
/// (their unexplored regions would look pooled-average good) and inverts
/// the allocation. The pooled scale is what keeps the improvements
/// commensurable across policies for the `u * e` product.
fn center_scaler(buffer: &SampleBuffer, pooled: &RewardScaler) -> RewardScaler {
    let rewards = buffer.rewards();
    let mean = if rewards.is_empty() {
        0.0
    } else {
        rewards.iter().sum::<f64>() / rewards.len() as f64
    };
    RewardScaler::new(mean, pooled.scale())
}

/// Pooled min and max reward over every buffer.
fn pooled_reward_range(buffers: &[SampleBuffer]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for buffer in buffers {
        for &r in buffer.rewards() {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

/// Map a reward into `[0, 1]` by the pooled range; 0.5 when the range is
/// degenerate (all observations equal).
fn min_max_normalize(value: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (value - lo) / (hi - lo)
    } else {
        0.5
    }
}
