//! Gaussian-process regression over low-dimensional parameter boxes.
//!
//! The surrogate is an anisotropic squared-exponential GP with fixed
//! hyperparameters. Inputs are affinely mapped to the unit cube and targets
//! are standardized before fitting, so the kernel defaults are independent
//! of box bounds and reward units. Fitting uses a Cholesky factorization
//! with an escalating diagonal jitter ladder when the kernel matrix is
//! near-singular.

use crate::error::{Error, Result};
use crate::params::{ParamBox, ParamVector};

/// Hyperparameters of the squared-exponential kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    /// One positive lengthscale per input dimension, in normalized units.
    pub lengthscales: Vec<f64>,
    /// Prior variance of the latent function, in squared standardized units.
    pub signal_variance: f64,
    /// Observation noise variance added to the kernel diagonal.
    pub noise_variance: f64,
}

impl KernelParams {
    /// Fixed defaults: lengthscale 0.3 per normalized dimension, unit signal
    /// variance, noise variance `1e-4`.
    pub fn defaults(dim: usize) -> Self {
        Self {
            lengthscales: vec![0.3; dim],
            signal_variance: 1.0,
            noise_variance: 1e-4,
        }
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengthscales.is_empty() {
            return Err(Error::Config("kernel needs at least one lengthscale".into()));
        }
        if self.lengthscales.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::Config("lengthscales must be strictly positive".into()));
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(Error::Config("signal_variance must be strictly positive".into()));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::Config("noise_variance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Squared-exponential kernel between two points:
/// `signal_variance * exp(-1/2 * sum_i ((a_i - b_i) / lengthscale_i)^2)`.
pub fn kernel_eval(a: &ParamVector, b: &ParamVector, k: &KernelParams) -> Result<f64> {
    if a.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            actual: a.dim(),
        });
    }
    if b.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            actual: b.dim(),
        });
    }
    Ok(kernel_raw(a.values(), b.values(), k))
}

fn kernel_raw(a: &[f64], b: &[f64], k: &KernelParams) -> f64 {
    let mut sq = 0.0;
    for i in 0..a.len() {
        let d = (a[i] - b[i]) / k.lengthscales[i];
        sq += d * d;
    }
    k.signal_variance * (-0.5 * sq).exp()
}

/// Paired observation history of one policy: inputs and their rewards.
#[derive(Debug, Clone, Default)]
pub struct SampleBuffer {
    inputs: Vec<ParamVector>,
    rewards: Vec<f64>,
}

impl SampleBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, input: ParamVector, reward: f64) {
        self.inputs.push(input);
        self.rewards.push(reward);
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn inputs(&self) -> &[ParamVector] {
        &self.inputs
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Index and value of the largest reward observed so far (first of ties).
    pub fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in self.rewards.iter().enumerate() {
            match best {
                Some((_, b)) if b >= *r => {}
                _ => best = Some((i, *r)),
            }
        }
        best
    }
}

/// Affine standardization of rewards: `z = (r - mean) / std`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardScaler {
    mean: f64,
    std: f64,
}

impl RewardScaler {
    /// The do-nothing scaler (mean 0, std 1).
    pub fn identity() -> Self {
        Self { mean: 0.0, std: 1.0 }
    }

    /// Scaler with an explicit center and scale; a non-positive or
    /// non-finite scale falls back to 1.
    pub fn new(mean: f64, std: f64) -> Self {
        let std = if std > 0.0 && std.is_finite() { std } else { 1.0 };
        Self { mean, std }
    }

    /// Mean and sample standard deviation of the given rewards.
    ///
    /// With fewer than two values, or zero variance, the std falls back to 1
    /// so standardization is always well defined.
    pub fn from_rewards<I: IntoIterator<Item = f64>>(rewards: I) -> Self {
        let values: Vec<f64> = rewards.into_iter().collect();
        let n = values.len();
        if n < 2 {
            let mean = values.first().copied().unwrap_or(0.0);
            return Self { mean, std: 1.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        let std = if std > 0.0 && std.is_finite() { std } else { 1.0 };
        Self { mean, std }
    }

    pub fn standardize(&self, reward: f64) -> f64 {
        (reward - self.mean) / self.std
    }

    pub fn destandardize(&self, z: f64) -> f64 {
        self.mean + self.std * z
    }

    /// The std factor, used to map variances back to reward units.
    pub fn scale(&self) -> f64 {
        self.std
    }
}

/// Jitter ladder tried when the plain factorization fails, largest last.
const JITTER_LADDER: [f64; 7] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

/// A fitted GP posterior over reward as a function of a box point.
///
/// Immutable after construction; safe to share across readers.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelParams,
    space: ParamBox,
    scaler: RewardScaler,
    /// Training inputs mapped to the unit cube.
    train_unit: Vec<Vec<f64>>,
    /// Standardized training targets.
    targets_std: Vec<f64>,
    /// Lower-triangular Cholesky factor of `K + (noise + jitter) I`.
    chol: Vec<Vec<f64>>,
    /// Cached solve of the factorization against the targets.
    alpha: Vec<f64>,
    /// Diagonal jitter that was needed to factorize (0 when none).
    jitter: f64,
}

impl GpModel {
    /// The prior model: no observations, zero mean, full signal variance.
    pub fn prior(kernel: KernelParams, space: &ParamBox) -> Result<Self> {
        Self::fit(&SampleBuffer::new(), kernel, space, RewardScaler::identity())
    }

    /// Fit the posterior on a buffer, standardizing targets with `scaler`.
    ///
    /// The scaler is passed in rather than derived here because the
    /// orchestrator standardizes with statistics pooled across all policies.
    ///
    /// # Errors
    ///
    /// Fails with [`Error::NumericallyDegenerate`] when the kernel matrix
    /// cannot be factorized even with the maximum jitter, and with
    /// [`Error::Precondition`] when an input lies outside the box.
    pub fn fit(
        buffer: &SampleBuffer,
        kernel: KernelParams,
        space: &ParamBox,
        scaler: RewardScaler,
    ) -> Result<Self> {
        kernel.validate()?;
        if kernel.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                actual: kernel.dim(),
            });
        }
        let mut train_unit = Vec::with_capacity(buffer.len());
        for input in buffer.inputs() {
            if !space.contains(input) {
                return Err(Error::Precondition(format!(
                    "training input {:?} outside the search box",
                    input.values()
                )));
            }
            train_unit.push(space.normalize(input)?);
        }
        let targets_std: Vec<f64> = buffer.rewards().iter().map(|r| scaler.standardize(*r)).collect();

        let n = buffer.len();
        if n == 0 {
            return Ok(Self {
                kernel,
                space: space.clone(),
                scaler,
                train_unit,
                targets_std,
                chol: Vec::new(),
                alpha: Vec::new(),
                jitter: 0.0,
            });
        }

        let mut base = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let k = kernel_raw(&train_unit[i], &train_unit[j], &kernel);
                base[i][j] = k;
                base[j][i] = k;
            }
        }

        let mut chol = None;
        let mut jitter = 0.0;
        for extra in std::iter::once(0.0).chain(JITTER_LADDER) {
            let diag = kernel.noise_variance + extra;
            if let Some(l) = cholesky(&base, diag) {
                chol = Some(l);
                jitter = extra;
                break;
            }
        }
        let chol = chol.ok_or(Error::NumericallyDegenerate {
            max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
        })?;

        let tmp = solve_lower(&chol, &targets_std);
        let alpha = solve_lower_transpose(&chol, &tmp);

        Ok(Self {
            kernel,
            space: space.clone(),
            scaler,
            train_unit,
            targets_std,
            chol,
            alpha,
            jitter,
        })
    }

    /// Fit with the scaler computed from the buffer's own rewards.
    pub fn fit_standardized(buffer: &SampleBuffer, kernel: KernelParams, space: &ParamBox) -> Result<Self> {
        let scaler = RewardScaler::from_rewards(buffer.rewards().iter().copied());
        Self::fit(buffer, kernel, space, scaler)
    }

    /// Posterior mean and variance at `query`, in raw reward units.
    pub fn predict(&self, query: &ParamVector) -> Result<(f64, f64)> {
        let (mean, var) = self.predict_standardized(query)?;
        let s = self.scaler.scale();
        Ok((self.scaler.destandardize(mean), var * s * s))
    }

    /// Posterior mean and variance at `query`, in standardized units.
    pub fn predict_standardized(&self, query: &ParamVector) -> Result<(f64, f64)> {
        let unit = self.space.normalize(query)?;
        Ok(self.predict_unit(&unit))
    }

    /// Posterior at a unit-cube point. Variance is clamped at zero.
    pub(crate) fn predict_unit(&self, unit: &[f64]) -> (f64, f64) {
        debug_assert_eq!(unit.len(), self.space.dim());
        let n = self.train_unit.len();
        if n == 0 {
            return (0.0, self.kernel.signal_variance);
        }
        let k_star: Vec<f64> = self
            .train_unit
            .iter()
            .map(|x| kernel_raw(unit, x, &self.kernel))
            .collect();
        let mean = k_star.iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        let v = solve_lower(&self.chol, &k_star);
        let var = self.kernel.signal_variance - v.iter().map(|x| x * x).sum::<f64>();
        (mean, var.max(0.0))
    }

    pub fn len(&self) -> usize {
        self.targets_std.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets_std.is_empty()
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn space(&self) -> &ParamBox {
        &self.space
    }

    pub fn scaler(&self) -> &RewardScaler {
        &self.scaler
    }

    /// Diagonal jitter added during fitting, zero when the plain
    /// factorization succeeded.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Largest standardized training target (the per-policy incumbent).
    pub fn best_standardized_target(&self) -> Option<f64> {
        self.targets_std.iter().copied().fold(None, |acc, z| match acc {
            Some(b) if b >= z => Some(b),
            _ => Some(z),
        })
    }
}

/// Cholesky factorization of `base + diag I`; `None` when not positive
/// definite.
fn cholesky(base: &[Vec<f64>], diag: f64) -> Option<Vec<Vec<f64>>> {
    let n = base.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = base[i][j];
            if i == j {
                sum += diag;
            }
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum.is_finite() && sum > 0.0) {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Forward substitution: solve `L x = b`.
fn solve_lower(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for j in 0..i {
            sum -= l[i][j] * x[j];
        }
        x[i] = sum / l[i][i];
    }
    x
}

/// Backward substitution: solve `L^T x = b`.
fn solve_lower_transpose(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = b[i];
        for j in (i + 1)..n {
            sum -= l[j][i] * x[j];
        }
        x[i] = sum / l[i][i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(dim: usize) -> ParamBox {
        ParamBox::new(vec![0.0; dim], vec![1.0; dim]).unwrap()
    }

    #[test]
    fn kernel_zero_distance_gives_signal_variance() {
        let k = KernelParams {
            lengthscales: vec![0.7, 0.2],
            signal_variance: 2.0,
            noise_variance: 0.0,
        };
        let a = ParamVector::new(vec![0.3, 0.9]);
        assert_eq!(kernel_eval(&a, &a, &k).unwrap(), 2.0);
    }

    #[test]
    fn kernel_unit_scaled_distance() {
        let k = KernelParams {
            lengthscales: vec![0.4],
            signal_variance: 1.0,
            noise_variance: 0.0,
        };
        let a = ParamVector::new(vec![0.0]);
        let b = ParamVector::new(vec![0.4]);
        let got = kernel_eval(&a, &b, &k).unwrap();
        assert!((got - (-0.5f64).exp()).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn kernel_hand_computed_distance() {
        // a = (0,0), b = (3*l1, 4*l2): squared scaled distance 25.
        let k = KernelParams {
            lengthscales: vec![0.1, 0.2],
            signal_variance: 1.0,
            noise_variance: 0.0,
        };
        let a = ParamVector::new(vec![0.0, 0.0]);
        let b = ParamVector::new(vec![0.3, 0.8]);
        let got = kernel_eval(&a, &b, &k).unwrap();
        assert!((got - (-12.5f64).exp()).abs() < 1e-18, "got {got}");
    }

    #[test]
    fn kernel_dimension_mismatch() {
        let k = KernelParams::defaults(2);
        let a = ParamVector::new(vec![0.0]);
        let b = ParamVector::new(vec![0.0, 0.0]);
        assert!(matches!(
            kernel_eval(&a, &b, &k),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_point_noise_free_interpolates() {
        let space = unit_box(1);
        let mut buf = SampleBuffer::new();
        buf.push(ParamVector::new(vec![0.4]), 3.25);
        let mut kernel = KernelParams::defaults(1);
        kernel.noise_variance = 0.0;
        let model = GpModel::fit(&buf, kernel, &space, RewardScaler::identity()).unwrap();
        let (mean, var) = model.predict(&ParamVector::new(vec![0.4])).unwrap();
        assert!((mean - 3.25).abs() < 1e-10, "mean {mean}");
        assert!(var.abs() < 1e-10, "var {var}");
    }

    #[test]
    fn two_point_fit_matches_hand_solved_system() {
        // Noise-free 2x2 system solved in closed form:
        // alpha = K^{-1} y with K = [[s, k], [k, s]].
        let space = unit_box(1);
        let (x0, x1) = (0.2, 0.7);
        let (y0, y1) = (1.0, -2.0);
        let mut buf = SampleBuffer::new();
        buf.push(ParamVector::new(vec![x0]), y0);
        buf.push(ParamVector::new(vec![x1]), y1);
        let mut kernel = KernelParams::defaults(1);
        kernel.noise_variance = 0.0;
        let model = GpModel::fit(&buf, kernel.clone(), &space, RewardScaler::identity()).unwrap();

        let s = kernel.signal_variance;
        let k01 = kernel_raw(&[x0], &[x1], &kernel);
        let det = s * s - k01 * k01;
        let alpha0 = (s * y0 - k01 * y1) / det;
        let alpha1 = (-k01 * y0 + s * y1) / det;

        for (xq, expected) in [
            (x0, s * alpha0 + k01 * alpha1),
            (x1, k01 * alpha0 + s * alpha1),
        ] {
            let (mean, _) = model.predict(&ParamVector::new(vec![xq])).unwrap();
            assert!((mean - expected).abs() < 1e-8, "mean {mean} vs {expected}");
        }
    }

    #[test]
    fn duplicated_point_engages_jitter() {
        let space = unit_box(1);
        let mut buf = SampleBuffer::new();
        buf.push(ParamVector::new(vec![0.5]), 1.0);
        buf.push(ParamVector::new(vec![0.5]), 1.0);
        let mut kernel = KernelParams::defaults(1);
        kernel.noise_variance = 0.0;
        let model = GpModel::fit(&buf, kernel, &space, RewardScaler::identity()).unwrap();
        assert!(model.jitter() > 0.0);
    }

    #[test]
    fn prior_predicts_zero_mean_signal_variance() {
        let space = unit_box(3);
        let model = GpModel::prior(KernelParams::defaults(3), &space).unwrap();
        let (mean, var) = model.predict(&ParamVector::new(vec![0.5; 3])).unwrap();
        assert_eq!(mean, 0.0);
        assert_eq!(var, 1.0);
    }

    #[test]
    fn factorization_reproduces_kernel_matrix() {
        let space = unit_box(2);
        let mut buf = SampleBuffer::new();
        let mut rng = crate::rng::RngStream::new(21);
        for _ in 0..5 {
            buf.push(space.sample(&mut rng), rng.next_in(-1.0, 1.0));
        }
        let kernel = KernelParams::defaults(2);
        let model = GpModel::fit(&buf, kernel.clone(), &space, RewardScaler::identity()).unwrap();

        let n = buf.len();
        let unit: Vec<Vec<f64>> = buf.inputs().iter().map(|p| space.normalize(p).unwrap()).collect();
        let mut frob_err = 0.0;
        let mut frob = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut expected = kernel_raw(&unit[i], &unit[j], &kernel);
                if i == j {
                    expected += kernel.noise_variance + model.jitter();
                }
                let mut got = 0.0;
                for k in 0..n {
                    got += model.chol[i][k] * model.chol[j][k];
                }
                frob_err += (got - expected) * (got - expected);
                frob += expected * expected;
            }
        }
        assert!((frob_err.sqrt() / frob.sqrt()) < 1e-8);
    }

    #[test]
    fn scaler_degenerate_cases_use_unit_std() {
        let s = RewardScaler::from_rewards([]);
        assert_eq!(s.standardize(2.0), 2.0);
        let s = RewardScaler::from_rewards([5.0]);
        assert_eq!(s.standardize(5.0), 0.0);
        assert_eq!(s.scale(), 1.0);
        let s = RewardScaler::from_rewards([3.0, 3.0, 3.0]);
        assert_eq!(s.scale(), 1.0);
    }

    #[test]
    fn scaler_round_trips() {
        let s = RewardScaler::from_rewards([1.0, 2.0, 3.0, 10.0]);
        let z = s.standardize(7.0);
        assert!((s.destandardize(z) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_box_input_rejected() {
        let space = unit_box(1);
        let mut buf = SampleBuffer::new();
        buf.push(ParamVector::new(vec![1.5]), 0.0);
        let err = GpModel::fit(&buf, KernelParams::defaults(1), &space, RewardScaler::identity());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn buffer_best_returns_first_of_ties() {
        let mut buf = SampleBuffer::new();
        buf.push(ParamVector::new(vec![0.1]), 1.0);
        buf.push(ParamVector::new(vec![0.2]), 4.0);
        buf.push(ParamVector::new(vec![0.3]), 4.0);
        assert_eq!(buf.best(), Some((1, 4.0)));
    }
}
