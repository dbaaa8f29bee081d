//! Monte Carlo reports shared by the coding simulators.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    /// Each trial draws the shared randomness and one source or channel
    /// realization.
    MonteCarlo,
    /// Each trial draws the shared randomness; the error given it is summed
    /// exactly.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mode: SimulationMode,
    pub trials: u64,
    /// Monte Carlo: failed trials. Exact: trials whose conditional error
    /// probability is positive.
    pub failures: u64,
    pub point_estimate: f64,
    pub stderr: f64,
    pub wilson_95_upper: f64,
    pub analytic_bound: f64,
    pub target_eps: f64,
    /// `Pass` when the Wilson upper limit is within the target.
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Upper end of the Wilson score interval for a proportion `p_hat` over `n`
/// trials. `p_hat` may come from a fractional count.
pub fn wilson_upper(p_hat: f64, n: u64, z: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let n = n as f64;
    let z2 = z * z;
    let centre = p_hat + z2 / (2.0 * n);
    let spread = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre + spread) / (1.0 + z2 / n)).clamp(0.0, 1.0)
}

pub const CSV_HEADER: &str = "mode,trials,failures,estimate,stderr,wilson_95_upper,analytic_bound,target_eps,verdict";

impl SimulationReport {
    pub fn from_counts(failures: u64, trials: u64, analytic_bound: f64, target_eps: f64) -> Self {
        let p = failures as f64 / trials as f64;
        let stderr = (p * (1.0 - p) / trials as f64).sqrt();
        Self::assemble(SimulationMode::MonteCarlo, trials, failures, p, stderr, analytic_bound, target_eps)
    }

    /// From per-trial conditional error probabilities.
    pub fn from_exact(per_trial: &[f64], analytic_bound: f64, target_eps: f64) -> Self {
        let n = per_trial.len() as u64;
        let mean = per_trial.iter().sum::<f64>() / n as f64 + 0.0;
        let var = if n > 1 {
            per_trial.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let failures = per_trial.iter().filter(|&&v| v > 0.0).count() as u64;
        Self::assemble(SimulationMode::Exact, n, failures, mean, (var / n as f64).sqrt(), analytic_bound, target_eps)
    }

    fn assemble(
        mode: SimulationMode,
        trials: u64,
        failures: u64,
        point_estimate: f64,
        stderr: f64,
        analytic_bound: f64,
        target_eps: f64,
    ) -> Self {
        let wilson_95_upper = wilson_upper(point_estimate, trials, Z_95);
        let verdict = if wilson_95_upper <= target_eps { Verdict::Pass } else { Verdict::Fail };
        SimulationReport {
            mode,
            trials,
            failures,
            point_estimate,
            stderr,
            wilson_95_upper,
            analytic_bound,
            target_eps,
            verdict,
            warnings: Vec::new(),
        }
    }

    /// Whether the estimate is within three standard errors of the bound.
    pub fn consistent_with_bound(&self) -> bool {
        self.point_estimate <= self.analytic_bound + 3.0 * self.stderr
    }

    pub fn to_csv_row(&self) -> String {
        let mode = match self.mode {
            SimulationMode::MonteCarlo => "monte_carlo",
            SimulationMode::Exact => "exact",
        };
        let verdict = match self.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        };
        format!(
            "{mode},{},{},{},{},{},{},{},{verdict}",
            self.trials,
            self.failures,
            self.point_estimate,
            self.stderr,
            self.wilson_95_upper,
            self.analytic_bound,
            self.target_eps
        )
    }
}
