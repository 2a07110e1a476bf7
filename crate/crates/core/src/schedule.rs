//! Global selection rate over step-decay training stages.
//!
//! The rate starts each stage at half its ceiling and rises along a sigmoid;
//! the ceiling `r̂ / β^(t-1)` shrinks with every learning-rate drop.

use crate::error::{Result, WeError};
use crate::scalar::Scalar;

pub fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

/// 1-based stage index and the stage's first epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stage {
    pub index: usize,
    pub start: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageSchedule<S> {
    total_epochs: usize,
    stage_starts: Vec<usize>,
    r_hat: S,
    beta: S,
    eta: S,
}

impl<S: Scalar> StageSchedule<S> {
    /// `stage_starts` holds the first epoch of every stage (1-based epochs).
    pub fn new(
        total_epochs: usize,
        stage_starts: Vec<usize>,
        r_hat: S,
        beta: S,
        eta: S,
    ) -> Result<Self> {
        let invalid = |m: String| Err(WeError::InvalidSchedule(m));
        if total_epochs == 0 {
            return invalid("total_epochs must be >= 1".into());
        }
        let Some(&first) = stage_starts.first() else {
            return invalid("at least one stage is required".into());
        };
        if first != 1 {
            return invalid(format!("first stage must start at epoch 1, not {first}"));
        }
        if stage_starts.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("stage starts must be strictly ascending".into());
        }
        if let Some(&last) = stage_starts.last() {
            if last > total_epochs {
                return invalid(format!("stage start {last} beyond final epoch {total_epochs}"));
            }
        }
        if !(r_hat > S::zero() && r_hat <= S::one()) {
            return invalid(format!("r_hat must be in (0, 1], got {r_hat}"));
        }
        if !(beta > S::one()) {
            return invalid(format!("beta must be > 1, got {beta}"));
        }
        if !(eta > S::zero()) {
            return invalid(format!("eta must be > 0, got {eta}"));
        }
        Ok(StageSchedule {
            total_epochs,
            stage_starts,
            r_hat,
            beta,
            eta,
        })
    }

    /// Stages from learning-rate milestones: a decay at the end of epoch `m`
    /// opens a stage at `m + 1`.
    pub fn from_milestones(
        total_epochs: usize,
        milestones: &[usize],
        r_hat: S,
        beta: S,
        eta: S,
    ) -> Result<Self> {
        let mut starts = vec![1];
        starts.extend(milestones.iter().map(|m| m + 1));
        Self::new(total_epochs, starts, r_hat, beta, eta)
    }

    pub fn total_epochs(&self) -> usize {
        self.total_epochs
    }

    pub fn stage_starts(&self) -> &[usize] {
        &self.stage_starts
    }

    pub fn r_hat(&self) -> S {
        self.r_hat
    }

    pub fn beta(&self) -> S {
        self.beta
    }

    pub fn eta(&self) -> S {
        self.eta
    }

    /// Same schedule with a different ceiling.
    pub fn with_r_hat(&self, r_hat: S) -> Result<Self> {
        Self::new(
            self.total_epochs,
            self.stage_starts.clone(),
            r_hat,
            self.beta,
            self.eta,
        )
    }

    pub fn stage_of(&self, epoch: usize) -> Result<Stage> {
        if epoch < 1 || epoch > self.total_epochs {
            return Err(WeError::EpochOutOfRange {
                epoch,
                first: 1,
                last: self.total_epochs,
            });
        }
        let idx = self.stage_starts.partition_point(|&s| s <= epoch);
        Ok(Stage {
            index: idx,
            start: self.stage_starts[idx - 1],
        })
    }

    pub fn selection_rate(&self, epoch: usize) -> Result<S> {
        let stage = self.stage_of(epoch)?;
        let ceiling = self.r_hat / self.beta.powi((stage.index - 1) as i32);
        let x = S::from_count(epoch - stage.start) / self.eta;
        Ok(ceiling * sigmoid(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cifar() -> StageSchedule<f64> {
        StageSchedule::from_milestones(200, &[60, 120], 0.05, 2.5, 15.0).unwrap()
    }

    #[test]
    fn stage_lookup() {
        let s = cifar();
        assert_eq!(s.stage_starts(), &[1, 61, 121]);
        assert_eq!(s.stage_of(1).unwrap(), Stage { index: 1, start: 1 });
        assert_eq!(s.stage_of(60).unwrap(), Stage { index: 1, start: 1 });
        assert_eq!(s.stage_of(61).unwrap(), Stage { index: 2, start: 61 });
        assert_eq!(s.stage_of(121).unwrap(), Stage { index: 3, start: 121 });
        assert_eq!(s.stage_of(200).unwrap(), Stage { index: 3, start: 121 });
        assert!(matches!(s.stage_of(0), Err(WeError::EpochOutOfRange { .. })));
        assert!(matches!(s.stage_of(201), Err(WeError::EpochOutOfRange { .. })));
    }

    #[test]
    fn rate_examples() {
        let s = cifar();
        assert_relative_eq!(s.selection_rate(1).unwrap(), 0.025, max_relative = 1e-12);
        assert_relative_eq!(s.selection_rate(61).unwrap(), 0.01, max_relative = 1e-12);
        // 0.05 / (1 + e^-1)
        assert_relative_eq!(s.selection_rate(16).unwrap(), 0.036_552_928_931_500_24, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StageSchedule::<f64>::new(200, vec![1, 61, 61], 0.05, 2.5, 15.0).is_err());
        assert!(StageSchedule::<f64>::new(200, vec![2], 0.05, 2.5, 15.0).is_err());
        assert!(StageSchedule::<f64>::new(200, vec![1, 300], 0.05, 2.5, 15.0).is_err());
        assert!(StageSchedule::<f64>::new(200, vec![1], 0.05, 1.0, 15.0).is_err());
        assert!(StageSchedule::<f64>::new(200, vec![1], 0.0, 2.5, 15.0).is_err());
        assert!(StageSchedule::<f64>::new(200, vec![1], 0.05, 2.5, 0.0).is_err());
        assert!(StageSchedule::<f64>::new(200, vec![], 0.05, 2.5, 15.0).is_err());
    }

    #[test]
    fn monotone_within_stages_and_drops_between() {
        for s in [
            cifar(),
            StageSchedule::from_milestones(90, &[30, 60], 0.05, 2.0, 8.0).unwrap(),
        ] {
            let rates: Vec<f64> = (1..=s.total_epochs()).map(|e| s.selection_rate(e).unwrap()).collect();
            for e in 2..=s.total_epochs() {
                let (prev, cur) = (rates[e - 2], rates[e - 1]);
                if s.stage_starts().contains(&e) {
                    assert!(cur < prev, "no drop at {e}");
                } else {
                    assert!(cur > prev, "not increasing at {e}");
                }
            }
            assert!(rates.iter().all(|&r| r > 0.0 && r < s.r_hat()));
        }
    }

    #[test]
    fn works_in_single_precision() {
        let s = StageSchedule::<f32>::from_milestones(200, &[60, 120], 0.05, 2.5, 15.0).unwrap();
        assert!((s.selection_rate(1).unwrap() - 0.025).abs() < 1e-7);
    }
}
