//! Outcome models for two photons in the product state `ρ_M ⊗ ρ_M`, where
//! `ρ_M = (1 + M·σ)/2` and the direction of `M` is uniformly random.
//!
//! * Coherent: projection onto the singlet versus the triplet subspace.
//! * Incoherent: both photons measured in the same random basis, recording
//!   whether the two results agree.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_unit, Error, Result};

pub const SINGLET: &str = "singlet";
pub const TRIPLET: &str = "triplet";
pub const SAME: &str = "same";
pub const DIFFERENT: &str = "different";

/// Points at which model completeness is checked on construction.
const COMPLETENESS_POINTS: usize = 1001;

/// Singlet overlap `(1 − m²)/4`.
pub fn p_singlet(m: f64) -> Result<f64> {
    check_unit("m", m).map(singlet)
}

/// `(3 + m²)/4 = 1 − p_singlet(m)`.
pub fn p_triplet(m: f64) -> Result<f64> {
    check_unit("m", m).map(triplet)
}

/// Probability `(3 + m²)/6` that both photons give the same result.
pub fn p_same(m: f64) -> Result<f64> {
    check_unit("m", m).map(same)
}

/// `(3 − m²)/6 = 1 − p_same(m)`.
pub fn p_different(m: f64) -> Result<f64> {
    check_unit("m", m).map(different)
}

fn singlet(m: f64) -> f64 {
    (1.0 - m * m) / 4.0
}

fn triplet(m: f64) -> f64 {
    (3.0 + m * m) / 4.0
}

fn same(m: f64) -> f64 {
    (3.0 + m * m) / 6.0
}

fn different(m: f64) -> f64 {
    (3.0 - m * m) / 6.0
}

pub type Likelihood = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// One labelled outcome and its likelihood `m ↦ P(outcome | m)`.
pub struct Outcome {
    label: String,
    likelihood: Likelihood,
}

impl Outcome {
    pub fn new(
        label: impl Into<String>,
        likelihood: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            likelihood: Box::new(likelihood),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Likelihood at `m`; `m` is assumed to lie in `[0, 1]`.
    pub fn likelihood(&self, m: f64) -> f64 {
        (self.likelihood)(m)
    }
}

impl core::fmt::Debug for Outcome {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Outcome")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// A complete set of outcomes whose likelihoods sum to one at every `m`.
#[derive(Debug)]
pub struct OutcomeModel {
    label: String,
    outcomes: Vec<Outcome>,
}

impl OutcomeModel {
    /// Checks that every likelihood lies in `[0, 1]` and that they sum to one
    /// within 1e-12 at 1001 points of `[0, 1]`.
    pub fn new(label: impl Into<String>, outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::IncompleteModel { m: 0.0, sum: 0.0 });
        }
        for i in 0..COMPLETENESS_POINTS {
            let m = i as f64 / (COMPLETENESS_POINTS - 1) as f64;
            let mut sum = 0.0;
            for o in &outcomes {
                let p = o.likelihood(m);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain {
                        name: "likelihood",
                        value: p,
                        expected: "must lie in [0, 1]",
                    });
                }
                sum += p;
            }
            if !(libm::fabs(sum - 1.0) <= 1e-12) {
                return Err(Error::IncompleteModel { m, sum });
            }
        }
        Ok(Self {
            label: label.into(),
            outcomes,
        })
    }

    /// Singlet/triplet projection.
    pub fn coherent() -> Self {
        Self {
            label: "coherent".to_string(),
            outcomes: alloc::vec![
                Outcome::new(SINGLET, singlet),
                Outcome::new(TRIPLET, triplet)
            ],
        }
    }

    /// Same-basis measurement of both photons, recording agreement.
    pub fn incoherent() -> Self {
        Self {
            label: "incoherent".to_string(),
            outcomes: alloc::vec![Outcome::new(SAME, same), Outcome::new(DIFFERENT, different)],
        }
    }

    /// Outcomes with fixed probabilities, independent of `m`.
    pub fn uninformative(label: impl Into<String>, probabilities: &[(&str, f64)]) -> Result<Self> {
        let outcomes = probabilities
            .iter()
            .map(|&(l, p)| Outcome::new(l, move |_| p))
            .collect();
        Self::new(label, outcomes)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(Outcome::label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|o| o.label == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    /// Draws an outcome with the model's likelihoods at `m`.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, m: f64, rng: &mut R) -> Result<&str> {
        let m = check_unit("m", m)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for o in &self.outcomes {
            acc += o.likelihood(m);
            if u < acc {
                return Ok(&o.label);
            }
        }
        // u landed in the rounding slack above the cumulative sum.
        let last = self
            .outcomes
            .iter()
            .rev()
            .find(|o| o.likelihood(m) > 0.0)
            .unwrap_or(&self.outcomes[self.outcomes.len() - 1]);
        Ok(&last.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn likelihood_values() {
        assert_eq!(p_singlet(0.0).unwrap(), 0.25);
        assert_eq!(p_singlet(1.0).unwrap(), 0.0);
        assert_eq!(p_singlet(0.5).unwrap(), 0.1875);
        assert_eq!(p_triplet(0.0).unwrap(), 0.75);
        assert_eq!(p_triplet(1.0).unwrap(), 1.0);
        assert_eq!(p_same(0.0).unwrap(), 0.5);
        assert!((p_same(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-16);
        for f in [p_singlet, p_triplet, p_same, p_different] {
            assert!(f(-0.01).is_err());
            assert!(f(1.01).is_err());
            assert!(f(f64::NAN).is_err());
        }
    }

    #[test]
    fn same_matches_basis_average() {
        // Average p² + (1 − p)² with p = (1 + m·c)/2 over c uniform on [−1, 1].
        // The integrand is quadratic in c, so Simpson on one panel is exact.
        for m in [0.2, 0.5, 0.8] {
            let g = |c: f64| {
                let p = (1.0 + m * c) / 2.0;
                p * p + (1.0 - p) * (1.0 - p)
            };
            let avg = (g(-1.0) + 4.0 * g(0.0) + g(1.0)) / 6.0;
            assert!((p_same(m).unwrap() - avg).abs() < 1e-10);
        }
    }

    #[test]
    fn monotonicity() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        for w in grid.windows(2) {
            assert!(singlet(w[1]) < singlet(w[0]));
            assert!(same(w[1]) > same(w[0]));
        }
    }

    #[test]
    fn completeness_enforced() {
        assert!(OutcomeModel::uninformative("half", &[("a", 0.5), ("b", 0.5)]).is_ok());
        assert!(matches!(
            OutcomeModel::uninformative("short", &[("a", 0.5), ("b", 0.4)]),
            Err(Error::IncompleteModel { .. })
        ));
        assert!(OutcomeModel::new(
            "bad",
            alloc::vec![Outcome::new("x", |m| 1.0 + m), Outcome::new("y", |m| -m)]
        )
        .is_err());
        // The built-in models pass the same check.
        for model in [OutcomeModel::coherent(), OutcomeModel::incoherent()] {
            let outcomes = model.outcomes;
            assert!(OutcomeModel::new(model.label, outcomes).is_ok());
        }
    }

    #[test]
    fn lookup() {
        let m = OutcomeModel::coherent();
        assert_eq!(m.position(TRIPLET).unwrap(), 1);
        assert_eq!(m.labels().collect::<Vec<_>>(), [SINGLET, TRIPLET]);
        assert!(matches!(m.position("nope"), Err(Error::UnknownOutcome(_))));
    }

    #[test]
    fn fully_polarized_never_singlet() {
        let model = OutcomeModel::coherent();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            assert_eq!(model.sample_outcome(1.0, &mut rng).unwrap(), TRIPLET);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let model = OutcomeModel::incoherent();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..256)
                .map(|_| model.sample_outcome(0.4, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
    }

    #[test]
    fn sampling_frequencies() {
        let n = 1_000_000;
        for model in [OutcomeModel::coherent(), OutcomeModel::incoherent()] {
            for m in [0.0, 0.5, 1.0] {
                let mut rng = ChaCha8Rng::seed_from_u64(17);
                let mut hits = 0usize;
                for _ in 0..n {
                    if model.sample_outcome(m, &mut rng).unwrap() == model.outcomes[0].label {
                        hits += 1;
                    }
                }
                let p = model.outcomes[0].likelihood(m);
                let freq = hits as f64 / n as f64;
                let se = (p * (1.0 - p) / n as f64).sqrt();
                assert!(
                    (freq - p).abs() <= 3.0 * se + 1e-12,
                    "{} m={m}: {freq} vs {p}",
                    model.label
                );
            }
        }
    }

    proptest! {
        #[test]
        fn builtins_are_complete(m in 0.0f64..=1.0) {
            prop_assert!((p_singlet(m).unwrap() + p_triplet(m).unwrap() - 1.0).abs() < 1e-15);
            prop_assert!((p_same(m).unwrap() + p_different(m).unwrap() - 1.0).abs() < 1e-15);
        }
    }
}
