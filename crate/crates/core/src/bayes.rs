//! Posterior densities over the DOP and the mean Shannon information gained
//! from one measurement outcome.
//!
//! Entropies are differential entropies `h = −∫ρ log₂ρ` in bits, so the mean
//! gain `h(prior) − Σ_o P_o h(posterior_o)` is the mutual information between
//! the outcome and the DOP, and is non-negative.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measurement::OutcomeModel;
use crate::pmd::{self, validate_density, DopPrior, FiberPmd, GaussianPulse};
use crate::quad;

/// Marginal outcome probabilities below this cannot be conditioned on.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-15;

/// Densities below this are treated as exact zeros in entropy sums.
const DENSITY_FLOOR: f64 = 1e-300;

/// Posterior density of the DOP given one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    outcome: String,
    p_outcome: f64,
}

impl PosteriorDensity {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn outcome(&self) -> &str {
        &self.outcome
    }

    /// Marginal probability `∫ρ(m)P(outcome|m)dm` used as normaliser.
    pub fn p_outcome(&self) -> f64 {
        self.p_outcome
    }

    pub fn mean(&self) -> f64 {
        let w: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(m, d)| m * d)
            .collect();
        quad::trapezoid(&self.grid, &w)
    }
}

/// `ρ(m|o) = ρ(m)·P(o|m) / P_o` with `P_o` the trapezoidal integral of the
/// numerator.
pub fn posterior(
    prior: &DopPrior,
    model: &OutcomeModel,
    outcome: &str,
) -> Result<PosteriorDensity> {
    let idx = model.position(outcome)?;
    let o = &model.outcomes()[idx];
    let joint: Vec<f64> = prior
        .grid()
        .iter()
        .zip(prior.density())
        .map(|(&m, &d)| d * o.likelihood(m))
        .collect();
    let p_outcome = quad::trapezoid(prior.grid(), &joint);
    if !(p_outcome >= MIN_OUTCOME_PROBABILITY) {
        return Err(Error::DegenerateOutcome {
            outcome: outcome.to_string(),
            probability: p_outcome,
        });
    }
    Ok(PosteriorDensity {
        grid: prior.grid().to_vec(),
        density: joint.into_iter().map(|j| j / p_outcome).collect(),
        outcome: outcome.to_string(),
        p_outcome,
    })
}

/// `−∫ρ log₂ρ` by the trapezoidal rule, with `0·log 0 = 0`.
///
/// The density must be non-negative with unit mass within 1e-4.
pub fn differential_entropy(grid: &[f64], density: &[f64]) -> Result<f64> {
    validate_density(grid, density)?;
    let integrand: Vec<f64> = density
        .iter()
        .map(|&d| {
            if d < DENSITY_FLOOR {
                0.0
            } else {
                -d * libm::log2(d)
            }
        })
        .collect();
    Ok(quad::trapezoid(grid, &integrand))
}

/// Information gain of one measurement scheme on a given prior.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub model_label: String,
    pub outcomes: Vec<String>,
    pub p_outcome: Vec<f64>,
    /// Prior entropy in bits.
    pub prior_entropy: f64,
    /// Posterior entropy per outcome in bits.
    pub posterior_entropy: Vec<f64>,
    /// `h(prior) − h(posterior_o)` per outcome, in bits. May be negative.
    pub gain_per_outcome: Vec<f64>,
    /// Outcome-averaged gain in bits.
    pub mean_gain: f64,
}

/// Mean information gain of `model` on `prior`.
///
/// The prior is first rescaled to unit trapezoidal mass so the outcome
/// marginals sum to one to rounding.
pub fn mean_info_gain(prior: &DopPrior, model: &OutcomeModel) -> Result<GainReport> {
    let prior = prior.normalized();
    let prior_entropy = differential_entropy(prior.grid(), prior.density())?;
    let mut report = GainReport {
        model_label: model.label().to_string(),
        outcomes: Vec::with_capacity(model.len()),
        p_outcome: Vec::with_capacity(model.len()),
        prior_entropy,
        posterior_entropy: Vec::with_capacity(model.len()),
        gain_per_outcome: Vec::with_capacity(model.len()),
        mean_gain: 0.0,
    };
    for label in model.labels() {
        let post = posterior(&prior, model, label)?;
        let h = differential_entropy(post.grid(), post.density())?;
        report.outcomes.push(label.to_string());
        report.p_outcome.push(post.p_outcome());
        report.posterior_entropy.push(h);
        report.gain_per_outcome.push(prior_entropy - h);
        report.mean_gain += post.p_outcome() * (prior_entropy - h);
    }
    Ok(report)
}

/// `mean_gain(coherent) / mean_gain(incoherent)` on a tabulated prior.
pub fn gain_ratio_for(prior: &DopPrior) -> Result<f64> {
    let coherent = mean_info_gain(prior, &OutcomeModel::coherent())?;
    let incoherent = mean_info_gain(prior, &OutcomeModel::incoherent())?;
    if !(incoherent.mean_gain >= 1e-12) {
        return Err(Error::DegenerateRatio(incoherent.mean_gain));
    }
    Ok(coherent.mean_gain / incoherent.mean_gain)
}

/// Gain ratio for the PMD prior on the default 2001-point grid.
pub fn gain_ratio(fiber: &FiberPmd, pulse: &GaussianPulse) -> Result<f64> {
    gain_ratio_for(&pmd::default_prior_table(fiber, pulse)?)
}

/// Gain ratio in the limit `Δτ/σ → ∞`, where the DOP prior is uniform.
pub fn gain_ratio_uniform() -> Result<f64> {
    gain_ratio_for(&DopPrior::uniform(pmd::DEFAULT_GRID_POINTS)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{Outcome, SINGLET};

    fn uniform() -> DopPrior {
        DopPrior::uniform(2001).unwrap()
    }

    fn pmd_prior(rms: f64, n: usize) -> DopPrior {
        pmd::prior_table(
            &FiberPmd::new(rms).unwrap(),
            &GaussianPulse::new(10.0).unwrap(),
            n,
        )
        .unwrap()
    }

    #[test]
    fn uniform_prior_singlet_posterior() {
        let post = posterior(&uniform(), &OutcomeModel::coherent(), SINGLET).unwrap();
        // ∫(1 − m²)/4 dm = 1/6 exactly; trapezoid error is h²/12·|f''| integrated.
        assert!((post.p_outcome() - 1.0 / 6.0).abs() < 1e-7);
        for (&m, &d) in post.grid().iter().zip(post.density()).step_by(50) {
            assert!((d - 1.5 * (1.0 - m * m)).abs() < 1e-6, "m={m}");
        }
    }

    #[test]
    fn constant_likelihood_leaves_prior() {
        let prior = pmd_prior(30.0, 2001);
        let model = OutcomeModel::uninformative("flat", &[("a", 0.3), ("b", 0.7)]).unwrap();
        let post = posterior(&prior, &model, "b").unwrap();
        let z = prior.mass();
        for (p, q) in prior.density().iter().zip(post.density()) {
            assert!((p / z - q).abs() < 1e-12);
        }
        let report = mean_info_gain(&prior, &model).unwrap();
        assert!(report.mean_gain.abs() < 1e-12);
    }

    #[test]
    fn singlet_shifts_mass_down() {
        let prior = pmd_prior(30.0, 2001);
        let post = posterior(&prior, &OutcomeModel::coherent(), SINGLET).unwrap();
        assert!(post.mean() < prior.mean());
    }

    #[test]
    fn degenerate_and_unknown_outcomes() {
        let model = OutcomeModel::new(
            "edge",
            alloc::vec![
                Outcome::new("never", |_| 0.0),
                Outcome::new("always", |_| 1.0)
            ],
        )
        .unwrap();
        assert!(matches!(
            posterior(&uniform(), &model, "never"),
            Err(Error::DegenerateOutcome { .. })
        ));
        assert!(matches!(
            posterior(&uniform(), &model, "huh"),
            Err(Error::UnknownOutcome(_))
        ));
    }

    #[test]
    fn entropy_values() {
        let g = quad::unit_grid(2001);
        assert!(
            differential_entropy(&g, &alloc::vec![1.0; 2001])
                .unwrap()
                .abs()
                < 1e-15
        );
        // Step at 0.5 with the midpoint value on the jump, so the trapezoid mass is exactly 1.
        let half: Vec<f64> = g
            .iter()
            .map(|&m| {
                if m < 0.5 {
                    2.0
                } else if m == 0.5 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let h = differential_entropy(&g, &half).unwrap();
        assert!((h + 1.0).abs() < 1e-3, "{h}");
        assert!(differential_entropy(&g, &alloc::vec![0.5; 2001]).is_err());
    }

    #[test]
    fn entropy_of_singlet_posterior_shape() {
        // Oracle: composite Simpson at 10^5 panels.
        let f = |m: f64| {
            let d = 1.5 * (1.0 - m * m);
            if d <= 0.0 {
                0.0
            } else {
                -d * libm::log2(d)
            }
        };
        let n = 100_000;
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let oracle = s * h / 3.0;
        let g = quad::unit_grid(2001);
        let d: Vec<f64> = g.iter().map(|&m| 1.5 * (1.0 - m * m)).collect();
        let got = differential_entropy(&g, &d).unwrap();
        assert!((got - oracle).abs() < 1e-5, "{got} vs {oracle}");
    }

    #[test]
    fn bayes_consistency() {
        let prior = pmd_prior(20.0, 2001).normalized();
        for model in [OutcomeModel::coherent(), OutcomeModel::incoherent()] {
            let posts: Vec<_> = model
                .labels()
                .map(|l| posterior(&prior, &model, l).unwrap())
                .collect();
            for i in 0..prior.len() {
                let mix: f64 = posts.iter().map(|p| p.p_outcome() * p.density()[i]).sum();
                assert!((mix - prior.density()[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn report_invariants() {
        let prior = pmd_prior(40.0, 2001);
        for model in [OutcomeModel::coherent(), OutcomeModel::incoherent()] {
            let r = mean_info_gain(&prior, &model).unwrap();
            assert!((r.p_outcome.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(r.mean_gain >= -1e-9);
            let avg: f64 = r
                .p_outcome
                .iter()
                .zip(&r.gain_per_outcome)
                .map(|(p, g)| p * g)
                .sum();
            assert!((avg - r.mean_gain).abs() < 1e-15);
        }
    }

    #[test]
    fn gain_grid_convergence() {
        let coarse = pmd_prior(30.0, 2001);
        let fine = pmd_prior(30.0, 4001);
        for model in [OutcomeModel::coherent(), OutcomeModel::incoherent()] {
            let a = mean_info_gain(&coarse, &model).unwrap().mean_gain;
            let b = mean_info_gain(&fine, &model).unwrap().mean_gain;
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn uniform_ratio() {
        let r = gain_ratio_uniform().unwrap();
        assert!((r / 4.82 - 1.0).abs() < 0.05, "{r}");
    }
}
