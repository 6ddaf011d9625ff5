//! Monte Carlo counterparts of the analytic quantities.
//!
//! Ensembles are generated in chunks of [`CHUNK_LEN`] realizations. Chunk `i`
//! draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i`, so
//! chunks can be produced independently (and in parallel) while the
//! concatenated sequence depends only on `(n, seed)`.
//!
//! Per realization the draws are, in order: three normals for the DGD, one
//! uniform for η, three normals for the principal-state axis (normalized; an
//! all-zero draw is redrawn) and one uniform for the phase.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{log2, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_unit, domain, Result};
use crate::measurement::OutcomeModel;
use crate::pmd::{dop_of_realization, FiberPmd, GaussianPulse, PmdRealization};

/// Realizations per independently seeded chunk.
pub const CHUNK_LEN: usize = 1 << 16;

/// Random stream for chunk `chunk` of the ensemble with master `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Number of chunks covering `n` realizations.
pub fn chunk_count(n: usize) -> usize {
    n.div_ceil(CHUNK_LEN)
}

/// Length of chunk `chunk` in an ensemble of `n`.
pub fn chunk_len(n: usize, chunk: usize) -> usize {
    n.saturating_sub(chunk * CHUNK_LEN).min(CHUNK_LEN)
}

/// Uniformly distributed unit vector from a normalized Gaussian triple.
pub fn sample_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = core::array::from_fn(|_| StandardNormal.sample(rng));
        let n = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if n > 0.0 {
            return v.map(|c| c / n);
        }
    }
}

/// One fiber state: Maxwell DGD, η uniform on `[−1, 1]`, axis uniform on the
/// sphere, phase uniform on `[0, 2π)`.
pub fn sample_realization<R: Rng + ?Sized>(fiber: &FiberPmd, rng: &mut R) -> PmdRealization {
    let dgd = fiber.sample_dgd(rng);
    let eta = rng.random_range(-1.0..=1.0);
    let axis = sample_unit_vector(rng);
    let phase = rng.random_range(0.0..2.0 * PI);
    PmdRealization::new(dgd, eta, axis, phase).expect("sampled realization is valid")
}

/// Realizations and DOPs of chunk `chunk`.
pub fn sample_chunk(
    n: usize,
    chunk: usize,
    fiber: &FiberPmd,
    pulse: &GaussianPulse,
    seed: u64,
) -> (Vec<PmdRealization>, Vec<f64>) {
    let len = chunk_len(n, chunk);
    let mut rng = chunk_rng(seed, chunk as u64);
    let realizations: Vec<_> = (0..len)
        .map(|_| sample_realization(fiber, &mut rng))
        .collect();
    let dops = realizations
        .iter()
        .map(|r| dop_of_realization(r, pulse))
        .collect();
    (realizations, dops)
}

/// DOPs of chunk `chunk`, without keeping the realizations.
pub fn sample_dops_chunk(
    n: usize,
    chunk: usize,
    fiber: &FiberPmd,
    pulse: &GaussianPulse,
    seed: u64,
) -> Vec<f64> {
    let len = chunk_len(n, chunk);
    let mut rng = chunk_rng(seed, chunk as u64);
    (0..len)
        .map(|_| dop_of_realization(&sample_realization(fiber, &mut rng), pulse))
        .collect()
}

/// DOPs of an `n`-realization ensemble; identical to [`sample_ensemble`]'s.
pub fn sample_dops(n: usize, fiber: &FiberPmd, pulse: &GaussianPulse, seed: u64) -> Vec<f64> {
    let mut dops = Vec::with_capacity(n);
    for chunk in 0..chunk_count(n) {
        dops.extend(sample_dops_chunk(n, chunk, fiber, pulse, seed));
    }
    dops
}

/// Sampled fiber states with their DOPs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSample {
    realizations: Vec<PmdRealization>,
    dops: Vec<f64>,
    seed: u64,
}

impl EnsembleSample {
    pub fn realizations(&self) -> &[PmdRealization] {
        &self.realizations
    }

    pub fn dops(&self) -> &[f64] {
        &self.dops
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.dops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dops.is_empty()
    }
}

/// `n` independent realizations with their DOPs.
pub fn sample_ensemble(
    n: usize,
    fiber: &FiberPmd,
    pulse: &GaussianPulse,
    seed: u64,
) -> Result<EnsembleSample> {
    if n == 0 {
        return Err(domain("n", 0.0, "must be at least 1"));
    }
    let mut realizations = Vec::with_capacity(n);
    let mut dops = Vec::with_capacity(n);
    for chunk in 0..chunk_count(n) {
        let (r, d) = sample_chunk(n, chunk, fiber, pulse, seed);
        realizations.extend(r);
        dops.extend(d);
    }
    Ok(EnsembleSample {
        realizations,
        dops,
        seed,
    })
}

/// Fraction of `dops` at least `m`.
pub fn empirical_survival(dops: &[f64], m: f64) -> Result<f64> {
    check_unit("m", m)?;
    if dops.is_empty() {
        return Err(domain("n", 0.0, "must be at least 1"));
    }
    Ok(dops.iter().filter(|&&d| d >= m).count() as f64 / dops.len() as f64)
}

/// Normalized histogram of values in `[0, 1]`: `(bin centre, density)` pairs.
/// The value 1 falls in the last bin.
pub fn histogram_density(values: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let mut counts = alloc::vec![0usize; bins];
    for &v in values {
        let i = ((v * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let width = 1.0 / bins as f64;
    let scale = 1.0 / (values.len().max(1) as f64 * width);
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| ((i as f64 + 0.5) * width, c as f64 * scale))
        .collect()
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and `cdf`. Sorts `samples` in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            f64::max(f - i as f64 / n, (i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl McEstimate {
    fn from_moments(sum: f64, sum_sq: f64, n: usize) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            f64::max(sum_sq - nf * mean * mean, 0.0) / (nf - 1.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            std_error: sqrt(var / nf),
        }
    }
}

/// Mutual information between the DOP and a model outcome, estimated from
/// sampled DOPs.
#[derive(Debug, Clone, PartialEq)]
pub struct MiEstimate {
    pub model_label: String,
    /// Sample-averaged outcome marginals.
    pub p_outcome: Vec<f64>,
    /// Bits, with standard error.
    pub bits: McEstimate,
}

/// Averages `Σ_o P(o|M)·log₂(P(o|M)/P̂_o)` over the sampled `M`, with `P̂_o`
/// the sample mean of `P(o|M)`.
pub fn mutual_information_mc(dops: &[f64], model: &OutcomeModel) -> Result<MiEstimate> {
    if dops.is_empty() {
        return Err(domain("n", 0.0, "must be at least 1"));
    }
    let n = dops.len();
    let mut marginals = alloc::vec![0.0; model.len()];
    for &m in dops {
        for (acc, o) in marginals.iter_mut().zip(model.outcomes()) {
            *acc += o.likelihood(m);
        }
    }
    marginals.iter_mut().for_each(|p| *p /= n as f64);

    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for &m in dops {
        let term: f64 = model
            .outcomes()
            .iter()
            .zip(&marginals)
            .map(|(o, &p_hat)| {
                let p = o.likelihood(m);
                if p > 0.0 {
                    p * log2(p / p_hat)
                } else {
                    0.0
                }
            })
            .sum();
        sum += term;
        sum_sq += term * term;
    }
    Ok(MiEstimate {
        model_label: model.label().into(),
        p_outcome: marginals,
        bits: McEstimate::from_moments(sum, sum_sq, n),
    })
}

/// Sample mean with standard error.
pub fn sample_mean(values: &[f64]) -> McEstimate {
    let (s, s2) = values
        .iter()
        .fold((0.0, 0.0), |(s, s2), v| (s + v, s2 + v * v));
    McEstimate::from_moments(s, s2, values.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmd;

    fn setup(rms: f64) -> (FiberPmd, GaussianPulse) {
        (
            FiberPmd::new(rms).unwrap(),
            GaussianPulse::new(10.0).unwrap(),
        )
    }

    #[test]
    fn chunks_partition_the_ensemble() {
        assert_eq!(chunk_count(1), 1);
        assert_eq!(chunk_count(CHUNK_LEN), 1);
        assert_eq!(chunk_count(CHUNK_LEN + 1), 2);
        let n = 2 * CHUNK_LEN + 17;
        let total: usize = (0..chunk_count(n)).map(|c| chunk_len(n, c)).sum();
        assert_eq!(total, n);
        assert_eq!(chunk_len(n, 2), 17);
    }

    #[test]
    fn ensemble_is_deterministic_and_consistent() {
        let (f, p) = setup(30.0);
        let n = CHUNK_LEN + 1000;
        let a = sample_ensemble(n, &f, &p, 9).unwrap();
        let b = sample_ensemble(n, &f, &p, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dops(), sample_dops(n, &f, &p, 9).as_slice());
        assert_ne!(a.dops(), sample_ensemble(n, &f, &p, 10).unwrap().dops());
        for (r, &d) in a.realizations().iter().zip(a.dops()) {
            assert!((pmd::dop_of_realization(r, &p) - d).abs() <= 1e-12);
            assert!((-1.0..=1.0).contains(&r.eta()));
            assert!(r.phase() >= 0.0 && r.phase() < 2.0 * PI);
        }
        assert!(sample_ensemble(0, &f, &p, 1).is_err());
    }

    #[test]
    fn axis_is_isotropic() {
        let mut rng = chunk_rng(5, 0);
        let n = 200_000;
        let mut mean = [0.0; 3];
        let mut zz = 0.0;
        for _ in 0..n {
            let v = sample_unit_vector(&mut rng);
            assert!((v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0).abs() < 1e-12);
            for i in 0..3 {
                mean[i] += v[i] / n as f64;
            }
            zz += v[2] * v[2] / n as f64;
        }
        // Each component has variance 1/3; E[z²] = 1/3 with variance 4/45.
        for c in mean {
            assert!(c.abs() < 4.0 * (1.0 / 3.0 / n as f64).sqrt());
        }
        assert!((zz - 1.0 / 3.0).abs() < 4.0 * (4.0 / 45.0 / n as f64).sqrt());
    }

    #[test]
    fn empirical_survival_edges() {
        let (f, p) = setup(30.0);
        let dops = sample_dops(10_000, &f, &p, 1);
        assert_eq!(empirical_survival(&dops, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_survival(&dops, 1.0).unwrap(), 0.0);
        assert!(empirical_survival(&dops, 1.5).is_err());
        assert!(empirical_survival(&[], 0.5).is_err());
    }

    #[test]
    fn empirical_survival_matches_analytic() {
        let (f, p) = setup(30.0);
        let n = 1_000_000;
        let dops = sample_dops(n, &f, &p, 2);
        let emp = empirical_survival(&dops, 0.5).unwrap();
        let exact = pmd::survival(0.5, &f, &p).unwrap();
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((emp - exact).abs() < 3.0 * se, "{emp} vs {exact}");
    }

    #[test]
    fn mean_dop_matches_prior() {
        let (f, p) = setup(30.0);
        let dops = sample_dops(1_000_000, &f, &p, 3);
        let est = sample_mean(&dops);
        let prior = pmd::prior_table(&f, &p, 2001).unwrap();
        assert!(
            (est.value - prior.mean()).abs() < 3.0 * est.std_error,
            "{est:?} vs {}",
            prior.mean()
        );
    }

    #[test]
    fn histogram_is_normalized() {
        let h = histogram_density(&[0.0, 0.25, 0.5, 1.0], 4);
        assert_eq!(h.len(), 4);
        assert_eq!(h[0], (0.125, 1.0));
        assert_eq!(h[3], (0.875, 1.0));
        let mass: f64 = h.iter().map(|(_, d)| d * 0.25).sum();
        assert!((mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert!((d - 0.0005).abs() < 1e-12);
    }

    #[test]
    fn uninformative_model_has_no_information() {
        let (f, p) = setup(20.0);
        let dops = sample_dops(100_000, &f, &p, 4);
        let model = OutcomeModel::uninformative("flat", &[("a", 0.25), ("b", 0.75)]).unwrap();
        let mi = mutual_information_mc(&dops, &model).unwrap();
        assert!(mi.bits.value.abs() < 1e-12);
        assert!(mi.bits.value.abs() <= 2.0 * mi.bits.std_error + 1e-12);
    }

    #[test]
    fn uniform_limit_matches_closed_form_gain() {
        let (f, p) = setup(1e4);
        let dops = sample_dops(1_000_000, &f, &p, 5);
        let model = OutcomeModel::coherent();
        let mc = mutual_information_mc(&dops, &model).unwrap();
        let exact = crate::bayes::mean_info_gain(&pmd::DopPrior::uniform(2001).unwrap(), &model)
            .unwrap()
            .mean_gain;
        assert!(
            (mc.bits.value - exact).abs() < 2.0 * mc.bits.std_error,
            "{:?} vs {exact}",
            mc.bits
        );
    }

    #[test]
    fn small_ensembles_do_not_fail() {
        let (f, p) = setup(30.0);
        let dops = sample_dops(1, &f, &p, 6);
        let mi = mutual_information_mc(&dops, &OutcomeModel::coherent()).unwrap();
        assert_eq!(mi.bits.std_error, 0.0);
        assert!(mutual_information_mc(&[], &OutcomeModel::coherent()).is_err());
    }
}
