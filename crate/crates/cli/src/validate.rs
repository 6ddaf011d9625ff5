//! `validate`: normalizations, Monte Carlo oracle agreement and the published
//! gain ratios, evaluated at σ = 10 ps and PMD 20, 30, 40 ps.

use std::io::Write;

use pmd_dop_core::measurement::{p_same, p_singlet, OutcomeModel};
use pmd_dop_core::oracle::{
    empirical_survival, histogram_density, ks_statistic, mutual_information_mc,
};
use pmd_dop_core::{
    gain_ratio_for, mean_info_gain, prior_density, prior_table, survival, DopPrior, FiberPmd,
    GaussianPulse,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::commands::parallel_dops;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::sig6;

const SIGMA_PS: f64 = 10.0;
const PUBLISHED_RATIOS: [(f64, f64); 3] = [(20.0, 7.08), (30.0, 5.69), (40.0, 5.23)];
const UNIFORM_RATIO: f64 = 4.82;
const DOMINANCE_PMDS: [f64; 6] = [10.0, 20.0, 30.0, 40.0, 100.0, 1e4];
const HISTOGRAM_BINS: usize = 100;

/// Pass condition of a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Requirement {
    /// `|observed − expected| ≤ tol`
    Near {
        expected: f64,
        tol: f64,
    },
    /// `|observed/expected − 1| ≤ tol`
    Relative {
        expected: f64,
        tol: f64,
    },
    Below(f64),
    Above(f64),
}

impl Requirement {
    fn holds(&self, x: f64) -> bool {
        match *self {
            Requirement::Near { expected, tol } => (x - expected).abs() <= tol,
            Requirement::Relative { expected, tol } => (x / expected - 1.0).abs() <= tol,
            Requirement::Below(b) => x < b,
            Requirement::Above(b) => x > b,
        }
    }

    /// The same requirement with its target moved by one unit, so that any
    /// observation that passed the original fails.
    fn shifted(self) -> Self {
        match self {
            Requirement::Near { expected, tol } => Requirement::Near {
                expected: expected + 1.0 + 2.0 * tol,
                tol,
            },
            Requirement::Relative { expected, tol } => Requirement::Relative {
                expected: expected * (2.0 + 2.0 * tol),
                tol,
            },
            Requirement::Below(b) => Requirement::Below(b - 1e6),
            Requirement::Above(b) => Requirement::Above(b + 1e6),
        }
    }

    fn describe(&self) -> String {
        match *self {
            Requirement::Near { expected, tol } => format!("{} ± {}", sig6(expected), sig6(tol)),
            Requirement::Relative { expected, tol } => {
                format!("{} ± {}%", sig6(expected), sig6(100.0 * tol))
            }
            Requirement::Below(b) => format!("< {}", sig6(b)),
            Requirement::Above(b) => format!("> {}", sig6(b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub requirement: Requirement,
}

impl Check {
    fn new(name: impl Into<String>, observed: f64, requirement: Requirement) -> Self {
        Self {
            name: name.into(),
            observed,
            requirement,
        }
    }

    pub fn passed(&self) -> bool {
        self.requirement.holds(self.observed)
    }
}

fn pmd_tag(v: f64) -> String {
    sig6(v)
}

fn pulse() -> GaussianPulse {
    GaussianPulse::new(SIGMA_PS).expect("constant pulse")
}

fn ratio_checks(grid_points: usize) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let results = PUBLISHED_RATIOS
        .par_iter()
        .map(|&(rms, published)| -> Result<_, CliError> {
            let prior = prior_table(&FiberPmd::new(rms)?, &pulse(), grid_points)?;
            Ok((rms, published, prior.mass(), gain_ratio_for(&prior)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (rms, published, mass, ratio) in results {
        let tag = pmd_tag(rms);
        checks.push(Check::new(
            format!("prior_mass_pmd{tag}"),
            mass,
            Requirement::Near {
                expected: 1.0,
                tol: 1e-4,
            },
        ));
        checks.push(Check::new(
            format!("gain_ratio_pmd{tag}"),
            ratio,
            Requirement::Relative {
                expected: published,
                tol: 0.05,
            },
        ));
    }
    checks.push(Check::new(
        "gain_ratio_uniform",
        gain_ratio_for(&DopPrior::uniform(grid_points)?)?,
        Requirement::Relative {
            expected: UNIFORM_RATIO,
            tol: 0.05,
        },
    ));
    Ok(checks)
}

fn likelihood_checks() -> Result<Vec<Check>, CliError> {
    let mut checks = vec![
        Check::new(
            "p_singlet_m0",
            p_singlet(0.0)?,
            Requirement::Near {
                expected: 0.25,
                tol: 0.0,
            },
        ),
        Check::new(
            "p_singlet_m1",
            p_singlet(1.0)?,
            Requirement::Near {
                expected: 0.0,
                tol: 0.0,
            },
        ),
    ];
    for m in [0.2, 0.5, 0.8] {
        // p² + (1 − p)² averaged over a uniform basis direction; quadratic in cos θ,
        // so three-point Simpson is exact.
        let g = |c: f64| {
            let p = (1.0 + m * c) / 2.0;
            p * p + (1.0 - p) * (1.0 - p)
        };
        let average = (g(-1.0) + 4.0 * g(0.0) + g(1.0)) / 6.0;
        checks.push(Check::new(
            format!("p_same_basis_average_m{m}"),
            p_same(m)?,
            Requirement::Near {
                expected: average,
                tol: 1e-10,
            },
        ));
    }
    Ok(checks)
}

fn sampler_checks(samples: usize, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for rms in [20.0, 30.0] {
        let fiber = FiberPmd::new(rms)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs: Vec<f64> = (0..samples).map(|_| fiber.sample_dgd(&mut rng)).collect();
        let rms_hat = (xs.iter().map(|x| x * x).sum::<f64>() / samples as f64).sqrt();
        let ks = ks_statistic(&mut xs, |x| fiber.dgd_cdf(x));
        let tag = pmd_tag(rms);
        checks.push(Check::new(
            format!("maxwell_rms_pmd{tag}"),
            rms_hat,
            Requirement::Relative {
                expected: rms,
                tol: 0.005,
            },
        ));
        checks.push(Check::new(
            format!("maxwell_ks_pmd{tag}"),
            ks,
            Requirement::Below(0.002),
        ));
    }
    Ok(checks)
}

fn ensemble_checks(samples: usize, seed: u64, grid_points: usize) -> Result<Vec<Check>, CliError> {
    let p = pulse();
    let mut checks = Vec::new();
    for (i, &(rms, _)) in PUBLISHED_RATIOS.iter().enumerate() {
        let fiber = FiberPmd::new(rms)?;
        let dops = parallel_dops(samples, &fiber, &p, seed.wrapping_add(i as u64));
        let tag = pmd_tag(rms);

        let width = 1.0 / HISTOGRAM_BINS as f64;
        let surv = (0..=HISTOGRAM_BINS)
            .map(|b| survival(b as f64 * width, &fiber, &p))
            .collect::<Result<Vec<_>, _>>()?;
        let l1: f64 = histogram_density(&dops, HISTOGRAM_BINS)
            .iter()
            .enumerate()
            .map(|(b, &(_, emp))| (emp - (surv[b] - surv[b + 1]) / width).abs() * width)
            .sum();
        checks.push(Check::new(
            format!("histogram_l1_pmd{tag}"),
            l1,
            Requirement::Below(0.02),
        ));

        for d in 1..10 {
            let m = d as f64 / 10.0;
            let exact = survival(m, &fiber, &p)?;
            let se = (exact * (1.0 - exact) / samples as f64).sqrt();
            let z = (empirical_survival(&dops, m)? - exact).abs() / se;
            checks.push(Check::new(
                format!("survival_z_pmd{tag}_m{m}"),
                z,
                Requirement::Below(3.0),
            ));
        }

        if rms == 20.0 {
            let prior = prior_table(&fiber, &p, grid_points)?;
            for model in [OutcomeModel::coherent(), OutcomeModel::incoherent()] {
                let mc = mutual_information_mc(&dops, &model)?.bits;
                let exact = mean_info_gain(&prior, &model)?.mean_gain;
                checks.push(Check::new(
                    format!("mutual_information_z_{}_pmd{tag}", model.label()),
                    (mc.value - exact).abs() / mc.std_error,
                    Requirement::Below(2.0),
                ));
            }
        }
    }
    Ok(checks)
}

fn dominance_checks(grid_points: usize) -> Result<Vec<Check>, CliError> {
    DOMINANCE_PMDS
        .par_iter()
        .map(|&rms| {
            let prior = prior_table(&FiberPmd::new(rms)?, &pulse(), grid_points)?;
            let coh = mean_info_gain(&prior, &OutcomeModel::coherent())?.mean_gain;
            let inc = mean_info_gain(&prior, &OutcomeModel::incoherent())?.mean_gain;
            Ok(Check::new(
                format!("coherent_dominance_pmd{}", pmd_tag(rms)),
                coh - inc,
                Requirement::Above(0.0),
            ))
        })
        .collect()
}

fn slope_checks() -> Result<Vec<Check>, CliError> {
    let (fiber, p) = (FiberPmd::new(30.0)?, pulse());
    let h = 1e-4;
    [0.3, 0.6, 0.9]
        .into_iter()
        .map(|m| {
            let slope = (survival(m + h, &fiber, &p)? - survival(m - h, &fiber, &p)?) / (2.0 * h);
            Ok(Check::new(
                format!("density_vs_survival_slope_m{m}"),
                (prior_density(m, &fiber, &p)? + slope).abs(),
                Requirement::Below(1e-4),
            ))
        })
        .collect()
}

/// Evaluates every check. `inject_fault` names a check whose requirement is
/// shifted so that it fails.
pub fn run_checks(cfg: &RunConfig, inject_fault: Option<&str>) -> Result<Vec<Check>, CliError> {
    let mut checks = ratio_checks(cfg.grid_points)?;
    checks.extend(likelihood_checks()?);
    checks.extend(sampler_checks(cfg.samples, cfg.seed)?);
    checks.extend(ensemble_checks(cfg.samples, cfg.seed, cfg.grid_points)?);
    checks.extend(dominance_checks(cfg.grid_points)?);
    checks.extend(slope_checks()?);
    if let Some(name) = inject_fault {
        let check = checks
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| CliError::Usage(format!("--inject-fault: no check named {name:?}")))?;
        check.requirement = check.requirement.shifted();
    }
    Ok(checks)
}

/// Prints the pass/fail table; errors with the failing check names.
pub fn cmd_validate(
    cfg: &RunConfig,
    inject_fault: Option<&str>,
    mut sink: impl Write,
) -> Result<(), CliError> {
    let checks = run_checks(cfg, inject_fault)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        writeln!(
            sink,
            "{:<4}  {:<width$}  {:>12}  {}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            sig6(c.observed),
            c.requirement.describe(),
        )?;
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.clone())
        .collect();
    writeln!(sink, "{} checks, {} failed", checks.len(), failed.len())?;
    sink.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed))
    }
}
