//! `prior`, `infogain` and `simulate`.

use std::io::Write;

use pmd_dop_core::measurement::OutcomeModel;
use pmd_dop_core::oracle::{self, histogram_density, mutual_information_mc};
use pmd_dop_core::{mean_info_gain, prior_table, DopPrior, FiberPmd, GaussianPulse};
use rayon::prelude::*;

use crate::config::{PmdValue, RunConfig};
use crate::error::CliError;
use crate::output::{sig6, Table};

/// Prior table for one PMD value; `inf` gives the uniform limit.
pub fn prior_for(pmd: PmdValue, sigma_ps: f64, grid_points: usize) -> Result<DopPrior, CliError> {
    let pulse = GaussianPulse::new(sigma_ps)?;
    Ok(match pmd {
        PmdValue::Finite(v) => prior_table(&FiberPmd::new(v)?, &pulse, grid_points)?,
        PmdValue::Infinite => DopPrior::uniform(grid_points)?,
    })
}

/// Sampled DOPs, chunks generated in parallel and concatenated in order.
/// Identical to the sequential `oracle::sample_dops` for the same seed.
pub fn parallel_dops(n: usize, fiber: &FiberPmd, pulse: &GaussianPulse, seed: u64) -> Vec<f64> {
    let chunks: Vec<Vec<f64>> = (0..oracle::chunk_count(n))
        .into_par_iter()
        .map(|c| oracle::sample_dops_chunk(n, c, fiber, pulse, seed))
        .collect();
    chunks.concat()
}

fn with_key(long: bool, pmd: PmdValue, mut fields: Vec<String>) -> Vec<String> {
    if long {
        fields.insert(0, pmd.to_string());
    }
    fields
}

fn header<'a>(long: bool, columns: &[&'a str]) -> Vec<&'a str> {
    let mut h = Vec::with_capacity(columns.len() + 1);
    if long {
        h.push("pmd_ps");
    }
    h.extend_from_slice(columns);
    h
}

pub fn cmd_prior(cfg: &RunConfig, sink: impl Write) -> Result<(), CliError> {
    let priors = cfg
        .pmd_ps
        .par_iter()
        .map(|&p| prior_for(p, cfg.sigma_ps, cfg.grid_points))
        .collect::<Result<Vec<_>, _>>()?;
    let long = cfg.long_format();
    let mut table = Table::new(sink, cfg.format, &header(long, &["m", "density"]))?;
    for (&pmd, prior) in cfg.pmd_ps.iter().zip(&priors) {
        for (&m, &d) in prior.grid().iter().zip(prior.density()) {
            table.row(&with_key(long, pmd, vec![sig6(m), sig6(d)]))?;
        }
    }
    table.finish()?.flush()?;
    Ok(())
}

/// One `infogain` row.
#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub pmd: PmdValue,
    pub coherent_bits: f64,
    pub incoherent_bits: f64,
}

impl GainRow {
    pub fn ratio(&self) -> f64 {
        self.coherent_bits / self.incoherent_bits
    }
}

pub fn gain_row(pmd: PmdValue, sigma_ps: f64, grid_points: usize) -> Result<GainRow, CliError> {
    let prior = prior_for(pmd, sigma_ps, grid_points)?;
    Ok(GainRow {
        pmd,
        coherent_bits: mean_info_gain(&prior, &OutcomeModel::coherent())?.mean_gain,
        incoherent_bits: mean_info_gain(&prior, &OutcomeModel::incoherent())?.mean_gain,
    })
}

pub fn cmd_infogain(cfg: &RunConfig, sink: impl Write) -> Result<(), CliError> {
    let rows = cfg
        .pmd_ps
        .par_iter()
        .map(|&p| gain_row(p, cfg.sigma_ps, cfg.grid_points))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(
        sink,
        cfg.format,
        &["pmd_ps", "sigma_ps", "i_coh_bits", "i_incoh_bits", "ratio"],
    )?;
    for r in &rows {
        table.row(&[
            r.pmd.to_string(),
            sig6(cfg.sigma_ps),
            sig6(r.coherent_bits),
            sig6(r.incoherent_bits),
            sig6(r.ratio()),
        ])?;
    }
    table.finish()?.flush()?;
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig, bins: usize, sink: impl Write) -> Result<(), CliError> {
    if bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let pulse = GaussianPulse::new(cfg.sigma_ps)?;
    let long = cfg.long_format();
    let mut table = Table::new(
        sink,
        cfg.format,
        &header(long, &["m_bin_center", "empirical_density"]),
    )?;
    let mut trailer = vec![format!(
        "# samples={} seed={} bins={} sigma_ps={}",
        cfg.samples,
        cfg.seed,
        bins,
        sig6(cfg.sigma_ps)
    )];
    for &pmd in &cfg.pmd_ps {
        let PmdValue::Finite(rms) = pmd else {
            return Err(CliError::Usage("`inf` PMD cannot be sampled".into()));
        };
        let dops = parallel_dops(cfg.samples, &FiberPmd::new(rms)?, &pulse, cfg.seed);
        for (centre, density) in histogram_density(&dops, bins) {
            table.row(&with_key(long, pmd, vec![sig6(centre), sig6(density)]))?;
        }
        let mut line = format!("# pmd_ps={pmd}");
        for model in [OutcomeModel::coherent(), OutcomeModel::incoherent()] {
            let mi = mutual_information_mc(&dops, &model)?;
            line.push_str(&format!(
                " mi_{}_bits={} se={}",
                model.label(),
                sig6(mi.bits.value),
                sig6(mi.bits.std_error)
            ));
        }
        trailer.push(line);
    }
    let mut sink = table.finish()?;
    for line in trailer {
        writeln!(sink, "{line}")?;
    }
    sink.flush()?;
    Ok(())
}
