//! End-to-end flows over the static-charge study set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::potential::{channel_potential, fit_exponential, Channel, EnergyTable, ExpFit, FitOptions};
use crate::qfp::NoiseModel;
use crate::schwinger::{solve_config, study_set, ConfigSolution, LatticeSpec};
use crate::vqe::{vqe_minimize, EnergyRecord, VqeConfig, VqeRun};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EnergyMode {
    Exact,
    /// Every configuration gets its own noise seed derived from `noise.seed`.
    Vqe { noise: NoiseModel, config: VqeConfig },
}

#[derive(Clone, Debug)]
pub struct StudyRow {
    pub solution: ConfigSolution,
    pub record: EnergyRecord,
    pub run: Option<VqeRun>,
}

/// Seeds for `n` independent runs drawn from one master seed.
pub fn derived_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random()).collect()
}

/// Solves every configuration of the study set, in study-set order.
pub fn study_rows(base: &LatticeSpec, mode: &EnergyMode) -> Result<Vec<StudyRow>> {
    let configs = study_set();
    let seeds = match mode {
        EnergyMode::Exact => vec![0; configs.len()],
        EnergyMode::Vqe { noise, .. } => derived_seeds(noise.seed, configs.len()),
    };
    configs
        .par_iter()
        .zip(seeds)
        .map(|(c, seed)| {
            let solution = solve_config(base, c)?;
            match mode {
                EnergyMode::Exact => Ok(StudyRow { record: EnergyRecord::exact(solution.energy), solution, run: None }),
                EnergyMode::Vqe { noise, config } => {
                    let h = solution.hamiltonian.to_operator()?;
                    let run = vqe_minimize(&h, &NoiseModel { seed, ..*noise }, config)?;
                    Ok(StudyRow { record: run.result, solution, run: Some(run) })
                }
            }
        })
        .collect()
}

pub fn energy_table(rows: &[StudyRow], n_sites: usize) -> EnergyTable {
    let mut t = EnergyTable::new(n_sites);
    for r in rows {
        t.insert(r.solution.config.charges.clone(), r.record);
    }
    t
}

/// Separations entering each channel's fit on a ring of `n_sites`.
pub fn channel_separations(channel: Channel, n_sites: usize) -> Vec<usize> {
    (0..=n_sites / 2).filter(|&r| Channel::of_separation(r) == channel).collect()
}

/// Image-charge fit of one channel's two-body potentials.
pub fn fit_channel(table: &EnergyTable, channel: Channel, opts: &FitOptions) -> Result<ExpFit> {
    let pts = channel_separations(channel, table.n_sites)
        .into_iter()
        .map(|r| Ok((r as f64, channel_potential(table, channel, r)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_exponential(&pts, channel, opts)
}
