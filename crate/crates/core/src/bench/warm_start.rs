//! Source iteration started from reduced scalar fluxes.
//!
//! A Galerkin L1 model is trained on the target mesh and on a coarser mesh. For
//! every test parameter the full-order source iteration starts from the reduced
//! scalar flux of each model (the coarse one projected onto the target space) and
//! from zero; the study reports mean iteration counts.

use super::experiment::test_set;
use super::registry::{lookup, Preset};
use crate::dg::{Discretization, FomSystem};
use crate::error::{Error, Result};
use crate::fom::FomMethod;
use crate::greedy::{train, GreedyConfig, ReducedModel, Trained};
use crate::linalg::SnapshotBasis;
use crate::problem::Parameter;
use crate::rom::RomKind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarmStartPlan {
    pub problem: String,
    pub fine: Discretization,
    pub coarse: Discretization,
    pub m_values: Vec<usize>,
    pub test_count: usize,
    pub seed: u64,
    /// Defaults to the benchmark's training grid.
    pub train_grid: Option<Vec<usize>>,
}

impl WarmStartPlan {
    /// Quick preset as the coarse mesh and twice as many cells per axis as the fine one.
    pub fn new(problem: &str) -> Result<Self> {
        let b = lookup(problem)?;
        let coarse = b.discretization(Preset::Quick);
        let mut fine = coarse;
        fine.cells = [2 * coarse.cells[0], 2 * coarse.cells[1]];
        Ok(Self {
            problem: problem.to_string(),
            fine,
            coarse,
            m_values: vec![5, 10, 15],
            test_count: 20,
            seed: 0,
            train_grid: None,
        })
    }
}

/// Mean and largest iteration count over the test set for one starting guess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub mean: f64,
    pub max: usize,
}

impl IterationStats {
    fn of(counts: &[usize]) -> Self {
        Self {
            mean: counts.iter().sum::<usize>() as f64 / counts.len() as f64,
            max: counts.iter().copied().max().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarmStartReport {
    pub fine_len: usize,
    pub coarse_len: usize,
    pub fine_basis: usize,
    pub coarse_basis: usize,
    pub zero: IterationStats,
    /// `(m, stats)` for guesses from the model trained on the target mesh.
    pub fine: Vec<(usize, IterationStats)>,
    pub coarse: Vec<(usize, IterationStats)>,
}

fn train_l1(
    sys: &FomSystem,
    fom: &FomMethod,
    training: Vec<Parameter>,
    max_m: usize,
) -> Result<Trained> {
    let cfg = GreedyConfig::new(RomKind::GL1, training, f64::MIN_POSITIVE, max_m);
    let t = train(sys, fom, &cfg)?;
    if t.basis.dim() < max_m {
        return Err(Error::Config(format!(
            "training stopped at m = {} before reaching m = {max_m} ({:?})",
            t.basis.dim(),
            t.log.termination
        )));
    }
    Ok(t)
}

fn reduced_flux(
    sys: &FomSystem,
    model: &ReducedModel,
    basis: &SnapshotBasis,
    mu: &[f64],
) -> Result<Vec<f64>> {
    let c = model.solve(mu)?;
    Ok(sys.scalar_flux(&basis.lift(c.as_slice())?))
}

fn iterations(
    fine: &FomSystem,
    fom: &FomMethod,
    test: &[Parameter],
    guess: impl Fn(&[f64]) -> Result<Option<Vec<f64>>> + Sync,
) -> Result<Vec<usize>> {
    test.par_iter()
        .map(|mu| Ok(fom.with_initial(guess(mu)?).solve(fine, mu)?.iterations))
        .collect()
}

pub fn run_warm_start(plan: &WarmStartPlan) -> Result<WarmStartReport> {
    let b = lookup(&plan.problem)?;
    if !matches!(b.solver, FomMethod::SourceIteration(_)) {
        return Err(Error::Config(format!(
            "{} is not solved by source iteration",
            b.name
        )));
    }
    let max_m = plan
        .m_values
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::Config("no basis sizes given".into()))?;
    if plan.m_values.contains(&0) {
        return Err(Error::Config("basis sizes must be positive".into()));
    }
    let grid = plan
        .train_grid
        .clone()
        .unwrap_or_else(|| b.train_grid.clone());
    let training = super::registry::uniform_grid(&b.bounds, &grid);
    let fine = FomSystem::assemble(&b.problem, &plan.fine)?;
    let coarse = FomSystem::assemble(&b.problem, &plan.coarse)?;
    log::info!(
        "warm start: fine N = {}, coarse N = {}",
        fine.len(),
        coarse.len()
    );
    let tf = train_l1(&fine, &b.solver, training.clone(), max_m)?;
    let tc = train_l1(&coarse, &b.solver, training, max_m)?;
    let test = test_set(&b, plan.test_count, plan.seed)?;

    let zero = IterationStats::of(&iterations(&fine, &b.solver, &test, |_| Ok(None))?);
    let mut fine_rows = Vec::new();
    let mut coarse_rows = Vec::new();
    for &m in &plan.m_values {
        let mf = tf.model.truncated(m);
        let counts = iterations(&fine, &b.solver, &test, |mu| {
            Ok(Some(reduced_flux(&fine, &mf, &tf.basis, mu)?))
        })?;
        fine_rows.push((m, IterationStats::of(&counts)));
        let mc = tc.model.truncated(m);
        let counts = iterations(&fine, &b.solver, &test, |mu| {
            let rho = reduced_flux(&coarse, &mc, &tc.basis, mu)?;
            Ok(Some(fine.space.project_from(&coarse.space, &rho)?))
        })?;
        coarse_rows.push((m, IterationStats::of(&counts)));
    }
    Ok(WarmStartReport {
        fine_len: fine.len(),
        coarse_len: coarse.len(),
        fine_basis: tf.basis.dim(),
        coarse_basis: tc.basis.dim(),
        zero,
        fine: fine_rows,
        coarse: coarse_rows,
    })
}
