//! Train a reduced model on a registered benchmark and measure its training and
//! test errors for every basis size.

use super::registry::{lookup, Benchmark, Preset};
use crate::dg::FomSystem;
use crate::error::{Error, Result};
use crate::fom::FomMethod;
use crate::greedy::{train, GreedyConfig, InitialParameter, ReducedModel, Trained};
use crate::linalg::SnapshotBasis;
use crate::problem::Parameter;
use crate::rom::{LspgMode, RomKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub problem: String,
    pub preset: Preset,
    pub kind: RomKind,
    pub mode: LspgMode,
    /// Defaults to the benchmark's tolerance.
    pub tol_sratio: Option<f64>,
    pub max_m: usize,
    pub k: usize,
    pub initial: InitialParameter,
    pub seed: u64,
    /// Defaults to the benchmark's test-set size.
    pub test_count: Option<usize>,
    /// Defaults to the benchmark's training grid.
    pub train_grid: Option<Vec<usize>>,
}

impl ExperimentPlan {
    pub fn new(problem: &str, kind: RomKind) -> Self {
        Self {
            problem: problem.to_string(),
            preset: Preset::Quick,
            kind,
            mode: LspgMode::Standard,
            tol_sratio: None,
            max_m: 100,
            k: 1,
            initial: InitialParameter::Center,
            seed: 0,
            test_count: None,
            train_grid: None,
        }
    }

    pub fn benchmark(&self) -> Result<Benchmark> {
        lookup(&self.problem)
    }

    pub fn training_set(&self, b: &Benchmark) -> Result<Vec<Parameter>> {
        let grid = self
            .train_grid
            .clone()
            .unwrap_or_else(|| b.train_grid.clone());
        if grid.len() != b.bounds.len() || grid.contains(&0) {
            return Err(Error::Config(format!(
                "training grid {grid:?} does not fit a {}-parameter problem",
                b.bounds.len()
            )));
        }
        Ok(super::registry::uniform_grid(&b.bounds, &grid))
    }

    pub fn greedy_config(&self, b: &Benchmark) -> Result<GreedyConfig> {
        Ok(GreedyConfig {
            kind: self.kind,
            mode: self.mode,
            training: self.training_set(b)?,
            tol_sratio: self.tol_sratio.unwrap_or(b.tol_sratio),
            max_m: self.max_m,
            initial: self.initial.clone(),
            k: self.k,
        })
    }
}

/// Uniform random test parameters from a seeded ChaCha8 stream.
pub fn test_set(b: &Benchmark, count: usize, seed: u64) -> Result<Vec<Parameter>> {
    if count == 0 {
        return Err(Error::Config(
            "test set must contain at least one point".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            b.bounds
                .iter()
                .map(|&[lo, hi]| rng.random_range(lo..=hi))
                .collect()
        })
        .collect())
}

/// Full-order solutions at a parameter set, each solved once.
pub struct ReferenceSet {
    pub params: Vec<Parameter>,
    /// `None` where the full-order solve failed.
    pub solutions: Vec<Option<Vec<f64>>>,
    pub solves: usize,
}

impl ReferenceSet {
    pub fn solve(sys: &FomSystem, fom: &FomMethod, params: Vec<Parameter>) -> Self {
        let solutions: Vec<Option<Vec<f64>>> = params
            .par_iter()
            .map(|mu| match fom.solve(sys, mu) {
                Ok(s) => Some(s.f),
                Err(e) => {
                    log::warn!("full-order solve failed at {mu:?}: {e}");
                    None
                }
            })
            .collect();
        let solves = params.len();
        Self {
            params,
            solutions,
            solves,
        }
    }
}

/// Errors at every point of a parameter set for basis sizes `1..=M`.
#[derive(Debug, Clone)]
pub struct PointErrors {
    /// `l2[m - 1][i]`; NaN where the reference or the reduced solve is missing.
    pub l2: Vec<Vec<f64>>,
    pub residual: Vec<Vec<f64>>,
    pub condition: Vec<Vec<f64>>,
}

impl PointErrors {
    pub fn max_l2(&self, m: usize) -> f64 {
        nan_max(&self.l2[m - 1])
    }

    pub fn max_residual(&self, m: usize) -> f64 {
        nan_max(&self.residual[m - 1])
    }

    pub fn max_condition(&self, m: usize) -> f64 {
        nan_max(&self.condition[m - 1])
    }
}

/// Largest entry; NaN entries count as failures and make the result NaN.
fn nan_max(v: &[f64]) -> f64 {
    v.iter().fold(f64::NEG_INFINITY, |a, &x| {
        if x.is_nan() || a.is_nan() {
            f64::NAN
        } else {
            a.max(x)
        }
    })
}

/// Reduced errors for every basis size against cached full-order solutions.
pub fn evaluate_errors(
    sys: &FomSystem,
    model: &ReducedModel,
    basis: &SnapshotBasis,
    refs: &ReferenceSet,
) -> PointErrors {
    let big_m = model.dim();
    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (1..=big_m)
        .map(|m| {
            let sub = model.truncated(m);
            let per: Vec<(f64, f64, f64)> = refs
                .params
                .par_iter()
                .zip(&refs.solutions)
                .map(|(mu, truth)| match sub.evaluate(mu, basis) {
                    Ok(e) => {
                        let l2 = match truth {
                            Some(f) => match basis.lift(e.c.as_slice()) {
                                Ok(g) => sys.norm(
                                    &f.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>(),
                                ),
                                Err(_) => f64::NAN,
                            },
                            None => f64::NAN,
                        };
                        (l2, e.residual, sub.condition(mu))
                    }
                    Err(_) => (f64::NAN, f64::NAN, f64::INFINITY),
                })
                .collect();
            (
                per.iter().map(|p| p.0).collect(),
                per.iter().map(|p| p.1).collect(),
                per.iter().map(|p| p.2).collect(),
            )
        })
        .collect();
    let mut out = PointErrors {
        l2: Vec::with_capacity(big_m),
        residual: Vec::with_capacity(big_m),
        condition: Vec::with_capacity(big_m),
    };
    for (l, r, c) in rows {
        out.l2.push(l);
        out.residual.push(r);
        out.condition.push(c);
    }
    out
}

/// Residual indicator for every basis size; no full-order solves needed.
pub fn residual_history(
    model: &ReducedModel,
    basis: &SnapshotBasis,
    params: &[Parameter],
) -> Vec<Vec<f64>> {
    (1..=model.dim())
        .map(|m| {
            let sub = model.truncated(m);
            params
                .par_iter()
                .map(|mu| sub.evaluate(mu, basis).map_or(f64::NAN, |e| e.residual))
                .collect()
        })
        .collect()
}

/// One `errors.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub m: usize,
    pub e_l2_train: f64,
    pub e_res_train: f64,
    pub e_l2_test: f64,
    pub e_res_test: f64,
    pub spectral_ratio: f64,
    pub max_cond: f64,
    pub t_fom_s: f64,
    pub t_sweep_s: f64,
    pub t_update_s: f64,
}

pub struct Experiment {
    pub plan: ExperimentPlan,
    pub benchmark: Benchmark,
    pub system: FomSystem,
    pub training: Vec<Parameter>,
    pub trained: Trained,
    pub test: ReferenceSet,
    pub test_errors: PointErrors,
    pub rows: Vec<ErrorRow>,
}

impl Experiment {
    pub fn run(plan: &ExperimentPlan) -> Result<Self> {
        let benchmark = plan.benchmark()?;
        let system =
            FomSystem::assemble(&benchmark.problem, &benchmark.discretization(plan.preset))?;
        let cfg = plan.greedy_config(&benchmark)?;
        log::info!(
            "{}: N = {}, {} training points, {}",
            benchmark.name,
            system.len(),
            cfg.training.len(),
            plan.kind
        );
        let trained = train(&system, &benchmark.solver, &cfg)?;
        let count = plan.test_count.unwrap_or(benchmark.test_count);
        let test = ReferenceSet::solve(
            &system,
            &benchmark.solver,
            test_set(&benchmark, count, plan.seed)?,
        );
        let test_errors = evaluate_errors(&system, &trained.model, &trained.basis, &test);
        let rows = trained
            .log
            .records
            .iter()
            .map(|r| ErrorRow {
                m: r.m,
                e_l2_train: r.e_l2_train,
                e_res_train: r.e_res_train,
                e_l2_test: test_errors.max_l2(r.m),
                e_res_test: test_errors.max_residual(r.m),
                spectral_ratio: r.spectral_ratio,
                max_cond: test_errors.max_condition(r.m),
                t_fom_s: r.t_fom,
                t_sweep_s: r.t_sweep,
                t_update_s: r.t_update,
            })
            .collect();
        let exp = Self {
            plan: plan.clone(),
            benchmark,
            system,
            training: cfg.training,
            trained,
            test,
            test_errors,
            rows,
        };
        exp.check_invariants()?;
        Ok(exp)
    }

    /// The least-squares residual minimizer cannot grow its residual on nested
    /// spaces; this is fatal in standard mode, whose residuals are accurate to
    /// rounding. A rising spectral ratio is only reported.
    pub fn check_invariants(&self) -> Result<()> {
        let ratios: Vec<f64> = self.rows.iter().map(|r| r.spectral_ratio).collect();
        if let Some(w) = ratios.windows(2).position(|w| w[1] > w[0]) {
            log::warn!("spectral ratio rose from m = {} to m = {}", w + 1, w + 2);
        }
        if self.plan.kind != RomKind::PgRes || self.plan.mode != LspgMode::Standard {
            return Ok(());
        }
        for (i, mu) in self.test.params.iter().enumerate() {
            let scale = self.system.weighting.residual_norm(&self.system.rhs(mu));
            for m in 1..self.test_errors.residual.len() {
                let (a, b) = (
                    self.test_errors.residual[m - 1][i],
                    self.test_errors.residual[m][i],
                );
                if b > a + 1e-12 * scale {
                    return Err(Error::Invariant(format!(
                        "residual at test point {i} grew from {a:e} to {b:e} between m = {m} and m = {}",
                        m + 1
                    )));
                }
            }
        }
        Ok(())
    }
}
