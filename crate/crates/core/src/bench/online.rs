//! Online cost against full-order cost over a sequence of mesh levels.
//!
//! Every reduced model is trained to a fixed basis size on every level. The
//! full-order time is the median of the solves made during training; the reduced
//! time is the median over repeats of the mean online solve time over the test set.

use super::experiment::test_set;
use super::registry::{lookup, Benchmark, Preset};
use crate::dg::{AngularSpec, Discretization, FomSystem};
use crate::error::{Error, Result};
use crate::greedy::{train, GreedyConfig};
use crate::problem::Parameter;
use crate::rom::RomKind;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnlinePlan {
    pub problem: String,
    pub levels: Vec<Discretization>,
    pub kinds: Vec<RomKind>,
    pub m: usize,
    pub repeat: usize,
    pub test_count: usize,
    pub seed: u64,
    /// Defaults to the benchmark's training grid.
    pub train_grid: Option<Vec<usize>>,
}

/// Angular rule used by the online study on planar problems.
pub const ONLINE_ANGULAR: AngularSpec = AngularSpec::Sphere(20, 6);

impl OnlinePlan {
    /// Levels with 1, 2 and 3 times the quick preset's cells per axis.
    pub fn new(problem: &str) -> Result<Self> {
        let b = lookup(problem)?;
        let levels = (1..=3).map(|k| level(&b, k)).collect();
        Ok(Self {
            problem: problem.to_string(),
            levels,
            kinds: RomKind::ALL.to_vec(),
            m: 15,
            repeat: 10,
            test_count: 20,
            seed: 0,
            train_grid: None,
        })
    }

    /// Levels whose full-order sizes are nearest the requested ones.
    pub fn with_sizes(problem: &str, sizes: &[usize]) -> Result<Self> {
        let b = lookup(problem)?;
        let mut plan = Self::new(problem)?;
        plan.levels = sizes
            .iter()
            .map(|&n| level(&b, multiple_for(&b, n)))
            .collect();
        Ok(plan)
    }
}

fn level(b: &Benchmark, k: usize) -> Discretization {
    let mut d = b.discretization(Preset::Quick);
    d.cells[0] *= k;
    if b.problem.dim == 2 {
        d.cells[1] *= k;
        d.angular = ONLINE_ANGULAR;
    }
    d
}

/// Refinement factor of the quick mesh giving a full-order size closest to `n`.
fn multiple_for(b: &Benchmark, n: usize) -> usize {
    let size = |k: usize| level(b, k).full_order_len(b.problem.dim) as f64;
    let mut best = 1;
    for k in 1..=64 {
        if (size(k).ln() - (n as f64).ln()).abs() < (size(best).ln() - (n as f64).ln()).abs() {
            best = k;
        }
    }
    best
}

/// Parses sizes like `212k`, `1.9M` or `5000`.
pub fn parse_size(s: &str) -> Result<usize> {
    let s = s.trim();
    let (num, scale) = match s.chars().last() {
        Some('k' | 'K') => (&s[..s.len() - 1], 1e3),
        Some('m' | 'M') => (&s[..s.len() - 1], 1e6),
        _ => (s, 1.0),
    };
    match num.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok((v * scale).round() as usize),
        _ => Err(Error::Config(format!("bad size '{s}'"))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnlineTiming {
    pub kind: RomKind,
    pub m: usize,
    /// Median seconds per online solve.
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnlineLevel {
    pub discretization: Discretization,
    pub full_order_len: usize,
    /// Median seconds per full-order solve.
    pub fom_seconds: f64,
    pub fom_solves: usize,
    pub roms: Vec<OnlineTiming>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn run_online(plan: &OnlinePlan) -> Result<Vec<OnlineLevel>> {
    if plan.repeat == 0 || plan.m == 0 || plan.kinds.is_empty() {
        return Err(Error::Config(
            "online study needs positive repeat and m and at least one model".into(),
        ));
    }
    let b = lookup(&plan.problem)?;
    let grid = plan
        .train_grid
        .clone()
        .unwrap_or_else(|| b.train_grid.clone());
    let training: Vec<Parameter> = super::registry::uniform_grid(&b.bounds, &grid);
    let test = test_set(&b, plan.test_count, plan.seed)?;
    let mut out = Vec::new();
    for disc in &plan.levels {
        let sys = FomSystem::assemble(&b.problem, disc)?;
        log::info!("online level N = {}", sys.len());
        let mut fom_times = Vec::new();
        let mut roms = Vec::new();
        for &kind in &plan.kinds {
            let cfg = GreedyConfig::new(kind, training.clone(), f64::MIN_POSITIVE, plan.m);
            let trained = train(&sys, &b.solver, &cfg)?;
            fom_times.push(trained.log.t_initial_fom);
            fom_times.extend(
                trained
                    .log
                    .records
                    .iter()
                    .filter(|r| r.t_fom > 0.0)
                    .map(|r| r.t_fom),
            );
            let model = trained.model;
            // warm-up pass, then timed repeats
            for mu in &test {
                model.solve(mu)?;
            }
            let mut samples = Vec::with_capacity(plan.repeat);
            for _ in 0..plan.repeat {
                let t = Instant::now();
                for mu in &test {
                    std::hint::black_box(model.solve(mu)?);
                }
                samples.push(t.elapsed().as_secs_f64() / test.len() as f64);
            }
            roms.push(OnlineTiming {
                kind,
                m: model.dim(),
                seconds: median(samples),
            });
        }
        out.push(OnlineLevel {
            discretization: *disc,
            full_order_len: sys.len(),
            fom_seconds: median(fom_times.clone()),
            fom_solves: fom_times.len(),
            roms,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_size("212k").unwrap(), 212_000);
        assert_eq!(parse_size("1.9M").unwrap(), 1_900_000);
        assert_eq!(parse_size("5000").unwrap(), 5000);
        assert!(parse_size("k").is_err());
        assert!(parse_size("-3k").is_err());
    }

    #[test]
    fn lattice_levels_follow_requested_sizes() {
        let plan = OnlinePlan::with_sizes("lattice-2d", &[212_000, 847_000, 1_900_000]).unwrap();
        let cells: Vec<usize> = plan.levels.iter().map(|d| d.cells[0]).collect();
        assert_eq!(cells, vec![21, 42, 63]);
        assert_eq!(plan.levels[2].full_order_len(2), 1_905_120);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
