//! Greedy offline stage: pick the training parameter with the largest error
//! indicator, solve the full-order model there, and grow the basis until the
//! spectral ratio of the snapshot matrix is small enough.

pub mod model;

pub use model::{Evaluation, ReducedModel};

use crate::dg::FomSystem;
use crate::error::{Error, Result};
use crate::fom::FomMethod;
use crate::linalg::SnapshotBasis;
use crate::problem::Parameter;
use crate::rom::{GalerkinRom, LspgBuilder, LspgMode, Projection, RomKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// How the first parameter is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialParameter {
    /// Training point nearest the center of the training set's bounding box.
    Center,
    /// A given point, which must belong to the training set.
    Explicit(Parameter),
    Index(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub kind: RomKind,
    pub mode: LspgMode,
    pub training: Vec<Parameter>,
    pub tol_sratio: f64,
    pub max_m: usize,
    pub initial: InitialParameter,
    /// Candidates checked by full-order solves per step; 1 is the plain greedy.
    pub k: usize,
}

impl GreedyConfig {
    pub fn new(kind: RomKind, training: Vec<Parameter>, tol_sratio: f64, max_m: usize) -> Self {
        Self {
            kind,
            mode: LspgMode::Standard,
            training,
            tol_sratio,
            max_m,
            initial: InitialParameter::Center,
            k: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // 1 is accepted: the single-snapshot ratio meets it and training stops at m = 1
        if !(self.tol_sratio > 0.0 && self.tol_sratio <= 1.0) {
            return Err(Error::Config(format!(
                "spectral ratio tolerance must lie in (0, 1], got {}",
                self.tol_sratio
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.max_m == 0 {
            return Err(Error::Config(
                "maximum basis size must be at least 1".into(),
            ));
        }
        let Some(first) = self.training.first() else {
            return Err(Error::Config("training set is empty".into()));
        };
        let d = first.len();
        for (i, mu) in self.training.iter().enumerate() {
            if mu.len() != d || mu.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!(
                    "training point {i} is malformed: {mu:?}"
                )));
            }
        }
        let mut sorted: Vec<&Parameter> = self.training.iter().collect();
        sorted.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!(
                "training set contains {:?} twice",
                w[0]
            )));
        }
        Ok(())
    }

    /// Training index of the first parameter.
    pub fn initial_index(&self) -> Result<usize> {
        match &self.initial {
            InitialParameter::Index(i) if *i < self.training.len() => Ok(*i),
            InitialParameter::Index(i) => Err(Error::Config(format!(
                "initial index {i} outside the training set of size {}",
                self.training.len()
            ))),
            InitialParameter::Explicit(mu) => self
                .training
                .iter()
                .position(|t| {
                    t.len() == mu.len()
                        && t.iter()
                            .zip(mu)
                            .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs()))
                })
                .ok_or_else(|| {
                    Error::Config(format!("initial parameter {mu:?} is not a training point"))
                }),
            InitialParameter::Center => Ok(nearest_center(&self.training)),
        }
    }
}

/// Index of the point nearest the center of the bounding box, distances scaled
/// by the box widths; ties go to the lowest index.
pub fn nearest_center(points: &[Parameter]) -> usize {
    let d = points[0].len();
    let lo: Vec<f64> = (0..d)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|k| {
            points
                .iter()
                .map(|p| p[k])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let dist = |p: &Parameter| -> f64 {
        (0..d)
            .map(|k| {
                let w = if hi[k] > lo[k] { hi[k] - lo[k] } else { 1.0 };
                ((p[k] - 0.5 * (lo[k] + hi[k])) / w).powi(2)
            })
            .sum()
    };
    let mut best = 0;
    for (i, p) in points.iter().enumerate().skip(1) {
        if dist(p) < dist(&points[best]) {
            best = i;
        }
    }
    best
}

/// One row per basis size `m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedyRecord {
    pub m: usize,
    pub spectral_ratio: f64,
    /// Training index of the parameter picked next; `None` once training stops.
    pub next: Option<usize>,
    /// Largest indicator over the remaining candidates.
    pub indicator: f64,
    /// Errors at the picked parameter before its snapshot is added. The L2 error
    /// needs the full-order solution and is NaN in the final row.
    pub e_l2_train: f64,
    pub e_res_train: f64,
    /// Full-order solves so far, including the one for `next`.
    pub fom_solves: usize,
    /// Candidates whose reduced solve failed; they count as infinite indicators.
    pub sweep_failures: usize,
    pub t_fom: f64,
    pub t_sweep: f64,
    pub t_update: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    SpectralRatio,
    MaxIterations,
    /// The new snapshot was numerically dependent on the basis.
    Saturated,
    /// Every training point was selected.
    Exhausted,
    /// A full-order solve or artifact update failed; the model covers the basis so far.
    Failed(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedyLog {
    pub initial: usize,
    pub records: Vec<GreedyRecord>,
    pub termination: Termination,
    pub fom_solves: usize,
    pub t_initial_fom: f64,
    pub t_precompute: f64,
}

impl GreedyLog {
    /// Training indices in selection order.
    pub fn selected(&self) -> Vec<usize> {
        let mut s = vec![self.initial];
        let m = self.records.last().map_or(1, |r| r.m);
        s.extend(self.records.iter().filter_map(|r| r.next).take(m - 1));
        s
    }
}

pub struct Trained {
    pub basis: SnapshotBasis,
    pub model: ReducedModel,
    pub log: GreedyLog,
}

struct Candidate {
    index: usize,
    value: f64,
    eval: Option<Evaluation>,
}

/// Indicator over the candidates, in index order.
fn sweep(
    model: &ReducedModel,
    basis: &SnapshotBasis,
    training: &[Parameter],
    taken: &[bool],
) -> Vec<Candidate> {
    (0..training.len())
        .into_par_iter()
        .filter(|&i| !taken[i])
        .map(|i| match model.evaluate(&training[i], basis) {
            Ok(e) => {
                let v = model.indicator(&e);
                Candidate {
                    index: i,
                    value: if v.is_nan() { f64::INFINITY } else { v },
                    eval: Some(e),
                }
            }
            Err(err) => {
                log::debug!("reduced solve failed at training point {i}: {err}");
                Candidate {
                    index: i,
                    value: f64::INFINITY,
                    eval: None,
                }
            }
        })
        .collect()
}

/// Positions of the `k` largest values; ties keep the lower training index first.
fn top_k(cands: &[Candidate], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| {
        cands[b]
            .value
            .total_cmp(&cands[a].value)
            .then(cands[a].index.cmp(&cands[b].index))
    });
    order.truncate(k);
    order
}

/// Solves at the `k` best candidates and keeps the one with the largest true error
/// (the first on ties, so `k = 1` keeps the indicator's choice). Returns the winner's
/// position, payload and error, the number of successful solves, and the first failure.
fn confirm<T>(
    cands: &[Candidate],
    k: usize,
    mut solve: impl FnMut(&Candidate) -> Result<(T, f64)>,
) -> (Option<(usize, T, f64)>, usize, Option<Error>) {
    let mut best: Option<(usize, T, f64)> = None;
    let mut solves = 0;
    for p in top_k(cands, k) {
        match solve(&cands[p]) {
            Ok((payload, err)) => {
                solves += 1;
                if best.as_ref().is_none_or(|b| err > b.2) {
                    best = Some((p, payload, err));
                }
            }
            Err(e) => return (best, solves, Some(e)),
        }
    }
    (best, solves, None)
}

/// Runs the greedy loop and the final offline stage.
pub fn train(sys: &FomSystem, fom: &FomMethod, cfg: &GreedyConfig) -> Result<Trained> {
    cfg.validate()?;
    let first = cfg.initial_index()?;
    let art_mode = ReducedModel::artifact_mode(cfg.kind, cfg.mode);
    let galerkin_kind = cfg.kind.projection() == Projection::Galerkin;

    let t0 = Instant::now();
    let f1 = fom.solve(sys, &cfg.training[first])?.f;
    let t_initial_fom = t0.elapsed().as_secs_f64();
    let mut basis = SnapshotBasis::new(sys.len());
    basis.append(f1, cfg.training[first].clone())?;
    let mut builder = LspgBuilder::new(sys);
    builder.extend(sys, &basis)?;
    let mut galerkin = if galerkin_kind {
        Some(GalerkinRom::offline(sys, &basis)?)
    } else {
        None
    };
    let mut model = ReducedModel {
        kind: cfg.kind,
        mode: cfg.mode,
        galerkin: galerkin.clone(),
        lspg: builder.build_incremental(art_mode)?,
    };

    let mut taken = vec![false; cfg.training.len()];
    taken[first] = true;
    let mut records = Vec::new();
    let mut fom_solves = 1;
    let termination = loop {
        let m = basis.dim();
        let ratio = basis.spectral_ratio();
        let stop = if ratio <= cfg.tol_sratio {
            Some(Termination::SpectralRatio)
        } else if m >= cfg.max_m {
            Some(Termination::MaxIterations)
        } else if taken.iter().all(|&t| t) {
            Some(Termination::Exhausted)
        } else {
            None
        };

        let t = Instant::now();
        let cands = sweep(&model, &basis, &cfg.training, &taken);
        let t_sweep = t.elapsed().as_secs_f64();
        let sweep_failures = cands.iter().filter(|c| c.eval.is_none()).count();
        let mut record = GreedyRecord {
            m,
            spectral_ratio: ratio,
            next: None,
            indicator: f64::NAN,
            e_l2_train: f64::NAN,
            e_res_train: f64::NAN,
            fom_solves,
            sweep_failures,
            t_fom: 0.0,
            t_sweep,
            t_update: 0.0,
        };
        if let Some(reason) = stop {
            if let Some(&best) = top_k(&cands, 1).first() {
                record.indicator = cands[best].value;
                record.e_res_train = cands[best].eval.as_ref().map_or(f64::NAN, |e| e.residual);
            }
            records.push(record);
            break reason;
        }

        let t = Instant::now();
        let (best, solves, failure) = confirm(&cands, cfg.k, |c| {
            let f = fom.solve(sys, &cfg.training[c.index])?.f;
            let err = match &c.eval {
                Some(e) => {
                    let g = basis.lift(e.c.as_slice())?;
                    sys.norm(&f.iter().zip(&g).map(|(a, b)| a - b).collect::<Vec<_>>())
                }
                None => f64::INFINITY,
            };
            Ok((f, err))
        });
        fom_solves += solves;
        record.t_fom = t.elapsed().as_secs_f64();
        record.fom_solves = fom_solves;
        if let Some(e) = failure {
            records.push(record);
            break Termination::Failed(e.to_string());
        }
        let (p, f, err) = best.expect("at least one candidate");
        let cand = &cands[p];
        record.next = Some(cand.index);
        record.indicator = cand.value;
        record.e_l2_train = if cand.eval.is_some() { err } else { f64::NAN };
        record.e_res_train = cand.eval.as_ref().map_or(f64::NAN, |e| e.residual);
        log::info!(
            "m = {m}: ratio {ratio:.3e}, next #{} indicator {:.3e}, train L2 {:.3e}",
            cand.index,
            record.indicator,
            record.e_l2_train
        );

        let t = Instant::now();
        match basis.append(f, cfg.training[cand.index].clone()) {
            Ok(()) => {}
            Err(Error::NearDependence { ratio }) => {
                log::warn!("basis saturated at m = {m} (remainder {ratio:e})");
                records.push(record);
                break Termination::Saturated;
            }
            Err(e) => return Err(e),
        }
        taken[cand.index] = true;
        let update = (|| -> Result<ReducedModel> {
            builder.extend(sys, &basis)?;
            if let Some(g) = galerkin.as_mut() {
                g.extend(sys, &basis)?;
            }
            Ok(ReducedModel {
                kind: cfg.kind,
                mode: cfg.mode,
                galerkin: galerkin.clone(),
                lspg: builder.build_incremental(art_mode)?,
            })
        })();
        record.t_update = t.elapsed().as_secs_f64();
        records.push(record);
        match update {
            Ok(next) => model = next,
            Err(e) => break Termination::Failed(e.to_string()),
        }
    };

    let t = Instant::now();
    let model = match builder.build(art_mode) {
        Ok(lspg) if builder.dim() == basis.dim() => ReducedModel { lspg, ..model },
        Ok(_) | Err(_) => {
            log::warn!("final factorization unavailable, keeping the incremental artifacts");
            model
        }
    };
    let t_precompute = t.elapsed().as_secs_f64();
    Ok(Trained {
        basis,
        model,
        log: GreedyLog {
            initial: first,
            records,
            termination,
            fom_solves,
            t_initial_fom,
            t_precompute,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cands(values: &[f64]) -> Vec<Candidate> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Candidate {
                index: 10 + i,
                value: v,
                eval: None,
            })
            .collect()
    }

    #[test]
    fn top_k_breaks_ties_by_index() {
        let c = cands(&[1.0, 3.0, 3.0, 2.0]);
        assert_eq!(top_k(&c, 3), vec![1, 2, 3]);
        assert_eq!(top_k(&c, 10).len(), 4);
    }

    #[test]
    fn confirmation_follows_true_error() {
        // indicator ranks 0 > 1 > 2, true error ranks 1 > 0 > 2
        let c = cands(&[3.0, 2.0, 1.0]);
        let truth = [1.0, 5.0, 0.5];
        let (best, solves, fail) = confirm(&c, 2, |c| Ok(((), truth[c.index - 10])));
        assert_eq!((best.unwrap().0, solves), (1, 2));
        assert!(fail.is_none());
        let (best, solves, _) = confirm(&c, 1, |c| Ok(((), truth[c.index - 10])));
        assert_eq!((best.unwrap().0, solves), (0, 1));
    }

    #[test]
    fn confirmation_stops_at_failure() {
        let c = cands(&[3.0, 2.0]);
        let (best, solves, fail) = confirm(&c, 2, |c| {
            if c.index == 11 {
                Err(Error::SingularMatrix)
            } else {
                Ok(((), 1.0))
            }
        });
        assert_eq!((best.unwrap().0, solves), (0, 1));
        assert!(fail.is_some());
    }

    #[test]
    fn center_is_nearest_with_lowest_index() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.4, 0.5],
            vec![0.6, 0.5],
            vec![2.0, 2.0],
        ];
        assert_eq!(nearest_center(&pts), 1);
        let even = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        assert_eq!(nearest_center(&even), 1);
    }
}
