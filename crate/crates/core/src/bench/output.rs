//! Run directories: CSV curves, a JSON metadata sidecar, the reduced model and the
//! snapshot basis.
//!
//! Floating-point values in CSV files use 17 significant digits. Apart from the
//! timing columns the files are byte-identical across runs with the same plan.

use super::experiment::{ErrorRow, Experiment, ExperimentPlan};
use crate::dg::Discretization;
use crate::error::{Error, Result};
use crate::greedy::{GreedyLog, ReducedModel, Termination};
use crate::linalg::SnapshotBasis;
use crate::problem::Parameter;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const ERRORS_FILE: &str = "errors.csv";
pub const LOG_FILE: &str = "greedy_log.csv";
pub const PARAMS_FILE: &str = "selected_params.csv";
pub const META_FILE: &str = "basis.meta";
pub const MODEL_FILE: &str = "rom.json";
pub const BASIS_FILE: &str = "basis.bin";

const BASIS_MAGIC: &[u8; 8] = b"RTERBMB1";

pub const ERROR_COLUMNS: [&str; 10] = [
    "m",
    "e_l2_train",
    "e_res_train",
    "e_l2_test",
    "e_res_test",
    "spectral_ratio",
    "max_cond",
    "t_fom_s",
    "t_sweep_s",
    "t_update_s",
];

/// Run metadata written next to the basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub plan: ExperimentPlan,
    pub discretization: Discretization,
    pub full_order_len: usize,
    pub basis_size: usize,
    pub training_points: usize,
    pub test_points: usize,
    pub test_solves: usize,
    pub offline_solves: usize,
    pub termination: Termination,
    pub version: String,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_errors(path: &Path, rows: &[ErrorRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(ERROR_COLUMNS)?;
    for r in rows {
        let mut rec = vec![r.m.to_string()];
        rec.extend(
            [
                r.e_l2_train,
                r.e_res_train,
                r.e_l2_test,
                r.e_res_test,
                r.spectral_ratio,
                r.max_cond,
                r.t_fom_s,
                r.t_sweep_s,
                r.t_update_s,
            ]
            .map(fmt_f64),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_errors(path: &Path) -> Result<Vec<ErrorRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad value in column {}", ERROR_COLUMNS[i])))
        };
        rows.push(ErrorRow {
            m: num(0)? as usize,
            e_l2_train: num(1)?,
            e_res_train: num(2)?,
            e_l2_test: num(3)?,
            e_res_test: num(4)?,
            spectral_ratio: num(5)?,
            max_cond: num(6)?,
            t_fom_s: num(7)?,
            t_sweep_s: num(8)?,
            t_update_s: num(9)?,
        });
    }
    Ok(rows)
}

pub fn write_log(path: &Path, log: &GreedyLog, training: &[Parameter]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "m",
        "spectral_ratio",
        "next_index",
        "next_mu",
        "indicator",
        "e_l2_train",
        "e_res_train",
        "fom_solves",
        "sweep_failures",
        "t_fom_s",
        "t_sweep_s",
        "t_update_s",
    ])?;
    for r in &log.records {
        let (idx, mu) = match r.next {
            Some(i) => (
                i.to_string(),
                training[i]
                    .iter()
                    .map(|x| fmt_f64(*x))
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.m.to_string(),
            fmt_f64(r.spectral_ratio),
            idx,
            mu,
            fmt_f64(r.indicator),
            fmt_f64(r.e_l2_train),
            fmt_f64(r.e_res_train),
            r.fom_solves.to_string(),
            r.sweep_failures.to_string(),
            fmt_f64(r.t_fom),
            fmt_f64(r.t_sweep),
            fmt_f64(r.t_update),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_selected(path: &Path, log: &GreedyLog, training: &[Parameter]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let d = training.first().map_or(0, |p| p.len());
    let mut header = vec!["order".to_string(), "index".to_string()];
    header.extend((1..=d).map(|k| format!("mu{k}")));
    w.write_record(&header)?;
    for (j, &i) in log.selected().iter().enumerate() {
        let mut rec = vec![(j + 1).to_string(), i.to_string()];
        rec.extend(training[i].iter().map(|x| fmt_f64(*x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Snapshots, orthonormal basis, triangular factor and parameters, little endian.
pub fn write_basis(path: &Path, basis: &SnapshotBasis) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let d = basis.params().first().map_or(0, |p| p.len());
    w.write_all(BASIS_MAGIC)?;
    for n in [basis.len(), basis.dim(), d] {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    let mut put = |v: &[f64]| -> std::io::Result<()> {
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    };
    for j in 0..basis.dim() {
        put(&basis.snapshots()[j])?;
        put(&basis.u()[j])?;
        put(&basis.r_columns()[j])?;
        put(&basis.params()[j])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_basis(path: &Path) -> Result<SnapshotBasis> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BASIS_MAGIC {
        return Err(Error::Config(format!(
            "{} is not a basis file",
            path.display()
        )));
    }
    let mut word = [0u8; 8];
    let mut next_u64 = |r: &mut BufReader<File>| -> Result<usize> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word) as usize)
    };
    let (n, m, d) = (next_u64(&mut r)?, next_u64(&mut r)?, next_u64(&mut r)?);
    let take = |r: &mut BufReader<File>, k: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; 8 * k];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let (mut snaps, mut u, mut rr, mut params) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for j in 0..m {
        snaps.push(take(&mut r, n)?);
        u.push(take(&mut r, n)?);
        rr.push(take(&mut r, j + 1)?);
        params.push(take(&mut r, d)?);
    }
    SnapshotBasis::from_parts(snaps, u, rr, params)
}

/// Writes every run file into `dir`, creating it if needed.
pub fn write_run(dir: &Path, exp: &Experiment) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let log = &exp.trained.log;
    write_errors(&dir.join(ERRORS_FILE), &exp.rows)?;
    write_log(&dir.join(LOG_FILE), log, &exp.training)?;
    write_selected(&dir.join(PARAMS_FILE), log, &exp.training)?;
    let meta = RunMeta {
        plan: exp.plan.clone(),
        discretization: exp.system.discretization,
        full_order_len: exp.system.len(),
        basis_size: exp.trained.basis.dim(),
        training_points: exp.training.len(),
        test_points: exp.test.params.len(),
        test_solves: exp.test.solves,
        offline_solves: log.fom_solves,
        termination: log.termination.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join(META_FILE))?), &meta)?;
    serde_json::to_writer(
        BufWriter::new(File::create(dir.join(MODEL_FILE))?),
        &exp.trained.model,
    )?;
    write_basis(&dir.join(BASIS_FILE), &exp.trained.basis)?;
    Ok(())
}

/// Saved run: metadata, basis and reduced model.
pub struct Artifacts {
    pub meta: RunMeta,
    pub basis: SnapshotBasis,
    pub model: ReducedModel,
}

pub fn load_run(dir: &Path) -> Result<Artifacts> {
    let meta: RunMeta = serde_json::from_reader(BufReader::new(File::open(dir.join(META_FILE))?))?;
    let model: ReducedModel =
        serde_json::from_reader(BufReader::new(File::open(dir.join(MODEL_FILE))?))?;
    let basis = read_basis(&dir.join(BASIS_FILE))?;
    if basis.dim() != model.dim() || basis.len() != meta.full_order_len {
        return Err(Error::Config(format!(
            "inconsistent run files in {}",
            dir.display()
        )));
    }
    Ok(Artifacts { meta, basis, model })
}
