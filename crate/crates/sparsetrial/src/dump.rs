//! Diagnostic CSV output. Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sparsetrial_core::pipeline::ClassWeights;
use sparsetrial_core::{CovarianceSet, DiagResult, SymMatrix, TrialSet};

use crate::error::{Error, Result};

pub fn matrix_csv(m: &SymMatrix) -> String {
    let mut out = String::new();
    for row in m.as_matrix().row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One `cov_k{K}_tau{T}.csv` per matrix in `set`.
pub fn write_covariance_csv(set: &CovarianceSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for ((m, &k), &tau) in set.matrices().iter().zip(set.trial_index()).zip(set.lags()) {
        let path = dir.join(format!("cov_k{k}_tau{tau}.csv"));
        fs::write(&path, matrix_csv(m)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// `iter,cost` rows; row 0 is the cost before the first update.
pub fn cost_trace_csv(diag: &DiagResult) -> String {
    let mut out = format!("iter,cost\n0,{}\n", diag.initial_cost);
    for (i, c) in diag.cost_trace.iter().enumerate() {
        writeln!(out, "{},{c}", i + 1).unwrap();
    }
    out
}

/// `k,label,p` rows, plus a `contaminated` column when the set carries flags.
pub fn residue_csv(set: &TrialSet, diag: &DiagResult) -> String {
    let flags = set.contaminated();
    let mut out = String::from(if flags.is_some() {
        "k,label,p,contaminated\n"
    } else {
        "k,label,p\n"
    });
    for (k, p) in diag.quality.iter().enumerate() {
        write!(out, "{k},{},{p}", set.trial(k).label).unwrap();
        if let Some(f) = flags {
            write!(out, ",{}", f[k]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `class,k,p,w` rows; `k` indexes the original trial set.
pub fn weights_csv(weights: &[ClassWeights]) -> String {
    let mut out = String::from("class,k,p,w\n");
    for cw in weights {
        for ((k, p), w) in cw.trials.iter().zip(&cw.quality).zip(&cw.weights) {
            writeln!(out, "{},{k},{p},{w}", cw.class).unwrap();
        }
    }
    out
}
