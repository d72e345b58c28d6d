//! Parameter sweeps over the Bell-diagonal simplex, the Werner line and
//! Werner pairs, emitted as CSV tables.
//!
//! Booleans are written as `0`/`1`, floats with Rust's shortest round-trip
//! formatting. Grid coordinates are computed as ratios of integers, and rows
//! come out in lexicographic grid order whatever the thread count.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::criteria::{definetti_gap, hat_state, ppt_test, tilde_state, ExtensionProblem};
use crate::consistency::{consistency_verdict, werner_pentagon, ConsistencyStatus, MarginalSet};
use crate::error::{Error, Result};
use crate::families::{
    bell_exact_2ext, bell_paper_condition, bell_ssa, bell_state, ckw_check, ssa_check,
    werner_exact_kext_threshold, werner_state, BellDiagonalParams, WernerParams,
};
use crate::linalg::DensityMatrix;
use crate::oracle::{oracle_feasibility, OracleConfig};

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(format!("CSV output failed: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidParameter(format!("CSV output failed: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// Columns available in [`bell_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellCriterion {
    /// `max p_i ≤ 3/4`.
    PaperCondition,
    /// The exact 2-extendability inequality.
    Exact,
    /// `S(AB) ≥ 1`.
    Ssa,
    /// PPT of the hat state.
    PptHat,
}

impl BellCriterion {
    pub const ALL: [BellCriterion; 4] = [
        BellCriterion::PaperCondition,
        BellCriterion::Exact,
        BellCriterion::Ssa,
        BellCriterion::PptHat,
    ];

    pub fn column(self) -> &'static str {
        match self {
            BellCriterion::PaperCondition => "paper_condition",
            BellCriterion::Exact => "exact",
            BellCriterion::Ssa => "ssa",
            BellCriterion::PptHat => "ppt_hat",
        }
    }
}

impl FromStr for BellCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper_condition" => Ok(BellCriterion::PaperCondition),
            "exact" => Ok(BellCriterion::Exact),
            "ssa" => Ok(BellCriterion::Ssa),
            "ppt" | "ppt_hat" => Ok(BellCriterion::PptHat),
            other => Err(Error::InvalidParameter(format!("unknown criterion {other:?}"))),
        }
    }
}

/// All `(i, j, l)` with `i + j + l ≤ n`, lexicographic.
pub fn simplex_grid(n: usize) -> Vec<(usize, usize, usize)> {
    let mut pts = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            for l in 0..=n - i - j {
                pts.push((i, j, l));
            }
        }
    }
    pts
}

/// Bell-diagonal weights at grid point `(i, j, l) / n`.
pub fn bell_grid_params(n: usize, (i, j, l): (usize, usize, usize)) -> BellDiagonalParams {
    let nf = n as f64;
    let rest = (n - i - j - l) as f64 / nf;
    BellDiagonalParams::new([i as f64 / nf, j as f64 / nf, l as f64 / nf, rest])
        .expect("grid points lie in the simplex")
}

/// Rows `p1, p2, p3` over the simplex grid with step `1/n`, one 0/1 column
/// per requested criterion (PPT of the hat state uses `k`).
pub fn bell_sweep(n: usize, k: usize, criteria: &[BellCriterion]) -> Result<Table> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid needs n >= 2, got {n}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut header = vec!["p1", "p2", "p3"];
    header.extend(criteria.iter().map(|c| c.column()));
    let mut table = Table::new(&header);
    table.rows = simplex_grid(n)
        .into_par_iter()
        .map(|pt| -> Result<Vec<String>> {
            let params = bell_grid_params(n, pt);
            let p = params.weights();
            let mut row = vec![p[0].to_string(), p[1].to_string(), p[2].to_string()];
            for c in criteria {
                let v = match c {
                    BellCriterion::PaperCondition => bell_paper_condition(&params),
                    BellCriterion::Exact => bell_exact_2ext(&params),
                    BellCriterion::Ssa => bell_ssa(&params),
                    BellCriterion::PptHat => {
                        !ppt_test(&hat_state(&bell_state(&params), k)?, 1)?.is_violated()
                    }
                };
                row.push(flag(v));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(table)
}

/// `ψ_i = (2i − m) / m` for `i = 0..=m`, `m = round(2 / step)`.
pub fn psi_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 2.0) {
        return Err(Error::InvalidParameter(format!("psi step must lie in (0, 2], got {step}")));
    }
    let m = (2.0 / step).round() as i64;
    Ok((0..=m).map(|i| (2 * i - m) as f64 / m as f64).collect())
}

/// Rows `psi, tilde_ppt, hat_ppt, exact_threshold_flag[, oracle_status]`
/// along the Werner line. `exact_threshold_flag` is `ψ ≥ −(d−1)/k`.
pub fn werner_sweep(d: usize, k: usize, step: f64, oracle: Option<&OracleConfig>) -> Result<Table> {
    WernerParams::new(d, 0.0)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut header = vec!["psi", "tilde_ppt", "hat_ppt", "exact_threshold_flag"];
    if oracle.is_some() {
        header.push("oracle_status");
    }
    let threshold = werner_exact_kext_threshold(d, k);
    let mut table = Table::new(&header);
    table.rows = psi_grid(step)?
        .into_par_iter()
        .map(|psi| -> Result<Vec<String>> {
            let w = werner_state(&WernerParams::new(d, psi)?);
            let tilde = !ppt_test(&tilde_state(&w, k)?, 1)?.is_violated();
            let hat = !ppt_test(&hat_state(&w, k)?, 1)?.is_violated();
            let mut row = vec![psi.to_string(), flag(tilde), flag(hat), flag(psi >= threshold)];
            if let Some(cfg) = oracle {
                let r = oracle_feasibility(&ExtensionProblem::symmetric(w, k)?, cfg)?;
                row.push(format!("{:?}", r.status));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(table)
}

/// `ψ_i = (2i − n) / n` for `i = 0..=n`.
pub fn pair_grid(n: usize) -> Vec<f64> {
    (0..=n as i64)
        .map(|i| (2 * i - n as i64) as f64 / n as f64)
        .collect()
}

/// Rows `psi1, psi2, pentagon, averaging, ckw, ssa` for two-qubit Werner
/// pairs. `pentagon` is the closed form, `averaging` the full pipeline
/// (1 unless it proves inconsistency), `ckw` uses `C_A(BC) = 1`.
pub fn consistency_sweep(n: usize) -> Result<Table> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid needs n >= 2, got {n}")));
    }
    let grid = pair_grid(n);
    let states: Vec<DensityMatrix> = grid
        .iter()
        .map(|&psi| WernerParams::new(2, psi).map(|p| werner_state(&p)))
        .collect::<Result<_>>()?;
    let mut table = Table::new(&["psi1", "psi2", "pentagon", "averaging", "ckw", "ssa"]);
    let pairs: Vec<(usize, usize)> = (0..=n).flat_map(|i| (0..=n).map(move |j| (i, j))).collect();
    table.rows = pairs
        .into_par_iter()
        .map(|(i, j)| -> Result<Vec<String>> {
            let (a, b) = (&states[i], &states[j]);
            let v = consistency_verdict(&MarginalSet::new(vec![a.clone(), b.clone()])?)?;
            Ok(vec![
                grid[i].to_string(),
                grid[j].to_string(),
                flag(werner_pentagon(grid[i], grid[j])),
                flag(v.status == ConsistencyStatus::Inconclusive),
                flag(ckw_check(a, b, 1.0)?),
                flag(ssa_check(a, b)?),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(table)
}

/// Rows `k, gap, bound` for `k = 1..=k_max`.
pub fn definetti_table(state: &DensityMatrix, k_max: usize) -> Result<Table> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let mut table = Table::new(&["k", "gap", "bound"]);
    for k in 1..=k_max {
        let g = definetti_gap(state, k)?;
        table.rows.push(vec![k.to_string(), g.gap.to_string(), g.bound.to_string()]);
    }
    Ok(table)
}
