//! CSV layouts of the result rows.

use aew_core::gaussian::BerryEsseenReport;
use aew_core::harness::{TailFrequency, TheoremARow, TheoremBRow, TheoremCTable};

use crate::output::{Cell, Table};

fn tail(f: &TailFrequency) -> [Cell; 3] {
    [f.freq.into(), f.wilson_lo.into(), f.wilson_hi.into()]
}

pub const THEOREM_A_COLUMNS: [&str; 13] = [
    "n",
    "T",
    "exact_mean_excess",
    "mc_mean_excess",
    "mc_stderr",
    "exact_tail",
    "threshold",
    "trials",
    "seed",
    "mc_tail_freq",
    "mc_tail_wilson_lo",
    "mc_tail_wilson_hi",
    "sqrt_n_exact_mean",
];

pub fn theorem_a(rows: &[TheoremARow]) -> Table {
    let mut t = Table::new(THEOREM_A_COLUMNS.to_vec());
    for r in rows {
        let mut row: Vec<Cell> = vec![
            r.n.into(),
            r.temperature.into(),
            r.exact_mean_excess.into(),
            r.mc_mean_excess.into(),
            r.mc_stderr.into(),
            r.exact_tail.into(),
            r.threshold.into(),
            r.trials.into(),
            r.seed.into(),
        ];
        row.extend(tail(&r.mc_tail));
        row.push(r.sqrt_n_exact_mean().into());
        t.push(row);
    }
    t
}

pub const THEOREM_B_COLUMNS: [&str; 25] = [
    "n",
    "T",
    "m",
    "lambda",
    "rho",
    "delta",
    "epsilon",
    "kappa",
    "trials",
    "seed",
    "collapse_freq",
    "collapse_wilson_lo",
    "collapse_wilson_hi",
    "system_freq",
    "system_wilson_lo",
    "system_wilson_hi",
    "large_excess_freq",
    "large_excess_wilson_lo",
    "large_excess_wilson_hi",
    "large_excess_threshold",
    "implication_violations",
    "oracle_collapses",
    "suboptimal_excess",
    "mean_excess",
    "stderr",
];

pub fn theorem_b(rows: &[TheoremBRow]) -> Table {
    let mut t = Table::new(THEOREM_B_COLUMNS.to_vec());
    for r in rows {
        let mut row: Vec<Cell> = vec![
            r.n.into(),
            r.temperature.into(),
            r.m.into(),
            r.lambda.into(),
            r.rho.into(),
            r.delta.into(),
            r.epsilon.into(),
            r.kappa.into(),
            r.trials.into(),
            r.seed.into(),
        ];
        row.extend(tail(&r.collapse));
        row.extend(tail(&r.system));
        row.extend(tail(&r.large_excess));
        row.extend([
            r.large_excess_threshold.into(),
            r.implication_violations.into(),
            r.oracle_collapses.into(),
            r.suboptimal_excess.into(),
            r.mean_excess.into(),
            r.stderr.into(),
        ]);
        t.push(row);
    }
    t
}

pub const THEOREM_C_COLUMNS: [&str; 21] = [
    "n",
    "T",
    "trials",
    "seed",
    "mean_excess",
    "stderr",
    "quantile_level",
    "quantile_excess",
    "x",
    "theta",
    "psi_theta",
    "theorem_c_bound",
    "key_estimate",
    "pac_residual",
    "lambda",
    "isomorphism_freq",
    "isomorphism_wilson_lo",
    "isomorphism_wilson_hi",
    "isomorphism_target",
    "low_temperature",
    "rate_slope",
];

pub fn theorem_c(table: &TheoremCTable) -> Table {
    let mut t = Table::new(THEOREM_C_COLUMNS.to_vec());
    for r in &table.rows {
        let slope = table.slopes.iter().find(|(temp, _)| *temp == r.temperature).and_then(|(_, s)| *s);
        let mut row: Vec<Cell> = vec![
            r.n.into(),
            r.temperature.into(),
            r.trials.into(),
            r.seed.into(),
            r.mean_excess.into(),
            r.stderr.into(),
            r.quantile_level.into(),
            r.quantile_excess.into(),
            r.x.into(),
            r.theta.into(),
            r.psi_theta.into(),
            r.theorem_c_bound.into(),
            r.key_estimate.into(),
            r.pac_residual.into(),
            r.lambda.into(),
        ];
        row.extend(tail(&r.isomorphism));
        row.extend([r.isomorphism_target.into(), r.low_temperature.into(), slope.into()]);
        t.push(row);
    }
    t
}

pub const BE_COLUMNS: [&str; 6] = ["inner_n", "samples", "distance", "bound", "dkw", "within_bound"];

pub fn be_check(reports: &[(usize, BerryEsseenReport)]) -> Table {
    let mut t = Table::new(BE_COLUMNS.to_vec());
    for (n, r) in reports {
        t.push(vec![(*n).into(), r.samples.into(), r.distance.into(), r.bound.into(), r.dkw.into(), r.within_bound().into()]);
    }
    t
}
