//! CSV and plot-data text for experiment results.
//!
//! Every table has one header line whose first column is `schema`; numbers
//! use [`fmt_f64`]. Wall-clock times live in their own table so result files
//! stay byte-identical across reruns.

use std::fmt::Write;

use crate::experiments::{MCSummary, RatesReport, RunReport};
use crate::field::{fmt_f64, SCHEMA_VERSION};

pub const RUN_HEADER: &str =
    "schema,example,perc_noise,seed,delta,alpha,alpha_source,morozov_iters,rel_err";
pub const RATES_HEADER: &str =
    "schema,example,n_seeds,perc_noise,mean_delta,mean_rel_err,slope,intercept,r_squared";
pub const MC_HEADER: &str =
    "schema,example,perc_noise,n_reps,base_seed,mean_rel_err,var_rel_err,mean_alpha";
pub const TIMING_HEADER: &str = "schema,example,perc_noise,seed,elapsed_s";

fn run_row(out: &mut String, r: &RunReport) {
    let _ = writeln!(
        out,
        "{SCHEMA_VERSION},{},{},{},{},{},{},{},{}",
        r.example,
        fmt_f64(r.perc_noise),
        r.seed,
        fmt_f64(r.delta),
        fmt_f64(r.alpha),
        r.alpha_source,
        r.morozov_iters,
        fmt_f64(r.rel_err)
    );
}

pub fn runs_csv(runs: &[RunReport]) -> String {
    let mut out = format!("{RUN_HEADER}\n");
    for r in runs {
        run_row(&mut out, r);
    }
    out
}

/// One row per noise level; the fit columns repeat on every row.
pub fn rates_csv(r: &RatesReport) -> String {
    let mut out = format!("{RATES_HEADER}\n");
    for l in &r.levels {
        let _ = writeln!(
            out,
            "{SCHEMA_VERSION},{},{},{},{},{},{},{},{}",
            r.example,
            r.n_seeds,
            fmt_f64(l.perc_noise),
            fmt_f64(l.mean_delta),
            fmt_f64(l.mean_rel_err),
            fmt_f64(r.slope),
            fmt_f64(r.intercept),
            fmt_f64(r.r_squared)
        );
    }
    out
}

pub fn mc_csv(summaries: &[MCSummary]) -> String {
    let mut out = format!("{MC_HEADER}\n");
    for m in summaries {
        let _ = writeln!(
            out,
            "{SCHEMA_VERSION},{},{},{},{},{},{},{}",
            m.example,
            fmt_f64(m.perc_noise),
            m.n_reps,
            m.base_seed,
            fmt_f64(m.mean_rel_err),
            fmt_f64(m.var_rel_err),
            fmt_f64(m.mean_alpha)
        );
    }
    out
}

pub fn timing_csv(runs: &[RunReport]) -> String {
    let mut out = format!("{TIMING_HEADER}\n");
    for r in runs {
        let _ = writeln!(
            out,
            "{SCHEMA_VERSION},{},{},{},{}",
            r.example,
            fmt_f64(r.perc_noise),
            r.seed,
            fmt_f64(r.elapsed)
        );
    }
    out
}

/// `x y` per line, no header.
pub fn plot_data(points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for &(x, y) in points {
        let _ = writeln!(out, "{} {}", fmt_f64(x), fmt_f64(y));
    }
    out
}
