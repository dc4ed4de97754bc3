//! CSV tables for external plotting.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! which round-trips every `f64`. Column order is part of each table's
//! interface.

use std::io::{self, Write};

use crate::diagnostics::AmplificationReport;
use crate::latent::LatentSet;
use crate::synth::Toy2dPaths;

/// Formats a value with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A header row plus data rows.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }
}

/// One row per (method, N, channel):
/// `method,n,sqrt_n,channel,injected_bias,mean,std,std_error,predicted_amplification,measured_amplification,fitted_slope`.
///
/// `measured_amplification` is empty for channels without injected bias.
pub fn amplification_table(reports: &[AmplificationReport]) -> Table {
    let mut table = Table::new([
        "method",
        "n",
        "sqrt_n",
        "channel",
        "injected_bias",
        "mean",
        "std",
        "std_error",
        "predicted_amplification",
        "measured_amplification",
        "fitted_slope",
    ]);
    for r in reports {
        for (ni, &n) in r.n_values.iter().enumerate() {
            for c in 0..r.channels() {
                table.push(vec![
                    r.method.to_string(),
                    n.to_string(),
                    num(r.predicted[ni]),
                    c.to_string(),
                    num(r.channel_bias[c]),
                    num(r.channel_means[ni][c]),
                    num(r.channel_std[ni][c]),
                    num(r.std_error(ni, c)),
                    num(r.predicted[ni]),
                    r.amplification[ni][c].map(num).unwrap_or_default(),
                    num(r.slopes[c]),
                ]);
            }
        }
    }
    table
}

/// `t,lin_x,lin_y,fix_x,fix_y,slerp_x,slerp_y,nin_x,nin_y`.
pub fn toy2d_table(paths: &Toy2dPaths) -> Table {
    let mut table = Table::new([
        "t", "lin_x", "lin_y", "fix_x", "fix_y", "slerp_x", "slerp_y", "nin_x", "nin_y",
    ]);
    for i in 0..paths.t.len() {
        let mut row = vec![num(paths.t[i])];
        for p in [paths.lin[i], paths.fix[i], paths.slerp[i], paths.nin[i]] {
            row.push(num(p[0]));
            row.push(num(p[1]));
        }
        table.push(row);
    }
    table
}

/// `index,norm,norm_over_sqrt_l,global_mean,channel_mean_0,…,channel_mean_{C-1}`.
pub fn latent_stats_table(set: &LatentSet) -> Table {
    let shape = set.shape();
    let mut header: Vec<String> = ["index", "norm", "norm_over_sqrt_l", "global_mean"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..shape.channels()).map(|c| format!("channel_mean_{c}")));
    let mut table = Table { header, rows: Vec::new() };
    for (k, z) in set.iter().enumerate() {
        let norm = z.norm();
        let mut row = vec![
            k.to_string(),
            num(norm),
            num(norm / shape.nominal_norm()),
            num(z.global_mean()),
        ];
        row.extend(z.channel_means().into_iter().map(num));
        table.push(row);
    }
    table
}
