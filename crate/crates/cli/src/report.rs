//! Long-format CSV results: one row per metric with a fixed superset of
//! parameter columns, so every command writes the same schema.
//!
//! Metric values are rendered with 17 significant digits, which both
//! satisfies the >= 12 significant digit contract and round-trips f64
//! exactly.

use std::io::Write;

use anyhow::Result;

pub const CSV_HEADER: [&str; 15] = [
    "experiment",
    "alpha",
    "beta",
    "gamma_a",
    "k",
    "p",
    "epsilon",
    "lambda",
    "r_star",
    "rounds",
    "trials",
    "seed",
    "metric",
    "value",
    "stderr",
];

/// Parameter columns shared by the rows of one report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma_a: Option<f64>,
    pub k: Option<u32>,
    pub p: Option<f64>,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub r_star: Option<f64>,
    pub rounds: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub params: Params,
    pub metric: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub rows: Vec<Row>,
}

/// Render a metric value with full f64 round-trip precision.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl Report {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, params: &Params, metric: &str, value: f64, stderr: Option<f64>) {
        self.rows.push(Row {
            params: params.clone(),
            metric: metric.to_string(),
            value,
            stderr,
        });
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let p = &row.params;
            w.write_record([
                self.experiment.clone(),
                opt_num(&p.alpha),
                opt_num(&p.beta),
                opt_num(&p.gamma_a),
                opt_num(&p.k),
                opt_num(&p.p),
                opt_num(&p.epsilon),
                opt_num(&p.lambda),
                opt_num(&p.r_star),
                opt_num(&p.rounds),
                opt_num(&p.trials),
                opt_num(&p.seed),
                row.metric.clone(),
                format_value(row.value),
                row.stderr.map(format_value).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable lines for the terminal summary.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("[{}]", self.experiment)];
        for row in &self.rows {
            match row.stderr {
                Some(se) => lines.push(format!("  {} = {:.6} +/- {:.6}", row.metric, row.value, se)),
                None => lines.push(format!("  {} = {:.6}", row.metric, row.value)),
            }
        }
        lines
    }
}
