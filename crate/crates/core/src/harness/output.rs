use std::io::Write;

use crate::error::Result;

pub const CSV_COLUMNS: [&str; 13] = [
    "experiment", "mechanism", "B", "K", "epsilon", "delta", "alpha", "tau", "J_target", "metric",
    "value", "std", "reps",
];

/// One line of experiment output. Parameters that do not apply are `None`
/// and render as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub mechanism: String,
    pub buckets: u32,
    pub num_functions: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub alpha: Option<u32>,
    pub tau: Option<u32>,
    pub j_target: Option<f64>,
    /// `mae`, `recall@k`, `approx_ratio`, or `skipped: <reason>`.
    pub metric: String,
    pub value: Option<f64>,
    pub std: Option<f64>,
    pub reps: usize,
}

impl ResultRow {
    pub fn is_skipped(&self) -> bool {
        self.metric.starts_with("skipped")
    }
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.mechanism.clone(),
            r.buckets.to_string(),
            r.num_functions.to_string(),
            cell(r.epsilon),
            cell(r.delta),
            cell(r.alpha),
            cell(r.tau),
            cell(r.j_target),
            r.metric.clone(),
            cell(r.value),
            cell(r.std),
            r.reps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_empty_cells() {
        let row = ResultRow {
            experiment: "mae".into(),
            mechanism: "minhash".into(),
            buckets: 2,
            num_functions: 100,
            epsilon: None,
            delta: None,
            alpha: None,
            tau: Some(50),
            j_target: Some(0.5),
            metric: "mae".into(),
            value: Some(0.0625),
            std: Some(0.01),
            reps: 50,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "experiment,mechanism,B,K,epsilon,delta,alpha,tau,J_target,metric,value,std,reps\n\
             mae,minhash,2,100,,,,50,0.5,mae,0.0625,0.01,50\n"
        );
    }
}
