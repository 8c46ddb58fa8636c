use std::io::Write;

use crate::error::{Error, Result};

/// One trajectory row, in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub omega: Vec<f64>,
    pub e_norm: f64,
    pub epsilon: f64,
    pub epsilon_clipped: f64,
    /// Empty for real-time runs.
    pub zeta: Option<f64>,
    pub chi: Option<f64>,
    pub energy_prepared: f64,
    pub energy_exact: f64,
    pub variance_prepared: f64,
    pub bures_actual: f64,
    pub fidelity_actual: f64,
    pub fidelity_bound_rigorous: f64,
    pub fidelity_bound_paper: f64,
    pub step_size: f64,
    pub fq_condition: f64,
}

pub fn csv_header(n_params: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((0..n_params).map(|j| format!("omega_{j}")));
    h.extend(
        [
            "e_norm",
            "epsilon",
            "epsilon_clipped",
            "zeta",
            "chi",
            "energy_prepared",
            "energy_exact",
            "variance_prepared",
            "bures_actual",
            "fidelity_actual",
            "fidelity_bound_rigorous",
            "fidelity_bound_paper",
            "step_size",
            "fq_condition",
        ]
        .map(String::from),
    );
    h
}

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl CsvRow {
    pub fn fields(&self) -> Vec<String> {
        let mut f = vec![num(self.t)];
        f.extend(self.omega.iter().copied().map(num));
        f.extend([
            num(self.e_norm),
            num(self.epsilon),
            num(self.epsilon_clipped),
            opt(self.zeta),
            opt(self.chi),
            num(self.energy_prepared),
            num(self.energy_exact),
            num(self.variance_prepared),
            num(self.bures_actual),
            num(self.fidelity_actual),
            num(self.fidelity_bound_rigorous),
            num(self.fidelity_bound_paper),
            num(self.step_size),
            num(self.fq_condition),
        ]);
        f
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_csv<W: Write>(out: W, n_params: usize, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(n_params)).map_err(csv_err)?;
    for r in rows {
        if r.omega.len() != n_params {
            return Err(Error::DimensionMismatch {
                expected: n_params,
                actual: r.omega.len(),
            });
        }
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
