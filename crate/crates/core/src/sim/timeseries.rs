//! Logged time series and its CSV form.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// CSV header; the column order is part of the output format.
pub const COLUMNS: [&str; 25] = [
    "t",
    "x",
    "y",
    "psi",
    "u_r",
    "v_r",
    "r",
    "theta",
    "x_bp",
    "y_bp",
    "psi_d",
    "psi_tilde",
    "r_d",
    "r_tilde",
    "C_r",
    "g",
    "G1",
    "x_hat",
    "y_hat",
    "Vx_hat",
    "Vy_hat",
    "VT_hat",
    "VN_hat",
    "tau_u",
    "tau_r",
];

/// One logged sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Record {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u_r: f64,
    pub v_r: f64,
    pub r: f64,
    pub theta: f64,
    pub x_bp: f64,
    pub y_bp: f64,
    pub psi_d: f64,
    pub psi_tilde: f64,
    pub r_d: f64,
    pub r_tilde: f64,
    pub c_r: f64,
    pub g: f64,
    pub g1: f64,
    pub x_hat: f64,
    pub y_hat: f64,
    pub vx_hat: f64,
    pub vy_hat: f64,
    pub vt_hat: f64,
    pub vn_hat: f64,
    pub tau_u: f64,
    pub tau_r: f64,
    // not part of the CSV
    #[serde(skip)]
    pub u_rd: f64,
    #[serde(skip)]
    pub u_td: f64,
    /// Predicted `ψ̃̇` from the error dynamics.
    #[serde(skip)]
    pub rhs_psi_tilde: f64,
    /// Predicted `r̃̇` from the error dynamics.
    #[serde(skip)]
    pub rhs_r_tilde: f64,
    #[serde(skip)]
    pub margin: f64,
}

impl Record {
    pub fn csv_fields(&self) -> [f64; 25] {
        [
            self.t,
            self.x,
            self.y,
            self.psi,
            self.u_r,
            self.v_r,
            self.r,
            self.theta,
            self.x_bp,
            self.y_bp,
            self.psi_d,
            self.psi_tilde,
            self.r_d,
            self.r_tilde,
            self.c_r,
            self.g,
            self.g1,
            self.x_hat,
            self.y_hat,
            self.vx_hat,
            self.vy_hat,
            self.vt_hat,
            self.vn_hat,
            self.tau_u,
            self.tau_r,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub records: Vec<Record>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// Column extractor, e.g. `ts.column(|r| r.y_bp)`.
    pub fn column(&self, f: impl Fn(&Record) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// Writes the CSV with the shortest round-trip float representation,
    /// so identical runs produce identical bytes.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(COLUMNS)?;
        let mut buf: Vec<String> = Vec::with_capacity(COLUMNS.len());
        for r in &self.records {
            buf.clear();
            buf.extend(r.csv_fields().iter().map(|v| format!("{v:?}")));
            out.write_record(&buf)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Parses a CSV written by [`TimeSeries::write_csv`] back into the
    /// logged columns.
    pub fn read_csv_columns<R: std::io::Read>(r: R) -> Result<Vec<[f64; 25]>> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let mut row = [0.0; 25];
            for (slot, field) in row.iter_mut().zip(rec.iter()) {
                *slot = field.parse().map_err(|_| {
                    crate::error::Error::Config(format!("bad number {field:?} in time series"))
                })?;
            }
            rows.push(row);
        }
        Ok(rows)
    }
}
