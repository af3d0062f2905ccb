use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;
use zml_core::Provenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One JSON object per line.
    Json,
    /// CSV with a header row.
    Csv,
}

/// `|zeta(1/2 + it)|^2` at one height.
#[derive(Debug, Serialize)]
pub struct ZetaRow {
    pub t: f64,
    pub value: f64,
    pub err: f64,
    pub provenance: Provenance,
}

/// A real scalar result.
#[derive(Debug, Serialize)]
pub struct ScalarRow {
    pub quantity: String,
    pub k: u32,
    pub at: f64,
    pub value: f64,
    pub err: f64,
    pub provenance: Provenance,
}

/// A complex result such as `Z_k(s)`.
#[derive(Debug, Serialize)]
pub struct ComplexRow {
    pub quantity: String,
    pub k: u32,
    pub s_re: f64,
    pub s_im: f64,
    pub method: String,
    pub value_re: f64,
    pub value_im: f64,
    pub err: f64,
    pub provenance: Provenance,
}

/// One line of an identity check: a side, the defect, or a reference value.
#[derive(Debug, Serialize)]
pub struct VerifyRow {
    pub identity: String,
    pub case: usize,
    pub quantity: String,
    pub value_re: f64,
    pub value_im: f64,
    pub err: f64,
    pub provenance: Provenance,
    pub holds: Option<bool>,
}

impl VerifyRow {
    pub fn new(
        identity: &str,
        case: usize,
        quantity: &str,
        value: Complex64,
        err: f64,
        provenance: Provenance,
    ) -> VerifyRow {
        VerifyRow {
            identity: identity.to_string(),
            case,
            quantity: quantity.to_string(),
            value_re: value.re,
            value_im: value.im,
            err,
            provenance,
            holds: None,
        }
    }

    pub fn verdict(mut self, holds: bool) -> VerifyRow {
        self.holds = Some(holds);
        self
    }
}

pub fn emit<T: Serialize, W: Write>(rows: &[T], format: Format, out: W) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = std::io::BufWriter::new(out);
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                writeln!(out)?;
            }
            out.flush()?;
        }
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(out);
            for row in rows {
                wtr.serialize(row)?;
            }
            wtr.flush()?;
        }
    }
    Ok(())
}
