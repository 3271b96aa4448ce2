use std::io::Write;

use clap::ValueEnum;
use modenergy::{Algorithm, WideInt};
use serde::{Deserialize, Serialize};

use crate::commands::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// One evaluated `E_m(n)`. Values travel as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub m: u64,
    pub n: u64,
    pub value: String,
    #[serde(default)]
    pub algo: Option<Algorithm>,
    #[serde(default)]
    pub elapsed_ns: Option<u64>,
}

impl OutputRecord {
    pub fn new(m: u64, n: u64, value: WideInt) -> Self {
        OutputRecord { m, n, value: value.to_string(), algo: None, elapsed_ns: None }
    }
}

pub fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(out: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}
