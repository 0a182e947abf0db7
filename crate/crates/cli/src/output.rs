//! CSV and JSON-lines writers.

use std::io::Write;

use serde::Serialize;

use crate::cli::Format;
use crate::config::RunConfig;
use crate::run::Row;

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    row: &'a Row,
    config: &'a RunConfig,
}

pub fn write_rows(out: &mut dyn Write, format: Format, cfg: &RunConfig, rows: &[Row]) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            if rows.is_empty() {
                w.write_record([
                    "gate_time_ns",
                    "method",
                    "leakage",
                    "peak_frequency_rad_per_ns",
                    "residual",
                    "statistical_error",
                    "wall_time_ms",
                    "status",
                ])?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            for row in rows {
                serde_json::to_writer(&mut *out, &JsonRow { row, config: cfg })?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
