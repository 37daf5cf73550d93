//! JSON-lines run trace: one run record followed by one record per iteration.

use std::io::{self, Write};

use serde::Serialize;

use super::engine::PmcConfig;
use super::weights::IterationDiagnostics;

/// Order in which each particle's components are drawn.
pub const PROPOSAL_ORDER: [&str; 4] = ["z", "location", "G", "psi"];

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record<'a> {
    Run {
        seed: u64,
        model: &'a str,
        proposal_order: [&'static str; 4],
        config: &'a PmcConfig,
    },
    Iteration(&'a IterationDiagnostics),
}

pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    /// Writes the run record.
    pub fn new(mut out: W, seed: u64, model: &str, config: &PmcConfig) -> io::Result<Self> {
        let rec = Record::Run {
            seed,
            model,
            proposal_order: PROPOSAL_ORDER,
            config,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
        Ok(Self { out })
    }

    pub fn iteration(&mut self, diag: &IterationDiagnostics) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, &Record::Iteration(diag))?;
        self.out.write_all(b"\n")
    }

    pub fn into_inner(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
