//! Result records and their sinks.
//!
//! Every command emits one record per computed quantity, as JSON lines on
//! standard output, optionally duplicated to a results file and summarized
//! to CSV. The JSON schema is flat and versioned through
//! [`ARTIFACT_VERSION`]; floating-point fields round-trip exactly (the
//! serializer prints shortest representations that parse back bit-equal).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Schema tag stamped into every record. Bump the suffix when the record
/// layout changes.
pub const ARTIFACT_VERSION: &str = "unidil-0.1.0/record-1";

/// One emitted result: a value, its error bound, and enough provenance to
/// reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    /// Subcommand that produced the record.
    pub command: String,
    /// Flags and derived quantities, stringified. Keys are sorted, so the
    /// serialized form is deterministic.
    pub params: BTreeMap<String, String>,
    /// The headline number.
    pub value: f64,
    /// Error bound attached to the value; its meaning depends on
    /// `bound_kind`.
    pub error_bound: f64,
    /// How to read the pair (value, error_bound): `certified_lower`,
    /// `certified_upper`, `two_sided`, `exact`, `measured`, or `sampled`.
    pub bound_kind: String,
    /// RNG seed, for commands that draw randomness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Wall-clock time of the whole command invocation.
    pub runtime_ms: u64,
    /// Schema tag, [`ARTIFACT_VERSION`].
    pub artifact_version: String,
    /// ISO-8601 emission time.
    pub timestamp: String,
}

impl ResultRecord {
    /// Serializes to one JSON line.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serialization cannot fail")
    }

    /// Parses a JSON line back into a record.
    pub fn from_json(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}

/// A record body before the dispatcher stamps command name, runtime, and
/// timestamp onto it.
#[derive(Clone, Debug)]
pub(crate) struct Draft {
    pub params: BTreeMap<String, String>,
    pub value: f64,
    pub error_bound: f64,
    pub bound_kind: String,
    pub seed: Option<u64>,
}

impl Draft {
    pub fn new(
        params: Params,
        value: f64,
        error_bound: f64,
        bound_kind: &str,
        seed: Option<u64>,
    ) -> Self {
        debug_assert!(value.is_finite() && error_bound.is_finite());
        Self { params: params.0, value, error_bound, bound_kind: bound_kind.into(), seed }
    }

    pub fn stamp(self, command: &str, runtime_ms: u64, timestamp: &str) -> ResultRecord {
        ResultRecord {
            command: command.into(),
            params: self.params,
            value: self.value,
            error_bound: self.error_bound,
            bound_kind: self.bound_kind,
            seed: self.seed,
            runtime_ms,
            artifact_version: ARTIFACT_VERSION.into(),
            timestamp: timestamp.into(),
        }
    }
}

/// Chainable builder for the stringified parameter map.
#[derive(Clone, Debug, Default)]
pub(crate) struct Params(BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: impl Display) -> Self {
        self.0.insert(key.into(), value.to_string());
        self
    }

    pub fn set_if(self, key: &str, value: Option<impl Display>) -> Self {
        match value {
            Some(v) => self.set(key, v),
            None => self,
        }
    }
}

/// Fan-out for finished records: stdout always, plus the optional JSON
/// results file and CSV summary.
pub(crate) struct RecordSink {
    jsonl: Option<BufWriter<File>>,
    csv: Option<csv::Writer<File>>,
    /// Cleared when a downstream pipe closes; file sinks keep going.
    stdout_open: bool,
}

const CSV_HEADER: [&str; 9] = [
    "command",
    "value",
    "error_bound",
    "bound_kind",
    "seed",
    "runtime_ms",
    "artifact_version",
    "timestamp",
    "params",
];

impl RecordSink {
    pub fn create(jsonl: Option<&Path>, csv: Option<&Path>) -> Result<Self, CliError> {
        let jsonl = jsonl
            .map(|p| {
                File::create(p)
                    .map(BufWriter::new)
                    .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", p.display())))
            })
            .transpose()?;
        let csv = csv
            .map(|p| {
                let mut w = csv::Writer::from_path(p)
                    .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", p.display())))?;
                w.write_record(CSV_HEADER)
                    .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?;
                Ok(w)
            })
            .transpose()?;
        Ok(Self { jsonl, csv, stdout_open: true })
    }

    pub fn emit(&mut self, record: &ResultRecord) -> Result<(), CliError> {
        let line = record.to_json();
        if self.stdout_open {
            if let Err(e) = writeln!(std::io::stdout(), "{line}") {
                if e.kind() == std::io::ErrorKind::BrokenPipe {
                    self.stdout_open = false;
                } else {
                    return Err(CliError::Usage(format!("stdout: {e}")));
                }
            }
        }
        if let Some(w) = &mut self.jsonl {
            writeln!(w, "{line}").map_err(|e| CliError::Usage(format!("results file: {e}")))?;
        }
        if let Some(w) = &mut self.csv {
            let params =
                serde_json::to_string(&record.params).expect("map serialization cannot fail");
            w.write_record([
                record.command.as_str(),
                &record.value.to_string(),
                &record.error_bound.to_string(),
                &record.bound_kind,
                &record.seed.map(|s| s.to_string()).unwrap_or_default(),
                &record.runtime_ms.to_string(),
                &record.artifact_version,
                &record.timestamp,
                &params,
            ])
            .map_err(|e| CliError::Usage(format!("csv summary: {e}")))?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), CliError> {
        if let Some(mut w) = self.jsonl {
            w.flush().map_err(|e| CliError::Usage(format!("results file: {e}")))?;
        }
        if let Some(mut w) = self.csv {
            w.flush().map_err(|e| CliError::Usage(format!("csv summary: {e}")))?;
        }
        Ok(())
    }
}

/// The dispatcher's emission timestamp, shared by all records of one
/// invocation.
pub(crate) fn now_iso8601() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}
