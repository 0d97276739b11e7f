use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{RunConfig, Verdict, VerificationMode};
use crate::error::FormatError;
use crate::pkg::EdgeId;
use crate::question::Question;

pub const LOG_FORMAT: &str = "kgprobe-log/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub run_id: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamRecord {
    pub seq: u64,
    pub iteration: u64,
    pub edge_id: EdgeId,
    pub question: Question,
    pub raw_response: String,
    pub verdict: Verdict,
    pub verification_mode: VerificationMode,
    /// Set when the item was asked in a different form than first drawn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Unix seconds, only when wall-clock stamping is enabled.
    pub timestamp: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipStage {
    Generation,
    Judge,
}

/// An edge that was selected but produced no signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub iteration: u64,
    pub edge_id: EdgeId,
    pub stage: SkipStage,
    pub error: String,
    pub timestamp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortRecord {
    pub iteration: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Header(LogHeader),
    Exam(ExamRecord),
    Skip(SkipRecord),
    Abort(AbortRecord),
}

impl LogRecord {
    pub fn as_exam(&self) -> Option<&ExamRecord> {
        match self {
            LogRecord::Exam(r) => Some(r),
            _ => None,
        }
    }
}

/// Destination for interaction records. `flush` is called at every batch
/// barrier so a tailing reader sees whole batches.
pub trait LogSink {
    fn write(&mut self, record: &LogRecord) -> io::Result<()>;

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl LogSink for Vec<LogRecord> {
    fn write(&mut self, record: &LogRecord) -> io::Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NullLog;

impl LogSink for NullLog {
    fn write(&mut self, _: &LogRecord) -> io::Result<()> {
        Ok(())
    }
}

/// One JSON object per line.
#[derive(Debug)]
pub struct JsonlLog<W: Write> {
    out: W,
}

impl<W: Write> JsonlLog<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> LogSink for JsonlLog<W> {
    fn write(&mut self, record: &LogRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")
    }

    fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub fn read_log<R: BufRead>(input: R) -> Result<Vec<LogRecord>, FormatError> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LogRecord =
            serde_json::from_str(&line).map_err(|source| FormatError::Record { line: idx + 1, source })?;
        if idx == 0 {
            match &record {
                LogRecord::Header(h) if h.format == LOG_FORMAT => {}
                LogRecord::Header(h) => return Err(FormatError::Header(format!("unsupported log format `{}`", h.format))),
                _ => return Err(FormatError::Header("log must start with a header record".into())),
            }
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(FormatError::Header("empty log".into()));
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exam::VerdictReason;
    use crate::question::{GenerationMode, QuestionKind};

    fn sample() -> Vec<LogRecord> {
        vec![
            LogRecord::Header(LogHeader {
                format: LOG_FORMAT.into(),
                run_id: "abc".into(),
                config: RunConfig::default(),
            }),
            LogRecord::Exam(ExamRecord {
                seq: 0,
                iteration: 0,
                edge_id: "e".into(),
                question: Question {
                    edge_id: "e".into(),
                    kind: QuestionKind::YesNo {
                        expected_answer: true,
                        presented_object: "B".into(),
                    },
                    text: "Is B the p of A?".into(),
                    generation_mode: GenerationMode::Template,
                },
                raw_response: "Yes.".into(),
                verdict: Verdict {
                    correct: true,
                    reason: VerdictReason::Matched,
                },
                verification_mode: VerificationMode::FirstToken,
                note: None,
                timestamp: None,
            }),
            LogRecord::Skip(SkipRecord {
                iteration: 0,
                edge_id: "f".into(),
                stage: SkipStage::Judge,
                error: "down".into(),
                timestamp: None,
            }),
        ]
    }

    #[test]
    fn round_trip() {
        let mut sink = JsonlLog::new(Vec::new());
        for r in sample() {
            sink.write(&r).unwrap();
        }
        let bytes = sink.into_inner();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.lines().next().unwrap().starts_with(r#"{"type":"header","format":"kgprobe-log/1""#));
        assert!(text.contains(r#""verification_mode":"first-token""#));
        assert_eq!(read_log(bytes.as_slice()).unwrap(), sample());
    }

    #[test]
    fn header_is_required() {
        let mut sink = JsonlLog::new(Vec::new());
        sink.write(&sample()[1]).unwrap();
        assert!(matches!(read_log(sink.into_inner().as_slice()), Err(FormatError::Header(_))));
    }

    #[test]
    fn bad_line_is_located() {
        let mut sink = JsonlLog::new(Vec::new());
        sink.write(&sample()[0]).unwrap();
        let mut bytes = sink.into_inner();
        bytes.extend_from_slice(b"{not json}\n");
        assert!(matches!(read_log(bytes.as_slice()), Err(FormatError::Record { line: 2, .. })));
    }
}
