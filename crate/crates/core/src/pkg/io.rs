//! Line-delimited JSON storage for parameterized graphs.
//!
//! ```text
//! {"record":"header","format":"kgprobe-pkg","version":1}
//! {"record":"entity","id":"Q40","label":"Austria","aliases":["AT"],"description":"...","groups":{"country":"Austria"}}
//! {"record":"predicate","id":"P36","label":"capital","description":"..."}
//! {"record":"edge","id":"e00001","subject":"Q40","predicate":"P36","object":"Q1741","active":true,"alpha":1.0,"beta":1.0,"n_correct":0,"n_incorrect":0}
//! ```
//!
//! Beta parameters are written with the shortest representation that parses
//! back to the same `f64`, so a write/read cycle is exact. Edge parameters and
//! tallies may be omitted (raw triplet stores, supplemental answer files), in
//! which case they default to the prior and zero.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{BetaParams, Edge, EdgeId, Entity, EntityId, ParameterizedKG, PkgOptions, PredicateDef, PredicateId};
use crate::error::FormatError;

pub const PKG_FORMAT: &str = "kgprobe-pkg";
pub const PKG_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum PkgRecord {
    Header { format: String, version: u32 },
    Entity(Entity),
    Predicate(PredicateDef),
    Edge(EdgeRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub subject: EntityId,
    pub predicate: PredicateId,
    pub object: EntityId,
    #[serde(default = "default_true")]
    pub active: bool,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default)]
    pub n_correct: u64,
    #[serde(default)]
    pub n_incorrect: u64,
}

fn default_true() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

impl From<&Edge> for EdgeRecord {
    fn from(e: &Edge) -> Self {
        Self {
            id: e.id.clone(),
            subject: e.subject.clone(),
            predicate: e.predicate.clone(),
            object: e.object.clone(),
            active: e.active,
            alpha: e.params.alpha,
            beta: e.params.beta,
            n_correct: e.n_correct,
            n_incorrect: e.n_incorrect,
        }
    }
}

impl From<EdgeRecord> for Edge {
    fn from(r: EdgeRecord) -> Self {
        Edge {
            id: r.id,
            subject: r.subject,
            predicate: r.predicate,
            object: r.object,
            active: r.active,
            params: BetaParams {
                alpha: r.alpha,
                beta: r.beta,
            },
            n_correct: r.n_correct,
            n_incorrect: r.n_incorrect,
        }
    }
}

/// Writes the header, then entities, predicates and edges in id order.
pub fn write_pkg<W: Write>(pkg: &ParameterizedKG, mut out: W) -> Result<(), FormatError> {
    let mut line = |record: &PkgRecord| -> Result<(), FormatError> {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
        Ok(())
    };
    line(&PkgRecord::Header {
        format: PKG_FORMAT.to_owned(),
        version: PKG_FORMAT_VERSION,
    })?;
    for entity in pkg.entities() {
        line(&PkgRecord::Entity(entity.clone()))?;
    }
    for predicate in pkg.predicates() {
        line(&PkgRecord::Predicate(predicate.clone()))?;
    }
    for edge in pkg.edges() {
        line(&PkgRecord::Edge(edge.into()))?;
    }
    Ok(())
}

/// Reads records without requiring a header. Blank lines are skipped.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<PkgRecord>, FormatError> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| FormatError::Record {
            line: idx + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Reads a graph file; the first record must be a compatible header.
pub fn read_pkg<R: BufRead>(input: R, options: PkgOptions) -> Result<ParameterizedKG, FormatError> {
    let records = read_records(input)?;
    match records.first() {
        Some(PkgRecord::Header { format, version }) if format == PKG_FORMAT && *version == PKG_FORMAT_VERSION => {}
        Some(PkgRecord::Header { format, version }) => {
            return Err(FormatError::Header(format!("unsupported format {format} v{version}")))
        }
        _ => return Err(FormatError::Header("missing header record".into())),
    }
    let mut entities = Vec::new();
    let mut predicates = Vec::new();
    let mut edges = Vec::new();
    for record in records.into_iter().skip(1) {
        match record {
            PkgRecord::Header { .. } => return Err(FormatError::Header("repeated header record".into())),
            PkgRecord::Entity(e) => entities.push(e),
            PkgRecord::Predicate(p) => predicates.push(p),
            PkgRecord::Edge(e) => edges.push(Edge::from(e)),
        }
    }
    Ok(ParameterizedKG::from_parts(entities, predicates, edges, options)?)
}
