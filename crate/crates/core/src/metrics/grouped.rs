use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{EdgeOutcome, MetricError, Rates, Tally};
use crate::pkg::{Edge, EdgeId, GroupValue, ParameterizedKG};

pub const UNGROUPED: &str = "ungrouped";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Subject,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dimension {
    Predicate,
    /// A key of the entities' group map, read from the chosen endpoint.
    Group { key: String, side: Side },
}

impl Dimension {
    /// `predicate`, or any group key present on at least one entity.
    pub fn resolve(name: &str, side: Side, pkg: &ParameterizedKG) -> Result<Self, MetricError> {
        if name == "predicate" {
            return Ok(Dimension::Predicate);
        }
        if pkg.entities().any(|e| e.groups.contains_key(name)) {
            Ok(Dimension::Group {
                key: name.to_string(),
                side,
            })
        } else {
            Err(MetricError::UnknownDimension(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Dimension::Predicate => "predicate",
            Dimension::Group { key, .. } => key,
        }
    }

    pub(crate) fn key_of(&self, pkg: &ParameterizedKG, edge: &Edge) -> Option<GroupValue> {
        match self {
            Dimension::Predicate => Some(GroupValue::Text(edge.predicate.to_string())),
            Dimension::Group { key, side } => {
                let id = match side {
                    Side::Subject => &edge.subject,
                    Side::Object => &edge.object,
                };
                pkg.entity(id).and_then(|e| e.groups.get(key)).cloned()
            }
        }
    }

    pub(crate) fn label_of(&self, pkg: &ParameterizedKG, value: &GroupValue) -> Option<String> {
        match (self, value) {
            (Dimension::Predicate, GroupValue::Text(id)) => pkg.predicate(&id.as_str().into()).map(|p| p.label.clone()),
            _ => None,
        }
    }
}

/// Row order: group values in natural order, the ungrouped row last.
pub(crate) fn row_order(a: &Option<GroupValue>, b: &Option<GroupValue>) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => a.natural_cmp(b),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

pub(crate) fn tally_map(outcomes: &[EdgeOutcome]) -> HashMap<&EdgeId, Tally> {
    outcomes.iter().map(|o| (&o.edge_id, o.tally)).collect()
}

/// Edges that belong in a report: everything active plus anything examined.
pub(crate) fn reportable<'a>(
    pkg: &'a ParameterizedKG,
    tallies: &'a HashMap<&EdgeId, Tally>,
) -> impl Iterator<Item = (&'a Edge, Tally)> + 'a {
    pkg.edges().filter_map(move |e| {
        let t = tallies.get(&e.id).copied().unwrap_or(Tally {
            n_correct: 0,
            n_incorrect: 0,
        });
        (e.active || t.examined()).then_some((e, t))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub group: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub win_rate: Option<f64>,
    pub zero_sense_rate: Option<f64>,
    pub examined: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupedReport {
    pub dimension: String,
    pub rows: Vec<GroupRow>,
}

impl GroupedReport {
    pub fn examined(&self) -> usize {
        self.rows.iter().map(|r| r.examined).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "NA".into());
        w.write_record(["group", "label", "win_rate", "zero_sense_rate", "examined", "total"])
            .expect("in-memory csv");
        for r in &self.rows {
            w.write_record([
                r.group.clone(),
                r.label.clone().unwrap_or_default(),
                fmt(r.win_rate),
                fmt(r.zero_sense_rate),
                r.examined.to_string(),
                r.total.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

/// Partitions edges by `dimension` and computes both rates per part.
/// Rows with no examined edge carry no rates.
pub fn group_metrics(pkg: &ParameterizedKG, outcomes: &[EdgeOutcome], dimension: &Dimension) -> GroupedReport {
    let tallies = tally_map(outcomes);
    let mut parts: BTreeMap<String, (Option<GroupValue>, Vec<Tally>)> = BTreeMap::new();
    for (edge, tally) in reportable(pkg, &tallies) {
        let key = dimension.key_of(pkg, edge);
        let name = key.as_ref().map(|k| k.to_string()).unwrap_or_else(|| UNGROUPED.into());
        parts.entry(name).or_insert_with(|| (key, Vec::new())).1.push(tally);
    }
    let mut parts: Vec<(Option<GroupValue>, Vec<Tally>)> = parts.into_values().collect();
    parts.sort_by(|a, b| row_order(&a.0, &b.0));
    let rows = parts
        .into_iter()
        .map(|(key, tallies)| {
            let rates = Rates::from_tallies(&tallies);
            GroupRow {
                group: key.as_ref().map(|k| k.to_string()).unwrap_or_else(|| UNGROUPED.into()),
                label: key.as_ref().and_then(|k| dimension.label_of(pkg, k)),
                win_rate: rates.win_rate().ok(),
                zero_sense_rate: rates.zero_sense_rate().ok(),
                examined: rates.examined,
                total: tallies.len(),
            }
        })
        .collect();
    GroupedReport {
        dimension: dimension.name().to_string(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{outcomes_from_pkg, win_rate, zero_sense_rate};
    use crate::pkg::{init_pkg, EdgeSpec, Entity, GraphSource, PredicateDef};

    fn movies() -> ParameterizedKG {
        init_pkg(GraphSource {
            entities: vec![
                Entity::new("m1", "Movie one").with_group("year", 2018),
                Entity::new("m2", "Movie two").with_group("year", 2018),
                Entity::new("m3", "Movie three").with_group("year", 2019),
                Entity::new("d", "Director"),
            ],
            predicates: vec![PredicateDef::new("dir", "director")],
            edges: vec![
                EdgeSpec::new("e1", "m1", "dir", "d"),
                EdgeSpec::new("e2", "m2", "dir", "d"),
                EdgeSpec::new("e3", "m3", "dir", "d"),
                EdgeSpec::new("e4", "d", "dir", "m1"),
            ],
        })
        .unwrap()
    }

    fn outcomes() -> Vec<EdgeOutcome> {
        vec![
            EdgeOutcome::new("e1", 0, 2),
            EdgeOutcome::new("e2", 0, 1),
            EdgeOutcome::new("e3", 2, 0),
            EdgeOutcome::new("e4", 1, 0),
        ]
    }

    #[test]
    fn rows_follow_the_year() {
        let pkg = movies();
        let dim = Dimension::resolve("year", Side::Subject, &pkg).unwrap();
        let report = group_metrics(&pkg, &outcomes(), &dim);
        let groups: Vec<&str> = report.rows.iter().map(|r| r.group.as_str()).collect();
        assert_eq!(groups, ["2018", "2019", UNGROUPED]);
        assert_eq!(report.rows[0].zero_sense_rate, Some(1.0));
        assert_eq!(report.rows[1].zero_sense_rate, Some(0.0));
        assert_eq!(report.rows[2].examined, 1);
        assert_eq!(report.examined(), 4);
    }

    #[test]
    fn single_predicate_matches_global() {
        let pkg = movies();
        let o = outcomes();
        let report = group_metrics(&pkg, &o, &Dimension::Predicate);
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].label.as_deref(), Some("director"));
        assert_eq!(report.rows[0].win_rate, Some(win_rate(&o).unwrap()));
        assert_eq!(report.rows[0].zero_sense_rate, Some(zero_sense_rate(&o).unwrap()));
    }

    #[test]
    fn unknown_dimension_is_an_error() {
        let pkg = movies();
        assert_eq!(
            Dimension::resolve("genre", Side::Subject, &pkg),
            Err(MetricError::UnknownDimension("genre".into()))
        );
    }

    #[test]
    fn unexamined_group_has_no_rates() {
        let pkg = movies();
        let dim = Dimension::resolve("year", Side::Subject, &pkg).unwrap();
        let report = group_metrics(&pkg, &outcomes_from_pkg(&pkg), &dim);
        assert!(report.rows.iter().all(|r| r.win_rate.is_none() && r.examined == 0));
        assert!(report.to_csv().contains("2018,,NA,NA,0,2"));
    }
}
