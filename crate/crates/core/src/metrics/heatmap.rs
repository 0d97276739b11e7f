use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::grouped::{reportable, row_order, tally_map};
use super::{Dimension, EdgeOutcome, Rates, Tally, UNGROUPED};
use crate::pkg::{GroupValue, ParameterizedKG, PredicateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    ZeroSense,
    Win,
}

impl std::str::FromStr for Statistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero_sense" | "zero-sense" => Ok(Statistic::ZeroSense),
            "win" => Ok(Statistic::Win),
            other => Err(format!("unknown statistic `{other}` (expected zero_sense or win)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub value: f64,
    pub count: usize,
    /// Share of the group's examined edges that fall in this cell.
    pub share: f64,
}

/// Group-by-predicate table over examined edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub dimension: String,
    pub statistic: Statistic,
    pub groups: Vec<String>,
    pub predicates: Vec<PredicateId>,
    /// `cells[g][p]`; `None` where the group has no examined edge for the predicate.
    pub cells: Vec<Vec<Option<HeatmapCell>>>,
}

pub fn heatmap(pkg: &ParameterizedKG, outcomes: &[EdgeOutcome], dimension: &Dimension, statistic: Statistic) -> Heatmap {
    let tallies = tally_map(outcomes);
    let mut by_group: BTreeMap<String, (Option<GroupValue>, BTreeMap<PredicateId, Vec<Tally>>)> = BTreeMap::new();
    let mut predicates = BTreeSet::new();
    for (edge, tally) in reportable(pkg, &tallies) {
        if !tally.examined() {
            continue;
        }
        let key = dimension.key_of(pkg, edge);
        let name = key.as_ref().map(|k| k.to_string()).unwrap_or_else(|| UNGROUPED.into());
        predicates.insert(edge.predicate.clone());
        by_group
            .entry(name)
            .or_insert_with(|| (key, BTreeMap::new()))
            .1
            .entry(edge.predicate.clone())
            .or_default()
            .push(tally);
    }
    let mut rows: Vec<(String, Option<GroupValue>, BTreeMap<PredicateId, Vec<Tally>>)> =
        by_group.into_iter().map(|(name, (key, cells))| (name, key, cells)).collect();
    rows.sort_by(|a, b| row_order(&a.1, &b.1));
    let predicates: Vec<PredicateId> = predicates.into_iter().collect();

    let mut groups = Vec::with_capacity(rows.len());
    let mut cells = Vec::with_capacity(rows.len());
    for (name, _, per_pred) in rows {
        let total: usize = per_pred.values().map(Vec::len).sum();
        let row = predicates
            .iter()
            .map(|p| {
                per_pred.get(p).map(|ts| {
                    let rates = Rates::from_tallies(ts);
                    let value = match statistic {
                        Statistic::ZeroSense => rates.zero_sense_rate(),
                        Statistic::Win => rates.win_rate(),
                    }
                    .expect("cell holds examined edges");
                    HeatmapCell {
                        value,
                        count: ts.len(),
                        share: ts.len() as f64 / total as f64,
                    }
                })
            })
            .collect();
        groups.push(name);
        cells.push(row);
    }
    Heatmap {
        dimension: dimension.name().to_string(),
        statistic,
        groups,
        predicates,
        cells,
    }
}

impl Heatmap {
    /// Wide CSV: one row per group, one column per predicate, each cell
    /// `value;count;share` or `NA`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.dimension.clone()];
        header.extend(self.predicates.iter().map(|p| p.to_string()));
        w.write_record(&header).expect("in-memory csv");
        for (group, row) in self.groups.iter().zip(&self.cells) {
            let mut record = vec![group.clone()];
            record.extend(row.iter().map(|c| match c {
                Some(c) => format!("{:.6};{};{:.6}", c.value, c.count, c.share),
                None => "NA".to_string(),
            }));
            w.write_record(&record).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Side;
    use crate::pkg::{init_pkg, EdgeSpec, Entity, GraphSource, PredicateDef};

    fn world() -> ParameterizedKG {
        init_pkg(GraphSource {
            entities: vec![
                Entity::new("fr", "France").with_group("region", "europe"),
                Entity::new("de", "Germany").with_group("region", "europe"),
                Entity::new("x", "x"),
                Entity::new("y", "y"),
            ],
            predicates: vec![PredicateDef::new("cap", "capital"), PredicateDef::new("cur", "currency")],
            edges: vec![
                EdgeSpec::new("e1", "fr", "cap", "x"),
                EdgeSpec::new("e2", "fr", "cap", "y"),
                EdgeSpec::new("e3", "de", "cap", "x"),
                EdgeSpec::new("e4", "de", "cap", "y"),
                EdgeSpec::new("e5", "fr", "cur", "x"),
            ],
        })
        .unwrap()
    }

    #[test]
    fn single_cell_definition() {
        let pkg = world();
        let outcomes = vec![
            EdgeOutcome::new("e1", 0, 1),
            EdgeOutcome::new("e2", 0, 2),
            EdgeOutcome::new("e3", 1, 0),
            EdgeOutcome::new("e4", 3, 1),
        ];
        let dim = Dimension::resolve("region", Side::Subject, &pkg).unwrap();
        let h = heatmap(&pkg, &outcomes, &dim, Statistic::ZeroSense);
        assert_eq!(h.groups, ["europe"]);
        assert_eq!(h.predicates, [PredicateId::from("cap")]);
        assert_eq!(
            h.cells[0][0],
            Some(HeatmapCell {
                value: 0.5,
                count: 4,
                share: 1.0
            })
        );
    }

    #[test]
    fn missing_cell_is_marked_not_zero() {
        let pkg = world();
        let outcomes = vec![EdgeOutcome::new("e1", 0, 1), EdgeOutcome::new("e5", 1, 0), EdgeOutcome::new("e3", 1, 0)];
        let dim = Dimension::Predicate;
        let h = heatmap(&pkg, &outcomes, &dim, Statistic::Win);
        let csv = h.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "predicate,cap,cur");
        assert!(csv.contains("cap,0.500000;2;1.000000,NA"));
    }

    #[test]
    fn shares_sum_to_one_per_row() {
        let pkg = world();
        let outcomes = vec![EdgeOutcome::new("e1", 0, 1), EdgeOutcome::new("e5", 1, 0), EdgeOutcome::new("e3", 1, 0)];
        let dim = Dimension::resolve("region", Side::Subject, &pkg).unwrap();
        let h = heatmap(&pkg, &outcomes, &dim, Statistic::Win);
        for row in &h.cells {
            let sum: f64 = row.iter().flatten().map(|c| c.share).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
