use std::collections::BTreeMap;

use super::{FilterConfig, RawStore};
use crate::pkg::EntityId;

/// Incident-triplet count of every entity in the store.
pub fn mention_frequency(store: &RawStore) -> BTreeMap<EntityId, u64> {
    let mut freq: BTreeMap<EntityId, u64> = store.entities.keys().map(|id| (id.clone(), 0)).collect();
    for (s, _, o) in &store.triplets {
        *freq.entry(s.clone()).or_default() += 1;
        if o != s {
            *freq.entry(o.clone()).or_default() += 1;
        }
    }
    freq
}

/// Removes entities failing any enabled threshold, their triplets, and
/// anything left unreferenced. Entities missing from a count map count as 0.
pub fn apply_entity_filters(
    store: &RawStore,
    filters: &FilterConfig,
    language_counts: &BTreeMap<EntityId, u64>,
    mention_frequency: &BTreeMap<EntityId, u64>,
) -> RawStore {
    let keep = |id: &EntityId| {
        let Some(entity) = store.entities.get(id) else {
            return false;
        };
        if filters.require_alias && entity.primary_alias().is_none() {
            return false;
        }
        if language_counts.get(id).copied().unwrap_or(0) < filters.min_language_count {
            return false;
        }
        mention_frequency.get(id).copied().unwrap_or(0) >= filters.min_mention_frequency
    };
    let mut out = store.clone();
    out.triplets.retain(|(s, _, o)| keep(s) && keep(o));
    out.prune();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::RawBinding;

    fn binding(s: &str, o: &str) -> RawBinding {
        RawBinding {
            subject: s.into(),
            subject_label: s.into(),
            subject_desc: "d".into(),
            predicate: "P1".into(),
            predicate_label: "p".into(),
            predicate_desc: "d".into(),
            object: o.into(),
            object_label: o.into(),
            object_desc: "d".into(),
        }
    }

    fn store() -> RawStore {
        let mut s = RawStore::default();
        assert!(s.insert(&binding("A", "B")));
        assert!(!s.insert(&binding("A", "B")));
        s.insert(&binding("A", "C"));
        s.insert(&binding("B", "C"));
        for (id, alias) in [("A", Some("a")), ("B", Some("b")), ("C", None)] {
            if let Some(alias) = alias {
                s.entities.get_mut(&EntityId::from(id)).unwrap().aliases.push(alias.into());
            }
        }
        s
    }

    fn langs(a: u64, b: u64, c: u64) -> BTreeMap<EntityId, u64> {
        BTreeMap::from([("A".into(), a), ("B".into(), b), ("C".into(), c)])
    }

    fn identity() -> FilterConfig {
        FilterConfig {
            min_language_count: 0,
            require_alias: false,
            min_mention_frequency: 0,
            ..FilterConfig::default()
        }
    }

    #[test]
    fn identity_filter_changes_nothing() {
        let s = store();
        assert_eq!(apply_entity_filters(&s, &identity(), &BTreeMap::new(), &BTreeMap::new()), s);
    }

    #[test]
    fn alias_requirement_drops_entity_and_edges() {
        let s = store();
        let f = FilterConfig {
            require_alias: true,
            ..identity()
        };
        let out = apply_entity_filters(&s, &f, &langs(5, 5, 5), &mention_frequency(&s));
        assert!(!out.entities.contains_key(&EntityId::from("C")));
        assert_eq!(out.triplets.len(), 1);
    }

    #[test]
    fn language_threshold() {
        let s = store();
        let f = FilterConfig {
            min_language_count: 2,
            ..identity()
        };
        let out = apply_entity_filters(&s, &f, &langs(3, 1, 3), &mention_frequency(&s));
        assert!(!out.entities.contains_key(&EntityId::from("B")));
        assert_eq!(out.triplets.len(), 1);
    }

    #[test]
    fn mention_counts() {
        let f = mention_frequency(&store());
        assert_eq!(f[&EntityId::from("A")], 2);
        assert_eq!(f[&EntityId::from("C")], 2);
    }
}
