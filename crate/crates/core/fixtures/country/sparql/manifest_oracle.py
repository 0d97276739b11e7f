"""Independent recomputation of the build counts for this fixture.

Assumes the default walk settings (3 steps, both directions, LIMIT 1000,
50 ids per query) and default filters (alias required, at least two label
languages, at least one mention). Checks that LIMIT never truncates, so the
result does not depend on row order.
"""
import json
import math
import sys

world = json.load(open("world.json"))
ents, preds = world["entities"], world["predicates"]
triples = [tuple(t) for t in world["triples"]]
seeds = []
for line in open("seeds.txt"):
    tok = line.split("#")[0].split()
    if tok and tok[0] not in seeds:
        seeds.append(tok[0])
blocked = set()
for line in open("../blocklist.txt"):
    tok = line.split("#")[0].split()
    if tok:
        blocked.add(tok[0])

STEPS, LIMIT, CHUNK = 3, 1000, 50


def complete(s, p, o):
    if s not in ents or o not in ents or p not in preds:
        return None
    if not ents[s]["description"] or not ents[o]["description"]:
        return None
    if not preds[p]["label"] or not preds[p]["description"]:
        return None
    return bool(ents[s]["label"]) and bool(ents[o]["label"])


seen = set(seeds)
frontier = list(seeds)
queries = bindings = skipped = 0
store = set()
for step in range(STEPS):
    new = set()
    for direction in ("fwd", "bwd"):
        queries += math.ceil(len(frontier) / CHUNK)
        anchors = set(frontier)
        rows = [t for t in triples if (t[0] if direction == "fwd" else t[2]) in anchors]
        rows = [(t, complete(*t)) for t in rows]
        rows = [(t, ok) for t, ok in rows if ok is not None]
        assert len(rows) <= LIMIT
        for t, ok in rows:
            if not ok:
                skipped += 1
                continue
            bindings += 1
            store.add(t)
            reached = t[2] if direction == "fwd" else t[0]
            if reached not in seen:
                seen.add(reached)
                new.add(reached)
    if not new:
        break
    frontier = sorted(new)

crawled = {x for s, _, o in store for x in (s, o)}
mentions = {e: 0 for e in crawled}
for s, _, o in store:
    mentions[s] += 1
    if o != s:
        mentions[o] += 1


def keep(e):
    return bool(ents[e]["aliases"]) and ents[e]["languages"] >= 2 and mentions[e] >= 1


kept = {t for t in store if keep(t[0]) and keep(t[2])}
report = {
    "seeds": len(seeds),
    "queries": queries,
    "bindings": bindings,
    "skipped_rows": skipped,
    "crawled_entities": len(crawled),
    "crawled_triplets": len(store),
    "entities": len({x for s, _, o in kept for x in (s, o)}),
    "predicates": len({p for _, p, _ in kept}),
    "edges": len(kept),
    "active_edges": sum(p not in blocked for _, p, _ in kept),
    "dead_edges": sum(p in blocked for _, p, _ in kept),
}
json.dump(report, sys.stdout, indent=2)
print()
