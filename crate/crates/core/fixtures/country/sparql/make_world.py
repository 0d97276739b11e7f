"""Regenerates world.json, the frozen store behind the offline endpoint."""
import json
import random

rng = random.Random(20231016)

PREDICATES = {
    "P17": ("country", "sovereign state that this item is in"),
    "P30": ("continent", "continent of which the subject is a part"),
    "P36": ("capital", "seat of government of a country or region"),
    "P37": ("official language", "language officially used"),
    "P38": ("currency", "currency used by the item"),
    "P35": ("head of state", "official with the highest formal authority"),
    "P6": ("head of government", "head of the executive power"),
    "P206": ("located in or next to body of water", "sea, lake or river"),
    "P1376": ("capital of", "country or region whose capital is the subject"),
    "P19": ("place of birth", "most specific known birth location"),
    "P27": ("country of citizenship", "the object is a country that recognizes the subject"),
    "P47": ("shares border with", "countries or regions with a common border"),
    "P150": ("contains the administrative territorial entity", "direct subdivisions"),
    "P131": ("located in the administrative territorial entity", "the item is located here"),
    "P463": ("member of", "organization or club the subject belongs to"),
    "P530": ("diplomatic relation", "diplomatic relations of the country"),
    "P361": ("part of", "object of which the subject is a part"),
}
OPEN = ["P17", "P30", "P36", "P37", "P38", "P35", "P6", "P206", "P1376", "P19", "P27"]
BLOCKED = ["P47", "P150", "P131", "P463", "P530", "P361"]

entities = {}
next_id = [1000]


def new_entity(label, kind, aliases=None, languages=None):
    qid = f"Q{next_id[0]}"
    next_id[0] += 1
    if aliases is None:
        aliases = [f"{label} ({kind})"] if rng.random() < 0.8 else []
    if languages is None:
        languages = rng.choice([1, 3, 12, 40, 90, 150])
    entities[qid] = {"label": label, "description": f"{kind} in the fixture world",
                     "aliases": aliases, "languages": languages}
    return qid


countries = [new_entity(f"Country {c}", "country", [f"{c}land"], 200) for c in "ABCDEF"]
continent = new_entity("Continent North", "continent", ["The North"], 180)
cities = [new_entity(f"City {i:02}", "city") for i in range(24)]
regions = [new_entity(f"Region {i:02}", "region") for i in range(12)]
people = [new_entity(f"Person {i:02}", "human") for i in range(18)]
languages = [new_entity(f"Language {i}", "language") for i in range(4)]
currencies = [new_entity(f"Currency {i}", "currency") for i in range(3)]
waters = [new_entity(f"Sea {i}", "body of water") for i in range(3)]
organisations = [new_entity(f"Union {i}", "organisation") for i in range(2)]
# A chain far from the seeds: only the first links are within three hops.
chain = [new_entity(f"Outpost {i}", "settlement", [f"Post {i}"], 50) for i in range(6)]

# Incomplete records.
entities[cities[5]]["description"] = ""
entities[people[3]]["description"] = ""
entities[cities[7]]["label"] = ""

triples = set()


def add(s, p, o):
    if s != o:
        triples.add((s, p, o))


for i, c in enumerate(countries):
    add(c, "P30", continent)
    add(c, "P36", cities[i])
    add(cities[i], "P1376", c)
    add(c, "P37", languages[i % len(languages)])
    add(c, "P38", currencies[i % len(currencies)])
    add(c, "P35", people[i])
    add(c, "P6", people[i + 6])
    add(c, "P463", organisations[i % 2])
    add(c, "P530", countries[(i + 1) % len(countries)])
    add(c, "P47", countries[(i + 2) % len(countries)])
    for r in regions[2 * i:2 * i + 2]:
        add(c, "P150", r)
        add(r, "P131", c)
        add(r, "P17", c)
for i, city in enumerate(cities):
    add(city, "P17", countries[i % len(countries)])
    if rng.random() < 0.5:
        add(city, "P131", regions[i % len(regions)])
    if rng.random() < 0.4:
        add(city, "P206", waters[i % len(waters)])
for i, p in enumerate(people):
    add(p, "P27", countries[i % len(countries)])
    add(p, "P19", cities[rng.randrange(len(cities))])
for w in waters:
    add(w, "P361", continent)
add(chain[0], "P17", countries[5])
for a, b in zip(chain, chain[1:]):
    add(b, "P131", a)

# A predicate with an empty label never surfaces in walk rows.
PREDICATES["P9999"] = ("", "predicate without an English label")
add(cities[0], "P9999", cities[1])

world = {
    "entities": entities,
    "predicates": {p: {"label": l, "description": d} for p, (l, d) in PREDICATES.items()},
    "triples": sorted(triples),
}
with open("world.json", "w") as f:
    json.dump(world, f, indent=1, sort_keys=True)
    f.write("\n")
with open("seeds.txt", "w") as f:
    f.write("# seed countries\n")
    for c in countries[:2]:
        f.write(f"{c}  {entities[c]['label']}\n")
