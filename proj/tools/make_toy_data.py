#!/usr/bin/env python3
"""Regenerates the bundled two-topic toy corpus in data/toy/.

Concept vectors are seeded from the label so reruns produce identical files.
Each sentence vector is the mean of the vectors of the concepts it is written
around, plus a little noise, which gives the aligner something real to find.
"""

import hashlib
import itertools
import json
import pathlib

import numpy as np

DIM = 16
OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "toy"


def seeded(label, scale=1.0):
    seed = int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")
    return np.random.default_rng(seed).normal(0.0, scale, DIM)


TOPICS = [
    {
        "id": "hunting",
        "question": "Should animal hunting be banned?",
        "concepts": ["hunting", "hunt", "trophy hunting", "hunting for food", "eating meat", "sustainability",
                     "animal cruelty", "wildlife", "conservation", "population control", "tradition", "animal",
                     "deer", "gun", "suffering", "ecosystem"],
        "edges": [
            ("IsA", "trophy hunting", "hunting"), ("IsA", "hunting for food", "hunting"),
            ("RelatedTo", "hunt", "hunting"), ("RelatedTo", "hunting for food", "eating meat"),
            ("RelatedTo", "trophy hunting", "animal cruelty"), ("RelatedTo", "animal cruelty", "suffering"),
            ("RelatedTo", "suffering", "animal"), ("IsA", "deer", "animal"), ("RelatedTo", "wildlife", "animal"),
            ("RelatedTo", "wildlife", "ecosystem"), ("RelatedTo", "ecosystem", "sustainability"),
            ("RelatedTo", "conservation", "sustainability"), ("RelatedTo", "conservation", "wildlife"),
            ("RelatedTo", "population control", "deer"), ("RelatedTo", "population control", "ecosystem"),
            ("RelatedTo", "tradition", "hunting"), ("UsedFor", "gun", "hunting"),
            ("RelatedTo", "eating meat", "animal"),
        ],
        # (stance, [sentences as (text, concepts the sentence is about)])
        "arguments": [
            ("pro", [("Trophy hunting is pure animal cruelty.", ["trophy hunting", "animal cruelty"]),
                     ("Animals suffer for a photo.", ["suffering", "animal"])]),
            ("pro", [("Wildlife belongs in a healthy ecosystem.", ["wildlife", "ecosystem"]),
                     ("Killing for sport harms the animals we share it with.", ["animal cruelty", "animal"])]),
            ("pro", [("Guns in the forest put people and deer at risk.", ["gun", "deer"]),
                     ("Trophy hunting should end.", ["trophy hunting"])]),
            ("pro", [("Hunting causes needless suffering.", ["hunting", "suffering"]),
                     ("Conservation does not need a rifle.", ["conservation", "gun"])]),
            ("pro", [("Animal cruelty is never a tradition worth keeping.", ["animal cruelty", "tradition"]),
                     ("Wildlife deserves protection.", ["wildlife"])]),
            ("con", [("Hunting for food is how many families eat.", ["hunting for food", "eating meat"]),
                     ("It is more honest than factory farming.", ["eating meat", "sustainability"])]),
            ("con", [("Without predators, population control depends on hunters.", ["population control", "hunting"]),
                     ("Deer overrun the forests otherwise.", ["deer", "ecosystem"])]),
            ("con", [("Hunting is an old tradition in rural areas.", ["tradition", "hunting"]),
                     ("Licence fees pay for conservation.", ["conservation"])]),
            ("con", [("Sustainable hunting keeps the ecosystem in balance.", ["sustainability", "ecosystem"]),
                     ("Hunting for food wastes less than supermarkets.", ["hunting for food", "sustainability"])]),
            ("con", [("People who eat meat should accept that animals are killed.", ["eating meat", "animal"]),
                     ("A clean hunt is kinder than a slaughterhouse.", ["hunt", "suffering"])]),
        ],
        "irrelevant": ["gun"],
        "coarse": ["animal", "hunting", "hunt"],
        "stakeholders": ["hunters", "animal rights activists", "farmers", "environmentalists"],
    },
    {
        "id": "uniforms",
        "question": "Should kids have to wear school uniforms?",
        "concepts": ["school uniform", "uniform", "clothing", "cost", "bullying", "self expression", "discipline",
                     "identity", "school", "equality", "freedom", "fashion", "parents", "peer pressure"],
        "edges": [
            ("IsA", "school uniform", "uniform"), ("IsA", "uniform", "clothing"), ("RelatedTo", "fashion", "clothing"),
            ("RelatedTo", "school uniform", "school"), ("RelatedTo", "bullying", "peer pressure"),
            ("RelatedTo", "peer pressure", "fashion"), ("RelatedTo", "self expression", "fashion"),
            ("RelatedTo", "self expression", "identity"), ("RelatedTo", "identity", "freedom"),
            ("RelatedTo", "discipline", "school"), ("RelatedTo", "equality", "cost"),
            ("RelatedTo", "cost", "parents"), ("RelatedTo", "equality", "bullying"),
            ("RelatedTo", "parents", "school"),
        ],
        "arguments": [
            ("pro", [("School uniforms stop bullying over brands.", ["school uniform", "bullying"]),
                     ("Every child looks equal.", ["equality"])]),
            ("pro", [("Uniforms are cheaper for parents.", ["uniform", "cost", "parents"]),
                     ("Nobody has to keep up with fashion.", ["fashion", "peer pressure"])]),
            ("pro", [("A uniform builds discipline.", ["uniform", "discipline"]),
                     ("Students focus on school, not clothing.", ["school", "clothing"])]),
            ("pro", [("Peer pressure about clothes disappears.", ["peer pressure", "clothing"]),
                     ("Uniforms create a shared school identity.", ["identity", "school uniform"])]),
            ("pro", [("Equality matters more than fashion.", ["equality", "fashion"]),
                     ("Parents save money every year.", ["parents", "cost"])]),
            ("con", [("Kids lose their self expression.", ["self expression"]),
                     ("Clothing is part of identity.", ["clothing", "identity"])]),
            ("con", [("Uniforms cost parents extra money.", ["uniform", "cost"]),
                     ("Freedom of choice is taken away.", ["freedom"])]),
            ("con", [("Bullying continues with or without uniforms.", ["bullying", "uniform"]),
                     ("Discipline comes from teachers, not clothes.", ["discipline", "school"])]),
            ("con", [("Fashion lets teenagers show who they are.", ["fashion", "self expression"]),
                     ("Forced sameness is not equality.", ["equality", "freedom"])]),
            ("con", [("School should teach freedom.", ["school", "freedom"]),
                     ("A school uniform suppresses identity.", ["school uniform", "identity"])]),
        ],
        "irrelevant": ["parents"],
        "coarse": ["clothing", "school"],
        "stakeholders": ["students", "parents", "teachers"],
    },
]

LEMMAS = {"hunting": "hunt", "hunt": "hunt", "trophy hunting": "trophy_hunt", "hunting for food": "food_hunt",
          "school uniform": "school_uniform"}
HYPERNYMS = [("trophy_hunt", "hunt"), ("food_hunt", "hunt"), ("deer", "animal"), ("school_uniform", "uniform"),
             ("uniform", "clothing"), ("fashion", "clothing")]


def lemma(c):
    return LEMMAS.get(c, c.replace(" ", "_"))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    vectors = {}
    corpus, graph, sentences = [], [], []
    annotations, reliability = [], []

    for t in TOPICS:
        corpus.append({"id": t["id"], "question": t["question"]})
        for c in t["concepts"]:
            vectors[c] = seeded(c)
        for rel, a, b in t["edges"]:
            graph.append(f"{rel}\t{a}\t{b}\t1.0")
        ids = []
        for i, (stance, sents) in enumerate(t["arguments"]):
            arg_id = f"{t['id']}-{i + 1:02d}"
            ids.append((arg_id, stance, sents))
            text = " ".join(s for s, _ in sents)
            groups = t["stakeholders"]
            assigned = [groups[i % len(groups)]] + ([groups[(i + 1) % len(groups)]] if i % 3 == 0 else [])
            corpus.append({"id": arg_id, "topic_id": t["id"], "text": text, "stance": stance,
                           "stakeholders": assigned})
            for s, concepts in sents:
                v = np.mean([vectors[c] for c in concepts], axis=0) + rng.normal(0.0, 0.05, DIM)
                sentences.append((s, v))

        for c in t["concepts"]:
            annotations.append({"kind": "signature", "topic_id": t["id"], "concept": c,
                                 "relevant": c not in t["irrelevant"],
                                 "appropriate_granularity": c not in t["coarse"] and c not in t["irrelevant"]})

        def evoked(sents):
            return {c for _, cs in sents for c in cs}

        for arg_id, stance, sents in ids:
            ev = evoked(sents)
            for c in t["concepts"][:10]:
                value = ("favor" if stance == "pro" else "against") if c in ev else "neutral"
                annotations.append({"kind": "stance", "argument_id": arg_id, "concept": c, "value": value})

        pros = [x for x in ids if x[1] == "pro"]
        cons = [x for x in ids if x[1] == "con"]
        for (a, _, sa), (b, _, sb) in itertools.product(pros, cons):
            shared = evoked(sa) & evoked(sb)
            label = ["disagreement", "partial_agreement", "orthogonal"][len(shared) % 3] if shared else "orthogonal"
            if len(shared) >= 2:
                label = "disagreement"
            annotations.append({"kind": "pair_global", "arg1": a, "arg2": b, "label": label})
            for c in t["concepts"][:10]:
                if c in evoked(sa) and c in evoked(sb):
                    cl = "disagree"
                elif c in evoked(sa) or c in evoked(sb):
                    cl = "neutral"
                else:
                    cl = "agree" if (len(a) + len(c)) % 4 == 0 else "neutral"
                annotations.append({"kind": "pair_concept", "arg1": a, "arg2": b, "concept": c, "label": cl})

        for c in t["concepts"]:
            gold = "relevant" if c not in t["irrelevant"] else "irrelevant"
            for ann in ["a1", "a2", "a3"]:
                flip = ann == "a3" and len(c) % 5 == 0
                label = ("irrelevant" if gold == "relevant" else "relevant") if flip else gold
                reliability.append(f"{t['id']}/{c}\t{ann}\t{label}")

    def fmt(v):
        return " ".join(f"{x:.6f}" for x in v)

    with open(OUT / "corpus.jsonl", "w") as f:
        for r in corpus:
            f.write(json.dumps(r) + "\n")
    with open(OUT / "graph.tsv", "w") as f:
        f.write("# relation\tsource\ttarget\tweight\n" + "\n".join(graph) + "\n")
    with open(OUT / "embeddings.tsv", "w") as f:
        for label in sorted(vectors):
            f.write(f"{label}\t{fmt(vectors[label])}\n")
        for s, v in sentences:
            f.write(f"{s}\t{fmt(v)}\n")
    with open(OUT / "lemmas.tsv", "w") as f:
        for c in sorted(vectors):
            f.write(f"{c}\t{lemma(c)}\n")
    with open(OUT / "hypernyms.tsv", "w") as f:
        for a, b in HYPERNYMS:
            f.write(f"{a}\t{b}\n")
    with open(OUT / "annotations.jsonl", "w") as f:
        for r in annotations:
            f.write(json.dumps(r) + "\n")
    with open(OUT / "reliability.tsv", "w") as f:
        f.write("\n".join(reliability) + "\n")


if __name__ == "__main__":
    main()
