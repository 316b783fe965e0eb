"""Regenerates the synthetic SHAP tables in this directory.

reference_shap.csv: four models whose merged rankings are small perturbations
of one fixed order, so the Dowdall vote recovers that order exactly.
shap_three_models.csv: three models with unstructured random values, used to
cross-check the aggregation code against a flat re-implementation.

Run from this directory: python3 make_shap_fixtures.py
"""

import csv
import random

ORDER = [
    "SumMaxV", "AvgAvgV", "SumSumV", "SumSgSumV", "AvgAvgSgV", "SumMaxSV",
    "SumSumSV", "SumSumSgV", "AvgAvgSV", "MaxSumV", "MaxMaxV", "MaxAvgV",
    "MaxSumSV", "MaxAvgSV", "MaxSgSumV", "MaxSumSgV", "MaxAvgSgV", "MaxMaxSV",
]

# 1-based adjacent swaps applied to ORDER for each model
SWAPS = {"DT": [(4, 5), (9, 10)], "KNN": [(7, 8), (13, 14)], "SVM": [(2, 3), (16, 17)], "MLP": []}
SCALE = {"DT": 0.9, "KNN": 1.7, "SVM": 0.35, "MLP": 1.0}
CLASSES = range(1, 7)
INSTANCES = range(3)


def tokens(camel):
    out = []
    while camel:
        for t in ("Sum", "Max", "Avg", "SV", "Sg", "V"):
            if camel.startswith(t):
                out.append(t)
                camel = camel[len(t):]
                break
        else:
            raise ValueError(camel)
    return out


def functional(camel, var):
    t = tokens(camel)
    outer, rest = t[0].lower(), t[1:]
    mid_sg = rest[0] == "Sg"
    if mid_sg:
        rest = rest[1:]
    inner, rest = rest[0].lower(), rest[1:]
    inner_sg = rest[0] == "Sg"
    if inner_sg:
        rest = rest[1:]
    base = f"{rest[0].lower()}_{var}(S)"
    if inner_sg:
        base = f"sg({base})"
    body = f"{inner}({base})"
    if mid_sg:
        body = f"sg({body})"
    return f"{outer}({body})"


def members(camel):
    if camel.startswith("Max"):
        return [camel]
    rest = camel[3:]
    return ["Sum" + rest, "Avg" + rest]


ALL_FEATURES = [m for c in ORDER for m in members(c)]


def split(rng, total, parts):
    w = [rng.uniform(0.5, 1.5) for _ in range(parts)]
    s = sum(w)
    return [total * x / s for x in w]


def reference(rng):
    rows = []
    for model, swaps in SWAPS.items():
        order = list(ORDER)
        for a, b in swaps:
            order[a - 1], order[b - 1] = order[b - 1], order[a - 1]
        for rank, cls in enumerate(order, start=1):
            score = (20 - rank) * SCALE[model]
            mems = members(cls)
            cells = [(f, v, c, i) for f in mems for v in (1, 2, 3) for c in CLASSES for i in INSTANCES]
            for (f, v, c, i), x in zip(cells, split(rng, score, len(cells))):
                sign = rng.choice((-1, 1))
                rows.append((model, c, i, functional(f, v), f"{sign * x:.9f}"))
    return rows


def unstructured(rng):
    rows = []
    for model in ("DT", "KNN", "SVM"):
        for f in ALL_FEATURES:
            for v in (1, 2, 3):
                for c in CLASSES:
                    for i in range(2):
                        rows.append((model, c, i, functional(f, v), f"{rng.gauss(0, 0.05):.9f}"))
    return rows


def write(path, rows):
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "class", "instance", "feature", "shap_value"])
        w.writerows(rows)


if __name__ == "__main__":
    assert len(ALL_FEATURES) == 27
    write("reference_shap.csv", reference(random.Random(20230517)))
    write("shap_three_models.csv", unstructured(random.Random(7)))
