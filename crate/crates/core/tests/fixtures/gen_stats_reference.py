"""Regenerates stats_reference.json with scipy.stats as the reference."""
import json
import numpy as np
from scipy import stats

rng = np.random.default_rng(20240611)
cases = []
for i in range(200):
    k = int(rng.integers(2, 6))
    sizes = [int(rng.integers(2, 16)) for _ in range(k)]
    kind = i % 4
    groups = []
    for j, n in enumerate(sizes):
        if kind == 0:
            g = rng.normal(j * 0.3, 1.0 + 0.5 * j, n)
        elif kind == 1:
            g = rng.integers(0, 6, n).astype(float)  # heavy ties
        elif kind == 2:
            g = rng.exponential(1.0 + j, n)
        else:
            g = np.round(rng.normal(10.0, 3.0, n), 1)  # light ties
        groups.append([float(x) for x in g])
    case = {"groups": groups}
    h, p = stats.kruskal(*groups)
    case["kruskal"] = {"statistic": float(h), "p": float(p)}
    for center in ("mean", "median"):
        with np.errstate(all="ignore"):
            w, pw = stats.levene(*groups, center=center)
        case["levene_" + center] = {"statistic": float(w), "p": float(pw)}
    cases.append(case)

with open("stats_reference.json", "w") as f:
    json.dump({"cases": cases}, f, indent=1)
