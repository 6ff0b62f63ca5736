"""Freezes reference statistics for random matrices into stats_oracle.json.

Run once; the C++ tests compare against the frozen file.
"""
import json
import sys

import numpy as np
from scipy import stats
from scipy.stats import studentized_range


def midrank_means(m):
    ranks = np.apply_along_axis(stats.rankdata, 1, m)
    return ranks.mean(axis=0)


def main(out):
    rng = np.random.default_rng(20201019)
    cases = []
    for _ in range(50):
        n = int(rng.integers(6, 40))
        k = int(rng.integers(3, 7))
        # Two decimals so that ties occur.
        m = np.round(rng.uniform(0.2, 0.9, size=(n, k)) + rng.normal(0, 0.05, size=k), 2)
        fr = stats.friedmanchisquare(*m.T)
        mean_ranks = midrank_means(m)
        se = np.sqrt(k * (k + 1) / (12.0 * n))
        nem = []
        for i in range(1, k):
            for j in range(i):
                q = abs(mean_ranks[i] - mean_ranks[j]) / se
                nem.append({"i": i, "j": j, "statistic": q, "p": float(studentized_range.sf(q, k, np.inf))})
        a, b = m[:, 0], m[:, 1]
        w = stats.wilcoxon(a, b, zero_method="wilcox", correction=False, method="approx")
        d = a - b
        d = d[d != 0]
        ranks = stats.rankdata(np.abs(d))
        w_plus = float(ranks[d > 0].sum())
        cases.append({
            "matrix": m.tolist(),
            "friedman": {"statistic": float(fr.statistic), "p": float(fr.pvalue)},
            "nemenyi": nem,
            "wilcoxon": {"w_plus": w_plus, "n": int(len(d)), "abs_z": abs(float(w.zstatistic)), "p": float(w.pvalue)},
        })
    with open(out, "w") as f:
        json.dump({"cases": cases}, f, indent=1)


if __name__ == "__main__":
    main(sys.argv[1])
