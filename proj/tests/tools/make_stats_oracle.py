#!/usr/bin/env python3
"""Reference chi-square, Wilson and t values from scipy / statsmodels."""

import json
import random
from pathlib import Path

import numpy as np
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

OUT = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "stats_oracle.json"


def main():
    rng = random.Random(1729)
    tables = []
    while len(tables) < 20:
        n1, n2 = rng.randint(5, 9000), rng.randint(5, 9000)
        t = [[rng.randint(0, n1), 0], [rng.randint(0, n2), 0]]
        t[0][1] = n1 - t[0][0]
        t[1][1] = n2 - t[1][0]
        if min(t[0][0] + t[1][0], t[0][1] + t[1][1]) == 0:
            continue
        row = {"table": t}
        for name, corr in (("none", False), ("yates", True)):
            chi2, p, dof, _ = stats.chi2_contingency(np.array(t), correction=corr)
            row[name] = {"statistic": float(chi2), "p": float(p)}
        tables.append(row)

    wilson = []
    for k, n in [(0, 10), (10, 10), (6, 10), (8, 10), (452, 8064), (5544, 8064),
                 (404, 5760), (4201, 5760)]:
        lo, hi = proportion_confint(k, n, alpha=0.05, method="wilson")
        wilson.append({"k": k, "n": n, "lower": float(lo), "upper": float(hi)})
    while len(wilson) < 20:
        n = rng.randint(1, 5000)
        k = rng.randint(0, n)
        lo, hi = proportion_confint(k, n, alpha=0.05, method="wilson")
        wilson.append({"k": k, "n": n, "lower": float(lo), "upper": float(hi)})

    t_tail = [{"t": t, "df": df, "p": float(stats.t.sf(t, df))}
              for t, df in [(1.66, 9), (2.64, 9), (0.0, 5), (-1.2, 14), (3.5, 30), (12.0, 2)]]

    vectors = []
    for _ in range(5):
        x = [round(rng.gauss(1.0, 2.0), 6) for _ in range(rng.randint(3, 40))]
        r = stats.ttest_1samp(x, 0.0, alternative="greater")
        lo, hi = stats.t.interval(0.95, len(x) - 1, loc=np.mean(x), scale=stats.sem(x))
        vectors.append({"values": x, "t": float(r.statistic), "p": float(r.pvalue),
                        "ci": [float(lo), float(hi)]})

    OUT.write_text(json.dumps({"chi_square": tables, "wilson": wilson, "t_tail": t_tail,
                               "t_vectors": vectors}, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
