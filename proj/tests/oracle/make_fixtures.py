#!/usr/bin/env python3
"""Regenerates the frozen oracle fixtures under tests/fixtures/.

Every expected value here comes from an implementation that shares no code
with the C++ library: SciPy / statsmodels for the distribution-based tests,
exact rational arithmetic (fractions) and brute-force enumeration for the
small closed-form cases. The C++ suites only read the JSON this emits.

    python3 tests/oracle/make_fixtures.py
"""

import itertools
import json
import math
import pathlib
from fractions import Fraction

import numpy as np
from scipy import stats
from statsmodels.stats.power import TTestPower

OUT = pathlib.Path(__file__).resolve().parents[1] / "fixtures"
RNG = np.random.default_rng(20201116)


def draw(kind, n):
    if kind == "normal":
        return RNG.normal(RNG.uniform(-2, 2), RNG.uniform(0.1, 3), n)
    if kind == "uniform":
        return RNG.uniform(-1, 1, n)
    if kind == "exponential":
        return RNG.exponential(RNG.uniform(0.5, 2), n)
    if kind == "t3":
        return RNG.standard_t(3, n)
    if kind == "beta":
        return RNG.beta(5, 5, n) - RNG.beta(5.4, 4.9, n)
    if kind == "lognormal":
        return RNG.lognormal(0, 0.7, n)
    raise ValueError(kind)


KINDS = ["normal", "uniform", "exponential", "t3", "beta", "lognormal"]


def log_uniform_int(lo, hi):
    return int(round(math.exp(RNG.uniform(math.log(lo), math.log(hi)))))


def t_fixtures():
    out = []
    for i in range(200):
        n = 3 if i == 0 else (500 if i == 1 else log_uniform_int(3, 500))
        x = draw(KINDS[i % len(KINDS)], n)
        x = [float(v) for v in x]
        res = stats.ttest_1samp(x, 0.0)
        out.append({"sample": x, "t": float(res.statistic), "p_two_sided": float(res.pvalue)})
    return out


def swilk_fixtures():
    out = []
    fixed = [[1.0, 2.0, 2.0, 3.0], [1.0, 2.0, 4.0], [2.5, 1.0, 7.0, 3.0, 3.5]]
    # The published AS R94 driver sample (Royston 1995): W = 0.83467, p = 0.000914.
    fixed.append([.139, .157, .175, .256, .344, .413, .503, .577, .614, .655,
                  .954, 1.392, 1.557, 1.648, 1.690, 1.994, 2.174, 2.206, 3.245, 3.510,
                  3.571, 4.354, 4.980, 6.084, 8.351])
    for x in fixed:
        w, p = stats.shapiro(x)
        out.append({"sample": x, "w": float(w), "p": float(p)})
    sizes = [3, 4, 5, 6, 7, 11, 12, 20, 5000, 4999]
    while len(sizes) + len(fixed) < 100:
        sizes.append(log_uniform_int(3, 5000))
    for i, n in enumerate(sizes):
        x = [round(float(v), 6) for v in draw(KINDS[i % len(KINDS)], n)]
        if max(x) == min(x):
            continue
        w, p = stats.shapiro(x)
        out.append({"sample": x, "w": float(w), "p": float(p)})
    return out


def wilcoxon_approx_fixtures():
    out = []
    for i in range(40):
        n = int(RNG.integers(26, 400))
        # Rounded to one decimal so tie groups are common.
        x = [round(float(v), 1) for v in draw(KINDS[i % len(KINDS)], n)]
        x = [v for v in x if v != 0.0]
        if len(x) <= 25:
            continue
        entry = {"sample": x}
        for alt, key in (("two-sided", "two_sided"), ("greater", "right"), ("less", "left")):
            r = stats.wilcoxon(x, zero_method="wilcox", correction=False,
                               alternative=alt, method="asymptotic")
            entry["p_" + key] = float(r.pvalue)
        # scipy reports min(W+, W-) for two-sided; W+ is the rank sum of positives.
        ranks = stats.rankdata(np.abs(x))
        entry["w_plus"] = float(sum(r for r, v in zip(ranks, x) if v > 0))
        out.append(entry)
    return out


def sign_fixtures():
    # Exact rational tails rounded once; scipy's binomtest is only a cross-check.
    out = []
    for n in [1, 2, 5, 6, 10, 17, 30, 61, 62, 63, 100, 500, 2000, 4096]:
        total = 2 ** n
        coeffs = [math.comb(n, i) for i in range(n + 1)]
        for k in sorted({0, 1, n // 3, n // 2, n - 1 if n > 1 else 0, n}):
            upper = Fraction(sum(coeffs[k:]), total)
            lower = Fraction(sum(coeffs[: k + 1]), total)
            two = min(Fraction(1), 2 * min(upper, lower))
            entry = {"n": n, "k": k, "p_two_sided": float(two), "p_right": float(upper), "p_left": float(lower)}
            for alt, key in (("two-sided", "p_two_sided"), ("greater", "p_right"), ("less", "p_left")):
                ref = stats.binomtest(k, n, 0.5, alternative=alt).pvalue
                assert math.isclose(ref, entry[key], rel_tol=1e-9, abs_tol=1e-300), (n, k, alt)
            out.append(entry)
    return out


def power_fixtures():
    tp = TTestPower()
    out = []
    for e in [0.2, 0.5, 0.8, 1.2]:
        for alpha in [0.05, 0.01]:
            for power in [0.8, 0.9]:
                for alt, key in (("two-sided", "two_sided"), ("larger", "one_sided")):
                    n_real = tp.solve_power(effect_size=e, alpha=alpha, power=power,
                                            alternative=alt)
                    refined = math.ceil(n_real - 1e-9)
                    # Closed-form normal approximation.
                    za = stats.norm.ppf(1 - alpha / 2) if key == "two_sided" else stats.norm.ppf(1 - alpha)
                    zb = stats.norm.ppf(power)
                    closed = math.ceil(((za + zb) / e) ** 2)
                    out.append({
                        "effect": e, "alpha": alpha, "power": power, "direction": key,
                        "closed_form": closed, "refined": refined,
                        "power_at_refined": float(tp.power(e, refined, alpha, alternative=alt)),
                        "power_at_refined_minus_one": float(tp.power(e, refined - 1, alpha, alternative=alt))
                        if refined > 2 else None,
                    })
    return out


def frac_mean(xs):
    return sum(xs, Fraction(0)) / len(xs)


def frac_var(xs):
    m = frac_mean(xs)
    return sum(((x - m) ** 2 for x in xs), Fraction(0)) / (len(xs) - 1)


def brute_wilcoxon_z(xs):
    xs = [x for x in xs if x != 0]
    n = len(xs)
    absx = sorted(abs(x) for x in xs)
    rank = {}
    for v in set(absx):
        positions = [i + 1 for i, a in enumerate(absx) if a == v]
        rank[v] = Fraction(sum(positions), len(positions))
    w = sum((rank[abs(x)] for x in xs if x > 0), Fraction(0))
    ties = [absx.count(v) for v in set(absx)]
    t_term = Fraction(sum(t ** 3 - t for t in ties), 48)
    var = Fraction(n * (n + 1) * (2 * n + 1), 24) - t_term
    z = (float(w) - n * (n + 1) / 4) / math.sqrt(float(var))
    return float(w), z, float(t_term), n


def walsh_median(xs, include_self):
    avgs = []
    for i in range(len(xs)):
        for j in range(i if include_self else i + 1, len(xs)):
            avgs.append(Fraction(xs[i] + xs[j]) / 2)
    avgs.sort()
    m = len(avgs)
    return float(avgs[m // 2]) if m % 2 else float((avgs[m // 2 - 1] + avgs[m // 2]) / 2)


def effect_fixtures():
    samples = [[1, 2, 3], [1, 2, 3, 4], [-1, -2, -3], [1, 1, -1], [3, -1, 4, 1, -5, 9, 2, 6],
               [Fraction(1, 2), Fraction(-3, 4), 2, 5, Fraction(7, 8)]]
    out = []
    for xs in samples:
        xs = [Fraction(x) for x in xs]
        n = len(xs)
        d = float(frac_mean(xs)) / math.sqrt(float(frac_var(xs)))
        g = d * (1 - 3 / (4 * n - 9)) if n >= 3 else None
        w, z, t_term, n_nz = brute_wilcoxon_z(xs)
        out.append({
            "sample": [float(x) for x in xs],
            "cohens_d": d, "hedges_g": g,
            "wilcoxon_w": w, "wilcoxon_z": z, "wilcoxon_tie_term": t_term,
            "wilcoxon_r": z / math.sqrt(n_nz),
            "hodges_lehmann": walsh_median(xs, False),
            "hodges_lehmann_with_self": walsh_median(xs, True),
        })
    return out


def misc_fixtures():
    return {
        "skew_0_0_0_12": float(stats.skew([0, 0, 0, 12], bias=False)),
        "t_1_2_3": {
            "t": float(stats.ttest_1samp([1, 2, 3], 0).statistic),
            "p": float(stats.ttest_1samp([1, 2, 3], 0).pvalue),
        },
        # Exact tail of Binomial(5, 1/2): all five positive.
        "sign_11111_two_sided": float(2 * Fraction(1, 32)),
        # Wilcoxon exact null for n = 3 by enumerating 2^3 sign vectors.
        "wilcoxon_123_right": float(Fraction(sum(
            1 for s in itertools.product([0, 1], repeat=3)
            if sum(r for r, b in zip([1, 2, 3], s) if b) >= 6), 8)),
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    files = {
        "ttest.json": t_fixtures(),
        "swilk.json": swilk_fixtures(),
        "wilcoxon_approx.json": wilcoxon_approx_fixtures(),
        "sign.json": sign_fixtures(),
        "power.json": power_fixtures(),
        "effect.json": effect_fixtures(),
        "misc.json": misc_fixtures(),
    }
    for name, payload in files.items():
        (OUT / name).write_text(json.dumps(payload, indent=None, separators=(",", ":")) + "\n")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()
