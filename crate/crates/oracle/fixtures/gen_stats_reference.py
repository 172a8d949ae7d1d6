"""Regenerates stats_reference.json: 100 fixed vector pairs plus t, p, d, r
values computed with mpmath at 50 significant digits.

    python3 gen_stats_reference.py > stats_reference.json
"""
import json

import mpmath as mp
import numpy as np

mp.mp.dps = 50


def mean(xs):
    return mp.fsum(xs) / len(xs)


def var(xs):
    m = mean(xs)
    return mp.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1)


def t_two_tailed_p(t, df):
    x = df / (df + t * t)
    return mp.betainc(df / 2, mp.mpf(1) / 2, 0, x, regularized=True)


def student(a, b):
    na, nb = len(a), len(b)
    sp2 = ((na - 1) * var(a) + (nb - 1) * var(b)) / (na + nb - 2)
    t = (mean(a) - mean(b)) / mp.sqrt(sp2 * (mp.mpf(1) / na + mp.mpf(1) / nb))
    return t, t_two_tailed_p(t, mp.mpf(na + nb - 2))


def cohens_d(poor, good):
    n1, n2 = len(poor), len(good)
    sp = mp.sqrt(((n1 - 1) * var(poor) + (n2 - 1) * var(good)) / (n1 + n2 - 2))
    return (mean(good) - mean(poor)) / sp


def pearson(x, y):
    mx, my = mean(x), mean(y)
    sxy = mp.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = mp.fsum((a - mx) ** 2 for a in x)
    syy = mp.fsum((b - my) ** 2 for b in y)
    r = sxy / mp.sqrt(sxx * syy)
    n = len(x)
    t = r * mp.sqrt((n - 2) / (1 - r * r))
    return r, t_two_tailed_p(t, mp.mpf(n - 2))


def main():
    rng = np.random.default_rng(20240607)
    cases = []
    for _ in range(100):
        na = int(rng.integers(2, 60))
        nb = int(rng.integers(2, 60))
        shift = float(rng.normal(0, 1))
        scale = float(rng.uniform(0.2, 5))
        a = [float(v) for v in rng.normal(0, scale, na)]
        b = [float(v) for v in rng.normal(shift, scale, nb)]
        n = int(rng.integers(3, 60))
        x = [float(v) for v in rng.normal(0, 1, n)]
        rho = float(rng.uniform(-0.95, 0.95))
        y = [float(rho * xi + v) for xi, v in zip(x, rng.normal(0, 1, n))]
        am = [mp.mpf(v) for v in a]
        bm = [mp.mpf(v) for v in b]
        t, p = student(am, bm)
        d = cohens_d(am, bm)
        r, rp = pearson([mp.mpf(v) for v in x], [mp.mpf(v) for v in y])
        cases.append(
            {
                "a": a,
                "b": b,
                "t": float(t),
                "p": float(p),
                "d": float(d),
                "x": x,
                "y": y,
                "r": float(r),
                "r_p": float(rp),
            }
        )
    t, p = student([mp.mpf(v) for v in (1, 2, 3)], [mp.mpf(v) for v in (3, 4, 5)])
    fixture = {"t": float(t), "p": float(p)}
    print(json.dumps({"fixture_123_345": fixture, "cases": cases}, indent=1))


if __name__ == "__main__":
    main()
