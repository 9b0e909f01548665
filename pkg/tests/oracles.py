"""Slow, independent reference computations used as test oracles.

Everything here is plain Python over itertools, sharing no code with the
package beyond reading a channel's matrix, so agreement with the vectorized
paths is meaningful.
"""

from __future__ import annotations

import itertools
import math


def per_letter_score(kind, table, x, y):
    """Additive score with -inf absorbing, or the 0/1 support indicator."""
    if kind == "erasures_only":
        return 1.0 if all(table[a][b] > 0 for a, b in zip(x, y)) else 0.0
    total = 0.0
    for a, b in zip(x, y):
        v = table[a][b]
        if v == -math.inf:
            return -math.inf
        total += v
    return total


def score_table(kind, W, table=None):
    """Per-letter table for a metric kind, as nested lists."""
    if kind == "matched":
        return [[math.log(w) if w > 0 else -math.inf for w in row] for row in W]
    if kind == "hamming":
        return [[1.0 if a == b else 0.0 for b in range(len(W[0]))] for a in range(len(W))]
    if kind == "erasures_only":
        return [[w for w in row] for row in W]
    return table


def block_prob(W, x, y):
    p = 1.0
    for a, b in zip(x, y):
        p *= W[a][b]
    return p


def counting_error(W, code, kind, L, table=None):
    """Pr{#{m': q(x_m', Y) >= q(x_S, Y)} > L}, S uniform, by brute force.

    Scores are compared with a relative tolerance so that floating-point
    summation order cannot split ties; the package compares exactly and
    must agree.
    """
    tab = score_table(kind, W, table)
    ny = len(W[0])
    n = len(code[0])
    M = len(code)
    total = 0.0
    for y in itertools.product(range(ny), repeat=n):
        s = [per_letter_score(kind, tab, x, y) for x in code]
        for m, x in enumerate(code):
            p = block_prob(W, x, y)
            if p == 0.0:
                continue
            cnt = sum(1 for v in s if _ge(v, s[m]))
            if cnt > L:
                total += p
    return total / M


def _ge(a, b):
    if a == b:
        return True
    if math.isinf(a) or math.isinf(b):
        return a > b
    return a > b or math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def block_mutual_information(W, code):
    """I(X^n;Y^n) in nats with X^n uniform on the codebook rows."""
    ny = len(W[0])
    n = len(code[0])
    M = len(code)
    total = 0.0
    for y in itertools.product(range(ny), repeat=n):
        ps = [block_prob(W, x, y) for x in code]
        py = sum(ps) / M
        for p in ps:
            if p > 0:
                total += p / M * math.log(p / py)
    return total


def mutual_information_bits(px, W):
    """H(Y) - H(Y|X) in bits."""
    ny = len(W[0])
    py = [sum(px[a] * W[a][b] for a in range(len(px))) for b in range(ny)]
    hy = -sum(p * math.log2(p) for p in py if p > 0)
    hyx = -sum(px[a] * w * math.log2(w) for a in range(len(px)) for w in W[a] if w > 0)
    return hy - hyx


def h2(p):
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def phi_random_coding(kind, table, px, x, y):
    """Pr{q(X~, y) >= q(x, y)} with X~ i.i.d. px, by enumerating every X~."""
    n = len(x)
    target = per_letter_score(kind, table, x, y)
    total = 0.0
    for xt in itertools.product(range(len(px)), repeat=n):
        p = 1.0
        for a in xt:
            p *= px[a]
        if p > 0 and _ge(per_letter_score(kind, table, xt, y), target):
            total += p
    return total
