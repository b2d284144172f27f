"""Independent reference implementations used only by the test suite.

These deliberately avoid the library's own code paths: IoU is computed
in exact rational arithmetic and matchings are found by exhaustive
enumeration, so they can serve as oracles for the fast implementations.
"""

import itertools
from fractions import Fraction

import numpy as np


def exact_iou(a, b):
    """IoU of two boxes as an exact Fraction."""
    ax1, ay1, ax2, ay2 = (Fraction(c) for c in a)
    bx1, by1, bx2, by2 = (Fraction(c) for c in b)
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    inter = iw * ih if (iw > 0 and ih > 0) else Fraction(0)
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union


def enumerate_matchings(n_preds, n_gts):
    """All injective pred->gt matchings of size min(n_preds, n_gts).

    Yields pair lists sorted by pred index.
    """
    m = min(n_preds, n_gts)
    if m == 0:
        yield []
        return
    if n_preds <= n_gts:
        for cols in itertools.permutations(range(n_gts), n_preds):
            yield [(i, cols[i]) for i in range(n_preds)]
    else:
        for rows in itertools.permutations(range(n_preds), n_gts):
            yield sorted((rows[j], j) for j in range(n_gts))


def brute_force_match(preds, gts):
    """Exhaustive minimum-cost matching with exact rational arithmetic.

    Cost of a pair is 1 - IoU. Among equal-cost matchings the
    lexicographically smallest pair list wins, mirroring the library's
    documented tie-break. Returns (pairs, exact_total_cost).
    """
    iou_cache = {}

    def pair_cost(i, j):
        if (i, j) not in iou_cache:
            iou_cache[(i, j)] = 1 - exact_iou(preds[i], gts[j])
        return iou_cache[(i, j)]

    best_pairs = None
    best_cost = None
    for pairs in enumerate_matchings(len(preds), len(gts)):
        total = sum((pair_cost(i, j) for i, j in pairs), Fraction(0))
        if best_cost is None or total < best_cost or (total == best_cost and pairs < best_pairs):
            best_cost = total
            best_pairs = pairs
    return best_pairs, best_cost


def exact_match_cost(preds, gts, pairs):
    """Exact total (1 - IoU) cost of a given pair list."""
    return sum((1 - exact_iou(preds[i], gts[j]) for i, j, *_ in pairs), Fraction(0))


def brute_force_min_cost(preds, gts):
    """Exact minimum matching cost by full enumeration, numpy-accelerated.

    Scans every injective matching with vectorized float totals, then
    settles the minimum in exact rational arithmetic over the candidates
    within 1e-9 of the float minimum (float accumulation error over at
    most 7 pairs is ~1e-15, so no exact minimizer can be missed).
    """
    n_p, n_g = len(preds), len(gts)
    m = min(n_p, n_g)
    if m == 0:
        return Fraction(0)

    exact_costs = {
        (i, j): 1 - exact_iou(preds[i], gts[j]) for i in range(n_p) for j in range(n_g)
    }
    cost = np.array(
        [[float(exact_costs[(i, j)]) for j in range(n_g)] for i in range(n_p)]
    )

    if n_p <= n_g:
        perms = np.array(list(itertools.permutations(range(n_g), n_p)), dtype=np.intp)
        rows = np.arange(n_p)[None, :]
        totals = cost[rows, perms].sum(axis=1)
        pair_of = lambda perm: [(i, perm[i]) for i in range(n_p)]
    else:
        perms = np.array(list(itertools.permutations(range(n_p), n_g)), dtype=np.intp)
        cols = np.arange(n_g)[None, :]
        totals = cost[perms, cols].sum(axis=1)
        pair_of = lambda perm: [(perm[j], j) for j in range(n_g)]

    keep = np.flatnonzero(totals <= totals.min() + 1e-9)
    best = None
    seen_keys = set()
    for idx in keep:
        pairs = pair_of(perms[idx])
        key = tuple(sorted(float(exact_costs[p]) for p in pairs))
        if key in seen_keys:
            continue
        seen_keys.add(key)
        total = sum((exact_costs[p] for p in pairs), Fraction(0))
        if best is None or total < best:
            best = total
    return best


def brute_force_grounding(preds, gts, tau):
    """Eq-style precision/recall from the exhaustive matching oracle.

    Counts pairs whose IoU strictly exceeds tau on the optimal
    (tie-broken) matching, then divides by |preds| and |gts|; empty sets
    yield 0 by convention. The threshold comparison happens at float
    precision (correctly rounded exact IoU vs. the float tau), matching
    how any IEEE-double implementation must behave at the boundary.
    """
    pairs, _ = brute_force_match(preds, gts)
    hits = sum(1 for i, j in pairs if float(exact_iou(preds[i], gts[j])) > tau)
    precision = Fraction(hits, len(preds)) if preds else Fraction(0)
    recall = Fraction(hits, len(gts)) if gts else Fraction(0)
    return precision, recall
