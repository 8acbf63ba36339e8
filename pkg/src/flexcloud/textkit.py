"""Tokenization and the similarity-function library.

Three similarity functions are shared by search and recommendation:
Jaccard over token sets, Pearson correlation over commonly-keyed rating
maps, and inverse Euclidean distance ``1 / (1 + d)`` over commonly-keyed
rating maps. All are pure, symmetric, and total (degenerate inputs score
0 rather than raising).
"""

from __future__ import annotations

import math
import re

#: A rating map: finite int keys to float ratings, iterated in ascending key order.
RatingMap = dict

_TOKEN_RE = re.compile(r"[0-9a-z]+")

JACCARD = "jaccard"
PEARSON = "pearson"
INV_EUCLIDEAN = "inv_euclidean"
SIMILARITY_FNS = (JACCARD, PEARSON, INV_EUCLIDEAN)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric (ASCII) characters."""
    return _TOKEN_RE.findall(text.lower())


def sim_jaccard(a: list[str], b: list[str]) -> float:
    """|set(a) & set(b)| / |set(a) | set(b)|; two empty sets score 0."""
    sa, sb = set(a), set(b)
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return len(sa & sb) / union


def sim_inv_euclidean(u: RatingMap, v: RatingMap) -> float:
    """1 / (1 + Euclidean distance) over common keys; no overlap scores 0."""
    common = sorted(u.keys() & v.keys())
    if not common:
        return 0.0
    d = math.sqrt(math.fsum((u[k] - v[k]) ** 2 for k in common))
    return 1.0 / (1.0 + d)


def sim_pearson(u: RatingMap, v: RatingMap) -> float:
    """Pearson correlation over common keys.

    Scores 0 when fewer than two keys are shared or either restricted
    vector has zero variance.
    """
    common = sorted(u.keys() & v.keys())
    n = len(common)
    if n < 2:
        return 0.0
    mu = math.fsum(u[k] for k in common) / n
    mv = math.fsum(v[k] for k in common) / n
    suu = math.fsum((u[k] - mu) ** 2 for k in common)
    svv = math.fsum((v[k] - mv) ** 2 for k in common)
    if suu == 0.0 or svv == 0.0:
        return 0.0
    suv = math.fsum((u[k] - mu) * (v[k] - mv) for k in common)
    r = suv / (math.sqrt(suu) * math.sqrt(svv))
    # Subnormal squared deviations can push r marginally outside [-1, 1].
    return min(1.0, max(-1.0, r))


SIMILARITY_IMPLS = {
    JACCARD: sim_jaccard,
    PEARSON: sim_pearson,
    INV_EUCLIDEAN: sim_inv_euclidean,
}
