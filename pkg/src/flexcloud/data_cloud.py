"""Term clouds over search results, with click-to-refine.

The cloud holds the most significant non-stopword terms (unigrams and
adjacent-token bigrams) found in the current hit set. Significance is
summed result-set term frequency scaled by corpus rarity:

    sig(t) = (sum of tf(t, e) over hit entities e) * ln(1 + N / df(t))

where N is the number of entities in the index and df(t) counts entities
anywhere in the index containing t. Terms equal to a query unigram are
excluded; bigrams containing a query unigram survive, so a query for
"american" can still offer "latin american".

Every cloud term occurs in at least one current hit, so clicking one --
refining the query with it -- always narrows to a non-empty subset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .entity_search import QueryTerm, SearchIndex, SearchResult, search, term_display

#: Fixed English stopword list (120 words); also listed in docs/stopwords.md.
STOPWORDS = frozenset((
    "a", "about", "above", "after", "again", "against", "all", "am", "an",
    "and", "any", "are", "as", "at", "be", "because", "been", "before",
    "being", "below", "between", "both", "but", "by", "can", "did", "do",
    "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "him", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "me", "more", "most", "my", "myself", "no", "nor",
    "not", "now", "of", "off", "on", "once", "only", "or", "other", "our",
    "ours", "ourselves", "out", "over", "own", "same", "she", "should",
    "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "very", "was", "we",
    "were", "what", "when", "where", "which", "while", "who", "whom",
    "why", "will", "with", "you", "your", "yours",
))

DEFAULT_CLOUD_SIZE = 30


class StaleTerm(ValueError):
    """Clicked term does not occur in the current result set."""


@dataclass(frozen=True)
class CloudTerm:
    term: str
    weight: float
    count: int


@dataclass(frozen=True)
class DataCloud:
    query: tuple[QueryTerm, ...]
    terms: tuple[CloudTerm, ...]


def candidate_terms(tokens: tuple[str, ...]):
    """Yield cloud-candidate term keys from one field's token run."""
    for token in tokens:
        if token not in STOPWORDS:
            yield (token,)
    for pair in zip(tokens, tokens[1:]):
        if pair[0] not in STOPWORDS and pair[1] not in STOPWORDS:
            yield pair


def compute_cloud(index: SearchIndex, result: SearchResult, k: int = DEFAULT_CLOUD_SIZE) -> DataCloud:
    """Rank candidate terms of the hit set by significance; keep the top k."""
    tf_totals: dict[QueryTerm, int] = {}
    doc_counts: dict[QueryTerm, int] = {}
    for hit in result.hits:
        entity = index.entities[index.entity_ord(hit.entity_id)]
        per_entity: dict[QueryTerm, int] = {}
        for field in entity.fields:
            for key in candidate_terms(field.tokens):
                per_entity[key] = per_entity.get(key, 0) + 1
        for key, tf in per_entity.items():
            tf_totals[key] = tf_totals.get(key, 0) + tf
            doc_counts[key] = doc_counts.get(key, 0) + 1

    query_unigrams = {t for t in result.query if len(t) == 1}
    total = index.entity_count
    ranked = []
    for key, tf in tf_totals.items():
        if key in query_unigrams:
            continue
        sig = tf * math.log(1.0 + total / index.doc_freq(key))
        ranked.append(CloudTerm(term_display(key), sig, doc_counts[key]))
    ranked.sort(key=lambda t: (-t.weight, t.term))
    return DataCloud(result.query, tuple(ranked[: max(k, 0)]))


def _term_key(clicked) -> QueryTerm:
    if isinstance(clicked, CloudTerm):
        clicked = clicked.term
    if isinstance(clicked, str):
        return tuple(clicked.split(" "))
    return tuple(clicked)


def refine(
    index: SearchIndex, query: list, clicked, k: int = DEFAULT_CLOUD_SIZE
) -> tuple[SearchResult, DataCloud]:
    """Add a clicked cloud term to the query; re-search and re-summarize.

    Raises StaleTerm when the term does not occur in the current results,
    e.g. a click on a cloud computed for a query the caller then changed.
    """
    key = _term_key(clicked)
    current = search(index, list(query))
    current_ords = {index.entity_ord(h.entity_id) for h in current.hits}
    if not current_ords & set(index.postings(key).keys()):
        raise StaleTerm(f"term {term_display(key)!r} does not occur in the current results")
    new_query = list(current.query)
    if key not in new_query:
        new_query.append(key)
    refined = search(index, new_query)
    return refined, compute_cloud(index, refined, k)
