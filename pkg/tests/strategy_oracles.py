"""Straight-line oracle scripts for the two shipped fixture workflows.

Written as plain imperative passes over the raw relations: no algebra
operators, no executor code. Similarity arithmetic is transcribed inline
(fsum-based, so exact agreement with the engine is well-defined).
"""

from __future__ import annotations

import math

from flexcloud.relstore import Store


def _rows(store: Store, name: str):
    rel = store.relations[name]
    idx = {c.name: i for i, c in enumerate(rel.defn.columns)}
    return rel.rows, idx


def _tokens(text):
    out = []
    current = []
    for ch in (text or "").lower():
        if ch.isascii() and (ch.isalpha() or ch.isdigit()):
            current.append(ch)
        elif current:
            out.append("".join(current))
            current = []
    if current:
        out.append("".join(current))
    return out


def similar_courses_oracle(store: Store, year: int, title: str):
    """Expected (columns, rows) for the title-similarity workflow."""
    courses, ci = _rows(store, "Courses")
    comments, mi = _rows(store, "Comments")

    year_comments = [row for row in comments if row[mi["Year"]] == year]
    candidates = []
    for course in courses:  # join keeps course order, then comment order
        for comment in year_comments:
            if course[ci["CourseID"]] is not None and course[ci["CourseID"]] == comment[mi["CourseID"]]:
                candidates.append(course)

    ref_titles = [
        set(_tokens(row[ci["Title"]])) for row in courses if row[ci["Title"]] == title
    ]

    scored = []
    for row in candidates:
        mine = set(_tokens(row[ci["Title"]]))
        sims = []
        for ref in ref_titles:
            union = mine | ref
            sims.append(len(mine & ref) / len(union) if union else 0.0)
        scored.append((row, max(sims) if sims else 0.0))
    scored.sort(key=lambda pair: (-pair[1], pair[0][ci["CourseID"]]))

    columns = ["CourseID", "DeptID", "Title", "Description", "Units", "Url", "_score"]
    return columns, [tuple(row) + (score,) for row, score in scored]


def cf_courses_oracle(store: Store, target: int):
    """Expected (columns, rows) for the collaborative-filtering workflow."""
    courses, ci = _rows(store, "Courses")
    students, si = _rows(store, "Students")
    comments, mi = _rows(store, "Comments")

    def ratings_of(suid):
        mapping = {}
        for row in comments:  # input order: later rows overwrite earlier ones
            if row[mi["SuID"]] == suid and row[mi["CourseID"]] is not None \
                    and row[mi["Rating"]] is not None:
                mapping[row[mi["CourseID"]]] = float(row[mi["Rating"]])
        return mapping

    target_map = None
    for row in students:
        if row[si["SuID"]] == target:
            target_map = ratings_of(target)
    if target_map is None:
        target_map = {}

    def inv_euclidean(u, v):
        common = sorted(set(u) & set(v))
        if not common:
            return 0.0
        d = math.sqrt(math.fsum((u[k] - v[k]) ** 2 for k in common))
        return 1.0 / (1.0 + d)

    scored_students = []
    has_target_row = any(row[si["SuID"]] == target for row in students)
    for row in students:
        suid = row[si["SuID"]]
        if suid == target:
            continue
        sim = inv_euclidean(ratings_of(suid), target_map) if has_target_row else 0.0
        scored_students.append((suid, sim))
    scored_students.sort(key=lambda pair: (-pair[1], pair[0]))
    similar = scored_students[:20]

    course_scores = []
    for row in courses:
        cid = row[ci["CourseID"]]
        values = []
        for suid, _sim in similar:
            for comment in comments:
                if comment[mi["SuID"]] == suid and comment[mi["CourseID"]] == cid \
                        and comment[mi["Rating"]] is not None:
                    values.append(float(comment[mi["Rating"]]))
        score = math.fsum(values) / len(values) if values else 0.0
        course_scores.append((row, score))
    course_scores.sort(key=lambda pair: (-pair[1], pair[0][ci["CourseID"]]))

    columns = ["CourseID", "DeptID", "Title", "Description", "Units", "Url", "_score"]
    return columns, [tuple(row) + (score,) for row, score in course_scores[:10]]
