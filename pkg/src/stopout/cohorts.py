"""Partition learners into collaboration cohorts from whole-course totals.

Forum activity counts both posts and responses; wiki activity counts edits.
Every participating learner (at least one submission) lands in exactly one
of the four cohorts, so per-cohort models can be trained on disjoint
populations. Learners who never submitted get no cohort.
"""

from __future__ import annotations

from pathlib import Path

from .errors import DataError
from .event_store import CourseDataset

PASSIVE = "passive_collaborator"
FORUM = "forum_contributor"
WIKI = "wiki_contributor"
FULL = "fully_collaborative"
COHORTS: tuple[str, ...] = (PASSIVE, FORUM, WIKI, FULL)


def assign_cohorts(dataset: CourseDataset) -> dict[str, str]:
    """Map each participating learner id to its cohort name."""
    posts = [0] * dataset.num_learners
    edits = [0] * dataset.num_learners
    participated = [False] * dataset.num_learners
    for ev in dataset.collaborations:
        if ev.kind == "wiki_edit":
            edits[ev.learner] += 1
        else:  # forum_post and forum_response both count as forum activity
            posts[ev.learner] += 1
    for ev in dataset.submissions:
        participated[ev.learner] = True
    out = {}
    for li, lid in enumerate(dataset.learners):
        if not participated[li]:
            continue
        if posts[li] > 0:
            out[lid] = FULL if edits[li] > 0 else FORUM
        else:
            out[lid] = WIKI if edits[li] > 0 else PASSIVE
    return out


def cohort_counts(assignments: dict[str, str]) -> dict[str, int]:
    counts = {name: 0 for name in COHORTS}
    for cohort in assignments.values():
        counts[cohort] += 1
    return counts


def export_cohorts(assignments: dict[str, str], path: str | Path) -> None:
    rows = ["learner_id\tcohort"]
    for lid in sorted(assignments):
        rows.append(f"{lid}\t{assignments[lid]}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_cohorts(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"cohort file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "learner_id\tcohort":
        raise DataError(f"{path}: not a cohort export")
    out = {}
    for ln in lines[1:]:
        if not ln:
            continue
        parts = ln.split("\t")
        if len(parts) != 2 or parts[1] not in COHORTS:
            raise DataError(f"{path}: bad cohort row {ln!r}")
        out[parts[0]] = parts[1]
    return out
