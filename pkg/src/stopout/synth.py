"""Synthetic course generator with known per-learner stopout ground truth.

Each learner draws three latent drivers (volume, timeliness, grades) uniform
on [-1, 1]. A weekly hazard decides when they stop out: with all slopes and
noise at zero the baseline makes every stopout week from 2 to num_weeks+1
equally likely, and negative slopes let strong drivers delay stopout. Active
weeks always contain at least one submission, so the ingested data replays
the planted stopout week exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cohorts import COHORTS, FORUM, FULL, PASSIVE, WIKI
from .errors import ConfigError
from .event_store import (
    EVENT_COLUMNS,
    TABLE_COLLABORATION,
    TABLE_OBSERVED,
    TABLE_SUBMISSION,
    WEEK_SECONDS,
    CourseCalendar,
    ProblemMeta,
)

DUE_OFFSET = 6 * 3600  # assignments close six hours before the week ends


@dataclass(frozen=True)
class SynthConfig:
    num_learners: int = 1000
    num_weeks: int = 14
    seed: int = 0
    course_start: int = 1_600_000_000
    hw_per_week: int = 4
    labs_per_week: int = 2
    volume_slope: float = -2.0
    timeliness_slope: float = -1.0
    grades_slope: float = -2.0
    hazard_noise: float = 0.5
    # engagement multipliers for the last and second-to-last active week of
    # learners who actually stop out; persisters never fade, and a 1-fade_prob
    # share of stopouts quit abruptly with no warning at all
    fade_depth: float = 0.5
    fade_ramp: float = 0.8
    fade_prob: float = 0.7
    # passive, forum, wiki, fully-collaborative shares; must sum to 1
    cohort_mix: tuple[float, float, float, float] = (0.55, 0.25, 0.10, 0.10)

    def __post_init__(self) -> None:
        if self.num_learners < 0:
            raise ConfigError(f"num_learners must be >= 0, got {self.num_learners}")
        if self.num_weeks < 2:
            raise ConfigError(f"num_weeks must be >= 2, got {self.num_weeks}")
        if self.hw_per_week < 1 or self.labs_per_week < 1:
            raise ConfigError("need at least one homework and one lab per week")
        if not (0.0 < self.fade_depth <= 1.0 and 0.0 < self.fade_ramp <= 1.0):
            raise ConfigError("fade multipliers must be in (0, 1]")
        if not 0.0 <= self.fade_prob <= 1.0:
            raise ConfigError(f"fade_prob must be in [0, 1], got {self.fade_prob}")
        if abs(sum(self.cohort_mix) - 1.0) > 1e-9 or min(self.cohort_mix) < 0.0:
            raise ConfigError(f"cohort_mix must be a distribution, got {self.cohort_mix}")


@dataclass(frozen=True, slots=True)
class TruthRow:
    learner_id: str
    cohort: str
    stopout_week: int
    volume: float
    timeliness: float
    grades: float


@dataclass
class SynthCourse:
    config: SynthConfig
    calendar: CourseCalendar
    events: list[tuple[str, ...]]  # raw rows in EVENT_COLUMNS order
    truth: list[TruthRow]


def build_calendar(config: SynthConfig) -> CourseCalendar:
    meta: dict[str, ProblemMeta] = {}
    for w in range(1, config.num_weeks + 1):
        due = config.course_start + w * WEEK_SECONDS - DUE_OFFSET
        for j in range(1, config.hw_per_week + 1):
            meta[f"w{w:02d}_hw{j}"] = ProblemMeta("homework", w, due)
        for j in range(1, config.labs_per_week + 1):
            meta[f"w{w:02d}_lab{j}"] = ProblemMeta("lab", w, due)
    return CourseCalendar(
        course_start=config.course_start, num_weeks=config.num_weeks, problem_meta=meta
    )


def _logit(q: float) -> float:
    return math.log(q / (1.0 - q))


def sample_stopout(
    config: SynthConfig,
    volume: float,
    timeliness: float,
    grades: float,
    rng: np.random.Generator,
) -> int:
    """Draw a stopout week from the latent-driver hazard chain."""
    W = config.num_weeks
    shift = (
        config.volume_slope * volume
        + config.timeliness_slope * timeliness
        + config.grades_slope * grades
    )
    for s in range(2, W + 1):
        base = _logit(1.0 / (W + 2 - s))
        noise = rng.normal(0.0, config.hazard_noise) if config.hazard_noise > 0 else 0.0
        z = base + shift + noise
        hazard = 1.0 / (1.0 + math.exp(-z)) if z >= 0 else math.exp(z) / (1.0 + math.exp(z))
        if rng.random() < hazard:
            return s
    return W + 1


def _obs_row(learner_id: str, ts: int, rid: str, kind: str) -> tuple[str, ...]:
    return (TABLE_OBSERVED, learner_id, str(ts), rid, kind, "", "", "", "", "")


def _sub_row(learner_id: str, ts: int, pid: str, correct: bool, kind: str) -> tuple[str, ...]:
    return (TABLE_SUBMISSION, learner_id, str(ts), "", "", pid, "1" if correct else "0", kind, "", "")


def _collab_row(learner_id: str, ts: int, kind: str, length: int) -> tuple[str, ...]:
    return (TABLE_COLLABORATION, learner_id, str(ts), "", "", "", "", "", kind, str(length))


def generate(config: SynthConfig) -> SynthCourse:
    """Generate a full course; one RNG stream makes the output reproducible."""
    rng = np.random.default_rng(config.seed)
    calendar = build_calendar(config)
    week_problems: dict[int, list[tuple[str, str]]] = {
        w: sorted(
            (pid, m.assignment_kind)
            for pid, m in calendar.problem_meta.items()
            if m.week_assigned == w
        )
        for w in range(1, config.num_weeks + 1)
    }
    digits = max(5, len(str(config.num_learners)))
    events: list[tuple[str, ...]] = []
    truth: list[TruthRow] = []

    for i in range(config.num_learners):
        lid = f"L{i:0{digits}d}"
        volume, timeliness, grades = (float(v) for v in rng.uniform(-1.0, 1.0, size=3))
        cohort = COHORTS[int(rng.choice(4, p=config.cohort_mix))]
        stopout = sample_stopout(config, volume, timeliness, grades, rng)
        truth.append(TruthRow(lid, cohort, stopout, volume, timeliness, grades))
        fades = bool(rng.random() < config.fade_prob)

        for w in range(1, stopout):
            week_s = config.course_start + (w - 1) * WEEK_SECONDS
            problems = week_problems[w]
            due = calendar.problem_meta[problems[0][0]].due_timestamp
            max_margin = due - week_s

            # learners who are about to stop out disengage first: the last
            # active week (and, milder, the one before) shrinks their volume,
            # deadline margin, and correctness
            fade = 1.0
            if fades and stopout <= config.num_weeks:
                if w == stopout - 1:
                    fade = config.fade_depth
                elif w == stopout - 2:
                    fade = config.fade_ramp
            p_correct = 1.0 / (1.0 + math.exp(-(0.9 + 1.6 * grades - 1.5 * (1.0 - fade))))

            # submissions: count rides the volume driver, earliness rides
            # timeliness, correctness rides grades
            k = int(np.clip(round((3.0 + 1.8 * volume) * fade + rng.normal(0.0, 0.6)), 1, len(problems)))
            picked = rng.choice(len(problems), size=k, replace=False)
            for pi in sorted(int(v) for v in picked):
                pid, kind = problems[pi]
                frac = (0.35 + 0.30 * timeliness) * fade * rng.uniform(0.5, 1.0)
                margin = int(np.clip(frac * max_margin, 60, max_margin - 60))
                t_final = due - margin
                correct = bool(rng.random() < p_correct)
                retries = int(rng.poisson(0.5 + 0.4 * max(0.0, -grades)))
                for r in range(retries, 0, -1):
                    t_retry = max(week_s, t_final - r * int(rng.integers(300, 7200)))
                    events.append(_sub_row(lid, t_retry, pid, False, kind))
                events.append(_sub_row(lid, t_final, pid, correct, kind))

            n_obs = int(np.clip(round((4.0 + 3.0 * volume) * fade + rng.normal(0.0, 0.8)), 1, 12))
            ts_list = sorted(int(v) for v in rng.integers(week_s, week_s + WEEK_SECONDS, size=n_obs))
            for j, ts in enumerate(ts_list):
                kind = ("lecture", "lecture", "book", "wiki", "forum")[int(rng.integers(0, 5))]
                events.append(_obs_row(lid, ts, f"{kind}_{w:02d}_{j}", kind))

            wants_forum = cohort in (FORUM, FULL)
            wants_wiki = cohort in (WIKI, FULL)
            if wants_forum and (w == 1 or rng.random() < 0.3):
                ts = int(rng.integers(week_s, week_s + WEEK_SECONDS))
                events.append(_collab_row(lid, ts, "forum_post", int(rng.integers(10, 400))))
                if rng.random() < 0.4:
                    ts2 = int(rng.integers(week_s, week_s + WEEK_SECONDS))
                    events.append(_collab_row(lid, ts2, "forum_response", int(rng.integers(5, 200))))
            if wants_wiki and (w == 1 or rng.random() < 0.25):
                ts = int(rng.integers(week_s, week_s + WEEK_SECONDS))
                events.append(_collab_row(lid, ts, "wiki_edit", int(rng.integers(20, 800))))

    return SynthCourse(config=config, calendar=calendar, events=events, truth=truth)


def write_events(course: SynthCourse, path: str | Path) -> None:
    rows = ["\t".join(EVENT_COLUMNS)]
    rows.extend("\t".join(r) for r in course.events)
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_truth(course: SynthCourse, path: str | Path) -> None:
    rows = ["learner_id\tcohort\tstopout_week\tvolume\ttimeliness\tgrades"]
    for t in course.truth:
        rows.append(
            f"{t.learner_id}\t{t.cohort}\t{t.stopout_week}"
            f"\t{t.volume!r}\t{t.timeliness!r}\t{t.grades!r}"
        )
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_truth(path: str | Path) -> list[TruthRow]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    out = []
    for ln in lines[1:]:
        if not ln:
            continue
        lid, cohort, week, vol, tim, gr = ln.split("\t")
        out.append(TruthRow(lid, cohort, int(week), float(vol), float(tim), float(gr)))
    return out
