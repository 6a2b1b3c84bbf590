"""Attribute per-node samples to the application runs that occupied the nodes.

Node use is exclusive: two jobs holding the same node at the same time is a
hard error, not a tie to break. Windows fully inside a job's [start, end) go
to that job; boundary windows follow the configured policy:

* midpoint: the whole window goes to the job active at the window's midpoint,
  or to the unattributed remainder if none is.
* proportional: each overlapping job receives its overlap fraction of the
  counters via cumulative half-to-even rounding, and the exact leftover stays
  unattributed, so per-window conservation holds field by field.

Samples on idle nodes accumulate into the unattributed remainder, which is
how rogue background load stays visible in filesystem totals.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import AttributionConflictError
from .model import (
    ALL_FIELDS,
    AppHourRecord,
    FsHourRecord,
    JobRecord,
    StatSample,
    vector_to_counters,
)
from .timeutil import HOUR, floor_hour

BOUNDARY_POLICIES = ("midpoint", "proportional")

_N = len(ALL_FIELDS)
_ZEROS = (0,) * _N


@dataclass(frozen=True, slots=True)
class AttributionConfig:
    boundary_policy: str = "midpoint"
    window_len: int = 180

    def __post_init__(self) -> None:
        if self.boundary_policy not in BOUNDARY_POLICIES:
            raise ValueError(
                f"boundary_policy must be one of {BOUNDARY_POLICIES}, "
                f"got {self.boundary_policy!r}"
            )
        if self.window_len <= 0 or HOUR % self.window_len != 0:
            raise ValueError(f"window_len {self.window_len} must divide 3600")


@dataclass(frozen=True)
class AttributionResult:
    """Counter vectors keyed by (app_id, fs_id, window_start), plus the
    unattributed remainder keyed by (fs_id, window_start).

    Vectors hold the 21 counters in ALL_FIELDS order; use
    model.vector_to_counters to get typed values back.
    """

    attributed: dict[tuple[str, str, int], tuple[int, ...]]
    unattributed: dict[tuple[str, int], tuple[int, ...]]


def _node_index(jobs: Sequence[JobRecord]):
    """Per-node job intervals sorted by start; rejects overlaps up front."""
    seen_apps: set[str] = set()
    by_node: dict[str, list[JobRecord]] = {}
    for job in jobs:
        if job.app_id in seen_apps:
            raise ValueError(f"duplicate app_id {job.app_id!r} in job list")
        seen_apps.add(job.app_id)
        for node in job.nodes:
            by_node.setdefault(node, []).append(job)
    index: dict[str, tuple[list[int], list[JobRecord]]] = {}
    for node, node_jobs in by_node.items():
        node_jobs.sort(key=lambda j: (j.start, j.app_id))
        for a, b in zip(node_jobs, node_jobs[1:]):
            if b.start < a.end:
                raise AttributionConflictError(node, a.app_id, b.app_id)
        index[node] = ([j.start for j in node_jobs], node_jobs)
    return index


def _accumulate(acc: dict, key, vec) -> None:
    slot = acc.get(key)
    if slot is None:
        acc[key] = list(vec)
    else:
        for i in range(_N):
            slot[i] += vec[i]


def attribute(
    samples: Iterable[StatSample],
    jobs: Sequence[JobRecord],
    config: AttributionConfig = AttributionConfig(),
) -> AttributionResult:
    """Split samples between the jobs occupying their nodes.

    Raises AttributionConflictError if any two jobs overlap on a node.
    """
    index = _node_index(jobs)
    midpoint = config.boundary_policy == "midpoint"
    attributed: dict = {}
    unattributed: dict = {}

    for sample in samples:
        vec = sample.oss.as_tuple() + sample.mds.as_tuple()
        w = sample.window_start
        wlen = sample.window_len
        entry = index.get(sample.node_id)
        if entry is None:
            _accumulate(unattributed, (sample.fs_id, w), vec)
            continue
        starts, node_jobs = entry

        if midpoint:
            # Doubled arithmetic keeps odd window lengths exact; the job
            # covers the midpoint iff 2*start <= 2*w + wlen < 2*end, and
            # non-overlapping intervals leave exactly one candidate.
            mid2 = 2 * w + wlen
            i = bisect_right(starts, mid2 // 2) - 1
            if i >= 0 and mid2 < 2 * node_jobs[i].end:
                _accumulate(attributed, (node_jobs[i].app_id, sample.fs_id, w), vec)
            else:
                _accumulate(unattributed, (sample.fs_id, w), vec)
            continue

        # proportional: walk jobs overlapping [w, w + wlen) in start order
        w_end = w + wlen
        i = bisect_right(starts, w_end) - 1
        shares: list[tuple[JobRecord, int]] = []
        while i >= 0:
            job = node_jobs[i]
            if job.end <= w:
                # non-overlapping jobs sorted by start have sorted ends
                break
            if job.start < w_end:
                overlap = min(job.end, w_end) - max(job.start, w)
                if overlap > 0:
                    shares.append((job, overlap))
            i -= 1
        if not shares:
            _accumulate(unattributed, (sample.fs_id, w), vec)
            continue
        shares.reverse()
        cum = 0
        prev = _ZEROS
        for job, overlap in shares:
            cum += overlap
            if cum >= wlen:
                scaled = vec
            else:
                fraction = cum / wlen
                scaled = tuple(round(v * fraction) for v in vec)
            _accumulate(
                attributed,
                (job.app_id, sample.fs_id, w),
                [a - b for a, b in zip(scaled, prev)],
            )
            prev = scaled
        if prev != vec:
            _accumulate(
                unattributed,
                (sample.fs_id, w),
                [a - b for a, b in zip(vec, prev)],
            )

    return AttributionResult(
        attributed={k: tuple(v) for k, v in attributed.items()},
        unattributed={k: tuple(v) for k, v in unattributed.items()},
    )


def aggregate_hourly(
    result: AttributionResult,
    jobs: Sequence[JobRecord],
    span: tuple[int, int] | None = None,
) -> list[AppHourRecord]:
    """Roll attributed windows up to (app, fs, hour) records.

    Every hour a job's [start, end) touches gets a record for each filesystem
    the app was seen on, all-zero when the app was idle there, so risk series
    built from these records have no gaps. ``span`` clamps that materialized
    range, for aggregating one day of a longer job.
    """
    acc: dict[tuple[str, str, int], list[int]] = {}
    for (app_id, fs_id, w), vec in result.attributed.items():
        _accumulate(acc, (app_id, fs_id, w - w % HOUR), vec)

    jobs_by_id = {j.app_id: j for j in jobs}
    for app_id, fs_id in {(a, f) for (a, f, _) in result.attributed}:
        job = jobs_by_id.get(app_id)
        if job is None:
            raise ValueError(f"attributed app {app_id!r} missing from job list")
        first = floor_hour(job.start)
        last = floor_hour(job.end - 1)
        if span is not None:
            first = max(first, floor_hour(span[0]))
            last = min(last, floor_hour(span[1] - 1))
        for hour in range(first, last + 1, HOUR):
            acc.setdefault((app_id, fs_id, hour), list(_ZEROS))

    records = []
    for (app_id, fs_id, hour), vec in sorted(acc.items(), key=lambda kv: (kv[0][2], kv[0][1], kv[0][0])):
        oss, mds = vector_to_counters(vec)
        records.append(AppHourRecord(app_id=app_id, fs_id=fs_id, hour=hour, oss=oss, mds=mds))
    return records


def fs_hourly_totals(
    samples: Iterable[StatSample], result: AttributionResult
) -> list[FsHourRecord]:
    """Per (fs, hour) totals over all samples plus the unattributed portion.

    Hours with no samples produce no record.
    """
    totals: dict[tuple[str, int], list[int]] = {}
    for sample in samples:
        vec = sample.oss.as_tuple() + sample.mds.as_tuple()
        _accumulate(totals, (sample.fs_id, sample.window_start - sample.window_start % HOUR), vec)

    unattr: dict[tuple[str, int], list[int]] = {}
    for (fs_id, w), vec in result.unattributed.items():
        _accumulate(unattr, (fs_id, w - w % HOUR), vec)

    records = []
    for (fs_id, hour), vec in sorted(totals.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        oss, mds = vector_to_counters(vec)
        un_oss, un_mds = vector_to_counters(unattr.get((fs_id, hour), _ZEROS))
        records.append(
            FsHourRecord(
                fs_id=fs_id,
                hour=hour,
                oss=oss,
                mds=mds,
                unattributed_oss=un_oss,
                unattributed_mds=un_mds,
            )
        )
    return records
