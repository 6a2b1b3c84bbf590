"""End-to-end flows: files into the store, store into aggregates and results.

Thin orchestration over the ingest, attribution, metric, and analysis modules;
all policy lives there. The store-facing flows partition by (filesystem, day)
and are idempotent: re-ingesting the same file changes nothing, re-aggregating
a range rewrites the same partitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .analysis import ExposureRecord, run_risk_exposure
from .attribution import (
    AttributionConfig,
    AttributionResult,
    aggregate_hourly,
    attribute,
    fs_hourly_totals,
)
from .errors import IngestError, LassiError
from .ingest import parse_jobs_csv, parse_stats_csv
from .metrics import FsBaseline, RiskSeries, compute_baseline, fs_risk_series, ops_quality
from .model import ALL_FIELDS, AppHourRecord, FsHourRecord, JobRecord, StatSample
from .store import Partition, Store
from .timeutil import DAY, HOUR, date_str, day_range, floor_day, floor_hour, hour_range

_N = len(ALL_FIELDS)


@dataclass(frozen=True)
class IngestSummary:
    samples: int
    jobs: int
    rejected: int
    partitions: int


@dataclass(frozen=True)
class AggregateSummary:
    filesystems: tuple[str, ...]
    app_hour_records: int
    fs_hour_records: int
    partitions: int


@dataclass(frozen=True)
class PipelineOutputs:
    """Everything the verifier compares against an oracle directory."""

    period: tuple[int, int]
    alpha: float
    app_hours: tuple[AppHourRecord, ...]
    fs_hours: tuple[FsHourRecord, ...]
    baselines: dict[str, FsBaseline]
    risk: dict[str, RiskSeries]
    ops: dict[str, tuple[tuple[int, float | None, float | None], ...]]
    exposures: tuple[ExposureRecord, ...]


def _merge(existing: Iterable, incoming: Iterable, key, mode: str, rejected: list) -> list:
    """Key-wise union, new records winning; strict mode refuses changes."""
    merged = {key(r): r for r in existing}
    for record in incoming:
        k = key(record)
        old = merged.get(k)
        if old is not None and old != record:
            if mode == "strict":
                raise IngestError(0, f"record {k} conflicts with stored data")
            rejected.append(k)
        merged[k] = record
    return list(merged.values())


def ingest_files(
    store: Store,
    stats_paths: Sequence[str | Path] = (),
    jobs_paths: Sequence[str | Path] = (),
    mode: str = "strict",
) -> IngestSummary:
    """Parse source CSVs and fold them into the store's daily partitions."""
    rejected = 0
    partitions = 0
    overridden: list = []

    samples: dict[tuple, StatSample] = {}
    for path in stats_paths:
        parsed, report = parse_stats_csv(path, mode, store.window_len)
        rejected += report.rows_rejected
        for s in parsed:
            old = samples.get(s.key())
            if old is not None and old != s:
                if mode == "strict":
                    raise IngestError(0, f"{path}: sample {s.key()} conflicts across inputs")
                overridden.append(s.key())
            samples[s.key()] = s

    jobs: dict[str, JobRecord] = {}
    for path in jobs_paths:
        parsed, report = parse_jobs_csv(path, mode)
        rejected += report.rows_rejected
        for j in parsed:
            old = jobs.get(j.app_id)
            if old is not None and old != j:
                if mode == "strict":
                    raise IngestError(0, f"{path}: job {j.app_id} conflicts across inputs")
                overridden.append(j.app_id)
            jobs[j.app_id] = j

    by_partition: dict[Partition, list[StatSample]] = {}
    for s in samples.values():
        p = Partition("samples", s.fs_id, floor_day(s.window_start))
        by_partition.setdefault(p, []).append(s)
    for partition, batch in sorted(by_partition.items(), key=lambda kv: kv[0].relative_path()):
        existing = _existing_samples(store, partition)
        merged = _merge(existing, batch, lambda s: s.key(), mode, overridden)
        store.write_partition(merged, partition)
        partitions += 1

    jobs_by_partition: dict[Partition, list[JobRecord]] = {}
    for j in jobs.values():
        p = Partition("jobs", None, floor_day(j.start))
        jobs_by_partition.setdefault(p, []).append(j)
    for partition, batch in sorted(
        jobs_by_partition.items(), key=lambda kv: kv[0].relative_path()
    ):
        existing = _existing_jobs(store, partition)
        merged = _merge(existing, batch, lambda j: j.app_id, mode, overridden)
        store.write_partition(merged, partition)
        partitions += 1

    # counted last so overrides of already-stored records are included
    rejected += len(overridden)
    return IngestSummary(
        samples=len(samples), jobs=len(jobs), rejected=rejected, partitions=partitions
    )


def _existing_samples(store: Store, partition: Partition) -> list[StatSample]:
    if not store.path(partition).exists():
        return []
    return store.read_range("samples", partition.fs_id, partition.date, partition.date + DAY)


def _existing_jobs(store: Store, partition: Partition) -> list[JobRecord]:
    if not store.path(partition).exists():
        return []
    return store.read_range("jobs", None, partition.date, partition.date + DAY)


def conservation_errors(
    samples: Iterable[StatSample], result: AttributionResult
) -> list[str]:
    """Window-level check: attributed + unattributed must equal the inputs."""
    totals: dict[tuple[str, int], list[int]] = {}
    for s in samples:
        key = (s.fs_id, s.window_start)
        vec = s.oss.as_tuple() + s.mds.as_tuple()
        slot = totals.setdefault(key, [0] * _N)
        for i in range(_N):
            slot[i] += vec[i]

    recon: dict[tuple[str, int], list[int]] = {}
    for (app_id, fs_id, w), vec in result.attributed.items():
        slot = recon.setdefault((fs_id, w), [0] * _N)
        for i in range(_N):
            slot[i] += vec[i]
    for (fs_id, w), vec in result.unattributed.items():
        slot = recon.setdefault((fs_id, w), [0] * _N)
        for i in range(_N):
            slot[i] += vec[i]

    problems = []
    for key in sorted(set(totals) | set(recon)):
        got = recon.get(key, [0] * _N)
        want = totals.get(key, [0] * _N)
        if got != want:
            fs_id, w = key
            for i in range(_N):
                if got[i] != want[i]:
                    problems.append(
                        f"{fs_id} window {w} {ALL_FIELDS[i]}: "
                        f"attributed+unattributed {got[i]} != sampled {want[i]}"
                    )
    return problems


def _check_hourly_conservation(
    app_hours: Sequence[AppHourRecord], fs_hours: Sequence[FsHourRecord]
) -> None:
    sums: dict[tuple[str, int], list[int]] = {}
    for rec in app_hours:
        slot = sums.setdefault((rec.fs_id, rec.hour), [0] * _N)
        vec = rec.oss.as_tuple() + rec.mds.as_tuple()
        for i in range(_N):
            slot[i] += vec[i]
    for rec in fs_hours:
        total = rec.oss.as_tuple() + rec.mds.as_tuple()
        un = rec.unattributed_oss.as_tuple() + rec.unattributed_mds.as_tuple()
        attributed = sums.get((rec.fs_id, rec.hour), [0] * _N)
        for i in range(_N):
            if attributed[i] + un[i] != total[i]:
                raise LassiError(
                    f"conservation violated for {rec.fs_id} hour {rec.hour} "
                    f"{ALL_FIELDS[i]}: {attributed[i]} + {un[i]} != {total[i]}"
                )


def aggregate_range(
    store: Store,
    t0: int,
    t1: int,
    config: AttributionConfig | None = None,
) -> AggregateSummary:
    """Attribute stored samples over [t0, t1) and write hourly partitions.

    The range must be day-aligned because partitions are daily. Partitions
    are written for every (filesystem, day) in range, header-only when idle,
    so later stages can tell an idle day from a day never aggregated.
    """
    if t0 % DAY or t1 % DAY:
        raise ValueError("aggregate range must be day-aligned")
    if t1 <= t0:
        raise ValueError("aggregate range is empty")
    if config is None:
        config = AttributionConfig(window_len=store.window_len)

    fs_ids = store.list_fs("samples")
    samples: list[StatSample] = []
    for fs_id in fs_ids:
        samples.extend(store.read_range("samples", fs_id, t0, t1))
    jobs = store.query_jobs_overlapping(t0, t1)

    result = attribute(samples, jobs, config)
    app_hours = aggregate_hourly(result, jobs, span=(t0, t1))
    fs_hours = fs_hourly_totals(samples, result)
    _check_hourly_conservation(app_hours, fs_hours)

    seen_fs = sorted(set(fs_ids) | {r.fs_id for r in app_hours})
    partitions = 0
    for fs_id in seen_fs:
        for day in day_range(t0, t1):
            day_apps = [r for r in app_hours if r.fs_id == fs_id and day <= r.hour < day + DAY]
            day_fs = [r for r in fs_hours if r.fs_id == fs_id and day <= r.hour < day + DAY]
            store.write_partition(day_apps, Partition("app_hours", fs_id, day))
            store.write_partition(day_fs, Partition("fs_hours", fs_id, day))
            partitions += 2

    return AggregateSummary(
        filesystems=tuple(seen_fs),
        app_hour_records=len(app_hours),
        fs_hour_records=len(fs_hours),
        partitions=partitions,
    )


def build_baselines(
    store: Store,
    t0: int,
    t1: int,
    alpha: float = 2.0,
    fs_ids: Sequence[str] | None = None,
    label_date: int | None = None,
) -> dict[str, FsBaseline]:
    """Compute and store per-filesystem baselines over [t0, t1).

    The stored label defaults to the period's first day, so reports for that
    day onward resolve it.
    """
    if fs_ids is None:
        fs_ids = store.list_fs("fs_hours")
    if not fs_ids:
        raise ValueError("no aggregated filesystems; run `lassi aggregate` first")
    label = floor_day(label_date if label_date is not None else t0)
    out: dict[str, FsBaseline] = {}
    for fs_id in fs_ids:
        records = store.read_range("fs_hours", fs_id, t0, t1)
        baseline = compute_baseline(records, (t0, t1), alpha, fs_id)
        store.write_baseline(baseline, label)
        out[fs_id] = baseline
    return out


def compute_outputs(
    samples: Sequence[StatSample],
    jobs: Sequence[JobRecord],
    period: tuple[int, int],
    alpha: float = 2.0,
    config: AttributionConfig | None = None,
) -> PipelineOutputs:
    """Run the full in-memory pipeline over one period.

    Exposures are computed for every (job, filesystem) pair with attributed
    activity; jobs must lie inside the period or the risk series cannot
    cover them.
    """
    t0, t1 = period
    if t0 % HOUR or t1 % HOUR or t1 <= t0:
        raise ValueError("period must be hour-aligned and non-empty")
    if config is None:
        config = AttributionConfig()

    result = attribute(samples, jobs, config)
    app_hours = tuple(aggregate_hourly(result, jobs, span=period))
    fs_hours = tuple(fs_hourly_totals(samples, result))
    grid = tuple(hour_range(t0, t1))

    fs_ids = sorted({r.fs_id for r in fs_hours})
    baselines: dict[str, FsBaseline] = {}
    risk: dict[str, RiskSeries] = {}
    ops: dict[str, tuple] = {}
    for fs_id in fs_ids:
        fs_records = [r for r in fs_hours if r.fs_id == fs_id]
        baseline = compute_baseline(fs_records, period, alpha, fs_id)
        baselines[fs_id] = baseline
        app_records = [r for r in app_hours if r.fs_id == fs_id]
        risk[fs_id] = fs_risk_series(app_records, baseline, hours=grid)
        by_hour = {r.hour: r for r in fs_records}
        entries = []
        for hour in grid:
            rec = by_hour.get(hour)
            if rec is None:
                entries.append((hour, None, None))
            else:
                q = ops_quality(rec.oss)
                entries.append((hour, q.read_kb_ops, q.write_kb_ops))
        ops[fs_id] = tuple(entries)

    pairs = {(r.app_id, r.fs_id) for r in app_hours}
    exposures = []
    for job in sorted(jobs, key=lambda j: j.app_id):
        for fs_id in fs_ids:
            if (job.app_id, fs_id) in pairs:
                exposures.append(run_risk_exposure(job, risk[fs_id]))

    return PipelineOutputs(
        period=period,
        alpha=alpha,
        app_hours=app_hours,
        fs_hours=fs_hours,
        baselines=baselines,
        risk=risk,
        ops=ops,
        exposures=tuple(exposures),
    )


def compute_outputs_from_files(
    stats_path: str | Path,
    jobs_path: str | Path,
    period: tuple[int, int],
    alpha: float = 2.0,
    window_len: int = 180,
    boundary_policy: str = "midpoint",
) -> PipelineOutputs:
    """Parse source CSVs strictly, then run the in-memory pipeline."""
    samples, _ = parse_stats_csv(stats_path, "strict", window_len)
    jobs, _ = parse_jobs_csv(jobs_path, "strict")
    config = AttributionConfig(boundary_policy=boundary_policy, window_len=window_len)
    return compute_outputs(samples, jobs, period, alpha, config)


def find_job(store: Store, app_id: str) -> JobRecord:
    """Locate one job by app_id; scans every stored jobs partition."""
    for day in store.partition_dates("jobs", None):
        for job in store.read_range("jobs", None, day, day + DAY):
            if job.app_id == app_id:
                return job
    raise ValueError(f"no job with app_id {app_id!r} in the store")


def exposure_for(
    store: Store,
    app_id: str,
    fs_id: str | None = None,
    alpha: float | None = None,
) -> list[ExposureRecord]:
    """Ambient filesystem risk summed over one run's hours.

    Uses the stored baseline effective on the job's start date. Without an
    explicit filesystem, every filesystem with attributed activity for the
    app during its run is reported.
    """
    job = find_job(store, app_id)
    t0 = floor_hour(job.start)
    grid = tuple(hour_range(t0, job.end))
    t1 = grid[-1] + HOUR

    candidates = [fs_id] if fs_id else store.list_fs("app_hours")
    out: list[ExposureRecord] = []
    for fs in candidates:
        for day in day_range(t0, t1):
            if not store.path(Partition("fs_hours", fs, day)).exists():
                raise FileNotFoundError(
                    f"no aggregates for {fs} on {date_str(day)}; run `lassi aggregate` first"
                )
        records = store.read_range("app_hours", fs, t0, t1)
        if fs_id is None and not any(r.app_id == app_id for r in records):
            continue
        baseline = store.load_baseline(fs, floor_day(job.start))
        if alpha is not None and alpha != baseline.alpha:
            baseline = FsBaseline(
                fs_id=baseline.fs_id,
                period=baseline.period,
                alpha=alpha,
                means=baseline.means,
                basis=baseline.basis,
            )
        series = fs_risk_series(records, baseline, hours=grid)
        out.append(run_risk_exposure(job, series))
    if not out:
        raise ValueError(f"app {app_id!r} has no attributed activity; pass an explicit fs")
    return out
