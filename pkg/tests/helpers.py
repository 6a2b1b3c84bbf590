"""Shared builders for the test suite.

The exposure fixture below is the hand-computed reference case used by the
analysis and acceptance tests. Every expected number derives from integer
arithmetic done by hand, not from running the pipeline:

Baseline day (2017-10-09, fs2): one idle node reports, per 180 s window,
read_kb=100, read_ops=10, write_kb=100, write_ops=10, other=10 and 10 of each
metadata operation. With 20 windows per hour the hourly totals are 2000 KiB /
200 ops per direction, 200 other, and 200 per metadata stat, constant over 24
hours, so the daily means equal those totals exactly. With alpha=2 the risk
thresholds are 4000 KiB and 400 operations.

Report day (2017-10-10): the same idle node continues at baseline level
(risk-neutral, unattributed). Four jobs run 10:00..13:00 on four other nodes.
app1 is the aggressor, reading per window 20200 / 40200 / 40600 KiB in the
three hours and opening 520 / 540 / 540 files, so its hourly totals are
404000 / 804000 / 812000 KiB and 10400 / 10800 / 10800 opens:

    read_kb risk: (404000-4000)/4000 = 100, then 200, then 202
    open risk:    (10400-400)/400   =  25, then  26, then  26

apps 2..4 write 100 KiB per window (2000/hour, under threshold, risk 0).
Filesystem hourly risk is therefore (100, 200, 202) OSS and (25, 26, 26) MDS
for 10:00..12:00 and zero elsewhere. Every job spans exactly those three
hours, so each of the four exposures is 502 OSS / 77 MDS, identically.
"""

from __future__ import annotations

from dataclasses import dataclass

from lassi.model import (
    ALL_FIELDS,
    JobRecord,
    StatSample,
    vector_to_counters,
)
from lassi.timeutil import DAY, HOUR, parse_utc

BASE_DAY = parse_utc("2017-10-09T00:00:00Z")
REPORT_DAY = BASE_DAY + DAY

_JOB_SEQ = [0]


def mk_sample(fs_id, node_id, window_start, window_len=180, **counters) -> StatSample:
    vec = [0] * len(ALL_FIELDS)
    for stat, value in counters.items():
        vec[ALL_FIELDS.index(stat)] = value
    oss, mds = vector_to_counters(vec)
    return StatSample(
        fs_id=fs_id,
        node_id=node_id,
        window_start=window_start,
        oss=oss,
        mds=mds,
        window_len=window_len,
    )


def mk_job(
    app_id,
    nodes,
    start,
    end,
    command="aprun -n 36 ./ft_app.x",
    user="usr01",
    job_id=None,
) -> JobRecord:
    _JOB_SEQ[0] += 1
    return JobRecord(
        app_id=app_id,
        job_id=job_id or f"{9000 + _JOB_SEQ[0]}.sdb",
        user=user,
        start=start,
        end=end,
        nodes=frozenset(nodes) if not isinstance(nodes, frozenset) else nodes,
        command=command,
    )


@dataclass(frozen=True)
class ExposureFixture:
    samples: tuple[StatSample, ...]
    jobs: tuple[JobRecord, ...]
    baseline_period: tuple[int, int]
    report_day: int
    aggressor: str
    expected_oss_by_hour: dict[int, float]
    expected_mds_by_hour: dict[int, float]
    expected_exposure_oss: float
    expected_exposure_mds: float


def build_exposure_fixture(window_len: int = 180) -> ExposureFixture:
    per_hour = HOUR // window_len
    frozen = (2000, 200, 404000, 804000, 812000, 10400, 10800)
    if HOUR % window_len or any(v % per_hour for v in frozen):
        raise ValueError("window_len incompatible with the frozen fixture arithmetic")
    samples: list[StatSample] = []

    background = dict(
        read_kb=2000 // per_hour,
        read_ops=200 // per_hour,
        write_kb=2000 // per_hour,
        write_ops=200 // per_hour,
        other=200 // per_hour,
    )
    background.update({stat: 200 // per_hour for stat in ALL_FIELDS[5:]})

    for day in (BASE_DAY, REPORT_DAY):
        for i in range(DAY // window_len):
            samples.append(
                mk_sample("fs2", "nid00001", day + i * window_len, window_len, **background)
            )

    run_start = REPORT_DAY + 10 * HOUR
    run_end = REPORT_DAY + 13 * HOUR
    read_per_window = (404000 // per_hour, 804000 // per_hour, 812000 // per_hour)
    open_per_window = (10400 // per_hour, 10800 // per_hour, 10800 // per_hour)
    for hour_idx in range(3):
        hour_start = run_start + hour_idx * HOUR
        for i in range(per_hour):
            w = hour_start + i * window_len
            samples.append(
                mk_sample(
                    "fs2",
                    "nid00002",
                    w,
                    window_len,
                    read_kb=read_per_window[hour_idx],
                    open=open_per_window[hour_idx],
                )
            )
            for node in ("nid00003", "nid00004", "nid00005"):
                samples.append(
                    mk_sample("fs2", node, w, window_len, write_kb=2000 // per_hour)
                )

    jobs = tuple(
        mk_job(f"app{i}", [node], run_start, run_end)
        for i, node in enumerate(
            ("nid00002", "nid00003", "nid00004", "nid00005"), start=1
        )
    )

    return ExposureFixture(
        samples=tuple(samples),
        jobs=jobs,
        baseline_period=(BASE_DAY, BASE_DAY + DAY),
        report_day=REPORT_DAY,
        aggressor="app1",
        expected_oss_by_hour={run_start: 100.0, run_start + HOUR: 200.0, run_start + 2 * HOUR: 202.0},
        expected_mds_by_hour={run_start: 25.0, run_start + HOUR: 26.0, run_start + 2 * HOUR: 26.0},
        expected_exposure_oss=502.0,
        expected_exposure_mds=77.0,
    )


def scenario_text(
    seed: int = 1,
    days: int = 1,
    node_pool: int = 4,
    filesystems: str = "fs2:48",
    window_len: int = 180,
    background: str = "",
    actors: str = "",
) -> str:
    return (
        "[scenario]\n"
        f"seed = {seed}\n"
        "start = 2017-10-10T00:00:00Z\n"
        f"days = {days}\n"
        f"window_len = {window_len}\n"
        f"node_pool = {node_pool}\n"
        f"filesystems = {filesystems}\n"
        "alpha = 2.0\n"
        + background
        + actors
    )
