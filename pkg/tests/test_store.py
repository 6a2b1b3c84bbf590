"""Partition store round-trips, bounds checks, locking, and baseline lookup."""

import os

import pytest

from lassi.errors import MissingBaselineError, StoreError, StoreLockError
from lassi.metrics import FsBaseline
from lassi.model import (
    ALL_FIELDS,
    AppHourRecord,
    FsHourRecord,
    OssCounters,
    MdsCounters,
)
from lassi.store import Partition, Store
from lassi.timeutil import DAY, HOUR, parse_utc

from helpers import BASE_DAY, mk_job, mk_sample


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "data")


def samples_partition(fs="fs2", date=BASE_DAY):
    return Partition("samples", fs, date)


def make_baseline(fs="fs2", fill=0.125, **overrides):
    means = {name: fill for name in ALL_FIELDS}
    means.update(overrides)
    return FsBaseline(
        fs_id=fs,
        period=(BASE_DAY - 7 * DAY, BASE_DAY),
        alpha=2.0,
        means=means,
        basis="fs_total",
    )


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition("nope", "fs2", BASE_DAY)
    with pytest.raises(ValueError):
        Partition("samples", "fs2", BASE_DAY + 1)
    assert Partition("jobs", None, BASE_DAY).relative_path().parts[1] == "all"


def test_samples_round_trip(store):
    samples = [
        mk_sample("fs2", "nid2", BASE_DAY + 360, read_kb=7),
        mk_sample("fs2", "nid1", BASE_DAY, write_ops=3),
        mk_sample("fs2", "nid1", BASE_DAY + 180, open=1),
    ]
    n = store.write_partition(samples, samples_partition())
    assert n == 3
    back = store.read_range("samples", "fs2", BASE_DAY, BASE_DAY + DAY)
    # canonical order: window, then fs, then node
    assert [(s.window_start, s.node_id) for s in back] == [
        (BASE_DAY, "nid1"),
        (BASE_DAY + 180, "nid1"),
        (BASE_DAY + 360, "nid2"),
    ]
    assert back[2].oss.read_kb == 7
    assert back[1].mds.open == 1


def test_read_range_filters_on_window_start(store):
    samples = [mk_sample("fs2", "nid1", BASE_DAY + i * 180) for i in range(4)]
    store.write_partition(samples, samples_partition())
    mid = store.read_range("samples", "fs2", BASE_DAY + 180, BASE_DAY + 540)
    assert [s.window_start for s in mid] == [BASE_DAY + 180, BASE_DAY + 360]


def test_read_range_rejects_empty_range(store):
    with pytest.raises(ValueError):
        store.read_range("samples", "fs2", BASE_DAY, BASE_DAY)


def test_write_partition_rejects_out_of_bounds(store):
    stray_day = mk_sample("fs2", "nid1", BASE_DAY + DAY)
    with pytest.raises(ValueError):
        store.write_partition([stray_day], samples_partition())
    stray_fs = mk_sample("fs3", "nid1", BASE_DAY)
    with pytest.raises(ValueError):
        store.write_partition([stray_fs], samples_partition())


def test_write_partition_rejects_reports_dataset(store):
    with pytest.raises(ValueError):
        store.write_partition([], Partition("reports", "fs2", BASE_DAY))


def test_jobs_round_trip_and_overlap_query(store):
    # ends after midnight; lives in the partition of its start day
    long_job = mk_job("app1", ["nid1"], BASE_DAY + 20 * HOUR, BASE_DAY + DAY + HOUR)
    short_job = mk_job("app2", ["nid2"], BASE_DAY + HOUR, BASE_DAY + 2 * HOUR)
    store.write_partition([long_job, short_job], Partition("jobs", None, BASE_DAY))

    next_day = store.query_jobs_overlapping(BASE_DAY + DAY, BASE_DAY + 2 * DAY)
    assert [j.app_id for j in next_day] == ["app1"]

    by_start = store.read_range("jobs", None, BASE_DAY + DAY, BASE_DAY + 2 * DAY)
    assert by_start == []

    both = store.query_jobs_overlapping(BASE_DAY, BASE_DAY + DAY)
    assert [j.app_id for j in both] == ["app2", "app1"]


def test_app_hours_round_trip(store):
    rec = AppHourRecord(
        app_id="app1",
        fs_id="fs2",
        hour=BASE_DAY + 3 * HOUR,
        oss=OssCounters(1, 2, 3, 4, 5),
        mds=MdsCounters(*range(16)),
    )
    store.write_partition([rec], Partition("app_hours", "fs2", BASE_DAY))
    (back,) = store.read_range("app_hours", "fs2", BASE_DAY, BASE_DAY + DAY)
    assert back == rec


def test_fs_hours_round_trip(store):
    rec = FsHourRecord(
        fs_id="fs2",
        hour=BASE_DAY,
        oss=OssCounters(10, 20, 30, 40, 50),
        mds=MdsCounters(*([6] * 16)),
        unattributed_oss=OssCounters(1, 2, 3, 4, 5),
        unattributed_mds=MdsCounters(*([1] * 16)),
    )
    store.write_partition([rec], Partition("fs_hours", "fs2", BASE_DAY))
    (back,) = store.read_range("fs_hours", "fs2", BASE_DAY, BASE_DAY + DAY)
    assert back == rec


def test_baseline_store_and_lookup(store):
    old = make_baseline(fill=0.25)
    new = make_baseline(fill=1 / 3, read_kb=1234.5)
    store.write_baseline(old, BASE_DAY)
    store.write_baseline(new, BASE_DAY + 2 * DAY)

    # label <= date picks the newest qualifying baseline, exactly as stored
    assert store.load_baseline("fs2", BASE_DAY) == old
    assert store.load_baseline("fs2", BASE_DAY + DAY) == old
    got = store.load_baseline("fs2", BASE_DAY + 3 * DAY)
    assert got == new
    assert got.means["read_kb"] == 1234.5
    assert got.means["open"] == 1 / 3


def test_missing_baseline_raises(store):
    with pytest.raises(MissingBaselineError) as err:
        store.load_baseline("fs2", BASE_DAY)
    assert "lassi baseline" in str(err.value)

    store.write_baseline(make_baseline(), BASE_DAY + DAY)
    with pytest.raises(MissingBaselineError):
        store.load_baseline("fs2", BASE_DAY)


def test_lock_conflict(store):
    partition = samples_partition()
    path = store.path(partition)
    path.parent.mkdir(parents=True)
    lock = path.with_name(path.name + ".lock")
    lock.touch()
    with pytest.raises(StoreLockError):
        store.write_partition([mk_sample("fs2", "nid1", BASE_DAY)], partition)
    lock.unlink()
    store.write_partition([mk_sample("fs2", "nid1", BASE_DAY)], partition)
    assert not lock.exists()


def test_no_temp_files_left_behind(store):
    store.write_partition([mk_sample("fs2", "nid1", BASE_DAY)], samples_partition())
    leftovers = [
        name
        for _, _, files in os.walk(store.root)
        for name in files
        if ".tmp" in name or name.endswith(".lock")
    ]
    assert leftovers == []


def test_stray_file_in_store_rejected(store):
    store.write_partition([mk_sample("fs2", "nid1", BASE_DAY)], samples_partition())
    (store.root / "samples" / "fs2" / "notes.csv").write_text("junk", encoding="utf-8")
    with pytest.raises(StoreError):
        store.partition_dates("samples", "fs2")


def test_corrupt_partition_surfaces_as_store_error(store):
    partition = samples_partition()
    path = store.path(partition)
    path.parent.mkdir(parents=True)
    path.write_text("wrong,header\n", encoding="utf-8")
    with pytest.raises(StoreError):
        store.read_range("samples", "fs2", BASE_DAY, BASE_DAY + DAY)


def test_list_fs(store):
    store.write_partition([mk_sample("fs2", "nid1", BASE_DAY)], samples_partition())
    store.write_partition(
        [mk_sample("fs1", "nid1", BASE_DAY)], samples_partition(fs="fs1")
    )
    assert store.list_fs("samples") == ["fs1", "fs2"]
    assert store.list_fs("baselines") == []


def test_rewrite_replaces_partition(store):
    partition = samples_partition()
    store.write_partition(
        [mk_sample("fs2", "nid1", BASE_DAY), mk_sample("fs2", "nid2", BASE_DAY)],
        partition,
    )
    store.write_partition([mk_sample("fs2", "nid9", BASE_DAY, read_ops=5)], partition)
    back = store.read_range("samples", "fs2", BASE_DAY, BASE_DAY + DAY)
    assert [(s.node_id, s.oss.read_ops) for s in back] == [("nid9", 5)]
