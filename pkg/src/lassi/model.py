"""Core value types: counter vectors, samples, jobs, and hourly aggregates.

Counters are cumulative-delta integers for one sampling window. OSS counters
cover data movement (KiB and operation counts), MDS counters cover the sixteen
metadata operations the servers report. All types are immutable; arithmetic
returns new values. Python ints are unbounded so summing never overflows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .timeutil import HOUR

OSS_FIELDS = ("read_kb", "read_ops", "write_kb", "write_ops", "other")
MDS_FIELDS = (
    "open",
    "close",
    "mknod",
    "link",
    "unlink",
    "mkdir",
    "rmdir",
    "ren",
    "getattr",
    "setattr",
    "getxattr",
    "setxattr",
    "statfs",
    "sync",
    "sdr",
    "cdr",
)
ALL_FIELDS = OSS_FIELDS + MDS_FIELDS


@dataclass(frozen=True, slots=True)
class OssCounters:
    """Data-movement counters for one window: volume in KiB plus op counts."""

    read_kb: int = 0
    read_ops: int = 0
    write_kb: int = 0
    write_ops: int = 0
    other: int = 0

    def __post_init__(self) -> None:
        if min(self.read_kb, self.read_ops, self.write_kb, self.write_ops, self.other) < 0:
            raise ValueError(f"negative counter in {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, ...]:
        return (self.read_kb, self.read_ops, self.write_kb, self.write_ops, self.other)

    def __add__(self, other: "OssCounters") -> "OssCounters":
        return OssCounters(
            self.read_kb + other.read_kb,
            self.read_ops + other.read_ops,
            self.write_kb + other.write_kb,
            self.write_ops + other.write_ops,
            self.other + other.other,
        )

    def is_zero(self) -> bool:
        return max(self.as_tuple()) == 0


@dataclass(frozen=True, slots=True)
class MdsCounters:
    """Metadata-operation counters for one window."""

    open: int = 0
    close: int = 0
    mknod: int = 0
    link: int = 0
    unlink: int = 0
    mkdir: int = 0
    rmdir: int = 0
    ren: int = 0
    getattr: int = 0
    setattr: int = 0
    getxattr: int = 0
    setxattr: int = 0
    statfs: int = 0
    sync: int = 0
    sdr: int = 0
    cdr: int = 0

    def __post_init__(self) -> None:
        if min(self.as_tuple()) < 0:
            raise ValueError(f"negative counter in {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, ...]:
        return (
            self.open,
            self.close,
            self.mknod,
            self.link,
            self.unlink,
            self.mkdir,
            self.rmdir,
            self.ren,
            self.getattr,
            self.setattr,
            self.getxattr,
            self.setxattr,
            self.statfs,
            self.sync,
            self.sdr,
            self.cdr,
        )

    def __add__(self, other: "MdsCounters") -> "MdsCounters":
        a = self.as_tuple()
        b = other.as_tuple()
        return MdsCounters(*(x + y for x, y in zip(a, b)))

    def is_zero(self) -> bool:
        return max(self.as_tuple()) == 0


def add_counters(a, b):
    """Field-wise sum of two counter values of the same type."""
    if type(a) is not type(b):
        raise TypeError(f"cannot add {type(a).__name__} and {type(b).__name__}")
    return a + b


def scale_counters(c, fraction: float):
    """Scale every field by ``fraction`` in [0, 1], rounding half to even.

    Used for proportional boundary-window attribution; the result is always
    field-wise between zero and the input.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction {fraction!r} outside [0, 1]")
    if fraction == 1.0:
        return c
    cls = type(c)
    return cls(*(round(v * fraction) for v in c.as_tuple()))


def counters_to_vector(oss: OssCounters, mds: MdsCounters) -> tuple[int, ...]:
    """Flatten an (OSS, MDS) pair into one tuple in ALL_FIELDS order."""
    return oss.as_tuple() + mds.as_tuple()


def vector_to_counters(vec) -> tuple[OssCounters, MdsCounters]:
    """Rebuild an (OSS, MDS) pair from a 21-entry vector in ALL_FIELDS order."""
    return OssCounters(*vec[:5]), MdsCounters(*vec[5:])


@dataclass(frozen=True, slots=True)
class StatSample:
    """Counters one node reported against one filesystem for one window.

    window_start must sit on the sampling grid: multiples of window_len,
    which itself divides an hour so hourly rollups never split a window.
    """

    fs_id: str
    node_id: str
    window_start: int
    oss: OssCounters
    mds: MdsCounters
    window_len: int = 180

    def __post_init__(self) -> None:
        if self.window_len <= 0 or HOUR % self.window_len != 0:
            raise ValueError(f"window_len {self.window_len} must divide 3600")
        if self.window_start % self.window_len != 0:
            raise ValueError(
                f"window_start {self.window_start} not aligned to {self.window_len}s grid"
            )
        if not self.fs_id or not self.node_id:
            raise ValueError("fs_id and node_id must be non-empty")

    def key(self) -> tuple[str, str, int]:
        return (self.fs_id, self.node_id, self.window_start)


@dataclass(frozen=True, slots=True)
class JobRecord:
    """One scheduler job: which nodes an application held, and when."""

    app_id: str
    job_id: str
    user: str
    start: int
    end: int
    nodes: frozenset[str]
    command: str

    def __post_init__(self) -> None:
        if not self.app_id:
            raise ValueError("app_id must be non-empty")
        if self.end <= self.start:
            raise ValueError(f"job {self.app_id}: end must be after start")
        if not self.nodes:
            raise ValueError(f"job {self.app_id}: node list is empty")

    @property
    def runtime_s(self) -> int:
        return self.end - self.start

    def overlaps(self, t0: int, t1: int) -> bool:
        return self.start < t1 and self.end > t0


@dataclass(frozen=True, slots=True)
class AppHourRecord:
    """One application's counters on one filesystem, summed over an hour.

    Hours inside a job's span with no activity are materialized with all-zero
    counters so downstream series have no gaps.
    """

    app_id: str
    fs_id: str
    hour: int
    oss: OssCounters
    mds: MdsCounters

    def __post_init__(self) -> None:
        if self.hour % HOUR != 0:
            raise ValueError(f"hour {self.hour} not aligned to hour grid")

    def key(self) -> tuple[str, str, int]:
        return (self.app_id, self.fs_id, self.hour)


@dataclass(frozen=True, slots=True)
class FsHourRecord:
    """Filesystem-wide hourly totals plus the portion no job accounts for."""

    fs_id: str
    hour: int
    oss: OssCounters
    mds: MdsCounters
    unattributed_oss: OssCounters
    unattributed_mds: MdsCounters

    def __post_init__(self) -> None:
        if self.hour % HOUR != 0:
            raise ValueError(f"hour {self.hour} not aligned to hour grid")
        for un, total in (
            (self.unattributed_oss, self.oss),
            (self.unattributed_mds, self.mds),
        ):
            for u, t in zip(un.as_tuple(), total.as_tuple()):
                if u > t:
                    raise ValueError(
                        f"unattributed portion {un.as_tuple()} exceeds totals "
                        f"{total.as_tuple()} for {self.fs_id}"
                    )

    def key(self) -> tuple[str, int]:
        return (self.fs_id, self.hour)
