"""CSV ingest and canonical serialization for samples and job records.

Stats files carry one row per (filesystem, node, window) with 21 counters:

    window_start,fs,node,read_kb,read_ops,write_kb,write_ops,other,open,close,
    mknod,link,unlink,mkdir,rmdir,ren,getattr,setattr,getxattr,setxattr,
    statfs,sync,sdr,cdr

Job files carry one row per application run:

    app_id,job_id,user,start,end,nodes,command

Timestamps are ISO-8601 UTC with a trailing Z. The nodes field joins node ids
with ';'. The command field is RFC-4180 quoted when it contains commas or
quotes. Canonical form (what the serializers emit) is LF line endings, minimal
quoting, rows sorted by primary key; parsing a canonical file and serializing
the result reproduces it byte for byte.

Strict mode raises IngestError at the first invalid row. Lenient mode skips
invalid rows and reports them; a duplicate key in lenient mode keeps the last
occurrence and counts the superseded row as rejected.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Union

from .errors import IngestError
from .model import JobRecord, MdsCounters, OssCounters, StatSample
from .timeutil import format_utc, parse_utc

STATS_HEADER = (
    "window_start",
    "fs",
    "node",
    "read_kb",
    "read_ops",
    "write_kb",
    "write_ops",
    "other",
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

JOBS_HEADER = ("app_id", "job_id", "user", "start", "end", "nodes", "command")

MODES = ("strict", "lenient")

Source = Union[str, Path, IO[str], IO[bytes]]


@dataclass(frozen=True, slots=True)
class IngestReport:
    """Row accounting for one parsed file.

    rows_read counts data rows only (no header) and always equals
    rows_accepted + rows_rejected.
    """

    rows_read: int
    rows_accepted: int
    rows_rejected: int
    first_error_line: int | None = None
    rejected_reasons: tuple[tuple[int, str], ...] = field(default=())


def _open_source(source: Source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), True
    if hasattr(source, "read"):
        probe = source.read(0)
        if isinstance(probe, bytes):
            return io.TextIOWrapper(source, encoding="utf-8", newline=""), False
        return source, False
    raise TypeError(f"cannot read from {type(source).__name__}")


def _check_header(row: list[str] | None, expected: tuple[str, ...]) -> None:
    if row is None:
        raise IngestError(1, "empty file: missing header")
    if tuple(row) != expected:
        raise IngestError(1, f"bad header {row!r}; expected {','.join(expected)}")


class _Rejects:
    """Collects rejections in lenient mode; raises immediately in strict."""

    def __init__(self, mode: str):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self.strict = mode == "strict"
        self.rows: list[tuple[int, str]] = []

    def add(self, line: int, reason: str) -> None:
        if self.strict:
            raise IngestError(line, reason)
        self.rows.append((line, reason))

    def report(self, rows_read: int, rows_accepted: int) -> IngestReport:
        rows = sorted(self.rows)
        return IngestReport(
            rows_read=rows_read,
            rows_accepted=rows_accepted,
            rows_rejected=len(rows),
            first_error_line=rows[0][0] if rows else None,
            rejected_reasons=tuple(rows),
        )


def parse_stats_csv(
    source: Source, mode: str = "strict", window_len: int = 180
) -> tuple[list[StatSample], IngestReport]:
    """Parse a stats CSV into samples plus an ingest report."""
    rejects = _Rejects(mode)
    stream, owned = _open_source(source)
    samples: list[StatSample] = []
    index: dict[tuple[str, str, int], tuple[int, int]] = {}
    rows_read = 0
    try:
        reader = csv.reader(stream)
        _check_header(next(reader, None), STATS_HEADER)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            rows_read += 1
            if len(row) != len(STATS_HEADER):
                rejects.add(line_no, f"expected {len(STATS_HEADER)} columns, got {len(row)}")
                continue
            try:
                window_start = parse_utc(row[0])
            except ValueError:
                rejects.add(line_no, f"bad timestamp {row[0]!r}")
                continue
            try:
                vals = [int(v) for v in row[3:]]
            except ValueError:
                rejects.add(line_no, "non-integer counter value")
                continue
            try:
                sample = StatSample(
                    fs_id=row[1],
                    node_id=row[2],
                    window_start=window_start,
                    oss=OssCounters(*vals[:5]),
                    mds=MdsCounters(*vals[5:]),
                    window_len=window_len,
                )
            except ValueError as exc:
                rejects.add(line_no, str(exc))
                continue
            key = sample.key()
            prev = index.get(key)
            if prev is None:
                index[key] = (len(samples), line_no)
                samples.append(sample)
            else:
                prev_pos, prev_line = prev
                if rejects.strict:
                    raise IngestError(line_no, f"duplicate sample for {key}")
                rejects.rows.append(
                    (prev_line, f"duplicate (fs, node, window) superseded by line {line_no}")
                )
                samples[prev_pos] = sample
                index[key] = (prev_pos, line_no)
    finally:
        if owned:
            stream.close()
    return samples, rejects.report(rows_read, len(samples))


def parse_jobs_csv(source: Source, mode: str = "strict") -> tuple[list[JobRecord], IngestReport]:
    """Parse a jobs CSV into job records plus an ingest report."""
    rejects = _Rejects(mode)
    stream, owned = _open_source(source)
    jobs: list[JobRecord] = []
    seen: dict[str, int] = {}
    rows_read = 0
    try:
        reader = csv.reader(stream)
        _check_header(next(reader, None), JOBS_HEADER)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            rows_read += 1
            if len(row) != len(JOBS_HEADER):
                rejects.add(line_no, f"expected {len(JOBS_HEADER)} columns, got {len(row)}")
                continue
            app_id = row[0]
            if app_id in seen:
                rejects.add(line_no, "duplicate app_id")
                continue
            try:
                start = parse_utc(row[3])
                end = parse_utc(row[4])
            except ValueError as exc:
                rejects.add(line_no, f"bad timestamp: {exc}")
                continue
            nodes = frozenset(n for n in (t.strip() for t in row[5].split(";")) if n)
            if not row[6].strip():
                rejects.add(line_no, "empty command")
                continue
            try:
                job = JobRecord(
                    app_id=app_id,
                    job_id=row[1],
                    user=row[2],
                    start=start,
                    end=end,
                    nodes=nodes,
                    command=row[6],
                )
            except ValueError as exc:
                rejects.add(line_no, str(exc))
                continue
            seen[app_id] = line_no
            jobs.append(job)
    finally:
        if owned:
            stream.close()
    return jobs, rejects.report(rows_read, len(jobs))


def stats_rows(samples: Iterable[StatSample]) -> list[tuple]:
    """Canonical row tuples for samples, sorted by (window, fs, node)."""
    ordered = sorted(samples, key=lambda s: (s.window_start, s.fs_id, s.node_id))
    return [
        (format_utc(s.window_start), s.fs_id, s.node_id)
        + s.oss.as_tuple()
        + s.mds.as_tuple()
        for s in ordered
    ]


def jobs_rows(jobs: Iterable[JobRecord]) -> list[tuple]:
    """Canonical row tuples for jobs, sorted by (start, app_id)."""
    ordered = sorted(jobs, key=lambda j: (j.start, j.app_id))
    return [
        (
            j.app_id,
            j.job_id,
            j.user,
            format_utc(j.start),
            format_utc(j.end),
            ";".join(sorted(j.nodes)),
            j.command,
        )
        for j in ordered
    ]


def _write_csv(header: tuple[str, ...], rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def serialize_stats_csv(samples: Iterable[StatSample]) -> str:
    """Render samples in canonical stats CSV form."""
    return _write_csv(STATS_HEADER, stats_rows(samples))


def serialize_jobs_csv(jobs: Iterable[JobRecord]) -> str:
    """Render job records in canonical jobs CSV form."""
    return _write_csv(JOBS_HEADER, jobs_rows(jobs))
