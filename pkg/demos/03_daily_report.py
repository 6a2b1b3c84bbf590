"""Produce a filesystem health report bundle from raw counter files.

End-to-end store flow: generate two days of synthetic data, ingest the
CSVs into daily partitions, aggregate attributed hourly records, freeze a
baseline from the first day, and render the second day's report bundle
(JSON summary, CSV tables, SVG charts).
"""

import argparse
import tempfile
from pathlib import Path

from lassi.pipeline import aggregate_range, build_baselines, ingest_files
from lassi.report import build_daily_report, write_bundle
from lassi.store import Store
from lassi.synth import generate, parse_scenario
from lassi.timeutil import DAY

SCENARIO = """\
[scenario]
seed = 19
start = 2017-10-09T00:00:00Z
days = 2
window_len = 180
node_pool = 8
filesystems = fs2:48
alpha = 2.0

[background fs2]
read_kb = 80
read_ops = 0.2
write_kb = 120
write_ops = 0.3
open = 0.8
close = 0.8
getattr = 1.5
noise = 0.25

[actor storm]
type = taskfarm_mds_storm
fs = fs2
nodes = 2
tasks = 1
start_hour = 34
hours = 3
intensity = 3

[actor tracer]
type = small_write_tracer
fs = fs2
tasks = 1
start_hour = 38
hours = 2
intensity = 500
"""


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", help="working directory (default: a fresh temp dir)")
    args = parser.parse_args(argv)
    out = Path(args.out) if args.out else Path(tempfile.mkdtemp(prefix="lassi-demo-"))

    scenario = parse_scenario(SCENARIO)
    generated = generate(scenario, out / "data", with_oracle=False)
    print(f"generated {generated.sample_rows} samples, {len(generated.jobs)} jobs")

    store = Store(out / "store", window_len=scenario.window_len)
    summary = ingest_files(store, [generated.stats_path], [generated.jobs_path])
    print(f"ingested samples={summary.samples} jobs={summary.jobs}")

    agg = aggregate_range(store, scenario.start, scenario.end)
    print(
        f"aggregated {agg.app_hour_records} app-hour and"
        f" {agg.fs_hour_records} fs-hour records"
    )

    baseline_day = scenario.start
    baselines = build_baselines(store, baseline_day, baseline_day + DAY)
    means = baselines["fs2"].means
    print(f"baseline day means: read_kb={means['read_kb']:.0f} open={means['open']:.0f}")

    report_day = scenario.start + DAY
    bundle = build_daily_report(store, "fs2", report_day)
    peak_oss = max(bundle.oss.fs_risk)
    peak_mds = max(bundle.mds.fs_risk)
    print(f"report day peaks: OSS risk {peak_oss:.1f}, MDS risk {peak_mds:.1f}")
    for side, block in (("OSS", bundle.oss), ("MDS", bundle.mds)):
        for top in block.top:
            print(f"  top {side} contributor {top.app_id}: share {top.share:.2f}")

    report_dir = write_bundle(bundle, out)
    print(f"\nbundle written to {report_dir}:")
    for path in sorted(report_dir.iterdir()):
        print(f"  {path.name:<16} {path.stat().st_size:>8} bytes")


if __name__ == "__main__":
    main()
