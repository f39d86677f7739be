"""Run reports and their on-disk layout.

A report collects arcs, certificates, constant ledgers, envelope checks,
and headline scalars from one scenario run.  ``emit_report`` writes arcs
as CSV, structured results as JSON, a plot-ready long-format CSV, and a
manifest listing everything.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..bounds import BoundLedger, EnvelopeReport
from ..hybrid_time import HybridArc, write_arc_csv
from ..pe_analysis import PECertificate


@dataclass
class RunReport:
    """Everything a scenario run produced."""

    name: str
    config: dict = field(default_factory=dict)
    csv_arcs: dict = field(default_factory=dict)       # name -> HybridArc
    state_arcs: dict = field(default_factory=dict)     # full arcs, not emitted
    certificates: dict = field(default_factory=dict)   # name -> PECertificate
    ledger: BoundLedger | None = None
    envelopes: dict = field(default_factory=dict)      # name -> EnvelopeReport
    scalars: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def _series_rows(name: str, arc: HybridArc):
    t, j, v = arc.ordered()
    flat = v.reshape(v.shape[0], -1)
    if flat.shape[1] != 1:
        raise ValueError(f"series {name!r} must be scalar-valued")
    for tt, jj, vv in zip(t, j, flat[:, 0]):
        yield (name, float(tt), int(jj), float(vv))


def emit_report(report: RunReport, out_dir) -> list:
    """Write the report under ``out_dir`` and return the file names written.

    Arcs land in ``<name>.csv``, certificates and envelope checks in
    ``<name>.json``, the ledger in ``bound_ledger.json``, all scalar arcs
    additionally in long-format ``series.csv`` (series, t, j, value), and
    ``manifest.json`` indexes the lot.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    for name, arc in sorted(report.csv_arcs.items()):
        fname = f"{name}.csv"
        write_arc_csv(arc, out / fname)
        written.append(fname)

    for name, cert in sorted(report.certificates.items()):
        fname = f"{name}.json"
        (out / fname).write_text(cert.to_json())
        written.append(fname)

    if report.ledger is not None:
        (out / "bound_ledger.json").write_text(report.ledger.to_json())
        written.append("bound_ledger.json")

    for name, env in sorted(report.envelopes.items()):
        fname = f"{name}.json"
        (out / fname).write_text(env.to_json())
        written.append(fname)

    scalar_arcs = {
        name: arc for name, arc in sorted(report.csv_arcs.items())
        if arc.value_shape in ((), (1,))
    }
    if scalar_arcs:
        with open(out / "series.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["series", "t", "j", "value"])
            for name, arc in scalar_arcs.items():
                for row in _series_rows(name, arc):
                    writer.writerow([row[0], repr(row[1]), row[2], repr(row[3])])
        written.append("series.csv")

    manifest = {
        "name": report.name,
        "config": report.config,
        "files": sorted(written),
        "scalars": {k: report.scalars[k] for k in sorted(report.scalars)},
        "timings": {k: report.timings[k] for k in sorted(report.timings)},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    written.append("manifest.json")
    return sorted(written)
