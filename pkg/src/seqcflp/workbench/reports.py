"""CSV report emission.

Column sets are stable:

* solve reports: ``Instance, Config, Separation, Objective, Time(s),
  #Cuts, #Nodes, Gap_1, Gap_3, Gap_10, Status``
* beta sweeps: ``Beta, Objective, Time(s), #Cuts, #Nodes, Status``

Gaps are percentages with two decimals (``N/A`` when no optimum was
proved); objectives carry six decimals.  With timing omitted the
``Time(s)`` cell is empty, which keeps reports byte-identical across
runs of the same seed and configuration.
"""

from __future__ import annotations

import csv

__all__ = ["SOLVE_COLUMNS", "SWEEP_COLUMNS", "format_gap", "solve_row", "write_csv"]

SOLVE_COLUMNS = [
    "Instance",
    "Config",
    "Separation",
    "Objective",
    "Time(s)",
    "#Cuts",
    "#Nodes",
    "Gap_1",
    "Gap_3",
    "Gap_10",
    "Status",
]

SWEEP_COLUMNS = ["Beta", "Objective", "Time(s)", "#Cuts", "#Nodes", "Status"]


def format_gap(gap: float | None) -> str:
    return "N/A" if gap is None else f"{100.0 * gap:.2f}%"


def _time_cell(doc: dict) -> str:
    return f"{doc['wall_time']:.2f}" if "wall_time" in doc else ""


def solve_row(name: str, doc: dict) -> list[str]:
    """Flatten one solve-report document into a CSV row."""
    trace = doc.get("gap_trace", {})
    return [
        name,
        doc["config"]["cuts"],
        doc["config"]["separation"],
        f"{doc['z_best']:.6f}",
        _time_cell(doc),
        str(doc["num_cuts"]["total"]),
        str(doc["num_nodes"]),
        format_gap(trace.get("1")),
        format_gap(trace.get("3")),
        format_gap(trace.get("10")),
        doc["status"],
    ]


def sweep_row(doc: dict) -> list[str]:
    return [
        f"{doc['beta']:g}",
        f"{doc['z_best']:.6f}",
        _time_cell(doc),
        str(doc["num_cuts"]["total"]),
        str(doc["num_nodes"]),
        doc["status"],
    ]


def write_csv(path: str, columns: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)
