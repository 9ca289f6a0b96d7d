"""Plot-ready CSV tables built from report records."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Callable, Iterable

TABLES = {
    "decay.csv": ["name", "scaled_time", "kernel_l1", "j"],
    "block_decay.csv": ["name", "scaled_time", "ratio", "j"],
    "refinement.csv": ["check", "name", "level", "value"],
    "ratio_vs_p.csv": ["check", "name", "p", "k", "alpha", "ratio", "stderr"],
}


def _level(check: str, entry: list) -> tuple[str, float]:
    if check == "lemma3":
        label, steps, jc, value = entry
        return f"{label}:time_steps={steps},j_count={jc}", value
    n, value = entry[0], entry[-1]
    return f"n={n}", value


def _select(records: Iterable[dict], selector) -> list[dict]:
    if selector is None:
        return list(records)
    if isinstance(selector, str):
        return [r for r in records if r.get("check") == selector]
    return [r for r in records if selector(r)]


def emit_plot_data(records: Iterable[dict], out_dir: str | Path,
                   selector: str | Callable[[dict], bool] | None = None) -> dict[str, Path]:
    """Write every table in ``TABLES`` under ``out_dir``.

    ``selector`` is a check name or a predicate on records.  Tables with no
    matching rows are written with their header only.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = {name: [] for name in TABLES}
    for rec in _select(records, selector):
        rep = rec.get("report")
        if not rep:
            continue
        check, name = rec["check"], rep["name"]
        series = rep.get("series") or {}
        for tau, a, j in series.get("decay", []):
            rows["decay.csv"].append([name, tau, a, j])
        for tau, r, j in series.get("ratios", []):
            rows["block_decay.csv"].append([name, tau, r, j])
        for entry in rep.get("refinement") or []:
            level, value = _level(check, entry)
            rows["refinement.csv"].append([check, name, level, value])
        sw = rec.get("sweep", {})
        rows["ratio_vs_p.csv"].append([check, name, sw.get("p", ""), sw.get("k", ""),
                                       sw.get("alpha", ""), rep["ratio"],
                                       "" if rep.get("stderr") is None else rep["stderr"]])
    paths = {}
    for fname, header in TABLES.items():
        path = out_dir / fname
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows[fname])
        paths[fname] = path
    return paths
