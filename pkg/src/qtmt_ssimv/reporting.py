"""JSON/CSV report assembly, schema validation and merging of runs.

CSV layout of a search run (``write_ctu_csv``), one row per CTU per metric::

    input, frame, qp, ctu_x, ctu_y, metric, value

Per-CTU metrics are ``j_full``, ``j_pruned``, ``rate_full``, ``rate_pruned``,
``t_full``, ``t_pruned``, ``t_ssim``, ``visits_full`` and ``visits_pruned``.
Summary rows leave ``frame``, ``qp``, ``ctu_x`` and ``ctu_y`` empty and carry
``ts_percent``, ``oh_percent``, ``bd_rate``, ``accuracy`` and
``containment_violations``; the final summary rows use input ``ALL``.

Merged table (``merge_reports``) columns::

    report, input, ts_percent, oh_percent, bd_rate, accuracy
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict
from importlib import resources
from typing import Iterable, Sequence

import jsonschema

from .experiment import Evaluation
from .search import SearchConfig

SCHEMA_VERSION = 1
CTU_METRICS = ("j_full", "j_pruned", "rate_full", "rate_pruned", "t_full", "t_pruned",
               "t_ssim", "visits_full", "visits_pruned")
SUMMARY_METRICS = ("ts_percent", "oh_percent", "bd_rate", "accuracy", "containment_violations")
CSV_FIELDS = ("input", "frame", "qp", "ctu_x", "ctu_y", "metric", "value")
MERGED_FIELDS = ("report", "input", "ts_percent", "oh_percent", "bd_rate", "accuracy")


class ReportSchemaError(ValueError):
    pass


def load_schema() -> dict:
    with resources.files(__package__).joinpath("schema/search_report.schema.json").open() as f:
        return json.load(f)


def validate_report(doc: dict) -> None:
    """Raise ``ReportSchemaError`` naming the first offending field."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ReportSchemaError(f"{where}: {e.message}")


def _finite_or_none(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x


def input_entry(name: str, width: int, height: int, bit_depth: int, frames: int,
                ev: Evaluation) -> dict:
    return {
        "input": name, "width": width, "height": height, "bit_depth": bit_depth,
        "frames": frames,
        "timing": ev.timing.as_dict(),
        "accuracy": ev.accuracy.as_dict(),
        "rd": {"anchor": ev.anchor, "test": ev.test},
        "bd_rate": _finite_or_none(ev.bd_rate),
        "containment_violations": len(ev.containment_violations),
        "ctus": [asdict(c) for c in ev.ctus],
    }


def summarize(entries: Sequence[dict]) -> dict:
    t_org = sum(e["timing"]["t_org"] for e in entries)
    t_pro = sum(e["timing"]["t_pro"] for e in entries)
    t_ssim = sum(e["timing"]["t_ssim"] for e in entries)
    hits = sum(e["accuracy"]["overall"]["hits"] for e in entries)
    total = sum(e["accuracy"]["overall"]["total"] for e in entries)
    bds = [e["bd_rate"] for e in entries if e["bd_rate"] is not None]
    return {
        "ts_percent": abs(t_org - t_pro) / t_org * 100 if t_org > 0 else 0.0,
        "oh_percent": t_ssim / t_pro * 100 if t_pro > 0 else 0.0,
        "bd_rate": sum(bds) / len(bds) if bds else None,
        "accuracy": hits / total if total else None,
        "containment_violations": sum(e["containment_violations"] for e in entries),
    }


def build_report(entries: Sequence[dict], cfg: SearchConfig, qps: Sequence[int],
                 reference_policy: str = "full", repeats: int = 1, threads: int = 1) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "ctu_size": cfg.ctu_size, "min_cu": cfg.min_cu, "max_mt_depth": cfg.max_mt_depth,
            "max_tt_size": cfg.max_tt_size, "qps": list(qps), "policy": cfg.policy,
            "reference_policy": reference_policy, "ssim_variant": cfg.ssim_variant,
            "seed": cfg.seed, "repeats": repeats, "threads": threads,
        },
        "inputs": list(entries),
        "summary": summarize(entries),
    }
    validate_report(doc)
    return doc


def write_ctu_csv(doc: dict, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_FIELDS)
        for entry in doc["inputs"]:
            for c in entry["ctus"]:
                for m in CTU_METRICS:
                    w.writerow((entry["input"], c["frame"], c["qp"], c["x"], c["y"], m, c[m]))
            summary = summarize([entry])
            for m in SUMMARY_METRICS:
                w.writerow((entry["input"], "", "", "", "", m, _csv_value(summary[m])))
        for m in SUMMARY_METRICS:
            w.writerow(("ALL", "", "", "", "", m, _csv_value(doc["summary"][m])))


def _csv_value(v):
    return "" if v is None else v


def merge_reports(docs: Iterable[tuple[str, dict]]) -> list[dict]:
    """One row per input across all reports, then an ``AVERAGE`` row."""
    rows = []
    for name, doc in docs:
        validate_report(doc)
        for entry in doc["inputs"]:
            rows.append({"report": name, "input": entry["input"],
                         "ts_percent": entry["timing"]["ts_percent"],
                         "oh_percent": entry["timing"]["oh_percent"],
                         "bd_rate": entry["bd_rate"],
                         "accuracy": entry["accuracy"]["overall"]["accuracy"]})
    if rows:
        avg = {"report": "", "input": "AVERAGE"}
        for k in MERGED_FIELDS[2:]:
            vals = [r[k] for r in rows if r[k] is not None]
            avg[k] = sum(vals) / len(vals) if vals else None
        rows.append(avg)
    return rows


def write_merged_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, MERGED_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow({k: _csv_value(r[k]) for k in MERGED_FIELDS})
