"""CSV and manifest emission for completed runs.

All files are UTF-8 with LF line endings and a header row. Floats are
written with repr() so reruns of the same config produce byte-identical
CSVs; wall-clock timestamps live only in the manifest.
"""

from __future__ import annotations

import json
from pathlib import Path

from .config import ExperimentConfig, emit_config
from .sim import ExperimentResult

PER_CLIENT_CSV = "per_client.csv"
SUMMARY_CSV = "summary.csv"
PCA_CSV = "pca.csv"
KNOWLEDGE_CSV = "knowledge.csv"
CONFIG_SNAPSHOT = "config.ini"
MANIFEST = "manifest.json"


def _write_lines(path: Path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def write_run_outputs(
    result: ExperimentResult,
    cfg: ExperimentConfig,
    out_dir: str | Path,
    version: str,
    started_at: str,
    finished_at: str,
) -> list[str]:
    """Write all artifacts of one run; returns the file names written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    lines = ["round,client_id,role,accuracy"]
    for report in result.reports:
        for cid, acc in enumerate(report.per_client_acc):
            lines.append(f"{report.round},{cid},{result.roles[cid]},{acc!r}")
    _write_lines(out / PER_CLIENT_CSV, lines)
    written.append(PER_CLIENT_CSV)

    lines = ["round,tol_avg_acc,vctm_avg_acc,misdirection_count"]
    for report, count in zip(result.reports, result.misdirection_counts):
        lines.append(
            f"{report.round},{report.tol_avg_acc!r},{report.vctm_avg_acc!r},{count}"
        )
    _write_lines(out / SUMMARY_CSV, lines)
    written.append(SUMMARY_CSV)

    lines = ["client_id,role,x,y"]
    for cid, (x, y) in enumerate(result.pca_points):
        lines.append(f"{cid},{result.roles[cid]},{float(x)!r},{float(y)!r}")
    _write_lines(out / PCA_CSV, lines)
    written.append(PCA_CSV)

    if result.knowledge_rows is not None:
        n_logits = len(result.knowledge_rows[0][3]) if result.knowledge_rows else 0
        header = "round,client_id,sample_id," + ",".join(
            f"logit_{i}" for i in range(n_logits)
        )
        lines = [header]
        for round_idx, client_id, sample_id, logits in result.knowledge_rows:
            values = ",".join(repr(float(v)) for v in logits)
            lines.append(f"{round_idx},{client_id},{sample_id},{values}")
        _write_lines(out / KNOWLEDGE_CSV, lines)
        written.append(KNOWLEDGE_CSV)

    (out / CONFIG_SNAPSHOT).write_text(emit_config(cfg), encoding="utf-8")
    written.append(CONFIG_SNAPSHOT)

    manifest = {
        "tool": "fdpb",
        "version": version,
        "started_at": started_at,
        "finished_at": finished_at,
        "master_seed": cfg.master_seed,
        "config": CONFIG_SNAPSHOT,
        "artifacts": list(written),
        "misdirection_pair": list(result.misdirection_pair),
    }
    with open(out / MANIFEST, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    written.append(MANIFEST)
    return written


def write_comparison_csv(
    rows: list[tuple[str, str, object, float, float]], out_dir: str | Path
) -> Path:
    """Combined sweep table: one row per (method, axis value) grid point."""
    path = Path(out_dir) / "comparison.csv"
    lines = ["method,axis,value,tol_avg_acc,vctm_avg_acc"]
    for method, axis, value, tol, vctm in rows:
        rendered = ("true" if value else "false") if isinstance(value, bool) else str(value)
        lines.append(f"{method},{axis},{rendered},{tol!r},{vctm!r}")
    _write_lines(path, lines)
    return path
