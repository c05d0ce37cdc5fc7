"""Append-only results log: one JSON record per line.

A log starts with a header line carrying the campaign configuration, then
one ``eval`` line per objective evaluation in the order they happened,
optionally an ``error`` marker, and a ``summary`` block after each
completed run (a resumed log therefore may contain summaries mid-file;
replay skips them). Line-delimited writes mean a crash loses at most one
line, and reloading a log reconstructs a campaign state whose budget and
incumbent invariants hold exactly.

No timestamps are written anywhere: two runs with the same configuration
and seed produce byte-identical record sequences.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .campaign import CampaignState, CostModel, EvaluationRecord, PHASE_INITIAL, PHASE_LOOP
from .dgp import FidelityLevel
from .errors import CorruptLogError

_FORMAT = "mfdgp-results"


class ResultsLogWriter:
    """Owns the output file; appends one line per event and flushes eagerly."""

    def __init__(self, path, config_payload=None, append=False):
        self.path = Path(path)
        mode = "a" if append else "w"
        self._fh = self.path.open(mode)
        if not append:
            header = {"type": "header", "format": _FORMAT, "version": 1}
            if config_payload is not None:
                header["config"] = config_payload
            self._write(header)

    def _write(self, payload: dict) -> None:
        self._fh.write(json.dumps(payload) + "\n")
        self._fh.flush()

    def record(self, rec: EvaluationRecord) -> None:
        self._write(
            {
                "type": "eval",
                "iteration": rec.iteration,
                "phase": rec.phase,
                "level": rec.level.index,
                "nominal": rec.level.nominal,
                "x": [float(v) for v in rec.x],
                "y": rec.y,
                "cost": rec.cost,
            }
        )

    def error(self, message: str) -> None:
        self._write({"type": "error", "message": message})

    def summary(self, state: CampaignState, model_best=None) -> None:
        incumbent = state.incumbent
        payload = {
            "type": "summary",
            "budget_total": state.budget_total,
            "budget_spent": state.budget_spent,
            "per_level_counts": {str(k): v for k, v in state.per_level_counts().items()},
            "incumbent_x": None if incumbent is None else [float(v) for v in incumbent.x],
            "incumbent_y": None if incumbent is None else incumbent.y,
            "model_best": None if model_best is None else [float(v) for v in model_best],
        }
        self._write(payload)

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_log_lines(path) -> list[dict]:
    """Parse every line; a malformed line raises naming its 1-based number."""
    lines = Path(path).read_text().splitlines()
    out = []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            raise CorruptLogError("blank line in results log", i)
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptLogError(f"unparseable record: {exc.msg}", i) from exc
        if not isinstance(payload, dict) or "type" not in payload:
            raise CorruptLogError("record is not an object with a 'type'", i)
        out.append(payload)
    return out


def read_header(path) -> dict:
    lines = read_log_lines(path)
    if not lines or lines[0].get("type") != "header":
        raise CorruptLogError("first line is not a results-log header", 1)
    return lines[0]


def _record_from_payload(payload: dict, line_no: int) -> EvaluationRecord:
    try:
        return EvaluationRecord(
            x=np.asarray(payload["x"], dtype=np.float64),
            level=FidelityLevel(index=payload["level"], nominal=payload["nominal"]),
            y=payload["y"],
            cost=payload["cost"],
            iteration=payload["iteration"],
            phase=payload["phase"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptLogError(f"invalid eval record: {exc}", line_no) from exc


def replay(path, ladder) -> CampaignState:
    """Rebuild a CampaignState from a log's eval lines.

    The cost model is recomputed as the running mean of the replayed costs,
    which equals what the live campaign held after its last update.
    """
    state = CampaignState(ladder=tuple(ladder))
    per_level_costs = {lv.index: [] for lv in state.ladder}
    for i, payload in enumerate(read_log_lines(path), start=1):
        if payload["type"] != "eval":
            if payload["type"] == "error":
                state.error = payload.get("message")
            continue
        rec = _record_from_payload(payload, i)
        if rec.phase not in (PHASE_INITIAL, PHASE_LOOP):
            raise CorruptLogError(f"unknown phase {rec.phase!r}", i)
        state.append(rec)
        per_level_costs[rec.level.index].append(rec.cost)
    if state.records:
        levels = sorted(per_level_costs)
        populated = [i for i in levels if per_level_costs[i]]
        if populated:
            state.cost_model = CostModel(
                levels=tuple(populated),
                tau=np.asarray([np.mean(per_level_costs[i]) for i in populated]),
                counts=np.asarray([len(per_level_costs[i]) for i in populated]),
            )
    return state
