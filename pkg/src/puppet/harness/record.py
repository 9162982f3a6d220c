"""Demonstration records: JSON-lines files, one header then one row per
50Hz tick.

The header embeds everything replay needs (model document, gains, filter
constant, rates, initial configuration) plus a config hash over those
fields, so a record is self-contained and tampering is detectable.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from puppet.errors import PuppetError

RECORD_VERSION = 1

ROW_FIELDS = (
    "t",
    "q_leader",
    "q_follower",
    "q_tilde",
    "q_sent",
    "gripper",
    "gate_mode",
    "grasp_phase",
)


class RecordError(PuppetError):
    """A demo file failed schema validation."""


def config_hash(header: dict) -> str:
    doc = {k: v for k, v in header.items() if k != "config_hash"}
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def make_header(
    scenario_name: str,
    model_name: str,
    model_doc: dict,
    dof: int,
    alpha: float,
    k_p: list[float],
    k_d: list[float],
    leader_k_p: list[float],
    leader_k_d: list[float],
    control_dt: float,
    target_period: int,
    q0: list[float],
    seed: int,
) -> dict:
    header = {
        "record": "demo",
        "version": RECORD_VERSION,
        "scenario": scenario_name,
        "model_name": model_name,
        "model": model_doc,
        "dof": dof,
        "alpha": alpha,
        "k_p": k_p,
        "k_d": k_d,
        "leader_k_p": leader_k_p,
        "leader_k_d": leader_k_d,
        "control_dt": control_dt,
        "target_period": target_period,
        "q0": q0,
        "seed": seed,
    }
    header["config_hash"] = config_hash(header)
    return header


class DemoWriter:
    """Accumulates header + rows and serializes them as JSON lines."""

    def __init__(self, header: dict):
        self.header = header
        self._lines = [json.dumps(header, separators=(",", ":"))]
        self._last_t: float | None = None

    def add_row(
        self,
        t: float,
        q_leader,
        q_follower,
        q_tilde,
        q_sent,
        gripper: str,
        gate_mode: str,
        grasp_phase: str,
    ) -> None:
        if self._last_t is not None and t <= self._last_t:
            raise RecordError(f"row times must be strictly increasing ({t} after {self._last_t})")
        self._last_t = t
        row = {
            "t": t,
            "q_leader": [float(v) for v in q_leader],
            "q_follower": [float(v) for v in q_follower],
            "q_tilde": [float(v) for v in q_tilde],
            "q_sent": None if q_sent is None else [float(v) for v in q_sent],
            "gripper": gripper,
            "gate_mode": gate_mode,
            "grasp_phase": grasp_phase,
        }
        self._lines.append(json.dumps(row, separators=(",", ":")))

    def text(self) -> str:
        return "\n".join(self._lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.text())


@dataclass(frozen=True)
class DemoRecord:
    header: dict
    rows: list[dict]


def _check_row(row: dict, idx: int, dof: int) -> None:
    where = f"row {idx}"
    for key in ROW_FIELDS:
        if key not in row:
            raise RecordError(f"{where}: missing field {key!r}")
    for key in ("q_leader", "q_follower", "q_tilde"):
        v = row[key]
        if not isinstance(v, list) or len(v) != dof:
            raise RecordError(f"{where}.{key}: expected list of {dof} numbers")
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            raise RecordError(f"{where}.{key}: expected numbers")
    if row["q_sent"] is not None:
        v = row["q_sent"]
        if not isinstance(v, list) or len(v) != dof:
            raise RecordError(f"{where}.q_sent: expected null or list of {dof} numbers")
    if not isinstance(row["t"], (int, float)) or isinstance(row["t"], bool):
        raise RecordError(f"{where}.t: expected a number")
    if row["gripper"] not in ("open", "close"):
        raise RecordError(f"{where}.gripper: bad value {row['gripper']!r}")


def read_demo(path_or_text: str | Path, *, verify_hash: bool = True) -> DemoRecord:
    """Parse and validate a demo file (or raw text)."""
    if isinstance(path_or_text, Path):
        text = path_or_text.read_text()
        source = str(path_or_text)
    elif "\n" in path_or_text or path_or_text.lstrip().startswith("{"):
        text = path_or_text
        source = "<text>"
    else:
        text = Path(path_or_text).read_text()
        source = str(path_or_text)

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise RecordError(f"{source}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise RecordError(f"{source}: header is not valid JSON ({exc.msg})") from None
    if not isinstance(header, dict) or header.get("record") != "demo":
        raise RecordError(f"{source}: not a demo record header")
    if header.get("version") != RECORD_VERSION:
        raise RecordError(f"{source}: unsupported record version {header.get('version')!r}")
    for key in ("dof", "alpha", "k_p", "k_d", "control_dt", "target_period", "q0", "model"):
        if key not in header:
            raise RecordError(f"{source}: header missing field {key!r}")
    if verify_hash:
        expected = header.get("config_hash")
        actual = config_hash(header)
        if expected != actual:
            raise RecordError(
                f"{source}: config hash mismatch (header says {expected!r}); "
                "the record was produced by a different configuration"
            )
    dof = header["dof"]
    rows = []
    last_t = None
    for i, line in enumerate(lines[1:]):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(f"row {i}: invalid JSON ({exc.msg})") from None
        _check_row(row, i, dof)
        if last_t is not None and row["t"] <= last_t:
            raise RecordError(f"row {i}: time {row['t']} not increasing")
        last_t = row["t"]
        rows.append(row)
    return DemoRecord(header=header, rows=rows)
