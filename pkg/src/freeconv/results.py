"""Result records and deterministic file emission.

Each experiment run emits ``<out>/<experiment>-<hash>.json`` (full record)
and ``<out>/<experiment>-<hash>.csv`` (flat table).  The CSV is byte-stable:
a config-hash comment line, a header row, and rows with floats printed to
17 significant digits.  Pass/fail is recomputable from the stored numbers
and the contract parameters embedded in the JSON.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field


def fmt_float(x) -> str:
    return f"{float(x):.17g}"


@dataclass
class ResultRecord:
    experiment: str
    config_hash: str
    seed: int
    passed: bool
    contract: dict          # description + parameters + measured outcomes
    payload: dict           # experiment-specific numbers
    csv_header: list
    csv_rows: list          # rows of already-formatted strings or numbers
    wall_clock_s: float = 0.0
    notes: list = field(default_factory=list)

    def to_json_dict(self):
        return {
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "passed": self.passed,
            "contract": self.contract,
            "payload": self.payload,
            "notes": self.notes,
            "wall_clock_s": round(self.wall_clock_s, 3),
        }

    def csv_text(self):
        lines = [f"# config-hash: {self.config_hash}", ",".join(self.csv_header)]
        for row in self.csv_rows:
            cells = [c if isinstance(c, str) else fmt_float(c) for c in row]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        stem = f"{self.experiment}-{self.config_hash}"
        json_path = os.path.join(out_dir, stem + ".json")
        csv_path = os.path.join(out_dir, stem + ".csv")
        with open(json_path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(csv_path, "w") as fh:
            fh.write(self.csv_text())
        return json_path, csv_path


def complex_pair(z):
    z = complex(z)
    return [z.real, z.imag]


def matrix_pairs(a):
    return [[complex_pair(v) for v in row] for row in a.tolist()]
