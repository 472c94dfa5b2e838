"""Reader for the qmemsim results CSV contract.

Schema: kind,family,L,beta,seed,decoder,observable,value,censored,extra_json
Unknown extra_json keys are carried through untouched; any malformed row is
a hard error naming the offending line.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

HEADER = ["kind", "family", "L", "beta", "seed", "decoder", "observable",
          "value", "censored", "extra_json"]


class SchemaError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Row:
    kind: str
    family: str
    linear_size: int
    beta: float | None
    seed: str
    decoder: str
    observable: str
    value: float | None
    censored: bool
    extra: dict


def read_results(path: str) -> list[Row]:
    rows: list[Row] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        lines = list(reader)
    if not lines:
        raise SchemaError(1, "no rows")
    if lines[0] != HEADER:
        raise SchemaError(1, f"unexpected header {lines[0]!r}")
    for lineno, fields in enumerate(lines[1:], start=2):
        if not fields:
            continue
        if len(fields) != len(HEADER):
            raise SchemaError(lineno, f"expected {len(HEADER)} fields, got {len(fields)}")
        try:
            rows.append(Row(
                kind=fields[0],
                family=fields[1],
                linear_size=int(fields[2]),
                beta=float(fields[3]) if fields[3] else None,
                seed=fields[4],
                decoder=fields[5],
                observable=fields[6],
                value=float(fields[7]) if fields[7] else None,
                censored=fields[8] == "1",
                extra=json.loads(fields[9]) if fields[9] else {},
            ))
        except (ValueError, json.JSONDecodeError) as exc:
            raise SchemaError(lineno, str(exc)) from None
    if not rows:
        raise SchemaError(2, "no rows")
    return rows
