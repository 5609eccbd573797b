"""Sample-file reading/writing and access to the bundled JSON schemas."""

from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path

from bornlab.errors import ValidationError
from bornlab.fit import MeasureSample, samples_from_iterable

SCHEMA_NAMES = (
    "hermitian2",
    "four_vector",
    "bloch_vector",
    "derivation_trace",
    "additivity_report",
    "samples",
    "fit_report",
)
CSV_HEADER = ["r0", "r1", "r2", "r3", "value"]


def load_schema(name: str) -> dict:
    if name not in SCHEMA_NAMES:
        raise KeyError(name)
    text = resources.files("bornlab").joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


def dumps_samples(samples: list[MeasureSample], fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps([s.to_dict() for s in samples], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in samples:
            w.writerow([repr(float(x)) for x in s.r] + [repr(s.value)])
        return buf.getvalue()
    raise ValidationError(f"unknown format {fmt!r}")


def loads_samples(text: str, fmt: str = "json") -> list[MeasureSample]:
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, list):
            raise ValidationError("sample file must be a JSON array")
        return samples_from_iterable(data)
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != CSV_HEADER:
            raise ValidationError(f"CSV header must be {','.join(CSV_HEADER)}")
        items = []
        for i, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ValidationError(f"line {i}: expected 5 fields, got {len(row)}")
            try:
                nums = [float(x) for x in row]
            except ValueError as exc:
                raise ValidationError(f"line {i}: {exc}") from exc
            items.append({"r": nums[:4], "value": nums[4]})
        return samples_from_iterable(items)
    raise ValidationError(f"unknown format {fmt!r}")


def read_samples(path: str | Path, fmt: str | None = None) -> list[MeasureSample]:
    """Read a sample file; format defaults to the file extension."""
    p = Path(path)
    if fmt is None:
        fmt = "csv" if p.suffix.lower() == ".csv" else "json"
    try:
        text = p.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {p}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ValidationError(f"cannot decode {p}: {exc.reason}") from exc
    return loads_samples(text, fmt)
