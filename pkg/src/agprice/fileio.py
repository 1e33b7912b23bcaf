"""File formats: panel and cost-observation CSVs, metadata sidecars,
TOML configs, deterministic JSON/CSV output and atomic writes."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import re
import sys
import tempfile
from pathlib import Path

import numpy as np

from agprice.data_model import CostObservation, Kind, PanelRecord, PriceQuantityPanel, ShareVector, validate_panel
from agprice.errors import AgPriceError, ParseError, ValidationError
from agprice.policy import PolicyScenario

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
PANEL_HEADER = ("item", "kind", "year", "price", "quantity")
META_KEYS = ("currency", "quantity_unit", "base_year")


def parse_number(text: str, path, line: int, column: str) -> float:
    """Strict decimal-point parse: no thousands separators, symbols, nan or inf."""
    s = text.strip()
    if not _NUMBER.fullmatch(s):
        raise ParseError(path, line, f"column {column!r}: {text!r} is not a plain decimal number")
    return float(s)


def _read_rows(path) -> tuple[list[str], list[tuple[int, dict[str, str]]]]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(path, 1, "file is empty") from None
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(path, reader.line_num, f"expected {len(header)} fields, got {len(row)}")
            rows.append((reader.line_num, dict(zip(header, row))))
    return header, rows


def read_panel(path) -> PriceQuantityPanel:
    header, rows = _read_rows(path)
    missing = [c for c in PANEL_HEADER if c not in header]
    if missing:
        raise ParseError(path, 1, f"missing columns {missing}; expected {','.join(PANEL_HEADER)}")
    records = []
    for line, row in rows:
        year = row["year"].strip()
        if not year.isdigit():
            raise ParseError(path, line, f"year {year!r} is not an integer")
        try:
            records.append(
                PanelRecord(
                    row["item"].strip(),
                    Kind.parse(row["kind"]),
                    int(year),
                    parse_number(row["price"], path, line, "price"),
                    parse_number(row["quantity"], path, line, "quantity"),
                )
            )
        except ParseError:
            raise
        except ValidationError as exc:
            raise ParseError(path, line, str(exc)) from None
    return validate_panel(records)


def write_panel(panel: PriceQuantityPanel) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PANEL_HEADER)
    for r in panel.records():
        w.writerow([r.item, r.kind.value, r.year, repr(r.price), repr(r.quantity)])
    return buf.getvalue()


def read_observations(path) -> list[CostObservation]:
    """Cost-observation CSV: obs_id,total_cost,output_level,price_<i>,share_<i>[,quantity_<i>]."""
    header, rows = _read_rows(path)
    for col in ("obs_id", "total_cost", "output_level"):
        if col not in header:
            raise ParseError(path, 1, f"missing column {col!r}")
    inputs = tuple(h[len("price_"):] for h in header if h.startswith("price_"))
    if len(inputs) < 2:
        raise ParseError(path, 1, "need price_<item> columns for at least 2 inputs")
    for name in inputs:
        if f"share_{name}" not in header:
            raise ParseError(path, 1, f"missing column 'share_{name}'")
    with_qty = all(f"quantity_{n}" in header for n in inputs)
    out = []
    for line, row in rows:
        num = lambda col: parse_number(row[col], path, line, col)  # noqa: E731
        try:
            obs = CostObservation(
                num("total_cost"),
                inputs,
                np.array([num(f"price_{n}") for n in inputs]),
                num("output_level"),
                ShareVector(inputs, np.array([num(f"share_{n}") for n in inputs])),
                obs_id=row["obs_id"].strip(),
            )
            if with_qty:
                obs.check_quantities({n: num(f"quantity_{n}") for n in inputs})
        except ParseError:
            raise
        except ValidationError as exc:
            raise ParseError(path, line, str(exc)) from None
        out.append(obs)
    return out


def write_observations(observations) -> str:
    inputs = observations[0].inputs
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["obs_id", "total_cost", "output_level"]
    for n in inputs:
        cols += [f"price_{n}", f"share_{n}"]
    w.writerow(cols)
    for o in observations:
        row = [o.obs_id, repr(o.total_cost), repr(o.output_level)]
        for p, s in zip(o.input_prices.tolist(), o.cost_shares.values.tolist()):
            row += [repr(p), repr(s)]
        w.writerow(row)
    return buf.getvalue()


def read_metadata(path) -> dict[str, str]:
    """``key=value`` sidecar; blank lines and ``#`` comments are ignored."""
    meta: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(path, n, f"expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in META_KEYS:
                raise ParseError(path, n, f"unknown metadata key {key!r}")
            meta[key] = value
    if "base_year" in meta and not meta["base_year"].isdigit():
        raise ParseError(path, None, f"base_year {meta['base_year']!r} is not an integer")
    return meta


def sidecar_for(path) -> Path | None:
    p = Path(str(path) + ".meta")
    return p if p.exists() else None


def read_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(path, None, str(exc)) from None


def read_scenario(path) -> PolicyScenario:
    data = read_toml(path)
    try:
        return PolicyScenario.from_dict(data)
    except AgPriceError as exc:
        raise ParseError(path, None, str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise ParseError(path, None, f"malformed scenario: {exc}") from None


def _round_sig(obj, digits: int):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValidationError(f"cannot serialise non-finite value {obj!r}")
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, np.generic):
        return _round_sig(obj.item(), digits)
    if isinstance(obj, np.ndarray):
        return _round_sig(obj.tolist(), digits)
    if isinstance(obj, dict):
        return {str(k): _round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_sig(v, digits) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj, digits: int = 12) -> str:
    """Deterministic JSON: floats to ``digits`` significant digits, insertion key order."""
    return json.dumps(_round_sig(obj, digits), indent=2, ensure_ascii=False) + "\n"


def format_number(x: float, precision: str = "2") -> str:
    return repr(float(x)) if precision == "full" else f"{x:.{int(precision)}f}"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
