"""Parsing, validation, conversion, and synthesis of bilateral flow records.

A flow record says "reporter lent `amount` to counterparty during `period`".
Records are grouped into a FlowRecordSet, the input to all network building.
All functions here are pure; the synthetic generator is fully determined by
its seed argument.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

PERIOD_PATTERN = re.compile(r"^[0-9]{4}-Q[1-4]$")
ENTITY_PATTERN = re.compile(r"^[A-Z0-9][A-Z0-9_.\-]*$")

FLOW_CSV_HEADER = ("period", "reporter", "counterparty", "amount")

DEFAULT_SYNTHETIC_PERIOD = "2000-Q1"


def _check_period(label: str) -> str:
    if not PERIOD_PATTERN.match(label):
        raise DataError(f"malformed period label {label!r} (expected YYYY-Qn)")
    return label


def _check_entity(code: str, role: str) -> str:
    if not ENTITY_PATTERN.match(code):
        raise DataError(f"malformed {role} entity code {code!r}")
    return code


@dataclass(frozen=True)
class FlowRecord:
    """One bilateral claim: `reporter` lent `amount` to `counterparty` in `period`.

    Amounts are nonnegative reals in millions of a common currency unit.
    Self-loops (reporter == counterparty) are rejected.
    """

    period: str
    reporter: str
    counterparty: str
    amount: float

    def __post_init__(self) -> None:
        _check_period(self.period)
        _check_entity(self.reporter, "reporter")
        _check_entity(self.counterparty, "counterparty")
        if self.reporter == self.counterparty:
            raise DataError(f"reporter equals counterparty ({self.reporter!r})")
        amount = float(self.amount)
        if not math.isfinite(amount) or amount < 0:
            raise DataError(f"negative or non-numeric amount {self.amount!r}")
        object.__setattr__(self, "amount", amount)


@dataclass(frozen=True)
class FlowRecordSet:
    """An ordered collection of flow records with derived rosters.

    `periods` and `entities` are computed from the records: entities is the
    union of reporter and counterparty codes, periods the sorted distinct
    quarter labels (lexicographic order of YYYY-Qn is chronological).
    """

    records: tuple[FlowRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))

    @cached_property
    def periods(self) -> tuple[str, ...]:
        return tuple(sorted({r.period for r in self.records}))

    @cached_property
    def entities(self) -> tuple[str, ...]:
        codes = {r.reporter for r in self.records}
        codes.update(r.counterparty for r in self.records)
        return tuple(sorted(codes))

    @cached_property
    def records_by_period(self) -> Mapping[str, tuple[FlowRecord, ...]]:
        grouped: dict[str, list[FlowRecord]] = {}
        for record in self.records:
            grouped.setdefault(record.period, []).append(record)
        return {period: tuple(group) for period, group in grouped.items()}

    def __len__(self) -> int:
        return len(self.records)


def parse_flow_csv(source: str | Iterable[str]) -> FlowRecordSet:
    """Parse flow CSV text into a FlowRecordSet.

    Expects the header ``period,reporter,counterparty,amount``; entity codes
    are trimmed and uppercased, row order is preserved. Errors carry the
    1-based row number (the header is row 1).
    """
    lines: Iterable[str] = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("row 1: missing header") from None
    names = tuple(cell.strip().lstrip("﻿") for cell in header)
    if names != FLOW_CSV_HEADER:
        missing = [c for c in FLOW_CSV_HEADER if c not in names]
        if missing:
            raise DataError(f"row 1: missing column(s) {', '.join(missing)}")
        raise DataError(f"row 1: expected header {','.join(FLOW_CSV_HEADER)}")

    records: list[FlowRecord] = []
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise DataError(f"row {row_no}: expected 4 fields, got {len(row)}")
        period = row[0].strip()
        reporter = row[1].strip().upper()
        counterparty = row[2].strip().upper()
        amount_text = row[3].strip()
        try:
            amount = float(amount_text)
        except ValueError:
            raise DataError(
                f"row {row_no}: negative or non-numeric amount {amount_text!r}"
            ) from None
        try:
            records.append(FlowRecord(period, reporter, counterparty, amount))
        except DataError as exc:
            raise DataError(f"row {row_no}: {exc}") from None
    return FlowRecordSet(tuple(records))


def parse_flow_file(path: str | Path) -> FlowRecordSet:
    return parse_flow_csv(Path(path).read_text(encoding="utf-8"))


def serialize_flow_csv(records: FlowRecordSet) -> str:
    """Render a FlowRecordSet as flow CSV; reparsing yields an equal set.

    Amounts use repr, the shortest digit string that round-trips the float.
    """
    lines = [",".join(FLOW_CSV_HEADER)]
    lines.extend(
        f"{r.period},{r.reporter},{r.counterparty},{r.amount!r}" for r in records.records
    )
    return "\n".join(lines) + "\n"


def write_flow_file(records: FlowRecordSet, path: str | Path) -> None:
    Path(path).write_text(serialize_flow_csv(records), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# Converter for locally supplied bilateral locational statistics extracts.
# ---------------------------------------------------------------------------

_RELAXED_PERIOD = re.compile(r"^([0-9]{4})-?Q([1-4])$")
_SUPPRESSED_VALUES = {"", "-", "..", "...", "NA", "NAN", "NULL", "NONE"}


@dataclass(frozen=True)
class BisMapping:
    """Names the source columns of a raw extract and row filter predicates.

    `filters` are equality predicates on source columns used to select a
    single instrument/measure combination so each (period, reporter,
    counterparty) appears at most once before aggregation.
    """

    period: str
    reporter: str
    counterparty: str
    value: str
    filters: Mapping[str, str] = field(default_factory=dict)


def load_bis_mapping(text: str) -> BisMapping:
    """Load a converter mapping from JSON or key=value text.

    Key=value form uses the keys period, reporter, counterparty, value and
    any number of ``filter.<column>=<value>`` lines.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON mapping: {exc}") from None
        filters = obj.pop("filters", {})
        if not isinstance(filters, dict):
            raise ConfigError("mapping 'filters' must be an object")
        keys = obj
    else:
        keys = {}
        filters = {}
        for line_no, line in enumerate(stripped.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"mapping line {line_no}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key.startswith("filter."):
                filters[key[len("filter."):]] = value
            else:
                keys[key] = value
    unknown = set(keys) - {"period", "reporter", "counterparty", "value"}
    if unknown:
        raise ConfigError(f"unknown mapping key(s): {', '.join(sorted(unknown))}")
    missing = [k for k in ("period", "reporter", "counterparty", "value") if k not in keys]
    if missing:
        raise ConfigError(f"mapping missing key(s): {', '.join(missing)}")
    return BisMapping(
        period=keys["period"],
        reporter=keys["reporter"],
        counterparty=keys["counterparty"],
        value=keys["value"],
        filters=dict(filters),
    )


def load_bis_mapping_file(path: str | Path) -> BisMapping:
    return load_bis_mapping(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class BisConversion:
    """Converted records plus a drop report."""

    records: FlowRecordSet
    converted: int
    filtered: int
    dropped: int
    drop_reasons: Mapping[str, int]


def _normalize_bis_period(raw: str) -> str | None:
    match = _RELAXED_PERIOD.match(raw.strip())
    if not match:
        return None
    return f"{match.group(1)}-Q{match.group(2)}"


def convert_bis_lbs(rows: Iterable[Mapping[str, object]],
                    mapping: BisMapping) -> BisConversion:
    """Convert tabular source rows to a FlowRecordSet using a column mapping.

    Rows failing a filter predicate are excluded (counted as `filtered`);
    rows with missing, suppressed, non-numeric, or negative values, malformed
    periods, bad entity codes, or self-loops are dropped and counted by
    reason. Duplicate (period, reporter, counterparty) keys are summed.
    """
    required = {mapping.period, mapping.reporter, mapping.counterparty, mapping.value}
    required.update(mapping.filters)

    totals: dict[tuple[str, str, str], float] = {}
    order: list[tuple[str, str, str]] = []
    filtered = 0
    reasons: dict[str, int] = {}

    def drop(reason: str) -> None:
        reasons[reason] = reasons.get(reason, 0) + 1

    checked_columns = False
    for row in rows:
        if not checked_columns:
            absent = sorted(col for col in required if col not in row)
            if absent:
                raise ConfigError(f"mapping references absent column(s): {', '.join(absent)}")
            checked_columns = True
        if any(str(row.get(col, "")).strip() != want
               for col, want in mapping.filters.items()):
            filtered += 1
            continue

        period = _normalize_bis_period(str(row.get(mapping.period) or ""))
        if period is None:
            drop("malformed-period")
            continue
        reporter = str(row.get(mapping.reporter) or "").strip().upper()
        counterparty = str(row.get(mapping.counterparty) or "").strip().upper()
        if not reporter or not counterparty:
            drop("missing-entity")
            continue
        if not ENTITY_PATTERN.match(reporter) or not ENTITY_PATTERN.match(counterparty):
            drop("malformed-entity")
            continue
        if reporter == counterparty:
            drop("self-loop")
            continue

        raw_value = row.get(mapping.value)
        if raw_value is None:
            drop("missing-value")
            continue
        if isinstance(raw_value, (int, float)):
            value = float(raw_value)
            if not math.isfinite(value):
                drop("missing-value")
                continue
        else:
            text = str(raw_value).strip()
            if text.upper() in _SUPPRESSED_VALUES:
                drop("missing-value")
                continue
            try:
                value = float(text)
            except ValueError:
                drop("non-numeric-value")
                continue
            if not math.isfinite(value):
                drop("missing-value")
                continue
        if value < 0:
            drop("negative-value")
            continue

        key = (period, reporter, counterparty)
        if key not in totals:
            totals[key] = 0.0
            order.append(key)
        totals[key] += value

    if not order:
        raise DataError("no rows survived filtering and conversion")

    records = tuple(
        FlowRecord(period, reporter, counterparty, totals[(period, reporter, counterparty)])
        for period, reporter, counterparty in order
    )
    dropped = sum(reasons.values())
    return BisConversion(
        records=FlowRecordSet(records),
        converted=len(records),
        filtered=filtered,
        dropped=dropped,
        drop_reasons=reasons,
    )


def convert_bis_file(csv_path: str | Path, mapping: BisMapping) -> BisConversion:
    with open(csv_path, encoding="utf-8", newline="") as handle:
        return convert_bis_lbs(csv.DictReader(handle), mapping)


# ---------------------------------------------------------------------------
# Synthetic core-periphery generator.
# ---------------------------------------------------------------------------


def shift_quarter(period: str, steps: int) -> str:
    """Return the quarter label `steps` quarters after `period`."""
    _check_period(period)
    year, quarter = int(period[:4]), int(period[-1])
    index = year * 4 + (quarter - 1) + steps
    if index < 0:
        raise DataError(f"quarter arithmetic left the calendar: {period} {steps:+d}")
    return f"{index // 4:04d}-Q{index % 4 + 1}"


def period_sequence(start: str, count: int) -> tuple[str, ...]:
    return tuple(shift_quarter(start, k) for k in range(count))


def _synthetic_entity_names(n_core: int, n_periphery: int) -> tuple[list[str], list[str]]:
    width = max(3, len(str(max(n_core, n_periphery))))
    cores = [f"C{i:0{width}d}" for i in range(n_core)]
    periphery = [f"P{i:0{width}d}" for i in range(n_periphery)]
    return cores, periphery


def _check_synthetic_args(n_core: int, n_periphery: int, core_weight_scale: float,
                          periphery_weight_scale: float, link_prob_pp: float) -> None:
    if n_core < 1:
        raise DataError("n_core must be at least 1")
    if n_periphery < 0:
        raise DataError("n_periphery must be nonnegative")
    if n_core + n_periphery < 2:
        raise DataError("need at least 2 entities in total")
    if core_weight_scale <= 0 or periphery_weight_scale <= 0:
        raise DataError("weight scales must be positive")
    if not 0.0 <= link_prob_pp <= 1.0:
        raise DataError("link_prob_pp must lie in [0, 1]")


def _draw_weight(rng: np.random.Generator, scale: float) -> float:
    # uniform on (0, scale]: rng.random() is in [0, 1)
    return scale * (1.0 - rng.random())


def generate_synthetic(n_core: int, n_periphery: int, core_weight_scale: float,
                       periphery_weight_scale: float, link_prob_pp: float,
                       seed: int, period: str = DEFAULT_SYNTHETIC_PERIOD) -> FlowRecordSet:
    """Generate one period of a core-periphery flow network.

    All ordered core-core pairs are linked with weights uniform on
    (0, core_weight_scale]; every core-periphery ordered pair is linked with
    weights uniform on (0, periphery_weight_scale]; periphery-periphery
    ordered pairs are linked independently with probability `link_prob_pp`.
    The same seed reproduces the output bit for bit.
    """
    _check_synthetic_args(n_core, n_periphery, core_weight_scale,
                          periphery_weight_scale, link_prob_pp)
    _check_period(period)
    if seed < 0:
        raise DataError("seed must be a nonnegative integer")
    rng = np.random.default_rng(seed)
    cores, periphery = _synthetic_entity_names(n_core, n_periphery)

    records: list[FlowRecord] = []
    for src in cores:
        for dst in cores:
            if src != dst:
                records.append(FlowRecord(period, src, dst,
                                          _draw_weight(rng, core_weight_scale)))
    for core in cores:
        for peri in periphery:
            records.append(FlowRecord(period, core, peri,
                                      _draw_weight(rng, periphery_weight_scale)))
            records.append(FlowRecord(period, peri, core,
                                      _draw_weight(rng, periphery_weight_scale)))
    for src in periphery:
        for dst in periphery:
            if src != dst and rng.random() < link_prob_pp:
                records.append(FlowRecord(period, src, dst,
                                          _draw_weight(rng, periphery_weight_scale)))
    return FlowRecordSet(tuple(records))


def generate_synthetic_series(n_core: int, n_periphery: int, core_weight_scale: float,
                              periphery_weight_scale: float, n_periods: int, seed: int,
                              link_prob_start: float = 0.1,
                              link_prob_end: float | None = None,
                              start_period: str = "1980-Q1") -> FlowRecordSet:
    """Generate a multi-quarter synthetic dataset on a fixed entity roster.

    The periphery-periphery link probability ramps linearly from
    `link_prob_start` to `link_prob_end` (defaults to the start value) across
    periods. Period t uses a sub-seed derived from (seed, t), so the whole
    series is reproducible from one integer.
    """
    if n_periods < 1:
        raise DataError("n_periods must be at least 1")
    if link_prob_end is None:
        link_prob_end = link_prob_start
    records: list[FlowRecord] = []
    for index, period in enumerate(period_sequence(start_period, n_periods)):
        if n_periods == 1:
            prob = link_prob_start
        else:
            frac = index / (n_periods - 1)
            prob = link_prob_start + (link_prob_end - link_prob_start) * frac
        sub_seed = derive_seed(seed, index)
        chunk = generate_synthetic(n_core, n_periphery, core_weight_scale,
                                   periphery_weight_scale, prob, sub_seed, period)
        records.extend(chunk.records)
    return FlowRecordSet(tuple(records))


def derive_seed(master_seed: int, index: int) -> int:
    """Deterministic 64-bit sub-seed for stream `index` under `master_seed`.

    Uses numpy's SeedSequence hash, so sub-streams are statistically
    independent and replayable; values are comparable only within this
    implementation.
    """
    if master_seed < 0 or index < 0:
        raise DataError("seeds and stream indices must be nonnegative")
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])
