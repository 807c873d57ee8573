"""Survival tables, cleaning, one-hot encoding and exposure expansion.

A :class:`SurvivalTable` holds one row per individual (observed duration and
death flag). :func:`exposure_expansion` turns it into a :class:`PseudoTable`
with one row per individual and time interval, carrying the initial exposure
``ei``, the central exposure ``ec`` and the interval death indicator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import substream

MISSING_LEVEL = "Missing value"
NUMERIC = "numeric"
CATEGORICAL = "categorical"


class SchemaError(ValueError):
    """Raised when a table does not match its declared schema."""


def _is_missing_cell(raw):
    return raw is None or str(raw).strip() in ("", "NA", "NaN", "nan", "None", "null")


@dataclass(frozen=True)
class SurvivalTable:
    """Right-censored survival data, one row per individual.

    Numeric covariates are float arrays with ``nan`` marking missing cells;
    categorical ones are object arrays with ``None`` marking missing cells.
    """

    ids: np.ndarray
    durations: np.ndarray
    events: np.ndarray
    covariates: dict
    schema: dict

    def __post_init__(self):
        n = len(self.ids)
        durations = np.asarray(self.durations, dtype=float)
        events = np.asarray(self.events)
        if durations.shape != (n,) or events.shape != (n,):
            raise SchemaError("ids, durations and events must have equal length")
        if n and (np.any(~np.isfinite(durations)) or np.any(durations < 0)):
            raise SchemaError("durations must be finite and nonnegative")
        if n and not np.all(np.isin(events, (0, 1))):
            raise SchemaError("events must be 0 or 1")
        if len(set(np.asarray(self.ids).tolist())) != n:
            raise SchemaError("ids must be unique")
        if set(self.covariates) != set(self.schema):
            raise SchemaError("covariates and schema name different columns")
        cov = {}
        for name, kind in self.schema.items():
            if kind not in (NUMERIC, CATEGORICAL):
                raise SchemaError(f"unknown column kind {kind!r} for {name!r}")
            col = np.asarray(self.covariates[name], dtype=float if kind == NUMERIC else object)
            if col.shape != (n,):
                raise SchemaError(f"column {name!r} has the wrong length")
            cov[name] = col
        object.__setattr__(self, "ids", np.asarray(self.ids))
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "events", events.astype(int))
        object.__setattr__(self, "covariates", cov)
        object.__setattr__(self, "schema", dict(self.schema))

    def __len__(self):
        return len(self.ids)

    @property
    def columns(self):
        return list(self.schema)

    def take(self, index):
        index = np.asarray(index)
        return SurvivalTable(
            ids=self.ids[index],
            durations=self.durations[index],
            events=self.events[index],
            covariates={k: v[index] for k, v in self.covariates.items()},
            schema=self.schema,
        )

    def missing_mask(self, name):
        col = self.covariates[name]
        if self.schema[name] == NUMERIC:
            return np.isnan(col)
        return np.array([v is None for v in col], dtype=bool)


@dataclass(frozen=True)
class PseudoTable:
    """Discretised survival data: one row per individual and interval."""

    ids: np.ndarray
    interval: np.ndarray
    ei: np.ndarray
    ec: np.ndarray
    delta: np.ndarray
    covariates: dict
    schema: dict
    interval_length: float = 1.0
    degenerate: np.ndarray = None

    def __len__(self):
        return len(self.ids)

    def feature_table(self, include_interval=True):
        """Covariates as a :class:`SurvivalTable`-like mapping for encoding."""
        cov = dict(self.covariates)
        schema = dict(self.schema)
        if include_interval:
            cov = {"interval": self.interval.astype(float), **cov}
            schema = {"interval": NUMERIC, **schema}
        return cov, schema

    def to_csv(self, path):
        """Write columns id, interval, ei, ec, delta, then the covariates."""
        names = list(self.schema)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "interval", "ei", "ec", "delta", *names])
            for r in range(len(self)):
                row = [self.ids[r], int(self.interval[r]), _fmt(self.ei[r]), _fmt(self.ec[r]),
                       int(self.delta[r])]
                for name in names:
                    v = self.covariates[name][r]
                    if self.schema[name] == NUMERIC:
                        row.append("" if np.isnan(v) else _fmt(v))
                    else:
                        row.append("" if v is None else v)
                writer.writerow(row)


def _fmt(x):
    return repr(round(float(x), 12))


@dataclass(frozen=True)
class EncodedMatrix:
    """Numeric design matrix produced by :func:`one_hot_encode`."""

    values: np.ndarray
    column_names: list
    encoding: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.values.shape


# ---------------------------------------------------------------------------
# loading and cleaning


def load_survival_table(path, duration, event, id_column=None, categorical=(), columns=None):
    """Read a survival table from a UTF-8 CSV file with a header row.

    Parameters
    ----------
    path : str or Path
    duration, event : str
        Names of the observed-duration and death-indicator columns.
    id_column : str, optional
        Identifier column; row numbers are used when omitted.
    categorical : sequence of str
        Covariates kept as categories. Every other covariate is numeric and
        cells that do not parse as numbers become ``nan``.
    columns : sequence of str, optional
        Covariates to keep (default: all remaining columns).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = list(reader)
    for name in (duration, event) + ((id_column,) if id_column else ()):
        if name not in header:
            raise SchemaError(f"missing mandatory column {name!r}")
    reserved = {duration, event, id_column}
    if columns is None:
        columns = [c for c in header if c not in reserved]
    unknown = [c for c in list(columns) + list(categorical) if c not in header]
    if unknown:
        raise SchemaError(f"unknown columns {unknown}")
    categorical = set(categorical)

    durations, events, ids = [], [], []
    for k, row in enumerate(rows):
        try:
            d = float(row[duration])
            e = float(row[event])
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"row {k}: unparseable duration or event") from exc
        if d < 0:
            raise SchemaError(f"row {k}: negative duration {d}")
        if e not in (0.0, 1.0):
            raise SchemaError(f"row {k}: event must be 0 or 1, got {row[event]!r}")
        durations.append(d)
        events.append(int(e))
        ids.append(row[id_column] if id_column else str(k))

    schema, cov = {}, {}
    for name in columns:
        if name in categorical:
            schema[name] = CATEGORICAL
            cov[name] = np.array([None if _is_missing_cell(r[name]) else str(r[name]).strip()
                                  for r in rows], dtype=object)
        else:
            schema[name] = NUMERIC
            cov[name] = np.array([_parse_float(r[name]) for r in rows], dtype=float)
    return SurvivalTable(ids=np.array(ids, dtype=object), durations=np.array(durations, dtype=float),
                         events=np.array(events, dtype=int), covariates=cov, schema=schema)


def _parse_float(raw):
    if _is_missing_cell(raw):
        return np.nan
    try:
        return float(raw)
    except ValueError:
        return np.nan


def impute_missing(table):
    """Fill numeric gaps with the column median, categorical gaps with a new level.

    The median of an even count is the mean of the two middle values. A
    numeric column with no observed value raises ``ValueError``.
    """
    cov = {}
    for name, kind in table.schema.items():
        col = table.covariates[name].copy()
        miss = table.missing_mask(name)
        if miss.any():
            if kind == NUMERIC:
                if miss.all():
                    raise ValueError(f"column {name!r} is entirely missing")
                col[miss] = float(np.median(col[~miss]))
            else:
                col[miss] = MISSING_LEVEL
        cov[name] = col
    return SurvivalTable(ids=table.ids, durations=table.durations, events=table.events,
                         covariates=cov, schema=table.schema)


def _levels(col):
    return sorted({str(v) for v in col if v is not None})


def fit_encoding(covariates, schema):
    """Column layout for :func:`encode`: numeric names pass through, categories expand."""
    encoding, names = {}, []
    for name, kind in schema.items():
        if kind == NUMERIC:
            encoding[name] = {None: len(names)}
            names.append(name)
        else:
            encoding[name] = {}
            for level in _levels(covariates[name]):
                encoding[name][level] = len(names)
                names.append(f"{name}={level}")
    return encoding, names


def drop_reference_levels(encoding):
    """Treatment coding: drop each categorical's first level so it encodes as all zeros.

    Models with an intercept or a scale-free baseline (GLMs, Cox) are not
    identifiable under full one-hot coding. Returns ``(encoding, column_names)``.
    """
    old = sorted(((i, name, level) for name, slots in encoding.items() for level, i in slots.items()))
    first = {name: min(slots.values()) for name, slots in encoding.items()
             if None not in slots and slots}
    new, names = {name: {} for name in encoding}, []
    for i, name, level in old:
        if level is not None and first.get(name) == i:
            continue
        new[name][level] = len(names)
        names.append(name if level is None else f"{name}={level}")
    return new, names


def encode(covariates, schema, encoding, column_names):
    """Apply an existing encoding; unseen levels fall back to the missing level."""
    n = len(next(iter(covariates.values()))) if covariates else 0
    values = np.zeros((n, len(column_names)))
    for name, kind in schema.items():
        col = covariates[name]
        slots = encoding[name]
        if kind == NUMERIC:
            values[:, slots[None]] = np.asarray(col, dtype=float)
            continue
        for r, v in enumerate(col):
            key = MISSING_LEVEL if v is None else str(v)
            if key not in slots:
                key = MISSING_LEVEL
            if key in slots:
                values[r, slots[key]] = 1.0
    return EncodedMatrix(values=values, column_names=list(column_names), encoding=encoding)


def one_hot_encode(table, encoding=None):
    """Replace each categorical column by one indicator column per level.

    ``table`` is a :class:`SurvivalTable` or :class:`PseudoTable`; pass the
    ``encoding`` of an earlier result to encode new data with the same layout.
    """
    if isinstance(table, PseudoTable):
        covariates, schema = table.feature_table()
    else:
        covariates, schema = table.covariates, table.schema
    if encoding is None:
        encoding, names = fit_encoding(covariates, schema)
    else:
        names = [None] * (1 + max((i for slots in encoding.values() for i in slots.values()), default=-1))
        for name, slots in encoding.items():
            for level, i in slots.items():
                names[i] = name if level is None else f"{name}={level}"
    return encode(covariates, schema, encoding, names)


# ---------------------------------------------------------------------------
# exposure expansion


def _on_boundary(x, tol=1e-9):
    return abs(x - round(x)) <= tol


def exposure_expansion(table, interval_length=1.0, time_varying=()):
    """Expand a survival table into a pseudo data table.

    Each individual gets one row per interval ``[j, j+1)`` (in units of
    ``interval_length``) up to and including the one holding the exit time.
    Rows before the last carry ``ei = ec = 1`` and ``delta = 0``. On the last
    row ``delta`` is the death flag, ``ec`` the observed fraction of the
    interval, and ``ei`` is 1 for a death or the observed fraction otherwise.
    A death falling exactly on a boundary opens and closes a final interval of
    zero central exposure.

    Parameters
    ----------
    table : SurvivalTable
    interval_length : float
    time_varying : sequence
        Numeric covariates attained over time. Items are column names (grown
        by ``interval_length`` per interval) or ``(name, increment)`` pairs.

    Returns
    -------
    PseudoTable
        ``degenerate`` flags zero-duration censored individuals, who get a
        single row with ``ei = ec = 0``.
    """
    L = float(interval_length)
    if not L > 0:
        raise ValueError("interval_length must be positive")
    increments = {}
    for item in time_varying:
        name, inc = (item, L) if isinstance(item, str) else (item[0], float(item[1]))
        if table.schema.get(name) != NUMERIC:
            raise SchemaError(f"time-varying field {name!r} must be a numeric covariate")
        increments[name] = inc

    counts = np.empty(len(table), dtype=int)
    last_frac = np.empty(len(table))
    for r, (d, e) in enumerate(zip(table.durations, table.events)):
        units = d / L
        if _on_boundary(units):
            whole = int(round(units))
            if e == 1 or whole == 0:
                counts[r], last_frac[r] = whole + 1, 0.0
            else:
                counts[r], last_frac[r] = whole, 1.0
        else:
            k = math.ceil(units)
            counts[r], last_frac[r] = k, units - (k - 1)

    total = int(counts.sum())
    owner = np.repeat(np.arange(len(table)), counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1])) if len(table) else np.zeros(0, int)
    interval = np.arange(total) - np.repeat(starts, counts)
    final = np.zeros(total, dtype=bool)
    if total:
        final[np.cumsum(counts) - 1] = True

    ev = table.events[owner]
    ec = np.ones(total)
    ec[final] = last_frac
    ei = ec.copy()
    ei[final & (ev == 1)] = 1.0
    delta = np.where(final, ev, 0).astype(int)
    degenerate = np.zeros(total, dtype=bool)
    degenerate[final] = (table.durations == 0) & (table.events == 0)

    cov = {}
    for name, col in table.covariates.items():
        expanded = col[owner]
        if name in increments:
            expanded = expanded + increments[name] * interval
        cov[name] = expanded
    return PseudoTable(ids=table.ids[owner], interval=interval, ei=ei, ec=ec, delta=delta,
                       covariates=cov, schema=table.schema, interval_length=L,
                       degenerate=degenerate)


def expand_individual(covariates, schema, n_intervals, time_varying=(), interval_length=1.0):
    """Covariate rows of one individual for intervals ``0 .. n_intervals - 1``.

    Used to predict per-interval mortality for a new life.
    """
    L = float(interval_length)
    increments = {}
    for item in time_varying:
        name, inc = (item, L) if isinstance(item, str) else (item[0], float(item[1]))
        increments[name] = inc
    j = np.arange(n_intervals)
    cov = {}
    for name, kind in schema.items():
        v = covariates[name]
        if kind == NUMERIC:
            cov[name] = float(v) + increments.get(name, 0.0) * j
        else:
            cov[name] = np.array([v] * n_intervals, dtype=object)
    return {"interval": j.astype(float), **cov}, {"interval": NUMERIC, **schema}


def aggregate_exposures(pseudo, j):
    """Interval totals ``(EI, EC, d, l, w)`` for interval ``j``.

    ``l`` counts lives entering the interval and ``w`` those withdrawn
    (censored) inside it, so that ``EI = l - w + sum of censoring fractions``.
    """
    mask = pseudo.interval == j
    if not mask.any():
        raise ValueError(f"interval {j} is not present")
    ei, ec, delta = pseudo.ei[mask], pseudo.ec[mask], pseudo.delta[mask]
    withdrawn = (delta == 0) & (ei < 1.0)
    return (float(ei.sum()), float(ec.sum()), int(delta.sum()), int(mask.sum()),
            int(withdrawn.sum()))


def stratified_split(table, test_fraction, seed=0):
    """Split into train and test sets with matching death rates.

    Each event stratum is shuffled with a seeded stream and
    ``round(test_fraction * size)`` of its rows go to the test set.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = substream(seed, "stratified_split")
    test_idx = []
    for value in (0, 1):
        stratum = np.flatnonzero(table.events == value)
        if stratum.size == 0:
            raise ValueError(f"event stratum {value} is empty")
        stratum = rng.permutation(stratum)
        test_idx.append(stratum[: int(round(test_fraction * stratum.size))])
    test_idx = np.sort(np.concatenate(test_idx))
    mask = np.zeros(len(table), dtype=bool)
    mask[test_idx] = True
    if mask.all() or not mask.any():
        raise ValueError("split leaves an empty train or test set")
    return table.take(np.flatnonzero(~mask)), table.take(np.flatnonzero(mask))
