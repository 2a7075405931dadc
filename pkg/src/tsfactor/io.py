"""CSV panels, YAML run configurations and result tables.

Panels
------
Comma-separated, one header row by default. In the default ``time_rows``
orientation each row is a time point and each column a series, which is how
return data are usually stored; ``series_rows`` is the transpose. A leading
label column (dates, series names) is detected when none of its data cells
parse as numbers, or can be forced with ``index_col``.

Configurations
--------------
YAML mappings. A simulation file is either a single cell::

    design: stationary      # stationary | endogenous | nonstationary | nonlinear
    p: 100
    T: 150                  # or t_rule: half_p | p | one_half_p
    seed: 7
    delta: 0                # 0 | 0.5 | strong | weak          (default 0)
    estimator: ols          # known_d | ols | iv | sieve       (default ols)
    replicates: 200
    k_bar: 1                # default 1, floor(2 T^(1/5)) for the sieve
    r: auto                 # auto | positive integer
    c_t: 0                  # adjusted-ratio penalty, 0 = plain ratio
    m: 5                    # sieve size, default floor(2 T^(1/5))
    burn_in: 100

or a table, where ``grid`` entries are lists expanded as a cartesian product
(in the order design, delta, estimator, p, T/t_rule) and every other
top-level key is a default shared by all cells::

    seed: 7
    replicates: 200
    grid:
      design: [stationary]
      delta: [0, 0.5]
      estimator: [known_d, ols]
      p: [100]
      t_rule: [half_p, p, one_half_p]
    cells:                  # optional explicit extra cells
      - {design: endogenous, estimator: iv, p: 100, T: 150}

An estimation file has ``kind: estimate`` and the keys of
:class:`EstimateConfig`.
"""

from __future__ import annotations

import csv
import itertools
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import yaml

from .errors import (
    BadValue,
    InputError,
    MissingRequired,
    NonFiniteCell,
    ParseError,
    RaggedRows,
    UnknownKey,
)
from .montecarlo import ESTIMATORS, T_RULES, CellResult, ExperimentSpec
from .panel import DESIGNS, Panel

ORIENTATIONS = ("time_rows", "series_rows")
NONFINITE_TOKENS = {"nan", "+nan", "-nan", "inf", "+inf", "-inf", "infinity", "-infinity", "+infinity"}


@dataclass(frozen=True)
class PanelFile:
    path: Union[str, os.PathLike]
    orientation: str = "time_rows"
    header: bool = True
    index_col: Optional[bool] = None
    delimiter: str = ","

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise InputError(f"orientation must be one of {ORIENTATIONS}")


def _as_file(file, **kwargs) -> PanelFile:
    return file if isinstance(file, PanelFile) else PanelFile(file, **kwargs)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _parse_cell(cell: str, row: int, col: int) -> float:
    text = cell.strip()
    if text.lower() in NONFINITE_TOKENS:
        raise NonFiniteCell(f"non-finite value {text!r} at row {row}, column {col}", row, col)
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as a number at row {row}, column {col}", row, col) from None
    if not math.isfinite(value):
        raise NonFiniteCell(f"non-finite value {text!r} at row {row}, column {col}", row, col)
    return value


def _read_rows(path, delimiter: str) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter)]
    # tolerate trailing blank lines only
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError(f"{path}: file is empty", 1, 1)
    return rows


def read_table(path, header: Optional[bool] = True, index_col: Optional[bool] = None,
               delimiter: str = ","):
    """Parse a rectangular numeric CSV.

    ``header=None`` and ``index_col=None`` auto-detect: a first row (column)
    is labels when none of its cells parse as numbers.

    Returns
    -------
    values : (n_rows, n_cols) ndarray
    column_labels : list of str or None
    row_labels : list of str or None
    """
    rows = _read_rows(path, delimiter)
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise RaggedRows(f"{path}: row {i} has {len(row)} cells, expected {width}", i, len(row))
    if header is None:
        header = not any(_is_number(c.strip()) for c in rows[0])
    body_start = 1 if header else 0
    body = rows[body_start:]
    if not body:
        raise ParseError(f"{path}: no data rows", body_start + 1, 1)
    if index_col is None:
        index_col = width > 1 and not any(_is_number(r[0].strip()) for r in body)
    first = 1 if index_col else 0
    values = np.empty((len(body), width - first))
    for i, row in enumerate(body):
        for j in range(first, width):
            values[i, j - first] = _parse_cell(row[j], i + body_start + 1, j + 1)
    column_labels = [c.strip() for c in rows[0][first:]] if header else None
    row_labels = [r[0].strip() for r in body] if index_col else None
    return values, column_labels, row_labels


def read_panel(file, **kwargs) -> Panel:
    """Read a CSV panel into series x time storage.

    Parameters
    ----------
    file : PanelFile or path
        Extra keyword arguments build a :class:`PanelFile` from a path.
    """
    file = _as_file(file, **kwargs)
    values, col_labels, row_labels = read_table(file.path, file.header, file.index_col, file.delimiter)
    if file.orientation == "time_rows":
        return Panel(values.T, series_labels=col_labels, time_labels=row_labels)
    return Panel(values, series_labels=row_labels, time_labels=col_labels)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_matrix(path, values, column_labels: Optional[Sequence[str]] = None,
                 row_labels: Optional[Sequence[str]] = None, row_label_name: str = "") -> None:
    """Write a 2-D array as CSV with a header row (default labels c1..cn)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n_rows, n_cols = values.shape
    if column_labels is None:
        column_labels = [f"c{j + 1}" for j in range(n_cols)]
    header = ([row_label_name] if row_labels is not None else []) + list(column_labels)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for i in range(n_rows):
                prefix = [row_labels[i]] if row_labels is not None else []
                writer.writerow(prefix + [_fmt(v) for v in values[i]])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def write_panel(panel: Panel, file, **kwargs) -> None:
    """Write a panel; unlabeled series get headers s1..sp (t1..tT for time)."""
    file = _as_file(file, **kwargs)
    series = panel.series_labels or [f"s{i + 1}" for i in range(panel.p)]
    if file.orientation == "time_rows":
        write_matrix(file.path, panel.data.T, series, panel.time_labels, "time")
    else:
        times = panel.time_labels or [f"t{j + 1}" for j in range(panel.T)]
        write_matrix(file.path, panel.data, times, series, "series")


def write_series(path, values, index_name: str = "index", value_name: str = "value") -> None:
    """Two-column CSV (1-based index, value)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([index_name, value_name])
        for i, v in enumerate(np.asarray(values, dtype=float).ravel(), start=1):
            writer.writerow([i, _fmt(v)])


# --------------------------------------------------------------------------
# configuration

CELL_KEYS = {
    "design", "p", "T", "t_rule", "delta", "estimator", "replicates", "k_bar",
    "r", "seed", "c_t", "m", "burn_in",
}
GRID_ORDER = ("design", "delta", "estimator", "p", "T", "t_rule")


@dataclass(frozen=True)
class EstimateConfig:
    """Inputs and options of one estimation run."""

    y: str
    z: Optional[str] = None
    w: Optional[str] = None
    method: Optional[str] = None
    k_bar: Optional[int] = None
    r: Union[str, int] = "auto"
    c_t: Union[float, str] = 0.0
    m: Optional[int] = None
    out: str = "out"
    sectors: Optional[str] = None
    orientation: str = "time_rows"


ESTIMATE_KEYS = set(EstimateConfig.__dataclass_fields__) | {"kind"}


def _int(value, key: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise BadValue(key, f"expected an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise BadValue(key, f"must be >= {minimum}, got {value}")
    return value


def _float(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise BadValue(key, f"expected a number, got {value!r}")
    return float(value)


def _delta(value, key: str) -> float:
    if isinstance(value, str):
        if value not in ("strong", "weak"):
            raise BadValue(key, f"expected 0, 0.5, 'strong' or 'weak', got {value!r}")
        return 0.0 if value == "strong" else 0.5
    value = _float(value, key)
    if value not in (0.0, 0.5):
        raise BadValue(key, f"expected 0 or 0.5, got {value}")
    return value


def _choice(value, key: str, options) -> str:
    if value not in options:
        raise BadValue(key, f"expected one of {sorted(options)}, got {value!r}")
    return value


def _r(value, key: str):
    if value == "auto":
        return "auto"
    return _int(value, key, minimum=1)


def _load_yaml(path) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        row = mark.line + 1 if mark is not None else None
        col = mark.column + 1 if mark is not None else None
        raise ParseError(f"{path}: invalid YAML: {exc}", row, col) from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    return doc


def _cell_from_mapping(raw: dict, where: str = "") -> ExperimentSpec:
    def k(name):
        return f"{where}{name}"

    for key in raw:
        if key not in CELL_KEYS:
            raise UnknownKey(k(key))
    for key in ("design", "p", "seed"):
        if key not in raw:
            raise MissingRequired(k(key))
    if "T" in raw and "t_rule" in raw:
        raise BadValue(k("T"), "give either T or t_rule, not both")
    if "T" not in raw and "t_rule" not in raw:
        raise MissingRequired(k("T"))

    design = _choice(raw["design"], k("design"), DESIGNS)
    p = _int(raw["p"], k("p"), minimum=4)
    if "T" in raw:
        t_rule = _int(raw["T"], k("T"), minimum=10)
    else:
        t_rule = _choice(raw["t_rule"], k("t_rule"), T_RULES)
    seed = _int(raw["seed"], k("seed"), minimum=0)
    if seed >= 2**64:
        raise BadValue(k("seed"), "must fit in 64 bits")
    estimator = _choice(raw.get("estimator", "ols"), k("estimator"), ESTIMATORS)
    kwargs = dict(
        design=design,
        p=p,
        t_rule=t_rule,
        delta=_delta(raw.get("delta", 0), k("delta")),
        estimator=estimator,
        replicates=_int(raw.get("replicates", 200), k("replicates"), minimum=1),
        k_bar=None if raw.get("k_bar") is None else _int(raw["k_bar"], k("k_bar"), minimum=1),
        r_mode=_r(raw.get("r", "auto"), k("r")),
        master_seed=seed,
        c_t=_float(raw.get("c_t", 0.0), k("c_t")),
        m=None if raw.get("m") is None else _int(raw["m"], k("m"), minimum=1),
        burn_in=_int(raw.get("burn_in", 100), k("burn_in"), minimum=0),
    )
    if kwargs["c_t"] < 0:
        raise BadValue(k("c_t"), "must be nonnegative")
    try:
        return ExperimentSpec(**kwargs)
    except InputError as exc:
        raise BadValue(where.rstrip(".") or "spec", str(exc)) from None


def _estimate_from_mapping(raw: dict) -> EstimateConfig:
    for key in raw:
        if key not in ESTIMATE_KEYS:
            raise UnknownKey(key)
    if "y" not in raw:
        raise MissingRequired("y")
    kwargs = {key: raw[key] for key in raw if key != "kind"}
    if "method" in kwargs and kwargs["method"] is not None:
        _choice(kwargs["method"], "method", ("ols", "iv", "sieve", "none"))
    if "r" in kwargs:
        kwargs["r"] = _r(kwargs["r"], "r")
    if kwargs.get("k_bar") is not None:
        kwargs["k_bar"] = _int(kwargs["k_bar"], "k_bar", minimum=1)
    if kwargs.get("m") is not None:
        kwargs["m"] = _int(kwargs["m"], "m", minimum=1)
    if "c_t" in kwargs and kwargs["c_t"] != "auto":
        kwargs["c_t"] = _float(kwargs["c_t"], "c_t")
    if "orientation" in kwargs:
        _choice(kwargs["orientation"], "orientation", ORIENTATIONS)
    return EstimateConfig(**kwargs)


def _table_from_mapping(raw: dict) -> list[ExperimentSpec]:
    defaults = {key: value for key, value in raw.items() if key not in ("grid", "cells", "kind")}
    for key in defaults:
        if key not in CELL_KEYS:
            raise UnknownKey(key)
    specs = []
    grid = raw.get("grid")
    if grid is not None:
        if not isinstance(grid, dict):
            raise BadValue("grid", "must be a mapping of key -> list")
        for key, values in grid.items():
            if key not in CELL_KEYS:
                raise UnknownKey(f"grid.{key}")
            if not isinstance(values, list) or not values:
                raise BadValue(f"grid.{key}", "must be a nonempty list")
        keys = sorted(grid, key=lambda name: GRID_ORDER.index(name) if name in GRID_ORDER else len(GRID_ORDER))
        for combo in itertools.product(*(grid[key] for key in keys)):
            cell = dict(defaults)
            cell.update(zip(keys, combo))
            where = "grid[" + ",".join(f"{key}={value}" for key, value in zip(keys, combo)) + "]."
            specs.append(_cell_from_mapping(cell, where))
    cells = raw.get("cells")
    if cells is not None:
        if not isinstance(cells, list):
            raise BadValue("cells", "must be a list of mappings")
        for i, entry in enumerate(cells):
            if not isinstance(entry, dict):
                raise BadValue(f"cells[{i}]", "must be a mapping")
            cell = dict(defaults)
            cell.update(entry)
            specs.append(_cell_from_mapping(cell, f"cells[{i}]."))
    if grid is None and cells is None:
        specs.append(_cell_from_mapping(defaults))
    return specs


def read_spec(path):
    """Read a run configuration.

    Returns an :class:`EstimateConfig` for ``kind: estimate`` files, an
    :class:`ExperimentSpec` for a single-cell simulation file, and a list of
    specs for a table file (``grid`` or ``cells``).
    """
    raw = _load_yaml(path)
    kind = raw.get("kind", "simulate")
    if kind == "estimate":
        return _estimate_from_mapping(raw)
    if kind != "simulate":
        raise BadValue("kind", f"expected 'simulate' or 'estimate', got {kind!r}")
    specs = _table_from_mapping(raw)
    if "grid" in raw or "cells" in raw:
        return specs
    return specs[0]


def read_specs(path) -> list[ExperimentSpec]:
    """Like :func:`read_spec` for simulation files, always returning a list."""
    spec = read_spec(path)
    if isinstance(spec, EstimateConfig):
        raise BadValue("kind", "expected a simulation configuration")
    return spec if isinstance(spec, list) else [spec]


# --------------------------------------------------------------------------
# results

TABLE_COLUMNS = (
    "design", "delta", "estimator", "p", "T", "replicates", "freq_r_correct",
    "d2_min", "d2_q1", "d2_median", "d2_q3", "d2_max", "coef_err_median",
    "errors_count", "wall_time_s",
)


def _num(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return _fmt(value) if isinstance(value, float) else str(value)


def table_rows(results: Sequence[CellResult], timing: bool = True) -> list[list[str]]:
    rows = []
    for res in results:
        s = res.spec
        coef = res.coef_error_summary.median if res.coef_error_summary is not None else None
        rows.append([
            s.design, _num(s.delta), s.estimator, str(s.p), str(s.T), str(s.replicates),
            _num(res.freq_r_correct), *(_num(v) for v in res.d2_summary), _num(coef),
            str(res.errors_count), f"{res.wall_time:.3f}" if timing else "",
        ])
    return rows


def write_results_table(results: Sequence[CellResult], path, timing: bool = True) -> None:
    """One row per cell; see ``TABLE_COLUMNS``. ``timing=False`` leaves
    ``wall_time_s`` empty so the file depends on the inputs only."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE_COLUMNS)
        writer.writerows(table_rows(results, timing))


def write_boxplot_summaries(results: Sequence[CellResult], path) -> None:
    """Five-number summaries of D^2 and of the coefficient error per cell."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cell", "design", "delta", "estimator", "p", "T", "statistic",
                         "min", "q1", "median", "q3", "max"])
        for i, res in enumerate(results, start=1):
            s = res.spec
            head = [i, s.design, _num(s.delta), s.estimator, s.p, s.T]
            writer.writerow(head + ["d2"] + [_num(v) for v in res.d2_summary])
            if res.coef_error_summary is not None:
                writer.writerow(head + ["coef_err"] + [_num(v) for v in res.coef_error_summary])


def write_replicates(result: CellResult, path) -> None:
    """Per-replicate r_hat, D^2 and coefficient error (plot-ready)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replicate", "r_hat", "d2", "coef_err"])
        for i, (r, d2, ce) in enumerate(zip(result.r_hats, result.d2_values, result.coef_errors)):
            writer.writerow([i, int(r), _num(float(d2)), _num(float(ce))])


def cell_filename(index: int, spec: ExperimentSpec) -> str:
    delta = "strong" if spec.delta == 0 else "weak"
    return f"cell{index:03d}_{spec.design}_{delta}_{spec.estimator}_p{spec.p}_T{spec.T}.csv"


def safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label).strip("_") or "group"


def read_sector_map(path) -> dict[str, str]:
    """Two-column CSV (series_label, group_label); an optional header row is
    recognized by the literal first cell ``series`` or ``series_label``."""
    rows = _read_rows(path, ",")
    mapping = {}
    for i, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise RaggedRows(f"{path}: row {i} has {len(row)} cells, expected 2", i, len(row))
        if i == 1 and row[0].strip().lower() in ("series", "series_label"):
            continue
        mapping[row[0].strip()] = row[1].strip()
    return mapping


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path
