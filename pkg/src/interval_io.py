# Columns per variable V: V_lo, V_hi and optionally V_mode; a leading id column is optional.

from dataclasses import dataclass
import io
import logging
import math
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError
import yaml

from errors import (
    ConfigError,
    DatasetParseError,
    InvalidParameterError,
    ParseError,
    TypeNotSupportedError,
)
from intervals import BivariateIntervalObs, BivariateIntervalSample, Interval
from simulator import StudyConfig
from symbolic_pca import MultivariateIntervalSample, PcResult
from utils import format_float, generate_unique_path, sanitize_extension, sha256_hex

logger = logging.getLogger(__name__)

ID_COLUMN = "id"
SUFFIXES = ("_lo", "_hi", "_mode")


@dataclass(frozen=True)
class IntervalTable:
    variables: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    # NaN marks an absent mode; None when the file has no mode columns
    modes: np.ndarray | None = None
    ids: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def p(self) -> int:
        return len(self.variables)


def _split_header(columns: list[str]) -> tuple[bool, list[str], bool]:
    has_ids = bool(columns) and columns[0] == ID_COLUMN
    names = columns[1:] if has_ids else columns
    variables: list[str] = []
    with_modes: set[str] = set()
    for name in names:
        suffix = next((s for s in SUFFIXES if name.endswith(s)), None)
        if suffix is None:
            raise DatasetParseError(0, name, "header columns must be named V_lo, V_hi or V_mode")
        variable = name[: -len(suffix)]
        if suffix == "_lo":
            variables.append(variable)
        elif suffix == "_mode":
            with_modes.add(variable)

    expected = []
    for variable in variables:
        expected += [f"{variable}_lo", f"{variable}_hi"]
        if variable in with_modes:
            expected.append(f"{variable}_mode")
    if expected != names:
        raise DatasetParseError(0, ",".join(names), f"expected columns {','.join(expected)}")
    if with_modes and with_modes != set(variables):
        raise DatasetParseError(0, "mode", "either every variable or none has a mode column")
    return has_ids, variables, bool(with_modes)


def _cell(frame: pd.DataFrame, row: int, column: str, optional: bool = False) -> float:
    raw = frame.at[row, column]
    text = raw.strip() if isinstance(raw, str) else ""
    if text == "":
        if optional:
            return math.nan
        raise DatasetParseError(row + 1, column, "missing value")
    try:
        value = float(text)
    except ValueError:
        raise DatasetParseError(row + 1, column, f"'{text}' is not a number") from None
    if not math.isfinite(value):
        raise DatasetParseError(row + 1, column, f"'{text}' is not finite")
    return value


def parse_interval_csv(text: str) -> IntervalTable:
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DatasetParseError(0, "-", str(e)) from e
    has_ids, variables, has_modes = _split_header([str(c).strip() for c in frame.columns])
    frame.columns = [str(c).strip() for c in frame.columns]

    n, p = len(frame), len(variables)
    lower, upper = np.empty((n, p)), np.empty((n, p))
    modes = np.full((n, p), math.nan) if has_modes else None
    for i in range(n):
        for j, variable in enumerate(variables):
            lo = _cell(frame, i, f"{variable}_lo")
            hi = _cell(frame, i, f"{variable}_hi")
            if lo > hi:
                raise DatasetParseError(i + 1, f"{variable}_hi", f"upper bound {hi} is below lower bound {lo}")
            lower[i, j], upper[i, j] = lo, hi
            if modes is not None:
                mode = _cell(frame, i, f"{variable}_mode", optional=True)
                if not math.isnan(mode) and not lo <= mode <= hi:
                    raise DatasetParseError(i + 1, f"{variable}_mode", f"mode {mode} lies outside [{lo}, {hi}]")
                modes[i, j] = mode

    ids = tuple(frame[ID_COLUMN].str.strip()) if has_ids else None
    logger.debug("parsed %d rows of %d interval variables", n, p)
    return IntervalTable(tuple(variables), lower, upper, modes, ids)


def load_interval_file(path: Path) -> tuple[str, IntervalTable]:
    """Digest of the raw bytes and the parsed table."""
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise DatasetParseError(0, "-", f"{path} is not UTF-8 text") from None
    return input_digest(data), parse_interval_csv(text)


def read_interval_csv(path: Path) -> IntervalTable:
    return load_interval_file(path)[1]


def format_interval_csv(table: IntervalTable) -> str:
    columns = [ID_COLUMN] if table.ids is not None else []
    for variable in table.variables:
        columns += [f"{variable}_lo", f"{variable}_hi"]
        if table.modes is not None:
            columns.append(f"{variable}_mode")

    rows = []
    for i in range(table.n):
        row = [table.ids[i]] if table.ids is not None else []
        for j in range(table.p):
            row += [format_float(table.lower[i, j]), format_float(table.upper[i, j])]
            if table.modes is not None:
                mode = table.modes[i, j]
                row.append("" if math.isnan(mode) else format_float(mode))
        rows.append(row)
    return pd.DataFrame(rows, columns=columns).to_csv(index=False, lineterminator="\n")


def write_interval_csv(table: IntervalTable, path: Path) -> Path:
    path.write_text(format_interval_csv(table), encoding="utf-8")
    return path


def _optional_mode(value: float) -> float | None:
    return None if math.isnan(value) else float(value)


def to_bivariate_sample(table: IntervalTable) -> BivariateIntervalSample:
    """The first variable becomes x, the second y."""
    if table.p != 2:
        raise InvalidParameterError("variables", f"a bivariate file has exactly 2 interval variables, got {table.p}")
    observations = []
    for i in range(table.n):
        modes = (None, None) if table.modes is None else tuple(_optional_mode(v) for v in table.modes[i])
        observations.append(BivariateIntervalObs(
            x=Interval(lower=float(table.lower[i, 0]), upper=float(table.upper[i, 0])),
            y=Interval(lower=float(table.lower[i, 1]), upper=float(table.upper[i, 1])),
            mode_x=modes[0],
            mode_y=modes[1],
        ))
    return BivariateIntervalSample(observations=tuple(observations))


def from_bivariate_sample(sample: BivariateIntervalSample, variables: tuple[str, str] = ("X", "Y")) -> IntervalTable:
    e = sample.as_arrays()
    return IntervalTable(
        variables=variables,
        lower=np.column_stack([e.c, e.a]),
        upper=np.column_stack([e.d, e.b]),
        modes=np.column_stack([e.mode_x, e.mode_y]) if sample.has_modes else None,
    )


def to_multivariate_sample(table: IntervalTable) -> MultivariateIntervalSample:
    modes = None
    if table.modes is not None:
        modes = tuple(tuple(_optional_mode(v) for v in row) for row in table.modes)
    return MultivariateIntervalSample(
        variables=table.variables,
        observations=tuple(
            tuple(Interval(lower=float(lo), upper=float(hi)) for lo, hi in zip(row_lo, row_hi))
            for row_lo, row_hi in zip(table.lower, table.upper)
        ),
        modes=modes,
        ids=table.ids,
    )


class DynamicParser:
    Parser = Callable[[str], Any]

    __parsers: dict[str, Parser] = {
        "yml": yaml.safe_load,
        "yaml": yaml.safe_load,
    }

    def __get_parser(self, typename: str) -> Parser:
        parser = self.__parsers.get(typename)
        if parser is None:
            raise TypeNotSupportedError(typename)
        return parser

    def supports(self, typename: str) -> bool:
        return typename in self.__parsers

    def parse(self, typename: str, data: str) -> Any:
        parser = self.__get_parser(typename)
        try:
            return parser(data)
        except Exception as e:
            raise ParseError(typename) from e


def study_config_from_flat(data: dict[str, Any], source: str) -> StudyConfig:
    try:
        return StudyConfig.from_flat(data)
    except ValidationError as e:
        raise ConfigError(source, "; ".join(f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors())) from e
    except TypeError as e:
        raise ConfigError(source, str(e)) from e


def parse_study_config(typename: str, text: str, source: str = "<string>") -> StudyConfig:
    data = DynamicParser().parse(typename, text)
    if not isinstance(data, dict):
        raise ConfigError(source, "expected a mapping of keys to values")
    return study_config_from_flat(data, source)


def load_study_config(path: Path) -> StudyConfig:
    typename = sanitize_extension(path.suffix).lower()
    return parse_study_config(typename, path.read_text(encoding="utf-8"), str(path))


def dump_study_config(config: StudyConfig) -> str:
    return yaml.safe_dump(config.to_flat(), sort_keys=False)


def input_digest(data: bytes) -> str:
    return f"sha256:{sha256_hex(data)}"


class Report(BaseModel):
    command: str
    version: str
    input_digest: str | None = None
    parameters: dict[str, Any] = {}
    results: dict[str, Any] = {}
    notes: list[str] = []

    def as_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def to_json(self) -> str:
        # non-finite values (an undefined rho) become null
        return self.model_dump_json(indent=2)


def results_frame(report: Report) -> pd.DataFrame:
    """Flattens the results block into (section, key, value) rows."""
    rows = []

    def walk(prefix: str, value: Any):
        if isinstance(value, dict):
            for key, inner in value.items():
                walk(f"{prefix}.{key}" if prefix else str(key), inner)
        elif isinstance(value, (list, tuple)):
            for index, inner in enumerate(value):
                walk(f"{prefix}[{index}]", inner)
        else:
            section, _, key = prefix.partition(".")
            rows.append({"section": section, "key": key, "value": value})

    walk("", report.results)
    return pd.DataFrame(rows, columns=["section", "key", "value"])


def write_report(report: Report, root: Path, stem: str, fmt: str) -> Path:
    if fmt == "json":
        path = generate_unique_path(root, stem, "json")
        path.write_text(report.to_json() + "\n", encoding="utf-8")
    elif fmt == "csv":
        path = generate_unique_path(root, stem, "csv")
        results_frame(report).to_csv(path, index=False, lineterminator="\n")
    else:
        raise TypeNotSupportedError(fmt)
    logger.info("wrote %s", path)
    return path


def pc_intervals_frame(result: PcResult, ids: tuple[str, ...]) -> pd.DataFrame:
    lower, upper = result.pc_intervals.lower, result.pc_intervals.upper
    rows = [
        {"observation": ids[i], "component": k + 1, "lower": lower[i, k], "upper": upper[i, k]}
        for i in range(lower.shape[0])
        for k in range(lower.shape[1])
    ]
    return pd.DataFrame(rows, columns=["observation", "component", "lower", "upper"])


def write_frame(frame: pd.DataFrame, root: Path, stem: str) -> Path:
    path = generate_unique_path(root, stem, "csv")
    frame.to_csv(path, index=False, lineterminator="\n", float_format=None)
    return path

