# -*- coding: utf-8 -*-
"""
This module contains the sweep machinery of *qillum*: the flat :class:`SweepRecord` written to CSV/JSON, the
:class:`RunManifest` that accompanies every output file, the plain-text grid specification and the sweep engine.

A grid spec is a text file with one ``key = value`` line per axis::

    # regime map with N_S >> N_B
    probe = tmsv, threemode
    N_B = 1e-3:1:8:log
    kappa = 1e-3:0.1:8:log
    ns_factor = 100
    epsilon = 0.01

Values are a single number, a comma separated list, or ``start:stop:count`` with an optional ``:log`` for log spacing.
Rows are produced in lexicographic order of the axes as they appear in the file.
"""
import datetime
import itertools
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from qillum.probes import ProbeKind, SceneParams, THREEMODE
from qillum.stein import (
    ExponentQuery,
    error_exponent,
    error_probability,
    relative_entropy_pair,
)
from qillum.utils import InvalidArgumentError, QillumError, error_flag

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "probe",
    "N_S",
    "N_B",
    "kappa",
    "epsilon",
    "C",
    "M",
    "a",
    "b",
    "R",
    "P_err",
    "path",
    "flags",
]
FLOAT_FORMAT = "%.17g"
FLAG_SEPARATOR = "|"
CONVENTION = (
    "quadratures ordered q1..qn p1..pn; vacuum variance 1/2; entropies in nats; "
    "R = a + sqrt(b/M) Phi^-1(epsilon) without the O(ln M / M) term; M = 0 is the M -> infinity limit"
)
OUTPUT_DIR_ENV = "QILLUM_OUTPUT_DIR"

# grid spec keys and their accepted spellings
_AXIS_ALIASES = {
    "probe": "probe",
    "probes": "probe",
    "n_s": "N_S",
    "ns": "N_S",
    "n_b": "N_B",
    "nb": "N_B",
    "kappa": "kappa",
    "epsilon": "epsilon",
    "eps": "epsilon",
    "c": "C",
    "m": "M",
    "ns_factor": "ns_factor",
}
_AXIS_DEFAULTS = {"kappa": [0.01], "epsilon": [0.01], "M": [0]}


class GridSpecError(InvalidArgumentError):
    """
    Malformed grid specification. ``line`` holds the 1-based line number (None for whole-file problems).
    """

    kind = "grid-spec"

    def __init__(self, message, line=None):
        self.line = line
        super().__init__("line {}: {}".format(line, message) if line else message)


# ----------------------------------------------------------------------------------------------------------------------
# records
@dataclass
class SweepRecord:
    """
    Class for a single evaluated point. ``M = 0`` denotes the M -> infinity limit where R = a.
    """

    probe: str
    N_S: float
    N_B: float
    kappa: float
    epsilon: float
    M: int = 0
    C: Optional[float] = None
    a: float = math.nan
    b: float = math.nan
    R: float = math.nan
    P_err: float = math.nan
    path: str = ""
    flags: List[str] = field(default_factory=list)

    @property
    def has_error(self) -> bool:
        return any(f.startswith("error:") for f in self.flags)

    def as_row(self) -> dict:
        row = asdict(self)
        row["C"] = math.nan if self.C is None else self.C
        row["flags"] = FLAG_SEPARATOR.join(self.flags)
        return row

    @classmethod
    def from_row(cls, row):
        def _num(value):
            return math.nan if value is None or value == "" else float(value)

        flags = row.get("flags")
        if not isinstance(flags, str):
            flags = ""
        C = _num(row.get("C"))
        return cls(
            probe=str(row["probe"]),
            N_S=_num(row["N_S"]),
            N_B=_num(row["N_B"]),
            kappa=_num(row["kappa"]),
            epsilon=_num(row["epsilon"]),
            M=int(row["M"]),
            C=None if math.isnan(C) else C,
            a=_num(row["a"]),
            b=_num(row["b"]),
            R=_num(row["R"]),
            P_err=_num(row["P_err"]),
            path=row["path"] if isinstance(row.get("path"), str) else "",
            flags=[f for f in flags.split(FLAG_SEPARATOR) if f],
        )


@dataclass
class RunManifest:
    """
    Class for the provenance block written with every output file.
    """

    version: str
    command: str
    convention: str = CONVENTION
    timestamp: str = ""

    @classmethod
    def create(cls, argv=None):
        from qillum import __version__

        command = " ".join(["qillum"] + list(argv)) if argv is not None else ""
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        return cls(version=__version__, command=command, timestamp=stamp)

    def as_dict(self) -> dict:
        return asdict(self)

    def comment_lines(self) -> str:
        return "".join("# {}: {}\n".format(k, v) for k, v in self.as_dict().items())


def evaluate_point(probe, N_S, N_B, kappa, epsilon=0.01, M=0, C=None, path=None) -> SweepRecord:
    """
    Evaluate one (probe, scene, M) point. Errors never propagate: a failed point comes back with an
    ``error:<kind>:<message>`` flag and NaN numerics.

    :param probe: "coherent", "tmsv" or "threemode"
    :param M: number of copies, 0 for the M -> infinity limit
    :param C: three-mode correlation, default C_max(N_S)
    :param path: force "closed" or "generic"
    :returns: :class:`SweepRecord`
    """
    record = SweepRecord(
        probe=str(probe), N_S=N_S, N_B=N_B, kappa=kappa, epsilon=epsilon, M=int(M), C=C
    )
    flags = record.flags
    try:
        scene = SceneParams(N_S=N_S, N_B=N_B, kappa=kappa, epsilon=epsilon)
        probe_obj = ProbeKind(probe, C=C)
        record.probe = probe_obj.kind
        flags.extend(scene.flags)
        if probe_obj.kind == THREEMODE:
            record.C = probe_obj.correlation(scene.N_S)
        with warnings.catch_warnings():
            # recorded as flags instead
            warnings.simplefilter("ignore")
            pair, used = relative_entropy_pair(probe_obj, scene, path=path, flags=flags)
        record.a, record.b, record.path = pair.a, pair.b, used
        if record.M > 0:
            record.R = error_exponent(ExponentQuery(M=record.M, epsilon=scene.epsilon, pair=pair))
            record.P_err = error_probability(record.R, record.M)
        elif record.M == 0:
            record.R = pair.a
            record.P_err = 0.0 if pair.a > 0 else 1.0
        else:
            raise InvalidArgumentError("M must be >= 0, got {}".format(record.M))
    except QillumError as err:
        logger.info("point failed: %s", err)
        record.a = record.b = record.R = record.P_err = math.nan
        record.path = ""
        flags.append(error_flag(err))
    return record


# ----------------------------------------------------------------------------------------------------------------------
# grid specs
def _parse_number(text, line_no):
    try:
        return float(text)
    except ValueError:
        raise GridSpecError("cannot parse number {!r}".format(text), line_no)


def _parse_values(key, text, line_no):
    if key == "probe":
        values = [v.strip() for v in text.split(",") if v.strip()]
        for v in values:
            try:
                ProbeKind(v)
            except InvalidArgumentError as err:
                raise GridSpecError(str(err), line_no)
        return values
    if ":" in text:
        parts = [p.strip() for p in text.split(":")]
        log = len(parts) == 4 and parts[3].lower() == "log"
        if len(parts) not in (3, 4) or (len(parts) == 4 and not log):
            raise GridSpecError("range must be start:stop:count or start:stop:count:log", line_no)
        start, stop = _parse_number(parts[0], line_no), _parse_number(parts[1], line_no)
        count = _parse_number(parts[2], line_no)
        if count != int(count) or count < 1:
            raise GridSpecError("count must be a positive integer", line_no)
        if log:
            if start <= 0 or stop <= 0:
                raise GridSpecError("log ranges need positive endpoints", line_no)
            values = np.geomspace(start, stop, int(count))
        else:
            values = np.linspace(start, stop, int(count))
        values = [float(v) for v in values]
        if key == "M":
            # copy numbers on a range snap to integers
            values = [float(round(v)) for v in values]
    else:
        values = [_parse_number(v.strip(), line_no) for v in text.split(",") if v.strip()]
    if not values:
        raise GridSpecError("no values given for {}".format(key), line_no)
    if key == "M":
        if any(v != round(v) or v < 0 for v in values):
            raise GridSpecError("M values must be integers >= 0", line_no)
        # rounding log ranges can repeat integers
        values = list(dict.fromkeys(int(round(v)) for v in values))
    return values


@dataclass
class GridSpec:
    """
    Class for a parsed grid specification. ``axes`` keeps the file order of the keys.
    """

    axes: dict
    ns_factor: Optional[float] = None

    @property
    def size(self) -> int:
        return int(np.prod([len(v) for v in self.axes.values()]))

    def points(self):
        """
        Yields keyword dictionaries for :func:`evaluate_point` in lexicographic axis order.
        """
        names = list(self.axes)
        for combo in itertools.product(*(self.axes[n] for n in names)):
            point = dict(zip(names, combo))
            if self.ns_factor is not None:
                point["N_S"] = self.ns_factor * point["N_B"]
            yield point


def parse_grid_spec(text: str) -> GridSpec:
    """
    Parse grid spec text into a :class:`GridSpec`.

    :raises GridSpecError: for malformed lines (with the line number), duplicate or unknown keys, or missing axes
    """
    axes = {}
    ns_factor = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GridSpecError("expected 'key = value', got {!r}".format(raw.strip()), line_no)
        key_text, value_text = (s.strip() for s in line.split("=", 1))
        key = _AXIS_ALIASES.get(key_text.lower())
        if key is None:
            raise GridSpecError("unknown key {!r}".format(key_text), line_no)
        if key in axes or (key == "ns_factor" and ns_factor is not None):
            raise GridSpecError("duplicate key {!r}".format(key_text), line_no)
        if key == "ns_factor":
            ns_factor = _parse_number(value_text, line_no)
            if ns_factor <= 0:
                raise GridSpecError("ns_factor must be > 0", line_no)
            continue
        axes[key] = _parse_values(key, value_text, line_no)

    if "probe" not in axes:
        raise GridSpecError("missing 'probe' axis")
    if "N_B" not in axes:
        raise GridSpecError("missing 'N_B' axis")
    if ns_factor is None and "N_S" not in axes:
        raise GridSpecError("missing 'N_S' axis (or ns_factor)")
    if ns_factor is not None and "N_S" in axes:
        raise GridSpecError("N_S and ns_factor are mutually exclusive")
    for key, default in _AXIS_DEFAULTS.items():
        axes.setdefault(key, list(default))
    return GridSpec(axes=axes, ns_factor=ns_factor)


def read_grid_spec(path) -> GridSpec:
    with open(path, "r") as f:
        return parse_grid_spec(f.read())


def _evaluate_kwargs(kwargs):
    return evaluate_point(**kwargs)


def run_sweep(grid: GridSpec, workers: int = 1, path: str = None) -> List[SweepRecord]:
    """
    Evaluate every point of a grid. With ``workers > 1`` points are spread over a process pool; the returned order is
    always the grid order.
    """
    points = list(grid.points())
    if path is not None:
        for p in points:
            p["path"] = path
    logger.info("sweep: %d points on %d worker(s)", len(points), workers)
    if workers <= 1:
        return [_evaluate_kwargs(p) for p in points]
    chunk = max(1, len(points) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_kwargs, points, chunksize=chunk))


# ----------------------------------------------------------------------------------------------------------------------
# output
def records_to_frame(records) -> pd.DataFrame:
    df = pd.DataFrame([r.as_row() for r in records], columns=CSV_COLUMNS)
    df["M"] = df["M"].astype("int64")
    return df


def records_from_frame(df: pd.DataFrame) -> List[SweepRecord]:
    return [SweepRecord.from_row(row) for row in df.to_dict(orient="records")]


def write_csv(records, stream, manifest: RunManifest = None):
    """
    Write records as CSV to an open text stream, preceded by the manifest as ``#`` comment lines.
    """
    if manifest is not None:
        stream.write(manifest.comment_lines())
    records_to_frame(records).to_csv(
        stream, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n"
    )


def read_csv(path_or_stream) -> List[SweepRecord]:
    df = pd.read_csv(
        path_or_stream,
        comment="#",
        dtype={"probe": str, "path": str, "flags": str},
        float_precision="round_trip",
    )
    return records_from_frame(df)


def write_json(records, stream, manifest: RunManifest = None, extra: dict = None):
    """
    Write records and manifest as one JSON document. NaN values are written as null.
    """
    rows = []
    for r in records:
        row = r.as_row()
        row["flags"] = list(r.flags)
        rows.append({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()})
    doc = {"manifest": manifest.as_dict() if manifest else None, "records": rows}
    if extra:
        doc.update(extra)
    json.dump(doc, stream, indent=2)
    stream.write("\n")


def output_dir(outdir: str = None) -> str:
    """
    Output directory: ``outdir`` if given, else $QILLUM_OUTPUT_DIR, else the current directory.
    """
    target = outdir or os.environ.get(OUTPUT_DIR_ENV) or os.getcwd()
    os.makedirs(target, exist_ok=True)
    return target
