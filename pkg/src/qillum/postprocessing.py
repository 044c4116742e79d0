# -*- coding: utf-8 -*-
"""
This module contains functions and classes related to post processing of exponent results:

* :class:`IlluminationAnalysis` evaluates a set of probes on one scene and returns R(M) curves as an `xarray` DataSet
* figure presets (figure_lib.json) and :func:`reproduce_figure` regenerate the data of the published comparisons
* plotting functions draw R(M) curves with dashed R_max asymptotes, r(N_S) and the r(N_B, kappa) map as SVG
"""
import json
import logging
import os
from collections import namedtuple

import matplotlib.pyplot as plt
import numpy as np
import xarray as xr

from qillum.probes import THREEMODE, ProbeKind, SceneParams, create_scene
from qillum.stein import (
    ASYMPTOTIC,
    ExponentQuery,
    crossover_ns,
    error_exponent,
    error_probability,
    exponent_curve,
    ratio_curve,
    ratio_map,
    relative_entropy_pair,
)
from qillum.sweeps import CONVENTION, SweepRecord
from qillum.utils import InvalidArgumentError

logger = logging.getLogger(__name__)

FIGURE_LIB_FILE = os.path.join(os.path.dirname(__file__), "figure_lib.json")
FigureResult = namedtuple("FigureResult", ["fig_id", "records", "data", "annotations", "figure"])

_PROBE_STYLE = {
    "tmsv": {"color": "tab:red", "label": "TMSV"},
    "coherent": {"color": "tab:blue", "label": "coherent"},
    "threemode": {"color": "black", "label": "three-mode"},
}


def m_grid(mmin: int = 1, mmax: float = 1e6, count: int = 60, log: bool = True) -> np.ndarray:
    """
    Sorted unique integer copy numbers between ``mmin`` and ``mmax``.

    :raises InvalidArgumentError: if the range is empty
    """
    if mmin < 1 or mmax < mmin or count < 1:
        raise InvalidArgumentError(
            "empty M range: mmin={}, mmax={}, count={}".format(mmin, mmax, count)
        )
    if log:
        values = np.geomspace(mmin, mmax, int(count))
    else:
        values = np.linspace(mmin, mmax, int(count))
    return np.unique(np.round(values).astype(np.int64))


# ----------------------------------------------------------------------------------------------------------------------
# analysis
def create_analysis(**kwargs):
    """
    User interface function to create a :class:`IlluminationAnalysis` object.

    :keyword:

    * probes (`list`): probe names or :class:`~qillum.probes.ProbeKind` objects. Default ["tmsv", "threemode"]
    * scene (:class:`~qillum.probes.SceneParams`): scene; alternatively give N_S, N_B, kappa, epsilon
    * path (`str`): force "closed" or "generic" for the three-mode probe
    """
    scene = kwargs.pop("scene", None)
    probes = kwargs.pop("probes", ["tmsv", "threemode"])
    path = kwargs.pop("path", None)
    if scene is None:
        scene = create_scene(**kwargs)
    return IlluminationAnalysis(probes=probes, scene=scene, path=path)


class IlluminationAnalysis:
    """
    Class to evaluate the exponent of several probes on a common scene. Relative entropy pairs are computed once per
    probe and reused for every M.
    """

    def __init__(self, probes, scene: SceneParams, path: str = None):
        if isinstance(probes, (str, ProbeKind)):
            probes = [probes]
        self.probes = [p if isinstance(p, ProbeKind) else ProbeKind(p) for p in probes]
        if not self.probes:
            raise InvalidArgumentError("at least one probe is required")
        self.scene = scene
        self.path = path
        self._pairs = {}

    def pair(self, probe: ProbeKind):
        """
        Returns (pair, path, flags) of a probe, computed on first use.
        """
        if probe not in self._pairs:
            flags = list(self.scene.flags)
            pair, used = relative_entropy_pair(probe, self.scene, path=self.path, flags=flags)
            self._pairs[probe] = (pair, used, flags)
        return self._pairs[probe]

    def _record(self, probe, M):
        pair, used, flags = self.pair(probe)
        s = self.scene
        if M > 0:
            R = error_exponent(ExponentQuery(M=int(M), epsilon=s.epsilon, pair=pair))
            P_err = error_probability(R, M)
        else:
            R, P_err = pair.a, (0.0 if pair.a > 0 else 1.0)
        return SweepRecord(
            probe=probe.kind,
            N_S=s.N_S,
            N_B=s.N_B,
            kappa=s.kappa,
            epsilon=s.epsilon,
            M=int(M),
            C=probe.correlation(s.N_S) if probe.kind == THREEMODE else None,
            a=pair.a,
            b=pair.b,
            R=R,
            P_err=P_err,
            path=used,
            flags=list(flags),
        )

    def evaluate(self, M: int = 0):
        """
        One :class:`~qillum.sweeps.SweepRecord` per probe at copy number ``M`` (0 = limit).
        """
        return [self._record(p, M) for p in self.probes]

    def curve_records(self, M_values):
        """
        Records for every (probe, M) pair, probes outermost.
        """
        M_values = np.asarray(M_values)
        if M_values.size == 0:
            raise InvalidArgumentError("M range is empty")
        return [self._record(p, int(M)) for p in self.probes for M in M_values]

    def get_results(self, M_values=None) -> xr.Dataset:
        """
        Function to get R(M) and P_err(M) of all probes. Result format is xarray DataSet with dims ("probe", "M") for
        R and P_err, and ("probe",) for a, b and path.

        :param M_values: copy numbers, default :func:`m_grid`
        """
        M_values = m_grid() if M_values is None else np.asarray(M_values, dtype=np.int64)
        names = [p.kind for p in self.probes]
        R = np.empty((len(self.probes), M_values.size))
        P = np.empty_like(R)
        a, b, paths = [], [], []
        for i, probe in enumerate(self.probes):
            pair, used, _ = self.pair(probe)
            curve = exponent_curve(pair, self.scene.epsilon, M_values)
            R[i], P[i] = curve.R, curve.P_err
            a.append(pair.a)
            b.append(pair.b)
            paths.append(used)
        s = self.scene
        return xr.Dataset(
            {
                "R": xr.DataArray(R, dims=("probe", "M")),
                "P_err": xr.DataArray(P, dims=("probe", "M")),
                "a": xr.DataArray(np.array(a), dims=("probe",)),
                "b": xr.DataArray(np.array(b), dims=("probe",)),
                "path": xr.DataArray(np.array(paths), dims=("probe",)),
            },
            coords={"probe": names, "M": M_values},
            attrs={
                "N_S": s.N_S,
                "N_B": s.N_B,
                "kappa": s.kappa,
                "epsilon": s.epsilon,
                "convention": CONVENTION,
            },
        )


# ----------------------------------------------------------------------------------------------------------------------
# figure presets
def _create_default_dict():
    """
    Create the default figure library: scene parameters and expected R_max values of the reference comparisons.
    """
    return {
        "fig1a": {
            "kind": "curve",
            "caption": "M-dependence of R, TMSV vs coherent state (N_B = 0.01, N_S = 20, kappa = 0.01, epsilon = 0.001)",
            "probes": ["tmsv", "coherent"],
            "scene": {"N_S": 20, "N_B": 0.01, "kappa": 0.01, "epsilon": 0.001},
            "expected": {"tmsv": 0.9395, "coherent": 0.923},
        },
        "fig1b": {
            "kind": "curve",
            "caption": "M-dependence of R, TMSV vs coherent state (N_B = 20, N_S = 0.01, kappa = 0.01, epsilon = 0.01)",
            "probes": ["tmsv", "coherent"],
            "scene": {"N_S": 0.01, "N_B": 20, "kappa": 0.01, "epsilon": 0.01},
            "expected": {"tmsv": 2.24e-05, "coherent": 4.88e-06},
        },
        "fig2a": {
            "kind": "curve",
            "caption": "M-dependence of R, TMSV vs three-mode state (N_B = 0.01, N_S = 10, kappa = 0.01, epsilon = 0.001)",
            "probes": ["tmsv", "threemode"],
            "scene": {"N_S": 10, "N_B": 0.01, "kappa": 0.01, "epsilon": 0.001},
            "expected": {"tmsv": 0.474, "threemode": 0.249},
        },
        "fig2b": {
            "kind": "curve",
            "caption": "M-dependence of R, TMSV vs three-mode state (N_B = 20, N_S = 0.01, kappa = 0.01, epsilon = 0.01)",
            "probes": ["tmsv", "threemode"],
            "scene": {"N_S": 0.01, "N_B": 20, "kappa": 0.01, "epsilon": 0.01},
            "expected": {"tmsv": 2.24e-05, "threemode": 2.57e-05},
        },
        "fig3a": {
            "kind": "ratio_map",
            "caption": "ratio r over N_B and kappa with N_S >> N_B (N_S = 100 N_B); r > 1 everywhere",
            "N_B": {"start": 0.001, "stop": 1.0, "count": 8},
            "kappa": {"start": 0.001, "stop": 0.1, "count": 8},
            "ns_factor": 100,
            "expected": {"r_min_above": 1.0},
        },
        "fig3b": {
            "kind": "ratio_curve",
            "caption": "ratio r over N_S with N_B >> N_S; r crosses 1 at N_S* = 0.46",
            "N_S": {"start": 0.01, "stop": 1.0, "count": 100},
            "expected": {"ns_star": 0.46},
        },
    }


def read_figure_lib(path: str = None) -> dict:
    """
    Read the figure library from json file, falling back to the built-in defaults.
    """
    path = path or FIGURE_LIB_FILE
    try:
        with open(path, "r") as f:
            return json.load(f)
    except (OSError, ValueError):
        logger.warning("Figure library %s unable to be read; using default library", path)
        return _create_default_dict()


def figure_ids(path: str = None):
    return sorted(read_figure_lib(path))


def _axis(spec, log=True):
    if log:
        return np.geomspace(spec["start"], spec["stop"], spec["count"])
    return np.linspace(spec["start"], spec["stop"], spec["count"])


def reproduce_figure(fig_id: str, M_values=None, plot: bool = True, lib: dict = None) -> FigureResult:
    """
    Regenerate the data of a published figure with its caption parameters.

    :param fig_id: one of fig1a, fig1b, fig2a, fig2b, fig3a, fig3b
    :param M_values: copy numbers for the R(M) figures, default :func:`m_grid`
    :param plot: also build the matplotlib figure
    :returns: :class:`FigureResult` with records (curve figures only), the xarray data, an annotations dictionary
              {"expected": ..., "computed": ...} and the figure (or None)
    :raises InvalidArgumentError: for an unknown id
    """
    lib = lib or read_figure_lib()
    if fig_id not in lib:
        raise InvalidArgumentError(
            "Unknown figure {!r}. Hint: one of {}".format(fig_id, ", ".join(sorted(lib)))
        )
    preset = lib[fig_id]
    records, fig = [], None
    if preset["kind"] == "curve":
        analysis = create_analysis(probes=preset["probes"], **preset["scene"])
        M_values = m_grid() if M_values is None else M_values
        data = analysis.get_results(M_values)
        records = analysis.curve_records(M_values)
        computed = {p: float(data["a"].sel(probe=p)) for p in preset["probes"]}
        if plot:
            fig = plot_exponent_curves(data, title=preset["caption"])
    elif preset["kind"] == "ratio_map":
        data = ratio_map(
            _axis(preset["N_B"]), _axis(preset["kappa"]), ns_factor=preset["ns_factor"]
        )
        # NaN points (failed evaluations) are skipped
        computed = {
            "r_min": float(data.min(skipna=True)),
            "r_max": float(data.max(skipna=True)),
            "n_failed": data.attrs["n_failed"],
        }
        if plot:
            fig = plot_ratio_map(data, title=preset["caption"])
    elif preset["kind"] == "ratio_curve":
        ns = _axis(preset["N_S"], log=False)
        data = xr.DataArray(
            ratio_curve(ns, mode=ASYMPTOTIC), dims=("N_S",), coords={"N_S": ns}, name="r"
        )
        computed = {"ns_star": crossover_ns(mode=ASYMPTOTIC)}
        if plot:
            fig = plot_ratio_curve(data, ns_star=computed["ns_star"], title=preset["caption"])
    else:
        raise InvalidArgumentError("figure library entry {} has unknown kind {!r}".format(fig_id, preset["kind"]))
    annotations = {"expected": dict(preset.get("expected", {})), "computed": computed}
    return FigureResult(fig_id=fig_id, records=records, data=data, annotations=annotations, figure=fig)


# ----------------------------------------------------------------------------------------------------------------------
# plotting
def plot_exponent_curves(ds: xr.Dataset, ax=None, title: str = None):
    """
    Plot R(M) of every probe in a :meth:`IlluminationAnalysis.get_results` DataSet, with dashed lines at R_max = a.

    :returns: matplotlib Figure
    """
    if ax is None:
        fig, ax = plt.subplots(figsize=(6, 4))
    else:
        fig = ax.figure
    for probe in ds["probe"].values:
        style = _PROBE_STYLE.get(str(probe), {"color": None, "label": str(probe)})
        ax.plot(ds["M"], ds["R"].sel(probe=probe), color=style["color"], label=style["label"])
        ax.axhline(float(ds["a"].sel(probe=probe)), color=style["color"], linestyle="--", linewidth=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("M")
    ax.set_ylabel("R")
    if title:
        ax.set_title(title, fontsize=8)
    ax.legend()
    return fig


def plot_ratio_curve(da: xr.DataArray, ns_star: float = None, ax=None, title: str = None):
    if ax is None:
        fig, ax = plt.subplots(figsize=(6, 4))
    else:
        fig = ax.figure
    ax.plot(da["N_S"], da, color="black")
    ax.axhline(1.0, color="tab:red", linestyle="--", linewidth=0.8)
    if ns_star is not None:
        ax.axvline(ns_star, color="grey", linestyle=":", linewidth=0.8)
    ax.set_xlabel("N_S")
    ax.set_ylabel("r")
    if title:
        ax.set_title(title, fontsize=8)
    return fig


def plot_ratio_map(da: xr.DataArray, ax=None, title: str = None):
    if ax is None:
        fig, ax = plt.subplots(figsize=(6, 4))
    else:
        fig = ax.figure
    mesh = ax.pcolormesh(da["kappa"], da["N_B"], da.values, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="r")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("kappa")
    ax.set_ylabel("N_B")
    if title:
        ax.set_title(title, fontsize=8)
    return fig


def save_svg(fig, path: str):
    """
    Save a matplotlib figure as SVG and close it.
    """
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info("wrote %s", path)
