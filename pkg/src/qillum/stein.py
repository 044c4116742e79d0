# -*- coding: utf-8 -*-
"""
This module converts relative entropy pairs (a, b) into the finite-copy Stein exponent and error probability of
asymmetric target detection, and holds the probe comparisons built on it: maximal exponents R_max, their leading
asymptotic terms, the TMSV / three-mode advantage ratio r and the crossover signal strength where r = 1.

For M copies and permitted false-alarm probability epsilon the exponent is (the O(ln M / M) term is omitted)::

    R = a + sqrt(b / M) Phi^-1(epsilon),    P_err = exp(-M R)
"""
import logging
from collections import namedtuple
from dataclasses import dataclass
from enum import Enum

import numpy as np
import xarray as xr
from scipy.optimize import bisect
from scipy.special import ndtr, ndtri

from qillum.closed_forms import rel_entropy_threemode
from qillum.probes import (
    COHERENT,
    ProbeKind,
    SceneParams,
    THREEMODE,
    TMSV,
    build_hypothesis_pair,
)
from qillum.symplectic import RelEntropyPair, relative_entropy_gaussian
from qillum.utils import (
    DegenerateRatioError,
    DegenerateSpectrumError,
    InvalidArgumentError,
    NoCrossoverError,
    QillumError,
    error_flag,
    warn_flag,
)

logger = logging.getLogger(__name__)

CLOSED = "closed"
GENERIC = "generic"
EXACT = "exact"
ASYMPTOTIC = "asymptotic"

CROSSOVER_BRACKET = (0.01, 1.5)
CROSSOVER_MIN_NB = 100.0
NEGATIVE_B_TOL = 1e-14

ExponentCurve = namedtuple("ExponentCurve", ["M", "R", "P_err"])
CrossoverResult = namedtuple(
    "CrossoverResult", ["ns_star", "mode", "tol", "bracket", "residual"]
)


class RegimeLimit(Enum):
    """
    Parameter regime of the asymptotic R_max expansions.
    """

    SIGNAL_DOMINANT = "signal"  # N_S >> N_B
    BACKGROUND_DOMINANT = "background"  # N_B >> N_S

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).lower().replace("-", "_")
        for member in cls:
            if text in (member.value, member.name.lower()):
                return member
        raise InvalidArgumentError(
            "Unknown regime {!r}. Hint: 'signal' or 'background'".format(value)
        )


@dataclass(frozen=True)
class ExponentQuery:
    """
    Class for a finite-copy exponent query: number of copies M, type-I tolerance epsilon and the pair (a, b).
    """

    M: int
    epsilon: float
    pair: RelEntropyPair

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidArgumentError("M must be a positive integer, got {}".format(self.M))
        object.__setattr__(self, "M", int(self.M))
        if not 0 < self.epsilon < 1:
            raise InvalidArgumentError(
                "epsilon must lie in (0, 1), got {}".format(self.epsilon)
            )


def _as_probe(probe) -> ProbeKind:
    return probe if isinstance(probe, ProbeKind) else ProbeKind(probe)


# ----------------------------------------------------------------------------------------------------------------------
# normal distribution
def inv_std_normal_cdf(p):
    """
    Inverse standard normal CDF Phi^-1(p).

    :raises InvalidArgumentError: if p is outside (0, 1)
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0) & (p_arr < 1))):
        raise InvalidArgumentError("Phi^-1 requires 0 < p < 1, got {}".format(p))
    out = ndtri(p_arr)
    return out if out.ndim else float(out)


def std_normal_cdf(y):
    """
    Standard normal CDF Phi(y).
    """
    out = ndtr(np.asarray(y, dtype=float))
    return out if out.ndim else float(out)


# ----------------------------------------------------------------------------------------------------------------------
# exponents
def error_exponent(q: ExponentQuery) -> float:
    """
    Finite-copy Stein exponent R = a + sqrt(b / M) Phi^-1(epsilon). Negative values are returned as they are (the
    bound is then vacuous).

    :raises InvalidArgumentError: if b < 0
    """
    if q.pair.b < 0:
        raise InvalidArgumentError("relative entropy variance b must be >= 0, got {}".format(q.pair.b))
    return float(q.pair.a + np.sqrt(q.pair.b / q.M) * inv_std_normal_cdf(q.epsilon))


def error_probability(R, M):
    """
    Type-II error probability exp(-M R), clamped to 1 where R <= 0.
    """
    R = np.asarray(R, dtype=float)
    with np.errstate(over="ignore"):
        out = np.where(R > 0, np.exp(-np.asarray(M, dtype=float) * R), 1.0)
    return out if out.ndim else float(out)


def exponent_curve(pair: RelEntropyPair, epsilon: float, M_values) -> ExponentCurve:
    """
    R(M) and P_err(M) for an array of copy numbers.
    """
    M = np.asarray(M_values)
    if M.size == 0:
        raise InvalidArgumentError("M_values is empty")
    if np.any(M < 1) or np.any(M != np.round(M)):
        raise InvalidArgumentError("M_values must be positive integers")
    if pair.b < 0:
        raise InvalidArgumentError("relative entropy variance b must be >= 0, got {}".format(pair.b))
    M = M.astype(np.int64)
    R = pair.a + np.sqrt(pair.b / M) * inv_std_normal_cdf(epsilon)
    return ExponentCurve(M=M, R=R, P_err=error_probability(R, M))


def relative_entropy_pair(probe, scene: SceneParams, path: str = None, flags: list = None):
    """
    Relative entropy pair of a probe and the computation path used.

    The three-mode probe uses the closed forms of :mod:`qillum.closed_forms` and falls back to the generic Williamson
    engine (flag "closed-form-fallback") when its spectrum is degenerate. Coherent and TMSV probes always use the
    generic engine.

    :param path: force "closed" or "generic"; default picks as above
    :returns: tuple (:class:`~qillum.symplectic.RelEntropyPair`, path)
    """
    probe = _as_probe(probe)
    if path not in (None, CLOSED, GENERIC):
        raise InvalidArgumentError("path must be 'closed' or 'generic', got {!r}".format(path))
    if path == CLOSED and probe.kind != THREEMODE:
        raise InvalidArgumentError("closed forms exist for the three-mode probe only")

    pair, used = None, GENERIC
    if probe.kind == THREEMODE and path != GENERIC:
        try:
            pair, used = rel_entropy_threemode(scene, probe.C, flags=flags), CLOSED
        except DegenerateSpectrumError as err:
            if path == CLOSED:
                raise
            warn_flag("closed-form-fallback", "{}; using the generic engine".format(err), flags)
            logger.info("closed-form fallback for %s", scene)
    if pair is None:
        hyp = build_hypothesis_pair(probe, scene)
        pair = relative_entropy_gaussian(hyp.rho, hyp.sigma)

    # round-off can leave b a hair below zero
    if -NEGATIVE_B_TOL < pair.b < 0:
        pair = RelEntropyPair(a=pair.a, b=0.0)
    logger.debug("%s %s path: a=%.17g b=%.17g", probe.kind, used, pair.a, pair.b)
    return pair, used


def rmax(probe, scene: SceneParams) -> float:
    """
    Maximal exponent R_max = D(rho||sigma) of a probe, the M -> infinity limit of R.
    """
    return relative_entropy_pair(probe, scene)[0].a


def _leading_coefficient(kind: str, scene: SceneParams, regime: RegimeLimit) -> float:
    # leading asymptotic term divided by kappa N_S
    N_S, N_B, kappa = scene.N_S, scene.N_B, scene.kappa
    if kind == TMSV:
        if regime is RegimeLimit.SIGNAL_DOMINANT:
            return float(np.log1p((1.0 - kappa) / N_B) / (1.0 - kappa))
        return float((1.0 + N_S) / N_B * np.log1p(1.0 / N_S))
    if kind == THREEMODE:
        if regime is RegimeLimit.SIGNAL_DOMINANT:
            return float(1.0 / (1.0 - kappa + 2.0 * N_B))
        return float(((1.0 + N_S) * np.log(2.0 / N_S) - N_S) / N_B)
    raise InvalidArgumentError("asymptotic R_max is defined for tmsv and threemode probes only")


def asymptotic_rmax(probe, scene: SceneParams, regime) -> float:
    """
    Leading term of R_max in a parameter regime:

    * TMSV, N_S >> N_B: kappa N_S / (1 - kappa) ln((1 + N_B - kappa) / N_B)
    * TMSV, N_B >> N_S: kappa N_S (1 + N_S) / N_B ln(1 + 1 / N_S)
    * three-mode, N_S >> N_B: kappa N_S / (1 - kappa + 2 N_B)
    * three-mode, N_B >> N_S: kappa N_S / N_B [(1 + N_S) ln(2 / N_S) - N_S]

    The remainders are not small outside the regime; use :func:`rmax` for moderate parameters.
    """
    probe = _as_probe(probe)
    regime = RegimeLimit.parse(regime)
    if probe.kind == COHERENT:
        raise InvalidArgumentError("asymptotic R_max is defined for tmsv and threemode probes only")
    if scene.N_S == 0 or scene.kappa == 0:
        return 0.0
    return scene.kappa * scene.N_S * _leading_coefficient(probe.kind, scene, regime)


def advantage_ratio(scene: SceneParams, mode: str = EXACT, regime=RegimeLimit.BACKGROUND_DOMINANT) -> float:
    """
    Ratio r = R_max(TMSV) / R_max(three-mode, C = C_max). ``mode="asymptotic"`` uses the leading terms of ``regime``;
    kappa N_S cancels, so in the background-dominant regime r depends on N_S only::

        r = (1 + N_S) ln(1 + 1/N_S) / [(1 + N_S) ln(2/N_S) - N_S]

    :raises DegenerateRatioError: if the denominator is <= 0
    """
    if mode == EXACT:
        num = rmax(ProbeKind(TMSV), scene)
        den = rmax(ProbeKind(THREEMODE), scene)
    elif mode == ASYMPTOTIC:
        regime = RegimeLimit.parse(regime)
        if scene.N_S == 0:
            raise InvalidArgumentError("asymptotic ratio requires N_S > 0")
        num = _leading_coefficient(TMSV, scene, regime)
        den = _leading_coefficient(THREEMODE, scene, regime)
    else:
        raise InvalidArgumentError("mode must be 'exact' or 'asymptotic', got {!r}".format(mode))
    if not den > 0:
        raise DegenerateRatioError(
            "three-mode R_max = {:.6g} is not positive at {} ({} mode)".format(den, scene, mode)
        )
    return float(num / den)


def ratio_curve(ns_values, mode: str = ASYMPTOTIC, N_B: float = None, kappa: float = None,
                regime=RegimeLimit.BACKGROUND_DOMINANT) -> np.ndarray:
    """
    r(N_S) over an array of signal strengths. Asymptotic background-dominant mode needs neither N_B nor kappa.
    """
    scenes = [
        _ratio_scene(n, N_B, kappa, mode) for n in np.atleast_1d(np.asarray(ns_values, dtype=float))
    ]
    return np.array([advantage_ratio(s, mode=mode, regime=regime) for s in scenes])


def _ratio_scene(N_S, N_B, kappa, mode):
    if mode == EXACT and (N_B is None or kappa is None):
        raise InvalidArgumentError("exact ratio requires N_B= and kappa=")
    # kappa and N_B cancel from the background-dominant leading terms
    return SceneParams(
        N_S=N_S,
        N_B=1.0 if N_B is None else N_B,
        kappa=1e-3 if kappa is None else kappa,
    )


def ratio_map(nb_values, kappa_values, ns_factor: float = 100.0) -> xr.DataArray:
    """
    Exact ratio r on an (N_B, kappa) grid with N_S = ns_factor * N_B (signal-dominant operating points).

    A point whose evaluation fails (e.g. an unphysical target-present state at very low N_B and large kappa) holds
    NaN, and the reason is kept in the 2-D ``flag`` coordinate ("" on good points). ``attrs["n_failed"]`` counts them.

    :returns: ``xarray.DataArray`` with dims ("N_B", "kappa")
    """
    nb_values = np.asarray(nb_values, dtype=float)
    kappa_values = np.asarray(kappa_values, dtype=float)
    values = np.full((nb_values.size, kappa_values.size), np.nan)
    flags = np.full(values.shape, "", dtype=object)
    for i, nb in enumerate(nb_values):
        for j, kappa in enumerate(kappa_values):
            scene = SceneParams(N_S=ns_factor * nb, N_B=nb, kappa=kappa)
            try:
                values[i, j] = advantage_ratio(scene, mode=EXACT)
            except QillumError as err:
                flags[i, j] = error_flag(err)
                logger.info("ratio map point N_B=%g kappa=%g failed: %s", nb, kappa, err)
    n_failed = int(np.count_nonzero(flags != ""))
    if n_failed:
        logger.warning("ratio map: %d of %d points failed and hold NaN", n_failed, values.size)
    return xr.DataArray(
        values,
        dims=("N_B", "kappa"),
        coords={"N_B": nb_values, "kappa": kappa_values, "flag": (("N_B", "kappa"), flags.astype(str))},
        name="r",
        attrs={
            "ns_factor": ns_factor,
            "n_failed": n_failed,
            "description": "R_max(tmsv) / R_max(threemode)",
        },
    )


# ----------------------------------------------------------------------------------------------------------------------
# crossover
def _asymptotic_gap(N_S):
    # zero exactly where the background-dominant ratio equals 1
    return (1.0 + N_S) * np.log((1.0 + N_S) / 2.0) + N_S


def crossover_ns(mode: str = ASYMPTOTIC, tol: float = 1e-4, N_B: float = None, kappa: float = None,
                 full_output: bool = False):
    """
    Signal strength N_S* where TMSV and the three-mode probe reach equal R_max, found by bisection on [0.01, 1.5].

    The ratio itself has a pole inside the bracket (the three-mode leading term changes sign), so bisection runs on
    sign-equivalent differences: (1 + N_S) ln((1 + N_S)/2) + N_S in asymptotic mode and R_max(TMSV) -
    R_max(three-mode) in exact mode.

    :param mode: "asymptotic" or "exact"
    :param tol: absolute tolerance on N_S*
    :param N_B: background for exact mode, >= 100
    :param kappa: reflectivity for exact mode
    :param full_output: return a :class:`CrossoverResult` instead of a float
    :raises NoCrossoverError: if the bracket shows no sign change
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be > 0, got {}".format(tol))
    lo, hi = CROSSOVER_BRACKET
    if mode == ASYMPTOTIC:
        gap = _asymptotic_gap
    elif mode == EXACT:
        if N_B is None or kappa is None:
            raise InvalidArgumentError("exact crossover requires N_B= and kappa=")
        if N_B < CROSSOVER_MIN_NB:
            raise InvalidArgumentError(
                "exact crossover requires N_B >= {} (N_B >> N_S), got {}".format(CROSSOVER_MIN_NB, N_B)
            )

        def gap(N_S):
            scene = SceneParams(N_S=N_S, N_B=N_B, kappa=kappa)
            return rmax(ProbeKind(TMSV), scene) - rmax(ProbeKind(THREEMODE), scene)

    else:
        raise InvalidArgumentError("mode must be 'exact' or 'asymptotic', got {!r}".format(mode))

    f_lo, f_hi = gap(lo), gap(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoCrossoverError(
            "no sign change of R_max(tmsv) - R_max(threemode) on [{}, {}] ({} mode)".format(lo, hi, mode)
        )
    ns_star = bisect(gap, lo, hi, xtol=tol)
    logger.info("crossover N_S* = %.6f (%s mode, tol %g)", ns_star, mode, tol)
    if not full_output:
        return float(ns_star)
    scene = _ratio_scene(ns_star, N_B, kappa, mode)
    residual = advantage_ratio(scene, mode=mode) - 1.0
    return CrossoverResult(
        ns_star=float(ns_star), mode=mode, tol=tol, bracket=(lo, hi), residual=float(residual)
    )
