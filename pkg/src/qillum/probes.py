# -*- coding: utf-8 -*-
"""
This module manages the user interface functions and class definitions for the illumination scenario and the probe
states. In our terminology, a *scene* holds the physical parameters (N_S, N_B, kappa, epsilon), a *probe* is the
transmitted state family (coherent, two-mode squeezed vacuum or the three-mode maximally entangled state), and a
*hypothesis pair* is the (rho, sigma) pair of return-plus-idler states for target absence and target presence.

Mode order of the built states is (return, idler_1, idler_2) for the three-mode probe and (return, idler) for TMSV.
"""
import logging
from collections import namedtuple
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import block_diag

from qillum.symplectic import (
    GaussianState,
    is_physical,
    partial_transpose,
    symplectic_eigenvalues,
)
from qillum.utils import (
    InvalidArgumentError,
    KAPPA_SMALL_LIMIT,
    MIN_NB,
    UnphysicalStateError,
    warn_flag,
)

logger = logging.getLogger(__name__)

HypothesisPair = namedtuple("HypothesisPair", ["rho", "sigma"])

COHERENT = "coherent"
TMSV = "tmsv"
THREEMODE = "threemode"
PROBE_KINDS = (COHERENT, TMSV, THREEMODE)

SEPARABLE = "separable"
ENTANGLED = "entangled"

C_RANGE_TOL = 1e-12


def create_scene(**kwargs):
    """
    User interface function to create a :class:`SceneParams` object.

    :keyword:

    * N_S (`float`): Mean signal photons per mode, >= 0
    * N_B (`float`): Mean background photons, > 0 (minimum 1e-12)
    * kappa (`float`): Target reflectivity in [0, 1). Values above 0.1 are accepted with a "large-kappa" flag
    * epsilon (`float`): Permitted type-I error in (0, 1). Default 0.01

    :returns: :class:`SceneParams`
    """
    scene = SceneParams(
        N_S=kwargs.get("N_S", kwargs.get("ns")),
        N_B=kwargs.get("N_B", kwargs.get("nb")),
        kappa=kwargs.get("kappa", 0.01),
        epsilon=kwargs.get("epsilon", kwargs.get("eps", 0.01)),
    )
    if scene.flags:
        warn_flag(
            "large-kappa",
            "kappa = {} is outside the kappa << 1 regime the models assume".format(scene.kappa),
        )
    return scene


@dataclass(frozen=True)
class SceneParams:
    """
    Class to store the physical scenario shared by every computation.
    """

    N_S: float
    N_B: float
    kappa: float
    epsilon: float = 0.01

    def __post_init__(self):
        for name in ("N_S", "N_B", "kappa", "epsilon"):
            value = getattr(self, name)
            if value is None:
                raise InvalidArgumentError("Missing scene parameter {}=".format(name))
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidArgumentError(
                    "Scene parameter {}= must be numeric, got {!r}".format(name, value)
                )
            if not np.isfinite(value):
                raise InvalidArgumentError("Scene parameter {}= must be finite".format(name))
            object.__setattr__(self, name, value)
        if self.N_S < 0:
            raise InvalidArgumentError("N_S must be >= 0, got {}".format(self.N_S))
        if self.N_B < MIN_NB:
            raise InvalidArgumentError(
                "N_B must be >= {} (N_B = 0 makes the return mode pure), got {}".format(
                    MIN_NB, self.N_B
                )
            )
        if not 0 <= self.kappa < 1:
            raise InvalidArgumentError("kappa must lie in [0, 1), got {}".format(self.kappa))
        if not 0 < self.epsilon < 1:
            raise InvalidArgumentError(
                "epsilon must lie in (0, 1), got {}".format(self.epsilon)
            )

    @property
    def flags(self) -> list:
        return ["large-kappa"] if self.kappa > KAPPA_SMALL_LIMIT else []

    # quadrature variances of the models
    @property
    def S(self) -> float:
        return self.N_S + 0.5

    @property
    def B(self) -> float:
        return self.N_B + 0.5

    @property
    def A(self) -> float:
        return self.kappa * self.N_S + self.B

    def replace(self, **changes):
        values = dict(N_S=self.N_S, N_B=self.N_B, kappa=self.kappa, epsilon=self.epsilon)
        values.update(changes)
        return SceneParams(**values)


def create_probe(kind: str, C: Optional[float] = None):
    """
    User interface function to create a :class:`ProbeKind` object.

    :param kind: One of "coherent", "tmsv" or "threemode"
    :type kind: str
    :param C: Idler correlation of the three-mode probe. Default None, meaning C = C_max(N_S)
    :type C: float
    """
    return ProbeKind(kind=kind, C=C)


@dataclass(frozen=True)
class ProbeKind:
    """
    Class for the probe family. ``C`` only applies to the three-mode probe.
    """

    kind: str
    C: Optional[float] = None

    def __post_init__(self):
        kind = str(self.kind).lower().replace("-", "").replace("_", "")
        if kind not in PROBE_KINDS:
            raise InvalidArgumentError(
                "Unknown probe {!r}. Hint: one of {}".format(self.kind, ", ".join(PROBE_KINDS))
            )
        object.__setattr__(self, "kind", kind)
        if self.C is not None:
            if kind != THREEMODE:
                raise InvalidArgumentError("C= is only meaningful for the three-mode probe")
            if not np.isfinite(self.C) or self.C < 0:
                raise InvalidArgumentError("C must be >= 0, got {}".format(self.C))
            object.__setattr__(self, "C", float(self.C))

    def correlation(self, N_S: float) -> float:
        """
        Returns the idler correlation used for signal strength ``N_S``, checked against C_max.
        """
        if self.kind != THREEMODE:
            raise InvalidArgumentError("correlation C only applies to the three-mode probe")
        cmax = c_max(N_S)
        if self.C is None:
            return cmax
        check_correlation(N_S, self.C, cmax)
        return self.C


def check_correlation(N_S: float, C: float, cmax: float = None):
    if cmax is None:
        cmax = c_max(N_S)
    if not 0 <= C <= cmax + C_RANGE_TOL:
        raise InvalidArgumentError(
            "C = {} outside [0, C_max = {}] for N_S = {}".format(C, cmax, N_S)
        )


# ----------------------------------------------------------------------------------------------------------------------
# correlation bounds
def _cubic_terms(x, S):
    return np.array([4 * x**3, -9 * S**2 * x**2, 6 * S**4 * x, -(S**6 - 1.0 / 64)])


def c_max_cubic_residual(N_S: float, x: float) -> float:
    """
    Relative residual of 4x^3 - 9S^2x^2 + 6S^4x - (S^6 - 1/64) at x, scaled by the sum of term magnitudes.
    """
    terms = _cubic_terms(x, N_S + 0.5)
    scale = np.sum(np.abs(terms))
    return float(abs(np.sum(terms)) / scale) if scale else 0.0


def c_max(N_S: float) -> float:
    """
    Maximal idler correlation C_max of the three-mode probe::

        C_max^2 = 1/4 [3 S^2 - 4 S^4 eta^(-2/3) - eta^(2/3) / 4],   eta = 2 [sqrt(1 + 16 S^6) - 1]

    C_max^2 is the root of 4x^3 - 9S^2x^2 + 6S^4x - (S^6 - 1/64) = 0, i.e. the correlation at which det Lambda = 1/64.
    Lambda then has symplectic eigenvalues sqrt(S^2 - 4C^2) < 1/2 and sqrt(S^2 - C^2) (twice), with product 1/8, so it
    is not a physical state; see :func:`c_phys`. One Newton step on the cubic polishes the radical.

    :raises InvalidArgumentError: if N_S < 0
    """
    if not np.isfinite(N_S) or N_S < 0:
        raise InvalidArgumentError("N_S must be >= 0, got {}".format(N_S))
    if N_S == 0:
        return 0.0
    S = N_S + 0.5
    eta = 2.0 * (np.sqrt(1.0 + 16.0 * S**6) - 1.0)
    eta23 = eta ** (2.0 / 3.0)
    x = 0.25 * (3.0 * S**2 - 4.0 * S**4 / eta23 - 0.25 * eta23)
    slope = 12 * x**2 - 18 * S**2 * x + 6 * S**4
    if slope != 0:
        x -= np.sum(_cubic_terms(x, S)) / slope
    return float(np.sqrt(max(x, 0.0)))


def c_crit(N_S: float) -> float:
    """
    Separability boundary C_c of the three-mode probe::

        C_c^2 = 1/8 [(2 + 5 N_S + 5 N_S^2) - sqrt((1 + 3 N_S)(2 + 3 N_S)(2 + N_S + N_S^2))]
    """
    if not np.isfinite(N_S) or N_S < 0:
        raise InvalidArgumentError("N_S must be >= 0, got {}".format(N_S))
    n = N_S
    x = 0.125 * (
        (2 + 5 * n + 5 * n**2) - np.sqrt((1 + 3 * n) * (2 + 3 * n) * (2 + n + n**2))
    )
    return float(np.sqrt(max(x, 0.0)))


def c_phys(N_S: float) -> float:
    """
    Largest correlation for which Lambda is a physical covariance matrix, C_phys = sqrt(N_S (N_S + 1)) / 2. Lambda has
    symplectic eigenvalues sqrt(S^2 - 4C^2) and sqrt(S^2 - C^2) (twice); the first reaches 1/2 at C_phys. For
    N_S > 0 the ordering is C_c < C_phys < C_max.
    """
    if not np.isfinite(N_S) or N_S < 0:
        raise InvalidArgumentError("N_S must be >= 0, got {}".format(N_S))
    return float(0.5 * np.sqrt(N_S * (N_S + 1.0)))


# ----------------------------------------------------------------------------------------------------------------------
# states
def _threemode_blocks(d0, s, c, k):
    # (return, idler, idler) q and p blocks
    q = np.array([[d0, k, k], [k, s, c], [k, c, s]])
    p = np.array([[d0, -k, -k], [-k, s, -c], [-k, -c, s]])
    return block_diag(q, p)


def probe_covariance(probe: ProbeKind, N_S: float) -> GaussianState:
    """
    Transmitted (pre-channel) probe state: Lambda for the three-mode probe, the TMSV state, or a coherent state of
    amplitude sqrt(N_S).
    """
    S = N_S + 0.5
    if probe.kind == THREEMODE:
        C = probe.correlation(N_S)
        q = np.array([[S, C, C], [C, S, C], [C, C, S]])
        p = np.array([[S, -C, -C], [-C, S, -C], [-C, -C, S]])
        return GaussianState(block_diag(q, p))
    if probe.kind == TMSV:
        cq = np.sqrt(N_S * (N_S + 1.0))
        return GaussianState(block_diag([[S, cq], [cq, S]], [[S, -cq], [-cq, S]]))
    return GaussianState(0.5 * np.eye(2), mean=[np.sqrt(2.0 * N_S), 0.0])


def build_hypothesis_pair(probe: ProbeKind, scene: SceneParams) -> HypothesisPair:
    """
    Builds the target-absent (rho) and target-present (sigma) states of a probe.

    * Three-mode: rho = diag(B) + idler block [[S, +-C], [+-C, S]]; sigma couples the return mode to both idlers with
      +-sqrt(kappa) C and has return variance A = kappa N_S + B.
    * TMSV: rho = diag(B, S) + diag(B, S); sigma has return-idler coupling +-sqrt(kappa) sqrt(N_S (N_S + 1)).
    * Coherent: single mode; rho is thermal B I_2 at zero mean, sigma is thermal B I_2 displaced to
      (sqrt(2 kappa N_S), 0).

    :raises InvalidArgumentError: if the three-mode C lies outside [0, C_max]
    :raises UnphysicalStateError: if rho or sigma violates the uncertainty principle (three-mode probe at low N_B and
        large kappa)
    """
    B, S, A = scene.B, scene.S, scene.A
    rk = np.sqrt(scene.kappa)
    if probe.kind == THREEMODE:
        C = probe.correlation(scene.N_S)
        rho = GaussianState(_threemode_blocks(B, S, C, 0.0))
        sigma = GaussianState(_threemode_blocks(A, S, C, rk * C))
    elif probe.kind == TMSV:
        cq = rk * np.sqrt(scene.N_S * (scene.N_S + 1.0))
        rho = GaussianState(np.diag([B, S, B, S]))
        sigma = GaussianState(block_diag([[A, cq], [cq, S]], [[A, -cq], [-cq, S]]))
    else:
        rho = GaussianState(B * np.eye(2))
        sigma = GaussianState(
            B * np.eye(2), mean=[np.sqrt(2.0 * scene.kappa * scene.N_S), 0.0]
        )
    for label, state in (("rho", rho), ("sigma", sigma)):
        if not is_physical(state.cov):
            raise UnphysicalStateError(
                "{} {} covariance violates the uncertainty principle (nu_min = {:.12g}) at {}".format(
                    probe.kind, label, symplectic_eigenvalues(state.cov).min(), scene
                )
            )
    logger.debug("built %s hypothesis pair for %s", probe.kind, scene)
    return HypothesisPair(rho=rho, sigma=sigma)


# ----------------------------------------------------------------------------------------------------------------------
# entanglement
def ppt_min_eigenvalue(N_S: float, C: float) -> float:
    """
    Minimum symplectic eigenvalue of the partial transpose of Lambda over the signal | (idler_1, idler_2) split. A
    value below 1/2 certifies entanglement across that split only while Lambda itself is physical (C <= C_phys).
    """
    state = probe_covariance(ProbeKind(THREEMODE, C=C), N_S)
    return float(symplectic_eigenvalues(partial_transpose(state.cov, [0])).min())


def classify_entanglement(N_S: float, C: float, flags: list = None) -> str:
    """
    Classifies the three-mode probe as "separable" (C <= C_c) or "entangled" (C_c < C <= C_max) from the analytic
    boundary. :func:`ppt_min_eigenvalue` gives the numeric partial-transpose cross-check.

    For C > C_phys(N_S), C_max included, Lambda is not a physical covariance matrix and a partial-transpose reading
    on it certifies nothing; the label is still returned, with the "unphysical-probe" flag.

    :param flags: optional list collecting warning flags
    :raises InvalidArgumentError: if C > C_max(N_S)
    """
    check_correlation(N_S, C)
    if C > c_phys(N_S):
        warn_flag(
            "unphysical-probe",
            "C = {} exceeds C_phys = {} at N_S = {}: Lambda violates the uncertainty principle and the "
            "partial-transpose test certifies nothing".format(C, c_phys(N_S), N_S),
            flags,
        )
    return SEPARABLE if C <= c_crit(N_S) else ENTANGLED
