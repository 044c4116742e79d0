# -*- coding: utf-8 -*-
"""
This module holds the static helpers used across *qillum*: the exception hierarchy, the numerical tolerances shared by
every module, and small closed-form functions for single-mode thermal states. Most functions herein are not part of the
user API - they are called by the symplectic, probe and closed-form modules. However, users may find some of them (e.g.
:func:`thermal_entropy`) useful for their own workflow.
"""
import logging
import warnings

import numpy as np

logger = logging.getLogger(__name__)

# tolerances - see DESIGN.md for where each one is applied
SYMMETRY_TOL = 1e-12  # absolute, covariance symmetry check
PHYSICAL_TOL = 1e-10  # nu_min >= 1/2 - PHYSICAL_TOL
PURE_TOL = 1e-12  # nu <= 1/2 + PURE_TOL is treated as a pure mode
MIN_NB = 1e-12  # smallest accepted background occupation
KAPPA_SMALL_LIMIT = 0.1  # reflectivity above this raises a "large-kappa" flag
XI_DEGENERATE_TOL = 1e-14  # relative, xi below this is a degenerate sigma spectrum
VACUUM_VARIANCE = 0.5


# ----------------------------------------------------------------------------------------------------------------------
# exceptions
class QillumError(ValueError):
    """
    Base class of all errors raised by *qillum*. Subclasses ``ValueError`` so that callers catching the builtin keep
    working.
    """

    kind = "qillum"


class InvalidArgumentError(QillumError):
    kind = "invalid-argument"


class UnphysicalStateError(QillumError):
    kind = "unphysical-state"


class PureModeError(QillumError):
    kind = "pure-mode"


class DegenerateSpectrumError(QillumError):
    """
    Raised when the closed-form normal-mode decomposition of the target-present state has coincident symplectic
    eigenvalues (xi = 0). The offending parameters are stored in ``params``.
    """

    kind = "degenerate-spectrum"

    def __init__(self, message, **params):
        self.params = params
        detail = ", ".join("{}={!r}".format(k, v) for k, v in params.items())
        super().__init__("{} ({})".format(message, detail) if detail else message)


class DegenerateRatioError(QillumError):
    kind = "degenerate-ratio"


class NoCrossoverError(QillumError):
    kind = "no-crossover"


def error_flag(err: QillumError) -> str:
    """
    Flag string recorded on sweep records for a failed evaluation.
    """
    return "error:{}:{}".format(getattr(err, "kind", "qillum"), str(err).replace(",", ";"))


def warn_flag(flag: str, message: str, flags: list = None):
    """
    Issue a user warning and append ``flag`` to ``flags`` (if given, and not already there).
    """
    warnings.warn(message, stacklevel=3)
    logger.debug("flag %s: %s", flag, message)
    if flags is not None and flag not in flags:
        flags.append(flag)


# ----------------------------------------------------------------------------------------------------------------------
# numeric helpers
def relative_residual(value, reference, scale=None) -> float:
    """
    Frobenius-relative residual ||value - reference|| / ||scale||, with ``scale`` defaulting to ``reference``.
    """
    value = np.asarray(value, dtype=float)
    reference = np.asarray(reference, dtype=float)
    scale = reference if scale is None else np.asarray(scale, dtype=float)
    denom = np.linalg.norm(scale)
    if denom == 0:
        return float(np.linalg.norm(value - reference))
    return float(np.linalg.norm(value - reference) / denom)


def check_nonnegative(name: str, value: float):
    if not np.isfinite(value) or value < 0:
        raise InvalidArgumentError("{} must be a finite value >= 0, got {}".format(name, value))


def log_ratio_coth(nu):
    """
    Returns ln((2 nu + 1)/(2 nu - 1)) = 2 arccoth(2 nu), the Gibbs exponent of a mode with symplectic eigenvalue nu.
    """
    nu = np.asarray(nu, dtype=float)
    # log1p keeps precision when nu is large
    return np.log1p(2.0 / (2.0 * nu - 1.0))


def thermal_entropy(n):
    """
    Von Neumann entropy (nats) of a thermal mode with mean occupation ``n``: (n+1) ln(n+1) - n ln n, evaluated as
    ln(1 + n) + n ln(1 + 1/n) so that large occupations do not cancel. Occupations <= 1e-12 give exactly 0.
    """
    n = np.asarray(n, dtype=float)
    mixed = n > PURE_TOL
    safe = np.where(mixed, n, 1.0)
    out = np.where(mixed, np.log1p(safe) + safe * np.log1p(1.0 / safe), 0.0)
    return out if out.ndim else float(out)


def thermal_entropy_shift(n1, n2):
    """
    Entropy difference g(n2) - g(n1) of two thermal modes, formed from d = n2 - n1 as::

        d ln(1 + 1/n2) + (n1 + 1) ln(1 + d/(n1 + 1)) - n1 ln(1 + d/n1)

    Every term is of order d, so nearly equal occupations keep their relative precision. Both occupations must be
    > 0.
    """
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    d = n2 - n1
    out = d * np.log1p(1.0 / n2) + (n1 + 1.0) * np.log1p(d / (n1 + 1.0)) - n1 * np.log1p(d / n1)
    return out if out.ndim else float(out)
