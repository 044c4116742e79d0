# -*- coding: utf-8 -*-
"""
This module contains the quadrature-space conventions and the generic Gaussian-state machinery of *qillum*: the
symplectic form, physicality checks, the numerical Williamson (normal mode) decomposition, Gibbs matrices and the
generic relative-entropy engine.

Conventions used throughout *qillum*:

* Quadratures are ordered ``[q_1, ..., q_n, p_1, ..., p_n]``.
* The vacuum variance is 1/2 per quadrature, i.e. a thermal mode with occupation N has covariance (N + 1/2) I.
* All entropic quantities are in nats.

The generic engine in :func:`relative_entropy_gaussian` works for any pair of strictly mixed states and serves as the
independent oracle for the analytic pipeline of :mod:`qillum.closed_forms`.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy.linalg import schur

from qillum.utils import (
    InvalidArgumentError,
    PHYSICAL_TOL,
    PURE_TOL,
    PureModeError,
    SYMMETRY_TOL,
    UnphysicalStateError,
    log_ratio_coth,
    thermal_entropy,
    thermal_entropy_shift,
)

logger = logging.getLogger(__name__)

WilliamsonFactors = namedtuple("WilliamsonFactors", ["S", "nu"])
RelEntropyPair = namedtuple("RelEntropyPair", ["a", "b"])


def symplectic_form(n_modes: int) -> np.ndarray:
    """
    Returns the 2n x 2n symplectic form Omega = [[0, I_n], [-I_n, 0]] of the qq..pp ordering.

    :param n_modes: Number of modes
    :type n_modes: int
    :raises InvalidArgumentError: if ``n_modes`` < 1
    """
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidArgumentError("n_modes must be a positive integer, got {}".format(n_modes))
    n = int(n_modes)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def as_covariance(V) -> np.ndarray:
    """
    Validate and return a covariance matrix as a symmetric float array. Physicality is not checked here.

    :raises InvalidArgumentError: if V is not a real square matrix of even size, or not symmetric to 1e-12
    """
    V = np.array(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2 or V.shape[0] == 0:
        raise InvalidArgumentError(
            "Covariance matrix must be a real 2n x 2n array, got shape {}".format(V.shape)
        )
    if not np.all(np.isfinite(V)):
        raise InvalidArgumentError("Covariance matrix has non-finite entries")
    asym = np.max(np.abs(V - V.T))
    if asym > SYMMETRY_TOL:
        raise InvalidArgumentError(
            "Covariance matrix is not symmetric (max asymmetry {:.3e})".format(asym)
        )
    return 0.5 * (V + V.T)


def thermal_covariance(occupation: float, n_modes: int = 1) -> np.ndarray:
    """
    Covariance matrix of ``n_modes`` independent thermal modes with mean occupation ``occupation``.
    """
    return (occupation + 0.5) * np.eye(2 * n_modes)


class GaussianState:
    """
    Class for a Gaussian state - mean vector and covariance matrix under the qq..pp quadrature ordering.
    """

    def __init__(self, cov, mean=None):
        """
        :param cov: 2n x 2n covariance matrix (vacuum = 1/2 per quadrature)
        :type cov: array-like
        :param mean: Mean vector of length 2n. Default zero mean.
        :type mean: array-like
        """
        self.cov = as_covariance(cov)
        self.n_modes = self.cov.shape[0] // 2
        if mean is None:
            self.mean = np.zeros(2 * self.n_modes)
        else:
            self.mean = np.array(mean, dtype=float).reshape(-1)
        if self.mean.shape != (2 * self.n_modes,):
            raise InvalidArgumentError(
                "Mean vector length {} does not match 2 x n_modes = {}".format(
                    self.mean.size, 2 * self.n_modes
                )
            )

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return np.array_equal(self.cov, other.cov) and np.array_equal(
            self.mean, other.mean
        )

    def __repr__(self):
        return "GaussianState(n_modes={}, mean={}, cov=\n{})".format(
            self.n_modes, self.mean, self.cov
        )


# ----------------------------------------------------------------------------------------------------------------------
# spectra and decompositions
def _sqrt_pair(V):
    # V^(1/2) and V^(-1/2) of a symmetric positive definite matrix
    w, U = np.linalg.eigh(V)
    if w.min() <= 0:
        raise UnphysicalStateError(
            "Covariance matrix is not positive definite (min eigenvalue {:.3e})".format(
                w.min()
            )
        )
    root = np.sqrt(w)
    return (U * root) @ U.T, (U / root) @ U.T


def symplectic_eigenvalues(V) -> np.ndarray:
    """
    Symplectic eigenvalues of a positive definite V in ascending order, without any physicality test. Used by the
    partial-transpose diagnostic where values below 1/2 are expected.
    """
    V = as_covariance(V)
    n = V.shape[0] // 2
    sqrt_v, _ = _sqrt_pair(V)
    # Hermitian with eigenvalues +/- nu_j
    herm = 1j * (sqrt_v @ symplectic_form(n) @ sqrt_v)
    eigs = np.linalg.eigvalsh(herm)
    return np.sort(np.abs(eigs[n:]))


def is_physical(V) -> bool:
    """
    True if V is symmetric, positive definite and every symplectic eigenvalue is >= 1/2 - 1e-10.
    """
    try:
        nu = symplectic_eigenvalues(V)
    except (InvalidArgumentError, UnphysicalStateError):
        return False
    return bool(nu.min() >= 0.5 - PHYSICAL_TOL)


def _decompose(V):
    """
    Williamson decomposition of a symmetric positive definite matrix, no physicality test. Returns (S, nu) with
    V = S (D + D) S^T, S symplectic, nu sorted descending with ties broken by |S[0, j]| (descending).
    """
    n = V.shape[0] // 2
    omega = symplectic_form(n)
    sqrt_v, inv_sqrt_v = _sqrt_pair(V)
    psi = inv_sqrt_v @ omega @ inv_sqrt_v
    psi = 0.5 * (psi - psi.T)
    T, K = schur(psi, output="real")

    q_cols = np.empty((2 * n, n))
    p_cols = np.empty((2 * n, n))
    lam = np.empty(n)
    for i in range(n):
        # 2x2 blocks [[0, l], [-l, 0]]; swap the pair when l < 0
        block = 0.5 * (T[2 * i, 2 * i + 1] - T[2 * i + 1, 2 * i])
        if block > 0:
            q_cols[:, i], p_cols[:, i] = K[:, 2 * i], K[:, 2 * i + 1]
        else:
            q_cols[:, i], p_cols[:, i] = K[:, 2 * i + 1], K[:, 2 * i]
        lam[i] = abs(block)
    nu = 1.0 / lam
    S = sqrt_v @ np.hstack([q_cols, p_cols]) @ np.diag(np.sqrt(np.concatenate([lam, lam])))

    # deterministic ordering: descending nu, ties by first-basis-vector overlap
    nu_key = np.round(nu / nu.max(), 9)
    order = np.lexsort((-np.abs(S[0, :n]), -nu_key))
    S = S[:, np.concatenate([order, order + n])]
    return S, nu[order]


def williamson(V) -> WilliamsonFactors:
    """
    Numerical Williamson decomposition V = S (diag(nu) + diag(nu)) S^T of a covariance matrix.

    The method is the real Schur form of V^(-1/2) Omega V^(-1/2). Symplectic eigenvalues are returned in descending
    order, ties broken by the magnitude of the first row of S.

    :param V: Covariance matrix
    :type V: array-like
    :returns: :class:`WilliamsonFactors` namedtuple ``(S, nu)``
    :raises InvalidArgumentError: if V is not symmetric
    :raises UnphysicalStateError: if the smallest symplectic eigenvalue is below 1/2 - 1e-10
    """
    V = as_covariance(V)
    S, nu = _decompose(V)
    if nu.min() < 0.5 - PHYSICAL_TOL:
        raise UnphysicalStateError(
            "Covariance matrix violates the uncertainty principle (nu_min = {:.12g})".format(
                nu.min()
            )
        )
    return WilliamsonFactors(S=S, nu=nu)


def _check_mixed(nu, label="state"):
    if nu.min() <= 0.5 + PURE_TOL:
        raise PureModeError(
            "{} has a pure mode (nu = {:.15g}); arccoth(2 nu) diverges".format(
                label, nu.min()
            )
        )


def _gibbs_from_factors(factors: WilliamsonFactors) -> np.ndarray:
    n = factors.nu.size
    omega = symplectic_form(n)
    x = 0.5 * log_ratio_coth(factors.nu)  # arccoth(2 nu)
    X = np.diag(np.concatenate([x, x]))
    G = -2.0 * omega @ factors.S @ X @ factors.S.T @ omega
    return 0.5 * (G + G.T)


def gibbs_matrix(V) -> np.ndarray:
    """
    Gibbs matrix G = -2 Omega S [arccoth(2 D)]^(+2) S^T Omega of a strictly mixed covariance matrix, such that the
    state is proportional to exp(-x^T G x / 2).

    :raises PureModeError: if any symplectic eigenvalue is <= 1/2 + 1e-12
    """
    factors = williamson(V)
    _check_mixed(factors.nu)
    return _gibbs_from_factors(factors)


def covariance_from_gibbs(G) -> np.ndarray:
    """
    Inverse of :func:`gibbs_matrix`: recovers V from a positive definite Gibbs matrix G.
    """
    G = as_covariance(G)
    n = G.shape[0] // 2
    omega = symplectic_form(n)
    # G = T diag(g, g) T^T with T = S^-T symplectic and g = 2 arccoth(2 nu)
    T, g = _decompose(G)
    nu = 0.5 / np.tanh(0.5 * g)
    T_inv = -omega @ T.T @ omega
    V = T_inv.T @ np.diag(np.concatenate([nu, nu])) @ T_inv
    return 0.5 * (V + V.T)


def log_Z(V) -> float:
    """
    Returns ln det(V + (i/2) Omega) computed as sum_j ln(nu_j^2 - 1/4).

    :raises PureModeError: if a mode is pure (the determinant vanishes)
    """
    nu = williamson(V).nu
    _check_mixed(nu)
    return float(np.sum(np.log(nu - 0.5) + np.log(nu + 0.5)))


def von_neumann_entropy(V) -> float:
    """
    Von Neumann entropy (nats) of a Gaussian state with covariance V. Modes with nu <= 1/2 + 1e-12 are pure and
    contribute exactly 0.
    """
    nu = williamson(V).nu
    mixed = nu[nu > 0.5 + PURE_TOL]
    return float(np.sum(thermal_entropy(mixed - 0.5)))


def partial_transpose(V, modes) -> np.ndarray:
    """
    Partial transpose of a covariance matrix: sign flip of the momenta of ``modes`` (0-based mode indices).
    """
    V = as_covariance(V)
    n = V.shape[0] // 2
    flip = np.ones(2 * n)
    for m in np.atleast_1d(modes):
        if not 0 <= m < n:
            raise InvalidArgumentError("mode index {} out of range for {} modes".format(m, n))
        flip[n + m] = -1.0
    return flip[:, None] * V * flip[None, :]


# ----------------------------------------------------------------------------------------------------------------------
# relative entropy
def thermal_relative_entropy(n1: float, n2: float) -> RelEntropyPair:
    """
    Closed-form relative entropy and its variance between single-mode thermal states with occupations n1 (rho) and
    n2 (sigma), both > 0.
    """
    if not (n1 > 0 and n2 > 0):
        raise InvalidArgumentError(
            "thermal occupations must be > 0, got {} and {}".format(n1, n2)
        )
    d = n2 - n1
    l1 = np.log1p(d / n1)  # ln(n2/n1)
    l2 = np.log1p(d / (n1 + 1.0))  # ln((n2+1)/(n1+1))
    a = -n1 * l1 + (n1 + 1.0) * l2
    b = n1 * (n1 + 1.0) * (l2 - l1) ** 2
    return RelEntropyPair(a=float(a), b=float(b))


def relative_entropy_gaussian(rho: GaussianState, sigma: GaussianState) -> RelEntropyPair:
    """
    Generic Gaussian relative entropy a = D(rho||sigma) and its variance b = V(rho||sigma).

    With Gamma = G_rho - G_sigma and gamma = mu_rho - mu_sigma::

        a = 1/2 [ ln(Z_sigma / Z_rho) - Tr(Gamma V_rho) + gamma^T G_sigma gamma ]
        b = 1/2 Tr[(Gamma V_rho)^2] + 1/8 Tr[(Gamma Omega)^2] + gamma^T G_sigma V_rho G_sigma gamma

    ``a`` is evaluated in the equivalent form S(sigma) - S(rho) + 1/2 Tr[G_sigma (V_rho - V_sigma)] +
    1/2 gamma^T G_sigma gamma, which avoids differencing the ill-conditioned ln Z terms near pure modes. The trace is
    taken against V_rho - V_sigma directly and S(sigma) - S(rho) is summed mode by mode with
    :func:`~qillum.utils.thermal_entropy_shift`, whose terms are of the order of the occupation change, so no
    entropy of order ln N_B is ever subtracted.

    :raises InvalidArgumentError: if the mode counts differ
    :raises PureModeError: if either state has a pure mode
    """
    if rho.n_modes != sigma.n_modes:
        raise InvalidArgumentError(
            "mode count mismatch: rho has {}, sigma has {}".format(rho.n_modes, sigma.n_modes)
        )
    if rho == sigma:
        return RelEntropyPair(a=0.0, b=0.0)

    f_rho = williamson(rho.cov)
    f_sigma = williamson(sigma.cov)
    _check_mixed(f_rho.nu, "rho")
    _check_mixed(f_sigma.nu, "sigma")
    G_rho = _gibbs_from_factors(f_rho)
    G_sigma = _gibbs_from_factors(f_sigma)

    gamma = rho.mean - sigma.mean
    # modes paired in descending order
    entropy_shift = np.sum(thermal_entropy_shift(f_rho.nu - 0.5, f_sigma.nu - 0.5))
    a = (
        entropy_shift
        + 0.5 * np.sum(G_sigma * (rho.cov - sigma.cov))
        + 0.5 * gamma @ G_sigma @ gamma
    )

    omega = symplectic_form(rho.n_modes)
    Gamma = G_rho - G_sigma
    gv = Gamma @ rho.cov
    go = Gamma @ omega
    b = (
        0.5 * np.trace(gv @ gv)
        + np.trace(go @ go) / 8.0
        + gamma @ G_sigma @ rho.cov @ G_sigma @ gamma
    )
    logger.debug("generic relative entropy: a=%.17g b=%.17g", a, b)
    return RelEntropyPair(a=float(a), b=float(b))
