# -*- coding: utf-8 -*-
"""
Analytic normal-mode pipeline of the three-mode probe. The functions here produce the symplectic factors of the
target-absent state (:func:`rho_factors`) and target-present state (:func:`sigma_factors`), the Gibbs-matrix
parameters, the three traces of Gamma = G_rho - G_sigma (:func:`gamma_traces`), and the closed-form relative entropy
pair (:func:`rel_entropy_threemode`).

Variances follow the convention of :mod:`qillum.symplectic`: S = N_S + 1/2, B = N_B + 1/2, A = kappa N_S + B.

Differences such as 4 B^2 - 1 or beta^2 - 1/4 are formed from the occupations directly (e.g. 4 N_B (N_B + 1)) so that
nearly pure modes keep full relative precision.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy.linalg import block_diag

from qillum.probes import SceneParams, check_correlation, c_max
from qillum.symplectic import RelEntropyPair
from qillum.utils import (
    DegenerateSpectrumError,
    PHYSICAL_TOL,
    PURE_TOL,
    PureModeError,
    UnphysicalStateError,
    XI_DEGENERATE_TOL,
    warn_flag,
)

logger = logging.getLogger(__name__)

RhoFactors = namedtuple(
    "RhoFactors", ["z", "S_rho", "D_rho", "Z_rho", "rho1", "rho2", "rho3"]
)
SigmaFactors = namedtuple(
    "SigmaFactors",
    [
        "z",
        "xi",
        "mu1p",
        "mu1m",
        "mu2p",
        "mu2m",
        "beta1",
        "beta2",
        "beta3",
        "xp",
        "xm",
        "yp",
        "ym",
        "up",
        "um",
        "vp",
        "vm",
        "S_sigma",
        "D_sigma",
        "Z_sigma",
        "sigma1",
        "sigma2",
        "sigma3",
        "sigma4",
        "sigma5",
        "sigma6",
        "sigma7",
        "sigma8",
        "gamma1",
        "gamma2",
        "gamma3",
        # inputs kept for the identity residuals
        "A",
        "S",
        "C",
        "kappa",
    ],
)
GammaTraces = namedtuple("GammaTraces", ["t1", "t2", "t3"])

DISCRIMINANT_CLAMP_TOL = 1e-12
SQRT2 = np.sqrt(2.0)


def _resolve_C(scene: SceneParams, C):
    if C is None:
        return c_max(scene.N_S)
    check_correlation(scene.N_S, C)
    return float(C)


def _gamma(beta, beta_sq_minus_quarter, label):
    # ln((2 beta + 1)/(2 beta - 1)) written as log1p((beta + 1/2)/(beta^2 - 1/4))
    if beta_sq_minus_quarter < -PHYSICAL_TOL:
        raise UnphysicalStateError(
            "{} = {:.15g} is below the vacuum value 1/2".format(label, beta)
        )
    if beta_sq_minus_quarter <= PURE_TOL:
        raise PureModeError("{} = {:.15g} is a pure mode".format(label, beta))
    return float(np.log1p((beta + 0.5) / beta_sq_minus_quarter))


def _idler_sum_quarter(scene, C):
    # S^2 - C^2 - 1/4 = N_S (N_S + 1) - C^2
    return scene.N_S * (scene.N_S + 1.0) - C**2


# ----------------------------------------------------------------------------------------------------------------------
# target absent
def rho_factors(scene: SceneParams, C: float = None) -> RhoFactors:
    """
    Symplectic factors of V_rho. The idler pair is diagonalised by the symmetric/antisymmetric combinations scaled by
    z = ((S - C)/(S + C))^(1/4); D_rho = (B, sqrt(S^2 - C^2), sqrt(S^2 - C^2)).

    :param scene: Scene parameters
    :type scene: :class:`~qillum.probes.SceneParams`
    :param C: Idler correlation, default C_max(N_S)
    :returns: :class:`RhoFactors`
    :raises PureModeError: if N_S = 0 (the idlers are vacuum)
    """
    C = _resolve_C(scene, C)
    S, B = scene.S, scene.B
    z = ((S - C) / (S + C)) ** 0.25
    beta1 = np.sqrt((S - C) * (S + C))
    quarter = _idler_sum_quarter(scene, C)

    q = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0 / (SQRT2 * z), -z / SQRT2],
            [0.0, 1.0 / (SQRT2 * z), z / SQRT2],
        ]
    )
    p = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, z / SQRT2, -1.0 / (SQRT2 * z)],
            [0.0, z / SQRT2, 1.0 / (SQRT2 * z)],
        ]
    )
    rho1 = float(np.log1p(1.0 / scene.N_B))
    g1 = _gamma(beta1, quarter, "beta_1")
    Z_rho = 4.0 * scene.N_B * (scene.N_B + 1.0) * (4.0 * quarter) ** 2 / 64.0
    return RhoFactors(
        z=float(z),
        S_rho=block_diag(q, p),
        D_rho=np.array([B, beta1, beta1]),
        Z_rho=float(Z_rho),
        rho1=rho1,
        rho2=float(S / beta1 * g1),
        rho3=float(C / beta1 * g1),
    )


def gibbs_rho(factors: RhoFactors) -> np.ndarray:
    """
    Assemble the 6 x 6 Gibbs matrix G_rho from rho_1..rho_3.
    """
    r1, r2, r3 = factors.rho1, factors.rho2, factors.rho3
    q = np.array([[r1, 0.0, 0.0], [0.0, r2, -r3], [0.0, -r3, r2]])
    p = np.array([[r1, 0.0, 0.0], [0.0, r2, r3], [0.0, r3, r2]])
    return block_diag(q, p)


# ----------------------------------------------------------------------------------------------------------------------
# target present
def _discriminant(A, S, C, kappa, flags):
    m = A**2 - S**2 + C**2
    p = 8.0 * kappa * C**2 * (A - S + C) * (A - S - C)
    disc = m**2 - p
    if disc < 0:
        scale = max(m**2, abs(p))
        if disc < -DISCRIMINANT_CLAMP_TOL * scale:
            raise UnphysicalStateError(
                "negative discriminant {:.6e} for the target-present spectrum".format(disc)
            )
        warn_flag(
            "discriminant-clamped",
            "discriminant {:.3e} clamped to zero (round-off)".format(disc),
            flags,
        )
        disc = 0.0
    return m, p, np.sqrt(disc)


def _mode_pair(b, c, mu_a, mu_b):
    # two eigenvector candidates of [[a, b], [c, d]]; keep the one with the larger norm
    first = np.array([b, -0.5 * mu_a])
    second = np.array([0.5 * mu_b, c])
    return first if np.linalg.norm(first) >= np.linalg.norm(second) else second


def sigma_factors(scene: SceneParams, C: float = None, flags: list = None) -> SigmaFactors:
    """
    Symplectic factors and Gibbs parameters of V_sigma.

    The antisymmetric idler combination decouples with symplectic eigenvalue beta_1 = sqrt(S^2 - C^2). The return mode
    and the symmetric idler combination form a two-mode block with position covariance Q = [[A, sqrt(2 kappa) C],
    [sqrt(2 kappa) C, S + C]] and momentum covariance P = [[A, -sqrt(2 kappa) C], [-sqrt(2 kappa) C, S - C]]; the
    eigenvalues of Q P are beta_+^2 and beta_-^2::

        xi = sqrt((A^2 - S^2 + C^2)^2 - 8 kappa C^2 (A - S + C)(A - S - C))
        mu_{1,+-} = (xi - 2 A C) +- [(A - S)^2 - C^2],   mu_{2,+-} = A^2 - S^2 + C^2 +- xi
        beta_+-^2 = [A^2 + S^2 - (1 + 4 kappa) C^2 +- xi] / 2

    The columns of S_sigma are the P-normalised eigenvectors of Q P, written in terms of mu_{2,+-} so that each
    column is taken from the candidate that does not cancel. x_+-, y_+-, u_+- and v_+- are read off those columns rather
    than evaluated from their radical expressions; the magnitudes agree wherever the radicals are defined, and the
    removable 0/0 at A - S -+ C = 0 never arises. Signs are fixed with x_+ >= 0 and x_- <= 0.

    :param flags: optional list collecting warning flags (e.g. "discriminant-clamped")
    :raises DegenerateSpectrumError: if xi <= 1e-14 (A^2 + S^2), i.e. beta_+ = beta_-
    :raises UnphysicalStateError: if a symplectic eigenvalue falls below 1/2
    """
    C = _resolve_C(scene, C)
    S, A, kappa = scene.S, scene.A, scene.kappa
    z = ((S - C) / (S + C)) ** 0.25
    m, p, xi = _discriminant(A, S, C, kappa, flags)
    if xi <= XI_DEGENERATE_TOL * (A**2 + S**2):
        raise DegenerateSpectrumError(
            "coincident symplectic eigenvalues beta_+ = beta_-",
            N_S=scene.N_S,
            N_B=scene.N_B,
            kappa=kappa,
            C=C,
        )
    # mu_2 pair without cancellation
    if m >= 0:
        mu2p = m + xi
        mu2m = p / mu2p
    else:
        mu2m = m - xi
        mu2p = p / mu2m
    mu1p = (xi - 2.0 * A * C) + ((A - S) ** 2 - C**2)
    mu1m = (xi - 2.0 * A * C) - ((A - S) ** 2 - C**2)

    k = np.sqrt(kappa) * C
    Q = np.array([[A, SQRT2 * k], [SQRT2 * k, S + C]])
    P = np.array([[A, -SQRT2 * k], [-SQRT2 * k, S - C]])
    b = -SQRT2 * k * (A - S + C)
    c = SQRT2 * k * (A - S - C)

    # beta_+^2 - 1/4 and beta_-^2 - 1/4 from the printed Z_sigma bracket
    quarter1 = _idler_sum_quarter(scene, C)
    W = 4.0 * quarter1
    occ_A = kappa * scene.N_S + scene.N_B  # A - 1/2
    bracket = (
        4.0 * occ_A * (occ_A + 1.0) * W
        - 16.0 * kappa * C**2 * (4.0 * A * S - 1.0)
        + 64.0 * kappa**2 * C**4
    )
    trace = A**2 + S**2 - (1.0 + 4.0 * kappa) * C**2
    beta_p_sq = 0.5 * (trace + xi)
    quarter_p = beta_p_sq - 0.25
    quarter_m = bracket / 16.0 / quarter_p if quarter_p > 0 else -np.inf
    beta_m_sq = quarter_m + 0.25
    if beta_m_sq <= 0:
        raise UnphysicalStateError(
            "beta_-^2 = {:.6e} is not positive for {}".format(beta_m_sq, scene)
        )
    beta1 = float(np.sqrt((S - C) * (S + C)))
    beta2 = float(np.sqrt(beta_p_sq))
    beta3 = float(np.sqrt(beta_m_sq))
    gamma1 = _gamma(beta1, quarter1, "beta_1")
    gamma2 = _gamma(beta2, quarter_p, "beta_2")
    gamma3 = _gamma(beta3, quarter_m, "beta_3")

    betas = np.array([beta2, beta3])
    Sq = np.column_stack(
        [
            _mode_pair(b, c, mu2m, mu2p),
            _mode_pair(b, c, mu2p, mu2m),
        ]
    )
    Sq = Sq * np.sqrt(betas / np.einsum("ij,ik,kj->j", Sq, P, Sq))
    Sp = P @ Sq / betas
    if Sq[0, 0] < 0 or (Sq[0, 0] == 0 and Sq[1, 0] < 0):
        Sq[:, 0], Sp[:, 0] = -Sq[:, 0], -Sp[:, 0]
    if Sp[0, 1] > 0 or (Sp[0, 1] == 0 and Sp[1, 1] < 0):
        Sq[:, 1], Sp[:, 1] = -Sq[:, 1], -Sp[:, 1]

    xp, up = Sq[0, 0], Sq[1, 0] / SQRT2
    ym, vm = Sq[0, 1], Sq[1, 1] / SQRT2
    yp, vp = Sp[0, 0], Sp[1, 0] / SQRT2
    xm, um = Sp[0, 1], Sp[1, 1] / SQRT2

    q_block = np.array(
        [[0.0, xp, ym], [z / SQRT2, up, vm], [-z / SQRT2, up, vm]]
    )
    p_block = np.array(
        [
            [0.0, yp, xm],
            [1.0 / (SQRT2 * z), vp, um],
            [-1.0 / (SQRT2 * z), vp, um],
        ]
    )
    half_g1_z = gamma1 / (2.0 * z**2)
    half_g1_zinv = z**2 * gamma1 / 2.0
    factors = SigmaFactors(
        z=float(z),
        xi=float(xi),
        mu1p=float(mu1p),
        mu1m=float(mu1m),
        mu2p=float(mu2p),
        mu2m=float(mu2m),
        beta1=beta1,
        beta2=beta2,
        beta3=beta3,
        xp=float(xp),
        xm=float(xm),
        yp=float(yp),
        ym=float(ym),
        up=float(up),
        um=float(um),
        vp=float(vp),
        vm=float(vm),
        S_sigma=block_diag(q_block, p_block),
        D_sigma=np.array([beta1, beta2, beta3]),
        Z_sigma=float(W * bracket / 64.0),
        sigma1=float(gamma2 * yp**2 + gamma3 * xm**2),
        sigma2=float(half_g1_z + gamma2 * vp**2 + gamma3 * um**2),
        sigma3=float(gamma2 * xp**2 + gamma3 * ym**2),
        sigma4=float(half_g1_zinv + gamma2 * up**2 + gamma3 * vm**2),
        sigma5=float(gamma2 * yp * vp + gamma3 * xm * um),
        sigma6=float(-half_g1_z + gamma2 * vp**2 + gamma3 * um**2),
        sigma7=float(gamma2 * xp * up + gamma3 * ym * vm),
        sigma8=float(-half_g1_zinv + gamma2 * up**2 + gamma3 * vm**2),
        gamma1=gamma1,
        gamma2=gamma2,
        gamma3=gamma3,
        A=A,
        S=S,
        C=C,
        kappa=kappa,
    )
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            "sigma factors: xi=%.17g beta=(%.17g, %.17g, %.17g) identity residuals=%s",
            xi,
            beta1,
            beta2,
            beta3,
            mu_identity_residuals(factors),
        )
    return factors


def gibbs_sigma(factors: SigmaFactors) -> np.ndarray:
    """
    Assemble the 6 x 6 Gibbs matrix G_sigma from sigma_1..sigma_8.
    """
    f = factors
    q = np.array(
        [
            [f.sigma1, f.sigma5, f.sigma5],
            [f.sigma5, f.sigma2, f.sigma6],
            [f.sigma5, f.sigma6, f.sigma2],
        ]
    )
    p = np.array(
        [
            [f.sigma3, f.sigma7, f.sigma7],
            [f.sigma7, f.sigma4, f.sigma8],
            [f.sigma7, f.sigma8, f.sigma4],
        ]
    )
    return block_diag(q, p)


def mu_identity_residuals(factors: SigmaFactors) -> np.ndarray:
    """
    Relative residuals of the four mu identities::

        mu_{2,+} - mu_{2,-} = 2 xi
        mu_{2,+} mu_{2,-} = 8 kappa C^2 (A - S + C)(A - S - C)
        mu_{1,+} mu_{2,+} = 2 (A - S - C) [A mu_{2,+} - 4 kappa C^2 (A - S + C)]
        mu_{1,-} mu_{2,-} = -2 (A - S + C) [A mu_{2,-} - 4 kappa C^2 (A - S - C)]

    Each residual is scaled by the magnitudes of the terms entering it before cancellation.
    """
    f = factors
    A, S, C, kappa = f.A, f.S, f.C, f.kappa
    dp, dm = A - S + C, A - S - C
    kc = 4.0 * kappa * C**2
    mu1_scale = f.xi + 2.0 * A * C + (A - S) ** 2 + C**2

    def _rel(lhs, rhs, scale):
        return abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs)

    return np.array(
        [
            _rel(f.mu2p - f.mu2m, 2.0 * f.xi, abs(f.mu2p) + abs(f.mu2m) + 2.0 * f.xi),
            _rel(
                f.mu2p * f.mu2m,
                2.0 * kc * dp * dm,
                abs(f.mu2p * f.mu2m) + 2.0 * kc * abs(dp * dm),
            ),
            _rel(
                f.mu1p * f.mu2p,
                2.0 * dm * (A * f.mu2p - kc * dp),
                mu1_scale * abs(f.mu2p) + 2.0 * abs(dm) * (A * abs(f.mu2p) + kc * abs(dp)),
            ),
            _rel(
                f.mu1m * f.mu2m,
                -2.0 * dp * (A * f.mu2m - kc * dm),
                mu1_scale * abs(f.mu2m) + 2.0 * abs(dp) * (A * abs(f.mu2m) + kc * abs(dm)),
            ),
        ]
    )


# ----------------------------------------------------------------------------------------------------------------------
# traces and relative entropy
def _traces(B, S, C, r, s):
    r1, r2, r3 = r.rho1, r.rho2, r.rho3
    s1, s2, s3, s4 = s.sigma1, s.sigma2, s.sigma3, s.sigma4
    s5, s6, s7, s8 = s.sigma5, s.sigma6, s.sigma7, s.sigma8
    t1 = B * (2 * r1 - s1 - s3) + 2 * (S * (2 * r2 - s2 - s4) - C * (2 * r3 + s6 - s8))
    t2 = (
        B**2 * ((r1 - s1) ** 2 + (r1 - s3) ** 2)
        + 4 * B * ((S + C) * s5**2 + (S - C) * s7**2)
        + 2 * (S * (r2 - s2) - C * (r3 + s6)) ** 2
        + 2 * (S * (r3 + s6) - C * (r2 - s2)) ** 2
        + 2 * (S * (r2 - s4) - C * (r3 - s8)) ** 2
        + 2 * (S * (r3 - s8) - C * (r2 - s4)) ** 2
    )
    t3 = (
        4 * (r3 + s6) * (r3 - s8)
        - 2 * (r1 - s1) * (r1 - s3)
        - 4 * (r2 - s2) * (r2 - s4)
        - 8 * s5 * s7
    )
    return GammaTraces(t1=float(t1), t2=float(t2), t3=float(t3))


def gamma_traces(scene: SceneParams, C: float = None) -> GammaTraces:
    """
    Traces Tr(Gamma V_rho), Tr[(Gamma V_rho)^2] and Tr[(Gamma Omega)^2] from the scalar Gibbs parameters, with
    Gamma = G_rho - G_sigma. Returns (0, 0, 0) when kappa = 0.
    """
    C = _resolve_C(scene, C)
    if scene.kappa == 0:
        return GammaTraces(0.0, 0.0, 0.0)
    r = rho_factors(scene, C)
    s = sigma_factors(scene, C)
    return _traces(scene.B, scene.S, C, r, s)


def log_z_ratio(scene: SceneParams, C: float) -> float:
    """
    ln(Z_sigma / Z_rho) evaluated as log1p of the relative excess::

        delta = [4 kappa N_S (A + B) W - 16 kappa C^2 (4 A S - 1) + 64 kappa^2 C^4] / [(4 B^2 - 1) W]

    with W = 4 S^2 - 4 C^2 - 1.
    """
    S, A, B, kappa = scene.S, scene.A, scene.B, scene.kappa
    W = 4.0 * _idler_sum_quarter(scene, C)
    num = (
        4.0 * kappa * scene.N_S * (A + B) * W
        - 16.0 * kappa * C**2 * (4.0 * A * S - 1.0)
        + 64.0 * kappa**2 * C**4
    )
    den = 4.0 * scene.N_B * (scene.N_B + 1.0) * W
    return float(np.log1p(num / den))


def rel_entropy_threemode(scene: SceneParams, C: float = None, flags: list = None) -> RelEntropyPair:
    """
    Closed-form relative entropy a = D(rho||sigma) and variance b = V(rho||sigma) of the three-mode probe::

        a = 1/2 [ln(Z_sigma / Z_rho) - Tr(Gamma V_rho)],   b = 1/2 Tr[(Gamma V_rho)^2] + 1/8 Tr[(Gamma Omega)^2]

    kappa = 0 gives (0, 0). C = 0 runs through the same factors and reproduces the single-mode thermal result for
    occupations N_B and N_B + kappa N_S.

    :param scene: Scene parameters
    :type scene: :class:`~qillum.probes.SceneParams`
    :param C: Idler correlation, default C_max(N_S)
    :param flags: optional list collecting warning flags
    :raises DegenerateSpectrumError: if beta_+ = beta_- (callers fall back to the generic engine)
    """
    C = _resolve_C(scene, C)
    if scene.kappa == 0 or scene.N_S == 0:
        return RelEntropyPair(a=0.0, b=0.0)
    r = rho_factors(scene, C)
    s = sigma_factors(scene, C, flags=flags)
    t = _traces(scene.B, scene.S, C, r, s)
    a = 0.5 * (log_z_ratio(scene, C) - t.t1)
    b = 0.5 * t.t2 + t.t3 / 8.0
    logger.debug("closed-form relative entropy: a=%.17g b=%.17g", a, b)
    return RelEntropyPair(a=float(a), b=float(b))
