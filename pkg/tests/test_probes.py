from fixtures import *

sys.path.insert(0, os.path.abspath("../"))

import warnings


def test_create_scene():
    scene = qi.create_scene(N_S=20, N_B=0.01, kappa=0.01, epsilon=0.001)
    assert scene == qi.SceneParams(N_S=20.0, N_B=0.01, kappa=0.01, epsilon=0.001)
    assert np.isclose(scene.S, 20.5)
    assert np.isclose(scene.B, 0.51)
    assert np.isclose(scene.A, 0.71)
    # short keyword aliases and default epsilon
    assert qi.create_scene(ns=1, nb=2).epsilon == 0.01
    assert scene.replace(kappa=0.0).A == scene.B


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(N_S=-1, N_B=1, kappa=0.01),
        dict(N_S=1, N_B=0, kappa=0.01),
        dict(N_S=1, N_B=1, kappa=1.0),
        dict(N_S=1, N_B=1, kappa=-0.1),
        dict(N_S=1, N_B=1, kappa=0.01, epsilon=0.0),
        dict(N_S=1, N_B=1, kappa=0.01, epsilon=1.0),
        dict(N_S=np.nan, N_B=1, kappa=0.01),
        dict(N_B=1, kappa=0.01),
    ],
)
def test_scene_validation(kwargs):
    with pytest.raises(qi.InvalidArgumentError):
        qi.create_scene(**kwargs)


def test_scene_large_kappa_warns():
    with pytest.warns(UserWarning, match="kappa"):
        scene = qi.create_scene(N_S=1, N_B=1, kappa=0.5)
    assert scene.flags == ["large-kappa"]
    assert qi.SceneParams(N_S=1, N_B=1, kappa=0.05).flags == []


def test_create_probe():
    assert qi.create_probe("TMSV").kind == qi.TMSV
    assert qi.create_probe("three-mode").kind == qi.THREEMODE
    with pytest.raises(qi.InvalidArgumentError):
        qi.create_probe("squeezed")
    with pytest.raises(qi.InvalidArgumentError):
        qi.create_probe("tmsv", C=0.1)
    with pytest.raises(qi.InvalidArgumentError):
        qi.create_probe("threemode", C=-0.1)


def test_c_max_reference_value():
    assert np.isclose(qi.c_max(1.0) ** 2, 0.56108, atol=2e-4)
    assert qi.c_max(0.0) == 0.0
    with pytest.raises(qi.InvalidArgumentError):
        qi.c_max(-1.0)


@pytest.mark.parametrize("N_S", [1e-3, 0.01, 0.46, 1.0, 10.0, 50.0])
def test_c_max_solves_cubic(N_S):
    x = qi.c_max(N_S) ** 2
    assert qi.c_max_cubic_residual(N_S, x) < 1e-12
    # inside the physical range C < S
    assert qi.c_max(N_S) < N_S + 0.5


@pytest.mark.parametrize("N_S", [1e-3, 0.1, 1.0])
def test_c_max_state_spectrum(N_S):
    # det Lambda = 1/64 at C_max: one eigenvalue below 1/2, the state is not physical
    S, C = N_S + 0.5, qi.c_max(N_S)
    state = qi.probe_covariance(qi.create_probe("threemode"), N_S)
    nu = qi.symplectic_eigenvalues(state.cov)
    assert np.isclose(np.prod(nu), 1 / 8, rtol=1e-8)
    assert np.isclose(nu[0], np.sqrt(S**2 - 4 * C**2), rtol=1e-6)
    assert np.isclose(nu[0], 1 / (8 * (S**2 - C**2)), rtol=1e-8)
    assert np.allclose(nu[1:], np.sqrt(S**2 - C**2), rtol=1e-10)
    assert nu[0] < 0.5
    assert not qi.is_physical(state.cov)


def test_c_max_reference_spectrum():
    state = qi.probe_covariance(qi.create_probe("threemode"), 1.0)
    nu = qi.symplectic_eigenvalues(state.cov)
    assert np.allclose(nu, [0.07401, 1.29957, 1.29957], atol=1e-5)


def test_c_phys_boundary():
    assert np.isclose(qi.c_phys(1.0), np.sqrt(2) / 2, rtol=1e-15)
    assert qi.c_phys(0.0) == 0.0
    for N_S in [1e-3, 0.1, 1.0, 10.0]:
        assert qi.c_crit(N_S) < qi.c_phys(N_S) < qi.c_max(N_S)
        inside = qi.probe_covariance(qi.create_probe("threemode", C=qi.c_phys(N_S) * (1 - 1e-6)), N_S)
        outside = qi.probe_covariance(qi.create_probe("threemode", C=qi.c_phys(N_S) * (1 + 5e-4)), N_S)
        assert qi.is_physical(inside.cov)
        assert not qi.is_physical(outside.cov)


def test_correlation_bounds_monotone():
    ns = np.linspace(0.1, 100.0, 1000)
    assert np.all(np.diff([qi.c_max(n) for n in ns]) > 0)
    assert np.all(np.diff([qi.c_crit(n) for n in ns]) > 0)


def test_c_crit_reference_value():
    assert np.isclose(qi.c_crit(1.0), 0.618034, atol=1e-6)
    assert qi.c_crit(0.0) == 0.0
    for N_S in [0.01, 1.0, 10.0]:
        assert qi.c_crit(N_S) < qi.c_max(N_S)


def test_classify_entanglement():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert qi.classify_entanglement(1.0, 0.5) == qi.SEPARABLE
        # C_c < C <= C_phys: physical and entangled
        assert qi.classify_entanglement(1.0, 0.65) == qi.ENTANGLED
    with pytest.raises(qi.InvalidArgumentError):
        qi.classify_entanglement(1.0, 0.8)


def test_classify_entanglement_flags_unphysical_probe():
    flags = []
    with pytest.warns(UserWarning, match="certifies nothing"):
        label = qi.classify_entanglement(1.0, qi.c_max(1.0), flags)
    assert label == qi.ENTANGLED
    assert flags == ["unphysical-probe"]


def test_ppt_diagnostic():
    # physical Lambda past the separability boundary violates PPT across signal | idlers
    assert qi.ppt_min_eigenvalue(1.0, 0.65) < 0.5
    assert qi.ppt_min_eigenvalue(1.0, 0.6) > 0.5
    # C = 0 is a product of thermal modes
    assert np.isclose(qi.ppt_min_eigenvalue(1.0, 0.0), 1.5)


def test_correlation_range():
    probe = qi.create_probe("threemode", C=0.8)
    with pytest.raises(qi.InvalidArgumentError):
        probe.correlation(1.0)
    assert qi.create_probe("threemode").correlation(1.0) == qi.c_max(1.0)
    with pytest.raises(qi.InvalidArgumentError):
        qi.create_probe("tmsv").correlation(1.0)


def test_tmsv_probe_state():
    state = qi.probe_covariance(qi.create_probe("tmsv"), 1.0)
    assert np.allclose(qi.symplectic_eigenvalues(state.cov), 0.5, atol=1e-10)


def test_hypothesis_pair_threemode():
    scene = qi.SceneParams(N_S=1.0, N_B=0.5, kappa=0.01)
    C = qi.c_max(1.0)
    hyp = qi.build_hypothesis_pair(qi.create_probe("threemode"), scene)
    rho, sigma = hyp.rho.cov, hyp.sigma.cov
    assert rho.shape == (6, 6)
    assert rho[0, 0] == scene.B and sigma[0, 0] == scene.A
    assert np.isclose(rho[1, 2], C) and np.isclose(rho[4, 5], -C)
    assert np.isclose(sigma[0, 1], 0.1 * C) and np.isclose(sigma[3, 4], -0.1 * C)
    # return mode uncorrelated under target absence
    assert np.all(rho[0, 1:3] == 0)
    assert qi.is_physical(rho) and qi.is_physical(sigma)


def test_hypothesis_pair_kappa_zero():
    scene = qi.SceneParams(N_S=1.0, N_B=0.5, kappa=0.0)
    for kind in qi.PROBE_KINDS:
        hyp = qi.build_hypothesis_pair(qi.create_probe(kind), scene)
        assert hyp.rho == hyp.sigma


def test_hypothesis_pair_tmsv_and_coherent():
    scene = qi.SceneParams(**FIG1A)
    tmsv = qi.build_hypothesis_pair(qi.create_probe("tmsv"), scene)
    assert qi.is_physical(tmsv.sigma.cov)
    assert np.isclose(tmsv.sigma.cov[0, 1], np.sqrt(0.01 * 20 * 21))
    coherent = qi.build_hypothesis_pair(qi.create_probe("coherent"), scene)
    assert coherent.rho.cov.shape == (2, 2)
    assert np.array_equal(coherent.rho.cov, coherent.sigma.cov)
    assert np.isclose(coherent.sigma.mean[0], np.sqrt(2 * 0.01 * 20))


def test_hypothesis_pair_unphysical_sigma():
    # low background, large reflectivity: V_sigma violates the uncertainty principle
    scene = qi.SceneParams(N_S=0.1, N_B=1e-3, kappa=0.1)
    with pytest.raises(qi.UnphysicalStateError, match="sigma"):
        qi.build_hypothesis_pair(qi.create_probe("threemode"), scene)
    # same scene, other probes stay physical
    for kind in ["tmsv", "coherent"]:
        qi.build_hypothesis_pair(qi.create_probe(kind), scene)


def test_sigma_approaches_rho_as_sqrt_kappa():
    scene = qi.SceneParams(N_S=1.0, N_B=1.0, kappa=0.01)
    off_norms = []
    for kappa in [1e-8, 1e-6, 1e-4, 1e-2]:
        hyp = qi.build_hypothesis_pair(qi.create_probe("threemode"), scene.replace(kappa=kappa))
        delta = hyp.sigma.cov - hyp.rho.cov
        assert np.allclose(np.diag(delta), [kappa, 0, 0, kappa, 0, 0], rtol=1e-6, atol=1e-15)
        off_norms.append(np.linalg.norm(delta - np.diag(np.diag(delta))) / np.sqrt(kappa))
    # off-diagonal gap is exactly linear in sqrt(kappa)
    assert np.allclose(off_norms, 2 * np.sqrt(2) * qi.c_max(1.0), rtol=1e-12)
