from fixtures import *

sys.path.insert(0, os.path.abspath("../"))

import logging

import qillum.stein


# ----------------------------------------------------------------------------------------------------------------------
# normal distribution
def test_inv_std_normal_cdf_values():
    assert qi.inv_std_normal_cdf(0.5) == 0.0
    assert np.isclose(qi.inv_std_normal_cdf(0.841344746), 1.0, atol=1e-6)
    assert np.isclose(qi.inv_std_normal_cdf(0.001), -3.090232, atol=1e-6)


def test_inv_std_normal_cdf_accuracy():
    p = np.linspace(1e-6, 1 - 1e-6, 1000)
    assert np.max(np.abs(qi.std_normal_cdf(qi.inv_std_normal_cdf(p)) - p)) <= 1e-9


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, np.nan])
def test_inv_std_normal_cdf_domain(p):
    with pytest.raises(qi.InvalidArgumentError):
        qi.inv_std_normal_cdf(p)


# ----------------------------------------------------------------------------------------------------------------------
# exponents
def test_error_exponent():
    pair = qi.RelEntropyPair(a=1.0, b=4.0)
    assert np.isclose(qi.error_exponent(qi.ExponentQuery(M=4, epsilon=0.158655, pair=pair)), 0.0, atol=1e-5)
    # epsilon = 1/2 removes the second-order term
    for M in [1, 10, 1000]:
        assert qi.error_exponent(qi.ExponentQuery(M=M, epsilon=0.5, pair=pair)) == 1.0
    # small M gives a vacuous negative exponent
    assert qi.error_exponent(qi.ExponentQuery(M=1, epsilon=0.001, pair=pair)) < 0


def test_error_exponent_invalid():
    with pytest.raises(qi.InvalidArgumentError):
        qi.error_exponent(qi.ExponentQuery(M=4, epsilon=0.01, pair=qi.RelEntropyPair(a=1.0, b=-1.0)))
    with pytest.raises(qi.InvalidArgumentError):
        qi.ExponentQuery(M=0, epsilon=0.01, pair=qi.RelEntropyPair(a=1.0, b=1.0))
    with pytest.raises(qi.InvalidArgumentError):
        qi.ExponentQuery(M=2.5, epsilon=0.01, pair=qi.RelEntropyPair(a=1.0, b=1.0))
    with pytest.raises(qi.InvalidArgumentError):
        qi.ExponentQuery(M=2, epsilon=1.0, pair=qi.RelEntropyPair(a=1.0, b=1.0))


def test_error_probability():
    assert qi.error_probability(0.0, 10) == 1.0
    assert qi.error_probability(-0.3, 10) == 1.0
    assert np.isclose(qi.error_probability(0.9395, 10), 8.32e-5, rtol=1e-3)
    assert np.allclose(qi.error_probability(np.array([0.1, -0.1]), 2), [np.exp(-0.2), 1.0])


def test_exponent_curve_monotone():
    pair = qi.RelEntropyPair(a=0.5, b=2.0)
    M = np.unique(np.logspace(0, 6, 50).round())
    curve = qi.exponent_curve(pair, 0.01, M)
    assert np.all(np.diff(curve.R) >= 0)
    positive = curve.R > 0
    assert np.all(np.diff(curve.P_err[positive]) <= 0)
    assert np.all(curve.R < pair.a)
    # epsilon > 1/2 approaches a from above
    assert np.all(np.diff(qi.exponent_curve(pair, 0.9, M).R) <= 0)


def test_exponent_curve_large_M():
    scene = qi.SceneParams(**FIG1A)
    pair, _ = qi.relative_entropy_pair("tmsv", scene)
    curve = qi.exponent_curve(pair, scene.epsilon, [10**9])
    assert abs(curve.R[0] - pair.a) < 1e-3 * pair.a
    expected_gap = np.sqrt(pair.b / 1e9) * abs(qi.inv_std_normal_cdf(scene.epsilon))
    assert np.isclose(pair.a - curve.R[0], expected_gap, rtol=1e-6)


def test_exponent_curve_invalid():
    pair = qi.RelEntropyPair(a=0.5, b=2.0)
    with pytest.raises(qi.InvalidArgumentError):
        qi.exponent_curve(pair, 0.01, [])
    with pytest.raises(qi.InvalidArgumentError):
        qi.exponent_curve(pair, 0.01, [0, 1])
    with pytest.raises(qi.InvalidArgumentError):
        qi.exponent_curve(pair, 0.01, [1.5])


# ----------------------------------------------------------------------------------------------------------------------
# relative entropy paths
def test_relative_entropy_pair_paths(fig2b_scene):
    _, used = qi.relative_entropy_pair("threemode", fig2b_scene)
    assert used == qi.CLOSED
    _, used = qi.relative_entropy_pair("tmsv", fig2b_scene)
    assert used == qi.GENERIC
    closed, _ = qi.relative_entropy_pair("threemode", qi.SceneParams(**FIG2A))
    generic, used = qi.relative_entropy_pair("threemode", qi.SceneParams(**FIG2A), path="generic")
    assert used == qi.GENERIC
    assert np.isclose(closed.a, generic.a, rtol=1e-7)
    with pytest.raises(qi.InvalidArgumentError):
        qi.relative_entropy_pair("tmsv", fig2b_scene, path="closed")
    with pytest.raises(qi.InvalidArgumentError):
        qi.relative_entropy_pair("tmsv", fig2b_scene, path="series")


def test_relative_entropy_pair_fallback(fig2b_scene, monkeypatch):
    def degenerate(*args, **kwargs):
        raise qi.DegenerateSpectrumError("coincident symplectic eigenvalues", kappa=0.01)

    monkeypatch.setattr(qillum.stein, "rel_entropy_threemode", degenerate)
    flags = []
    with pytest.warns(UserWarning):
        pair, used = qi.relative_entropy_pair("threemode", fig2b_scene, flags=flags)
    assert used == qi.GENERIC
    assert flags == ["closed-form-fallback"]
    assert np.isclose(pair.a, 2.57e-5, rtol=1e-2)
    with pytest.raises(qi.DegenerateSpectrumError):
        qi.relative_entropy_pair("threemode", fig2b_scene, path="closed")


def test_rmax_kappa_zero():
    scene = qi.SceneParams(N_S=1.0, N_B=1.0, kappa=0.0)
    for kind in qi.PROBE_KINDS:
        assert abs(qi.rmax(kind, scene)) <= 1e-12


def test_rmax_coherent_closed_form():
    for params in [FIG1A, FIG1B]:
        scene = qi.SceneParams(**params)
        expected = scene.kappa * scene.N_S * np.log1p(1 / scene.N_B)
        assert np.isclose(qi.rmax("coherent", scene), expected, rtol=1e-10)


# ----------------------------------------------------------------------------------------------------------------------
# asymptotics and ratios
def test_asymptotic_rmax_values():
    scene = qi.SceneParams(**FIG1B)
    assert np.isclose(qi.asymptotic_rmax("tmsv", scene, "background"), 2.3306e-5, rtol=1e-4)
    assert np.isclose(qi.asymptotic_rmax("threemode", scene, "background"), 2.670e-5, rtol=1e-3)
    scene = qi.SceneParams(**FIG1A)
    assert np.isclose(qi.asymptotic_rmax("tmsv", scene, qi.RegimeLimit.SIGNAL_DOMINANT), 0.9303, rtol=1e-4)
    assert np.isclose(qi.asymptotic_rmax("threemode", scene, "signal"), 0.2 / 1.01, rtol=1e-12)
    assert qi.asymptotic_rmax("tmsv", scene.replace(kappa=0.0), "signal") == 0.0


def test_asymptotic_rmax_invalid():
    scene = qi.SceneParams(**FIG1B)
    with pytest.raises(qi.InvalidArgumentError):
        qi.asymptotic_rmax("coherent", scene, "background")
    with pytest.raises(qi.InvalidArgumentError):
        qi.asymptotic_rmax("tmsv", scene, "thermal")


def test_advantage_ratio_asymptotic():
    scene = qi.SceneParams(N_S=0.46, N_B=1.0, kappa=0.01)
    assert np.isclose(qi.advantage_ratio(scene, mode="asymptotic"), 1.0004, atol=1e-3)
    # independent of kappa and N_B
    other = scene.replace(N_B=50.0, kappa=1e-4)
    assert np.isclose(
        qi.advantage_ratio(other, mode="asymptotic"), qi.advantage_ratio(scene, mode="asymptotic"), rtol=1e-13
    )
    assert qi.advantage_ratio(scene.replace(N_S=0.1), mode="asymptotic") < 1
    with pytest.raises(qi.DegenerateRatioError):
        qi.advantage_ratio(scene.replace(N_S=3.0), mode="asymptotic")
    with pytest.raises(qi.InvalidArgumentError):
        qi.advantage_ratio(scene, mode="approximate")


def test_advantage_ratio_exact():
    r = qi.advantage_ratio(qi.SceneParams(**FIG2A))
    assert r > 1
    assert np.isclose(r, 1.904, atol=0.03)


def test_ratio_curve():
    ns = np.array([0.1, 0.46, 1.0])
    r = qi.ratio_curve(ns)
    assert r.shape == (3,)
    assert r[0] < 1 < r[2]
    with pytest.raises(qi.InvalidArgumentError):
        qi.ratio_curve(ns, mode="exact")


def test_ratio_map_small_grid():
    da = qi.ratio_map([1e-2, 1e-1], [1e-3, 1e-2])
    assert da.dims == ("N_B", "kappa")
    assert da.shape == (2, 2)
    assert float(da.sel(N_B=1e-2, kappa=1e-3)) > 1
    assert da.attrs["ns_factor"] == 100.0
    assert da.attrs["n_failed"] == 0
    assert (da.flag.values == "").all()


def test_ratio_map_unphysical_point(caplog):
    # N_S = 0.1, N_B = 1e-3 and kappa = 0.1 leave the target-present state below the vacuum
    with caplog.at_level(logging.WARNING, logger="qillum.stein"):
        da = qi.ratio_map([1e-3, 1e-1], [1e-3, 0.1])
    assert da.attrs["n_failed"] == 1
    assert np.isnan(float(da.sel(N_B=1e-3, kappa=0.1)))
    assert str(da.flag.sel(N_B=1e-3, kappa=0.1).values).startswith("error:unphysical-state")
    assert int(da.notnull().sum()) == 3
    assert float(da.sel(N_B=1e-3, kappa=1e-3)) > 1
    assert "1 of 4 points failed" in caplog.text


# ----------------------------------------------------------------------------------------------------------------------
# crossover
def test_crossover_asymptotic():
    ns_star = qi.crossover_ns()
    assert abs(ns_star - 0.45969) < 2e-4
    assert 0.455 <= ns_star <= 0.465
    assert abs(qi.crossover_ns(tol=1e-2) - 0.46) <= 0.01


def test_crossover_full_output():
    result = qi.crossover_ns(mode="asymptotic", tol=1e-6, full_output=True)
    assert result.bracket == (0.01, 1.5)
    assert result.mode == qi.ASYMPTOTIC
    assert abs(result.residual) < 1e-5


def test_crossover_invalid(monkeypatch):
    with pytest.raises(qi.InvalidArgumentError):
        qi.crossover_ns(tol=0)
    with pytest.raises(qi.InvalidArgumentError):
        qi.crossover_ns(mode="exact", N_B=20.0, kappa=0.01)
    with pytest.raises(qi.InvalidArgumentError):
        qi.crossover_ns(mode="exact")
    with pytest.raises(qi.InvalidArgumentError):
        qi.crossover_ns(mode="numeric")
    monkeypatch.setattr(qillum.stein, "CROSSOVER_BRACKET", (0.6, 1.5))
    with pytest.raises(qi.NoCrossoverError):
        qi.crossover_ns()
