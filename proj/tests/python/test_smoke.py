import math

import numpy as np
import pytest

import mixedmop as mm


def standard():
    return [mm.Weight.gaussian(0.0, 1.0)]


def test_version():
    assert mm.__version__.count(".") == 2


def test_weight_evaluation():
    w = mm.Weight.gaussian(0.5, 2.0, 3.0)
    assert w(0.5) == pytest.approx(3.0)
    assert w(1.5) == pytest.approx(3.0 * math.exp(-1.0 / 4.0))


def test_rank_one_kernel_at_origin():
    k = mm.Kernel(standard(), standard(), [1], [1])
    assert abs(k(0.0, 0.0) - 1.0 / math.sqrt(math.pi)) < 1e-12


def test_type_two_solution_is_monic_hermite():
    # w1 w2 = exp(-x^2): the monic degree-one orthogonal polynomial is x
    s = mm.solve(standard(), standard(), [2], [1])
    c = s.monomial_coefficients[0]
    assert abs(c[0]) < 1e-14
    assert c[1] == pytest.approx(1.0, abs=1e-14)
    assert s.polynomial(0, 0.7) == pytest.approx(0.7, abs=1e-14)
    assert s.residual < 1e-12


def test_kernel_routes_and_trace():
    w1 = [mm.Weight.gaussian(-1.0, 0.5), mm.Weight.gaussian(1.0, 0.5)]
    w2 = [mm.Weight.gaussian(-0.5, 0.5), mm.Weight.gaussian(0.5, 0.5)]
    k = mm.Kernel(w1, w2, [2, 2], [2, 2])
    for x, y in [(-1.3, 0.4), (0.2, 1.1), (0.9, -0.6)]:
        assert k.cd(x, y) == pytest.approx(k.direct(x, y), abs=1e-9)
        assert k.rh(x, y) == pytest.approx(k.direct(x, y), abs=1e-9)
    value, error = k.trace()
    assert abs(value - 4.0) < 1e-8
    grid = k.grid([-1.0, 0.0, 1.0], [0.5, 1.5])
    assert isinstance(grid, np.ndarray) and grid.shape == (3, 2)
    assert grid[1, 0] == pytest.approx(k(0.0, 0.5))
    z = 0.3 + 0.7j
    assert abs(np.linalg.det(k.Y(z)) - 1.0) < 1e-8
    assert np.abs(k.X(z).T @ k.Y(z) - np.eye(4)).max() < 1e-8


def test_rh_report():
    k = mm.Kernel(standard(), standard(), [2], [2])
    report = k.rh_verify(seed=3)
    assert report["max_det_residual"] < 1e-8
    assert report["max_x_y_residual"] < 1e-8
    assert report["max_jump_residual"] < 1e-6


def test_duplicated_weights_are_degenerate():
    w1 = [mm.Weight.gaussian(0.0, 1.0), mm.Weight.gaussian(0.0, 1.0)]
    w2 = [mm.Weight.gaussian(0.5, 1.0)]
    report = mm.check_normality(w1, w2, [2, 1], [2])
    assert report["normal"] is False
    with pytest.raises(mm.NumericalError):
        mm.Kernel(w1, w2, [1, 1], [2])


def test_single_bridge_density():
    c = mm.BrownianConfig([(-1.0, 1)], [(1.0, 1)], 0.5)
    k = mm.CorrelationKernel(c)
    sd = math.sqrt(0.25)
    expected = math.exp(-0.5 * (0.3 / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    assert k(0.3, 0.3) == pytest.approx(expected, rel=1e-10)


def test_partition_function_and_density():
    c = mm.BrownianConfig([(-1.0, 1), (1.0, 1)], [(-1.0, 1), (1.0, 1)], 0.5)
    z = mm.partition_function(c)
    assert z["value"] == pytest.approx(z["closed_form"], rel=1e-10)
    assert z["error_bound"] < 1e-8
    k = mm.CorrelationKernel(c)
    p = mm.KarlinMcGregorDensity(c)
    x = [-0.8, 0.9]
    assert 2 * p(x) == pytest.approx(k.r(x), rel=1e-8)


def test_sampling_is_deterministic():
    c = mm.BrownianConfig([(-1.0, 1), (1.0, 1)], [(-1.0, 1), (1.0, 1)], 0.5)
    a = mm.sample_positions(c, 400, seed=5)
    b = mm.sample_positions(c, 400, seed=5)
    assert a["draws"].shape == (400, 2)
    assert np.array_equal(a["draws"], b["draws"])
    assert np.all(a["draws"][:, 0] <= a["draws"][:, 1])


def test_validation_errors():
    with pytest.raises(mm.ValidationError):
        mm.BrownianConfig([(1.0, 1), (-1.0, 1)], [(0.0, 2)], 0.5)
    with pytest.raises(mm.ValidationError):
        mm.BrownianConfig([(0.0, 1)], [(0.0, 1)], 1.5)
    with pytest.raises(mm.ValidationError):
        mm.Kernel(standard(), standard(), [1], [1], precision="quad")
