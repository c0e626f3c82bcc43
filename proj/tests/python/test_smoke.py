import math

import numpy as np
import pytest

import parastep


def test_exact_solution_values():
    assert parastep.exact_solution("heat_sine", [0.5], 0.0) == pytest.approx(1.0)
    assert "heat_2d_product" in parastep.exact_solution_ids()
    with pytest.raises(parastep.ParastepError):
        parastep.exact_solution("nope", [0.5], 0.0)


def test_pucci_operators():
    X = np.diag([3.0, -2.0])
    assert parastep.pucci_plus(X, 1.0, 4.0) == pytest.approx(10.0)
    assert parastep.pucci_minus(X, 1.0, 4.0) == pytest.approx(-5.0)


def test_fit_rate():
    h = [1 / 8, 1 / 16, 1 / 32]
    assert parastep.fit_rate(h, [x**2 for x in h]) == pytest.approx(2.0, abs=1e-10)
    assert parastep.fit_rate(h[:2], [1.0, 0.5]) is None


def test_converge_heat():
    r = parastep.converge(h_list=[1 / 8, 1 / 16, 1 / 32], seed=3)
    errs = [row["sup_error"] for row in r["rows"]]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert r["fitted_rate"] > 0.9
    assert r["csv"].startswith("# parastep converge seed=3")


def test_solve_shape_and_accuracy():
    values, info = parastep.solve(h=1 / 16)
    assert values.shape == (64, 17)
    assert info["converged"]
    x = np.linspace(0, 1, 17)
    t = info["tau"] * values.shape[0]
    exact = math.exp(-math.pi**2 * t) * np.sin(math.pi * x)
    assert np.max(np.abs(values[-1] - exact)) < 0.02


def test_cli_help():
    code, out, _ = parastep.cli(["--help"])
    assert code == 0
    assert "diagnose" in out
