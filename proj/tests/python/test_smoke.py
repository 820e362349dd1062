import math
from pathlib import Path

import numpy as np
import pytest

import flockkin

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_w1_diracs():
    d, plan = flockkin.w1(np.array([[0.0]]), np.array([[3.0]]))
    assert d == pytest.approx(3.0)
    assert plan == [(0, 0, 1.0)]


def test_w1_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.normal(size=(4, 2)), rng.normal(size=(3, 2))
        wa, wb = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(3))
        for metric in ("euclidean", "sum"):
            d, plan = flockkin.w1(a, b, wa, wb, metric)
            assert d == pytest.approx(flockkin.w1_bruteforce(a, b, wa, wb, metric), abs=1e-9)
            rows = np.zeros(4)
            for i, _, mass in plan:
                rows[i] += mass
            np.testing.assert_allclose(rows, wa, atol=1e-10)


def test_bounded_lipschitz_box():
    assert flockkin.bounded_lipschitz(np.array([[0.0]]), np.array([[3.0]])) == pytest.approx(2.0)
    assert flockkin.bounded_lipschitz(np.array([[0.0]]), np.array([[0.5]])) == pytest.approx(0.5)


def test_bad_weights_rejected():
    with pytest.raises(ValueError):
        flockkin.w1(np.array([[0.0], [1.0]]), np.array([[0.0]]), np.array([0.5, 0.6]))


def test_equality_case_decay():
    cfg = (CONFIGS / "equality.yaml").read_text()
    out = flockkin.simulate(cfg, t_end=2.0)
    t, gf = out["t"], out["Gf"]
    np.testing.assert_allclose(gf, gf[0] * np.exp(-2.0 * t), rtol=1e-6)
    np.testing.assert_allclose(out["V1"], 0.0, atol=1e-12)
    assert flockkin.cstar(cfg) == pytest.approx(2.0)
    assert flockkin.envelope(1.0, 2.0, 1.0, 1.0) == pytest.approx(math.exp(-2.0))


def test_assumption_gate():
    ok, checks = flockkin.check_assumptions((CONFIGS / "equality.yaml").read_text())
    assert ok
    bad, checks = flockkin.check_assumptions((CONFIGS / "smallness_violated.yaml").read_text())
    assert not bad
    assert checks["A3-smallness"][0] is False


def test_config_errors():
    with pytest.raises(ValueError):
        flockkin.simulate("seed: 1\nmodle: {}\n")


def test_cli_in_process(tmp_path):
    code, out, _ = flockkin.run_cli(
        ["verify", "--config", str(CONFIGS / "equality.yaml"), "--suite", "decay", "--out", str(tmp_path)]
    )
    assert code == 0
    assert "decay: PASS" in out
    assert (tmp_path / "report.json").exists()
    code, _, _ = flockkin.run_cli(["check-assumptions", "--config", str(CONFIGS / "smallness_violated.yaml"),
                                   "--out", str(tmp_path / "bad")])
    assert code == 2
