"""Smoke test for the `vclab` extension module. Run with pytest or directly."""

import json
import math
import pathlib

import pytest
from scipy.integrate import quad

import vclab

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "cli" / "fixtures"


def load(name):
    return json.loads((FIXTURES / name).read_text())


def test_integral_matches_quadrature():
    for power, rate, freq, phase in [(0, -0.3, 2.0, "sin"), (3, 0.5, 1.5, "cos"), (2, -1.0, 0.0, "cos")]:
        trig = math.sin if phase == "sin" else math.cos
        expected, _ = quad(lambda t: t**power * math.exp(rate * t) * trig(freq * t), 0.0, 1.5, epsabs=1e-13)
        value, branch = vclab.integrate_monomial(power, rate, freq, phase, 1.5)
        assert branch == "regular"
        assert value == pytest.approx(expected, rel=1e-10, abs=1e-12)
    _, branch = vclab.integrate_monomial(1, 0.0, 0.0, "cos", 1.0)
    assert branch == "degenerate_denominator"


def test_system_response_is_linear_in_controls():
    system = vclab.System(load("exp_basis.json"))
    assert (system.n, system.p, system.k) == (1, 1, 2)
    y = system.response()
    y2 = system.response([[2.0, -4.0]])
    assert y2[0] == pytest.approx(2.0 * y[0], rel=1e-12)
    lam = system.lambdas()
    assert y[0] == pytest.approx(lam[0] * 1.0 + lam[1] * -2.0, rel=1e-12)
    assert vclab.sign_observe([y[0], -1.0]) == [int(y[0] > 0), 0]
    assert vclab.System(system.to_dict()).response() == pytest.approx(y, rel=1e-14)


def test_bounds():
    assert vclab.vc_upper_scalar(4, 1, 3, 0) == pytest.approx(2671.9904516979573, rel=1e-14)
    assert vclab.vc_lower(4, 3) == 3
    report = vclab.bound("vc_upper_scalar", n=4, m=1, k=3, ell_max=0)
    assert report["value"] == pytest.approx(2671.9904516979573, rel=1e-14)
    assert vclab.loss_eval(1.0, 0.0) == 0.5


def test_verification_reports():
    report = vclab.verify({"construction": "section7", "k": 3})
    assert report["complete"] and len(report["patterns_found"]) == 8
    axis = vclab.verify(load("verify_axis.json"), seed=11)
    assert axis["complete"]


def test_learning_and_selftest():
    cfg = load("learn_demo.json")
    cfg.update(sizes=[10, 30], trials=2, test_size=500)
    result = vclab.learn(cfg, seed=5)
    assert [(r["s"], r["trial"]) for r in result["rows"]] == [(10, 0), (10, 1), (30, 0), (30, 1)]
    assert vclab.learn(cfg, seed=5) == result
    assert vclab.selftest()["passed"]


def test_invalid_input_raises_value_error():
    with pytest.raises(ValueError, match="horizon"):
        vclab.System(dict(load("exp_basis.json"), horizon=2.0))
    with pytest.raises(ValueError, match="seed"):
        vclab.verify(load("verify_axis.json"))
    with pytest.raises(ValueError):
        vclab.verify({"construction": "section7", "k": 40})
    with pytest.raises(ValueError):
        vclab.bound("vc_sideways", n=1)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
