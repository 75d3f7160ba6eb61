import math

import pytest

from clonemacro import crosscheck, distinguish


def test_all_checks_pass_and_canary_is_caught():
    results = crosscheck.run_checks((3, 5), n_points=6, seed=4)
    assert all(r.passed for r in results)
    canaries = [r for r in results if r.canary]
    assert canaries and all(r.max_deviation > 1e-3 for r in canaries)
    plain = [r for r in results if not r.canary]
    assert max(r.max_deviation for r in plain) < 1e-10


def test_check_result_semantics():
    assert crosscheck.CheckResult("x", 3, 1, 1e-12, 1e-10).passed
    assert not crosscheck.CheckResult("x", 3, 1, 1e-8, 1e-10).passed
    assert crosscheck.CheckResult("x", 3, 1, 1e-8, 1e-10, canary=True).passed
    assert not crosscheck.CheckResult("x", 3, 1, 0.0, 1e-10, canary=True).passed


def test_size_limit():
    with pytest.raises(ValueError):
        crosscheck.run_checks((9,))
    with pytest.raises(ValueError):
        crosscheck.oracle_distinguishability(9, "pair")


@pytest.mark.parametrize(
    "scenario,param,formula",
    [
        ("sharp", None, lambda n: distinguish.sharp_probabilities(n)),
        ("pair", None, lambda n: distinguish.pair_coarsened_probabilities(n)),
        ("povm", math.sqrt(7), lambda n: distinguish.povm_probabilities(n, math.sqrt(n))),
        ("noise", 0.8, lambda n: distinguish.noisy_probabilities(n, 0.8)),
    ],
)
def test_oracle_distinguishability(scenario, param, formula):
    d = crosscheck.oracle_distinguishability(7, scenario, param)
    assert d == pytest.approx(distinguish.distinguishability(formula(7)), abs=1e-12)
