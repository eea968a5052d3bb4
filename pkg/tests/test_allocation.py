"""Payment-rule weights, mass accounting, and the truncation-depth bound."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from poolpay import (
    Custom,
    Geometric,
    ParameterError,
    PonziRuleError,
    PoolParams,
    PowerUtility,
    Pplns,
    Solo,
    rule_from_dict,
    truncation_depth,
)


class TestSolo:
    def test_weights(self):
        rule = Solo()
        assert rule.weight(0) == 1.0
        assert rule.weight(1) == 0.0
        assert rule.weight(10_000) == 0.0
        assert rule.mass() == 1.0
        assert rule.window() == 1

    def test_array(self):
        np.testing.assert_array_equal(
            Solo().weights_array(4), np.array([1.0, 0.0, 0.0, 0.0])
        )


class TestPplns:
    def test_uniform_weights(self):
        rule = Pplns(4)
        assert rule.weight(0) == 0.25
        assert rule.weight(2) == 0.25
        assert rule.weight(3) == 0.25
        assert rule.weight(4) == 0.0
        assert rule.mass() == 1.0
        assert rule.window() == 4

    def test_n_one_is_solo_shaped(self):
        rule = Pplns(1)
        assert rule.weight(0) == 1.0
        assert rule.weight(1) == 0.0

    @pytest.mark.parametrize("n", [0, -3])
    def test_bad_n(self, n):
        with pytest.raises(ParameterError):
            Pplns(n)

    def test_non_integer_n(self):
        with pytest.raises(ParameterError):
            Pplns(2.5)

    def test_bool_rejected(self):
        with pytest.raises(ParameterError):
            Pplns(True)


class TestGeometric:
    def test_weights(self):
        rule = Geometric(c=0.0199, r=0.9801)
        assert rule.weight(0) == pytest.approx(0.0199, abs=1e-15)
        assert rule.weight(1) == pytest.approx(0.01950399, abs=1e-15)
        assert rule.weight(2) == pytest.approx(0.0199 * 0.9801**2, rel=1e-15)

    def test_full_mass_rule(self):
        rule = Geometric(c=0.0199, r=0.9801)
        assert rule.mass() == pytest.approx(1.0, abs=1e-12)
        assert rule.window() is None

    def test_partial_mass_allowed(self):
        rule = Geometric(c=0.005, r=0.99)
        assert rule.mass() == pytest.approx(0.5, rel=1e-12)

    def test_ponzi_rejected(self):
        with pytest.raises(PonziRuleError):
            Geometric(c=0.05, r=0.99)

    @pytest.mark.parametrize("c,r", [(0.0, 0.5), (-0.1, 0.5), (1.5, 0.5),
                                     (0.1, 0.0), (0.1, 1.0), (0.1, -0.2)])
    def test_parameter_domain(self, c, r):
        with pytest.raises((ParameterError, PonziRuleError)):
            Geometric(c=c, r=r)


class TestCustom:
    def test_weights_and_window(self):
        rule = Custom(weights=(0.5, 0.3, 0.1))
        assert rule.weight(0) == 0.5
        assert rule.weight(2) == 0.1
        assert rule.weight(3) == 0.0
        assert rule.mass() == pytest.approx(0.9, abs=1e-15)
        assert rule.window() == 3

    def test_overcommitted_rejected(self):
        with pytest.raises(PonziRuleError):
            Custom(weights=(0.5, 0.6))

    def test_mass_tolerance_boundary(self):
        # exactly 1 + eps with eps inside the float tolerance must pass
        Custom(weights=(1.0 + 0.9e-12,))
        with pytest.raises(PonziRuleError):
            Custom(weights=(1.0 + 1e-9,))

    def test_negative_weight_rejected(self):
        with pytest.raises(ParameterError):
            Custom(weights=(0.5, -0.1))

    def test_empty_rejected(self):
        with pytest.raises(ParameterError):
            Custom(weights=())

    def test_list_coerced_to_tuple(self):
        rule = Custom(weights=[0.25, 0.25])
        assert isinstance(rule.weights, tuple)

    def test_fsum_mass_check(self):
        # 10 x 0.1 sums to <1 + tol with compensated summation
        Custom(weights=(0.1,) * 10)


class TestWeightsArray:
    @pytest.mark.parametrize("rule", [
        Solo(),
        Pplns(7),
        Geometric(c=0.0199, r=0.9801),
        Custom(weights=(0.4, 0.3, 0.2, 0.1)),
    ])
    def test_matches_scalar_weight(self, rule):
        arr = rule.weights_array(40)
        for i in range(40):
            assert arr[i] == rule.weight(i)

    def test_negative_offset_rejected(self):
        with pytest.raises(ParameterError):
            Pplns(3).weight(-1)


class TestSerialization:
    @pytest.mark.parametrize("rule", [
        Solo(),
        Pplns(125),
        Geometric(c=0.0199, r=0.9801),
        Custom(weights=(0.5, 0.25, 0.125)),
    ])
    def test_round_trip(self, rule):
        clone = rule_from_dict(rule.to_dict())
        assert type(clone) is type(rule)
        arr_a = rule.weights_array(16)
        arr_b = clone.weights_array(16)
        np.testing.assert_array_equal(arr_a, arr_b)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            rule_from_dict({"kind": "pps"})

    def test_missing_kind(self):
        with pytest.raises(ParameterError):
            rule_from_dict({"n": 4})


class TestTruncationDepth:
    def test_frozen_reference_depth(self):
        # smallest d with u(B) delta^d / (1 - delta) < 1e-6 at
        # B=1000, delta=0.999, alpha=0.5; direct iteration gives 24166
        params = PoolParams(p=1e-3, block_reward=1000.0, delta=0.999)
        u = PowerUtility(alpha=0.5)
        d = truncation_depth(Geometric(c=0.0199, r=0.9801), params, u, eps=1e-6)
        assert d == 24166

    def test_tail_property(self):
        params = PoolParams(p=1e-3, block_reward=1000.0, delta=0.999)
        u = PowerUtility(alpha=0.5)
        for eps in (1e-6, 1e-9, 1e-12):
            d = truncation_depth(Geometric(c=0.0199, r=0.9801), params, u, eps=eps)
            bound = u(params.block_reward) * params.delta**d / (1.0 - params.delta)
            prev = u(params.block_reward) * params.delta ** (d - 1) / (1.0 - params.delta)
            assert bound < eps
            assert prev >= eps  # minimality

    def test_finite_window_caps_depth(self):
        params = PoolParams(p=1e-3, block_reward=1000.0, delta=0.999)
        u = PowerUtility(alpha=0.5)
        assert truncation_depth(Pplns(10), params, u, eps=1e-30) == 10
        assert truncation_depth(Solo(), params, u, eps=1e-30) == 1

    def test_loose_eps_shrinks_window(self):
        params = PoolParams(p=1e-3, block_reward=1000.0, delta=0.999)
        u = PowerUtility(alpha=0.5)
        d = truncation_depth(Pplns(50_000), params, u, eps=1e-9)
        assert 1 <= d < 50_000

    def test_at_least_one(self):
        params = PoolParams(p=1e-3, block_reward=1000.0, delta=0.5)
        u = PowerUtility(alpha=0.5)
        assert truncation_depth(Solo(), params, u, eps=1e6) == 1


@settings(max_examples=200)
@given(
    c=st.floats(1e-6, 1.0),
    r=st.floats(1e-6, 1.0 - 1e-9, exclude_max=True),
)
def test_geometric_mass_invariant(c, r):
    mass = c / (1.0 - r)
    if mass > 1.0 + 1e-12:
        with pytest.raises(PonziRuleError):
            Geometric(c=c, r=r)
    else:
        rule = Geometric(c=c, r=r)
        assert rule.mass() == pytest.approx(mass, rel=1e-12)
        # weights never increase with offset
        arr = rule.weights_array(64)
        assert np.all(np.diff(arr) <= 0.0)


@settings(max_examples=200)
@given(weights=st.lists(st.floats(0.0, 0.2), min_size=1, max_size=12))
def test_custom_mass_invariant(weights):
    total = math.fsum(weights)
    if total > 1.0 + 1e-12:
        with pytest.raises(PonziRuleError):
            Custom(weights=tuple(weights))
    else:
        rule = Custom(weights=tuple(weights))
        assert rule.mass() == pytest.approx(total, abs=1e-15)
        assert rule.window() == len(weights)
