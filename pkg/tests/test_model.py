"""Model-core: partitioned iterates, flatten/unflatten, axpy, smoothness profiles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pflopt.model import (PartitionedModel, ShapeMismatchError, SmoothnessProfile,
                          axpy_model, flatten, unflatten)


def test_flatten_concatenation_order():
    model = PartitionedModel(np.array([1.0]), [np.array([2.0]), np.array([3.0])])
    assert flatten(model).tolist() == [1.0, 2.0, 3.0]


def test_flatten_empty_shared_block():
    model = PartitionedModel(np.array([]), [np.array([5.0])])
    assert flatten(model).tolist() == [5.0]


@settings(max_examples=100, deadline=None)
@given(
    d0=st.integers(min_value=0, max_value=6),
    dms=st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=6),
    data=st.data(),
)
def test_flatten_unflatten_roundtrip(d0, dms, data):
    if d0 == 0 and sum(dms) == 0:
        dms = dms[:-1] + [1]
    total = d0 + sum(dms)
    values = np.array(
        data.draw(st.lists(st.floats(-1e6, 1e6), min_size=total, max_size=total))
    )
    model = unflatten(values, d0, dms)
    assert np.array_equal(flatten(model), values)
    back = unflatten(flatten(model), d0, dms)
    assert np.array_equal(back.w, model.w)
    for a, b in zip(back.betas, model.betas):
        assert np.array_equal(a, b)


def test_unflatten_length_mismatch():
    with pytest.raises(ShapeMismatchError):
        unflatten(np.zeros(4), 2, [1, 2])


def test_model_rejects_nonfinite():
    with pytest.raises(ValueError):
        PartitionedModel(np.array([np.nan]), [np.array([1.0])])


def test_model_rejects_all_empty():
    with pytest.raises(ValueError):
        PartitionedModel(np.array([]), [np.array([])])


class TestAxpy:
    def setup_method(self):
        self.x = PartitionedModel(np.array([1.0]), [np.array([2.0])])
        self.y = PartitionedModel(np.array([3.0]), [np.array([4.0])])

    def test_zero_scaling_returns_y(self):
        out = axpy_model(0.0, self.x, self.y)
        assert flatten(out).tolist() == [3.0, 4.0]

    def test_identity(self):
        zero = PartitionedModel(np.array([0.0]), [np.array([0.0])])
        out = axpy_model(1.0, self.x, zero)
        assert flatten(out).tolist() == [1.0, 2.0]

    def test_hand_arithmetic(self):
        out = axpy_model(2.0, self.x, self.y)
        assert flatten(out).tolist() == [5.0, 8.0]

    def test_shape_mismatch_names_block(self):
        bad = PartitionedModel(np.array([1.0]), [np.array([1.0, 2.0])])
        with pytest.raises(ShapeMismatchError, match="beta_0"):
            axpy_model(1.0, self.x, bad)


class TestSmoothnessProfile:
    def test_valid_profile(self):
        profile = SmoothnessProfile(mu=0.1, l_w=1.0, l_beta=2.0, ll_w=3.0, ll_beta=4.0, n=4)
        assert profile.mu == 0.1

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            SmoothnessProfile(mu=-1.0, l_w=1.0, l_beta=1.0, ll_w=1.0, ll_beta=1.0)

    def test_rejects_per_sample_below_full(self):
        with pytest.raises(ValueError, match="ordering"):
            SmoothnessProfile(mu=0.0, l_w=2.0, l_beta=0.0, ll_w=1.0, ll_beta=0.0, n=4)

    def test_rejects_per_sample_above_n_times_full(self):
        with pytest.raises(ValueError, match="ordering"):
            SmoothnessProfile(mu=0.0, l_w=1.0, l_beta=0.0, ll_w=5.0, ll_beta=0.0, n=4)

    def test_large_mu_warns(self):
        with pytest.warns(UserWarning, match="strong-convexity"):
            SmoothnessProfile(mu=5.0, l_w=1.0, l_beta=1.0, ll_w=1.0, ll_beta=1.0)
