import numpy as np
import pytest
from hypothesis import given, strategies as st

from masw.model import (DEFAULT_SWEEP, DispersionCurve, LayeredEarthModel, ModelValidationError, SweepError,
                        VelocitySweep, check_curve, check_model, materialize_sweep, validate_curve,
                        validate_model)


def test_valid_two_layer_model(two_layer):
    assert validate_model(two_layer) == []
    assert two_layer.order == 6


def test_zero_thickness_is_reported():
    m = LayeredEarthModel(1, [0.0], [1800, 1900], [300, 400], [150, 200])
    errors = validate_model(m)
    assert any("nonpositive thickness" in e for e in errors)


def test_vp_equal_vs_is_reported():
    m = LayeredEarthModel(1, [1.0], [1800, 1900], [300, 200], [150, 200])
    assert any("vp must exceed vs" in e for e in validate_model(m))


def test_length_mismatch_is_reported():
    m = LayeredEarthModel(2, [1.0], [1800, 1900, 2000], [300, 400, 500], [150, 200, 250])
    assert validate_model(m)
    with pytest.raises(ModelValidationError):
        check_model(m)


def test_all_errors_collected():
    m = LayeredEarthModel(1, [-1.0], [0.0, 1900], [100, 400], [150, 200])
    assert len(validate_model(m)) >= 3


def test_homogeneous_constructor():
    m = LayeredEarthModel.homogeneous(200.0, 346.4, 1800.0)
    assert m.n_layers == 1
    assert m.vs == (200.0, 200.0) and m.vp == (346.4, 346.4)
    assert validate_model(m) == []


@pytest.mark.parametrize("sweep,expected", [
    ((100, 400, 100), [100, 200, 300, 400]),
    ((100, 350, 100), [100, 200, 300]),
])
def test_materialize_examples(sweep, expected):
    assert materialize_sweep(VelocitySweep(*sweep)).tolist() == expected


@pytest.mark.parametrize("sweep", [(50, 50.5, 1), (100, 50, 1), (0, 100, 1), (10, 100, 0), (10, 100, -1)])
def test_materialize_rejects_bad_sweeps(sweep):
    with pytest.raises(SweepError):
        materialize_sweep(VelocitySweep(*sweep))


def test_default_sweep_has_1000_points():
    v = materialize_sweep(DEFAULT_SWEEP)
    assert len(v) == 1000 and v[0] == 50.0 and v[-1] == 549.5
    for tier in (72.0, 238.0, 256.0):
        assert tier in v.tolist()


def test_materialized_sweep_is_read_only():
    v = materialize_sweep(DEFAULT_SWEEP)
    with pytest.raises(ValueError):
        v[0] = 1.0


@given(st.floats(1, 500), st.floats(0.01, 50), st.integers(1, 400))
def test_sweep_strictly_increasing_and_bounded(v_min, step, count):
    v_max = v_min + step * count + step * 0.5
    v = materialize_sweep(VelocitySweep(v_min, v_max, step))
    assert len(v) >= 2
    assert np.all(np.diff(v) > 0)
    assert v[-1] <= v_max


def test_curve_validation():
    assert validate_curve(DispersionCurve([1.0, 2.0], [100.0, 90.0])) == []
    assert validate_curve(DispersionCurve([1.0, 2.0], [100.0]))
    assert validate_curve(DispersionCurve([-1.0], [100.0]))
    assert validate_curve(DispersionCurve([]))
    assert validate_curve(DispersionCurve([1.0]), require_velocities=False) == []
    with pytest.raises(ModelValidationError):
        check_curve(DispersionCurve([1.0], [0.0]))


def test_curve_reversed():
    c = DispersionCurve([1, 2, 3], [30, 20, 10])
    assert c.reversed() == DispersionCurve([3, 2, 1], [10, 20, 30])
    assert len(c) == 3
