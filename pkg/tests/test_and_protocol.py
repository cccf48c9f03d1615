import math

import numpy as np
import pytest

from mlqcc.and_protocol import AndParams, and_truth, build_and_protocol, expected_error
from mlqcc.protocol import qcc, u0, validate


@pytest.mark.parametrize("r", [1, 2, 5, 8])
def test_parameters(r):
    prm = AndParams.from_r(r)
    assert prm.k == 4 * r - 1
    assert prm.theta == pytest.approx(math.pi / (8 * r))
    u = prm.u_v
    assert np.allclose(u @ u, np.eye(2))
    assert np.allclose(u, u.conj().T)


def test_reflection_rotates_by_two_theta():
    prm = AndParams.from_r(3)
    assert np.allclose(prm.z @ prm.u_v @ np.array([1.0, 0.0]), [math.cos(2 * prm.theta), -math.sin(2 * prm.theta)])


@pytest.mark.parametrize("r", range(1, 9))
def test_valid_and_costs(r):
    p = build_and_protocol(r)
    assert validate(p) == []
    assert qcc(p) == 4 * r - 1


@pytest.mark.parametrize("r", range(1, 9))
def test_exact_on_every_input(r):
    errs = expected_error(r)
    assert set(errs) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert max(errs.values()) <= 1e-12


def test_and_truth():
    assert [and_truth(x, y) for x in (0, 1) for y in (0, 1)] == [0, 0, 0, 1]


def test_larger_r_still_builds():
    assert qcc(build_and_protocol(12)) == 47


@pytest.mark.parametrize("r", [0, -1, 1.5])
def test_r_out_of_range(r):
    with pytest.raises(ValueError):
        AndParams.from_r(r)
