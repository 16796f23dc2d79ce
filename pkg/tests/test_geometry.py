import math

import numpy as np
import pytest

from fleetsafe.geometry import (
    S,
    DegenerateGeometryError,
    bearing,
    mat_norm_2x2,
    rot,
    wrap_angle,
)


def test_rot_identity():
    assert np.allclose(rot(0.0), np.eye(2), atol=1e-15)


def test_rot_quarter_turn_is_s():
    assert np.allclose(rot(math.pi / 2), S, atol=1e-15)


def test_rot_unit_vector():
    v = rot(math.pi / 4) @ np.array([1.0, 0.0])
    assert np.allclose(v, [math.sqrt(2) / 2, math.sqrt(2) / 2], atol=1e-15)


def test_rot_orthonormal_det_one():
    rng = np.random.RandomState(7)
    for theta in rng.uniform(-10, 10, size=200):
        m = rot(theta)
        assert np.allclose(m.T @ m, np.eye(2), atol=1e-12)
        assert abs(np.linalg.det(m) - 1.0) < 1e-12


def test_wrap_angle_examples():
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi, abs=1e-12)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi, abs=1e-12)
    assert wrap_angle(0.1) == 0.1  # in-range values pass through bit-exactly


def test_wrap_angle_range_and_congruence():
    rng = np.random.RandomState(3)
    for theta in rng.uniform(-50, 50, size=1000):
        w = wrap_angle(theta)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-9)
        assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-9)


def test_bearing_examples():
    assert bearing((0, 0), (1, 0)) == 0.0
    assert bearing((0, 0), (0, 1)) == pytest.approx(math.pi / 2)
    assert bearing((0, 0), (-1, -1)) == pytest.approx(-3 * math.pi / 4)


def test_bearing_coincident_points_raise():
    with pytest.raises(DegenerateGeometryError):
        bearing((2.0, -1.0), (2.0, -1.0))


def test_rot_composition():
    rng = np.random.RandomState(11)
    for a, b in rng.uniform(-8, 8, size=(300, 2)):
        lhs = rot(a) @ rot(b)
        rhs = rot(wrap_angle(a + b))
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_mat_norm_matches_numpy():
    rng = np.random.RandomState(5)
    for _ in range(300):
        m = rng.randn(2, 2) * rng.uniform(0.1, 100)
        assert mat_norm_2x2(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-10)


def test_identity_minus_rotation_bound():
    # ||I - R(t)||_2 = 2 sin(t/2) <= 2 sin(t) on (0, pi/2)
    thetas = np.linspace(1e-6, math.pi / 2 - 1e-6, 10_000)
    for t in thetas[:: 37]:
        nrm = mat_norm_2x2(np.eye(2) - rot(t))
        assert nrm <= 2.0 * math.sin(t) + 1e-12
    worst = max(mat_norm_2x2(np.eye(2) - rot(t)) - 2 * math.sin(t) for t in thetas)
    assert worst <= 1e-12


def test_lambda_matrix_closed_form_and_bound():
    # Lambda(t) = R(t) - R(t)^T - S R(t); its spectral norm is
    # sqrt(sin^2 t + (2 sin t - cos t)^2). The sqrt(5)*sin(t) bound used by
    # the feasibility analysis holds exactly for tan(t) >= 1/4; it is
    # violated as t -> 0, where the feasibility certificate is vacuous anyway.
    thetas = np.linspace(1e-6, math.pi / 2 - 1e-6, 10_000)
    crossover = math.atan(0.25)
    norms = []
    for t in thetas:
        lam = rot(t) - rot(t).T - S @ rot(t)
        norms.append(mat_norm_2x2(lam))
    norms = np.array(norms)
    closed = np.sqrt(np.sin(thetas) ** 2
                     + (2 * np.sin(thetas) - np.cos(thetas)) ** 2)
    # Lambda is conformal, so its singular values coincide and the closed-form
    # discriminant cancels to roundoff; 1e-7 absolute is the attainable match.
    assert np.max(np.abs(norms - closed)) < 1e-7
    mask = thetas >= crossover + 1e-9
    assert np.all(norms[mask] <= math.sqrt(5) * np.sin(thetas[mask]) + 1e-7)
    # the bound is tight at the right end of the interval and genuinely
    # fails below the crossover
    assert norms[-1] == pytest.approx(math.sqrt(5) * math.sin(thetas[-1]), rel=1e-6)
    low = thetas < crossover - 1e-3
    assert np.all(norms[low] > math.sqrt(5) * np.sin(thetas[low]))
