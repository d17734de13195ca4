import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projdyn.errors import DomainError
from projdyn.geometry import SymForm, random_spd
from projdyn.screens import (
    LinearScreen,
    QuadricScreen,
    on_screen_velocity,
    project_point,
    screen_residuals,
    tangent_project,
)


def test_project_point_hand_values():
    npt.assert_allclose(project_point(QuadricScreen(SymForm.identity(3)), [3, 4, 0]), [0.6, 0.8, 0.0])
    npt.assert_allclose(project_point(LinearScreen.axis(3), [2, 4, 2]), [1, 2, 1])


@pytest.mark.parametrize("screen", [QuadricScreen(SymForm.diag([1, 4])), LinearScreen([0.0, 1.0])])
def test_project_point_identity_on_screen(screen):
    q = project_point(screen, [0.3, 0.9])
    npt.assert_allclose(project_point(screen, q), q, rtol=1e-15)


def test_project_point_outside_cone():
    with pytest.raises(DomainError):
        project_point(LinearScreen([0.0, 1.0]), [1.0, -1.0])


@pytest.mark.parametrize("v, expected", [((0, 1), (0, 1)), ((1, 1), (0, 1)), ((1, 0), (0, 0))])
def test_tangent_project_unit_circle(v, expected):
    npt.assert_allclose(tangent_project(QuadricScreen(SymForm.identity(2)), [1.0, 0.0], v), expected)


def test_on_screen_velocity_kills_radial_motion():
    circle = QuadricScreen(SymForm.identity(2))
    q = np.array([2.0, 0.0])
    npt.assert_allclose(on_screen_velocity(circle, q, q), [0.0, 0.0], atol=1e-15)


def test_linear_screen_residuals_exact(rng):
    screen = LinearScreen([0.5, 1.0, 2.0])
    q = np.array([0.2, 0.3, 1.0])
    r = screen_residuals(screen, q, rng.standard_normal(3))
    assert r.euler == 0.0 or r.euler <= 1e-15
    assert r.first <= 1e-10  # central-difference roundoff floor at step 1e-5
    assert r.second == 0.0 or r.second <= 1e-10


def test_quadric_screen_residual_hand_values():
    r = screen_residuals(QuadricScreen(SymForm.diag([1, 4])), [1.0, 0.0], [0.0, 1.0])
    assert r.euler <= 1e-14
    circle = QuadricScreen(SymForm.identity(2))
    npt.assert_allclose(circle.hess([1.0, 0.0], [0.0, 1.0]), 1.0, rtol=1e-15)
    assert screen_residuals(circle, [1.0, 0.0], [0.0, 1.0]).second <= 1e-6


def test_quadric_requires_spd():
    with pytest.raises(DomainError):
        QuadricScreen(SymForm([[1.0, 0.0], [0.0, -1.0]]))


def test_zero_covector_rejected():
    with pytest.raises(ValueError):
        LinearScreen([0.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.floats(0.1, 10.0))
def test_quadric_screen_is_one_homogeneous(seed, s):
    rng = np.random.default_rng(seed)
    screen = QuadricScreen(random_spd(rng, 3))
    q, v = rng.standard_normal(3), rng.standard_normal(3)
    npt.assert_allclose(screen.h(s * q), s * screen.h(q), rtol=1e-13)
    r = screen_residuals(screen, q, v)
    scale = max(1.0, np.linalg.norm(v) ** 2 / screen.h(q))
    assert r.euler <= 1e-12 * screen.h(q)
    assert r.first <= 1e-7
    assert r.second <= 1e-6 * scale
    p = project_point(screen, q)
    npt.assert_allclose(screen.h(p), 1.0, rtol=1e-14)
    assert abs(screen.dh(p) @ tangent_project(screen, p, v)) <= 1e-12 * max(1.0, np.linalg.norm(v))
