import numpy as np
import numpy.testing as npt
import pytest

from projdyn.forces import braden_field, kepler_field, linear_field, zero_field
from projdyn.sl2 import (
    beta_for_degree,
    lie_bracket,
    make_XYZ,
    make_Y_beta,
    random_phase_points,
    verify_beta,
    verify_sl2,
)


def test_generators_hand_values():
    X, Y, Z = make_XYZ(zero_field(2))
    npt.assert_array_equal(np.concatenate(X([1, 0], [0, 1])), [0, 1, 0, 0])
    npt.assert_array_equal(np.concatenate(Y([1, 2], [3, 4])), [1, 2, -3, -4])
    npt.assert_array_equal(np.concatenate(Z([1, 2], [3, 4])), [0, 0, 1, 2])


@pytest.mark.parametrize("field", [zero_field(2), kepler_field(2)])
def test_zx_bracket_is_y_for_any_field(field):
    X, Y, Z = make_XYZ(field)
    npt.assert_allclose(lie_bracket(Z, X, [1.0, 0.0], [0.0, 1.0]), [1.0, 0.0, 0.0, -1.0], atol=1e-9)


def test_yz_bracket_is_2z(rng):
    X, Y, Z = make_XYZ(kepler_field(3))
    q, p = rng.standard_normal(3), rng.standard_normal(3)
    npt.assert_allclose(lie_bracket(Y, Z, q, p), 2 * np.concatenate(Z(q, p)), atol=1e-9)


def test_braden_satisfies_sl2(ellipsoid3, rng):
    f = braden_field(ellipsoid3.G, ellipsoid3.A)
    rep = verify_sl2(f, random_phase_points(rng, f, 100))
    assert rep.points == 100
    assert rep.max() <= 1e-5


def test_zero_field_brackets_exact(rng):
    f = zero_field(3)
    assert verify_sl2(f, random_phase_points(rng, f, 10)).max() <= 1e-10


def test_degree_minus_two_breaks_xy():
    f = kepler_field(2)
    rep = verify_sl2(f, [(np.array([1.0, 0.0]), np.zeros(2))])
    assert rep.xy == pytest.approx(1.0, abs=1e-5)
    assert rep.yz <= 1e-5 and rep.zx <= 1e-5


@pytest.mark.parametrize("alpha, beta", [(-3, -1.0), (-2, -0.5), (1, 1.0)])
def test_beta_for_degree(alpha, beta):
    assert beta_for_degree(alpha) == beta


def test_beta_relation(ellipsoid3, rng):
    braden = braden_field(ellipsoid3.G, ellipsoid3.A)
    kepler = kepler_field(3)
    assert verify_beta(braden, random_phase_points(rng, braden, 20)) <= 1e-5
    assert verify_beta(kepler, random_phase_points(rng, kepler, 20)) <= 1e-5
    lin = linear_field(ellipsoid3.M)
    assert verify_beta(lin, random_phase_points(rng, lin, 20)) <= 1e-10


def test_linear_field_commutes_with_scaling(ellipsoid3, rng):
    lin = linear_field(ellipsoid3.M)
    X, _, _ = make_XYZ(lin)
    q, p = rng.standard_normal(3), rng.standard_normal(3)
    npt.assert_allclose(lie_bracket(X, make_Y_beta(3, 1.0), q, p), 0.0, atol=1e-10)


def test_misdeclared_degree_fails_beta():
    f = kepler_field(2).with_degree(-3.0)
    assert verify_beta(f, [(np.array([1.0, 0.0]), np.array([0.0, 0.5]))]) > 0.1
