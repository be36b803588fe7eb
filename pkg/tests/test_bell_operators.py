import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_rotation
from bellsep.bell_operators import (
    MeasurementSettings,
    check_spectrum_identity,
    chen_operator,
    mk_coefficients,
    mk_operator,
    mk_operator_by_terms,
    settings_from_json,
    variance,
    vn_decomposition_check,
)
from bellsep.errors import InvalidInputError
from bellsep.settings_opt import operator_norm, optimize_mk
from bellsep.tensor_core import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    densify,
    expectation,
    ghz_state,
    maximally_mixed,
    random_separable,
)

XY = MeasurementSettings.planar
# GHZ_2 correlations in the XY plane are cos(a + b); <M_2> = sqrt2 cos(a + b + pi/4)
TSIRELSON = (-math.pi / 4, 0.0)


def brute_lhv_max(coeffs):
    n = coeffs.n_parties
    best = None
    for outs in product((1, -1), repeat=2 * n):
        value = sum(c * math.prod(outs[2 * i + k[i]] for i in range(n)) for k, c in coeffs.coeff.items())
        best = value if best is None else max(best, value)
    return best


def test_mk_coefficients_base():
    assert mk_coefficients(1).coeff == {(0,): 1, (1,): 0}


def test_mk_coefficients_chsh():
    half = Fraction(1, 2)
    assert mk_coefficients(2).coeff == {(0, 0): half, (0, 1): half, (1, 0): half, (1, 1): -half}


def test_mk_coefficients_three_parties():
    c = mk_coefficients(3)
    # 1/2 (A B C' + A B' C + A' B C - A' B' C'), expanded by hand from one recursion step
    assert c.nonzero() == {
        (0, 0, 1): Fraction(1, 2),
        (0, 1, 0): Fraction(1, 2),
        (1, 0, 0): Fraction(1, 2),
        (1, 1, 1): Fraction(-1, 2),
    }
    assert sum(abs(v) for v in c.coeff.values()) == 2
    assert brute_lhv_max(c) == 1


@pytest.mark.parametrize("n", range(1, 7))
def test_mk_coefficients_dyadic(n):
    for v in mk_coefficients(n).coeff.values():
        assert (v * 2 ** (n - 1)).denominator == 1


def test_mk_operator_single_party():
    s = MeasurementSettings(np.array([[[0, 0, 1], [1, 0, 0]]]))
    assert np.array_equal(mk_operator(s), PAULI_Z)


@pytest.mark.parametrize("n", range(1, 7))
def test_mk_operator_recursion_matches_term_sum(n):
    s = MeasurementSettings.random(n, seed=n)
    assert np.max(np.abs(mk_operator(s) - mk_operator_by_terms(s))) <= 1e-12


def test_mk_operator_tsirelson_norm():
    s = XY([0.0, 0.0])  # A = X, A' = Y on both sites
    assert abs(operator_norm(mk_operator(s)) - math.sqrt(2)) <= 1e-12


def test_mk_operator_ghz3_reaches_two():
    res = optimize_mk(ghz_state(3), 3, restarts=4, seed=0)
    s = XY(res.argument.angles)
    assert abs(expectation(ghz_state(3), mk_operator(s)) - 2.0) <= 1e-9


def test_settings_validation():
    with pytest.raises(InvalidInputError):
        MeasurementSettings(np.array([[[1, 0, 0], [1, 0, 0]]]))
    with pytest.raises(InvalidInputError):
        MeasurementSettings(np.array([[[1, 0, 0], [0, 2, 0]]]))
    with pytest.raises(InvalidInputError):
        MeasurementSettings(np.zeros((2, 3)))


def test_settings_json_forms(fixtures):
    import json

    s = settings_from_json({"n": 2, "angles": [0.0, math.pi / 2]})
    assert np.allclose(s.observable(1, 0), PAULI_Y)
    p = settings_from_json(json.loads((fixtures / "settings3_pairs.json").read_text()))
    assert p.n_parties == 3
    with pytest.raises(InvalidInputError):
        settings_from_json({"n": 2, "angles": [0.0]})


def test_double_primed_is_z_for_xy():
    s = XY([0.0])
    assert np.allclose(s.double_primed(0), PAULI_Z)


def _direct_chsh(settings):
    """The n=2 Bell operator from explicit 4x4 products."""
    A, Ap = settings.observable(0, 0), settings.observable(0, 1)
    B, Bp = settings.observable(1, 0), settings.observable(1, 1)
    return 0.5 * (np.kron(A, B) + np.kron(A, Bp) + np.kron(Ap, B) - np.kron(Ap, Bp))


def test_chen_operator_on_product_zero_state():
    s = XY([0.0, 0.0])
    zero = np.diag([1.0, 0, 0, 0])
    m = _direct_chsh(s)
    assert abs(expectation(zero, m + m @ m) - 2.0) <= 1e-12
    assert abs(expectation(zero, chen_operator(s)) - 2.0) <= 1e-12


def test_chen_operator_on_ghz_at_tsirelson_settings():
    s = XY(TSIRELSON)
    m = _direct_chsh(s)
    assert abs(expectation(ghz_state(2), m) - math.sqrt(2)) <= 1e-12
    # M^2 = I + A'' x B'' with A'' = B'' = Z, and <ZZ>_GHZ = 1
    assert np.allclose(m @ m, np.eye(4) + np.kron(PAULI_Z, PAULI_Z), atol=1e-14)
    assert abs(expectation(ghz_state(2), chen_operator(s)) - (math.sqrt(2) + 2)) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_chen_operator_on_maximally_mixed(n):
    s = MeasurementSettings.random(n, seed=10 + n)
    m = mk_operator(s)
    assert abs(expectation(maximally_mixed(n), chen_operator(s)) - np.trace(m @ m).real / 2**n) <= 1e-12


def test_variance_examples():
    assert abs(variance(np.diag([1.0, 0]), PAULI_Z)) <= 1e-15
    res = optimize_mk(ghz_state(3), 3, restarts=4, seed=1)
    m3 = mk_operator(XY(res.argument.angles))
    assert abs(variance(ghz_state(3), m3)) <= 1e-9
    m2 = mk_operator(XY([0.3, -1.1]))
    assert abs(variance(np.eye(4) / 4, m2) - np.trace(m2 @ m2).real / 4) <= 1e-12
    assert abs(variance(np.eye(4) / 4, m2) - 1.0) <= 1e-12


def test_decomposition_examples():
    zero = np.diag([1.0, 0, 0, 0])
    d = vn_decomposition_check(zero, XY([0.0, 0.0]))
    assert (d.mean, d.mean_squared) == pytest.approx((0, 0), abs=1e-15)
    assert d.variance == pytest.approx(2, abs=1e-12)
    d = vn_decomposition_check(ghz_state(2), XY(TSIRELSON))
    assert d.mean == pytest.approx(math.sqrt(2), abs=1e-12)
    assert d.mean_squared == pytest.approx(2, abs=1e-12)
    assert d.variance == pytest.approx(0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(1, 5), st.integers(0, 2**31))
def test_decomposition_identity_property(n, m, seed):
    rho = densify(random_separable(n, m, seed))
    d = vn_decomposition_check(rho, MeasurementSettings.random(n, seed))
    assert d.residual <= 1e-12


def test_spectrum_identity_examples():
    rep = check_spectrum_identity(XY([0.0, 0.0]))
    assert rep.holds
    m2sq = mk_operator(XY([0.0, 0.0])) @ mk_operator(XY([0.0, 0.0]))
    assert np.allclose(np.linalg.eigvalsh(m2sq), [0, 0, 2, 2], atol=1e-12)
    one = check_spectrum_identity(XY([0.4]))
    assert one.holds and one.cubic_residual <= 1e-15
    five = check_spectrum_identity(MeasurementSettings.random(5, seed=3))
    assert five.holds


def test_spectrum_failure_is_reported_not_raised():
    rep = check_spectrum_identity(XY([0.0, 0.0]), tol=-1.0)
    assert not rep.holds


@pytest.mark.parametrize("n", [2, 3, 4])
def test_rotation_covariance(n):
    s = MeasurementSettings.random(n, seed=100 + n)
    rng = np.random.default_rng(n)
    rotations = [random_rotation(rng) for _ in range(n)]
    rotated = np.array([[q @ v for v in pair] for q, pair in zip(rotations, s.pairs)])
    r = MeasurementSettings(rotated)
    assert abs(operator_norm(mk_operator(s)) - operator_norm(mk_operator(r))) <= 1e-9
    a, b = check_spectrum_identity(s), check_spectrum_identity(r)
    assert abs(a.cubic_residual - b.cubic_residual) <= 1e-9
    assert abs(a.square_residual - b.square_residual) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_quantum_bounds_for_any_state(n, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(2**n, 3)) @ rng.normal(size=3) + 1j * rng.normal(size=2**n)
    rank2 = rng.normal(size=(2**n, 2)) + 1j * rng.normal(size=(2**n, 2))
    rho = 0.5 * np.outer(psi, psi.conj()) / np.vdot(psi, psi).real + 0.5 * rank2 @ rank2.conj().T / np.trace(rank2 @ rank2.conj().T).real
    m = mk_operator(MeasurementSettings.random(n, seed))
    assert abs(expectation(rho, m)) <= 2 ** ((n - 1) / 2) + 1e-9
    assert expectation(rho, m @ m) <= 2 ** (n - 1) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6), st.integers(0, 2**31))
def test_separable_states_respect_lhv_bound(n, m, seed):
    rho = densify(random_separable(n, m, seed))
    assert abs(expectation(rho, mk_operator(MeasurementSettings.random(n, seed)))) <= 1 + 1e-9
