import math

import numpy as np
import pytest

from bellsep.bell_operators import MeasurementSettings, chen_operator, mk_operator
from bellsep.errors import InvalidInputError
from bellsep.lhv_models import chen_claimed_bound
from bellsep.settings_opt import (
    PlanarSettings,
    operator_norm,
    optimize_mk,
    optimize_separable_v,
    power_iteration,
    xy_correlation_tensor,
)
from bellsep.tensor_core import (
    densify,
    expectation,
    ghz_state,
    maximally_mixed,
    observable_from_bloch,
    pure_state_from_bloch,
    kron_all,
    random_separable,
)


def test_norm_of_identity():
    for d in (1, 2, 8):
        assert operator_norm(np.eye(d)) == pytest.approx(1.0, abs=1e-12)


def test_norm_mk2_planar():
    assert abs(operator_norm(mk_operator(MeasurementSettings.planar([0.0, 0.0]))) - math.sqrt(2)) <= 1e-9


@pytest.mark.parametrize("n", range(2, 11))
def test_norm_mk_family(n):
    s = MeasurementSettings.planar([0.0] * n)
    assert abs(operator_norm(mk_operator(s)) - 2 ** ((n - 1) / 2)) <= 1e-9


def test_norm_matches_eigvalsh():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h = a + a.conj().T
    est = power_iteration(h)
    assert est.converged
    assert abs(est.value - np.max(np.abs(np.linalg.eigvalsh(h)))) <= 1e-9


def test_norm_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        operator_norm(np.array([[0, 1], [0, 0]]))


def test_norm_is_seeded():
    h = mk_operator(MeasurementSettings.random(3, 1))
    assert power_iteration(h, seed=4) == power_iteration(h, seed=4)


def test_xy_correlation_tensor_oracle():
    rho = densify(random_separable(2, 3, seed=9))
    sig = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]])]
    t = xy_correlation_tensor(rho)
    for p in (0, 1):
        for q in (0, 1):
            assert abs(t[p, q] - expectation(rho, np.kron(sig[p], sig[q]))) <= 1e-14


def test_optimize_mk_ghz3():
    res = optimize_mk(ghz_state(3), 3)
    assert abs(res.value - 2.0) <= 1e-6
    assert isinstance(res.argument, PlanarSettings)


def test_optimize_mk_value_is_recomputed():
    res = optimize_mk(ghz_state(4), 4, restarts=3, seed=2)
    direct = expectation(ghz_state(4), mk_operator(res.argument.settings()))
    assert abs(res.value - direct) <= 1e-14


def test_optimize_mk_maximally_mixed():
    assert abs(optimize_mk(maximally_mixed(3), 3, restarts=2).value) <= 1e-10


def test_optimize_mk_rejects_wrong_size():
    with pytest.raises(InvalidInputError):
        optimize_mk(ghz_state(2), 3)


def test_optimize_mk_separable_states_stay_local():
    for seed in range(50):
        n = 2 + seed % 3
        rho = densify(random_separable(n, 1 + seed % 8, seed=seed))
        assert optimize_mk(rho, n, restarts=2, seed=seed).value <= 1 + 1e-9


def test_optimize_mk_sweeps_monotone():
    res = optimize_mk(densify(random_separable(3, 4, seed=1)), 3, restarts=1, seed=5)
    assert all(b >= a - 1e-12 for a, b in zip(res.sweep_values, res.sweep_values[1:]))
    assert res.converged


@pytest.mark.parametrize("n", range(2, 7))
def test_bound_hierarchy(n):
    sep = optimize_mk(densify(random_separable(n, 3, seed=n)), n, restarts=2, seed=n).value
    ghz = optimize_mk(ghz_state(n), n, restarts=2, seed=n)
    top = 2 ** ((n - 1) / 2)
    norm = operator_norm(mk_operator(ghz.argument.settings()))
    assert sep <= 1 + 1e-9 <= ghz.value <= top + 1e-9
    assert ghz.value <= norm + 1e-9
    assert abs(ghz.value - norm) <= 1e-6


def test_separable_v_two_parties():
    res = optimize_separable_v(MeasurementSettings.planar([0.0, 0.0]))
    assert abs(res.value - 2.0) <= 1e-6
    assert res.argument.shape == (2, 3)


def test_separable_v_value_is_recomputed():
    s = MeasurementSettings.random(3, 7)
    res = optimize_separable_v(s, restarts=2)
    rho = kron_all([pure_state_from_bloch(b) for b in res.argument])
    assert abs(res.value - expectation(rho, chen_operator(s))) <= 1e-12
    assert all(b >= a - 1e-12 for a, b in zip(res.sweep_values, res.sweep_values[1:]))


@pytest.mark.parametrize("n", range(3, 7))
def test_separable_v_reaches_bound(n):
    res = optimize_separable_v(MeasurementSettings.planar([0.0] * n))
    assert res.value >= (1 - 1e-6) * 2 ** (n - 1)
    ratio = res.value / chen_claimed_bound()
    assert abs(ratio - 2 ** (n - 2)) <= 1e-5 * 2 ** (n - 2)


def test_separable_v_never_exceeds_bound():
    for seed in range(5):
        s = MeasurementSettings.random(3, seed)
        assert optimize_separable_v(s, restarts=2, seed=seed).value <= 4 + 1e-9


def test_separable_v_optimum_is_double_primed_eigenstate():
    # planar settings give A'' = Z, so the optimum aligns both sites along z
    res = optimize_separable_v(MeasurementSettings.planar([0.0, 0.0]))
    z = observable_from_bloch([0, 0, 1])
    zz = np.kron(z, z)
    rho = kron_all([pure_state_from_bloch(b) for b in res.argument])
    assert abs(expectation(rho, zz) - 1.0) <= 1e-6
