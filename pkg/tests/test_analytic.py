from __future__ import annotations

import math

import numpy as np
import pytest

from fullcorr.analytic import (
    CirculantSpec,
    circulant_eigenvalues,
    circulant_entries,
    circulant_matrix,
    closed_form_bounds,
    diew_bound_binary,
    diew_bound_bruteforce,
    diew_max_term,
    known_bound_table,
    lemma1_max,
    lemma1_max_bruteforce,
    omega_root,
    sign_vectors,
    svetlichny_bound_closed,
    tsirelson_bound_binary,
    tsirelson_bound_recursive,
)
from fullcorr.combinatorial import BISEPARABLE, LOCAL, SVETLICHNY, TSIRELSON, local_bound, svetlichny_bound
from fullcorr.errors import DimensionMismatchError, PreconditionError
from fullcorr.scenario import CoefficientFunction, Scenario, build_general, build_omega

G_OMEGA_3 = [1.0, 1.0, 0.0]


def test_omega_root_is_antiperiodic():
    for m in range(2, 7):
        for j in range(m):
            assert abs(omega_root(m, j) ** m + 1) < 1e-12


@pytest.mark.parametrize("m", range(2, 11))
def test_sign_vector_maximum_against_exhaustive_search(m):
    for j in range(m):
        assert abs(lemma1_max(m, j) - lemma1_max_bruteforce(m, j)) < 1e-9


def test_sign_vector_maximum_small_values():
    assert abs(lemma1_max(2, 0) - math.sqrt(2)) < 1e-12  # |1 + i|
    assert abs(lemma1_max(3, 1) - 3.0) < 1e-12  # eta = 3, csc(pi/2) = 1
    with pytest.raises(PreconditionError):
        lemma1_max(3, 3)


def test_sign_vectors_shape():
    v = sign_vectors(4)
    assert v.shape == (16, 4)
    assert len({tuple(r) for r in v}) == 16


@pytest.mark.parametrize("n", range(3, 7))
def test_diew_fixture_three_settings(n):
    assert abs(diew_bound_binary(n, 3, G_OMEGA_3) - 3 ** (n - 2) * (3 - math.sqrt(3))) < 1e-12


def test_diew_general_m_for_omega():
    # for g = (1, 1, 0, ..., 0) the formula simplifies to m^{n-2}(m - cot(pi/2m))
    for m in range(3, 8):
        g = [1.0, 1.0] + [0.0] * (m - 2)
        expected = 3 ** 0 * m ** (3 - 2) * (m - 1 / math.tan(math.pi / (2 * m)))
        assert abs(diew_bound_binary(3, m, g) - expected) < 1e-10


@pytest.mark.parametrize("m", range(2, 9))
def test_diew_against_singular_value_oracle(m):
    rng = np.random.default_rng(100 + m)
    for _ in range(100):
        g = rng.normal(size=m)
        assert abs(diew_bound_binary(3, m, g) - diew_bound_bruteforce(3, m, g)) < 1e-8


def test_diew_max_term_reports_index():
    value, j = diew_max_term(3, G_OMEGA_3)
    assert 0 <= j < 3
    assert abs(value - 2 * math.sqrt(3)) < 1e-12  # |1 + e^{i pi/3}| csc(pi/6)


@pytest.mark.parametrize("m", range(2, 7))
def test_circulant_eigen_structure(m):
    rng = np.random.default_rng(m)
    for _ in range(10):
        g = rng.normal(size=m)
        A = rng.choice([-1, 1], size=m)
        M, data = circulant_matrix(CirculantSpec(m, tuple(g), tuple(int(a) for a in A)))
        assert M.shape == (m, m)
        assert np.allclose(np.sort(np.abs(data.eigenvalues)), np.sort(data.singular_values), atol=1e-9)


def test_circulant_entries_by_hand():
    # m = 2, g = (1, 0), A = (1, 1): M[y, z] = sum_x g([x+y+1-z]_2) (-1)^floor(.)
    M = circulant_entries(2, np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    assert M.tolist() == [[-1.0, 1.0], [-1.0, -1.0]]
    lam = circulant_eigenvalues(2, np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    assert np.allclose(np.sort(np.abs(lam)), [math.sqrt(2)] * 2)


def test_circulant_spec_validation():
    with pytest.raises(DimensionMismatchError):
        CirculantSpec(3, (1.0, 0.0, 0.0), (1, 0, 1))
    with pytest.raises(DimensionMismatchError):
        CirculantSpec(3, (1.0, 0.0), (1, 1, 1))


def test_tsirelson_values():
    assert abs(tsirelson_bound_binary(2, 2) - (2 - math.sqrt(2))) < 1e-15
    assert abs(tsirelson_bound_binary(4, 2) - 4 * (2 - math.sqrt(2))) < 1e-12
    assert abs(tsirelson_bound_binary(3, 3) - 9 * (1 - math.cos(math.pi / 6))) < 1e-12
    sc = Scenario(4, 3, 2)
    assert tsirelson_bound_recursive(sc, CoefficientFunction.omega(3, 2), 0.5) == 9 * 0.5


def test_svetlichny_closed_form_agrees_with_enumeration():
    for m, k in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        sc = Scenario(3, m, k)
        exact = svetlichny_bound(build_omega(sc)).value
        bip = local_bound(build_omega(Scenario(2, m, k))).value
        assert svetlichny_bound_closed(sc, bip) == exact


def test_bound_chain_for_three_settings():
    # quantum <= biseparable <= local, and Svetlichny <= biseparable here
    n, m = 3, 3
    expr = build_omega(Scenario(n, m, 2))
    b = diew_bound_binary(n, m, G_OMEGA_3)
    assert tsirelson_bound_binary(n, m) <= b <= local_bound(expr).value
    assert svetlichny_bound(expr).value <= b


def test_closed_form_bounds_listing():
    kinds = {r.kind for r in closed_form_bounds(build_omega(Scenario(3, 3, 2)))}
    assert kinds == {SVETLICHNY, BISEPARABLE, TSIRELSON}
    kinds = {r.kind for r in closed_form_bounds(build_omega(Scenario(2, 3, 3)))}
    assert kinds == {LOCAL}
    mabk = build_general(Scenario(3, 2, 2), CoefficientFunction.mabk(2, 2))
    assert {r.kind for r in closed_form_bounds(mabk)} == {BISEPARABLE}


def test_known_bound_table_entries():
    table = known_bound_table(Scenario(2, 2, 2), "fI")
    values = {r.kind: r.value for r in table}
    assert values[LOCAL] == 1
    assert abs(values[TSIRELSON] - (2 - math.sqrt(2))) < 1e-15
    three = {r.kind: r.value for r in known_bound_table(Scenario(4, 3, 2), "fI")}
    assert three[SVETLICHNY] == 9
    assert abs(three[BISEPARABLE] - 9 * (3 - math.sqrt(3))) < 1e-12
    unreproduced = [r for r in known_bound_table(Scenario(3, 2, 3), "fI") if r.kind == TSIRELSON]
    assert unreproduced and "not reproduced" in unreproduced[0].witness["note"]
    with pytest.raises(PreconditionError):
        known_bound_table(Scenario(2, 2, 2), "mabk")


def test_known_table_consistent_with_enumeration():
    for params in [(2, 2, 2), (2, 3, 3), (3, 2, 2), (3, 2, 3), (3, 3, 2)]:
        sc = Scenario(*params)
        expr = build_omega(sc)
        for r in known_bound_table(sc, "fI"):
            if r.kind == LOCAL:
                assert local_bound(expr).value == r.value
            if r.kind == SVETLICHNY:
                assert svetlichny_bound(expr).value == r.value


def test_parameter_checks():
    with pytest.raises(PreconditionError):
        tsirelson_bound_binary(1, 2)
    with pytest.raises(PreconditionError):
        diew_bound_binary(3, 1, [1.0])
    with pytest.raises(DimensionMismatchError):
        diew_bound_binary(3, 3, [1.0, 1.0])
