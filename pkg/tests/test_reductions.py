from __future__ import annotations

import itertools

import numpy as np
import pytest

from fullcorr.combinatorial import local_bound, svetlichny_bound
from fullcorr.errors import PreconditionError
from fullcorr.scenario import (
    CoefficientFunction,
    Scenario,
    bkp_form,
    bkp_to_omega,
    build_general,
    build_omega,
    expand,
    reduce_to_bkp,
    reduce_to_svetlichny_cglmp,
    svetlichny_cglmp_form,
    svetlichny_cglmp_to_omega,
)

BKP_CASES = [(m, k) for m in range(2, 5) for k in range(2, 5)]
SVET_CASES = [(n, k) for n in range(2, 5) for k in range(2, 4)]


def chained_value(m, k, A, Bp):
    """Chained BKP sum for explicit outputs A_x, B'_y (independent of the tensor code)."""
    total = sum((A[x] - Bp[x]) % k for x in range(m))
    total += sum((Bp[x - 1] - A[x]) % k for x in range(1, m))
    total += (Bp[m - 1] - A[0] - 1) % k
    return total


def omega_value_deterministic(m, k, A, B):
    expr = build_omega(Scenario(2, m, k))
    arr = expr.coefficient_array()
    return sum(arr[x, y, (A[x] + B[y]) % k] for x in range(m) for y in range(m))


@pytest.mark.parametrize("m,k", BKP_CASES)
def test_bkp_relabelling_matches_chained_form(m, k):
    expr = build_omega(Scenario(2, m, k))
    relabelled = reduce_to_bkp(expr)
    assert relabelled == bkp_form(m, k)
    assert relabelled.signs == (1, -1)


@pytest.mark.parametrize("m,k", BKP_CASES)
def test_bkp_round_trip(m, k):
    expr = build_omega(Scenario(2, m, k))
    assert bkp_to_omega(reduce_to_bkp(expr)) == expand(expr)


@pytest.mark.parametrize("m,k", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_bkp_pointwise_on_deterministic_outputs(m, k):
    # every deterministic assignment gives the same value before and after relabelling
    for A in itertools.product(range(k), repeat=m):
        for B in itertools.product(range(k), repeat=m):
            Bp = [(-B[0]) % k] + [(1 - B[m - y]) % k for y in range(1, m)]
            assert omega_value_deterministic(m, k, A, B) == chained_value(m, k, A, Bp)


@pytest.mark.parametrize("m,k", [(2, 2), (3, 3), (4, 2)])
def test_bkp_tensor_keeps_local_bound(m, k):
    assert local_bound(reduce_to_bkp(build_omega(Scenario(2, m, k)))).value == k - 1


@pytest.mark.parametrize("n,k", SVET_CASES)
def test_svetlichny_cglmp_relabelling(n, k):
    expr = build_omega(Scenario(n, 2, k))
    relabelled = reduce_to_svetlichny_cglmp(expr)
    assert relabelled == svetlichny_cglmp_form(n, k)
    assert svetlichny_cglmp_to_omega(relabelled) == expand(expr)


@pytest.mark.parametrize("n,k", [(3, 2), (3, 3)])
def test_svetlichny_cglmp_tensor_keeps_bounds(n, k):
    expr = build_omega(Scenario(n, 2, k))
    relabelled = reduce_to_svetlichny_cglmp(expr)
    assert svetlichny_bound(relabelled).value == svetlichny_bound(expr).value
    assert local_bound(relabelled).value == local_bound(expr).value


def test_reductions_for_general_tables_round_trip(rng):
    table = rng.integers(-3, 4, size=(3, 3))
    expr = build_general(Scenario(2, 3, 3), CoefficientFunction(table))
    assert bkp_to_omega(reduce_to_bkp(expr)) == expand(expr)
    expr2 = build_general(Scenario(3, 2, 3), CoefficientFunction(rng.normal(size=(2, 3))))
    assert svetlichny_cglmp_to_omega(reduce_to_svetlichny_cglmp(expr2)) == expand(expr2)


def test_reduction_preconditions():
    with pytest.raises(PreconditionError):
        reduce_to_bkp(build_omega(Scenario(3, 2, 2)))
    with pytest.raises(PreconditionError):
        reduce_to_svetlichny_cglmp(build_omega(Scenario(2, 3, 2)))


def test_reduction_leaves_expression_unchanged():
    expr = build_omega(Scenario(2, 3, 3))
    before = expr.coefficient_array().copy()
    reduce_to_bkp(expr)
    assert np.array_equal(before, expr.coefficient_array())
