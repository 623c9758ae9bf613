"""Closed-form multipartite bounds and the circulant-matrix machinery behind them.

Multipartite Tsirelson and Svetlichny bounds follow from bipartite ones by
the party recursion (a factor ``m`` per extra party).  The two-outcome
biseparable bound for product-form coefficients ``f(s, r) = g(s) * r``
reduces to the spectrum of an ``m x m`` modified circulant matrix, maximized
over the third party's deterministic signs ``A_x = +-1``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .combinatorial import BISEPARABLE, CLOSED_FORM, LOCAL, SVETLICHNY, TSIRELSON, BoundReport
from .errors import DimensionMismatchError, PreconditionError, VerificationError
from .scenario import BellExpression, CoefficientFunction, Scenario, build_general, is_omega

SPECTRAL_TOL = 1e-9


def _check_m(m: int) -> int:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 2:
        raise PreconditionError(f"number of settings must be an integer >= 2, got {m!r}")
    return int(m)


def _check_n(n: int) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise PreconditionError(f"number of parties must be an integer >= 2, got {n!r}")
    return int(n)


def omega_root(m: int, j: int) -> complex:
    """exp(i pi (2j + 1) / m), a 2m-th root of unity with omega**m = -1."""
    return complex(np.exp(1j * math.pi * (2 * j + 1) / m))


def tsirelson_bound_recursive(scenario: Scenario, f: CoefficientFunction, bipartite_quantum_bound: float) -> float:
    """n-partite quantum lower bound from a valid bipartite one: m**(n-2) * bound."""
    build_general(scenario, f)
    return scenario.m ** (scenario.n - 2) * bipartite_quantum_bound


def tsirelson_bound_binary(n: int, m: int) -> float:
    """Quantum lower bound m**(n-1) * (1 - cos(pi / 2m)) on Omega_{n,m,2}."""
    n, m = _check_n(n), _check_m(m)
    return m ** (n - 1) * (1.0 - math.cos(math.pi / (2 * m)))


def svetlichny_bound_closed(scenario: Scenario, bipartite_local_bound):
    """Svetlichny bound m**(n-2) * (bipartite local bound); exact for exact input."""
    return scenario.m ** (scenario.n - 2) * bipartite_local_bound


def lemma1_max(m: int, j: int) -> float:
    """max over A in {+-1}^m of |sum_x A_x omega_j**x|, in closed form.

    Equals eta * csc(eta pi / 2m) with eta = gcd(2j + 1, m).  The angle lies
    in (0, pi/2], so the cosecant is always finite.
    """
    m = _check_m(m)
    if not 0 <= j < m:
        raise PreconditionError(f"j must lie in 0..{m - 1}, got {j}")
    eta = math.gcd(2 * j + 1, m)
    return eta / math.sin(eta * math.pi / (2 * m))


def sign_vectors(m: int) -> np.ndarray:
    """All 2**m vectors in {+1, -1}^m, shape (2**m, m)."""
    return np.array(list(itertools.product((1, -1), repeat=m)), dtype=np.float64)


def lemma1_max_bruteforce(m: int, j: int) -> float:
    """Exhaustive counterpart of :func:`lemma1_max`."""
    m = _check_m(m)
    phases = np.array([omega_root(m, j) ** x for x in range(m)])
    return float(np.max(np.abs(sign_vectors(m) @ phases)))


def _as_g(g: Sequence[float], m: int) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (m,):
        raise DimensionMismatchError(f"g must have length m={m}, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise DimensionMismatchError("g must be finite")
    return g


def diew_max_term(m: int, g: Sequence[float]) -> tuple[float, int]:
    """max_j eta_j csc(eta_j pi / 2m) |sum_s g(s) omega_j**s| and the first maximizing j."""
    m = _check_m(m)
    g = _as_g(g, m)
    terms = []
    for j in range(m):
        w = omega_root(m, j)
        terms.append(lemma1_max(m, j) * abs(sum(g[s] * w**s for s in range(m))))
    j = int(np.argmax(terms))
    return float(terms[j]), j


def diew_bound_binary(n: int, m: int, g: Sequence[float]) -> float:
    """Biseparable lower bound on the two-outcome expression with f(s, r) = g(s) * r.

    (1/2) m**(n-2) (m sum_s g(s) - max_j [eta_j csc(eta_j pi/2m) |sum_s g(s) omega_j**s|])
    """
    n, m = _check_n(n), _check_m(m)
    g = _as_g(g, m)
    term, _ = diew_max_term(m, g)
    return 0.5 * m ** (n - 2) * (m * float(np.sum(g)) - term)


@dataclass(frozen=True)
class CirculantSpec:
    m: int
    g: tuple[float, ...]
    A: tuple[int, ...]

    def __post_init__(self) -> None:
        m = _check_m(self.m)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "g", tuple(float(x) for x in _as_g(self.g, m)))
        if len(self.A) != m or any(a not in (1, -1) for a in self.A):
            raise DimensionMismatchError(f"A must be {m} signs +-1, got {self.A}")
        object.__setattr__(self, "A", tuple(int(a) for a in self.A))


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    singular_values: np.ndarray


def circulant_entries(m: int, g: np.ndarray, A: np.ndarray) -> np.ndarray:
    """M[y, z] = sum_x g([x+y+z']_m) (-1)**floor((x+y+z')/m) A_x with z' = m-1-z.

    Broadcasts over leading axes of ``A`` (shape ``(..., m)``).
    """
    x = np.arange(m)[:, None, None]
    y = np.arange(m)[None, :, None]
    zp = (m - 1 - np.arange(m))[None, None, :]
    t = x + y + zp
    kernel = g[t % m] * np.where((t // m) % 2 == 0, 1.0, -1.0)  # (x, y, z)
    return np.einsum("...x,xyz->...yz", np.asarray(A, dtype=np.float64), kernel)


def circulant_eigenvalues(m: int, g: np.ndarray, A: np.ndarray) -> np.ndarray:
    """lambda_j = (sum_x A_x omega_j**x)(sum_s g(s) omega_j**(m-1-s)) for j = 0..m-1."""
    w = np.array([omega_root(m, j) for j in range(m)])
    powers = w[:, None] ** np.arange(m)[None, :]            # (j, x)
    a_part = powers @ np.asarray(A, dtype=np.float64)
    g_part = (w[:, None] ** (m - 1 - np.arange(m))[None, :]) @ g
    return a_part * g_part


def circulant_matrix(spec: CirculantSpec) -> tuple[np.ndarray, SpectralData]:
    """Materialize M^A and check its spectrum against the closed form.

    Raises VerificationError if |lambda_j| and the numerical singular values
    disagree, or if (1, omega_j, ..., omega_j**(m-1)) is not an eigenvector,
    beyond 1e-9.
    """
    m = spec.m
    g = np.array(spec.g)
    A = np.array(spec.A, dtype=np.float64)
    M = circulant_entries(m, g, A)
    lam = circulant_eigenvalues(m, g, A)
    sv = np.linalg.svd(M, compute_uv=False)
    if not np.allclose(np.sort(np.abs(lam)), np.sort(sv), rtol=0.0, atol=SPECTRAL_TOL):
        raise VerificationError(f"closed-form |eigenvalues| {np.abs(lam)} differ from singular values {sv}")
    for j in range(m):
        v = omega_root(m, j) ** np.arange(m)
        if not np.allclose(M @ v, lam[j] * v, rtol=0.0, atol=SPECTRAL_TOL):
            raise VerificationError(f"v_{j} is not an eigenvector of M with eigenvalue {lam[j]}")
    return M, SpectralData(lam, sv)


def max_singular_value_bruteforce(m: int, g: Sequence[float]) -> float:
    """max over all 2**m sign vectors A of the largest numerical singular value of M^A."""
    m = _check_m(m)
    g = _as_g(g, m)
    mats = circulant_entries(m, g, sign_vectors(m))
    return float(np.max(np.linalg.svd(mats, compute_uv=False)))


def diew_bound_bruteforce(n: int, m: int, g: Sequence[float]) -> float:
    """:func:`diew_bound_binary` with the maximization done numerically over all A."""
    n, m = _check_n(n), _check_m(m)
    g = _as_g(g, m)
    return 0.5 * m ** (n - 2) * (m * float(np.sum(g)) - max_singular_value_bruteforce(m, g))


# --------------------------------------------------------------------------
# published values


def closed_form_bounds(expr: BellExpression) -> list[BoundReport]:
    """Every closed-form bound available for ``expr`` without enumeration.

    Covers Omega (f = f_I) for the Svetlichny family and the two-outcome
    biseparable and Tsirelson families, and any two-outcome product-form f
    for the biseparable bound.
    """
    sc = expr.scenario
    n, m, k = sc.n, sc.m, sc.k
    out: list[BoundReport] = []
    omega = is_omega(expr)
    if omega:
        if n == 2:
            out.append(BoundReport(LOCAL, k - 1, CLOSED_FORM, None, expr))
        else:
            out.append(BoundReport(SVETLICHNY, m ** (n - 2) * (k - 1), CLOSED_FORM, None, expr))
    if k == 2 and n >= 3:
        g = expr.f.product_vector()
        if g is not None:
            _, j = diew_max_term(m, g)
            out.append(BoundReport(BISEPARABLE, diew_bound_binary(n, m, g), CLOSED_FORM, {"j": j}, expr))
    if omega and k == 2:
        out.append(BoundReport(TSIRELSON, tsirelson_bound_binary(n, m), CLOSED_FORM, None, expr))
    return out


def known_bound_table(scenario: Scenario, f_name: str) -> list[BoundReport]:
    """Previously published bound values, as regression fixtures.

    Only ``f_name="fI"`` (the Omega expressions) is catalogued.  The entry
    for Tsirelson bounds of Omega_{n,2,3} (n <= 4) is a numerically reported
    value that this package does not reproduce; its witness says so.
    """
    if f_name not in ("fI", "f_I", "omega"):
        raise PreconditionError(f"no catalogue entry for coefficient function {f_name!r}")
    n, m, k = scenario.n, scenario.m, scenario.k
    expr = build_general(scenario, CoefficientFunction.omega(m, k))
    out: list[BoundReport] = []
    if n == 2:
        out.append(BoundReport(LOCAL, k - 1, CLOSED_FORM, None, expr))
    if n >= 3 and m == 2:
        out.append(BoundReport(SVETLICHNY, 2 ** (n - 2) * (k - 1), CLOSED_FORM, None, expr))
    if n >= 3 and m == 3 and k == 2:
        out.append(BoundReport(SVETLICHNY, 3 ** (n - 2), CLOSED_FORM, None, expr))
        out.append(BoundReport(BISEPARABLE, 3 ** (n - 2) * (3 - math.sqrt(3)), CLOSED_FORM, None, expr))
    if m == 2 and k == 2:
        out.append(BoundReport(TSIRELSON, 2 ** (n - 2) * (2 - math.sqrt(2)), CLOSED_FORM, None, expr))
    if m == 2 and k == 3 and n <= 4:
        value = 2 ** (n - 2) * (3 - math.sqrt(11 / 3))
        out.append(BoundReport(TSIRELSON, value, CLOSED_FORM, {"note": "numerically reported; not reproduced"}, expr))
    if not out:
        raise PreconditionError(f"no catalogue entry for {scenario} with {f_name}")
    return out
