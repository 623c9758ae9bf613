"""Scenarios, coefficient functions and symmetric full-correlation Bell expressions.

An expression in scenario ``(n, m, k)`` is fixed by an ``m x k`` table ``f``.
The coefficient of ``P([sum r]_k = r | s)`` is::

    f([sum s]_m, [r - floor(sum s / m)]_k)

so it only depends on the settings vector through its sum.  Coefficients are
computed lazily; the full ``m**n * k`` tensor is materialized on request
behind a size guard.

Parties are numbered from 1 in the public API; arrays are indexed from 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from . import jsonio
from .errors import (
    DimensionMismatchError,
    GuardExceededError,
    IndexOutOfRangeError,
    InvalidScenarioError,
    PreconditionError,
    SchemaError,
    VerificationError,
)

DEFAULT_EXPAND_GUARD = 10**7

#: absolute tolerance for comparing float-valued tensors
FLOAT_ATOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    """``n`` parties, ``m`` settings per party, ``k`` outcomes per setting."""

    n: int
    m: int
    k: int

    def __post_init__(self) -> None:
        for name in ("n", "m", "k"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidScenarioError(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise InvalidScenarioError(f"{name} must be at least 2, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def num_settings(self) -> int:
        return self.m**self.n

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of a coefficient tensor: one axis per party, then the residue."""
        return (self.m,) * self.n + (self.k,)

    def settings(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(range(self.m), repeat=self.n)

    def check_settings(self, s: Sequence[int]) -> tuple[int, ...]:
        s = tuple(int(x) for x in s)
        if len(s) != self.n:
            raise IndexOutOfRangeError(f"settings vector has length {len(s)}, expected {self.n}")
        if any(x < 0 or x >= self.m for x in s):
            raise IndexOutOfRangeError(f"settings {s} outside 0..{self.m - 1}")
        return s

    def check_residue(self, r: int) -> int:
        r = int(r)
        if r < 0 or r >= self.k:
            raise IndexOutOfRangeError(f"outcome residue {r} outside 0..{self.k - 1}")
        return r


class CoefficientFunction:
    """The real ``m x k`` table ``f(s, r)`` defining an expression.

    Integer input is stored as ``int64`` so that everything derived from it
    stays exact; anything else is stored as ``float64``.
    """

    __slots__ = ("_table",)

    def __init__(self, table: Sequence[Sequence[float]] | np.ndarray) -> None:
        try:
            arr = np.array(table)
        except ValueError as exc:  # ragged rows
            raise DimensionMismatchError(f"coefficient table must be rectangular: {exc}") from None
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatchError(f"coefficient table must be a non-empty m x k array, got shape {arr.shape}")
        if arr.dtype.kind in "biu":
            arr = arr.astype(np.int64)
        elif arr.dtype.kind == "f":
            arr = arr.astype(np.float64)
            if not np.all(np.isfinite(arr)):
                raise DimensionMismatchError("coefficient table entries must be finite")
        else:
            raise DimensionMismatchError(f"coefficient table must be numeric, got dtype {arr.dtype}")
        arr.setflags(write=False)
        self._table = arr

    # named constructors

    @classmethod
    def omega(cls, m: int, k: int) -> CoefficientFunction:
        """f(0, r) = r, f(1, r) = [-r]_k, zero for every other setting sum."""
        table = np.zeros((m, k), dtype=np.int64)
        r = np.arange(k)
        table[0] = r
        table[1] = (-r) % k
        return cls(table)

    @classmethod
    def product(cls, g: Sequence[float], k: int = 2) -> CoefficientFunction:
        """f(s, r) = g(s) * r."""
        g = np.asarray(g)
        if g.ndim != 1:
            raise DimensionMismatchError("g must be a vector")
        return cls(np.outer(g, np.arange(k)))

    @classmethod
    def mabk(cls, m: int = 2, k: int = 2) -> CoefficientFunction:
        """f(s, r) = delta_{s,0} * r."""
        g = np.zeros(m, dtype=np.int64)
        g[0] = 1
        return cls.product(g, k)

    @classmethod
    def cosine(cls, m: int, delta: float, k: int = 2) -> CoefficientFunction:
        """f(s, r) = cos((s - delta) pi / m) * r, any real delta."""
        s = np.arange(m)
        return cls.product(np.cos((s - float(delta)) * math.pi / m), k)

    @classmethod
    def zero(cls, m: int, k: int) -> CoefficientFunction:
        return cls(np.zeros((m, k), dtype=np.int64))

    # accessors

    @property
    def m(self) -> int:
        return self._table.shape[0]

    @property
    def k(self) -> int:
        return self._table.shape[1]

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def is_integer(self) -> bool:
        return self._table.dtype.kind == "i"

    def __call__(self, s: int, r: int) -> float:
        return self._table[s, r].item()

    def product_vector(self) -> np.ndarray | None:
        """Return ``g`` if ``f(s, r) = g(s) * r`` for every entry, else None."""
        g = self._table[:, 1] if self.k > 1 else np.zeros(self.m, dtype=self._table.dtype)
        expected = np.outer(g, np.arange(self.k))
        if self.is_integer:
            ok = np.array_equal(expected, self._table)
        else:
            ok = np.allclose(expected, self._table, rtol=0.0, atol=FLOAT_ATOL)
        return g.copy() if ok else None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoefficientFunction):
            return NotImplemented
        return self._table.shape == other._table.shape and bool(np.all(self._table == other._table))

    def __hash__(self) -> int:
        return hash((self._table.shape, self._table.astype(np.float64).tobytes()))

    def __repr__(self) -> str:
        return f"CoefficientFunction({self._table.tolist()!r})"


def _setting_sums(n: int, m: int) -> np.ndarray:
    """Array of shape (m,)*n holding sum(s) for every settings vector."""
    total = np.zeros((m,) * n, dtype=np.int64)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = m
        total = total + np.arange(m).reshape(shape)
    return total


def _check_guard(size: int, guard: int | None, what: str) -> None:
    if guard is not None and size > guard:
        raise GuardExceededError(what, size, guard)


def omega_coefficient_array(scenario: Scenario, table: np.ndarray) -> np.ndarray:
    n, m, k = scenario.n, scenario.m, scenario.k
    sums = _setting_sums(n, m)
    base = (sums % m)[..., None]
    carry = (sums // m)[..., None]
    col = (np.arange(k) - carry) % k
    return table[base, col]


@dataclass(frozen=True)
class BellExpression:
    """A scenario together with its coefficient function."""

    scenario: Scenario
    f: CoefficientFunction

    def __post_init__(self) -> None:
        if self.f.m != self.scenario.m or self.f.k != self.scenario.k:
            raise DimensionMismatchError(
                f"coefficient table is {self.f.m}x{self.f.k} but scenario has m={self.scenario.m}, k={self.scenario.k}"
            )

    @property
    def signs(self) -> tuple[int, ...]:
        """Outcome residue is the plain sum of all outcomes."""
        return (1,) * self.scenario.n

    @property
    def is_integer(self) -> bool:
        return self.f.is_integer

    def coefficient(self, s: Sequence[int], r: int) -> float:
        sc = self.scenario
        s = sc.check_settings(s)
        r = sc.check_residue(r)
        total = sum(s)
        return self.f(total % sc.m, (r - total // sc.m) % sc.k)

    def coefficient_array(self, guard: int | None = DEFAULT_EXPAND_GUARD) -> np.ndarray:
        sc = self.scenario
        _check_guard(sc.num_settings * sc.k, guard, f"expanding {sc}")
        return omega_coefficient_array(sc, self.f.table)

    def to_json(self) -> dict:
        sc = self.scenario
        return {"n": sc.n, "m": sc.m, "k": sc.k, "f": self.f.table.tolist()}

    @classmethod
    def from_json(cls, source) -> BellExpression:
        doc = jsonio.load_document(source)
        if not isinstance(doc, dict):
            raise SchemaError("expression document must be a JSON object")
        missing = {"n", "m", "k", "f"} - doc.keys()
        if missing:
            raise SchemaError(f"expression document is missing keys {sorted(missing)}")
        try:
            f = CoefficientFunction(doc["f"])
        except (ValueError, TypeError) as exc:
            raise SchemaError(f"bad coefficient table: {exc}") from exc
        return build_general(Scenario(doc["n"], doc["m"], doc["k"]), f)


class ExpandedTensor:
    """Explicit coefficient tensor indexed by ``(s, r)``.

    ``r`` is the residue ``[sum_i signs[i] * r_i]_k``.  For expressions built
    here every sign is +1; the bipartite reduction produces ``(+1, -1)``, i.e.
    a tensor keyed by the outcome difference.
    """

    def __init__(self, scenario: Scenario, values: np.ndarray, signs: Sequence[int] | None = None) -> None:
        values = np.array(values)
        if values.shape != scenario.shape:
            raise DimensionMismatchError(f"tensor shape {values.shape} does not match {scenario.shape}")
        if values.dtype.kind in "biu":
            values = values.astype(np.int64)
        else:
            values = values.astype(np.float64)
        values.setflags(write=False)
        signs = (1,) * scenario.n if signs is None else tuple(int(x) for x in signs)
        if len(signs) != scenario.n or any(x not in (1, -1) for x in signs):
            raise DimensionMismatchError(f"signs must be n={scenario.n} entries of +-1, got {signs}")
        self.scenario = scenario
        self.values = values
        self.signs = signs

    @property
    def is_integer(self) -> bool:
        return self.values.dtype.kind == "i"

    @property
    def entries(self) -> dict[tuple[tuple[int, ...], int], float]:
        out = {}
        for idx in np.ndindex(*self.values.shape):
            out[(idx[:-1], idx[-1])] = self.values[idx].item()
        return out

    def __len__(self) -> int:
        return self.values.size

    def coefficient(self, s: Sequence[int], r: int) -> float:
        s = self.scenario.check_settings(s)
        r = self.scenario.check_residue(r)
        return self.values[s + (r,)].item()

    def coefficient_array(self, guard: int | None = None) -> np.ndarray:
        return self.values

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.values))

    def total(self) -> float:
        return self.values.sum().item()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExpandedTensor):
            return NotImplemented
        if self.scenario != other.scenario or self.signs != other.signs:
            return False
        if self.is_integer and other.is_integer:
            return bool(np.array_equal(self.values, other.values))
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=FLOAT_ATOL))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        sc = self.scenario
        return f"ExpandedTensor(n={sc.n}, m={sc.m}, k={sc.k}, signs={self.signs})"

    def to_json(self) -> list[dict]:
        return [{"s": list(s), "r": r, "c": c} for (s, r), c in self.entries.items()]

    @classmethod
    def from_json(cls, source, scenario: Scenario | None = None, signs: Sequence[int] | None = None) -> ExpandedTensor:
        """Rebuild a tensor from its entry list.

        Without an explicit scenario, ``m`` and ``k`` are inferred from the
        largest labels, which is exact for a complete tensor.
        """
        doc = jsonio.load_document(source)
        if not isinstance(doc, list) or not doc:
            raise SchemaError("tensor document must be a non-empty JSON list")
        try:
            items = [(tuple(int(x) for x in e["s"]), int(e["r"]), e["c"]) for e in doc]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad tensor entry: {exc}") from exc
        if scenario is None:
            n = len(items[0][0])
            m = 1 + max(max(s) for s, _, _ in items)
            k = 1 + max(r for _, r, _ in items)
            scenario = Scenario(n, m, k)
        if len(items) != scenario.num_settings * scenario.k:
            raise SchemaError(f"expected {scenario.num_settings * scenario.k} entries, got {len(items)}")
        integer = all(isinstance(c, int) for _, _, c in items)
        values = np.zeros(scenario.shape, dtype=np.int64 if integer else np.float64)
        seen = np.zeros(scenario.shape, dtype=bool)
        for s, r, c in items:
            idx = scenario.check_settings(s) + (scenario.check_residue(r),)
            if seen[idx]:
                raise SchemaError(f"duplicate tensor entry for s={list(s)}, r={r}")
            seen[idx] = True
            values[idx] = c
        return cls(scenario, values, signs)


def build_omega(scenario: Scenario) -> BellExpression:
    return BellExpression(scenario, CoefficientFunction.omega(scenario.m, scenario.k))


def build_general(scenario: Scenario, f: CoefficientFunction) -> BellExpression:
    return BellExpression(scenario, f)


def coefficient(expr: BellExpression, s: Sequence[int], r: int) -> float:
    return expr.coefficient(s, r)


def expand(expr: BellExpression, guard: int | None = DEFAULT_EXPAND_GUARD) -> ExpandedTensor:
    return ExpandedTensor(expr.scenario, expr.coefficient_array(guard), expr.signs)


def is_omega(expr: BellExpression) -> bool:
    return expr.f == CoefficientFunction.omega(expr.scenario.m, expr.scenario.k)


# --------------------------------------------------------------------------
# party-recursive decomposition


def outcome_sum_marginal(full: np.ndarray, n: int, k: int, signs: Sequence[int] | None = None) -> np.ndarray:
    """Collapse a joint table ``P(r_1..r_n | s)`` to ``P([sum_i signs_i r_i]_k | s)``.

    ``full`` has shape ``settings_shape + (k,)*n``; the result has shape
    ``settings_shape + (k,)``.
    """
    signs = (1,) * n if signs is None else tuple(signs)
    settings_shape = full.shape[: full.ndim - n]
    res = np.zeros((k,) * n, dtype=np.int64)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = k
        res = res + signs[axis] * np.arange(k).reshape(shape)
    res = (res % k).ravel()
    flat = full.reshape(settings_shape + (k**n,))
    out = np.zeros(settings_shape + (k,), dtype=full.dtype)
    for rho in range(k):
        out[..., rho] = flat[..., res == rho].sum(axis=-1)
    return out


@dataclass(frozen=True)
class SubExpression:
    """One term of the decomposition of a parent expression over a single party.

    The decomposed party's setting ``fixed_setting`` and outcome
    ``fixed_output`` are absorbed by the first remaining party, whose input
    and output become::

        s_eff = [s_a + fixed_setting]_m
        r_eff = [r_a + fixed_output - floor((s_a + fixed_setting) / m)]_k

    after which the remaining ``n - 1`` parties see an expression with the
    same coefficient table as the parent.
    """

    parent: BellExpression
    party: int
    fixed_setting: int
    fixed_output: int

    @property
    def absorbing_party(self) -> int:
        return 2 if self.party == 1 else 1

    @property
    def remaining_parties(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.parent.scenario.n + 1) if i != self.party)

    def effective_input(self, s_abs):
        return (s_abs + self.fixed_setting) % self.parent.scenario.m

    def effective_output(self, s_abs, r_abs):
        sc = self.parent.scenario
        return (r_abs + self.fixed_output - (s_abs + self.fixed_setting) // sc.m) % sc.k

    @property
    def induced(self) -> BellExpression:
        sc = self.parent.scenario
        return build_general(Scenario(sc.n - 1, sc.m, sc.k), self.parent.f)

    def tensor(self) -> ExpandedTensor:
        """Coefficients seen by the remaining parties.

        Indexed by the remaining parties' settings (in increasing party order)
        and by their own outcome-sum residue; obtained by evaluating the
        induced expression at the substituted input and output.
        """
        induced = self.induced
        sc = induced.scenario
        k = sc.k
        grid = np.indices(sc.shape)
        s_rest = [grid[i] for i in range(sc.n)]
        rho = grid[-1]
        s_abs = s_rest[0]
        eff_s = [self.effective_input(s_abs)] + s_rest[1:]
        # only the absorbing party's output changes, so the residue shifts by the same amount
        eff_r = (rho + self.effective_output(s_abs, 0)) % k
        table = induced.coefficient_array()
        return ExpandedTensor(sc, table[tuple(eff_s) + (eff_r,)])

    def lift(self) -> ExpandedTensor:
        """This term placed in the parent's index space (zero off ``fixed_setting``)."""
        sc = self.parent.scenario
        sub = self.tensor().values
        out = np.zeros(sc.shape, dtype=sub.dtype)
        shifted = np.roll(sub, self.fixed_output, axis=-1)  # entry at parent residue r is sub[..., r - r_p]
        index = [slice(None)] * (sc.n + 1)
        index[self.party - 1] = self.fixed_setting
        out[tuple(index)] = shifted
        return ExpandedTensor(sc, out)

    def value(self, full: np.ndarray) -> float:
        """Value of this term on a joint table of the parent scenario.

        Uses the unnormalized statistics of the remaining parties jointly with
        the decomposed party's setting and outcome fixed to this term's
        labels.  Summing over outcomes and settings of the decomposed party
        gives the parent expression's value.
        """
        sc = self.parent.scenario
        n = sc.n
        if full.shape != (sc.m,) * n + (sc.k,) * n:
            raise DimensionMismatchError(f"joint table shape {full.shape} does not match scenario {sc}")
        index: list = [slice(None)] * (2 * n)
        index[self.party - 1] = self.fixed_setting
        index[n + self.party - 1] = self.fixed_output
        joint = full[tuple(index)]
        reduced = outcome_sum_marginal(joint, n - 1, sc.k)
        return float(np.sum(self.tensor().values * reduced))


def decompose(expr: BellExpression, party: int) -> list[SubExpression]:
    """Split ``expr`` into ``m * k`` sub-expressions, one per (setting, outcome) of ``party``."""
    sc = expr.scenario
    if sc.n < 3:
        raise PreconditionError(f"decomposition needs n >= 3 so that each term is at least bipartite, got n={sc.n}")
    if isinstance(party, bool) or not isinstance(party, (int, np.integer)) or not 1 <= party <= sc.n:
        raise IndexOutOfRangeError(f"party index must be in 1..{sc.n}, got {party!r}")
    return [SubExpression(expr, int(party), s, r) for s in range(sc.m) for r in range(sc.k)]


# --------------------------------------------------------------------------
# relabellings onto previously known expressions

# a party map takes integer arrays (settings, outcomes) to (new settings, new outcomes)
PartyMap = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _relabel(
    scenario: Scenario,
    source: np.ndarray,
    source_signs: Sequence[int],
    maps: Sequence[PartyMap],
    target_signs: Sequence[int],
    guard: int | None = DEFAULT_EXPAND_GUARD,
) -> ExpandedTensor:
    """Push a tensor through per-party relabellings of inputs and outputs.

    Walks the whole joint space of settings and individual outcomes, so the
    result is checked to be well defined: every joint outcome that lands on
    the same target entry must carry the same coefficient, and every target
    entry must be hit.
    """
    n, m, k = scenario.n, scenario.m, scenario.k
    _check_guard(m**n * k**n, guard, f"relabelling {scenario}")
    grid = np.indices((m,) * n + (k,) * n).reshape(2 * n, -1)
    s, r = grid[:n], grid[n:]
    src_res = sum(source_signs[i] * r[i] for i in range(n)) % k
    vals = source[tuple(s) + (src_res,)]
    new_s, new_r = [], []
    for i in range(n):
        si, ri = maps[i](s[i], r[i])
        new_s.append(si % m)
        new_r.append(ri % k)
    new_res = sum(target_signs[i] * new_r[i] for i in range(n)) % k
    idx = tuple(new_s) + (new_res,)
    out = np.zeros(scenario.shape, dtype=source.dtype)
    hit = np.zeros(scenario.shape, dtype=bool)
    out[idx] = vals
    hit[idx] = True
    if source.dtype.kind == "i":
        consistent = np.array_equal(out[idx], vals)
    else:
        consistent = np.allclose(out[idx], vals, rtol=0.0, atol=FLOAT_ATOL)
    if not consistent:
        raise VerificationError("relabelled coefficients are not a function of the target residue")
    if not hit.all():
        raise VerificationError("relabelling does not cover every target entry")
    return ExpandedTensor(scenario, out, target_signs)


def _bkp_maps(m: int, k: int) -> list[PartyMap]:
    def alice(s, r):
        return s, r

    def bob(s, r):
        # B'_0 = [-B_0]_k and B'_y = [1 - B_{m-y}]_k; the map is its own inverse
        return np.where(s == 0, 0, m - s), np.where(s == 0, -r, 1 - r)

    return [alice, bob]


def reduce_to_bkp(expr: BellExpression, guard: int | None = DEFAULT_EXPAND_GUARD) -> ExpandedTensor:
    """Relabel Bob's outputs so that ``Omega_{2,m,k}`` takes the chained BKP form.

    The result is keyed by ``[A_x - B'_y]_k`` (signs ``(+1, -1)``).
    """
    sc = expr.scenario
    if sc.n != 2:
        raise PreconditionError(f"BKP reduction requires a bipartite expression (n=2), got n={sc.n}")
    return _relabel(sc, expr.coefficient_array(guard), expr.signs, _bkp_maps(sc.m, sc.k), (1, -1), guard)


def bkp_to_omega(tensor: ExpandedTensor, guard: int | None = DEFAULT_EXPAND_GUARD) -> ExpandedTensor:
    """Inverse of :func:`reduce_to_bkp`."""
    sc = tensor.scenario
    if sc.n != 2:
        raise PreconditionError(f"BKP relabelling requires n=2, got n={sc.n}")
    return _relabel(sc, tensor.values, tensor.signs, _bkp_maps(sc.m, sc.k), (1, 1), guard)


def bkp_form(m: int, k: int) -> ExpandedTensor:
    """The chained BKP expression written term by term.

    sum_x <[A_x - B'_x]_k> + sum_{x>=1} <[B'_{x-1} - A_x]_k> + <[B'_{m-1} - A_0 - 1]_k>,
    keyed by d = [A - B']_k.
    """
    sc = Scenario(2, m, k)
    d = np.arange(k)
    values = np.zeros(sc.shape, dtype=np.int64)
    for x in range(m):
        values[x, x] += d
    for x in range(1, m):
        values[x, x - 1] += (-d) % k
    values[0, m - 1] += (-d - 1) % k
    return ExpandedTensor(sc, values, (1, -1))


def _svetlichny_cglmp_maps(n: int, inverse: bool) -> list[PartyMap]:
    sign = -1 if inverse else 1

    def first(s, r):
        return s, r + sign * (1 - s)

    def other(s, r):
        return s, r - sign * s

    return [first] + [other] * (n - 1)


def reduce_to_svetlichny_cglmp(expr: BellExpression, guard: int | None = DEFAULT_EXPAND_GUARD) -> ExpandedTensor:
    """Relabel outputs (r'_1 = [r_1 - s_1 + 1]_k, r'_i = [r_i - s_i]_k) of a two-setting expression."""
    sc = expr.scenario
    if sc.m != 2:
        raise PreconditionError(f"Svetlichny-CGLMP reduction requires two settings (m=2), got m={sc.m}")
    maps = _svetlichny_cglmp_maps(sc.n, inverse=False)
    return _relabel(sc, expr.coefficient_array(guard), expr.signs, maps, (1,) * sc.n, guard)


def svetlichny_cglmp_to_omega(tensor: ExpandedTensor, guard: int | None = DEFAULT_EXPAND_GUARD) -> ExpandedTensor:
    """Inverse of :func:`reduce_to_svetlichny_cglmp`."""
    sc = tensor.scenario
    if sc.m != 2:
        raise PreconditionError(f"Svetlichny-CGLMP relabelling requires m=2, got m={sc.m}")
    maps = _svetlichny_cglmp_maps(sc.n, inverse=True)
    return _relabel(sc, tensor.values, tensor.signs, maps, (1,) * sc.n, guard)


def svetlichny_cglmp_form(n: int, k: int) -> ExpandedTensor:
    """sum_s <[(-1)^{sum s} (sum r' + floor((sum s - 1) / 2))]_k>, keyed by [sum r']_k."""
    sc = Scenario(n, 2, k)
    sums = _setting_sums(n, 2)[..., None]
    rho = np.arange(k)
    sign = np.where(sums % 2 == 0, 1, -1)
    values = (sign * (rho + (sums - 1) // 2)) % k
    return ExpandedTensor(sc, values.astype(np.int64))


# --------------------------------------------------------------------------
# binary outcomes


def correlator_form(expr: BellExpression) -> tuple[float, np.ndarray]:
    """Rewrite a binary-outcome product-form expression in terms of correlators.

    Returns ``(constant, weights)`` with ``weights`` of shape ``(m,)*n`` such
    that the value equals ``constant + sum_s weights[s] * E_s`` where
    ``E_s = P(even sum | s) - P(odd sum | s)``.
    """
    sc = expr.scenario
    if sc.k != 2:
        raise PreconditionError(f"correlator form needs binary outcomes (k=2), got k={sc.k}")
    g = expr.f.product_vector()
    if g is None:
        raise PreconditionError("correlator form needs a product-form coefficient function f(s, r) = g(s) * r")
    n, m = sc.n, sc.m
    constant = 0.5 * m ** (n - 1) * float(np.sum(g))
    sums = _setting_sums(n, m)
    parity = np.where((sums // m) % 2 == 0, 1.0, -1.0)
    weights = -0.5 * g[sums % m] * parity
    return constant, weights
