"""Exact local, Svetlichny and G-group bounds by exhaustive enumeration.

Expressions only see the outcome-sum residue, so a coalition of parties is
described by a single table from its joint settings to a residue.  A local
strategy is the special case where every coalition is one party.

All groups but one are enumerated explicitly.  For each such choice the
remaining group's table is optimal entry by entry, since its entries for
different joint settings do not interact.  The result is the exact minimum
over all strategies.  Witnesses are the first minimizer in lexicographic
order of (enumerated tables..., optimized table).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError, GuardExceededError, PreconditionError
from .scenario import BellExpression, ExpandedTensor, Scenario

DEFAULT_ENUMERATION_GUARD = 10**8

# prefix strategies evaluated per vectorized block
_CHUNK = 1 << 14

Expression = Union[BellExpression, ExpandedTensor]

LOCAL = "local"
SVETLICHNY = "svetlichny"
G_GROUP = "g_group"
BISEPARABLE = "biseparable"
TSIRELSON = "tsirelson"
BOUND_KINDS = (LOCAL, SVETLICHNY, G_GROUP, BISEPARABLE, TSIRELSON)

EXACT = "combinatorial-exact"
CLOSED_FORM = "closed-form"
QUANTUM_ACHIEVED = "quantum-achieved-upper"
METHODS = (EXACT, CLOSED_FORM, QUANTUM_ACHIEVED)


@dataclass(frozen=True)
class DeterministicStrategy:
    """``tables[i][s]`` is party ``i+1``'s outcome for setting ``s``."""

    tables: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tables", tuple(tuple(int(x) for x in t) for t in self.tables))

    @property
    def n(self) -> int:
        return len(self.tables)

    def to_json(self) -> list[list[int]]:
        return [list(t) for t in self.tables]


@dataclass(frozen=True)
class GroupedStrategy:
    """Coalitions of parties, each answering with one outcome-sum residue.

    ``partition`` lists the groups as sorted tuples of 1-based party labels.
    ``tables[j]`` has ``m**len(partition[j])`` entries, indexed by the group's
    joint settings in lexicographic order (lowest party most significant).
    """

    partition: tuple[tuple[int, ...], ...]
    tables: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "partition", tuple(tuple(int(p) for p in g) for g in self.partition))
        object.__setattr__(self, "tables", tuple(tuple(int(x) for x in t) for t in self.tables))
        if len(self.partition) != len(self.tables):
            raise DimensionMismatchError("one response table per group is required")

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.partition)

    def to_json(self) -> dict:
        return {"partition": [list(g) for g in self.partition], "tables": [list(t) for t in self.tables]}


Strategy = Union[DeterministicStrategy, GroupedStrategy]


@dataclass
class BoundReport:
    kind: str
    value: Any
    method: str
    witness: Any = None
    # the expression the bound belongs to; not part of the serialized form
    expression: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in BOUND_KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    def to_json(self) -> dict:
        witness = self.witness
        if isinstance(witness, (DeterministicStrategy, GroupedStrategy)):
            witness = witness.to_json()
        return {"kind": self.kind, "value": self.value, "method": self.method, "witness": witness}

    @classmethod
    def from_json(cls, doc: dict) -> BoundReport:
        witness = doc.get("witness")
        if isinstance(witness, list):
            witness = DeterministicStrategy(witness)
        elif isinstance(witness, dict) and set(witness) == {"partition", "tables"}:
            witness = GroupedStrategy(witness["partition"], witness["tables"])
        return cls(doc["kind"], doc["value"], doc["method"], witness)


def _as_number(x, integer: bool):
    return int(x) if integer else float(x)


def set_partitions(n: int, num_groups: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Partitions of parties 1..n into exactly ``num_groups`` nonempty groups.

    Generated as restricted growth strings, so each partition appears once
    with its groups ordered by smallest member.
    """

    def grow(prefix: list[int], used: int) -> Iterator[list[int]]:
        i = len(prefix)
        if i == n:
            if used == num_groups:
                yield prefix
            return
        if used + (n - i) < num_groups:
            return
        for label in range(min(used + 1, num_groups)):
            yield from grow(prefix + [label], max(used, label + 1))

    for labels in grow([], 0):
        groups = [[] for _ in range(num_groups)]
        for party, label in enumerate(labels, start=1):
            groups[label].append(party)
        yield tuple(tuple(g) for g in groups)


def _grouped_tensor(values: np.ndarray, n: int, groups: Sequence[Sequence[int]]) -> np.ndarray:
    """Reshape an ``(m,)*n + (k,)`` tensor to ``(M_1, ..., M_G, k)`` with M_j = m**|G_j|."""
    order = [p - 1 for g in groups for p in g] + [n]
    m = values.shape[0]
    moved = np.transpose(values, order)
    return moved.reshape(tuple(m ** len(g) for g in groups) + (values.shape[-1],))


def _all_tables(size: int, k: int) -> np.ndarray:
    """Every map {0..size-1} -> {0..k-1}, as rows in lexicographic order."""
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(k), repeat=size)), dtype=np.int64).reshape(-1, size)


def _minimize_grouped(C: np.ndarray, k: int) -> tuple[Any, list[np.ndarray]]:
    """Exact ``min over tables t_j`` of ``sum_x C[x_1..x_G, [sum_j t_j(x_j)]_k]``.

    ``C`` has shape ``(M_1, ..., M_G, k)``.  The last group is optimized
    pointwise; all others are enumerated.  Returns the minimum and the
    lexicographically first minimizing tables.
    """
    sizes = C.shape[:-1]
    G = len(sizes)
    prefix_sizes = sizes[:-1]
    last = sizes[-1]
    P = int(np.prod(prefix_sizes, dtype=np.int64)) if prefix_sizes else 1
    # D[p, rho, x_last, d] = C[p, x_last, (rho + d) % k]
    Cflat = C.reshape(P, last, k)
    rho = np.arange(k)
    shift = (rho[:, None] + rho[None, :]) % k
    D = Cflat[:, :, shift]                    # (P, last, rho, d)
    D = np.transpose(D, (0, 2, 1, 3)).reshape(P * k, last * k)

    tables = [_all_tables(sz, k) for sz in prefix_sizes]
    counts = [t.shape[0] for t in tables]
    total = int(np.prod(counts, dtype=np.int64)) if counts else 1

    best_val = None
    best_idx = None
    best_last = None
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        B = stop - start
        if counts:
            picks = np.unravel_index(np.arange(start, stop), counts)
            R = np.zeros((B,) + tuple(prefix_sizes), dtype=np.int64)
            for j, (tab, pick) in enumerate(zip(tables, picks)):
                shape = [B] + [1] * len(prefix_sizes)
                shape[j + 1] = prefix_sizes[j]
                R = R + tab[pick].reshape(shape)
            R = (R % k).reshape(B, P)
        else:
            R = np.zeros((B, P), dtype=np.int64)
        onehot = np.zeros((B, P, k), dtype=C.dtype)
        np.put_along_axis(onehot, R[:, :, None], 1, axis=2)
        V = (onehot.reshape(B, P * k) @ D).reshape(B, last, k)
        choice = np.argmin(V, axis=2)             # first minimizing residue per setting
        vals = np.take_along_axis(V, choice[:, :, None], axis=2)[:, :, 0].sum(axis=1)
        b = int(np.argmin(vals))
        if best_val is None or vals[b] < best_val:
            best_val = vals[b]
            best_idx = start + b
            best_last = choice[b].copy()

    if counts:
        picks = np.unravel_index(best_idx, counts)
        chosen = [tables[j][int(picks[j])] for j in range(G - 1)]
    else:
        chosen = []
    chosen.append(best_last)
    return best_val, chosen


def _coefficients(expr: Expression) -> tuple[np.ndarray, tuple[int, ...], bool]:
    values = np.asarray(expr.coefficient_array(None))
    return values, tuple(expr.signs), values.dtype.kind == "i"


def _grouped_minimum(expr: Expression, groups: Sequence[Sequence[int]]) -> tuple[Any, list[np.ndarray]]:
    """Minimum for a fixed partition; tables are returned in the order of ``groups``."""
    values, _, _ = _coefficients(expr)
    sc = expr.scenario
    sizes = [sc.m ** len(g) for g in groups]
    # optimize the largest group pointwise (last of the largest on ties)
    last = max(range(len(groups)), key=lambda j: (sizes[j], j))
    order = [j for j in range(len(groups)) if j != last] + [last]
    C = _grouped_tensor(values, sc.n, [groups[j] for j in order])
    val, tabs = _minimize_grouped(C, sc.k)
    out: list[np.ndarray] = [None] * len(groups)  # type: ignore[list-item]
    for pos, j in enumerate(order):
        out[j] = tabs[pos]
    return val, out


def local_cost(scenario: Scenario) -> int:
    return (scenario.k**scenario.m) ** scenario.n


def grouped_cost(scenario: Scenario, num_groups: int) -> int:
    """Total number of grouped strategies over all partitions into ``num_groups`` groups."""
    m, k = scenario.m, scenario.k
    total = 0
    for part in set_partitions(scenario.n, num_groups):
        total += math.prod(k ** (m ** len(g)) for g in part)
    return total


def local_bound(expr: Expression, guard: int | None = DEFAULT_ENUMERATION_GUARD) -> BoundReport:
    """Minimum of ``expr`` over deterministic local strategies.

    Shared randomness only produces convex mixtures of these, and the
    expression is linear, so this is the local bound.
    """
    sc = expr.scenario
    cost = local_cost(sc)
    if guard is not None and cost > guard:
        raise GuardExceededError(f"local bound enumeration for {sc}", cost, guard)
    _, signs, integer = _coefficients(expr)
    groups = [(i,) for i in range(1, sc.n + 1)]
    val, tabs = _grouped_minimum(expr, groups)
    # a party's table holds residue contributions; convert back to its own outcomes
    outputs = [tuple(int((signs[i] * x) % sc.k) for x in tabs[i]) for i in range(sc.n)]
    return BoundReport(LOCAL, _as_number(val, integer), EXACT, DeterministicStrategy(outputs), expr)


def g_group_bound(expr: Expression, num_groups: int, guard: int | None = DEFAULT_ENUMERATION_GUARD) -> BoundReport:
    """Minimum over every partition into ``num_groups`` coalitions and every grouped strategy."""
    sc = expr.scenario
    if isinstance(num_groups, bool) or not isinstance(num_groups, (int, np.integer)) or not 2 <= num_groups <= sc.n:
        raise PreconditionError(f"number of groups must be in 2..{sc.n}, got {num_groups!r}")
    cost = grouped_cost(sc, int(num_groups))
    if guard is not None and cost > guard:
        raise GuardExceededError(f"{num_groups}-group bound enumeration for {sc}", cost, guard)
    _, _, integer = _coefficients(expr)
    best = None
    for part in set_partitions(sc.n, int(num_groups)):
        val, tabs = _grouped_minimum(expr, part)
        if best is None or val < best[0]:
            best = (val, part, tabs)
    val, part, tabs = best
    witness = GroupedStrategy(part, [tuple(int(x) for x in t) for t in tabs])
    return BoundReport(G_GROUP, _as_number(val, integer), EXACT, witness, expr)


def svetlichny_bound(expr: Expression, guard: int | None = DEFAULT_ENUMERATION_GUARD) -> BoundReport:
    """Minimum over all nontrivial bipartitions with unrestricted correlations inside each side."""
    sc = expr.scenario
    if sc.n < 3:
        raise PreconditionError(f"Svetlichny bound needs n >= 3, got n={sc.n}")
    try:
        report = g_group_bound(expr, 2, guard)
    except GuardExceededError as exc:
        raise GuardExceededError(f"Svetlichny bound enumeration for {sc}", exc.cost, exc.guard) from None
    report.kind = SVETLICHNY
    return report


def strategy_residues(scenario: Scenario, strat: Strategy, signs: Sequence[int] | None = None) -> np.ndarray:
    """Deterministic outcome-sum residue for every settings vector, shape ``(m,)*n``."""
    n, m, k = scenario.n, scenario.m, scenario.k
    signs = (1,) * n if signs is None else tuple(signs)
    res = np.zeros((m,) * n, dtype=np.int64)
    if isinstance(strat, DeterministicStrategy):
        if strat.n != n or any(len(t) != m for t in strat.tables):
            raise DimensionMismatchError(f"strategy does not fit scenario {scenario}")
        if any(x < 0 or x >= k for t in strat.tables for x in t):
            raise DimensionMismatchError(f"strategy outputs must lie in 0..{k - 1}")
        for i, table in enumerate(strat.tables):
            shape = [1] * n
            shape[i] = m
            res = res + signs[i] * np.asarray(table, dtype=np.int64).reshape(shape)
        return res % k
    if isinstance(strat, GroupedStrategy):
        members = sorted(p for g in strat.partition for p in g)
        if members != list(range(1, n + 1)):
            raise DimensionMismatchError(f"partition {strat.partition} does not cover parties 1..{n} exactly once")
        grid = np.indices((m,) * n)
        for group, table in zip(strat.partition, strat.tables):
            if len(table) != m ** len(group):
                raise DimensionMismatchError(f"group {group} needs a table of {m ** len(group)} entries")
            if any(x < 0 or x >= k for x in table):
                raise DimensionMismatchError(f"group outputs must lie in 0..{k - 1}")
            joint = np.zeros((m,) * n, dtype=np.int64)
            for p in group:
                joint = joint * m + grid[p - 1]
            res = res + np.asarray(table, dtype=np.int64)[joint]
        return res % k
    raise TypeError(f"unsupported strategy type {type(strat).__name__}")


def evaluate_on_strategy(expr: Expression, strat: Strategy):
    """Expression value on the behavior induced by a deterministic (grouped) strategy."""
    values, signs, integer = _coefficients(expr)
    res = strategy_residues(expr.scenario, strat, signs)
    total = np.take_along_axis(values, res[..., None], axis=-1).sum()
    return _as_number(total, integer)
