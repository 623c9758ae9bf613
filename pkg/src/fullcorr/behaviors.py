"""Behaviors: conditional outcome statistics that expressions are evaluated on.

The canonical form is the reduced table ``P([sum r]_k = rho | s)`` with
shape ``(m,)*n + (k,)``.  A joint table ``P(r_1..r_n | s)`` with shape
``(m,)*n + (k,)*n`` may be attached.  It is only needed for no-signaling
checks and for statistics that condition on individual outcomes.

File schema (JSON)::

    {"n": 2, "m": 2, "k": 2,
     "reduced": {"0,0": [p0, p1], "0,1": [...], ...},
     "full":    {"0,0": [p(0,0), p(0,1), p(1,0), p(1,1)], ...}}   # optional

Joint rows list outcome tuples in lexicographic order, first party most
significant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np

from . import jsonio
from .combinatorial import (
    BoundReport,
    DeterministicStrategy,
    GroupedStrategy,
    strategy_residues,
)
from .errors import (
    DimensionMismatchError,
    NormalizationError,
    PreconditionError,
    ReductionMismatchError,
    SchemaError,
    ValidationError,
)
from .scenario import BellExpression, ExpandedTensor, Scenario, outcome_sum_marginal

VALIDITY_TOL = 1e-9


class ScenarioMismatchError(ValidationError):
    pass


class BoundMismatchError(ValidationError):
    pass


def _settings_key(s: Sequence[int]) -> str:
    return ",".join(str(int(x)) for x in s)


@dataclass(frozen=True)
class Behavior:
    scenario: Scenario
    reduced: np.ndarray
    full: np.ndarray | None = None

    def __post_init__(self) -> None:
        sc = self.scenario
        reduced = np.array(self.reduced, dtype=np.float64)
        if reduced.shape != sc.shape:
            raise DimensionMismatchError(f"reduced table has shape {reduced.shape}, expected {sc.shape}")
        _check_distribution(reduced, sc.n, "reduced")
        full = None
        if self.full is not None:
            full = np.array(self.full, dtype=np.float64)
            expected = (sc.m,) * sc.n + (sc.k,) * sc.n
            if full.shape != expected:
                raise DimensionMismatchError(f"joint table has shape {full.shape}, expected {expected}")
            _check_distribution(full.reshape((sc.m,) * sc.n + (-1,)), sc.n, "full")
            mismatch = np.abs(outcome_sum_marginal(full, sc.n, sc.k) - reduced)
            if mismatch.max() > VALIDITY_TOL:
                bad = np.unravel_index(int(np.argmax(mismatch)), mismatch.shape)
                raise ReductionMismatchError(
                    f"joint table disagrees with reduced table at s={_settings_key(bad[:-1])}, "
                    f"residue {bad[-1]} (off by {mismatch.max():.3g})"
                )
            full.setflags(write=False)
        reduced.setflags(write=False)
        object.__setattr__(self, "reduced", reduced)
        object.__setattr__(self, "full", full)

    @classmethod
    def from_full(cls, scenario: Scenario, full: np.ndarray) -> Behavior:
        full = np.asarray(full, dtype=np.float64)
        return cls(scenario, outcome_sum_marginal(full, scenario.n, scenario.k), full)

    def mix(self, other: Behavior, weight: float) -> Behavior:
        """``weight * self + (1 - weight) * other``."""
        if other.scenario != self.scenario:
            raise ScenarioMismatchError("cannot mix behaviors of different scenarios")
        reduced = weight * self.reduced + (1 - weight) * other.reduced
        full = None
        if self.full is not None and other.full is not None:
            full = weight * self.full + (1 - weight) * other.full
        return Behavior(self.scenario, reduced, full)

    def to_json(self) -> dict:
        sc = self.scenario
        doc: dict[str, Any] = {"n": sc.n, "m": sc.m, "k": sc.k}
        doc["reduced"] = {_settings_key(s): self.reduced[s].tolist() for s in sc.settings()}
        if self.full is not None:
            doc["full"] = {_settings_key(s): self.full[s].ravel().tolist() for s in sc.settings()}
        return doc


def _check_distribution(table: np.ndarray, n: int, label: str) -> None:
    if not np.all(np.isfinite(table)):
        raise NormalizationError(f"{label} table contains non-finite entries")
    if table.min() < -VALIDITY_TOL:
        bad = np.unravel_index(int(np.argmin(table)), table.shape)
        raise NormalizationError(f"{label} table has negative probability at s={_settings_key(bad[:n])}")
    sums = table.sum(axis=-1)
    dev = np.abs(sums - 1.0)
    if dev.max() > VALIDITY_TOL:
        bad = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise NormalizationError(
            f"{label} distribution for s={_settings_key(bad)} sums to {sums[bad]:.12g}, not 1"
        )


def _parse_rows(rows: Any, sc: Scenario, width: int, label: str) -> np.ndarray:
    if not isinstance(rows, dict):
        raise SchemaError(f"'{label}' must be an object keyed by comma-joined settings")
    out = np.full((sc.m,) * sc.n + (width,), np.nan)
    for key, row in rows.items():
        try:
            s = tuple(int(x) for x in str(key).split(","))
        except ValueError:
            raise SchemaError(f"'{label}' has malformed settings key {key!r}") from None
        if len(s) != sc.n or any(x < 0 or x >= sc.m for x in s):
            raise SchemaError(f"'{label}' key {key!r} is not a settings vector for n={sc.n}, m={sc.m}")
        if not isinstance(row, list) or len(row) != width:
            raise SchemaError(f"'{label}' row {key!r} must be a list of {width} probabilities")
        try:
            out[s] = np.array(row, dtype=np.float64)
        except (TypeError, ValueError):
            raise SchemaError(f"'{label}' row {key!r} contains non-numeric entries") from None
    missing = [_settings_key(s) for s in sc.settings() if np.isnan(out[s]).any()]
    if missing:
        raise SchemaError(f"'{label}' is missing settings {missing[:5]}{'...' if len(missing) > 5 else ''}")
    return out


def ingest(source: Union[str, Path, dict]) -> Behavior:
    """Parse and validate a behavior document (path, JSON text or parsed dict)."""
    try:
        doc = jsonio.load_document(source)
    except (OSError, ValueError) as exc:
        raise SchemaError(f"cannot read behavior document: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("behavior document must be a JSON object")
    for key in ("n", "m", "k"):
        if key not in doc:
            raise SchemaError(f"behavior document is missing key '{key}'")
    if "reduced" not in doc and "full" not in doc:
        raise SchemaError("behavior document needs 'reduced' (and optionally 'full')")
    try:
        sc = Scenario(doc["n"], doc["m"], doc["k"])
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc
    full = None
    if "full" in doc:
        full = _parse_rows(doc["full"], sc, sc.k**sc.n, "full").reshape((sc.m,) * sc.n + (sc.k,) * sc.n)
    if "reduced" in doc:
        reduced = _parse_rows(doc["reduced"], sc, sc.k, "reduced")
    else:
        _check_distribution(full.reshape((sc.m,) * sc.n + (-1,)), sc.n, "full")
        reduced = outcome_sum_marginal(full, sc.n, sc.k)
    return Behavior(sc, reduced, full)


@dataclass(frozen=True)
class NoSignalingVerdict:
    no_signaling: bool
    max_deviation: float
    # (party, settings of the others) where the largest deviation occurs
    worst: tuple[int, tuple[int, ...]] | None = None

    def __bool__(self) -> bool:
        return self.no_signaling


def check_no_signaling(behavior: Behavior, tol: float = VALIDITY_TOL) -> NoSignalingVerdict:
    """Each party's setting must not influence the joint statistics of the others.

    Checked by summing out one party's outcome and comparing across its
    settings; applied to every party, this implies the condition for every
    subset of parties.
    """
    if behavior.full is None:
        raise PreconditionError("no-signaling check needs a joint (full) table")
    sc = behavior.scenario
    n = sc.n
    worst_dev, worst = 0.0, None
    for i in range(n):
        marg = behavior.full.sum(axis=n + i)
        ref = np.take(marg, [0], axis=i)
        dev = np.abs(marg - ref)
        d = float(dev.max())
        if d > worst_dev:
            idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
            worst_dev, worst = d, (i + 1, tuple(int(x) for x in idx[:n]))
    return NoSignalingVerdict(worst_dev <= tol, worst_dev, worst)


def evaluate(expr: Union[BellExpression, ExpandedTensor], behavior: Behavior) -> float:
    """sum_s sum_r coefficient(s, r) * P(residue = r | s)."""
    if expr.scenario != behavior.scenario:
        raise ScenarioMismatchError(f"expression scenario {expr.scenario} differs from behavior scenario {behavior.scenario}")
    signs = tuple(expr.signs)
    if all(x == 1 for x in signs):
        table = behavior.reduced
    else:
        if behavior.full is None:
            raise PreconditionError("a signed residue needs the joint table of the behavior")
        sc = behavior.scenario
        table = outcome_sum_marginal(behavior.full, sc.n, sc.k, signs)
    return float(np.sum(expr.coefficient_array(None) * table))


def behavior_from_strategy(scenario: Scenario, strat: Union[DeterministicStrategy, GroupedStrategy]) -> Behavior:
    """Deterministic behavior of a strategy; joint table only for local strategies."""
    res = strategy_residues(scenario, strat)
    reduced = np.zeros(scenario.shape)
    np.put_along_axis(reduced, res[..., None], 1.0, axis=-1)
    full = None
    if isinstance(strat, DeterministicStrategy):
        n = scenario.n
        full = np.zeros((scenario.m,) * n + (scenario.k,) * n)
        for s in scenario.settings():
            full[s + tuple(strat.tables[i][s[i]] for i in range(n))] = 1.0
    return Behavior(scenario, reduced, full)


def uniform_behavior(scenario: Scenario, full: bool = True) -> Behavior:
    n, k = scenario.n, scenario.k
    reduced = np.full(scenario.shape, 1.0 / k)
    joint = np.full((scenario.m,) * n + (k,) * n, 1.0 / k**n) if full else None
    return Behavior(scenario, reduced, joint)


def sum_box(scenario: Scenario, target: np.ndarray) -> Behavior:
    """No-signaling box whose outcome sum is ``target[s]`` mod k, uniform otherwise.

    Any n-1 of the parties see uniformly random outcomes, whatever the
    settings.  ``target = s_1 * s_2`` gives the PR box.
    """
    n, m, k = scenario.n, scenario.m, scenario.k
    target = np.asarray(target, dtype=np.int64) % k
    if target.shape != (m,) * n:
        raise DimensionMismatchError(f"target must have shape {(m,) * n}")
    reduced = np.zeros(scenario.shape)
    np.put_along_axis(reduced, target[..., None], 1.0, axis=-1)
    sums = np.indices((k,) * n).sum(axis=0) % k
    full = (sums == target.reshape(target.shape + (1,) * n)).astype(np.float64) / k ** (n - 1)
    return Behavior(scenario, reduced, full)


def pr_box() -> Behavior:
    sc = Scenario(2, 2, 2)
    s1, s2 = np.indices((2, 2))
    return sum_box(sc, s1 * s2)


def random_no_signaling(scenario: Scenario, rng: np.random.Generator, components: int = 4) -> Behavior:
    """Random convex mixture of deterministic strategies and sum boxes (with joint table)."""
    n, m, k = scenario.n, scenario.m, scenario.k
    weights = rng.dirichlet(np.ones(components))
    full = np.zeros((m,) * n + (k,) * n)
    for w in weights:
        if rng.random() < 0.5:
            strat = DeterministicStrategy(rng.integers(0, k, size=(n, m)).tolist())
            part = behavior_from_strategy(scenario, strat)
        else:
            part = sum_box(scenario, rng.integers(0, k, size=(m,) * n))
        full = full + w * part.full
    return Behavior.from_full(scenario, full)


@dataclass(frozen=True)
class BoundVerdict:
    kind: str
    method: str
    bound: float
    margin: float
    violated: bool

    def to_json(self) -> dict:
        return {"kind": self.kind, "method": self.method, "bound": self.bound,
                "margin": self.margin, "violated": self.violated}


@dataclass(frozen=True)
class ClassificationReport:
    value: float
    verdicts: tuple[BoundVerdict, ...] = field(default_factory=tuple)

    def verdict(self, kind: str) -> BoundVerdict:
        for v in self.verdicts:
            if v.kind == kind:
                return v
        raise KeyError(kind)

    def to_json(self) -> dict:
        return {"value": self.value, "verdicts": [v.to_json() for v in self.verdicts]}


def classify(
    expr: Union[BellExpression, ExpandedTensor],
    behavior: Behavior,
    bounds: Sequence[BoundReport],
    tol: float = VALIDITY_TOL,
) -> ClassificationReport:
    """Compare the expression value with each lower bound.

    A bound is violated when the value dips below it by more than ``tol``;
    the margin is ``value - bound``.
    """
    value = evaluate(expr, behavior)
    verdicts = []
    for report in bounds:
        if report.expression is not None and report.expression != expr:
            raise BoundMismatchError(f"{report.kind} bound was computed for a different expression")
        bound = float(report.value)
        margin = value - bound
        verdicts.append(BoundVerdict(report.kind, report.method, bound, margin, value < bound - tol))
    return ClassificationReport(value, tuple(verdicts))
