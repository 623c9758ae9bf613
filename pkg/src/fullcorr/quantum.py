"""Binary-outcome quantum model: GHZ state measured in the equatorial plane.

With party i measuring at phase phi[i][s] on the n-qubit GHZ state, every
n-party correlator is ``E_s = cos(sum_i phi[i][s_i])`` and all marginals are
uniform.  Expression values are minimized over the phases by multi-start
L-BFGS with analytic gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .analytic import tsirelson_bound_binary
from .behaviors import Behavior
from .errors import DimensionMismatchError, PreconditionError, ValidationError
from .scenario import BellExpression, Scenario, correlator_form, is_omega

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhaseAssignment:
    """``phi[i, s]`` is the measurement phase of party i+1 for setting s."""

    phi: np.ndarray

    def __post_init__(self) -> None:
        phi = np.array(self.phi, dtype=np.float64)
        if phi.ndim != 2 or phi.shape[0] < 1 or phi.shape[1] < 1:
            raise DimensionMismatchError(f"phase matrix must be n x m, got shape {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValidationError("phases must be finite")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def m(self) -> int:
        return self.phi.shape[1]

    def canonical(self) -> PhaseAssignment:
        return PhaseAssignment(np.mod(self.phi, TWO_PI))

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "phi": self.phi.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> PhaseAssignment:
        try:
            phi = np.array(doc["phi"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad angle document: {exc}") from exc
        if phi.shape != (doc.get("n"), doc.get("m")):
            raise DimensionMismatchError(f"phi has shape {phi.shape}, header says ({doc.get('n')}, {doc.get('m')})")
        return cls(phi)


@dataclass(frozen=True)
class QuantumValueReport:
    value: float
    angles: PhaseAssignment
    target_bound: float | None
    gap: float | None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "angles": self.angles.to_json(),
            "target_bound": self.target_bound,
            "gap": self.gap,
        }


def _phase_sums(phi: np.ndarray) -> np.ndarray:
    n, m = phi.shape
    total = np.zeros((m,) * n)
    for i in range(n):
        shape = [1] * n
        shape[i] = m
        total = total + phi[i].reshape(shape)
    return total


def ghz_correlators(angles: PhaseAssignment, scenario: Scenario | None = None) -> np.ndarray:
    """E_s = cos(sum_i phi[i][s_i]), returned with shape (m,)*n."""
    if scenario is not None and (angles.n, angles.m) != (scenario.n, scenario.m):
        raise DimensionMismatchError(f"angles are {angles.n}x{angles.m} but scenario has n={scenario.n}, m={scenario.m}")
    return np.cos(_phase_sums(angles.phi))


def behavior_from_correlators(correlators: np.ndarray, full: bool = False) -> Behavior:
    """Binary-outcome behavior with P([sum r]_2 = r | s) = (1 + (-1)**r E_s) / 2.

    With ``full=True`` the joint table of the GHZ model is attached as well:
    P(r_1..r_n | s) = (1 + (-1)**(sum r) E_s) / 2**n, which has uniform
    marginals.
    """
    E = np.asarray(correlators, dtype=np.float64)
    if E.ndim < 2 or len(set(E.shape)) != 1:
        raise DimensionMismatchError(f"correlators must have shape (m,)*n with n >= 2, got {E.shape}")
    if np.any(np.abs(E) > 1.0 + 1e-12):
        raise ValidationError(f"correlator out of range: max |E| = {np.max(np.abs(E))}")
    E = np.clip(E, -1.0, 1.0)
    n, m = E.ndim, E.shape[0]
    reduced = np.stack([(1.0 + E) / 2.0, (1.0 - E) / 2.0], axis=-1)
    joint = None
    if full:
        parity = np.indices((2,) * n).sum(axis=0) % 2
        sign = np.where(parity == 0, 1.0, -1.0)
        joint = (1.0 + E.reshape(E.shape + (1,) * n) * sign) / 2.0**n
    return Behavior(Scenario(n, m, 2), reduced, joint)


def _value_and_grad(phi: np.ndarray, constant: float, weights: np.ndarray) -> tuple[float, np.ndarray]:
    n, m = phi.shape
    theta = _phase_sums(phi)
    value = constant + float(np.sum(weights * np.cos(theta)))
    ws = -weights * np.sin(theta)
    grad = np.empty_like(phi)
    for i in range(n):
        axes = tuple(a for a in range(n) if a != i)
        grad[i] = ws.sum(axis=axes)
    return value, grad


def value_gradient(expr: BellExpression, angles: PhaseAssignment) -> np.ndarray:
    """d value / d phi[i][s], shape (n, m)."""
    constant, weights = correlator_form(expr)
    _check_angles(expr, angles)
    return _value_and_grad(angles.phi, constant, weights)[1]


def _check_angles(expr: BellExpression, angles: PhaseAssignment) -> None:
    sc = expr.scenario
    if (angles.n, angles.m) != (sc.n, sc.m):
        raise DimensionMismatchError(f"angles are {angles.n}x{angles.m} but scenario has n={sc.n}, m={sc.m}")


def _default_target(expr: BellExpression) -> float | None:
    if is_omega(expr) and expr.scenario.k == 2:
        return tsirelson_bound_binary(expr.scenario.n, expr.scenario.m)
    return None


def quantum_value(expr: BellExpression, angles: PhaseAssignment, target_bound: float | None = None) -> QuantumValueReport:
    """Value of a binary product-form expression on the GHZ model.

    The gap is measured against ``target_bound`` or, for Omega expressions,
    against the closed-form Tsirelson bound.
    """
    constant, weights = correlator_form(expr)
    _check_angles(expr, angles)
    value = constant + float(np.sum(weights * ghz_correlators(angles)))
    target = _default_target(expr) if target_bound is None else float(target_bound)
    gap = None if target is None else value - target
    return QuantumValueReport(value, angles, target, gap)


def optimize_phases(
    expr: BellExpression,
    seed: int | None = 0,
    restarts: int = 20,
    max_iters: int = 500,
    target_bound: float | None = None,
) -> QuantumValueReport:
    """Minimize the GHZ-model value over measurement phases.

    Each restart draws phases uniformly in [0, 2pi) and runs L-BFGS.  With
    ``restarts=0`` a single random draw is evaluated without descent.  The
    best restart wins, the earliest on ties; angles are reported mod 2pi.
    """
    constant, weights = correlator_form(expr)
    if restarts < 0:
        raise PreconditionError(f"restarts must be >= 0, got {restarts}")
    n, m = expr.scenario.n, expr.scenario.m
    rng = np.random.default_rng(seed)

    def fun(x: np.ndarray) -> tuple[float, np.ndarray]:
        v, g = _value_and_grad(x.reshape(n, m), constant, weights)
        return v, g.ravel()

    best_val, best_phi = None, None
    for _ in range(max(restarts, 1)):
        x0 = rng.uniform(0.0, TWO_PI, size=n * m)
        if restarts == 0:
            x = x0
        else:
            res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                           options={"maxiter": max_iters, "ftol": 1e-15, "gtol": 1e-12})
            x = res.x
        v = fun(x)[0]
        if best_val is None or v < best_val:
            best_val, best_phi = v, x.reshape(n, m)

    angles = PhaseAssignment(best_phi).canonical()
    return quantum_value(expr, angles, target_bound)
