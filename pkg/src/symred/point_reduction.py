"""Marsden-Weinstein point reduction through explicit per-scenario slice charts.

A scenario bundles a phase space, a canonical action, a momentum map, an
invariant Hamiltonian and a momentum value mu together with a slice chart
realizing the quotient J^{-1}(mu)/G_mu in concrete coordinates.  Reduced
symplectic pairings are evaluated by lifting reduced tangent vectors to
level-set tangent vectors (minimum-norm, tangent to J^{-1}(mu)) and applying
the ambient form; the classical identities then become residual checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import liealg
from .linalg import RANK_RCOND, min_norm_lstsq, null_space
from .momentum import InvarianceError, MomentumMap, check_invariance
from .phase import (
    ChartPoint,
    FD_STEP,
    GroupAction,
    PhaseSpaceSpec,
    ScalarField,
    TangentVector,
    flow,
    hamiltonian_vector_field,
    omega_eval,
    poisson_bracket,
)

LEVEL_TOL = 1e-12


class RankDeficiencyError(RuntimeError):
    """T_m J lost rank where a free action was assumed."""


class LevelProjectionError(RuntimeError):
    """Newton projection onto the momentum level set failed to converge."""


class LiftTangencyError(RuntimeError):
    """A lifted tangent vector failed the level-tangency or projection probe."""


class ChartDomainError(RuntimeError):
    """A reduced trajectory left the declared slice-chart domain."""


@dataclass(eq=False)
class SliceChart:
    """Concrete coordinates on the reduced space J^{-1}(mu)/G_mu.

    ``reduce_point`` must be G_mu-invariant near the level set and
    ``lift_point`` must land on J^{-1}(mu).  For charts that embed the reduced
    space in a higher-dimensional ambient vector space (``ambient_embedded``)
    the reduced coordinates satisfy a constraint and the generic reduced-flow
    integrator is not available.
    """

    reduced_dim: int
    labels: tuple[str, ...]
    reduce_point: Callable[[ChartPoint], np.ndarray]
    lift_point: Callable[[np.ndarray], ChartPoint]
    chart_differential: Callable[[ChartPoint], np.ndarray] | None = None
    in_domain: Callable[[np.ndarray], bool] | None = None
    ambient_embedded: bool = False
    constant_reduced_omega: bool = True


@dataclass(frozen=True, eq=False)
class ReducedPoint:
    coords: np.ndarray
    scenario: "ReductionScenario"

    def __post_init__(self):
        object.__setattr__(self, "coords", np.array(self.coords, dtype=float, copy=True).reshape(-1))


@dataclass(eq=False)
class ReductionScenario:
    """Everything needed to reduce, verify and reconstruct one concrete system."""

    name: str
    space: PhaseSpaceSpec
    action: GroupAction
    momentum: MomentumMap
    hamiltonian: ScalarField
    mu: np.ndarray
    slice: SliceChart | None = None
    orbit: object | None = None
    freeness: bool = True
    sample_point: Callable[[np.random.Generator], ChartPoint] | None = None
    level_sampler: Callable[[np.random.Generator], ChartPoint] | None = None
    orbit_level_sampler: Callable[[np.random.Generator], ChartPoint] | None = None
    state_labels: tuple[str, ...] = ()
    invariants: dict = field(default_factory=dict)
    default_state: ChartPoint | None = None
    default_reduced: np.ndarray | None = None
    reduced_flow: Callable | None = None     # scenario-specific reduced integrator
    reduced_gradient: Callable[[np.ndarray], np.ndarray] | None = None
    description: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mu = np.array(self.mu, dtype=float, copy=True).reshape(-1)

    # -- sampling helpers ----------------------------------------------------

    def sample_level_point(self, rng: np.random.Generator) -> ChartPoint:
        if self.level_sampler is not None:
            return self.level_sampler(rng)
        return project_to_level(self.momentum, self.mu, self.sample_point(rng))

    def level_tangent_basis(self, m: ChartPoint, rcond: float = RANK_RCOND) -> np.ndarray:
        return null_space(self.momentum.derivative(m), rcond)

    def sample_level_tangent(self, rng: np.random.Generator, m: ChartPoint) -> TangentVector:
        basis = self.level_tangent_basis(m)
        coeff = rng.normal(size=basis.shape[1])
        v = basis @ coeff
        n = np.linalg.norm(v)
        return v / n if n > 0 else v

    def validate_regular_value(self, rng: np.random.Generator, samples: int = 5,
                               rcond: float = RANK_RCOND) -> None:
        """Probe that mu is a regular value (full-rank T_m J along the level set)."""
        if not self.freeness:
            return
        for _ in range(samples):
            m = self.sample_level_point(rng)
            tj = self.momentum.derivative(m)
            s = np.linalg.svd(tj, compute_uv=False)
            if s[-1] <= rcond * s[0]:
                raise RankDeficiencyError(
                    f"momentum derivative is rank deficient on the level set of {self.name}")


# ---------------------------------------------------------------------------
# Level-set projection
# ---------------------------------------------------------------------------

def project_to_level(j: MomentumMap, mu: np.ndarray, m: ChartPoint,
                     tol: float = LEVEL_TOL, max_iter: int = 50,
                     rcond: float = RANK_RCOND) -> ChartPoint:
    """Newton retraction onto J^{-1}(mu), moving only in the row space of T_m J."""
    mu = np.asarray(mu, dtype=float)
    current = m
    for _ in range(max_iter):
        r = j.evaluate(current) - mu
        if np.max(np.abs(r)) <= tol:
            return current
        tj = j.derivative(current)
        s = np.linalg.svd(tj, compute_uv=False)
        if s[0] == 0.0 or s[-1] <= rcond * s[0]:
            raise RankDeficiencyError("momentum derivative is rank deficient at the probe point")
        step = min_norm_lstsq(tj, -r)
        current = current.space.retract(current, step)
    raise LevelProjectionError(f"no convergence onto the level set in {max_iter} iterations")


# ---------------------------------------------------------------------------
# Chart differentials and tangent lifts
# ---------------------------------------------------------------------------

def chart_differential(scenario: ReductionScenario, m: ChartPoint,
                       fd_step: float = 1e-6) -> np.ndarray:
    """Differential of the slice reduce map at m (reduced_dim x tangent_dim)."""
    chart = scenario.slice
    if chart.chart_differential is not None:
        return np.asarray(chart.chart_differential(m), dtype=float)
    dim = scenario.space.dim
    cols = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        rp = chart.reduce_point(scenario.space.retract(m, e, fd_step))
        rm = chart.reduce_point(scenario.space.retract(m, e, -fd_step))
        cols.append((np.asarray(rp, float) - np.asarray(rm, float)) / (2.0 * fd_step))
    return np.column_stack(cols)


def lift_reduced_tangent(scenario: ReductionScenario, m: ChartPoint, vbar: np.ndarray,
                         tol: float = 1e-8) -> TangentVector:
    """Minimum-norm tangent vector at m, tangent to J^{-1}(mu), projecting to vbar."""
    s = chart_differential(scenario, m)
    a = scenario.momentum.derivative(m)
    mat = np.vstack([s, a])
    rhs = np.concatenate([np.asarray(vbar, dtype=float), np.zeros(a.shape[0])])
    v = min_norm_lstsq(mat, rhs)
    scale = 1.0 + float(np.max(np.abs(rhs)))
    residual = float(np.max(np.abs(mat @ v - rhs)))
    if residual > tol * scale:
        raise LiftTangencyError(
            f"tangent lift failed the level-tangency probe (residual {residual:.3e})")
    return v


def lift_kernel_basis(scenario: ReductionScenario, m: ChartPoint,
                      rcond: float = RANK_RCOND) -> np.ndarray:
    """Directions along which lifts are ambiguous (vertical G_mu directions)."""
    s = chart_differential(scenario, m)
    a = scenario.momentum.derivative(m)
    return null_space(np.vstack([s, a]), rcond)


# ---------------------------------------------------------------------------
# Reduced symplectic form and Hamiltonian
# ---------------------------------------------------------------------------

def reduced_form(scenario: ReductionScenario, r: np.ndarray | ReducedPoint,
                 vbar: np.ndarray, wbar: np.ndarray) -> float:
    """omega_mu at the reduced point r on reduced tangent vectors vbar, wbar."""
    coords = r.coords if isinstance(r, ReducedPoint) else np.asarray(r, dtype=float)
    m = scenario.slice.lift_point(coords)
    v = lift_reduced_tangent(scenario, m, vbar)
    w = lift_reduced_tangent(scenario, m, wbar)
    return omega_eval(m, v, w)


def reduced_form_lift_spread(scenario: ReductionScenario, r: np.ndarray,
                             vbar: np.ndarray, wbar: np.ndarray,
                             rng: np.random.Generator, n_alternatives: int = 4) -> float:
    """Spread of the reduced pairing over randomized alternative lifts."""
    m = scenario.slice.lift_point(np.asarray(r, dtype=float))
    v = lift_reduced_tangent(scenario, m, vbar)
    w = lift_reduced_tangent(scenario, m, wbar)
    kernel = lift_kernel_basis(scenario, m)
    base = omega_eval(m, v, w)
    spread = 0.0
    for _ in range(n_alternatives):
        dv = kernel @ rng.normal(size=kernel.shape[1]) if kernel.shape[1] else 0.0
        dw = kernel @ rng.normal(size=kernel.shape[1]) if kernel.shape[1] else 0.0
        spread = max(spread, abs(omega_eval(m, v + dv, w + dw) - base))
    return spread


def reduced_omega_matrix(scenario: ReductionScenario, r: np.ndarray) -> np.ndarray:
    k = scenario.slice.reduced_dim
    out = np.zeros((k, k))
    eye = np.eye(k)
    for i in range(k):
        for jx in range(i + 1, k):
            out[i, jx] = reduced_form(scenario, r, eye[i], eye[jx])
            out[jx, i] = -out[i, jx]
    return out


@dataclass(eq=False)
class ReducedHamiltonian:
    """h_mu on reduced coordinates, h_mu(r) = h(lift(r))."""

    scenario: ReductionScenario
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, r: np.ndarray) -> float:
        return float(self.value(np.asarray(r, dtype=float)))

    def grad(self, r: np.ndarray, fd_step: float = 1e-6) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.gradient is not None:
            return np.asarray(self.gradient(r), dtype=float)
        out = np.empty(r.size)
        for i in range(r.size):
            e = np.zeros(r.size)
            e[i] = fd_step
            out[i] = (self.value(r + e) - self.value(r - e)) / (2.0 * fd_step)
        return out


def reduce_hamiltonian(scenario: ReductionScenario,
                       h: ScalarField | None = None,
                       rng: np.random.Generator | None = None,
                       gradient: Callable[[np.ndarray], np.ndarray] | None = None,
                       invariance_tol: float = 1e-8) -> ReducedHamiltonian:
    """Push an invariant Hamiltonian to the reduced space through the slice chart."""
    own = h is None or h is scenario.hamiltonian
    h = h if h is not None else scenario.hamiltonian
    rng = rng if rng is not None else np.random.default_rng(12345)
    pts = [scenario.sample_level_point(rng) for _ in range(4)]
    worst = check_invariance(h, scenario.action, pts, rng, tol=invariance_tol)
    if worst > invariance_tol:
        raise InvarianceError(f"function fails the invariance probe ({worst:.3e})")

    def value(r: np.ndarray) -> float:
        return h(scenario.slice.lift_point(r))

    if gradient is None and own:
        gradient = scenario.reduced_gradient
    return ReducedHamiltonian(scenario, value, gradient)


# ---------------------------------------------------------------------------
# Reduced flow and the verifier suite
# ---------------------------------------------------------------------------

def integrate_reduced(scenario: ReductionScenario, h_red: ReducedHamiltonian,
                      r0: np.ndarray, t_final: float, step: float) -> list[tuple[float, np.ndarray]]:
    """Fixed-step 4th-order integration of the reduced Hamiltonian field."""
    chart = scenario.slice
    if chart.ambient_embedded:
        raise ChartDomainError(
            f"scenario {scenario.name} uses an embedded reduced chart; "
            "use its dedicated reduced flow")
    r0 = np.asarray(r0, dtype=float)
    omega_red = reduced_omega_matrix(scenario, r0)

    def rhs(r: np.ndarray) -> np.ndarray:
        om = omega_red if chart.constant_reduced_omega else reduced_omega_matrix(scenario, r)
        return np.linalg.solve(om.T, h_red.grad(r))

    n_steps = int(round(t_final / step))
    out = [(0.0, r0.copy())]
    r = r0.copy()
    for k in range(n_steps):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * step * k1)
        k3 = rhs(r + 0.5 * step * k2)
        k4 = rhs(r + step * k3)
        r = r + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if chart.in_domain is not None and not chart.in_domain(r):
            err = ChartDomainError(f"reduced trajectory left the chart domain at step {k + 1}")
            err.partial = out
            raise err
        out.append(((k + 1) * step, r.copy()))
    return out


def verify_reduced_flow_commutes(scenario: ReductionScenario, m0: ChartPoint,
                                 t_final: float, step: float) -> float:
    """Max deviation between reduce(full flow) and the reduced flow of h_mu."""
    full = flow(scenario.hamiltonian, m0, t_final, step)
    h_red = reduce_hamiltonian(scenario)
    red = integrate_reduced(scenario, h_red, scenario.slice.reduce_point(m0), t_final, step)
    worst = 0.0
    for (_, m), (_, r) in zip(full, red):
        worst = max(worst, float(np.max(np.abs(scenario.slice.reduce_point(m) - r))))
    return worst


def verify_pullback_identity(scenario: ReductionScenario, rng: np.random.Generator,
                             n_samples: int = 100) -> float:
    """Residual of the pullback identity: omega on level tangents against omega_mu
    on their chart projections."""
    worst = 0.0
    for _ in range(n_samples):
        m = scenario.sample_level_point(rng)
        v = scenario.sample_level_tangent(rng, m)
        w = scenario.sample_level_tangent(rng, m)
        s = chart_differential(scenario, m)
        lhs = omega_eval(m, v, w)
        rhs = reduced_form(scenario, scenario.slice.reduce_point(m), s @ v, s @ w)
        worst = max(worst, abs(lhs - rhs))
    return worst


def verify_bracket_compatibility(scenario: ReductionScenario, f: ScalarField, k: ScalarField,
                                 rng: np.random.Generator, n_samples: int = 100) -> float:
    """|{f, k} at the lift - {f_mu, k_mu} at the reduced point| over samples."""
    f_red = reduce_hamiltonian(scenario, f, rng)
    k_red = reduce_hamiltonian(scenario, k, rng)
    worst = 0.0
    for _ in range(n_samples):
        m = scenario.sample_level_point(rng)
        r = scenario.slice.reduce_point(m)
        full = poisson_bracket(f, k, scenario.slice.lift_point(r))
        om = reduced_omega_matrix(scenario, r)
        xf = np.linalg.solve(om.T, f_red.grad(r))
        xk = np.linalg.solve(om.T, k_red.grad(r))
        reduced = float(xf @ om @ xk)
        worst = max(worst, abs(full - reduced))
    return worst


def dimension_report(scenario: ReductionScenario) -> dict:
    """Bookkeeping: dim M_mu = dim M - dim G - dim G_mu."""
    dim_g = scenario.action.spec.dimension
    gmu = liealg.affine_isotropy_basis(scenario.momentum.spec, scenario.mu,
                                       scenario.momentum.two_cocycle)
    dim_gmu = gmu.shape[1]
    expected = scenario.space.dim - dim_g - dim_gmu
    return {
        "dim_m": scenario.space.dim,
        "dim_g": dim_g,
        "dim_gmu": dim_gmu,
        "expected_reduced_dim": expected,
        "chart_reduced_dim": scenario.slice.reduced_dim if scenario.slice else None,
    }
