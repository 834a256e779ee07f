"""Momentum maps for the built-in canonical actions, and their verifiers.

Covers the four classical constructions (linear momentum, angular momentum,
cotangent lifts, symplectic linear actions), the non-equivariance one-cocycle
with its induced two-cocycle and affine action, and numerical verifiers for
Noether conservation, the range/kernel identities of the momentum derivative,
infinitesimal equivariance, and the three-subspace identity used in reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import liealg
from .liealg import (
    AlgebraVector,
    CoalgebraCovector,
    GroupElement,
    LieAlgebraSpec,
    affine_generator_matrix,
    coadjoint_group,
    identity_element,
)
from .linalg import RANK_RCOND, min_norm_lstsq, null_space, principal_angle_defect, range_space, rank
from .phase import ChartPoint, GroupAction, PhaseSpaceSpec, ScalarField, omega_eval

COCYCLE_PROBE_TOL = 1e-8
INVARIANCE_TOL = 1e-8


class NonCanonicalSetupError(RuntimeError):
    """The definitional one-cocycle came out base-point dependent."""


class InvarianceError(ValueError):
    """A function that must be invariant under the action failed the probe."""


class NonLinearGeneratorError(ValueError):
    """linear_symplectic_momentum was given a generator that is not linear."""


# ---------------------------------------------------------------------------
# Momentum map container
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class MomentumMap:
    """Evaluator z -> J(z) in dual coordinates plus the analytic derivative.

    ``sigma`` is the closed-form one-cocycle when known; otherwise the
    definitional evaluator anchored at ``anchor`` is used, with consistency
    probes at the extra ``probes`` points.
    """

    spec: LieAlgebraSpec
    space: PhaseSpaceSpec
    action: GroupAction
    evaluate: Callable[[ChartPoint], np.ndarray]
    derivative: Callable[[ChartPoint], np.ndarray]
    sigma: Callable[[GroupElement], np.ndarray] | None = None
    two_cocycle: np.ndarray | None = None
    anchor: ChartPoint | None = None
    probes: tuple[ChartPoint, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.two_cocycle is None:
            d = self.spec.dimension
            self.two_cocycle = np.zeros((d, d))

    def value(self, m: ChartPoint) -> CoalgebraCovector:
        return CoalgebraCovector(self.evaluate(m), self.spec)

    def cocycle(self, g: GroupElement) -> np.ndarray:
        if self.sigma is not None:
            return np.asarray(self.sigma(g), dtype=float)
        return nonequivariance_cocycle(self, g)


def definition_residual(j: MomentumMap, m: ChartPoint, xi: np.ndarray, w: np.ndarray) -> float:
    """|omega(xi_M(m), w) - d<J, xi>(m) . w|, the defining property of J."""
    lhs = omega_eval(m, j.action.generator(xi, m), w)
    rhs = float(np.asarray(xi, float) @ j.derivative(m) @ np.asarray(w, float))
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# The four classical constructions
# ---------------------------------------------------------------------------

def linear_momentum(m: ChartPoint) -> np.ndarray:
    """Total linear momentum of an N-particle state on T*R^{3N}."""
    q, p = m.space.split_cotangent(m)
    if p.size % 3 != 0:
        raise ValueError("linear_momentum expects a 3N-dimensional configuration space")
    return p.reshape(-1, 3).sum(axis=0)


def angular_momentum(m: ChartPoint) -> np.ndarray:
    """q x p on T*R^3 in the so(3)* ~ R^3 identification."""
    q, p = m.space.split_cotangent(m)
    if q.size != 3:
        raise ValueError("angular_momentum expects T*R^3")
    return np.cross(q, p)


def cotangent_lift_momentum(base_generator: Callable[[np.ndarray, np.ndarray], np.ndarray],
                            alpha: ChartPoint, xi: np.ndarray) -> float:
    """<J(alpha), xi> = alpha(xi_Q(q)) for the lift of a base action on Q."""
    q, p = alpha.space.split_cotangent(alpha)
    return float(np.dot(p, base_generator(np.asarray(xi, float), q)))


def linear_symplectic_momentum(space: PhaseSpaceSpec,
                               generator: Callable[[np.ndarray, np.ndarray], np.ndarray],
                               v: ChartPoint, xi: np.ndarray,
                               linearity_tol: float = 1e-10) -> float:
    """<J(v), xi> = omega(xi_V(v), v)/2 for a linear symplectic action.

    The generator is probed for linearity; a nonlinear generator is rejected.
    """
    xi = np.asarray(xi, dtype=float)
    x = v.coords
    g_x = np.asarray(generator(xi, x), dtype=float)
    g_2x = np.asarray(generator(xi, 2.0 * x), dtype=float)
    scale = 1.0 + float(np.max(np.abs(g_2x)))
    if np.max(np.abs(g_2x - 2.0 * g_x)) > linearity_tol * scale:
        raise NonLinearGeneratorError("generator fails the linearity probe")
    omega = space.omega_matrix_at(v)
    return 0.5 * float(g_x @ omega @ x)


# ---------------------------------------------------------------------------
# Cocycles and the affine action
# ---------------------------------------------------------------------------

def nonequivariance_cocycle(j: MomentumMap, g: GroupElement, z: ChartPoint | None = None,
                            probe_tol: float = COCYCLE_PROBE_TOL) -> np.ndarray:
    """sigma(g) = J(g . z) - Ad*_{g^{-1}} J(z), probed for base-point independence."""
    base = z if z is not None else j.anchor
    if base is None:
        raise ValueError("momentum map has no anchor point; pass z explicitly")

    def at(point: ChartPoint) -> np.ndarray:
        jz = CoalgebraCovector(j.evaluate(point), j.spec)
        moved = j.evaluate(j.action.act(g, point))
        return moved - coadjoint_group(g, jz).coords

    value = at(base)
    for probe in j.probes:
        spread = np.max(np.abs(at(probe) - value))
        if spread > probe_tol:
            raise NonCanonicalSetupError(
                f"one-cocycle varies with the base point by {spread:.3e} (> {probe_tol:g}); "
                "the setup is not a canonical momentum map on a connected space"
            )
    return value


def sigma_cocycle_identity_check(sigma: Callable[[GroupElement], np.ndarray],
                                 g: GroupElement, h: GroupElement) -> float:
    """Residual of sigma(gh) = sigma(g) + Ad*_{g^{-1}} sigma(h) in the sup norm."""
    spec = g.spec
    lhs = np.asarray(sigma(liealg.group_multiply(g, h)), dtype=float)
    sh = CoalgebraCovector(np.asarray(sigma(h), dtype=float), spec)
    rhs = np.asarray(sigma(g), dtype=float) + coadjoint_group(g, sh).coords
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True, eq=False)
class TwoCocycle:
    """Antisymmetric matrix Sigma_ij = Sigma(e_i, e_j) on the algebra basis."""

    matrix: np.ndarray
    spec: LieAlgebraSpec

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, copy=True)
        m = 0.5 * (m - m.T)   # exact antisymmetry by construction
        object.__setattr__(self, "matrix", m)

    def __call__(self, xi: np.ndarray, eta: np.ndarray) -> float:
        return float(np.asarray(xi, float) @ self.matrix @ np.asarray(eta, float))

    def identity_residual(self) -> float:
        """Max over basis triples of Sigma([x,y],z) + Sigma([y,z],x) + Sigma([z,x],y)."""
        c = self.spec.structure_constants
        s = self.matrix
        t = np.einsum("ijm,mk->ijk", c, s)
        total = t + np.transpose(t, (1, 2, 0)) + np.transpose(t, (2, 0, 1))
        return float(np.max(np.abs(total)))


def two_cocycle_from_sigma(sigma: Callable[[GroupElement], np.ndarray], spec: LieAlgebraSpec,
                           fd_step: float = 1e-5, identity_tol: float = 1e-6) -> TwoCocycle:
    """Sigma(xi, eta) = d/dt at 0 of <sigma(exp t xi), eta>, by central differences."""
    d = spec.dimension
    m = np.zeros((d, d))
    for a in range(d):
        e = np.zeros(d)
        e[a] = 1.0
        gp = liealg.exponential(AlgebraVector(fd_step * e, spec))
        gm = liealg.exponential(AlgebraVector(-fd_step * e, spec))
        m[a, :] = (np.asarray(sigma(gp), float) - np.asarray(sigma(gm), float)) / (2.0 * fd_step)
    result = TwoCocycle(m, spec)
    res = result.identity_residual()
    if res > identity_tol:
        raise ValueError(f"derived two-cocycle violates its identity (residual {res:.3e})")
    return result


def affine_action(sigma: Callable[[GroupElement], np.ndarray] | None,
                  g: GroupElement, mu: np.ndarray) -> np.ndarray:
    """Theta(g, mu) = Ad*_{g^{-1}} mu + sigma(g)."""
    spec = g.spec
    out = coadjoint_group(g, CoalgebraCovector(np.asarray(mu, float), spec)).coords
    if sigma is not None:
        out = out + np.asarray(sigma(g), dtype=float)
    return out


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------

def check_invariance(h: ScalarField, action: GroupAction, points, rng: np.random.Generator,
                     tol: float = INVARIANCE_TOL, n_group: int = 3) -> float:
    """Max relative change of h under random group elements at the given points."""
    worst = 0.0
    for m in points:
        href = h(m)
        scale = 1.0 + abs(href)
        for _ in range(n_group):
            g = liealg.random_group_element(action.spec, rng)
            worst = max(worst, abs(h(action.act(g, m)) - href) / scale)
    return worst


def verify_noether(j: MomentumMap, h: ScalarField, trajectory,
                   rng: np.random.Generator | None = None,
                   invariance_tol: float = INVARIANCE_TOL) -> float:
    """Max drift of J along a trajectory of X_h; h must pass the invariance probe."""
    rng = rng if rng is not None else np.random.default_rng(0)
    pts = [m for _, m in trajectory[:: max(1, len(trajectory) // 5)]]
    worst = check_invariance(h, j.action, pts, rng, tol=invariance_tol)
    if worst > invariance_tol:
        raise InvarianceError(
            f"Hamiltonian fails the invariance probe (relative change {worst:.3e})")
    j0 = j.evaluate(trajectory[0][1])
    drift = 0.0
    for _, m in trajectory:
        drift = max(drift, float(np.max(np.abs(j.evaluate(m) - j0))))
    return drift


def verify_momentum_linear_algebra(j: MomentumMap, m: ChartPoint,
                                   rcond: float = RANK_RCOND) -> dict:
    """Subspace identities of T_m J: range vs annihilator of the isotropy algebra,
    kernel vs the symplectic orthogonal of the group orbit directions."""
    tj = j.derivative(m)
    k = j.action.generator_matrix(m)
    omega = j.space.omega_matrix_at(m)

    iso = null_space(k, rcond) if np.any(k) else np.eye(j.spec.dimension)
    annihilator = null_space(iso.T, rcond) if iso.shape[1] else np.eye(j.spec.dimension)
    range_j = range_space(tj, rcond)
    range_defect = principal_angle_defect(range_j, annihilator)

    ker_j = null_space(tj, rcond)
    orbit = range_space(k, rcond)
    sympl_orth = null_space(orbit.T @ omega, rcond) if orbit.shape[1] else np.eye(j.space.dim)
    kernel_defect = principal_angle_defect(ker_j, sympl_orth)

    return {
        "rank": rank(tj, rcond),
        "range_defect": range_defect,
        "kernel_defect": kernel_defect,
        "isotropy_dim": iso.shape[1],
        "annihilator_dim": annihilator.shape[1],
        "kernel_dim": ker_j.shape[1],
    }


def verify_infinitesimal_equivariance(j: MomentumMap, xi: np.ndarray, z: ChartPoint) -> float:
    """Sup-norm residual of T_z J(xi_M(z)) = -ad*_xi J(z)."""
    xi = np.asarray(xi, dtype=float)
    lhs = j.derivative(z) @ j.action.generator(xi, z)
    adstar = liealg.coadjoint_algebra_coords(j.spec, xi, j.evaluate(z))
    return float(np.max(np.abs(lhs + adstar)))


def reduction_lemma_check(j: MomentumMap, m: ChartPoint, rcond: float = RANK_RCOND) -> dict:
    """Pairwise principal angles among g_mu . m, g.m ∩ ker T_m J and g.m ∩ (g.m)^omega.

    The isotropy algebra of J(m) is taken for the affine action induced by the
    map's cocycle data.
    """
    tj = j.derivative(m)
    k = j.action.generator_matrix(m)
    omega = j.space.omega_matrix_at(m)

    def spectral(x: np.ndarray) -> float:
        return float(np.linalg.norm(x, 2)) if np.any(x) else 0.0

    a_mu = affine_generator_matrix(j.spec, j.evaluate(m), j.two_cocycle)
    gmu = null_space(a_mu, rcond) if np.any(a_mu) else np.eye(j.spec.dimension)
    s1 = range_space(k @ gmu, rcond) if gmu.shape[1] else np.zeros((j.space.dim, 0))

    # products of full-scale factors can be zero only up to rounding noise,
    # so the rank decisions get an absolute floor from the factor norms
    c2 = null_space(tj @ k, rcond, atol=rcond * spectral(tj) * spectral(k))
    s2 = range_space(k @ c2, rcond) if c2.shape[1] else np.zeros((j.space.dim, 0))

    gram = k.T @ omega @ k
    c3 = null_space(gram, rcond, atol=rcond * spectral(k) ** 2 * spectral(omega))
    s3 = range_space(k @ c3, rcond) if c3.shape[1] else np.zeros((j.space.dim, 0))

    if not np.any(k):
        # all three subspaces are {0} at a global fixed point
        s1 = s2 = s3 = np.zeros((j.space.dim, 0))

    angles = [
        principal_angle_defect(s1, s2),
        principal_angle_defect(s2, s3),
        principal_angle_defect(s1, s3),
    ]
    return {
        "max_angle": float(max(angles)),
        "dims": (s1.shape[1], s2.shape[1], s3.shape[1]),
    }
