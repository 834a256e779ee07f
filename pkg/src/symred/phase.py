"""Phase spaces in global charts, symplectic forms, canonical actions and flows.

Three chart families cover every built-in scenario:

* ``cotangent_rn``: T*R^n with coordinates (q, p) and the canonical form
  dq ^ dp, optionally corrected by a constant magnetic two-form on the base;
* ``linear``: a linear symplectic space with a constant user-supplied form;
* ``cotangent_group``: T*G for G = SO(3) or R^n in left trivialization
  G x g*, with tangent vectors represented as (xi, rho) pairs and the
  left-trivialized canonical form, optionally with a constant two-cocycle
  magnetic term.

Tangent vectors are plain ndarrays in the chart's tangent representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import liealg
from .liealg import GroupElement, LieAlgebraSpec, UnsupportedAlgebraError
from .linalg import RANK_RCOND, null_space

#: Tangent vectors are ndarrays in the chart tangent representation.
TangentVector = np.ndarray

FD_STEP = 1e-5


class SingularOmegaError(RuntimeError):
    """The symplectic matrix is (numerically) singular; carries the condition number."""

    def __init__(self, condition: float):
        super().__init__(f"symplectic matrix is numerically singular (cond ~ {condition:.3e})")
        self.condition = condition


class FlowDivergenceError(RuntimeError):
    """Non-finite state encountered during integration; carries the valid prefix."""

    def __init__(self, trajectory, index):
        super().__init__(f"non-finite state at step {index}")
        self.trajectory = trajectory
        self.index = index


@dataclass(frozen=True, eq=False)
class ChartPoint:
    coords: np.ndarray
    space: "PhaseSpaceSpec"

    def __post_init__(self):
        v = np.array(self.coords, dtype=float, copy=True).reshape(-1)
        if v.shape != (self.space.coord_dim,):
            raise ValueError(f"expected {self.space.coord_dim} coordinates, got {v.shape}")
        object.__setattr__(self, "coords", v)


@dataclass(eq=False)
class PhaseSpaceSpec:
    """Chart family plus the data needed to evaluate omega and move around."""

    kind: str                      # "cotangent_rn" | "linear" | "cotangent_group"
    dim: int                       # symplectic (tangent) dimension, even
    coord_dim: int                 # length of the chart coordinate vector
    name: str = ""
    algebra: LieAlgebraSpec | None = None     # group factor for cotangent_group
    magnetic: np.ndarray | None = None        # base two-form / two-cocycle matrix
    _omega_const: np.ndarray | None = None
    _omega_cond: float | None = field(default=None, repr=False)

    # -- construction helpers ------------------------------------------------

    def point(self, coords) -> ChartPoint:
        return ChartPoint(np.asarray(coords, dtype=float), self)

    # -- structure -----------------------------------------------------------

    def omega_matrix_at(self, m: ChartPoint) -> np.ndarray:
        if self._omega_const is not None:
            return self._omega_const
        # left-trivialized form on T*G: [[C(mu) - Sigma, I], [-I, 0]]
        mu = self.momentum_part(m)
        c = np.einsum("abk,k->ab", self.algebra.structure_constants, mu)
        if self.magnetic is not None:
            c = c - self.magnetic
        d = self.algebra.dimension
        out = np.zeros((2 * d, 2 * d))
        out[:d, :d] = c
        out[:d, d:] = np.eye(d)
        out[d:, :d] = -np.eye(d)
        return out

    def omega_condition(self, m: ChartPoint) -> float:
        return float(np.linalg.cond(self.omega_matrix_at(m)))

    def retract(self, m: ChartPoint, v: TangentVector, t: float = 1.0) -> ChartPoint:
        """Move from m along tangent vector v by parameter t (exp on group factors)."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"tangent vector must have length {self.dim}")
        if self.kind != "cotangent_group" or self._group_factor_kind() == "abelian":
            return self.point(m.coords + t * self._tangent_as_coords(v))
        d = self.algebra.dimension
        r = self.rotation_part(m)
        r_new = r @ liealg.rodrigues(t * v[:d])
        mu_new = self.momentum_part(m) + t * v[d:]
        return self.point(np.concatenate([r_new.reshape(-1), mu_new]))

    def _tangent_as_coords(self, v: np.ndarray) -> np.ndarray:
        # identical layouts for the vector-space kinds
        return v

    def _group_factor_kind(self) -> str:
        return self.algebra.factors[0][0]

    # -- cotangent_group accessors --------------------------------------------

    def rotation_part(self, m: ChartPoint) -> np.ndarray:
        if self.kind != "cotangent_group" or self._group_factor_kind() != "so3":
            raise ValueError("rotation_part only defined for T*SO(3) charts")
        return m.coords[:9].reshape(3, 3)

    def group_part(self, m: ChartPoint) -> GroupElement:
        if self.kind != "cotangent_group":
            raise ValueError("group_part only defined for cotangent_group charts")
        if self._group_factor_kind() == "so3":
            return GroupElement(self.algebra, (self.rotation_part(m),))
        n = self.algebra.dimension
        return GroupElement(self.algebra, (m.coords[:n].copy(),))

    def momentum_part(self, m: ChartPoint) -> np.ndarray:
        if self.kind != "cotangent_group":
            raise ValueError("momentum_part only defined for cotangent_group charts")
        if self._group_factor_kind() == "so3":
            return m.coords[9:]
        n = self.algebra.dimension
        return m.coords[n:]

    def group_point(self, g: GroupElement, mu: np.ndarray) -> ChartPoint:
        if self._group_factor_kind() == "so3":
            return self.point(np.concatenate([g.blocks[0].reshape(-1), np.asarray(mu, float)]))
        return self.point(np.concatenate([g.blocks[0], np.asarray(mu, float)]))

    def split_cotangent(self, m: ChartPoint) -> tuple[np.ndarray, np.ndarray]:
        """(q, p) halves for the vector-space cotangent kinds."""
        if self.kind == "cotangent_rn":
            n = self.dim // 2
            return m.coords[:n], m.coords[n:]
        if self.kind == "cotangent_group" and self._group_factor_kind() == "abelian":
            n = self.algebra.dimension
            return m.coords[:n], m.coords[n:]
        raise ValueError("split_cotangent needs a vector-space cotangent chart")

    def validate_point(self, m: ChartPoint, tol: float = 1e-12) -> None:
        if m.space is not self:
            raise ValueError("point belongs to a different space")
        if self.kind == "cotangent_group" and self._group_factor_kind() == "so3":
            r = self.rotation_part(m)
            if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
                raise ValueError("group block is not orthogonal within tolerance")

    def random_tangent(self, rng: np.random.Generator, scale: float = 1.0) -> TangentVector:
        return scale * rng.uniform(-1.0, 1.0, size=self.dim)


def _constant_block_form(n: int, magnetic: np.ndarray | None) -> np.ndarray:
    b = np.zeros((n, n)) if magnetic is None else np.asarray(magnetic, dtype=float)
    if b.shape != (n, n) or np.max(np.abs(b + b.T)) > 1e-12:
        raise ValueError("magnetic term must be an antisymmetric n x n matrix")
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = -b
    out[:n, n:] = np.eye(n)
    out[n:, :n] = -np.eye(n)
    return out


def cotangent_rn(n: int, magnetic: np.ndarray | None = None, name: str = "") -> PhaseSpaceSpec:
    """T*R^n in (q, p) coordinates; omega = dq ^ dp minus the base magnetic term."""
    omega = _constant_block_form(n, magnetic)
    return PhaseSpaceSpec(
        kind="cotangent_rn", dim=2 * n, coord_dim=2 * n, name=name or f"T*R^{n}",
        magnetic=None if magnetic is None else np.asarray(magnetic, dtype=float),
        _omega_const=omega,
    )


def linear_phase_space(omega: np.ndarray, name: str = "") -> PhaseSpaceSpec:
    """A linear symplectic space with a constant form (must be invertible)."""
    omega = np.asarray(omega, dtype=float)
    n = omega.shape[0]
    if omega.shape != (n, n) or np.max(np.abs(omega + omega.T)) > 1e-12:
        raise ValueError("omega must be a square antisymmetric matrix")
    cond = float(np.linalg.cond(omega))
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularOmegaError(cond)
    spec = PhaseSpaceSpec(kind="linear", dim=n, coord_dim=n, name=name or f"linear^{n}",
                          _omega_const=omega)
    spec._omega_cond = cond
    return spec


def cotangent_group(algebra: LieAlgebraSpec, two_cocycle: np.ndarray | None = None,
                    name: str = "") -> PhaseSpaceSpec:
    """T*G in left trivialization for a single-factor G (SO(3) or R^n)."""
    if algebra.factors is None or len(algebra.factors) != 1:
        raise UnsupportedAlgebraError("cotangent_group supports single-factor groups")
    kind = algebra.factors[0][0]
    if kind not in ("so3", "abelian"):
        raise UnsupportedAlgebraError(f"cotangent_group not implemented for factor {kind!r}")
    d = algebra.dimension
    sig = None if two_cocycle is None else np.asarray(two_cocycle, dtype=float)
    if sig is not None and (sig.shape != (d, d) or np.max(np.abs(sig + sig.T)) > 1e-12):
        raise ValueError("two-cocycle must be an antisymmetric d x d matrix")
    coord_dim = 9 + 3 if kind == "so3" else 2 * d
    spec = PhaseSpaceSpec(
        kind="cotangent_group", dim=2 * d, coord_dim=coord_dim,
        name=name or f"T*{algebra.name}", algebra=algebra, magnetic=sig,
    )
    if kind == "abelian":
        # abelian C(mu) = 0, so the form is constant
        spec._omega_const = _constant_block_form(d, sig)
    return spec


# ---------------------------------------------------------------------------
# Scalar fields
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ScalarField:
    """A smooth function on a phase space, with analytic gradient if available.

    The gradient is expressed in the chart tangent representation; when absent
    it falls back to central finite differences along retraction directions.
    """

    space: PhaseSpaceSpec
    value: Callable[[ChartPoint], float]
    gradient: Callable[[ChartPoint], np.ndarray] | None = None
    name: str = ""

    def __call__(self, m: ChartPoint) -> float:
        return float(self.value(m))

    def grad(self, m: ChartPoint, fd_step: float = FD_STEP) -> np.ndarray:
        if self.gradient is not None:
            return np.asarray(self.gradient(m), dtype=float)
        dim = self.space.dim
        out = np.empty(dim)
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = 1.0
            fp = self.value(self.space.retract(m, e, fd_step))
            fm = self.value(self.space.retract(m, e, -fd_step))
            out[i] = (fp - fm) / (2.0 * fd_step)
        return out


# ---------------------------------------------------------------------------
# Group actions
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class GroupAction:
    """A canonical action together with closed-form infinitesimal generators."""

    spec: LieAlgebraSpec
    space: PhaseSpaceSpec
    act: Callable[[GroupElement, ChartPoint], ChartPoint]
    generator: Callable[[np.ndarray, ChartPoint], TangentVector]
    name: str = ""

    def generator_matrix(self, m: ChartPoint) -> np.ndarray:
        """Columns xi -> xi_M(m) over the algebra basis (dim x dim_g)."""
        d = self.spec.dimension
        return np.column_stack([self.generator(e, m) for e in np.eye(d)])


def generator_fd(action: GroupAction, xi: np.ndarray, m: ChartPoint, h: float = FD_STEP) -> TangentVector:
    """Central finite-difference generator (d/dt at 0 of exp(t xi) acting on m)."""
    xi = np.asarray(xi, dtype=float)
    gp = liealg.exponential(liealg.AlgebraVector(h * xi, action.spec))
    gm = liealg.exponential(liealg.AlgebraVector(-h * xi, action.spec))
    mp = action.act(gp, m)
    mm = action.act(gm, m)
    return tangent_difference(action.space, mp, mm, 2.0 * h, base=m)


def tangent_difference(space: PhaseSpaceSpec, a: ChartPoint, b: ChartPoint, dt: float,
                       base: ChartPoint | None = None) -> TangentVector:
    """(a - b)/dt expressed in the chart tangent representation."""
    if space.kind != "cotangent_group" or space._group_factor_kind() == "abelian":
        return (a.coords - b.coords) / dt
    r0 = space.rotation_part(base if base is not None else a)
    dr = (space.rotation_part(a) - space.rotation_part(b)) / dt
    xi = liealg.unhat3(r0.T @ dr)
    rho = (space.momentum_part(a) - space.momentum_part(b)) / dt
    return np.concatenate([xi, rho])


def isotropy_algebra_basis(action: GroupAction, m: ChartPoint, rcond: float = RANK_RCOND) -> list:
    """Orthonormal basis of the isotropy subalgebra at m (SVD null space)."""
    k = action.generator_matrix(m)
    basis = null_space(k, rcond)
    if not np.any(k):
        basis = np.eye(action.spec.dimension)
    return [liealg.AlgebraVector(basis[:, j], action.spec) for j in range(basis.shape[1])]


# ---------------------------------------------------------------------------
# Symplectic evaluations
# ---------------------------------------------------------------------------

def omega_eval(m: ChartPoint, v: TangentVector, w: TangentVector) -> float:
    """omega(m)(v, w) = v^T Omega(m) w."""
    space = m.space
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != (space.dim,) or w.shape != (space.dim,):
        raise ValueError(f"tangent vectors must have length {space.dim}")
    return float(v @ space.omega_matrix_at(m) @ w)


def hamiltonian_vector_field(h: ScalarField, m: ChartPoint) -> TangentVector:
    """The vector field X with omega(X, .) = dh, i.e. Omega^T X = grad h."""
    space = m.space
    omega = space.omega_matrix_at(m)
    grad = h.grad(m)
    if space._omega_cond is None and space._omega_const is not None:
        space._omega_cond = float(np.linalg.cond(space._omega_const))
    if space._omega_cond is not None and space._omega_cond > 1e12:
        raise SingularOmegaError(space._omega_cond)
    try:
        return np.linalg.solve(omega.T, grad)
    except np.linalg.LinAlgError as exc:
        raise SingularOmegaError(float(np.linalg.cond(omega))) from exc


def poisson_bracket(f: ScalarField, h: ScalarField, m: ChartPoint) -> float:
    """{f, h}(m) = omega(X_f, X_h)(m)."""
    return omega_eval(m, hamiltonian_vector_field(f, m), hamiltonian_vector_field(h, m))


# ---------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------

def _rk4_step(rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dexpinv_truncated(spec: LieAlgebraSpec, u: np.ndarray, xi: np.ndarray) -> np.ndarray:
    # xi + [u, xi]/2 + [u, [u, xi]]/12; enough Bernoulli terms for a 4th-order step
    b1 = liealg.bracket_coords(spec, u, xi)
    b2 = liealg.bracket_coords(spec, u, b1)
    return xi + 0.5 * b1 + b2 / 12.0


def _rkmk4_step(space: PhaseSpaceSpec, field: Callable[[ChartPoint], np.ndarray],
                m: ChartPoint, h: float) -> ChartPoint:
    """One Munthe-Kaas RK4 step for T*SO(3); rotations stay orthogonal exactly."""
    spec = space.algebra
    d = spec.dimension
    r0 = space.rotation_part(m)
    pi0 = space.momentum_part(m)

    def chart_rhs(y: np.ndarray) -> np.ndarray:
        u, pi = y[:d], y[d:]
        mp = space.point(np.concatenate([(r0 @ liealg.rodrigues(u)).reshape(-1), pi]))
        xr = field(mp)
        return np.concatenate([_dexpinv_truncated(spec, u, xr[:d]), xr[d:]])

    y1 = _rk4_step(chart_rhs, np.concatenate([np.zeros(d), pi0]), h)
    r1 = r0 @ liealg.rodrigues(y1[:d])
    return space.point(np.concatenate([r1.reshape(-1), y1[d:]]))


def flow(h: ScalarField, m0: ChartPoint, t_final: float, step: float) -> list[tuple[float, ChartPoint]]:
    """Fixed-step 4th-order trajectory of X_h sampled at multiples of ``step``."""
    if step <= 0.0:
        raise ValueError("step must be positive")
    if t_final < 0.0:
        raise ValueError("t_final must be nonnegative")
    space = m0.space
    n_steps = int(round(t_final / step))
    traj: list[tuple[float, ChartPoint]] = [(0.0, m0)]
    use_group_chart = space.kind == "cotangent_group" and space._group_factor_kind() == "so3"

    if use_group_chart:
        m = m0
        for k in range(n_steps):
            m = _rkmk4_step(space, lambda p: hamiltonian_vector_field(h, p), m, step)
            if not np.all(np.isfinite(m.coords)):
                raise FlowDivergenceError(traj, k + 1)
            traj.append(((k + 1) * step, m))
        return traj

    def rhs(y: np.ndarray) -> np.ndarray:
        return hamiltonian_vector_field(h, space.point(y))

    y = m0.coords.copy()
    for k in range(n_steps):
        y = _rk4_step(rhs, y, step)
        if not np.all(np.isfinite(y)):
            raise FlowDivergenceError(traj, k + 1)
        traj.append(((k + 1) * step, space.point(y)))
    return traj
