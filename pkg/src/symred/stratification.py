"""Isotropy types, decomposed spaces, cones, and the singular reduced example.

Two layers live here.  A combinatorial engine for decomposed spaces: declared
pieces with dimensions, a strict incidence order, probed frontier condition,
depth and skeleton computations, and the cone construction.  And the concrete
singular example: SO(2) acting diagonally on T*R^2 at momentum level zero,
whose reduced space decomposes into the origin class and an open
two-dimensional stratum carrying the polar chart (r, p_r), with every
symplectic statement rendered as a sampled residual check.

Whitney-type regularity of the shipped decompositions is a matter of record,
not of testing: sequence-limit conditions are not robustly falsifiable in
floating point, so no numerical Whitney check is attempted here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .liealg import AlgebraVector
from .linalg import RANK_RCOND, null_space
from .phase import (
    ChartPoint,
    GroupAction,
    ScalarField,
    flow,
    hamiltonian_vector_field,
    isotropy_algebra_basis,
    omega_eval,
)
from .point_reduction import ChartDomainError, ReductionScenario


class AmbiguousIsotropyError(RuntimeError):
    """Singular values fell inside the rank-decision band; no honest label exists."""


class FrontierError(RuntimeError):
    """A declared incidence failed the sampled-closure probe."""


# ---------------------------------------------------------------------------
# Isotropy classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IsotropyType:
    label: str
    dim: int
    discrete_order: int = 1


_CONTINUOUS_LABELS = {0: "e", 1: "SO(2)", 3: "SO(3)"}


def probe_grid(action: GroupAction) -> list:
    """Deterministic grid of group elements for discrete-stabilizer probes."""
    spec = action.spec
    grid = []
    if spec.name == "so2":
        for k in range(1, 12):
            grid.append(AlgebraVector(np.array([2.0 * np.pi * k / 12.0]), spec))
    elif spec.name == "so3":
        axes = np.vstack([np.eye(3), [[1, 1, 1], [1, -1, 0]]]).astype(float)
        for axis in axes:
            axis = axis / np.linalg.norm(axis)
            for order in (2, 3, 4):
                grid.append(AlgebraVector(2.0 * np.pi / order * axis, spec))
    from . import liealg
    return [liealg.exponential(v) for v in grid]


def classify_isotropy(action: GroupAction, m: ChartPoint,
                      grid: list | None = None,
                      rcond: float = RANK_RCOND,
                      ambiguity_band: float = 100.0) -> IsotropyType:
    """Type of m from the rank of the generator map plus a discrete grid probe.

    Singular values below ``rcond * sigma_max`` count as zero; values inside
    the band just above the threshold are refused rather than guessed.
    """
    k = action.generator_matrix(m)
    if not np.any(k):
        dim = action.spec.dimension
    else:
        s = np.linalg.svd(k, compute_uv=False)
        tol = rcond * s[0]
        in_band = np.sum((s > tol) & (s <= ambiguity_band * tol))
        if in_band:
            raise AmbiguousIsotropyError(
                f"{int(in_band)} singular value(s) inside the rank-decision band")
        dim = int(np.sum(s <= tol))
    order = 1
    scale = 1.0 + float(np.max(np.abs(m.coords)))
    for g in (grid if grid is not None else probe_grid(action)):
        moved = action.act(g, m)
        if float(np.max(np.abs(moved.coords - m.coords))) <= 1e-8 * scale:
            order += 1
    label = _CONTINUOUS_LABELS.get(dim, f"dim{dim}")
    if dim == 0 and order > 1:
        label = f"Z{order}"
    return IsotropyType(label, dim, order)


def verify_isotropy_conservation(action: GroupAction, h: ScalarField, m0: ChartPoint,
                                 t_final: float, step: float,
                                 sample_every: int = 10) -> dict:
    """Classify along the flow of X_h; the type must never change."""
    traj = flow(h, m0, t_final, step)
    types = []
    transitions = 0
    previous = None
    for idx in range(0, len(traj), sample_every):
        t, m = traj[idx]
        current = classify_isotropy(action, m)
        types.append((t, current.label))
        if previous is not None and current.label != previous:
            transitions += 1
        previous = current.label
    return {"types": types, "transitions": transitions}


# ---------------------------------------------------------------------------
# The isotropy-type reduced vector field for the planar rotation example
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class PlanarInvariantsField:
    """The induced field on the trivial-isotropy quotient chart (r, p_r, p_theta).

    The chart covers the open subset r > 0 of the quotient of T*R^2 minus the
    fixed point by SO(2); the field is assembled honestly as
    (chart differential) o X_h o (section)."""

    scenario: ReductionScenario

    def project(self, m: ChartPoint) -> np.ndarray:
        q, p = self.scenario.space.split_cotangent(m)
        r = float(np.linalg.norm(q))
        if r <= 1e-12:
            raise ChartDomainError("invariants chart needs r > 0")
        return np.array([r, float(q @ p) / r, q[0] * p[1] - q[1] * p[0]])

    def section(self, y: np.ndarray) -> ChartPoint:
        r, p_r, p_th = float(y[0]), float(y[1]), float(y[2])
        if r <= 0:
            raise ChartDomainError("invariants chart needs r > 0")
        return self.scenario.space.point([r, 0.0, p_r, p_th / r])

    def chart_differential(self, m: ChartPoint) -> np.ndarray:
        q, p = self.scenario.space.split_cotangent(m)
        r = float(np.linalg.norm(q))
        dr = np.concatenate([q / r, np.zeros(2)])
        dpr = np.concatenate([p / r - (q @ p) * q / r**3, q / r])
        dpth = np.array([p[1], -p[0], -q[1], q[0]])
        return np.vstack([dr, dpr, dpth])

    def rhs(self, y: np.ndarray) -> np.ndarray:
        m = self.section(np.asarray(y, dtype=float))
        x = hamiltonian_vector_field(self.scenario.hamiltonian, m)
        return self.chart_differential(m) @ x

    def integrate(self, y0: np.ndarray, t_final: float, step: float):
        y = np.asarray(y0, dtype=float).copy()
        out = [(0.0, y.copy())]
        for k in range(int(round(t_final / step))):
            k1 = self.rhs(y)
            k2 = self.rhs(y + 0.5 * step * k1)
            k3 = self.rhs(y + 0.5 * step * k2)
            k4 = self.rhs(y + step * k3)
            y = y + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if y[0] <= 1e-9:
                raise ChartDomainError(f"reduced trajectory reached r = 0 at step {k + 1}")
            out.append(((k + 1) * step, y.copy()))
        return out

    def projection_deviation(self, m0: ChartPoint, t_final: float, step: float) -> float:
        full = flow(self.scenario.hamiltonian, m0, t_final, step)
        red = self.integrate(self.project(m0), t_final, step)
        worst = 0.0
        for (_, m), (_, y) in zip(full, red):
            worst = max(worst, float(np.max(np.abs(self.project(m) - y))))
        return worst


def isotropy_type_reduced_field(scenario: ReductionScenario) -> PlanarInvariantsField:
    if scenario.space.dim != 4 or scenario.action.spec.name != "so2":
        raise ValueError("the invariants-chart field is built for the planar rotation example")
    return PlanarInvariantsField(scenario)


# ---------------------------------------------------------------------------
# Decomposed spaces
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Piece:
    id: str
    dim: int
    sample: Callable[[np.random.Generator], np.ndarray] | None = None
    contains: Callable[[np.ndarray], bool] | None = None


@dataclass(eq=False)
class Decomposition:
    """Finitely many pieces with a declared strict partial order R < S.

    ``approach`` maps a declared incidence (r_id, s_id) to a function
    (point_of_R, eps) -> point_of_S that converges to the given point as
    eps -> 0; it is what makes the frontier condition numerically probeable.
    """

    name: str
    pieces: list
    incidence: list
    approach: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [p.id for p in self.pieces]
        if len(set(ids)) != len(ids):
            raise ValueError("piece ids must be unique")
        known = set(ids)
        rel = set()
        for r, s in self.incidence:
            if r not in known or s not in known:
                raise ValueError(f"incidence ({r}, {s}) references unknown pieces")
            if r == s:
                raise ValueError("incidence must be irreflexive")
            rel.add((r, s))
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    raise ValueError(f"incidence not transitive: ({a},{b}),({b},{d}) need ({a},{d})")
        if any((s, r) in rel for r, s in rel):
            raise ValueError("cyclic incidence detected")
        self.incidence = sorted(rel)

    def piece(self, pid: str) -> Piece:
        for p in self.pieces:
            if p.id == pid:
                return p
        raise KeyError(pid)

    @property
    def dim(self) -> int:
        return max(p.dim for p in self.pieces)


def depth_and_skeleton(dec: Decomposition) -> dict:
    """Depths (longest incidence chain above each piece) and k-skeletons."""
    above: dict[str, list[str]] = {p.id: [] for p in dec.pieces}
    for r, s in dec.incidence:
        above[r].append(s)

    memo: dict[str, int] = {}
    visiting: set[str] = set()

    def dp(pid: str) -> int:
        if pid in memo:
            return memo[pid]
        if pid in visiting:
            raise ValueError("cyclic incidence detected")
        visiting.add(pid)
        memo[pid] = max((1 + dp(s) for s in above[pid]), default=0)
        visiting.discard(pid)
        return memo[pid]

    depths = {p.id: dp(p.id) for p in dec.pieces}
    skeletons = {
        k: sorted(p.id for p in dec.pieces if p.dim <= k)
        for k in range(dec.dim + 1)
    }
    return {"depth_per_piece": depths, "depth": max(depths.values()),
            "skeletons": skeletons, "dim": dec.dim}


def cone_decomposition(base: Decomposition) -> Decomposition:
    """The cone on a compact decomposed space: a vertex plus shifted pieces.

    Base samples are assumed bounded (links live on spheres); cone points are
    t * z with t > 0, the vertex is the origin.
    """
    probe = None
    for p in base.pieces:
        if p.sample is not None:
            probe = p.sample(np.random.default_rng(0))
            break
    ambient = len(np.atleast_1d(probe)) if probe is not None else 1

    def vertex_sample(rng):
        return np.zeros(ambient)

    pieces = [Piece("vertex", 0, vertex_sample,
                    contains=lambda z: bool(np.max(np.abs(z)) <= 1e-9))]
    incidence = []
    approach = {}

    def cone_sample(p: Piece):
        def sample(rng):
            t = rng.uniform(0.2, 1.5)
            return t * np.atleast_1d(p.sample(rng))
        return sample

    def vertex_approach(p: Piece):
        def go(point, eps):
            return eps * np.atleast_1d(p.sample(np.random.default_rng(0)))
        return go

    for p in base.pieces:
        cid = f"{p.id}x(0,inf)"
        pieces.append(Piece(cid, p.dim + 1, cone_sample(p) if p.sample else None))
        incidence.append(("vertex", cid))
        if p.sample is not None:
            approach[("vertex", cid)] = vertex_approach(p)
    for r, s in base.incidence:
        rid, sid = f"{r}x(0,inf)", f"{s}x(0,inf)"
        incidence.append((rid, sid))
        base_go = base.approach.get((r, s))
        if base_go is not None:
            def lifted(point, eps, _go=base_go):
                point = np.atleast_1d(point)
                t = float(np.linalg.norm(point))
                z = point / t if t > 0 else point
                return t * np.atleast_1d(_go(z, eps))
            approach[(rid, sid)] = lifted
    return Decomposition(f"C({base.name})", pieces, incidence, approach)


def frontier_check(dec: Decomposition, rng: np.random.Generator,
                   samples_per_piece: int = 5,
                   eps_ladder=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7),
                   tol: float = 1e-6) -> float:
    """Probe the frontier condition on every declared incidence.

    For each sampled point of the boundary piece, the approach map must
    produce points of the bigger piece converging to it within ``tol``.
    """
    worst = 0.0
    for r, s in dec.incidence:
        go = dec.approach.get((r, s))
        if go is None:
            raise FrontierError(f"incidence ({r}, {s}) has no approach map to probe")
        piece_r = dec.piece(r)
        piece_s = dec.piece(s)
        for _ in range(samples_per_piece):
            target = np.atleast_1d(piece_r.sample(rng))
            dists = []
            for eps in eps_ladder:
                z = np.atleast_1d(go(target, eps))
                if piece_s.contains is not None and not piece_s.contains(z):
                    raise FrontierError(f"approach for ({r}, {s}) left the piece {s}")
                dists.append(float(np.max(np.abs(z - target))))
            if dists[-1] > tol or dists[-1] > dists[0] + tol:
                raise FrontierError(
                    f"incidence ({r}, {s}): closure probe stalled at {dists[-1]:.3e}")
            worst = max(worst, dists[-1])
    return worst


# ---------------------------------------------------------------------------
# The singular example: SO(2) on T*R^2 at momentum level zero
# ---------------------------------------------------------------------------

def _invariant_coords(m: ChartPoint) -> np.ndarray:
    """Rotation-invariant embedding (|q|^2, |p|^2, q.p) of the zero level quotient."""
    q, p = m.space.split_cotangent(m)
    return np.array([float(q @ q), float(p @ p), float(q @ p)])


def singular_strata_decomposition(scenario: ReductionScenario) -> Decomposition:
    """Two strata of the zero-level quotient in invariant coordinates:
    the origin class (full isotropy) and the open two-dimensional stratum."""

    def open_sample(rng: np.random.Generator) -> np.ndarray:
        r = rng.uniform(0.3, 1.8)
        p_r = rng.uniform(-1.2, 1.2)
        return np.array([r * r, p_r * p_r, r * p_r])

    def open_contains(z: np.ndarray) -> bool:
        a, b, c = z
        return a > 0.0 and abs(a * b - c * c) <= 1e-9 * (1.0 + a * b)

    pieces = [
        Piece("vertex", 0, lambda rng: np.zeros(3),
              contains=lambda z: bool(np.max(np.abs(z)) <= 1e-9)),
        Piece("open", 2, open_sample, contains=open_contains),
    ]

    def approach_vertex(point, eps):
        return np.array([eps * eps, 0.0, 0.0])

    return Decomposition(
        f"{scenario.name} zero-level quotient",
        pieces,
        incidence=[("vertex", "open")],
        approach={("vertex", "open"): approach_vertex},
    )


def _radial_level_sample(scenario: ReductionScenario, rng: np.random.Generator) -> ChartPoint:
    """Point of the zero momentum level with trivial isotropy (p radial), rotated."""
    r = rng.uniform(0.4, 1.6)
    p_r = rng.uniform(-1.0, 1.0)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    q = rot @ np.array([r, 0.0])
    p = rot @ np.array([p_r, 0.0])
    return scenario.space.point(np.concatenate([q, p]))


def open_stratum_form_residual(scenario: ReductionScenario, rng: np.random.Generator,
                               n_samples: int = 50) -> float:
    """Residual of the stratum pullback identity omega = (chart)* dr ^ dp_r
    on tangent vectors of the zero level at trivial-isotropy points."""
    worst = 0.0
    for _ in range(n_samples):
        m = _radial_level_sample(scenario, rng)
        basis = null_space(scenario.momentum.derivative(m))
        v = basis @ rng.normal(size=basis.shape[1])
        w = basis @ rng.normal(size=basis.shape[1])
        s = _open_chart_differential(scenario, m)
        lhs = omega_eval(m, v, w)
        pv, pw = s @ v, s @ w
        rhs = pv[0] * pw[1] - pv[1] * pw[0]
        worst = max(worst, abs(lhs - rhs))
    return worst


def _open_chart_differential(scenario: ReductionScenario, m: ChartPoint) -> np.ndarray:
    q, p = scenario.space.split_cotangent(m)
    r = float(np.linalg.norm(q))
    dr = np.concatenate([q / r, np.zeros(2)])
    dpr = np.concatenate([p / r - (q @ p) * q / r**3, q / r])
    return np.vstack([dr, dpr])


def open_stratum_dimension_by_sampling(scenario: ReductionScenario,
                                       rng: np.random.Generator,
                                       n_samples: int = 40,
                                       ball: float = 1e-4,
                                       rcond: float = 1e-2) -> int:
    """Dimension of the open stratum from the rank of local invariant-coordinate
    displacements around a base point.

    Displacements tangent to the stratum scale like ``ball``, curvature
    contributions like ``ball**2``, so the relative threshold separates them
    cleanly.
    """
    r0, p0 = 1.1, 0.4
    base = _invariant_coords(scenario.space.point([r0, 0.0, p0, 0.0]))
    diffs = []
    for _ in range(n_samples):
        dr, dp = ball * rng.uniform(-1.0, 1.0, size=2)
        z = _invariant_coords(scenario.space.point([r0 + dr, 0.0, p0 + dp, 0.0]))
        diffs.append(z - base)
    s = np.linalg.svd(np.array(diffs), compute_uv=False)
    return int(np.sum(s > rcond * s[0]))


def singular_reduced_strata(scenario: ReductionScenario,
                            rng: np.random.Generator) -> dict:
    """Assemble and check the stratified reduced space at momentum level zero.

    Returns stratum records plus the residuals of the sampled checks: piece
    dimensions, depth, frontier, open-stratum symplectic structure, reduced
    flow projection, and cone-combinatorics agreement with a circle link.
    """
    if scenario.name != "so2_singular":
        raise ValueError("the singular example is hard-wired to so2_singular")
    dec = singular_strata_decomposition(scenario)
    report = depth_and_skeleton(dec)
    frontier = frontier_check(dec, rng)

    dims = sorted(p.dim for p in dec.pieces)
    sampled_dim = open_stratum_dimension_by_sampling(scenario, rng)
    form_residual = open_stratum_form_residual(scenario, rng)

    # cone combinatorics: the link of the vertex is a circle
    circle = Decomposition(
        "circle", [Piece("circle", 1, lambda r: _unit_circle_sample(r))], [])
    cone = cone_decomposition(circle)
    cone_report = depth_and_skeleton(cone)

    strata = [
        {"stratum_id": "vertex", "isotropy_label": "SO(2)", "dimension": 0,
         "depth": report["depth_per_piece"]["vertex"]},
        {"stratum_id": "open", "isotropy_label": "e", "dimension": 2,
         "depth": report["depth_per_piece"]["open"]},
    ]
    return {
        "strata": strata,
        "dims": dims,
        "sampled_open_dimension": sampled_dim,
        "depth": report["depth"],
        "frontier_distance": frontier,
        "form_residual": form_residual,
        "cone_dims_match": sorted(p.dim for p in cone.pieces) == dims,
        "cone_depth_match": cone_report["depth"] == report["depth"],
    }


def _unit_circle_sample(rng: np.random.Generator) -> np.ndarray:
    th = rng.uniform(0.0, 2.0 * np.pi)
    return np.array([np.cos(th), np.sin(th)])
