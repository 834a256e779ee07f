"""The built-in reduction scenarios.

Each factory wires a phase space, a canonical action with closed-form
generators, a momentum map with analytic derivative, an invariant Hamiltonian
and the slice charts realizing the reduced space in concrete coordinates:

* ``translation_nbody``: N particles on T*R^{3N} under spatial translation,
  momentum = total linear momentum, quotient in particle-relative coordinates
  with a center-of-mass-pinned lift;
* ``so2_planar``: planar central force under diagonal SO(2), momentum =
  scalar angular momentum, quotient in polar invariants (r, p_r), r > 0;
* ``so3_angular``: spatial central force under diagonal SO(3), momentum =
  angular momentum (verifier scenario, no quotient chart);
* ``tstar_so3``: free rigid body on T*SO(3) in left trivialization, momentum
  = spatial angular momentum, quotient = body momentum sphere;
* ``magnetic_r2``: translations on T*R^2 with a constant magnetic two-cocycle,
  a genuinely non-equivariant momentum map;
* ``so2_singular``: the so2_planar system at momentum level zero, where the
  action has a fixed point and reduction is singular.
"""

from __future__ import annotations

import numpy as np

from . import liealg
from .liealg import GroupElement, hat3, rotation_taking
from .momentum import MomentumMap
from .orbit_reduction import AffineOrbit
from .phase import ChartPoint, GroupAction, ScalarField, cotangent_group, cotangent_rn
from .point_reduction import ReductionScenario, SliceChart, project_to_level

_ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])


# ---------------------------------------------------------------------------
# translation_nbody
# ---------------------------------------------------------------------------

def translation_nbody(n: int = 3, masses=None, mu=(1.0, 0.0, 0.0),
                      k_pair: float = 1.0) -> ReductionScenario:
    n = int(n)
    if n < 2:
        raise ValueError("need at least two particles")
    masses = np.ones(n) if masses is None else np.asarray(masses, dtype=float)
    if masses.shape != (n,) or np.any(masses <= 0):
        raise ValueError(f"masses must be {n} positive numbers")
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape != (3,):
        raise ValueError("mu must be a 3-vector for the translation group")
    total_mass = float(masses.sum())

    space = cotangent_rn(3 * n, name=f"T*R^{3 * n} ({n} particles)")
    spec = liealg.abelian(3)

    def split(m: ChartPoint):
        q, p = space.split_cotangent(m)
        return q.reshape(n, 3), p.reshape(n, 3)

    def act(g: GroupElement, m: ChartPoint) -> ChartPoint:
        q, p = split(m)
        return space.point(np.concatenate([(q + g.translation).reshape(-1), p.reshape(-1)]))

    def generator(xi, m):
        return np.concatenate([np.tile(np.asarray(xi, float), n), np.zeros(3 * n)])

    action = GroupAction(spec, space, act, generator, name="translation")

    tj = np.hstack([np.zeros((3, 3 * n)), np.tile(np.eye(3), n)])

    j = MomentumMap(
        spec, space, action,
        evaluate=lambda m: split(m)[1].sum(axis=0),
        derivative=lambda m: tj,
        sigma=lambda g: np.zeros(3),
        name="linear momentum",
    )
    rng0 = np.random.default_rng(7)
    j.anchor = space.point(rng0.uniform(-1, 1, size=6 * n))
    j.probes = tuple(space.point(rng0.uniform(-1, 1, size=6 * n)) for _ in range(4))

    def h_value(m: ChartPoint) -> float:
        q, p = split(m)
        kinetic = 0.5 * float(np.sum(p**2 / masses[:, None]))
        pot = 0.0
        for i in range(n):
            for jx in range(i + 1, n):
                pot += 0.5 * k_pair * float(np.sum((q[i] - q[jx])**2))
        return kinetic + pot

    def h_grad(m: ChartPoint) -> np.ndarray:
        q, p = split(m)
        gq = np.zeros((n, 3))
        for i in range(n):
            gq[i] = k_pair * (n * q[i] - q.sum(axis=0))
        return np.concatenate([gq.reshape(-1), (p / masses[:, None]).reshape(-1)])

    h = ScalarField(space, h_value, h_grad, name="pair springs")

    # slice chart: positions relative to the last particle, its momentum dropped
    red_dim = 6 * (n - 1)
    s_mat = np.zeros((red_dim, 6 * n))
    for i in range(n - 1):
        s_mat[3 * i:3 * i + 3, 3 * i:3 * i + 3] = np.eye(3)
        s_mat[3 * i:3 * i + 3, 3 * (n - 1):3 * n] = -np.eye(3)
        s_mat[3 * (n - 1) + 3 * i:3 * (n - 1) + 3 * i + 3,
              3 * n + 3 * i:3 * n + 3 * i + 3] = np.eye(3)

    def reduce_point(m: ChartPoint) -> np.ndarray:
        q, p = split(m)
        rel = q[:-1] - q[-1]
        return np.concatenate([rel.reshape(-1), p[:-1].reshape(-1)])

    def lift_point(r: np.ndarray) -> ChartPoint:
        r = np.asarray(r, dtype=float)
        rel = r[:3 * (n - 1)].reshape(n - 1, 3)
        pi = r[3 * (n - 1):].reshape(n - 1, 3)
        # pin the center of mass at the origin so reconstruction drifts uniformly
        q_last = -(masses[:-1, None] * rel).sum(axis=0) / total_mass
        q = np.vstack([rel + q_last, q_last])
        p_last = mu - pi.sum(axis=0)
        p = np.vstack([pi, p_last])
        return space.point(np.concatenate([q.reshape(-1), p.reshape(-1)]))

    chart = SliceChart(
        reduced_dim=red_dim,
        labels=tuple(f"r{i + 1}{a}" for i in range(n - 1) for a in "xyz")
        + tuple(f"pi{i + 1}{a}" for i in range(n - 1) for a in "xyz"),
        reduce_point=reduce_point,
        lift_point=lift_point,
        chart_differential=lambda m: s_mat,
    )

    def sample_point(rng: np.random.Generator) -> ChartPoint:
        return space.point(rng.uniform(-1.0, 1.0, size=6 * n))

    def kinetic_value(m):
        return 0.5 * float(np.sum(split(m)[1]**2 / masses[:, None]))

    def kinetic_grad(m):
        p = split(m)[1]
        return np.concatenate([np.zeros(3 * n), (p / masses[:, None]).reshape(-1)])

    def pairsq_value(m):
        q = split(m)[0]
        tot = 0.0
        for i in range(n):
            for jx in range(i + 1, n):
                tot += 0.5 * float(np.sum((q[i] - q[jx])**2))
        return tot

    def pairsq_grad(m):
        q = split(m)[0]
        gq = np.zeros((n, 3))
        for i in range(n):
            gq[i] = n * q[i] - q.sum(axis=0)
        return np.concatenate([gq.reshape(-1), np.zeros(3 * n)])

    rng_default = np.random.default_rng(11)
    angles = 2.0 * np.pi * np.arange(n) / n
    q0 = np.column_stack([np.cos(angles), np.sin(angles), 0.1 * np.arange(n)])
    p0 = 0.2 * rng_default.uniform(-1, 1, size=(n, 3))
    start = space.point(np.concatenate([q0.reshape(-1), p0.reshape(-1)]))

    scenario = ReductionScenario(
        name="translation_nbody",
        space=space, action=action, momentum=j, hamiltonian=h, mu=mu,
        slice=chart,
        orbit=AffineOrbit(spec, mu, sign="-", name="translation orbit (a point)"),
        freeness=True,
        sample_point=sample_point,
        state_labels=tuple(f"q{i + 1}{a}" for i in range(n) for a in "xyz")
        + tuple(f"p{i + 1}{a}" for i in range(n) for a in "xyz"),
        invariants={
            "kinetic": ScalarField(space, kinetic_value, kinetic_grad, name="kinetic"),
            "pair_distance_sq": ScalarField(space, pairsq_value, pairsq_grad, name="pair dist sq"),
        },
        description=f"{n} particles under spatial translations, total linear momentum",
        params={"n": n, "masses": masses, "k_pair": k_pair, "total_mass": total_mass},
    )
    def reduced_gradient(r: np.ndarray) -> np.ndarray:
        rel = r[:3 * (n - 1)].reshape(n - 1, 3)
        pi = r[3 * (n - 1):].reshape(n - 1, 3)
        # pair springs over all particles with the last one pinned at r = 0
        full = np.vstack([rel, np.zeros(3)])
        gq = np.array([k_pair * (n * full[i] - full.sum(axis=0)) for i in range(n - 1)])
        p_last = mu - pi.sum(axis=0)
        gp = pi / masses[:-1, None] - p_last / masses[-1]
        return np.concatenate([gq.reshape(-1), gp.reshape(-1)])

    scenario.reduced_gradient = reduced_gradient
    scenario.default_state = project_to_level(j, mu, start)
    scenario.default_reduced = reduce_point(scenario.default_state)
    return scenario


# ---------------------------------------------------------------------------
# so2_planar and so2_singular
# ---------------------------------------------------------------------------

def _planar_rotation_scenario(name: str, mu_value: float, k: float, freeness: bool,
                              description: str) -> ReductionScenario:
    space = cotangent_rn(2, name="T*R^2")
    spec = liealg.so2()

    def act(g: GroupElement, m: ChartPoint) -> ChartPoint:
        r = g.blocks[0]
        q, p = space.split_cotangent(m)
        return space.point(np.concatenate([r @ q, r @ p]))

    def generator(xi, m):
        th = float(np.asarray(xi, float).reshape(-1)[0])
        q, p = space.split_cotangent(m)
        return th * np.concatenate([_ROT90 @ q, _ROT90 @ p])

    action = GroupAction(spec, space, act, generator, name="planar rotation")

    def j_eval(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        return np.array([q[0] * p[1] - q[1] * p[0]])

    def j_deriv(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        return np.array([[p[1], -p[0], -q[1], q[0]]])

    j = MomentumMap(spec, space, action, evaluate=j_eval, derivative=j_deriv,
                    sigma=lambda g: np.zeros(1), name="planar angular momentum")
    j.anchor = space.point([1.1, -0.2, 0.3, 0.7])
    j.probes = tuple(space.point(c) for c in
                     ([0.5, 0.8, -0.4, 0.2], [-0.9, 0.1, 0.6, 0.5],
                      [0.2, -1.2, 0.9, -0.3], [1.4, 0.4, -0.2, -0.8]))

    def h_value(m: ChartPoint) -> float:
        q, p = space.split_cotangent(m)
        return 0.5 * float(p @ p) + 0.5 * k * float(q @ q)

    def h_grad(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        return np.concatenate([k * q, p])

    h = ScalarField(space, h_value, h_grad, name="planar central force")

    mu = np.array([mu_value])

    def reduce_point(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        r = float(np.linalg.norm(q))
        return np.array([r, float(q @ p) / r])

    def lift_point(rc: np.ndarray) -> ChartPoint:
        r, p_r = float(rc[0]), float(rc[1])
        return space.point([r, 0.0, p_r, mu_value / r])

    def chart_diff(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        r = float(np.linalg.norm(q))
        dr = np.concatenate([q / r, np.zeros(2)])
        dpr = np.concatenate([p / r - (q @ p) * q / r**3, q / r])
        return np.vstack([dr, dpr])

    chart = SliceChart(
        reduced_dim=2, labels=("r", "p_r"),
        reduce_point=reduce_point, lift_point=lift_point,
        chart_differential=chart_diff,
        in_domain=lambda rc: rc[0] > 1e-6,
    )

    def sample_point(rng: np.random.Generator) -> ChartPoint:
        while True:
            q = rng.uniform(-1.5, 1.5, size=2)
            if 0.4 <= np.linalg.norm(q) <= 1.6:
                break
        p = rng.uniform(-1.0, 1.0, size=2)
        return space.point(np.concatenate([q, p]))

    def kin_value(m):
        return 0.5 * float(space.split_cotangent(m)[1] @ space.split_cotangent(m)[1])

    def kin_grad(m):
        q, p = space.split_cotangent(m)
        return np.concatenate([np.zeros(2), p])

    def qsq_value(m):
        q = space.split_cotangent(m)[0]
        return 0.5 * float(q @ q)

    def qsq_grad(m):
        q, p = space.split_cotangent(m)
        return np.concatenate([q, np.zeros(2)])

    scenario = ReductionScenario(
        name=name,
        space=space, action=action, momentum=j, hamiltonian=h, mu=mu,
        slice=chart,
        orbit=AffineOrbit(spec, mu, sign="-", name="planar orbit (a point)"),
        freeness=freeness,
        sample_point=sample_point,
        state_labels=("qx", "qy", "px", "py"),
        invariants={
            "kinetic": ScalarField(space, kin_value, kin_grad, name="kinetic"),
            "half_q_sq": ScalarField(space, qsq_value, qsq_grad, name="half |q|^2"),
        },
        description=description,
        params={"k": k, "mu": mu_value},
    )
    def reduced_gradient(rc: np.ndarray) -> np.ndarray:
        r, p_r = float(rc[0]), float(rc[1])
        # amended potential: h_mu = p_r^2/2 + mu^2/(2 r^2) + k r^2/2
        return np.array([-mu_value**2 / r**3 + k * r, p_r])

    scenario.reduced_gradient = reduced_gradient
    if freeness:
        scenario.default_reduced = np.array([1.3, 0.2])
        scenario.default_state = lift_point(scenario.default_reduced)
    else:
        scenario.default_state = space.point([1.0, 0.0, -0.3, 0.0])
        scenario.default_reduced = reduce_point(scenario.default_state)
    return scenario


def so2_planar(mu: float = 1.0, k: float = 1.0) -> ReductionScenario:
    if mu == 0.0:
        raise ValueError("so2_planar needs mu != 0; use so2_singular for the zero level")
    return _planar_rotation_scenario(
        "so2_planar", float(mu), float(k), freeness=True,
        description="planar central force under diagonal SO(2), polar quotient chart")


def so2_singular(k: float = 1.0) -> ReductionScenario:
    return _planar_rotation_scenario(
        "so2_singular", 0.0, float(k), freeness=False,
        description="planar central force at momentum level zero (singular reduction)")


# ---------------------------------------------------------------------------
# so3_angular
# ---------------------------------------------------------------------------

def so3_angular(k: float = 1.0, shift=(0.3, -0.2, 0.5)) -> ReductionScenario:
    space = cotangent_rn(3, name="T*R^3")
    spec = liealg.so3()

    def act(g: GroupElement, m: ChartPoint) -> ChartPoint:
        r = g.blocks[0]
        q, p = space.split_cotangent(m)
        return space.point(np.concatenate([r @ q, r @ p]))

    def generator(xi, m):
        xi = np.asarray(xi, dtype=float)
        q, p = space.split_cotangent(m)
        return np.concatenate([np.cross(xi, q), np.cross(xi, p)])

    action = GroupAction(spec, space, act, generator, name="spatial rotation")

    def j_eval(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        return np.cross(q, p)

    def j_deriv(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        return np.hstack([-hat3(p), hat3(q)])

    j = MomentumMap(spec, space, action, evaluate=j_eval, derivative=j_deriv,
                    sigma=lambda g: np.zeros(3), name="angular momentum")
    j.anchor = space.point([1.0, 0.1, -0.3, 0.2, 0.9, 0.4])
    j.probes = tuple(space.point(c) for c in
                     ([0.6, -0.7, 0.2, 0.5, 0.3, -0.8], [-0.4, 0.9, 0.5, -0.6, 0.2, 0.7],
                      [0.8, 0.2, 0.9, 0.1, -0.5, 0.3], [-0.2, -0.6, 0.4, 0.8, 0.6, -0.1]))

    def h_value(m: ChartPoint) -> float:
        q, p = space.split_cotangent(m)
        return 0.5 * float(p @ p) + 0.5 * k * float(q @ q)

    def h_grad(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        return np.concatenate([k * q, p])

    h = ScalarField(space, h_value, h_grad, name="spatial central force")

    def jsq_value(m: ChartPoint) -> float:
        return float(np.sum(j_eval(m)**2))

    def jsq_grad(m: ChartPoint) -> np.ndarray:
        q, p = space.split_cotangent(m)
        jj = np.cross(q, p)
        return np.concatenate([2.0 * np.cross(p, jj), 2.0 * np.cross(jj, q)])

    def sample_point(rng: np.random.Generator) -> ChartPoint:
        while True:
            q = rng.uniform(-1.5, 1.5, size=3)
            p = rng.uniform(-1.5, 1.5, size=3)
            if (0.4 <= np.linalg.norm(q) <= 1.6 and 0.4 <= np.linalg.norm(p) <= 1.6
                    and np.linalg.norm(np.cross(q, p)) >= 0.2):
                return space.point(np.concatenate([q, p]))

    default_state = space.point([1.0, 0.0, 0.2, 0.1, 1.0, 0.0])
    scenario = ReductionScenario(
        name="so3_angular",
        space=space, action=action, momentum=j, hamiltonian=h,
        mu=j_eval(default_state),
        slice=None,
        freeness=True,
        sample_point=sample_point,
        state_labels=("qx", "qy", "qz", "px", "py", "pz"),
        invariants={
            "momentum_norm_sq": ScalarField(space, jsq_value, jsq_grad, name="|J|^2"),
        },
        description="spatial central force under diagonal SO(3) (verifier scenario)",
        params={"k": k, "shift": np.asarray(shift, dtype=float)},
    )
    scenario.default_state = default_state
    return scenario


def shifted_momentum_map(scenario: ReductionScenario, nu0=None,
                         closed_sigma: bool = True) -> MomentumMap:
    """The momentum map J + nu0: same derivative, nonzero one-cocycle.

    With ``closed_sigma`` the cocycle sigma(g) = nu0 - Ad*_{g^{-1}} nu0 is
    attached in closed form, otherwise it is left to the definitional
    evaluator (anchored, with base-point consistency probes).
    """
    base = scenario.momentum
    spec = base.spec
    nu0 = np.asarray(nu0 if nu0 is not None else scenario.params.get("shift"), dtype=float)

    def sigma(g: GroupElement) -> np.ndarray:
        moved = liealg.coadjoint_group(g, liealg.CoalgebraCovector(nu0, spec)).coords
        return nu0 - moved

    two_cocycle = np.einsum("abk,k->ab", spec.structure_constants, nu0)
    shifted = MomentumMap(
        spec, base.space, base.action,
        evaluate=lambda m: base.evaluate(m) + nu0,
        derivative=base.derivative,
        sigma=sigma if closed_sigma else None,
        two_cocycle=two_cocycle,
        name=f"{base.name} + constant shift",
    )
    shifted.anchor = base.anchor
    shifted.probes = base.probes
    return shifted


# ---------------------------------------------------------------------------
# tstar_so3
# ---------------------------------------------------------------------------

def tstar_so3(inertia=(1.0, 2.0, 3.0), mu=(0.0, 0.0, 1.0)) -> ReductionScenario:
    inertia = np.asarray(inertia, dtype=float).reshape(-1)
    if inertia.shape != (3,) or np.any(inertia <= 0):
        raise ValueError("inertia must be 3 positive diagonal entries")
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape != (3,):
        raise ValueError("mu must be a 3-vector for SO(3)")
    if np.linalg.norm(mu) == 0.0:
        raise ValueError("tstar_so3 needs mu != 0")
    spec = liealg.so3()
    space = cotangent_group(spec, name="T*SO(3)")

    def act(g: GroupElement, m: ChartPoint) -> ChartPoint:
        r = space.rotation_part(m)
        return space.point(np.concatenate([(g.blocks[0] @ r).reshape(-1),
                                           space.momentum_part(m)]))

    def generator(xi, m):
        # left translation in left trivialization: (R, Pi) velocity (R^T xi, 0)
        r = space.rotation_part(m)
        return np.concatenate([r.T @ np.asarray(xi, float), np.zeros(3)])

    action = GroupAction(spec, space, act, generator, name="left translation")

    def j_eval(m: ChartPoint) -> np.ndarray:
        return space.rotation_part(m) @ space.momentum_part(m)

    def j_deriv(m: ChartPoint) -> np.ndarray:
        r = space.rotation_part(m)
        pi = space.momentum_part(m)
        return np.hstack([r @ (-hat3(pi)), r])

    j = MomentumMap(spec, space, action, evaluate=j_eval, derivative=j_deriv,
                    sigma=lambda g: np.zeros(3), name="spatial angular momentum")
    j.anchor = space.group_point(liealg.exponential(liealg.AlgebraVector([0.3, -0.2, 0.4], spec)),
                                 np.array([0.5, -0.1, 0.8]))
    j.probes = tuple(
        space.group_point(liealg.exponential(liealg.AlgebraVector(v, spec)), w)
        for v, w in ((np.array([0.1, 0.5, -0.3]), np.array([-0.4, 0.7, 0.2])),
                     (np.array([-0.6, 0.2, 0.1]), np.array([0.3, 0.3, -0.5])),
                     (np.array([0.4, 0.4, 0.4]), np.array([0.9, -0.2, 0.1])),
                     (np.array([-0.2, -0.5, 0.6]), np.array([-0.1, -0.6, 0.4]))))

    inv_inertia = 1.0 / inertia

    def h_value(m: ChartPoint) -> float:
        pi = space.momentum_part(m)
        return 0.5 * float(pi @ (inv_inertia * pi))

    def h_grad(m: ChartPoint) -> np.ndarray:
        pi = space.momentum_part(m)
        return np.concatenate([np.zeros(3), inv_inertia * pi])

    h = ScalarField(space, h_value, h_grad, name="rigid body energy")

    mu_norm = float(np.linalg.norm(mu))

    def reduce_point(m: ChartPoint) -> np.ndarray:
        return space.momentum_part(m).copy()

    def lift_point(nu: np.ndarray) -> ChartPoint:
        nu = np.asarray(nu, dtype=float)
        r = rotation_taking(nu, mu)
        return space.point(np.concatenate([r.reshape(-1), nu]))

    chart = SliceChart(
        reduced_dim=3, labels=("Pi1", "Pi2", "Pi3"),
        reduce_point=reduce_point, lift_point=lift_point,
        chart_differential=lambda m: np.hstack([np.zeros((3, 3)), np.eye(3)]),
        ambient_embedded=True,
    )

    def sample_point(rng: np.random.Generator) -> ChartPoint:
        g = liealg.random_group_element(spec, rng, scale=1.5)
        while True:
            pi = rng.uniform(-1.5, 1.5, size=3)
            if 0.3 <= np.linalg.norm(pi) <= 1.5:
                break
        return space.group_point(g, pi)

    def level_sampler(rng: np.random.Generator) -> ChartPoint:
        g = liealg.random_group_element(spec, rng, scale=1.5)
        r = g.blocks[0]
        return space.point(np.concatenate([r.reshape(-1), r.T @ mu]))

    def orbit_level_sampler(rng: np.random.Generator) -> ChartPoint:
        g = liealg.random_group_element(spec, rng, scale=1.5)
        u = rng.normal(size=3)
        u = mu_norm * u / np.linalg.norm(u)
        return space.group_point(g, u)

    orbit = AffineOrbit(spec, mu, sign="-", casimir=lambda nu: float(np.linalg.norm(nu)),
                        name="body momentum sphere")

    scenario = ReductionScenario(
        name="tstar_so3",
        space=space, action=action, momentum=j, hamiltonian=h, mu=mu,
        slice=chart, orbit=orbit,
        freeness=True,
        sample_point=sample_point,
        level_sampler=level_sampler,
        orbit_level_sampler=orbit_level_sampler,
        state_labels=("R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33",
                      "Pi1", "Pi2", "Pi3"),
        description="free rigid body on T*SO(3), body momentum sphere quotient",
        params={"inertia": inertia},
    )
    scenario.default_state = space.group_point(liealg.identity_element(spec),
                                               np.array([1.0, 0.01, 0.0]))
    scenario.default_reduced = np.array([1.0, 0.01, 0.0])
    scenario.reduced_flow = _rigid_body_reduced_flow(scenario)
    return scenario


def _rigid_body_reduced_flow(scenario: ReductionScenario):
    from .orbit_reduction import lie_poisson_reduced_flow

    inv_inertia = 1.0 / scenario.params["inertia"]

    def run(nu0: np.ndarray, t_final: float, step: float):
        orbit = AffineOrbit(scenario.momentum.spec, np.asarray(nu0, dtype=float),
                            sign=scenario.orbit.sign,
                            casimir=lambda nu: float(np.linalg.norm(nu)))
        return lie_poisson_reduced_flow(orbit, lambda nu: inv_inertia * nu,
                                        nu0, t_final, step)

    return run


# ---------------------------------------------------------------------------
# magnetic_r2
# ---------------------------------------------------------------------------

def magnetic_r2(sigma12: float = 1.0, mu=(0.4, -0.3)) -> ReductionScenario:
    if sigma12 == 0.0:
        raise ValueError("magnetic_r2 needs a nonzero two-cocycle entry")
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape != (2,):
        raise ValueError("mu must be a 2-vector for R^2")
    spec = liealg.abelian(2)
    sig = np.array([[0.0, sigma12], [-sigma12, 0.0]])
    space = cotangent_group(spec, two_cocycle=sig, name="magnetic T*R^2")

    def act(g: GroupElement, m: ChartPoint) -> ChartPoint:
        x, p = space.split_cotangent(m)
        return space.point(np.concatenate([x + g.translation, p]))

    def generator(xi, m):
        return np.concatenate([np.asarray(xi, float), np.zeros(2)])

    action = GroupAction(spec, space, act, generator, name="magnetic translation")

    def sigma_fn(g: GroupElement) -> np.ndarray:
        return sig.T @ g.translation

    def j_eval(m: ChartPoint) -> np.ndarray:
        x, p = space.split_cotangent(m)
        return p + sig.T @ x

    j_deriv_mat = np.hstack([sig.T, np.eye(2)])
    j = MomentumMap(spec, space, action, evaluate=j_eval,
                    derivative=lambda m: j_deriv_mat,
                    sigma=sigma_fn, two_cocycle=sig,
                    name="magnetic translation momentum")
    j.anchor = space.point([0.3, -0.2, 0.5, 0.1])
    j.probes = tuple(space.point(c) for c in
                     ([0.7, 0.4, -0.3, 0.6], [-0.5, 0.2, 0.8, -0.1],
                      [0.1, -0.9, 0.2, 0.4], [-0.6, -0.3, -0.5, 0.9]))

    def h_value(m: ChartPoint) -> float:
        p = space.split_cotangent(m)[1]
        return 0.5 * float(p @ p)

    def h_grad(m: ChartPoint) -> np.ndarray:
        p = space.split_cotangent(m)[1]
        return np.concatenate([np.zeros(2), p])

    h = ScalarField(space, h_value, h_grad, name="kinetic energy")

    def reduce_point(m: ChartPoint) -> np.ndarray:
        return space.split_cotangent(m)[1].copy()

    def lift_point(nu: np.ndarray) -> ChartPoint:
        nu = np.asarray(nu, dtype=float)
        x = np.linalg.solve(sig.T, mu - nu)
        return space.point(np.concatenate([x, nu]))

    chart = SliceChart(
        reduced_dim=2, labels=("nu1", "nu2"),
        reduce_point=reduce_point, lift_point=lift_point,
        chart_differential=lambda m: np.hstack([np.zeros((2, 2)), np.eye(2)]),
    )

    orbit = AffineOrbit(spec, mu, sign="-", two_cocycle=sig, sigma=sigma_fn,
                        name="affine orbit (all of the dual)")

    scenario = ReductionScenario(
        name="magnetic_r2",
        space=space, action=action, momentum=j, hamiltonian=h, mu=mu,
        slice=chart, orbit=orbit,
        freeness=True,
        sample_point=lambda rng: space.point(rng.uniform(-1.0, 1.0, size=4)),
        state_labels=("x1", "x2", "p1", "p2"),
        description="translations on T*R^2 with a constant magnetic two-cocycle",
        params={"sigma12": sigma12, "two_cocycle": sig},
    )
    scenario.default_state = lift_point(np.array([0.2, 0.5]))
    scenario.default_reduced = np.array([0.2, 0.5])
    return scenario


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

SCENARIOS = {
    "translation_nbody": translation_nbody,
    "so2_planar": so2_planar,
    "so3_angular": so3_angular,
    "tstar_so3": tstar_so3,
    "magnetic_r2": magnetic_r2,
    "so2_singular": so2_singular,
}


def build_scenario(name: str, params: dict | None = None) -> ReductionScenario:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; known: {sorted(SCENARIOS)}")
    return SCENARIOS[name](**(params or {}))
