"""Affine coadjoint orbits, KKS forms, Lie-Poisson flow and orbit-level verifiers.

Orbit tangent vectors are always presented through algebra generators
xi -> -ad*_xi nu + Sigma(xi, .); the KKS pairings are evaluated from those
representatives, with least-squares representative recovery for extrinsic
tangent data.  The verifiers assemble, at sampled points, the orbit-reduction
identity (ambient form = quotient form + momentum pullback of the plus KKS
form), the end-to-end reduction of magnetic cotangent bundles of groups, and
the shifting equivalence through the symplectic difference construction.
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
    affine_generator_coords,
    affine_generator_matrix,
    affine_isotropy_basis,
)
from .linalg import RANK_RCOND, min_norm_lstsq, null_space
from .momentum import affine_action
from .phase import ChartPoint, omega_eval
from .point_reduction import (
    ReductionScenario,
    chart_differential,
    lift_reduced_tangent,
    reduced_form,
)


class CasimirDriftError(RuntimeError):
    """The orbit integrator drifted off the orbit beyond the abort threshold."""


class TangentRepresentationError(RuntimeError):
    """A covector increment is not tangent to the orbit at the given point."""


@dataclass(eq=False)
class AffineOrbit:
    """Orbit of base_mu under the affine action with the given cocycle data.

    ``sign`` picks which of the two KKS forms is carried by the natural chart
    of the scenario that owns this orbit.  ``casimir`` is an optional function
    constant on the orbit, used by the flow monitor.
    """

    spec: LieAlgebraSpec
    base_mu: np.ndarray
    sign: str = "-"
    two_cocycle: np.ndarray | None = None
    sigma: Callable[[GroupElement], np.ndarray] | None = None
    casimir: Callable[[np.ndarray], float] | None = None
    name: str = ""

    def __post_init__(self):
        self.base_mu = np.array(self.base_mu, dtype=float, copy=True).reshape(-1)
        if self.sign not in ("+", "-"):
            raise ValueError("sign must be '+' or '-'")
        if self.two_cocycle is None:
            d = self.spec.dimension
            self.two_cocycle = np.zeros((d, d))
        else:
            self.two_cocycle = np.asarray(self.two_cocycle, dtype=float)

    def act(self, g: GroupElement, nu: np.ndarray) -> np.ndarray:
        return affine_action(self.sigma, g, nu)

    def sample(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        g = liealg.random_group_element(self.spec, rng, scale)
        return self.act(g, self.base_mu)

    def generator_matrix(self, nu: np.ndarray) -> np.ndarray:
        return affine_generator_matrix(self.spec, nu, self.two_cocycle)

    def tangent_basis(self, nu: np.ndarray, rcond: float = RANK_RCOND) -> np.ndarray:
        from .linalg import range_space
        return range_space(self.generator_matrix(nu), rcond)

    def sample_tangent(self, rng: np.random.Generator, nu: np.ndarray) -> np.ndarray:
        xi = rng.normal(size=self.spec.dimension)
        return self.generator_matrix(nu) @ xi

    def representative(self, nu: np.ndarray, delta: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        """Algebra element xi with xi_{g*}(nu) = delta (least squares, min norm)."""
        g = self.generator_matrix(nu)
        xi = min_norm_lstsq(g, np.asarray(delta, dtype=float))
        resid = float(np.max(np.abs(g @ xi - delta)))
        if resid > tol * (1.0 + float(np.max(np.abs(delta)))):
            raise TangentRepresentationError(
                f"increment is not tangent to the orbit (residual {resid:.3e})")
        return xi

    def isotropy_basis(self, nu: np.ndarray, rcond: float = RANK_RCOND) -> np.ndarray:
        return affine_isotropy_basis(self.spec, nu, self.two_cocycle, rcond)


def affine_generator(xi: AlgebraVector, nu: CoalgebraCovector,
                     two_cocycle: np.ndarray | None = None) -> CoalgebraCovector:
    """Generator of the affine action on the dual: -ad*_xi nu + Sigma(xi, .)."""
    return liealg.affine_generator(xi, nu, two_cocycle)


def kks_eval(nu: np.ndarray, xi: np.ndarray, eta: np.ndarray, sign: str,
             spec: LieAlgebraSpec, two_cocycle: np.ndarray | None = None) -> float:
    """KKS pairing on generator representatives: +-<nu, [xi, eta]> -+ Sigma(xi, eta)."""
    nu = np.asarray(nu, dtype=float)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    br = liealg.bracket_coords(spec, xi, eta)
    value = float(np.dot(nu, br))
    if two_cocycle is not None:
        value -= float(xi @ np.asarray(two_cocycle, dtype=float) @ eta)
    return value if sign == "+" else -value


def orbit_form(orbit: AffineOrbit, nu: np.ndarray, delta1: np.ndarray, delta2: np.ndarray,
               sign: str | None = None) -> float:
    """KKS form evaluated on extrinsic tangent increments via representatives."""
    s = sign if sign is not None else orbit.sign
    xi = orbit.representative(nu, delta1)
    eta = orbit.representative(nu, delta2)
    return kks_eval(nu, xi, eta, s, orbit.spec, orbit.two_cocycle)


# ---------------------------------------------------------------------------
# Lie-Poisson reduced dynamics on an orbit
# ---------------------------------------------------------------------------

def reduced_dynamics_vector(orbit: AffineOrbit, h_grad: Callable[[np.ndarray], np.ndarray],
                            nu: np.ndarray) -> np.ndarray:
    """Hamiltonian vector of h on the orbit with the orbit's KKS form.

    Solved in generator coordinates: with K_ab the KKS matrix on basis
    generators and rhs_b = <u_b, grad h>, the coefficients satisfy K c = -rhs.
    """
    g = orbit.generator_matrix(nu)
    grad = np.asarray(h_grad(nu), dtype=float)
    k = np.einsum("abk,k->ab", orbit.spec.structure_constants, nu) - orbit.two_cocycle
    if orbit.sign == "-":
        k = -k
    rhs = g.T @ grad
    c = min_norm_lstsq(k, -rhs)
    return g @ c


def lie_poisson_reduced_flow(orbit: AffineOrbit, h_grad: Callable[[np.ndarray], np.ndarray],
                             nu0: np.ndarray, t_final: float, step: float,
                             casimir_tol: float = 1e-6) -> list[tuple[float, np.ndarray]]:
    """Fixed-step 4th-order integration on the orbit in ambient dual coordinates.

    The Casimir (when the orbit carries one) is monitored rather than enforced;
    drift beyond ``casimir_tol`` aborts, since it flags an integrator problem.
    """
    nu0 = np.asarray(nu0, dtype=float)
    c0 = orbit.casimir(nu0) if orbit.casimir is not None else None

    def rhs(nu: np.ndarray) -> np.ndarray:
        return reduced_dynamics_vector(orbit, h_grad, nu)

    n_steps = int(round(t_final / step))
    out = [(0.0, nu0.copy())]
    nu = nu0.copy()
    for k in range(n_steps):
        k1 = rhs(nu)
        k2 = rhs(nu + 0.5 * step * k1)
        k3 = rhs(nu + 0.5 * step * k2)
        k4 = rhs(nu + step * k3)
        nu = nu + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if c0 is not None and abs(orbit.casimir(nu) - c0) > casimir_tol:
            raise CasimirDriftError(
                f"Casimir drift exceeded {casimir_tol:g} at step {k + 1}")
        out.append(((k + 1) * step, nu.copy()))
    return out


# ---------------------------------------------------------------------------
# Orbit-level verifiers
# ---------------------------------------------------------------------------

def _momentum_image(scenario: ReductionScenario, m: ChartPoint, v: np.ndarray) -> np.ndarray:
    return scenario.momentum.derivative(m) @ np.asarray(v, dtype=float)


def verify_orbit_reduction_identity(scenario: ReductionScenario, rng: np.random.Generator,
                                    n_samples: int = 100) -> float:
    """Residual of  i*omega = pi*omega_orbit + J*omega_plus  at sampled points.

    The quotient form is the orbit KKS form with the scenario's sign in the
    body chart; the correction term always carries the plus form at J(m).
    """
    orbit: AffineOrbit = scenario.orbit
    worst = 0.0
    for _ in range(n_samples):
        if scenario.orbit_level_sampler is not None:
            m = scenario.orbit_level_sampler(rng)
        else:
            m = scenario.sample_level_point(rng)
        v = scenario.sample_level_tangent(rng, m) if orbit_is_point(orbit) else \
            _sample_orbit_level_tangent(scenario, rng, m)
        w = scenario.sample_level_tangent(rng, m) if orbit_is_point(orbit) else \
            _sample_orbit_level_tangent(scenario, rng, m)
        s = chart_differential(scenario, m)
        lhs = omega_eval(m, v, w)
        middle = orbit_form(orbit, _orbit_chart_value(scenario, m), s @ v, s @ w) \
            if not orbit_is_point(orbit) else _point_orbit_middle(scenario, m, v, w)
        jv = _momentum_image(scenario, m, v)
        jw = _momentum_image(scenario, m, w)
        if orbit_is_point(orbit):
            last = 0.0
        else:
            last = orbit_form(orbit, scenario.momentum.evaluate(m), jv, jw, sign="+")
        worst = max(worst, abs(lhs - middle - last))
    return worst


def orbit_is_point(orbit: AffineOrbit) -> bool:
    """True when the affine orbit through base_mu is zero-dimensional."""
    return not np.any(orbit.generator_matrix(orbit.base_mu))


def _orbit_chart_value(scenario: ReductionScenario, m: ChartPoint) -> np.ndarray:
    """The orbit point represented by the scenario's quotient chart at m."""
    return np.asarray(scenario.slice.reduce_point(m), dtype=float)


def _point_orbit_middle(scenario: ReductionScenario, m: ChartPoint,
                        v: np.ndarray, w: np.ndarray) -> float:
    # degenerate orbit: the identity collapses to the point-reduction pullback
    s = chart_differential(scenario, m)
    return reduced_form(scenario, scenario.slice.reduce_point(m), s @ v, s @ w)


def _orbit_level_constraint(scenario: ReductionScenario, m: ChartPoint) -> np.ndarray:
    """Rows annihilating tangents of J^{-1}(orbit): normal-of-orbit composed with T_m J.

    Degenerates to the full momentum derivative when the orbit is a point.
    """
    orbit: AffineOrbit = scenario.orbit
    tj = scenario.momentum.derivative(m)
    if orbit_is_point(orbit):
        return tj
    nu = scenario.momentum.evaluate(m)
    tangent_basis = orbit.tangent_basis(nu)
    normal = null_space(tangent_basis.T) if tangent_basis.shape[1] else np.eye(nu.size)
    if normal.shape[1] == 0:
        return np.zeros((0, scenario.space.dim))
    return normal.T @ tj


def _sample_orbit_level_tangent(scenario: ReductionScenario, rng: np.random.Generator,
                                m: ChartPoint) -> np.ndarray:
    """Random tangent to J^{-1}(orbit) at m: J-image must be orbit tangent."""
    constraint = _orbit_level_constraint(scenario, m)
    basis = null_space(constraint) if constraint.shape[0] else np.eye(scenario.space.dim)
    coeff = rng.normal(size=basis.shape[1])
    v = basis @ coeff
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def verify_point_orbit_match(scenario: ReductionScenario, rng: np.random.Generator,
                             n_samples: int = 50) -> dict:
    """Compare the point-reduced form (slice-chart lifts) against the orbit KKS
    form with the scenario's declared sign, and record the opposite sign too."""
    orbit: AffineOrbit = scenario.orbit
    worst = 0.0
    worst_opposite = 0.0
    opposite = "+" if orbit.sign == "-" else "-"
    for _ in range(n_samples):
        m = scenario.sample_level_point(rng)
        nu = _orbit_chart_value(scenario, m)
        d1 = orbit.sample_tangent(rng, nu)
        d2 = orbit.sample_tangent(rng, nu)
        lhs = reduced_form(scenario, nu, d1, d2)
        rhs = orbit_form(orbit, nu, d1, d2)
        worst = max(worst, abs(lhs - rhs))
        worst_opposite = max(worst_opposite, abs(lhs - orbit_form(orbit, nu, d1, d2, sign=opposite)))
    return {"max_residual": worst, "opposite_sign_residual": worst_opposite,
            "samples": n_samples, "sign": orbit.sign}


def verify_magnetic_cotangent_reduction(scenario: ReductionScenario, rng: np.random.Generator,
                                        n_samples: int = 50) -> dict:
    """End-to-end reduction of (T*G, magnetic form): the reduced pairings through
    the natural body chart must match the orbit KKS form values."""
    if scenario.space.kind != "cotangent_group":
        raise ValueError("magnetic reduction verifier needs a T*G scenario")
    report = verify_point_orbit_match(scenario, rng, n_samples)
    report["scenario"] = scenario.name
    return report


def orbit_form_invariance(orbit: AffineOrbit, rng: np.random.Generator,
                          n_samples: int = 50) -> float:
    """G-invariance of the orbit form: transport the point by the affine action
    and tangents by Ad*_{g^{-1}}, the pairing must be unchanged."""
    worst = 0.0
    for _ in range(n_samples):
        nu = orbit.sample(rng)
        d1 = orbit.sample_tangent(rng, nu)
        d2 = orbit.sample_tangent(rng, nu)
        base = orbit_form(orbit, nu, d1, d2)
        g = liealg.random_group_element(orbit.spec, rng)
        nu_g = orbit.act(g, nu)
        t1 = liealg.coadjoint_group(g, CoalgebraCovector(d1, orbit.spec)).coords
        t2 = liealg.coadjoint_group(g, CoalgebraCovector(d2, orbit.spec)).coords
        worst = max(worst, abs(orbit_form(orbit, nu_g, t1, t2) - base))
    return worst


def kks_representative_independence(orbit: AffineOrbit, rng: np.random.Generator,
                                    n_samples: int = 50) -> float:
    """Shift a representative by an isotropy element; the KKS value must not move."""
    worst = 0.0
    for _ in range(n_samples):
        nu = orbit.sample(rng)
        iso = orbit.isotropy_basis(nu)
        if iso.shape[1] == 0:
            continue
        xi = rng.normal(size=orbit.spec.dimension)
        eta = rng.normal(size=orbit.spec.dimension)
        zeta = iso @ rng.normal(size=iso.shape[1])
        base = kks_eval(nu, xi, eta, orbit.sign, orbit.spec, orbit.two_cocycle)
        shifted = kks_eval(nu, xi + zeta, eta, orbit.sign, orbit.spec, orbit.two_cocycle)
        worst = max(worst, abs(shifted - base))
    return worst


# ---------------------------------------------------------------------------
# Shifting: reduction at mu against reduction at zero on the difference space
# ---------------------------------------------------------------------------

def _difference_side_pairing(scenario: ReductionScenario, m: ChartPoint,
                             v: np.ndarray, w: np.ndarray) -> float:
    """Reduced pairing computed on the zero level of the difference construction.

    A tangent (v, dnu) to the zero level of J o pi1 - pi2 has dnu = T_m J v, and
    the difference form evaluates to omega(v, w) - omega_plus(dnu_v, dnu_w).
    """
    orbit: AffineOrbit = scenario.orbit
    jv = _momentum_image(scenario, m, v)
    jw = _momentum_image(scenario, m, w)
    correction = 0.0
    if not orbit_is_point(orbit):
        correction = orbit_form(orbit, scenario.momentum.evaluate(m), jv, jw, sign="+")
    return omega_eval(m, v, w) - correction


def verify_shifting(scenario: ReductionScenario, rng: np.random.Generator,
                    n_pairs: int = 50) -> dict:
    """Pairing mismatch under the natural map [z] -> ([z], J(z)).

    Point side: reduced form through the slice chart (lifts tangent to
    J^{-1}(mu)).  Difference side: lifts tangent only to J^{-1}(orbit), so the
    momentum image may move along the orbit, paired with the difference form
    (ambient form minus the plus-form correction).  The mismatch measures the
    shifting equivalence at sampled points.
    """
    worst = 0.0
    for _ in range(n_pairs):
        m = scenario.sample_level_point(rng)
        r = scenario.slice.reduce_point(m)
        s = chart_differential(scenario, m)
        v = scenario.sample_level_tangent(rng, m)
        w = scenario.sample_level_tangent(rng, m)
        vbar, wbar = s @ v, s @ w
        point_side = reduced_form(scenario, r, vbar, wbar)

        constraint = _orbit_level_constraint(scenario, m)
        mat = np.vstack([s, constraint]) if constraint.shape[0] else s
        rhs_v = np.concatenate([vbar, np.zeros(constraint.shape[0])])
        rhs_w = np.concatenate([wbar, np.zeros(constraint.shape[0])])
        lift_v = min_norm_lstsq(mat, rhs_v)
        lift_w = min_norm_lstsq(mat, rhs_w)
        diff_side = _difference_side_pairing(scenario, m, lift_v, lift_w)
        worst = max(worst, abs(point_side - diff_side))
    return {"max_mismatch": worst, "pairs": n_pairs}
