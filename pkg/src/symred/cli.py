"""Scenario-driven command line: verify suites, simulate, reconstruct.

Commands: ``verify``, ``simulate``, ``reconstruct``, ``list-scenarios``.
Exit codes: 0 all checks pass, 1 a check failed (or a run aborted mid-way),
2 usage or configuration error.  All randomness flows from the single config
seed through per-check child generators, so repeated runs with the same seed
produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import liealg, reconstruction, stratification
from .config import ConfigError, ScenarioConfig, default_config, load_config
from .momentum import (
    reduction_lemma_check,
    sigma_cocycle_identity_check,
    two_cocycle_from_sigma,
    verify_momentum_linear_algebra,
    verify_noether,
)
from .orbit_reduction import (
    kks_representative_independence,
    lie_poisson_reduced_flow,
    orbit_form_invariance,
    verify_magnetic_cotangent_reduction,
    verify_orbit_reduction_identity,
    verify_shifting,
)
from .phase import FlowDivergenceError, flow, poisson_bracket
from .point_reduction import (
    ChartDomainError,
    dimension_report,
    integrate_reduced,
    reduce_hamiltonian,
    reduced_form,
    reduced_form_lift_spread,
    verify_bracket_compatibility,
    verify_pullback_identity,
    verify_reduced_flow_commutes,
)
from .reporting import CheckRecord, dump_json, report_document, trajectory_csv, write_text_atomic
from .scenarios import SCENARIOS, shifted_momentum_map

_EXIT_PASS = 0
_EXIT_FAIL = 1
_EXIT_USAGE = 2


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream)])


# ---------------------------------------------------------------------------
# Suite runners
# ---------------------------------------------------------------------------

def _suite_noether(scenario, cfg: ScenarioConfig) -> list[CheckRecord]:
    checks = []
    traj = flow(scenario.hamiltonian, scenario.default_state, cfg.t_final, cfg.step)
    drift = verify_noether(scenario.momentum, scenario.hamiltonian, traj, _rng(cfg.seed, 0))
    checks.append(CheckRecord("noether_drift", len(traj), drift, 1e-8))
    extra = scenario.invariants.get("momentum_norm_sq")
    if extra is not None:
        traj2 = flow(extra, scenario.default_state, cfg.t_final, cfg.step)
        drift2 = verify_noether(scenario.momentum, extra, traj2, _rng(cfg.seed, 1))
        checks.append(CheckRecord("noether_drift_momentum_norm_sq", len(traj2), drift2, 1e-8))
    return checks


def _suite_momentum_linear_algebra(scenario, cfg: ScenarioConfig,
                                   n_points: int = 100) -> list[CheckRecord]:
    rng = _rng(cfg.seed, 0)
    worst_range = worst_kernel = worst_lemma = 0.0
    for _ in range(n_points):
        m = scenario.sample_point(rng)
        rep = verify_momentum_linear_algebra(scenario.momentum, m)
        worst_range = max(worst_range, rep["range_defect"])
        worst_kernel = max(worst_kernel, rep["kernel_defect"])
        worst_lemma = max(worst_lemma, reduction_lemma_check(scenario.momentum, m)["max_angle"])
    return [
        CheckRecord("bifurcation_range_identity", n_points, worst_range, 1e-8),
        CheckRecord("kernel_symplectic_orthogonal_identity", n_points, worst_kernel, 1e-8),
        CheckRecord("reduction_lemma_subspaces", n_points, worst_lemma, 1e-8),
    ]


def _cocycle_map(scenario):
    if scenario.name == "so3_angular":
        return shifted_momentum_map(scenario)
    return scenario.momentum


def _suite_cocycles(scenario, cfg: ScenarioConfig, n_pairs: int = 100) -> list[CheckRecord]:
    j = _cocycle_map(scenario)
    spec = j.spec
    checks = []

    sigma_e = float(np.max(np.abs(j.cocycle(liealg.identity_element(spec)))))
    checks.append(CheckRecord("sigma_at_identity", 1, sigma_e, 0.0))

    rng = _rng(cfg.seed, 0)
    worst = 0.0
    for _ in range(n_pairs):
        g = liealg.random_group_element(spec, rng)
        h = liealg.random_group_element(spec, rng)
        worst = max(worst, sigma_cocycle_identity_check(j.cocycle, g, h))
    checks.append(CheckRecord("one_cocycle_identity", n_pairs, worst, 1e-10))

    derived = two_cocycle_from_sigma(j.cocycle, spec)
    checks.append(CheckRecord("two_cocycle_identity", spec.dimension**3,
                              derived.identity_residual(), 1e-8))
    checks.append(CheckRecord("two_cocycle_matches_analytic", spec.dimension**2,
                              float(np.max(np.abs(derived.matrix - j.two_cocycle))), 1e-8))

    rng = _rng(cfg.seed, 1)
    worst_affine = 0.0
    for _ in range(50):
        g = liealg.random_group_element(spec, rng)
        h = liealg.random_group_element(spec, rng)
        mu = rng.uniform(-1, 1, size=spec.dimension)
        from .momentum import affine_action
        lhs = affine_action(j.cocycle, liealg.group_multiply(g, h), mu)
        rhs = affine_action(j.cocycle, g, affine_action(j.cocycle, h, mu))
        worst_affine = max(worst_affine, float(np.max(np.abs(lhs - rhs))))
    checks.append(CheckRecord("affine_action_axiom", 50, worst_affine, 1e-10))
    return checks


def _suite_point_reduction(scenario, cfg: ScenarioConfig) -> list[CheckRecord]:
    checks = []
    checks.append(CheckRecord(
        "pullback_identity", 100,
        verify_pullback_identity(scenario, _rng(cfg.seed, 0), 100), 1e-8))

    rng = _rng(cfg.seed, 1)
    spread = 0.0
    for _ in range(20):
        m = scenario.sample_level_point(rng)
        r = scenario.slice.reduce_point(m)
        k = scenario.slice.reduced_dim
        vbar = rng.normal(size=k)
        wbar = rng.normal(size=k)
        spread = max(spread, reduced_form_lift_spread(scenario, r, vbar, wbar, rng))
    checks.append(CheckRecord("reduced_form_lift_independence", 20, spread, 1e-9))

    deviation = verify_reduced_flow_commutes(scenario, scenario.default_state,
                                             cfg.t_final, cfg.step)
    checks.append(CheckRecord("reduced_flow_commutes", int(round(cfg.t_final / cfg.step)),
                              deviation, 1e-6))

    names = sorted(scenario.invariants)
    f, k_field = scenario.invariants[names[0]], scenario.invariants[names[1]]
    checks.append(CheckRecord(
        "bracket_compatibility", 100,
        verify_bracket_compatibility(scenario, f, k_field, _rng(cfg.seed, 2), 100), 1e-8))

    rng = _rng(cfg.seed, 3)
    worst_level = worst_inv = 0.0
    for _ in range(50):
        m = scenario.sample_level_point(rng)
        r = scenario.slice.reduce_point(m)
        lifted = scenario.slice.lift_point(r)
        worst_level = max(worst_level, float(np.max(np.abs(
            scenario.momentum.evaluate(lifted) - scenario.mu))))
        gmu = liealg.affine_isotropy_basis(scenario.momentum.spec, scenario.mu,
                                           scenario.momentum.two_cocycle)
        if gmu.shape[1]:
            g = liealg.exponential(liealg.AlgebraVector(
                gmu @ rng.normal(size=gmu.shape[1]), scenario.momentum.spec))
            moved = scenario.slice.reduce_point(scenario.action.act(g, m))
            worst_inv = max(worst_inv, float(np.max(np.abs(moved - r))))
    checks.append(CheckRecord("lift_hits_level_set", 50, worst_level, 1e-10))
    checks.append(CheckRecord("reduce_is_isotropy_invariant", 50, worst_inv, 1e-10))

    dims = dimension_report(scenario)
    defect = abs(dims["expected_reduced_dim"] - dims["chart_reduced_dim"])
    checks.append(CheckRecord("dimension_bookkeeping", 1, float(defect), 0.0))
    return checks


def _suite_orbit_reduction(scenario, cfg: ScenarioConfig) -> list[CheckRecord]:
    checks = []
    tol_match = 1e-9 if scenario.name == "magnetic_r2" else 1e-7
    checks.append(CheckRecord(
        "orbit_reduction_identity", 100,
        verify_orbit_reduction_identity(scenario, _rng(cfg.seed, 0), 100), tol_match))
    match = verify_magnetic_cotangent_reduction(scenario, _rng(cfg.seed, 1), 50) \
        if scenario.space.kind == "cotangent_group" else None
    if match is not None:
        checks.append(CheckRecord("reduced_form_matches_kks", match["samples"],
                                  match["max_residual"], tol_match))
    checks.append(CheckRecord(
        "kks_representative_independence", 50,
        kks_representative_independence(scenario.orbit, _rng(cfg.seed, 2), 50), 1e-10))
    checks.append(CheckRecord(
        "orbit_form_invariance", 50,
        orbit_form_invariance(scenario.orbit, _rng(cfg.seed, 3), 50), 1e-8))

    if scenario.name == "tstar_so3":
        nu0 = scenario.default_reduced
        traj = scenario.reduced_flow(nu0, 20.0, cfg.step)
        c0 = float(np.linalg.norm(nu0))
        inv_inertia = 1.0 / scenario.params["inertia"]

        def energy(nu):
            return 0.5 * float(nu @ (inv_inertia * nu))

        e0 = energy(nu0)
        worst_c = max(abs(float(np.linalg.norm(nu)) - c0) for _, nu in traj)
        worst_e = max(abs(energy(nu) - e0) for _, nu in traj)
        checks.append(CheckRecord("lie_poisson_casimir_conservation", len(traj), worst_c, 1e-8))
        checks.append(CheckRecord("lie_poisson_energy_conservation", len(traj), worst_e, 1e-8))
    return checks


def _suite_shifting(scenario, cfg: ScenarioConfig) -> list[CheckRecord]:
    tol = 1e-12 if scenario.name == "translation_nbody" else 1e-7
    rep = verify_shifting(scenario, _rng(cfg.seed, 0), 50)
    return [CheckRecord("shifting_pairing_mismatch", rep["pairs"], rep["max_mismatch"], tol)]


def _suite_reconstruction(scenario, cfg: ScenarioConfig,
                          t_final: float | None = None) -> list[CheckRecord]:
    t_run = t_final if t_final is not None else 5.0
    result = reconstruction.reconstruct(scenario, t_run, cfg.step)
    order = reconstruction.observed_order(scenario)
    projection = reconstruction.projection_residual(scenario, result)
    membership = result.group_curve.membership_residual(
        scenario.momentum.sigma, scenario.mu)
    return [
        CheckRecord("reconstruction_sup_deviation", len(result.times),
                    result.sup_deviation, 1e-4),
        CheckRecord("reconstruction_order_defect", 3, 1.9 - order, 0.0),
        CheckRecord("reconstruction_momentum_drift", len(result.times),
                    result.momentum_drift, 1e-6),
        CheckRecord("reconstruction_group_drift", len(result.times),
                    result.group_drift, 1e-10),
        CheckRecord("reconstruction_projects_to_reduced", len(result.times),
                    projection, 1e-6),
        CheckRecord("group_curve_isotropy_membership", len(result.times),
                    membership, 1e-8),
    ]


def _suite_singular(scenario, cfg: ScenarioConfig, n_traj: int = 20) -> list[CheckRecord]:
    checks = []
    rep = stratification.singular_reduced_strata(scenario, _rng(cfg.seed, 0))
    checks.append(CheckRecord("strata_dimensions", 2,
                              0.0 if rep["dims"] == [0, 2] else 1.0, 0.0))
    checks.append(CheckRecord("open_stratum_sampled_dimension", 40,
                              float(abs(rep["sampled_open_dimension"] - 2)), 0.0))
    checks.append(CheckRecord("stratification_depth", 2, float(abs(rep["depth"] - 1)), 0.0))
    checks.append(CheckRecord("frontier_condition", 5, rep["frontier_distance"], 1e-6))
    checks.append(CheckRecord("open_stratum_form_residual", 50, rep["form_residual"], 1e-9))
    checks.append(CheckRecord("cone_combinatorics", 2,
                              0.0 if rep["cone_dims_match"] and rep["cone_depth_match"] else 1.0,
                              0.0))

    bracket = abs(reduced_form(scenario, np.array([1.1, 0.4]),
                               np.array([1.0, 0.0]), np.array([0.0, 1.0])) - 1.0)
    checks.append(CheckRecord("open_stratum_canonical_bracket", 1, bracket, 1e-10))

    rng = _rng(cfg.seed, 1)
    transitions = 0
    worst_level = 0.0
    for _ in range(n_traj):
        m0 = stratification._radial_level_sample(scenario, rng)
        conserved = stratification.verify_isotropy_conservation(
            scenario.action, scenario.hamiltonian, m0, 1.0, cfg.step)
        transitions += conserved["transitions"]
        for _, m in flow(scenario.hamiltonian, m0, 1.0, cfg.step)[::100]:
            worst_level = max(worst_level, float(np.max(np.abs(
                scenario.momentum.evaluate(m)))))
    checks.append(CheckRecord("isotropy_conservation_transitions", n_traj,
                              float(transitions), 0.0))
    checks.append(CheckRecord("singular_level_invariance", n_traj, worst_level, 1e-7))

    field = stratification.isotropy_type_reduced_field(scenario)
    m0 = scenario.space.point([1.0, 0.0, -0.2, 0.0])
    checks.append(CheckRecord(
        "open_stratum_flow_projection", int(round(1.0 / cfg.step)),
        field.projection_deviation(m0, 1.0, cfg.step), 1e-6))

    rng = _rng(cfg.seed, 2)
    worst_bracket = 0.0
    f = scenario.invariants["kinetic"]
    kf = scenario.invariants["half_q_sq"]
    for _ in range(50):
        m = stratification._radial_level_sample(scenario, rng)
        r, p_r = scenario.slice.reduce_point(m)
        full = poisson_bracket(f, kf, m)
        worst_bracket = max(worst_bracket, abs(full - (-(p_r * r))))
    checks.append(CheckRecord("open_stratum_bracket_compatibility", 50, worst_bracket, 1e-8))
    return checks


SUITES = {
    "noether": (_suite_noether,
                {"translation_nbody", "so3_angular", "so2_planar", "tstar_so3", "magnetic_r2"}),
    "momentum_linear_algebra": (_suite_momentum_linear_algebra,
                                {"translation_nbody", "so3_angular", "so2_planar",
                                 "tstar_so3", "magnetic_r2"}),
    "cocycles": (_suite_cocycles, {"so3_angular", "magnetic_r2"}),
    "point_reduction": (_suite_point_reduction, {"so2_planar", "translation_nbody"}),
    "orbit_reduction": (_suite_orbit_reduction, {"tstar_so3", "magnetic_r2"}),
    "shifting": (_suite_shifting, {"tstar_so3", "translation_nbody"}),
    "reconstruction": (_suite_reconstruction, {"so2_planar", "translation_nbody"}),
    "singular": (_suite_singular, {"so2_singular"}),
}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _resolve_config(args) -> ScenarioConfig:
    if args.config:
        cfg = load_config(args.config)
        if args.scenario and args.scenario != cfg.scenario:
            raise ConfigError(
                f"--scenario {args.scenario!r} contradicts config scenario {cfg.scenario!r}")
    else:
        if not args.scenario:
            raise ConfigError("either --scenario or --config is required")
        cfg = default_config(args.scenario)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.step is not None:
        if args.step <= 0:
            raise ConfigError("step must be positive")
        cfg.step = args.step
    if args.t_final is not None:
        cfg.t_final = args.t_final
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    cfg = _resolve_config(args)
    if args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; known: {sorted(SUITES)}")
    runner, allowed = SUITES[args.suite]
    if cfg.scenario not in allowed:
        raise ConfigError(
            f"suite {args.suite!r} does not apply to scenario {cfg.scenario!r}; "
            f"valid scenarios: {sorted(allowed)}")
    scenario = cfg.build()
    if args.suite == "reconstruction":
        checks = runner(scenario, cfg, t_final=args.t_final)
    else:
        checks = runner(scenario, cfg)
    doc = report_document(f"verify:{args.suite}", cfg.scenario, cfg.seed, checks)
    _emit(dump_json(doc), args.out)
    return _EXIT_PASS if all(c.passed for c in checks) else _EXIT_FAIL


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    scenario = cfg.build()
    if args.mode == "full":
        labels = scenario.state_labels
        try:
            traj = flow(scenario.hamiltonian, scenario.default_state, cfg.t_final, cfg.step)
            rows = [(t, m.coords) for t, m in traj]
            failed = False
        except FlowDivergenceError as exc:
            rows = [(t, m.coords) for t, m in exc.trajectory]
            failed = True
    else:
        if scenario.slice is None:
            raise ConfigError(f"scenario {cfg.scenario!r} has no reduced chart")
        labels = scenario.slice.labels
        try:
            if scenario.reduced_flow is not None:
                rows = scenario.reduced_flow(scenario.default_reduced, cfg.t_final, cfg.step)
            else:
                h_red = reduce_hamiltonian(scenario)
                rows = integrate_reduced(scenario, h_red, scenario.default_reduced,
                                         cfg.t_final, cfg.step)
            failed = False
        except ChartDomainError as exc:
            rows = getattr(exc, "partial", [])
            failed = True
    _emit(trajectory_csv(labels, rows), args.out)
    return _EXIT_FAIL if failed else _EXIT_PASS


def cmd_reconstruct(args) -> int:
    cfg = _resolve_config(args)
    scenario = cfg.build()
    if scenario.slice is None:
        raise ConfigError(f"scenario {cfg.scenario!r} provides no lift for reconstruction")
    t_run = args.t_final if args.t_final is not None else 5.0
    result = reconstruction.reconstruct(scenario, t_run, cfg.step)
    order = reconstruction.observed_order(scenario)
    labels = tuple(f"full_{s}" for s in scenario.state_labels) \
        + tuple(f"rec_{s}" for s in scenario.state_labels) + ("deviation",)
    rows = [(t, np.concatenate([m.coords, c.coords, [d]]))
            for t, m, c, d in zip(result.times, result.direct,
                                  result.reconstructed, result.deviation)]
    summary = {
        "command": "reconstruct",
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "sup_deviation": result.sup_deviation,
        "observed_order": order,
        "momentum_drift": result.momentum_drift,
        "group_drift": result.group_drift,
    }
    if args.out:
        write_text_atomic(args.out, trajectory_csv(labels, rows))
        write_text_atomic(args.out + ".summary.json", dump_json(summary))
    else:
        sys.stdout.write(dump_json(summary))
    return _EXIT_PASS if result.sup_deviation <= 1e-4 else _EXIT_FAIL


def cmd_list_scenarios(args) -> int:
    from .scenarios import build_scenario
    for name in sorted(SCENARIOS):
        scenario = build_scenario(name)
        sys.stdout.write(f"{name}: {scenario.description}\n")
    return _EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symred",
                                     description="symplectic reduction verifier toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", help="scenario name from the registry")
        p.add_argument("--config", help="path to a scenario config file")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--step", type=float, default=None)
        p.add_argument("--t-final", dest="t_final", type=float, default=None)

    p_verify = sub.add_parser("verify", help="run a verifier suite, emit a JSON report")
    common(p_verify)
    p_verify.add_argument("--suite", required=True, help=f"one of {sorted(SUITES)}")
    p_verify.set_defaults(func=cmd_verify)

    p_sim = sub.add_parser("simulate", help="integrate full or reduced dynamics to CSV")
    common(p_sim)
    p_sim.add_argument("--mode", choices=("full", "reduced"), default="full")
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("reconstruct", help="reconstruct full dynamics from reduced")
    common(p_rec)
    p_rec.set_defaults(func=cmd_reconstruct)

    p_list = sub.add_parser("list-scenarios", help="list the scenario registry")
    p_list.set_defaults(func=cmd_list_scenarios)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return _EXIT_USAGE
    except (ChartDomainError, FlowDivergenceError) as exc:
        sys.stderr.write(f"run aborted: {exc}\n")
        return _EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
