"""Acceptance suite: one test per criterion, each printing a verdict line.

Shared setup: a 2562-point synthetic sphere cloud fitted into a unit box on
a 48^3 grid, interface thickness from a 5-cell transition, damping 2/eps^2,
reference step 2.5e-5.  Run with ``pytest tests/test_acceptance.py -v -s``.

Criteria 2 and 9 exercise step sizes of 100x and 1000x the reference.  At
those sizes the multiplier constraint can lose its real root (the scheme's
known solvability ceiling near dt = eps^2); the tests implement the stated
requirements literally and report exactly what happened.
"""

import math
from collections import Counter

import numpy as np
import pytest

from phaseshell import (GridSpec, ModelParams, ScalarField, build_index, distance_field, edge_function,
                        epsilon_from_cells, fit_to_domain, grad_inner_e, grad_norm_sq, h_norm_sq,
                        icosphere, init_phi, inner_h, laplacian7, marching_cubes, potential_F,
                        solve_Q, surface_area)
from phaseshell import diagnostics, solver
from phaseshell.solver import QuarticCoeffs

from _oracles import bisect_root, brute_force_distances, dense_block_solve
from conftest import random_field

REF_DT = 2.5e-5
MONITOR_TOL = 1e-10


def report(number, name, ok, detail=""):
    verdict = "PASS" if ok else "FAIL"
    print(f"\n[criterion {number:2d}] {name}: {verdict}  {detail}", flush=True)
    assert ok, f"criterion {number} ({name}): {detail}"


@pytest.fixture(scope="module")
def setup48():
    """Sphere shell problem shared by the solver-level criteria."""
    spec = GridSpec(48, 48, 48, 1.0 / 48)
    eps = epsilon_from_cells(5, spec.h)
    cloud = fit_to_domain(icosphere(4, 1.0), spec, margin=0.2)
    index = build_index(cloud, 2 * spec.h)
    d = distance_field(index, spec)
    return spec, eps, d


def make_params(spec, eps, dt, **kw):
    kw.setdefault("gamma", 5 * spec.h)
    kw.setdefault("gs_tol", 1e-14)
    return ModelParams(epsilon=eps, dt=dt, **kw)


def run_steps(spec, eps, d, dt, steps, **kw):
    """Returns (records, residual_rows, error); residual rows carry the
    per-step constraint residual and its bound."""
    p = make_params(spec, eps, dt, **kw)
    phi0 = init_phi(d, p)
    state = solver.initial_state(phi0, edge_function(phi0, p.lam), p)
    records = [diagnostics.record_step(state)]
    residual_rows = []
    error = None
    for _ in range(steps):
        try:
            state = solver.step(state)
        except solver.SolverConvergenceError as exc:
            error = exc
            break
        records.append(diagnostics.record_step(state))
        f_total = spec.cell_volume * float(np.sum(potential_F(state.phi_n.interior)))
        residual_rows.append((state.constraint_residual, 1e-6 * (1.0 + abs(f_total))))
    return records, residual_rows, error


@pytest.fixture(scope="module")
def stability_runs(setup48):
    """Criterion-2 ladder, shared with criterion 3."""
    spec, eps, d = setup48
    runs = {}
    for mult in (1, 10, 100, 1000):
        runs[mult] = run_steps(spec, eps, d, mult * REF_DT, 30)
    return runs


def test_criterion_01_temporal_convergence(setup48):
    spec, eps, d = setup48
    ref_steps = 128
    p0 = make_params(spec, eps, REF_DT, gs_tol=1e-16, newton_tol=1e-12)
    phi0 = init_phi(d, p0)
    g = edge_function(phi0, p0.lam)

    def final_field(dt, n):
        p = make_params(spec, eps, dt, gs_tol=1e-16, newton_tol=1e-12)
        state = solver.initial_state(phi0, g, p)
        for _ in range(n):
            state = solver.step(state)
        return state.phi_n

    ref = final_field(REF_DT, ref_steps)
    errors = []
    for mult in (2, 4, 8, 16):
        sol = final_field(mult * REF_DT, ref_steps // mult)
        diff = ScalarField(spec, sol.data - ref.data)
        errors.append(math.sqrt(h_norm_sq(diff)))
    rates = [math.log2(errors[i + 1] / errors[i]) for i in range(3)]
    ok = all(1.7 <= r <= 2.3 for r in rates)
    report(1, "temporal convergence", ok,
           f"errors={['%.3e' % e for e in errors]} rates={['%.3f' % r for r in rates]}")


def test_criterion_02_unconditional_energy_stability(stability_runs):
    details = []
    ok = True
    for mult, (records, _rows, error) in sorted(stability_runs.items()):
        if error is not None:
            ok = False
            details.append(f"{mult}x: run stopped after {len(records) - 1}/30 steps "
                           f"({type(error).__name__}: {error})")
            continue
        violations = diagnostics.monotonicity_report(records, MONITOR_TOL)
        if violations:
            ok = False
            details.append(f"{mult}x: {len(violations)} energy increase(s), first at step {violations[0][0]}")
        else:
            details.append(f"{mult}x: 30/30 steps monotone")
    report(2, "unconditional energy stability", ok, " | ".join(details))


def test_criterion_03_constraint_residual(stability_runs):
    checked = 0
    worst = 0.0
    ok = True
    for mult, (_records, rows, _error) in sorted(stability_runs.items()):
        for residual, bound in rows:
            checked += 1
            worst = max(worst, residual / bound)
            if residual > bound:
                ok = False
    report(3, "constraint residual", ok,
           f"{checked} accepted steps checked, worst residual/bound = {worst:.3e}")


def test_criterion_04_linear_solve_oracle():
    rng = np.random.default_rng(4)
    spec = GridSpec(4, 4, 4, 0.25)
    worst = 0.0
    for _ in range(10):
        p = ModelParams(epsilon=rng.uniform(0.1, 0.5), gamma=0.1, dt=rng.uniform(1e-4, 1e-2),
                        gs_tol=1e-28, gs_max=5000)
        g = ScalarField.from_interior(spec, rng.uniform(1e-3, 1.0, spec.shape))
        phi_n = random_field(spec, rng, 0.8)
        phi_nm1 = random_field(spec, rng, 0.8)
        phi_star = random_field(spec, rng, 1.0)
        state = solver.initial_state(phi_n, g, p)
        state.phi_nm1 = phi_nm1

        phi1, _, _ = solver.solve_phi1(state)
        r1 = phi_n.interior / p.dt
        r2 = (p.stabilization * (-phi_n.interior + 0.5 * phi_nm1.interior)
              - 0.5 * laplacian7(phi_n).interior)
        exp1, _ = dense_block_solve(spec.shape, spec.h, p.dt, p.stabilization, g.interior, r1, r2)
        worst = max(worst, np.abs(phi1.interior - exp1).max())

        phi2, _, _ = solver.solve_phi2(state, phi_star)
        from phaseshell import potential_dF
        r2b = potential_dF(phi_star.interior) / p.epsilon ** 2
        exp2, _ = dense_block_solve(spec.shape, spec.h, p.dt, p.stabilization, g.interior,
                                    np.zeros(spec.shape), r2b)
        worst = max(worst, np.abs(phi2.interior - exp2).max())
    report(4, "linear-solve oracle", worst <= 1e-8,
           f"10 instances, worst max-norm gap {worst:.3e}")


def test_criterion_05_quartic_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        root = rng.uniform(0.2, 1.8)
        s = rng.choice([-1.0, 1.0]) * rng.uniform(3.0, 6.0)
        a = rng.uniform(-1, 1)
        b = rng.uniform(0.3, 2.0) + a * a / 4
        poly = np.polymul(np.polymul([1.0, -root], [1.0, -s]), [1.0, a, b])
        expected = bisect_root(poly, 0.0, 2.0)
        q, _, _ = solve_Q(QuarticCoeffs(*poly), q_init=1.0)
        worst = max(worst, abs(q - expected))
    q_identity, iters, _ = solve_Q(QuarticCoeffs(0, 0, 0, 0, 0), q_init=0.3, degenerate_tol=1e-14)
    ok = worst <= 1e-9 and q_identity == 1.0 and iters == 0
    report(5, "quartic oracle", ok,
           f"100 bracketed roots, worst gap {worst:.3e}; degenerate convention q={q_identity}")


def test_criterion_06_operator_identities():
    rng = np.random.default_rng(6)
    spec = GridSpec(8, 8, 8, 0.125)
    worst = 0.0
    for _ in range(50):
        a, b = random_field(spec, rng), random_field(spec, rng)
        lhs = inner_h(a, laplacian7(b))
        rhs = -grad_inner_e(a, b)
        scale = math.sqrt(h_norm_sq(a)) * math.sqrt(grad_norm_sq(b)) + 1.0
        worst = max(worst, abs(lhs - rhs) / scale)
    sbp_ok = worst <= 1e-12

    x = spec.cell_centers()[..., 0]
    quad = ScalarField.from_interior(spec, x * x)
    lap = laplacian7(quad).interior[1:-1, :, :]
    quad_ok = np.abs(lap - 2.0).max() <= 1e-10

    f = random_field(spec, rng)
    d = f.data
    ghost_ok = (np.array_equal(d[0, 1:-1, 1:-1], d[1, 1:-1, 1:-1])
                and np.array_equal(d[-1, 1:-1, 1:-1], d[-2, 1:-1, 1:-1])
                and np.array_equal(d[1:-1, 0, 1:-1], d[1:-1, 1, 1:-1])
                and np.array_equal(d[1:-1, -1, 1:-1], d[1:-1, -2, 1:-1])
                and np.array_equal(d[1:-1, 1:-1, 0], d[1:-1, 1:-1, 1])
                and np.array_equal(d[1:-1, 1:-1, -1], d[1:-1, 1:-1, -2]))

    report(6, "operator identities", sbp_ok and quad_ok and ghost_ok,
           f"worst SBP residual {worst:.3e}; quadratic exactness {quad_ok}; ghosts exact {ghost_ok}")


def test_criterion_07_distance_field_oracle():
    rng = np.random.default_rng(7)
    spec = GridSpec(16, 16, 16, 1.0 / 16)
    centers = spec.cell_centers().reshape(-1, 3)
    worst = 0.0
    lipschitz_ok = True
    for _ in range(20):
        m = int(rng.integers(5, 1001))
        pts = rng.uniform(-0.2, 1.2, (m, 3))
        from phaseshell import PointCloud
        index = build_index(PointCloud(pts), 2 * spec.h)
        d = distance_field(index, spec)
        expected = brute_force_distances(centers, pts)
        worst = max(worst, np.abs(d.interior.ravel() - expected).max())
        tol = spec.h * (1 + 1e-12)
        for axis in range(3):
            if np.abs(np.diff(d.interior, axis=axis)).max() > tol:
                lipschitz_ok = False
    report(7, "distance-field oracle", worst <= 1e-14 and lipschitz_ok,
           f"20 clouds, worst |index - brute| = {worst:.3e}, 1-Lipschitz {lipschitz_ok}")


def test_criterion_08_epsilon_volume_ordering(setup48):
    spec, _, d = setup48
    eps_base = epsilon_from_cells(2, spec.h)
    eps_values = [eps_base * 2 ** k for k in range(4)]
    volumes = []
    for eps in eps_values:
        records, _, error = run_steps(spec, eps, d, REF_DT, 30)
        assert error is None, f"epsilon={eps:g} run failed: {error}"
        volumes.append([r.volume for r in records])
    volumes = np.array(volumes)  # [eps_index, time_index]

    decay_ok = bool(np.all(np.diff(volumes, axis=1) <= 1e-12))
    order_ok = bool(np.all(np.diff(volumes, axis=0) <= 1e-12))  # larger eps loses volume faster
    rates = volumes[:, -1] - volumes[:, 0]
    report(8, "epsilon-volume ordering", decay_ok and order_ok,
           f"per-run monotone decay {decay_ok}; cross-eps ordering {order_ok}; "
           f"initial volumes {['%.5f' % v for v in volumes[:, 0]]}; "
           f"decay over 30 steps {['%.2e' % r for r in rates]}")


def test_criterion_09_stabilization_study(setup48):
    spec, eps, d = setup48
    outcomes = {}
    dt = 100 * REF_DT
    escalations = 0
    while True:
        for label, s in (("S=0", 0.0), ("S=2/eps2", 2 / eps ** 2), ("S=4/eps2", 4 / eps ** 2)):
            records, _, error = run_steps(spec, eps, d, dt, 30, stabilization=s)
            if error is not None:
                kind = ("unstable(non-finite)" if isinstance(error, solver.SolverDivergenceError)
                        else f"failed({error})")
                outcomes[label] = kind
            elif diagnostics.monotonicity_report(records, MONITOR_TOL):
                outcomes[label] = "unstable(energy)"
            else:
                outcomes[label] = "stable"
        if outcomes["S=0"] != "stable" or dt >= 1e4 * REF_DT or escalations >= 2:
            break
        escalations += 1
        dt *= 10

    s0_flagged = outcomes["S=0"].startswith("unstable")
    stabilized_ok = outcomes["S=2/eps2"] == "stable" and outcomes["S=4/eps2"] == "stable"
    report(9, "stabilization study", s0_flagged and stabilized_ok,
           f"dt={dt:g}: " + ", ".join(f"{k}: {v}" for k, v in outcomes.items()))


def test_criterion_10_fixed_point_exactness():
    spec = GridSpec(12, 12, 12, 1.0 / 12)
    worst = 0.0
    for bulk in (1.0, -1.0):
        for dt in (1e-6, 1.0, 1e3):
            p = ModelParams(epsilon=0.05, gamma=0.1, dt=dt)
            phi0 = ScalarField.full(spec, bulk)
            state = solver.initial_state(phi0, edge_function(phi0, p.lam), p)
            for _ in range(100):
                state = solver.step(state)
                worst = max(worst, float(np.abs(state.phi_n.interior - bulk).max()))
    report(10, "fixed-point exactness", worst <= 1e-13,
           f"max drift over 100 steps at three step sizes, both bulks: {worst:.3e}")


def test_criterion_11_extraction_sanity():
    radius = 0.3
    areas = {}
    radii_ok = True
    watertight_ok = True
    for n in (32, 64):
        spec = GridSpec(n, n, n, 1.0 / n)
        r = np.linalg.norm(spec.cell_centers() - 0.5, axis=-1)
        phi = ScalarField.from_interior(spec, radius - r)
        mesh = marching_cubes(phi)
        vertex_radii = np.linalg.norm(mesh.vertices - 0.5, axis=1)
        if np.abs(vertex_radii - radius).max() > spec.h:
            radii_ok = False
        edges = Counter()
        for a, b, c in mesh.triangles:
            for u, v in ((a, b), (b, c), (c, a)):
                edges[tuple(sorted((u, v)))] += 1
        if set(edges.values()) != {2}:
            watertight_ok = False
        areas[n] = surface_area(mesh)
    exact = 4 * math.pi * radius ** 2
    converging = abs(areas[64] - exact) < abs(areas[32] - exact)
    report(11, "extraction sanity", radii_ok and watertight_ok and converging,
           f"radii within h: {radii_ok}; watertight: {watertight_ok}; "
           f"area errors {abs(areas[32] - exact):.4f} -> {abs(areas[64] - exact):.4f}")
