"""Time stepper for the edge-weighted phase-field flow.

One step solves two decoupled linear subproblems with per-cell 2x2 block
Gauss-Seidel relaxation, determines the scalar multiplier from a quartic
energy-constraint polynomial by Newton iteration, and recomposes the new
field as ``phi1 + q * phi2``.  Every accepted step dissipates the discrete
energy of :func:`phaseshell.diagnostics.discrete_energy`, regardless of the
step size.  What bounds the usable step is solvability, not stability: for
per-step changes beyond roughly dt = eps^2 the constraint polynomial can
lose its real root, in which case the step is rejected through the
constraint-residual bound instead of producing an inconsistent update.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .grid import ScalarField, laplacian7, sync_ghosts_inplace
from .phasefield import potential_dF, potential_F

log = logging.getLogger(__name__)


class SolverConvergenceError(RuntimeError):
    """An iteration cap was reached before the stop criterion was met."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverDivergenceError(SolverConvergenceError):
    """A sweep produced a non-finite value; names the first bad cell."""


@dataclass(frozen=True)
class QuarticCoeffs:
    """Coefficients of the scalar constraint polynomial P(q) = sum c_n q^n."""

    c4: float
    c3: float
    c2: float
    c1: float
    c0: float

    def as_array(self):
        return np.array([self.c4, self.c3, self.c2, self.c1, self.c0])

    def evaluate(self, q):
        return (((self.c4 * q + self.c3) * q + self.c2) * q + self.c1) * q + self.c0

    def derivative(self, q):
        return ((4.0 * self.c4 * q + 3.0 * self.c3) * q + 2.0 * self.c2) * q + self.c1


@dataclass
class SolverState:
    """Two history levels of the field plus the fixed edge weight.

    ``q_last`` warm-starts the next multiplier solve; the counters hold the
    iteration work of the most recent step.
    """

    phi_n: ScalarField
    phi_nm1: ScalarField
    g: ScalarField
    params: object
    step_index: int = 0
    t: float = 0.0
    q_last: float = 1.0
    gs_u: int = 0
    gs_v: int = 0
    newton_iters: int = 0
    constraint_residual: float = 0.0

    def __post_init__(self):
        if not (self.phi_n.spec == self.phi_nm1.spec == self.g.spec):
            raise ValueError("phi_n, phi_nm1, and g must share one grid")


def initial_state(phi0, g, params):
    """Bootstrap: both history levels start at phi0, so the first step's
    extrapolant is phi0 itself."""
    return SolverState(phi_n=phi0.copy(), phi_nm1=phi0.copy(), g=g.copy(), params=params)


def extrapolate(phi_n, phi_nm1):
    """Second-order history extrapolant 1.5 phi_n - 0.5 phi_nm1.

    Written as phi_n + 0.5 (phi_n - phi_nm1) so equal histories reproduce
    phi_n exactly.
    """
    if phi_n.spec != phi_nm1.spec:
        raise ValueError("grid mismatch in extrapolate")
    return ScalarField(phi_n.spec, phi_n.data + 0.5 * (phi_n.data - phi_nm1.data))


def _sweep_arrays(phi, mu, r1, r2, g, params, h, sq_diff=None):
    """One full relaxation pass, in place on padded arrays.

    Returns the squared h-norm of the phi increment.
    """
    inv_dt = 1.0 / params.dt
    inv_2h2 = 1.0 / (2.0 * h * h)
    row2_diag = -0.5 * params.stabilization - 6.0 * inv_2h2
    if params.sweep == "serial":
        acc = _kernels.gs_sweep_serial(phi, mu, r1, r2, g, inv_dt, row2_diag, inv_2h2)
    else:
        if sq_diff is None:
            sq_diff = np.empty((phi.shape[0] - 2, phi.shape[1] - 2, phi.shape[2] - 2))
        sq_diff.fill(0.0)
        _kernels.gs_sweep_color(phi, mu, r1, r2, g, inv_dt, row2_diag, inv_2h2, 0, sq_diff)
        _kernels.gs_sweep_color(phi, mu, r1, r2, g, inv_dt, row2_diag, inv_2h2, 1, sq_diff)
        acc = float(np.sum(sq_diff))
    return h ** 3 * acc


def _raise_if_diverged(phi, label):
    interior = phi[1:-1, 1:-1, 1:-1]
    if np.all(np.isfinite(interior)):
        return
    i, j, k = np.argwhere(~np.isfinite(interior))[0]
    raise SolverDivergenceError(
        f"{label}: non-finite value at cell ({i + 1}, {j + 1}, {k + 1})")


def gs_block_sweep(phi, mu, rhs1, rhs2, g, params):
    """One relaxation pass over fresh copies of (phi, mu).

    Each visited cell's (phi, mu) pair solves its 2x2 block exactly against
    the latest neighbor values.  Returns the updated fields and the squared
    h-norm of the phi increment.
    """
    phi_out = phi.copy()
    mu_out = mu.copy()
    inc_sq = _sweep_arrays(phi_out.data, mu_out.data, rhs1.data, rhs2.data,
                           g.data, params, phi.spec.h)
    if not np.isfinite(inc_sq):
        _raise_if_diverged(phi_out.data, "gs_block_sweep")
    sync_ghosts_inplace(phi_out.data)
    sync_ghosts_inplace(mu_out.data)
    return phi_out, mu_out, inc_sq


def _iterate_blocks(phi_init, r1, r2, g, params, spec, label):
    """Sweep until the squared-increment criterion is met; returns fields
    and the sweep count."""
    phi = np.ascontiguousarray(phi_init)
    mu = np.zeros_like(phi)
    sq_diff = None
    if params.sweep == "redblack":
        sq_diff = np.empty(spec.shape)
    for sweeps in range(1, params.gs_max + 1):
        inc_sq = _sweep_arrays(phi, mu, r1, r2, g.data, params, spec.h, sq_diff)
        if not np.isfinite(inc_sq):
            _raise_if_diverged(phi, label)
        if inc_sq <= params.gs_tol:
            sync_ghosts_inplace(phi)
            sync_ghosts_inplace(mu)
            return ScalarField(spec, phi), ScalarField(spec, mu), sweeps
    raise SolverConvergenceError(
        f"{label}: no convergence after {params.gs_max} sweeps "
        f"(last squared increment {inc_sq:.3e} > {params.gs_tol:.3e})",
        residual=inc_sq)


def solve_phi1(state):
    """Multiplier-independent subproblem; warm-started from phi_n.

    Returns (phi1, mu1, sweeps).
    """
    p = state.params
    r1 = state.phi_n.data / p.dt
    r2 = (p.stabilization * (-state.phi_n.data + 0.5 * state.phi_nm1.data)
          - 0.5 * laplacian7(state.phi_n).data)
    return _iterate_blocks(state.phi_n.data.copy(), r1, r2, state.g, p,
                           state.phi_n.spec, "solve_phi1")


def solve_phi2(state, phi_star):
    """Response to the nonlinear source at the extrapolated field.

    Returns (phi2, mu2, sweeps).
    """
    p = state.params
    r1 = np.zeros_like(phi_star.data)
    r2 = potential_dF(phi_star.data) / p.epsilon ** 2
    return _iterate_blocks(np.zeros_like(phi_star.data), r1, r2, state.g, p,
                           phi_star.spec, "solve_phi2")


def quartic_coefficients(phi1, phi2, phi_n, phi_star, params):
    """Assemble the constraint polynomial for the composed field phi1 + q phi2.

    P(q) equals the cell-sum of F(phi1 + q phi2) - F(phi_n) minus
    q times the inner product of F'(phi_star) with (phi1 + q phi2 - phi_n);
    its root is the multiplier that enforces the discrete chain rule of the
    double-well energy.
    """
    vol = phi1.spec.cell_volume
    p1 = phi1.interior
    p2 = phi2.interior
    pn = phi_n.interior
    fps = potential_dF(phi_star.interior)
    p1sq = p1 * p1
    p2sq = p2 * p2
    c4 = 0.25 * vol * float(np.sum(p2sq * p2sq))
    c3 = vol * float(np.sum(p1 * p2sq * p2))
    c2 = vol * (1.5 * float(np.sum(p1sq * p2sq))
                - 0.5 * float(np.sum(p2sq))
                - float(np.sum(p2 * fps)))
    c1 = vol * (float(np.sum(p1sq * p1 * p2))
                - float(np.sum(p1 * p2))
                - float(np.sum(fps * p1))
                + float(np.sum(fps * pn)))
    c0 = vol * float(np.sum(0.25 * p1sq * p1sq - 0.5 * p1sq - potential_F(pn) + 0.25))
    return QuarticCoeffs(c4, c3, c2, c1, c0)


def _bisect(coeffs, lo, hi, f_lo):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = coeffs.evaluate(mid)
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) == (f_mid < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bisection_fallback(coeffs, q_center):
    """Expanding-bracket bisection around the warm-start value."""
    half = 2.0
    for _ in range(10):
        lo, hi = q_center - half, q_center + half
        f_lo, f_hi = coeffs.evaluate(lo), coeffs.evaluate(hi)
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if (f_lo < 0.0) != (f_hi < 0.0):
            return _bisect(coeffs, lo, hi, f_lo)
        half *= 2.0
    raise SolverConvergenceError(
        f"multiplier solve: no sign change in [{q_center - half}, {q_center + half}]")


def _real_roots(poly):
    poly = np.asarray(poly)
    mask = np.abs(poly) > 0.0
    if not np.any(mask):
        return np.array([])
    roots = np.roots(poly[np.argmax(mask):])
    if len(roots) == 0:
        return np.array([])
    scale = np.maximum(1.0, np.abs(roots))
    return np.sort(roots[np.abs(roots.imag) <= 1e-9 * scale].real)


def _abs_minimizer(coeffs, q_fallback):
    """Real point minimizing |P| over the stationary points of P.

    Used when P has no real root (the constraint surface is tangent to or
    lifted off zero); the caller's residual bound decides whether the
    minimizer is acceptable.
    """
    candidates = [q_fallback] if np.isfinite(q_fallback) else []
    candidates.extend(_real_roots([4.0 * coeffs.c4, 3.0 * coeffs.c3, 2.0 * coeffs.c2, coeffs.c1]))
    if not candidates:
        return q_fallback
    values = [abs(coeffs.evaluate(q)) for q in candidates]
    return float(candidates[int(np.argmin(values))])


def solve_Q(coeffs, q_init, tol=1e-6, max_iter=200, degenerate_tol=0.0):
    """Root of the constraint polynomial; theoretically 1.

    Newton from ``q_init`` until the update drops below ``tol``; if the
    derivative collapses or the cap is hit, fall back to expanding-bracket
    bisection.  With several real roots the one closest to 1 is chosen (and
    the ambiguity logged).  All-vanishing coefficients mean the constraint is
    degenerate (e.g. uniform bulk) and q is 1 by convention.  When the
    polynomial has no real root at all (the near-1 root pair can merge and
    lift off for very large steps), the real minimizer of |P| is returned;
    the caller's constraint-residual bound decides whether it is acceptable.

    Returns (q, iterations, multiple_roots_detected).
    """
    c = coeffs.as_array()
    scale = float(np.max(np.abs(c)))
    if scale <= degenerate_tol:
        return 1.0, 0, False

    def polish(q, rounds=3):
        for _ in range(rounds):
            dp = coeffs.derivative(q)
            if abs(dp) < 1e-14 * scale:
                break
            q -= coeffs.evaluate(q) / dp
        return q

    iters = 0
    q = float(q_init)
    converged = False
    for _ in range(max_iter):
        iters += 1
        dp = coeffs.derivative(q)
        if abs(dp) < 1e-14 * scale:
            break
        dq = coeffs.evaluate(q) / dp
        q -= dq
        if abs(dq) <= tol:
            converged = True
            break

    roots = _real_roots(c)
    if len(roots) == 0:
        q_min = _abs_minimizer(coeffs, q if np.isfinite(q) else float(q_init))
        log.debug("constraint polynomial has no real root; returning |P| minimizer %g "
                  "with residual %.3e", q_min, abs(coeffs.evaluate(q_min)))
        return float(q_min), iters, False

    if not converged or not np.isfinite(q):
        try:
            q = polish(_bisection_fallback(coeffs, float(q_init)))
            iters += 60  # bisection work, counted against the same budget
        except SolverConvergenceError:
            q = float(roots[np.argmin(np.abs(roots - float(q_init)))])
            q = polish(q)

    multiple = len(roots) > 1
    if multiple:
        closest = roots[np.argmin(np.abs(roots - 1.0))]
        log.debug("constraint polynomial has %d real roots %s; using the one closest to 1",
                  len(roots), np.array2string(roots, precision=6))
        if abs(q - closest) > 1e-8 * max(1.0, abs(closest)):
            log.warning("multiplier solve converged to %g; switching to the root %g closest to 1",
                        q, closest)
            q = polish(float(closest))
    return float(q), iters, multiple


def step(state):
    """Advance one time level; returns a fresh state.

    Order: subproblem 1, subproblem 2, constraint polynomial, multiplier,
    recomposition, history shift.  Raises if a linear solve or the
    multiplier solve fails, or if the accepted field violates the energy
    constraint beyond tolerance.
    """
    p = state.params
    spec = state.phi_n.spec
    phi_star = extrapolate(state.phi_n, state.phi_nm1)
    phi1, _mu1, gs_u = solve_phi1(state)
    phi2, _mu2, gs_v = solve_phi2(state, phi_star)
    coeffs = quartic_coefficients(phi1, phi2, state.phi_n, phi_star, p)
    degenerate_tol = 1e-14 * spec.cell_volume * spec.n_cells
    q, newton_iters, _multi = solve_Q(coeffs, state.q_last, p.newton_tol,
                                      p.newton_max, degenerate_tol)

    phi_new = ScalarField(spec, phi1.data + q * phi2.data)
    sync_ghosts_inplace(phi_new.data)
    _raise_if_diverged(phi_new.data, "step")

    residual = abs(coeffs.evaluate(q))
    f_total = spec.cell_volume * float(np.sum(potential_F(phi_new.interior)))
    bound = p.newton_tol * (1.0 + abs(f_total))
    if residual > bound:
        raise SolverConvergenceError(
            f"constraint residual {residual:.3e} exceeds bound {bound:.3e}",
            residual=residual)

    return replace(state,
                   phi_n=phi_new,
                   phi_nm1=state.phi_n,
                   step_index=state.step_index + 1,
                   t=state.t + p.dt,
                   q_last=q,
                   gs_u=gs_u,
                   gs_v=gs_v,
                   newton_iters=newton_iters,
                   constraint_residual=residual)
