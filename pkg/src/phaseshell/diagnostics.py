"""Energy, volume, and multiplier telemetry for solver runs.

The energies use exactly the solver's discrete inner products, so the
monotone-decay property they monitor is the one the scheme provably
satisfies, not a quadrature approximation of it.
"""

from dataclasses import dataclass

import numpy as np

from .grid import grad_norm_sq
from .phasefield import potential_F


@dataclass(frozen=True)
class EnergyRecord:
    """Per-step diagnostics row."""

    step: int
    t: float
    q: float
    e_tilde: float
    e_original: float
    volume: float
    gs_u: int
    gs_v: int
    newton_iters: int


def discrete_energy(phi_np1, phi_n, params):
    """Lyapunov functional of the fully discrete scheme.

    (1/eps^2) * cell-sum of F(phi_np1) + half the squared edge-gradient norm
    + (S/4) * squared h-norm of the last increment.  Non-negative, and
    non-increasing over every step the solver accepts.
    """
    if phi_np1.spec != phi_n.spec:
        raise ValueError("grid mismatch in discrete_energy")
    vol = phi_np1.spec.cell_volume
    bulk = vol * float(np.sum(potential_F(phi_np1.interior))) / params.epsilon ** 2
    grad = 0.5 * grad_norm_sq(phi_np1)
    diff = phi_np1.interior - phi_n.interior
    damp = 0.25 * params.stabilization * vol * float(np.sum(diff * diff))
    return bulk + grad + damp


def original_energy(phi, params):
    """Ginzburg-Landau energy of a single field (no history term)."""
    vol = phi.spec.cell_volume
    bulk = vol * float(np.sum(potential_F(phi.interior))) / params.epsilon ** 2
    return bulk + 0.5 * grad_norm_sq(phi)


def volume(phi, spec):
    """Diffuse indicator volume: h^3 * sum of (1 + phi) / 2."""
    return spec.cell_volume * float(np.sum(0.5 * (1.0 + phi.interior)))


def record_step(state):
    """EnergyRecord for a state produced by :func:`phaseshell.solver.step`."""
    return EnergyRecord(
        step=state.step_index,
        t=state.t,
        q=state.q_last,
        e_tilde=discrete_energy(state.phi_n, state.phi_nm1, state.params),
        e_original=original_energy(state.phi_n, state.params),
        volume=volume(state.phi_n, state.phi_n.spec),
        gs_u=state.gs_u,
        gs_v=state.gs_v,
        newton_iters=state.newton_iters,
    )


def monotonicity_report(records, rel_tol=1e-10):
    """Steps where the discrete energy increased beyond tolerance.

    Returns a list of (step, previous_energy, energy) triples; an empty list
    means the decay law held at every recorded step.
    """
    if len(records) < 2:
        raise ValueError("need at least two records to check monotonicity")
    violations = []
    for prev, cur in zip(records, records[1:]):
        if cur.e_tilde > prev.e_tilde + rel_tol * (1.0 + abs(prev.e_tilde)):
            violations.append((cur.step, prev.e_tilde, cur.e_tilde))
    return violations
