"""Model parameters, double-well potential, initial profile, and edge weight."""

import math
from dataclasses import dataclass

import numpy as np

from .grid import ScalarField, sync_ghosts_inplace

#: half-width (in cells) of a transition layer covering 90% of the jump
_TANH90 = 2.0 * math.sqrt(2.0) * math.atanh(0.9)


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the edge-weighted flow and its solver.

    ``chi`` (initial profile steepness) defaults to ``epsilon / 2`` and must
    stay below ``epsilon``.  ``stabilization`` defaults to ``2 / epsilon**2``;
    0 disables the damping term.  ``gs_tol`` bounds the squared h-norm of one
    relaxation sweep's increment, ``newton_tol`` the multiplier update.
    """

    epsilon: float
    gamma: float
    dt: float
    chi: float = None
    lam: float = 1e-10
    stabilization: float = None
    gs_tol: float = 1e-6
    newton_tol: float = 1e-6
    gs_max: int = 500
    newton_max: int = 200
    sweep: str = "serial"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.chi is None:
            object.__setattr__(self, "chi", 0.5 * self.epsilon)
        if not 0 < self.chi < self.epsilon:
            raise ValueError(f"chi must lie in (0, epsilon), got chi={self.chi} epsilon={self.epsilon}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.stabilization is None:
            object.__setattr__(self, "stabilization", 2.0 / self.epsilon ** 2)
        if self.stabilization < 0:
            raise ValueError(f"stabilization must be >= 0, got {self.stabilization}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.sweep not in ("serial", "redblack"):
            raise ValueError(f"sweep must be 'serial' or 'redblack', got {self.sweep!r}")


def potential_F(phi):
    """Double-well density 0.25 (phi^2 - 1)^2; zero exactly at phi = +/-1."""
    phi = np.asarray(phi)
    return 0.25 * (phi * phi - 1.0) ** 2


def potential_dF(phi):
    """Derivative of the double well: phi^3 - phi."""
    phi = np.asarray(phi)
    return phi * phi * phi - phi


def init_phi(d, p):
    """Initial profile tanh((gamma - d) / (sqrt(2) chi)) from a distance field.

    Positive inside the shell {d < gamma}, zero exactly on d = gamma, and
    saturating to -1 away from the samples.
    """
    out = ScalarField(d.spec)
    out.data[...] = np.tanh((p.gamma - d.data) / (math.sqrt(2.0) * p.chi))
    sync_ghosts_inplace(out.data)
    return out


def edge_function(phi0, lam=1e-10):
    """Interface indicator 1 - phi0^2 + lam, fixed for the whole run.

    Bounded in [lam, 1 + lam]; the floor keeps the weighted flow
    non-degenerate everywhere.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    out = ScalarField(phi0.spec)
    out.data[...] = 1.0 - phi0.data * phi0.data + lam
    sync_ghosts_inplace(out.data)
    return out


def epsilon_from_cells(m, h):
    """Interface thickness whose 90% transition layer spans m grid cells."""
    if not m > 0:
        raise ValueError(f"cell count must be positive, got {m}")
    return m * h / _TANH90
