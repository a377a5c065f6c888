"""Newtonian scattering dynamics behind the self-consistent curvature system.

A unit-mass particle at Cartesian position (xi, eta) moves in the fixed
external potential V(xi, eta) = eta * exp(2*xi) / 2, so the equations of
motion are

    xi''  = -eta * exp(2*xi)
    eta'' = -(1/2) * exp(2*xi)

with conserved total energy 2E = xi'^2 + eta'^2 + eta*exp(2*xi).  Every
admitted scattering motion has E = 1/2 exactly, which confines it to the
region eta < exp(-2*xi); the complement is the forbidden zone and its
boundary eta = exp(-2*xi) is the locus of zero-velocity (singular) points.

The load parameter of the underlying plate problem is gauge-fixed to 1
(``GAUGE_LOAD``).  Other load values are reachable only through the
homologous symmetry xi -> xi + xi_h, t -> exp(-xi_h) t, which rescales the
energy by exp(2*xi_h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Union

import numpy as np

if TYPE_CHECKING:  # only for annotations; Trajectory lives in integrator
    from .integrator import Trajectory

#: Load parameter of the plate equation, gauge-fixed.  Not a knob: general
#: loads are represented by applying the homologous symmetry to E = 1/2 runs.
GAUGE_LOAD: float = 1.0

# exp argument beyond which exp(2*xi) is not representable in float64
_EXP_ARG_LIMIT = 709.0


class BlowUpSignal(Exception):
    """Force evaluation left the representable range (finite-time blow-up).

    Carries the last valid phase point so callers can report where the
    trajectory left the scattering regime instead of crashing.
    """

    def __init__(self, point: "PhasePoint", reason: str):
        super().__init__(reason)
        self.point = point
        self.reason = reason


@dataclass(frozen=True)
class PhasePoint:
    """Instantaneous state (t, xi, eta, xi_dot, eta_dot) of the particle."""

    t: float
    xi: float
    eta: float
    xi_dot: float
    eta_dot: float

    def __post_init__(self):
        for name in ("t", "xi", "eta", "xi_dot", "eta_dot"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"PhasePoint field {name} must be finite, got {v!r}")


def rhs(p: PhasePoint) -> tuple[float, float, float, float]:
    """Right-hand side (xi', xi'', eta', eta'') of the equations of motion.

    Autonomous: depends on (xi, eta) only.  Raises BlowUpSignal instead of
    overflowing when 2*xi exceeds the float64 exponent range.
    """
    if 2.0 * p.xi > _EXP_ARG_LIMIT:
        raise BlowUpSignal(p, "exp(2*xi) overflows float64: finite-time blow-up")
    e2 = math.exp(2.0 * p.xi)
    return (p.xi_dot, -p.eta * e2, p.eta_dot, -0.5 * e2)


def energy(p: PhasePoint) -> float:
    """Total energy E = (xi'^2 + eta'^2 + eta*exp(2*xi)) / 2."""
    if 2.0 * p.xi > _EXP_ARG_LIMIT:
        raise BlowUpSignal(p, "exp(2*xi) overflows float64 in the potential term")
    return 0.5 * (p.xi_dot**2 + p.eta_dot**2 + p.eta * math.exp(2.0 * p.xi))


class Zone(Enum):
    ALLOWED = "allowed"
    BOUNDARY = "boundary"
    FORBIDDEN = "forbidden"


def in_forbidden_zone(xi: float, eta: float, boundary_tol: float = 1e-9) -> Zone:
    """Classify a position against the E = 1/2 forbidden zone eta > exp(-2*xi).

    The test is on the product eta*exp(2*xi): the energy law makes it equal
    1 - speed^2 on admitted motions, so the boundary tolerance ties directly
    to energy drift.
    """
    if not (math.isfinite(xi) and math.isfinite(eta)):
        raise ValueError("in_forbidden_zone requires finite inputs")
    if 2.0 * xi > _EXP_ARG_LIMIT:
        # exp(-2*xi) underflows to 0: any eta > 0 is deep inside the zone
        q = math.inf if eta > 0 else -math.inf if eta < 0 else 0.0
    else:
        q = eta * math.exp(2.0 * xi)
    if abs(q - 1.0) <= boundary_tol:
        return Zone.BOUNDARY
    return Zone.FORBIDDEN if q > 1.0 else Zone.ALLOWED


# --- symmetry transformations -------------------------------------------------


@dataclass(frozen=True)
class TimeTranslate:
    t0: float


@dataclass(frozen=True)
class TimeReverse:
    pass


@dataclass(frozen=True)
class Homologous:
    xi_h: float


Symmetry = Union[TimeTranslate, TimeReverse, Homologous]


def transform_point(p: PhasePoint, s: Symmetry) -> PhasePoint:
    """Apply a symmetry to a single phase point."""
    if isinstance(s, TimeTranslate):
        return replace(p, t=p.t + s.t0)
    if isinstance(s, TimeReverse):
        return PhasePoint(-p.t, p.xi, p.eta, -p.xi_dot, -p.eta_dot)
    if isinstance(s, Homologous):
        scale = math.exp(s.xi_h)
        return PhasePoint(p.t / scale, p.xi + s.xi_h, p.eta,
                          p.xi_dot * scale, p.eta_dot * scale)
    raise TypeError(f"unknown symmetry {s!r}")


def apply_symmetry(traj: "Trajectory", s: Symmetry) -> "Trajectory":
    """Transform a whole trajectory under a symmetry of the equations of motion.

    Sample energies are unchanged by time translation and time reversal and
    scaled by exp(2*xi_h) under the homologous map; max_energy_drift is
    rescaled accordingly.  Event times are remapped.  The asymptotics field
    keeps echoing the data that generated the original samples (a reversed or
    homologously scaled trajectory is not in E = 1/2 scattering normal form).
    """
    from .integrator import Trajectory, TrajectoryEvents  # local: avoid cycle

    ev = traj.events

    def map_time(x):
        if x is None:
            return None
        if isinstance(s, TimeTranslate):
            return x + s.t0
        if isinstance(s, TimeReverse):
            return -x
        return x * math.exp(-s.xi_h)

    blow = ev.blowup
    if blow is not None:
        blow = replace(blow, last_state=transform_point(blow.last_state, s))
    new_ev = TrajectoryEvents(map_time(ev.t0), map_time(ev.t_half), map_time(ev.t_m), blow)

    if isinstance(s, TimeTranslate):
        return replace(traj, t=traj.t + s.t0, events=new_ev)
    if isinstance(s, TimeReverse):
        sl = slice(None, None, -1)
        return replace(
            traj,
            t=-traj.t[sl],
            xi=traj.xi[sl].copy(),
            eta=traj.eta[sl].copy(),
            xi_dot=-traj.xi_dot[sl],
            eta_dot=-traj.eta_dot[sl],
            uniform_mask=traj.uniform_mask[sl].copy(),
            events=new_ev,
        )
    if isinstance(s, Homologous):
        scale = math.exp(s.xi_h)
        return replace(
            traj,
            t=traj.t / scale,
            xi=traj.xi + s.xi_h,
            xi_dot=traj.xi_dot * scale,
            eta_dot=traj.eta_dot * scale,
            max_energy_drift=traj.max_energy_drift * scale**2,
            events=new_ev,
        )
    raise TypeError(f"unknown symmetry {s!r}")


def energy_array(xi: np.ndarray, eta: np.ndarray,
                 xi_dot: np.ndarray, eta_dot: np.ndarray) -> np.ndarray:
    """Vectorized energy along sampled arrays."""
    return 0.5 * (xi_dot**2 + eta_dot**2 + eta * np.exp(2.0 * xi))
