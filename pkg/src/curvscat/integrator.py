"""Adaptive integration of the scattering equations from asymptotic data.

Runs start at t_start = t0_lower - t_start_offset, deep enough in the past
that the free-motion expansion error O(w^2) with w = exp(2*(xi_in+t_start))
sits below the integration tolerances.  Stepping uses an embedded adaptive
Runge-Kutta pair with dense output (DOP853); the scheme is incidental, the
contract is the tolerances.

A run ends in one of three ways:
  * escape: |eta*exp(2*xi)| and |speed^2 - 1| both below escape_tol while
    xi_dot < 0 (the gate keeps the criterion from firing on the inbound leg,
    where the potential term is equally small);
  * blow-up: xi crosses blowup_xi, reported as a structured record carrying
    the last valid state, never as an exception;
  * budget exhausted: no escape within max_time after t_start.

Escaped runs are continued past the escape point up to
max(t0 + min_tail, t_escape + tail_pad) so the eta = 0 crossing and the
asymptotic tail are inside the sampled window; the crossing can happen far
beyond escape (it scales like eta_in/|sin Theta|).

Samples are taken on a uniform grid at dense_step spacing, with the refined
event times inserted as extra sample points (uniform_mask marks the regular
subgrid, which downstream radial reconstruction uses).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .closed_forms import AsymptoticData, explicit_bounds, free_motion_expansion
from .dynamics import PhasePoint, energy_array


class NotConvergedError(Exception):
    """Raised when a deflection angle is requested from a non-escaped run."""


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and windowing for integrate().

    max_time is a duration budget measured from the start time.  min_tail and
    tail_pad control how far past the eta = 0 crossing and the escape point a
    run is extended; blowup_xi is the xi level declared a finite-time
    blow-up (far below the exp overflow threshold, and unreachable by any
    scattering motion, whose xi stays near or below xi_in + t0_lower).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_start_offset: float = 14.0
    escape_tol: float = 1e-7
    max_time: float = 600.0
    boundary_tol: float = 1e-9
    dense_step: float = 0.01
    min_tail: float = 12.0
    tail_pad: float = 6.0
    blowup_xi: float = 30.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "t_start_offset", "escape_tol",
                     "max_time", "boundary_tol", "dense_step", "min_tail",
                     "tail_pad"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"SolverConfig.{name} must be positive")


@dataclass(frozen=True)
class BlowUpRecord:
    last_state: PhasePoint
    reason: str


@dataclass(frozen=True)
class TrajectoryEvents:
    """Detected event times: eta = 0 (t0), eta = eta_in/2 (t_half), xi_dot = 0
    (t_m), plus an optional blow-up record.  Absent events stay None."""

    t0: Optional[float] = None
    t_half: Optional[float] = None
    t_m: Optional[float] = None
    blowup: Optional[BlowUpRecord] = None


@dataclass(frozen=True)
class Trajectory:
    """Dense time-ordered samples of one run, with events and drift metrics."""

    t: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    xi_dot: np.ndarray
    eta_dot: np.ndarray
    uniform_mask: np.ndarray          # True on the dense_step subgrid
    events: TrajectoryEvents
    max_energy_drift: float
    asymptotics: AsymptoticData
    escaped: bool
    config: SolverConfig

    def __post_init__(self):
        if len(self.t) and np.any(np.diff(self.t) <= 0.0):
            raise ValueError("trajectory samples must be strictly increasing in t")
        for arr in (self.t, self.xi, self.eta, self.xi_dot, self.eta_dot, self.uniform_mask):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def samples(self) -> Iterator[PhasePoint]:
        for k in range(len(self.t)):
            yield self.point(k)

    def point(self, k: int) -> PhasePoint:
        return PhasePoint(float(self.t[k]), float(self.xi[k]), float(self.eta[k]),
                          float(self.xi_dot[k]), float(self.eta_dot[k]))

    def energies(self) -> np.ndarray:
        return energy_array(self.xi, self.eta, self.xi_dot, self.eta_dot)


def _rhs(t, y):
    # clamp keeps embedded-stage evaluations finite near blow-up; the
    # terminal blow-up event fires long before the clamp becomes active
    e2 = math.exp(min(2.0 * y[0], 700.0))
    return (y[1], -y[2] * e2, y[3], -0.5 * e2)


def _start_time(a: AsymptoticData, cfg: SolverConfig) -> float:
    if a.eta_in > 0.0:
        return explicit_bounds(a).t0_lower - cfg.t_start_offset
    # no t0_lower for non-scattering data; anchor the offset at xi_in so the
    # truncation w = exp(-2*t_start_offset) is unchanged
    return -a.xi_in - cfg.t_start_offset


def integrate(a: AsymptoticData, cfg: SolverConfig = SolverConfig()) -> Trajectory:
    """Integrate the scattering equations for the given asymptotic data.

    Always returns a Trajectory; blow-up and budget exhaustion are encoded in
    events.blowup and the escaped flag.
    """
    t_start = _start_time(a, cfg)
    p0 = free_motion_expansion(t_start, a)
    y0 = np.array([p0.xi, p0.xi_dot, p0.eta, p0.eta_dot])

    def ev_escape(t, y):
        if y[1] >= 0.0:
            return 1.0
        p = abs(y[2] * math.exp(min(2.0 * y[0], 700.0)))
        s = abs(y[1] * y[1] + y[3] * y[3] - 1.0)
        return max(p, s) - cfg.escape_tol
    ev_escape.terminal = True
    ev_escape.direction = -1

    def ev_blowup(t, y):
        return y[0] - cfg.blowup_xi
    ev_blowup.terminal = True
    ev_blowup.direction = 1

    def ev_eta0(t, y):
        return y[2]
    ev_eta0.direction = -1

    def ev_half(t, y):
        return y[2] - 0.5 * a.eta_in if a.eta_in > 0.0 else 1.0
    ev_half.direction = -1

    def ev_xidot(t, y):
        return y[1]
    ev_xidot.direction = -1

    kw = dict(method="DOP853", rtol=cfg.rel_tol, atol=cfg.abs_tol, dense_output=True)
    sol1 = solve_ivp(_rhs, (t_start, t_start + cfg.max_time), y0,
                     events=[ev_escape, ev_blowup, ev_eta0, ev_half, ev_xidot], **kw)
    segments = [sol1]

    def first(ev_list):
        return float(ev_list[0]) if len(ev_list) else None

    t_escape = first(sol1.t_events[0])
    t_blow = first(sol1.t_events[1])
    t0 = first(sol1.t_events[2])
    t_half = first(sol1.t_events[3])
    t_m = first(sol1.t_events[4])
    t_end = float(sol1.t[-1])
    escaped = t_escape is not None
    blowup = None

    if t_blow is None and sol1.status == -1:
        # adaptive steps collapsed below the number spacing: the solution is
        # diverging faster than the blow-up event level can be crossed
        t_blow = t_end
    if t_blow is not None:
        y = sol1.sol(t_blow)
        blowup = BlowUpRecord(
            last_state=PhasePoint(t_blow, float(y[0]), float(y[2]), float(y[1]), float(y[3])),
            reason=("finite-time divergence: xi crossed the blow-up level"
                    if sol1.status == 1 else
                    "finite-time divergence: step size collapsed at blow-up"),
        )
        t_end = t_blow
        escaped = False
    elif escaped:
        budget = t_start + cfg.max_time
        if t0 is None:
            # eta = 0 lies beyond the escape point; from here the motion is
            # free to machine accuracy, so the crossing time is predictable
            y = sol1.sol(t_escape)
            guess = t_escape + (-y[2] / y[3] if y[3] < 0.0 else 0.0)
            stretch_end = min(max(guess + cfg.min_tail, t_escape + cfg.tail_pad) + 1.0, budget)
            if stretch_end > t_escape:
                sol2 = solve_ivp(_rhs, (t_escape, stretch_end), y,
                                 events=[ev_eta0, ev_half], **kw)
                segments.append(sol2)
                if t0 is None:
                    t0 = first(sol2.t_events[0])
                if t_half is None:
                    t_half = first(sol2.t_events[1])
                t_end = float(sol2.t[-1])
        want = max(t_escape + cfg.tail_pad,
                   (t0 + cfg.min_tail) if t0 is not None else t_end)
        want = min(want, budget)
        if want > t_end:
            y = segments[-1].sol(t_end)
            sol3 = solve_ivp(_rhs, (t_end, want), y, **kw)
            segments.append(sol3)
            t_end = float(sol3.t[-1])

    # --- sampling ---------------------------------------------------------
    h = cfg.dense_step
    n = int(math.floor((t_end - t_start) / h * (1.0 + 1e-12)))
    ts = t_start + h * np.arange(n + 1)
    mask = np.ones(len(ts), dtype=bool)
    if t_end - ts[-1] > 1e-9 * h:
        ts = np.append(ts, t_end)
        mask = np.append(mask, False)
    for t_ev in (t0, t_half, t_m):
        if t_ev is None or not (t_start <= t_ev <= t_end):
            continue
        k = int(np.searchsorted(ts, t_ev))
        near = (k < len(ts) and abs(ts[k] - t_ev) < 1e-12) or \
               (k > 0 and abs(ts[k - 1] - t_ev) < 1e-12)
        if not near:
            ts = np.insert(ts, k, t_ev)
            mask = np.insert(mask, k, False)

    Y = np.empty((4, len(ts)))
    seg_ends = np.array([float(s.t[-1]) for s in segments])
    idx = np.searchsorted(seg_ends[:-1], ts, side="left") if len(segments) > 1 else \
        np.zeros(len(ts), dtype=int)
    for k, s in enumerate(segments):
        m = idx == k
        if m.any():
            Y[:, m] = s.sol(ts[m])

    xi, xi_dot, eta, eta_dot = Y[0], Y[1], Y[2], Y[3]
    drift = float(np.max(np.abs(2.0 * energy_array(xi, eta, xi_dot, eta_dot) - 1.0)))

    return Trajectory(
        t=ts, xi=xi, eta=eta, xi_dot=xi_dot, eta_dot=eta_dot, uniform_mask=mask,
        events=TrajectoryEvents(t0=t0, t_half=t_half, t_m=t_m, blowup=blowup),
        max_energy_drift=drift, asymptotics=a, escaped=escaped, config=cfg,
    )


def meets_escape_criterion(traj: Trajectory, k: int = -1) -> bool:
    """Escape test on one sample: both residuals small and heading outward."""
    tol = traj.config.escape_tol
    pot = abs(traj.eta[k] * math.exp(2.0 * traj.xi[k]))
    spd = abs(traj.xi_dot[k] ** 2 + traj.eta_dot[k] ** 2 - 1.0)
    return pot < tol and spd < tol and traj.xi_dot[k] < 0.0


def deflection(traj: Trajectory) -> float:
    """Deflection angle Theta = atan2(eta_dot, xi_dot) at the final sample.

    Accepted scattering runs land in (-pi, -pi/2): both final velocities are
    negative.  Raises NotConvergedError when the run did not escape or the
    final sample fails the escape criterion.
    """
    if traj.events.blowup is not None:
        raise NotConvergedError(f"blow-up: {traj.events.blowup.reason}")
    if not traj.escaped:
        raise NotConvergedError("no escape within the time budget")
    if not meets_escape_criterion(traj):
        raise NotConvergedError("final sample fails the escape criterion")
    return math.atan2(float(traj.eta_dot[-1]), float(traj.xi_dot[-1]))


def energy_drift(traj: Trajectory) -> float:
    """max over samples of |2 E - 1|."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    return float(np.max(np.abs(2.0 * traj.energies() - 1.0)))


def _hermite(t, t0, t1, y0, y1, d0, d1):
    # cubic Hermite on [t0, t1] through (y0, d0), (y1, d1)
    hh = t1 - t0
    s = (t - t0) / hh
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * hh * d0 + h01 * y1 + h11 * hh * d1


def _refine_crossing(tl, tr, yl, yr, dl, dr, xtol=1e-12):
    # bisection of the +/- crossing on the Hermite model of the bracket
    lo, hi = tl, tr
    flo = yl

    def f(x):
        return _hermite(x, tl, tr, yl, yr, dl, dr)

    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detect_events(traj: Trajectory) -> TrajectoryEvents:
    """Re-derive event times from the samples alone.

    Sign changes are located by scanning and refined by bisection (to 1e-12
    in t) on a local cubic Hermite model built from the sampled values and
    their sampled derivatives.  Absent events are reported absent; a stored
    blow-up record is passed through.
    """
    if len(traj) < 2:
        raise ValueError("need at least 2 samples to detect events")
    t, xi, eta, xi_dot, eta_dot = traj.t, traj.xi, traj.eta, traj.xi_dot, traj.eta_dot
    xi_ddot = -eta * np.exp(2.0 * xi)
    ein = traj.asymptotics.eta_in

    def first_downward(y, d):
        ix = np.nonzero((y[:-1] > 0.0) & (y[1:] <= 0.0))[0]
        if len(ix) == 0:
            return None
        k = int(ix[0])
        return _refine_crossing(float(t[k]), float(t[k + 1]), float(y[k]), float(y[k + 1]),
                                float(d[k]), float(d[k + 1]))

    t0 = first_downward(eta, eta_dot)
    t_half = first_downward(eta - 0.5 * ein, eta_dot) if ein > 0.0 else None
    t_m = first_downward(xi_dot, xi_ddot)
    return TrajectoryEvents(t0=t0, t_half=t_half, t_m=t_m, blowup=traj.events.blowup)
