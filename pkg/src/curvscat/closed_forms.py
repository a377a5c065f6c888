"""Closed-form envelopes, explicit bounds, and the asymptotic start state.

For past-infinity data (xi_in, eta_in) with eta_in > 0 the zeroth iterate of
the past-zone fixed-point scheme has the closed form

    xi_sub(t) = -ln cosh(t + xi_in - ln(2/sqrt(eta_in))) - ln sqrt(eta_in)

which is a subsolution of xi, and the half-level supersolution is

    xi_sup(t) = -ln cosh(t + xi_in - ln(2 sqrt(2/eta_in))) - ln sqrt(eta_in/2),

valid as an upper bound while eta > eta_in/2.  Integrating exp(2*xi_sub)
twice gives the first eta-iterate in closed form.  Setting the n-independent
lower bound eta_in - exp(2*xi_in + 2*t)/8 to 0 and eta_in/2 yields the
explicit time bounds t0_lower and t_half_lower; the cosh arguments vanish at
the envelope maxima tm0 and tm_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import PhasePoint

#: Upper estimate sqrt(2)*exp(arcosh 2) for the scattering-onset level of
#: eta_in; above it the position coordinate xi is guaranteed to attain an
#: interior maximum before the eta = 0 crossing.
ETA_CRIT_UPPER: float = math.sqrt(2.0) * (2.0 + math.sqrt(3.0))

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class AsymptoticData:
    """Past-infinity scattering data: xi - t -> xi_in, eta -> eta_in."""

    xi_in: float
    eta_in: float

    def __post_init__(self):
        if not (math.isfinite(self.xi_in) and math.isfinite(self.eta_in)):
            raise ValueError("asymptotic data must be finite")

    @property
    def is_scattering_candidate(self) -> bool:
        """eta_in > 0 is necessary for a deflected escaping motion."""
        return self.eta_in > 0.0


@dataclass(frozen=True)
class BoundsReport:
    """Explicit lower bounds for event times and envelope maxima locations."""

    t0_lower: float        # below the eta = 0 crossing time
    t_half_lower: float    # below the eta = eta_in/2 crossing time
    tm0: float             # maximum location of the subsolution envelope
    tm_hat: float          # maximum location of the supersolution envelope
    eta_crit_upper: float  # = ETA_CRIT_UPPER, independent of the data


def lncosh(z):
    """ln cosh z, overflow-safe: |z| - ln 2 + ln(1 + exp(-2|z|))."""
    z = np.abs(z)
    return z - _LN2 + np.log1p(np.exp(-2.0 * z))


def _require_positive_eta_in(a: AsymptoticData) -> None:
    if a.eta_in <= 0.0:
        raise ValueError(f"eta_in must be positive, got {a.eta_in}")


def xi_subsolution(t, a: AsymptoticData):
    """Closed-form lower envelope of xi(t), exact zeroth iterate."""
    _require_positive_eta_in(a)
    z = np.asarray(t, dtype=float) + a.xi_in - math.log(2.0 / math.sqrt(a.eta_in))
    out = -lncosh(z) - 0.5 * math.log(a.eta_in)
    return float(out) if np.isscalar(t) else out


def eta_first_iterate(t, a: AsymptoticData):
    """Closed form of the first eta-iterate; tends to eta_in as t -> -inf."""
    _require_positive_eta_in(a)
    e = a.eta_in
    tv = np.asarray(t, dtype=float)
    z = tv + a.xi_in - math.log(2.0 / math.sqrt(e))
    out = (-lncosh(z) / (2.0 * e) - tv / (2.0 * e) - a.xi_in / (2.0 * e)
           + e - math.log(e) / (4.0 * e))
    return float(out) if np.isscalar(t) else out


def xi_supersolution(t, a: AsymptoticData):
    """Closed-form upper envelope of xi(t), valid while eta > eta_in/2."""
    _require_positive_eta_in(a)
    z = np.asarray(t, dtype=float) + a.xi_in - math.log(2.0 * math.sqrt(2.0 / a.eta_in))
    out = -lncosh(z) - 0.5 * math.log(0.5 * a.eta_in)
    return float(out) if np.isscalar(t) else out


def explicit_bounds(a: AsymptoticData) -> BoundsReport:
    """Explicit time bounds and envelope maxima for the given data."""
    _require_positive_eta_in(a)
    e = a.eta_in
    return BoundsReport(
        t0_lower=math.log(2.0 * math.sqrt(2.0 * e)) - a.xi_in,
        t_half_lower=math.log(2.0 * math.sqrt(e)) - a.xi_in,
        tm0=math.log(2.0 / math.sqrt(e)) - a.xi_in,
        tm_hat=math.log(2.0 * math.sqrt(2.0 / e)) - a.xi_in,
        eta_crit_upper=ETA_CRIT_UPPER,
    )


def t0_state_bounds(a: AsymptoticData) -> tuple[float, float, float]:
    """Bounds on (xi, xi_dot, eta_dot) at the eta = 0 crossing time.

    Returns (xi_upper, xi_dot_upper, eta_dot_lower).  Valid in the regime
    eta_in > ETA_CRIT_UPPER where xi has an interior maximum before the
    crossing; xi_dot_upper is then negative.
    """
    _require_positive_eta_in(a)
    e = a.eta_in
    lc = float(lncosh(math.log(e / math.sqrt(2.0))))
    xi_upper = -lc - 0.5 * math.log(0.5 * e)
    xi_dot_upper = (-lc + 0.5 * _LN2) / math.log(e)
    eta_dot_lower = -math.sqrt(1.0 - ((lc - 0.5 * _LN2) / math.log(e)) ** 2)
    return xi_upper, xi_dot_upper, eta_dot_lower


def free_motion_expansion(t_start: float, a: AsymptoticData) -> PhasePoint:
    """Leading-order start state from the free past asymptotics, any eta_in.

    With w = exp(2*(xi_in + t_start)):
        xi      = xi_in + t_start - eta_in*w/4
        eta     = eta_in - w/8
        xi_dot  = 1 - eta_in*w/2
        eta_dot = -w/4
    Residual against the exact solution is O(w^2).
    """
    w = math.exp(2.0 * (a.xi_in + t_start))
    return PhasePoint(
        t=t_start,
        xi=a.xi_in + t_start - 0.25 * a.eta_in * w,
        eta=a.eta_in - 0.125 * w,
        xi_dot=1.0 - 0.5 * a.eta_in * w,
        eta_dot=-0.25 * w,
    )


def asymptotic_start_state(t_start: float, a: AsymptoticData,
                           w_threshold: float = 1e-10) -> PhasePoint:
    """Start state for numerical integration, valid for small w = e^{2(xi_in+t)}.

    Raises ValueError when w exceeds w_threshold (move t_start earlier) or
    when eta_in <= 0 (no scattering branch to seed).
    """
    _require_positive_eta_in(a)
    w = math.exp(2.0 * (a.xi_in + t_start))
    if w > w_threshold:
        raise ValueError(
            f"start-state truncation w = {w:.3e} exceeds threshold {w_threshold:.3e}; "
            f"move t_start earlier than {t_start}")
    return free_motion_expansion(t_start, a)
