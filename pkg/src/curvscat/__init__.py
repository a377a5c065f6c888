"""Scattering construction of self-consistent Gauss curvature surfaces.

The radial conformal-factor/curvature problem reduces to Newtonian potential
scattering of a single particle; this package integrates that motion from
past-infinity data, shoots for prescribed deflection angles, reconstructs
the radial pair (u, K), and checks the identities and bounds the
construction must satisfy.
"""

from .closed_forms import (AsymptoticData, BoundsReport, ETA_CRIT_UPPER,
                           asymptotic_start_state, eta_first_iterate,
                           explicit_bounds, lncosh, t0_state_bounds,
                           xi_subsolution, xi_supersolution)
from .dynamics import (GAUGE_LOAD, BlowUpSignal, Homologous, PhasePoint,
                       Symmetry, TimeReverse, TimeTranslate, Zone,
                       apply_symmetry, energy, in_forbidden_zone, rhs)
from .geometry import (AsymptoticFit, RadialSolution, asymptotic_fit,
                       curvature_area_quadrature, pde_residual,
                       pokhozaev_residual, scale_radial, theta_identities,
                       to_radial)
from .integrator import (BlowUpRecord, NotConvergedError, SolverConfig,
                         Trajectory, TrajectoryEvents, deflection,
                         detect_events, energy_drift, integrate)
from .picard import (GridFunction, MonotonicityReport, PicardRun,
                     iterate_future, iterate_past, monotonicity_report)
from .shooting import (BracketNotFoundError, ShootingResult, SweepRow,
                       deflection_of, shoot, sweep)
from .analysis import (GradientFlowResult, GradientFlowState, InflectionReport,
                       SpectrumSample, estimate_delta0, gradient_flow_run,
                       inflection_diagnostics, linearization_spectrum,
                       spectrum_along)

__version__ = "0.1.0"
