"""Chaotic dynamics toolkit for the Nagumo equation with a stepwise periodic weight.

Layers, bottom to top:

* :mod:`~switched_nagumo.model` -- the cubic reaction term, equilibria,
  energy, and every threshold constant in closed or root-characterized form;
* :mod:`~switched_nagumo.timemaps` -- singular quadrature of transit times
  and orbit periods, their bounds, and the timing inequalities;
* :mod:`~switched_nagumo.flow` -- trajectories of the autonomous/switched
  systems, phase maps, and continuous angle tracking;
* :mod:`~switched_nagumo.horseshoe` -- the annulus/band geometry, crossing
  paths, and numerical certification of the stretching relations;
* :mod:`~switched_nagumo.symbolic` -- itinerary-constrained periodic orbit
  search and verification;
* :mod:`~switched_nagumo.cli` -- the command-line surface.
"""

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    Cubic,
    HorseshoeConstants,
    ModelParams,
    Nonlinearity,
    Thresholds,
    compute_thresholds,
    energy,
    equilibria,
    homoclinic_extent,
    homoclinic_threshold,
    homoclinic_threshold_optimal,
    horseshoe_constants,
    integral_zero,
    matching_abscissa,
    saddle_center_threshold,
    slope_envelope,
)
from .timemaps import (  # noqa: F401
    GapCrossingReport,
    conjugate_abscissa,
    gap_crossing_report,
    orbit_period,
    period_scaling_limit,
    slow_anchor_bound,
    transit_time,
    transit_time_bounds,
)
from .flow import (  # noqa: F401
    ConfinementReport,
    Trajectory,
    autonomous_map_many,
    confinement_report,
    count_extrema,
    flow_autonomous,
    flow_switched,
    high_phase_map,
    high_phase_map_many,
    low_phase_map,
    low_phase_map_many,
    period_map,
    period_map_many,
    rotation_angle,
    rotation_angle_many,
)
from .horseshoe import (  # noqa: F401
    Certificate,
    RegionSet,
    StretchReport,
    build_regions,
    certify_horseshoe,
    classify_symbol,
    sample_crossing_path,
    separation_report,
    verify_stretch,
)
from .symbolic import (  # noqa: F401
    Itinerary,
    PeriodicOrbit,
    find_periodic,
    shadow_finite,
    verify_itinerary,
)

__version__ = "0.1.0"
