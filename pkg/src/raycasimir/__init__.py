"""Ray-optics Casimir energies and forces for two squares between parallel sidewalls."""
from .assembly import (
    ChannelResult,
    SweepRecord,
    SweepResult,
    convergence_study,
    energy_breakdown,
    evaluate,
    fit_power,
    force_breakdown,
    interior_extrema,
    sweep_a,
    sweep_h,
)
from .core import (
    ZETA3,
    EnergyBreakdown,
    EvaluationError,
    ForceBreakdown,
    Geometry,
    PathClass,
    force_from_energies,
    pfa_force,
    to_polarizations,
)
from .even import even_energy, even_energy_reduced, even_series, even_term_value, pfa_energy
from .lattice import ImagePoint, LatticeIndex, classify, enumerate_images, is_allowed
from .odd import (
    OddFamily,
    Orientation,
    energy12,
    energy21,
    families_of_order,
    family_energy,
    family_energy_cubature,
    odd_energy,
    odd_energy_analytic3,
    odd_energy_numeric,
    odd_series,
)
from .piston import (
    epstein_z2,
    piston_energy,
    piston_even_energy,
    piston_force,
    piston_odd_energy,
)
from .quadrature import CubatureSettings, integrate_2d
from .series import ConvergenceReport, Termination

__version__ = "0.1.0"
