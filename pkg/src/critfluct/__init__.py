"""Simulation and verification toolkit for a critically tilted reaction-diffusion lattice gas.

The package simulates a periodic chain of occupation variables evolving under
symmetric exclusion at rate n^2 plus weak single-site flips, and verifies the
predicted stationary behaviour: the quartic law of the rescaled magnetization,
Gaussian fluctuations of the fast Fourier modes, and the spectral/log-Sobolev
constants of the auxiliary birth-death chain that controls the slow mode.

Modules
-------
potentials   closed-form scalar potentials, rates and their derivatives
lattice      exact kinetic Monte Carlo of the full chain with O(1) observable updates
exact        brute-force stationary solve and functional evaluation for small n
birthdeath   log-space birth-death chain, Miclo constants, spectral gap
limitlaw     the quartic limit law, its sampler, and the limiting SDE
field        Fourier test functions and covariance predictions for fast modes
harness      statistics utilities, experiment configs, acceptance suite
"""

from critfluct.potentials import (
    ModelParams,
    gamma_of,
    eval_U,
    eval_E,
    eval_W,
    macro_rates,
    eval_V,
    eval_V_prime,
)
from critfluct.birthdeath import (
    BirthDeathChain,
    build_chain,
    miclo_constants,
    lsi_bounds,
    spectral_gap,
    variance_of_test_function,
    stirling_envelope,
    znorm_scaling,
)
from critfluct.limitlaw import (
    QuarticLaw,
    quartic_law,
    moment,
    sample,
    integrate_sde,
    invariance_test,
)
from critfluct.lattice import (
    Configuration,
    SimulationSchedule,
    SampleSeries,
    glauber_rate,
    kmc_step,
    run_stationary,
    field_projection,
)
from critfluct.field import (
    TestFunction,
    test_function,
    predicted_covariance,
    empirical_field_statistics,
    projection_check,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "gamma_of",
    "eval_U",
    "eval_E",
    "eval_W",
    "macro_rates",
    "eval_V",
    "eval_V_prime",
    "BirthDeathChain",
    "build_chain",
    "miclo_constants",
    "lsi_bounds",
    "spectral_gap",
    "variance_of_test_function",
    "stirling_envelope",
    "znorm_scaling",
    "QuarticLaw",
    "quartic_law",
    "moment",
    "sample",
    "integrate_sde",
    "invariance_test",
    "Configuration",
    "SimulationSchedule",
    "SampleSeries",
    "glauber_rate",
    "kmc_step",
    "run_stationary",
    "field_projection",
    "TestFunction",
    "test_function",
    "predicted_covariance",
    "empirical_field_statistics",
    "projection_check",
]
