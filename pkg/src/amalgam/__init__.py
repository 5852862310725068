"""Wiener amalgam norms of sampled functions and dispersive-decay experiments."""

from .grid import (
    AliasingError,
    BoxIndicator,
    EvolvedGaussian,
    Gaussian,
    Grid,
    GridFunction,
    PowerTail,
    QuadraticChirp,
    TruncationError,
    fourier_transform,
    inner_product,
    inverse_fourier_transform,
    lp_norm,
    make_grid,
    modulate,
    sample,
    translate,
)
from .lorentz import (
    StepRearrangement,
    decreasing_rearrangement,
    distribution_function,
    lorentz_quasinorm,
    weak_quasinorm_via_distribution,
)
from .wiener import (
    AmalgamSpec,
    GlobalNormSpec,
    LocalNormSpec,
    WindowSpec,
    amalgam_norm,
    chirp_norm_closed_form,
    local_norm,
    mixed_time_norm,
)
from .bupu import Bupu, analyze, build_bupu, bupu_amalgam_norm, synthesize
from .schrodinger import (
    PotentialSpec,
    Trajectory,
    evolved_gaussian_closed_form,
    free_kernel,
    propagate,
    split_step_solve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
