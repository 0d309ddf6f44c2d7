"""Energy-dissipation-rate preserving integrators for 2D Cahn-Hilliard.

A Fourier pseudo-spectral gradient-flow solver on the periodic unit
square with four time steppers: two supplementary-variable schemes that
enforce the discrete energy-rate identity per step through a scalar
constraint (SVM_I, SVM_II), a scalar-auxiliary-variable Crank-Nicolson
comparator (sav_step), and a fully implicit Crank-Nicolson comparator
with the secant nonlinearity (ficn_step).
"""

from .diagnostics import RunSeries, StepRecord, error_norms, order_fit
from .errors import PICARD_DIVERGED, ROOT_DIVERGED, SINGULAR_CONSTRAINT, StepFailure
from .ficn import FicnStepResult, ficn_step, well_secant
from .model import ChParams, GradFlowModel, f_bulk, f_prime
from .predictor import PredictorOutput, extrapolate, predict
from .sav import SavState, SavStepResult, modified_energy, sav_step
from .spectral import (
    Grid2D,
    apply_symbol,
    dealias,
    fft_forward,
    fft_inverse,
    inner_product,
    mean,
)
from .svm import (
    SvmStepResult,
    SvmVariant,
    corrector_fields,
    energy_poly,
    solve_beta,
    svm_step,
)

__all__ = [
    "ChParams",
    "FicnStepResult",
    "GradFlowModel",
    "Grid2D",
    "PICARD_DIVERGED",
    "PredictorOutput",
    "ROOT_DIVERGED",
    "RunSeries",
    "SINGULAR_CONSTRAINT",
    "SavState",
    "SavStepResult",
    "StepFailure",
    "StepRecord",
    "SvmStepResult",
    "SvmVariant",
    "apply_symbol",
    "corrector_fields",
    "dealias",
    "energy_poly",
    "error_norms",
    "extrapolate",
    "f_bulk",
    "f_prime",
    "fft_forward",
    "fft_inverse",
    "ficn_step",
    "inner_product",
    "mean",
    "modified_energy",
    "order_fit",
    "predict",
    "sav_step",
    "solve_beta",
    "svm_step",
    "well_secant",
]

__version__ = "0.1.0"
