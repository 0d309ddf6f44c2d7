"""Supplementary-variable corrector step for the gradient flow.

A plain IMEX Crank-Nicolson update phi_imex plus a scalar multiple of a
correction direction w gives the new state  phi_next = phi_imex + beta*w.
beta is the root of the scalar quartic  F[phi_imex + beta*w] = F_tilde,
so every accepted step satisfies the discrete energy-rate identity
exactly (to root-solve tolerance).  Two correction directions ship:

  SVM_I   g = M f'(phi_tilde)          (perturbs the chemical potential)
  SVM_II  g = -M (L + f')(phi_tilde)   (perturbs the mobility)

both preconditioned by (1 + tau/2 M L)^-1 to form w.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ROOT_DIVERGED, SINGULAR_CONSTRAINT, StepFailure
from .model import GradFlowModel
from .predictor import PredictorOutput, predict
from .spectral import fft_forward, fft_inverse, inner_product, spectral_abs2

# magnitude fractions (of the first root found) swept for nearer roots
_EXTRA_START_FRACTIONS = (
    -1.0, 0.5, -0.5, 0.25, -0.25, 0.125, -0.125,
    0.0625, -0.0625, 0.03125, -0.03125,
)


class SvmVariant(enum.Enum):
    SVM_I = "svm1"
    SVM_II = "svm2"


@dataclass(frozen=True)
class SvmStepResult:
    phi_next: np.ndarray
    beta: float  # tau * alpha
    alpha: float  # supplementary variable sample, beta / tau
    newton_iters: int
    energy_residual: float  # F[phi_next] - f_tilde, from the quartic
    f_tilde: float  # energy target enforced this step
    dissipation: float  # (mu_star, M mu_star)_h


def _corrector_spectral(model, phi_n, pred, variant, tau, phi_n_hat):
    grid = model.grid
    half = 0.5 * tau
    ml = model.m_symbol * model.l_symbol
    inv = 1.0 / (1.0 + half * ml)
    fp_tilde_hat = model.nonlinear_hat(model.f_prime(pred.phi_tilde))
    phi_imex_hat = inv * ((1.0 - half * ml) * phi_n_hat - tau * model.m_symbol * fp_tilde_hat)
    if variant is SvmVariant.SVM_I:
        g_hat = model.m_symbol * fp_tilde_hat
    elif variant is SvmVariant.SVM_II:
        # L phi_tilde + f'(phi_tilde) is mu_star, so g = -M mu_star
        g_hat = -model.m_symbol * pred.mu_star_hat
    else:
        raise ValueError(f"unknown variant {variant!r}")
    w_hat = inv * g_hat
    return (
        fft_inverse(grid, phi_imex_hat),
        fft_inverse(grid, w_hat),
        phi_imex_hat,
        w_hat,
    )


def corrector_fields(
    model: GradFlowModel,
    phi_n: np.ndarray,
    pred: PredictorOutput,
    variant: SvmVariant,
    tau: float,
    phi_n_hat: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """IMEX-CN update phi_imex and correction direction w.

    phi_imex solves (phi - phi_n)/tau = -M (L (phi + phi_n)/2 +
    f'(phi_tilde)); w = (1 + tau/2 M L)^-1 g[phi_tilde].  phi_imex keeps
    the mean of phi_n and w has zero mean (M kills the constant mode).
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if phi_n_hat is None:
        phi_n_hat = fft_forward(model.grid, phi_n)
    phi_imex, w, _, _ = _corrector_spectral(model, phi_n, pred, variant, tau, phi_n_hat)
    return phi_imex, w


def energy_poly(
    model: GradFlowModel,
    phi_imex: np.ndarray,
    w: np.ndarray,
    f_tilde: float,
    phi_imex_hat: np.ndarray | None = None,
    w_hat: np.ndarray | None = None,
) -> tuple[float, float, float, float, float]:
    """Coefficients of u(beta) = F[phi_imex + beta*w] - f_tilde.

    Exact for the quartic double well:
      c0 = F[phi_imex] - f_tilde
      c1 = (mu(phi_imex), w)_h
      c2 = 1/2 (w, L w)_h + h^2 sum (3 phi_imex^2 - 1) w^2 / 2
      c3 = h^2 sum phi_imex w^3
      c4 = h^2 sum w^4 / 4
    """
    grid = model.grid
    if phi_imex_hat is None:
        phi_imex_hat = fft_forward(grid, phi_imex)
    if w_hat is None:
        w_hat = fft_forward(grid, w)
    c0 = model.free_energy(phi_imex, phi_imex_hat) - f_tilde
    c1 = inner_product(model.mu(phi_imex, phi_imex_hat), w)
    w2 = w * w
    p2 = phi_imex * phi_imex
    c2 = 0.5 * float(np.sum(model.l_symbol * spectral_abs2(w_hat)))
    c2 += 0.5 * float(np.mean((3.0 * p2 - 1.0) * w2))
    c3 = float(np.mean(phi_imex * w2 * w))
    c4 = 0.25 * float(np.mean(w2 * w2))
    return c0, c1, c2, c3, c4


def _poly_val(c, b):
    return ((c[4] * b + c[3]) * b + c[2]) * b * b + c[1] * b + c[0]


def _poly_deriv(c, b):
    return ((4.0 * c[4] * b + 3.0 * c[3]) * b + 2.0 * c[2]) * b + c[1]


def _newton_candidate(c, b0, tol, max_iters, guard):
    """Newton from b0; returns (root, iters) or None if it fails."""
    b = b0
    for k in range(1, max_iters + 1):
        u = _poly_val(c, b)
        if abs(u) <= tol:
            return b, k - 1
        du = _poly_deriv(c, b)
        if du == 0.0 or not np.isfinite(du):
            return None
        b -= u / du
        if not np.isfinite(b) or abs(b) > 10.0 * guard:
            return None
    if abs(_poly_val(c, b)) <= tol:
        return b, max_iters
    return None


def solve_beta(
    coeffs,
    tol: float,
    max_iters: int = 50,
    guard: float = 0.5,
) -> tuple[float, int]:
    """Root of the quartic nearest zero, by Newton started at 0.

    After the primary run converges, a deterministic sweep of starts at
    fractions of the found magnitude catches any root closer to zero; the
    smallest-magnitude converged candidate wins.  Raises StepFailure with
    SINGULAR_CONSTRAINT when the constraint is flat but unsatisfied at 0
    (steady-state degeneracy), or ROOT_DIVERGED when no root within
    |beta| <= guard is found (step size too large).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    c = tuple(float(x) for x in coeffs)
    if abs(c[0]) <= tol:
        return 0.0, 0  # constraint already satisfied at beta = 0
    if abs(c[1]) < 1e-14:
        raise StepFailure(
            SINGULAR_CONSTRAINT,
            f"energy constraint has zero slope at beta=0 with residual {c[0]:.3e}",
        )
    candidates = []
    primary = _newton_candidate(c, 0.0, tol, max_iters, guard)
    if primary is not None:
        candidates.append(primary)
    scale = abs(primary[0]) if primary is not None else guard
    if scale > 0.0:
        for frac in _EXTRA_START_FRACTIONS:
            cand = _newton_candidate(c, frac * scale, tol, max_iters, guard)
            if cand is None:
                continue
            # keep the first finder of each distinct root
            if any(abs(cand[0] - b) <= 1e-12 * max(1.0, abs(b)) for b, _ in candidates):
                continue
            candidates.append(cand)
    if not candidates:
        raise StepFailure(ROOT_DIVERGED, "no converged root for the energy constraint")
    beta, iters = min(candidates, key=lambda pair: abs(pair[0]))
    if abs(beta) > guard:
        raise StepFailure(
            ROOT_DIVERGED,
            f"energy-constraint root {beta:.3e} outside trust region {guard}",
        )
    return beta, iters


def svm_step(
    model: GradFlowModel,
    phi_n: np.ndarray,
    phi_nm1: np.ndarray,
    variant: SvmVariant,
    tau: float,
    newton_tol: float = 1e-13,
    newton_max_iters: int = 50,
    beta_guard: float = 0.5,
) -> SvmStepResult:
    """One full step: predict, correct, enforce the energy constraint.

    Accepted steps satisfy F[phi_next] = f_tilde to the Newton tolerance,
    hence F[phi_next] - F[phi_n] = -tau * dissipation + O(tol): the
    discrete energy is nonincreasing.  The grid mean is conserved exactly
    up to transform round-off.
    """
    phi_n_hat = fft_forward(model.grid, phi_n)
    pred = predict(model, phi_n, phi_nm1, tau, phi_n_hat=phi_n_hat)
    phi_imex, w, phi_imex_hat, w_hat = _corrector_spectral(
        model, phi_n, pred, variant, tau, phi_n_hat
    )
    coeffs = energy_poly(model, phi_imex, w, pred.f_tilde, phi_imex_hat, w_hat)
    tol = newton_tol * max(1.0, abs(pred.f_tilde))
    beta, iters = solve_beta(coeffs, tol, newton_max_iters, beta_guard)
    phi_next = phi_imex + beta * w
    return SvmStepResult(
        phi_next=phi_next,
        beta=beta,
        alpha=beta / tau,
        newton_iters=iters,
        energy_residual=_poly_val(coeffs, beta),
        f_tilde=pred.f_tilde,
        dissipation=pred.diss,
    )
