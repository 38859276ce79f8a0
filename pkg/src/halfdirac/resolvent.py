"""Free half-line Dirac resolvent: Jost-type solutions, Wronskian, kernel.

The regular solution is used in the alpha-uniform scaled form

    psi_l(x) = (sin a cos(kx) + zeta cos a sin(kx),
                -sin a sin(kx)/zeta + cos a cos(kx)),

which is ``sin(alpha)`` times the cot-parametrized solution and stays finite
at alpha = 0. Every quotient ``psi_l / W`` is invariant under that scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import G_many, alpha_sign
from .errors import MasslessUndefined, PreconditionError, WronskianVanishes
from .spectral import SpectralPoint
from .supremum import TAIL, BoundEvaluation, sup_halfline


@dataclass(frozen=True)
class BoundaryCondition:
    """Separated condition ``psi1(0) cos(alpha) - psi2(0) sin(alpha) = 0``."""

    sin_alpha: float
    cos_alpha: float

    def __post_init__(self):
        if self.sin_alpha < 0 or self.cos_alpha < 0:
            raise PreconditionError("alpha must lie in [0, pi/2]")
        if abs(self.sin_alpha**2 + self.cos_alpha**2 - 1.0) > 1e-14:
            raise PreconditionError("sin^2 + cos^2 != 1")

    @classmethod
    def from_alpha(cls, alpha: float) -> "BoundaryCondition":
        if not -1e-15 <= alpha <= math.pi / 2 + 1e-15:
            raise PreconditionError(f"alpha must lie in [0, pi/2], got {alpha}")
        if abs(alpha - math.pi / 2) < 1e-15:
            return cls(1.0, 0.0)
        if abs(alpha) < 1e-15:
            return cls(0.0, 1.0)
        s, c = math.sin(alpha), math.cos(alpha)
        n = math.hypot(s, c)
        return cls(s / n, c / n)

    @property
    def alpha(self) -> float:
        return math.atan2(self.sin_alpha, self.cos_alpha)

    def residual(self, psi) -> complex:
        return psi[0] * self.cos_alpha - psi[1] * self.sin_alpha


@dataclass(frozen=True)
class KernelValue:
    entries: np.ndarray
    x: float
    y: float

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))


def psi_l_scaled(x, sp: SpectralPoint, bc: BoundaryCondition) -> np.ndarray:
    """Regular solution satisfying the boundary condition; shape ``(2,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    kx = sp.kappa * x
    cs, sn = np.cos(kx), np.sin(kx)
    sa, ca = bc.sin_alpha, bc.cos_alpha
    return np.array([sa * cs + sp.zeta * ca * sn, -sa * sn / sp.zeta + ca * cs])


def psi_inf(x, sp: SpectralPoint) -> np.ndarray:
    """Decaying solution ``exp(i kappa x) (-i zeta, 1)``."""
    x = np.asarray(x, dtype=float)
    e = np.exp(1j * sp.kappa * x)
    return np.array([-1j * sp.zeta * e, e])


def psi_grow(x, sp: SpectralPoint) -> np.ndarray:
    """Growing companion ``exp(-i kappa x) (i zeta, 1)``."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-1j * sp.kappa * x)
    return np.array([1j * sp.zeta * e, e])


def wronskian_scaled(sp: SpectralPoint, bc: BoundaryCondition) -> complex:
    """``sin(alpha) + i zeta cos(alpha)``; never zero for admissible z."""
    w = bc.sin_alpha + 1j * sp.zeta * bc.cos_alpha
    if abs(w) < 1e-14:
        raise WronskianVanishes(f"scaled Wronskian {w} vanishes at z={sp.z}")
    return w


def resolvent_kernel(x: float, y: float, sp: SpectralPoint, bc: BoundaryCondition) -> KernelValue:
    """2x2 kernel of ``(D0 - z)^{-1}``; the ``x >= y`` branch owns the diagonal."""
    if x < 0 or y < 0:
        raise PreconditionError("kernel positions must be >= 0")
    return KernelValue(kernel_block(np.array([x]), np.array([y]), sp, bc)[0, 0], x, y)


def kernel_block(xs, ys, sp: SpectralPoint, bc: BoundaryCondition) -> np.ndarray:
    """Kernel on a tensor grid, shape ``(len(xs), len(ys), 2, 2)``.

    ``(D0 - z) u = f`` with ``u(x) = int R0(x, y) f(y) dy`` requires the
    bilinear pairing ``psi(y)^T f(y)`` and the prefactor ``-1/(c W)``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    w = wronskian_scaled(sp, bc)
    pref = -1.0 / (sp.params.c * w)
    inf_x, l_x = psi_inf(xs, sp), psi_l_scaled(xs, sp, bc)
    inf_y, l_y = psi_inf(ys, sp), psi_l_scaled(ys, sp, bc)
    lower = np.einsum("ix,jy->xyij", inf_x, l_y)
    upper = np.einsum("ix,jy->xyij", l_x, inf_y)
    mask = (xs[:, None] >= ys[None, :])[..., None, None]
    return pref * np.where(mask, lower, upper)


def _diag_norm_factory(sp: SpectralPoint, bc: BoundaryCondition):
    w = abs(wronskian_scaled(sp, bc))
    inf_scale = math.sqrt(1.0 + abs(sp.zeta) ** 2)
    q = sp.kappa.imag

    def norm_on_diagonal(y, rows=None):
        # ||psi_inf(y)|| ||psi_l(y)|| / |W|; psi_inf norm is exp(-q y) sqrt(1+|zeta|^2)
        pl = psi_l_scaled(y, sp, bc)
        return np.exp(-q * y) * inf_scale * np.sqrt(np.abs(pl[0]) ** 2 + np.abs(pl[1]) ** 2) / w

    return norm_on_diagonal


def supnorm_numeric(sp: SpectralPoint, bc: BoundaryCondition) -> BoundEvaluation:
    """``sup_{x,y>=0} ||c R0(x, y; z)||`` from the explicit solutions.

    ``||psi_inf(x)||`` decreases strictly in ``x``, so on the branch
    ``x >= y`` the supremum sits at ``x = y``; the other branch gives the
    same diagonal function.
    """
    q, p = sp.kappa.imag, sp.kappa.real
    f = _diag_norm_factory(sp, bc)
    y_max = TAIL / (2.0 * q)
    val, arg, err = sup_halfline(f, [y_max], [2.0 * p])
    return BoundEvaluation(float(val[0]), float(arg[0]), float(err[0]))


def supnorm_grid_check(sp: SpectralPoint, bc: BoundaryCondition, n: int = 64) -> float:
    """Low-resolution 2-D sample of ``||c R0(x, y)||`` over both branches."""
    q = sp.kappa.imag
    pts = np.linspace(0.0, TAIL / (2.0 * q), n)
    K = kernel_block(pts, pts, sp, bc) * sp.params.c
    return float(np.max(np.linalg.norm(K, ord=2, axis=(-2, -1))))


def supnorm_closed(sp: SpectralPoint, alpha: float) -> float:
    """``((|zeta| + 1/|zeta|)/2) G_-+(a, cot t)`` for alpha in {0, pi/2}."""
    if not sp.params.massive:
        raise MasslessUndefined("closed form needs m > 0; the massless value is sqrt(2)")
    sign = alpha_sign(alpha)
    s = abs(sp.zeta)
    t = math.atan2(sp.zeta.imag, sp.zeta.real)
    a = (s - 1.0 / s) / (s + 1.0 / s)
    b = math.cos(t) / math.sin(t)
    G, _, _ = G_many(sign, [a], [b])
    return 0.5 * (s + 1.0 / s) * float(G[0])


def beta_scaled(sp: SpectralPoint, bc: BoundaryCondition) -> complex:
    """Reflection-type ratio ``(sin a - i zeta cos a)/(sin a + i zeta cos a)``."""
    return (bc.sin_alpha - 1j * sp.zeta * bc.cos_alpha) / wronskian_scaled(sp, bc)
