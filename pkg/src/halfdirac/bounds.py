"""Scalar eigenvalue-exclusion bounds.

All thresholds follow the same pattern: the Birman-Schwinger operator has
norm at most ``coupling * (resolvent kernel sup-norm)``, so a point ``z``
cannot be an eigenvalue once the relevant threshold exceeds the coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CouplingTooLarge,
    DegenerateDenominator,
    MasslessUndefined,
    PreconditionError,
    TangentUndefined,
    UnsupportedBoundaryCondition,
)
from .spectral import EnclosureRegion, PhysicalParams, SpectralPoint, branch_data
from .supremum import TAIL, BoundEvaluation, sup_halfline

SQRT3_2 = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class MomentData:
    l1_norm: float
    first_moment: float

    def __post_init__(self):
        for name in ("l1_norm", "first_moment"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0.0):
                raise PreconditionError(f"{name} must be finite and >= 0, got {val}")


def _sign_value(sign) -> float:
    if sign in ("minus", "-", -1):
        return -1.0
    if sign in ("plus", "+", 1):
        return 1.0
    raise PreconditionError(f"sign must be 'minus' or 'plus', got {sign!r}")


def alpha_sign(alpha: float) -> str:
    """``'minus'`` for alpha = 0, ``'plus'`` for alpha = pi/2."""
    if abs(alpha) < 1e-12:
        return "minus"
    if abs(alpha - math.pi / 2) < 1e-12:
        return "plus"
    raise UnsupportedBoundaryCondition(f"refined bound needs alpha in {{0, pi/2}}, got {alpha}")


# -- g and G_-+ ---------------------------------------------------------------

def g_many(b) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ``g(b) = sup_y |exp(i b y) - exp(-y)|``."""
    b = np.atleast_1d(np.asarray(b, dtype=float))

    def h(y, rows):
        return np.abs(np.exp(1j * b[rows, None] * y) - np.exp(-y))

    return sup_halfline(h, np.full(b.size, TAIL), b)


def g_of_b(b: float) -> BoundEvaluation:
    if not math.isfinite(b):
        raise PreconditionError("b must be finite")
    val, arg, err = g_many([b])
    return BoundEvaluation(float(val[0]), float(arg[0]), float(err[0]))


def G_many(sign, a, b) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ``G_-+(a, b)``; returns (value, maximizer, error)."""
    s = _sign_value(sign)
    a, b = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                               np.atleast_1d(np.asarray(b, dtype=float)))
    if np.any(np.abs(a) > 1.0 + 1e-15):
        raise PreconditionError("G requires |a| <= 1")

    def h(y, rows):
        ar = a[rows, None]
        e = np.exp(-y)
        return 1.0 + e * e + s * 2.0 * ar * e * np.cos(ar * b[rows, None] * y)

    sq, arg, err = sup_halfline(h, np.full(a.size, TAIL), a * b)
    val = np.sqrt(sq)
    return val, arg, err / (2.0 * val)


def G_mp(sign, a: float, b: float) -> BoundEvaluation:
    if not abs(a) <= 1.0:
        raise PreconditionError(f"G requires |a| <= 1, got {a}")
    val, arg, err = G_many(sign, [a], [b])
    return BoundEvaluation(float(val[0]), float(arg[0]), float(err[0]))


def G_at_b_zero(sign, a: float) -> float:
    """Closed form of ``G_-+(a, 0) = sqrt(max(2(1 -+ a), 1))``."""
    s = _sign_value(sign)
    return math.sqrt(max(2.0 * (1.0 + s * a), 1.0))


# -- thresholds -----------------------------------------------------------------

def zeta_polar(zeta):
    """``(a, b, t)`` with ``a = (|z|-1/|z|)/(|z|+1/|z|)`` and ``b = cot t``."""
    zeta = np.asarray(zeta, dtype=complex)
    s = np.abs(zeta)
    a = (s - 1.0 / s) / (s + 1.0 / s)
    t = np.angle(zeta)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = np.cos(t) / np.sin(t)
    return a, b, t


def generic_threshold(sp: SpectralPoint) -> float:
    s2 = abs(sp.zeta) ** 2
    return 1.0 / math.sqrt(1.0 + max(s2, 1.0 / s2))


def generic_threshold_many(z, params: PhysicalParams) -> np.ndarray:
    _, zeta = branch_data(z, params)
    s2 = np.abs(zeta) ** 2
    return 1.0 / np.sqrt(1.0 + np.maximum(s2, 1.0 / s2))


def theorem2_threshold(sp: SpectralPoint, alpha: float) -> float:
    """``((|zeta| + 1/|zeta|) G_-+(a, cot t))^{-1}``.

    ``z`` is certified not to be an eigenvalue when the value exceeds
    ``||V||_1 / (2c)``.
    """
    if not sp.params.massive:
        raise MasslessUndefined("refined threshold needs m > 0")
    sign = alpha_sign(alpha)
    t = np.angle(sp.zeta)
    if abs(math.sin(t)) < 1e-15:
        raise TangentUndefined(f"zeta = {sp.zeta} is real")
    return float(theorem2_threshold_many([sp.z], sp.params, alpha)[0])


def theorem2_threshold_many(z, params: PhysicalParams, alpha: float) -> np.ndarray:
    if not params.massive:
        raise MasslessUndefined("refined threshold needs m > 0")
    sign = alpha_sign(alpha)
    _, zeta = branch_data(np.atleast_1d(z), params)
    s = np.abs(zeta)
    a, b, _ = zeta_polar(zeta)
    G, _, _ = G_many(sign, a, b)
    return 1.0 / ((s + 1.0 / s) * G)


def whole_line_ratio(zeta) -> np.ndarray:
    """``4 (1 + max(|z|^2, |z|^-2)) / (2 + |z|^2 + |z|^-2)``, always in [2, 4]."""
    s2 = np.abs(np.asarray(zeta)) ** 2
    return 4.0 * (1.0 + np.maximum(s2, 1.0 / s2)) / (2.0 + s2 + 1.0 / s2)


# -- Hermitian potentials -----------------------------------------------------------

def hermitian_gap(v: float, alpha: float, params: PhysicalParams) -> EnclosureRegion:
    """Spectral gap guaranteed free of eigenvalues for Hermitian ``V``."""
    if not params.massive:
        raise MasslessUndefined("the gap is empty for m = 0")
    if not v >= 0.0:
        raise PreconditionError(f"coupling must be >= 0, got {v}")
    if v >= SQRT3_2:
        raise CouplingTooLarge(f"v = {v} >= sqrt(3)/2")
    sign = alpha_sign(alpha)
    mc2 = params.rest_energy
    slow = mc2 * (1.0 - v * v / (1.0 + math.sqrt(1.0 - v * v)))
    fast = mc2 * (1.0 - 2.0 * v * v)
    gap = (-fast, slow) if sign == "minus" else (-slow, fast)
    return EnclosureRegion(kind="interval-complement", excluded_gap=gap,
                           info={"v": v, "alpha": alpha})


def hermitian_gap_from_window(v: float, alpha: float, params: PhysicalParams) -> tuple[float, float]:
    """Gap obtained by mapping the admissible ``|zeta|`` window to the real axis."""
    sign = alpha_sign(alpha)
    mc2 = params.rest_energy
    lo = v / math.sqrt(1.0 - v * v)
    hi = (1.0 + math.sqrt(1.0 - v * v)) / v if v > 0 else math.inf

    def z_of(s):
        if math.isinf(s):
            return mc2
        return mc2 * (s * s - 1.0) / (s * s + 1.0)

    gap = (z_of(lo), z_of(hi))
    if sign == "plus":
        gap = (-gap[1], -gap[0])
    return gap


# -- first moment ------------------------------------------------------------------

def moment_exclusion(md: MomentData, params: PhysicalParams) -> bool:
    if not params.massive:
        raise MasslessUndefined("first-moment criterion is stated for m > 0")
    mc = params.m * params.c
    return (2.0 * mc) ** 2 * (md.first_moment**2 + md.l1_norm**2) < 1.0


def moment_q_bound(sp: SpectralPoint, md: MomentData, near: int = +1) -> float:
    """Hilbert-Schmidt bound on ``||Q(z)||^2`` from the first moment.

    ``near=+1`` pairs with alpha = 0 (excluding eigenvalues near ``+mc^2``),
    ``near=-1`` with alpha = pi/2.
    """
    params = sp.params
    if not params.massive:
        raise MasslessUndefined("first-moment bound is stated for m > 0")
    if near not in (1, -1):
        raise PreconditionError(f"near must be +1 or -1, got {near}")
    z, mc2, c = sp.z, params.rest_energy, params.c
    prod = abs(z * z - mc2 * mc2)
    if prod < 1e-14:
        raise DegenerateDenominator(f"|z^2 - (mc^2)^2| = {prod:g}")
    same = abs(z + near * mc2) ** 2
    other = abs(z - near * mc2) ** 2
    return (prod + same) / c**4 * md.first_moment**2 + (prod + other) / prod / c**2 * md.l1_norm**2


def weak_coupling_radius(lam: float, md: MomentData, params: PhysicalParams, A: float = 1.0) -> float:
    """Leading-order bound on ``|z -+ mc^2|`` for the coupling ``lam * V``."""
    if not lam >= 0.0:
        raise PreconditionError("lambda must be >= 0")
    if not params.massive:
        raise MasslessUndefined("weak-coupling radius needs m > 0")
    return 2.0 * params.m * (A * lam * md.l1_norm / params.c) ** 2
