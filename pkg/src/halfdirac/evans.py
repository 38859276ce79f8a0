"""Shooting oracle for eigenvalues: the Evans function and its zeros.

The solution fixed by the boundary condition at 0 is integrated across the
support of ``V``. Beyond ``x_max`` it is a combination of the free modes

    psi_inf  = exp( i kappa x) (-i zeta, 1)   (decaying)
    psi_grow = exp(-i kappa x) ( i zeta, 1)   (growing)

and the coefficient ``E(z)`` of the growing mode vanishes exactly at the
eigenvalues. ``E`` is analytic off the free spectrum, so zeros are counted
with the argument principle and refined by Newton's method.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    ContourThroughZero,
    DegenerateBasis,
    NewtonDivergence,
    PreconditionError,
    RegionTouchesSpectrum,
    StiffnessFailure,
)
from .potential import Potential
from .resolvent import BoundaryCondition
from .spectral import PhysicalParams, branch_data

log = logging.getLogger(__name__)

ODE_RTOL = 1e-12
ODE_ATOL = 1e-14
_SPLIT = 0.5 + 1.0 / 81.0


@dataclass(frozen=True)
class EvansZero:
    z: complex
    multiplicity: int
    residual: float
    newton_iters: int


@dataclass(frozen=True)
class ScanRegion:
    """Rectangle ``[re_lo, re_hi] x [im_lo, im_hi]`` kept away from the free spectrum."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float
    spectrum_margin: float | None = None

    def __post_init__(self):
        if not (self.re_lo < self.re_hi and self.im_lo < self.im_hi):
            raise PreconditionError(f"degenerate rectangle {self.rect}")

    @property
    def rect(self) -> tuple[float, float, float, float]:
        return (self.re_lo, self.re_hi, self.im_lo, self.im_hi)

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    def margin_for(self, params: PhysicalParams) -> float:
        if self.spectrum_margin is not None:
            return self.spectrum_margin
        return 1e-3 * max(1.0, params.rest_energy)

    def check(self, params: PhysicalParams) -> None:
        d = rect_distance_to_spectrum(self.rect, params)
        margin = self.margin_for(params)
        if d < margin:
            raise RegionTouchesSpectrum(
                f"rectangle {self.rect} is {d:g} from the free spectrum (margin {margin:g})")

    def quadrants(self) -> list["ScanRegion"]:
        # off-centre split: symmetric problems put zeros on the midlines
        xm = self.re_lo + _SPLIT * (self.re_hi - self.re_lo)
        ym = self.im_lo + _SPLIT * (self.im_hi - self.im_lo)
        m = self.spectrum_margin
        return [ScanRegion(self.re_lo, xm, self.im_lo, ym, m), ScanRegion(xm, self.re_hi, self.im_lo, ym, m),
                ScanRegion(self.re_lo, xm, ym, self.im_hi, m), ScanRegion(xm, self.re_hi, ym, self.im_hi, m)]

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        return (self.re_lo - tol <= z.real <= self.re_hi + tol
                and self.im_lo - tol <= z.imag <= self.im_hi + tol)


def rect_distance_to_spectrum(rect, params: PhysicalParams) -> float:
    """Distance between a closed rectangle and ``(-inf, -mc^2] U [mc^2, inf)``."""
    re_lo, re_hi, im_lo, im_hi = rect
    mc2 = params.rest_energy
    dy = 0.0 if im_lo <= 0.0 <= im_hi else min(abs(im_lo), abs(im_hi))
    # horizontal gap between [re_lo, re_hi] and the spectrum
    if re_lo <= -mc2 or re_hi >= mc2:
        dx = 0.0
    else:
        dx = min(re_lo + mc2, mc2 - re_hi)
    return math.hypot(dx, dy)


# -- propagation ----------------------------------------------------------------

def propagate_many(z, pot: Potential, bc: BoundaryCondition, params: PhysicalParams,
                   rtol: float = ODE_RTOL, atol: float = ODE_ATOL) -> np.ndarray:
    """``psi(x_max)`` for a batch of spectral parameters; shape ``(2, len(z))``.

    The system is integrated piece by piece between the breakpoints of ``V``,
    with ``V`` sampled one-sidedly inside each piece, so jumps never sit
    inside a step.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = z.size
    mc2, c = params.rest_energy, params.c
    zp, zm = (z + mc2) / c, (mc2 - z) / c
    y = np.concatenate([np.full(n, bc.sin_alpha, dtype=complex), np.full(n, bc.cos_alpha, dtype=complex)])
    bps = [0.0] + [p for p in pot.breakpoints if p > 0.0]
    for lo, hi in zip(bps[:-1], bps[1:]):
        sample = pot.piece(lo, hi)

        def rhs(x, u, sample=sample):
            p1, p2 = u[:n], u[n:]
            V = sample(x) / c
            d1 = zp * p2 - (V[1, 0] * p1 + V[1, 1] * p2)
            d2 = zm * p1 + (V[0, 0] * p1 + V[0, 1] * p2)
            return np.concatenate([d1, d2])

        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=rtol, atol=atol)
        if sol.status != 0:
            loc = float(sol.t[-1]) if sol.t.size else lo
            raise StiffnessFailure(f"integration stopped on [{lo}, {hi}]: {sol.message}", loc)
        y = sol.y[:, -1]
    return np.stack([y[:n], y[n:]])


def propagate(z: complex, pot: Potential, bc: BoundaryCondition, params: PhysicalParams) -> np.ndarray:
    if not np.isfinite(z):
        raise PreconditionError(f"z must be finite, got {z}")
    return propagate_many([z], pot, bc, params)[:, 0]


def evans_values(z, pot: Potential, bc: BoundaryCondition, params: PhysicalParams,
                 rtol: float = ODE_RTOL) -> np.ndarray:
    """Growing-mode coefficient ``E(z)`` for a batch of points."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    kappa, zeta = branch_data(z, params)
    az = np.abs(zeta)
    bad = (az < 1e-8) | (az > 1e8)
    if np.any(bad):
        raise DegenerateBasis(f"|zeta| = {az[bad][0]:.3g} at z = {z[bad][0]}; too close to +-mc^2")
    x = pot.support[1]
    psi = propagate_many(z, pot, bc, params, rtol=rtol, atol=ODE_ATOL * rtol / ODE_RTOL)
    e = np.exp(1j * kappa * x)
    # det[psi_inf(x), psi(x)] = B det[psi_inf, psi_grow] = -2 i zeta B
    det = (-1j * zeta * e) * psi[1] - e * psi[0]
    return det / (-2j * zeta)


def evans_value(z: complex, pot: Potential, bc: BoundaryCondition, params: PhysicalParams) -> complex:
    return complex(evans_values([z], pot, bc, params)[0])


def free_evans(z, bc: BoundaryCondition, params: PhysicalParams) -> np.ndarray:
    """``E(z)`` for ``V = 0``: ``(cos a - i sin a / zeta) / 2``."""
    _, zeta = branch_data(np.atleast_1d(np.asarray(z, dtype=complex)), params)
    return 0.5 * (bc.cos_alpha - 1j * bc.sin_alpha / zeta)


# -- argument principle -----------------------------------------------------------

def _contour(rect, per_edge: int) -> np.ndarray:
    re_lo, re_hi, im_lo, im_hi = rect
    t = np.linspace(0.0, 1.0, per_edge, endpoint=False)
    corners = [complex(re_lo, im_lo), complex(re_hi, im_lo), complex(re_hi, im_hi), complex(re_lo, im_hi)]
    pts = [a + (b - a) * t for a, b in zip(corners, corners[1:] + corners[:1])]
    return np.concatenate(pts)


def _winding_once(rect, E, per_edge: int, max_rounds: int, zero_tol: float):
    z = _contour(rect, per_edge)
    vals = E(z)
    scale = float(np.median(np.abs(vals)))
    for _ in range(max_rounds):
        if np.any(np.abs(vals) < zero_tol * scale):
            return None, scale
        nxt = np.roll(vals, -1)
        jumps = np.angle(nxt / vals)
        # a relative change below 1/2 cannot hide a full turn of the phase
        rel = np.abs(nxt - vals) / np.minimum(np.abs(nxt), np.abs(vals))
        bad = np.nonzero((np.abs(jumps) >= 0.5 * math.pi) | (rel > 0.5))[0]
        if bad.size == 0:
            total = jumps.sum() / (2.0 * math.pi)
            return int(round(total)), scale
        znext = np.roll(z, -1)
        mids = 0.5 * (z[bad] + znext[bad])
        mvals = E(mids)
        z = np.insert(z, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mvals)
    return None, scale


def winding_count(region: ScanRegion, pot: Potential, bc: BoundaryCondition, params: PhysicalParams,
                  *, per_edge: int = 32, max_rounds: int = 24, attempts: int = 5) -> int:
    """Zeros of ``E`` inside the rectangle, counted with multiplicity."""
    region.check(params)

    def E(z):
        return evans_values(z, pot, bc, params)

    return _winding(region, E, params, per_edge, max_rounds, attempts)


def _winding(region: ScanRegion, E, params, per_edge=32, max_rounds=24, attempts=5) -> int:
    rect = region.rect
    size = max(region.re_hi - region.re_lo, region.im_hi - region.im_lo)
    for k in range(attempts + 1):
        w, _ = _winding_once(rect, E, per_edge, max_rounds, 1e-12)
        if w is not None:
            return w
        # nudge the contour outward by a small, deterministic amount
        d = size * 1e-3 * (k + 1)
        rect = (rect[0] - d, rect[1] + d * 0.7, rect[2] - d * 0.3, rect[3] + d * 0.9)
        if rect_distance_to_spectrum(rect, params) <= 0.0:
            d = -d
            rect = region.rect
            rect = (rect[0] - d, rect[1] + d * 0.7, rect[2] - d * 0.3, rect[3] + d * 0.9)
        log.info("contour of %s perturbed to %s", region.rect, rect)
    raise ContourThroughZero(f"contour of {region.rect} passes through a zero of E")


# -- root finding ---------------------------------------------------------------------

def _newton(E, z0: complex, multiplicity: int, radius: float, tol: float, max_iter: int = 40):
    """Newton with central differences; keeps polishing past ``tol`` while
    the residual still drops, so the zero is limited by the ODE accuracy
    rather than by the acceptance threshold."""
    z = z0
    best = None
    for it in range(1, max_iter + 1):
        h = 1e-6 * (1.0 + abs(z))
        f0, fp, fm = E(np.array([z, z + h, z - h]))
        res = abs(f0)
        if best is not None and res >= 0.5 * best[1]:
            return best[0], best[1], it - 1
        if res < tol:
            best = (z, res) if best is None or res < best[1] else best
        d = (fp - fm) / (2.0 * h)
        if d == 0:
            if best is not None:
                return best[0], best[1], it - 1
            raise NewtonDivergence(f"vanishing derivative at {z}")
        step = multiplicity * f0 / d
        z = z - step
        if abs(z - z0) > radius:
            raise NewtonDivergence(f"Newton left the cell around {z0}")
        if best is not None and abs(step) < 1e-15 * (1.0 + abs(z)):
            return best[0], best[1], it
    if best is not None:
        return best[0], best[1], max_iter
    raise NewtonDivergence(f"residual {res:.3g} after {max_iter} steps from {z0}")


def find_zeros(region: ScanRegion, pot: Potential, bc: BoundaryCondition, params: PhysicalParams,
               *, min_cell: float | None = None, residual_tol: float = 1e-10) -> list[EvansZero]:
    """All zeros of ``E`` in the rectangle, sorted by ``(Re z, Im z)``.

    Cells are quartered until each holds at most one zero (counted with
    multiplicity) and Newton converges from its centre; cells shrunk below
    ``min_cell`` are polished with the multiplicity-aware Newton step.
    """
    region.check(params)
    scale_z = max(1.0, params.rest_energy)
    min_cell = 1e-4 * scale_z if min_cell is None else min_cell

    def E(z):
        return evans_values(z, pot, bc, params)

    boundary = E(_contour(region.rect, 8))
    tol = residual_tol * max(float(np.max(np.abs(boundary))), 1e-300)

    zeros: list[EvansZero] = []
    stack = [(region, _winding(region, E, params))]
    while stack:
        cell, w = stack.pop()
        if w <= 0:
            continue
        centre = complex(0.5 * (cell.re_lo + cell.re_hi), 0.5 * (cell.im_lo + cell.im_hi))
        small = cell.diameter < min_cell
        if w == 1 or small:
            try:
                z, res, its = _newton(E, centre, w, max(cell.diameter, min_cell), tol)
                if cell.contains(z, 1e-9 * scale_z):
                    zeros.append(EvansZero(z, w, float(res), its))
                    continue
            except NewtonDivergence as exc:
                if small:
                    raise
                log.debug("subdividing after Newton failure: %s", exc)
        children = cell.quadrants()
        counts = [_winding(ch, E, params) for ch in children]
        if sum(counts) != w:
            log.warning("winding not additive on %s: %d vs %s", cell.rect, w, counts)
        stack.extend(zip(children, counts))
    zeros = _dedupe(zeros, 1e-8 * scale_z)
    return sorted(zeros, key=lambda r: (r.z.real, r.z.imag))


def _dedupe(zeros: list[EvansZero], tol: float) -> list[EvansZero]:
    # a zero on a shared cell edge can be polished from both sides
    out: list[EvansZero] = []
    for zr in zeros:
        if all(abs(zr.z - o.z) > tol for o in out):
            out.append(zr)
    return out
