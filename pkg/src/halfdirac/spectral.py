"""Branch-resolved spectral maps and the two-disk eigenvalue enclosure.

For a spectral parameter ``z`` off the free spectrum
``(-inf, -mc^2] U [mc^2, inf)`` the wavenumber ``kappa`` and the auxiliary
variable ``zeta`` are

    c*kappa = sqrt(z^2 - (mc^2)^2),   Im kappa > 0,
    zeta    = (z + mc^2) / (c*kappa),

and for ``m > 0`` the point ``z`` is recovered from ``zeta**2`` through the
Moebius map ``z = mc^2 (w + 1)/(w - 1)``, ``w = zeta**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import (
    CouplingTooLarge,
    EmbeddedPoint,
    MasslessUndefined,
    PoleAtZetaSquaredOne,
    PreconditionError,
    RhoNotGreaterThanOne,
)

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class PhysicalParams:
    """Mass ``m`` and speed of light ``c`` (units with hbar = 1)."""

    m: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.m >= 0.0 and math.isfinite(self.m)):
            raise PreconditionError(f"mass must be finite and >= 0, got {self.m}")
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise PreconditionError(f"speed of light must be finite and > 0, got {self.c}")

    @property
    def rest_energy(self) -> float:
        return self.m * self.c**2

    @property
    def massive(self) -> bool:
        return self.m > 0.0

    def default_epsilon(self) -> float:
        return 1e-12 * max(1.0, self.rest_energy)


@dataclass(frozen=True)
class SpectralPoint:
    z: complex
    kappa: complex
    zeta: complex
    params: PhysicalParams

    @property
    def abs_zeta(self) -> float:
        return abs(self.zeta)

    @property
    def arg_zeta(self) -> float:
        return float(np.angle(self.zeta))


def distance_to_spectrum(z, params: PhysicalParams):
    """Euclidean distance from ``z`` to the free spectrum (vectorized)."""
    z = np.asarray(z, dtype=complex)
    mc2 = params.rest_energy
    x, y = z.real, np.abs(z.imag)
    inside_gap = np.abs(x) < mc2
    to_edge = np.minimum(np.abs(z - mc2), np.abs(z + mc2))
    d = np.where(inside_gap, to_edge, y)
    return d if d.ndim else float(d)


def branch_data(z, params: PhysicalParams):
    """Return ``(kappa, zeta)`` for an array of spectral parameters.

    No proximity check is done here; points on the spectrum give a
    branch-ambiguous (but finite, where defined) result.
    """
    z = np.asarray(z, dtype=complex)
    mc2 = params.rest_energy
    c = params.c
    if mc2 == 0.0:
        zeta = np.where(z.imag > 0, 1.0 + 0j, -1.0 + 0j)
        ckappa = z / zeta
        return ckappa / c, zeta
    # factorized form avoids cancellation near +-mc^2
    ckappa = np.sqrt((z - mc2) * (z + mc2))
    ckappa = np.where(ckappa.imag > 0, ckappa, -ckappa)
    zeta = (z + mc2) / ckappa
    return ckappa / c, zeta


def compute_spectral_point(z: complex, params: PhysicalParams, eps: float | None = None) -> SpectralPoint:
    z = complex(z)
    if eps is None:
        eps = params.default_epsilon()
    d = distance_to_spectrum(z, params)
    if not d > eps:
        raise EmbeddedPoint(f"z={z} is within {eps:g} of the free spectrum (distance {d:g})")
    kappa, zeta = branch_data(z, params)
    return SpectralPoint(z=z, kappa=complex(kappa), zeta=complex(zeta), params=params)


def mobius_z_of_zeta(zeta: complex, params: PhysicalParams) -> complex:
    if not params.massive:
        raise MasslessUndefined("the zeta -> z map degenerates for m = 0")
    w = complex(zeta) ** 2
    if abs(w - 1.0) < 1e-14:
        raise PoleAtZetaSquaredOne(f"zeta^2 = {w} is too close to 1")
    return params.rest_energy * (w + 1.0) / (w - 1.0)


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius >= 0.0:
            raise PreconditionError(f"disk radius must be >= 0, got {self.radius}")

    def contains(self, z, tol: float = 0.0):
        return np.abs(np.asarray(z) - self.center) <= self.radius + tol

    def margin(self, z):
        """Signed distance inside the disk (positive = interior)."""
        return self.radius - np.abs(np.asarray(z) - self.center)

    def within(self, other: "Disk", tol: float = 0.0) -> bool:
        return abs(self.center - other.center) + self.radius <= other.radius + tol


@dataclass
class EnclosureRegion:
    """Union of disks, or the complement of a real gap interval.

    ``info`` carries comparison data (e.g. the printed-formula disks) and
    bookkeeping such as the half-plane orientation of ``|zeta| > 1``.
    """

    kind: str = "disk-union"
    disks: list[Disk] = field(default_factory=list)
    excluded_gap: tuple[float, float] | None = None
    info: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("disk-union", "interval-complement"):
            raise PreconditionError(f"unknown region kind {self.kind!r}")
        if self.kind == "interval-complement" and self.excluded_gap is None:
            raise PreconditionError("interval-complement region needs excluded_gap")

    def contains(self, z, tol: float = 0.0, real_tol: float = 1e-6):
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk-union":
            inside = np.zeros(z.shape, dtype=bool)
            for d in self.disks:
                inside |= d.contains(z, tol)
        else:
            lo, hi = self.excluded_gap
            near_real = np.abs(z.imag) <= real_tol
            in_gap = (z.real > lo + tol) & (z.real < hi - tol)
            inside = near_real & ~in_gap
        return bool(inside) if inside.ndim == 0 else inside

    def margin(self, z) -> float:
        """Largest signed distance of ``z`` inside any disk (disk-union only)."""
        if self.kind != "disk-union":
            raise PreconditionError("margin is defined for disk unions only")
        if not self.disks:
            return -math.inf
        return max(float(d.margin(z)) for d in self.disks)

    def subset_of(self, other: "EnclosureRegion", tol: float = 0.0) -> bool:
        """Disk-wise containment: each disk lies inside some disk of ``other``."""
        return all(any(d.within(o, tol) for o in other.disks) for d in self.disks)


def level_set_disks(rho: float, params: PhysicalParams) -> EnclosureRegion:
    """Images of ``{|zeta| >= rho}`` and ``{|zeta| <= 1/rho}`` in the z-plane."""
    if not params.massive:
        raise MasslessUndefined("level-set disks need m > 0")
    if not rho > 1.0:
        raise RhoNotGreaterThanOne(f"rho must exceed 1, got {rho}")
    mc2 = params.rest_energy
    if math.isinf(rho):
        centre, radius = mc2, 0.0
    else:
        R = rho * rho
        centre = mc2 * (R * R + 1.0) / (R * R - 1.0)
        radius = 2.0 * mc2 * R / (R * R - 1.0)
    region = EnclosureRegion(disks=[Disk(complex(centre), radius), Disk(complex(-centre), radius)])
    region.info["rho"] = rho
    region.info["large_zeta_side"] = zeta_orientation(params)
    return region


def zeta_orientation(params: PhysicalParams) -> str:
    """Which half-plane carries ``|zeta| > 1`` under the implemented branch."""
    _, zeta = branch_data(0.5 * params.rest_energy + 0.5j * params.rest_energy, params)
    return "right" if abs(zeta) > 1.0 else "left"


def printed_disk_parameters(v: float) -> tuple[float, float]:
    """Centre and radius multipliers ``(x0, r0)`` exactly as printed."""
    den = 1.0 - 2.0 * v * v
    return 1.0 + 2.0 * v**4 / den, 2.0 * v * (1.0 - v * v) / den


def derived_disk_parameters(v: float) -> tuple[float, float]:
    """Centre and radius multipliers of the Moebius image of the zeta level set."""
    den = 1.0 - 2.0 * v * v
    return 1.0 + 2.0 * v**4 / den, 2.0 * v * v * (1.0 - v * v) / den


def theorem1_enclosure(v: float, params: PhysicalParams) -> EnclosureRegion:
    """Two-disk enclosure for coupling ``v = ||V||_1 / c < 1/sqrt(2)``.

    Ground truth is the exact Moebius image of the zeta level sets; the
    printed ``(x0, r0)`` disks are attached under ``info["printed"]``
    together with the containment verdict. For ``m = 0`` the region is
    empty: no eigenvalue can leave the real axis.
    """
    if not v >= 0.0:
        raise PreconditionError(f"coupling must be >= 0, got {v}")
    if v >= INV_SQRT2:
        raise CouplingTooLarge(f"v = {v} >= 1/sqrt(2)")
    if not params.massive:
        region = EnclosureRegion()
        region.info.update(v=v, massless=True, note="empty enclosure; spectrum = R")
        return region

    rho = math.inf if v == 0.0 else math.sqrt(1.0 - v * v) / v
    region = level_set_disks(rho, params)
    mc2 = params.rest_energy
    x0, r0 = printed_disk_parameters(v)
    printed = EnclosureRegion(disks=[Disk(complex(mc2 * x0), mc2 * r0), Disk(complex(-mc2 * x0), mc2 * r0)])
    contained = region.subset_of(printed, tol=1e-12 * max(1.0, mc2))
    region.info.update(
        v=v,
        x0=x0,
        r0_printed=r0,
        r0_derived=derived_disk_parameters(v)[1],
        printed=printed,
        derived_within_printed=contained,
    )
    return region
