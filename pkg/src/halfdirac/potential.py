"""Compactly supported, matrix-valued potentials and their polar factorization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .bounds import MomentData
from .errors import PreconditionError

PROFILES = ("step", "truncated_gaussian", "bump")


def _profile_fn(kind: str, a: float, b: float, width: float | None, centre: float | None):
    if kind == "step":
        return lambda x: np.ones_like(x)
    if kind == "truncated_gaussian":
        mu = 0.5 * (a + b) if centre is None else centre
        sig = (b - a) / 4.0 if width is None else width
        return lambda x: np.exp(-0.5 * ((x - mu) / sig) ** 2)
    if kind == "bump":
        def bump(x):
            s = (2.0 * x - a - b) / (b - a)
            inside = np.abs(s) < 1.0
            out = np.zeros_like(x)
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
            return out
        return bump
    raise PreconditionError(f"unknown profile {kind!r}; expected one of {PROFILES}")


@dataclass(frozen=True)
class Term:
    """``profile(x) * matrix`` on ``[a, b]``, zero elsewhere."""

    profile: str
    a: float
    b: float
    matrix: np.ndarray
    width: float | None = None
    centre: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.a < self.b < math.inf):
            raise PreconditionError(f"support [{self.a}, {self.b}] must satisfy 0 <= a < b < inf")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise PreconditionError(f"term matrix must be 2x2, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)
        _profile_fn(self.profile, self.a, self.b, self.width, self.centre)

    def profile_values(self, x: np.ndarray) -> np.ndarray:
        f = _profile_fn(self.profile, self.a, self.b, self.width, self.centre)
        inside = (x >= self.a) & (x <= self.b)
        out = np.zeros(x.shape)
        out[inside] = f(x[inside])
        return out

    def edge_jump(self) -> float:
        """Size of the jump created by truncating the profile to ``[a, b]``."""
        f = _profile_fn(self.profile, self.a, self.b, self.width, self.centre)
        ends = f(np.array([self.a, self.b], dtype=float))
        return float(np.max(np.abs(ends)) * np.linalg.norm(self.matrix, 2))


@dataclass
class Potential:
    terms: list[Term]
    smoothness_tag: str = ""
    _moments: MomentData | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.terms:
            raise PreconditionError("a potential needs at least one term")
        if not self.smoothness_tag:
            self.smoothness_tag = "+".join(sorted({t.profile for t in self.terms}))

    @property
    def support(self) -> tuple[float, float]:
        return min(t.a for t in self.terms), max(t.b for t in self.terms)

    @property
    def breakpoints(self) -> list[float]:
        return sorted({p for t in self.terms for p in (t.a, t.b)})

    def sample(self, x) -> np.ndarray:
        """``V(x)`` with shape ``x.shape + (2, 2)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (2, 2), dtype=complex)
        for t in self.terms:
            out += t.profile_values(x)[..., None, None] * t.matrix
        return out

    def piece(self, lo: float, hi: float) -> Callable[[float], np.ndarray]:
        """Sampler of ``V`` on the open interval ``(lo, hi)`` extended to its
        closure by continuity (one-sided at the breakpoints)."""
        active = [t for t in self.terms if t.a <= lo and t.b >= hi]
        fns = [(_profile_fn(t.profile, t.a, t.b, t.width, t.centre), t.matrix) for t in active]

        def sampler(x: float) -> np.ndarray:
            out = np.zeros((2, 2), dtype=complex)
            xa = np.array([x], dtype=float)
            for f, m in fns:
                out += f(xa)[0] * m
            return out

        return sampler

    def norm(self, x) -> np.ndarray:
        """Pointwise operator norm ``||V(x)||`` on C^2."""
        return np.linalg.norm(self.sample(x), ord=2, axis=(-2, -1))

    @property
    def is_hermitian(self) -> bool:
        return all(np.allclose(t.matrix, t.matrix.conj().T, atol=0.0, rtol=1e-14) for t in self.terms)

    @property
    def moments(self) -> MomentData:
        if self._moments is None:
            self._moments = self._gauss_moments()
        return self._moments

    def coupling(self, c: float) -> float:
        return self.moments.l1_norm / c

    def _gauss_moments(self, panels: int = 64, order: int = 20) -> MomentData:
        t, w = np.polynomial.legendre.leggauss(order)
        l1 = m1 = 0.0
        bps = self.breakpoints
        for lo, hi in zip(bps[:-1], bps[1:]):
            edges = np.linspace(lo, hi, panels + 1)
            half = 0.5 * np.diff(edges)[:, None]
            x = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half * t[None, :]
            ww = half * w[None, :]
            nv = self.norm(x)
            l1 += float(np.sum(ww * nv))
            m1 += float(np.sum(ww * x * nv))
        return MomentData(l1, m1)

    def adaptive_moments(self) -> MomentData:
        """Independent check of the cached moments with adaptive quadrature."""
        def nv(x):
            return float(self.norm(np.array([x]))[0])
        l1 = m1 = 0.0
        bps = self.breakpoints
        for lo, hi in zip(bps[:-1], bps[1:]):
            l1 += integrate.quad(nv, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
            m1 += integrate.quad(lambda x: x * nv(x), lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        return MomentData(l1, m1)

    def scaled(self, factor: complex) -> "Potential":
        terms = [Term(t.profile, t.a, t.b, t.matrix * factor, t.width, t.centre) for t in self.terms]
        return Potential(terms, self.smoothness_tag)

    def with_l1(self, target: float) -> "Potential":
        """Rescale by a positive factor so that ``||V||_1 == target``."""
        l1 = self.moments.l1_norm
        if l1 == 0.0:
            raise PreconditionError("cannot rescale the zero potential")
        return self.scaled(target / l1)

    def to_dict(self) -> dict:
        def enc(m):
            return [[[float(v.real), float(v.imag)] for v in row] for row in m]
        return {"terms": [{"profile": t.profile, "support": [t.a, t.b], "matrix": enc(t.matrix),
                           "width": t.width, "centre": t.centre} for t in self.terms]}


def scalar_term(profile: str, a: float, b: float, amplitude: complex, **kw) -> Term:
    return Term(profile, a, b, amplitude * np.eye(2), **kw)


@dataclass(frozen=True)
class FactorizedPotential:
    """Pointwise polar split ``V = V^{1/2} |V|^{1/2}``, ``V^{1/2} = U |V|^{1/2}``."""

    half: Callable[[np.ndarray], np.ndarray]
    abs_half: Callable[[np.ndarray], np.ndarray]
    potential: Potential


def polar_halves(V: np.ndarray, rel_cut: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """``(V^{1/2}, |V|^{1/2})`` for a stack of 2x2 matrices.

    The partial isometry acts as zero on ``ker |V|``.
    """
    V = np.asarray(V, dtype=complex)
    VhV = np.swapaxes(V.conj(), -1, -2) @ V
    lam, U = np.linalg.eigh(VhV)
    lam = np.clip(lam, 0.0, None)
    scale = lam.max(axis=-1, keepdims=True)
    # cut on singular values, i.e. on sqrt(lam)
    keep = lam > rel_cut**2 * np.where(scale > 0, scale, 1.0)
    keep &= scale > 0
    quarter = np.where(keep, lam, 1.0) ** 0.25
    Uh = np.swapaxes(U.conj(), -1, -2)
    abs_half = (U * np.where(keep, quarter, 0.0)[..., None, :]) @ Uh
    inv_quarter = (U * np.where(keep, 1.0 / quarter, 0.0)[..., None, :]) @ Uh
    return V @ inv_quarter, abs_half


def factorize(pot: Potential) -> FactorizedPotential:
    def half(x):
        return polar_halves(pot.sample(x))[0]

    def abs_half(x):
        return polar_halves(pot.sample(x))[1]

    return FactorizedPotential(half, abs_half, pot)
