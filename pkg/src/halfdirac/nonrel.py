"""Non-relativistic limit of the half-line Dirac resolvent (m = 1/2).

With the rest energy added, ``(D0 + mc^2 - z)^{-1}`` tends to
``0 (+) (d^2/dx^2 - z)^{-1}`` as c grows; with it subtracted,
``(D0 - mc^2 - z)^{-1}`` tends to ``(-d^2/dx^2 - z)^{-1} (+) 0``. The
Schroedinger part carries a Dirichlet or Neumann condition depending on
alpha and on the branch.

``limit_kernel`` returns the textbook kernel
``-(2 i k)^{-1} (exp(i k |x-y|) -+ exp(i k (x+y)))``, ``k = sqrt(-z)``,
which is the kernel of ``(-d^2/dx^2 + z)^{-1}``. The true resolvent limit on
the ``+`` branch is its negative; ``rate_check`` accounts for that sign.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import G_many, g_of_b, zeta_polar
from .errors import MasslessUndefined, OnHalfLineSpectrum, PreconditionError
from .resolvent import BoundaryCondition, kernel_block
from .spectral import PhysicalParams, compute_spectral_point

NR_MASS = 0.5
BC_TYPES = ("Dirichlet", "Neumann")


def _sign_of(bc_type: str) -> float:
    if bc_type == "Dirichlet":
        return -1.0
    if bc_type == "Neumann":
        return 1.0
    raise PreconditionError(f"bc_type must be one of {BC_TYPES}, got {bc_type!r}")


def sqrt_upper(w: complex) -> complex:
    """Square root with positive imaginary part."""
    r = cmath.sqrt(w)
    return r if r.imag > 0 else -r


@dataclass(frozen=True)
class LimitKernel:
    bc_type: str

    def __post_init__(self):
        _sign_of(self.bc_type)

    def value(self, x, y, z: complex):
        return limit_kernel(self.bc_type, x, y, z)


def limit_kernel(bc_type: str, x, y, z: complex):
    """Half-line kernel of ``(-d^2/dx^2 + z)^{-1}`` with Dirichlet or Neumann condition.

    Defined for ``z`` off ``(-inf, 0]``, where ``Im sqrt(-z) > 0``.
    """
    sgn = _sign_of(bc_type)
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0:
        raise OnHalfLineSpectrum(f"z = {z} lies on (-inf, 0]; Im sqrt(-z) would vanish")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise PreconditionError("kernel positions must be >= 0")
    k = sqrt_upper(-z)
    out = -(np.exp(1j * k * np.abs(x - y)) + sgn * np.exp(1j * k * (x + y))) / (2j * k)
    return complex(out) if out.ndim == 0 else out


def bc_limit_map(alpha: float, branch: str) -> str:
    """Boundary condition of the Schroedinger limit.

    ``branch='+'`` is the rest energy added (spectrum near ``-mc^2``),
    ``branch='-'`` the rest energy subtracted (near ``+mc^2``).
    """
    if not -1e-15 <= alpha <= math.pi / 2 + 1e-15:
        raise PreconditionError(f"alpha must lie in [0, pi/2], got {alpha}")
    at_zero = abs(alpha) < 1e-15
    at_half = abs(alpha - math.pi / 2) < 1e-15
    if branch in ("+", "+mc2"):
        return "Neumann" if at_zero else "Dirichlet"
    if branch in ("-", "-mc2"):
        return "Neumann" if at_half else "Dirichlet"
    raise PreconditionError(f"branch must be '+' or '-', got {branch!r}")


def bc_limit_table() -> list[dict]:
    rows = []
    for branch in ("+", "-"):
        for label, alpha in (("0", 0.0), ("pi/4", math.pi / 4), ("pi/2", math.pi / 2)):
            rows.append({"branch": branch, "alpha": label, "limit": bc_limit_map(alpha, branch)})
    return rows


# -- convergence rate ------------------------------------------------------------

@dataclass(frozen=True)
class RateRow:
    c: float
    D: float           # envelope-weighted sup of the full 2x2 difference
    D_nontrivial: float  # same, Schroedinger block only
    D_off: float       # same, the three blocks that tend to zero
    ratio: float | None


@dataclass
class RateTable:
    z: complex
    alpha: float
    branch: str
    bc_type: str
    rows: list[RateRow] = field(default_factory=list)
    exponent: float = math.nan
    exponent_nontrivial: float = math.nan
    constant_A: float = math.nan

    @property
    def ratios(self) -> list[float]:
        return [r.ratio for r in self.rows if r.ratio is not None]

    @property
    def off_blocks_decay(self) -> bool:
        off = [r.D_off for r in self.rows]
        return all(b < a for a, b in zip(off, off[1:]))


def _fit_exponent(c, d) -> float:
    c, d = np.asarray(c, float), np.asarray(d, float)
    if np.any(d <= 0):
        return math.inf
    return float(-np.polyfit(np.log(c), np.log(d), 1)[0])


def rate_check(z: complex, c_list, alpha: float, branch: str = "+", grid=None) -> RateTable:
    """Kernel convergence table over a doubling sequence of c.

    ``D(c) = sup_{x,y} ||R0(x, y) - lim R0(x, y)|| exp(Im k |x - y|)`` on a
    square grid (default ``[0, 2 / Im k]``), where ``R0`` is the Dirac kernel at ``z -+ mc^2`` and the
    limit is ``0 (+) scalar`` (or ``scalar (+) 0``).
    """
    c_list = [float(c) for c in c_list]
    if len(c_list) < 3:
        raise PreconditionError("need at least three values of c")
    for a, b in zip(c_list, c_list[1:]):
        if not math.isclose(b, 2.0 * a, rel_tol=1e-12):
            raise PreconditionError("c values must double")
    z = complex(z)
    bc = BoundaryCondition.from_alpha(alpha)
    bc_type = bc_limit_map(alpha, branch)
    # '+' branch: lower block -> (d^2 - z)^{-1} = -K(z); '-' branch: upper block -> (-d^2 - z)^{-1} = K(-z)
    if branch == "+":
        zk, sign, blk = z, -1.0, (1, 1)
    else:
        zk, sign, blk = -z, 1.0, (0, 0)
    k = sqrt_upper(-zk) if not (zk.imag == 0 and zk.real <= 0) else None
    if k is None:
        raise OnHalfLineSpectrum(f"z = {z} lies on the spectrum of the limit operator")
    if grid is None:
        # the weighted difference carries a phase-drift term ~ |x - y| / c^2,
        # so the sup is taken over a window of two decay lengths
        grid = np.linspace(0.0, 2.0 / k.imag, 161)
    xs = np.asarray(grid, dtype=float)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    env = np.exp(k.imag * np.abs(X - Y))
    lim = sign * limit_kernel(bc_type, X, Y, zk)

    table = RateTable(z=z, alpha=alpha, branch=branch, bc_type=bc_type)
    prev = None
    for c in c_list:
        params = PhysicalParams(NR_MASS, c)
        shift = -params.rest_energy if branch == "+" else params.rest_energy
        sp = compute_spectral_point(z + shift, params)
        diff = kernel_block(xs, xs, sp, bc).copy()
        diff[..., blk[0], blk[1]] -= lim
        full = np.linalg.norm(diff, ord=2, axis=(-2, -1)) * env
        main = np.abs(diff[..., blk[0], blk[1]]) * env
        mask = np.ones((2, 2), dtype=bool)
        mask[blk] = False
        off = np.max(np.abs(diff[..., mask]) * env[..., None])
        D = float(full.max())
        table.rows.append(RateRow(c, D, float(main.max()), float(off), None if prev is None else D / prev))
        prev = D
    cs = [r.c for r in table.rows]
    table.exponent = _fit_exponent(cs, [r.D for r in table.rows])
    table.exponent_nontrivial = _fit_exponent(cs, [r.D_nontrivial for r in table.rows])
    table.constant_A = max(r.c * r.D for r in table.rows)
    return table


# -- reduction of the refined bound --------------------------------------------------

@dataclass(frozen=True)
class ReductionRow:
    magnitude: float
    z: complex
    lhs: float
    ratio: float


@dataclass
class ReductionTable:
    t: float
    g_value: float
    rows: list[ReductionRow]
    schrodinger_constant: float  # C in |lambda|^{1/2} <= C g(cot(theta/2)) ||V||_1

    @property
    def final_ratio(self) -> float:
        return self.rows[-1].ratio


def schrodinger_reduction_check(t: float, magnitudes, params: PhysicalParams | None = None) -> ReductionTable:
    """Ratios ``(|zeta| + 1/|zeta|) G_-(a, cot t) |(z - mc^2)/(2mc^2)|^{1/2} / g(cot t)``.

    ``z`` approaches ``mc^2`` along the ray on which ``arg zeta`` tends to
    ``t`` (``arg(z - mc^2) = -2t``); the ratios should tend to 1.
    """
    params = params or PhysicalParams(NR_MASS, 1.0)
    if not params.massive:
        raise MasslessUndefined("the reduction needs m > 0")
    if abs(math.sin(t)) < 1e-12:
        raise PreconditionError("cot t is undefined")
    mags = [float(r) for r in magnitudes]
    if any(b >= a for a, b in zip(mags, mags[1:])) or any(r <= 0 for r in mags):
        raise PreconditionError("magnitudes must be positive and decreasing")
    mc2 = params.rest_energy
    b = math.cos(t) / math.sin(t)
    gval = g_of_b(b).value
    rows = []
    for r in mags:
        z = mc2 + r * mc2 * cmath.exp(-2j * t)
        sp = compute_spectral_point(z, params)
        s = abs(sp.zeta)
        a, bb, _ = zeta_polar(np.array([sp.zeta]))
        G, _, _ = G_many("minus", a, bb)
        lhs = (s + 1.0 / s) * float(G[0]) * math.sqrt(abs(z - mc2) / (2.0 * mc2))
        rows.append(ReductionRow(r, z, lhs, lhs / gval))
    return ReductionTable(t, gval, rows, math.sqrt(2.0 * params.m) / 2.0)
