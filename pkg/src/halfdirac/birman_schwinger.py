"""Nystrom discretization of the Birman-Schwinger operator.

``Q(z) = |V|^{1/2} (D0 - z)^{-1} V^{1/2}`` acting on L^2(supp V, C^2); the
point ``z`` is an eigenvalue of ``D0 + V`` iff ``-1`` is an eigenvalue of
``Q(z)``.

Two discretizations share one quadrature rule (Gauss-Legendre panels):

* ``plain`` -- textbook Nystrom, ``Q_jk = w_k |V_j|^{1/2} R0(x_j, x_k) V_k^{1/2}``.
  The kernel jumps across the diagonal, so this converges only at first
  order in the panel width.
* ``corrected`` -- the panel containing ``x_j`` is integrated with product
  quadrature (split at ``x_j``, Lagrange interpolation of the density), which
  restores the high order of the panel rule. Used for root finding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigs

from .bounds import alpha_sign, moment_q_bound
from .errors import NonConvergence, PreconditionError, RegionTouchesSpectrum
from .potential import FactorizedPotential, Potential, factorize
from .resolvent import (
    BoundaryCondition,
    kernel_block,
    psi_inf,
    psi_l_scaled,
    supnorm_numeric,
    wronskian_scaled,
)
from .spectral import PhysicalParams, SpectralPoint, branch_data, compute_spectral_point, distance_to_spectrum

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    panel_of: np.ndarray
    panels: np.ndarray  # (n_panels, 2) edges
    order: int
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    def product_rule(self, sub_order: int = 16):
        """Per-node sub-rules on the own panel, split at the node.

        Returns ``(s, ws, left, L, cols)``: sub-nodes ``(N, S)``, weights,
        mask of the ``s <= x_j`` half, Lagrange matrices ``(N, S, order)``
        and the column indices of the own panel ``(N, order)``.
        """
        key = ("product", sub_order)
        if key not in self._cache:
            self._cache[key] = _build_product_rule(self, sub_order)
        return self._cache[key]


def gauss_panels(breakpoints, n_nodes: int, order: int = 8) -> QuadratureRule:
    """Composite Gauss-Legendre rule with about ``n_nodes`` nodes.

    Panels never straddle a breakpoint; they are shared out in proportion to
    interval length.
    """
    bps = np.asarray(sorted(breakpoints), dtype=float)
    if bps.size < 2:
        raise PreconditionError("need at least two breakpoints")
    if n_nodes < 2:
        raise PreconditionError("need at least two nodes")
    lengths = np.diff(bps)
    total = max(1, int(round(n_nodes / order)))
    counts = np.maximum(1, np.round(total * lengths / lengths.sum()).astype(int))
    t, w = np.polynomial.legendre.leggauss(order)
    edges = []
    for lo, hi, k in zip(bps[:-1], bps[1:], counts):
        e = np.linspace(lo, hi, k + 1)
        edges.extend(zip(e[:-1], e[1:]))
    edges = np.array(edges)
    half = 0.5 * (edges[:, 1] - edges[:, 0])
    mid = 0.5 * (edges[:, 1] + edges[:, 0])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    panel_of = np.repeat(np.arange(len(edges)), order)
    return QuadratureRule(nodes, weights, panel_of, edges, order)


def quadrature_for(pot: Potential, n_nodes: int = 128, order: int = 8) -> QuadratureRule:
    return gauss_panels(pot.breakpoints, n_nodes, order)


def _legendre_interp_matrix(order: int, s: np.ndarray) -> np.ndarray:
    """``L[i, k] = l_k(s_i)`` for the Lagrange basis on the Gauss nodes of [-1, 1]."""
    t, _ = np.polynomial.legendre.leggauss(order)
    Vt = np.polynomial.legendre.legvander(t, order - 1)
    Vs = np.polynomial.legendre.legvander(s, order - 1)
    return Vs @ np.linalg.inv(Vt)


def assemble_Q(sp: SpectralPoint, fp: FactorizedPotential, bc: BoundaryCondition,
               quad: QuadratureRule, corrected: bool = True, sub_order: int = 16) -> np.ndarray:
    """Dense ``2N x 2N`` matrix, ordered position-major, component-minor."""
    x, w = quad.nodes, quad.weights
    N = x.size
    A, B = _factor_samples(fp, quad, "nodes")
    # rank one on either side of the diagonal: (A psi)(x_j) (psi^T B w)(x_k)
    pref = -1.0 / (sp.params.c * wronskian_scaled(sp, bc))
    pinf, pl = psi_inf(x, sp).T, psi_l_scaled(x, sp, bc).T
    Bw = B * w[:, None, None]
    lower = np.multiply.outer(pref * np.einsum("jab,jb->ja", A, pinf), np.einsum("ka,kab->kb", pl, Bw))
    upper = np.multiply.outer(pref * np.einsum("jab,jb->ja", A, pl), np.einsum("ka,kab->kb", pinf, Bw))
    mask = (x[:, None] >= x[None, :])[:, None, :, None]
    Q4 = np.where(mask, lower, upper)
    if corrected:
        _correct_diagonal_panels(Q4, sp, fp, bc, quad, A, sub_order)
    return Q4.reshape(2 * N, 2 * N)


def _factor_samples(fp: FactorizedPotential, quad: QuadratureRule, where):
    """Cached ``(|V|^{1/2}, V^{1/2})`` on the nodes or on the product sub-nodes."""
    key = ("factor", where)
    hit = quad._cache.get(key)
    if hit is not None and hit[0] is fp:
        return hit[1]
    x = quad.nodes if where == "nodes" else quad.product_rule(where[1])[0]
    val = (fp.abs_half(x), fp.half(x))
    quad._cache[key] = (fp, val)
    return val


def _build_product_rule(quad: QuadratureRule, sub_order: int):
    order = quad.order
    ts, ws = np.polynomial.legendre.leggauss(sub_order)
    edges = quad.panels[quad.panel_of]  # (N, 2)
    a, b = edges[:, :1], edges[:, 1:]
    xj = quad.nodes[:, None]
    s = np.concatenate([0.5 * (xj + a) + 0.5 * (xj - a) * ts, 0.5 * (b + xj) + 0.5 * (b - xj) * ts], axis=1)
    wts = np.concatenate([0.5 * (xj - a) * ws, 0.5 * (b - xj) * ws], axis=1)
    left = np.zeros(s.shape, dtype=bool)
    left[:, :sub_order] = True
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    L = _legendre_interp_matrix(order, ((s - mid) / half).ravel()).reshape(s.shape + (order,))
    cols = quad.panel_of[:, None] * order + np.arange(order)[None, :]
    return s, wts, left, L, cols


def _correct_diagonal_panels(Q4, sp, fp, bc, quad, A, sub_order):
    s, wts, left, L, cols = quad.product_rule(sub_order)
    x = quad.nodes
    pref = -1.0 / (sp.params.c * wronskian_scaled(sp, bc))
    lower = np.einsum("aj,bjs->jsab", psi_inf(x, sp), psi_l_scaled(s, sp, bc))
    upper = np.einsum("aj,bjs->jsab", psi_l_scaled(x, sp, bc), psi_inf(s, sp))
    Ks = pref * np.where(left[..., None, None], lower, upper)
    KB = np.einsum("jsab,jsbc->jsac", Ks, _factor_samples(fp, quad, ("sub", sub_order))[1])
    KB *= wts[..., None, None]
    block = np.einsum("jsac,jsk->jakc", KB, L)
    vals = np.einsum("jab,jbkc->jkac", A, block)
    Q4[np.arange(x.size)[:, None], :, cols, :] = vals


def assemble_Q_operator(sp: SpectralPoint, fp: FactorizedPotential, bc: BoundaryCondition,
                        quad: QuadratureRule) -> LinearOperator:
    """Matrix-free plain Nystrom operator, O(N) per product.

    The kernel is rank one on each side of the diagonal, so the products
    reduce to cumulative sums.
    """
    x, w = quad.nodes, quad.weights
    N = x.size
    A, B = _factor_samples(fp, quad, "nodes")
    pref = -1.0 / (sp.params.c * wronskian_scaled(sp, bc))
    pinf = psi_inf(x, sp).T  # (N, 2)
    pl = psi_l_scaled(x, sp, bc).T
    left_rows = np.einsum("ka,kab->kb", pl, B) * w[:, None]    # psi_l^T B w
    right_rows = np.einsum("ka,kab->kb", pinf, B) * w[:, None]  # psi_inf^T B w
    out_lo = pref * np.einsum("jab,jb->ja", A, pinf)
    out_hi = pref * np.einsum("jab,jb->ja", A, pl)

    def matvec(u):
        u = np.asarray(u).reshape(N, 2)
        s_lo = np.cumsum(np.einsum("kb,kb->k", left_rows, u))
        r = np.einsum("kb,kb->k", right_rows, u)
        s_hi = np.concatenate([np.cumsum(r[::-1])[::-1][1:], [0.0]])
        return (out_lo * s_lo[:, None] + out_hi * s_hi[:, None]).ravel()

    return LinearOperator((2 * N, 2 * N), matvec=matvec, dtype=complex)


def eigenvalue_nearest(sp: SpectralPoint, fp: FactorizedPotential, bc: BoundaryCondition,
                       quad: QuadratureRule, target: complex = -1.0, *, corrected: bool = True,
                       k: int = 16) -> complex:
    """Eigenvalue of the discretized ``Q(z)`` closest to ``target``.

    Dense eigen-solve for small rules; ARPACK on the matrix-free plain operator
    for large ones.
    """
    if quad.size <= 600:
        ev = np.linalg.eigvals(assemble_Q(sp, fp, bc, quad, corrected=corrected))
    else:
        if corrected:
            raise PreconditionError("the matrix-free path implements the plain rule only")
        op = assemble_Q_operator(sp, fp, bc, quad)
        ev = eigs(op, k=min(k, 2 * quad.size - 2), which="LM", return_eigenvectors=False,
                  tol=1e-12, maxiter=20000)
    return complex(ev[np.argmin(np.abs(ev - target))])


def discrete_norm(sp: SpectralPoint, fp: FactorizedPotential, bc: BoundaryCondition,
                  quad: QuadratureRule, corrected: bool = False) -> float:
    """L^2 operator norm of the discretized ``Q`` (weight-symmetrized)."""
    Q = assemble_Q(sp, fp, bc, quad, corrected=corrected)
    sw = np.repeat(np.sqrt(quad.weights), 2)
    return float(np.linalg.norm(sw[:, None] * Q / sw[None, :], 2))


def det_I_plus_Q(z: complex, fp: FactorizedPotential, bc: BoundaryCondition, params: PhysicalParams,
                 quad: QuadratureRule) -> tuple[complex, float]:
    """``det(I + Q(z))`` as ``(phase, log|det|)``."""
    sp = compute_spectral_point(z, params)
    Q = assemble_Q(sp, fp, bc, quad)
    sign, logabs = np.linalg.slogdet(np.eye(Q.shape[0]) + Q)
    return complex(sign), float(logabs)


def _check_rectangle(rect, params: PhysicalParams):
    re_lo, re_hi, im_lo, im_hi = rect
    if not (re_lo < re_hi and im_lo < im_hi):
        raise PreconditionError(f"degenerate rectangle {rect}")
    mc2 = params.rest_energy
    if im_lo <= 0.0 <= im_hi:
        if mc2 == 0.0 or re_lo <= -mc2 or re_hi >= mc2:
            raise RegionTouchesSpectrum(f"rectangle {rect} meets the free spectrum")


def bs_locate(rect, pot: Potential, bc: BoundaryCondition, params: PhysicalParams,
              quad: QuadratureRule | None = None, *, grid: int = 24, threshold: float = math.inf,
              det_tol: float = 1e-8, max_newton: int = 40) -> list[complex]:
    """Zeros of ``det(I + Q(z))`` in the rectangle ``(re_lo, re_hi, im_lo, im_hi)``.

    Coarse grid of ``log|det|``, then damped Newton from each local minimum
    (by the minimum-modulus principle these sit next to zeros or on the
    boundary). Seeds that fail to converge are logged and dropped.
    """
    _check_rectangle(rect, params)
    re_lo, re_hi, im_lo, im_hi = rect
    fp = factorize(pot)
    if quad is None:
        quad = quadrature_for(pot)
    xs = np.linspace(re_lo, re_hi, grid)
    ys = np.linspace(im_lo, im_hi, grid)
    margin = 1e-12 * max(1.0, params.rest_energy)

    def logdet(z):
        if distance_to_spectrum(z, params) <= margin:
            return complex(0.0), math.inf
        return det_I_plus_Q(z, fp, bc, params, quad)

    L = np.empty((grid, grid))
    for i, yv in enumerate(ys):
        for j, xv in enumerate(xs):
            L[i, j] = logdet(complex(xv, yv))[1]

    padded = np.pad(L, 1, constant_values=np.inf)
    seeds = []
    for i in range(grid):
        for j in range(grid):
            window = padded[i:i + 3, j:j + 3]
            if L[i, j] <= window.min() and L[i, j] < threshold and np.isfinite(L[i, j]):
                seeds.append(complex(xs[j], ys[i]))

    cell = max((re_hi - re_lo), (im_hi - im_lo)) / (grid - 1)
    roots: list[complex] = []
    for z0 in seeds:
        try:
            z = _newton_det(z0, logdet, cell, max_newton, det_tol, params)
        except NonConvergence as exc:
            log.info("BS Newton seed %s dropped: %s", z0, exc)
            continue
        tol = 1e-9 * max(1.0, params.rest_energy)
        if not (re_lo - tol <= z.real <= re_hi + tol and im_lo - tol <= z.imag <= im_hi + tol):
            continue
        if all(abs(z - r) > 1e-7 * (1 + abs(z)) for r in roots):
            roots.append(z)
    return sorted(roots, key=lambda r: (r.real, r.imag))


def _uniformizer(z0: complex, params: PhysicalParams):
    """Local coordinate ``u`` in which ``det(I + Q)`` is analytic through the
    thresholds: ``u = zeta`` near ``-mc^2``, ``u = 1/zeta`` near ``+mc^2``.

    Returns ``(u0, z_of_u, on_sheet)``.
    """
    if not params.massive:
        return z0, (lambda u: u), (lambda u: True)
    mc2 = params.rest_energy
    flip = z0.real >= 0.0
    _, zeta = branch_data(z0, params)
    u0 = complex(1.0 / zeta if flip else zeta)

    def z_of(u):
        w = u * u
        return mc2 * (1.0 + w) / (1.0 - w) if flip else mc2 * (w + 1.0) / (w - 1.0)

    def on_sheet(u):
        z = z_of(u)
        if not np.isfinite(z) or distance_to_spectrum(z, params) <= 1e-12 * max(1.0, mc2):
            return False
        _, zeta = branch_data(z, params)
        back = complex(1.0 / zeta if flip else zeta)
        return abs(back - u) <= 1e-8 * (1.0 + abs(u))

    return u0, z_of, on_sheet


def _newton_det(z, logdet, cell, max_iter, det_tol, params: PhysicalParams):
    # Newton on det itself, rescaled by the starting modulus (differencing
    # log det is useless once the step straddles the zero), in a coordinate
    # that removes the square-root behaviour at the thresholds
    u, z_of, on_sheet = _uniformizer(complex(z), params)
    ref = logdet(z)[1]

    def f(w):
        sg, lv = logdet(z_of(w))
        if not math.isfinite(lv):
            raise NonConvergence("stepped onto the spectrum")
        return sg * math.exp(lv - ref)

    for _ in range(max_iter):
        fu = f(u)
        h = 1e-6 * (1.0 + abs(u))
        if not (on_sheet(u + h) and on_sheet(u - h)):
            h = 1e-6 * (1.0 + abs(u)) * 1j
            if not (on_sheet(u + h) and on_sheet(u - h)):
                raise NonConvergence(f"cannot difference at {z_of(u)}")
        d = (f(u + h) - f(u - h)) / (2 * h)
        if d == 0:
            raise NonConvergence(f"flat determinant at {z_of(u)}")
        step = fu / d
        z_now = z_of(u)
        for _ in range(60):
            cand = u - step
            if on_sheet(cand) and abs(z_of(cand) - z_now) <= cell:
                break
            step *= 0.5
        else:
            raise NonConvergence(f"no admissible step from {z_now}")
        u = cand
        if abs(step) < 1e-14 * (1.0 + abs(u)):
            break
    z = z_of(u)
    if not logdet(z)[1] < math.log(det_tol):
        raise NonConvergence(f"|det| = {math.exp(logdet(z)[1]):.3g} at {z}")
    return complex(z)


def q_norm_certificate(sp: SpectralPoint, pot: Potential, bc: BoundaryCondition,
                       params: PhysicalParams | None = None) -> float:
    """Upper bound on ``||Q(z)||``; a value below 1 rules ``z`` out."""
    params = params or sp.params
    md = pot.moments
    v = md.l1_norm / params.c
    cert = supnorm_numeric(sp, bc).value * v
    if params.massive:
        try:
            near = +1 if alpha_sign(bc.alpha) == "minus" else -1
        except PreconditionError:
            near = None
        if near is not None:
            mb = moment_q_bound(sp, md, near)
            cert = min(cert, math.sqrt(mb))
    return cert
