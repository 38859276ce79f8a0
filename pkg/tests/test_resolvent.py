import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfdirac.errors import PreconditionError
from halfdirac.resolvent import (
    BoundaryCondition,
    kernel_block,
    psi_inf,
    psi_l_scaled,
    resolvent_kernel,
    supnorm_closed,
    supnorm_grid_check,
    supnorm_numeric,
)
from halfdirac.spectral import PhysicalParams, compute_spectral_point

P = PhysicalParams(0.8, 1.3)
GL_T, GL_W = np.polynomial.legendre.leggauss(40)


def _gauss(lo, hi):
    h = 0.5 * (hi - lo)
    return lo + h * (GL_T + 1), h * GL_W


def _f(y):
    s = (y - 1.0) / 0.5
    out = np.where(np.abs(s) < 1, np.cos(0.5 * math.pi * s) ** 2, 0.0)
    return np.array([out * (1 + 0.5j), out * np.sin(3 * y)])


def _apply(x, sp, bc):
    """``u(x) = int R0(x, y) f(y) dy`` with the kink at y = x resolved."""
    total = np.zeros(2, dtype=complex)
    cuts = sorted({0.5, 1.5, min(max(x, 0.5), 1.5)})
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        y, w = _gauss(lo, hi)
        K = kernel_block([x], y, sp, bc)[0]
        total += np.einsum("jab,bj,j->a", K, _f(y), w)
    return total


@pytest.mark.parametrize("alpha", [0.0, math.pi / 5, math.pi / 2])
@pytest.mark.parametrize("z", [0.3 + 0.4j, -1.5 - 0.2j, 2.0 + 1.0j])
def test_kernel_inverts_free_operator(alpha, z):
    sp = compute_spectral_point(z, P)
    bc = BoundaryCondition.from_alpha(alpha)
    mc2, c = P.rest_energy, P.c
    h = 1e-4
    for x in (0.3, 0.8, 1.2, 2.0):
        u = _apply(x, sp, bc)
        du = (_apply(x + h, sp, bc) - _apply(x - h, sp, bc)) / (2 * h)
        lhs = np.array([(mc2 - z) * u[0] - c * du[1], c * du[0] - (mc2 + z) * u[1]])
        assert lhs == pytest.approx(_f(np.array([x]))[:, 0], abs=1e-6)
    assert abs(bc.residual(_apply(0.0, sp, bc))) < 1e-12


@given(st.floats(0, math.pi / 2), st.floats(-3, 3), st.floats(0.05, 2))
def test_regular_solution_satisfies_bc(alpha, x, y):
    sp = compute_spectral_point(complex(x, y), P)
    bc = BoundaryCondition.from_alpha(alpha)
    assert abs(bc.residual(psi_l_scaled(0.0, sp, bc))) < 1e-14
    # decaying solution decays
    assert np.linalg.norm(psi_inf(5.0, sp)) < np.linalg.norm(psi_inf(0.0, sp))


@settings(max_examples=40)
@given(st.floats(-3, 3), st.floats(0.02, 2), st.sampled_from([-1, 1]), st.sampled_from([0.0, math.pi / 2]))
def test_supnorm_closed_and_grid(x, y, s, alpha):
    sp = compute_spectral_point(complex(x, y * s), P)
    bc = BoundaryCondition.from_alpha(alpha)
    num = supnorm_numeric(sp, bc).value
    assert num == pytest.approx(supnorm_closed(sp, alpha), abs=1e-8)
    assert supnorm_grid_check(sp, bc, 40) <= num + 1e-8
    s2 = abs(sp.zeta) ** 2
    assert num <= math.sqrt(1 + max(s2, 1 / s2)) + 1e-8


def test_supnorm_frozen():
    sp = compute_spectral_point(0.5 + 0.5j, PhysicalParams())
    val = supnorm_numeric(sp, BoundaryCondition.from_alpha(0.0)).value
    assert val == pytest.approx(supnorm_closed(sp, 0.0), abs=1e-12)
    assert val == pytest.approx(1.2030019100150915, abs=1e-9)  # attained at x = y = 0


def test_boundary_condition_validation():
    with pytest.raises(PreconditionError):
        BoundaryCondition.from_alpha(2.0)
    with pytest.raises(PreconditionError):
        resolvent_kernel(-1.0, 0.0, compute_spectral_point(0.5j, P), BoundaryCondition.from_alpha(0))
    assert BoundaryCondition.from_alpha(math.pi / 2).alpha == pytest.approx(math.pi / 2)
