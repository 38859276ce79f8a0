import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfdirac.birman_schwinger import (
    assemble_Q,
    assemble_Q_operator,
    bs_locate,
    det_I_plus_Q,
    discrete_norm,
    eigenvalue_nearest,
    q_norm_certificate,
    quadrature_for,
)
from halfdirac.corpus import by_name
from halfdirac.errors import RegionTouchesSpectrum
from halfdirac.potential import Potential, factorize, scalar_term
from halfdirac.resolvent import BoundaryCondition, supnorm_numeric
from halfdirac.spectral import PhysicalParams, compute_spectral_point

P = PhysicalParams()
STEP = Potential([scalar_term("step", 0.0, 1.0, -0.3)])
# exact bound state of the step V = -0.3 on [0, 1], alpha = pi/2, m = c = 1
STEP_ZERO = 0.897626496037951


def test_step_root_frozen():
    bc = BoundaryCondition.from_alpha(math.pi / 2)
    roots = bs_locate((-0.99, 0.99, -1e-3, 1e-3), STEP, bc, P, quadrature_for(STEP, 64), grid=10)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(STEP_ZERO, abs=1e-9)
    sp = compute_spectral_point(STEP_ZERO + 1e-12j, P)
    mu = eigenvalue_nearest(sp, factorize(STEP), bc, quadrature_for(STEP, 64))
    assert abs(mu + 1) < 1e-9


def test_root_near_threshold_is_found():
    # |Im z| ~ 1e-3 and 0.02 from the branch point -mc^2
    pot = by_name("step-matrix").at_coupling(0.5, P)
    roots = bs_locate((-2.6, 2.6, -1.0, -1e-3), pot, BoundaryCondition.from_alpha(0.0), P,
                      quadrature_for(pot, 64), grid=10)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(-0.978604 - 0.001341j, abs=2e-6)


def test_matrix_free_matches_dense_plain_rule():
    pot = by_name("gauss-matrix").at_coupling(0.5, P)
    quad = quadrature_for(pot, 48)
    sp = compute_spectral_point(0.4 + 0.3j, P)
    bc = BoundaryCondition.from_alpha(math.pi / 3)
    fp = factorize(pot)
    Q = assemble_Q(sp, fp, bc, quad, corrected=False)
    op = assemble_Q_operator(sp, fp, bc, quad)
    u = np.random.default_rng(0).normal(size=Q.shape[0]) + 0j
    assert op.matvec(u) == pytest.approx(Q @ u, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2.5, 2.5), st.floats(0.05, 2), st.sampled_from([-1, 1]), st.floats(0, math.pi / 2),
       st.sampled_from(["step-matrix", "bump-complex", "gauss-repulsive"]))
def test_norm_below_generic_bound(x, y, s, alpha, name):
    pot = by_name(name).at_coupling(0.5, P)
    sp = compute_spectral_point(complex(x, y * s), P)
    bc = BoundaryCondition.from_alpha(alpha)
    q = discrete_norm(sp, factorize(pot), bc, quadrature_for(pot, 64), corrected=True)
    sup = supnorm_numeric(sp, bc).value
    assert q <= 0.5 * sup * (1 + 1e-6)
    assert q_norm_certificate(sp, pot, bc, P) >= q * (1 - 1e-6)


def test_corrected_rule_converges_faster():
    pot = by_name("step-matrix").at_coupling(0.5, P)
    bc = BoundaryCondition.from_alpha(math.pi / 2)
    sp = compute_spectral_point(0.807772 - 0.00684j, P)
    fp = factorize(pot)
    ref = eigenvalue_nearest(sp, fp, bc, quadrature_for(pot, 256))
    plain = eigenvalue_nearest(sp, fp, bc, quadrature_for(pot, 64), corrected=False)
    corr = eigenvalue_nearest(sp, fp, bc, quadrature_for(pot, 64))
    assert abs(corr - ref) < 1e-3 * abs(plain - ref)


def test_det_phase_and_modulus():
    bc = BoundaryCondition.from_alpha(math.pi / 2)
    phase, logabs = det_I_plus_Q(0.5 + 0.5j, factorize(STEP), bc, P, quadrature_for(STEP, 32))
    assert abs(abs(phase) - 1) < 1e-12 and math.isfinite(logabs)


def test_rectangle_on_spectrum_rejected():
    with pytest.raises(RegionTouchesSpectrum):
        bs_locate((0.5, 1.5, -0.1, 0.1), STEP, BoundaryCondition.from_alpha(0), P)
