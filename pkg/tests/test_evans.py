import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from halfdirac.corpus import by_name
from halfdirac.errors import RegionTouchesSpectrum
from halfdirac.evans import ScanRegion, evans_value, evans_values, find_zeros, free_evans, winding_count
from halfdirac.potential import Potential, scalar_term
from halfdirac.resolvent import BoundaryCondition, psi_inf, psi_l_scaled
from halfdirac.spectral import PhysicalParams, SpectralPoint, branch_data, compute_spectral_point

P = PhysicalParams()
STEP = Potential([scalar_term("step", 0.0, 1.0, -0.3)])
STEP_ZERO = 0.897626496037951


def _matching(z: float, h: float, alpha: float) -> float:
    """Wronskian of the inner (shifted-energy) regular solution and the outer decaying one at x = 1."""
    zin = z - h
    kin, zetain = branch_data(complex(zin), P)
    inner = psi_l_scaled(1.0, SpectralPoint(zin, complex(kin), complex(zetain), P), BoundaryCondition.from_alpha(alpha))
    out = psi_inf(1.0, compute_spectral_point(z, P))
    w = inner[0] * out[1] - inner[1] * out[0]
    return float(w.real if abs(w.real) > abs(w.imag) else w.imag)


def test_step_zero_against_matching_condition():
    z_exact = brentq(lambda z: _matching(z, -0.3, math.pi / 2), 0.8, 0.95, xtol=1e-15)
    assert z_exact == pytest.approx(STEP_ZERO, abs=1e-12)
    zs = find_zeros(ScanRegion(-0.99, 0.99, -1e-3, 1e-3), STEP, BoundaryCondition.from_alpha(math.pi / 2), P)
    assert len(zs) == 1 and zs[0].multiplicity == 1
    assert zs[0].z == pytest.approx(STEP_ZERO, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, math.pi / 2), st.floats(-3, 3), st.floats(0.05, 2), st.sampled_from([-1, 1]))
def test_zero_potential_gives_free_evans(alpha, x, y, s):
    z = complex(x, y * s)
    zero = Potential([scalar_term("step", 0.0, 1.0, 0.0)])
    bc = BoundaryCondition.from_alpha(alpha)
    _, zeta = branch_data(z, P)
    expected = (bc.cos_alpha - 1j * bc.sin_alpha / zeta) / 2
    assert evans_value(z, zero, bc, P) == pytest.approx(expected, abs=1e-10)
    assert free_evans(np.array([z]), bc, P)[0] == pytest.approx(expected, abs=1e-13)


def test_winding_is_additive():
    pot = by_name("bump-complex").at_coupling(0.5, P)
    bc = BoundaryCondition.from_alpha(math.pi / 2)
    whole = winding_count(ScanRegion(-3, 3, 1e-3, 3), pot, bc, P)
    parts = sum(winding_count(q, pot, bc, P) for q in ScanRegion(-3, 3, 1e-3, 3).quadrants())
    assert whole == parts == 1


def test_zero_lies_where_evans_vanishes():
    pot = Potential([scalar_term("step", 0.5, 1.5, 0.6 - 1.0j)]).with_l1(0.5)
    bc = BoundaryCondition.from_alpha(0.0)
    zs = find_zeros(ScanRegion(-3, 3, -3, -1e-3), pot, bc, P)
    assert [round(z.z.real, 6) + 1j * round(z.z.imag, 6) for z in zs] == [-0.971704 - 0.179559j]
    far = evans_values(np.array([zs[0].z + 0.05]), pot, bc, P)[0]
    assert abs(evans_value(zs[0].z, pot, bc, P)) < 1e-9 * abs(far)


def test_region_touching_spectrum_rejected():
    with pytest.raises(RegionTouchesSpectrum):
        find_zeros(ScanRegion(0.5, 1.5, -0.1, 0.1), STEP, BoundaryCondition.from_alpha(0), P)
