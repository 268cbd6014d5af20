import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg

from netvuln.errors import DimensionMismatch, GammaRangeError, NoConvergenceError, ParameterError
from netvuln.operator import (
    apply, assemble, assemble_companion, pc_bounds, pc_leading_order, pc_spectral, power_iteration,
    spectral_radius, two_bump, two_bump_factor,
)


def test_entries_and_blocks():
    g = assemble(0.1, 0.6, 1.0, 32)
    N = g.N
    M = g.kernel
    assert M.shape == (64, 64) and np.all(M >= 0)
    # L-child columns are upper triangular (t >= s), R-child columns lower triangular
    assert np.allclose(np.tril(M[:N, :N], -1), 0)
    assert np.allclose(np.triu(M[:N, N:], 1), 0)


def test_row_sums_against_integrals():
    eps, gam, beta, N = 0.05, 0.6, 1.0, 2000
    g = assemble(eps, gam, beta, N)
    rows = g.kernel.sum(axis=1)
    h = g.weights[0]
    # first cell sits at log(eps) + h/2, last cell at -h/2
    s0 = g.nodes[0]
    right = beta / gam * (math.exp(-gam * s0) - 1)
    left = beta / (1 - gam) * (1 - math.exp((1 - gam) * (math.log(eps) - s0)))
    assert rows[0] == pytest.approx(right + left, rel=5 * h)
    assert (beta / gam) * (eps**-gam - 1) == pytest.approx(rows[0], rel=0.01)
    assert (beta / (1 - gam)) * (1 - eps ** (1 - gam)) == pytest.approx(rows[N - 1], rel=0.01)


def test_mark_symmetry():
    g = assemble(0.1, 0.6, 0.8, 40)
    N = g.N
    M = g.kernel
    assert np.allclose(M[N:, N:], M[:N, N:])
    assert np.allclose(M[N:, :N], M[:N, :N] * (0.6 + 0.8) / 0.8)


def test_against_dense_eigensolver():
    g = assemble(0.01, 0.7, 0.9, 100)
    res = spectral_radius(g, extrapolate=False)
    ev = linalg.eigvals(g.kernel)
    assert res.rho == pytest.approx(np.max(np.abs(ev)), rel=1e-10)
    assert res.residual < 1e-9 * res.rho
    assert np.min(res.eigenvector) > 0


def test_companion_eigenvalue():
    res = spectral_radius(assemble_companion(math.exp(-2), 2000))
    assert res.rho == pytest.approx(2.0, abs=1e-3)


def test_companion_eigenfunction():
    eps = math.exp(-3)
    g = assemble_companion(eps, 400)
    f = np.exp(-g.nodes / 2)
    assert np.allclose(apply(g, f) / f, 3.0, rtol=1e-3)


def test_apply_zero_and_dimension():
    g = assemble(0.1, 0.5, 1.0, 16)
    assert np.all(apply(g, np.zeros(32)) == 0)
    with pytest.raises(DimensionMismatch):
        apply(g, np.zeros(16))


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_p_scaling(p):
    g = assemble(0.01, 0.75, 1.0, 128)
    a = spectral_radius(g).rho
    b = spectral_radius(g.scaled(p)).rho
    assert b == pytest.approx(p * a, rel=1e-12)


def test_refinement_second_order():
    vals = [spectral_radius(assemble(0.01, 0.6, 1.0, N), extrapolate=False).rho for N in (64, 128, 256, 512)]
    d = np.abs(np.diff(vals))
    assert np.all(d[1:] < d[:-1])
    assert d[1] / d[2] == pytest.approx(4.0, rel=0.1)


def test_extrapolated_error_small_at_cap():
    for eps, gam, beta in ((0.1, 0.5, 1.0), (0.01, 0.75, 1.0)):
        res = spectral_radius(assemble(eps, gam, beta, 4096))
        assert res.N_used == 4096 and res.extrapolated
        # estimated error of the extrapolated value from the two raw values
        assert abs(res.rho - res.rho_base) / res.rho < 1e-6


def test_gamma_half_sandwich():
    for beta in (0.5, 1.0):
        for eps in (0.1, 0.01):
            rho = spectral_radius(assemble(eps, 0.5, beta, 256)).rho
            L = math.log(1 / eps)
            assert beta * L <= rho <= (0.5 + beta) * L


def test_pc_bounds_gamma_half():
    lo, hi = pc_bounds(math.exp(-2), 0.5, 1.0)
    assert lo == pytest.approx(1 / 3) and hi == pytest.approx(0.5)
    pc = pc_spectral(math.exp(-2), 0.5, 0.5, N=256)
    assert 0.5 <= pc <= 1.0


def test_pc_bounds_rejects_small_gamma():
    with pytest.raises(GammaRangeError):
        pc_bounds(0.1, 0.4, 1.0)


def test_pc_bounds_ordering():
    for eps in np.linspace(0.001, 0.89, 60):
        lo, hi = pc_bounds(eps, 0.75, 1.0)
        assert lo <= hi


def test_pc_bounds_ratio_tends_to_one():
    lo, hi = pc_bounds(1e-12, 0.75, 1.0)
    assert hi / lo < 1.01
    assert lo / pc_leading_order(1e-12, 0.75, 1.0) == pytest.approx(1, abs=0.01)


@pytest.mark.parametrize("eps,gam", [(0.1, 0.5), (0.05, 0.6), (0.01, 0.75), (0.001, 0.6)])
def test_pc_spectral_inside_bounds(eps, gam):
    lo, hi = pc_bounds(eps, gam, 1.0)
    assert lo <= pc_spectral(eps, gam, 1.0, N=256) <= hi


def test_pc_spectral_clamped():
    assert pc_spectral(0.9, 0.2, 0.1, N=64) == 1.0


def test_small_gamma_accepted():
    res = spectral_radius(assemble(0.1, 0.2, 1.0, 64))
    assert res.rho > 0


def test_two_bump_lower_bound():
    eps, gam, beta = 1e-3, 0.75, 1.0
    g = assemble(eps, gam, beta, 2000)
    f = two_bump(g)
    c = two_bump_factor(eps, gam, beta)
    Af = apply(g, f)
    slack = 5.0 / g.N * np.max(Af)
    assert np.all(Af >= c * f - slack)


def test_input_validation():
    with pytest.raises(ParameterError):
        assemble(0.1, 0.5, 1.0, 4)
    with pytest.raises(ParameterError):
        assemble(1.2, 0.5, 1.0, 16)


def test_power_iteration_nonconvergence():
    M = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(NoConvergenceError):
        power_iteration(M @ np.diag([1.0, 2.0]), max_iter=50)


@settings(max_examples=15, deadline=None)
@given(eps=st.floats(1e-3, 0.3), gam=st.floats(0.0, 0.95), beta=st.floats(0.1, 3.0))
def test_positive_eigenvector_property(eps, gam, beta):
    res = spectral_radius(assemble(eps, gam, beta, 64), extrapolate=False)
    assert res.rho > 0
    assert np.min(res.eigenvector) > 0
