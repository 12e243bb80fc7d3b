import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momgauge import gaugefield as gf
from momgauge import phasegrid as pg
from momgauge.errors import (
    ConfigurationError,
    GridMismatchError,
    LocalizationError,
    SingularEvaluationError,
)


def _random_state(grid, rng):
    amp = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return pg.StateVector(grid, amp).normalized()


# ---------------------------------------------------------------- grids


def test_default_offset_keeps_origin_off_even_grids():
    for n in (8, 64, 66):
        grid = pg.make_grid(1, n, 8.0)
        assert np.min(np.abs(grid.axis_nodes(0))) == pytest.approx(grid.spacing[0] / 2)


def test_odd_grids_contain_the_origin():
    grid = pg.make_grid(2, 65, 8.0)
    assert np.min(np.abs(grid.axis_nodes(0))) == 0.0
    with pytest.raises(SingularEvaluationError):
        pg.covariant_position(grid, 0, gf.CoulombMomentum(1.0), 1.0)


def test_nodes_are_symmetric_about_zero():
    grid = pg.make_grid(2, 32, 4.0)
    assert grid.is_symmetric()
    x = grid.axis_nodes(0)
    np.testing.assert_array_equal(x, -x[::-1])


def test_grid_metadata():
    grid = pg.make_grid(2, (16, 32), (2.0, 4.0))
    assert grid.shape == (16, 32)
    assert grid.size == 512
    assert grid.spacing == (0.25, 0.25)
    assert grid.cell_volume == pytest.approx(0.0625)
    assert grid.nodes().shape == (512, 2)
    d = grid.to_dict()
    assert d["points"] == [16, 32]


@pytest.mark.parametrize(
    "args",
    [(3, 64, 8.0), (1, 4, 8.0), (1, 64, 0.0), (1, 64, -1.0)],
)
def test_make_grid_rejects_bad_arguments(args):
    with pytest.raises(ConfigurationError):
        pg.make_grid(*args)


def test_four_momenta_embedding():
    grid = pg.make_grid(1, 16, 2.0)
    p = grid.four_momenta((3,))
    assert p.shape == (16, 4)
    np.testing.assert_array_equal(p[:, 3], grid.axis_nodes(0))
    assert not np.any(p[:, :3])


# ---------------------------------------------------------------- states


def test_state_size_must_match_grid():
    grid = pg.make_grid(1, 16, 2.0)
    with pytest.raises(ConfigurationError):
        pg.StateVector(grid, np.ones(15))


def test_operations_on_different_grids_raise():
    a = pg.make_grid(1, 16, 2.0)
    b = pg.make_grid(1, 16, 3.0)
    sa, sb = pg.StateVector(a, np.ones(16)), pg.StateVector(b, np.ones(16))
    with pytest.raises(GridMismatchError):
        sa.inner(sb)
    with pytest.raises(GridMismatchError):
        pg.position_operator(a, 0)(sb)
    with pytest.raises(GridMismatchError):
        pg.commutator_apply(pg.position_operator(a, 0), pg.momentum_operator(a, 0), sb)


def test_gaussian_state_is_normalized_and_centered(grid64):
    psi = pg.gaussian_state(grid64, (1.0, -0.5), 0.7)
    assert psi.norm() ** 2 == pytest.approx(1.0, abs=1e-12)
    for axis, c in enumerate((1.0, -0.5)):
        p = pg.momentum_operator(grid64, axis)
        assert psi.inner(p(psi)).real == pytest.approx(c, abs=1e-8)
        x = pg.position_operator(grid64, axis)
        assert abs(psi.inner(x(psi))) <= 1e-8


def test_gaussian_momentum_moment_1d():
    grid = pg.make_grid(1, 128, 8.0)
    psi = pg.gaussian_state(grid, 2.0, 0.7)
    assert psi.inner(pg.momentum_operator(grid, 0)(psi)).real == pytest.approx(2.0, abs=1e-8)


def test_gaussian_state_localization():
    grid = pg.make_grid(1, 64, 4.0)
    with pytest.raises(LocalizationError):
        pg.gaussian_state(grid, 3.0, 0.7)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        psi = pg.gaussian_state(grid, 3.0, 0.7, strict=False)
    assert caught and psi.norm() == pytest.approx(1.0)


def test_state_records_layout():
    grid = pg.make_grid(2, 8, 1.0)
    rows = pg.StateVector(grid, np.full(64, 1 + 2j)).to_records()
    assert len(rows) == 64 and len(rows[0]) == 4
    assert rows[0][2:] == [1.0, 2.0]


# ---------------------------------------------------------------- operators


def test_position_operator_on_gaussian():
    # x = i d/dp, so x exp(-p^2/2) = -i p exp(-p^2/2)
    grid = pg.make_grid(1, 64, 8.0)
    p = grid.axis_nodes(0)
    psi = pg.StateVector(grid, np.exp(-(p**2) / 2))
    out = pg.position_operator(grid, 0)(psi).amplitudes
    expected = -1j * p * np.exp(-(p**2) / 2)
    assert np.linalg.norm(out - expected) / np.linalg.norm(expected) <= 1e-8


def test_position_operator_scales_with_hbar():
    grid = pg.make_grid(1, 64, 8.0)
    psi = pg.gaussian_state(grid, 0.0, 1.0)
    a = pg.position_operator(grid, 0, hbar=1.0)(psi).amplitudes
    b = pg.position_operator(grid, 0, hbar=2.5)(psi).amplitudes
    np.testing.assert_allclose(b, 2.5 * a, atol=1e-14)


def test_position_operator_annihilates_constants(grid64):
    psi = pg.StateVector(grid64, np.ones(grid64.shape))
    for axis in (0, 1):
        assert np.max(np.abs(pg.position_operator(grid64, axis)(psi).amplitudes)) <= 1e-12


def test_axis_out_of_range(grid64):
    with pytest.raises(ConfigurationError):
        pg.position_operator(grid64, 2)
    with pytest.raises(ConfigurationError):
        pg.momentum_operator(grid64, 2)


def test_momentum_operator_multiplies_by_node():
    grid = pg.make_grid(1, 16, 4.0, offset=0.0)
    nodes = grid.axis_nodes(0)
    k = int(np.argmin(np.abs(nodes - 1.5)))
    assert nodes[k] == pytest.approx(1.5)
    out = pg.momentum_operator(grid, 0)(pg.StateVector(grid, np.ones(16)))
    assert out.amplitudes[k] == pytest.approx(1.5)


def test_operators_are_linear_and_hermitian(grid64, rng):
    ops = [pg.position_operator(grid64, 0), pg.position_operator(grid64, 1),
           pg.momentum_operator(grid64, 0), pg.momentum_operator(grid64, 1)]
    for _ in range(10):
        u, v = _random_state(grid64, rng), _random_state(grid64, rng)
        a, b = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
        for op in ops:
            assert op.hermitian
            lhs = op(a * u + b * v)
            rhs = a * op(u) + b * op(v)
            assert (lhs - rhs).norm() <= 1e-10 * (1 + op(u).norm() + op(v).norm())
            assert abs(u.inner(op(u)).imag) <= 1e-10
            assert abs(u.inner(op(v)) - op(u).inner(v)) <= 1e-10 * (1 + op(u).norm() * op(v).norm())


def test_spectral_derivative_matrix_matches_fft_rule():
    grid = pg.make_grid(1, 32, 4.0)
    D = pg.spectral_derivative_matrix(grid, 0)
    np.testing.assert_allclose(D, -D.T, atol=1e-12)
    psi = pg.gaussian_state(grid, 0.3, 0.5)
    via_matrix = 1j * D @ psi.amplitudes
    via_op = pg.position_operator(grid, 0)(psi).amplitudes
    np.testing.assert_allclose(via_matrix, via_op, atol=1e-12)


# ---------------------------------------------------------------- commutators


def test_canonical_commutator(grid64, states64):
    for axis in (0, 1):
        x, p = pg.position_operator(grid64, axis), pg.momentum_operator(grid64, axis)
        for psi in states64:
            out = pg.commutator_apply(x, p, psi)
            assert (out - 1j * psi).norm() / psi.norm() <= 1e-8


@given(hbar=st.floats(0.5, 2.0), c=st.floats(-1.0, 1.0))
def test_canonical_commutator_property(hbar, c):
    grid = pg.make_grid(1, 64, 8.0)
    psi = pg.gaussian_state(grid, c, 1.0)
    x, p = pg.position_operator(grid, 0, hbar), pg.momentum_operator(grid, 0)
    out = pg.commutator_apply(x, p, psi)
    assert (out - (1j * hbar) * psi).norm() <= 1e-8


def test_trivial_commutators(grid64, states64):
    px, py = pg.momentum_operator(grid64, 0), pg.momentum_operator(grid64, 1)
    xx, xy = pg.position_operator(grid64, 0), pg.position_operator(grid64, 1)
    for psi in states64:
        assert pg.commutator_apply(px, py, psi).norm() <= 1e-15
        assert pg.commutator_apply(xx, xy, psi).norm() <= 1e-10


# ---------------------------------------------------------------- covariant positions


def test_covariant_position_reduces_to_x_at_zero_coupling(grid64, states64):
    cfg = gf.SymmetricGauge2D(1.3)
    for axis in (0, 1):
        X = pg.covariant_position(grid64, axis, cfg, 0.0)
        x = pg.position_operator(grid64, axis)
        for psi in states64:
            assert (X(psi) - x(psi)).norm() <= 1e-14


def test_electric_config_leaves_positions_alone(grid64, states64):
    cfg = gf.ConstantElectric((0.3, -0.2, 1.0))
    for axis in (0, 1):
        X = pg.covariant_position(grid64, axis, cfg, 0.8)
        x = pg.position_operator(grid64, axis)
        for psi in states64:
            assert (X(psi) - x(psi)).norm() == 0.0


def test_gauge_shift_is_a_multiplication(grid64, states64):
    cfg = gf.ConstantMagnetic((0.0, 0.0, 1.0))
    g = 0.7
    eta = gf.GaugeTransform.from_dict({(1, 1, 0): 1.0, (2, 0, 0): 0.4})
    shifted = gf.apply_gauge_transform(cfg, eta, g)
    grad = eta.gradient(grid64.four_momenta((1, 2)))
    for axis in (0, 1):
        diff = pg.covariant_position(grid64, axis, shifted, g)
        base = pg.covariant_position(grid64, axis, cfg, g)
        for psi in states64:
            expected = pg.StateVector(grid64, -grad[..., axis] * psi.amplitudes)
            assert (diff(psi) - base(psi) - expected).norm() <= 1e-12


def test_singular_config_on_grid_through_origin():
    grid = pg.make_grid(2, 16, 2.0, offset=0.0)
    with pytest.raises(SingularEvaluationError):
        pg.covariant_position(grid, 0, gf.CoulombMomentum(1.0), 1.0)


# ---------------------------------------------------------------- non-commutativity


def test_constant_magnetic_theta(grid64, states64):
    report = pg.verify_noncommutativity(grid64, gf.ConstantMagnetic((0.0, 0.0, 1.0)), 1.0, states64)
    assert report.max_residual <= 1e-6
    assert report.theta[(0, 1)] == pytest.approx(-1.0, abs=1e-6)
    assert report.theta[(1, 0)] == pytest.approx(1.0, abs=1e-6)


def test_zero_coupling_gives_zero_theta(grid64, states64):
    report = pg.verify_noncommutativity(grid64, gf.SymmetricGauge2D(2.0), 0.0, states64)
    assert report.max_residual <= 1e-12
    assert all(abs(t) <= 1e-12 for t in report.theta.values())


@pytest.mark.parametrize(
    "cfg",
    [
        gf.ConstantMagnetic((0.0, 0.0, 1.0)),
        gf.ConstantMagnetic((0.4, -0.3, 0.8)),
        gf.ConstantElectric((0.0, 0.0, 1.0)),
        gf.SymmetricGauge2D(0.5),
    ],
)
@pytest.mark.parametrize("g", [0.0, 0.5, -0.5, 1.0])
def test_identity_for_constant_field_configs(grid64, states64, cfg, g):
    report = pg.verify_noncommutativity(grid64, cfg, g, states64)
    assert report.max_residual <= 1e-6
    G12 = gf.field_strength(cfg, np.zeros(4)).G[1, 2]
    assert report.theta[(0, 1)] == pytest.approx(g * G12, abs=1e-6)


def test_identity_with_hbar(grid64, states64):
    report = pg.verify_noncommutativity(grid64, gf.SymmetricGauge2D(1.0), 1.0, states64, hbar=2.0)
    assert report.max_residual <= 1e-6
    assert report.theta[(0, 1)] == pytest.approx(-2.0, abs=1e-6)


def test_gauge_transform_leaves_report_unchanged(grid64, states64):
    cfg = gf.ConstantMagnetic((0.0, 0.0, 1.0))
    eta = gf.GaugeTransform.from_dict({(2, 0, 0): 0.5, (1, 1, 0): -0.3, (0, 2, 0): 0.2})
    base = pg.verify_noncommutativity(grid64, cfg, 1.0, states64)
    moved = pg.verify_noncommutativity(grid64, gf.apply_gauge_transform(cfg, eta, 1.0), 1.0, states64)
    for key in base.residual:
        assert moved.residual[key] == pytest.approx(base.residual[key], abs=1e-8)
        assert moved.theta[key] == pytest.approx(base.theta[key], abs=1e-8)


def test_verify_requires_states(grid64):
    with pytest.raises(ConfigurationError):
        pg.verify_noncommutativity(grid64, gf.SymmetricGauge2D(1.0), 1.0, [])


# ---------------------------------------------------------------- reciprocity


def test_reciprocity_map_is_a_quarter_turn():
    grid = pg.make_grid(2, 32, 4.0)
    R = pg.reciprocity_map(grid)
    psi = pg.gaussian_state(grid, (0.4, -0.7), 0.6)
    assert R(psi).norm() == pytest.approx(psi.norm(), abs=1e-12)
    parity = pg.StateVector(grid, psi.amplitudes[::-1, ::-1])
    assert (R(R(psi)) - parity).norm() <= 1e-10
    assert (R(R(R(R(psi)))) - psi).norm() <= 1e-10
    assert (R.inverse(R(psi)) - psi).norm() <= 1e-12


def test_reciprocity_exchanges_x_and_p():
    # spacing**2 == 2*pi/N makes the discrete Fourier rotation scale-free
    n = 64
    half = n * math.sqrt(2 * math.pi / n) / 2
    grid = pg.make_grid(1, n, half)
    R = pg.reciprocity_map(grid)
    x, p = pg.position_operator(grid, 0), pg.momentum_operator(grid, 0)
    psi = pg.gaussian_state(grid, 0.5, 1.0)
    assert (R.conjugate(x)(psi) - p(psi)).norm() <= 1e-8
    assert (R.conjugate(p)(psi) + x(psi)).norm() <= 1e-8


def test_reciprocity_requires_square_grid():
    with pytest.raises(ConfigurationError):
        pg.reciprocity_map(pg.make_grid(2, (16, 32), 4.0))
    with pytest.raises(ConfigurationError):
        pg.reciprocity_map(pg.make_grid(2, 16, (4.0, 2.0)))
    with pytest.raises(ConfigurationError):
        pg.reciprocity_map(pg.make_grid(1, 16, 4.0, offset=0.0))


@given(st.integers(8, 40), st.integers(0, 2**31 - 1))
def test_reciprocity_unitary_property(n, seed):
    grid = pg.make_grid(1, n, 3.0)
    R = pg.reciprocity_map(grid)
    psi = _random_state(grid, np.random.default_rng(seed))
    assert R(psi).norm() == pytest.approx(1.0, abs=1e-12)
    assert (R(R(R(R(psi)))) - psi).norm() <= 1e-10
