"""Momentum-representation grids, states and operators.

States live on a uniform momentum grid. Momentum acts by multiplication and
position by ``i*hbar`` times a periodic Fourier spectral derivative, so all
identities are checked on states localized well inside the grid.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, GridMismatchError, LocalizationError
from . import gaugefield as gf

__all__ = [
    "MomentumGrid",
    "StateVector",
    "LinearOperator",
    "ReciprocityMap",
    "NCReport",
    "make_grid",
    "position_operator",
    "momentum_operator",
    "covariant_position",
    "commutator_apply",
    "verify_noncommutativity",
    "gaussian_state",
    "reciprocity_map",
    "spectral_derivative_matrix",
]


def _per_axis(value, dims: int, name: str) -> tuple:
    if np.ndim(value) == 0:
        return (value,) * dims
    value = tuple(value)
    if len(value) != dims:
        raise ConfigurationError(f"{name} needs {dims} entries, got {len(value)}")
    return value


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform 1D or 2D momentum grid.

    Node ``k`` on an axis sits at ``-half_extent + k*spacing + offset``; the
    default offset of half a cell keeps ``p = 0`` off the grid.
    """

    dims: int
    points: tuple[int, ...]
    half_extent: tuple[float, ...]
    offset: tuple[float, ...]

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * L / n for n, L in zip(self.points, self.half_extent))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_nodes(self, axis: int) -> np.ndarray:
        n, h = self.points[axis], self.spacing[axis]
        if np.isclose(self.offset[axis], h / 2):
            # exact mirror symmetry about zero
            return (np.arange(n) - (n - 1) / 2) * h
        return -self.half_extent[axis] + np.arange(n) * h + self.offset[axis]

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Node coordinates broadcast to the grid shape (``ij`` indexing)."""
        return tuple(np.meshgrid(*(self.axis_nodes(a) for a in range(self.dims)), indexing="ij"))

    def nodes(self) -> np.ndarray:
        """Node coordinates as an array of shape ``(size, dims)``, C order."""
        return np.stack([c.ravel() for c in self.mesh()], axis=-1)

    def four_momenta(self, components: Sequence[int]) -> np.ndarray:
        """Embed grid nodes into 4-momenta ``(p0, p1, p2, p3)``.

        ``components[a]`` is the 4-index carried by grid axis ``a``; the
        remaining components are zero.
        """
        if len(components) != self.dims:
            raise ConfigurationError("one 4-index per grid axis is required")
        out = np.zeros(self.shape + (4,))
        for a, c in enumerate(components):
            out[..., c] = self.mesh()[a]
        return out

    def is_symmetric(self) -> bool:
        return all(np.isclose(o, h / 2) for o, h in zip(self.offset, self.spacing))

    def to_dict(self) -> dict:
        return {
            "dims": self.dims,
            "points": list(self.points),
            "half_extent": [float(v) for v in self.half_extent],
            "offset": [float(v) for v in self.offset],
            "spacing": [float(v) for v in self.spacing],
        }


def make_grid(dims: int, points_per_axis, half_extent, offset=None) -> MomentumGrid:
    """Build a :class:`MomentumGrid`, validating sizes and extents.

    The default half-cell offset gives nodes symmetric about zero. With an
    even point count no node sits at ``p = 0``; an odd count always puts
    the middle node there.
    """
    if dims not in (1, 2):
        raise ConfigurationError(f"dims must be 1 or 2, got {dims}")
    points = tuple(int(n) for n in _per_axis(points_per_axis, dims, "points_per_axis"))
    extent = tuple(float(L) for L in _per_axis(half_extent, dims, "half_extent"))
    if any(n < 8 for n in points):
        raise ConfigurationError(f"need at least 8 points per axis, got {points}")
    if any(not np.isfinite(L) or L <= 0 for L in extent):
        raise ConfigurationError(f"half_extent must be positive, got {extent}")
    spacing = tuple(2.0 * L / n for n, L in zip(points, extent))
    if offset is None:
        off = tuple(h / 2 for h in spacing)
    else:
        off = tuple(float(o) for o in _per_axis(offset, dims, "offset"))
    return MomentumGrid(dims, points, extent, off)


@dataclass(frozen=True, eq=False)
class StateVector:
    grid: MomentumGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.size != self.grid.size:
            raise ConfigurationError(
                f"state has {amp.size} amplitudes, grid has {self.grid.size} nodes"
            )
        object.__setattr__(self, "amplitudes", amp.reshape(self.grid.shape))

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>`` with the grid cell volume as measure."""
        _check_same_grid(self.grid, other.grid)
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.cell_volume)

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self).real))

    def normalized(self) -> "StateVector":
        return StateVector(self.grid, self.amplitudes / self.norm())

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_same_grid(self.grid, other.grid)
        return StateVector(self.grid, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_same_grid(self.grid, other.grid)
        return StateVector(self.grid, self.amplitudes - other.amplitudes)

    def __rmul__(self, scalar) -> "StateVector":
        return StateVector(self.grid, scalar * self.amplitudes)

    def to_records(self) -> list[list[float]]:
        """Rows of ``(*node coordinates, re, im)`` for serialization."""
        nodes = self.grid.nodes()
        amp = self.amplitudes.ravel()
        return [[*map(float, p), float(a.real), float(a.imag)] for p, a in zip(nodes, amp)]


def _check_same_grid(a: MomentumGrid, b: MomentumGrid) -> None:
    if a != b:
        raise GridMismatchError("objects live on different grids")


@dataclass(frozen=True, eq=False)
class LinearOperator:
    grid: MomentumGrid
    rule: Callable[[np.ndarray], np.ndarray]
    hermitian: bool = False
    name: str = ""

    def __call__(self, state: StateVector) -> StateVector:
        _check_same_grid(self.grid, state.grid)
        return StateVector(self.grid, self.rule(state.amplitudes))


def _wavenumbers(grid: MomentumGrid, axis: int) -> np.ndarray:
    n = grid.points[axis]
    k = 2 * np.pi * np.fft.fftfreq(n, d=grid.spacing[axis])
    if n % 2 == 0:
        # The Nyquist mode has no antisymmetric derivative; dropping it keeps
        # the derivative real and skew-symmetric.
        k[n // 2] = 0.0
    return k


def _spectral_derivative(values: np.ndarray, grid: MomentumGrid, axis: int) -> np.ndarray:
    k = _wavenumbers(grid, axis)
    shape = [1] * grid.dims
    shape[axis] = -1
    coeffs = np.fft.fft(values, axis=axis) * (1j * k.reshape(shape))
    return np.fft.ifft(coeffs, axis=axis)


def spectral_derivative_matrix(grid: MomentumGrid, axis: int = 0) -> np.ndarray:
    """Dense 1D spectral derivative matrix for one grid axis (real, skew)."""
    n = grid.points[axis]
    k = _wavenumbers(grid, axis)
    eye = np.eye(n)
    d = np.fft.ifft(np.fft.fft(eye, axis=0) * (1j * k)[:, None], axis=0).real
    return 0.5 * (d - d.T)


def _check_axis(grid: MomentumGrid, axis: int) -> None:
    if not 0 <= axis < grid.dims:
        raise ConfigurationError(f"axis {axis} out of range for a {grid.dims}D grid")


def position_operator(grid: MomentumGrid, axis: int, hbar: float = 1.0) -> LinearOperator:
    """``x = i*hbar*d/dp`` along ``axis`` via spectral differentiation."""
    _check_axis(grid, axis)

    def rule(psi):
        return 1j * hbar * _spectral_derivative(psi, grid, axis)

    return LinearOperator(grid, rule, hermitian=True, name=f"x{axis}")


def momentum_operator(grid: MomentumGrid, axis: int) -> LinearOperator:
    _check_axis(grid, axis)
    p = grid.mesh()[axis]
    return LinearOperator(grid, lambda psi: p * psi, hermitian=True, name=f"p{axis}")


def covariant_position(
    grid: MomentumGrid,
    axis: int,
    config: "gf.MomentumGaugeConfig",
    g: float,
    hbar: float = 1.0,
    components: Sequence[int] = (1, 2),
) -> LinearOperator:
    """``X = x - g*C(p)`` along ``axis``.

    ``components`` maps grid axes to spatial 4-indices; by default a 2D grid
    spans ``(p1, p2)`` and a 1D grid ``p1``.
    """
    _check_axis(grid, axis)
    components = tuple(components)[: grid.dims]
    C = gf.eval_C(config, grid.four_momenta(components))[..., components[axis]]
    x = position_operator(grid, axis, hbar)

    def rule(psi):
        return x.rule(psi) - g * C * psi

    return LinearOperator(grid, rule, hermitian=bool(np.isrealobj(C)), name=f"X{axis}")


def commutator_apply(opA: LinearOperator, opB: LinearOperator, state: StateVector) -> StateVector:
    """Return ``(AB - BA) state``."""
    _check_same_grid(opA.grid, opB.grid)
    _check_same_grid(opA.grid, state.grid)
    psi = state.amplitudes
    return StateVector(state.grid, opA.rule(opB.rule(psi)) - opB.rule(opA.rule(psi)))


@dataclass
class NCReport:
    """Residuals of ``[X_i, X_j] = i*hbar*g*G_ij`` over a set of states.

    ``theta`` holds the state-averaged expectation of ``[X_i, X_j]/i``; it is
    the non-commutativity parameter when ``G`` is constant.
    """

    residual: dict[tuple[int, int], float]
    theta: dict[tuple[int, int], float]
    theta_per_state: dict[tuple[int, int], list[float]] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residual.values(), default=0.0)


def verify_noncommutativity(
    grid: MomentumGrid,
    config: "gf.MomentumGaugeConfig",
    g: float,
    test_states: Sequence[StateVector],
    hbar: float = 1.0,
    components: Sequence[int] = (1, 2),
) -> NCReport:
    if not test_states:
        raise ConfigurationError("at least one test state is required")
    components = tuple(components)[: grid.dims]
    X = [covariant_position(grid, a, config, g, hbar, components) for a in range(grid.dims)]
    G = gf.field_strength(config, grid.four_momenta(components)).G
    residual, theta, per_state = {}, {}, {}
    for i in range(grid.dims):
        for j in range(grid.dims):
            if i == j:
                continue
            Gij = G[..., components[i], components[j]]
            worst, values = 0.0, []
            for psi in test_states:
                lhs = commutator_apply(X[i], X[j], psi)
                rhs = StateVector(grid, 1j * hbar * g * Gij * psi.amplitudes)
                worst = max(worst, (lhs - rhs).norm() / psi.norm())
                values.append((psi.inner(lhs) / (1j * psi.inner(psi))).real)
            residual[(i, j)] = worst
            theta[(i, j)] = float(np.mean(values))
            per_state[(i, j)] = values
    return NCReport(residual, theta, per_state)


def gaussian_state(grid: MomentumGrid, center, width: float, strict: bool = True) -> StateVector:
    """Normalized Gaussian ``exp(-|p - center|^2 / (2 width^2))``.

    The center must sit at least three widths inside every boundary; with
    ``strict=False`` a violation only warns.
    """
    center = np.asarray(_per_axis(center, grid.dims, "center"), dtype=float)
    if width <= 0:
        raise ConfigurationError("width must be positive")
    for a in range(grid.dims):
        lo = grid.axis_nodes(a)[0] - grid.offset[a]
        hi = lo + 2 * grid.half_extent[a]
        if min(center[a] - lo, hi - center[a]) < 3 * width:
            msg = f"center {center[a]} within 3 widths of the boundary on axis {a}"
            if strict:
                raise LocalizationError(msg)
            warnings.warn(msg, stacklevel=2)
    r2 = sum((c - c0) ** 2 for c, c0 in zip(grid.mesh(), center))
    return StateVector(grid, np.exp(-r2 / (2 * width**2))).normalized()


@dataclass(frozen=True, eq=False)
class ReciprocityMap:
    """Discrete quarter rotation of phase space on a symmetric grid.

    Realized as the centered unitary DFT on each axis. With
    ``spacing**2 == 2*pi*hbar/points`` it intertwines ``x -> p`` and
    ``p -> -x``; on any symmetric grid it is unitary with ``R**2`` equal to
    parity and ``R**4`` equal to the identity.
    """

    grid: MomentumGrid
    matrix: np.ndarray

    def __call__(self, state: StateVector) -> StateVector:
        _check_same_grid(self.grid, state.grid)
        out = state.amplitudes
        for axis in range(self.grid.dims):
            out = np.moveaxis(np.tensordot(self.matrix, out, axes=([1], [axis])), 0, axis)
        return StateVector(self.grid, out)

    def inverse(self, state: StateVector) -> StateVector:
        _check_same_grid(self.grid, state.grid)
        out = state.amplitudes
        adj = self.matrix.conj().T
        for axis in range(self.grid.dims):
            out = np.moveaxis(np.tensordot(adj, out, axes=([1], [axis])), 0, axis)
        return StateVector(self.grid, out)

    def conjugate(self, op: LinearOperator) -> LinearOperator:
        """``R op R^-1`` as a new operator."""
        def rule(psi):
            s = StateVector(self.grid, psi)
            return self(op(self.inverse(s))).amplitudes

        return LinearOperator(self.grid, rule, op.hermitian, f"R{op.name}R^-1")


def reciprocity_map(grid: MomentumGrid) -> ReciprocityMap:
    if len(set(grid.points)) != 1 or len(set(grid.half_extent)) != 1:
        raise ConfigurationError("reciprocity map needs a square grid")
    if not grid.is_symmetric():
        raise ConfigurationError("reciprocity map needs the default half-cell offset")
    n = grid.points[0]
    j = np.arange(n) - (n - 1) / 2
    R = np.exp(2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)
    return ReciprocityMap(grid, R)
