"""Static momentum-space field equations along one momentum axis.

For a static source the field equation reduces to
``-d^2 C / dp_z^2 = 4 pi rho(p_z)`` (box operator ``d_0^2 - lap`` with a
``+4 pi`` source). A single sheet of strength ``q`` at ``p_k`` then gives
``C = -2 pi q |p - p_k|`` and field ``-dC/dp = 2 pi q sign(p - p_k)``; equal
sheets at ``+-p_a`` reproduce the plateaus ``+-4 pi q`` outside and zero
between.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigurationError, GridMismatchError
from .gaugefield import CoulombMomentum, momentum_electric

__all__ = [
    "SOURCE_SIGN",
    "Sheet",
    "MomentumSource1D",
    "PiecewiseField1D",
    "PoissonSolution",
    "ResidualReport",
    "FourVector",
    "minkowski_dot",
    "solve_capacitor",
    "solve_sheets",
    "analytic_solution",
    "poisson_solve_1d",
    "laplacian_residual",
    "coulomb_flux_check",
    "plane_wave_residual",
    "transverse_current",
    "conservation_check",
]

# d^2 C / dp^2 = SOURCE_SIGN * 4 pi rho
SOURCE_SIGN = -1

KINDS = ("charge", "current-x", "current-y", "current-z")
_KIND_INDEX = {"charge": 0, "current-x": 1, "current-y": 2, "current-z": 3}
_AXIS_INDEX = {"p_x": 1, "p_y": 2, "p_z": 3}


@dataclass(frozen=True)
class Sheet:
    position: float
    strength: float
    kind: str = "charge"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown sheet kind {self.kind!r}")
        if not (math.isfinite(self.position) and math.isfinite(self.strength)):
            raise ConfigurationError("sheet position and strength must be finite")


@dataclass(frozen=True)
class MomentumSource1D:
    """Delta sheets (and optional smooth profiles) varying along one axis.

    ``profiles`` maps a kind to a smooth density ``f(p_axis)``; it exists for
    conservation checks, the solvers only use the sheets.
    """

    sheets: tuple[Sheet, ...]
    axis: str = "p_z"
    profiles: dict[str, Callable[[np.ndarray], np.ndarray]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sheets", tuple(self.sheets))
        if self.axis not in _AXIS_INDEX:
            raise ConfigurationError(f"axis must be one of {sorted(_AXIS_INDEX)}")
        for kind in self.profiles:
            if kind not in KINDS:
                raise ConfigurationError(f"unknown profile kind {kind!r}")

    @property
    def kind(self) -> str:
        kinds = {s.kind for s in self.sheets}
        if len(kinds) > 1:
            raise ConfigurationError(f"mixed sheet kinds {sorted(kinds)}; solve each component separately")
        return kinds.pop() if kinds else "charge"

    @classmethod
    def capacitor(cls, sigma: float, pa: float) -> "MomentumSource1D":
        return cls((Sheet(-pa, sigma), Sheet(pa, sigma)))

    @classmethod
    def current_sheets(cls, J: float, pa: float) -> "MomentumSource1D":
        return cls((Sheet(-pa, J, "current-y"), Sheet(pa, J, "current-y")))

    @classmethod
    def ordinary_capacitor(cls, sigma: float, a: float) -> "MomentumSource1D":
        """``+sigma`` at ``-a`` and ``-sigma`` at ``+a``."""
        return cls((Sheet(-a, sigma), Sheet(a, -sigma)))


@dataclass(frozen=True, eq=False)
class PiecewiseField1D:
    """Piecewise-constant field with a continuous piecewise-linear potential.

    Interval ``k`` spans ``breakpoints[k-1] .. breakpoints[k]`` (open ends
    outside); on it the potential is ``slope[k]*p + intercept[k]`` and the
    field is ``-slope[k]``.
    """

    breakpoints: np.ndarray
    slope: np.ndarray
    intercept: np.ndarray
    kind: str = "charge"

    @property
    def values(self) -> np.ndarray:
        """Field value per interval."""
        return -self.slope

    def _interval(self, p) -> np.ndarray:
        # points exactly on a sheet take the inner interval value
        p = np.asarray(p, dtype=float)
        idx_right = np.searchsorted(self.breakpoints, p, side="right")
        idx_left = np.searchsorted(self.breakpoints, p, side="left")
        inner = np.where(p > 0, idx_left, idx_right)
        return inner

    def field(self, p) -> np.ndarray:
        return self.values[self._interval(p)]

    def potential(self, p) -> np.ndarray:
        k = self._interval(p)
        return self.slope[k] * np.asarray(p, dtype=float) + self.intercept[k]

    def jumps(self) -> np.ndarray:
        """Field jump across each breakpoint (right minus left)."""
        return np.diff(self.values)


def analytic_solution(source: MomentumSource1D) -> PiecewiseField1D:
    """Superposed single-sheet solutions, gauge fixed to ``C(0) = 0``."""
    kind = source.kind
    sheets = sorted(source.sheets, key=lambda s: s.position)
    pos = np.array([s.position for s in sheets], dtype=float)
    q = np.array([s.strength for s in sheets], dtype=float)
    if len(np.unique(pos)) != len(pos):
        raise ConfigurationError("sheet positions must be distinct")
    # C(p) = -2 pi sum_k q_k (|p - p_k| - |p_k|); on interval k sheets [0, k) lie left
    n = len(pos)
    slope = np.empty(n + 1)
    intercept = np.empty(n + 1)
    offset = 2 * np.pi * np.sum(q * np.abs(pos))
    for k in range(n + 1):
        sgn = np.where(np.arange(n) < k, 1.0, -1.0)  # sign(p - p_j)
        slope[k] = -2 * np.pi * np.sum(q * sgn)
        intercept[k] = 2 * np.pi * np.sum(q * sgn * pos) + offset
    return PiecewiseField1D(pos, slope, intercept, kind)


def solve_capacitor(sigma: float, pa: float) -> PiecewiseField1D:
    """Equal charge sheets at ``+-pa``: ``E_z = +-4 pi sigma`` outside, 0 inside."""
    if not pa > 0:
        raise ConfigurationError("p_a must be positive")
    return analytic_solution(MomentumSource1D.capacitor(sigma, pa))


def solve_sheets(J: float, pa: float) -> PiecewiseField1D:
    """Co-directed current sheets at ``+-pa``: ``B_x = +-4 pi J`` outside, 0 inside."""
    if not pa > 0:
        raise ConfigurationError("p_a must be positive")
    return analytic_solution(MomentumSource1D.current_sheets(J, pa))


@dataclass(frozen=True, eq=False)
class PoissonSolution:
    nodes: np.ndarray
    potential: np.ndarray
    field: np.ndarray
    density: np.ndarray
    kind: str = "charge"
    source_sign: int = SOURCE_SIGN

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.nodes.tolist(), self.potential.tolist(), self.field.tolist()))


def _grid(n_nodes: int, half_extent: float) -> np.ndarray:
    if n_nodes < 64:
        raise ConfigurationError(f"need at least 64 nodes, got {n_nodes}")
    if not half_extent > 0:
        raise ConfigurationError("half_extent must be positive")
    return np.linspace(-half_extent, half_extent, n_nodes)


def _nearest_nodes(source: MomentumSource1D, nodes: np.ndarray) -> list[int]:
    h = nodes[1] - nodes[0]
    out = []
    for s in source.sheets:
        if not nodes[0] < s.position < nodes[-1]:
            raise ConfigurationError(f"sheet at {s.position} is not strictly inside the grid")
        k = int(np.rint((s.position - nodes[0]) / h))
        if k <= 0 or k >= len(nodes) - 1:
            raise ConfigurationError(f"sheet at {s.position} deposits onto a boundary node")
        out.append(k)
    return out


def deposit(source: MomentumSource1D, nodes: np.ndarray) -> np.ndarray:
    """Nearest-node deposition of sheets with weight ``strength / spacing``."""
    h = nodes[1] - nodes[0]
    rho = np.zeros_like(nodes)
    for s, k in zip(source.sheets, _nearest_nodes(source, nodes)):
        rho[k] += s.strength / h
    return rho


def snapped(source: MomentumSource1D, nodes: np.ndarray) -> MomentumSource1D:
    """The source with every sheet moved onto its deposition node."""
    merged: dict[int, float] = {}
    for s, k in zip(source.sheets, _nearest_nodes(source, nodes)):
        merged[k] = merged.get(k, 0.0) + s.strength
    kind = source.kind
    return MomentumSource1D(tuple(Sheet(float(nodes[k]), q, kind) for k, q in sorted(merged.items())), source.axis)


def poisson_solve_1d(
    source: MomentumSource1D,
    n_nodes: int = 512,
    half_extent: float = 4.0,
    bc: str | tuple[float, float] = "analytic",
) -> PoissonSolution:
    """Second-order tridiagonal solve of ``C'' = SOURCE_SIGN * 4 pi rho``.

    ``bc="analytic"`` pins both end values from :func:`analytic_solution` of
    the deposited (node-snapped) sheets, so fields away from the sheets are
    exact; a ``(left, right)`` pair pins them explicitly.
    """
    kind = source.kind
    nodes = _grid(n_nodes, half_extent)
    rho = deposit(source, nodes)
    if isinstance(bc, str):
        if bc != "analytic":
            raise ConfigurationError(f"unknown boundary condition {bc!r}")
        left, right = analytic_solution(snapped(source, nodes)).potential(nodes[[0, -1]])
    else:
        left, right = (float(v) for v in bc)
    if not (math.isfinite(left) and math.isfinite(right)):
        raise ConfigurationError("boundary values must be finite")

    h = nodes[1] - nodes[0]
    m = n_nodes - 2
    rhs = SOURCE_SIGN * 4 * np.pi * rho[1:-1] * h**2
    rhs[0] -= left
    rhs[-1] -= right
    ab = np.zeros((3, m))
    ab[0, 1:] = 1.0
    ab[1, :] = -2.0
    ab[2, :-1] = 1.0
    C = np.empty(n_nodes)
    C[0], C[-1] = left, right
    C[1:-1] = solve_banded((1, 1), ab, rhs)
    return PoissonSolution(nodes, C, -np.gradient(C, h), rho, kind)


@dataclass(frozen=True)
class ResidualReport:
    max_abs_residual: float
    rms_residual: float
    node_count: int

    def to_dict(self) -> dict:
        return {
            "max_abs_residual": self.max_abs_residual,
            "rms_residual": self.rms_residual,
            "node_count": self.node_count,
        }


def laplacian_residual(solution: PoissonSolution, source: MomentumSource1D) -> ResidualReport:
    """Residual of the discrete equation on interior nodes.

    Measured in the solver's scaled form
    ``C[k-1] - 2 C[k] + C[k+1] - SOURCE_SIGN * 4 pi rho[k] h^2``.
    """
    nodes = solution.nodes
    rho = deposit(source, nodes)
    if rho.shape != solution.potential.shape:
        raise GridMismatchError("solution and source grids differ")
    h = solution.spacing
    C = solution.potential
    r = C[:-2] - 2 * C[1:-1] + C[2:] - SOURCE_SIGN * 4 * np.pi * rho[1:-1] * h**2
    return ResidualReport(float(np.max(np.abs(r))), float(np.sqrt(np.mean(r**2))), len(r))


def sampled_solution(field: PiecewiseField1D, n_nodes: int, half_extent: float) -> PoissonSolution:
    """An analytic solution sampled on the solver grid."""
    nodes = _grid(n_nodes, half_extent)
    return PoissonSolution(nodes, field.potential(nodes), field.field(nodes), np.zeros_like(nodes), field.kind)


def coulomb_flux_check(gc: float, radius: float, n_samples: int = 10_000) -> float:
    """Flux of ``E = -grad(gc/|p|)`` through a sphere, by Gauss-Legendre in
    ``cos(theta)`` times the trapezoid rule in ``phi``."""
    if not radius > 0:
        raise ConfigurationError("radius must be positive")
    if n_samples < 10_000:
        raise ConfigurationError("need at least 1e4 samples")
    n_theta = int(math.isqrt(n_samples // 2))
    n_phi = -(-n_samples // n_theta)
    u, w_u = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    U, PHI = np.meshgrid(u, phi, indexing="ij")
    s = np.sqrt(1 - U**2)
    normal = np.stack([s * np.cos(PHI), s * np.sin(PHI), U], axis=-1)
    E = momentum_electric(CoulombMomentum(gc), radius * normal)
    weights = w_u[:, None] * (2 * np.pi / n_phi) * radius**2
    return float(np.sum(np.sum(E * normal, axis=-1) * weights))


@dataclass(frozen=True)
class FourVector:
    t: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self):
            raise ConfigurationError("four-vector components must be finite")

    def __iter__(self):
        return iter((self.t, self.x, self.y, self.z))

    def array(self) -> np.ndarray:
        return np.array(tuple(self), dtype=float)


def minkowski_dot(a, b) -> float:
    a, b = np.asarray(tuple(a), float), np.asarray(tuple(b), float)
    return float(a[0] * b[0] - a[1:] @ b[1:])


def plane_wave_residual(x0) -> float:
    """``|x0.x0|``: zero exactly on the light cone."""
    return abs(minkowski_dot(x0, x0))


def transverse_current(V, x) -> FourVector:
    """``V - x (V.x)/(x.x)``, which is orthogonal to ``x``."""
    v = np.asarray(tuple(V), float)
    xv = np.asarray(tuple(x), float)
    xx = minkowski_dot(xv, xv)
    scale = float(xv @ xv)
    if scale == 0.0 or abs(xx) <= 1e-12 * scale:
        raise ConfigurationError("projector undefined for null or zero x")
    out = v - xv * (minkowski_dot(v, xv) / xx)
    # one refinement pass removes the rounding left by the first projection
    out = out - xv * (minkowski_dot(out, xv) / xx)
    return FourVector(*out)


@dataclass
class ConservationReport:
    conserved: bool
    divergence: dict[str, float]
    sheet_terms: list[str]


def conservation_check(source: MomentumSource1D, samples: Sequence[float] | None = None, tol: float = 1e-10) -> ConservationReport:
    """Evaluate ``d_mu J^mu`` for a static source varying along one axis.

    Only the current component along the variation axis can contribute: its
    smooth profile is differentiated on ``samples`` and any delta sheet of
    that component is a derivative of a delta, hence never conserved.
    ``J^0`` is ``p0``-independent by construction.
    """
    axis = _AXIS_INDEX[source.axis]
    if samples is None:
        samples = np.linspace(-5.0, 5.0, 201)
    samples = np.asarray(samples, dtype=float)
    h = 1e-5 * np.maximum(1.0, np.abs(samples))
    names = {0: "d0_J0", 1: "dx_Jx", 2: "dy_Jy", 3: "dz_Jz"}
    div = {name: 0.0 for name in names.values()}
    for kind, f in source.profiles.items():
        mu = _KIND_INDEX[kind]
        if mu == axis:
            d = (np.asarray(f(samples + h)) - np.asarray(f(samples - h))) / (2 * h)
            div[names[mu]] = float(np.max(np.abs(d)))
    sheet_terms = [
        f"{s.kind} sheet at {s.position:g}"
        for s in source.sheets
        if _KIND_INDEX[s.kind] == axis and s.strength != 0
    ]
    conserved = all(v <= tol for v in div.values()) and not sheet_terms
    return ConservationReport(conserved, div, sheet_terms)
