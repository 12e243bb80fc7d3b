"""Harmonic oscillator gauged in both position and momentum.

The 2D Hamiltonian is

    H = (p_x + eBy/2)^2/2m + (p_y - eBx/2)^2/2m
        + m w^2/2 (x + g Bm p_y/2)^2 + m w^2/2 (y - g Bm p_x/2)^2

(the decoupled z oscillator is dropped). Expanding it gives an isotropic
oscillator with mass ``m_eff`` and frequency ``w_eff`` plus ``lam * L_z`` with
``lam = -g1*B + g2*Bm``, so the levels are

    E(n_r, m_z) = hbar w_eff (2 n_r + |m_z| + 1) + hbar lam m_z.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, HermiticityError
from .phasegrid import MomentumGrid, spectral_derivative_matrix

__all__ = [
    "OscillatorParams",
    "EffectiveParams",
    "HamiltonianMatrix",
    "SpectrumResult",
    "AnalyticLevel",
    "effective_params",
    "quadratic_form",
    "closed_form_quadratic_form",
    "fock_operators",
    "assemble_fock_hamiltonian",
    "assemble_grid_hamiltonian",
    "diagonalize",
    "analytic_spectrum",
    "lz_fock",
    "reciprocity_duality_check",
    "compare_levels",
]

# phase-space coordinate order used by the quadratic forms
COORDS = ("x", "y", "px", "py")
GRID_POINT_BUDGET = 48


@dataclass(frozen=True)
class OscillatorParams:
    m: float = 1.0
    omega: float = 1.0
    e: float = 0.0
    g: float = 0.0
    B: float = 0.0
    Bm: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ConfigurationError(f"{name} must be finite")
        for name in ("m", "omega", "hbar"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EffectiveParams:
    """Derived couplings. ``B_eff``, ``B_nc`` and ``cos_theta_mix`` are
    ``None`` when both angular-momentum couplings vanish."""

    g1: float
    g2: float
    m_eff: float
    omega_eff: float
    lz_coefficient: float
    B_eff: float | None
    B_nc: float | None
    cos_theta_mix: float | None

    @property
    def coupled(self) -> bool:
        return self.cos_theta_mix is not None

    def to_dict(self) -> dict:
        return asdict(self)


def effective_params(params: OscillatorParams) -> EffectiveParams:
    m, w, e, g, B, Bm = params.m, params.omega, params.e, params.g, params.B, params.Bm
    kinetic = 1 + (g * m * w * Bm) ** 2 / 4
    potential = 1 + (e * B) ** 2 / (4 * m**2 * w**2)
    g1 = e / (2 * m)
    g2 = g * m * w**2 / 2
    norm = math.hypot(g1, g2)
    if norm > 0:
        B_eff = (-g1 * B + g2 * Bm) / norm
        B_nc = (g1 * Bm + g2 * B) / norm
        cos_mix = g1 / norm
    else:
        B_eff = B_nc = cos_mix = None
    return EffectiveParams(
        g1=g1,
        g2=g2,
        m_eff=m / kinetic,
        omega_eff=w * math.sqrt(kinetic * potential),
        lz_coefficient=-g1 * B + g2 * Bm,
        B_eff=B_eff,
        B_nc=B_nc,
        cos_theta_mix=cos_mix,
    )


def quadratic_form(params: OscillatorParams) -> np.ndarray:
    """Symmetric ``Q`` with ``H = sum_ij Q_ij z_i z_j``, ``z = (x, y, px, py)``,
    built by squaring the four minimally coupled linear forms."""
    m, w, eB, gBm = params.m, params.omega, params.e * params.B, params.g * params.Bm
    forms = [
        (1 / (2 * m), [0, eB / 2, 1, 0]),        # px + eBy/2
        (1 / (2 * m), [-eB / 2, 0, 0, 1]),       # py - eBx/2
        (m * w**2 / 2, [1, 0, 0, gBm / 2]),      # x + gBm py/2
        (m * w**2 / 2, [0, 1, -gBm / 2, 0]),     # y - gBm px/2
    ]
    Q = np.zeros((4, 4))
    for c, v in forms:
        v = np.asarray(v, dtype=float)
        Q += c * np.outer(v, v)
    return Q


def closed_form_quadratic_form(params: OscillatorParams) -> np.ndarray:
    """``Q`` from the expanded form: rescaled kinetic and potential terms
    plus ``lam * (x py - y px)``."""
    m, w = params.m, params.omega
    kinetic = 1 + (params.g * m * w * params.Bm) ** 2 / 4
    potential = 1 + (params.e * params.B) ** 2 / (4 * m**2 * w**2)
    lam = effective_params(params).lz_coefficient
    Q = np.zeros((4, 4))
    Q[0, 0] = Q[1, 1] = potential * m * w**2 / 2
    Q[2, 2] = Q[3, 3] = kinetic / (2 * m)
    Q[0, 3] = Q[3, 0] = lam / 2
    Q[1, 2] = Q[2, 1] = -lam / 2
    return Q


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    basis: str
    matrix: np.ndarray
    params: OscillatorParams
    n_max: int | None = None
    grid: MomentumGrid | None = None
    reference: tuple[float, float] | None = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_residual(self) -> float:
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) / scale


def _box_indices(n_max: int) -> np.ndarray:
    n = n_max + 2
    i, j = np.meshgrid(np.arange(n_max + 1), np.arange(n_max + 1), indexing="ij")
    return (i * n + j).ravel()


def fock_operators(n_max: int, m_ref: float = 1.0, omega_ref: float = 1.0, hbar: float = 1.0) -> dict:
    """Sparse ladder-built ``x, y, px, py, a1, a2`` on ``n_max + 2`` levels per mode.

    One spare level per mode makes every quadratic product exact on the
    ``n_max`` box before projection.
    """
    n = n_max + 2
    a = sp.diags(np.sqrt(np.arange(1, n)), 1, format="csr")
    eye = sp.identity(n, format="csr")
    a1 = sp.kron(a, eye, format="csr")
    a2 = sp.kron(eye, a, format="csr")
    lx = math.sqrt(hbar / (2 * m_ref * omega_ref))
    lp = math.sqrt(hbar * m_ref * omega_ref / 2)
    return {
        "a1": a1,
        "a2": a2,
        "x": lx * (a1 + a1.T),
        "y": lx * (a2 + a2.T),
        "px": 1j * lp * (a1.T - a1),
        "py": 1j * lp * (a2.T - a2),
    }


def _project(op, n_max: int) -> np.ndarray:
    idx = _box_indices(n_max)
    return op.tocsr()[idx][:, idx].toarray()


def assemble_fock_hamiltonian(
    params: OscillatorParams,
    n_max: int,
    reference: tuple[float, float] | str = "bare",
) -> HamiltonianMatrix:
    """Project the Hamiltonian onto ``n1, n2 <= n_max`` of a reference oscillator.

    ``reference`` is ``"bare"`` (``m``, ``omega``), ``"effective"``
    (``m_eff``, ``w_eff``) or an explicit ``(m_ref, omega_ref)`` pair.
    """
    if n_max < 8:
        raise ConfigurationError(f"n_max must be at least 8, got {n_max}")
    if reference == "bare":
        ref = (params.m, params.omega)
    elif reference == "effective":
        eff = effective_params(params)
        ref = (eff.m_eff, eff.omega_eff)
    elif isinstance(reference, str):
        raise ConfigurationError(f"unknown reference {reference!r}")
    else:
        ref = tuple(float(v) for v in reference)
    ops = fock_operators(n_max, ref[0], ref[1], params.hbar)
    Z = [ops[c] for c in COORDS]
    Q = quadratic_form(params)
    H = sp.csr_matrix(Z[0].shape, dtype=complex)
    for i in range(4):
        for j in range(4):
            if Q[i, j] != 0.0:
                H = H + Q[i, j] * (Z[i] @ Z[j])
    M = _project(H, n_max)
    M = 0.5 * (M + M.conj().T)
    return HamiltonianMatrix("fock", M, params, n_max=n_max, reference=ref)


def assemble_grid_hamiltonian(grid: MomentumGrid, params: OscillatorParams) -> HamiltonianMatrix:
    """Dense Hamiltonian in the momentum representation of a 2D grid."""
    if grid.dims != 2:
        raise ConfigurationError("grid Hamiltonian needs a 2D grid")
    if max(grid.points) > GRID_POINT_BUDGET:
        raise ConfigurationError(f"at most {GRID_POINT_BUDGET} points per axis for dense diagonalization")
    hbar = params.hbar
    D0 = spectral_derivative_matrix(grid, 0)
    D1 = spectral_derivative_matrix(grid, 1)
    I0, I1 = np.eye(grid.points[0]), np.eye(grid.points[1])
    px, py = (c.ravel() for c in grid.mesh())
    Z = [
        1j * hbar * np.kron(D0, I1),
        1j * hbar * np.kron(I0, D1),
        np.diag(px).astype(complex),
        np.diag(py).astype(complex),
    ]
    Q = quadratic_form(params)
    H = np.zeros((grid.size, grid.size), dtype=complex)
    for i in range(4):
        for j in range(4):
            if Q[i, j] != 0.0:
                H += Q[i, j] * (Z[i] @ Z[j])
    H = 0.5 * (H + H.conj().T)
    return HamiltonianMatrix("grid", H, params, grid=grid)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    basis: str
    trusted_count: int

    @property
    def trusted(self) -> np.ndarray:
        return self.eigenvalues[: self.trusted_count]


def diagonalize(H: HamiltonianMatrix, tol: float = 1e-8) -> SpectrumResult:
    """Dense Hermitian eigenvalues, ascending.

    Only the lowest quarter (Fock) or eighth (grid) is marked trusted.
    """
    if H.hermiticity_residual() > tol:
        raise HermiticityError(f"matrix not Hermitian: residual {H.hermiticity_residual():.3g}")
    w = np.linalg.eigvalsh(H.matrix)
    divisor = 4 if H.basis == "fock" else 8
    return SpectrumResult(w, H.basis, H.dimension // divisor)


@dataclass(frozen=True)
class AnalyticLevel:
    n_r: int
    m_z: int
    energy: float

    def to_dict(self) -> dict:
        return {"n_r": self.n_r, "m_z": self.m_z, "E": self.energy}


def _lowest_levels(W: float, lam: float, count: int) -> list[tuple[float, int, int]]:
    """``(E/hbar, n_r, m_z)`` in ascending energy: the ``count`` lowest plus any
    ties with the last one.

    For a fixed sign of ``m_z`` the energy ``W(2 n_r + 1) + (W +- lam)|m_z|``
    is increasing in both indices, so each sign is a sorted 2D table and a
    heap walks both in order. The cost depends on ``count`` only, not on the
    gap ``W - |lam|``.
    """
    def energy(nr, mz):
        return W * (abs(mz) + 1) + lam * mz + 2 * W * nr

    heap = [(energy(0, 0), 0, 0, 1), (energy(0, -1), 0, 1, -1)]
    out: list[tuple[float, int, int]] = []
    while heap:
        E, nr, k, sign = heapq.heappop(heap)
        if len(out) >= count and E - out[count - 1][0] > 1e-12 * max(1.0, abs(out[count - 1][0])):
            break
        out.append((E, nr, sign * k))
        heapq.heappush(heap, (energy(nr, sign * (k + 1)), nr, k + 1, sign))
        if k == (0 if sign == 1 else 1):
            heapq.heappush(heap, (energy(nr + 1, sign * k), nr + 1, k, sign))
    return out


def analytic_spectrum(params: OscillatorParams, count: int) -> list[AnalyticLevel]:
    """The ``count`` lowest closed-form levels.

    Degenerate levels are ordered by ``(|m_z|, m_z, n_r)``.
    """
    eff = effective_params(params)
    hbar, W, lam = params.hbar, eff.omega_eff, eff.lz_coefficient
    if abs(lam) >= W:
        raise ConfigurationError("spectrum unbounded below: |lz coefficient| >= omega_eff")
    if count <= 0:
        return []
    levels = sorted((hbar * E, nr, mz) for E, nr, mz in _lowest_levels(W, lam, count))
    scale = max(1.0, abs(levels[count - 1][0]))
    # group numerically equal energies, then order each group by quantum numbers
    ordered, group = [], [levels[0]]
    for lev in levels[1:]:
        if lev[0] - group[0][0] <= 1e-12 * scale:
            group.append(lev)
        else:
            ordered.extend(sorted(group, key=lambda t: (abs(t[2]), t[2], t[1])))
            group = [lev]
    ordered.extend(sorted(group, key=lambda t: (abs(t[2]), t[2], t[1])))
    return [AnalyticLevel(nr, mz, E) for E, nr, mz in ordered[:count]]


def lz_fock(n_max: int, hbar: float = 1.0) -> HamiltonianMatrix:
    """``i hbar (a1 a2^+ - a2 a1^+)`` on the ``n_max`` box."""
    if n_max < 1:
        raise ConfigurationError("n_max must be at least 1")
    ops = fock_operators(n_max, hbar=hbar)
    a1, a2 = ops["a1"], ops["a2"]
    L = 1j * hbar * (a1 @ a2.T - a2 @ a1.T)
    return HamiltonianMatrix("fock", _project(L, n_max), OscillatorParams(hbar=hbar), n_max=n_max)


def compare_levels(numeric: Sequence[float], analytic: Sequence[float]) -> float:
    """Max deviation between two sorted multisets of equal length."""
    a = np.sort(np.asarray(numeric, dtype=float))
    b = np.sort(np.asarray(analytic, dtype=float))
    if a.shape != b.shape:
        raise ValueError("level lists differ in length")
    return float(np.max(np.abs(a - b), initial=0.0))


def reciprocity_duality_check(a: float, b: float, n_max: int = 40) -> dict:
    """Compare spectra at ``(eB, gBm) = (a, b)`` and ``(-b, -a)`` with
    ``m = omega = hbar = 1``."""
    p1 = OscillatorParams(e=a, B=1.0, g=b, Bm=1.0)
    p2 = OscillatorParams(e=-b, B=1.0, g=-a, Bm=1.0)
    s1 = diagonalize(assemble_fock_hamiltonian(p1, n_max))
    s2 = diagonalize(assemble_fock_hamiltonian(p2, n_max))
    t = min(s1.trusted_count, s2.trusted_count)
    return {
        "a": a,
        "b": b,
        "n_max": n_max,
        "trusted_count": t,
        "discrepancy": compare_levels(s1.eigenvalues[:t], s2.eigenvalues[:t]),
        "lowest": s1.eigenvalues[: min(t, 6)].tolist(),
    }
