"""Momentum gauge configurations and their field strengths.

Conventions used throughout:

* configs store contravariant components ``C^mu(p)`` as functions of the
  physical 4-momentum ``(p0, p1, p2, p3)``;
* metric signature is ``(+, -, -, -)``;
* ``G_mu_nu = dC_mu/dp_nu - dC_nu/dp_mu`` with every index lowered.

With these, ``G_ij = d_j C^i - d_i C^j`` for spatial indices,
``G_0i = -d_i C^0 + d_0 C^i`` (so ``C^0 = -E.p`` gives ``G_0i = +E^i``),
and the momentum magnetic field, taken as the curl of the spatial ``C``,
satisfies ``G_ij = -eps_ijk B^k``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, SingularEvaluationError

__all__ = [
    "MomentumGaugeConfig",
    "ConstantMagnetic",
    "ConstantElectric",
    "SymmetricGauge2D",
    "CapacitorStack",
    "CurrentSheets",
    "CoulombMomentum",
    "Custom",
    "OrdinaryGaugeConfig",
    "OrdinarySymmetricGauge2D",
    "OrdinaryZero",
    "GaugeTransform",
    "FieldStrengthSample",
    "ThetaMap",
    "Plateau",
    "METRIC",
    "eval_C",
    "jacobian",
    "field_strength",
    "apply_gauge_transform",
    "momentum_magnetic",
    "momentum_electric",
    "theta_map",
    "config_from_dict",
]

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
_SIGN = np.diag(METRIC)
_LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in itertools.permutations(range(3)):
    _LEVI[_i, _j, _k] = np.linalg.det(np.eye(3)[[_i, _j, _k]])


def _as_four(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-1] == 3:
        p = np.concatenate([np.zeros(p.shape[:-1] + (1,)), p], axis=-1)
    elif p.shape[-1] != 4:
        raise ConfigurationError(f"momentum must have 3 or 4 components, got shape {p.shape}")
    return p


class MomentumGaugeConfig:
    """Base class for ``C^mu(p)`` configurations.

    Subclasses provide ``potential`` and, where a closed form exists,
    ``closed_jacobian`` returning ``dC^mu/dp^nu`` with shape ``(..., 4, 4)``.
    """

    variant: str = ""

    def potential(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def closed_jacobian(self, p: np.ndarray) -> np.ndarray | None:
        return None

    def check_regular(self, p: np.ndarray) -> None:
        pass

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"variant": self.variant, "params": self.params()}


@dataclass(frozen=True)
class ConstantMagnetic(MomentumGaugeConfig):
    """``C^i = 1/2 (B x p)^i``, ``C^0 = 0``."""

    B: tuple[float, float, float]
    variant = "ConstantMagnetic"

    def potential(self, p):
        out = np.zeros_like(p)
        out[..., 1:] = 0.5 * np.cross(np.asarray(self.B, float), p[..., 1:])
        return out

    def closed_jacobian(self, p):
        J = np.zeros(p.shape + (4,))
        # d/dp^k of 1/2 eps_ijk B^j p^k
        J[..., 1:, 1:] = 0.5 * np.einsum("ijk,j->ik", _LEVI, np.asarray(self.B, float))
        return J

    def params(self):
        return {"B": [float(b) for b in self.B]}


@dataclass(frozen=True)
class ConstantElectric(MomentumGaugeConfig):
    """``C^0 = -E.p``, spatial components zero."""

    E: tuple[float, float, float]
    variant = "ConstantElectric"

    def potential(self, p):
        out = np.zeros_like(p)
        out[..., 0] = -p[..., 1:] @ np.asarray(self.E, float)
        return out

    def closed_jacobian(self, p):
        J = np.zeros(p.shape + (4,))
        J[..., 0, 1:] = -np.asarray(self.E, float)
        return J

    def params(self):
        return {"E": [float(e) for e in self.E]}


@dataclass(frozen=True)
class SymmetricGauge2D(MomentumGaugeConfig):
    """``C^1 = -B p2 / 2``, ``C^2 = B p1 / 2``."""

    B: float
    variant = "SymmetricGauge2D"

    def potential(self, p):
        out = np.zeros_like(p)
        out[..., 1] = -0.5 * self.B * p[..., 2]
        out[..., 2] = 0.5 * self.B * p[..., 1]
        return out

    def closed_jacobian(self, p):
        J = np.zeros(p.shape + (4,))
        J[..., 1, 2] = -0.5 * self.B
        J[..., 2, 1] = 0.5 * self.B
        return J

    def params(self):
        return {"B": float(self.B)}


def _check_pa(pa: float) -> None:
    if not pa > 0:
        raise ConfigurationError(f"sheet position p_a must be positive, got {pa}")


def _outside(pz: np.ndarray, pa: float) -> tuple[np.ndarray, np.ndarray]:
    """Ramp ``(|pz| - pa)_+`` and its derivative, zero on ``[-pa, pa]``."""
    ramp = np.maximum(np.abs(pz) - pa, 0.0)
    slope = np.where(np.abs(pz) > pa, np.sign(pz), 0.0)
    return ramp, slope


@dataclass(frozen=True)
class CapacitorStack(MomentumGaugeConfig):
    """Equal charge sheets ``Sigma`` at ``p3 = +-pa``.

    ``C^0 = -4 pi Sigma (|p3| - pa)_+`` gives ``E_z = +-4 pi Sigma`` outside
    the sheets and zero between them.
    """

    sigma: float
    pa: float
    variant = "CapacitorStack"

    def __post_init__(self):
        _check_pa(self.pa)

    def potential(self, p):
        out = np.zeros_like(p)
        out[..., 0] = -4 * np.pi * self.sigma * _outside(p[..., 3], self.pa)[0]
        return out

    def closed_jacobian(self, p):
        J = np.zeros(p.shape + (4,))
        J[..., 0, 3] = -4 * np.pi * self.sigma * _outside(p[..., 3], self.pa)[1]
        return J

    def params(self):
        return {"sigma": float(self.sigma), "pa": float(self.pa)}


@dataclass(frozen=True)
class CurrentSheets(MomentumGaugeConfig):
    """Co-directed ``+y`` current sheets ``J`` at ``p3 = +-pa``.

    ``C^2 = -4 pi J (|p3| - pa)_+`` gives ``B_x = +-4 pi J`` outside.
    """

    J: float
    pa: float
    variant = "CurrentSheets"

    def __post_init__(self):
        _check_pa(self.pa)

    def potential(self, p):
        out = np.zeros_like(p)
        out[..., 2] = -4 * np.pi * self.J * _outside(p[..., 3], self.pa)[0]
        return out

    def closed_jacobian(self, p):
        Jac = np.zeros(p.shape + (4,))
        Jac[..., 2, 3] = -4 * np.pi * self.J * _outside(p[..., 3], self.pa)[1]
        return Jac

    def params(self):
        return {"J": float(self.J), "pa": float(self.pa)}


@dataclass(frozen=True)
class CoulombMomentum(MomentumGaugeConfig):
    """``C^0 = gc / |p|`` (spatial norm), singular at the origin."""

    gc: float
    variant = "CoulombMomentum"

    def check_regular(self, p):
        if np.any(np.linalg.norm(p[..., 1:], axis=-1) == 0.0):
            raise SingularEvaluationError("CoulombMomentum is singular at p = 0")

    def potential(self, p):
        out = np.zeros_like(p)
        out[..., 0] = self.gc / np.linalg.norm(p[..., 1:], axis=-1)
        return out

    def closed_jacobian(self, p):
        r = np.linalg.norm(p[..., 1:], axis=-1)
        J = np.zeros(p.shape + (4,))
        J[..., 0, 1:] = -self.gc * p[..., 1:] / r[..., None] ** 3
        return J

    def params(self):
        return {"gc": float(self.gc)}


@dataclass(frozen=True, eq=False)
class Custom(MomentumGaugeConfig):
    """Four component functions of the 4-momentum array ``(..., 4)``.

    ``jacobian`` may supply ``dC^mu/dp^nu`` in closed form; otherwise field
    strengths fall back to central differences.
    """

    components: tuple[Callable[[np.ndarray], np.ndarray], ...]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    singular: Callable[[np.ndarray], None] | None = None
    label: str = "custom"
    variant = "Custom"

    def __post_init__(self):
        if len(self.components) != 4:
            raise ConfigurationError("Custom needs exactly four component functions")

    def check_regular(self, p):
        if self.singular is not None:
            self.singular(p)

    def potential(self, p):
        return np.stack([np.broadcast_to(f(p), p.shape[:-1]) for f in self.components], axis=-1)

    def closed_jacobian(self, p):
        return None if self.jacobian is None else self.jacobian(p)

    def params(self):
        return {"label": self.label}


class OrdinaryGaugeConfig:
    variant = ""

    def potential(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class OrdinarySymmetricGauge2D(OrdinaryGaugeConfig):
    """``A_1 = -B y / 2``, ``A_2 = B x / 2``."""

    B: float
    variant = "SymmetricGauge2D"

    def potential(self, x):
        x = _as_four(x)
        out = np.zeros_like(x)
        out[..., 1] = -0.5 * self.B * x[..., 2]
        out[..., 2] = 0.5 * self.B * x[..., 1]
        return out


@dataclass(frozen=True)
class OrdinaryZero(OrdinaryGaugeConfig):
    variant = "Zero"

    def potential(self, x):
        return np.zeros_like(_as_four(x))


# ---------------------------------------------------------------------------
# evaluation


def eval_C(config: MomentumGaugeConfig, p) -> np.ndarray:
    """Components ``(C^0, C^1, C^2, C^3)`` at ``p`` (3- or 4-vectors)."""
    p = _as_four(p)
    config.check_regular(p)
    return config.potential(p)


def _fd_jacobian(config: MomentumGaugeConfig, p: np.ndarray) -> np.ndarray:
    h = 1e-5 * np.maximum(1.0, np.linalg.norm(p, axis=-1))
    J = np.empty(p.shape + (4,))
    for nu in range(4):
        step = np.zeros_like(p)
        step[..., nu] = h
        up = config.potential(p + step)
        down = config.potential(p - step)
        J[..., nu] = (up - down) / (2 * h[..., None])
    return J


def jacobian(config: MomentumGaugeConfig, p, method: str = "auto") -> np.ndarray:
    """``dC^mu/dp^nu`` with shape ``(..., 4, 4)``.

    ``method`` is ``"closed"``, ``"fd"`` or ``"auto"`` (closed form when the
    config has one, central differences otherwise).
    """
    p = _as_four(p)
    config.check_regular(p)
    if method not in ("auto", "closed", "fd"):
        raise ConfigurationError(f"unknown differentiation method {method!r}")
    if method != "fd":
        J = config.closed_jacobian(p)
        if J is not None:
            return J
        if method == "closed":
            raise ConfigurationError(f"{config.variant} has no closed-form jacobian")
    return _fd_jacobian(config, p)


@dataclass(frozen=True, eq=False)
class FieldStrengthSample:
    p: np.ndarray
    G: np.ndarray


def field_strength(config: MomentumGaugeConfig, p, method: str = "auto") -> FieldStrengthSample:
    p = _as_four(p)
    J = jacobian(config, p, method)
    signs = np.outer(_SIGN, _SIGN)
    A = J * signs
    # antisymmetrize so that G = -G^T holds bit for bit
    G = A - np.swapaxes(A, -1, -2)
    return FieldStrengthSample(p, G)


def momentum_magnetic(config: MomentumGaugeConfig, p, method: str = "auto") -> np.ndarray:
    """Curl of the spatial components of ``C``."""
    J = jacobian(config, p, method)[..., 1:, 1:]
    # (curl C)^k = eps_kij d_i C^j = eps_kij J[j, i]
    return np.einsum("kij,...ji->...k", _LEVI, J)


def momentum_electric(config: MomentumGaugeConfig, p, method: str = "auto") -> np.ndarray:
    """``E^i = G_0i``."""
    return field_strength(config, p, method).G[..., 0, 1:]


# ---------------------------------------------------------------------------
# gauge transformations


@dataclass(frozen=True)
class GaugeTransform:
    """Polynomial gauge function ``eta(p1, p2, p3)`` of degree at most 4.

    ``terms`` maps exponent triples to real coefficients.
    """

    terms: tuple[tuple[tuple[int, int, int], float], ...]

    def __post_init__(self):
        terms = tuple((tuple(int(e) for e in exps), float(c)) for exps, c in dict(self.terms).items())
        for exps, c in terms:
            if len(exps) != 3 or min(exps) < 0 or sum(exps) > 4:
                raise ConfigurationError(f"bad monomial exponents {exps}")
            if not math.isfinite(c):
                raise ConfigurationError("gauge function coefficients must be finite")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_dict(cls, coeffs: dict) -> "GaugeTransform":
        return cls(tuple(coeffs.items()))

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 4, scale: float = 1.0) -> "GaugeTransform":
        monos = [e for e in itertools.product(range(degree + 1), repeat=3) if 0 < sum(e) <= degree]
        return cls(tuple((m, float(scale * rng.uniform(-1, 1))) for m in monos))

    def _monomial(self, p, exps, deriv):
        """``d^deriv`` of ``p^exps`` where ``deriv`` counts derivatives per axis."""
        coeff = 1.0
        out = np.ones(p.shape[:-1])
        for a in range(3):
            e, d = exps[a], deriv[a]
            if d > e:
                return np.zeros(p.shape[:-1])
            coeff *= math.perm(e, d)
            out = out * p[..., a + 1] ** (e - d)
        return coeff * out

    def value(self, p) -> np.ndarray:
        p = _as_four(p)
        return sum((c * self._monomial(p, e, (0, 0, 0)) for e, c in self.terms), np.zeros(p.shape[:-1]))

    def gradient(self, p) -> np.ndarray:
        """Spatial gradient, shape ``(..., 3)``."""
        p = _as_four(p)
        out = np.zeros(p.shape[:-1] + (3,))
        for e, c in self.terms:
            for a in range(3):
                d = [0, 0, 0]
                d[a] = 1
                out[..., a] += c * self._monomial(p, e, d)
        return out

    def hessian(self, p) -> np.ndarray:
        """Spatial Hessian, shape ``(..., 3, 3)``, symmetric by construction."""
        p = _as_four(p)
        out = np.zeros(p.shape[:-1] + (3, 3))
        for e, c in self.terms:
            for a in range(3):
                for b in range(a, 3):
                    d = [0, 0, 0]
                    d[a] += 1
                    d[b] += 1
                    out[..., a, b] += c * self._monomial(p, e, d)
        iu = np.triu_indices(3, 1)
        out[..., iu[1], iu[0]] = out[..., iu[0], iu[1]]
        return out

    def to_dict(self) -> dict:
        return {"terms": [[list(e), c] for e, c in self.terms]}


def apply_gauge_transform(config: MomentumGaugeConfig, eta: GaugeTransform, g: float) -> Custom:
    """``C^i -> C^i + (1/g) d eta / dp^i``; ``C^0`` is unchanged."""
    if g == 0:
        raise ZeroDivisionError("gauge transformation needs a non-zero coupling g")

    def component(mu):
        def f(p):
            base = config.potential(p)[..., mu]
            if mu == 0:
                return base
            return base + eta.gradient(p)[..., mu - 1] / g
        return f

    def jac(p):
        J = config.closed_jacobian(p)
        if J is None:
            J = _fd_jacobian(config, p)
        J = J.copy()
        J[..., 1:, 1:] += eta.hessian(p) / g
        return J

    return Custom(
        tuple(component(mu) for mu in range(4)),
        jacobian=jac,
        singular=config.check_regular,
        label=f"gauge({config.variant})",
    )


# ---------------------------------------------------------------------------
# non-commutativity maps


@dataclass(frozen=True)
class Plateau:
    value: float
    start: float
    end: float
    count: int


@dataclass(frozen=True, eq=False)
class ThetaMap:
    """``Theta_mu_nu(p) = g G_mu_nu(p)`` on sample points."""

    points: np.ndarray
    theta: np.ndarray
    g: float

    def component(self, mu: int, nu: int) -> np.ndarray:
        return self.theta[..., mu, nu]

    def plateaus(self, mu: int, nu: int, axis: int = 3, rtol: float = 1e-12) -> list[Plateau]:
        """Runs of equal ``Theta_mu_nu`` along ``axis`` of a 1D sample set."""
        vals = self.component(mu, nu).ravel()
        coords = self.points[..., axis].ravel()
        order = np.argsort(coords, kind="stable")
        vals, coords = vals[order], coords[order]
        tol = rtol * max(1.0, float(np.max(np.abs(vals), initial=0.0)))
        out: list[Plateau] = []
        start = 0
        for k in range(1, len(vals) + 1):
            if k == len(vals) or abs(vals[k] - vals[start]) > tol:
                out.append(Plateau(float(vals[start]), float(coords[start]), float(coords[k - 1]), k - start))
                start = k
        return out

    def transitions(self, mu: int, nu: int, axis: int = 3) -> list[float]:
        """Midpoints between consecutive plateaus."""
        ps = self.plateaus(mu, nu, axis)
        return [0.5 * (a.end + b.start) for a, b in zip(ps, ps[1:])]


def theta_map(config: MomentumGaugeConfig, g: float, samples, components: Sequence[int] | None = None) -> ThetaMap:
    """Sample ``g*G`` on a grid or an array of momenta.

    A :class:`~momgauge.phasegrid.MomentumGrid` is embedded with
    ``components`` (default ``(3,)`` for 1D grids, ``(1, 2)`` for 2D).
    """
    if hasattr(samples, "four_momenta"):
        if components is None:
            components = (3,) if samples.dims == 1 else (1, 2)
        pts = samples.four_momenta(components).reshape(-1, 4)
    else:
        pts = _as_four(samples)
    G = field_strength(config, pts).G
    return ThetaMap(pts, g * G, g)


# ---------------------------------------------------------------------------
# serialization


def config_from_dict(d: dict) -> MomentumGaugeConfig:
    """Build a config from ``{"variant": ..., "params": {...}}``.

    An optional ``"gauge_transform": {"terms": [...], "g": ...}`` entry wraps
    the result in :func:`apply_gauge_transform`.
    """
    if not isinstance(d, dict) or "variant" not in d:
        raise ConfigurationError("config must be an object with a 'variant' key")
    params = d.get("params", {})
    if not isinstance(params, dict):
        raise ConfigurationError("'params' must be an object")
    variant = d["variant"]
    try:
        if variant == "ConstantMagnetic":
            cfg = ConstantMagnetic(tuple(float(v) for v in _three(params["B"])))
        elif variant == "ConstantElectric":
            cfg = ConstantElectric(tuple(float(v) for v in _three(params["E"])))
        elif variant == "SymmetricGauge2D":
            cfg = SymmetricGauge2D(float(params["B"]))
        elif variant == "CapacitorStack":
            cfg = CapacitorStack(float(params["sigma"]), float(params["pa"]))
        elif variant == "CurrentSheets":
            cfg = CurrentSheets(float(params["J"]), float(params["pa"]))
        elif variant == "CoulombMomentum":
            cfg = CoulombMomentum(float(params["gc"]))
        else:
            raise ConfigurationError(f"unknown or non-serializable variant {variant!r}")
    except KeyError as exc:
        raise ConfigurationError(f"{variant} is missing parameter {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"bad parameters for {variant}: {exc}") from None
    if not np.all(np.isfinite(np.hstack([np.ravel(v) for v in cfg.params().values()]))):
        raise ConfigurationError("config parameters must be finite")
    gt = d.get("gauge_transform")
    if gt is not None:
        try:
            eta = GaugeTransform(tuple((tuple(e), c) for e, c in gt["terms"]))
            cfg = apply_gauge_transform(cfg, eta, float(gt.get("g", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad gauge_transform: {exc}") from None
    return cfg


def _three(v) -> list:
    v = list(v)
    if len(v) != 3:
        raise ConfigurationError("expected a 3-vector")
    return v
