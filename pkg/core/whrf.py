# core/whrf.py
"""
Wishart hypertoroidal random fields (WHRF).

    F(theta) = w(theta)^T J w(theta),   w = (x)_i (cos theta_i, sin theta_i)
    J = X X^dag / m,  X in C^{2^l x m},  Re X, Im X ~ N(0, 1/2)

J is normalized once; F applies no further 1/m, so E[F] = 1 at every point.
Factor i of the Kronecker product is attached to bit i of the index.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate

from core.errors import DomainError, NumericError, ResourceError, UnsupportedRegimeError

logger = logging.getLogger(__name__)

MAX_TORUS_DIM = 12

DEFAULT_LR = 0.1
DEFAULT_MAX_ITERS = 100_000
DEFAULT_TOL = 1e-6


# ----------------------------
# Types
# ----------------------------
@dataclass(frozen=True)
class WishartField:
    l: int
    m: float
    J: np.ndarray

    def __post_init__(self) -> None:
        if self.J.shape != (1 << self.l, 1 << self.l):
            raise DomainError(f"J must be {1 << self.l}x{1 << self.l} for l = {self.l}")
        if np.max(np.abs(self.J - self.J.conj().T)) > 1e-10:
            raise DomainError("J is not Hermitian")

    @property
    def real_part(self) -> np.ndarray:
        # w is real, so only Re(J) contributes to w^T J w
        return np.real(self.J)


def wrap_angles(angles) -> np.ndarray:
    a = np.asarray(angles, dtype=np.float64)
    return (a + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class TorusPoint:
    angles: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "angles", wrap_angles(np.atleast_1d(self.angles)))

    @property
    def l(self) -> int:
        return int(self.angles.size)


# ----------------------------
# Degrees of freedom
# ----------------------------
def dof_from_weights(alpha: Sequence[float], l: int) -> float:
    """m = (|alpha|_1^2 / |alpha|_2^2) * 2^(l-1)."""
    a = np.asarray(alpha, dtype=np.float64)
    if a.size == 0:
        raise DomainError("alpha must be nonempty")
    if np.any(a <= 0):
        raise DomainError("alpha entries must be positive")
    return float(np.sum(a) ** 2 / np.sum(a * a) * 2.0 ** (l - 1))


def overparam_ratio(l: int, m: float) -> float:
    """gamma = l / (2 m)."""
    if m <= 0:
        raise DomainError(f"m must be positive, got {m}")
    return l / (2.0 * m)


def classify_regime(gamma: float) -> str:
    return "overparameterized" if gamma >= 1.0 else "underparameterized"


# ----------------------------
# Sampling and evaluation
# ----------------------------
def sample_wishart(l: int, m_int: int, rng: np.random.Generator) -> WishartField:
    if m_int < 1:
        raise DomainError(f"m must be >= 1, got {m_int}")
    if l > MAX_TORUS_DIM:
        raise ResourceError(f"l = {l} exceeds the dense cap of {MAX_TORUS_DIM}")
    if l < 1:
        raise DomainError("l must be >= 1")
    dim = 1 << l
    x = (rng.standard_normal((dim, m_int)) + 1j * rng.standard_normal((dim, m_int))) * np.sqrt(0.5)
    j = (x @ x.conj().T) / m_int
    j = 0.5 * (j + j.conj().T)
    return WishartField(l, float(m_int), j)


def _factors(angles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return np.cos(angles), np.sin(angles)


def _kron_chain(vectors: Sequence[np.ndarray]) -> np.ndarray:
    # vectors[i] is attached to bit i: later factors become more significant
    out = np.ones(1)
    for v in vectors:
        out = np.kron(v, out)
    return out


def embed_torus(p: TorusPoint) -> np.ndarray:
    c, s = _factors(p.angles)
    return _kron_chain([np.array([c[i], s[i]]) for i in range(p.l)])


def _check_dims(f: WishartField, p: TorusPoint) -> None:
    if f.l != p.l:
        raise DomainError(f"{p.l}-angle point on an l = {f.l} field")


def eval_field(f: WishartField, p: TorusPoint) -> float:
    _check_dims(f, p)
    w = embed_torus(p)
    return float(w @ f.real_part @ w)


def grad_field(f: WishartField, p: TorusPoint) -> np.ndarray:
    _check_dims(f, p)
    c, s = _factors(p.angles)
    base = [np.array([c[i], s[i]]) for i in range(p.l)]
    w = _kron_chain(base)
    jw = f.real_part @ w
    grad = np.empty(p.l)
    for i in range(p.l):
        factors = list(base)
        factors[i] = np.array([-s[i], c[i]])
        grad[i] = 2.0 * float(jw @ _kron_chain(factors))
    return grad


# ----------------------------
# Minima search
# ----------------------------
def find_minimum(
    f: WishartField,
    p0: TorusPoint,
    lr: float = DEFAULT_LR,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    *,
    trace: Optional[List[float]] = None,
) -> Tuple[TorusPoint, float, bool]:
    """
    Backtracking gradient descent on the torus. A trial step that raises F
    halves the step size and is rejected, so accepted energies never increase.
    Accepted steps let the step size recover by 25%, up to 8x the initial lr.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    point = p0
    energy = eval_field(f, point)
    step = float(lr)
    if trace is not None:
        trace.append(energy)
    for _ in range(int(max_iters)):
        g = grad_field(f, point)
        if np.max(np.abs(g)) < tol:
            return point, energy, True
        while True:
            trial = TorusPoint(point.angles - step * g)
            trial_energy = eval_field(f, trial)
            if trial_energy <= energy:
                break
            step *= 0.5
            if step < 1e-300:
                logger.debug("backtracking underflow; stopping search")
                return point, energy, False
        point, energy = trial, trial_energy
        step = min(step * 1.25, 8.0 * lr)
        if trace is not None:
            trace.append(energy)
    converged = bool(np.max(np.abs(grad_field(f, point))) < tol)
    return point, energy, converged


def _random_point(l: int, rng: np.random.Generator) -> TorusPoint:
    return TorusPoint(rng.uniform(-np.pi, np.pi, size=l))


def minima_search_table(
    l: int,
    m: int,
    n_fields: int,
    starts_per_field: int,
    rng: np.random.Generator,
    *,
    lr: float = DEFAULT_LR,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> pd.DataFrame:
    """
    One row per search: field, start, energy, converged.

    Each field gets its own child stream of `rng`, so adding starts never
    reshuffles the fields.
    """
    children = np.random.SeedSequence(int(rng.integers(0, 2**63 - 1))).spawn(n_fields)
    rows = []
    for fi, child in enumerate(children):
        field_rng = np.random.default_rng(child)
        f = sample_wishart(l, m, field_rng)
        for si in range(starts_per_field):
            _, energy, ok = find_minimum(f, _random_point(l, field_rng), lr, max_iters, tol)
            rows.append({"field": fi, "start": si, "energy": energy, "converged": ok})
    return pd.DataFrame(rows, columns=["field", "start", "energy", "converged"])


def minima_histogram(
    l: int,
    m: int,
    n_fields: int,
    starts_per_field: int,
    rng: np.random.Generator,
    *,
    lr: float = DEFAULT_LR,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> List[float]:
    """Converged minima energies over i.i.d. fields and uniform random starts."""
    table = minima_search_table(l, m, n_fields, starts_per_field, rng, lr=lr, max_iters=max_iters, tol=tol)
    return [float(e) for e in table.loc[table["converged"], "energy"]]


def energy_histogram(energies: Sequence[float], bins: int = 40) -> pd.DataFrame:
    # converged energies may round a hair below 0; they belong in the first bin
    e = np.maximum(np.asarray(energies, dtype=np.float64), 0.0)
    upper = float(e.max()) if e.size else 1.0
    counts, edges = np.histogram(e, bins=bins, range=(0.0, upper if upper > 0 else 1.0))
    return pd.DataFrame({"bin_low": edges[:-1], "bin_high": edges[1:], "count": counts.astype(int)})


# ----------------------------
# Asymptotic minima density
# ----------------------------
def _check_regime(m: float, l: int) -> None:
    if m <= l / 2.0:
        raise UnsupportedRegimeError(f"density needs m > l/2 (m = {m}, l = {l})")


def _unnormalized_log_density(e: float, m: float, l: int) -> float:
    return -m * e + (m - l / 2.0) * math.log(e) + l * math.log1p(-2.0 * e)


def density_mode(m: float, l: int) -> float:
    """Smaller root of 2m E^2 - (3m + l) E + (m - l/2) = 0 (the one inside (0, 1/2))."""
    _check_regime(m, l)
    b = 3.0 * m + l
    disc = b * b - 8.0 * m * (m - l / 2.0)
    return (b - math.sqrt(disc)) / (4.0 * m)


def log_density_derivative(e: float, m: float, l: int) -> float:
    return -m + (m - l / 2.0) / e - 2.0 * l / (1.0 - 2.0 * e)


@lru_cache(maxsize=256)
def log_normalizer(m: float, l: int) -> float:
    """ln Z with Z the integral of the unnormalized density over (0, 1/2)."""
    _check_regime(m, l)
    mode = density_mode(m, l)
    peak = _unnormalized_log_density(mode, m, l)
    value, abserr = integrate.quad(
        lambda e: math.exp(_unnormalized_log_density(e, m, l) - peak) if 0.0 < e < 0.5 else 0.0,
        0.0,
        0.5,
        points=[mode],
        epsabs=1e-14,
        epsrel=1e-12,
        limit=500,
    )
    if not value > 0.0 or not math.isfinite(value):
        raise NumericError(f"density normalizer failed (value {value}, error {abserr})")
    return peak + math.log(value)


def asymptotic_log_density(E: float, m: float, l: int) -> float:
    if not 0.0 < E < 0.5:
        raise DomainError(f"energy must lie in (0, 1/2), got {E}")
    _check_regime(m, l)
    return _unnormalized_log_density(E, m, l) - log_normalizer(float(m), int(l))


def density_mass(m: float, l: int) -> float:
    value, _ = integrate.quad(
        lambda e: math.exp(asymptotic_log_density(e, m, l)) if 0.0 < e < 0.5 else 0.0,
        0.0,
        0.5,
        points=[density_mode(m, l)],
        epsabs=1e-14,
        epsrel=1e-12,
        limit=500,
    )
    return float(value)


def density_table(m: float, l: int, points: int = 199) -> pd.DataFrame:
    energies = (np.arange(points) + 1.0) / (2.0 * (points + 1))
    return pd.DataFrame(
        {"energy": energies, "log_density": [asymptotic_log_density(float(e), m, l) for e in energies]}
    )
