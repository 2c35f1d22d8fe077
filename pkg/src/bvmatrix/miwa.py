"""Spectral (Miwa) coordinates for the normalized integral and a KdV probe.

With Λ = X* = (−2Y)^{1/2} the coordinates are t_k = c_k·Tr Λ^{−(2k+1)}.
The constants c₀, c₁ are calibrated from the lowest terms of log F̂ at N = 2;
the probe then fits log F̂ on an N = 3 eigenvalue grid by polynomials in the
t_k of weight ≤ 3n (n = fit order) and evaluates the KdV residual

    U_{t₁} − U·U_{t₀} − U_{t₀t₀t₀}/12,     U = ∂²F/∂t₀²,

on the fitted series.  Only three of the t_k are independent on an N = 3
grid, so the order-3 fit is ill-conditioned and its condition number is
reported alongside the residuals; a wide eigenvalue range keeps it usable.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .engine import EngineError, SpectralParameter, normalized_from_reduction
from .master import ActionContext

# t_k has weight 2k+1 in Λ^{-1}
WEIGHTS = (1, 3, 5, 7, 9, 11)


def spectral_matrix(Y: SpectralParameter) -> np.ndarray:
    """Λ = (−2Y)^{1/2} on the branch with positive eigenvalues."""
    if Y.eigenvalues is None:
        raise EngineError("Y is not diagonalizable")
    if np.any(np.abs(Y.eigenvalues) < 1e-14):
        raise EngineError("Y is singular")
    V = Y.eigenvectors
    return V @ np.diag(np.sqrt(-2 * Y.eigenvalues)) @ np.linalg.inv(V)


def miwa_variables(Y: SpectralParameter, kmax: int, constants: Optional[Sequence[float]] = None
                   ) -> List[complex]:
    """t_k = c_k·Tr Λ^{−(2k+1)} for k = 0..kmax (c_k = 1 when not supplied)."""
    lam = np.linalg.inv(spectral_matrix(Y))
    out = []
    for k in range(kmax + 1):
        c = 1.0 if constants is None or k >= len(constants) else constants[k]
        out.append(complex(c * np.trace(np.linalg.matrix_power(lam, 2 * k + 1))))
    return out


def _weighted_monomials(max_weight: int, nvars: int) -> List[Tuple[int, ...]]:
    """Exponent vectors of weight 3j (j = 1..max_weight/3) in t₀..t_{nvars−1}."""
    out = []
    bounds = [max_weight // w for w in WEIGHTS[:nvars]]
    for e in itertools.product(*[range(b + 1) for b in bounds]):
        wt = sum(ei * wi for ei, wi in zip(e, WEIGHTS))
        if wt and wt % 3 == 0 and wt <= max_weight:
            out.append(e)
    return sorted(out, key=lambda e: (sum(ei * wi for ei, wi in zip(e, WEIGHTS)), e))


def _design(ts: np.ndarray, monos) -> np.ndarray:
    return np.array([[np.prod([t[i] ** e[i] for i in range(len(e))]) for e in monos] for t in ts])


@dataclass
class MiwaCalibration:
    c0: float
    c1: float
    coefficient_t0_cubed: float
    coefficient_t1: float
    residual_rms: float
    grid: List[Tuple[float, float]]

    def as_dict(self) -> dict:
        return asdict(self)


def calibrate_miwa(ctx2: ActionContext, grid: Optional[Sequence[Tuple[float, float]]] = None
                   ) -> MiwaCalibration:
    """Match log F̂ at N = 2 to β₁(TrΛ⁻¹)³ + β₂TrΛ⁻³ + (weight-6 terms).

    With F = t₀³/6 + t₁/24 + … this gives c₀ = (6β₁)^{1/3}, c₁ = 24β₂.
    """
    if ctx2.N != 2:
        raise EngineError("Miwa calibration uses N = 2")
    if grid is None:
        aa = np.linspace(5.0, 9.0, 5)
        grid = [(-a * a / 2, -b * b / 2) for a, b in itertools.combinations(aa, 2)]
    monos = _weighted_monomials(6, 3)  # t₀, t₁, t₂ reach weight 6
    ts, logs = [], []
    for ys in grid:
        Y = SpectralParameter.diagonal(ys)
        ts.append(np.real(miwa_variables(Y, 2)))
        logs.append(np.log(normalized_from_reduction(ctx2, Y).value).real)
    D = _design(np.array(ts), monos)
    beta, *_ = np.linalg.lstsq(D, np.array(logs), rcond=None)
    coef = dict(zip(monos, beta))
    b1, b2 = coef[(3, 0, 0)], coef[(0, 1, 0)]
    resid = float(np.sqrt(np.mean((D @ beta - np.array(logs)) ** 2)))
    return MiwaCalibration(float(np.cbrt(6 * b1)), float(24 * b2), float(b1), float(b2), resid,
                           [tuple(map(float, g)) for g in grid])


class _Series:
    """A polynomial in (t₀, t₁, …) held as {exponent tuple: coefficient}."""

    def __init__(self, terms: Dict[Tuple[int, ...], float]):
        self.terms = {e: c for e, c in terms.items() if c}

    def diff(self, i: int) -> "_Series":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = out.get(tuple(f), 0.0) + c * e[i]
        return _Series(out)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        val = np.zeros(t.shape[0])
        for e, c in self.terms.items():
            val = val + c * np.prod(t ** np.array(e), axis=1)
        return val


@dataclass
class KdVProbe:
    orders: List[int]
    relative_residuals: List[float]
    absolute_residuals: List[float]
    fit_residuals: List[float]
    monotone: bool
    calibration: dict
    grid_size: int
    condition_numbers: List[float]

    def as_dict(self) -> dict:
        return asdict(self)


def kdv_probe(ctx2: ActionContext, ctx3: ActionContext, orders: Sequence[int] = (1, 2, 3),
              grid: Optional[Sequence[Tuple[float, float, float]]] = None) -> KdVProbe:
    """KdV residual of the fitted truncated log F̂ on an N = 3 eigenvalue grid."""
    if ctx3.N != 3:
        raise EngineError("the KdV probe samples N = 3")
    cal = calibrate_miwa(ctx2)
    # higher constants only rescale fitted coefficients; use the double-factorial pattern
    nvars = (3 * max(orders) - 1) // 2 + 1
    consts = [cal.c0, cal.c1] + [-float(np.prod(np.arange(2 * k - 1, 0, -2))) for k in range(2, nvars)]
    if grid is None:
        aa = np.linspace(5.0, 30.0, 12)
        grid = [tuple(-a * a / 2 for a in trip) for trip in itertools.combinations(aa, 3)]
    ts, logs = [], []
    for ys in grid:
        Y = SpectralParameter.diagonal(ys)
        ts.append(np.real(miwa_variables(Y, nvars - 1, consts)))
        logs.append(np.log(normalized_from_reduction(ctx3, Y).value).real)
    ts, logs = np.array(ts), np.array(logs)
    rel, ab, fits, conds = [], [], [], []
    for n in orders:
        k = (3 * n - 1) // 2 + 1  # coordinates t_k with 2k+1 ≤ 3n
        monos = [e + (0,) * (nvars - k) for e in _weighted_monomials(3 * n, k)]
        D = _design(ts, monos)
        beta, *_ = np.linalg.lstsq(D, logs, rcond=None)
        conds.append(float(np.linalg.cond(D)))
        fits.append(float(np.sqrt(np.mean((D @ beta - logs) ** 2))))
        F = _Series(dict(zip(monos, beta)))
        U = F.diff(0).diff(0)
        Ut1, Ut0, Uttt = U.diff(1), U.diff(0), U.diff(0).diff(0).diff(0)
        u, a1, a2, a3 = U(ts), Ut1(ts), Ut0(ts), Uttt(ts)
        R = a1 - u * a2 - a3 / 12
        scale = np.abs(a1) + np.abs(u * a2) + np.abs(a3 / 12)
        ab.append(float(np.sqrt(np.mean(R ** 2))))
        rel.append(float(np.sqrt(np.mean(R ** 2)) / max(np.sqrt(np.mean(scale ** 2)), 1e-300)))
    monotone = all(x > y for x, y in zip(rel, rel[1:]))
    return KdVProbe(list(orders), rel, ab, fits, monotone, cal.as_dict(), len(grid), conds)
