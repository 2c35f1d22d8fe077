"""Numerical evaluation of the matrix integral for A₀ = k.

The phase is f(X) = Tr⟨Y,X⟩ + cubic(X), taken from the symbolic action of
:mod:`bvmatrix.master` and compiled to a numpy evaluator.  For Hermitian
negative definite Y the decaying saddle X* = (−2Y/κ)^{1/2} is Hermitian
positive definite and the cycle X = X* + iH (H Hermitian) is admissible:

    f(X* + iH) − f(X*) = −(κ/2)·Tr(X*H²) − i(κ/6)·Tr H³,

so |integrand| is exactly Gaussian there.  Orientation: ∏dX in canonical
order equals det(T)·∏dh, where h lists H by matrix entry (h_ii on the
diagonal, Re H_ij above it, Im H_ij below it); λ = 1 in ϖ = λ∏dX.  Both the
orientation and λ cancel in the normalized integral.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .master import ActionContext, build_action, linear_source
from .quadrature import (LineRule, QuadratureError, evaluation_budget, product_sum, ray_pair_rule,
                         refine, trapezoid_rule)
from .superpoly import SuperPolynomial

DEFAULT_TOL = {1: 1e-10, 2: 1e-6, 3: 1e-6}
#: half-width (in whitened units) of the trapezoid grids
GAUSS_HALF_WIDTH = 8.5


class EngineError(ValueError):
    pass


class DegenerateSaddle(EngineError):
    pass


class ContourError(EngineError):
    """The requested contour does not make Re f → −∞ at infinity."""


# -- numeric layer over the symbolic action --------------------------------------------

class NumericPolynomial:
    """Evaluate a polynomial in the X symbols at complex points, vectorized."""

    def __init__(self, poly: SuperPolynomial, y_values: Optional[np.ndarray] = None, scale=1):
        space = poly.space
        xs = space.ids("X")
        ys = space.ids("Y")
        self.dim = space.block
        self.terms = []
        for mono, c in poly.terms.items():
            coef = complex(c) * scale
            exps = []
            for s in mono:
                if s in xs:
                    exps.append(s - xs.start)
                elif s in ys:
                    if y_values is None:
                        raise EngineError("polynomial depends on Y but no Y values given")
                    coef *= y_values[s - ys.start]
                else:
                    raise EngineError("only X and Y symbols can be evaluated numerically")
            if coef:
                self.terms.append((coef, tuple(exps)))

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[1:], dtype=complex)
        for coef, exps in self.terms:
            t = np.full(pts.shape[1:], coef, dtype=complex)
            for e in exps:
                t = t * pts[e]
            out = out + t
        return out


def _symbolic_grad_hess(poly: SuperPolynomial):
    xs = list(poly.space.ids("X"))
    grad = [poly.derivative(x) for x in xs]
    hess = [[g.derivative(x) for x in xs] for g in grad]
    return grad, hess


@dataclass
class SpectralParameter:
    """Y ∈ gl_N(k) as a complex matrix, with eigen-data when it is diagonalizable."""

    matrix: np.ndarray
    eigenvalues: Optional[np.ndarray] = None
    eigenvectors: Optional[np.ndarray] = None
    hermitian: bool = False
    negative_definite: bool = False

    @classmethod
    def from_matrix(cls, Y) -> "SpectralParameter":
        Y = np.atleast_2d(np.asarray(Y, dtype=complex))
        if Y.shape[0] != Y.shape[1]:
            raise EngineError("Y must be square")
        herm = bool(np.allclose(Y, Y.conj().T, atol=1e-14 * max(1.0, np.abs(Y).max())))
        if herm:
            ev, V = np.linalg.eigh((Y + Y.conj().T) / 2)
            ev = ev.astype(complex)
        else:
            ev, V = np.linalg.eig(Y)
            if np.linalg.cond(V) > 1e10:
                ev, V = None, None
        sp = cls(Y, ev, V, herm, bool(herm and ev is not None and np.all(ev.real < 0)))
        if ev is not None:
            sp._check_eigenvalues()
        return sp

    @classmethod
    def diagonal(cls, ys: Sequence[float]) -> "SpectralParameter":
        return cls.from_matrix(np.diag(np.asarray(ys, dtype=complex)))

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    def _check_eigenvalues(self):
        """Characteristic-polynomial residual at each eigenvalue, relative to ‖Y‖^N."""
        coeffs = np.poly(self.matrix)
        scale = max(1.0, float(np.abs(self.matrix).max())) ** self.N
        worst = max(abs(np.polyval(coeffs, lam)) for lam in self.eigenvalues) / scale
        if worst > 1e-12:
            raise EngineError(f"eigenvalue data inconsistent with Y (residual {worst:.3g})")

    def entries(self) -> np.ndarray:
        """Values of the symbols Y[1;i,j] in canonical order."""
        return self.matrix.reshape(-1)

    def as_dict(self) -> dict:
        return {"re": self.matrix.real.tolist(), "im": self.matrix.imag.tolist()}


def _require_scalar_algebra(ctx: ActionContext) -> Fraction:
    if ctx.r != 1:
        raise EngineError("numeric integration is implemented for A₀ = k (r = 1) only")
    kappa = ctx.tensor.components_odd3[0][0][0]
    if not kappa:
        raise EngineError("the cubic coupling vanishes; there is no decaying saddle")
    return Fraction(kappa)


@dataclass
class Phase:
    """f = Tr⟨Y,X⟩ + coupling·cubic, compiled for numeric evaluation."""

    ctx: ActionContext
    Y: SpectralParameter
    coupling: float = 1.0
    cubic_scale: float = 1.0  # 0 switches the cubic term off

    def __post_init__(self):
        self.kappa = float(_require_scalar_algebra(self.ctx)) * self.coupling * self.cubic_scale
        if self.Y.N != self.ctx.N:
            raise EngineError(f"Y is {self.Y.N}×{self.Y.N} but N = {self.ctx.N}")
        yv = self.Y.entries()
        poly = linear_source(self.ctx) + self.ctx.cubic_part.scale(
            Fraction(self.coupling * self.cubic_scale).limit_denominator(10 ** 12))
        self.poly = poly
        self.f = NumericPolynomial(poly, yv)
        grad, hess = _symbolic_grad_hess(poly)
        self._grad = [NumericPolynomial(g, yv) for g in grad]
        self._hess = [[NumericPolynomial(h, yv) for h in row] for row in hess]

    @property
    def N(self):
        return self.ctx.N

    def gradient(self, x: np.ndarray) -> np.ndarray:
        pts = x.reshape(-1, 1)
        return np.array([g(pts)[0] for g in self._grad])

    def hessian(self, x: np.ndarray) -> np.ndarray:
        pts = x.reshape(-1, 1)
        return np.array([[h(pts)[0] for h in row] for row in self._hess])

    def value(self, x: np.ndarray) -> complex:
        return complex(self.f(x.reshape(-1, 1))[0])


# -- saddle points ------------------------------------------------------------------

@dataclass
class CriticalPoint:
    X: np.ndarray
    signs: tuple
    residual: float
    decaying: bool


def critical_points(ctx: ActionContext, Y: SpectralParameter, coupling: float = 1.0,
                    tol: float = 1e-12) -> List[CriticalPoint]:
    """Stationary points of f; the decaying one (all square roots positive) first.

    Initial guesses come from the eigen-decomposition of Y; each is polished by
    Newton steps on the exact gradient of the compiled action.
    """
    ph = Phase(ctx, Y, coupling)
    if Y.eigenvalues is None:
        raise EngineError("Y is not diagonalizable")
    ev, V = Y.eigenvalues, Y.eigenvectors
    scale = max(1.0, float(np.abs(ev).max()))
    if np.any(np.abs(ev) < 1e-12 * scale):
        raise DegenerateSaddle("Y has a zero eigenvalue: the critical point is degenerate")
    Vinv = np.linalg.inv(V)
    roots = np.sqrt(-2 * ev / ph.kappa)
    out = []
    for signs in product((1, -1), repeat=Y.N):
        X = V @ np.diag(np.array(signs) * roots) @ Vinv
        x = X.reshape(-1)
        for _ in range(6):
            g = ph.gradient(x)
            if np.linalg.norm(g) < tol * scale:
                break
            x = x - np.linalg.solve(ph.hessian(x), g)
        res = float(np.linalg.norm(ph.gradient(x)))
        if res > 1e-8 * scale:
            raise DegenerateSaddle(f"Newton polish failed to converge (residual {res:.3g})")
        X = x.reshape(Y.N, Y.N)
        decaying = all(s > 0 for s in signs) and Y.negative_definite
        out.append(CriticalPoint(X, signs, res, decaying))
    return out


def decaying_saddle(ctx: ActionContext, Y: SpectralParameter, coupling: float = 1.0) -> CriticalPoint:
    if not Y.negative_definite:
        raise EngineError("integration requires a Hermitian negative definite Y")
    return critical_points(ctx, Y, coupling)[0]


# -- contours --------------------------------------------------------------------------

def hermitian_frame(N: int) -> np.ndarray:
    """T_real: the complex-linear map h ↦ entries of the Hermitian matrix H(h)."""
    d = N * N
    T = np.zeros((d, d), dtype=complex)
    for i, j in product(range(N), repeat=2):
        k = i * N + j
        if i == j:
            T[k, k] = 1
        elif i < j:
            T[k, k] = 1                      # Re H_ij
            T[k, j * N + i] = 1j             # Im H_ij (stored below the diagonal)
        else:
            T[k, i * N + j] = -1j            # H_ji = conj(H_ij)
            T[k, j * N + i] = 1
    return T


@dataclass
class Contour:
    """A cycle for the integral, with quadrature settings.

    kind: "hermitian" (X = center + i·H, whitened trapezoid),
          "rays" (N = 1: two rays center + s·e^{±iφ}, exp-sinh rule),
          "real" (X Hermitian, for Gaussian weights).
    """

    kind: str
    center: np.ndarray
    angle: float = math.pi / 2
    scale: float = 1.0
    scheme: str = "trapezoid"
    rel_tol: float = 1e-10

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "center_re": np.real(self.center).tolist(),
            "center_im": np.imag(self.center).tolist(),
            "ray_phases": [self.angle, -self.angle] if self.kind == "rays" else None,
            "scale": self.scale,
            "scheme": self.scheme,
            "rel_tol": self.rel_tol,
        }


@dataclass
class QuadratureResult:
    """value = scaled_value · e^{log_scale}; value may underflow for extreme Y."""

    value: complex
    abs_error_estimate: float
    evaluations: int
    contour: Optional[Contour]
    method: str
    log_scale: float = 0.0
    scaled_value: complex = 0j
    scaled_error: float = 0.0
    extra: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.scaled_value):
            raise EngineError("non-finite quadrature value")
        if self.abs_error_estimate < 0:
            raise EngineError("negative error estimate")

    @classmethod
    def scaled(cls, scaled_value, scaled_error, log_scale, evaluations, contour, method, **extra):
        factor = math.exp(log_scale) if log_scale < 700 else float("inf")
        return cls(complex(scaled_value) * factor, float(scaled_error) * factor, int(evaluations),
                   contour, method, float(log_scale), complex(scaled_value), float(scaled_error),
                   dict(extra))

    @property
    def rel_error(self) -> float:
        return self.scaled_error / abs(self.scaled_value) if self.scaled_value else float("inf")

    def as_dict(self) -> dict:
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "abs_error_estimate": self.abs_error_estimate,
            "scaled_value": {"re": self.scaled_value.real, "im": self.scaled_value.imag},
            "log_scale": self.log_scale,
            "evaluations": self.evaluations,
            "method": self.method,
            "contour": self.contour.describe() if self.contour else None,
            **{k: v for k, v in self.extra.items()},
        }


def _check_decay(logf: Callable[[np.ndarray], np.ndarray], center: np.ndarray,
                 directions: np.ndarray, scale: float, f0: float) -> None:
    """Re f must fall far below Re f(center) along each ray, and keep falling."""
    for dvec in directions:
        radii = scale * np.array([10.0, 20.0, 40.0])
        pts = center[:, None] + dvec[:, None] * radii[None, :]
        re = np.real(logf(pts)) - f0
        if not (re[2] < re[1] < re[0] and re[2] < -30):
            raise ContourError("contour leaves the decay sector: Re f does not tend to −∞")


# -- Gaussian normalization --------------------------------------------------------------

def _saddle_setup(ctx, Y, coupling=1.0, cubic_scale=1.0):
    ph = Phase(ctx, Y, coupling, cubic_scale)
    cp = decaying_saddle(ctx, Y, coupling)
    x0 = cp.X.reshape(-1)
    T = 1j * hermitian_frame(ctx.N)
    H = ph.hessian(x0)
    M = -(T.T @ H @ T)
    if np.abs(M.imag).max() > 1e-9 * max(1.0, np.abs(M).max()):
        raise EngineError("saddle quadratic form is not real on the Hermitian slice")
    M = (M.real + M.real.T) / 2
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise DegenerateSaddle("Hessian is degenerate or not decaying on the slice") from None
    return ph, cp, x0, T, M, L


def gaussian_normalization(ctx: ActionContext, Y: SpectralParameter, coupling: float = 1.0
                           ) -> QuadratureResult:
    """F_[2] = e^{f(X*)}·det T·(2π)^{d/2}·det(M)^{−1/2} with M = −TᵀHess T > 0."""
    ph, cp, x0, T, M, L = _saddle_setup(ctx, Y, coupling)
    d = len(x0)
    f0 = ph.value(x0)
    prefactor = np.linalg.det(T) * (2 * math.pi) ** (d / 2) / np.prod(np.diag(L))
    value = prefactor * np.exp(1j * f0.imag)
    return QuadratureResult.scaled(value, 0.0, f0.real, 0, None, "gaussian-closed-form",
                                   saddle=np.real(cp.X).tolist(), f_star=f0.real)


# -- direct integration --------------------------------------------------------------------

def default_contour(ctx: ActionContext, Y: SpectralParameter, angle: float = math.pi / 2,
                    rel_tol: Optional[float] = None, coupling: float = 1.0) -> Contour:
    cp = decaying_saddle(ctx, Y, coupling)
    tol = rel_tol if rel_tol is not None else DEFAULT_TOL.get(ctx.N, 1e-6)
    if ctx.N == 1:
        curvature = float(Phase(ctx, Y, coupling).hessian(cp.X.reshape(-1))[0, 0].real)
        return Contour("rays", cp.X.reshape(-1), angle, 1 / math.sqrt(curvature), "exp-sinh", tol)
    if abs(angle - math.pi / 2) > 1e-15:
        raise ContourError("rotated rays are only available for N = 1")
    return Contour("hermitian", cp.X.reshape(-1), math.pi / 2, 1.0, "trapezoid", tol)


def _integrate_shifted(ctx, Y, contour=None, coupling=1.0, budget=None):
    """Return (refinement outcome, log shift, contour) for F = e^{shift}·value."""
    if ctx.N > 2:
        raise EngineError("direct quadrature is limited to N ≤ 2; use eigenvalue_reduction")
    ph, cp, x0, T, M, L = _saddle_setup(ctx, Y, coupling)
    contour = contour or default_contour(ctx, Y, coupling=coupling)
    f0 = ph.value(x0)
    shift = f0.real

    if contour.kind == "rays":
        if ctx.N != 1:
            raise ContourError("ray contours are implemented for N = 1")
        c = complex(contour.center[0])
        phi = contour.angle
        dirs = np.array([[np.exp(1j * phi)], [np.exp(-1j * phi)]])
        _check_decay(ph.f, np.array([c]), dirs, contour.scale, shift)

        def fn(pts):
            return np.exp(ph.f(pts) - shift)

        def rules(level):
            return [ray_pair_rule(0.5 ** (level + 1), c, phi, contour.scale)]

        out = refine(rules, fn, contour.rel_tol, min_level=2, max_level=8, budget=budget)
        return out, shift, contour, 1.0

    if contour.kind != "hermitian":
        raise ContourError(f"unknown contour kind {contour.kind!r}")
    # X = X* + T W u with W = L^{-T}: the exponent's real part is −|u|²/2
    W = np.linalg.inv(L).T
    A = T @ W
    dirs = np.concatenate([A.T, -A.T])
    _check_decay(ph.f, x0, dirs, 1.0, shift)
    jac = 1.0 / np.prod(np.diag(L))
    d = len(x0)

    def fn(u):
        X = x0[:, None] + A @ u
        return np.exp(ph.f(X) - shift)

    def rules(level):
        h = 1.0 / 2 ** level
        return [trapezoid_rule(h, GAUSS_HALF_WIDTH)] * d

    out = refine(rules, fn, contour.rel_tol, min_level=1, max_level=3, budget=budget)
    return out, shift, contour, np.linalg.det(T) * jac


def integrate_raw(ctx: ActionContext, Y: SpectralParameter, contour: Optional[Contour] = None,
                  coupling: float = 1.0, budget: Optional[int] = None) -> QuadratureResult:
    """F(Y) = ∫ exp(Tr⟨Y,X⟩ + cubic) ∏dX over the chosen cycle."""
    _require_scalar_algebra(ctx)
    out, shift, contour, factor = _integrate_shifted(ctx, Y, contour, coupling, budget)
    return QuadratureResult.scaled(out.value * factor, out.error * abs(factor), shift,
                                   out.evaluations, contour, contour.scheme, level=out.level)


def integrate_normalized(ctx: ActionContext, Y: SpectralParameter, contour: Optional[Contour] = None,
                         coupling: float = 1.0, budget: Optional[int] = None) -> QuadratureResult:
    """F̂(Y) = F(Y) / F_[2](Y)."""
    raw = integrate_raw(ctx, Y, contour, coupling, budget)
    g = gaussian_normalization(ctx, Y, coupling)
    ratio = raw.scaled_value / g.scaled_value * math.exp(raw.log_scale - g.log_scale)
    err = raw.scaled_error / abs(g.scaled_value) * math.exp(raw.log_scale - g.log_scale)
    return QuadratureResult(ratio, err, raw.evaluations, raw.contour, raw.method, 0.0, ratio, err,
                            {"gaussian": g.as_dict()["scaled_value"], "gaussian_log_scale": g.log_scale})


# -- eigenvalue reduction --------------------------------------------------------------------

def _vandermonde(x: np.ndarray) -> np.ndarray:
    """∏_{i<j}(x_j − x_i) along axis 0."""
    out = np.ones(x.shape[1:], dtype=x.dtype)
    for i in range(x.shape[0]):
        for j in range(i + 1, x.shape[0]):
            out = out * (x[j] - x[i])
    return out


def _vandermonde_scalar(ys) -> complex:
    return complex(_vandermonde(np.asarray(ys, dtype=complex).reshape(-1, 1))[0])


def _kernel_integrand(ys: np.ndarray, potential: Callable[[np.ndarray], np.ndarray], shift: float):
    """x ↦ Δ(x)·det[e^{y_i x_j + p(x_j)}]·e^{−shift}, computed on stacked points."""
    N = len(ys)

    def fn(x):
        px = potential(x)
        # column j carries its own potential; spread the shift evenly across columns
        E = np.exp(ys[:, None, None] * x[None, :, :] + px[None, :, :] - shift / N)
        E = np.moveaxis(E, -1, 0)  # (M, N, N)
        return _vandermonde(x) * np.linalg.det(E)

    return fn


def _reduction_gaussian_sum(ys: np.ndarray, h: float) -> complex:
    pot = lambda x: -0.5 * x ** 2
    shift = float(np.sum(ys.real ** 2)) / 2
    lo, hi = ys.real.min() - 9.0, ys.real.max() + 9.0
    c = (lo + hi) / 2
    rule = trapezoid_rule(h, (hi - lo) / 2, center=c)
    return product_sum(_kernel_integrand(ys, pot, shift), [rule] * len(ys)), shift


def direct_gaussian(N: int, Y: SpectralParameter) -> complex:
    """∫_{Herm} exp(Tr(YX) − ½Tr X²) ∏dX in closed form (canonical orientation)."""
    ctx = build_action(_scalar_q1(), N)
    ph = Phase(ctx, Y, cubic_scale=0.0)
    quad = SuperPolynomial(ctx.space, {})
    for i, j in product(range(N), repeat=2):
        quad = quad + ctx.space.X(0, i, j) * ctx.space.X(0, j, i)
    Tr = hermitian_frame(N)
    d = N * N
    zero = np.zeros(d, dtype=complex)
    b = Tr.T @ ph.gradient(zero)
    Hq = np.array([[complex(quad.derivative(x1).derivative(x2).terms.get((), 0)) for x2 in range(d)]
                   for x1 in range(d)])
    M0 = (Tr.T @ Hq @ Tr) / 2
    if np.abs(M0.imag).max() > 1e-12 or np.abs(b.imag).max() > 1e-12:
        raise EngineError("Gaussian calibration needs a Hermitian Y")
    M0, b = M0.real, b.real
    expo = 0.5 * b @ np.linalg.solve(M0, b)
    return np.linalg.det(Tr) * (2 * math.pi) ** (d / 2) / math.sqrt(np.linalg.det(M0)) * np.exp(expo)


@lru_cache(maxsize=None)
def _scalar_q1():
    from .library import build
    return build("q1")


#: calibration spectra, one per N; the second entry is the independent check
CALIBRATION_Y = {2: ((-1.0, -3.0), (-2.0, -5.0)), 3: ((-1.0, -3.0, -5.0), (-2.0, -3.5, -6.0))}


@dataclass(frozen=True)
class Calibration:
    N: int
    constant: complex
    check_rel_error: float
    calibration_y: tuple
    check_y: tuple


@lru_cache(maxsize=None)
def calibrate_reduction(N: int) -> Calibration:
    """Fix C_N in F = C_N/Δ(y)·∫Δ(x)det[e^{y_i x_j}]∏e^{p(x_j)}dx by the Gaussian case."""
    if N == 1:
        return Calibration(1, 1.0 + 0j, 0.0, (), ())
    if N not in CALIBRATION_Y:
        raise EngineError("eigenvalue reduction is calibrated for N ≤ 3")
    y_cal, y_chk = CALIBRATION_Y[N]

    def reduced(ys):
        ys = np.asarray(ys, dtype=complex)
        s1, shift = _reduction_gaussian_sum(ys, 0.5)
        s2, _ = _reduction_gaussian_sum(ys, 0.25)
        if abs(s1 - s2) > 1e-12 * abs(s2):
            raise EngineError("Gaussian reduction quadrature did not converge")
        return s2 * np.exp(shift) / _vandermonde_scalar(ys)

    const = direct_gaussian(N, SpectralParameter.diagonal(y_cal)) / reduced(y_cal)
    chk_direct = direct_gaussian(N, SpectralParameter.diagonal(y_chk))
    rel = abs(const * reduced(y_chk) - chk_direct) / abs(chk_direct)
    if rel > 1e-10:
        raise EngineError(f"calibration check failed (relative deviation {rel:.3g})")
    return Calibration(N, complex(const), float(rel), y_cal, y_chk)


def eigenvalue_reduction(ctx: ActionContext, Y: SpectralParameter, rel_tol: Optional[float] = None,
                         coupling: float = 1.0, budget: Optional[int] = None,
                         kernel: str = "product") -> QuadratureResult:
    """N-dimensional eigenvalue integral, each x_j on a vertical line.

    kernel="det" integrates Δ(x)·det[e^{y_i x_j}]·∏e^{p(x_j)} with all x_j on
    the common line Re x = c.  That integrand is symmetric in the x_j, so it
    equals N!·Δ(x)·∏e^{y_j x_j + p(x_j)} integrated over the same lines; in
    this "product" form each x_j can sit on the line through its own saddle,
    which avoids the cancellation between permutation terms of the det.
    """
    kappa = float(_require_scalar_algebra(ctx)) * coupling
    N = ctx.N
    if N > 3:
        raise EngineError("eigenvalue reduction supports N ≤ 3")
    if not Y.negative_definite:
        raise EngineError("eigenvalue reduction requires a Hermitian negative definite Y")
    if Y.eigenvalues is None or not np.allclose(Y.matrix, np.diag(np.diag(Y.matrix))):
        raise EngineError("eigenvalue reduction requires a diagonal Y")
    if kernel not in ("product", "det"):
        raise EngineError(f"unknown kernel {kernel!r}")
    ys = np.diag(Y.matrix).real.astype(complex)
    spread = max(1.0, float(np.abs(ys).max()))
    gaps = [abs(ys[i] - ys[j]) for i in range(N) for j in range(i + 1, N)]
    if gaps and min(gaps) < 1e-6 * spread:
        raise EngineError("coincident eigenvalues: the reduction kernel is 0/0")
    cal = calibrate_reduction(N)
    # one-variable potential read off the symbolic action at X = x·E_11
    cubic1 = NumericPolynomial(ctx.cubic_part, scale=coupling)
    e11 = np.zeros((ctx.space.block, 1), dtype=complex)
    e11[0, 0] = 1.0
    k1 = complex(cubic1(e11)[0]) * 6
    if abs(k1 - kappa) > 1e-12 * abs(kappa):
        raise EngineError("cubic action is not of the form κ·Tr X³/6")
    tol = rel_tol if rel_tol is not None else 1e-10

    if kernel == "det":
        c = math.sqrt(-2 * float(ys.real.mean()) / kappa)
        centers = np.full(N, c)
        shift = float(np.sum(ys.real) * c + N * kappa * c ** 3 / 6)
        fn = _kernel_integrand(ys, lambda x: kappa * x ** 3 / 6, shift)
        multiplicity = 1
    else:
        centers = np.sqrt(-2 * ys.real / kappa)
        fstar = ys.real * centers + kappa * centers ** 3 / 6
        shift = float(np.sum(fstar))
        yv, fv = ys.real[:, None], fstar[:, None]

        def fn(x):
            return _vandermonde(x) * np.exp(np.sum(yv * x + kappa * x ** 3 / 6 - fv, axis=0))
        multiplicity = math.factorial(N)
    widths = 1 / np.sqrt(kappa * centers)

    def rules(level):
        return [trapezoid_rule(w / 2 ** level, GAUSS_HALF_WIDTH * w, center=c0, direction=1j)
                for c0, w in zip(centers, widths)]

    out = refine(rules, fn, tol, min_level=1, max_level=4, budget=budget)
    # dx_j = i dt_j is carried by the rule weights
    factor = cal.constant * multiplicity / _vandermonde_scalar(ys)
    contour = Contour("eigen-lines", centers.astype(complex), math.pi / 2, float(widths.max()),
                      "trapezoid", tol)
    return QuadratureResult.scaled(out.value * factor, out.error * abs(factor), shift, out.evaluations,
                                   contour, f"eigenvalue-trapezoid-{kernel}",
                                   calibration=complex(cal.constant).real,
                                   calibration_im=complex(cal.constant).imag,
                                   calibration_check=cal.check_rel_error)


def normalized_from_reduction(ctx: ActionContext, Y: SpectralParameter, coupling: float = 1.0,
                              rel_tol: Optional[float] = None, kernel: str = "product"
                              ) -> QuadratureResult:
    red = eigenvalue_reduction(ctx, Y, rel_tol, coupling, kernel=kernel)
    g = gaussian_normalization(ctx, Y, coupling)
    scale = math.exp(red.log_scale - g.log_scale)
    ratio = red.scaled_value / g.scaled_value * scale
    err = red.scaled_error / abs(g.scaled_value) * scale
    return QuadratureResult(ratio, err, red.evaluations, red.contour, red.method, 0.0, ratio, err,
                            dict(red.extra))


# -- asymptotics -------------------------------------------------------------------------------

def saddle_parameter(Y: SpectralParameter) -> float:
    """ζ = a³/2 with a = sqrt(−2ȳ), ȳ the mean eigenvalue (unit coupling)."""
    ybar = float(np.mean(Y.eigenvalues.real))
    if ybar >= 0:
        raise EngineError("saddle parameter needs a negative mean eigenvalue")
    return (-2 * ybar) ** 1.5 / 2


@dataclass
class ExpansionFit:
    order: int
    coefficients: List[float]       # F̂ ≈ Σ c_k ζ^{−k}
    log_coefficients: List[float]   # log F̂ ≈ Σ b_k ζ^{−k}
    residual_rms: float
    condition_number: float
    samples: List[dict]

    def as_dict(self) -> dict:
        return asdict(self)


def _exp_series(b: Sequence[float], order: int) -> List[float]:
    """Coefficients of exp(Σ b_k t^k) up to t^order."""
    c = [0.0] * (order + 1)
    c[0] = math.exp(b[0])
    # c' = b'·c  ⇒  n c_n = Σ_{k=1}^{n} k b_k c_{n−k}
    for n in range(1, order + 1):
        c[n] = sum(k * b[k] * c[n - k] for k in range(1, n + 1) if k < len(b)) / n
    return c


def asymptotic_expansion(ctx: ActionContext, Ys: Sequence[SpectralParameter], order: int,
                         coupling: float = 1.0, max_condition: float = 1e12,
                         values: Optional[Sequence[complex]] = None) -> ExpansionFit:
    """Least-squares fit of log F̂ in powers of 1/ζ along a ray of Y's."""
    if ctx.N > 2:
        raise EngineError("asymptotic fits use N ≤ 2")
    if len(Ys) <= order:
        raise EngineError("need more samples than fitted coefficients")
    zetas = np.array([saddle_parameter(Y) for Y in Ys])
    if values is None:
        values = [integrate_normalized(ctx, Y, coupling=coupling).value for Y in Ys]
    logs = np.array([np.log(complex(v)) for v in values])
    if np.abs(logs.imag).max() > 1e-8:
        raise EngineError("normalized integral is not real and positive along the ray")
    t = 1 / zetas
    V = np.vander(t, order + 1, increasing=True)
    cond = float(np.linalg.cond(V))
    if cond > max_condition:
        raise EngineError(f"ill-conditioned fit (condition number {cond:.3g})")
    b, *_ = np.linalg.lstsq(V, logs.real, rcond=None)
    resid = logs.real - V @ b
    samples = [{"zeta": float(z), "F_hat": float(complex(v).real)} for z, v in zip(zetas, values)]
    return ExpansionFit(order, _exp_series(list(b), order), [float(x) for x in b],
                        float(np.sqrt(np.mean(resid ** 2))), cond, samples)


# -- reports -------------------------------------------------------------------------------------

def scan_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y", "value_re", "value_im", "err"])
    for r in rows:
        w.writerow([repr(r["y"]), repr(r["value"].real), repr(r["value"].imag), repr(r["err"])])
    return buf.getvalue()


def parse_scan(spec: str) -> List[float]:
    """"start:stop:count" → evenly spaced values, endpoints included."""
    try:
        a, b, n = spec.split(":")
        return [float(v) for v in np.linspace(float(a), float(b), int(n))]
    except ValueError:
        raise EngineError(f"bad scan specification {spec!r}; expected start:stop:count") from None
