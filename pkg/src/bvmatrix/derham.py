"""Polyvector↔form dictionary, twisted de Rham differential and the form Ψ(X).

Forms on ΠA₁⊗gl_N are superpolynomials in X (even), Y (even parameters) and
dX (odd).  A :class:`TwistedForm` stands for ``e^S · body`` with S a function
of X and Y; its differential is ``e^S (d body + dS ∧ body)``, so exponentials
never need to be expanded.

Contraction with ∂/∂X[α;i,j] is the left derivative in dX[α;i,j]; under
γ ↦ γ⊢ϖ the polyvector generator P[α;i,j] acts as contraction with
∂/∂X[α;j,i] (the index transpose of the coordinate pairing).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional

from .master import ActionContext, linear_source
from .algebra import dual_even_basis, matrix_extension
from .superpoly import Monomial, SuperPolynomial, SymbolSpace, bv_laplacian

VectorField = Dict[int, SuperPolynomial]  # X-id -> component

#: d(γ⊢ϖ) = DICTIONARY_SIGN · (Δγ)⊢ϖ, for every polyvector degree
DICTIONARY_SIGN = 1
#: d(e^{Tr⟨Y,X⟩}Ψ) = FORM_EQUIVARIANT_COEFF · i_{[Y,X]}(e^{Tr⟨Y,X⟩}Ψ)
FORM_EQUIVARIANT_COEFF = Fraction(-1, 2)
#: [R_{Tr(Y dX)}, i_biv] = COMMUTATOR_COEFF · i_{[X,Y]}, hence
#: R·exp(i_biv) = exp(i_biv)·(R + COMMUTATOR_COEFF · i_{[X,Y]})
COMMUTATOR_COEFF = Fraction(1, 2)


class FormError(ValueError):
    pass


@dataclass(frozen=True)
class VolumeElement:
    space: SymbolSpace
    lam: Fraction = Fraction(1)

    @property
    def order(self) -> tuple:
        return tuple(self.space.ids("dX"))

    def as_poly(self) -> SuperPolynomial:
        return SuperPolynomial(self.space, {self.order: Fraction(self.lam)})


@dataclass(frozen=True, eq=False)
class TwistedForm:
    twist: SuperPolynomial
    body: SuperPolynomial

    def __post_init__(self):
        if self.twist.has_kind("P") or self.twist.has_kind("dX"):
            raise FormError("twist must be a function of X and Y")
        if self.body.has_kind("P"):
            raise FormError("form body cannot contain P symbols")
        if self.twist.space != self.body.space:
            raise FormError("twist and body live in different symbol spaces")

    @property
    def space(self) -> SymbolSpace:
        return self.body.space

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def degrees(self) -> List[int]:
        return sorted(self.body.kind_degrees("dX"))

    def component(self, degree: int) -> SuperPolynomial:
        return self.body.kind_degree_part("dX", degree)

    def __eq__(self, other):
        if not isinstance(other, TwistedForm):
            return NotImplemented
        return self.twist == other.twist and self.body == other.body

    def __add__(self, other: "TwistedForm") -> "TwistedForm":
        if other.twist != self.twist:
            raise FormError("cannot add forms with different twists")
        return TwistedForm(self.twist, self.body + other.body)

    def __sub__(self, other: "TwistedForm") -> "TwistedForm":
        if other.twist != self.twist:
            raise FormError("cannot add forms with different twists")
        return TwistedForm(self.twist, self.body - other.body)

    def scale(self, c) -> "TwistedForm":
        return TwistedForm(self.twist, self.body.scale(c))

    def with_body(self, body: SuperPolynomial) -> "TwistedForm":
        return TwistedForm(self.twist, body)

    def render(self) -> str:
        from .superpoly import render
        lines = [f"twist: {render(self.twist)}"]
        for k in reversed(self.degrees()):
            lines.append(f"deg {k}: {render(self.component(k))}")
        return "\n".join(lines)


def plain(body: SuperPolynomial) -> TwistedForm:
    return TwistedForm(body.space.zero(), body)


# -- elementary operators ---------------------------------------------------------

def _x_to_dx(space: SymbolSpace) -> Dict[int, int]:
    off = space.ids("dX").start - space.ids("X").start
    return {x: x + off for x in space.ids("X")}


def exterior_derivative(f: SuperPolynomial) -> SuperPolynomial:
    """Untwisted d = Σ dX_k ∂/∂X_k (Y symbols are constants)."""
    space = f.space
    out = space.zero()
    for x, dx in _x_to_dx(space).items():
        dfx = f.derivative(x)
        if dfx:
            out = out + SuperPolynomial(space, {(dx,): Fraction(1)}) * dfx
    return out


def de_rham(phi: TwistedForm) -> TwistedForm:
    """d_S body = d body + dS ∧ body."""
    body = exterior_derivative(phi.body)
    if phi.twist:
        body = body + exterior_derivative(phi.twist) * phi.body
    return phi.with_body(body)


def contract(v: VectorField, phi: TwistedForm) -> TwistedForm:
    """i_v = Σ v^k ∂/∂(dX_k) (functions, including e^S, pass through)."""
    return phi.with_body(contract_body(v, phi.body))


def contract_body(v: VectorField, body: SuperPolynomial) -> SuperPolynomial:
    dx_of = _x_to_dx(body.space)
    out = body.space.zero()
    for x, comp in v.items():
        if comp:
            out = out + comp * body.derivative(dx_of[x])
    return out


def lie_derivative(v: VectorField, phi: TwistedForm) -> TwistedForm:
    """Lie_v as an even derivation: v(f) on functions, d(v^k) on dX_k."""
    space = phi.space
    dx_of = _x_to_dx(space)
    body = phi.body
    out = space.zero()
    for x, comp in v.items():
        if not comp:
            continue
        out = out + comp * body.derivative(x)
        out = out + exterior_derivative(comp) * body.derivative(dx_of[x])
    if phi.twist:
        vS = space.zero()
        for x, comp in v.items():
            vS = vS + comp * phi.twist.derivative(x)
        out = out + vS * body
    return phi.with_body(out)


def vector_field_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[v, w]^k = v(w^k) − w(v^k)."""
    keys = set(v) | set(w)
    space = next(iter((v or w).values())).space

    def apply(field_, f):
        out = space.zero()
        for x, c in field_.items():
            out = out + c * f.derivative(x)
        return out

    return {k: apply(v, w.get(k, space.zero())) - apply(w, v.get(k, space.zero())) for k in keys}


def polyvector_contraction(gamma: SuperPolynomial, body: SuperPolynomial) -> SuperPolynomial:
    """γ ⊢ ω: each P[α;i,j] acts as ∂/∂dX[α;j,i], rightmost factor first."""
    space = gamma.space
    if gamma.has_kind("dX"):
        raise FormError("polyvector contains dX symbols")
    dx_of_p: Dict[int, int] = {}
    for a, i, j in product(range(space.r), range(space.N), range(space.N)):
        dx_of_p[space.index("P", a, i, j)] = space.index("dX", a, j, i)
    out = space.zero()
    cache: Dict[tuple, SuperPolynomial] = {}
    for m, c in gamma.terms.items():
        ps = tuple(s for s in m if space.kind_of(s) == "P")
        rest = tuple(s for s in m if space.kind_of(s) != "P")
        res = cache.get(ps)
        if res is None:
            res = body
            for p in reversed(ps):
                res = res.derivative(dx_of_p[p])
            cache[ps] = res
        if res:
            out = out + SuperPolynomial(space, {rest: c}) * res
    return out


def polyvector_to_form(gamma: SuperPolynomial, vol: Optional[VolumeElement] = None) -> TwistedForm:
    vol = vol or VolumeElement(gamma.space)
    return plain(polyvector_contraction(gamma, vol.as_poly()))


# -- dictionary -------------------------------------------------------------------

def random_polyvector(space: SymbolSpace, rng: random.Random, max_degree: int = 4,
                      n_terms: int = 6) -> SuperPolynomial:
    xs = list(space.ids("X"))
    ps = list(space.ids("P"))
    from .superpoly import from_terms
    items = []
    for _ in range(n_terms):
        deg = rng.randint(0, max_degree)
        k = rng.randint(0, min(deg, len(ps)))
        word = rng.sample(ps, k) + [rng.choice(xs) for _ in range(deg - k)]
        items.append((word, Fraction(rng.randint(-5, 5), rng.randint(1, 3))))
    return from_terms(space, items)


@dataclass
class DictionaryReport:
    passed: bool
    samples: int
    signs: Dict[int, int] = field(default_factory=dict)  # polyvector degree -> ε
    failure: str = ""


def verify_dictionary(r: int, N: int, samples: int = 50, seed: int = 0,
                      max_degree: int = 4) -> DictionaryReport:
    """(Δγ)⊢ϖ = ε d(γ⊢ϖ) on random γ, with ε discovered and held fixed per degree."""
    if r * N * N > 6:
        raise ValueError("verify_dictionary requires r·N² ≤ 6")
    space = SymbolSpace(r, N)
    rng = random.Random(seed)
    vol = VolumeElement(space)
    signs: Dict[int, int] = {}
    for n in range(samples):
        gamma = random_polyvector(space, rng, max_degree)
        for k in sorted(gamma.kind_degrees("P")):
            g = gamma.kind_degree_part("P", k)
            lhs = polyvector_to_form(bv_laplacian(g), vol).body
            rhs = de_rham(polyvector_to_form(g, vol)).body
            if lhs.is_zero() and rhs.is_zero():
                continue
            if k not in signs:
                if lhs == rhs:
                    signs[k] = 1
                elif lhs == -rhs:
                    signs[k] = -1
                else:
                    return DictionaryReport(False, n + 1, signs, f"sample {n}: not proportional in degree {k}")
            elif lhs != rhs.scale(signs[k]):
                return DictionaryReport(False, n + 1, signs, f"sample {n}: sign changed in degree {k}")
    uniform = len(set(signs.values())) <= 1
    return DictionaryReport(uniform, samples, signs, "" if uniform else "sign depends on degree")


# -- Ψ and the equivariant differential ---------------------------------------------

def build_psi(ctx: ActionContext, vol: Optional[VolumeElement] = None) -> TwistedForm:
    """Ψ = exp(cubic + bivector) ⊢ ϖ, with exp(cubic) kept as the twist."""
    vol = vol or VolumeElement(ctx.space)
    biv = ctx.bivector_part
    top = vol.as_poly()
    body = top
    power = ctx.space.one()
    for k in range(1, ctx.r * ctx.N * ctx.N // 2 + 1):
        power = power * biv
        if not power:
            break
        body = body + polyvector_contraction(power, top).scale(Fraction(1, factorial(k)))
    return TwistedForm(ctx.cubic_part, body)


def verify_psi_closed(psi: TwistedForm) -> TwistedForm:
    return de_rham(psi)


def coadjoint_field(ctx: ActionContext) -> VectorField:
    """Components of the vector field X ↦ [Y, X] in the coordinates X[β;i,j]."""
    A, N, space = ctx.algebra, ctx.N, ctx.space
    Ah = matrix_extension(A, N)
    NN = N * N
    duals = dual_even_basis(A)
    Xv: Dict[int, SuperPolynomial] = {}
    Yv: Dict[int, SuperPolynomial] = {}
    for i, j in product(range(N), repeat=2):
        for al in range(A.r):
            Xv[(A.r + al) * NN + i * N + j] = space.X(al, i, j)
        for b in range(A.r):
            y = space.zero()
            for al in range(A.r):
                c = duals[al].get(b, 0)
                if c:
                    y = y + space.Y(al, i, j).scale(c)
            if y:
                Yv[b * NN + i * N + j] = y
    comp: Dict[int, SuperPolynomial] = {}
    zero = space.zero()
    for K, y in Yv.items():
        for I, x in Xv.items():
            yx = y * x
            for c, v in Ah.basis_product(K, I).items():
                comp[c] = comp.get(c, zero) + yx.scale(v)
            for c, v in Ah.basis_product(I, K).items():
                comp[c] = comp.get(c, zero) - yx.scale(v)
    field_: VectorField = {}
    for c, v in comp.items():
        al, rest = divmod(c - A.r * NN, NN)
        i, j = divmod(rest, N)
        if v:
            field_[space.index("X", al, i, j)] = v
    return field_


def equivariant_de_rham(phi: TwistedForm, ctx: ActionContext) -> TwistedForm:
    """d_eq Φ = d_S Φ − FORM_EQUIVARIANT_COEFF · i_{[Y,·]} Φ."""
    return de_rham(phi) - contract(coadjoint_field(ctx), phi).scale(FORM_EQUIVARIANT_COEFF)


def equivariant_psi(ctx: ActionContext) -> TwistedForm:
    """e^{Tr⟨Y,X⟩} Ψ(X) as a twisted form."""
    psi = build_psi(ctx)
    return TwistedForm(psi.twist + linear_source(ctx), psi.body)


def cartan_square_defect(ctx: ActionContext, phi: TwistedForm) -> TwistedForm:
    """d_eq² Φ + c·Lie_{[Y,·]} Φ, which vanishes in the Cartan model."""
    v = coadjoint_field(ctx)
    twice = equivariant_de_rham(equivariant_de_rham(phi, ctx), ctx)
    return twice + lie_derivative(v, phi).scale(FORM_EQUIVARIANT_COEFF)


# -- operator identities ---------------------------------------------------------------

def spanning_forms(space: SymbolSpace, max_degree: int = 3) -> Iterable[SuperPolynomial]:
    """All monomials X^m dX_S with |m| + |S| ≤ max_degree."""
    xs = list(space.ids("X"))
    dxs = list(space.ids("dX"))
    for k in range(0, max_degree + 1):
        for S in combinations(dxs, k):
            for e in range(0, max_degree - k + 1):
                for m in combinations_with_replacement(xs, e):
                    yield SuperPolynomial(space, {tuple(sorted(m + S)): Fraction(1)})


@dataclass
class OperatorReport:
    passed: bool
    checked: Dict[str, int]
    failures: Dict[str, str]


def random_vector_field(space: SymbolSpace, rng: random.Random, max_degree: int = 2) -> VectorField:
    xs = list(space.ids("X"))
    out: VectorField = {}
    for x in xs:
        from .superpoly import from_terms
        items = []
        for _ in range(rng.randint(0, 2)):
            deg = rng.randint(0, max_degree)
            items.append(([rng.choice(xs) for _ in range(deg)], Fraction(rng.randint(-3, 3))))
        p = from_terms(space, items)
        if p:
            out[x] = p
    return out


def verify_operator_identities(ctx: ActionContext, max_degree: int = 3, n_fields: int = 20,
                               seed: int = 0) -> OperatorReport:
    space = ctx.space
    if ctx.r * ctx.N * ctx.N > 8:
        raise ValueError("verify_operator_identities requires r·N² ≤ 8")
    L = linear_source(ctx)
    dL = exterior_derivative(L)
    biv = ctx.bivector_part
    vXY = {k: -c for k, c in coadjoint_field(ctx).items()}  # X ↦ [X, Y]
    basis = list(spanning_forms(space, max_degree))
    checked = {"R=[d,L]": 0, "[R,i_m]=i_[.,Y]": 0, "R·exp(i_m)": 0, "[i,Lie]=i_[,]": 0}
    failures: Dict[str, str] = {}

    def exp_im(w):
        out, term = w, w
        for k in range(1, space.block // 2 + 1):
            term = polyvector_contraction(biv, term).scale(Fraction(1, k))
            if not term:
                break
            out = out + term
        return out

    for w in basis:
        # R_{Tr(Y dX)} = [d, L·]
        if dL * w != exterior_derivative(L * w) - L * exterior_derivative(w):
            failures.setdefault("R=[d,L]", str(w))
        checked["R=[d,L]"] += 1
        # [R, i_m] = c · i_{[·,Y]}; i_m is even, so this is an ordinary commutator
        lhs = dL * polyvector_contraction(biv, w) - polyvector_contraction(biv, dL * w)
        rhs = contract_body(vXY, w).scale(COMMUTATOR_COEFF)
        if lhs != rhs:
            failures.setdefault("[R,i_m]=i_[.,Y]", str(w))
        checked["[R,i_m]=i_[.,Y]"] += 1
        # R exp(i_m) = exp(i_m)(R + c·i_{[·,Y]})
        lhs = dL * exp_im(w)
        rhs = exp_im(dL * w + contract_body(vXY, w).scale(COMMUTATOR_COEFF))
        if lhs != rhs:
            failures.setdefault("R·exp(i_m)", str(w))
        checked["R·exp(i_m)"] += 1

    rng = random.Random(seed)
    forms = basis[:: max(1, len(basis) // 40)]
    for _ in range(n_fields):
        g1 = random_vector_field(space, rng)
        g2 = random_vector_field(space, rng)
        if not g1 or not g2:
            continue
        br = vector_field_bracket(g1, g2)
        for w in forms:
            phi = plain(w)
            lhs = contract(g1, lie_derivative(g2, phi)).body - lie_derivative(g2, contract(g1, phi)).body
            if lhs != contract_body(br, w):
                failures.setdefault("[i,Lie]=i_[,]", str(w))
            checked["[i,Lie]=i_[,]"] += 1
    return OperatorReport(not failures, checked, failures)
