"""Sparse supercommutative polynomials with exact rational coefficients.

The generators are matrix entries of four families living on
``ΠA ⊗ gl_N`` and the equivariant parameter space:

    X[α;i,j]   even  (coordinates on ΠA₁ ⊗ gl_N)
    P[α;i,j]   odd   (coordinates on ΠA₀ ⊗ gl_N, i.e. polyvector generators)
    Y[a;i,j]   even  (equivariant parameters in A₀ ⊗ gl_N)
    dX[α;i,j]  odd   (de Rham generators)

Every generator gets an integer id; the canonical global order is
lexicographic on (kind, α, i, j) with X < P < Y < dX.  A monomial is the
sorted tuple of generator ids (even ids may repeat, odd ids may not) and its
sign is absorbed into the coefficient, so monomial keys are plain hashable
tuples.

Odd derivatives are *left* derivatives: the variable is anticommuted to the
front of the monomial, then removed.
"""
from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, NamedTuple, Tuple

KINDS = ("X", "P", "Y", "dX")
ODD_KINDS = frozenset({"P", "dX"})

Monomial = Tuple[int, ...]


class SymbolSpaceMismatch(ValueError):
    """Raised when polynomials over different symbol universes are combined."""


class Symbol(NamedTuple):
    kind: str
    alpha: int
    i: int
    j: int

    @property
    def odd(self) -> bool:
        return self.kind in ODD_KINDS

    def __str__(self) -> str:
        return f"{self.kind}[{self.alpha + 1};{self.i + 1},{self.j + 1}]"


@dataclass(frozen=True)
class SymbolSpace:
    """Symbol universe for an algebra with ``dim A₀ = dim A₁ = r`` at size ``N``."""

    r: int
    N: int

    def __post_init__(self):
        if self.r < 1 or self.N < 1:
            raise ValueError("r and N must be positive")

    @property
    def block(self) -> int:
        return self.r * self.N * self.N

    @property
    def size(self) -> int:
        return len(KINDS) * self.block

    def index(self, kind: str, alpha: int, i: int, j: int) -> int:
        if not (0 <= alpha < self.r and 0 <= i < self.N and 0 <= j < self.N):
            raise IndexError(f"symbol index out of range: {kind}[{alpha};{i},{j}]")
        return KINDS.index(kind) * self.block + (alpha * self.N + i) * self.N + j

    def symbol(self, idx: int) -> Symbol:
        k, rest = divmod(idx, self.block)
        alpha, rest = divmod(rest, self.N * self.N)
        i, j = divmod(rest, self.N)
        return Symbol(KINDS[k], alpha, i, j)

    def is_odd(self, idx: int) -> bool:
        return KINDS[idx // self.block] in ODD_KINDS

    def kind_of(self, idx: int) -> str:
        return KINDS[idx // self.block]

    def ids(self, kind: str) -> range:
        k = KINDS.index(kind)
        return range(k * self.block, (k + 1) * self.block)

    # -- convenience constructors -------------------------------------------------
    def var(self, kind: str, alpha: int, i: int, j: int) -> "SuperPolynomial":
        return SuperPolynomial(self, {(self.index(kind, alpha, i, j),): Fraction(1)})

    def X(self, alpha, i, j):
        return self.var("X", alpha, i, j)

    def P(self, alpha, i, j):
        return self.var("P", alpha, i, j)

    def Y(self, alpha, i, j):
        return self.var("Y", alpha, i, j)

    def dX(self, alpha, i, j):
        return self.var("dX", alpha, i, j)

    def zero(self) -> "SuperPolynomial":
        return SuperPolynomial(self, {})

    def one(self) -> "SuperPolynomial":
        return SuperPolynomial(self, {(): Fraction(1)})

    def const(self, c) -> "SuperPolynomial":
        return SuperPolynomial(self, {(): Fraction(c)}) if c else self.zero()


def _odd_ids(space: SymbolSpace, mono: Monomial) -> list:
    return [s for s in mono if space.is_odd(s)]


def mul_monomials(space: SymbolSpace, m1: Monomial, m2: Monomial):
    """Return ``(monomial, sign)`` for ``m1·m2`` or ``None`` when it vanishes."""
    if not m1:
        return m2, 1
    if not m2:
        return m1, 1
    o1 = [s for s in m1 if space.is_odd(s)]
    o2 = [s for s in m2 if space.is_odd(s)]
    swaps = 0
    if o1 and o2:
        seen = set(o1)
        for b in o2:
            if b in seen:
                return None
            # odd symbols of m1 that b has to pass
            swaps += len(o1) - bisect_right(o1, b)
    merged = tuple(sorted(m1 + m2))
    return merged, (-1 if swaps & 1 else 1)


class SuperPolynomial:
    """Immutable sparse element of the free supercommutative ℚ-algebra.

    ``terms`` maps canonical monomials to nonzero :class:`fractions.Fraction`
    coefficients.  Treat instances as values; nothing mutates them after
    construction.
    """

    __slots__ = ("space", "terms", "_hash")

    def __init__(self, space: SymbolSpace, terms: Dict[Monomial, Fraction] | None = None):
        self.space = space
        self.terms = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    # -- basic protocol ---------------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self.terms.items())

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, SuperPolynomial):
            return self.space == other.space and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({(): Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"SuperPolynomial({render(self)})"

    __str__ = lambda self: render(self)

    def _check(self, other: "SuperPolynomial"):
        if other.space != self.space:
            raise SymbolSpaceMismatch(f"{self.space} vs {other.space}")

    def _coerce(self, other) -> "SuperPolynomial":
        if isinstance(other, SuperPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.space.const(other)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return SuperPolynomial(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return SuperPolynomial(self.space, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "SuperPolynomial":
        c = Fraction(c)
        if not c:
            return self.space.zero()
        return SuperPolynomial(self.space, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        space = self.space
        out: Dict[Monomial, Fraction] = {}
        get = out.get
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                res = mul_monomials(space, m1, m2)
                if res is None:
                    continue
                m, sign = res
                v = get(m, 0) + (c1 * c2 if sign > 0 else -c1 * c2)
                out[m] = v
        return SuperPolynomial(space, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        out = self.space.one()
        for _ in range(k):
            out = out * self
        return out

    # -- grading ----------------------------------------------------------------
    def monomial_parity(self, m: Monomial) -> int:
        return sum(1 for s in m if self.space.is_odd(s)) & 1

    def parity(self) -> int:
        """Parity of a homogeneous polynomial (0 for the zero polynomial)."""
        pars = {self.monomial_parity(m) for m in self.terms}
        if len(pars) > 1:
            raise ValueError("polynomial is not parity-homogeneous")
        return pars.pop() if pars else 0

    def parity_parts(self) -> Tuple["SuperPolynomial", "SuperPolynomial"]:
        even, odd = {}, {}
        for m, c in self.terms.items():
            (odd if self.monomial_parity(m) else even)[m] = c
        return SuperPolynomial(self.space, even), SuperPolynomial(self.space, odd)

    def filter(self, predicate) -> "SuperPolynomial":
        return SuperPolynomial(self.space, {m: c for m, c in self.terms.items() if predicate(m)})

    def count_kind(self, m: Monomial, kind: str) -> int:
        return sum(1 for s in m if self.space.kind_of(s) == kind)

    def kind_degree_part(self, kind: str, degree: int) -> "SuperPolynomial":
        return self.filter(lambda m: self.count_kind(m, kind) == degree)

    def kind_degrees(self, kind: str) -> set:
        return {self.count_kind(m, kind) for m in self.terms}

    def has_kind(self, kind: str) -> bool:
        return any(self.space.kind_of(s) == kind for m in self.terms for s in m)

    def free_symbols(self) -> set:
        return {s for m in self.terms for s in m}

    # -- derivatives ------------------------------------------------------------
    def derivative(self, s: int | Symbol) -> "SuperPolynomial":
        """Left derivative with respect to the generator ``s``."""
        space = self.space
        if isinstance(s, Symbol):
            s = space.index(*s)
        out: Dict[Monomial, Fraction] = {}
        if space.is_odd(s):
            for m, c in self.terms.items():
                if s not in m:
                    continue
                k = m.index(s)
                before = sum(1 for t in m[:k] if space.is_odd(t))
                nm = m[:k] + m[k + 1:]
                out[nm] = out.get(nm, 0) + (-c if before & 1 else c)
        else:
            for m, c in self.terms.items():
                e = m.count(s)
                if not e:
                    continue
                k = m.index(s)
                nm = m[:k] + m[k + 1:]
                out[nm] = out.get(nm, 0) + e * c
        return SuperPolynomial(space, out)

    def substitute_linear(self, mapping: Dict[int, "SuperPolynomial"]) -> "SuperPolynomial":
        """Replace generators by polynomials of the same parity (ring homomorphism)."""
        space = self.space
        out = space.zero()
        cache: Dict[int, SuperPolynomial] = {}
        for m, c in self.terms.items():
            term = space.const(c)
            for s in m:
                img = mapping.get(s)
                if img is None:
                    img = cache.get(s)
                    if img is None:
                        img = cache[s] = SuperPolynomial(space, {(s,): Fraction(1)})
                term = term * img
            out = out + term
        return out


def from_terms(space: SymbolSpace, items: Iterable[Tuple[Iterable[int], Fraction]]) -> SuperPolynomial:
    """Build a polynomial from (ordered generator ids, coefficient) words.

    Each word is normalized: odd generators are sorted with the Koszul sign.
    """
    out: Dict[Monomial, Fraction] = {}
    for word, c in items:
        res = normalize_word(space, word)
        if res is None:
            continue
        m, sign = res
        out[m] = out.get(m, 0) + sign * Fraction(c)
    return SuperPolynomial(space, out)


def normalize_word(space: SymbolSpace, word: Iterable[int]):
    """Canonical monomial and sign for an ordered product of generators."""
    word = list(word)
    odd = [s for s in word if space.is_odd(s)]
    if len(set(odd)) != len(odd):
        return None
    inversions = sum(1 for a in range(len(odd)) for b in range(a + 1, len(odd)) if odd[a] > odd[b])
    return tuple(sorted(word)), (-1 if inversions & 1 else 1)


# -- text rendering -------------------------------------------------------------

def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_monomial(space: SymbolSpace, m: Monomial) -> str:
    parts = []
    k = 0
    while k < len(m):
        s = m[k]
        e = 1
        while k + e < len(m) and m[k + e] == s:
            e += 1
        name = str(space.symbol(s))
        parts.append(name if e == 1 else f"{name}^{e}")
        k += e
    return "·".join(parts)


def render(f: SuperPolynomial) -> str:
    """Canonical text, e.g. ``3/2·X[1;1,2]·P[1;2,1] - Y[1;1,1]``."""
    if not f.terms:
        return "0"
    out = []
    for m in sorted(f.terms, key=lambda m: (len(m), m)):
        c = f.terms[m]
        sign = "-" if c < 0 else "+"
        a = abs(c)
        body = render_monomial(f.space, m)
        if not body:
            txt = _fmt_coeff(a)
        elif a == 1:
            txt = body
        else:
            txt = f"{_fmt_coeff(a)}·{body}"
        out.append((sign, txt))
    first_sign, first = out[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, txt in out[1:]:
        s += f" {sign} {txt}"
    return s


_TERM_SPLIT = re.compile(r"\s+([+-])\s+")
_FACTOR = re.compile(r"^(X|P|Y|dX)\[(\d+);(\d+),(\d+)\](?:\^(\d+))?$")


def parse(space: SymbolSpace, text: str) -> SuperPolynomial:
    """Inverse of :func:`render` (also accepts any word order of factors)."""
    text = text.strip()
    if text == "0":
        return space.zero()
    sign = 1
    if text.startswith("-"):
        sign, text = -1, text[1:].lstrip()
    pieces = _TERM_SPLIT.split(text)
    terms = [(sign, pieces[0])]
    for k in range(1, len(pieces), 2):
        terms.append((1 if pieces[k] == "+" else -1, pieces[k + 1]))
    items = []
    for sgn, term in terms:
        coeff = Fraction(sgn)
        word = []
        for factor in term.split("·"):
            factor = factor.strip()
            mt = _FACTOR.match(factor)
            if mt is None:
                try:
                    coeff *= Fraction(factor)
                except ValueError:
                    raise ValueError(f"cannot parse factor {factor!r}") from None
                continue
            kind, a, i, j, e = mt.groups()
            idx = space.index(kind, int(a) - 1, int(i) - 1, int(j) - 1)
            word.extend([idx] * int(e or 1))
        items.append((word, coeff))
    return from_terms(space, items)


# -- BV structure ---------------------------------------------------------------

def _reject_forms(f: SuperPolynomial):
    if f.has_kind("dX"):
        raise ValueError("BV operators act on functions of X, P, Y only (dX present)")


def dual_pairs(space: SymbolSpace):
    """Pairs ``(X[α;i,j], P[α;j,i])``: the odd coordinate dual to each even one.

    ``P[α;j,i]`` is the coordinate of the pairing-dual basis vector, so it
    corresponds to the vector field ∂/∂X[α;i,j] (note the index transpose).
    """
    for a in range(space.r):
        for i in range(space.N):
            for j in range(space.N):
                yield space.index("X", a, i, j), space.index("P", a, j, i)


def bv_laplacian(f: SuperPolynomial) -> SuperPolynomial:
    """Δf = Σ ∂²f/∂X[α;i,j]∂P[α;j,i] with left derivatives (P first)."""
    _reject_forms(f)
    space = f.space
    partner = {p: x for x, p in dual_pairs(space)}
    out: Dict[Monomial, Fraction] = {}
    for m, c in f.terms.items():
        odd_seen = 0
        for k, s in enumerate(m):
            if not space.is_odd(s):
                continue
            x = partner.get(s)
            if x is not None:
                e = m.count(x)
                if e:
                    rest = m[:k] + m[k + 1:]
                    kx = rest.index(x)
                    nm = rest[:kx] + rest[kx + 1:]
                    v = e * c
                    out[nm] = out.get(nm, 0) + (-v if odd_seen & 1 else v)
            odd_seen += 1
    return SuperPolynomial(space, out)


def bv_laplacian_literal(f: SuperPolynomial) -> SuperPolynomial:
    """Δ computed as a sum of composed :meth:`SuperPolynomial.derivative` calls."""
    _reject_forms(f)
    out = f.space.zero()
    for x, p in dual_pairs(f.space):
        out = out + f.derivative(p).derivative(x)
    return out


def _homogeneous_bracket(f: SuperPolynomial, g: SuperPolynomial) -> SuperPolynomial:
    pf = f.parity()
    s = -1 if pf else 1
    inner = bv_laplacian(f * g) - bv_laplacian(f) * g - (f * bv_laplacian(g)).scale(s)
    return inner.scale(s)


def odd_poisson_bracket(f: SuperPolynomial, g: SuperPolynomial) -> SuperPolynomial:
    """{f,g} = (-1)^|f| (Δ(fg) - Δ(f)g - (-1)^|f| fΔ(g)), bilinear in parity parts."""
    _reject_forms(f)
    _reject_forms(g)
    out = f.space.zero()
    for fp in f.parity_parts():
        if fp:
            out = out + _homogeneous_bracket(fp, g)
    return out


def coordinate_bracket(f: SuperPolynomial, g: SuperPolynomial) -> SuperPolynomial:
    """{f,g} = Σ ∂_X f ∂_P g + (-1)^|f| ∂_P f ∂_X g over dual coordinate pairs."""
    out = f.space.zero()
    for fp in f.parity_parts():
        if not fp:
            continue
        s = -1 if fp.parity() else 1
        for x, p in dual_pairs(f.space):
            dxf = fp.derivative(x)
            dpf = fp.derivative(p)
            if dxf:
                out = out + dxf * g.derivative(p)
            if dpf:
                out = out + (dpf * g.derivative(x)).scale(s)
    return out


#: value of {X, P} for a dual coordinate pair under the conventions above
BRACKET_XP = 1


def exp_closedness_witness(f: SuperPolynomial) -> SuperPolynomial:
    """Δf + ½{f,f}; it vanishes exactly when Δ exp(f) = 0."""
    if f.parity_parts()[1]:
        raise ValueError("exp-closedness is defined for even f")
    return bv_laplacian(f) + odd_poisson_bracket(f, f).scale(Fraction(1, 2))
