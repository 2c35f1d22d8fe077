"""Finite-dimensional ℤ/2-graded associative algebras with odd scalar product.

Basis elements are indexed globally: the even basis first (``0..r-1``), then
the odd basis (``r..r+s-1``).  Elements are sparse vectors ``{index: coeff}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import sympy

Vector = Dict[int, Fraction]


class AlgebraFormatError(ValueError):
    """Malformed or inconsistent algebra description."""


def as_fraction(value) -> Fraction:
    if isinstance(value, bool):
        raise AlgebraFormatError(f"not a rational coefficient: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise AlgebraFormatError(f"not a rational coefficient: {value!r}")


def _add(vec: Vector, idx: int, c: Fraction) -> None:
    v = vec.get(idx, 0) + c
    if v:
        vec[idx] = v
    else:
        vec.pop(idx, None)


@dataclass(frozen=True, eq=False)
class GradedAlgebra:
    """Structure constants, parity split and odd pairing of an algebra.

    ``mult[(a, b)]`` is the sparse vector ``a·b``; ``pairing`` is the dense
    Gram matrix of ⟨·,·⟩.  ``involution`` (optional, r×r) stores ``a†`` as row
    ``a``; ``eta`` (optional, r×r) is the even scalar product on A₀ when the
    algebra has the form A₀⊗Q(1), used only for the real-form positivity check.
    """

    basis_even: Tuple[str, ...]
    basis_odd: Tuple[str, ...]
    mult: Mapping[Tuple[int, int], Mapping[int, Fraction]]
    pairing: Tuple[Tuple[Fraction, ...], ...]
    involution: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    eta: Optional[Tuple[Tuple[Fraction, ...], ...]] = None
    name: str = ""
    _index: Mapping[str, int] = field(default=None, repr=False)

    def __post_init__(self):
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise AlgebraFormatError("duplicate basis labels")
        object.__setattr__(self, "_index", MappingProxyType({l: k for k, l in enumerate(labels)}))
        n = self.dim
        if len(self.pairing) != n or any(len(row) != n for row in self.pairing):
            raise AlgebraFormatError("pairing matrix has wrong shape")
        for (a, b), vec in self.mult.items():
            if not (0 <= a < n and 0 <= b < n):
                raise AlgebraFormatError(f"product index out of range: {(a, b)}")
            for c, coeff in vec.items():
                if not 0 <= c < n:
                    raise AlgebraFormatError(f"product index out of range: {c}")
                if coeff and self.parity(c) != (self.parity(a) + self.parity(b)) % 2:
                    raise AlgebraFormatError(
                        f"parity violation: {labels[a]}·{labels[b]} has a component on {labels[c]}"
                    )
        r = self.r
        for mat, what in ((self.involution, "involution"), (self.eta, "eta")):
            if mat is not None and (len(mat) != r or any(len(row) != r for row in mat)):
                raise AlgebraFormatError(f"{what} matrix must be {r}x{r} on the even part")

    # -- shape ------------------------------------------------------------------
    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(self.basis_even) + tuple(self.basis_odd)

    @property
    def r(self) -> int:
        return len(self.basis_even)

    @property
    def s(self) -> int:
        return len(self.basis_odd)

    @property
    def dim(self) -> int:
        return self.r + self.s

    def parity(self, idx: int) -> int:
        return 0 if idx < self.r else 1

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise AlgebraFormatError(f"unknown basis label {label!r}") from None

    @property
    def even_indices(self) -> range:
        return range(self.r)

    @property
    def odd_indices(self) -> range:
        return range(self.r, self.dim)

    # -- operations -------------------------------------------------------------
    def basis_product(self, a: int, b: int) -> Mapping[int, Fraction]:
        return self.mult.get((a, b), {})

    def product(self, u: Vector, v: Vector) -> Vector:
        out: Vector = {}
        for a, ca in u.items():
            for b, cb in v.items():
                for c, cc in self.basis_product(a, b).items():
                    _add(out, c, ca * cb * cc)
        return out

    def pair(self, u: Vector, v: Vector) -> Fraction:
        return sum((ca * cb * self.pairing[a][b] for a, ca in u.items() for b, cb in v.items()),
                   Fraction(0))

    def unit_vector(self, idx: int) -> Vector:
        return {idx: Fraction(1)}

    def pairing_block(self) -> List[List[Fraction]]:
        """Matrix ``B[a][α] = ⟨e_a, ξ_α⟩`` between even and odd basis."""
        return [[self.pairing[a][self.r + al] for al in range(self.s)] for a in range(self.r)]


# -- exact linear algebra helpers (sympy) ------------------------------------------

def _to_sympy(mat: Sequence[Sequence[Fraction]]) -> sympy.Matrix:
    return sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in mat])


def _from_sympy(mat: sympy.Matrix) -> List[List[Fraction]]:
    return [[Fraction(int(mat[i, j].p), int(mat[i, j].q)) for j in range(mat.cols)]
            for i in range(mat.rows)]


def exact_rank(mat: Sequence[Sequence[Fraction]]) -> int:
    if not mat or not mat[0]:
        return 0
    return _to_sympy(mat).rank()


def exact_inverse(mat: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    return _from_sympy(_to_sympy(mat).inv())


def dual_even_basis(A: GradedAlgebra) -> List[Vector]:
    """Even vectors ``e^α`` with ⟨e^α, ξ_β⟩ = δ^α_β (inverse of the pairing block)."""
    if A.r != A.s or exact_rank(A.pairing_block()) < A.r:
        raise AlgebraFormatError("odd pairing is degenerate between A₀ and A₁")
    D = exact_inverse(A.pairing_block())  # D·B = 1
    return [{a: D[al][a] for a in range(A.r) if D[al][a]} for al in range(A.r)]


# -- loading --------------------------------------------------------------------

def _parse_entries(raw, arity: int, what: str):
    if not isinstance(raw, list):
        raise AlgebraFormatError(f"{what} must be a list")
    for entry in raw:
        if not isinstance(entry, list) or len(entry) != arity:
            raise AlgebraFormatError(f"{what} entry must have {arity} items: {entry!r}")
        if not all(isinstance(x, str) for x in entry[:-1]):
            raise AlgebraFormatError(f"{what} entry labels must be strings: {entry!r}")
        yield entry[:-1], as_fraction(entry[-1])


def algebra_from_dict(doc: dict, name: str = "") -> GradedAlgebra:
    if not isinstance(doc, dict):
        raise AlgebraFormatError("algebra document must be a JSON object")
    for key in ("basis_even", "basis_odd", "mult", "pairing"):
        if key not in doc:
            raise AlgebraFormatError(f"missing key {key!r}")
    even, odd = doc["basis_even"], doc["basis_odd"]
    if not (isinstance(even, list) and isinstance(odd, list)
            and all(isinstance(x, str) for x in even + odd)):
        raise AlgebraFormatError("basis_even/basis_odd must be lists of strings")
    labels = even + odd
    index = {l: k for k, l in enumerate(labels)}
    if len(index) != len(labels):
        raise AlgebraFormatError("duplicate basis labels")

    def idx(label):
        if label not in index:
            raise AlgebraFormatError(f"unknown basis label {label!r}")
        return index[label]

    def even_idx(label):
        k = idx(label)
        if k >= len(even):
            raise AlgebraFormatError(f"{label!r} is not an even basis element")
        return k

    n, r = len(labels), len(even)
    mult: Dict[Tuple[int, int], Vector] = {}
    for (a, b, c), coeff in _parse_entries(doc["mult"], 4, "mult"):
        _add(mult.setdefault((idx(a), idx(b)), {}), idx(c), coeff)
    mult = {k: MappingProxyType(v) for k, v in mult.items() if v}
    pairing = [[Fraction(0)] * n for _ in range(n)]
    for (a, b), coeff in _parse_entries(doc["pairing"], 3, "pairing"):
        pairing[idx(a)][idx(b)] += coeff

    def even_matrix(key):
        if doc.get(key) is None:
            return None
        mat = [[Fraction(0)] * r for _ in range(r)]
        for (a, b), coeff in _parse_entries(doc[key], 3, key):
            mat[even_idx(a)][even_idx(b)] += coeff
        return tuple(tuple(row) for row in mat)

    return GradedAlgebra(
        basis_even=tuple(even),
        basis_odd=tuple(odd),
        mult=MappingProxyType(mult),
        pairing=tuple(tuple(row) for row in pairing),
        involution=even_matrix("involution"),
        eta=even_matrix("eta"),
        name=name or doc.get("name", ""),
    )


def load_algebra(source) -> GradedAlgebra:
    """Load an algebra description (path, JSON text or already-parsed dict)."""
    if isinstance(source, dict):
        return algebra_from_dict(source)
    path = Path(source)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise AlgebraFormatError(f"{path}: invalid JSON ({exc})") from exc
    return algebra_from_dict(doc, name=doc.get("name", path.stem) if isinstance(doc, dict) else "")


def _fmt(c: Fraction):
    return c.numerator if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def algebra_to_dict(A: GradedAlgebra) -> dict:
    labels = A.labels
    doc = {
        "name": A.name,
        "basis_even": list(A.basis_even),
        "basis_odd": list(A.basis_odd),
        "mult": [[labels[a], labels[b], labels[c], _fmt(v)]
                 for (a, b), vec in sorted(A.mult.items()) for c, v in sorted(vec.items())],
        "pairing": [[labels[a], labels[b], _fmt(A.pairing[a][b])]
                    for a in range(A.dim) for b in range(A.dim) if A.pairing[a][b]],
    }
    for key in ("involution", "eta"):
        mat = getattr(A, key)
        if mat is not None:
            doc[key] = [[labels[a], labels[b], _fmt(mat[a][b])]
                        for a in range(A.r) for b in range(A.r) if mat[a][b]]
    return doc


def even_algebra(labels: Sequence[str], mult: Mapping[Tuple[str, str], Mapping[str, object]],
                 eta: Optional[Mapping[Tuple[str, str], object]] = None,
                 involution: Optional[Mapping[str, Mapping[str, object]]] = None,
                 name: str = "") -> GradedAlgebra:
    """Purely even algebra (empty odd part) from label-keyed tables."""
    doc = {
        "basis_even": list(labels),
        "basis_odd": [],
        "mult": [[a, b, c, v] for (a, b), vec in mult.items() for c, v in vec.items()],
        "pairing": [],
        "eta": None if eta is None else [[a, b, v] for (a, b), v in eta.items()],
        "involution": None if involution is None else
        [[a, b, v] for a, vec in involution.items() for b, v in vec.items()],
    }
    return algebra_from_dict(doc, name=name)


# -- structure checks -------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    status: str  # "pass" | "fail" | "absent" | "not-checked"
    witness: Tuple = ()
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return {"status": self.status, "witness": list(self.witness), "detail": self.detail}


@dataclass(frozen=True)
class StructureReport:
    associative: Check
    invariant_pairing: Check
    nondegenerate: Check
    unimodular: Check
    involution_valid: Check
    positive_definite_real_form: Check

    FIELDS = ("associative", "invariant_pairing", "nondegenerate", "unimodular",
              "involution_valid", "positive_definite_real_form")

    @property
    def all_pass(self) -> bool:
        return all(getattr(self, f).status in ("pass", "absent", "not-checked") for f in self.FIELDS)

    def as_dict(self) -> dict:
        return {f: getattr(self, f).as_dict() for f in self.FIELDS}


def check_associative(A: GradedAlgebra) -> Check:
    e = A.unit_vector
    for a, b, c in product(range(A.dim), repeat=3):
        left = A.product(A.product(e(a), e(b)), e(c))
        right = A.product(e(a), A.product(e(b), e(c)))
        if left != right:
            L = A.labels
            return Check("fail", (L[a], L[b], L[c]), f"({L[a]}·{L[b]})·{L[c]} != {L[a]}·({L[b]}·{L[c]})")
    return Check("pass")


def check_invariant_pairing(A: GradedAlgebra) -> Check:
    L, n = A.labels, A.dim
    for a, b in product(range(n), repeat=2):
        g = A.pairing[a][b]
        if g and A.parity(a) == A.parity(b):
            return Check("fail", (L[a], L[b]), "pairing is not odd")
        if g != A.pairing[b][a]:
            return Check("fail", (L[a], L[b]), "pairing is not symmetric")
    e = A.unit_vector
    for a, b, c in product(range(n), repeat=3):
        if A.pair(A.product(e(a), e(b)), e(c)) != A.pair(e(a), A.product(e(b), e(c))):
            return Check("fail", (L[a], L[b], L[c]), f"<{L[a]}·{L[b]},{L[c]}> != <{L[a]},{L[b]}·{L[c]}>")
    return Check("pass")


def check_nondegenerate(A: GradedAlgebra) -> Check:
    if A.r != A.s:
        return Check("fail", (A.r, A.s), f"dim A0 = {A.r} but dim A1 = {A.s}")
    if A.r == 0:
        return Check("fail", (), "empty algebra")
    rank = exact_rank(A.pairing_block())
    if rank < A.r:
        return Check("fail", (rank,), f"A0×A1 pairing block has rank {rank} < {A.r}")
    return Check("pass")


def ad_trace(A: GradedAlgebra, a: int) -> Fraction:
    """tr([e_a, ·] restricted to A₀)."""
    total = Fraction(0)
    for b in A.even_indices:
        total += A.basis_product(a, b).get(b, 0) - A.basis_product(b, a).get(b, 0)
    return total


def check_unimodular(A: GradedAlgebra) -> Check:
    for a in A.even_indices:
        t = ad_trace(A, a)
        if t:
            return Check("fail", (A.labels[a],), f"tr(ad {A.labels[a]}) = {t}")
    return Check("pass")


def _dagger(A: GradedAlgebra, u: Vector) -> Vector:
    out: Vector = {}
    for a, c in u.items():
        for b in A.even_indices:
            if A.involution[a][b]:
                _add(out, b, c * A.involution[a][b])
    return out


def regular_trace(A: GradedAlgebra, u: Vector) -> Fraction:
    """Trace of left multiplication by ``u`` on A₀."""
    return sum((c * A.basis_product(a, b).get(b, 0) for a, c in u.items() for b in A.even_indices),
               Fraction(0))


def check_involution(A: GradedAlgebra) -> Check:
    if A.involution is None:
        return Check("absent")
    L, e = A.labels, A.unit_vector
    for a in A.even_indices:
        if _dagger(A, _dagger(A, e(a))) != e(a):
            return Check("fail", (L[a],), "(a†)† != a")
        # coefficients are rational, so conjugation is trivial on tr
        if regular_trace(A, _dagger(A, e(a))) != regular_trace(A, e(a)):
            return Check("fail", (L[a],), "tr(a†) != conj(tr(a))")
    for a, b in product(A.even_indices, repeat=2):
        lhs = _dagger(A, A.product(e(a), e(b)))
        rhs = A.product(_dagger(A, e(b)), _dagger(A, e(a)))
        if lhs != rhs:
            return Check("fail", (L[a], L[b]), "(ab)† != b†a†")
    return Check("pass")


def _nullspace(mat: sympy.Matrix) -> List[sympy.Matrix]:
    return mat.nullspace()


def check_positive_real_form(A: GradedAlgebra) -> Check:
    """−η(y,y) > 0 on the anti-hermitian real form {y† = −y} of A₀⊗ℂ.

    Writing y = u + iv with rational u, v, the condition y† = −y splits into
    u† = −u and v† = v, and −η(y,y) = −η(u,u) + η(v,v) − 2iη(u,v).
    """
    if A.involution is None or A.eta is None:
        return Check("not-checked", (), "needs both an involution and an even form eta")
    I = _to_sympy(A.involution).T  # column action: coefficients of a†
    eta = _to_sympy(A.eta)
    one = sympy.eye(A.r)
    U = _nullspace(I + one)
    V = _nullspace(I - one)
    if len(U) + len(V) != A.r:
        return Check("fail", (), "anti-hermitian elements do not form a real form")
    for u in U:
        for v in V:
            if (u.T * eta * v)[0, 0] != 0:
                return Check("fail", (), "−η(y,y) is not real on the real form")
    blocks = []
    if U:
        Um = sympy.Matrix.hstack(*U)
        blocks.append(-(Um.T * eta * Um))
    if V:
        Vm = sympy.Matrix.hstack(*V)
        blocks.append(Vm.T * eta * Vm)
    for G in blocks:
        for k in range(1, G.rows + 1):
            if G[:k, :k].det() <= 0:
                return Check("fail", (k,), f"leading minor {k} of the real-form Gram matrix is not positive")
    return Check("pass")


def check_structure(A: GradedAlgebra) -> StructureReport:
    return StructureReport(
        associative=check_associative(A),
        invariant_pairing=check_invariant_pairing(A),
        nondegenerate=check_nondegenerate(A),
        unimodular=check_unimodular(A),
        involution_valid=check_involution(A),
        positive_definite_real_form=check_positive_real_form(A),
    )


# -- constructions -----------------------------------------------------------------

def _odd_label(label: str) -> str:
    return "ξ" if label == "1" else f"{label}ξ"


def tensor_with_Q1(A0: GradedAlgebra, name: str = "") -> GradedAlgebra:
    """A = A₀ ⊗ Q(1), Q(1) = ⟨1, ξ | ξ² = 1⟩, with ⟨a⊗1, b⊗ξ⟩ = η(a, b)."""
    if A0.s:
        raise AlgebraFormatError("A0 must be purely even")
    if A0.eta is None:
        raise AlgebraFormatError("A0 needs an even scalar product eta")
    r = A0.r
    eta = A0.eta
    if exact_rank(eta) < r:
        raise AlgebraFormatError("eta is degenerate")
    e = A0.unit_vector
    for a, b in product(range(r), repeat=2):
        if eta[a][b] != eta[b][a]:
            raise AlgebraFormatError("eta is not symmetric")
    for a, b, c in product(range(r), repeat=3):
        ab = A0.product(e(a), e(b))
        bc = A0.product(e(b), e(c))
        if sum(v * eta[k][c] for k, v in ab.items()) != sum(v * eta[a][k] for k, v in bc.items()):
            raise AlgebraFormatError("eta is not invariant")
    mult: Dict[Tuple[int, int], Vector] = {}
    for (a, b), vec in A0.mult.items():
        for (sa, sb) in product((0, 1), repeat=2):
            shift = r if (sa + sb) % 2 else 0
            mult[(a + sa * r, b + sb * r)] = MappingProxyType({c + shift: v for c, v in vec.items()})
    n = 2 * r
    pairing = [[Fraction(0)] * n for _ in range(n)]
    for a, b in product(range(r), repeat=2):
        pairing[a][r + b] = eta[a][b]
        pairing[r + b][a] = eta[a][b]
    return GradedAlgebra(
        basis_even=tuple(A0.basis_even),
        basis_odd=tuple(_odd_label(l) for l in A0.basis_even),
        mult=MappingProxyType(mult),
        pairing=tuple(tuple(row) for row in pairing),
        involution=A0.involution,
        eta=eta,
        name=name or (f"{A0.name}_q1" if A0.name else ""),
    )


def trivial_extension(A0: GradedAlgebra, name: str = "") -> GradedAlgebra:
    """A₀ ⊕ ΠA₀^∨ with the dual bimodule and ⟨a, φ⟩ = φ(a).

    The odd part is the dual space (basis dual to A₀'s), odd·odd = 0.  This is
    the standard way to attach an odd invariant pairing to an algebra that has
    no even invariant form (for instance the upper-triangular t₂).
    """
    if A0.s:
        raise AlgebraFormatError("A0 must be purely even")
    r = A0.r
    mult: Dict[Tuple[int, int], Vector] = {}

    def put(a, b, c, v):
        _add(mult.setdefault((a, b), {}), c, v)

    for (a, b), vec in A0.mult.items():
        for c, v in vec.items():
            put(a, b, c, v)
            # (b·φ_c)(x) = φ_c(x·b): coefficient of φ_a in b·φ_c is [a·b]_c
            put(b, r + c, r + a, v)
            # (φ_c·a)(x) = φ_c(a·x)
            put(r + c, a, r + b, v)
    n = 2 * r
    pairing = [[Fraction(0)] * n for _ in range(n)]
    for a in range(r):
        pairing[a][r + a] = pairing[r + a][a] = Fraction(1)
    return GradedAlgebra(
        basis_even=tuple(A0.basis_even),
        basis_odd=tuple(f"{l}*" for l in A0.basis_even),
        mult=MappingProxyType({k: MappingProxyType(v) for k, v in mult.items() if v}),
        pairing=tuple(tuple(row) for row in pairing),
        name=name,
    )


def matrix_extension(A: GradedAlgebra, N: int) -> GradedAlgebra:
    """Â = A ⊗ gl_N with ⟨a⊗M, b⊗M'⟩ = ⟨a,b⟩ Tr(MM').

    Basis ordering: for each basis element of A (even block first) the N²
    matrix units E_ij in row-major order, so Â keeps the even-first layout.
    """
    NN = N * N

    def I(k, i, j):
        return k * NN + i * N + j

    mult: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for (a, b), vec in A.mult.items():
        for i, j, l in product(range(N), repeat=3):
            mult[(I(a, i, j), I(b, j, l))] = MappingProxyType({I(c, i, l): v for c, v in vec.items()})
    n = A.dim * NN
    pairing = [[Fraction(0)] * n for _ in range(n)]
    for a, b in product(range(A.dim), repeat=2):
        g = A.pairing[a][b]
        if g:
            for i, j in product(range(N), repeat=2):
                pairing[I(a, i, j)][I(b, j, i)] = g
    labels = [f"{l}⊗E{i + 1}{j + 1}" for l in A.labels for i in range(N) for j in range(N)]
    return GradedAlgebra(
        basis_even=tuple(labels[:A.r * NN]),
        basis_odd=tuple(labels[A.r * NN:]),
        mult=MappingProxyType(mult),
        pairing=tuple(tuple(row) for row in pairing),
        name=f"{A.name}⊗gl{N}",
    )


# -- cyclic tensor ------------------------------------------------------------------

#: Koszul sign picked up when the two odd coordinates of an X·P·P term are
#: pulled out of m(Z, Z, Z); folded into ``CyclicTensor.components_mixed`` so
#: that the bivector term reads ½ Σ (m_A)_α^{βγ} Tr(X^α P_β P_γ).
KOSZUL_PP = -1


def m_basis(A: GradedAlgebra, a: int, b: int, c: int) -> Fraction:
    """m_A(πa, πb, πc) = (−1)^{|b|+1} ⟨a·b, c⟩ on basis elements."""
    v = sum((coef * A.pairing[k][c] for k, coef in A.basis_product(a, b).items()), Fraction(0))
    return -v if A.parity(b) == 0 else v


def m_vectors(A: GradedAlgebra, u: Vector, v: Vector, w: Vector) -> Fraction:
    """Trilinear extension of :func:`m_basis` to (parity-homogeneous) vectors."""
    return sum((cu * cv * cw * m_basis(A, a, b, c)
                for a, cu in u.items() for b, cv in v.items() for c, cw in w.items()), Fraction(0))


def pi_parity(A: GradedAlgebra, idx: int) -> int:
    """Parity of πb for a basis element b (and of its coordinate function)."""
    return 1 - A.parity(idx)


@dataclass(frozen=True)
class CyclicTensor:
    """Components of m_A in the basis {πξ_α} ∪ {πe^α} (e^α dual to ξ_α).

    ``components_odd3[α][β][γ] = m_A(πξ_α, πξ_β, πξ_γ)``;
    ``components_mixed[α][β][γ] = KOSZUL_PP · m_A(πξ_α, πe^β, πe^γ)``.
    """

    r: int
    components_odd3: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    components_mixed: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    dual_basis: Tuple[Tuple[Tuple[int, Fraction], ...], ...]
    sign_convention: str = ("m(πa,πb,πc) = (-1)^(|b|+1) <ab,c>; "
                            "mixed components carry the Koszul sign KOSZUL_PP = -1")


def cyclic_tensor(A: GradedAlgebra) -> CyclicTensor:
    duals = dual_even_basis(A)
    r = A.r
    xi = [A.unit_vector(A.r + al) for al in range(r)]
    odd3 = tuple(tuple(tuple(m_vectors(A, xi[a], xi[b], xi[c]) for c in range(r))
                       for b in range(r)) for a in range(r))
    mixed = tuple(tuple(tuple(KOSZUL_PP * m_vectors(A, xi[a], duals[b], duals[c]) for c in range(r))
                        for b in range(r)) for a in range(r))
    return CyclicTensor(
        r=r,
        components_odd3=odd3,
        components_mixed=mixed,
        dual_basis=tuple(tuple(sorted(d.items())) for d in duals),
    )


def cyclic_sign(A: GradedAlgebra, a: int, b: int, c: int) -> int:
    """Sign ε with m(πa,πb,πc) = ε·m(πb,πc,πa) (πa moved past πb, πc)."""
    qa, qb, qc = (pi_parity(A, k) for k in (a, b, c))
    return -1 if qa * (qb + qc) % 2 else 1


def cyclic_defects(A: GradedAlgebra) -> List[Tuple[int, int, int]]:
    """Basis triples violating graded ℤ/3 cyclic invariance of m_A."""
    bad = []
    for a, b, c in product(range(A.dim), repeat=3):
        if m_basis(A, a, b, c) != cyclic_sign(A, a, b, c) * m_basis(A, b, c, a):
            bad.append((a, b, c))
    return bad
