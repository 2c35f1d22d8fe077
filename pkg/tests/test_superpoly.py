from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvmatrix.superpoly import (
    BRACKET_XP, SymbolSpace, SymbolSpaceMismatch, bv_laplacian, bv_laplacian_literal,
    coordinate_bracket, exp_closedness_witness, from_terms, odd_poisson_bracket, parse, render,
)
from strategies import SPACE, homogeneous, polynomials


def sgn(*parities):
    return -1 if sum(parities) % 2 else 1


S1 = SymbolSpace(2, 1)  # two odd P's and two X's at N = 1
X1, X2 = S1.X(0, 0, 0), S1.X(1, 0, 0)
P1, P2 = S1.P(0, 0, 0), S1.P(1, 0, 0)


class TestArithmetic:
    def test_grassmann_antisymmetry(self):
        assert P1 * P2 == -(P2 * P1)
        assert (P1 * P1).is_zero()

    def test_hand_expansion(self):
        q = P1 * P2
        assert (X1 + q) * (X1 - q) == X1 * X1

    def test_mixed_universe(self):
        with pytest.raises(SymbolSpaceMismatch):
            _ = X1 + SPACE.X(0, 0, 0)

    def test_scalars(self):
        assert X1 * 3 == 3 * X1 == X1 + X1 + X1
        assert (X1 - X1) == 0

    @given(homogeneous(), homogeneous())
    def test_supercommutative(self, f, g):
        assert f * g == (g * f).scale(sgn(f.parity() * g.parity()))

    @given(polynomials(max_terms=3), polynomials(max_terms=3), polynomials(max_terms=3))
    def test_associative(self, f, g, h):
        assert (f * g) * h == f * (g * h)

    @given(polynomials(), polynomials(), polynomials())
    def test_distributive(self, f, g, h):
        assert f * (g + h) == f * g + f * h

    @given(polynomials())
    def test_normalization_idempotent(self, f):
        again = from_terms(f.space, [(m, c) for m, c in f])
        assert again == f
        for m, c in f:
            assert c != 0
            odd = [s for s in m if f.space.is_odd(s)]
            assert len(odd) == len(set(odd))


class TestDerivatives:
    def test_left_sign(self):
        assert (P2 * P1).derivative(S1.index("P", 0, 0, 0)) == -P2

    def test_even(self):
        x = S1.index("X", 0, 0, 0)
        assert (X1 ** 3).derivative(x) == (X1 ** 2).scale(3)

    def test_order_of_odd_derivatives(self):
        p1, p2 = S1.index("P", 0, 0, 0), S1.index("P", 1, 0, 0)
        f = P1 * P2
        assert f.derivative(p2).derivative(p1) == -1  # ∂/∂P₁ ∂/∂P₂
        assert f.derivative(p1).derivative(p2) == 1

    @given(homogeneous(), homogeneous(), st.sampled_from(list(SPACE.ids("X")) + list(SPACE.ids("P"))))
    def test_leibniz(self, f, g, s):
        ps = int(SPACE.is_odd(s))
        lhs = (f * g).derivative(s)
        rhs = f.derivative(s) * g + (f * g.derivative(s)).scale(sgn(ps * f.parity()))
        assert lhs == rhs

    @given(polynomials(), st.sampled_from(range(8)), st.sampled_from(range(8)))
    def test_derivatives_supercommute(self, f, a, b):
        pa, pb = int(SPACE.is_odd(a)), int(SPACE.is_odd(b))
        assert f.derivative(b).derivative(a) == f.derivative(a).derivative(b).scale(sgn(pa * pb))


class TestLaplacian:
    def test_matched_pair(self):
        s = SymbolSpace(1, 1)
        assert bv_laplacian(s.X(0, 0, 0) * s.P(0, 0, 0)) == 1

    def test_no_p(self):
        assert bv_laplacian(X1 ** 3 + X1 * X2).is_zero()

    def test_rejects_forms(self):
        s = SymbolSpace(1, 1)
        with pytest.raises(ValueError):
            bv_laplacian(s.dX(0, 0, 0))

    @settings(max_examples=100)
    @given(polynomials(max_terms=5))
    def test_square_zero(self, f):
        assert bv_laplacian(bv_laplacian(f)).is_zero()

    @given(polynomials(SymbolSpace(2, 1), max_terms=5))
    def test_square_zero_r2(self, f):
        assert bv_laplacian(bv_laplacian(f)).is_zero()

    @given(polynomials(kinds=("X", "P", "Y")))
    def test_fast_matches_literal(self, f):
        assert bv_laplacian(f) == bv_laplacian_literal(f)

    @given(homogeneous())
    def test_flips_parity(self, f):
        d = bv_laplacian(f)
        if d:
            assert d.parity() == 1 - f.parity()


class TestBracket:
    def test_coordinate_pair(self):
        s = SymbolSpace(1, 1)
        assert odd_poisson_bracket(s.X(0, 0, 0), s.P(0, 0, 0)) == BRACKET_XP

    def test_transposed_pairing(self):
        # X[1;1,2] pairs with P[1;2,1]
        assert odd_poisson_bracket(SPACE.X(0, 0, 1), SPACE.P(0, 1, 0)) == BRACKET_XP
        assert odd_poisson_bracket(SPACE.X(0, 0, 1), SPACE.P(0, 0, 1)).is_zero()

    def test_no_p(self):
        assert odd_poisson_bracket(X1 ** 2, X1 ** 3).is_zero()

    @given(polynomials(), polynomials())
    def test_matches_coordinate_formula(self, f, g):
        assert odd_poisson_bracket(f, g) == coordinate_bracket(f, g)

    @given(homogeneous(), homogeneous())
    def test_graded_antisymmetry(self, f, g):
        a, b = f.parity(), g.parity()
        assert odd_poisson_bracket(f, g) == odd_poisson_bracket(g, f).scale(-sgn((a + 1) * (b + 1)))

    @given(homogeneous(max_terms=3, max_len=3), homogeneous(max_terms=3, max_len=3),
           homogeneous(max_terms=3, max_len=3))
    def test_jacobi(self, f, g, h):
        a, b = f.parity(), g.parity()
        br = odd_poisson_bracket
        lhs = br(f, br(g, h))
        rhs = br(br(f, g), h) + br(g, br(f, h)).scale(sgn((a + 1) * (b + 1)))
        assert lhs == rhs

    @given(homogeneous(), homogeneous(), homogeneous())
    def test_leibniz(self, f, g, h):
        a, b = f.parity(), g.parity()
        br = odd_poisson_bracket
        assert br(f, g * h) == br(f, g) * h + (g * br(f, h)).scale(sgn((a + 1) * b))

    @given(homogeneous(), homogeneous())
    def test_laplacian_derivation(self, f, g):
        a = f.parity()
        br = odd_poisson_bracket
        lhs = bv_laplacian(br(f, g))
        rhs = br(bv_laplacian(f), g) + br(f, bv_laplacian(g)).scale(sgn(a + 1))
        assert lhs == rhs

    @given(homogeneous(max_terms=3, max_len=3), homogeneous(max_terms=3, max_len=3),
           homogeneous(max_terms=3, max_len=3))
    def test_second_order(self, f, g, h):
        # Δ(fgh) via Δ on pairs and singles (seven-term identity)
        D = bv_laplacian
        a, b = f.parity(), g.parity()
        lhs = D(f * g * h)
        rhs = (D(f * g) * h + (f * D(g * h)).scale(sgn(a)) + (g * D(f * h)).scale(sgn(a * b + b))
               - D(f) * g * h - (f * D(g) * h).scale(sgn(a)) - (f * g * D(h)).scale(sgn(a + b)))
        assert lhs == rhs


class TestExpClosedness:
    def test_no_p(self):
        assert exp_closedness_witness(X1 ** 3).is_zero()

    def test_even_nilpotent_nonzero(self):
        g = X1 * P1 * P2
        w = exp_closedness_witness(g)
        assert w == bv_laplacian(g) + odd_poisson_bracket(g, g).scale(Fraction(1, 2))
        assert w == P2  # Δ(X₁P₁P₂) = P₂, and {g, g} = 0

    def test_rejects_odd(self):
        s = SymbolSpace(1, 1)
        with pytest.raises(ValueError):
            exp_closedness_witness(s.X(0, 0, 0) * s.P(0, 0, 0))

    @given(polynomials(SymbolSpace(2, 1), max_terms=3, max_len=4))
    def test_exponential_identity(self, f):
        # f built from monomials with ≥ 2 P's is nilpotent, so e^f is a finite sum
        f = f.parity_parts()[0].filter(lambda m: sum(1 for s in m if S1.is_odd(s)) >= 2)
        e, term, k = S1.one(), S1.one(), 1
        while True:
            term = (term * f).scale(Fraction(1, k))
            if not term:
                break
            e, k = e + term, k + 1
        assert bv_laplacian(e) == exp_closedness_witness(f) * e


class TestRendering:
    def test_format(self):
        s = SymbolSpace(1, 2)
        f = (s.X(0, 0, 1) * s.P(0, 1, 0)).scale(Fraction(3, 2))
        assert render(f) == "3/2·X[1;1,2]·P[1;2,1]"
        assert render(s.zero()) == "0"

    @given(polynomials(kinds=("X", "P", "Y")))
    def test_round_trip(self, f):
        assert parse(f.space, render(f)) == f

    def test_parse_reordered_word(self):
        assert parse(S1, "P[2;1,1]·P[1;1,1]") == -(P1 * P2)

    def test_parse_error(self):
        with pytest.raises(ValueError):
            parse(S1, "Q[1;1,1]")
