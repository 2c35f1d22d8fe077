import json
from fractions import Fraction
from itertools import product

import pytest

from bvmatrix.algebra import (
    AlgebraFormatError, algebra_from_dict, algebra_to_dict, check_structure, cyclic_defects,
    cyclic_tensor, even_algebra, load_algebra, m_basis, matrix_extension, pi_parity, tensor_with_Q1,
)
from bvmatrix.library import BUNDLED, build, bundled, bundled_path, dual_numbers, gl2, t2, unit_field
from oracles.structure_oracle import report as oracle_report

Q1_DOC = {
    "basis_even": ["1"], "basis_odd": ["ξ"],
    "mult": [["1", "1", "1", 1], ["1", "ξ", "ξ", 1], ["ξ", "1", "ξ", 1], ["ξ", "ξ", "1", 1]],
    "pairing": [["1", "ξ", 1], ["ξ", "1", 1]],
}

EXPECTED = {
    "q1": dict(associative=True, unimodular=True),
    "gl2_q1": dict(associative=True, unimodular=True),
    "dualnum_q1": dict(associative=True, unimodular=True),
    "t2_q1": dict(associative=True, unimodular=False),
    "nonassoc": dict(associative=False, unimodular=True),
}


class TestLoading:
    def test_q1_document(self):
        A = load_algebra(Q1_DOC)
        assert (A.r, A.s, A.dim) == (1, 1, 2)
        assert A.basis_product(1, 1) == {0: 1}
        assert A.pairing[0][1] == 1

    def test_parity_violation(self):
        doc = dict(Q1_DOC, mult=Q1_DOC["mult"] + [["ξ", "ξ", "ξ", 1]])
        with pytest.raises(AlgebraFormatError, match="parity"):
            load_algebra(doc)

    def test_t2_loads_then_fails(self):
        A = t2()
        assert (A.r, A.s) == (3, 0)
        rep = check_structure(A)
        assert rep.unimodular.status == "fail"
        assert rep.unimodular.witness == ("E11",)
        assert rep.nondegenerate.status == "fail"

    @pytest.mark.parametrize("doc, match", [
        ({"basis_even": ["1"], "basis_odd": ["ξ"], "mult": []}, "missing key"),
        (dict(Q1_DOC, mult=[["1", "1", "1", "1/x"]]), "rational"),
        (dict(Q1_DOC, mult=[["1", "1", "1", 0.5]]), "rational"),
        (dict(Q1_DOC, mult=[["1", "1", "q", 1]]), "unknown basis label"),
        (dict(Q1_DOC, mult=[["1", "1", 1]]), "4 items"),
        (dict(Q1_DOC, basis_even=["1", "1"]), "duplicate"),
        (dict(Q1_DOC, involution=[["ξ", "ξ", 1]]), "not an even"),
        ([1, 2], "JSON object"),
    ])
    def test_malformed(self, doc, match):
        with pytest.raises(AlgebraFormatError, match=match):
            algebra_from_dict(doc)

    def test_invalid_json_file(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(AlgebraFormatError):
            load_algebra(p)

    def test_rationals(self):
        doc = dict(Q1_DOC, pairing=[["1", "ξ", "3/2"], ["ξ", "1", "3/2"]])
        assert load_algebra(doc).pairing[0][1] == Fraction(3, 2)

    @pytest.mark.parametrize("name", BUNDLED)
    def test_json_round_trip(self, name, tmp_path):
        A = bundled(name)
        doc = algebra_to_dict(A)
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc, ensure_ascii=False))
        B = load_algebra(p)
        assert algebra_to_dict(B) == doc

    @pytest.mark.parametrize("name", BUNDLED)
    def test_data_files_match_constructions(self, name):
        assert algebra_to_dict(bundled(name)) == algebra_to_dict(build(name))
        assert bundled_path(name).is_file()


class TestStructure:
    def test_q1_all_pass(self):
        rep = check_structure(bundled("q1"))
        assert rep.all_pass
        assert rep.involution_valid.status == "pass"
        assert rep.positive_definite_real_form.status == "pass"

    def test_gl2_q1_all_pass(self):
        rep = check_structure(bundled("gl2_q1"))
        assert rep.all_pass
        assert bundled("gl2_q1").dim == 8

    def test_dualnum_q1(self):
        A = bundled("dualnum_q1")
        rep = check_structure(A)
        assert A.dim == 4
        assert rep.associative.passed and rep.unimodular.passed and rep.invariant_pairing.passed

    def test_t2_q1_unimodular_fail(self):
        rep = check_structure(bundled("t2_q1"))
        assert rep.unimodular.status == "fail"
        assert rep.unimodular.witness == ("E11",)
        assert rep.associative.passed and rep.nondegenerate.passed and rep.invariant_pairing.passed

    def test_nonassoc_associativity_fail(self):
        rep = check_structure(bundled("nonassoc"))
        assert rep.associative.status == "fail" and len(rep.associative.witness) == 3
        assert rep.unimodular.passed and rep.invariant_pairing.passed and rep.nondegenerate.passed

    @pytest.mark.parametrize("name", BUNDLED)
    def test_oracle_equivalence(self, name):
        A = bundled(name)
        rep = check_structure(A)
        oracle = oracle_report(algebra_to_dict(A))
        for key, value in oracle.items():
            assert getattr(rep, key).passed == value, key
        for key, value in EXPECTED[name].items():
            assert oracle[key] == value

    def test_non_symmetric_pairing(self):
        doc = dict(Q1_DOC, pairing=[["1", "ξ", 1], ["ξ", "1", 2]])
        assert check_structure(load_algebra(doc)).invariant_pairing.status == "fail"

    def test_even_pairing_rejected(self):
        doc = dict(Q1_DOC, pairing=[["1", "1", 1], ["1", "ξ", 1], ["ξ", "1", 1]])
        assert check_structure(load_algebra(doc)).invariant_pairing.status == "fail"

    def test_dimension_mismatch(self):
        doc = {"basis_even": ["1", "u"], "basis_odd": ["ξ"], "mult": [], "pairing": [["1", "ξ", 1], ["ξ", "1", 1]]}
        assert check_structure(load_algebra(doc)).nondegenerate.status == "fail"

    def test_involution_absent(self):
        doc = dict(Q1_DOC)
        assert check_structure(load_algebra(doc)).involution_valid.status == "absent"

    def test_matrix_extension_consistent(self):
        Ah = matrix_extension(bundled("q1"), 2)
        oracle = oracle_report(algebra_to_dict(Ah))
        assert all(oracle.values())


class TestTensorWithQ1:
    def test_unit_gives_q1(self):
        A = tensor_with_Q1(unit_field())
        assert algebra_to_dict(A)["mult"] == algebra_to_dict(bundled("q1"))["mult"]
        assert load_algebra(Q1_DOC).pairing == A.pairing

    @pytest.mark.parametrize("A0", [unit_field(), gl2(), dual_numbers()], ids=["k", "gl2", "dualnum"])
    def test_preserves_associativity_and_unimodularity(self, A0):
        base = check_structure(A0)
        A = tensor_with_Q1(A0)
        rep = check_structure(A)
        assert base.associative.passed and base.unimodular.passed
        assert rep.associative.passed and rep.unimodular.passed and rep.nondegenerate.passed
        assert A.dim == 2 * A0.r

    def test_degenerate_eta(self):
        A0 = even_algebra(["1", "u"], {("1", "1"): {"1": 1}, ("1", "u"): {"u": 1}, ("u", "1"): {"u": 1}},
                          eta={("1", "1"): 1})
        with pytest.raises(AlgebraFormatError, match="degenerate"):
            tensor_with_Q1(A0)

    def test_non_invariant_eta(self):
        A0 = even_algebra(["1", "u"], {("1", "1"): {"1": 1}, ("1", "u"): {"u": 1}, ("u", "1"): {"u": 1}},
                          eta={("1", "1"): 1, ("u", "u"): 1})
        with pytest.raises(AlgebraFormatError, match="invariant"):
            tensor_with_Q1(A0)

    def test_missing_eta(self):
        with pytest.raises(AlgebraFormatError):
            tensor_with_Q1(t2())


class TestCyclicTensor:
    def test_q1_component(self):
        T = cyclic_tensor(bundled("q1"))
        assert T.components_odd3[0][0][0] == 1

    @pytest.mark.parametrize("name", BUNDLED)
    def test_cyclic_invariance(self, name):
        assert cyclic_defects(bundled(name)) == []

    @pytest.mark.parametrize("name", ["q1", "gl2_q1", "dualnum_q1", "nonassoc"])
    def test_cyclic_components_oracle(self, name):
        # m(πa,πb,πc) = (−1)^{|πa|(|πb|+|πc|)} m(πb,πc,πa), evaluated from the sign formula directly
        A = bundled(name)
        for a, b, c in product(range(A.dim), repeat=3):
            qa, qb, qc = (pi_parity(A, k) for k in (a, b, c))
            ab = A.basis_product(a, b)
            lhs = sum((v * A.pairing[k][c] for k, v in ab.items()), Fraction(0)) * (1 if A.parity(b) else -1)
            assert lhs == m_basis(A, a, b, c)
            assert m_basis(A, a, b, c) == (-1) ** (qa * (qb + qc)) * m_basis(A, b, c, a)

    def test_odd3_totally_cyclic(self):
        T = cyclic_tensor(bundled("gl2_q1"))
        r = T.r
        for a, b, c in product(range(r), repeat=3):
            assert T.components_odd3[a][b][c] == T.components_odd3[b][c][a]

    def test_dualnum_vanishing(self):
        A = bundled("dualnum_q1")
        T = cyclic_tensor(A)
        u_count = [1 if "u" in l else 0 for l in A.basis_odd]
        for a, b, c in product(range(2), repeat=3):
            if u_count[a] + u_count[b] + u_count[c] > 1:
                assert T.components_odd3[a][b][c] == 0
        assert T.components_odd3[0][0][1] != 0

    def test_basis_permutation(self):
        A = bundled("gl2_q1")
        doc = algebra_to_dict(A)
        perm = [2, 0, 3, 1]  # new position k holds old basis element perm[k]
        doc2 = dict(doc, basis_even=[doc["basis_even"][p] for p in perm],
                    basis_odd=[doc["basis_odd"][p] for p in perm])
        B = algebra_from_dict(doc2)
        TA, TB = cyclic_tensor(A), cyclic_tensor(B)
        for a, b, c in product(range(4), repeat=3):
            assert TB.components_odd3[a][b][c] == TA.components_odd3[perm[a]][perm[b]][perm[c]]
            assert TB.components_mixed[a][b][c] == TA.components_mixed[perm[a]][perm[b]][perm[c]]

    def test_degenerate_pairing(self):
        with pytest.raises(AlgebraFormatError):
            cyclic_tensor(load_algebra(dict(Q1_DOC, pairing=[])))
