"""Bundled algebras: positive instances and the two control algebras."""
from __future__ import annotations

import json
from importlib import resources

from .algebra import GradedAlgebra, algebra_from_dict, algebra_to_dict, even_algebra, \
    tensor_with_Q1, trivial_extension

BUNDLED = ("q1", "gl2_q1", "dualnum_q1", "t2_q1", "nonassoc")


def unit_field() -> GradedAlgebra:
    """k with η(1,1) = 1 and 1† = 1."""
    return even_algebra(["1"], {("1", "1"): {"1": 1}}, eta={("1", "1"): 1},
                        involution={"1": {"1": 1}}, name="k")


def gl2() -> GradedAlgebra:
    """2×2 matrices, η = trace form, † = transpose (conjugation acts on scalars)."""
    labels = ["E11", "E12", "E21", "E22"]
    mult, eta, inv = {}, {}, {}
    for i in (1, 2):
        for j in (1, 2):
            inv[f"E{i}{j}"] = {f"E{j}{i}": 1}
            for k in (1, 2):
                mult[(f"E{i}{j}", f"E{j}{k}")] = {f"E{i}{k}": 1}
                eta[(f"E{i}{j}", f"E{j}{i}")] = 1
    return even_algebra(labels, mult, eta=eta, involution=inv, name="gl2")


def dual_numbers() -> GradedAlgebra:
    """k[u]/u² with η(1,u) = η(u,1) = 1."""
    mult = {("1", "1"): {"1": 1}, ("1", "u"): {"u": 1}, ("u", "1"): {"u": 1}}
    return even_algebra(["1", "u"], mult, eta={("1", "u"): 1, ("u", "1"): 1}, name="dualnum")


def t2() -> GradedAlgebra:
    """Upper-triangular 2×2 matrices (basis E11, E22, E12); not unimodular."""
    mult = {
        ("E11", "E11"): {"E11": 1},
        ("E11", "E12"): {"E12": 1},
        ("E22", "E22"): {"E22": 1},
        ("E12", "E22"): {"E12": 1},
    }
    return even_algebra(["E11", "E22", "E12"], mult, name="t2")


def nonassoc_even() -> GradedAlgebra:
    """a·b = c, b·c = a, c·a = b (all other products 0), η = identity.

    η(xy, z) is cyclic in (x, y, z), so η is invariant and symmetric, and the
    algebra is unimodular; it is neither commutative nor associative:
    (a·b)·a = c·a = b while a·(b·a) = 0.
    """
    mult = {("a", "b"): {"c": 1}, ("b", "c"): {"a": 1}, ("c", "a"): {"b": 1}}
    return even_algebra(["a", "b", "c"], mult,
                        eta={("a", "a"): 1, ("b", "b"): 1, ("c", "c"): 1}, name="nonassoc_even")


def build(name: str) -> GradedAlgebra:
    if name == "q1":
        return tensor_with_Q1(unit_field(), name="q1")
    if name == "gl2_q1":
        return tensor_with_Q1(gl2(), name="gl2_q1")
    if name == "dualnum_q1":
        return tensor_with_Q1(dual_numbers(), name="dualnum_q1")
    if name == "t2_q1":
        # t₂ carries no nondegenerate invariant even form, so the odd pairing
        # comes from the trivial extension rather than from ⊗Q(1)
        return trivial_extension(t2(), name="t2_q1")
    if name == "nonassoc":
        return tensor_with_Q1(nonassoc_even(), name="nonassoc")
    raise KeyError(f"unknown bundled algebra {name!r}; choose from {BUNDLED}")


def bundled(name: str) -> GradedAlgebra:
    """Load a bundled algebra from the packaged JSON data files."""
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled algebra {name!r}; choose from {BUNDLED}")
    text = resources.files("bvmatrix.data").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return algebra_from_dict(json.loads(text), name=name)


def bundled_path(name: str):
    return resources.files("bvmatrix.data").joinpath(f"{name}.json")


def dumps_compact(doc: dict) -> str:
    """JSON with one table entry per line."""
    lines = ["{"]
    items = list(doc.items())
    for k, (key, val) in enumerate(items):
        tail = "," if k < len(items) - 1 else ""
        if isinstance(val, list) and val and isinstance(val[0], list):
            rows = [json.dumps(row, ensure_ascii=False) for row in val]
            lines.append(f"  {json.dumps(key)}: [")
            lines.extend(f"    {r}," for r in rows[:-1])
            lines.append(f"    {rows[-1]}")
            lines.append(f"  ]{tail}")
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(val, ensure_ascii=False)}{tail}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_bundled(directory) -> None:
    from pathlib import Path
    for name in BUNDLED:
        Path(directory, f"{name}.json").write_text(dumps_compact(algebra_to_dict(build(name))),
                                                   encoding="utf-8")
