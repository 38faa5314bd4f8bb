import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypc import (
    Structure,
    causal_graph,
    causal_mapping,
    check_complete,
    classify,
    closure_oracle,
    encode_structure,
    fd,
    is_parsimonious,
    left_reduce,
    member,
    minimal_substructures,
    parse_fds,
    structure_from_dict,
)
from hypc.errors import DomainError, PreconditionError
from hypc.structures import MalformedStructureError

from conftest import DATA_DIR, random_complete_structure


def diagonal(n: int) -> Structure:
    rows = [[i == j for j in range(n)] for i in range(n)]
    return Structure(
        tuple(f"f{i + 1}" for i in range(n)),
        tuple(f"x{i + 1}" for i in range(n)),
        rows,
    )


def lower_triangular(n: int) -> Structure:
    rows = [[j <= i for j in range(n)] for i in range(n)]
    return Structure(
        tuple(f"f{i + 1}" for i in range(n)),
        tuple(f"x{i + 1}" for i in range(n)),
        rows,
    )


# -- completeness -------------------------------------------------------------------


def test_coupled_structure_is_complete(coupled_structure):
    assert check_complete(coupled_structure)


def test_fewer_equations_than_variables_incomplete():
    s = Structure(
        ("f1", "f2"), ("x1", "x2", "x3"), [[1, 1, 0], [0, 1, 1]]
    )
    assert not check_complete(s)


def test_lotka_volterra_structure_is_complete():
    from hypc.structures import load_structure

    s = load_structure(DATA_DIR / "lotka_volterra.json")
    assert len(s.equations) == len(s.variables) == 9
    assert check_complete(s)


# -- minimal substructures -------------------------------------------------------------


def test_minimal_substructures_of_coupled(coupled_structure):
    assert minimal_substructures(coupled_structure) == [
        frozenset({"f1"}),
        frozenset({"f2"}),
        frozenset({"f3"}),
    ]


def test_single_equation_is_its_own_minimal():
    s = Structure(("f1",), ("x1",), [[1]])
    assert minimal_substructures(s) == [frozenset({"f1"})]


def test_residual_after_first_elimination(coupled_structure):
    residual = coupled_structure.restrict(
        ["f4", "f5", "f6", "f7"], ["x4", "x5", "x6", "x7"]
    )
    assert minimal_substructures(residual) == [frozenset({"f4", "f5"})]


def test_minimal_substructures_requires_completeness():
    s = Structure(("f1", "f2"), ("x1", "x2", "x3"), [[1, 1, 0], [0, 1, 1]])
    with pytest.raises(PreconditionError):
        minimal_substructures(s)


def test_malformed_structure_detected():
    s = Structure(
        ("f1", "f2", "f3"),
        ("x1", "x2", "x3"),
        [[1, 0, 0], [1, 0, 0], [1, 1, 1]],
    )
    with pytest.raises(MalformedStructureError):
        minimal_substructures(s)


# -- causal mapping ---------------------------------------------------------------------


def test_mapping_of_coupled_structure(coupled_structure):
    m = causal_mapping(coupled_structure)
    assert m.pairs["f4"] == "x4" and m.pairs["f5"] == "x5"
    assert m.coupled_groups == (frozenset({"x4", "x5"}),)
    assert m.layer == {
        "x1": 0, "x2": 0, "x3": 0, "x4": 1, "x5": 1, "x6": 2, "x7": 2,
    }


def test_mapping_of_diagonal_structure():
    m = causal_mapping(diagonal(3))
    assert m.pairs == {"f1": "x1", "f2": "x2", "f3": "x3"}
    assert m.coupled_groups == ()


def test_mapping_of_lower_triangular_structure():
    m = causal_mapping(lower_triangular(3))
    assert m.pairs == {"f1": "x1", "f2": "x2", "f3": "x3"}
    assert m.layer == {"x1": 0, "x2": 1, "x3": 2}


# -- causal graph ------------------------------------------------------------------------


def test_graph_of_coupled_structure(coupled_structure):
    g = causal_graph(coupled_structure, causal_mapping(coupled_structure))
    assert set(g.edges) == {
        ("x1", "x4"), ("x2", "x4"), ("x3", "x4"), ("x5", "x4"),
        ("x1", "x5"), ("x3", "x5"), ("x4", "x5"),
        ("x4", "x6"), ("x5", "x7"),
    }


def test_graph_of_diagonal_is_edgeless():
    s = diagonal(3)
    g = causal_graph(s, causal_mapping(s))
    assert not list(g.edges)


def test_graph_of_lower_triangular():
    s = lower_triangular(3)
    g = causal_graph(s, causal_mapping(s))
    assert set(g.edges) == {("x1", "x2"), ("x1", "x3"), ("x2", "x3")}


# -- encoding ----------------------------------------------------------------------------


def test_encode_coupled_structure(coupled_structure, sigma_coupled):
    assert encode_structure(coupled_structure) == sigma_coupled


def test_encode_malthus_with_domain_variable():
    from hypc.structures import load_structure

    sigma = encode_structure(load_structure(DATA_DIR / "malthus.json"))
    assert set(sigma.fds) == {
        fd("phi", "x0"),
        fd("phi", "r"),
        fd(["x0", "r", "t", "upsilon"], "x"),
    }


def test_encode_lotka_volterra(sigma_lv):
    from hypc.structures import load_structure

    sigma = encode_structure(load_structure(DATA_DIR / "lotka_volterra.json"))
    assert sigma == sigma_lv
    phi_fds = [f for f in sigma if f.lhs == frozenset({"phi"})]
    upsilon_fds = [f for f in sigma if "upsilon" in f.lhs]
    assert len(phi_fds) == 6 and len(upsilon_fds) == 2


def test_encode_requires_complete_structure():
    s = Structure(("f1", "f2"), ("x1", "x2", "x3"), [[1, 1, 0], [0, 1, 1]])
    with pytest.raises(PreconditionError):
        encode_structure(s)


# -- classification ------------------------------------------------------------------------


def test_classify_examples(sigma_coupled, sigma_lv):
    assert classify("x1", sigma_coupled) == "exogenous"
    assert classify("x4", sigma_coupled) == "endogenous"
    assert classify("t", sigma_lv) == "domain"
    assert classify("phi", sigma_lv) == "epistemic"
    with pytest.raises(DomainError):
        classify("zz", sigma_lv)


# -- structure JSON ---------------------------------------------------------------------


def test_structure_json_with_consistent_matrix():
    s = structure_from_dict(
        {
            "variables": ["x1", "x2"],
            "equations": [
                {"id": "f1", "vars": ["x1"]},
                {"id": "f2", "vars": ["x1", "x2"]},
            ],
            "matrix": [[1, 0], [1, 1]],
        }
    )
    assert check_complete(s)


def test_structure_json_matrix_mismatch():
    with pytest.raises(DomainError):
        structure_from_dict(
            {
                "variables": ["x1", "x2"],
                "equations": [
                    {"id": "f1", "vars": ["x1"]},
                    {"id": "f2", "vars": ["x1", "x2"]},
                ],
                "matrix": [[1, 1], [1, 1]],
            }
        )


def test_reserved_variable_names_rejected():
    with pytest.raises(DomainError):
        Structure(("f1",), ("phi",), [[1]])


# -- properties over random complete structures ------------------------------------------


@given(st.integers(0, 10_000), st.integers(2, 8))
@settings(max_examples=60, deadline=None)
def test_mapping_is_a_bijection(seed, n):
    import random

    s = random_complete_structure(random.Random(seed), n)
    m = causal_mapping(s)
    assert set(m.pairs) == set(s.equations)
    assert set(m.pairs.values()) == set(s.variables)


@given(st.integers(0, 10_000), st.integers(2, 7))
@settings(max_examples=40, deadline=None)
def test_encoding_is_singleton_rhs_and_non_redundant(seed, n):
    import random

    s = random_complete_structure(random.Random(seed), n)
    sigma = encode_structure(s)
    rhs_seen = set()
    for f in sigma:
        assert f.singleton
        (a,) = tuple(f.rhs)
        assert a not in rhs_seen
        rhs_seen.add(a)
        rest = sigma.replace(g for g in sigma if g != f)
        assert not member(rest, f)


@given(st.integers(0, 10_000), st.integers(2, 7))
@settings(max_examples=40, deadline=None)
def test_left_reduced_encoding_is_parsimonious(seed, n):
    import random

    s = random_complete_structure(random.Random(seed), n)
    assert is_parsimonious(left_reduce(encode_structure(s)))


@given(st.integers(0, 10_000), st.integers(2, 7))
@settings(max_examples=40, deadline=None)
def test_cycles_only_within_coupled_groups(seed, n):
    import random

    s = random_complete_structure(random.Random(seed), n)
    m = causal_mapping(s)
    g = causal_graph(s, m)
    cycles = list(nx.simple_cycles(g))
    if not m.coupled_groups:
        assert not cycles
    for cycle in cycles:
        assert any(set(cycle) & group for group in m.coupled_groups)
