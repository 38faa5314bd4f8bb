"""Shared fixtures: the worked examples, random generators, and the
independent classical-algebra oracle used to validate query rewriting."""

from __future__ import annotations

import os
import random
from pathlib import Path

import pytest

from hypc import (
    CertainRelation,
    FDSet,
    Structure,
    URelation,
    fd,
    left_reduce,
    parse_fds,
    structure_from_dict,
)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

SEED = int(os.environ.get("HYPC_SEED", "0"))


@pytest.fixture
def rng():
    return random.Random(SEED)


# -- the coupled seven-variable system and its encodings -------------------------

SIGMA_COUPLED_TEXT = """
phi -> x1
phi -> x2
phi -> x3
x1 x2 x3 x5 upsilon -> x4
x1 x3 x4 upsilon -> x5
x4 upsilon -> x6
x5 upsilon -> x7
"""

SIGMA_COUPLED_FOLDED_TEXT = """
phi -> x1
phi -> x2
phi -> x3
phi upsilon x5 -> x4
phi upsilon x4 -> x5
phi upsilon x5 -> x6
phi upsilon x4 -> x7
"""


@pytest.fixture
def sigma_coupled() -> FDSet:
    return parse_fds(SIGMA_COUPLED_TEXT)


@pytest.fixture
def sigma_coupled_folded() -> FDSet:
    return parse_fds(SIGMA_COUPLED_FOLDED_TEXT)


@pytest.fixture
def coupled_structure() -> Structure:
    return structure_from_dict(
        {
            "variables": ["x1", "x2", "x3", "x4", "x5", "x6", "x7"],
            "domain_prefix": 0,
            "equations": [
                {"id": "f1", "vars": ["x1"]},
                {"id": "f2", "vars": ["x2"]},
                {"id": "f3", "vars": ["x3"]},
                {"id": "f4", "vars": ["x1", "x2", "x3", "x4", "x5"]},
                {"id": "f5", "vars": ["x1", "x3", "x4", "x5"]},
                {"id": "f6", "vars": ["x4", "x6"]},
                {"id": "f7", "vars": ["x5", "x7"]},
            ],
        }
    )


# -- population-dynamics fixtures -------------------------------------------------

GAMMA_LV_TEXT = """
x0 -> y0
b -> d
p -> r
x0 b p t upsilon y -> x
y0 d r t upsilon x -> y
"""

GAMMA_LV_FOLDED_TEXT = """
x0 -> y0
b -> d
p -> r
x0 b p t upsilon y -> x
x0 b p t upsilon x -> y
"""


@pytest.fixture
def sigma_lv() -> FDSet:
    return parse_fds(
        """
        phi -> x0
        phi -> b
        phi -> p
        phi -> y0
        phi -> d
        phi -> r
        t x0 b p y upsilon -> x
        t y0 d r x upsilon -> y
        """
    )


@pytest.fixture
def h0_rel() -> CertainRelation:
    return CertainRelation.from_csv(
        "H0", (DATA_DIR / "population_h0.csv").read_text(), key=("phi", "upsilon")
    )


@pytest.fixture
def lv_inputs() -> CertainRelation:
    text = (DATA_DIR / "lv_inputs.csv").read_text()
    return CertainRelation.from_csv("H3_1", text, key=("phi", "tid"))


@pytest.fixture
def lv_series() -> CertainRelation:
    text = (DATA_DIR / "lv_series.csv").read_text()
    return CertainRelation.from_csv(
        "H3_2", text, key=("phi", "upsilon", "t", "y", "tid")
    )


# -- random generators -------------------------------------------------------------


def random_fdset(rng: random.Random, max_attrs: int = 6, max_fds: int = 6) -> FDSet:
    n = rng.randint(1, max_attrs)
    names = [f"a{i}" for i in range(n)]
    fds = []
    for _ in range(rng.randint(0, max_fds)):
        lhs = rng.sample(names, rng.randint(1, n))
        fds.append(fd(lhs, [rng.choice(names)]))
    return FDSet(fds, universe=names)


def random_parsimonious(rng: random.Random, max_attrs: int = 8) -> FDSet:
    """Singleton-rhs FDs with pairwise distinct rhs attributes are
    non-redundant by construction; left-reduction makes them canonical,
    hence parsimonious."""
    n = rng.randint(2, max_attrs)
    names = [f"a{i}" for i in range(n)]
    k = rng.randint(1, n - 1)
    fds = []
    for target in rng.sample(names, k):
        pool = [b for b in names if b != target]
        lhs = rng.sample(pool, rng.randint(1, min(3, len(pool))))
        fds.append(fd(lhs, target))
    return left_reduce(FDSet(fds, universe=names))


def random_complete_structure(rng: random.Random, n: int, extra: float = 0.25) -> Structure:
    """A permutation diagonal guarantees a perfect matching, hence a
    well-formed complete structure; extra entries add couplings."""
    names = [f"x{i + 1}" for i in range(n)]
    eqs = [f"f{i + 1}" for i in range(n)]
    perm = rng.sample(range(n), n)
    rows = [[False] * n for _ in range(n)]
    for i in range(n):
        rows[i][perm[i]] = True
        for j in range(n):
            if rng.random() < extra:
                rows[i][j] = True
    return Structure(tuple(eqs), tuple(names), rows, 0)


# -- classical relational algebra oracle (plain tuples, set semantics) ---------------


def classical_select(cols, rows, pred: dict):
    idx = {a: cols.index(a) for a in pred}
    return cols, frozenset(r for r in rows if all(r[idx[a]] == v for a, v in pred.items()))


def classical_project(cols, rows, keep):
    keep = [a for a in cols if a in set(keep)]
    idx = [cols.index(a) for a in keep]
    return tuple(keep), frozenset(tuple(r[i] for i in idx) for r in rows)


def classical_join(cols1, rows1, cols2, rows2):
    shared = [a for a in cols1 if a in cols2]
    extra = [a for a in cols2 if a not in shared]
    i1 = [cols1.index(a) for a in shared]
    i2 = [cols2.index(a) for a in shared]
    ie = [cols2.index(a) for a in extra]
    out = set()
    for r1 in rows1:
        for r2 in rows2:
            if all(r1[i] == r2[j] for i, j in zip(i1, i2)):
                out.add(tuple(r1) + tuple(r2[i] for i in ie))
    return tuple(cols1) + tuple(extra), frozenset(out)


def eval_classical(tree, dbs: dict):
    """Evaluate a parsed query tree against classical (cols, rows) pairs."""
    if isinstance(tree, str):
        return dbs[tree]
    head = tree[0]
    if head == "select":
        pred = dict([(tree[1][1], tree[1][2])])
        cols, rows = eval_classical(tree[2], dbs)
        return classical_select(cols, rows, pred)
    if head == "project":
        cols, rows = eval_classical(tree[2], dbs)
        return classical_project(cols, rows, tree[1])
    if head == "join":
        c1, r1 = eval_classical(tree[1], dbs)
        c2, r2 = eval_classical(tree[2], dbs)
        return classical_join(c1, r1, c2, r2)
    raise ValueError(head)
