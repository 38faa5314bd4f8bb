import math
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypc import (
    FDSet,
    closure_oracle,
    fd,
    fold,
    fold_attribute,
    is_folded,
    is_parsimonious,
    parse_fds,
)
from hypc.errors import CapacityError, DomainError, PreconditionError

from conftest import GAMMA_LV_FOLDED_TEXT, GAMMA_LV_TEXT, random_parsimonious

TWO_CYCLE = FDSet([fd("A", "B"), fd("B", "A")])
CHAIN_ABC = FDSet([fd("A", "B"), fd("B", "C")])


# -- attribute folding --------------------------------------------------------------


def test_fold_attribute_backtraces_through_cycle(sigma_coupled):
    assert fold_attribute(sigma_coupled, "x6") == {"phi", "upsilon", "x5"}


def test_fold_attribute_of_two_cycle():
    assert fold_attribute(TWO_CYCLE, "B") == {"A"}


def test_fold_attribute_compresses_chain():
    assert fold_attribute(CHAIN_ABC, "C") == {"A"}


def test_fold_attribute_requires_a_determining_fd():
    with pytest.raises(DomainError):
        fold_attribute(TWO_CYCLE, "C" if "C" in TWO_CYCLE.universe else "A_missing")


def test_fold_attribute_requires_parsimony():
    sigma = FDSet([fd("A", "C"), fd("B", "C")])
    with pytest.raises(PreconditionError):
        fold_attribute(sigma, "C")


# -- folding of a whole set ----------------------------------------------------------


def test_folding_of_coupled_encoding(sigma_coupled, sigma_coupled_folded):
    result = fold(sigma_coupled)
    assert result.folded == sigma_coupled_folded


def test_folding_of_learned_correlations():
    gamma = parse_fds(GAMMA_LV_TEXT)
    assert fold(gamma).folded == parse_fds(GAMMA_LV_FOLDED_TEXT)


def test_folding_fixpoint_on_two_cycle():
    assert fold(TWO_CYCLE).folded == TWO_CYCLE


def test_folding_trace_is_one_to_one(sigma_coupled):
    result = fold(sigma_coupled)
    assert len(result.folded) == len(sigma_coupled)
    assert [t.target for t in result.trace] == [
        next(iter(f.rhs)) for f in sigma_coupled
    ]


# -- folded-fd oracle ----------------------------------------------------------------


def test_folded_fd_accepted(sigma_coupled):
    assert is_folded(sigma_coupled, fd(["phi", "upsilon", "x5"], "x6"))


def test_partially_backtraced_fd_rejected(sigma_coupled):
    # {phi, upsilon, x5} determines {x4, upsilon} but not conversely, so
    # the chain through x4 is not finished.
    assert is_folded(sigma_coupled, fd(["x4", "upsilon"], "x6")) is False


def test_trivial_fd_never_folded(sigma_coupled):
    assert is_folded(sigma_coupled, fd(["x4", "upsilon"], "x4")) is False


def test_is_folded_capacity_guard():
    sigma = FDSet([], universe=[f"a{i}" for i in range(11)])
    with pytest.raises(CapacityError):
        is_folded(sigma, fd("a0", "a1"))


# -- properties -----------------------------------------------------------------------


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_fold_outputs_are_folded_and_order_invariant(seed):
    import random

    rng = random.Random(seed)
    sigma = random_parsimonious(rng, max_attrs=8)
    for f in sigma:
        (a,) = tuple(f.rhs)
        folded_lhs = fold_attribute(sigma, a)
        assert is_folded(sigma, fd(folded_lhs, a))
        shuffled = list(sigma.fds)
        rng.shuffle(shuffled)
        assert fold_attribute(FDSet(shuffled, universe=sigma.universe), a) == folded_lhs


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_folding_is_sound_and_preserves_parsimony(seed):
    import random

    sigma = random_parsimonious(random.Random(seed), max_attrs=6)
    folded = fold(sigma).folded
    assert is_parsimonious(folded)
    derivable = set(closure_oracle(sigma).fds)
    for f in folded:
        assert f.trivial or f in derivable


@pytest.mark.parametrize("k", range(2, 7))
def test_fold_halts_on_cycles(k):
    names = [f"A{i}" for i in range(k)]
    sigma = FDSet([fd(names[i], names[(i + 1) % k]) for i in range(k)])
    for i in range(k):
        assert fold_attribute(sigma, names[(i + 1) % k]) == {names[i]}


def _chain_fds(n: int) -> FDSet:
    return FDSet(
        [fd(f"c{i}", f"c{i + 1}") for i in range(n)],
        universe=[f"c{i}" for i in range(n + 1)],
    )


def test_fold_attribute_quadratic_growth():
    # Bounded-growth check on chains (ascending fd order is the worst
    # case: one fd consumed per pass).
    sizes = [2 ** k for k in range(4, 10)]
    times = []
    for n in sizes:
        sigma = _chain_fds(n)
        best = min(_timed(lambda: fold_attribute(sigma, f"c{n}")) for _ in range(3))
        times.append(best)
    slope = (math.log(times[-1]) - math.log(times[0])) / (
        math.log(sizes[-1]) - math.log(sizes[0])
    )
    assert slope <= 2.3


def _timed(thunk) -> float:
    start = time.perf_counter()
    thunk()
    return time.perf_counter() - start
