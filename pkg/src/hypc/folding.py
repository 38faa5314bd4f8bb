"""Acyclic backtracing of FD sets: attribute foldings and the folded set.

Chained dependencies such as ``A -> B, B -> C`` compress to ``A -> C``
by pseudo-transitivity, but cyclic pairs (simultaneously determined
attributes) must survive the compression.  The fold of an attribute
backtraces its causal chain, consuming acyclic links and keeping the
cyclic ones, and the fold of a whole set replaces every lhs by the
fold of its rhs attribute.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CapacityError, DomainError, PreconditionError
from .fd import FD, FDSet, is_parsimonious, member


def _require_parsimonious(sigma: FDSet) -> None:
    if not is_parsimonious(sigma):
        raise PreconditionError("fd set is not parsimonious")


def _backtrace(sigma: FDSet, target: str):
    """Run the backtrace loop; returns (folded lhs, consumed fds, consumed attrs)."""
    parents = {target}
    consumed_attrs: set[str] = set()
    consumed_fds: list[FD] = []
    remaining = list(sigma.fds)
    size = 0
    while size < len(parents):
        size = len(parents)
        still = []
        for f in remaining:
            (b,) = tuple(f.rhs)
            if b in parents:
                consumed_fds.append(f)
                parents |= f.lhs
                if not (f.lhs & consumed_attrs):
                    consumed_attrs.add(b)
            else:
                still.append(f)
        remaining = still
    return frozenset(parents - consumed_attrs), tuple(consumed_fds), frozenset(consumed_attrs)


def fold_attribute(sigma: FDSet, a: str) -> frozenset[str]:
    """The unique folded determinant of ``a`` under a parsimonious set.

    Walks the determination chain of ``a`` backwards: each consumed FD
    contributes its lhs to the candidate determinant and retires its
    rhs, unless the FD closes a cycle, in which case the rhs stays.
    """
    _require_parsimonious(sigma)
    if not any(a in f.rhs for f in sigma):
        raise DomainError(f"no fd in the set determines {a!r}")
    folded, _, _ = _backtrace(sigma, a)
    return folded


@dataclass(frozen=True)
class FoldingTrace:
    target: str
    folded_lhs: frozenset[str]
    consumed_fds: tuple[FD, ...]
    consumed_attrs: frozenset[str]


@dataclass(frozen=True)
class FoldingResult:
    folded: FDSet
    trace: tuple[FoldingTrace, ...]


def fold(sigma: FDSet) -> FoldingResult:
    """Fold every FD of a parsimonious set.

    The result keeps one FD per input FD (same rhs, folded lhs) and is
    itself parsimonious.
    """
    _require_parsimonious(sigma)
    out: list[FD] = []
    traces: list[FoldingTrace] = []
    for f in sigma:
        (a,) = tuple(f.rhs)
        folded_lhs, consumed, retired = _backtrace(sigma, a)
        out.append(FD(folded_lhs, f.rhs))
        traces.append(FoldingTrace(a, folded_lhs, consumed, retired))
    return FoldingResult(sigma.replace(out), tuple(traces))


def is_folded(sigma: FDSet, f: FD, max_attrs: int = 10) -> bool:
    """Oracle for the folded-FD predicate; exponential, test use only.

    ``X -> A`` is folded when it is a non-trivial consequence of the set
    and no attribute set determines X without X determining it back,
    i.e. the backtrace cannot make further acyclic progress.  Quantifies
    over all proper subsets of the universe, hence the cap.
    """
    n = len(sigma.universe)
    if n > max_attrs:
        raise CapacityError(f"universe of {n} attributes exceeds cap {max_attrs}")
    if f.trivial or not member(sigma, f):
        return False
    universe = list(sigma.universe)
    x = f.lhs
    for mask in range(1, 2 ** n - 1):
        y = frozenset(universe[i] for i in range(n) if mask >> i & 1)
        if y >= x:
            continue
        if member(sigma, FD(y, x)) and not member(sigma, FD(x, y)):
            return False
    return True
