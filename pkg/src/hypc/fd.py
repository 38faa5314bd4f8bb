"""Attributes, functional dependencies, and Armstrong-style reasoning.

Everything downstream (encoding, folding, synthesis, uncertainty
introduction) manipulates the two value types defined here: ``FD`` and
``FDSet``.  All values are immutable after construction and every
operation is a pure function, so concurrent use is safe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import CapacityError, DomainError

PHI = "phi"
UPSILON = "upsilon"
TID = "tid"

#: Reserved attribute names, in their fixed ordering position.
RESERVED = (PHI, UPSILON, TID)

_RESERVED_KIND = {PHI: "phenomenon", UPSILON: "hypothesis", TID: "trial"}


@dataclass(frozen=True)
class Attribute:
    """A named column symbol.

    ``phi``, ``upsilon`` and ``tid`` are reserved: they denote the
    phenomenon id, the hypothesis id and the provisional trial id, and
    cannot be declared as user attributes.
    """

    name: str
    kind: str = "user"


def attribute(name: str) -> Attribute:
    return Attribute(name, _RESERVED_KIND.get(name, "user"))


def check_user_name(name: str) -> str:
    if name in _RESERVED_KIND:
        raise DomainError(f"attribute name {name!r} is reserved")
    return name


@dataclass(frozen=True)
class FD:
    """A functional dependency ``lhs -> rhs`` over attribute names."""

    lhs: frozenset[str]
    rhs: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "lhs", frozenset(self.lhs))
        object.__setattr__(self, "rhs", frozenset(self.rhs))
        if not self.lhs or not self.rhs:
            raise DomainError("fd sides must be non-empty")

    @property
    def trivial(self) -> bool:
        return self.rhs <= self.lhs

    @property
    def singleton(self) -> bool:
        return len(self.rhs) == 1

    def attrs(self) -> frozenset[str]:
        return self.lhs | self.rhs

    def __repr__(self):
        lhs = " ".join(sorted(self.lhs))
        rhs = " ".join(sorted(self.rhs))
        return f"FD({lhs} -> {rhs})"


def fd(lhs: Iterable[str], rhs: Iterable[str] | str) -> FD:
    if isinstance(rhs, str):
        rhs = (rhs,)
    if isinstance(lhs, str):
        lhs = (lhs,)
    return FD(frozenset(lhs), frozenset(rhs))


class FDSet:
    """An ordered, duplicate-free set of FDs over an ordered universe.

    The universe lists every attribute mentioned by any FD plus any
    extra declared attributes.  Its order is canonical: reserved names
    first (phi, upsilon, tid), then user attributes in declaration
    order.  Every set-valued output of the package is sorted by this
    order, which makes results reproducible byte for byte.
    """

    __slots__ = ("fds", "universe", "_index")

    def __init__(self, fds: Iterable[FD] = (), universe: Sequence[str] = ()):
        seen: dict[FD, None] = {}
        for f in fds:
            seen.setdefault(f, None)
        self.fds: tuple[FD, ...] = tuple(seen)
        order: dict[str, None] = {}
        for name in universe:
            order.setdefault(name, None)
        for f in self.fds:
            for name in sorted(f.lhs) + sorted(f.rhs):
                order.setdefault(name, None)
        reserved = [n for n in RESERVED if n in order]
        users = [n for n in order if n not in _RESERVED_KIND]
        self.universe: tuple[str, ...] = tuple(reserved + users)
        self._index = {name: i for i, name in enumerate(self.universe)}

    # -- universe helpers -------------------------------------------------

    def sort_key(self, name: str):
        return (self._index.get(name, len(self._index)), name)

    def sorted_attrs(self, attrs: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(attrs, key=self.sort_key))

    def attributes(self) -> tuple[Attribute, ...]:
        return tuple(attribute(n) for n in self.universe)

    def check_attrs(self, attrs: Iterable[str]) -> frozenset[str]:
        attrs = frozenset(attrs)
        unknown = attrs - set(self.universe)
        if unknown:
            raise DomainError(f"unknown attributes: {sorted(unknown)}")
        return attrs

    # -- container protocol ------------------------------------------------

    def __iter__(self) -> Iterator[FD]:
        return iter(self.fds)

    def __len__(self) -> int:
        return len(self.fds)

    def __contains__(self, f: FD) -> bool:
        return f in set(self.fds)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FDSet):
            return NotImplemented
        return set(self.fds) == set(other.fds) and set(self.universe) == set(
            other.universe
        )

    def __hash__(self):
        return hash((frozenset(self.fds), frozenset(self.universe)))

    def __repr__(self):
        return f"FDSet({len(self.fds)} fds over {len(self.universe)} attrs)"

    # -- derivation helpers --------------------------------------------------

    def replace(self, fds: Iterable[FD]) -> "FDSet":
        """New set with the same universe but different FDs."""
        return FDSet(fds, universe=self.universe)

    def format(self) -> str:
        lines = [f"# universe: {' '.join(self.universe)}"]
        for f in self.fds:
            lhs = " ".join(self.sorted_attrs(f.lhs))
            rhs = " ".join(self.sorted_attrs(f.rhs))
            lines.append(f"{lhs} -> {rhs}")
        return "\n".join(lines) + "\n"


def parse_fds(text: str) -> FDSet:
    """Parse the FD text format: one ``A B -> C`` per line, ``#`` comments.

    A ``# universe: ...`` comment, when present, pins the attribute
    ordering; otherwise order of first appearance is used.
    """
    fds: list[FD] = []
    order: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        comment = raw.partition("#")[2].strip()
        if comment.startswith("universe:"):
            order.extend(comment.removeprefix("universe:").split())
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise DomainError(f"line {lineno}: missing '->' separator")
        left, _, right = line.partition("->")
        lhs = left.split()
        rhs = right.split()
        if not lhs or not rhs:
            raise DomainError(f"line {lineno}: fd sides must be non-empty")
        order.extend(lhs + rhs)
        fds.append(fd(lhs, rhs))
    return FDSet(fds, universe=order)


# -- attribute closure -------------------------------------------------------


def attribute_closure(sigma: FDSet, x: Iterable[str]) -> frozenset[str]:
    """The set of attributes determined by ``x`` under ``sigma``.

    Plain fixpoint: repeatedly fire any not-yet-consumed FD whose lhs is
    contained in the running closure.  Quadratic in the set size, which
    is fine at hypothesis scale; ``_attribute_closure_fast`` is the
    linear-time variant kept behind the same contract.
    """
    x = frozenset(x)
    if not x:
        raise DomainError("closure of the empty attribute set is undefined")
    sigma.check_attrs(x)
    closure = set(x)
    remaining = list(sigma.fds)
    changed = True
    while changed:
        changed = False
        still = []
        for f in remaining:
            if f.lhs <= closure:
                before = len(closure)
                closure.update(f.rhs)
                changed = changed or len(closure) > before
            else:
                still.append(f)
        remaining = still
    return frozenset(closure)


def _attribute_closure_fast(sigma: FDSet, x: Iterable[str]) -> frozenset[str]:
    """Counter-based closure, linear in total FD size.

    Tracks, per FD, how many lhs attributes are still missing; an FD
    fires the moment its counter hits zero.  Cross-checked against
    ``attribute_closure`` in the test suite.
    """
    x = frozenset(x)
    if not x:
        raise DomainError("closure of the empty attribute set is undefined")
    sigma.check_attrs(x)
    missing = [len(f.lhs) for f in sigma.fds]
    by_attr: dict[str, list[int]] = {}
    for i, f in enumerate(sigma.fds):
        for a in f.lhs:
            by_attr.setdefault(a, []).append(i)
    closure = set()
    queue = list(x)
    while queue:
        a = queue.pop()
        if a in closure:
            continue
        closure.add(a)
        for i in by_attr.get(a, ()):
            missing[i] -= 1
            if missing[i] == 0:
                queue.extend(sigma.fds[i].rhs - closure)
    return frozenset(closure)


def member(sigma: FDSet, f: FD) -> bool:
    """Decide ``f in sigma+`` via the attribute closure of its lhs."""
    sigma.check_attrs(f.attrs())
    return f.rhs <= attribute_closure(sigma, f.lhs)


# -- covers and structural predicates -----------------------------------------


def left_reduce(sigma: FDSet) -> FDSet:
    """A cover of ``sigma`` with no extraneous lhs attribute.

    Scans FDs in set order and candidate attributes in universe order,
    so the output is deterministic even where several reductions are
    possible.
    """
    work = list(sigma.fds)
    for i, f in enumerate(work):
        lhs = set(f.lhs)
        for a in sigma.sorted_attrs(f.lhs):
            if len(lhs) == 1:
                break
            if a not in lhs:
                continue
            reduced = FD(frozenset(lhs - {a}), f.rhs)
            current = FDSet(work, universe=sigma.universe)
            if member(current, reduced):
                lhs.discard(a)
                work[i] = FD(frozenset(lhs), f.rhs)
    return sigma.replace(work)


@dataclass(frozen=True)
class CanonicalReport:
    """Outcome of a canonicity check; falsy when some clause fails."""

    ok: bool
    clause: str | None = None
    witness: FD | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_canonical(sigma: FDSet) -> CanonicalReport:
    """Check singleton-rhs, non-redundancy and left-reducedness.

    The report names the first violated clause and the witness FD.
    """
    for f in sigma:
        if not f.singleton:
            return CanonicalReport(False, "singleton-rhs", f)
    for f in sigma:
        rest = sigma.replace(g for g in sigma if g != f)
        if member(rest, f):
            return CanonicalReport(False, "non-redundant", f)
    for f in sigma:
        for a in f.lhs:
            if len(f.lhs) == 1:
                break
            if member(sigma, FD(f.lhs - {a}, f.rhs)):
                return CanonicalReport(False, "left-reduced", f)
    return CanonicalReport(True)


def is_parsimonious(sigma: FDSet) -> bool:
    """Canonical, and no attribute is determined by two distinct lhs sets."""
    if not is_canonical(sigma):
        return False
    seen: dict[str, frozenset[str]] = {}
    for f in sigma:
        (a,) = f.rhs
        if a in seen and seen[a] != f.lhs:
            return False
        seen[a] = f.lhs
    return True


def union_rule(sigma: FDSet) -> FDSet:
    """Merge FDs with identical lhs into one FD with the unioned rhs."""
    for f in sigma:
        if not f.singleton:
            raise DomainError("union rule expects a singleton-rhs fd set")
    groups: dict[frozenset[str], set[str]] = {}
    for f in sigma:
        groups.setdefault(f.lhs, set()).update(f.rhs)
    return sigma.replace(FD(lhs, frozenset(rhs)) for lhs, rhs in groups.items())


def decompose(sigma: FDSet) -> FDSet:
    """Split every FD into singleton-rhs form (inverse of the union rule)."""
    out = []
    for f in sigma:
        for a in sigma.sorted_attrs(f.rhs):
            out.append(FD(f.lhs, frozenset((a,))))
    return sigma.replace(out)


# -- exhaustive oracle ---------------------------------------------------------


def closure_oracle(sigma: FDSet, max_attrs: int = 10) -> FDSet:
    """Every non-trivial singleton-rhs member of ``sigma+``, by saturation.

    Test oracle, independent of ``attribute_closure``: saturates the
    given FDs under reflexivity and pseudo-transitivity, keeping only
    subset-minimal lhs sets during the run, then expands to the full
    upward-closed answer.  Exponential in the universe size, hence the
    cap.
    """
    n = len(sigma.universe)
    if n > max_attrs:
        raise CapacityError(f"universe of {n} attributes exceeds cap {max_attrs}")
    universe = frozenset(sigma.universe)

    # minimal[a] is an antichain of lhs sets known to determine a.
    minimal: dict[str, list[frozenset[str]]] = {a: [] for a in sigma.universe}

    def insert(lhs: frozenset[str], a: str) -> bool:
        if a in lhs:
            return False
        chain = minimal[a]
        if any(y <= lhs for y in chain):
            return False
        minimal[a] = [y for y in chain if not lhs < y]
        minimal[a].append(lhs)
        return True

    queue: list[tuple[frozenset[str], str]] = []
    for f in decompose(sigma):
        (a,) = f.rhs
        if insert(f.lhs, a):
            queue.append((f.lhs, a))
    while queue:
        x, b = queue.pop()
        # pseudo-transitivity in both roles: (x -> b) feeding fds that
        # mention b on the left, and fds whose rhs occurs in x.
        snapshot = [(a, tuple(minimal[a])) for a in minimal]
        for a, chain in snapshot:
            for l in chain:
                if b in l:
                    derived = (x | l) - {b}
                    if derived and insert(derived, a):
                        queue.append((derived, a))
                if a in x:
                    derived = (l | x) - {a}
                    if derived and insert(derived, b):
                        queue.append((derived, b))

    out = []
    for a in sigma.universe:
        covers = set()
        for y in minimal[a]:
            rest = sorted(universe - y - {a})
            for r in range(len(rest) + 1):
                for extra in itertools.combinations(rest, r):
                    covers.add(y | frozenset(extra))
        for lhs in sorted(covers, key=lambda s: (len(s), sorted(s))):
            out.append(FD(lhs, frozenset((a,))))
    return sigma.replace(out)


def oracle_closure_of(sigma: FDSet, x: Iterable[str], max_attrs: int = 10) -> frozenset[str]:
    """Attribute closure read off the saturation oracle (tests only)."""
    x = frozenset(x)
    full = closure_oracle(sigma, max_attrs=max_attrs)
    out = set(x)
    for f in full:
        if f.lhs <= x:
            out.update(f.rhs)
    return frozenset(out)
