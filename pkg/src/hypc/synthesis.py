"""Relation-scheme synthesis and the classical design-quality checks.

Synthesis groups a parsimonious FD set by lhs, merges groups with
equivalent keys, and names the resulting schemes R1..Rn.  The checks
decide BCNF, 3NF, dependency preservation and the lossless-join
property, each with an explicit witness where one exists.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable

from .errors import CapacityError, PreconditionError
from .fd import FD, FDSet, attribute_closure, is_canonical, is_parsimonious, member, union_rule


@dataclass(frozen=True)
class RelScheme:
    """One relation scheme: attribute set with a designated key.

    ``dependents`` records the union of determined attribute groups the
    scheme was synthesized from; it can overlap the key when equivalent
    key groups were merged.
    """

    name: str
    attrs: tuple[str, ...]
    key: tuple[str, ...]
    dependents: tuple[str, ...] = ()

    def attr_set(self) -> frozenset[str]:
        return frozenset(self.attrs)

    def key_set(self) -> frozenset[str]:
        return frozenset(self.key)


@dataclass(frozen=True)
class Schema:
    schemes: tuple[RelScheme, ...]
    source: FDSet

    def __iter__(self):
        return iter(self.schemes)

    def __len__(self):
        return len(self.schemes)

    def covered_attrs(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for r in self.schemes:
            out |= r.attr_set()
        return out


def synthesize(sigma: FDSet, force_lossless: bool = False) -> Schema:
    """Synthesize a schema from a parsimonious FD set.

    One scheme per lhs group after merging FDs with identical lhs;
    groups whose keys determine each other are merged into a single
    scheme that keeps the first-encountered key.  With
    ``force_lossless`` an extra scheme over a minimal global key is
    appended, trading minimal cardinality for a guaranteed lossless
    join.
    """
    if not is_parsimonious(sigma):
        raise PreconditionError("fd set is not parsimonious")
    grouped = union_rule(sigma)
    keys: list[frozenset[str]] = []
    attrs: list[set[str]] = []
    dependents: list[set[str]] = []
    for f in grouped:
        merged = False
        for i, key in enumerate(keys):
            if member(sigma, FD(key, f.lhs)) and member(sigma, FD(f.lhs, key)):
                attrs[i] |= f.lhs | f.rhs
                dependents[i] |= f.rhs
                merged = True
                break
        if not merged:
            keys.append(f.lhs)
            attrs.append(set(f.lhs | f.rhs))
            dependents.append(set(f.rhs))
    schemes = [
        RelScheme(
            f"R{i + 1}",
            sigma.sorted_attrs(attrs[i]),
            sigma.sorted_attrs(keys[i]),
            sigma.sorted_attrs(dependents[i]),
        )
        for i in range(len(keys))
    ]
    if force_lossless:
        schema = Schema(tuple(schemes), sigma)
        if not lossless_join(schema, sigma):
            key = _minimal_global_key(sigma)
            schemes.append(
                RelScheme(f"R{len(schemes) + 1}", key, key, ())
            )
    return Schema(tuple(schemes), sigma)


def _minimal_global_key(sigma: FDSet) -> tuple[str, ...]:
    universe = set(sigma.universe)
    key = set(universe)
    for a in sigma.sorted_attrs(universe):
        if len(key) > 1 and universe <= attribute_closure(sigma, key - {a}):
            key.discard(a)
    return sigma.sorted_attrs(key)


@dataclass(frozen=True)
class NormalFormReport:
    ok: bool
    scheme: str | None = None
    witness: FD | None = None

    def __bool__(self):
        return self.ok


def is_bcnf(schema: Schema, sigma: FDSet, max_attrs: int = 12) -> NormalFormReport:
    """BCNF check with a (scheme, fd) witness on failure.

    For canonical inputs it suffices to test the given FDs against each
    scheme; otherwise every lhs subset of each scheme is tested, under
    the attribute cap.
    """
    if is_canonical(sigma):
        for r in schema:
            s = r.attr_set()
            for f in sigma:
                if f.attrs() <= s and not f.trivial:
                    if not (s <= attribute_closure(sigma, f.lhs)):
                        return NormalFormReport(False, r.name, f)
        return NormalFormReport(True)
    for r in schema:
        for x, determined in _scheme_violation_candidates(r, sigma, max_attrs):
            if not (r.attr_set() <= attribute_closure(sigma, x)):
                return NormalFormReport(False, r.name, FD(x, determined))
    return NormalFormReport(True)


def _scheme_violation_candidates(r: RelScheme, sigma: FDSet, max_attrs: int):
    s = r.attr_set()
    if len(s) > max_attrs:
        raise CapacityError(
            f"scheme {r.name} has {len(s)} attributes, exceeding cap {max_attrs}"
        )
    ordered = list(r.attrs)
    for size in range(1, len(ordered)):
        for combo in itertools.combinations(ordered, size):
            x = frozenset(combo)
            determined = (attribute_closure(sigma, x) & s) - x
            if determined:
                yield x, frozenset(determined)


def candidate_keys(r: RelScheme, sigma: FDSet, max_attrs: int = 12) -> list[frozenset[str]]:
    """All minimal keys of a scheme, by subset enumeration under the cap."""
    s = r.attr_set()
    if len(s) > max_attrs:
        raise CapacityError(
            f"scheme {r.name} has {len(s)} attributes, exceeding cap {max_attrs}"
        )
    ordered = list(r.attrs)
    keys: list[frozenset[str]] = []
    for size in range(1, len(ordered) + 1):
        for combo in itertools.combinations(ordered, size):
            x = frozenset(combo)
            if any(k <= x for k in keys):
                continue
            if s <= attribute_closure(sigma, x):
                keys.append(x)
    return keys


def is_3nf(schema: Schema, sigma: FDSet, max_attrs: int = 12) -> NormalFormReport:
    """3NF check: every violation candidate is a superkey or hits prime attrs."""
    for r in schema:
        prime = frozenset().union(*candidate_keys(r, sigma, max_attrs)) if r.attrs else frozenset()
        s = r.attr_set()
        for x, determined in _scheme_violation_candidates(r, sigma, max_attrs):
            if s <= attribute_closure(sigma, x):
                continue
            nonprime = determined - prime
            if nonprime:
                return NormalFormReport(False, r.name, FD(x, nonprime))
    return NormalFormReport(True)


def project_fds(sigma: FDSet, attrs: Iterable[str], max_attrs: int = 12) -> FDSet:
    """Projection of ``sigma+`` onto an attribute set (exponential, capped)."""
    attrs = frozenset(attrs)
    if len(attrs) > max_attrs:
        raise CapacityError(
            f"projection onto {len(attrs)} attributes exceeds cap {max_attrs}"
        )
    ordered = sigma.sorted_attrs(attrs)
    out = []
    for size in range(1, len(ordered) + 1):
        for combo in itertools.combinations(ordered, size):
            x = frozenset(combo)
            determined = (attribute_closure(sigma, x) & attrs) - x
            if determined:
                out.append(FD(x, frozenset(determined)))
    return FDSet(out, universe=ordered)


def preserves(schema: Schema, sigma: FDSet, max_attrs: int = 12) -> bool | None:
    """Whether the union of per-scheme FD projections implies ``sigma``.

    Returns ``None`` (unknown) instead of guessing when a scheme is too
    wide for the exponential projection.
    """
    try:
        union: list[FD] = []
        for r in schema:
            union.extend(project_fds(sigma, r.attrs, max_attrs))
    except CapacityError:
        return None
    projected = FDSet(union, universe=sigma.universe)
    return all(member(projected, f) for f in sigma)


def lossless_join(schema: Schema, sigma: FDSet) -> bool:
    """Key-containment criterion for the lossless join of a folded synthesis.

    Every scheme's key must either determine the whole universe or be a
    strict subset of some other scheme's key.  Single-scheme schemas are
    trivially lossless.
    """
    if len(schema) <= 1:
        return True
    universe = set(sigma.universe)
    for r in schema:
        key = r.key_set()
        if universe <= attribute_closure(sigma, key):
            continue
        if any(key < other.key_set() for other in schema if other is not r):
            continue
        return False
    return True


def chase_oracle(schema: Schema, sigma: FDSet, max_attrs: int = 12) -> bool:
    """Tableau chase deciding the lossless join; independent of the criterion.

    One row per scheme, distinguished symbols on the scheme's own
    attributes; FDs equate symbols until fixpoint.  The join is lossless
    iff some row goes fully distinguished.
    """
    universe = list(sigma.universe)
    if len(universe) > max_attrs:
        raise CapacityError(
            f"universe of {len(universe)} attributes exceeds cap {max_attrs}"
        )
    col = {a: j for j, a in enumerate(universe)}
    distinguished = 0
    table: list[list[object]] = []
    fresh = itertools.count(1)
    for r in schema:
        row: list[object] = []
        for a in universe:
            row.append(distinguished if a in r.attr_set() else next(fresh))
        table.append(row)

    def substitute(old, new):
        for row in table:
            for j, v in enumerate(row):
                if v == old:
                    row[j] = new

    changed = True
    while changed:
        changed = False
        for f in sigma:
            lhs_cols = [col[a] for a in f.lhs]
            rhs_cols = [col[a] for a in f.rhs]
            for r1, r2 in itertools.combinations(range(len(table)), 2):
                if all(table[r1][j] == table[r2][j] for j in lhs_cols):
                    for j in rhs_cols:
                        v1, v2 = table[r1][j], table[r2][j]
                        if v1 == v2:
                            continue
                        keep, drop = (v1, v2) if v1 == distinguished or (
                            v2 != distinguished and v1 < v2
                        ) else (v2, v1)
                        substitute(drop, keep)
                        changed = True
    return any(all(v == distinguished for v in row) for row in table)


def schema_to_json(schema: Schema) -> str:
    payload = [
        {"name": r.name, "attrs": list(r.attrs), "key": list(r.key)}
        for r in schema
    ]
    return json.dumps(payload, indent=2) + "\n"


def schema_from_json(text: str, source: FDSet) -> Schema:
    payload = json.loads(text)
    schemes = []
    for entry in payload:
        attrs = tuple(entry["attrs"])
        key = tuple(entry["key"])
        dependents = tuple(a for a in attrs if a not in key)
        schemes.append(RelScheme(entry["name"], attrs, key, dependents))
    return Schema(tuple(schemes), source)
