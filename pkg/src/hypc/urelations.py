"""In-memory uncertain relations with possible-worlds semantics.

A relation row may carry condition pairs assigning discrete random
variables to value indices; the world table stores every variable's
marginal distribution.  Together they encode a finite set of possible
worlds: fix an assignment, keep the rows it satisfies, and drop the
condition columns.  Select, project and join rewrite over condition
pairs without ever expanding the worlds; exact expansion is provided
separately for verification and confidence computation.

All data values are kept as strings exactly as loaded, so that values
round-trip byte for byte; numbers are parsed only where arithmetic is
required (weights and probabilities).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import CapacityError, DomainError, IntegrityError

PROB_TOL = 1e-9


def _var_key(name: str):
    return (len(name), name)


@dataclass(frozen=True)
class RandVar:
    """A discrete random variable over dense 1-based value indices."""

    id: str
    marginals: tuple[float, ...]

    def __post_init__(self):
        if not self.marginals:
            raise DomainError(f"variable {self.id} has an empty domain")
        if any(p <= 0 for p in self.marginals):
            raise DomainError(f"variable {self.id} has a non-positive marginal")
        if abs(sum(self.marginals) - 1.0) > PROB_TOL:
            raise DomainError(f"marginals of {self.id} do not sum to 1")

    @property
    def domain(self) -> range:
        return range(1, len(self.marginals) + 1)


class WorldTable:
    """Registry of random variables; serializes fresh-id allocation."""

    def __init__(self):
        self.vars: dict[str, RandVar] = {}
        self._counter = 0

    def fresh_id(self) -> str:
        name = f"x{self._counter}"
        self._counter += 1
        return name

    def add(self, var: RandVar) -> RandVar:
        if var.id in self.vars:
            raise IntegrityError(f"variable {var.id} already registered")
        self.vars[var.id] = var
        index = int(var.id[1:]) if var.id[1:].isdigit() else -1
        self._counter = max(self._counter, index + 1)
        return var

    def marginal(self, var: str, value: int) -> float:
        return self.vars[var].marginals[value - 1]

    def world_count(self) -> int:
        return math.prod(len(v.marginals) for v in self.vars.values())

    def rows(self) -> list[tuple[str, int, float]]:
        out = []
        for var in self.vars.values():
            for d, p in enumerate(var.marginals, start=1):
                out.append((var.id, d, p))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["V", "D", "Pr"])
        for v, d, p in self.rows():
            w.writerow([v, d, repr(p)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WorldTable":
        table = cls()
        probs: dict[str, list[float]] = {}
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != ["V", "D", "Pr"]:
            raise DomainError("world table header must be V,D,Pr")
        for row in reader:
            if not row:
                continue
            var, d, p = row[0], int(row[1]), float(row[2])
            probs.setdefault(var, [])
            if d != len(probs[var]) + 1:
                raise DomainError(f"values of {var} are not dense 1-based")
            probs[var].append(p)
        for var, ps in probs.items():
            table.add(RandVar(var, tuple(ps)))
        return table


Conds = tuple[tuple[str, int], ...]


def _normalize_conds(conds: Iterable[tuple[str, int]]) -> Conds:
    merged: dict[str, int] = {}
    for var, val in conds:
        if var in merged and merged[var] != val:
            raise IntegrityError(f"row maps {var} to two values")
        merged[var] = int(val)
    return tuple(sorted(merged.items(), key=lambda kv: _var_key(kv[0])))


@dataclass(frozen=True)
class URelation:
    """A relation whose rows may be conditioned on variable assignments.

    With no condition pairs this is a plain relation and the rewritten
    operators coincide with classical relational algebra.
    """

    name: str
    data_cols: tuple[str, ...]
    rows: tuple[tuple[Conds, tuple[str, ...]], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "data_cols", tuple(self.data_cols))
        normalized = []
        for conds, data in self.rows:
            data = tuple(str(v) for v in data)
            if len(data) != len(self.data_cols):
                raise DomainError(f"{self.name}: row width mismatch")
            normalized.append((_normalize_conds(conds), data))
        object.__setattr__(self, "rows", tuple(normalized))

    @property
    def arity(self) -> int:
        return max((len(c) for c, _ in self.rows), default=0)

    def col(self, attr: str) -> int:
        try:
            return self.data_cols.index(attr)
        except ValueError:
            raise DomainError(f"{self.name} has no column {attr!r}") from None

    def condition_vars(self) -> tuple[str, ...]:
        seen: set[str] = set()
        for conds, _ in self.rows:
            seen.update(var for var, _ in conds)
        return tuple(sorted(seen, key=_var_key))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        k = self.arity
        header = []
        for i in range(1, k + 1):
            header += [f"V{i}", f"D{i}"]
        w.writerow(header + list(self.data_cols))
        for conds, data in self.rows:
            cells = []
            for var, val in conds:
                cells += [var, str(val)]
            cells += [""] * (2 * (k - len(conds)))
            w.writerow(cells + list(data))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, name: str, text: str) -> "URelation":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None:
            raise DomainError(f"{name}: empty csv")
        k = 0
        while 2 * k + 1 < len(header) and header[2 * k] == f"V{k + 1}" and header[
            2 * k + 1
        ] == f"D{k + 1}":
            k += 1
        data_cols = tuple(header[2 * k :])
        rows = []
        for row in reader:
            if not row:
                continue
            conds = []
            for i in range(k):
                var, val = row[2 * i], row[2 * i + 1]
                if var:
                    conds.append((var, int(val)))
            rows.append((tuple(conds), tuple(row[2 * k :])))
        return cls(name, data_cols, tuple(rows))


@dataclass(frozen=True)
class CertainRelation:
    """A classical relation with an exact key constraint."""

    name: str
    attrs: tuple[str, ...]
    key: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "attrs", tuple(self.attrs))
        object.__setattr__(self, "key", tuple(self.key))
        rows = tuple(tuple(str(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        missing = set(self.key) - set(self.attrs)
        if missing:
            raise DomainError(f"{self.name}: key attrs {sorted(missing)} not in schema")
        for r in rows:
            if len(r) != len(self.attrs):
                raise DomainError(f"{self.name}: row width mismatch")
        key_idx = [self.attrs.index(a) for a in self.key]
        seen: set[tuple[str, ...]] = set()
        for r in rows:
            kv = tuple(r[i] for i in key_idx)
            if kv in seen:
                raise IntegrityError(f"{self.name}: duplicate key {kv}")
            seen.add(kv)

    def col(self, attr: str) -> int:
        try:
            return self.attrs.index(attr)
        except ValueError:
            raise DomainError(f"{self.name} has no column {attr!r}") from None

    def value(self, row: tuple[str, ...], attr: str) -> str:
        return row[self.col(attr)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.attrs)
        for r in self.rows:
            w.writerow(r)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, name: str, text: str, key: Sequence[str]) -> "CertainRelation":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if not header:
            raise DomainError(f"{name}: missing header row")
        rows = tuple(tuple(r) for r in reader if r)
        return cls(name, tuple(header), tuple(key), rows)

    def as_urelation(self, drop: Sequence[str] = ()) -> URelation:
        keep = [a for a in self.attrs if a not in set(drop)]
        idx = [self.attrs.index(a) for a in keep]
        return URelation(
            self.name,
            tuple(keep),
            tuple(((), tuple(r[i] for i in idx)) for r in self.rows),
        )


# -- repair-key ----------------------------------------------------------------


def repair_key(
    rel: CertainRelation,
    key: Sequence[str],
    weight_col: str,
    world: WorldTable,
    name: str | None = None,
) -> URelation:
    """Repair a violated key by introducing one variable per key group.

    Every input row becomes one alternative of its group's variable,
    indexed 1-based in input order, with marginal probability equal to
    its weight divided by the group total.  The weight column is
    projected away.
    """
    widx = rel.col(weight_col)
    key = tuple(key)
    key_idx = [rel.col(a) for a in key]
    rest_idx = [i for i in range(len(rel.attrs)) if i != widx]

    seen_rest: set[tuple[str, ...]] = set()
    weights: list[float] = []
    for row in rel.rows:
        try:
            w = float(row[widx])
        except ValueError:
            raise DomainError(
                f"{rel.name}: weight {row[widx]!r} is not numeric"
            ) from None
        if w <= 0:
            raise DomainError(f"{rel.name}: weight {row[widx]!r} is not positive")
        weights.append(w)
        rest = tuple(row[i] for i in rest_idx)
        if rest in seen_rest:
            raise IntegrityError(
                f"{rel.name}: rows agree outside {weight_col!r}, repair is ambiguous"
            )
        seen_rest.add(rest)

    groups: dict[tuple[str, ...], list[int]] = {}
    for i, row in enumerate(rel.rows):
        groups.setdefault(tuple(row[j] for j in key_idx), []).append(i)

    var_of: dict[tuple[str, ...], str] = {}
    for gkey, members in groups.items():
        total = sum(weights[i] for i in members)
        var = world.fresh_id()
        world.add(RandVar(var, tuple(weights[i] / total for i in members)))
        var_of[gkey] = var

    data_cols = tuple(a for a in rel.attrs if a != weight_col)
    out_idx = [rel.col(a) for a in data_cols]
    rows = []
    for gkey, members in groups.items():
        for alt, i in enumerate(members, start=1):
            row = rel.rows[i]
            rows.append(
                (((var_of[gkey], alt),), tuple(row[j] for j in out_idx))
            )
    return URelation(name or rel.name, data_cols, tuple(rows))


# -- rewritten operators ---------------------------------------------------------


def u_select(rel: URelation, pred: Mapping[str, str]) -> URelation:
    """Equality selection over data columns; condition pairs untouched."""
    idx = {attr: rel.col(attr) for attr in pred}
    rows = tuple(
        (conds, data)
        for conds, data in rel.rows
        if all(data[i] == str(v) for (attr, v), i in zip(pred.items(), idx.values()))
    )
    return URelation(rel.name, rel.data_cols, rows)


def u_project(rel: URelation, attrs: Iterable[str]) -> URelation:
    """Keep all condition pairs plus the named data columns (bag semantics)."""
    wanted = set(attrs)
    unknown = wanted - set(rel.data_cols)
    if unknown:
        raise DomainError(f"{rel.name} has no columns {sorted(unknown)}")
    keep = [a for a in rel.data_cols if a in wanted]
    idx = [rel.col(a) for a in keep]
    rows = tuple(
        (conds, tuple(data[i] for i in idx)) for conds, data in rel.rows
    )
    return URelation(rel.name, tuple(keep), rows)


def u_join(
    rel: URelation,
    other: URelation,
    on: Iterable[str] | None = None,
    name: str | None = None,
) -> URelation:
    """Natural join plus the condition-consistency predicate.

    Rows whose shared variables disagree are dropped; agreeing pairs are
    merged, so the condition arity never exceeds the sum of the inputs'.
    """
    shared = [a for a in rel.data_cols if a in other.data_cols]
    if on is not None:
        on = set(on)
        for a in on:
            if a not in rel.data_cols or a not in other.data_cols:
                raise DomainError(f"join attribute {a!r} missing from an input")
        if on != set(shared):
            raise DomainError(
                f"join attributes {sorted(on)} do not match shared columns {shared}"
            )
    left_idx = [rel.col(a) for a in shared]
    right_idx = [other.col(a) for a in shared]
    extra = [a for a in other.data_cols if a not in shared]
    extra_idx = [other.col(a) for a in extra]

    rows = []
    for lconds, ldata in rel.rows:
        lassign = dict(lconds)
        for rconds, rdata in other.rows:
            if any(ldata[i] != rdata[j] for i, j in zip(left_idx, right_idx)):
                continue
            if any(lassign.get(var, val) != val for var, val in rconds):
                continue
            merged = lconds + tuple(
                (var, val) for var, val in rconds if var not in lassign
            )
            rows.append((merged, ldata + tuple(rdata[i] for i in extra_idx)))
    return URelation(
        name or f"{rel.name}*{other.name}",
        rel.data_cols + tuple(extra),
        tuple(rows),
    )


# -- possible worlds --------------------------------------------------------------


def decode(rel: URelation, theta: Mapping[str, int]) -> frozenset[tuple[str, ...]]:
    """The classical relation of one world: satisfied rows, conditions dropped."""
    return frozenset(
        data
        for conds, data in rel.rows
        if all(theta.get(var) == val for var, val in conds)
    )


@dataclass(frozen=True)
class World:
    assignment: dict[str, int]
    probability: float
    relations: dict[str, frozenset[tuple[str, ...]]] = field(default_factory=dict)


def _assignments(world: WorldTable, var_ids: Sequence[str], cap: int):
    sizes = [len(world.vars[v].marginals) for v in var_ids]
    count = math.prod(sizes) if sizes else 1
    if count > cap:
        raise CapacityError(f"{count} worlds exceed cap {cap}")
    for combo in itertools.product(*(range(1, s + 1) for s in sizes)):
        theta = dict(zip(var_ids, combo))
        p = math.prod(world.marginal(v, d) for v, d in theta.items())
        yield theta, p


def enumerate_worlds(
    relations: Iterable[URelation],
    world: WorldTable,
    cap: int = 10**6,
) -> list[World]:
    """Expand the full set of possible worlds (all registered variables)."""
    relations = list(relations)
    var_ids = list(world.vars)
    out = []
    for theta, p in _assignments(world, var_ids, cap):
        decoded = {rel.name: decode(rel, theta) for rel in relations}
        out.append(World(theta, p, decoded))
    return out


def confidence(
    rel: URelation,
    tup: Sequence[str],
    world: WorldTable,
    cap: int = 10**6,
) -> float:
    """Probability that the decoded relation contains the tuple.

    Exact, by enumeration over the variables the relation mentions;
    unmentioned variables marginalize out.
    """
    tup = tuple(str(v) for v in tup)
    if len(tup) != len(rel.data_cols):
        raise DomainError("tuple width does not match the relation")
    var_ids = [v for v in rel.condition_vars()]
    for v in var_ids:
        if v not in world.vars:
            raise DomainError(f"variable {v} not in the world table")
    total = 0.0
    for theta, p in _assignments(world, var_ids, cap):
        if tup in decode(rel, theta):
            total += p
    return total
