"""Turning loaded trial data into uncertain relations.

Uncertainty enters twice.  The explanation table names the competing
hypotheses per phenomenon and becomes one random variable per
phenomenon via repair-key.  Trial inputs contribute empirical factors:
attribute groups that coincide value-for-value across trials collapse
to a pivot each, every pivot becomes one random variable per
phenomenon, and predicted (endogenous) tuples receive the condition
columns of all factors feeding them, aligned through the trial id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, Sequence

from .errors import DomainError, IntegrityError, PreconditionError
from .fd import FD, FDSet, PHI, TID, UPSILON, left_reduce
from .folding import fold
from .synthesis import RelScheme, synthesize
from .urelations import (
    CertainRelation,
    URelation,
    WorldTable,
    repair_key,
    u_join,
    u_project,
    u_select,
)

CONF_COL = "Conf"


def build_explanation(h0: CertainRelation, world: WorldTable, name: str = "Y0") -> URelation:
    """Repair the phenomenon key of the explanation table.

    One random variable per phenomenon; alternatives are the competing
    hypotheses, weighted by their confidence column.
    """
    for col in (PHI, UPSILON, CONF_COL):
        h0.col(col)
    repaired = repair_key(h0, (PHI,), CONF_COL, world, name=name)
    return u_project(repaired, (PHI, UPSILON))


def _canon(value: str):
    try:
        return Decimal(value)
    except InvalidOperation:
        return value


def trial_attrs(rel: CertainRelation) -> tuple[str, ...]:
    return tuple(a for a in rel.attrs if a not in rel.key and a != TID)


def _instance_fd(rel: CertainRelation, a: str, b: str) -> bool:
    """Does the value of ``a`` determine the value of ``b`` in this instance?"""
    ia, ib = rel.col(a), rel.col(b)
    seen: dict[object, object] = {}
    for row in rel.rows:
        va, vb = _canon(row[ia]), _canon(row[ib])
        if va in seen and seen[va] != vb:
            return False
        seen[va] = vb
    return True


@dataclass(frozen=True)
class UFactorGroups:
    """Learned factor structure of one exogenous relation."""

    relation: str
    groups: tuple[tuple[str, ...], ...]
    pivots: tuple[str, ...]
    gamma: FDSet


def learn_u_factors(h: CertainRelation, sigma_k: FDSet) -> UFactorGroups:
    """Infer coincidental value couplings among trial inputs.

    Attributes that determine each other exactly (no epsilon: trial
    inputs are recorded constants) are grouped; the lowest-ordered
    member of each group is its pivot, and the pivot dependencies plus
    the hypothesis-side dependencies of the encoded set form the
    correlation FD set.
    """
    if not h.rows:
        raise PreconditionError(f"{h.name} is empty, nothing to learn")
    attrs = trial_attrs(h)
    parent = {a: a for a in attrs}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, a in enumerate(attrs):
        for b in attrs[i + 1 :]:
            if _instance_fd(h, a, b) and _instance_fd(h, b, a):
                parent[find(b)] = find(a)

    members: dict[str, list[str]] = {}
    for a in attrs:
        members.setdefault(find(a), []).append(a)
    groups = tuple(
        tuple(members[find(a)]) for a in attrs if members[find(a)][0] == a
    )
    pivots = tuple(g[0] for g in groups)

    pivot_fds = [
        FD(frozenset((g[0],)), frozenset((b,))) for g in groups for b in g[1:]
    ]
    upsilon_fds = [f for f in sigma_k if UPSILON in f.lhs]
    gamma = FDSet(pivot_fds + upsilon_fds, universe=sigma_k.universe)
    return UFactorGroups(h.name, groups, pivots, gamma)


def groups_from_fds(gamma: FDSet, h: CertainRelation) -> UFactorGroups:
    """Reconstruct the factor groups of ``h`` from a correlation FD set."""
    attrs = trial_attrs(h)
    pivot_members: dict[str, list[str]] = {}
    determined: set[str] = set()
    for f in gamma:
        if UPSILON in f.lhs or len(f.lhs) != 1:
            continue
        (lhs,) = tuple(f.lhs)
        (rhs,) = tuple(f.rhs)
        if lhs in attrs and rhs in attrs:
            pivot_members.setdefault(lhs, []).append(rhs)
            determined.add(rhs)
    groups = []
    for a in attrs:
        if a in determined:
            continue
        groups.append(tuple([a] + sorted(pivot_members.get(a, []), key=attrs.index)))
    return UFactorGroups(h.name, tuple(groups), tuple(g[0] for g in groups), gamma)


def u_factorize(
    h: CertainRelation,
    groups: UFactorGroups,
    world: WorldTable,
    names: Iterable[str] | None = None,
) -> list[tuple[str, URelation]]:
    """One uncertain projection per pivot (grouped counts, then repair-key)."""
    if groups.relation != h.name:
        raise PreconditionError("factor groups were learned from a different relation")
    group_key = tuple(a for a in h.key if a != TID)
    names = list(names) if names is not None else [
        f"{h.name}.{p}" for p in groups.pivots
    ]
    if len(names) != len(groups.pivots):
        raise DomainError("one name per pivot required")

    out = []
    for pivot, name in zip(groups.pivots, names):
        cols = group_key + (pivot,)
        idx = [h.col(a) for a in cols]
        counts: dict[tuple, tuple[tuple[str, ...], int]] = {}
        for row in h.rows:
            raw = tuple(row[i] for i in idx)
            canon = tuple(_canon(v) for v in raw)
            kept, n = counts.get(canon, (raw, 0))
            counts[canon] = (kept, n + 1)
        grouped = CertainRelation(
            name,
            cols + ("count",),
            cols,
            tuple(raw + (str(n),) for raw, n in counts.values()),
        )
        out.append((pivot, repair_key(grouped, group_key, "count", world, name=name)))
    return out


@dataclass
class ProjectionMap:
    """Exogenous relations together with their per-pivot projections."""

    entries: dict[str, tuple[CertainRelation, tuple[tuple[str, URelation], ...]]] = field(
        default_factory=dict
    )

    def add(self, h: CertainRelation, projections: Sequence[tuple[str, URelation]]):
        self.entries[h.name] = (h, tuple(projections))

    def items(self):
        return self.entries.items()


def _endogenous_schemes(gamma_fold: FDSet) -> list[RelScheme]:
    upsilon_fds = [f for f in gamma_fold if UPSILON in f.lhs]
    if not upsilon_fds:
        return []
    subset = FDSet(upsilon_fds, universe=gamma_fold.universe)
    return list(synthesize(subset))


def _hypothesis_id(hq: CertainRelation) -> str:
    values = {hq.value(r, UPSILON) for r in hq.rows}
    if len(values) != 1:
        raise IntegrityError(f"{hq.name} does not hold exactly one hypothesis id")
    return values.pop()


def u_propagate(
    hq: CertainRelation,
    gamma_fold: FDSet,
    m: ProjectionMap,
    y0: URelation,
    name: str | None = None,
) -> URelation:
    """Attach every relevant factor's condition column to predicted tuples.

    Builds the join of each exogenous relation intersecting the
    endogenous determinant with its pivot projections, routes the
    condition columns through the trial id onto the endogenous rows,
    restricts the explanation variable to this hypothesis, and finally
    drops the trial id.
    """
    schemes = [
        s
        for s in _endogenous_schemes(gamma_fold)
        if set(s.dependents) <= set(hq.attrs)
    ]
    if len(schemes) != 1:
        raise IntegrityError(
            f"{hq.name} matches {len(schemes)} endogenous schemes, expected exactly 1"
        )
    scheme = schemes[0]
    determinant = scheme.key_set()
    targets = tuple(a for a in hq.attrs if a in set(scheme.dependents))
    k = _hypothesis_id(hq)

    y0_k = u_select(y0, {UPSILON: k})
    if not y0_k.rows:
        raise IntegrityError(f"hypothesis {k} is not in the explanation table")

    joined: URelation | None = None
    group_keys: set[str] = set()
    for _, (h_exo, projections) in m.items():
        inputs = set(trial_attrs(h_exo))
        if not (inputs & determinant):
            continue
        available = {p for p, _ in projections}
        required = {
            p
            for p in groups_from_fds(gamma_fold, h_exo).pivots
            if p in determinant
        }
        missing = required - available
        if missing:
            raise IntegrityError(
                f"no projection for pivots {sorted(missing)} of {h_exo.name}"
            )
        part = h_exo.as_urelation()
        for pivot, proj in projections:
            if pivot in determinant:
                part = u_join(part, proj)
        joined = part if joined is None else u_join(joined, part)
        group_keys |= set(h_exo.key) - {TID}

    hq_u = hq.as_urelation(
        drop=[a for a in hq.attrs if a != TID and a not in set(hq.key) | set(targets)]
    )
    if joined is not None:
        cond_source = u_project(joined, (TID,) + tuple(sorted(group_keys)))
        hq_tids = {hq.value(r, TID) for r in hq.rows}
        source_tids = {data[cond_source.col(TID)] for _, data in cond_source.rows}
        orphans = hq_tids - source_tids
        if orphans:
            raise IntegrityError(
                f"{hq.name}: trials {sorted(orphans)} have no matching input trial"
            )
        result = u_join(u_join(y0_k, cond_source), hq_u)
    else:
        result = u_join(y0_k, hq_u)
    final_cols = [a for a in result.data_cols if a != TID]
    out = u_project(result, final_cols)
    return URelation(name or f"{hq.name}.predicted", out.data_cols, out.rows)


def introduce_uncertainty(
    gamma_fold: FDSet,
    relations: Sequence[CertainRelation],
    y0: URelation,
    world: WorldTable,
    hypothesis: str,
) -> list[URelation]:
    """Full uncertainty introduction for one hypothesis' loaded relations.

    Factorizes every exogenous relation (one variable per pivot per
    phenomenon group) and then propagates into every endogenous
    relation.  Relation names are ``Y<k>_<j>`` in creation order.
    """
    exogenous = [r for r in relations if UPSILON not in r.key]
    endogenous = [r for r in relations if UPSILON in r.key]

    out: list[URelation] = []
    m = ProjectionMap()
    counter = 1
    for h in exogenous:
        if not h.rows:
            continue
        groups = groups_from_fds(gamma_fold, h)
        names = [f"Y{hypothesis}_{counter + i}" for i in range(len(groups.pivots))]
        counter += len(groups.pivots)
        projections = u_factorize(h, groups, world, names)
        m.add(h, projections)
        out.extend(proj for _, proj in projections)
    for hq in endogenous:
        if not hq.rows:
            continue
        if _hypothesis_id(hq) != str(hypothesis):
            raise IntegrityError(
                f"{hq.name} holds hypothesis {_hypothesis_id(hq)}, expected {hypothesis}"
            )
        out.append(
            u_propagate(hq, gamma_fold, m, y0, name=f"Y{hypothesis}_{counter}")
        )
        counter += 1
    return out


def correlation_fds(
    relations: Sequence[CertainRelation], sigma_k: FDSet
) -> FDSet:
    """Learned pivot FDs of every exogenous relation plus the encoded
    hypothesis-side FDs, ready for folding."""
    pivot_fds: list[FD] = []
    for h in relations:
        if UPSILON in h.key or not h.rows:
            continue
        learned = learn_u_factors(h, sigma_k)
        pivot_fds.extend(f for f in learned.gamma if UPSILON not in f.lhs)
    upsilon_fds = [f for f in sigma_k if UPSILON in f.lhs]
    return FDSet(pivot_fds + upsilon_fds, universe=sigma_k.universe)


def fold_correlations(gamma: FDSet) -> FDSet:
    """Left-reduce then fold the correlation set (reduction restores
    parsimony when a dependency lists both a pivot and its member)."""
    return fold(left_reduce(gamma)).folded
