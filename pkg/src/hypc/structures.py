"""Equation-system structures, causal ordering, and the FD encoding.

A hypothesis arrives as a system of equations over variables, given by
its boolean incidence matrix.  The causal ordering algorithm resolves a
complete structure into a total equation-to-variable mapping, and the
encoder turns that mapping into a primitive set of functional
dependencies over the phenomenon and hypothesis identifiers.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import DomainError, PreconditionError
from .fd import FD, FDSet, PHI, UPSILON, check_user_name


class MalformedStructureError(PreconditionError):
    """Some k equations mention fewer than k distinct variables."""


@dataclass(frozen=True)
class Structure:
    """An equation system with its variable incidence matrix.

    ``domain_prefix`` marks how many leading variables (and equations)
    form the domain block, e.g. time: domain variables never receive a
    dependency of their own and only ever appear on lhs positions.
    """

    equations: tuple[str, ...]
    variables: tuple[str, ...]
    incidence: np.ndarray
    domain_prefix: int = 0

    def __post_init__(self):
        matrix = np.asarray(self.incidence, dtype=bool)
        object.__setattr__(self, "incidence", matrix)
        object.__setattr__(self, "equations", tuple(self.equations))
        object.__setattr__(self, "variables", tuple(self.variables))
        n, m = matrix.shape
        if n != len(self.equations) or m != len(self.variables):
            raise DomainError("incidence matrix shape does not match id lists")
        if len(set(self.equations)) != n or len(set(self.variables)) != m:
            raise DomainError("equation and variable ids must be unique")
        for v in self.variables:
            check_user_name(v)
        if not (0 <= self.domain_prefix <= min(n, m)):
            raise DomainError("domain prefix out of range")
        if n and not matrix.any(axis=1).all():
            raise DomainError("every equation must mention at least one variable")
        if m and not matrix.any(axis=0).all():
            raise DomainError("every variable must appear in some equation")

    @property
    def complete(self) -> bool:
        return len(self.equations) == len(self.variables)

    def equation_vars(self, eq: str) -> frozenset[str]:
        i = self.equations.index(eq)
        return frozenset(
            v for j, v in enumerate(self.variables) if self.incidence[i, j]
        )

    def domain_variables(self) -> frozenset[str]:
        return frozenset(self.variables[: self.domain_prefix])

    def restrict(self, equations: Iterable[str], variables: Iterable[str]) -> "Structure":
        """Substructure over the given equations and variables."""
        eqs = [e for e in self.equations if e in set(equations)]
        keep_vars = [v for v in self.variables if v in set(variables)]
        rows = [self.equations.index(e) for e in eqs]
        cols = [self.variables.index(v) for v in keep_vars]
        matrix = self.incidence[np.ix_(rows, cols)]
        prefix = sum(1 for v in self.variables[: self.domain_prefix] if v in keep_vars)
        return Structure(tuple(eqs), tuple(keep_vars), matrix, prefix)


def structure_from_dict(spec: dict) -> Structure:
    """Build a structure from its JSON form, cross-checking an optional matrix."""
    variables = tuple(spec["variables"])
    prefix = int(spec.get("domain_prefix", 0))
    equations = []
    matrix = np.zeros((len(spec["equations"]), len(variables)), dtype=bool)
    for i, eq in enumerate(spec["equations"]):
        equations.append(eq["id"])
        for v in eq["vars"]:
            if v not in variables:
                raise DomainError(f"equation {eq['id']} mentions unknown variable {v!r}")
            matrix[i, variables.index(v)] = True
    if "matrix" in spec:
        given = np.asarray(spec["matrix"], dtype=bool)
        if given.shape != matrix.shape or not (given == matrix).all():
            raise DomainError("explicit matrix disagrees with equation variable lists")
    return Structure(tuple(equations), variables, matrix, prefix)


def load_structure(path) -> Structure:
    with open(path, encoding="utf-8") as fh:
        return structure_from_dict(json.load(fh))


def check_complete(s: Structure) -> bool:
    return s.complete


@dataclass(frozen=True)
class CausalMapping:
    """Total equation-to-variable bijection with coupling metadata."""

    pairs: dict[str, str]
    coupled_groups: tuple[frozenset[str], ...]
    layer: dict[str, int] = field(default_factory=dict)

    def variable_of(self, eq: str) -> str:
        return self.pairs[eq]


def minimal_substructures(s: Structure) -> list[frozenset[str]]:
    """All minimal complete substructures, as sets of equation ids.

    Enumerates equation subsets in size-then-lexicographic order.  A
    subset mentioning fewer variables than equations is a structural
    defect and raises; a complete subset is minimal iff it contains no
    smaller complete subset already found.
    """
    if not s.complete:
        raise PreconditionError(
            f"structure is incomplete: {len(s.equations)} equations, "
            f"{len(s.variables)} variables"
        )
    var_sets = {e: s.equation_vars(e) for e in s.equations}
    found: list[frozenset[str]] = []
    for size in range(1, len(s.equations) + 1):
        for combo in itertools.combinations(s.equations, size):
            mentioned = frozenset().union(*(var_sets[e] for e in combo))
            if len(mentioned) < size:
                raise MalformedStructureError(
                    f"equations {sorted(combo)} mention only "
                    f"{len(mentioned)} variables"
                )
            if len(mentioned) == size:
                eqs = frozenset(combo)
                if not any(prev <= eqs for prev in found):
                    found.append(eqs)
    return found


def causal_mapping(s: Structure) -> CausalMapping:
    """Resolve a complete structure into a total causal mapping.

    Recursively extracts minimal complete substructures, maps their
    equations to their variables, eliminates those variables, and
    continues on the residual.  Where a substructure holds several
    variables they can only be determined simultaneously; the tie is
    broken by lowest variable index and the group is recorded.
    """
    if not s.complete:
        raise PreconditionError(
            f"structure is incomplete: {len(s.equations)} equations, "
            f"{len(s.variables)} variables"
        )
    pairs: dict[str, str] = {}
    groups: list[frozenset[str]] = []
    layer: dict[str, int] = {}
    var_order = {v: i for i, v in enumerate(s.variables)}

    current = s
    depth = 0
    while current.equations:
        minimal = minimal_substructures(current)
        resolved_eqs: set[str] = set()
        resolved_vars: set[str] = set()
        for eqs in minimal:
            group_vars = frozenset().union(*(current.equation_vars(e) for e in eqs))
            if len(group_vars) > 1:
                groups.append(group_vars)
            pool = sorted(group_vars, key=var_order.__getitem__)
            for e in sorted(eqs, key=s.equations.index):
                pairs[e] = pool.pop(0)
            for v in group_vars:
                layer[v] = depth
            resolved_eqs |= eqs
            resolved_vars |= group_vars
        rest_eqs = [e for e in current.equations if e not in resolved_eqs]
        rest_vars = [v for v in current.variables if v not in resolved_vars]
        current = current.restrict(rest_eqs, rest_vars)
        depth += 1
    return CausalMapping(pairs, tuple(groups), layer)


def causal_graph(s: Structure, m: CausalMapping) -> nx.DiGraph:
    """Directed graph: edge ``x -> y`` when x feeds the equation mapped to y."""
    if set(m.pairs) != set(s.equations):
        raise PreconditionError("mapping is not total over the structure")
    g = nx.DiGraph()
    g.add_nodes_from(s.variables)
    for eq, target in m.pairs.items():
        for v in s.equation_vars(eq):
            if v != target:
                g.add_edge(v, target)
    return g


def encode_structure(s: Structure) -> FDSet:
    """Encode the causal ordering of a complete structure as FDs.

    Each mapped pair contributes one dependency for its variable: a
    variable whose equation involves nothing else (domain variables
    aside) depends on the phenomenon id alone; otherwise it depends on
    the remaining equation variables plus the hypothesis id.  Domain
    variables receive no dependency and surface only on lhs positions.
    """
    mapping = causal_mapping(s)
    domain = s.domain_variables()
    fds: list[FD] = []
    for eq in s.equations:
        target = mapping.variable_of(eq)
        if target in domain:
            continue
        z = s.equation_vars(eq)
        if z - domain == {target}:
            fds.append(FD(frozenset((PHI,)), frozenset((target,))))
        else:
            lhs = (z - {target}) | {UPSILON}
            fds.append(FD(frozenset(lhs), frozenset((target,))))
    universe = [PHI, UPSILON] + list(s.variables)
    return FDSet(fds, universe=universe)


CLASSIFICATIONS = ("exogenous", "endogenous", "domain", "epistemic")


def classify(name: str, sigma: FDSet) -> str:
    """Classify an attribute of an encoded FD set.

    Attributes determined by a phenomenon-only dependency are exogenous,
    those depending on the hypothesis id endogenous; attributes that
    only ever appear on lhs positions are domain variables, and the
    reserved identifiers themselves are epistemic.
    """
    if name not in sigma.universe:
        raise DomainError(f"attribute {name!r} is not in the universe")
    if name in (PHI, UPSILON):
        return "epistemic"
    for f in sigma:
        if name in f.rhs:
            return "endogenous" if UPSILON in f.lhs else "exogenous"
    return "domain"


def classification_report(sigma: FDSet) -> dict[str, str]:
    return {name: classify(name, sigma) for name in sigma.universe}
