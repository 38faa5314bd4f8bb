"""A minimal parenthesized query form over named uncertain relations.

Grammar:

    expr  := NAME
           | ( select pred expr )
           | ( project ( attr ... ) expr )
           | ( join expr expr [ ( attr ... ) ] )
    pred  := ( = attr value ) | ( and pred ... )

Evaluation applies the rewritten operators, so condition columns ride
along untouched and the result is again an uncertain relation.
"""

from __future__ import annotations

from typing import Mapping

from .errors import DomainError
from .urelations import URelation, u_join, u_project, u_select


def tokenize(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0]
        out.extend(line.replace("(", " ( ").replace(")", " ) ").split())
    return out


def parse(text: str):
    tokens = tokenize(text)
    if not tokens:
        raise DomainError("empty query")
    tree, rest = _parse(tokens)
    if rest:
        raise DomainError(f"trailing tokens after query: {' '.join(rest)}")
    return tree


def _parse(tokens: list[str]):
    if not tokens:
        raise DomainError("unexpected end of query")
    head, rest = tokens[0], tokens[1:]
    if head == ")":
        raise DomainError("unbalanced ')'")
    if head != "(":
        return head, rest
    items = []
    while rest and rest[0] != ")":
        item, rest = _parse(rest)
        items.append(item)
    if not rest:
        raise DomainError("missing ')'")
    return tuple(items), rest[1:]


def _pred_to_eq(pred) -> dict[str, str]:
    if not isinstance(pred, tuple) or not pred:
        raise DomainError(f"malformed predicate: {pred!r}")
    if pred[0] == "=":
        if len(pred) != 3:
            raise DomainError("'=' takes an attribute and a value")
        return {pred[1]: pred[2]}
    if pred[0] == "and":
        merged: dict[str, str] = {}
        for sub in pred[1:]:
            for attr, value in _pred_to_eq(sub).items():
                if attr in merged and merged[attr] != value:
                    raise DomainError(f"contradictory predicate on {attr!r}")
                merged[attr] = value
        return merged
    raise DomainError(f"unknown predicate head {pred[0]!r}")


def evaluate(tree, relations: Mapping[str, URelation]) -> URelation:
    if isinstance(tree, str):
        if tree not in relations:
            raise DomainError(f"unknown relation {tree!r}")
        return relations[tree]
    if not tree:
        raise DomainError("empty expression")
    head = tree[0]
    if head == "select":
        if len(tree) != 3:
            raise DomainError("select takes a predicate and an expression")
        return u_select(evaluate(tree[2], relations), _pred_to_eq(tree[1]))
    if head == "project":
        if len(tree) != 3 or not isinstance(tree[1], tuple):
            raise DomainError("project takes an attribute list and an expression")
        return u_project(evaluate(tree[2], relations), tree[1])
    if head == "join":
        if len(tree) == 3:
            return u_join(evaluate(tree[1], relations), evaluate(tree[2], relations))
        if len(tree) == 4 and isinstance(tree[3], tuple):
            return u_join(
                evaluate(tree[1], relations),
                evaluate(tree[2], relations),
                on=tree[3],
            )
        raise DomainError("join takes two expressions and an optional attribute list")
    raise DomainError(f"unknown operator {head!r}")


def run_query(text: str, relations: Mapping[str, URelation]) -> URelation:
    return evaluate(parse(text), relations)
