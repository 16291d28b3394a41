"""Instantiation of a validated Program over its active Herbrand universe."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import total_ordering
from typing import Iterable

from .syntax import (
    Atom,
    CircumscriptionPolicy,
    Program,
    Rule,
    RuleKind,
    stratify,
)


def constant_key(name: str) -> tuple:
    """Integers sort before identifiers, integers by value."""
    return (0, int(name), "") if name.isdigit() else (1, 0, name)


@total_ordering
@dataclass(frozen=True, eq=True)
class GroundAtom:
    predicate: str
    args: tuple[str, ...] = ()

    def sort_key(self) -> tuple:
        return (self.predicate, tuple(constant_key(a) for a in self.args))

    def __lt__(self, other: "GroundAtom") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(self.args)})"


@dataclass(frozen=True)
class GroundLiteral:
    atom: GroundAtom
    positive: bool = True

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"not {self.atom}"


@dataclass(frozen=True)
class GroundRule:
    head: GroundAtom | None
    body: tuple[GroundLiteral, ...]
    kind: RuleKind
    source: int  # index of the originating statement

    @property
    def positive(self) -> tuple[GroundAtom, ...]:
        return tuple(lit.atom for lit in self.body if lit.positive)

    @property
    def negative(self) -> tuple[GroundAtom, ...]:
        return tuple(lit.atom for lit in self.body if not lit.positive)

    def __str__(self) -> str:
        body = ", ".join(map(str, self.body))
        if self.head is None:
            return f":- {body}."
        prefix = "#guess " if self.kind is RuleKind.GUESS else ""
        return f"{prefix}{self.head} :- {body}." if body else f"{prefix}{self.head}."


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple[GroundRule, ...]  # facts, rules and constraints in deterministic order
    decision_atoms: tuple[GroundAtom, ...]
    policy: CircumscriptionPolicy
    strata: tuple[frozenset[str], ...]
    guesses: tuple[GroundRule, ...] = ()  # guess-range instances
    facts: frozenset[GroundAtom] = frozenset()
    edb_predicates: frozenset[str] = frozenset()
    guess_predicates: frozenset[str] = frozenset()
    show: frozenset[str] | None = None
    # compiled evaluators, filled lazily by fixpoint/backtrack
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def constraints(self) -> tuple[GroundRule, ...]:
        return tuple(r for r in self.rules if r.kind is RuleKind.CONSTRAINT)

    def stratum_of(self, predicate: str) -> int:
        for i, s in enumerate(self.strata):
            if predicate in s:
                return i
        raise KeyError(predicate)


def herbrand_universe(program: Program | Iterable[Rule]) -> tuple[str, ...]:
    rules = program.rules if isinstance(program, Program) else program
    consts = {t.name for r in rules for a in r.atoms() for t in a.args if not t.is_variable}
    return tuple(sorted(consts, key=constant_key))


def _ground_atom(atom: Atom, sub: dict[str, str]) -> GroundAtom:
    return GroundAtom(atom.predicate,
                      tuple(sub[t.name] if t.is_variable else t.name for t in atom.args))


def _match(atom: Atom, args: tuple[str, ...], sub: dict[str, str]) -> dict[str, str] | None:
    out = sub
    for term, value in zip(atom.args, args):
        if term.is_variable:
            bound = out.get(term.name)
            if bound is None:
                if out is sub:
                    out = dict(sub)
                out[term.name] = value
            elif bound != value:
                return None
        elif term.name != value:
            return None
    return out


def _variable_order(rule: Rule) -> list[str]:
    seen: dict[str, None] = {}
    for atom in rule.atoms():
        for v in atom.variables():
            seen.setdefault(v)
    return list(seen)


def _instantiate(rule: Rule, universe: tuple[str, ...],
                 edb: frozenset[str], edb_index: dict[str, list[tuple[str, ...]]]) -> list[tuple]:
    subs: list[dict[str, str]] = [{}]
    for lit in rule.body:
        if not lit.positive or lit.atom.predicate not in edb:
            continue
        rows = edb_index.get(lit.atom.predicate, ())
        subs = [s2 for s in subs for row in rows
                if (s2 := _match(lit.atom, row, s)) is not None]
        if not subs:
            return []
    order = _variable_order(rule)
    full = []
    for s in subs:
        free = [v for v in order if v not in s]
        for values in itertools.product(universe, repeat=len(free)):
            s2 = dict(s)
            s2.update(zip(free, values))
            full.append(s2)
    full.sort(key=lambda s: tuple(constant_key(s[v]) for v in order))
    out = []
    for s in full:
        head = _ground_atom(rule.head, s) if rule.head is not None else None
        body = tuple(GroundLiteral(_ground_atom(l.atom, s), l.positive) for l in rule.body)
        out.append((head, body))
    return out


def _ground(program: Program) -> GroundProgram:
    universe = herbrand_universe(program)
    edb = program.edb_predicates
    edb_index: dict[str, list[tuple[str, ...]]] = {}
    facts: dict[GroundAtom, None] = {}
    for r in program.rules:
        if r.kind is RuleKind.FACT:
            atom = _ground_atom(r.head, {})
            if atom not in facts:
                facts[atom] = None
                if atom.predicate in edb:
                    edb_index.setdefault(atom.predicate, []).append(atom.args)

    rules: list[GroundRule] = []
    guesses: list[GroundRule] = []
    for i, r in enumerate(program.rules):
        if r.kind is RuleKind.FACT:
            rules.append(GroundRule(_ground_atom(r.head, {}), (), r.kind, i))
            continue
        for head, body in _instantiate(r, universe, edb, edb_index):
            target = guesses if r.kind is RuleKind.GUESS else rules
            target.append(GroundRule(head, body, r.kind, i))

    strata = stratify(program)
    return GroundProgram(
        rules=tuple(rules),
        decision_atoms=(),
        policy=program.policy,
        strata=strata,
        guesses=tuple(guesses),
        facts=frozenset(facts),
        edb_predicates=edb,
        guess_predicates=program.guess_predicates,
        show=program.show,
    )


def _domain(ground: GroundProgram) -> tuple[GroundAtom, ...]:
    from .fixpoint import naive_least_model

    # guesses all out: the decision set is still empty here
    model = naive_least_model(ground, frozenset())
    domain = {
        g.head for g in ground.guesses
        if all(a in model for a in g.positive) and not any(a in model for a in g.negative)
    }
    return tuple(sorted(domain))


def ground_program(program: Program) -> GroundProgram:
    """Ground ``program`` and fix its decision atoms.

    Rule instances are produced in source order, then by substitution
    (variables in first-occurrence order, universe order). Instances whose
    positive EDB literals are not facts are dropped.
    """
    ground = _ground(program)
    return replace(ground, decision_atoms=_domain(ground), _cache={})


def guess_domain(program: Program) -> tuple[GroundAtom, ...]:
    return _domain(_ground(program))
