"""Bottom-up evaluation of the stratified rule layer.

Two evaluators live here. :func:`least_model` is the semi-naive one used by
the solvers; it works on integer bitmasks over a compiled copy of the ground
program. :func:`naive_least_model` iterates the immediate-consequence
operator on plain atom sets and exists for differential testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .grounder import GroundAtom, GroundProgram, GroundRule
from .syntax import RuleKind


@dataclass(frozen=True)
class Interpretation:
    atoms: frozenset[GroundAtom] = frozenset()

    def __contains__(self, atom: GroundAtom) -> bool:
        return atom in self.atoms

    def __iter__(self) -> Iterator[GroundAtom]:
        return iter(sorted(self.atoms))

    def __len__(self) -> int:
        return len(self.atoms)

    def __le__(self, other: "Interpretation") -> bool:
        return self.atoms <= other.atoms

    def __lt__(self, other: "Interpretation") -> bool:
        return self.atoms < other.atoms

    def project(self, predicates: Iterable[str] | None) -> "Interpretation":
        if predicates is None:
            return self
        keep = frozenset(predicates)
        return Interpretation(frozenset(a for a in self.atoms if a.predicate in keep))

    def render(self, show: Iterable[str] | None = None) -> str:
        return "{" + ", ".join(str(a) for a in self.project(show)) + "}"

    def __str__(self) -> str:
        return self.render()


def _rules_of(ground: GroundProgram, stratum) -> list[GroundRule]:
    if isinstance(stratum, int):
        stratum = ground.strata[stratum]
    return [r for r in ground.rules
            if r.kind in (RuleKind.FACT, RuleKind.RULE) and r.head.predicate in stratum]


def _fires(rule: GroundRule, atoms) -> bool:
    return all(a in atoms for a in rule.positive) and not any(a in atoms for a in rule.negative)


def tp_step(ground: GroundProgram, stratum, current: Interpretation | Iterable[GroundAtom]) -> Interpretation:
    """One application of the immediate-consequence operator for ``stratum``.

    ``stratum`` is a predicate set or an index into ``ground.strata``.
    """
    atoms = current.atoms if isinstance(current, Interpretation) else frozenset(current)
    heads = {r.head for r in _rules_of(ground, stratum) if _fires(r, atoms)}
    return Interpretation(atoms | heads)


def naive_least_model(ground: GroundProgram, guess_assignment: Iterable[GroundAtom]) -> Interpretation:
    """Reference evaluator: iterate :func:`tp_step` per stratum until nothing changes."""
    model = Interpretation(ground.facts | frozenset(guess_assignment))
    for stratum in ground.strata:
        while True:
            nxt = tp_step(ground, stratum, model)
            if nxt == model:
                break
            model = nxt
    return model


class CompiledProgram:
    """Bitmask form of a ground program.

    Decision atom ``i`` of ``n`` owns bit ``n - 1 - i``, so the integer ``k``
    read as a bitmask is the k-th candidate in lexicographic subset order.
    Rules whose head does not depend on a guess predicate are evaluated once
    into :attr:`base`; per-candidate work touches only the dependent rules.
    """

    def __init__(self, ground: GroundProgram):
        self.ground = ground
        n = len(ground.decision_atoms)
        ids: dict[GroundAtom, int] = {a: n - 1 - i for i, a in enumerate(ground.decision_atoms)}
        others = set(ground.facts)
        for r in ground.rules:
            if r.head is not None:
                others.add(r.head)
            others.update(lit.atom for lit in r.body)
        for a in sorted(others - ids.keys()):
            ids[a] = len(ids)
        self.ids = ids
        self.atoms = [None] * len(ids)
        for a, i in ids.items():
            self.atoms[i] = a
        self.n_decisions = n
        self.decision_bits = [1 << (n - 1 - i) for i in range(n)]

        decision = frozenset(ground.decision_atoms)
        guess_preds = ground.guess_predicates
        # guess atoms outside the decision set are false in every model
        dead = 0
        for a, i in ids.items():
            if a.predicate in guess_preds and a not in decision:
                dead |= 1 << i
        self.dead = dead

        dependent_preds = self._dependent_predicates()
        self.facts_mask = self.mask(ground.facts)
        strata_rules: list[list[tuple[int, int, int]]] = [[] for _ in ground.strata]
        base_rules: list[list[tuple[int, int, int]]] = [[] for _ in ground.strata]
        stratum_index = {p: k for k, s in enumerate(ground.strata) for p in s}
        self.constraints: list[tuple[int, int, int]] = []  # (pos, neg, index into ground.constraints)
        for ci, c in enumerate(ground.constraints):
            pos = self.mask(c.positive)
            if not pos & dead:
                self.constraints.append((pos, self.mask(c.negative), ci))
        for r in ground.rules:
            if r.kind is not RuleKind.RULE:
                continue
            pos = self.mask(r.positive)
            neg = self.mask(r.negative)
            if pos & dead:
                continue
            k = stratum_index[r.head.predicate]
            target = strata_rules if r.head.predicate in dependent_preds else base_rules
            target[k].append((1 << ids[r.head], pos, neg))
        self.dependent = [(rules, _watch(rules)) for rules in strata_rules if rules]
        base = self.facts_mask
        for rules in base_rules:
            base = _saturate(rules, _watch(rules), base)
        self.base = base
        self.all_strata = [(rules, _watch(rules)) for rules in
                           (b + d for b, d in zip(base_rules, strata_rules)) if rules]

    def _dependent_predicates(self) -> frozenset[str]:
        ground = self.ground
        depends = set(ground.guess_predicates)
        changed = True
        while changed:
            changed = False
            for r in ground.rules:
                if r.kind is not RuleKind.RULE or r.head.predicate in depends:
                    continue
                if any(lit.atom.predicate in depends for lit in r.body):
                    depends.add(r.head.predicate)
                    changed = True
        return frozenset(depends)

    def mask(self, atoms: Iterable[GroundAtom]) -> int:
        m = 0
        for a in atoms:
            m |= 1 << self.ids[a]
        return m

    def decode(self, mask: int) -> frozenset[GroundAtom]:
        out = []
        while mask:
            low = mask & -mask
            out.append(self.atoms[low.bit_length() - 1])
            mask ^= low
        return frozenset(out)

    def candidate_mask(self, atoms: Iterable[GroundAtom]) -> int:
        m = 0
        for a in atoms:
            i = self.ids.get(a)
            if i is None or i >= self.n_decisions:
                raise ValueError(f"{a} is not a decision atom")
            m |= 1 << i
        return m

    def model(self, candidate: int) -> int:
        """Semi-naive least model for a candidate given as a decision bitmask."""
        m = self.base | candidate
        for rules, watch in self.dependent:
            m = _saturate(rules, watch, m)
        return m

    def model_from_scratch(self, candidate: int) -> int:
        m = self.facts_mask | candidate
        for rules, watch in self.all_strata:
            m = _saturate(rules, watch, m)
        return m

    def first_violation(self, model: int) -> int | None:
        """Index (into ``ground.constraints``) of the first violated constraint."""
        for pos, neg, index in self.constraints:
            if model & pos == pos and not model & neg:
                return index
        return None


def _watch(rules: list[tuple[int, int, int]]) -> dict[int, list[tuple[int, int, int]]]:
    watch: dict[int, list[tuple[int, int, int]]] = {}
    for rule in rules:
        pos = rule[1]
        while pos:
            low = pos & -pos
            watch.setdefault(low, []).append(rule)
            pos ^= low
    return watch


def _saturate(rules, watch, model: int) -> int:
    # first round: every rule of the stratum
    delta = 0
    for head, pos, neg in rules:
        if not model & head and model & pos == pos and not model & neg:
            delta |= head
    model |= delta
    # later rounds: only rules with a body atom that is new
    while delta:
        new = 0
        d = delta
        while d:
            low = d & -d
            d ^= low
            for head, pos, neg in watch.get(low, ()):
                if not (model | new) & head and model & pos == pos and not model & neg:
                    new |= head
        model |= new
        delta = new
    return model


def compiled(ground: GroundProgram) -> CompiledProgram:
    prog = ground._cache.get("compiled")
    if prog is None:
        prog = ground._cache["compiled"] = CompiledProgram(ground)
    return prog


def least_model(ground: GroundProgram, guess_assignment: Iterable[GroundAtom]) -> Interpretation:
    prog = compiled(ground)
    return Interpretation(prog.decode(prog.model(prog.candidate_mask(guess_assignment))))


def violates_constraints(ground: GroundProgram,
                         model: Interpretation | Iterable[GroundAtom]) -> GroundRule | None:
    atoms = model.atoms if isinstance(model, Interpretation) else frozenset(model)
    for c in ground.constraints:
        if _fires(c, atoms):
            return c
    return None
