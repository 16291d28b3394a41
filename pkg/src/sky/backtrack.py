"""Depth-first search over three-valued assignments to the decision atoms.

In ``backtrack`` mode every node runs unit propagation over the constraints
that mention only decision atoms and EDB facts, and (when sound) prunes nodes
whose minimized in-atoms strictly contain an accepted model's. ``enumerate``
mode walks the same tree with no pruning at all. Both finish with the same
global minimality filter as the oracle, so they return the same models.
"""

from __future__ import annotations

import enum
import sys
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .circumscription import ModelSet, Rejection, is_model, minimal_masks
from .fixpoint import Interpretation, compiled
from .grounder import GroundAtom, GroundProgram, GroundRule

MODES = ("backtrack", "enumerate")
BRANCH_ORDERS = ("lexicographic", "most-constrained-first")


class Value(enum.IntEnum):
    UNDECIDED = -1
    OUT = 0
    IN = 1


class PartialAssignment:
    """Decision atoms mapped to in/out/undecided, with a chronological trail."""

    def __init__(self, atoms: tuple[GroundAtom, ...]):
        self.atoms = tuple(atoms)
        self.index = {a: i for i, a in enumerate(self.atoms)}
        self.values = [Value.UNDECIDED] * len(self.atoms)
        # (atom index, value, reason); reason is None for branching decisions
        self.trail: list[tuple[int, Value, int | None]] = []

    def assign(self, i: int, value: Value, reason: int | None = None) -> None:
        if self.values[i] is not Value.UNDECIDED:
            raise ValueError(f"{self.atoms[i]} is already assigned")
        self.values[i] = value
        self.trail.append((i, value, reason))

    def set(self, atom: GroundAtom, value: Value) -> None:
        self.assign(self.index[atom], value)

    def undo_to(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            i, _, _ = trail.pop()
            self.values[i] = Value.UNDECIDED

    def __getitem__(self, atom: GroundAtom) -> Value:
        return self.values[self.index[atom]]

    @property
    def state(self) -> dict[GroundAtom, Value]:
        return dict(zip(self.atoms, self.values))

    def undecided(self) -> Iterator[int]:
        return (i for i, v in enumerate(self.values) if v is Value.UNDECIDED)

    def is_complete(self) -> bool:
        return Value.UNDECIDED not in self.values

    def in_atoms(self) -> list[GroundAtom]:
        return [a for a, v in zip(self.atoms, self.values) if v is Value.IN]


@dataclass
class SolverStats:
    nodes_expanded: int = 0
    constraint_prunes: int = 0
    dominance_prunes: int = 0
    leaves_evaluated: int = 0
    models_found: int = 0


@dataclass(frozen=True)
class SolveConfig:
    mode: str = "backtrack"
    branch_order: str = "lexicographic"
    max_models: int | None = None
    # None: on whenever it is sound for the program
    dominance_pruning: bool | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.branch_order not in BRANCH_ORDERS:
            raise ValueError(f"branch_order must be one of {BRANCH_ORDERS}")
        if self.max_models is not None and self.max_models < 1:
            raise ValueError("max_models must be positive")


@dataclass
class SolveResult:
    models: ModelSet
    stats: SolverStats = field(default_factory=SolverStats)
    truncated: bool = False
    dominance_pruning: bool = False


class Conflict(Exception):
    def __init__(self, constraint: GroundRule):
        self.constraint = constraint
        super().__init__(f"constraint violated: {constraint}")


class _Propagator:
    """Constraints over decision atoms and EDB facts, as decision literals."""

    def __init__(self, ground: GroundProgram):
        self.ground = ground
        index = {a: i for i, a in enumerate(ground.decision_atoms)}
        facts = ground.facts
        constraints = ground.constraints
        self.literals: list[tuple[tuple[int, bool], ...]] = []
        self.origin: list[int] = []
        for ci, c in enumerate(constraints):
            lits: dict[tuple[int, bool], None] = {}
            ok = True
            for lit in c.body:
                pred = lit.atom.predicate
                if pred in ground.edb_predicates:
                    if (lit.atom in facts) != lit.positive:
                        ok = False  # never fires
                        break
                elif pred in ground.guess_predicates:
                    i = index.get(lit.atom)
                    if i is not None:
                        lits[(i, lit.positive)] = None
                    elif lit.positive:
                        ok = False  # guess atom outside the domain is always false
                        break
                else:
                    ok = False  # derived predicate: checked at the leaf
                    break
            if ok:
                self.literals.append(tuple(lits))
                self.origin.append(ci)
        self.occurs: list[list[int]] = [[] for _ in ground.decision_atoms]
        for k, lits in enumerate(self.literals):
            for i, _ in lits:
                if k not in self.occurs[i]:
                    self.occurs[i].append(k)
        self.forced = 0

    def constraint(self, k: int) -> GroundRule:
        return self.ground.constraints[self.origin[k]]

    def run(self, pa: PartialAssignment, changed: list[int] | None) -> int | None:
        """Propagate to fixpoint; return the conflicting constraint id, if any."""
        values = pa.values
        if changed is None:
            queue = deque(range(len(self.literals)))
        else:
            queue = deque(k for i in changed for k in self.occurs[i])
        queued = set(queue)
        while queue:
            k = queue.popleft()
            queued.discard(k)
            open_lit = None
            n_open = 0
            blocked = False
            for i, positive in self.literals[k]:
                v = values[i]
                if v is Value.UNDECIDED:
                    n_open += 1
                    open_lit = (i, positive)
                elif (v is Value.IN) != positive:
                    blocked = True
                    break
            if blocked:
                continue
            if n_open == 0:
                return k
            if n_open == 1:
                i, positive = open_lit
                pa.assign(i, Value.OUT if positive else Value.IN, k)
                self.forced += 1
                for k2 in self.occurs[i]:
                    if k2 not in queued:
                        queued.add(k2)
                        queue.append(k2)
        return None

    def open_counts(self, pa: PartialAssignment) -> list[int]:
        """Per decision atom, the number of not-yet-satisfied constraints it occurs in."""
        counts = [0] * len(pa.values)
        values = pa.values
        for lits in self.literals:
            if any(values[i] is not Value.UNDECIDED and (values[i] is Value.IN) != positive
                   for i, positive in lits):
                continue
            for i in {i for i, _ in lits}:
                counts[i] += 1
        return counts


def _propagator(ground: GroundProgram) -> _Propagator:
    prop = ground._cache.get("propagator")
    if prop is None:
        prop = ground._cache["propagator"] = _Propagator(ground)
    return prop


def new_assignment(ground: GroundProgram) -> PartialAssignment:
    return PartialAssignment(ground.decision_atoms)


def propagate(ground: GroundProgram, pa: PartialAssignment) -> PartialAssignment:
    """Refine ``pa`` in place by unit forcing; raise :class:`Conflict` on failure.

    Forced entries carry the id of their constraint as the trail reason.
    """
    prop = _propagator(ground)
    k = prop.run(pa, None)
    if k is not None:
        raise Conflict(prop.constraint(k))
    return pa


def _select(prop: _Propagator, pa: PartialAssignment, order: str) -> int:
    if order == "lexicographic":
        return next(pa.undecided())
    counts = prop.open_counts(pa)
    best = None
    for i in pa.undecided():
        if best is None or counts[i] > counts[best]:
            best = i
    return best


def select_branch_atom(ground: GroundProgram, pa: PartialAssignment,
                       config: SolveConfig = SolveConfig()) -> GroundAtom:
    return pa.atoms[_select(_propagator(ground), pa, config.branch_order)]


def evaluate_leaf(ground: GroundProgram, pa: PartialAssignment) -> Interpretation | Rejection:
    if not pa.is_complete():
        raise ValueError("leaf evaluation needs a fully decided assignment")
    return is_model(ground, pa.in_atoms())


def dominance_allowed(ground: GroundProgram) -> bool:
    """Forced-in guess atoms bound the minimized projection only in this case."""
    policy = ground.policy
    return (policy.minimized <= ground.guess_predicates
            and policy.fixed <= ground.edb_predicates)


class _Search:
    def __init__(self, ground: GroundProgram, config: SolveConfig):
        self.ground = ground
        self.config = config
        self.prog = compiled(ground)
        self.prop = _propagator(ground)
        self.pa = new_assignment(ground)
        self.stats = SolverStats()
        self.pruning = config.mode == "backtrack"
        self.dominance = (self.pruning and config.dominance_pruning is not False
                          and dominance_allowed(ground))
        minimized = ground.policy.minimized
        bits = self.prog.decision_bits
        self.bits = bits
        self.min_bits = [b if a.predicate in minimized else 0
                         for a, b in zip(ground.decision_atoms, bits)]
        self.accepted: list[int] = []
        self.found: list[int] = []  # minimized projections of accepted candidates
        self.stop = False
        self.truncated = False

    def run(self) -> SolveResult:
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 2 * len(self.bits) + 200))
        try:
            self._node(None)
        finally:
            sys.setrecursionlimit(limit)
        kept = minimal_masks(self.ground, self.accepted)
        models = ModelSet((Interpretation(self.prog.decode(m)) for m in kept), self.ground.show)
        return SolveResult(models, self.stats, self.truncated, self.dominance)

    def _in_mask(self, bits: list[int]) -> int:
        m = 0
        for v, b in zip(self.pa.values, bits):
            if v is Value.IN:
                m |= b
        return m

    def _node(self, changed: list[int] | None) -> None:
        stats = self.stats
        pa = self.pa
        stats.nodes_expanded += 1
        mark = len(pa.trail)
        if self.pruning:
            before = self.prop.forced
            conflict = self.prop.run(pa, changed)
            # every forced literal cuts the opposite subtree
            stats.constraint_prunes += self.prop.forced - before
            if conflict is not None:
                stats.constraint_prunes += 1
                pa.undo_to(mark)
                return
        if self.dominance:
            inside = self._in_mask(self.min_bits)
            if any(f != inside and f & inside == f for f in self.found):
                stats.dominance_prunes += 1
                pa.undo_to(mark)
                return
        if pa.is_complete():
            self._leaf()
            pa.undo_to(mark)
            return
        i = _select(self.prop, pa, self.config.branch_order)
        for value in (Value.OUT, Value.IN):
            if self.stop:
                self.truncated = True
                break
            branch_mark = len(pa.trail)
            pa.assign(i, value)
            self._node([i])
            pa.undo_to(branch_mark)
        pa.undo_to(mark)

    def _leaf(self) -> None:
        stats = self.stats
        stats.leaves_evaluated += 1
        candidate = self._in_mask(self.bits)
        model = self.prog.model(candidate)
        if self.prog.first_violation(model) is not None:
            return
        stats.models_found += 1
        self.accepted.append(model)
        self.found.append(self._in_mask(self.min_bits))
        cap = self.config.max_models
        if cap is not None and stats.models_found >= cap:
            self.stop = True


def solve(ground: GroundProgram, config: SolveConfig = SolveConfig()) -> SolveResult:
    """Run the configured search and return the minimal models with statistics.

    ``stats.models_found`` counts accepted leaves, before the final
    minimality filter.
    """
    return _Search(ground, config).run()
