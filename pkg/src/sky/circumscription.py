"""Circumscriptive semantics and the exhaustive-enumeration oracle.

A candidate is a subset of the decision atoms. Its model is the least model
of the rule layer seeded with the candidate; the candidate is accepted when no
constraint fires. Among accepted models the minimal ones are those whose
minimized-predicate part has no strict subset among accepted models agreeing
on the fixed predicates. Varying predicates are ignored by the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .fixpoint import Interpretation, compiled
from .grounder import GroundAtom, GroundProgram, GroundRule

DEFAULT_ORACLE_BOUND = 24


class OracleGuardError(Exception):
    def __init__(self, size: int, bound: int):
        self.size = size
        self.bound = bound
        super().__init__(
            f"{size} decision atoms exceed the brute-force bound of {bound}; "
            "pass the override (--force-large) to enumerate anyway")


@dataclass(frozen=True)
class Rejection:
    """A candidate whose least model fires ``constraint``."""

    constraint: GroundRule

    def __bool__(self) -> bool:
        return False


class ModelSet:
    """Distinct models, iterated in order of their full canonical rendering."""

    def __init__(self, models: Iterable[Interpretation] = (), show: frozenset[str] | None = None):
        unique = {m.atoms: m for m in models}
        self.models: tuple[Interpretation, ...] = tuple(
            sorted(unique.values(), key=lambda m: m.render()))
        self.show = show

    def __iter__(self) -> Iterator[Interpretation]:
        return iter(self.models)

    def __len__(self) -> int:
        return len(self.models)

    def __contains__(self, model: Interpretation) -> bool:
        return model in self.models

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelSet):
            return NotImplemented
        return self.models == other.models

    def __hash__(self):
        return hash(self.models)

    def __repr__(self) -> str:
        return f"ModelSet({[m.render() for m in self.models]})"

    def lines(self) -> list[str]:
        """Output rendering: projected to ``show`` and sorted."""
        return sorted(m.render(self.show) for m in self.models)


@dataclass
class OracleStats:
    tried: int = 0
    accepted: int = 0
    minimal: int = 0
    truncated: bool = False


def is_model(ground: GroundProgram, candidate: Iterable[GroundAtom]) -> Interpretation | Rejection:
    prog = compiled(ground)
    model = prog.model(prog.candidate_mask(candidate))
    bad = prog.first_violation(model)
    if bad is not None:
        return Rejection(ground.constraints[bad])
    return Interpretation(prog.decode(model))


class _Projector:
    """Bitmask projections onto minimized and fixed predicates."""

    def __init__(self, ground: GroundProgram):
        prog = compiled(ground)
        self.prog = prog
        policy = ground.policy
        self.minimized = 0
        self.fixed = 0
        for atom, i in prog.ids.items():
            if atom.predicate in policy.minimized:
                self.minimized |= 1 << i
            elif atom.predicate in policy.fixed:
                self.fixed |= 1 << i

    def mask_of(self, model: Interpretation) -> int:
        return self.prog.mask(model.atoms)


def projector(ground: GroundProgram) -> _Projector:
    proj = ground._cache.get("projector")
    if proj is None:
        proj = ground._cache["projector"] = _Projector(ground)
    return proj


def is_minimal(ground: GroundProgram, model: Interpretation, accepted: Iterable[Interpretation]) -> bool:
    proj = projector(ground)
    m = proj.mask_of(model)
    mm, mf = m & proj.minimized, m & proj.fixed
    for other in accepted:
        o = proj.mask_of(other)
        om = o & proj.minimized
        if o & proj.fixed == mf and om != mm and om & mm == om:
            return False
    return True


def minimal_masks(ground: GroundProgram, masks: Iterable[int]) -> list[int]:
    """Keep the model masks whose minimized projection is subset-minimal.

    Masks are grouped by their fixed projection; inside a group they are
    scanned by increasing projection size, so each one only needs checking
    against minimal projections already kept.
    """
    proj = projector(ground)
    groups: dict[int, list[int]] = {}
    for m in masks:
        groups.setdefault(m & proj.fixed, []).append(m)
    kept = []
    for members in groups.values():
        by_size = sorted(members, key=lambda m: (m & proj.minimized).bit_count())
        minimal_proj: set[int] = set()
        for m in by_size:
            p = m & proj.minimized
            if any(q != p and q & p == q for q in minimal_proj):
                continue
            minimal_proj.add(p)
            kept.append(m)
    return kept


def minimal_models(ground: GroundProgram, accepted: Iterable[Interpretation]) -> ModelSet:
    proj = projector(ground)
    masks = [proj.mask_of(m) for m in accepted]
    prog = proj.prog
    return ModelSet((Interpretation(prog.decode(m)) for m in minimal_masks(ground, masks)),
                    ground.show)


def enumerate_bruteforce(ground: GroundProgram, limit: int | None = None, *,
                         force: bool = False,
                         bound: int = DEFAULT_ORACLE_BOUND) -> tuple[ModelSet, OracleStats]:
    """Try every subset of the decision atoms, then filter to minimal models.

    ``limit`` caps the number of accepted candidates; hitting it before the
    space is exhausted marks the result as truncated.
    """
    n = len(ground.decision_atoms)
    if n > bound and not force:
        raise OracleGuardError(n, bound)
    prog = compiled(ground)
    model_of = prog.model
    violated = prog.first_violation
    stats = OracleStats()
    accepted: list[int] = []
    total = 1 << n
    for candidate in range(total):
        if limit is not None and len(accepted) >= limit:
            stats.truncated = True
            break
        m = model_of(candidate)
        stats.tried += 1
        if violated(m) is None:
            accepted.append(m)
    stats.accepted = len(accepted)
    kept = minimal_masks(ground, accepted)
    stats.minimal = len(kept)
    models = ModelSet((Interpretation(prog.decode(m)) for m in kept), ground.show)
    return models, stats
