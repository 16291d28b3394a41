"""Abstract syntax of SKY programs and the static checks run on them.

A :class:`Program` is only ever produced by :func:`make_program`, which
computes the circumscription policy and rejects programs that are unsafe,
arity-inconsistent, non-stratifiable or carry a conflicting policy.
"""

from __future__ import annotations

import enum
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

_CONST_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z|[0-9]+\Z")
_VAR_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Term:
    kind: str  # "constant" | "variable"
    name: str

    def __post_init__(self):
        if self.kind == "constant":
            ok = _CONST_RE.match(self.name) is not None
        elif self.kind == "variable":
            ok = _VAR_RE.match(self.name) is not None
        else:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if not ok:
            raise ValueError(f"{self.name!r} is not a valid {self.kind}")

    @classmethod
    def const(cls, name: str | int) -> "Term":
        if isinstance(name, int) or name.isdigit():
            name = str(int(name))
        return cls("constant", name)

    @classmethod
    def var(cls, name: str) -> "Term":
        return cls("variable", name)

    @property
    def is_variable(self) -> bool:
        return self.kind == "variable"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> list[str]:
        return [t.name for t in self.args if t.is_variable]

    def is_ground(self) -> bool:
        return not any(t.is_variable for t in self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"not {self.atom}"


class RuleKind(enum.Enum):
    FACT = "fact"
    RULE = "rule"
    CONSTRAINT = "constraint"
    GUESS = "guess"


@dataclass(frozen=True)
class Rule:
    head: Atom | None
    body: tuple[Literal, ...]
    kind: RuleKind
    # source line, informational only
    line: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind is RuleKind.CONSTRAINT:
            if self.head is not None or not self.body:
                raise ValueError("a constraint has no head and a non-empty body")
            return
        if self.head is None:
            raise ValueError(f"a {self.kind.value} needs a head")
        if self.kind is RuleKind.FACT and (self.body or not self.head.is_ground()):
            raise ValueError("a fact is a ground atom with an empty body")

    def positive_body(self) -> list[Atom]:
        return [lit.atom for lit in self.body if lit.positive]

    def negative_body(self) -> list[Atom]:
        return [lit.atom for lit in self.body if not lit.positive]

    def atoms(self) -> list[Atom]:
        out = [self.head] if self.head is not None else []
        return out + [lit.atom for lit in self.body]

    def __str__(self) -> str:
        body = ", ".join(map(str, self.body))
        if self.kind is RuleKind.CONSTRAINT:
            return f":- {body}."
        prefix = "#guess " if self.kind is RuleKind.GUESS else ""
        if not self.body:
            return f"{prefix}{self.head}."
        return f"{prefix}{self.head} :- {body}."


@dataclass(frozen=True)
class CircumscriptionPolicy:
    minimized: frozenset[str] = frozenset()
    fixed: frozenset[str] = frozenset()
    varying: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]
    policy: CircumscriptionPolicy
    show: frozenset[str] | None = None  # None: show every predicate

    @property
    def predicates(self) -> frozenset[str]:
        return frozenset(predicate_arities(self.rules))

    @property
    def guess_predicates(self) -> frozenset[str]:
        return guess_predicates(self.rules)

    @property
    def edb_predicates(self) -> frozenset[str]:
        return edb_predicates(self.rules)

    def facts(self) -> list[Rule]:
        return [r for r in self.rules if r.kind is RuleKind.FACT]

    def __str__(self) -> str:
        return format_program(self)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    """One static error; ``kind`` selects the CLI exit code."""

    kind: str  # safety | arity | guess | stratification | policy
    message: str
    rule_index: int | None = None
    line: int | None = None
    variable: str | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.kind}: {self.message}"


class ValidityError(Exception):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        super().__init__("; ".join(map(str, self.violations)))


class StratificationError(Exception):
    def __init__(self, cycle: Sequence[str]):
        self.cycle = tuple(cycle)
        super().__init__("cycle through negation: " + " -> ".join(self.cycle))


def validate_safety(rule: Rule, index: int | None = None) -> list[Violation]:
    """Range-restriction check; an empty list means the rule is safe."""
    bound = {v for atom in rule.positive_body() for v in atom.variables()}
    violations = []
    seen = set()
    if rule.head is not None:
        for v in rule.head.variables():
            if v not in bound and v not in seen:
                seen.add(v)
                violations.append(Violation(
                    "safety", f"variable {v} in head of `{rule}` is unbound",
                    index, rule.line, v))
    for atom in rule.negative_body():
        for v in atom.variables():
            if v not in bound and v not in seen:
                seen.add(v)
                violations.append(Violation(
                    "safety", f"variable {v} in `{rule}` occurs only under negation",
                    index, rule.line, v))
    return violations


def predicate_arities(rules: Iterable[Rule]) -> dict[str, int]:
    arities: dict[str, int] = {}
    for rule in rules:
        for atom in rule.atoms():
            arities.setdefault(atom.predicate, atom.arity)
    return arities


def guess_predicates(rules: Iterable[Rule]) -> frozenset[str]:
    return frozenset(r.head.predicate for r in rules if r.kind is RuleKind.GUESS)


def edb_predicates(rules: Sequence[Rule]) -> frozenset[str]:
    """Predicates never in the head of a rule other than a fact."""
    preds = set(predicate_arities(rules))
    for r in rules:
        if r.head is not None and r.kind is not RuleKind.FACT:
            preds.discard(r.head.predicate)
    return frozenset(preds)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    negative: bool


@dataclass(frozen=True)
class DependencyGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    def successors(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = defaultdict(list)
        for e in self.edges:
            out[e.source].append(e)
        return out


def build_dependency_graph(program: Program | Sequence[Rule]) -> DependencyGraph:
    """Edge q -> p for every body literal on q in a rule with head p.

    Guess rules contribute edges from their range body to the guessed
    predicate, so ranges are evaluated before anything reading the guess.
    """
    rules = program.rules if isinstance(program, Program) else program
    edges = set()
    for r in rules:
        if r.head is None:
            continue
        for lit in r.body:
            edges.add(Edge(lit.atom.predicate, r.head.predicate, not lit.positive))
    vertices = tuple(sorted(predicate_arities(rules)))
    ordered = tuple(sorted(edges, key=lambda e: (e.source, e.target, e.negative)))
    return DependencyGraph(vertices, ordered)


def _sccs(graph: DependencyGraph) -> list[list[str]]:
    succ = {v: [] for v in graph.vertices}
    for e in graph.edges:
        succ[e.source].append(e.target)
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    result: list[list[str]] = []
    counter = 0

    for root in graph.vertices:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            nbrs = succ[v]
            while i < len(nbrs):
                w = nbrs[i]
                i += 1
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return result


def _negative_cycle(graph: DependencyGraph) -> list[str] | None:
    comp_of = {}
    for n, comp in enumerate(_sccs(graph)):
        for v in comp:
            comp_of[v] = n
    succ = graph.successors()
    for e in graph.edges:
        if not e.negative or comp_of[e.source] != comp_of[e.target]:
            continue
        # shortest path target -> source inside the component closes the cycle
        comp = comp_of[e.source]
        prev = {e.target: None}
        frontier = [e.target]
        while frontier and e.source not in prev:
            nxt = []
            for v in frontier:
                for f in succ[v]:
                    if comp_of[f.target] == comp and f.target not in prev:
                        prev[f.target] = v
                        nxt.append(f.target)
            frontier = nxt
        path = []
        v = e.source
        while v is not None:
            path.append(v)
            v = prev[v]
        path.reverse()  # target ... source
        return [e.source] + path
    return None


def stratify(graph: DependencyGraph | Program) -> tuple[frozenset[str], ...]:
    """Minimal stratification: each predicate sits at the lowest level allowed.

    Raises :class:`StratificationError` carrying one cycle through negation.
    """
    if isinstance(graph, Program):
        graph = build_dependency_graph(graph)
    cycle = _negative_cycle(graph)
    if cycle is not None:
        raise StratificationError(cycle)
    level = {v: 0 for v in graph.vertices}
    changed = True
    while changed:
        changed = False
        for e in graph.edges:
            need = level[e.source] + (1 if e.negative else 0)
            if level[e.target] < need:
                level[e.target] = need
                changed = True
    if not level:
        return ()
    strata: list[set[str]] = [set() for _ in range(max(level.values()) + 1)]
    for v, n in level.items():
        strata[n].add(v)
    return tuple(frozenset(s) for s in strata)


def _guess_violations(rules: Sequence[Rule]) -> list[Violation]:
    guesses = guess_predicates(rules)
    out = []
    for i, r in enumerate(rules):
        if r.head is not None and r.kind is not RuleKind.GUESS and r.head.predicate in guesses:
            out.append(Violation(
                "guess", f"guess predicate {r.head.predicate} is also defined by `{r}`",
                i, r.line))
    depends = guess_dependent_predicates(rules)
    for i, r in enumerate(rules):
        if r.kind is not RuleKind.GUESS:
            continue
        bad = sorted({lit.atom.predicate for lit in r.body} & depends)
        if bad:
            out.append(Violation(
                "guess", f"range of `{r}` depends on guess predicate(s) {', '.join(bad)}",
                i, r.line))
    return out


def guess_dependent_predicates(rules: Sequence[Rule]) -> frozenset[str]:
    """Guess predicates plus everything derived (transitively) from them."""
    depends = set(guess_predicates(rules))
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.head is None or r.kind is RuleKind.GUESS or r.head.predicate in depends:
                continue
            if any(lit.atom.predicate in depends for lit in r.body):
                depends.add(r.head.predicate)
                changed = True
    return frozenset(depends)


def default_policy(rules: Sequence[Rule]) -> CircumscriptionPolicy:
    preds = frozenset(predicate_arities(rules))
    minimized = guess_predicates(rules)
    fixed = edb_predicates(rules)
    return CircumscriptionPolicy(minimized, fixed, preds - minimized - fixed)


def make_program(rules: Sequence[Rule], minimize: Iterable[str] | None = None,
                 fix: Iterable[str] = (), show: Iterable[str] | None = None) -> Program:
    """Validate ``rules`` and attach the circumscription policy.

    ``minimize`` replaces the default minimized set (the guess predicates);
    ``fix`` adds predicates to the fixed set, which always holds the EDB, and
    takes them out of the default minimized set.
    All violations are collected and raised together as :class:`ValidityError`.
    """
    rules = tuple(rules)
    violations: list[Violation] = []

    arities: dict[str, tuple[int, Atom]] = {}
    for i, r in enumerate(rules):
        for atom in r.atoms():
            known = arities.setdefault(atom.predicate, (atom.arity, atom))
            if known[0] != atom.arity:
                violations.append(Violation(
                    "arity", f"predicate {atom.predicate} used with arity {known[0]} "
                    f"(`{known[1]}`) and {atom.arity} (`{atom}`)", i, r.line))

    for i, r in enumerate(rules):
        violations.extend(validate_safety(r, i))

    graph = build_dependency_graph(rules)
    violations.extend(_guess_violations(rules))
    try:
        stratify(graph)
    except StratificationError as exc:
        violations.append(Violation("stratification", str(exc)))

    preds = frozenset(predicate_arities(rules))
    base = default_policy(rules)
    minimize = None if minimize is None else frozenset(minimize)
    fix = frozenset(fix)
    for name in sorted((minimize or frozenset()) | fix):
        if name not in preds:
            violations.append(Violation("policy", f"unknown predicate {name} in a policy directive"))
    if minimize is not None:
        for name in sorted(minimize & fix):
            violations.append(Violation("policy", f"predicate {name} is both minimized and fixed"))
        for name in sorted(minimize & base.fixed):
            violations.append(Violation("policy", f"EDB predicate {name} cannot be minimized"))

    if violations:
        raise ValidityError(violations)

    # an explicit #fix on a guess predicate takes it out of the default minimized set
    minimized = base.minimized - fix if minimize is None else minimize
    fixed = base.fixed | fix
    policy = CircumscriptionPolicy(minimized, fixed, preds - minimized - fixed)
    return Program(rules, policy, None if show is None else frozenset(show))


def format_program(program: Program) -> str:
    """Render ``program`` as SKY source that parses back to an equal Program."""
    lines = [str(r) for r in program.rules]
    base = default_policy(program.rules)
    extra_fixed = program.policy.fixed - base.fixed
    if program.policy.minimized != base.minimized - extra_fixed:
        lines.append(f"#minimize {', '.join(sorted(program.policy.minimized))}.")
    if extra_fixed:
        lines.append(f"#fix {', '.join(sorted(extra_fixed))}.")
    if program.show is not None and program.show:
        lines.append(f"#show {', '.join(sorted(program.show))}.")
    return "\n".join(lines) + "\n"
