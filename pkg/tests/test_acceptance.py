"""Acceptance criteria.

Each test carries a ``criterion`` marker; the session summary prints one
``[PASS]``/``[FAIL]`` line per criterion. Expected quantities come from
oracles in this file or in ``reference.py``, never from the engine itself.
"""

import itertools
import json
import random
import subprocess
import sys
import time

import pytest

import reference
from conftest import CORPUS, ground
from sky.backtrack import SolveConfig, dominance_allowed, solve
from sky.fixpoint import least_model, naive_least_model
from sky.grounder import ground_program
from sky.harness import solve_ground
from sky.parser import parse_program
from sky.syntax import RuleKind

CORPUS_FILES = sorted(CORPUS.glob("*.sky"))


def _report(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")
    assert ok, detail


@pytest.mark.criterion("oracle equivalence on the corpus")
def test_oracle_equivalence():
    start = time.perf_counter()
    checked, mismatches = 0, []
    for path in CORPUS_FILES:
        g = ground(path.read_text())
        if len(g.decision_atoms) > 20:
            continue
        results = {mode: solve_ground(g, mode)[0] for mode in ("oracle", "enumerate", "backtrack")}
        checked += 1
        if not results["oracle"] == results["enumerate"] == results["backtrack"]:
            mismatches.append(path.stem)
    elapsed = time.perf_counter() - start
    assert checked >= 12
    _report("oracle equivalence", not mismatches and elapsed < 10.0,
            f"{checked} programs, mismatches={mismatches}, {elapsed:.2f}s (limit 10s)")


def _plain_datalog(program):
    return all(r.kind is not RuleKind.GUESS and all(l.positive for l in r.body)
               for r in program.rules)


@pytest.mark.criterion("CWA collapse")
def test_cwa_collapse():
    cases = []
    for path in CORPUS_FILES:
        prog = parse_program(path.read_text())
        if not _plain_datalog(prog):
            continue
        g = ground_program(prog)
        expected = reference.model_of(prog)  # naive source-level iteration
        for mode in ("oracle", "enumerate", "backtrack"):
            models = list(solve_ground(g, mode)[0])
            cases.append(len(models) == 1 and reference.as_tuples(models[0]) == expected)
            cases.append(models[0] == naive_least_model(g, ()))
    assert cases, "the corpus needs at least one plain Datalog program"
    _report("CWA collapse", all(cases), f"{len(cases) // 6} programs x 3 modes")


@pytest.mark.criterion("semi-naive equals naive on 200 random programs")
def test_semi_naive_differential():
    rng = random.Random(20261016)
    start = time.perf_counter()
    bad = 0
    for i in range(200):
        prog = reference.random_program(rng, n_consts=4, n_rules=8, guesses=False)
        g = ground_program(prog)
        semi = least_model(g, ())
        if semi != naive_least_model(g, ()) or reference.as_tuples(semi) != reference.model_of(prog):
            bad += 1
    elapsed = time.perf_counter() - start
    _report("semi-naive differential", bad == 0 and elapsed < 30.0,
            f"200 programs, {bad} differences, {elapsed:.2f}s (limit 30s)")


@pytest.mark.criterion("pruning soundness")
def test_pruning_soundness():
    eligible, problems = 0, []
    for path in CORPUS_FILES:
        g = ground(path.read_text())
        if not dominance_allowed(g):
            continue
        eligible += 1
        on = solve(g, SolveConfig(dominance_pruning=None))
        off = solve(g, SolveConfig(dominance_pruning=False))
        if not (on.models == off.models
                and on.stats.dominance_prunes >= 0
                and on.stats.leaves_evaluated <= off.stats.leaves_evaluated):
            problems.append(path.stem)
    assert eligible >= 5
    _report("pruning soundness", not problems, f"{eligible} eligible programs, failing={problems}")


def _triangle_oracle():
    """Minimal accepted subsets of the 9 chosen/2 atoms, by direct enumeration."""
    nodes, colors = "abc", ("r", "g", "bl")
    edges = [("a", "b"), ("b", "c"), ("a", "c")]
    atoms = [(n, c) for n in nodes for c in colors]
    accepted = []
    for bits in itertools.product((0, 1), repeat=len(atoms)):
        chosen = {a for a, b in zip(atoms, bits) if b}
        every_node = all(any((n, c) in chosen for c in colors) for n in nodes)
        proper = not any((x, c) in chosen and (y, c) in chosen for x, y in edges for c in colors)
        if every_node and proper:
            accepted.append(frozenset(chosen))
    minimal = [s for s in accepted if not any(o < s for o in accepted)]
    colorings = [p for p in itertools.product(colors, repeat=3)
                 if all(p[nodes.index(x)] != p[nodes.index(y)] for x, y in edges)]
    assert len(colorings) == len(minimal)
    return len(atoms), minimal


@pytest.mark.criterion("work bound on triangle 3-coloring")
def test_work_bound(triangle):
    n_atoms, minimal = _triangle_oracle()
    enum = solve(triangle, SolveConfig(mode="enumerate"))
    back = solve(triangle)
    as_sets = {frozenset((a.args[0], a.args[1]) for a in m if a.predicate == "chosen")
               for m in back.models}
    ok = (enum.stats.leaves_evaluated == 2 ** n_atoms == 512
          and back.stats.leaves_evaluated < 512
          and len(back.models) == len(minimal) == 6
          and as_sets == set(minimal))
    _report("work bound", ok,
            f"enumerate leaves={enum.stats.leaves_evaluated} (expect 512), "
            f"backtrack leaves={back.stats.leaves_evaluated}, models={len(back.models)} (expect 6)")


def _queens_oracle(n):
    return [p for p in itertools.permutations(range(1, n + 1))
            if all(abs(p[i] - p[j]) != j - i for i in range(n) for j in range(i + 1, n))]


@pytest.mark.criterion("4-queens has 2 models in every mode")
def test_queens():
    expected = {frozenset((str(r), str(c)) for r, c in enumerate(p, 1)) for p in _queens_oracle(4)}
    g = ground((CORPUS / "queens4.sky").read_text())
    counts, same = {}, True
    for mode in ("oracle", "enumerate", "backtrack"):
        models = solve_ground(g, mode)[0]
        counts[mode] = len(models)
        got = {frozenset(a.args for a in m if a.predicate == "q") for m in models}
        same = same and got == expected
    _report("4-queens", same and set(counts.values()) == {2} and len(expected) == 2, str(counts))


def _guess_programs(rng, count, max_atoms):
    while count:
        prog = reference.random_program(rng, guesses=True)
        g = ground_program(prog)
        if any(r.kind is RuleKind.GUESS for r in prog.rules) and len(g.decision_atoms) <= max_atoms:
            count -= 1
            yield prog, g


@pytest.mark.criterion("antichain property on 100 random guess programs")
def test_antichain():
    rng = random.Random(1016)
    start = time.perf_counter()
    failures = []
    for k, (prog, g) in enumerate(_guess_programs(rng, 100, 12)):
        pol = prog.policy
        models = [reference.as_tuples(m) for m in solve(g).models]

        def part(m, preds):
            return frozenset(a for a in m if a[0] in preds)

        antichain = not any(part(x, pol.fixed) == part(y, pol.fixed)
                            and part(x, pol.minimized) < part(y, pol.minimized)
                            for x in models for y in models)
        guesses = {p for r in prog.rules if r.kind is RuleKind.GUESS for p in [r.head.predicate]}
        rechecked = all(reference.model_of(prog, part(m, guesses)) == m
                        and not reference.violated(prog, m) for m in models)
        if not (antichain and rechecked):
            failures.append(k)
    elapsed = time.perf_counter() - start
    _report("antichain", not failures and elapsed < 60.0,
            f"100 programs, failing={failures}, {elapsed:.2f}s (limit 60s)")


def _run_stats(path):
    proc = subprocess.run([sys.executable, "-m", "sky", "run", str(path), "--stats"],
                          capture_output=True, text=True, check=True)
    record = json.loads(proc.stderr.strip().splitlines()[-1])
    assert isinstance(record.pop("wall_time"), float)
    return proc.stdout, record


@pytest.mark.criterion("determinism of sky run --stats")
def test_determinism():
    differing = []
    for path in CORPUS_FILES:
        if _run_stats(path) != _run_stats(path):
            differing.append(path.stem)
    _report("determinism", not differing,
            f"{len(CORPUS_FILES)} corpus files run twice, differing={differing}")
