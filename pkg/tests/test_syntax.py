import pytest

from sky.parser import parse_program, parse_rules
from sky.syntax import (
    Atom,
    Literal,
    Rule,
    RuleKind,
    StratificationError,
    Term,
    ValidityError,
    build_dependency_graph,
    make_program,
    stratify,
    validate_safety,
)


def rule(text):
    return parse_rules(text)[0]


def test_term_shapes():
    assert Term.const("a").kind == "constant"
    assert Term.const("007").name == "7"
    assert Term.var("X").is_variable
    with pytest.raises(ValueError):
        Term("variable", "x")
    with pytest.raises(ValueError):
        Term("constant", "")


def test_rule_invariants():
    p = Atom("p", (Term.var("X"),))
    with pytest.raises(ValueError):
        Rule(p, (), RuleKind.FACT)
    with pytest.raises(ValueError):
        Rule(None, (), RuleKind.CONSTRAINT)
    with pytest.raises(ValueError):
        Rule(None, (Literal(p),), RuleKind.GUESS)


class TestSafety:
    def test_safe(self):
        assert validate_safety(rule("p(X) :- q(X).")) == []

    def test_unbound_head(self):
        (v,) = validate_safety(rule("p(X) :- q(Y)."))
        assert v.variable == "X" and "head" in v.message

    def test_negation_only(self):
        (v,) = validate_safety(rule("p(X) :- q(X), not r(Z)."))
        assert v.variable == "Z" and "negation" in v.message

    def test_reports_each_variable(self):
        found = validate_safety(rule("p(X, W) :- q(Y), not r(Z)."), index=4)
        assert [v.variable for v in found] == ["X", "W", "Z"]
        assert all(v.rule_index == 4 for v in found)


class TestDependencyGraph:
    def edges(self, text):
        g = build_dependency_graph(parse_program(text))
        return {(e.source, e.target, e.negative) for e in g.edges}

    def test_positive(self):
        assert self.edges("p :- q.") == {("q", "p", False)}

    def test_negative(self):
        assert self.edges("p :- not q.") == {("q", "p", True)}

    def test_recursive(self):
        edges = self.edges("path(X,Z) :- edge(X,Y), path(Y,Z).")
        assert edges == {("edge", "path", False), ("path", "path", False)}

    def test_deterministic(self):
        text = "a :- b, not c. b :- d. c :- d."
        assert build_dependency_graph(parse_program(text)) == build_dependency_graph(parse_program(text))


class TestStratify:
    def test_two_strata(self):
        assert stratify(parse_program("p :- not q. q.")) == (frozenset({"q"}), frozenset({"p"}))

    def test_even_loop(self):
        rules = [rule("p :- not q."), rule("q :- not p.")]
        with pytest.raises(StratificationError) as info:
            stratify(build_dependency_graph(rules))
        assert info.value.cycle == ("p", "q", "p")

    def test_transitive_closure_single_stratum(self):
        text = "edge(a,b). path(X,Y) :- edge(X,Y). path(X,Z) :- edge(X,Y), path(Y,Z)."
        assert stratify(parse_program(text)) == (frozenset({"edge", "path"}),)

    def test_negative_self_loop(self):
        with pytest.raises(StratificationError) as info:
            stratify(build_dependency_graph([rule("p :- q, not p.")]))
        assert info.value.cycle == ("p", "p")

    @pytest.mark.parametrize("text", [
        "p :- not q. q :- r. r :- not s. s.",
        "a :- b. b :- a. c :- not a. d :- c, not b.",
        "#guess g(X) :- n(X). n(a). h(X) :- n(X), not g(X). :- h(X), not g(X).",
    ])
    def test_strata_are_a_topological_witness(self, text):
        program = parse_program(text)
        strata = stratify(program)
        level = {p: i for i, s in enumerate(strata) for p in s}
        for e in build_dependency_graph(program).edges:
            if e.negative:
                assert level[e.source] < level[e.target]
            else:
                assert level[e.source] <= level[e.target]


class TestProgramValidation:
    def test_default_policy(self):
        prog = parse_program("edge(a,b). path(X,Y) :- edge(X,Y).")
        assert prog.policy.minimized == frozenset()
        assert prog.policy.fixed == {"edge"}
        assert prog.policy.varying == {"path"}

    def test_guess_default_minimized(self):
        prog = parse_program("#guess pick(X) :- item(X). :- pick(a), pick(b). item(a). item(b).")
        assert prog.policy.minimized == {"pick"}
        assert prog.policy.fixed == {"item"}

    def test_policy_partition_covers_predicates(self):
        prog = parse_program("#guess g(X) :- n(X). n(a). d(X) :- g(X). e :- d(a). #fix e.")
        pol = prog.policy
        assert pol.minimized | pol.fixed | pol.varying == prog.predicates
        assert not (pol.minimized & pol.fixed or pol.minimized & pol.varying or pol.fixed & pol.varying)
        assert pol.fixed == {"n", "e"}

    def test_all_violations_reported_together(self):
        text = "p(X) :- q(Y). r(a). r(a,b). s :- not t. t :- not s."
        with pytest.raises(ValidityError) as info:
            parse_program(text)
        kinds = sorted(v.kind for v in info.value.violations)
        assert kinds == ["arity", "safety", "stratification"]

    def test_guess_redefined(self):
        with pytest.raises(ValidityError) as info:
            parse_program("#guess g. g :- h. h.")
        assert [v.kind for v in info.value.violations] == ["guess"]

    def test_guess_range_depends_on_guess(self):
        text = "#guess g(X) :- n(X). d(X) :- g(X). #guess h(X) :- d(X). n(a)."
        with pytest.raises(ValidityError) as info:
            parse_program(text)
        assert [v.kind for v in info.value.violations] == ["guess"]

    @pytest.mark.parametrize("directives", [
        "#minimize g. #fix g.",
        "#minimize n.",
        "#minimize nothere.",
        "#fix nothere.",
    ])
    def test_policy_conflicts(self, directives):
        with pytest.raises(ValidityError) as info:
            parse_program("#guess g(X) :- n(X). n(a). " + directives)
        assert {v.kind for v in info.value.violations} == {"policy"}

    def test_make_program_direct(self):
        a = Atom("p", ())
        prog = make_program([Rule(a, (), RuleKind.FACT)])
        assert prog.policy.fixed == {"p"}

    def test_fix_on_guess_leaves_default_minimized(self):
        prog = parse_program("#guess g. #guess f. #fix f.")
        assert prog.policy.minimized == {"g"} and prog.policy.fixed == {"f"}
