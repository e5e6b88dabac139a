"""Parser, printer and validator behaviour, anchored to the fixture corpus."""

import re

import pytest

from domainforge.pddl_core import (
    ArityError,
    Domain,
    DomainMismatch,
    Literal,
    OperatorSchema,
    PddlSyntaxError,
    Plan,
    PlanStep,
    PredicateSchema,
    Problem,
    UndeclaredSymbol,
    UnsupportedFeature,
    parse_domain,
    parse_problem,
    print_domain,
    print_problem,
    validate_domain,
    validate_problem,
)

from conftest import FIXTURES, load_problem

DOMAIN_FILES = sorted((FIXTURES / "corpus" / "domains").glob("*.pddl"))
PROBLEM_FILES = sorted((FIXTURES / "corpus" / "problems").glob("*.pddl"))


def domain_of_problem(text, corpus_domains):
    name = re.search(r"\(:domain\s+([a-z0-9_\-]+)", text).group(1)
    return corpus_domains[name]


class TestParseDomain:
    def test_blocksworld_counts(self, blocksworld):
        assert len(blocksworld.operators) == 4
        assert len(blocksworld.predicates) == 5
        names = {o.name for o in blocksworld.operators}
        assert names == {"pickup", "putdown", "stack", "unstack"}

    def test_empty_operator_list_is_valid(self):
        dom = parse_domain("(define (domain bare) (:predicates (p ?x)))")
        assert len(dom.operators) == 0
        assert validate_domain(dom) == []

    def test_arity_error_in_precondition(self):
        src = """
        (define (domain broken)
          (:predicates (on ?x ?y) (q ?x))
          (:action a :parameters (?x)
            :precondition (on ?x)
            :effect (q ?x)))
        """
        with pytest.raises(ArityError) as err:
            parse_domain(src)
        assert err.value.symbol == "on"
        assert (err.value.expected, err.value.got) == (2, 1)

    def test_unsupported_requirement_rejected(self):
        src = "(define (domain f) (:requirements :strips :action-costs) (:predicates (p)))"
        with pytest.raises(UnsupportedFeature) as err:
            parse_domain(src)
        assert err.value.flag == ":action-costs"

    def test_unsupported_section_rejected(self):
        src = "(define (domain f) (:functions (total-cost)) (:predicates (p)))"
        with pytest.raises(UnsupportedFeature):
            parse_domain(src)

    def test_undeclared_predicate(self):
        src = """
        (define (domain f) (:predicates (p ?x))
          (:action a :parameters (?x) :precondition (q ?x) :effect (p ?x)))
        """
        with pytest.raises(UndeclaredSymbol) as err:
            parse_domain(src)
        assert err.value.name == "q"

    def test_syntax_error_carries_position(self):
        with pytest.raises(PddlSyntaxError) as err:
            parse_domain("(define (domain f)\n  (:predicates (p ?x))")
        assert err.value.line >= 1

    def test_case_insensitive_identifiers(self):
        dom = parse_domain(
            "(define (domain UPPER) (:predicates (Flag ?X))\n"
            "  (:action Act :parameters (?X) :precondition (FLAG ?x) :effect (not (flag ?X))))"
        )
        assert dom.name == "upper"
        assert {p.name for p in dom.predicates} == {"flag"}

    def test_untyped_parameters_default_to_object(self):
        dom = parse_domain("(define (domain u) (:predicates (p ?a ?b)))")
        schema = next(iter(dom.predicates))
        assert schema.params == (("?a", "object"), ("?b", "object"))


class TestParseProblem:
    def test_three_block_problem(self, blocksworld):
        prob = load_problem("bw_sussman", blocksworld)
        assert len(prob.objects) == 3

    def test_undeclared_object_in_goal(self, blocksworld):
        src = """
        (define (problem p) (:domain blocksworld)
          (:objects a) (:init (ontable a) (clear a) (handempty))
          (:goal (on a z)))
        """
        with pytest.raises(UndeclaredSymbol):
            parse_problem(src, blocksworld)

    def test_self_relation_accepted(self, blocksworld):
        src = """
        (define (problem p) (:domain blocksworld)
          (:objects a) (:init (on a a) (handempty))
          (:goal (clear a)))
        """
        prob = parse_problem(src, blocksworld)
        assert Literal("on", ("a", "a")) in prob.init

    def test_domain_mismatch(self, blocksworld):
        src = "(define (problem p) (:domain gripper) (:objects a) (:init) (:goal (clear a)))"
        with pytest.raises(DomainMismatch) as err:
            parse_problem(src, blocksworld)
        assert err.value.declared == "gripper"

    def test_negative_init_rejected(self, blocksworld):
        src = """
        (define (problem p) (:domain blocksworld)
          (:objects a) (:init (not (clear a))) (:goal (clear a)))
        """
        with pytest.raises(PddlSyntaxError):
            parse_problem(src, blocksworld)

    def test_badly_typed_object_caught(self, kitchen):
        src = """
        (define (problem p) (:domain kitchen_desk)
          (:objects corn - drawer)
          (:init (in_pot corn) (hand_empty))
          (:goal (in_bowl corn)))
        """
        with pytest.raises(UndeclaredSymbol):
            parse_problem(src, kitchen)


class TestPrinting:
    def test_negative_precondition_rendering(self):
        dom = Domain(
            "neg",
            (),
            frozenset({PredicateSchema("p", (("?x", "object"),)),
                       PredicateSchema("q", (("?x", "object"),))}),
            frozenset(
                {
                    OperatorSchema(
                        "a",
                        (("?x", "object"),),
                        frozenset({Literal("p", ("?x",), False)}),
                        frozenset({Literal("q", ("?x",))}),
                    )
                }
            ),
        )
        text = print_domain(dom)
        assert "(not (p ?x))" in text.split(":precondition")[1].split(":effect")[0]
        assert parse_domain(text) == dom

    def test_declaration_order_irrelevant(self):
        a = """
        (define (domain d) (:predicates (p ?x) (q ?x))
          (:action one :parameters (?x) :precondition (p ?x) :effect (q ?x))
          (:action two :parameters (?x) :precondition (q ?x) :effect (p ?x)))
        """
        b = """
        (define (domain d) (:predicates (q ?x) (p ?x))
          (:action two :parameters (?x) :precondition (q ?x) :effect (p ?x))
          (:action one :parameters (?x) :precondition (p ?x) :effect (q ?x)))
        """
        assert print_domain(parse_domain(a)) == print_domain(parse_domain(b))

    def test_printing_is_pure(self, kitchen):
        assert print_domain(kitchen) == print_domain(kitchen)

    @pytest.mark.parametrize("path", DOMAIN_FILES, ids=lambda p: p.stem)
    def test_domain_roundtrip(self, path):
        dom = parse_domain(path.read_text())
        assert parse_domain(print_domain(dom)) == dom

    @pytest.mark.parametrize("path", PROBLEM_FILES, ids=lambda p: p.stem)
    def test_problem_roundtrip(self, path, corpus_domains):
        text = path.read_text()
        dom = domain_of_problem(text, corpus_domains)
        prob = parse_problem(text, dom)
        assert parse_problem(print_problem(prob), dom) == prob


class TestValidateDomain:
    def test_clean_blocksworld(self, blocksworld):
        assert validate_domain(blocksworld) == []

    def test_contradictory_effects(self):
        dom = Domain(
            "c",
            (),
            frozenset({PredicateSchema("clear", (("?x", "object"),))}),
            frozenset(
                {
                    OperatorSchema(
                        "flip",
                        (("?x", "object"),),
                        frozenset(),
                        frozenset(
                            {Literal("clear", ("?x",)), Literal("clear", ("?x",), False)}
                        ),
                    )
                }
            ),
        )
        errors = [d for d in validate_domain(dom) if "contradictory" in d.message]
        assert len(errors) == 1

    def test_empty_effects(self):
        dom = Domain(
            "e",
            (),
            frozenset({PredicateSchema("p", ())}),
            frozenset({OperatorSchema("noop", (), frozenset({Literal("p", ())}), frozenset())}),
        )
        assert any("no effects" in d.message for d in validate_domain(dom))

    # one mutation per invariant class: the validator must flag each
    def test_mutation_duplicate_predicate_names(self):
        dom = Domain(
            "m",
            (),
            frozenset({PredicateSchema("p", ()), PredicateSchema("p", (("?x", "object"),))}),
            frozenset(),
        )
        assert any("declared 2 times" in d.message for d in validate_domain(dom))

    def test_mutation_undeclared_type(self):
        dom = Domain("m", (), frozenset({PredicateSchema("p", (("?x", "ghost"),))}), frozenset())
        assert any("undeclared type" in d.message for d in validate_domain(dom))

    def test_mutation_type_cycle(self):
        dom = Domain("m", (("a", "b"), ("b", "a")), frozenset(), frozenset())
        assert any("cycle" in d.message for d in validate_domain(dom))

    def test_mutation_variable_not_in_params(self):
        dom = Domain(
            "m",
            (),
            frozenset({PredicateSchema("p", (("?x", "object"),))}),
            frozenset(
                {
                    OperatorSchema(
                        "a",
                        (("?x", "object"),),
                        frozenset(),
                        frozenset({Literal("p", ("?y",))}),
                    )
                }
            ),
        )
        assert any("not in parameters" in d.message for d in validate_domain(dom))

    def test_mutation_arity_mismatch(self):
        dom = Domain(
            "m",
            (),
            frozenset({PredicateSchema("p", (("?x", "object"),))}),
            frozenset({OperatorSchema("a", (("?x", "object"),), frozenset(),
                                      frozenset({Literal("p", ("?x", "?x"))}))}),
        )
        assert any("arity" in d.message for d in validate_domain(dom))

    def test_mutation_duplicate_params(self):
        dom = Domain(
            "m",
            (),
            frozenset({PredicateSchema("p", (("?x", "object"), ("?x", "object")))}),
            frozenset(),
        )
        assert any("duplicate parameter" in d.message for d in validate_domain(dom))

    @pytest.mark.parametrize("path", DOMAIN_FILES, ids=lambda p: p.stem)
    def test_corpus_validates_clean(self, path):
        assert validate_domain(parse_domain(path.read_text())) == []


class TestValidateProblem:
    def test_empty_goal_flagged(self, blocksworld):
        prob = Problem("p", "blocksworld", (("a", "object"),),
                       frozenset({Literal("clear", ("a",))}), frozenset())
        assert any("goal is empty" in d.message for d in validate_problem(prob, blocksworld))

    def test_type_violation_flagged(self, kitchen):
        prob = Problem(
            "p",
            "kitchen_desk",
            (("corn", "item"), ("pot", "furniture")),
            frozenset({Literal("in_pot", ("pot",))}),  # furniture, not item
            frozenset({Literal("in_bowl", ("corn",))}),
        )
        assert any("expected" in d.message for d in validate_problem(prob, kitchen))


class TestPlanText:
    def test_render_and_parse(self):
        plan = Plan((PlanStep("remove_lid", ("lid",)), PlanStep("wipe_table", ("towel",))))
        text = plan.render()
        assert text.splitlines()[0] == "(remove_lid lid)"
        assert Plan.parse(text) == plan

    def test_parse_skips_comments_and_blanks(self):
        plan = Plan.parse("; header\n\n(pickup a)\n(stack a b) ; why not\n")
        assert [s.name for s in plan] == ["pickup", "stack"]
