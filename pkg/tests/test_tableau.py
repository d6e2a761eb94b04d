import random

import pytest

from alcnr import (
    Distinct, Guards, Ind, Member, Name, Not, RoleLink, Some, Trace, Var,
    applicable_rule_instances, apply_rule_instance, complete, detect_clash,
    first_rule_instance, is_complete, parse_kb, role, translate_kb,
)
from alcnr.tableau import (
    BRANCHING_RULES, GENERATING_RULES, RULE_ATLEAST, RULE_ATMOST, RULE_EXISTS,
    RULE_FORALL, RULE_OR,
)
from _generators import random_kbs
from _system_oracle import system_satisfiable_bounded


class TestApplicableInstances:
    def test_translated_cyclic_kb_starts_on_an_individual(self, s_sigma):
        instances = applicable_rule_instances(s_sigma)
        assert instances
        assert isinstance(instances[0].target, Ind)

    def test_completion_has_no_applicable_instance(self, s10):
        assert applicable_rule_instances(s10) == []
        assert is_complete(s10)

    def test_pre_completion_step_is_a_disjunction_on_the_last_variable(self, s9):
        inst = first_rule_instance(s9)
        assert inst.rule == RULE_OR
        assert inst.target == Var(1)

    def test_individual_instances_precede_variable_instances(self, s9):
        targets = [inst.target for inst in applicable_rule_instances(s9)]
        seen_var = False
        for t in targets:
            if isinstance(t, Var):
                seen_var = True
            else:
                assert not seen_var

    def test_nongenerating_precede_generating_per_object(self, kb21):
        system = translate_kb(kb21)
        order = {}
        for pos, inst in enumerate(applicable_rule_instances(system)):
            order.setdefault(inst.target, []).append(inst.rule)
        for rules in order.values():
            generating_seen = False
            for r in rules:
                if r in GENERATING_RULES:
                    generating_seen = True
                else:
                    assert not generating_seen

    def test_generating_rules_suppressed_on_blocked_variables(self, s10):
        # _v1 still carries an unexpanded existential, but it is blocked
        assert s10.has_member(Var(1), Some(role("FRIEND"), Name("Italian")))
        assert all(
            inst.target != Var(1) for inst in applicable_rule_instances(s10)
        )


class TestApplyRule:
    def test_forall_pushes_onto_the_successor(self, s_sigma):
        inst = first_rule_instance(s_sigma)
        assert inst.rule == RULE_FORALL and inst.target == Ind("peter")
        after = apply_rule_instance(s_sigma, inst)
        assert after.constraints - s_sigma.constraints == frozenset({
            Member(Ind("susan"), Not(Name("Italian")))
        })

    def test_exists_creates_one_fresh_variable(self, s_sigma):
        # drive to the point where susan's existential fires
        system, result = s_sigma, None
        for _ in range(10):
            inst = first_rule_instance(system)
            if inst.rule == RULE_EXISTS:
                result = apply_rule_instance(system, inst)
                break
            choice = 0 if inst.rule in BRANCHING_RULES else None
            system = apply_rule_instance(system, inst, choice)
        assert result is not None
        x = Var(0)
        assert result.constraints - system.constraints == frozenset({
            RoleLink(Ind("susan"), "FRIEND", x), Member(x, Name("Italian"))
        })
        assert result.next_var_index == 1

    def test_atleast_adds_pairwise_separated_variables(self):
        kb = parse_kb("(instance s (atleast 2 R))")
        system = translate_kb(kb)
        inst = first_rule_instance(system)
        assert inst.rule == RULE_ATLEAST
        after = apply_rule_instance(system, inst)
        y1, y2 = Var(0), Var(1)
        assert after.constraints - system.constraints == frozenset({
            RoleLink(Ind("s"), "R", y1), RoleLink(Ind("s"), "R", y2),
            Distinct(y1, y2),
        })

    def test_atmost_substitutes_the_chosen_pair(self):
        kb = parse_kb("(instance s (atmost 1 R)) (related s t R)")
        system = translate_kb(kb)
        y = Var(0)
        system = system.extended(
            [RoleLink(Ind("s"), "R", y), Member(y, Name("A"))], next_var_index=1
        )
        inst = first_rule_instance(system)
        assert inst.rule == RULE_ATMOST
        assert inst.choices == ((y, Ind("t")),)
        after = apply_rule_instance(system, inst, 0)
        assert Member(Ind("t"), Name("A")) in after.constraints
        assert y not in after.objects()

    def test_inapplicable_instance_rejected(self):
        inst = first_rule_instance(_or_system())
        other = translate_kb(parse_kb("(instance b B)"))
        with pytest.raises(ValueError, match="not applicable"):
            apply_rule_instance(other, inst, 0)

    def test_or_requires_a_valid_choice(self):
        system = _or_system()
        inst = first_rule_instance(system)
        assert inst.rule == RULE_OR
        with pytest.raises(ValueError, match="choice"):
            apply_rule_instance(system, inst, None)
        with pytest.raises(ValueError, match="choice"):
            apply_rule_instance(system, inst, 5)
        left = apply_rule_instance(system, inst, 0)
        assert Member(Ind("a"), Name("A")) in left.constraints


def _or_system():
    return translate_kb(parse_kb("(instance a (or A B))"))


class TestDetectClash:
    def test_bottom_membership(self):
        system = translate_kb(parse_kb("(instance a BOTTOM)"))
        clash = detect_clash(system)
        assert clash.kind == "bottom" and clash.obj == Ind("a")

    def test_complement_pair(self):
        system = translate_kb(parse_kb("(instance a (and A (not A)))"))
        system = apply_rule_instance(system, first_rule_instance(system))
        clash = detect_clash(system)
        assert clash.kind == "complement" and clash.detail == "A"

    def test_separated_successors_violate_atmost(self):
        system = translate_kb(parse_kb(
            "(instance a (atmost 1 R)) (related a b R) (related a c R)"
        ))
        clash = detect_clash(system)
        assert clash.kind == "number" and clash.obj == Ind("a")

    def test_clash_free_translation(self, s_sigma, s10):
        assert detect_clash(s_sigma) is None
        assert detect_clash(s10) is None

    def test_unseparated_excess_successors_are_not_a_clash(self):
        # the merge rule, not the clash, handles identifiable successors
        system = translate_kb(parse_kb("(instance a (atmost 1 R))"))
        y0, y1 = Var(0), Var(1)
        system = system.extended(
            [RoleLink(Ind("a"), "R", y0), RoleLink(Ind("a"), "R", y1)],
            next_var_index=2,
        )
        assert detect_clash(system) is None
        inst = first_rule_instance(system)
        assert inst.rule == RULE_ATMOST

    def test_any_successor_violates_atmost_zero(self):
        # n+1 = 1: a single successor is already a pairwise-separated set
        system = translate_kb(parse_kb("(instance a (atmost 0 R))"))
        system = system.extended([RoleLink(Ind("a"), "R", Var(0))], next_var_index=1)
        clash = detect_clash(system)
        assert clash is not None and clash.kind == "number"


class TestComplete:
    def test_cyclic_kb_completion_equals_the_hand_derivation(self, kb33, s10):
        result = complete(translate_kb(kb33), Guards(debug_checks=True))
        assert result.status == "sat"
        assert result.completion.constraints == s10.constraints
        assert result.completion.witness(Var(1)) == Var(0)

    def test_exactly_two_variables_and_one_blocking(self, kb33):
        result = complete(translate_kb(kb33), trace=Trace(limit=None))
        assert result.completion.next_var_index == 2
        blocked = [l for l in result.trace.lines() if "blocked" in l]
        assert len(blocked) == 1 and "_v1" in blocked[0] and "_v0" in blocked[0]

    def test_university_kb_is_satisfiable(self, kb21):
        assert complete(translate_kb(kb21), Guards(debug_checks=True)).status == "sat"

    def test_denying_the_entailed_membership_is_unsatisfiable(self, kb21):
        kb = parse_kb(
            "(instance john (not Student))\n"
            + "".join(line + "\n" for line in _kb_lines(kb21))
        )
        assert complete(translate_kb(kb), Guards(debug_checks=True)).status == "unsat"

    def test_una_number_clash(self):
        kb = parse_kb("(instance a (atmost 1 R)) (related a b R) (related a c R)")
        assert complete(translate_kb(kb)).status == "unsat"
        kb2 = parse_kb("(instance a (atmost 2 R)) (related a b R) (related a c R)")
        assert complete(translate_kb(kb2)).status == "sat"

    def test_guards_surface_as_resource_exceeded(self):
        kb = parse_kb(
            "(implies (atmost 2 (and R S)) (all (and R S) (not C)))\n"
            "(implies (or (all (and R S) (and (not C) TOP)) (atleast 2 S))"
            " (some R (all R (not B))))\n"
            "(instance b (or (not C) (some R (atmost 0 (and R S)))))\n"
            "(related b c R)"
        )
        result = complete(translate_kb(kb), Guards(max_branches=200))
        assert result.status == "resource-exceeded"
        assert result.guard == "max-branches"

    def test_atleast_over_a_role_conjunction(self):
        kb = parse_kb("(instance a (atleast 2 (and R S)))")
        result = complete(translate_kb(kb), Guards(debug_checks=True))
        assert result.status == "sat"
        completion = result.completion
        succ = completion.role_successors(Ind("a"), role("R", "S"))
        assert len(succ) == 2
        assert completion.separated(*succ)

    def test_conjunction_successors_count_against_single_role_bounds(self):
        kb = parse_kb("(instance a (and (atleast 2 (and R S)) (atmost 1 R)))")
        assert complete(translate_kb(kb), Guards(debug_checks=True)).status == "unsat"
        relaxed = parse_kb("(instance a (and (atleast 2 (and R S)) (atmost 2 R)))")
        assert complete(translate_kb(relaxed), Guards(debug_checks=True)).status == "sat"

    def test_atleast_zero_is_never_applicable(self):
        system = translate_kb(parse_kb("(instance a (atleast 0 R))"))
        assert first_rule_instance(system) is None
        assert complete(system).status == "sat"

    def test_deterministic_given_the_input(self, kb21):
        a = complete(translate_kb(kb21), trace=Trace(limit=None))
        b = complete(translate_kb(kb21), trace=Trace(limit=None))
        assert a.trace.lines() == b.trace.lines()
        assert a.completion.constraints == b.completion.constraints

    def test_trace_lines_follow_the_documented_grammar(self, kb33):
        result = complete(translate_kb(kb33), trace=Trace(limit=None))
        for line in result.trace.lines():
            assert line.startswith("step ")
            body = line.split(": ", 1)[1]
            head = body.split(" ", 1)[0]
            assert head in {
                "and", "or", "forall", "global", "atmost", "exists", "atleast",
                "blocked", "clash:", "guard:",
            }


def _kb_lines(kb):
    from alcnr import render_kb
    return render_kb(kb).splitlines()


class TestSearchInvariants:
    """Structural properties asserted across a randomized mini-suite."""

    def test_random_suite_runs_clean_with_debug_checks(self):
        guards = Guards(debug_checks=True)
        for kb in random_kbs(seed=777, count=120):
            result = complete(translate_kb(kb), guards)
            assert result.status in ("sat", "unsat")
            if result.status == "sat":
                self._check_completion(result.completion)

    @staticmethod
    def _check_completion(completion):
        metrics = completion.metrics()
        assert metrics.unblocked_count <= 2 ** metrics.concept_count
        reachable = set(completion.individuals())
        frontier = list(reachable)
        while frontier:
            o = frontier.pop()
            for link in completion.links_from(o):
                if link.target not in reachable:
                    reachable.add(link.target)
                    frontier.append(link.target)
        for v in completion.variables():
            assert v in reachable, "variable unreachable from every individual"
            if completion.is_blocked(v):
                assert not completion.has_successors(v)

    def test_monotonicity_of_rule_applications(self):
        rng = random.Random(31)
        for kb in random_kbs(seed=909, count=40):
            system = translate_kb(kb)
            for _ in range(12):
                inst = first_rule_instance(system)
                if inst is None or detect_clash(system):
                    break
                choice = rng.randrange(len(inst.choices)) \
                    if inst.rule in BRANCHING_RULES else None
                after = apply_rule_instance(system, inst, choice)
                if inst.rule == RULE_ATMOST:
                    assert len(after.objects()) < len(system.objects())
                else:
                    assert after.constraints > system.constraints
                system = after


class TestRuleInvariance:
    """One rule application preserves (for deterministic rules) or refines
    (for nondeterministic ones) bounded satisfiability of the system."""

    def test_deterministic_rules_preserve_satisfiability(self):
        checked = 0
        for kb in random_kbs(seed=555, count=40):
            system = translate_kb(kb)
            if len(system.objects()) > 3:
                continue
            inst = first_rule_instance(system)
            if inst is None or inst.rule in BRANCHING_RULES:
                continue
            before = system_satisfiable_bounded(system, 3)
            after = system_satisfiable_bounded(apply_rule_instance(system, inst), 3)
            if before is None or after is None:
                continue
            assert before == after
            checked += 1
        assert checked >= 5

    def test_nondeterministic_rules_offer_a_satisfiable_choice(self):
        checked = 0
        for kb in random_kbs(seed=556, count=60):
            system = translate_kb(kb)
            if len(system.objects()) > 3:
                continue
            inst = first_rule_instance(system)
            while inst is not None and inst.rule not in BRANCHING_RULES:
                if detect_clash(system):
                    break
                system = apply_rule_instance(system, inst)
                if len(system.objects()) > 3:
                    break
                inst = first_rule_instance(system)
            if inst is None or inst.rule not in BRANCHING_RULES \
                    or len(system.objects()) > 3:
                continue
            before = system_satisfiable_bounded(system, 3)
            if not before:
                continue
            outcomes = [
                system_satisfiable_bounded(apply_rule_instance(system, inst, i), 3)
                for i in range(len(inst.choices))
            ]
            assert any(outcomes), "no branch preserved satisfiability"
            checked += 1
        assert checked >= 3
