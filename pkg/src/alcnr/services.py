"""The four reasoning services, each reduced to KB-satisfiability.

Concept satisfiability, subsumption, and instance checking augment the ABox
and ask whether the result has a model:

    C satisfiable w.r.t. KB      iff  KB + C(b) is satisfiable
    C subsumed by D w.r.t. KB    iff  KB + (C and not D)(b) is unsatisfiable
    a instance of C w.r.t. KB    iff  KB + (not C)(a) is unsatisfiable

where b is the reserved fresh individual (the parser rejects it in user
input).  Resource-guard exhaustion surfaces as UNKNOWN rather than a guess.
"""

from __future__ import annotations

from dataclasses import dataclass

from .canonical import extract_model, satisfies_system
from .constraints import translate_kb
from .semantics import Assignment, Interpretation, is_model
from .syntax import (
    And, Concept, ConceptAssertion, FRESH_INDIVIDUAL, KnowledgeBase, Not,
)
from .tableau import MUTED_TRACE, CompletionResult, Guards, Trace, complete


class UnknownIndividualError(ValueError):
    pass


class SelfCheckError(AssertionError):
    """A SAT verdict's extracted model failed verification."""


@dataclass
class Verdict:
    status: str                                # "sat" | "unsat" | "unknown"
    interpretation: Interpretation | None = None
    assignment: Assignment | None = None
    trace: Trace | None = None
    guard: str | None = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


@dataclass
class TruthVerdict:
    value: bool | None          # None: resource guards fired (UNKNOWN)
    guard: str | None = None


def _verdict(kb: KnowledgeBase, result: CompletionResult, self_check: bool) -> Verdict:
    if result.status == "resource-exceeded":
        return Verdict("unknown", trace=result.trace, guard=result.guard)
    if result.status == "unsat":
        return Verdict("unsat", trace=result.trace)
    interp, assignment = extract_model(result.completion)
    if self_check:
        if not satisfies_system(result.completion, interp, assignment):
            raise SelfCheckError("canonical model does not satisfy its completion")
        if not is_model(interp, kb):
            raise SelfCheckError("canonical model does not satisfy the source KB")
    return Verdict("sat", interp, assignment, result.trace)


def kb_satisfiable(
    kb: KnowledgeBase,
    guards: Guards | None = None,
    trace: Trace | None = None,
    self_check: bool = False,
) -> Verdict:
    """Pass a Trace to capture the derivation; by default none is recorded."""
    result = complete(translate_kb(kb), guards, trace if trace is not None else MUTED_TRACE)
    return _verdict(kb, result, self_check)


def _with_assertion(kb: KnowledgeBase, assertion: ConceptAssertion) -> KnowledgeBase:
    return KnowledgeBase(kb.tbox, kb.abox | {assertion})


def augment_for_concept_sat(kb: KnowledgeBase, c: Concept) -> KnowledgeBase:
    if FRESH_INDIVIDUAL in kb.all_names():
        raise ValueError(f"{FRESH_INDIVIDUAL!r} is reserved and may not appear in a KB")
    return _with_assertion(kb, ConceptAssertion(FRESH_INDIVIDUAL, c))


def augment_for_subsumption(kb: KnowledgeBase, c: Concept, d: Concept) -> KnowledgeBase:
    return augment_for_concept_sat(kb, And(c, Not(d)))


def augment_for_instance(kb: KnowledgeBase, a: str, c: Concept) -> KnowledgeBase:
    if a not in kb.individuals():
        raise UnknownIndividualError(f"unknown individual {a!r}")
    return _with_assertion(kb, ConceptAssertion(a, Not(c)))


def concept_satisfiable(
    kb: KnowledgeBase, c: Concept,
    guards: Guards | None = None, trace: Trace | None = None,
    self_check: bool = False,
) -> Verdict:
    return kb_satisfiable(augment_for_concept_sat(kb, c), guards, trace, self_check)


def subsumed_by(
    kb: KnowledgeBase, c: Concept, d: Concept, guards: Guards | None = None
) -> TruthVerdict:
    """True iff C's extension is within D's in every model of kb."""
    v = kb_satisfiable(augment_for_subsumption(kb, c, d), guards)
    if v.status == "unknown":
        return TruthVerdict(None, v.guard)
    return TruthVerdict(v.status == "unsat")


def instance_of(
    kb: KnowledgeBase, a: str, c: Concept, guards: Guards | None = None
) -> TruthVerdict:
    """True iff the assertion C(a) holds in every model of kb."""
    v = kb_satisfiable(augment_for_instance(kb, a, c), guards)
    if v.status == "unknown":
        return TruthVerdict(None, v.guard)
    return TruthVerdict(v.status == "unsat")


def instances(
    kb: KnowledgeBase, c: Concept, guards: Guards | None = None
) -> frozenset[str]:
    """The individuals provably in c (parallel instance checks); individuals
    whose check hits a guard are omitted."""
    members = set()
    for a in sorted(kb.individuals()):
        if instance_of(kb, a, c, guards).value:
            members.add(a)
    return frozenset(members)
