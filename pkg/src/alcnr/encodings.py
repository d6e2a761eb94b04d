"""Source-to-source knowledge-base transformations.

- the TBox-as-a-concept construction: a conjunction whose extension is the
  whole domain exactly in the models of the TBox;
- the reduction of arbitrary inclusion statements to a single concept-name
  introduction (the converse direction of unfolding definitions into
  inclusions), preserving satisfiability both ways;
- domain/range restrictions and the subrole encoding via role conjunction.

The introduction reduction relies on disjunction and complement being in the
language, so it is offered for full ALCNR knowledge bases only.
"""

from __future__ import annotations

from .syntax import (
    All, And, Concept, ConceptAssertion, Inclusion, KnowledgeBase, Name, Not,
    Or, Role, Some, TOP, concept_key,
)


def _sorted_inclusions(tbox: frozenset[Inclusion]) -> list[Inclusion]:
    return sorted(tbox, key=lambda i: (concept_key(i.lhs), concept_key(i.rhs)))


def equivalent_concept_of_tbox(tbox: frozenset[Inclusion]) -> Concept:
    """The conjunction of (not C or D) over the TBox, in canonical statement
    order; an interpretation satisfies the TBox iff this concept's extension
    is the whole domain.  The empty TBox yields TOP."""
    parts = [Or(Not(inc.lhs), inc.rhs) for inc in _sorted_inclusions(tbox)]
    if not parts:
        return TOP
    acc = parts[0]
    for p in parts[1:]:
        acc = And(acc, p)
    return acc


def fresh_name(prefix: str, taken: frozenset[str]) -> str:
    i = 0
    while f"{prefix}{i}" in taken:
        i += 1
    return f"{prefix}{i}"


def inclusions_to_introduction(kb: KnowledgeBase) -> KnowledgeBase:
    """Replace the TBox with a single concept-name introduction.

    A fresh concept name is asserted of every individual and included in the
    conjunction of the TBox-equivalent concept with (all P <fresh>) for every
    role name P, which propagates the fresh name (and with it the TBox)
    along every link reachable from an individual.  Satisfiability is
    preserved in both directions.  A KB without individuals first gets an
    auxiliary individual asserted to TOP: with nothing to carry the fresh
    name, the transformed KB would be vacuously satisfiable regardless of
    the TBox.
    """
    taken = kb.all_names()
    abox = set(kb.abox)
    if not kb.individuals():
        abox.add(ConceptAssertion(fresh_name("__aux", taken), TOP))
        kb = KnowledgeBase(kb.tbox, frozenset(abox))
        taken = kb.all_names()
        abox = set(kb.abox)
    aux = Name(fresh_name("__aux", taken))
    rhs: Concept = equivalent_concept_of_tbox(kb.tbox)
    for p in sorted(kb.role_names()):
        rhs = And(rhs, All(Role((p,)), aux))
    for b in sorted(kb.individuals()):
        abox.add(ConceptAssertion(b, aux))
    return KnowledgeBase(frozenset({Inclusion(aux, rhs)}), frozenset(abox))


def domain_range_inclusions(
    r: Role, domain: Concept, range_: Concept
) -> tuple[Inclusion, Inclusion]:
    """Restrict r's domain and range: every r-pair then lies in
    domain x range."""
    return (
        Inclusion(Some(r, TOP), domain),
        Inclusion(TOP, All(r, range_)),
    )


def subrole(sub: str, super_: Role) -> Role:
    """Encode `sub` as a subrole of the conjunction super_: every pair of the
    returned role is a pair of super_."""
    if sub in super_.names:
        raise ValueError(f"role name {sub!r} already occurs in {super_.names}")
    return Role(super_.names + (sub,))
