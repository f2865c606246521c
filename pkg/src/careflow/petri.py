"""Labeled Petri nets with silent transitions and token-game semantics.

Nets and markings are immutable; ``fire`` returns a fresh marking. Arc
multiplicities are fixed at 1 (ordinary arcs only). Construction accepts
structurally broken nets on purpose so ``validate`` can report what is wrong.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

from .errors import NotEnabledError, PetriNetError, PnmlFormatError


class Marking:
    """Immutable multiset of tokens over place ids (zero counts dropped)."""

    __slots__ = ("_counts",)

    def __init__(self, counts: dict[str, int] | None = None):
        cleaned: dict[str, int] = {}
        for place, count in (counts or {}).items():
            if count < 0:
                raise ValueError(f"negative token count for place {place!r}")
            if count > 0:
                cleaned[place] = count
        self._counts = cleaned

    def get(self, place: str) -> int:
        return self._counts.get(place, 0)

    def items(self):
        return self._counts.items()

    def places(self) -> frozenset[str]:
        return frozenset(self._counts)

    def total(self) -> int:
        return sum(self._counts.values())

    def as_dict(self) -> dict[str, int]:
        return dict(self._counts)

    def key(self) -> tuple[tuple[str, int], ...]:
        """Canonical hashable form, used by searches over marking space."""
        return tuple(sorted(self._counts.items()))

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Marking) and self._counts == other._counts

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        inner = ", ".join(f"{p}:{n}" for p, n in sorted(self._counts.items()))
        return "{" + inner + "}"


@dataclass(frozen=True)
class Transition:
    """A transition; label None means silent (routes tokens, emits no event)."""

    id: str
    label: str | None = None

    @property
    def silent(self) -> bool:
        return self.label is None


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    severity: str = "error"  # or "warning"


@dataclass(frozen=True)
class PetriNet:
    places: tuple[str, ...]
    transitions: tuple[Transition, ...]
    arcs: tuple[tuple[str, str], ...]
    initial_marking: Marking = field(default_factory=Marking)
    final_marking: Marking = field(default_factory=Marking)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "places", tuple(self.places))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        by_id = {t.id: t for t in self.transitions}
        if len(by_id) != len(self.transitions):
            raise PetriNetError("duplicate transition ids")
        if set(self.places) & set(by_id):
            raise PetriNetError("place and transition ids must be disjoint")
        inputs: dict[str, tuple[str, ...]] = {t.id: () for t in self.transitions}
        outputs: dict[str, tuple[str, ...]] = {t.id: () for t in self.transitions}
        place_set = set(self.places)
        for source, target in self.arcs:
            if source in place_set and target in by_id:
                inputs[target] = inputs[target] + (source,)
            elif source in by_id and target in place_set:
                outputs[source] = outputs[source] + (target,)
            # anything else is left for validate() to report
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_inputs", inputs)
        object.__setattr__(self, "_outputs", outputs)

    def transition(self, tid: str) -> Transition:
        try:
            return self._by_id[tid]
        except KeyError:
            raise PetriNetError(f"unknown transition {tid!r}")

    def has_transition(self, tid: str) -> bool:
        return tid in self._by_id

    def inputs(self, tid: str) -> tuple[str, ...]:
        """Input places of a transition (preset)."""
        return self._inputs[tid]

    def outputs(self, tid: str) -> tuple[str, ...]:
        """Output places of a transition (postset)."""
        return self._outputs[tid]

    def silent_transitions(self) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.silent)

    def labeled(self, label: str) -> tuple[Transition, ...]:
        """Transitions carrying the given activity label, in id order."""
        return tuple(sorted((t for t in self.transitions if t.label == label), key=lambda t: t.id))

    def labels(self) -> frozenset[str]:
        return frozenset(t.label for t in self.transitions if t.label is not None)


def _check_marking(net: PetriNet, marking: Marking):
    unknown = marking.places() - set(net.places)
    if unknown:
        raise PetriNetError(f"marking references unknown places: {sorted(unknown)}")


def enabled(net: PetriNet, marking: Marking) -> set[str]:
    """Ids of transitions whose every input place holds at least one token."""
    _check_marking(net, marking)
    return {t.id for t in net.transitions
            if all(marking.get(p) >= 1 for p in net.inputs(t.id))}


def missing_inputs(net: PetriNet, marking: Marking, tid: str) -> frozenset[str]:
    """Input places of ``tid`` that currently hold no token."""
    return frozenset(p for p in net.inputs(tid) if marking.get(p) < 1)


def fire(net: PetriNet, marking: Marking, tid: str) -> Marking:
    """Fire a transition, returning the successor marking.

    Raises NotEnabledError (carrying the missing input places) when the
    transition is not enabled; the input marking is never modified.
    """
    _check_marking(net, marking)
    net.transition(tid)
    missing = missing_inputs(net, marking, tid)
    if missing:
        raise NotEnabledError(tid, missing)
    counts = marking.as_dict()
    for place in net.inputs(tid):
        counts[place] -= 1
    for place in net.outputs(tid):
        counts[place] = counts.get(place, 0) + 1
    return Marking(counts)


def validate(net: PetriNet) -> list[Violation]:
    """Structural checks: dangling or non-bipartite arcs, bad markings,
    duplicate labels (warning only)."""
    violations: list[Violation] = []
    place_set = set(net.places)
    trans_ids = {t.id for t in net.transitions}
    seen_arcs = set()
    for arc in net.arcs:
        source, target = arc
        if arc in seen_arcs:
            violations.append(Violation("duplicate-arc", f"arc {source}->{target} appears twice"))
        seen_arcs.add(arc)
        src_place, src_trans = source in place_set, source in trans_ids
        dst_place, dst_trans = target in place_set, target in trans_ids
        if not (src_place or src_trans) or not (dst_place or dst_trans):
            violations.append(Violation("dangling-arc", f"arc {source}->{target} references unknown node"))
        elif (src_place and dst_place) or (src_trans and dst_trans):
            violations.append(Violation("non-bipartite-arc", f"arc {source}->{target} connects same-kind nodes"))
    for kind, marking in (("initial", net.initial_marking), ("final", net.final_marking)):
        stray = marking.places() - place_set
        if stray:
            violations.append(Violation("bad-marking", f"{kind} marking uses unknown places: {sorted(stray)}"))
        if not marking:
            violations.append(Violation("empty-marking", f"{kind} marking is empty", severity="warning"))
    labels = [t.label for t in net.transitions if t.label is not None]
    for label in sorted({l for l in labels if labels.count(l) > 1}):
        violations.append(Violation("duplicate-label", f"label {label!r} used by several transitions",
                                    severity="warning"))
    return violations


def reachable_markings(net: PetriNet, limit: int = 100_000) -> set[tuple[tuple[str, int], ...]]:
    """Exhaustive token-game state space from the initial marking (BFS)."""
    start = net.initial_marking
    seen = {start.key()}
    frontier = [start]
    while frontier:
        nxt = []
        for marking in frontier:
            for tid in sorted(enabled(net, marking)):
                succ = fire(net, marking, tid)
                if succ.key() not in seen:
                    if len(seen) >= limit:
                        raise PetriNetError(f"state space exceeds {limit} markings")
                    seen.add(succ.key())
                    nxt.append(succ)
        frontier = nxt
    return seen


# --- PNML-style serialization -------------------------------------------------

def write_pnml(net: PetriNet) -> str:
    """Serialize the net as PNML with a <finalmarkings> section."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<pnml>',
             f'  <net id={quoteattr(net.name or "net1")} type="http://www.pnml.org/version-2009/grammar/ptnet">',
             '    <page id="page1">']
    for place in net.places:
        lines.append(f'      <place id={quoteattr(place)}>')
        tokens = net.initial_marking.get(place)
        if tokens:
            lines.append(f'        <initialMarking><text>{tokens}</text></initialMarking>')
        lines.append('      </place>')
    for trans in net.transitions:
        lines.append(f'      <transition id={quoteattr(trans.id)}>')
        if trans.label is not None:
            lines.append(f'        <name><text>{_pnml_text(trans.label)}</text></name>')
        lines.append('      </transition>')
    for index, (source, target) in enumerate(net.arcs, start=1):
        lines.append(f'      <arc id="a{index}" source={quoteattr(source)} target={quoteattr(target)}/>')
    lines.append('    </page>')
    lines.append('    <finalmarkings>')
    lines.append('      <marking>')
    for place, count in sorted(net.final_marking.items()):
        lines.append(f'        <place idref={quoteattr(place)}><text>{count}</text></place>')
    lines.append('      </marking>')
    lines.append('    </finalmarkings>')
    lines.append('  </net>')
    lines.append('</pnml>')
    lines.append('')
    return "\n".join(lines)


def _pnml_text(value: str) -> str:
    return value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_pnml(text: str) -> PetriNet:
    """Parse a PNML document written by write_pnml (or a compatible subset)."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise PnmlFormatError(f"malformed PNML: {exc}")
    if _local(root.tag) != "pnml":
        raise PnmlFormatError("expected <pnml> root element")
    net_xml = next((c for c in root.iter() if _local(c.tag) == "net"), None)
    if net_xml is None:
        raise PnmlFormatError("no <net> element found")

    places: list[str] = []
    transitions: list[Transition] = []
    arcs: list[tuple[str, str]] = []
    initial: dict[str, int] = {}
    final: dict[str, int] = {}
    for elem in net_xml.iter():
        tag = _local(elem.tag)
        if tag == "place":
            pid = elem.get("id")
            if pid is None:
                if elem.get("idref") is not None:
                    continue  # final-marking reference, handled under <marking>
                raise PnmlFormatError("<place> without id")
            places.append(pid)
            for child in elem.iter():
                if _local(child.tag) == "initialMarking":
                    text_elem = next((c for c in child.iter() if _local(c.tag) == "text"), None)
                    if text_elem is not None and text_elem.text:
                        initial[pid] = int(text_elem.text)
        elif tag == "transition":
            tid = elem.get("id")
            if tid is None:
                raise PnmlFormatError("<transition> without id")
            label = None
            name_elem = next((c for c in elem.iter() if _local(c.tag) == "name"), None)
            if name_elem is not None:
                text_elem = next((c for c in name_elem.iter() if _local(c.tag) == "text"), None)
                if text_elem is not None and text_elem.text:
                    label = text_elem.text
            transitions.append(Transition(tid, label))
        elif tag == "arc":
            source, target = elem.get("source"), elem.get("target")
            if source is None or target is None:
                raise PnmlFormatError("<arc> without source/target")
            arcs.append((source, target))
        elif tag == "marking":
            for ref in elem.iter():
                if _local(ref.tag) == "place":
                    pid = ref.get("idref")
                    text_elem = next((c for c in ref.iter() if _local(c.tag) == "text"), None)
                    if pid and text_elem is not None and text_elem.text:
                        final[pid] = int(text_elem.text)
    return PetriNet(tuple(places), tuple(transitions), tuple(arcs),
                    Marking(initial), Marking(final), name=net_xml.get("id") or "")


def net_to_dot(net: PetriNet) -> str:
    """Deterministic DOT rendering: circles for places, boxes for transitions,
    filled boxes for silent transitions."""
    lines = ["digraph petri_net {", "  rankdir=LR;"]
    for place in sorted(net.places):
        tokens = net.initial_marking.get(place)
        shade = net.final_marking.get(place)
        label = place + (f" ({tokens})" if tokens else "")
        style = ' style=filled fillcolor="gray85"' if shade else ""
        lines.append(f'  "{place}" [shape=circle label="{label}"{style}];')
    for trans in sorted(net.transitions, key=lambda t: t.id):
        if trans.silent:
            lines.append(f'  "{trans.id}" [shape=box style=filled fillcolor=black label=""];')
        else:
            lines.append(f'  "{trans.id}" [shape=box label="{trans.label}"];')
    for source, target in sorted(net.arcs):
        lines.append(f'  "{source}" -> "{target}";')
    lines.append("}")
    lines.append("")
    return "\n".join(lines)
