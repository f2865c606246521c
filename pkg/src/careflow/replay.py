"""Token-based replay conformance checking.

A trace is replayed on a net by firing the transition of each event in order.
Silent transitions may be interleaved anywhere; when a transition is not
enabled, the missing input tokens are created on the fly and counted. Among
all ways to schedule silent transitions the replayer picks the one that
minimizes, in order:

  1. missing tokens (m),
  2. remaining tokens (r),
  3. number of silent firings,
  4. the firing sequence itself, compared lexicographically by transition id.

That total order makes the result deterministic and matches an exhaustive
enumeration of silent interleavings on small nets. Silent runs between two
consecutive events (and after the last one) are capped at ``max_silent_run``
firings, which keeps the search finite on nets with token-generating loops;
the cap is far above anything the care-pathway model needs.

Counters follow the usual token-replay bookkeeping: producing the initial
marking counts into p, consuming the final marking counts into c, forced
tokens count into m, leftovers into r, and

    fitness = 1/2 (1 - m/c) + 1/2 (1 - r/p).

Events whose activity has no transition in the net cost one missing and one
remaining token each (and one produced and consumed, keeping m <= c, r <= p).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import ReplayConfigError
from .eventlog import EventLog, Trace
from .petri import Marking, PetriNet

_DONE = -1


@dataclass(frozen=True)
class FiringStep:
    """One replay step: a fired transition or an unmapped event."""

    index: int
    transition_id: str | None  # None for events with no matching transition
    activity: str | None       # None for silent firings
    forced_missing: frozenset[str] = frozenset()


@dataclass(frozen=True)
class TraceReplayResult:
    case_id: str
    produced: int
    consumed: int
    missing: int
    remaining: int
    fitness: float
    firing_log: tuple[FiringStep, ...]
    final_missing: frozenset[str] = frozenset()
    final_marking_ignored: bool = False


@dataclass(frozen=True)
class LogReplayResult:
    per_trace: tuple[TraceReplayResult, ...]
    produced: int
    consumed: int
    missing: int
    remaining: int
    log_fitness: float


def _fitness(produced: int, consumed: int, missing: int, remaining: int) -> float:
    miss_term = 1.0 - missing / consumed if consumed else 1.0
    rem_term = 1.0 - remaining / produced if produced else 1.0
    return 0.5 * miss_term + 0.5 * rem_term


def _resolve(net: PetriNet, label_map: dict[str, str] | None, activity: str,
             marking: dict[str, int]) -> str | None:
    """Transition id for an event, or None when the activity is unmapped.

    With duplicate labels the enabled candidate wins, lowest id first; this
    keeps replay deterministic on nets where labels are not unique.
    """
    if label_map is not None:
        tid = label_map.get(activity)
        if tid is None:
            return None
        if not net.has_transition(tid):
            raise ReplayConfigError(f"label_map points to unknown transition {tid!r}")
        if net.transition(tid).silent:
            raise ReplayConfigError(f"label_map maps {activity!r} to silent transition {tid!r}")
        return tid
    candidates = net.labeled(activity)
    if not candidates:
        return None
    if len(candidates) == 1:
        return candidates[0].id
    for trans in candidates:  # already sorted by id
        if all(marking.get(p, 0) >= 1 for p in net.inputs(trans.id)):
            return trans.id
    return candidates[0].id


def _force_fire(net: PetriNet, marking: dict[str, int], tid: str) -> tuple[dict[str, int], tuple[str, ...]]:
    """Fire ``tid`` creating any missing input tokens; returns (marking, missing)."""
    nxt = dict(marking)
    missing = []
    for place in net.inputs(tid):
        if nxt.get(place, 0) >= 1:
            nxt[place] -= 1
            if nxt[place] == 0:
                del nxt[place]
        else:
            missing.append(place)
    for place in net.outputs(tid):
        nxt[place] = nxt.get(place, 0) + 1
    return nxt, tuple(missing)


def _final_gap(final: Marking, marking: dict[str, int]) -> tuple[int, int, tuple[str, ...]]:
    """(deficit, remaining, missing place list) for consuming the final marking."""
    deficit = 0
    covered = 0
    missing = []
    for place, need in final.items():
        have = min(marking.get(place, 0), need)
        covered += have
        if have < need:
            deficit += need - have
            missing.append(place)
    remaining = sum(marking.values()) - covered
    return deficit, remaining, tuple(sorted(missing))


def replay_trace(net: PetriNet, trace: Trace, label_map: dict[str, str] | None = None,
                 ignore_final_marking: bool = False, max_silent_run: int = 8,
                 max_expansions: int = 500_000) -> TraceReplayResult:
    """Replay one trace and return its token counters and firing log.

    ``ignore_final_marking`` skips final-marking consumption and remaining
    token counting; use it for ongoing (censored) cases whose tail is simply
    not recorded yet.
    """
    if not net.initial_marking:
        raise ReplayConfigError("replay requires a non-empty initial marking")
    if not ignore_final_marking and not net.final_marking:
        raise ReplayConfigError("replay requires a non-empty final marking")

    silents = sorted(t.id for t in net.silent_transitions())

    def mappable(activity: str) -> bool:
        if label_map is not None:
            return activity in label_map
        return bool(net.labeled(activity))

    mapped_positions = [i for i, e in enumerate(trace.events) if mappable(e.activity)]
    acts = [trace.events[i].activity for i in mapped_positions]
    n = len(acts)

    start = net.initial_marking.as_dict()
    start_key = tuple(sorted(start.items()))
    zero = (0, 0, 0)
    heap: list[tuple[tuple[int, int, int], tuple[str, ...], int, tuple[tuple[str, int], ...], int]] = \
        [(zero, (), 0, start_key, 0)]
    settled: set[tuple[int, tuple[tuple[str, int], ...], int]] = set()
    winner: tuple[str, ...] | None = None
    expansions = 0

    while heap:
        cost, path, i, mk_key, gap = heapq.heappop(heap)
        state = (i, mk_key, gap)
        if state in settled:
            continue
        settled.add(state)
        if i == _DONE:
            winner = path
            break
        expansions += 1
        if expansions > max_expansions:
            raise RuntimeError("replay search exceeded its state budget; "
                               "raise max_expansions or simplify the net")
        marking = dict(mk_key)
        if i == n:
            if ignore_final_marking:
                terminal = zero
            else:
                deficit, remaining, _ = _final_gap(net.final_marking, marking)
                terminal = (deficit, remaining, 0)
            total = (cost[0] + terminal[0], cost[1] + terminal[1], cost[2] + terminal[2])
            heapq.heappush(heap, (total, path, _DONE, (), 0))
        else:
            tid = _resolve(net, label_map, acts[i], marking)
            assert tid is not None  # unmapped events were filtered out
            nxt, missing = _force_fire(net, marking, tid)
            total = (cost[0] + len(missing), cost[1], cost[2])
            heapq.heappush(heap, (total, path + (tid,), i + 1, tuple(sorted(nxt.items())), 0))
        if gap < max_silent_run:
            for sid in silents:
                nxt, missing = _force_fire(net, marking, sid)
                total = (cost[0] + len(missing), cost[1], cost[2] + 1)
                heapq.heappush(heap, (total, path + (sid,), i, tuple(sorted(nxt.items())), gap + 1))

    assert winner is not None  # the no-silents schedule always completes

    # Replay the winning schedule once more to build the firing log and counters.
    produced = net.initial_marking.total()
    consumed = 0
    missing_total = 0
    steps: list[FiringStep] = []
    marking = dict(start)
    mapped_iter = iter(mapped_positions)
    next_mapped = next(mapped_iter, None)
    unmapped_pos = [i for i in range(len(trace.events)) if i not in set(mapped_positions)]
    unmapped_iter = iter(unmapped_pos)
    next_unmapped = next(unmapped_iter, None)
    step_index = 0

    def flush_unmapped(before: int | None):
        nonlocal next_unmapped, step_index, produced, consumed, missing_total
        while next_unmapped is not None and (before is None or next_unmapped < before):
            activity = trace.events[next_unmapped].activity
            steps.append(FiringStep(step_index, None, activity))
            produced += 1
            consumed += 1
            missing_total += 1
            step_index += 1
            next_unmapped = next(unmapped_iter, None)

    for tid in winner:
        trans = net.transition(tid)
        if trans.silent:
            activity = None
        else:
            flush_unmapped(next_mapped)
            activity = trace.events[next_mapped].activity
            next_mapped = next(mapped_iter, None)
        marking, forced = _force_fire(net, marking, tid)
        missing_total += len(forced)
        consumed += len(net.inputs(tid))
        produced += len(net.outputs(tid))
        steps.append(FiringStep(step_index, tid, activity, frozenset(forced)))
        step_index += 1
    flush_unmapped(None)

    remaining_total = len(unmapped_pos)
    final_missing: frozenset[str] = frozenset()
    if ignore_final_marking:
        pass
    else:
        deficit, remaining, missing_places = _final_gap(net.final_marking, marking)
        consumed += net.final_marking.total()
        missing_total += deficit
        remaining_total += remaining
        final_missing = frozenset(missing_places)

    return TraceReplayResult(
        case_id=trace.case_id,
        produced=produced,
        consumed=consumed,
        missing=missing_total,
        remaining=remaining_total,
        fitness=_fitness(produced, consumed, missing_total, remaining_total),
        firing_log=tuple(steps),
        final_missing=final_missing,
        final_marking_ignored=ignore_final_marking,
    )


def replay_log(net: PetriNet, log: EventLog, label_map: dict[str, str] | None = None,
               ignore_final_for_ongoing: bool = True, max_silent_run: int = 8) -> LogReplayResult:
    """Replay every trace and aggregate counters into a log-level fitness.

    Ongoing cases (complete=false) are by default replayed without the
    final-marking penalty; pass ignore_final_for_ongoing=False to treat them
    like complete cases.
    """
    results = []
    for trace in log:
        ignore = ignore_final_for_ongoing and not trace.complete
        results.append(replay_trace(net, trace, label_map=label_map,
                                    ignore_final_marking=ignore,
                                    max_silent_run=max_silent_run))
    produced = sum(r.produced for r in results)
    consumed = sum(r.consumed for r in results)
    missing = sum(r.missing for r in results)
    remaining = sum(r.remaining for r in results)
    return LogReplayResult(tuple(results), produced, consumed, missing, remaining,
                           _fitness(produced, consumed, missing, remaining))


def replay_csv(result: LogReplayResult) -> str:
    """Per-trace diagnostics as CSV: case_id,p,c,m,r,fitness."""
    lines = ["case_id,produced,consumed,missing,remaining,fitness"]
    for r in result.per_trace:
        lines.append(f"{r.case_id},{r.produced},{r.consumed},{r.missing},{r.remaining},{r.fitness:.6f}")
    lines.append("")
    return "\n".join(lines)


def deviation_report(result: LogReplayResult) -> str:
    """Human-readable list of where tokens had to be created per deviating case."""
    lines = [f"log fitness: {result.log_fitness:.4f}",
             f"aggregate counters: p={result.produced} c={result.consumed} "
             f"m={result.missing} r={result.remaining}", ""]
    deviating = [r for r in result.per_trace if r.missing or r.remaining]
    if not deviating:
        lines.append("no deviations: every trace replays cleanly.")
    for r in deviating:
        lines.append(f"case {r.case_id}: fitness {r.fitness:.4f} "
                     f"(p={r.produced} c={r.consumed} m={r.missing} r={r.remaining})")
        for step in r.firing_log:
            if step.transition_id is None:
                lines.append(f"  step {step.index}: activity {step.activity!r} not in model")
            elif step.forced_missing:
                where = ", ".join(sorted(step.forced_missing))
                label = step.activity or f"silent {step.transition_id}"
                lines.append(f"  step {step.index}: {label} forced; missing tokens in {where}")
        if r.final_missing:
            lines.append(f"  final marking not reached; missing tokens in "
                         f"{', '.join(sorted(r.final_missing))}")
    lines.append("")
    return "\n".join(lines)
