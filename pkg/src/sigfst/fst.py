"""Weighted finite-state acceptors and transducers.

Machines are immutable: states are dense integers ``0..state_count-1``,
symbols are small positive integers with ``EPSILON = 0`` reserved, and
every edge carries a :class:`~sigfst.semiring.LogWeight`.  An acceptor is
a transducer whose edges all have ``ilabel == olabel``.

The three algorithms here are the usual lattice workhorses:

* :func:`compose` -- product construction matching output symbols of the
  first machine against input symbols of the second (weights multiply,
  i.e. log weights add), with a three-state epsilon filter so that pairs
  of epsilon paths are counted exactly once.
* :func:`best_path` -- maximum-log-weight accepting path (Viterbi).
* :func:`total_weight` -- log-sum-exp over all accepting paths (Forward).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import AlphabetMismatch, CyclicMachine, DivergentWeights, ParseError
from .semiring import ONE, ZERO, LogWeight

__all__ = [
    "EPSILON",
    "Edge",
    "SymbolTable",
    "Transducer",
    "Path",
    "Defect",
    "compose",
    "best_path",
    "total_weight",
    "validate",
    "accepts",
    "to_text",
    "from_text",
]

EPSILON = 0


@dataclass(frozen=True)
class SymbolTable:
    """Reversible mapping from symbol names to dense ids starting at 1.

    Id 0 is reserved for epsilon and never appears in the table.
    """

    names: tuple[str, ...]

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise KeyError(name) from None

    def name_of(self, symbol_id: int) -> str:
        if not 1 <= symbol_id <= len(self.names):
            raise KeyError(symbol_id)
        return self.names[symbol_id - 1]

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def __len__(self) -> int:
        return len(self.names)


# Shared alphabet for binary attribute detections: absent -> 1, present -> 2.
BINARY = SymbolTable(("0", "1"))


def detection_symbol(bit: int) -> int:
    """Symbol id of a binary detection value (0 or 1)."""
    return bit + 1


def symbol_detection(symbol_id: int) -> int:
    """Binary detection value of a symbol id from the BINARY table."""
    return symbol_id - 1


@dataclass(frozen=True, slots=True)
class Edge:
    src: int
    ilabel: int
    olabel: int
    weight: LogWeight
    dst: int


@dataclass(frozen=True)
class Transducer:
    state_count: int
    start_state: int
    final_states: frozenset[int]
    edges: tuple[Edge, ...]
    input_table: SymbolTable | None = None
    output_table: SymbolTable | None = None

    @cached_property
    def _out(self) -> dict[int, tuple[Edge, ...]]:
        adj: dict[int, list[Edge]] = {}
        for e in self.edges:
            adj.setdefault(e.src, []).append(e)
        return {q: tuple(es) for q, es in adj.items()}

    def out_edges(self, state: int) -> tuple[Edge, ...]:
        return self._out.get(state, ())

    def is_acceptor(self) -> bool:
        return all(e.ilabel == e.olabel for e in self.edges)

    def has_accepting_path(self) -> bool:
        return bool(self.final_states & _accessible(self))


def make_transducer(
    state_count: int,
    start_state: int,
    final_states: Iterable[int],
    edges: Iterable[tuple[int, int, int, LogWeight, int]] | Iterable[Edge],
    input_table: SymbolTable | None = None,
    output_table: SymbolTable | None = None,
) -> Transducer:
    """Convenience constructor accepting edge tuples ``(src, in, out, w, dst)``."""
    built = tuple(e if isinstance(e, Edge) else Edge(*e) for e in edges)
    return Transducer(
        state_count=state_count,
        start_state=start_state,
        final_states=frozenset(final_states),
        edges=built,
        input_table=input_table,
        output_table=output_table,
    )


@dataclass(frozen=True)
class Path:
    """A connected edge sequence from the start state into a final state."""

    edges: tuple[Edge, ...]
    weight: LogWeight

    def input_labels(self) -> tuple[int, ...]:
        return tuple(e.ilabel for e in self.edges if e.ilabel != EPSILON)

    def output_labels(self) -> tuple[int, ...]:
        return tuple(e.olabel for e in self.edges if e.olabel != EPSILON)


@dataclass(frozen=True)
class Defect:
    kind: str  # dangling_state | unreachable_state | no_final_state
    detail: str


# ---------------------------------------------------------------------------
# reachability / trimming

def _accessible(t: Transducer) -> set[int]:
    if not 0 <= t.start_state < t.state_count:
        return set()
    seen = {t.start_state}
    queue = deque([t.start_state])
    while queue:
        q = queue.popleft()
        for e in t.out_edges(q):
            if 0 <= e.dst < t.state_count and e.dst not in seen:
                seen.add(e.dst)
                queue.append(e.dst)
    return seen


def _coaccessible(t: Transducer) -> set[int]:
    rev: dict[int, list[int]] = {}
    for e in t.edges:
        rev.setdefault(e.dst, []).append(e.src)
    seen = set(q for q in t.final_states if 0 <= q < t.state_count)
    queue = deque(seen)
    while queue:
        q = queue.popleft()
        for p in rev.get(q, ()):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def _trim(t: Transducer) -> Transducer:
    """Drop states not on any accepting path; the start state is always kept."""
    keep = _accessible(t) & _coaccessible(t)
    keep.add(t.start_state)
    if len(keep) == t.state_count and all(q < t.state_count for q in keep):
        useful = keep  # nothing to drop structurally, but edges may still dangle
        if all(e.src in useful and e.dst in useful for e in t.edges):
            return t
    renum = {q: i for i, q in enumerate(sorted(keep))}
    edges = tuple(
        Edge(renum[e.src], e.ilabel, e.olabel, e.weight, renum[e.dst])
        for e in t.edges
        if e.src in renum and e.dst in renum
    )
    return Transducer(
        state_count=len(renum),
        start_state=renum[t.start_state],
        final_states=frozenset(renum[q] for q in t.final_states if q in renum),
        edges=edges,
        input_table=t.input_table,
        output_table=t.output_table,
    )


# ---------------------------------------------------------------------------
# composition

def compose(t1: Transducer, t2: Transducer) -> Transducer:
    """Compose two machines, matching t1 output symbols to t2 input symbols.

    Each pair of edges with ``e1.olabel == e2.ilabel`` yields a composed
    edge ``(e1.ilabel : e2.olabel)`` with weight ``w1 * w2`` (a log-domain
    sum).  Epsilon moves are sequenced through a three-state filter so
    every compatible pair of paths produces exactly one composed path:

    * state 0: neutral (start, or just after a symbol match);
    * state 1: advancing only t1 on output-epsilon edges;
    * state 2: advancing only t2 on input-epsilon edges.

    A simultaneous epsilon move is only allowed from state 0, and a
    machine may not start consuming the other side's epsilons until the
    next real match.  Dead states are pruned from the result; an empty
    result (no accepting path) is a valid machine, not an error.
    """
    if (
        t1.output_table is not None
        and t2.input_table is not None
        and t1.output_table != t2.input_table
    ):
        raise AlphabetMismatch(
            f"output alphabet {t1.output_table.names} does not match "
            f"input alphabet {t2.input_table.names}"
        )

    by_ilabel: dict[tuple[int, int], list[Edge]] = {}
    for e in t2.edges:
        by_ilabel.setdefault((e.src, e.ilabel), []).append(e)

    start = (t1.start_state, t2.start_state, 0)
    state_ids: dict[tuple[int, int, int], int] = {start: 0}
    queue = deque([start])
    edges: list[Edge] = []
    finals: set[int] = set()

    def state_id(key: tuple[int, int, int]) -> int:
        sid = state_ids.get(key)
        if sid is None:
            sid = len(state_ids)
            state_ids[key] = sid
            queue.append(key)
        return sid

    while queue:
        key = queue.popleft()
        q1, q2, flt = key
        sid = state_ids[key]
        if q1 in t1.final_states and q2 in t2.final_states:
            finals.add(sid)
        for e1 in t1.out_edges(q1):
            if e1.olabel != EPSILON:
                for e2 in by_ilabel.get((q2, e1.olabel), ()):
                    dst = state_id((e1.dst, e2.dst, 0))
                    edges.append(
                        Edge(sid, e1.ilabel, e2.olabel, e1.weight.times(e2.weight), dst)
                    )
            else:
                if flt != 2:  # advance t1 alone
                    dst = state_id((e1.dst, q2, 1))
                    edges.append(Edge(sid, e1.ilabel, EPSILON, e1.weight, dst))
                if flt == 0:  # matched epsilon move advances both
                    for e2 in by_ilabel.get((q2, EPSILON), ()):
                        dst = state_id((e1.dst, e2.dst, 0))
                        edges.append(
                            Edge(sid, e1.ilabel, e2.olabel, e1.weight.times(e2.weight), dst)
                        )
        if flt != 1:  # advance t2 alone
            for e2 in by_ilabel.get((q2, EPSILON), ()):
                dst = state_id((q1, e2.dst, 2))
                edges.append(Edge(sid, EPSILON, e2.olabel, e2.weight, dst))

    raw = Transducer(
        state_count=len(state_ids),
        start_state=0,
        final_states=frozenset(finals),
        edges=tuple(edges),
        input_table=t1.input_table,
        output_table=t2.output_table,
    )
    return _trim(raw)


# ---------------------------------------------------------------------------
# path algorithms

def _topological_order(t: Transducer) -> list[int] | None:
    """Kahn's algorithm over all states; None if a cycle exists."""
    indeg = [0] * t.state_count
    for e in t.edges:
        indeg[e.dst] += 1
    ready = deque(q for q in range(t.state_count) if indeg[q] == 0)
    order: list[int] = []
    while ready:
        q = ready.popleft()
        order.append(q)
        for e in t.out_edges(q):
            indeg[e.dst] -= 1
            if indeg[e.dst] == 0:
                ready.append(e.dst)
    if len(order) != t.state_count:
        return None
    return order


def best_path(t: Transducer) -> tuple[Path, LogWeight]:
    """Maximum-log-weight accepting path (Viterbi).

    Falls back from the single-pass topological sweep to Bellman-Ford
    relaxation when the machine is cyclic; cycles of positive log weight
    (probability > 1) raise :class:`DivergentWeights` because repeating
    them is unboundedly profitable.  Returns the semiring zero and an
    empty path when no accepting path exists.
    """
    tt = _trim(t)
    if not tt.final_states:
        return Path((), ZERO), ZERO

    score = [float("-inf")] * tt.state_count
    back: list[Edge | None] = [None] * tt.state_count
    score[tt.start_state] = 0.0

    order = _topological_order(tt)
    if order is not None:
        for q in order:
            sq = score[q]
            if sq == float("-inf"):
                continue
            for e in tt.out_edges(q):
                cand = sq + e.weight.value
                if cand > score[e.dst]:
                    score[e.dst] = cand
                    back[e.dst] = e
    else:
        for _ in range(tt.state_count - 1):
            changed = False
            for e in tt.edges:
                if score[e.src] == float("-inf"):
                    continue
                cand = score[e.src] + e.weight.value
                if cand > score[e.dst]:
                    score[e.dst] = cand
                    back[e.dst] = e
                    changed = True
            if not changed:
                break
        else:
            for e in tt.edges:
                if score[e.src] != float("-inf") and score[e.src] + e.weight.value > score[e.dst]:
                    raise DivergentWeights(
                        "cycle with positive log weight: best path is unbounded"
                    )

    best_final = None
    best_score = float("-inf")
    for q in sorted(tt.final_states):
        if score[q] > best_score:
            best_score = score[q]
            best_final = q
    if best_final is None or best_score == float("-inf"):
        return Path((), ZERO), ZERO

    rev_edges: list[Edge] = []
    q = best_final
    while back[q] is not None:
        e = back[q]
        rev_edges.append(e)
        q = e.src
    rev_edges.reverse()
    weight = LogWeight(best_score)
    return Path(tuple(rev_edges), weight), weight


def total_weight(t: Transducer) -> LogWeight:
    """Log-sum-exp over all accepting path weights (Forward algorithm)."""
    tt = _trim(t)
    if not tt.final_states:
        return ZERO
    order = _topological_order(tt)
    if order is None:
        raise CyclicMachine("total weight needs an acyclic machine")
    forward = [ZERO] * tt.state_count
    forward[tt.start_state] = ONE
    for q in order:
        fq = forward[q]
        if fq.is_zero():
            continue
        for e in tt.out_edges(q):
            forward[e.dst] = forward[e.dst].plus(fq.times(e.weight))
    result = ZERO
    for q in sorted(tt.final_states):
        result = result.plus(forward[q])
    return result


# ---------------------------------------------------------------------------
# diagnostics

def validate(t: Transducer) -> list[Defect]:
    """Structural health report; an empty list means well-formed."""
    defects: list[Defect] = []

    def in_range(q: int) -> bool:
        return 0 <= q < t.state_count

    if not in_range(t.start_state):
        defects.append(Defect("dangling_state", f"start state {t.start_state} out of range"))
    for q in sorted(t.final_states):
        if not in_range(q):
            defects.append(Defect("dangling_state", f"final state {q} out of range"))
    for i, e in enumerate(t.edges):
        for q, side in ((e.src, "source"), (e.dst, "target")):
            if not in_range(q):
                defects.append(
                    Defect("dangling_state", f"edge {i} {side} state {q} out of range")
                )
    if not t.final_states:
        defects.append(Defect("no_final_state", "machine accepts nothing"))
    reachable = _accessible(t)
    for q in range(t.state_count):
        if q not in reachable:
            defects.append(Defect("unreachable_state", f"state {q} unreachable from start"))
    return defects


# ---------------------------------------------------------------------------
# acceptance testing

def accepts(t: Transducer, symbols: Sequence[int]) -> bool:
    """NFA membership of an input-side symbol sequence (epsilon-aware)."""

    def closure(states: set[int]) -> set[int]:
        out = set(states)
        queue = deque(states)
        while queue:
            q = queue.popleft()
            for e in t.out_edges(q):
                if e.ilabel == EPSILON and e.dst not in out:
                    out.add(e.dst)
                    queue.append(e.dst)
        return out

    current = closure({t.start_state})
    for sym in symbols:
        nxt = {e.dst for q in current for e in t.out_edges(q) if e.ilabel == sym}
        if not nxt:
            return False
        current = closure(nxt)
    return bool(current & t.final_states)


# ---------------------------------------------------------------------------
# text serialization: `states N` / `start S` / `final a b ...` headers,
# then one `src dst in out logweight` line per edge.

def to_text(t: Transducer) -> str:
    lines = [
        f"states {t.state_count}",
        f"start {t.start_state}",
        "final" + "".join(f" {q}" for q in sorted(t.final_states)),
    ]
    for e in t.edges:
        lines.append(f"{e.src} {e.dst} {e.ilabel} {e.olabel} {e.weight.value!r}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Transducer:
    state_count = None
    start_state = None
    finals: list[int] = []
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "states":
                state_count = int(parts[1])
            elif parts[0] == "start":
                start_state = int(parts[1])
            elif parts[0] == "final":
                finals = [int(p) for p in parts[1:]]
            else:
                if len(parts) != 5:
                    raise ValueError(f"expected 5 fields, got {len(parts)}")
                src, dst = int(parts[0]), int(parts[1])
                ilabel, olabel = int(parts[2]), int(parts[3])
                edges.append(Edge(src, ilabel, olabel, LogWeight(float(parts[4])), dst))
        except (ValueError, IndexError) as exc:
            raise ParseError(str(exc), location=f"line {lineno}") from exc
    if state_count is None or start_state is None:
        raise ParseError("missing 'states' or 'start' header")
    return Transducer(
        state_count=state_count,
        start_state=start_state,
        final_states=frozenset(finals),
        edges=tuple(edges),
    )
