"""Per-frame attribute probability traces and observation machines.

A trace is a T x K matrix of probabilities: row t holds the detector's
belief that each of K attributes is present at frame t.  Frames are
1-based on disk and in machine symbols.  The observation machine for one
attribute is a linear chain that reads frame indices and emits binary
detections, weighting each branch by the (clamped) detection probability.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    MalformedRow,
    NonMonotonicFrames,
    OutOfRangeProbability,
    ParseError,
    UnknownAttribute,
)
from .fst import BINARY, Transducer, make_transducer
from .semiring import LogWeight

__all__ = [
    "ObservationTrace",
    "EpsilonPolicy",
    "load_trace",
    "observation_transducer",
    "downsample",
]


@dataclass(frozen=True)
class EpsilonPolicy:
    """Probability floor applied before taking logs.

    Hard 0/1 detections would give infinite log weights and let a single
    frame veto an entire hypothesis, so probabilities are clamped to
    ``[floor, 1 - floor]`` when building observation machines.
    """

    floor: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.floor < 0.5:
            raise ValueError(f"floor must be in (0, 0.5), got {self.floor!r}")

    def clamp(self, p: float) -> float:
        return min(max(p, self.floor), 1.0 - self.floor)


@dataclass(frozen=True)
class ObservationTrace:
    """Frame-by-attribute probability matrix with named columns."""

    attributes: tuple[str, ...]
    probs: np.ndarray  # shape (T, K), float64, entries in [0, 1]

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 2:
            raise ValueError("probs must be a 2-D array")
        if probs.shape[0] < 1 or probs.shape[1] < 1:
            raise ValueError("a trace needs at least one frame and one attribute")
        if probs.shape[1] != len(self.attributes):
            raise ValueError("column count does not match attribute names")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("attribute names must be unique")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise OutOfRangeProbability("probabilities must lie in [0, 1]")
        probs.setflags(write=False)

    @property
    def frame_count(self) -> int:
        return self.probs.shape[0]

    def column(self, attribute: str) -> np.ndarray:
        try:
            k = self.attributes.index(attribute)
        except ValueError:
            raise UnknownAttribute(
                f"attribute {attribute!r} not in trace columns {self.attributes}"
            ) from None
        return self.probs[:, k]

    def window(self, start: int, stop: int) -> "ObservationTrace":
        """Sub-trace over frame rows [start, stop), 0-based."""
        return ObservationTrace(self.attributes, self.probs[start:stop].copy())


def _finish_rows(names, frames, rows) -> ObservationTrace:
    if not rows:
        raise MalformedRow("trace has no data rows")
    last = None
    for t in frames:
        if last is not None and t <= last:
            raise NonMonotonicFrames(f"frame {t} follows frame {last}")
        last = t
    matrix = np.array(rows, dtype=np.float64)
    if np.any(matrix < 0.0) or np.any(matrix > 1.0):
        bad = matrix[(matrix < 0.0) | (matrix > 1.0)][0]
        raise OutOfRangeProbability(f"probability {bad} outside [0, 1]")
    return ObservationTrace(attributes=tuple(names), probs=matrix)


def _parse_float(text, lineno: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise MalformedRow(f"not a number: {text!r}", location=f"line {lineno}") from None
    if math.isnan(value):
        raise MalformedRow("NaN probability", location=f"line {lineno}")
    return value


def _load_csv(text: str) -> ObservationTrace:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow("empty document") from None
    if len(header) < 2 or header[0].strip() != "t":
        raise MalformedRow("header must be 't,<attr>,...'", location="line 1")
    names = [h.strip() for h in header[1:]]
    frames: list[int] = []
    rows: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise MalformedRow(
                f"expected {len(header)} fields, got {len(row)}", location=f"line {lineno}"
            )
        try:
            frames.append(int(row[0]))
        except ValueError:
            raise MalformedRow(f"bad frame index {row[0]!r}", location=f"line {lineno}") from None
        rows.append([_parse_float(cell, lineno) for cell in row[1:]])
    return _finish_rows(names, frames, rows)


def _load_jsonl(text: str) -> ObservationTrace:
    names: list[str] | None = None
    frames: list[int] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRow(str(exc), location=f"line {lineno}") from exc
        if not isinstance(obj, dict) or "t" not in obj:
            raise MalformedRow("each line needs an object with a 't' field",
                               location=f"line {lineno}")
        t = obj.pop("t")
        if isinstance(t, bool) or not isinstance(t, int):
            raise MalformedRow(f"bad frame index {t!r}", location=f"line {lineno}")
        if names is None:
            names = list(obj.keys())
            if not names:
                raise MalformedRow("no attribute fields", location=f"line {lineno}")
        elif set(obj.keys()) != set(names):
            raise MalformedRow("attribute fields differ from first row",
                               location=f"line {lineno}")
        frames.append(t)
        rows.append([_parse_float(obj[name], lineno) for name in names])
    if names is None:
        raise MalformedRow("empty document")
    return _finish_rows(names, frames, rows)


def load_trace(source, format: str = "csv") -> ObservationTrace:
    """Load a trace from a path, file object, or string/bytes document.

    ``format`` is ``"csv"`` (header ``t,<attr1>,...``) or ``"jsonl"``
    (one object per frame with a ``t`` field).  Frame indices must be
    strictly increasing; rows are re-indexed to 1..T internally.
    """
    if isinstance(source, (str, os.PathLike)) and (
        not isinstance(source, str) or "\n" not in source
    ):
        with open(source, "r", encoding="utf-8") as handle:
            text = handle.read()
    elif isinstance(source, str):
        text = source
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    elif hasattr(source, "read"):
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    else:
        raise TypeError(f"cannot read a trace from {type(source).__name__}")
    if format == "csv":
        return _load_csv(text)
    if format in ("jsonl", "json-lines"):
        return _load_jsonl(text)
    raise ParseError(f"unknown trace format {format!r}")


def trace_to_csv(trace: ObservationTrace) -> str:
    """Serialize in the on-disk CSV format (1-based frame indices)."""
    lines = ["t," + ",".join(trace.attributes)]
    for i in range(trace.frame_count):
        cells = ",".join(repr(float(v)) for v in trace.probs[i])
        lines.append(f"{i + 1},{cells}")
    return "\n".join(lines) + "\n"


def observation_transducer(
    trace: ObservationTrace,
    attribute: str,
    policy: EpsilonPolicy = EpsilonPolicy(),
) -> Transducer:
    """Linear-chain machine mapping frame indices to binary detections.

    States 0..T; between state t-1 and t two edges read input symbol t
    and emit detection 1 with weight log p_t or detection 0 with weight
    log (1 - p_t), probabilities clamped per ``policy``.  State T is
    final, so every accepting path fixes one detection per frame.
    """
    column = trace.column(attribute)
    edges = []
    for t, p in enumerate(column, start=1):
        p = policy.clamp(float(p))
        edges.append((t - 1, t, 2, LogWeight(math.log(p)), t))        # detected
        edges.append((t - 1, t, 1, LogWeight(math.log1p(-p)), t))     # not detected
    return make_transducer(
        state_count=trace.frame_count + 1,
        start_state=0,
        final_states=[trace.frame_count],
        edges=edges,
        input_table=None,
        output_table=BINARY,
    )


def downsample(trace: ObservationTrace, stride: int) -> ObservationTrace:
    """Keep every stride-th frame starting at the first."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if stride == 1:
        return trace
    return ObservationTrace(trace.attributes, trace.probs[::stride].copy())
