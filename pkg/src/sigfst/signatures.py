"""Temporal attribute signatures and their logic machines.

An action label is described by one temporal pattern per attribute: the
attribute is absent throughout, present throughout, present-then-absent,
or absent-then-present.  Each pattern compiles to a tiny length-agnostic
acceptor over the binary detection alphabet; composing that acceptor with
an observation machine scores how well a detection trace fits the
pattern.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .errors import DuplicateLabel, ParseError, UnknownPatternCode
from .fst import BINARY, Transducer, make_transducer
from .semiring import ONE

__all__ = [
    "DynamicPattern",
    "SignatureSpec",
    "LabelSet",
    "compile_pattern",
    "staticize",
    "parse_signature_file",
]


class DynamicPattern(enum.IntEnum):
    """The four per-attribute temporal patterns."""

    ABSENCE = 0      # 0+  : never detected
    PERSISTENCE = 1  # 1+  : detected throughout
    START = 2        # 1+0+: detected early, then gone (a transition must occur)
    END = 3          # 0+1+: absent early, then detected

    def min_frames(self) -> int:
        """Shortest realizable sequence: transitions need both phases."""
        return 2 if self in (DynamicPattern.START, DynamicPattern.END) else 1


@dataclass(frozen=True)
class SignatureSpec:
    """One label's signature: an ordered map attribute -> pattern."""

    label: str
    attributes: tuple[tuple[str, DynamicPattern], ...]

    def __post_init__(self):
        names = [a for a, _ in self.attributes]
        if not names:
            raise ValueError(f"label {self.label!r} has an empty attribute map")
        if len(set(names)) != len(names):
            raise ValueError(f"label {self.label!r} repeats an attribute name")

    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.attributes)

    def pattern_of(self, attribute: str) -> DynamicPattern:
        for name, pattern in self.attributes:
            if name == attribute:
                return pattern
        raise KeyError(attribute)


@dataclass(frozen=True)
class LabelSet:
    """A family of signatures over a shared attribute vocabulary."""

    specs: tuple[SignatureSpec, ...]
    vocabulary: tuple[str, ...]

    def __post_init__(self):
        labels = [s.label for s in self.specs]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels in label set")
        vocab = set(self.vocabulary)
        for spec in self.specs:
            missing = [a for a in spec.attribute_names() if a not in vocab]
            if missing:
                raise ValueError(
                    f"label {spec.label!r} uses attributes {missing} "
                    "outside the shared vocabulary"
                )

    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.specs)

    def spec_of(self, label: str) -> SignatureSpec:
        for spec in self.specs:
            if spec.label == label:
                return spec
        raise KeyError(label)


def compile_pattern(pattern: DynamicPattern) -> Transducer:
    """Compile a pattern into its logic acceptor over the binary alphabet.

    All edges carry the semiring one and replicate input as output, so the
    machine also acts as the identity transducer on its accepted language:

    * ABSENCE      0+    two states, self-loop on 0
    * PERSISTENCE  1+    two states, self-loop on 1
    * START        1+0+  three states, one irreversible 1 -> 0 transition
    * END          0+1+  three states, mirrored
    """
    zero, one = 1, 2  # BINARY symbol ids for detections 0 and 1

    def loop_chain(symbols: list[int]) -> Transducer:
        # state i advances to i+1 on symbols[i]; each phase may repeat.
        edges = []
        for i, sym in enumerate(symbols):
            edges.append((i, sym, sym, ONE, i + 1))
            edges.append((i + 1, sym, sym, ONE, i + 1))
        return make_transducer(
            state_count=len(symbols) + 1,
            start_state=0,
            final_states=[len(symbols)],
            edges=edges,
            input_table=BINARY,
            output_table=BINARY,
        )

    if pattern is DynamicPattern.ABSENCE:
        return loop_chain([zero])
    if pattern is DynamicPattern.PERSISTENCE:
        return loop_chain([one])
    if pattern is DynamicPattern.START:
        return loop_chain([one, zero])
    if pattern is DynamicPattern.END:
        return loop_chain([zero, one])
    raise ValueError(f"unknown pattern {pattern!r}")


def staticize(spec: SignatureSpec) -> SignatureSpec:
    """Collapse a signature to its static counterpart.

    Transition patterns (START, END) map to ABSENCE; ABSENCE and
    PERSISTENCE are fixed points, so the operation is idempotent and
    preserves the attribute order.
    """
    static = {
        DynamicPattern.START: DynamicPattern.ABSENCE,
        DynamicPattern.END: DynamicPattern.ABSENCE,
    }
    return SignatureSpec(
        label=spec.label,
        attributes=tuple((a, static.get(p, p)) for a, p in spec.attributes),
    )


def _as_pattern(code, label: str, attribute: str) -> DynamicPattern:
    if isinstance(code, bool) or not isinstance(code, int):
        raise ParseError(
            f"pattern code for {label!r}/{attribute!r} must be an integer, got {code!r}"
        )
    try:
        return DynamicPattern(code)
    except ValueError:
        raise UnknownPatternCode(
            f"pattern code {code} for {label!r}/{attribute!r} is outside 0-3"
        ) from None


def _pairs_keeping_duplicates(pairs):
    return list(pairs)


def _expect_object(value, what: str) -> list:
    """JSON objects arrive as key/value pair lists (duplicate keys intact)."""
    if not isinstance(value, list) or not all(
        isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], str)
        for item in value
    ):
        raise ParseError(f"{what} must be an object")
    return value


def parse_signature_file(text: str) -> LabelSet:
    """Parse a JSON signature document into a validated label set.

    Schema: a top-level object with a ``labels`` map from label name to
    ``{attribute: pattern code 0-3}``, plus an optional ``attributes``
    list declaring the shared vocabulary.  Without the declaration the
    vocabulary is the union of attribute names in first-use order.
    """
    try:
        doc = json.loads(text, object_pairs_hook=_pairs_keeping_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), location=f"line {exc.lineno}") from exc
    top = dict(_expect_object(doc, "top level"))
    if "labels" not in top:
        raise ParseError("missing top-level 'labels' map")
    labels_field = _expect_object(top["labels"], "'labels'")

    seen_labels: set[str] = set()
    specs: list[SignatureSpec] = []
    used_attrs: list[str] = []
    for label, attr_map in labels_field:
        if label in seen_labels:
            raise DuplicateLabel(f"label {label!r} defined twice")
        seen_labels.add(label)
        attr_map = _expect_object(attr_map, f"label {label!r}")
        if not attr_map:
            raise ParseError(f"label {label!r} has an empty attribute map")
        attrs: list[tuple[str, DynamicPattern]] = []
        seen_attrs: set[str] = set()
        for attribute, code in attr_map:
            if attribute in seen_attrs:
                raise ParseError(f"label {label!r} repeats attribute {attribute!r}")
            seen_attrs.add(attribute)
            attrs.append((attribute, _as_pattern(code, label, attribute)))
            if attribute not in used_attrs:
                used_attrs.append(attribute)
        specs.append(SignatureSpec(label=label, attributes=tuple(attrs)))
    if not specs:
        raise ParseError("'labels' map is empty")

    declared = top.get("attributes")
    if declared is not None:
        if not isinstance(declared, list) or not all(isinstance(a, str) for a in declared):
            raise ParseError("'attributes' must be a list of attribute names")
        vocabulary = tuple(declared)
        undeclared = [a for a in used_attrs if a not in vocabulary]
        if undeclared:
            raise ParseError(f"attributes {undeclared} used but not declared")
    else:
        vocabulary = tuple(used_attrs)
    return LabelSet(specs=tuple(specs), vocabulary=vocabulary)
