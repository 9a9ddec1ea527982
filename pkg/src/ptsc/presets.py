"""Sort/axiom/rule triples parameterising every judgment, plus shipped presets."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class PtsSpec:
    sorts: tuple
    axioms: tuple  # pairs (s, s')
    rules: tuple  # triples (s1, s2, s3)

    def __post_init__(self):
        declared = set(self.sorts)
        for s, s2 in self.axioms:
            if s not in declared or s2 not in declared:
                raise ValueError(f"axiom ({s},{s2}) mentions an undeclared sort")
        for s1, s2, s3 in self.rules:
            if not {s1, s2, s3} <= declared:
                raise ValueError(f"rule ({s1},{s2},{s3}) mentions an undeclared sort")

    def axioms_from(self, s: str) -> list:
        return [s2 for (a, s2) in self.axioms if a == s]

    def axioms_into(self, s2: str) -> list:
        return [a for (a, b) in self.axioms if b == s2]

    def rules_into(self, s3: str) -> list:
        return [(a, b) for (a, b, c) in self.rules if c == s3]

    def rule_results(self, s1: str, s2: str) -> list:
        return [c for (a, b, c) in self.rules if a == s1 and b == s2]

    def to_dict(self) -> dict:
        return {
            "sorts": list(self.sorts),
            "axioms": [list(p) for p in self.axioms],
            "rules": [list(t) for t in self.rules],
        }

    @staticmethod
    def from_dict(data: dict) -> "PtsSpec":
        sorts = tuple(data["sorts"])
        axioms = tuple(tuple(p) for p in data["axioms"])
        rules = []
        for t in data["rules"]:
            if len(t) == 2:
                # two-entry form (s1, s2) abbreviates (s1, s2, s2)
                rules.append((t[0], t[1], t[1]))
            elif len(t) == 3:
                rules.append(tuple(t))
            else:
                raise ValueError(f"rule {t!r} must have 2 or 3 entries")
        return PtsSpec(sorts, axioms, tuple(rules))

    @staticmethod
    def load(path: str) -> "PtsSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return PtsSpec.from_dict(json.load(fh))


def _cube(rules: Iterable) -> PtsSpec:
    return PtsSpec(("*", "#"), (("*", "#"),), tuple(rules))


PRESETS = {
    "stlc": _cube([("*", "*", "*")]),
    "systemF": _cube([("*", "*", "*"), ("#", "*", "*")]),
    "fomega": _cube([("*", "*", "*"), ("#", "*", "*"), ("#", "#", "#")]),
    "lambdaPi": _cube([("*", "*", "*"), ("*", "#", "#")]),
    "coc": _cube([("*", "*", "*"), ("#", "*", "*"), ("*", "#", "#"), ("#", "#", "#")]),
}


def get_spec(name_or_path: str) -> PtsSpec:
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    return PtsSpec.load(name_or_path)
