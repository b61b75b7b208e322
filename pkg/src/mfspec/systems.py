"""Loading shift systems and their named potentials from JSON.

A system document looks like::

    {"alphabet": ["0", "1"],
     "transitions": [[1, 1], [1, 0]],
     "potentials": {"ind1": {"depth": 1, "values": {"0": 0.0, "1": 1.0}}},
     "map": {"slopes": [2, 3]}}

``map`` is optional and marks the shift as the coding of a piecewise-linear
Markov map.  The names ``zero`` and ``one`` always exist, and ``u`` (the log
slope) exists whenever a map is given.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dimension import PiecewiseLinearMap, code_as_sft
from .symbolic import LocallyConstantPotential, Sft, VectorPotential, validate_sft

BUILTIN = ("zero", "one", "u")


@dataclass(frozen=True, eq=False)
class System:
    name: str
    sft: Sft
    potentials: dict[str, LocallyConstantPotential] = field(default_factory=dict)
    fmap: PiecewiseLinearMap | None = None

    def potential(self, name: str) -> LocallyConstantPotential:
        name = name.strip()
        if name in self.potentials:
            return self.potentials[name]
        if name == "zero":
            return LocallyConstantPotential.constant(self.sft, 0.0)
        if name == "one":
            return LocallyConstantPotential.constant(self.sft, 1.0)
        if name == "u" and self.fmap is not None:
            return LocallyConstantPotential.symbol_values(self.sft, [math.log(s) for s in self.fmap.slopes])
        raise KeyError(f"system {self.name!r} has no potential {name!r}")

    def vector(self, names: str) -> VectorPotential:
        return VectorPotential.of([self.potential(n) for n in names.split(",")])

    @property
    def names(self) -> list[str]:
        extra = ["zero", "one"] + (["u"] if self.fmap is not None else [])
        return sorted(self.potentials) + extra

    def require_map(self) -> PiecewiseLinearMap:
        if self.fmap is None:
            raise ValueError(f"system {self.name!r} does not declare an interval map")
        return self.fmap


def parse_system(doc: dict, name: str = "") -> System:
    if not isinstance(doc, dict) or "transitions" not in doc:
        raise ValueError("system document needs a 'transitions' matrix")
    labels = doc.get("alphabet")
    trans = doc["transitions"]
    fmap = None
    if "map" in doc:
        fmap = PiecewiseLinearMap(tuple(doc["map"]["slopes"]), trans, labels)
        sft, _ = code_as_sft(fmap)
    else:
        sft = validate_sft(trans, labels)
    pots = {}
    for pname, spec in (doc.get("potentials") or {}).items():
        if pname in BUILTIN:
            raise ValueError(f"potential name {pname!r} is reserved")
        pots[pname] = LocallyConstantPotential.from_mapping(sft, int(spec["depth"]), spec["values"])
    return System(name or str(doc.get("name", "")), sft, pots, fmap)


def load_system(path: str | Path) -> System:
    path = Path(path)
    with path.open() as fh:
        doc = json.load(fh)
    return parse_system(doc, doc.get("name", path.stem))


def load_bundle(path: str | Path | None = None) -> dict[str, System]:
    """Systems from a bundle file (the packaged one by default)."""
    if path is None:
        text = resources.files("mfspec").joinpath("data/bundle.json").read_text()
    else:
        text = Path(path).read_text()
    doc = json.loads(text)
    if "systems" not in doc:
        return {Path(path).stem if path else "system": parse_system(doc)}
    return {name: parse_system(d, name) for name, d in doc["systems"].items()}
