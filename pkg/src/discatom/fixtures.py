"""Bundled fixture presentations: B2, D3, D3min and S2."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .algebra import VarietyPresentation, parse_algebra
from .preorder import PreorderSpec
from .terms import SWITCH_VARS, parse_term


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    presentation: VarietyPresentation
    switch_text: str
    order_texts: dict
    expected: dict

    def order(self, name: str) -> PreorderSpec:
        texts = self.order_texts[name]
        return PreorderSpec.parse(texts["lhs"], texts["rhs"], self.presentation.signature)


def _manifest() -> dict:
    return json.loads(resources.files(__package__).joinpath("fixtures/fixtures.json").read_text("utf-8"))


def fixture_names() -> list[str]:
    return list(_manifest())


def fixture_path(filename: str):
    return resources.files(__package__).joinpath("fixtures", filename)


@lru_cache(maxsize=None)
def load_fixture(name: str) -> Fixture:
    manifest = _manifest()
    if name not in manifest:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(manifest)}")
    entry = manifest[name]
    gens = tuple(parse_algebra(fixture_path(f).read_text("utf-8")) for f in entry["files"])
    switch = parse_term(entry["switch"], gens[0].signature, SWITCH_VARS)
    vp = VarietyPresentation(gens, switch)
    return Fixture(name, entry["description"], vp, entry["switch"], entry["orders"], entry["expected"])
