"""Closed token vocabularies loaded from the packaged data file."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

_SECTIONS = ("rooms", "furniture", "objects", "colors", "materials")


@dataclass(frozen=True)
class Vocabulary:
    rooms: tuple[str, ...]
    furniture: tuple[str, ...]
    objects: tuple[str, ...]
    colors: tuple[str, ...]
    materials: tuple[str, ...]
    # Nominal disk radius per object category, meters.
    radii: dict[str, float] = field(default_factory=dict)

    @property
    def categories(self) -> tuple[str, ...]:
        """All tokens usable as a noun-phrase head: objects plus furniture."""
        return self.objects + self.furniture

    def radius_of(self, category: str) -> float:
        return self.radii.get(category, 0.06)


_RADII = {
    "bottle": 0.045, "mug": 0.045, "cup": 0.04, "bowl": 0.06, "plate": 0.08,
    "book": 0.07, "box": 0.09, "ball": 0.05, "can": 0.035, "vase": 0.05,
    "toy car": 0.06, "teddy bear": 0.08, "remote": 0.05, "lamp": 0.07,
}


def parse_vocab_text(text: str) -> Vocabulary:
    sections: dict[str, list[str]] = {name: [] for name in _SECTIONS}
    current: list[str] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            if name not in sections:
                raise ValueError(f"unknown vocabulary section {name!r}")
            current = sections[name]
            continue
        if current is None:
            raise ValueError(f"token {line!r} outside any section")
        current.append(line)
    for name, toks in sections.items():
        if not toks:
            raise ValueError(f"empty vocabulary section {name!r}")
        if len(toks) != len(set(toks)):
            raise ValueError(f"duplicate token in section {name!r}")
    return Vocabulary(
        rooms=tuple(sections["rooms"]),
        furniture=tuple(sections["furniture"]),
        objects=tuple(sections["objects"]),
        colors=tuple(sections["colors"]),
        materials=tuple(sections["materials"]),
        radii=dict(_RADII),
    )


def load_default() -> Vocabulary:
    text = resources.files("homefetch.data").joinpath("vocabulary.txt").read_text()
    return parse_vocab_text(text)


DEFAULT = load_default()
