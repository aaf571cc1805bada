"""Viseme classes, the phoneme lookup table and aligned transcripts.

A viseme groups phonemes that look alike on the lips. The engine works
with exactly 20 classes; class membership comes from a replaceable table
file so other languages or groupings can be dropped in. Transcripts are
time-aligned phoneme segments, one per line, as produced by a forced
aligner.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

VISEME_CLASS_COUNT = 20

#: Symbols treated as explicit silence in shipped data.
SILENCE_MARKERS = ("sil", "sp", "pau")


class UnknownPhonemeError(KeyError):
    """A phoneme does not appear in the active viseme table."""

    def __init__(self, phoneme: str):
        super().__init__(phoneme)
        self.phoneme = phoneme

    def __str__(self) -> str:
        return f"phoneme {self.phoneme!r} is not in the viseme table"


@dataclass(frozen=True)
class VisemeClass:
    """One mouth-shape class: id, member phonemes, lips-closed flag."""

    id: int
    phonemes: frozenset[str]
    labial: bool = False

    def __post_init__(self) -> None:
        if not (0 <= self.id < VISEME_CLASS_COUNT):
            raise ValueError(f"viseme class id {self.id} outside 0..19")
        if not self.phonemes:
            raise ValueError(f"viseme class {self.id} has no member phonemes")


class VisemeTable:
    """Complete 20-class partition of the supported phoneme inventory."""

    def __init__(self, classes: Sequence[VisemeClass]):
        if len(classes) != VISEME_CLASS_COUNT:
            raise ValueError(
                f"viseme table needs exactly {VISEME_CLASS_COUNT} classes, "
                f"got {len(classes)}"
            )
        by_id = {c.id: c for c in classes}
        if sorted(by_id) != list(range(VISEME_CLASS_COUNT)):
            raise ValueError("viseme class ids must cover 0..19 exactly once")
        owner: dict[str, int] = {}
        for cls in classes:
            for phoneme in cls.phonemes:
                if phoneme in owner:
                    raise ValueError(
                        f"phoneme {phoneme!r} appears in classes "
                        f"{owner[phoneme]} and {cls.id}"
                    )
                owner[phoneme] = cls.id
        for labial_phoneme in ("b", "p", "m"):
            cls_id = owner.get(labial_phoneme)
            if cls_id is None or not by_id[cls_id].labial:
                raise ValueError(
                    f"phoneme {labial_phoneme!r} must belong to a labial class"
                )
        self.classes: tuple[VisemeClass, ...] = tuple(
            by_id[i] for i in range(VISEME_CLASS_COUNT)
        )
        self._owner = owner

    def lookup(self, phoneme: str) -> VisemeClass:
        try:
            return self.classes[self._owner[phoneme]]
        except KeyError:
            raise UnknownPhonemeError(phoneme) from None

    def class_id(self, phoneme: str) -> int:
        return self.lookup(phoneme).id

    def labial_ids(self) -> frozenset[int]:
        return frozenset(c.id for c in self.classes if c.labial)

    def silence_ids(self) -> frozenset[int]:
        """Classes containing a silence marker (neutral mouth)."""
        return frozenset(
            self._owner[m] for m in SILENCE_MARKERS if m in self._owner
        )


def map_phoneme_to_viseme(phoneme: str, table: VisemeTable) -> VisemeClass:
    """The unique viseme class owning a phoneme."""
    return table.lookup(phoneme)


_TABLE_MAGIC = "bearface-visemes"
_TABLE_VERSION = "1"


def parse_viseme_table(text: str) -> VisemeTable:
    """Parse a table file: 'id labial_flag phoneme...' per line."""
    lines = text.splitlines()
    if not lines or lines[0].split() != [_TABLE_MAGIC, _TABLE_VERSION]:
        raise ValueError(
            f"viseme table must start with '{_TABLE_MAGIC} {_TABLE_VERSION}'"
        )
    classes = []
    for number, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) < 3:
            raise ValueError(f"line {number}: expected 'id labial phonemes...'")
        classes.append(
            VisemeClass(
                id=int(fields[0]),
                labial=fields[1] not in ("0", "false", "no"),
                phonemes=frozenset(fields[2:]),
            )
        )
    return VisemeTable(classes)


def load_viseme_table(path: str | Path | None = None) -> VisemeTable:
    """Load a table file, or the packaged English default when no path."""
    if path is None:
        text = (
            resources.files("bearface")
            .joinpath("data/visemes_en20.txt")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_viseme_table(text)


# ---------------------------------------------------------------------------
# Aligned transcripts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhonemeSegment:
    """One aligned phoneme: symbol plus start/end time in seconds."""

    phoneme: str
    start: float
    end: float

    def __post_init__(self) -> None:
        if not self.phoneme:
            raise ValueError("segment phoneme symbol is empty")
        if not (self.start < self.end):
            raise ValueError(
                f"segment {self.phoneme!r}: start {self.start} must precede "
                f"end {self.end}"
            )

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.start + self.end)


def validate_transcript(segments: Sequence[PhonemeSegment]) -> None:
    """Reject unordered or overlapping segment lists."""
    for previous, current in zip(segments, segments[1:]):
        if current.start < previous.end:
            raise ValueError(
                f"segments {previous.phoneme!r} and {current.phoneme!r} overlap "
                f"or are out of order at t={current.start}"
            )


def parse_transcript(text: str) -> tuple[PhonemeSegment, ...]:
    """Parse 'start end phoneme' lines into a validated transcript."""
    segments = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(f"line {number}: expected 'start end phoneme'")
        segments.append(
            PhonemeSegment(phoneme=fields[2], start=float(fields[0]), end=float(fields[1]))
        )
    transcript = tuple(segments)
    validate_transcript(transcript)
    return transcript


def read_transcript(path: str | Path) -> tuple[PhonemeSegment, ...]:
    return parse_transcript(Path(path).read_text(encoding="utf-8"))


def bundled_transcript(name: str = "demo.align") -> tuple[PhonemeSegment, ...]:
    """A transcript shipped with the package (demo material for the CLI)."""
    text = (
        resources.files("bearface").joinpath(f"data/{name}").read_text(encoding="utf-8")
    )
    return parse_transcript(text)


def write_transcript(segments: Iterable[PhonemeSegment], path: str | Path) -> None:
    lines = [f"{s.start:.6g} {s.end:.6g} {s.phoneme}" for s in segments]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
