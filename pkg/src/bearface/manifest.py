"""Dataset manifests and the sequence frame-sampling rule.

A manifest is a tab-separated text file pairing each image with its
landmark file, label, subject, sequence and frame index. Sequence
ingestion follows the standard peak-frame protocol: the first frame of
every sequence is a neutral sample, the last three frames carry the
sequence's expression, and sequences shorter than four frames are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
NEUTRAL_LABEL = "neutral"

_MAGIC = "bearface-manifest"
_VERSION = "1"


@dataclass(frozen=True)
class ManifestEntry:
    image: Path
    landmarks: Path
    label: str
    subject: str
    sequence: str
    frame: int


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    class_names: tuple[str, ...]
    entries: tuple[ManifestEntry, ...]


def parse_manifest(text: str, root: Path, check_files: bool = True) -> DatasetManifest:
    lines = text.splitlines()
    if not lines or lines[0].split() != [_MAGIC, _VERSION]:
        raise ValueError(f"manifest must start with '{_MAGIC} {_VERSION}'")
    class_names: tuple[str, ...] | None = None
    entries = []
    for number, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if class_names is None:
            key, _, value = line.partition("=")
            if key.strip() != "classes":
                raise ValueError("manifest must declare 'classes = ...' first")
            class_names = tuple(value.split())
            if not class_names:
                raise ValueError("manifest declares no classes")
            continue
        fields = line.split("\t")
        if len(fields) != 6:
            raise ValueError(
                f"line {number}: expected 6 tab-separated fields, got {len(fields)}"
            )
        image_path, landmark_path, label, subject, sequence, frame = fields
        if label not in class_names:
            raise ValueError(f"line {number}: label {label!r} not in declared classes")
        entry = ManifestEntry(
            image=root / image_path,
            landmarks=root / landmark_path,
            label=label,
            subject=subject,
            sequence=sequence,
            frame=int(frame),
        )
        if check_files:
            for path in (entry.image, entry.landmarks):
                if not path.is_file():
                    raise FileNotFoundError(f"line {number}: missing file {path}")
        entries.append(entry)
    if class_names is None:
        raise ValueError("manifest declares no classes")
    return DatasetManifest(root=root, class_names=class_names, entries=tuple(entries))


def read_manifest(path: str | Path, check_files: bool = True) -> DatasetManifest:
    path = Path(path)
    return parse_manifest(
        path.read_text(encoding="utf-8"), path.parent, check_files=check_files
    )


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    lines = [f"{_MAGIC} {_VERSION}", "classes = " + " ".join(manifest.class_names)]
    for e in manifest.entries:
        image = e.image.relative_to(manifest.root)
        landmarks = e.landmarks.relative_to(manifest.root)
        lines.append(
            "\t".join(
                (str(image), str(landmarks), e.label, e.subject, e.sequence, str(e.frame))
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class Sample:
    """One training sample after sequence ingestion."""

    image: Path
    landmarks: Path
    label: str
    subject: str
    sequence: str
    frame: int


def ingest_sequences(
    manifest: DatasetManifest,
) -> tuple[list[Sample], list[str]]:
    """Apply the peak-frame sampling rule to every sequence.

    Per sequence (grouped by subject and sequence id, ordered by frame
    index): the first frame becomes a neutral sample and the last three
    frames become samples of the sequence's expression (the label of its
    final entry). Sequences with fewer than four frames are skipped and
    reported in the diagnostics list.
    """
    if NEUTRAL_LABEL not in manifest.class_names:
        raise ValueError(
            f"manifest classes must include {NEUTRAL_LABEL!r} for sequence sampling"
        )
    groups: dict[tuple[str, str], list[ManifestEntry]] = {}
    for entry in manifest.entries:
        groups.setdefault((entry.subject, entry.sequence), []).append(entry)

    samples: list[Sample] = []
    diagnostics: list[str] = []
    for key in sorted(groups):
        frames = sorted(groups[key], key=lambda e: e.frame)
        if len(frames) < 4:
            diagnostics.append(
                f"sequence {key[0]}/{key[1]}: only {len(frames)} frames, skipped"
            )
            continue
        label = frames[-1].label
        picks = [(frames[0], NEUTRAL_LABEL)] + [(f, label) for f in frames[-3:]]
        for entry, assigned in picks:
            samples.append(
                Sample(
                    image=entry.image,
                    landmarks=entry.landmarks,
                    label=assigned,
                    subject=entry.subject,
                    sequence=entry.sequence,
                    frame=entry.frame,
                )
            )
    return samples, diagnostics
