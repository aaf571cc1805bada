"""Dataset-level feature extraction and the feature cache.

Ties the imaging pieces together: ingest a manifest, build the mean
reference shape from the dataset's landmarks, register and crop every
face, run the configured descriptors and keep everything in one cache
file. Per-image work is pure, so order never affects the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .arraystore import read_store, write_store
from .diagnostics import progress
from .hog import hog
from .imaging import GrayImage, read_pnm
from .lbp import lbph
from .manifest import DatasetManifest, Sample, ingest_sequences
from .modelio import FeatureParams
from .registration import LandmarkSet, mean_reference, read_landmarks, register_and_crop


@dataclass(frozen=True)
class FeatureSet:
    """Extracted descriptor blocks for a labeled sample set."""

    blocks: Mapping[str, np.ndarray]   # name -> (n, d)
    labels: tuple[str, ...]
    subjects: tuple[str, ...]
    class_names: tuple[str, ...]
    reference: LandmarkSet
    feature: FeatureParams
    diagnostics: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.labels)


def describe_image(
    image: GrayImage,
    landmarks: LandmarkSet,
    reference: LandmarkSet,
    feature: FeatureParams,
) -> dict[str, np.ndarray]:
    """Registered-crop descriptors of one face, keyed by block name."""
    crop = register_and_crop(image, landmarks, reference)
    grid = (feature.grid, feature.grid)
    out = {}
    if "lbph" in feature.descriptors:
        out["lbph"] = lbph(crop, grid)
    if "hog" in feature.descriptors:
        out["hog"] = hog(crop, grid, feature.hog_bins)
    return out


def extract_dataset(
    manifest: DatasetManifest,
    feature: FeatureParams,
    samples: Sequence[Sample] | None = None,
) -> FeatureSet:
    """Extract descriptors for every ingested sample of a manifest.

    The registration reference is the mean landmark shape over the ingested
    samples, scaled into the crop frame; it is stored with the features so
    later stages (and trained models) reuse the identical mapping.
    """
    diagnostics: list[str] = []
    if samples is None:
        samples, diagnostics = ingest_sequences(manifest)
    if not samples:
        raise ValueError("manifest yields no usable samples")
    landmark_sets = [read_landmarks(sample.landmarks) for sample in samples]
    reference = mean_reference(landmark_sets)
    rows: dict[str, list[np.ndarray]] = {name: [] for name in feature.descriptors}
    for index, (sample, landmarks) in enumerate(zip(samples, landmark_sets)):
        progress(f"extract {index + 1}/{len(samples)}: {sample.image.name}")
        image = read_pnm(sample.image)
        described = describe_image(image, landmarks, reference, feature)
        for name, vector in described.items():
            rows[name].append(vector)
    blocks = {name: np.vstack(vectors) for name, vectors in rows.items()}
    return FeatureSet(
        blocks=blocks,
        labels=tuple(s.label for s in samples),
        subjects=tuple(s.subject for s in samples),
        class_names=manifest.class_names,
        reference=reference,
        feature=feature,
        diagnostics=tuple(diagnostics),
    )


def save_features(features: FeatureSet, path: str | Path) -> None:
    entries: dict[str, object] = {
        "kind": "features",
        "classes": " ".join(features.class_names),
        "labels": " ".join(features.labels),
        # subjects may contain spaces; tabs separate them
        "subjects": "\t".join(features.subjects),
        "blocks": " ".join(sorted(features.blocks)),
        "reference": features.reference.points,
        "feature_descriptors": " ".join(features.feature.descriptors),
        "feature_grid": features.feature.grid,
        "feature_hog_bins": features.feature.hog_bins,
        "diagnostic_count": len(features.diagnostics),
    }
    for index, note in enumerate(features.diagnostics):
        entries[f"diagnostic{index}"] = note
    for name in sorted(features.blocks):
        entries[f"block_{name}"] = np.asarray(features.blocks[name], dtype=np.float64)
    write_store(entries, path)


def load_features(path: str | Path) -> FeatureSet:
    entries = read_store(path)
    if entries.get("kind") != "features":
        raise ValueError(f"{path} is not a feature cache")
    block_names = str(entries["blocks"]).split()
    return FeatureSet(
        blocks={name: entries[f"block_{name}"] for name in block_names},
        labels=tuple(str(entries["labels"]).split()),
        subjects=tuple(str(entries["subjects"]).split("\t")),
        class_names=tuple(str(entries["classes"]).split()),
        reference=LandmarkSet(entries["reference"]),
        feature=FeatureParams(
            descriptors=tuple(str(entries["feature_descriptors"]).split()),
            grid=int(entries["feature_grid"]),
            hog_bins=int(entries["feature_hog_bins"]),
        ),
        diagnostics=tuple(
            str(entries[f"diagnostic{i}"])
            for i in range(int(entries.get("diagnostic_count", 0)))
        ),
    )
