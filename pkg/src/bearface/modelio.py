"""Persistence of trained classifier bundles.

A bundle carries everything classification of a fresh image needs: the
pairwise classifiers with their kernel weights and support vectors, the
per-block PCA models, the registration reference shape and the descriptor
settings used at extraction time. Arrays are stored as raw bytes, so a
save/load round trip is bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arraystore import read_store, write_store
from .kernels import format_kernel, parse_kernel
from .multiclass import BankEntry, MulticlassModel, PairClassifier
from .pca import PcaModel
from .registration import LandmarkSet


@dataclass(frozen=True)
class FeatureParams:
    """Descriptor settings that must match between extraction and inference."""

    descriptors: tuple[str, ...]  # subset of ("lbph", "hog")
    grid: int = 8
    hog_bins: int = 59

    def __post_init__(self) -> None:
        known = {"lbph", "hog"}
        bad = [d for d in self.descriptors if d not in known]
        if bad or not self.descriptors:
            raise ValueError(f"descriptors must be a non-empty subset of {known}")


@dataclass(frozen=True)
class ModelBundle:
    """A trained model plus its preprocessing context."""

    model: MulticlassModel
    reference: LandmarkSet | None = None
    feature: FeatureParams | None = None


def save_model(bundle: ModelBundle, path: str | Path) -> None:
    model = bundle.model
    entries: dict[str, object] = {
        "kind": "model",
        "classes": " ".join(model.class_names),
        "include_bias": int(model.include_bias),
        "bank_count": len(model.bank),
    }
    for m, entry in enumerate(model.bank):
        entries[f"bank{m}_block"] = entry.block
        entries[f"bank{m}_spec"] = format_kernel(entry.spec)
    entries["pca_blocks"] = " ".join(sorted(model.pca))
    for name in sorted(model.pca):
        pca = model.pca[name]
        entries[f"pca_{name}_mean"] = pca.mean
        entries[f"pca_{name}_components"] = pca.components
        entries[f"pca_{name}_variances"] = pca.variances
        entries[f"pca_{name}_retained"] = pca.retained
        entries[f"pca_{name}_energy"] = pca.energy
    entries["pair_count"] = len(model.pairs)
    for p, pair in enumerate(model.pairs):
        entries[f"pair{p}_a"] = pair.class_a
        entries[f"pair{p}_b"] = pair.class_b
        entries[f"pair{p}_bias"] = pair.bias
        entries[f"pair{p}_C"] = pair.C
        entries[f"pair{p}_weights"] = pair.kernel_weights
        entries[f"pair{p}_alphas"] = pair.sv_alphas
        entries[f"pair{p}_labels"] = pair.sv_labels
        for block in sorted(pair.sv_features):
            entries[f"pair{p}_sv_{block}"] = np.asarray(
                pair.sv_features[block], dtype=np.float64
            )
    if bundle.reference is not None:
        entries["reference"] = bundle.reference.points
    if bundle.feature is not None:
        entries["feature_descriptors"] = " ".join(bundle.feature.descriptors)
        entries["feature_grid"] = bundle.feature.grid
        entries["feature_hog_bins"] = bundle.feature.hog_bins
    write_store(entries, path)


def save_pca(model: PcaModel, path: str | Path) -> None:
    """Persist one PCA model on its own (outside a classifier bundle)."""
    write_store(
        {
            "kind": "pca",
            "mean": model.mean,
            "components": model.components,
            "variances": model.variances,
            "retained": model.retained,
            "energy": model.energy,
        },
        path,
    )


def load_pca(path: str | Path) -> PcaModel:
    entries = read_store(path)
    if entries.get("kind") != "pca":
        raise ValueError(f"{path} is not a stored PCA model")
    return PcaModel(
        mean=entries["mean"],
        components=entries["components"],
        variances=entries["variances"],
        retained=float(entries["retained"]),
        energy=float(entries["energy"]),
    )


def load_model(path: str | Path) -> ModelBundle:
    entries = read_store(path)
    if entries.get("kind") != "model":
        raise ValueError(f"{path} is not a model bundle")
    class_names = tuple(str(entries["classes"]).split())
    bank = tuple(
        BankEntry(
            block=str(entries[f"bank{m}_block"]),
            spec=parse_kernel(str(entries[f"bank{m}_spec"])),
        )
        for m in range(int(entries["bank_count"]))
    )
    pca = {}
    pca_blocks = str(entries.get("pca_blocks", "")).split()
    for name in pca_blocks:
        pca[name] = PcaModel(
            mean=entries[f"pca_{name}_mean"],
            components=entries[f"pca_{name}_components"],
            variances=entries[f"pca_{name}_variances"],
            retained=float(entries[f"pca_{name}_retained"]),
            energy=float(entries[f"pca_{name}_energy"]),
        )
    blocks = sorted({entry.block for entry in bank})
    pairs = []
    for p in range(int(entries["pair_count"])):
        pairs.append(
            PairClassifier(
                class_a=int(entries[f"pair{p}_a"]),
                class_b=int(entries[f"pair{p}_b"]),
                kernel_weights=entries[f"pair{p}_weights"],
                bias=float(entries[f"pair{p}_bias"]),
                sv_alphas=entries[f"pair{p}_alphas"],
                sv_labels=entries[f"pair{p}_labels"],
                sv_features={
                    block: entries[f"pair{p}_sv_{block}"] for block in blocks
                },
                C=float(entries[f"pair{p}_C"]),
            )
        )
    model = MulticlassModel(
        class_names=class_names,
        bank=bank,
        pairs=tuple(pairs),
        pca=pca,
        include_bias=bool(int(entries["include_bias"])),
    )
    reference = None
    if "reference" in entries:
        reference = LandmarkSet(entries["reference"])
    feature = None
    if "feature_descriptors" in entries:
        feature = FeatureParams(
            descriptors=tuple(str(entries["feature_descriptors"]).split()),
            grid=int(entries["feature_grid"]),
            hog_bins=int(entries["feature_hog_bins"]),
        )
    return ModelBundle(model=model, reference=reference, feature=feature)
