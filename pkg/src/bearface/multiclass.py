"""One-vs-one multiclass classification with max-wins voting.

P classes give P(P-1)/2 pairwise binary classifiers, each trained with its
own kernel weights on the samples of its two classes. A query is scored by
every pair; each pair votes for its sign winner and the class with the
most votes is predicted. Vote ties break on the larger sum of winning
decision magnitudes, then on the lower class index.

Features arrive as named blocks (e.g. separate LBPH and HOG vectors); the
kernel bank lists (block, kernel) combinations, and those entries are the
basis kernels whose weights each pair learns.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .expressions import CLASS_ORDER
from .kernels import (
    KernelPlan,
    KernelSpec,
    kernel_matrix,
    resolve_kernel,
)
from .mkl import train_binary_mkl
from .pca import PcaModel, fit_pca, pca_project

FeatureBlocks = Mapping[str, np.ndarray]


def _reduce_block(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Project onto the retained components and whiten.

    Whitening keeps the coordinates O(1) regardless of the raw descriptor
    scale; without it histogram-count features (magnitudes in the
    thousands) blow polynomial-kernel entries up to ~1e16 and the dual
    becomes numerically meaningless.
    """
    scales = np.sqrt(np.maximum(model.variances, 1e-12 * model.variances.max()))
    return pca_project(model, x) / scales

_CANONICAL = tuple(e.value for e in CLASS_ORDER)


def order_classes(labels: Sequence[str]) -> tuple[str, ...]:
    """Canonical expression order first, any extra labels sorted after."""
    present = set(labels)
    ordered = [name for name in _CANONICAL if name in present]
    ordered += sorted(present - set(_CANONICAL))
    return tuple(ordered)


@dataclass(frozen=True)
class BankEntry:
    """One basis kernel: which feature block it reads and its spec."""

    block: str
    spec: KernelSpec


@dataclass(frozen=True)
class PairClassifier:
    """Inference payload of one trained pairwise classifier."""

    class_a: int
    class_b: int
    kernel_weights: np.ndarray        # (M,)
    bias: float
    sv_alphas: np.ndarray             # (k,)
    sv_labels: np.ndarray             # (k,) +/-1, +1 means class_a
    sv_features: Mapping[str, np.ndarray]  # block -> (k, d_block)
    C: float

    def __post_init__(self) -> None:
        for name in ("kernel_weights", "sv_alphas", "sv_labels"):
            array = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    def decide(self, bank: Sequence[BankEntry], x_blocks: FeatureBlocks) -> float:
        if self.sv_alphas.size == 0:
            return self.bias  # degenerate classifier: constant decision
        v = self.sv_alphas * self.sv_labels
        total = 0.0
        for weight, entry in zip(self.kernel_weights, bank):
            sv = self.sv_features[entry.block]
            row = kernel_matrix(entry.spec, sv, np.atleast_2d(x_blocks[entry.block]))[:, 0]
            total += float(weight) * float(row @ v)
        return total + self.bias


@dataclass(frozen=True)
class MulticlassModel:
    """All pairwise classifiers plus everything needed to score new samples."""

    class_names: tuple[str, ...]
    bank: tuple[BankEntry, ...]
    pairs: tuple[PairClassifier, ...]
    pca: Mapping[str, PcaModel] = field(default_factory=dict)
    include_bias: bool = True

    def __post_init__(self) -> None:
        P = len(self.class_names)
        expected = {(a, b) for a in range(P) for b in range(a + 1, P)}
        got = {(p.class_a, p.class_b) for p in self.pairs}
        if got != expected:
            raise ValueError(
                f"need exactly one classifier per unordered class pair; "
                f"missing {sorted(expected - got)}, extra {sorted(got - expected)}"
            )

    @property
    def class_count(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class VoteResult:
    """Outcome of max-wins voting for one query."""

    winner: str
    votes: int
    tally: tuple[int, ...]
    decisions: Mapping[tuple[str, str], float]
    class_names: tuple[str, ...]

    @property
    def winner_index(self) -> int:
        return self.class_names.index(self.winner)


def tally_votes(
    class_count: int, decisions: Mapping[tuple[int, int], float]
) -> tuple[np.ndarray, int]:
    """Count pairwise wins and resolve the winner.

    `decisions` maps (a, b) with a < b to the discriminant value; h >= 0 is
    a win for a. Ties on votes break on the larger sum of |h| over won
    pairs, then on the lower class index.
    """
    votes = np.zeros(class_count, dtype=np.int64)
    margin = np.zeros(class_count)
    for (a, b), h in decisions.items():
        winner = a if h >= 0 else b
        votes[winner] += 1
        margin[winner] += abs(h)
    best = 0
    for candidate in range(1, class_count):
        if votes[candidate] > votes[best] or (
            votes[candidate] == votes[best] and margin[candidate] > margin[best]
        ):
            best = candidate
    return votes, best


def train_multiclass(
    blocks: FeatureBlocks,
    labels: Sequence[str],
    bank_plans: Sequence[tuple[str, KernelPlan]],
    C: float = 10.0,
    *,
    class_names: Sequence[str] | None = None,
    pca_energy: float | None = None,
    include_bias: bool = True,
) -> MulticlassModel:
    """Train every pairwise classifier over the feature blocks.

    Kernel plans resolve against the training data (auto RBF widths use the
    full training set of their block). With `pca_energy` set, each block is
    reduced first and the projections are stored in the model so queries go
    through the same mapping.
    """
    labels = list(labels)
    n = len(labels)
    if n == 0:
        raise ValueError("empty training set")
    for name, data in blocks.items():
        if data.shape[0] != n:
            raise ValueError(f"block {name!r} has {data.shape[0]} rows, expected {n}")
    names = tuple(class_names) if class_names is not None else order_classes(labels)
    index_of = {name: i for i, name in enumerate(names)}
    unknown = sorted(set(labels) - set(names))
    if unknown:
        raise ValueError(f"labels not in the class set: {unknown}")
    y_index = np.asarray([index_of[label] for label in labels])

    pca_models: dict[str, PcaModel] = {}
    used: dict[str, np.ndarray] = {}
    for name, data in blocks.items():
        data = np.asarray(data, dtype=np.float64)
        if pca_energy is not None:
            model = fit_pca(data, pca_energy)
            pca_models[name] = model
            data = _reduce_block(model, data)
        used[name] = data

    bank = tuple(
        BankEntry(block, resolve_kernel(plan, used[block]))
        for block, plan in bank_plans
    )
    if not bank:
        raise ValueError("kernel bank is empty")
    grams = [kernel_matrix(entry.spec, used[entry.block]) for entry in bank]

    pairs = []
    P = len(names)
    for a in range(P):
        for b in range(a + 1, P):
            mask = (y_index == a) | (y_index == b)
            subset = np.nonzero(mask)[0]
            y = np.where(y_index[subset] == a, 1.0, -1.0)
            pair_grams = [K[np.ix_(subset, subset)] for K in grams]
            solution = train_binary_mkl(
                pair_grams, y, C, class_a=a, class_b=b, include_bias=include_bias
            )
            sv_local = solution.support_indices
            sv_global = subset[sv_local]
            pairs.append(
                PairClassifier(
                    class_a=a,
                    class_b=b,
                    kernel_weights=solution.kernel_weights,
                    bias=solution.bias,
                    sv_alphas=solution.alphas[sv_local],
                    sv_labels=solution.labels[sv_local],
                    sv_features={
                        name: np.ascontiguousarray(data[sv_global])
                        for name, data in used.items()
                    },
                    C=C,
                )
            )
    return MulticlassModel(
        class_names=names,
        bank=bank,
        pairs=tuple(pairs),
        pca=pca_models,
        include_bias=include_bias,
    )


def _apply_pca(model: MulticlassModel, x_blocks: FeatureBlocks) -> dict[str, np.ndarray]:
    out = {}
    for name in {entry.block for entry in model.bank}:
        x = np.asarray(x_blocks[name], dtype=np.float64)
        if name in model.pca:
            x = _reduce_block(model.pca[name], x)
        out[name] = x
    return out


def classify(model: MulticlassModel, x_blocks: FeatureBlocks) -> VoteResult:
    """Score a query with every pairwise classifier and vote."""
    x = _apply_pca(model, x_blocks)
    indexed: dict[tuple[int, int], float] = {}
    named: dict[tuple[str, str], float] = {}
    for pair in model.pairs:
        h = pair.decide(model.bank, x)
        indexed[(pair.class_a, pair.class_b)] = h
        named[(model.class_names[pair.class_a], model.class_names[pair.class_b])] = h
    votes, winner = tally_votes(model.class_count, indexed)
    return VoteResult(
        winner=model.class_names[winner],
        votes=int(votes[winner]),
        tally=tuple(int(v) for v in votes),
        decisions=named,
        class_names=model.class_names,
    )


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CvResult:
    """Confusion counts and overall rate from one cross-validation run."""

    class_names: tuple[str, ...]
    counts: np.ndarray            # (P, P) int, rows true, cols predicted
    fold_notes: tuple[str, ...]   # diagnostics, e.g. skipped folds
    folds: int
    scheme: str

    def __post_init__(self) -> None:
        array = np.ascontiguousarray(self.counts, dtype=np.int64)
        array.setflags(write=False)
        object.__setattr__(self, "counts", array)

    @property
    def percentages(self) -> np.ndarray:
        """Row-normalized confusion matrix in percent."""
        totals = self.counts.sum(axis=1, keepdims=True)
        safe = np.where(totals > 0, totals, 1)
        return 100.0 * self.counts / safe

    @property
    def overall_rate(self) -> float:
        """Overall recognition rate in percent."""
        total = int(self.counts.sum())
        if total == 0:
            return 0.0
        return 100.0 * float(np.trace(self.counts)) / total


def random_folds(
    labels: Sequence[str], folds: int, rng: np.random.Generator
) -> np.ndarray:
    """Stratified fold assignment: shuffle within class, deal round-robin."""
    labels = np.asarray(labels)
    assignment = np.zeros(len(labels), dtype=np.int64)
    for name in sorted(set(labels.tolist())):
        indices = np.nonzero(labels == name)[0]
        rng.shuffle(indices)
        assignment[indices] = np.arange(len(indices)) % folds
    return assignment


def subject_folds(subjects: Sequence[str], folds: int) -> np.ndarray:
    """Whole subjects per fold, dealt in stable hash order of the id."""
    digest = {
        s: hashlib.sha256(s.encode("utf-8")).hexdigest() for s in set(subjects)
    }
    ordered = sorted(digest, key=lambda s: (digest[s], s))
    fold_of = {s: i % folds for i, s in enumerate(ordered)}
    return np.asarray([fold_of[s] for s in subjects], dtype=np.int64)


def cross_validate(
    blocks: FeatureBlocks,
    labels: Sequence[str],
    bank_plans: Sequence[tuple[str, KernelPlan]],
    C: float = 10.0,
    *,
    folds: int = 10,
    scheme: str = "random",
    subjects: Sequence[str] | None = None,
    seed: int = 0,
    pca_energy: float | None = None,
    include_bias: bool = True,
) -> CvResult:
    """K-fold evaluation; training folds never see test samples.

    Under the person-independent scheme whole subjects are held out, so no
    subject appears on both sides of a split. Folds whose training part
    lacks a class are skipped with a diagnostic note. All shuffling flows
    from `seed`.
    """
    labels = list(labels)
    n = len(labels)
    if n < folds:
        raise ValueError(f"need at least {folds} samples for {folds} folds")
    if scheme == "random":
        assignment = random_folds(labels, folds, np.random.default_rng(seed))
    elif scheme == "person-independent":
        if subjects is None:
            raise ValueError("person-independent scheme requires subject ids")
        assignment = subject_folds(subjects, folds)
    else:
        raise ValueError(f"unknown scheme {scheme!r} (random, person-independent)")

    names = order_classes(labels)
    index_of = {name: i for i, name in enumerate(names)}
    counts = np.zeros((len(names), len(names)), dtype=np.int64)
    notes = []
    label_array = np.asarray(labels)
    for fold in range(folds):
        test = np.nonzero(assignment == fold)[0]
        train = np.nonzero(assignment != fold)[0]
        if len(test) == 0:
            notes.append(f"fold {fold}: empty test fold, skipped")
            continue
        train_labels = label_array[train]
        missing = [name for name in names if name not in set(train_labels.tolist())]
        if missing:
            notes.append(
                f"fold {fold}: class {missing[0]!r} absent from training, skipped"
            )
            continue
        train_blocks = {name: data[train] for name, data in blocks.items()}
        model = train_multiclass(
            train_blocks,
            train_labels.tolist(),
            bank_plans,
            C,
            class_names=names,
            pca_energy=pca_energy,
            include_bias=include_bias,
        )
        for index in test:
            sample = {name: data[index] for name, data in blocks.items()}
            result = classify(model, sample)
            counts[index_of[labels[index]], index_of[result.winner]] += 1
    return CvResult(
        class_names=names,
        counts=counts,
        fold_notes=tuple(notes),
        folds=folds,
        scheme=scheme,
    )
