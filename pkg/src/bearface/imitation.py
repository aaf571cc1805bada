"""Mirroring a recognized expression back onto the face.

The recognizer's vote count doubles as a confidence signal: it maps
linearly onto a single intensity that drives both the mechanical pose and
the mouth expression channel. With P classes the map is
(2 * votes - P + 1) / (P - 1), clamped to [0, 1], so a bare majority of
(P - 1) / 2 wins produces a neutral-intensity response and a sweep of all
P - 1 matches the full expression.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .diagnostics import VoteRangeWarning
from .dof import Pose
from .expressions import (
    Expression,
    Mode,
    TemplateSet,
    expression_target,
    oscillating_pose,
    pose_for,
    trajectory,
)
from .lipsync import DEFAULT_FRAME_RATE, MorphWeights, blend_expression, silence_frame
from .multiclass import VoteResult


@dataclass(frozen=True)
class ImitationCommand:
    """One retargeting decision: which expression, how strongly, when."""

    expression: Expression
    intensity: float
    mode: Mode
    timestamp: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.intensity <= 1.0):
            raise ValueError(f"intensity {self.intensity} outside [0, 1]")


def vote_to_intensity(votes: int, class_count: int) -> float:
    """Map a winner's vote count to a shared expression intensity.

    Strictly increasing in the vote count before clamping. A count above
    the one-vs-one maximum of P - 1 raises a VoteRangeWarning and clamps.
    """
    if class_count < 2:
        raise ValueError(f"need at least 2 classes, got {class_count}")
    if votes < 0:
        raise ValueError(f"vote count must be nonnegative, got {votes}")
    if votes > class_count - 1:
        warnings.warn(
            f"vote count {votes} exceeds the one-vs-one maximum "
            f"{class_count - 1}; clamping",
            VoteRangeWarning,
            stacklevel=2,
        )
    intensity = (2.0 * votes - class_count + 1.0) / (class_count - 1.0)
    return min(1.0, max(0.0, intensity))


def imitate(
    result: VoteResult,
    templates: TemplateSet,
    *,
    mode: Mode = Mode.AU_ANIMAL,
    start_pose: Pose | None = None,
    frame_rate: float = DEFAULT_FRAME_RATE,
    transition_duration: float = 1.5,
    hold_duration: float = 1.0,
) -> tuple[list[tuple[float, Pose]], list[MorphWeights]]:
    """Pose trajectory and mouth frames mirroring a recognition result.

    One intensity, derived from the vote count, drives both outputs: the
    mechanical axes sweep from `start_pose` (default neutral) to the
    template pose at that intensity over `transition_duration`, then hold
    for `hold_duration` (with the ear wiggle running if the template uses
    it). Mouth frames are silence frames carrying the expression offset at
    the same intensity; a neutral winner produces a neutral pose and no
    offset.
    """
    try:
        expression = Expression(result.winner)
    except ValueError:
        raise ValueError(f"unknown expression label {result.winner!r}") from None
    intensity = vote_to_intensity(result.votes, len(result.class_names))
    template = templates.get(expression, mode)
    neutral = expression is Expression.NEUTRAL
    level = 0.0 if neutral else intensity

    target = pose_for(template, level)
    start = start_pose if start_pose is not None else templates.neutral_pose
    frames = trajectory(start, target, transition_duration, frame_rate)

    hold_count = int(hold_duration * frame_rate)
    for k in range(1, hold_count + 1):
        t_hold = k / frame_rate
        pose = (
            oscillating_pose(template, level, t_hold)
            if template.uses_ear_oscillation and level > 0
            else target
        )
        frames.append((transition_duration + t_hold, pose))

    morphs = []
    for t, _ in frames:
        frame = silence_frame(t)
        if not neutral:
            frame = blend_expression(frame, expression_target(expression), level)
        morphs.append(frame)
    return frames, morphs


@dataclass(frozen=True)
class ImitationRecord:
    """One emitted command plus its trigger, for offline analysis."""

    timestamp: float
    winner: str
    votes: int
    intensity: float
    pose: Pose


class ImitationSession:
    """Debounced consumer of per-frame recognition results.

    Re-targets only after `debounce` consecutive identical winners, which
    keeps the face from chattering on noisy frame-by-frame classifications.
    Feed results in time order from a single thread.
    """

    def __init__(
        self,
        templates: TemplateSet,
        *,
        mode: Mode = Mode.AU_ANIMAL,
        debounce: int = 3,
        frame_rate: float = DEFAULT_FRAME_RATE,
        transition_duration: float = 1.5,
        hold_duration: float = 1.0,
    ):
        if debounce < 1:
            raise ValueError("debounce must be at least 1")
        self.templates = templates
        self.mode = mode
        self.debounce = debounce
        self.frame_rate = frame_rate
        self.transition_duration = transition_duration
        self.hold_duration = hold_duration
        self.current_pose = templates.neutral_pose
        self.current_expression: Expression | None = None
        self._streak_winner: str | None = None
        self._streak = 0
        self.records: list[ImitationRecord] = []
        self.commands: list[ImitationCommand] = []

    def consume(
        self, result: VoteResult, timestamp: float
    ) -> tuple[list[tuple[float, Pose]], list[MorphWeights]] | None:
        """Feed one recognition result; returns the emitted motion, if any."""
        if result.winner == self._streak_winner:
            self._streak += 1
        else:
            self._streak_winner = result.winner
            self._streak = 1
        if self._streak < self.debounce:
            return None
        expression = Expression(result.winner)
        if expression is self.current_expression:
            return None
        frames, morphs = imitate(
            result,
            self.templates,
            mode=self.mode,
            start_pose=self.current_pose,
            frame_rate=self.frame_rate,
            transition_duration=self.transition_duration,
            hold_duration=self.hold_duration,
        )
        self.current_expression = expression
        self.current_pose = frames[-1][1] if expression is not Expression.NEUTRAL else (
            self.templates.neutral_pose
        )
        intensity = vote_to_intensity(result.votes, len(result.class_names))
        self.commands.append(
            ImitationCommand(
                expression=expression,
                intensity=0.0 if expression is Expression.NEUTRAL else intensity,
                mode=self.mode,
                timestamp=timestamp,
            )
        )
        self.records.append(
            ImitationRecord(
                timestamp=timestamp,
                winner=result.winner,
                votes=result.votes,
                intensity=intensity,
                pose=frames[-1][1],
            )
        )
        return frames, morphs


def write_imitation_log(records: Iterable[ImitationRecord], path: str | Path) -> None:
    """Line-delimited JSON: timestamp, winner, votes, intensity, pose."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(
                json.dumps(
                    {
                        "t": record.timestamp,
                        "winner": record.winner,
                        "votes": record.votes,
                        "intensity": record.intensity,
                        "pose": list(record.pose.values),
                    },
                    sort_keys=True,
                )
                + "\n"
            )
