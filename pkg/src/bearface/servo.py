"""Pose serialization as servo-controller commands.

Targets are pulse widths in quarter-microseconds, sent with the compact
set-target command used by the common 12-channel hobby controllers:

    0x84, channel, low 7 bits of target, high 7 bits of target

Four bytes per axis, ten axes per pose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .dof import ALL_DOFS, Dof, Pose, dof_label

SET_TARGET = 0x84
TARGET_MAX = 0x3FFF  # 14 bits


@dataclass(frozen=True)
class ServoChannel:
    """Calibration of one axis: controller channel and pulse-width range."""

    channel: int
    minimum: int   # quarter-microseconds at normalized position 0
    neutral: int
    maximum: int   # quarter-microseconds at normalized position 1

    def __post_init__(self) -> None:
        if not (0 <= self.channel <= 11):
            raise ValueError(f"channel {self.channel} outside 0..11")
        if not (self.minimum < self.neutral < self.maximum):
            raise ValueError(
                f"channel {self.channel}: need minimum < neutral < maximum, "
                f"got {self.minimum}/{self.neutral}/{self.maximum}"
            )
        if self.minimum < 0 or self.maximum > TARGET_MAX:
            raise ValueError(
                f"channel {self.channel}: pulse range outside 0..{TARGET_MAX}"
            )


@dataclass(frozen=True)
class ServoCalibration:
    """Channel assignment and pulse ranges for all ten axes."""

    channels: Mapping[Dof, ServoChannel]

    def __post_init__(self) -> None:
        missing = [dof_label(d) for d in ALL_DOFS if d not in self.channels]
        if missing:
            raise ValueError(f"calibration missing axes: {', '.join(missing)}")
        numbers = [c.channel for c in self.channels.values()]
        if len(set(numbers)) != len(numbers):
            raise ValueError("calibration reuses a channel number")

    def __getitem__(self, dof: Dof) -> ServoChannel:
        return self.channels[dof]


def default_calibration() -> ServoCalibration:
    """Axes f1..f10 on channels 0..9, symmetric 1000-2000 us range."""
    return ServoCalibration(
        {
            dof: ServoChannel(channel=int(dof) - 1, minimum=4000, neutral=6000, maximum=8000)
            for dof in ALL_DOFS
        }
    )


def pose_target(value: float, channel: ServoChannel) -> int:
    """Pulse-width target for a normalized axis value, nearest quarter-us."""
    return int(round(channel.minimum + value * (channel.maximum - channel.minimum)))


def set_target_command(channel: int, target: int) -> bytes:
    if not (0 <= target <= TARGET_MAX):
        raise ValueError(f"target {target} outside 0..{TARGET_MAX}")
    if not (0 <= channel <= 11):
        raise ValueError(f"channel {channel} outside 0..11")
    return bytes((SET_TARGET, channel, target & 0x7F, (target >> 7) & 0x7F))


def to_servo_commands(pose: Pose, calibration: ServoCalibration) -> bytes:
    """Serialize a pose as one set-target command per axis, f1..f10 order."""
    out = bytearray()
    for dof in ALL_DOFS:
        spec = calibration[dof]
        out += set_target_command(spec.channel, pose_target(pose[dof], spec))
    return bytes(out)


def decode_servo_commands(data: bytes) -> list[tuple[int, int]]:
    """Parse a command stream back into (channel, target) pairs."""
    if len(data) % 4 != 0:
        raise ValueError(f"command stream length {len(data)} is not a multiple of 4")
    decoded = []
    for offset in range(0, len(data), 4):
        opcode, channel, low, high = data[offset : offset + 4]
        if opcode != SET_TARGET:
            raise ValueError(f"unexpected opcode 0x{opcode:02X} at byte {offset}")
        if low & 0x80 or high & 0x80:
            raise ValueError(f"payload byte with high bit set at byte {offset}")
        decoded.append((channel, (high << 7) | low))
    return decoded


def trajectory_to_servo_commands(
    frames: Iterable[tuple[float, Pose]], calibration: ServoCalibration
) -> bytes:
    """Concatenated per-frame command blocks for a pose trajectory."""
    out = bytearray()
    for _, pose in frames:
        out += to_servo_commands(pose, calibration)
    return bytes(out)
