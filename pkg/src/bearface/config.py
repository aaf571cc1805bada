"""Run configuration: one validated, versioned key-value file.

Every tunable of the pipeline lives here, and every report echoes the
resolved configuration so results stay reproducible. Unknown keys are
rejected rather than ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .kernels import AutoRbf, KernelPlan, PolyKernel, RbfKernel

_MAGIC = "bearface-config"
_VERSION = "1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Resolved pipeline settings; defaults make a runnable configuration."""

    seed: int = 0
    descriptors: tuple[str, ...] = ("lbph", "hog")
    grid: int = 8                    # windows per image side
    hog_bins: int = 59
    pca_energy: float = 0.95
    kernels: tuple[str, ...] = ("rbf", "poly")
    rbf_gamma: float | str = "auto"  # positive float or 'auto'
    poly_degree: int = 2
    poly_offset: float = 1.0
    poly_scale: float = 1.0
    svm_c: float = 10.0
    include_bias: bool = True
    cv_folds: int = 10
    cv_scheme: str = "random"
    frame_rate: float = 85.0
    bandwidth_scale: float = 1.0
    closure_margin: float = 0.4
    mode: str = "au-animal"
    viseme_table: str = "builtin"
    templates: str = "builtin"
    debounce: int = 3
    transition_duration: float = 1.5
    hold_duration: float = 1.0
    preview_frames: bool = False

    def __post_init__(self) -> None:
        if any(d not in ("lbph", "hog") for d in self.descriptors) or not self.descriptors:
            raise ConfigError(f"descriptors must be from lbph/hog, got {self.descriptors}")
        if any(k not in ("rbf", "poly") for k in self.kernels) or not self.kernels:
            raise ConfigError(f"kernels must be from rbf/poly, got {self.kernels}")
        if isinstance(self.rbf_gamma, str) and self.rbf_gamma != "auto":
            raise ConfigError(f"rbf_gamma must be a number or 'auto', got {self.rbf_gamma!r}")
        if self.cv_scheme not in ("random", "person-independent"):
            raise ConfigError(f"cv_scheme must be random or person-independent")
        if self.mode not in ("au", "au-animal"):
            raise ConfigError(f"mode must be au or au-animal, got {self.mode!r}")
        for name in ("pca_energy", "svm_c", "frame_rate", "bandwidth_scale",
                     "transition_duration", "hold_duration"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not (0.0 < self.pca_energy <= 1.0):
            raise ConfigError("pca_energy must be in (0, 1]")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be at least 2")
        if self.grid < 1 or self.hog_bins < 1 or self.debounce < 1:
            raise ConfigError("grid, hog_bins and debounce must be at least 1")
        if self.closure_margin < 0:
            raise ConfigError("closure_margin must be nonnegative")

    def kernel_plans(self) -> list[tuple[str, KernelPlan]]:
        """(block, kernel) bank entries: every kernel on every descriptor."""
        plans: list[tuple[str, KernelPlan]] = []
        for block in self.descriptors:
            for kind in self.kernels:
                if kind == "rbf":
                    plan: KernelPlan = (
                        AutoRbf()
                        if self.rbf_gamma == "auto"
                        else RbfKernel(float(self.rbf_gamma))
                    )
                else:
                    plan = PolyKernel(
                        degree=self.poly_degree,
                        offset=self.poly_offset,
                        scale=self.poly_scale,
                    )
                plans.append((block, plan))
        return plans

    def to_lines(self) -> list[str]:
        """Canonical echo of every setting, in declaration order."""
        out = [f"{_MAGIC} {_VERSION}"]
        for spec in fields(self):
            value = getattr(self, spec.name)
            out.append(f"{spec.name} = {_format_value(value)}")
        return out


def _format_value(value: object) -> str:
    if isinstance(value, tuple):
        return " ".join(str(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def _parse_value(name: str, raw: str, kind: type) -> object:
    raw = raw.strip()
    try:
        if kind is bool:
            return _BOOL[raw.lower()]
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is tuple:
            return tuple(raw.split())
        return raw
    except (KeyError, ValueError):
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    lines = text.splitlines()
    if not lines or lines[0].split() != [_MAGIC, _VERSION]:
        raise ConfigError(f"config must start with '{_MAGIC} {_VERSION}'")
    field_types = {
        "seed": int, "descriptors": tuple, "grid": int, "hog_bins": int,
        "pca_energy": float, "kernels": tuple, "rbf_gamma": str,
        "poly_degree": int, "poly_offset": float, "poly_scale": float,
        "svm_c": float, "include_bias": bool, "cv_folds": int,
        "cv_scheme": str, "frame_rate": float, "bandwidth_scale": float,
        "closure_margin": float, "mode": str, "viseme_table": str,
        "templates": str, "debounce": int, "transition_duration": float,
        "hold_duration": float, "preview_frames": bool,
    }
    updates: dict[str, object] = {}
    for number, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {number}: expected 'key = value'")
        if key not in field_types:
            raise ConfigError(f"line {number}: unknown configuration key {key!r}")
        if key in updates:
            raise ConfigError(f"line {number}: duplicate key {key!r}")
        parsed = _parse_value(key, value, field_types[key])
        if key == "rbf_gamma" and parsed != "auto":
            parsed = _parse_value(key, str(parsed), float)
        updates[key] = parsed
    return replace(base or RunConfig(), **updates)


def load_config(path: str | Path | None = None, base: RunConfig | None = None) -> RunConfig:
    """Config from a file, or the defaults when no path is given."""
    if path is None:
        return base or RunConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"), base)


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text("\n".join(config.to_lines()) + "\n", encoding="utf-8")
