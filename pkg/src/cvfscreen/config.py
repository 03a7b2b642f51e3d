"""Line-oriented ``key = value`` configuration overriding the built-in defaults."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .features_nonlinear import NldConfig
from .svm import SvmConfig
from .vad import VadConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Settings:
    vad: VadConfig = field(default_factory=VadConfig)
    nld: NldConfig = field(default_factory=NldConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    alpha: float = 0.05
    k: int = 10
    seed: int = 0
    workers: int = 1


_SECTIONS = ("vad", "nld", "svm")
_TOP = ("alpha", "k", "seed", "workers")


def _parse_value(raw: str, current):
    raw = raw.strip()
    if isinstance(current, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, tuple):
        return tuple(int(v) for v in raw.replace(",", " ").split())
    return raw


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(str(t) for t in v)
    return str(v)


def apply_overrides(settings: Settings, pairs: list[tuple[str, str]],
                    origin: str = "<config>") -> Settings:
    for key, raw in pairs:
        section, _, name = key.partition(".")
        try:
            if name and section in _SECTIONS:
                sub = getattr(settings, section)
                if name not in {f.name for f in fields(sub)}:
                    raise KeyError(key)
                value = _parse_value(raw, getattr(sub, name))
                settings = replace(settings, **{section: replace(sub, **{name: value})})
            elif not name and section in _TOP:
                settings = replace(settings, **{section: _parse_value(raw, getattr(settings, section))})
            else:
                raise KeyError(key)
        except KeyError:
            raise ConfigError(f"{origin}: unknown setting {key!r}") from None
        except ValueError as exc:
            raise ConfigError(f"{origin}: bad value for {key}: {exc}") from None
    return settings


def parse_config(text: str, origin: str = "<config>") -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        pairs.append((key.strip(), value.strip()))
    return pairs


def load_settings(path: str | Path | None = None) -> Settings:
    settings = Settings()
    if path is None:
        return settings
    p = Path(path)
    return apply_overrides(settings, parse_config(p.read_text(), str(p)), str(p))


def dump_settings(settings: Settings) -> str:
    lines = []
    for section in _SECTIONS:
        sub = getattr(settings, section)
        for f in fields(sub):
            lines.append(f"{section}.{f.name} = {_format_value(getattr(sub, f.name))}")
    for name in _TOP:
        lines.append(f"{name} = {_format_value(getattr(settings, name))}")
    return "\n".join(lines) + "\n"
