"""The canonical 80-column feature registry and feature-set masks."""
from __future__ import annotations

import numpy as np


def _duration_names() -> list[str]:
    names = []
    for kind in ("voiced", "unvoiced"):
        names += [f"dur_{kind}_mean", f"dur_{kind}_max", f"dur_{kind}_min", f"dur_{kind}_pct"]
        names += [f"dur_{kind}_hist{i}" for i in range(6)]
        names.append(f"dur_{kind}_slope")
    return names


DURATION = _duration_names()
ENERGY = ["energy_mean", "energy_std", "denergy_mean", "denergy_std"]
CENTROID = ["centroid_mean", "centroid_std"]
MFCC = [f"mfcc{i:02d}_mean" for i in range(1, 13)] + [f"mfcc{i:02d}_std" for i in range(1, 13)]
ACOUSTIC = ["pitch_mean", "pitch_std", "pitch_max", "pitch_min",
            "intensity_mean", "intensity_std", "intensity_max", "intensity_min",
            "period_mean", "period_std", "rms"]
VOICE_QUALITY = ["jitter_local", "shimmer_local", "nhr", "hnr", "autocorr_mean"]
DURATION_RATIOS = ["unvoiced_frame_pct", "voice_break_degree"]
CFD = ["cfd_mean", "cfd_std", "cfd_max", "cfd_min", "cfd_global"]
PE = ["pe3_mean", "pe3_std", "pe5_mean", "pe5_std", "pe5_global"]

LINEAR = DURATION + ENERGY + CENTROID + MFCC + ACOUSTIC + VOICE_QUALITY + DURATION_RATIOS
NONLINEAR = CFD + PE
FEATURE_NAMES: tuple[str, ...] = tuple(LINEAR + NONLINEAR)
N_FEATURES = len(FEATURE_NAMES)

FEATURE_SETS = {
    "LF": tuple(LINEAR),
    "LF+CFD": tuple(LINEAR + CFD),
    "LF+CFD+PE": FEATURE_NAMES,
}

assert N_FEATURES == 80 and len(LINEAR) == 70
assert len(set(FEATURE_NAMES)) == N_FEATURES


def feature_set_mask(name: str) -> np.ndarray:
    """Column indices of a feature set, in registry order."""
    try:
        members = set(FEATURE_SETS[name])
    except KeyError:
        raise ValueError(f"unknown feature set {name!r}; expected one of {list(FEATURE_SETS)}")
    return np.array([i for i, n in enumerate(FEATURE_NAMES) if n in members])
