"""Named parameters: fibonacci, wild, feigenbaum, chebyshev.

Each non-trivial preset is a stored dyadic parameter inside the cylinder of a
long cutting-time prefix (regenerate with ``scripts/compute_presets.py``).
On use, the prefix needed for the requested orbit length is re-certified; if
the stored value is missing or fails, the parameter is searched for again by
bisection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Dict, List

from .errors import ConfigError
from .kneading import _compare_at, parameter_bisection, wild_cutting_times, word_from_S
from .map_core import MapSpec

NAMES = ("fibonacci", "wild", "feigenbaum", "chebyshev")


def target_cutting_times(kind: str, K: int) -> List[int]:
    """S_0..S_K of the named combinatorics."""
    if kind == "fibonacci":
        S = [1, 2]
        while len(S) <= K:
            S.append(S[-1] + S[-2])
        return S[: K + 1]
    if kind == "wild":
        return wild_cutting_times(K + 3)[: K + 1]
    if kind == "feigenbaum":
        return [2**k for k in range(K + 1)]
    raise ConfigError(f"no cutting-time target for preset {kind!r}")


@dataclass(frozen=True)
class Preset:
    name: str
    a: Fraction
    ell: Fraction
    K: int  # cutting times certified up to S_K when generated
    S_K: int

    @property
    def map(self) -> MapSpec:
        return MapSpec(self.a, self.ell)


@lru_cache(maxsize=1)
def _stored() -> Dict[str, dict]:
    try:
        text = resources.files("unimodal_complexity").joinpath("data/presets.json").read_text()
    except (FileNotFoundError, ModuleNotFoundError):
        return {}
    return json.loads(text)


def _needed_K(kind: str, orbit_length: int, K_max: int) -> int:
    S = target_cutting_times(kind, K_max)
    for k, s in enumerate(S):
        if s > orbit_length + 1:
            return k
    return K_max


@lru_cache(maxsize=32)
def preset(name: str, orbit_length: int = 0, verify: bool = True, prec_cap: int = 8192) -> Preset:
    """The named preset, with the cutting times certified beyond the orbit
    length (so the stored combinatorics hold on the whole orbit used)."""
    if name not in NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(NAMES)}")
    if name == "chebyshev":
        return Preset(name, Fraction(1), Fraction(2), 0, 1)
    entry = _stored().get(name)
    K_max = int(entry["K"]) if entry else 12
    K = _needed_K(name, orbit_length, K_max) if orbit_length else min(K_max, 12)
    S = target_cutting_times(name, K)
    if entry:
        a = Fraction(entry["a"])
        ell = Fraction(entry["ell"])
        if not verify or _compare_at(a, ell, word_from_S(S), 64, prec_cap) == 0:
            return Preset(name, a, ell, K, S[-1])
    enc = parameter_bisection(2, target_S=S, tol=1, prec_cap=prec_cap)
    return Preset(name, enc.a, Fraction(2), K, S[-1])


def preset_map(name: str, orbit_length: int = 0, verify: bool = True) -> MapSpec:
    return preset(name, orbit_length, verify).map
