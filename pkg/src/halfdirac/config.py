"""JSON run configuration for the command-line front end."""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .corpus import by_name
from .errors import PreconditionError
from .potential import PROFILES, Potential, Term
from .spectral import PhysicalParams


class ConfigError(PreconditionError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class ScanSettings:
    regions: list[tuple[float, float, float, float]] | None = None
    spectrum_margin: float | None = None
    bs_grid: int = 12
    bs_nodes: int = 64
    level_set_grid: int = 120


@dataclass
class Tolerances:
    enclosure: float = 1e-8
    agreement: float = 1e-6
    real_axis: float = 1e-6

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(self.enclosure * factor, self.agreement * factor, self.real_axis * factor)


@dataclass
class NRSettings:
    z: complex = complex(-1.0, 0.5)
    c_list: list[float] = field(default_factory=lambda: [10.0, 20.0, 40.0, 80.0])
    alphas: list[float] = field(default_factory=lambda: [0.0, math.pi / 4, math.pi / 2])
    branches: list[str] = field(default_factory=lambda: ["+"])
    t: float = -1.0
    magnitudes: list[float] = field(default_factory=lambda: [1e-2, 1e-4, 1e-6, 1e-8])


@dataclass
class RunConfig:
    params: PhysicalParams
    alpha: float
    potential: Potential | None
    scan: ScanSettings
    tolerances: Tolerances
    nrlimit: NRSettings
    fault_radius_scale: float | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def coupling(self) -> float:
        if self.potential is None:
            return 0.0
        return self.potential.moments.l1_norm / self.params.c

    def digest(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


_PI_FRAC = re.compile(r"^\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(value: Any, path: str) -> float:
    """Number, or strings such as ``"pi/4"``, ``"0"``, ``"3pi/8"``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        m = _PI_FRAC.match(value)
        if m:
            num = float(m.group(1)) if m.group(1) else 1.0
            den = float(m.group(2)) if m.group(2) else 1.0
            return num * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(path, f"expected an angle (number or 'pi/k'), got {value!r}")


def _complex(value: Any, path: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(path, f"expected a number or [re, im], got {value!r}")


def _number(d: dict, key: str, path: str, default=None, positive=False) -> float:
    if key not in d:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = d[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", f"expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}", f"must be > 0, got {v}")
    return float(v)


def _term(t: Any, path: str) -> Term:
    if not isinstance(t, dict):
        raise ConfigError(path, "each term must be an object")
    profile = t.get("profile")
    if profile not in PROFILES:
        raise ConfigError(f"{path}.profile", f"expected one of {list(PROFILES)}, got {profile!r}")
    sup = t.get("support")
    if not (isinstance(sup, list) and len(sup) == 2 and all(isinstance(s, (int, float)) for s in sup)):
        raise ConfigError(f"{path}.support", "expected [a, b]")
    if "scalar" in t and "matrix" in t:
        raise ConfigError(path, "give either 'scalar' or 'matrix', not both")
    if "scalar" in t:
        matrix = _complex(t["scalar"], f"{path}.scalar") * np.eye(2)
    elif "matrix" in t:
        rows = t["matrix"]
        if not (isinstance(rows, list) and len(rows) == 2 and all(isinstance(r, list) and len(r) == 2 for r in rows)):
            raise ConfigError(f"{path}.matrix", "expected a 2x2 nested list")
        matrix = np.array([[_complex(rows[i][j], f"{path}.matrix[{i}][{j}]") for j in range(2)] for i in range(2)])
    else:
        raise ConfigError(path, "missing 'scalar' or 'matrix'")
    width = t.get("width")
    centre = t.get("centre")
    try:
        return Term(profile, float(sup[0]), float(sup[1]), matrix, width, centre)
    except PreconditionError as exc:
        raise ConfigError(path, str(exc)) from exc


def _potential(obj: Any, params: PhysicalParams, path: str = "potential") -> Potential | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    if "corpus" in obj:
        try:
            entry = by_name(obj["corpus"])
        except KeyError:
            raise ConfigError(f"{path}.corpus", f"unknown corpus member {obj['corpus']!r}") from None
        v = _number(obj, "v", path)
        return entry.at_coupling(v, params)
    terms = obj.get("terms")
    if not isinstance(terms, list) or not terms:
        raise ConfigError(f"{path}.terms", "expected a non-empty list")
    pot = Potential([_term(t, f"{path}.terms[{i}]") for i, t in enumerate(terms)])
    if "v" in obj:
        pot = pot.with_l1(_number(obj, "v", path, positive=True) * params.c)
    elif "l1_norm" in obj:
        pot = pot.with_l1(_number(obj, "l1_norm", path, positive=True))
    return pot


def _region(r: Any, path: str):
    if not (isinstance(r, list) and len(r) == 4 and all(isinstance(v, (int, float)) for v in r)):
        raise ConfigError(path, "expected [re_lo, re_hi, im_lo, im_hi]")
    return tuple(float(v) for v in r)


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("$", "top level must be an object")
    known = {"params", "alpha", "potential", "v", "hermitian", "scan", "tolerances", "nrlimit",
             "fault_injection", "comment"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, f"unknown field; expected one of {sorted(known)}")
    p = raw.get("params", {})
    if not isinstance(p, dict):
        raise ConfigError("params", "expected an object")
    m, c = _number(p, "m", "params", 1.0), _number(p, "c", "params", 1.0, positive=True)
    try:
        params = PhysicalParams(m, c)
    except PreconditionError as exc:
        raise ConfigError("params", str(exc)) from exc
    alpha = parse_angle(raw.get("alpha", 0.0), "alpha")
    if "v" in raw:
        v = raw["v"]
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0 <= v < math.inf:
            raise ConfigError("v", f"expected a finite number >= 0, got {v!r}")
    if "hermitian" in raw and not isinstance(raw["hermitian"], bool):
        raise ConfigError("hermitian", "expected true or false")
    if not -1e-15 <= alpha <= math.pi / 2 + 1e-15:
        raise ConfigError("alpha", f"must lie in [0, pi/2], got {alpha}")

    s = raw.get("scan", {})
    if not isinstance(s, dict):
        raise ConfigError("scan", "expected an object")
    scan = ScanSettings(
        regions=[_region(r, f"scan.regions[{i}]") for i, r in enumerate(s["regions"])] if "regions" in s else None,
        spectrum_margin=_number(s, "spectrum_margin", "scan", None, positive=True) if "spectrum_margin" in s else None,
        bs_grid=int(_number(s, "bs_grid", "scan", 12, positive=True)),
        bs_nodes=int(_number(s, "bs_nodes", "scan", 64, positive=True)),
        level_set_grid=int(_number(s, "level_set_grid", "scan", 120, positive=True)),
    )
    t = raw.get("tolerances", {})
    if not isinstance(t, dict):
        raise ConfigError("tolerances", "expected an object")
    tol = Tolerances(_number(t, "enclosure", "tolerances", 1e-8, positive=True),
                     _number(t, "agreement", "tolerances", 1e-6, positive=True),
                     _number(t, "real_axis", "tolerances", 1e-6, positive=True))
    n = raw.get("nrlimit", {})
    if not isinstance(n, dict):
        raise ConfigError("nrlimit", "expected an object")
    nr = NRSettings()
    if "z" in n:
        nr.z = _complex(n["z"], "nrlimit.z")
    if "c_list" in n:
        nr.c_list = [float(c) for c in n["c_list"]]
    if "alphas" in n:
        nr.alphas = [parse_angle(a, f"nrlimit.alphas[{i}]") for i, a in enumerate(n["alphas"])]
    if "branches" in n:
        nr.branches = [str(b) for b in n["branches"]]
    if "t" in n:
        nr.t = _number(n, "t", "nrlimit")
    if "magnitudes" in n:
        nr.magnitudes = [float(m) for m in n["magnitudes"]]
    f = raw.get("fault_injection", {})
    fault = _number(f, "radius_scale", "fault_injection", None, positive=True) if "radius_scale" in f else None
    return RunConfig(params, alpha, _potential(raw.get("potential"), params), scan, tol, nr, fault, raw)


def load_config(path: str | Path) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from exc
    return parse_config(raw)
