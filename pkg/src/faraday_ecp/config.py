"""Experiment configuration: flat ``key = value`` files merged with CLI flags.

Frequencies are in units of the cavity damping rate kappa unless
``units = mhz``, in which case detuning, g and gamma are ordinary
frequencies in MHz and ``kappa_mhz`` sets the scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .analysis import AXES
from .faraday import ANCHOR_ATOM, ANCHOR_CAVITY, IDEAL_PHASES, REJECT, RENORMALIZE, CavityParams, PhasePair
from .protocols import MAX_PARTIES, PROTOCOLS, PairSpec

FORMATS = ("json", "csv", "text")
CAVITY_KEYS = ("detuning", "detuning_sign", "g", "gamma")
PHASE_KEYS = ("phi", "phi0", "ideal_phases")


@dataclass(frozen=True)
class Violation:
    field: str
    message: str
    source: str = ""

    def __str__(self):
        where = f" ({self.source})" if self.source else ""
        return f"{self.field}{where}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {text!r}")
    return v


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        t = text.strip().lower()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return t

    return parse


def _sign(text: str) -> str:
    t = text.strip()
    mapping = {"+": "+", "+1": "+", "1": "+", "-": "-", "-1": "-", "both": "both"}
    if t not in mapping:
        raise ValueError(f"expected +, - or both, got {text!r}")
    return mapping[t]


FIELDS: dict[str, tuple[Callable[[str], Any], str]] = {
    "protocol": (_choice(*PROTOCOLS), "protocol to run"),
    "N": (int, "parties per side for GHZ protocols"),
    "a1": (_float, "first pair coefficient a1"),
    "b1": (_float, "first pair coefficient b1 (default sqrt(1 - a1^2))"),
    "a2": (_float, "second pair coefficient a2 (default a1)"),
    "b2": (_float, "second pair coefficient b2 (default sqrt(1 - a2^2))"),
    "detuning": (_float, "cavity-atom detuning |omegaC - omega0|"),
    "detuning_sign": (_sign, "sign of omegaC - omega0: +, - or both"),
    "anchor": (_choice(ANCHOR_CAVITY, ANCHOR_ATOM, "both"), "probe sits kappa/2 below the cavity or the atom"),
    "g": (_float, "atom-cavity coupling"),
    "gamma": (_float, "atomic decay rate"),
    "phi": (_float, "explicit coupled-cavity phase (rad)"),
    "phi0": (_float, "explicit empty-cavity phase (rad)"),
    "ideal_phases": (_bool, "use phi = pi, phi0 = pi/2"),
    "units": (_choice("kappa", "mhz"), "frequency units"),
    "kappa_mhz": (_float, "kappa / 2pi in MHz when units = mhz"),
    "loss_mode": (_choice(RENORMALIZE, REJECT), "lossy reflection handling"),
    "acknowledge_loss": (_bool, "allow a non-unitary gate in reject mode"),
    "axis": (_choice(*AXES), "sweep axis"),
    "from": (_float, "sweep start"),
    "to": (_float, "sweep end"),
    "points": (int, "number of sweep points"),
    "k": (_float, "pair deviation a2 = a1 (1 + k)"),
    "trials": (int, "Monte Carlo trials"),
    "seed": (int, "Monte Carlo seed (0 <= seed < 2^64)"),
    "format": (_choice(*FORMATS), "output format"),
    "output": (str, "output file path"),
}

_KEY_ALIASES = {"n": "N", "from_": "from"}


def canonical_key(key: str) -> str:
    k = key.strip().replace("-", "_")
    return _KEY_ALIASES.get(k, k)


@dataclass
class ExperimentConfig:
    protocol: str = "atomic"
    N: int = 1
    pair1: PairSpec = field(default_factory=lambda: PairSpec(1 / math.sqrt(2)))
    pair2: PairSpec = field(default_factory=lambda: PairSpec(1 / math.sqrt(2)))
    phases: PhasePair = IDEAL_PHASES
    cavity: CavityParams | None = None
    detuning: float = 0.0
    signs: tuple[int, ...] | None = None
    anchors: tuple[str, ...] = (ANCHOR_CAVITY,)
    g: float = 0.5
    gamma: float = 0.0
    loss_mode: str = RENORMALIZE
    acknowledge_loss: bool = False
    axis: str | None = None
    sweep_from: float | None = None
    sweep_to: float | None = None
    points: int = 50
    k: float = 0.0
    trials: int | None = None
    seed: int | None = None
    format: str = "json"
    output: Path | None = None

    @property
    def a1(self) -> float:
        return self.pair1.a


Raw = dict[str, tuple[str, str]]


def read_config_file(path: str | Path) -> Raw:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw: Raw = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError([Violation("<syntax>", f"expected 'key = value', got {body!r}", f"{path}:{lineno}")])
        key, value = body.split("=", 1)
        raw[canonical_key(key)] = (value.strip(), f"{path}:{lineno}")
    return raw


def _parse_fields(raw: Raw) -> tuple[dict[str, Any], dict[str, str], list[Violation]]:
    values: dict[str, Any] = {}
    sources: dict[str, str] = {}
    problems: list[Violation] = []
    for key, (text, source) in raw.items():
        if key not in FIELDS:
            problems.append(Violation(key, "unknown key", source))
            continue
        parse = FIELDS[key][0]
        try:
            values[key] = parse(text)
        except ValueError as exc:
            problems.append(Violation(key, str(exc), source))
            continue
        sources[key] = source
    return values, sources, problems


def _pair(a: float | None, b: float | None, name: str, src: Callable[[str], str]) -> tuple[PairSpec | None, list[Violation]]:
    if a is None:
        return None, [Violation(f"a{name}", "coefficient missing", src(f"a{name}"))]
    if not 0 < a < 1:
        return None, [Violation(f"a{name}", f"coefficient must lie in (0, 1), got {a}", src(f"a{name}"))]
    if b is not None:
        if b <= 0:
            return None, [Violation(f"b{name}", f"coefficient must be positive, got {b}", src(f"b{name}"))]
        total = a * a + b * b
        if abs(total - 1) > 1e-6:
            return None, [
                Violation(
                    f"b{name}",
                    f"normalization a{name}^2 + b{name}^2 = 1 violated (got {total:.12g})",
                    src(f"b{name}"),
                )
            ]
    return PairSpec(a, b), []


def build_config(raw: Raw) -> ExperimentConfig:
    """Turn raw key/value strings into a validated config or raise ConfigError."""
    values, sources, problems = _parse_fields(raw)
    src = lambda key: sources.get(key, "")  # noqa: E731
    cfg = ExperimentConfig()

    cfg.protocol = values.get("protocol", cfg.protocol)
    cfg.N = values.get("N", 1)
    ghz = cfg.protocol.endswith("ghz")
    if not 1 <= cfg.N <= MAX_PARTIES:
        problems.append(Violation("N", f"party count must lie in [1, {MAX_PARTIES}], got {cfg.N}", src("N")))
    elif cfg.N != 1 and not ghz:
        problems.append(Violation("N", f"N={cfg.N} needs a GHZ protocol, not {cfg.protocol}", src("N")))

    a1 = values.get("a1", 1 / math.sqrt(2))
    a2 = values.get("a2", a1)
    p1, v1 = _pair(a1, values.get("b1"), "1", src)
    p2, v2 = _pair(a2, values.get("b2"), "2", src)
    problems += v1 + v2
    if p1 is not None:
        cfg.pair1 = p1
    if p2 is not None:
        cfg.pair2 = p2

    units = values.get("units", "kappa")
    scale = 1.0
    if units == "mhz":
        kappa_mhz = values.get("kappa_mhz")
        if kappa_mhz is None or kappa_mhz <= 0:
            problems.append(Violation("kappa_mhz", "a positive kappa_mhz is required when units = mhz", src("kappa_mhz") or src("units")))
        else:
            scale = 1.0 / kappa_mhz
    elif "kappa_mhz" in values:
        problems.append(Violation("kappa_mhz", "only meaningful with units = mhz", src("kappa_mhz")))

    cavity_given = [k for k in CAVITY_KEYS if k in values]
    phase_given = [k for k in PHASE_KEYS if k in values and values[k] is not False]
    if cavity_given and phase_given:
        problems.append(
            Violation(
                phase_given[0],
                f"give either cavity parameters ({', '.join(cavity_given)}) or explicit phases, not both",
                src(phase_given[0]),
            )
        )

    cfg.detuning = values.get("detuning", 0.0) * scale
    cfg.g = values.get("g", 0.5 / scale) * scale
    cfg.gamma = values.get("gamma", 0.0) * scale
    if cfg.detuning < 0:
        problems.append(Violation("detuning", "give the magnitude; use detuning_sign for the sign", src("detuning")))
    if cfg.g < 0:
        problems.append(Violation("g", f"coupling must be non-negative, got {cfg.g}", src("g")))
    if cfg.gamma < 0:
        problems.append(Violation("gamma", f"decay rate must be non-negative, got {cfg.gamma}", src("gamma")))
    sign = values.get("detuning_sign")
    if sign is not None:
        cfg.signs = (1, -1) if sign == "both" else ((1,) if sign == "+" else (-1,))
    anchor = values.get("anchor", ANCHOR_CAVITY)
    cfg.anchors = (ANCHOR_CAVITY, ANCHOR_ATOM) if anchor == "both" else (anchor,)

    if "phi" in values or "phi0" in values:
        if "phi" not in values or "phi0" not in values:
            missing = "phi0" if "phi" in values else "phi"
            problems.append(Violation(missing, "explicit phases need both phi and phi0", src("phi") or src("phi0")))
        elif values.get("ideal_phases"):
            problems.append(Violation("ideal_phases", "conflicts with explicit phi/phi0", src("ideal_phases")))
        else:
            cfg.phases = PhasePair(values["phi"], values["phi0"])
    elif not phase_given and not problems:
        try:
            cfg.cavity = CavityParams.detuned(cfg.detuning, (cfg.signs or (1,))[0], cfg.anchors[0], g=cfg.g, gamma=cfg.gamma)
        except ValueError as exc:
            problems.append(Violation("cavity", str(exc)))

    cfg.loss_mode = values.get("loss_mode", RENORMALIZE)
    cfg.acknowledge_loss = values.get("acknowledge_loss", False)

    cfg.axis = values.get("axis")
    cfg.sweep_from = values.get("from")
    cfg.sweep_to = values.get("to")
    cfg.points = values.get("points", 50)
    if cfg.points < 1:
        problems.append(Violation("points", f"need at least one sweep point, got {cfg.points}", src("points")))
    if cfg.sweep_from is not None and cfg.sweep_to is not None and cfg.points > 1 and cfg.sweep_from == cfg.sweep_to:
        problems.append(Violation("to", "sweep range is empty (from == to)", src("to")))
    cfg.k = values.get("k", 0.0)
    if not 0 < cfg.pair1.a * (1 + cfg.k) < 1:
        problems.append(Violation("k", f"a1 (1 + k) = {cfg.pair1.a * (1 + cfg.k):.6g} must lie in (0, 1)", src("k")))

    cfg.trials = values.get("trials")
    if cfg.trials is not None and cfg.trials < 1:
        problems.append(Violation("trials", f"need at least one trial, got {cfg.trials}", src("trials")))
    cfg.seed = values.get("seed")
    if cfg.seed is not None and not 0 <= cfg.seed < 2**64:
        problems.append(Violation("seed", "seed must lie in [0, 2^64)", src("seed")))

    cfg.format = values.get("format", "json")
    if "output" in values:
        cfg.output = Path(values["output"])
        parent = cfg.output.parent if str(cfg.output.parent) else Path(".")
        if not parent.is_dir():
            problems.append(Violation("output", f"directory {parent} does not exist", src("output")))

    if problems:
        raise ConfigError(problems)
    return cfg


def validate(raw: Raw) -> list[Violation]:
    """Every violated invariant in ``raw``; an empty list means the config is usable."""
    try:
        build_config(raw)
    except ConfigError as exc:
        return exc.violations
    return []
