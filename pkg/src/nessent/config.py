"""Experiment configuration files and CSV output.

Config files are flat UTF-8 ``key = value`` text; ``#`` starts a comment.
Momenta accept simple arithmetic in ``pi`` (for example ``2*pi/3``), list
values are comma separated.  Unknown keys are rejected so typos surface
immediately.  CSV output uses a header row, 12 significant digits for floats
and LF line endings; identical configs produce byte-identical files.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Any

from .scattering import BiasState, ConstantTransmission, ScatteringModel, SingleImpurity, TrivialScatterer

__all__ = ["ParseError", "ExperimentConfig", "parse_config", "parse_config_text", "emit_csv", "format_value"]

SCENARIOS = (
    "sweep-length",
    "sweep-position",
    "sweep-bias",
    "sweep-distance",
    "eval-asymptotics",
    "selftest",
)

MEASURES = ("mi", "ci", "negativity", "entropy")

_KNOWN_KEYS = {
    "scenario",
    "model",
    "epsilon0",
    "eta",
    "transmission",
    "k_fl",
    "k_fr",
    "measures",
    "renyi_orders",
    "out",
    "threads",
    "abs_tol",
    "rel_tol",
    "max_panels",
    "nodes_per_panel",
    "ell_min",
    "ell_max",
    "ell_step",
    "ell",
    "ell_l",
    "ell_r",
    "d_l",
    "d_r",
    "delta_min",
    "delta_max",
    "delta_step",
    "dk_list",
    "d_over_ell_min",
    "d_over_ell_max",
    "n_centers",
    "window",
    "fit_min_d_over_ell",
}


class ParseError(ValueError):
    """Malformed or incomplete configuration."""


def _eval_number(text: str, where: str) -> float:
    """Evaluate a numeric expression limited to + - * / and the constant pi."""
    try:
        node = ast.parse(text, mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"{where}: cannot parse number {text!r}") from exc

    def ev(e) -> float:
        if isinstance(e, ast.Constant) and isinstance(e.value, (int, float)):
            return float(e.value)
        if isinstance(e, ast.Name) and e.id == "pi":
            return math.pi
        if isinstance(e, ast.UnaryOp) and isinstance(e.op, (ast.UAdd, ast.USub)):
            v = ev(e.operand)
            return v if isinstance(e.op, ast.UAdd) else -v
        if isinstance(e, ast.BinOp) and isinstance(e.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            a, b = ev(e.left), ev(e.right)
            if isinstance(e.op, ast.Add):
                return a + b
            if isinstance(e.op, ast.Sub):
                return a - b
            if isinstance(e.op, ast.Mult):
                return a * b
            return a / b
        raise ParseError(f"{where}: unsupported expression {text!r}")

    return ev(node)


@dataclass
class ExperimentConfig:
    scenario: str
    model: str = "single_impurity"
    epsilon0: float = 1.0
    eta: float = 1.0
    transmission: float = 0.5
    k_fl: float = 2.0 * math.pi / 3.0
    k_fr: float = math.pi / 2.0
    measures: tuple[str, ...] = ("mi", "ci", "negativity")
    renyi_orders: tuple[Any, ...] = ("vn",)
    out: str | None = None
    threads: int = 1
    abs_tol: float | None = None
    rel_tol: float | None = None
    max_panels: int | None = None
    nodes_per_panel: int | None = None
    # sweep-length / sweep-bias
    ell_min: int = 20
    ell_max: int = 200
    ell_step: int = 10
    # sweep-position / eval-asymptotics
    ell_l: int = 100
    ell_r: int = 200
    d_l: int = 0
    d_r: int = 0
    delta_min: int = -150
    delta_max: int = 250
    delta_step: int = 5
    # sweep-bias
    dk_list: tuple[float, ...] = ()
    # sweep-distance
    ell: int = 50
    d_over_ell_min: float = 2.0
    d_over_ell_max: float = 40.0
    n_centers: int = 24
    window: int | str = "auto"
    fit_min_d_over_ell: float = 4.0
    raw: dict[str, str] = field(default_factory=dict)

    def build_model(self) -> ScatteringModel:
        if self.model == "single_impurity":
            return SingleImpurity(self.epsilon0, self.eta)
        if self.model == "constant":
            return ConstantTransmission(self.transmission)
        if self.model == "trivial":
            return TrivialScatterer()
        raise ParseError(f"unknown model {self.model!r}")

    def build_bias(self) -> BiasState:
        try:
            return BiasState(self.k_fl, self.k_fr)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc


_REQUIRED: dict[str, tuple[str, ...]] = {
    "sweep-length": ("k_fl", "k_fr", "ell_min", "ell_max"),
    "sweep-position": ("k_fl", "k_fr", "ell_l", "ell_r", "delta_min", "delta_max"),
    "sweep-bias": ("k_fr", "dk_list", "ell_min", "ell_max"),
    "sweep-distance": ("k_fl", "k_fr", "ell", "d_over_ell_min", "d_over_ell_max"),
    "eval-asymptotics": ("k_fl", "k_fr", "ell_l", "ell_r", "d_l", "d_r"),
    "selftest": (),
}

_INT_KEYS = {
    "threads", "max_panels", "nodes_per_panel", "ell_min", "ell_max", "ell_step",
    "ell", "ell_l", "ell_r", "d_l", "d_r", "delta_min", "delta_max", "delta_step",
    "n_centers",
}
_FLOAT_KEYS = {
    "epsilon0", "eta", "transmission", "k_fl", "k_fr", "abs_tol", "rel_tol",
    "d_over_ell_min", "d_over_ell_max", "fit_min_d_over_ell",
}


def parse_config_text(text: str, scenario: str | None = None) -> ExperimentConfig:
    pairs: dict[str, str] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {rawline!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value

    cfg_scenario = pairs.pop("scenario", None)
    if scenario is None:
        scenario = cfg_scenario
    elif cfg_scenario is not None and cfg_scenario != scenario:
        raise ParseError(f"scenario mismatch: config says {cfg_scenario!r}, requested {scenario!r}")
    if scenario is None:
        raise ParseError("missing required key 'scenario'")
    if scenario not in SCENARIOS:
        raise ParseError(f"unknown scenario {scenario!r}")

    cfg = ExperimentConfig(scenario=scenario, raw=dict(pairs))
    for key, value in pairs.items():
        where = f"key {key!r}"
        if key in _INT_KEYS:
            setattr(cfg, key, int(round(_eval_number(value, where))))
        elif key in _FLOAT_KEYS:
            setattr(cfg, key, _eval_number(value, where))
        elif key == "dk_list":
            cfg.dk_list = tuple(_eval_number(part, where) for part in value.split(",") if part.strip())
        elif key == "measures":
            items = tuple(part.strip() for part in value.split(",") if part.strip())
            for item in items:
                if item not in MEASURES:
                    raise ParseError(f"{where}: unknown measure {item!r}")
            cfg.measures = items
        elif key == "renyi_orders":
            orders: list[Any] = []
            for part in value.split(","):
                part = part.strip()
                if not part:
                    continue
                orders.append("vn" if part == "vn" else _eval_number(part, where))
            cfg.renyi_orders = tuple(orders)
        elif key == "window":
            cfg.window = value if value == "auto" else int(round(_eval_number(value, where)))
        elif key in ("model", "out"):
            setattr(cfg, key, value)

    for key in _REQUIRED[scenario]:
        if key not in pairs:
            raise ParseError(f"missing required key {key!r} for scenario {scenario}")
    if cfg.model not in ("single_impurity", "constant", "trivial"):
        raise ParseError(f"unknown model {cfg.model!r}")
    if not cfg.measures:
        raise ParseError("measure list must be non-empty")
    if cfg.scenario != "selftest" and not cfg.renyi_orders:
        raise ParseError("renyi_orders must be non-empty")
    return cfg


def parse_config(path, scenario: str | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), scenario)


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def emit_csv(rows: list[dict], path, fieldnames: list[str]) -> None:
    """Write rows to CSV with a header, 12-digit floats and LF endings."""
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(format_value(row.get(name)) for name in fieldnames))
    data = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)


def read_csv(path) -> tuple[list[str], list[dict]]:
    """Inverse of emit_csv for round-trip checks (no quoting needed here)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    fieldnames = lines[0].split(",")
    rows = [dict(zip(fieldnames, line.split(","))) for line in lines[1:]]
    return fieldnames, rows
