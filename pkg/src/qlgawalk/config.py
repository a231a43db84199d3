"""Experiment configuration files (YAML).

See ``README.md`` for the schema. Every validation failure raises
:class:`ConfigError` naming the offending field.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .errors import NotUnitaryError
from .matrices import DIRECTIONS, conference_coin, random_zero_diagonal_unitary, symmetric_scattering
from .state import LocalUnitary, SparseState
from .walks import (
    McGettrickLabel,
    ParticleHistoryLabel,
    SiteHistoryLabel,
    StandardLabel,
    TwoDLabel,
    WalkModel,
    build_2d,
    build_mcgettrick,
    build_particle_history,
    build_site_history,
    build_standard,
    symmetric_initial,
)

OUTPUT_DIR_ENV = "QLGAWALK_OUTPUT_DIR"
MODEL_KINDS = ("standard", "particle_history", "mcgettrick", "site_history", "two_d")
OUTPUT_KINDS = ("distribution_per_step", "spread_series", "equivalence_report")
REPRESENTATIONS = ("qrw", "qlga", "both")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    model: dict
    representation: str = "qrw"
    initial_state: dict = field(default_factory=dict)
    t_max: int = 10
    prune_epsilon: float = 0.0
    outputs: list = field(default_factory=lambda: ["distribution_per_step"])
    seed: int = 0
    output_dir: str = "out"
    tolerance: float = 1e-10
    spread_window: tuple | None = None
    name: str = "experiment"


def _get(d: dict, key: str, path: str, kind=None, default=Ellipsis):
    if key not in d:
        if default is Ellipsis:
            raise ConfigError(f"{path}.{key}", "missing")
        return default
    v = d[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
        if not np.isfinite(v):
            raise ConfigError(f"{path}.{key}", "must be finite")
        return float(v)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
        return v
    return v


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    """Read and validate a YAML config file.

    Raises ``OSError`` if unreadable and :class:`ConfigError` if invalid.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    return parse_config(raw)


def parse_config(raw: Any) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a mapping")
    known = set(ExperimentConfig.__dataclass_fields__)
    for k in raw:
        if k not in known:
            raise ConfigError(k, "unknown field")
    model = raw.get("model")
    if not isinstance(model, dict):
        raise ConfigError("model", "missing or not a mapping")
    cfg = ExperimentConfig(model=model)
    cfg.name = str(raw.get("name", cfg.name))
    cfg.representation = raw.get("representation", "qrw")
    if cfg.representation not in REPRESENTATIONS:
        raise ConfigError("representation", f"must be one of {REPRESENTATIONS}")
    cfg.t_max = _get(raw, "t_max", "<root>", int, 10)
    if cfg.t_max < 1:
        raise ConfigError("t_max", "must be >= 1")
    cfg.prune_epsilon = _get(raw, "prune_epsilon", "<root>", float, 0.0)
    if cfg.prune_epsilon < 0:
        raise ConfigError("prune_epsilon", "must be >= 0")
    cfg.tolerance = _get(raw, "tolerance", "<root>", float, 1e-10)
    cfg.seed = _get(raw, "seed", "<root>", int, 0)
    cfg.output_dir = str(raw.get("output_dir", "out"))
    outputs = raw.get("outputs", ["distribution_per_step"])
    if not isinstance(outputs, list) or not all(o in OUTPUT_KINDS for o in outputs):
        raise ConfigError("outputs", f"must be a list drawn from {OUTPUT_KINDS}")
    cfg.outputs = list(outputs)
    if "equivalence_report" in cfg.outputs and cfg.representation != "both":
        raise ConfigError("outputs", "equivalence_report needs representation: both")
    if "spread_series" in cfg.outputs and model.get("kind") == "two_d":
        raise ConfigError("outputs", "spread_series is defined for 1D walks")
    win = raw.get("spread_window")
    if win is not None:
        if (not isinstance(win, list) or len(win) != 2
                or not all(isinstance(v, int) for v in win)
                or not 0 <= win[0] < win[1] <= cfg.t_max):
            raise ConfigError("spread_window", f"must be [lo, hi] with 0 <= lo < hi <= {cfg.t_max}")
        cfg.spread_window = tuple(win)
    init = raw.get("initial_state", {})
    if not isinstance(init, dict):
        raise ConfigError("initial_state", "must be a mapping")
    cfg.initial_state = init
    # build once to validate model parameters and the initial state
    m = build_model(cfg)
    initial_state(cfg, m)
    return cfg


def output_dir(cfg: ExperimentConfig) -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV) or cfg.output_dir)


def parse_matrix(spec: Any, basis: tuple[str, ...], path: str) -> LocalUnitary:
    """Row-major ``(re, im)`` pairs with a declared basis order.

    The declared order must be a permutation of ``basis``; the matrix is
    reordered into ``basis``.
    """
    if not isinstance(spec, dict):
        raise ConfigError(path, "matrix must be a mapping with 'basis' and 'entries'")
    declared = [str(b) for b in spec.get("basis", basis)]
    if sorted(declared) != sorted(basis):
        raise ConfigError(f"{path}.basis", f"must be an ordering of {list(basis)}")
    entries = spec.get("entries")
    n = len(basis)
    if not isinstance(entries, list) or len(entries) != n * n:
        raise ConfigError(f"{path}.entries", f"expected {n * n} (re, im) pairs")
    vals = []
    for k, e in enumerate(entries):
        if (not isinstance(e, (list, tuple)) or len(e) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in e)):
            raise ConfigError(f"{path}.entries[{k}]", "expected [re, im]")
        vals.append(complex(e[0], e[1]))
    m_decl = np.array(vals).reshape(n, n)
    perm = [basis.index(b) for b in declared]
    m = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            m[perm[i], perm[j]] = m_decl[i, j]
    try:
        return LocalUnitary(m, basis)
    except NotUnitaryError as exc:
        raise ConfigError(path, str(exc)) from None


def _period(model: dict, path: str):
    p = model.get("period")
    if p is None:
        return None
    if isinstance(p, bool) or not isinstance(p, int) or p < 2:
        raise ConfigError(f"{path}.period", "must be an integer >= 2")
    return p


def build_model(cfg: ExperimentConfig) -> WalkModel:
    m = cfg.model
    kind = m.get("kind")
    eps = cfg.prune_epsilon
    if kind not in MODEL_KINDS:
        raise ConfigError("model.kind", f"must be one of {MODEL_KINDS}")
    if kind == "standard":
        if "coin" in m:
            coin = parse_matrix(m["coin"], ("+1", "-1"), "model.coin")
            return build_standard(coin=coin, period=_period(m, "model"), prune_epsilon=eps)
        theta = _get(m, "theta", "model", float)
        return build_standard(theta, period=_period(m, "model"), prune_epsilon=eps)
    if kind == "particle_history":
        n = _get(m, "N", "model", int)
        if n < 1:
            raise ConfigError("model.N", "must be >= 1")
        variant = m.get("variant", "uniform")
        if variant not in ("uniform", "cycled"):
            raise ConfigError("model.variant", "must be 'uniform' or 'cycled'")
        if variant == "cycled":
            thetas = m.get("thetas")
            if (not isinstance(thetas, list)
                    or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in thetas)):
                raise ConfigError("model.thetas", "must be a list of numbers")
            if len(thetas) != n:
                raise ConfigError("model.thetas", f"cycled variant needs N={n} angles, got {len(thetas)}")
        else:
            if "thetas" in m:
                thetas = m["thetas"]
                if not isinstance(thetas, list) or len(thetas) != 1:
                    raise ConfigError("model.thetas", "uniform variant takes exactly one angle")
            else:
                thetas = [_get(m, "theta", "model", float)]
        return build_particle_history(n, [float(t) for t in thetas], variant,
                                      period=_period(m, "model"), prune_epsilon=eps)
    if kind == "mcgettrick":
        n = _get(m, "N", "model", int, 1)
        if n < 1:
            raise ConfigError("model.N", "must be >= 1")
        if "u_s" in m:
            u_s = parse_matrix(m["u_s"], ("0", "1"), "model.u_s")
        else:
            u_s = symmetric_scattering(_get(m, "theta", "model", float), ("0", "1"))
        modes = []
        for key, default in (("mode0", "transmit"), ("mode1", "reflect")):
            v = m.get(key, default)
            if v not in ("transmit", "reflect"):
                raise ConfigError(f"model.{key}", "must be 'transmit' or 'reflect'")
            modes.append(v)
        return build_mcgettrick(n, u_s, modes[0], modes[1], period=_period(m, "model"),
                                prune_epsilon=eps)
    if kind == "site_history":
        n_sites = _get(m, "n_sites", "model", int)
        if n_sites < 2:
            raise ConfigError("model.n_sites", "must be >= 2")
        return build_site_history(n_sites, _get(m, "theta_M", "model", float),
                                  _get(m, "theta_b", "model", float), prune_epsilon=eps)
    # two_d
    variant = m.get("variant", "non_repeating")
    if variant not in ("non_repeating", "non_reversing"):
        raise ConfigError("model.variant", "must be 'non_repeating' or 'non_reversing'")
    coin_spec = m.get("coin", "conference")
    if coin_spec == "conference":
        c = conference_coin()
    elif coin_spec == "random":
        c = random_zero_diagonal_unitary(np.random.default_rng(cfg.seed))
    else:
        c = parse_matrix(coin_spec, DIRECTIONS, "model.coin")
    torus = m.get("torus")
    if torus is not None and (not isinstance(torus, list) or len(torus) != 2
                              or not all(isinstance(v, int) and v >= 2 for v in torus)):
        raise ConfigError("model.torus", "must be [nx, ny] with sizes >= 2")
    try:
        return build_2d(variant, c, torus=torus, prune_epsilon=eps)
    except ValueError as exc:
        raise ConfigError("model.coin", str(exc)) from None


def _label(model: WalkModel, spec: dict, path: str):
    x = _get(spec, "x", path, int, 0)
    if model.kind == "standard":
        p = _get(spec, "p", path, int, 1)
        if p not in (1, -1):
            raise ConfigError(f"{path}.p", "must be +1 or -1")
        return StandardLabel(model._wrap(x), p)
    if model.kind in ("particle_history", "mcgettrick"):
        tail = spec.get("tail", [_get(spec, "p", path, int, 1)] + [1] * (model.n - 1))
        if (not isinstance(tail, list) or len(tail) != model.n
                or not all(v in (1, -1) for v in tail)):
            raise ConfigError(f"{path}.tail", f"must be a list of {model.n} values in {{+1, -1}}")
        if model.kind == "particle_history":
            return ParticleHistoryLabel(model._wrap(x), tuple(tail))
        c = _get(spec, "c", path, int, 0)
        if c not in (0, 1):
            raise ConfigError(f"{path}.c", "must be 0 or 1")
        return McGettrickLabel(model._wrap(x), c, tuple(tail))
    if model.kind == "site_history":
        p = _get(spec, "p", path, int, 1)
        if p not in (1, -1):
            raise ConfigError(f"{path}.p", "must be +1 or -1")
        mem = spec.get("mem", [0] * model.n_sites)
        if (not isinstance(mem, list) or len(mem) != model.n_sites
                or not all(v in (0, 1) for v in mem)):
            raise ConfigError(f"{path}.mem", f"must be a list of {model.n_sites} bits")
        return SiteHistoryLabel(x % model.n_sites, p, tuple(mem))
    y = _get(spec, "y", path, int, 0)
    d = spec.get("dir", "e")
    if d not in DIRECTIONS:
        raise ConfigError(f"{path}.dir", f"must be one of {DIRECTIONS}")
    if model.torus is not None:
        x, y = x % model.torus[0], y % model.torus[1]
    return TwoDLabel(x, y, d)


def initial_state(cfg: ExperimentConfig, model: WalkModel) -> SparseState:
    """Initial walk state described by ``cfg.initial_state``.

    ``kind`` is one of ``basis`` (default; position 0, velocity +1, zeroed
    memory unless overridden), ``symmetric`` (standard walk only),
    ``superposition`` (explicit ``terms``) or ``random`` (seeded).
    """
    spec = cfg.initial_state
    kind = spec.get("kind", "basis")
    eps = cfg.prune_epsilon
    if kind == "basis":
        return SparseState({_label(model, spec, "initial_state"): 1.0}, eps)
    if kind == "symmetric":
        if model.kind != "standard":
            raise ConfigError("initial_state.kind", "symmetric is defined for the standard walk")
        x = _get(spec, "x", "initial_state", int, 0)
        ph = spec.get("phase", [1.0, 0.0])
        if (not isinstance(ph, list) or len(ph) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in ph)
                or not np.isclose(abs(complex(ph[0], ph[1])), 1.0, atol=1e-12)):
            raise ConfigError("initial_state.phase", "expected [re, im] of modulus 1")
        init = symmetric_initial(model._wrap(x), complex(ph[0], ph[1]))
        return SparseState(init.entries, eps)
    if kind == "superposition":
        terms = spec.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ConfigError("initial_state.terms", "must be a nonempty list")
        amps: dict = {}
        for k, term in enumerate(terms):
            path = f"initial_state.terms[{k}]"
            if not isinstance(term, dict):
                raise ConfigError(path, "must be a mapping")
            a = term.get("amplitude", [1.0, 0.0])
            if not isinstance(a, list) or len(a) != 2:
                raise ConfigError(f"{path}.amplitude", "expected [re, im]")
            label = _label(model, term, path)
            amps[label] = amps.get(label, 0j) + complex(a[0], a[1])
        state = SparseState(amps, eps)
        if state.norm2() == 0:
            raise ConfigError("initial_state.terms", "amplitudes sum to the zero vector")
        return state.normalized()
    if kind == "random":
        size = _get(spec, "size", "initial_state", int, 4)
        radius = _get(spec, "radius", "initial_state", int, 3)
        if size < 1 or radius < 0:
            raise ConfigError("initial_state", "size must be >= 1 and radius >= 0")
        rng = np.random.default_rng(cfg.seed)
        return model.random_state(rng, size, radius)
    raise ConfigError("initial_state.kind", "must be basis, symmetric, superposition or random")
