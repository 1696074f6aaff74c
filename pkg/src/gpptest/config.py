"""Declarative experiment configuration.

Configs are nested mappings stored as YAML (JSON is accepted too). Parsing
validates every key and reports the offending key path in
:class:`~gpptest.errors.ConfigError`. ``ExperimentConfig.to_dict`` emits the
fully resolved form, which parses back to an equal config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError, GPPTestError
from .exceedance import ThresholdSchedule, default_schedule
from .generators import Constant, ExplicitInfLaw, FiniteMixture, InfLaw, SinePhase, inf_law
from .wmodels import DeltaModel, ExpFamilyModel, make_T

MODELS = ("delta", "expfam")
TESTS = ("optimal_upper", "optimal_lower", "omnibus_upper", "omnibus_lower")
SAMPLERS = ("conditional", "direct", "functional")


def _number(d, key, path, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError("required key missing", f"{path}{key}")
        return default
    value = d[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", f"{path}{key}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"expected an integer, got {value!r}", f"{path}{key}")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("expected a finite number", f"{path}{key}")
    return value


def _mapping(d, key, path, required=True):
    if key not in d:
        if required:
            raise ConfigError("required section missing", f"{path}{key}")
        return None
    value = d[key]
    if not isinstance(value, dict):
        raise ConfigError("expected a mapping", f"{path}{key}")
    return value


def _check_keys(d, allowed, path):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) {extra}", path.rstrip("."))


def _float_list(value, path):
    if not isinstance(value, list) or not value:
        raise ConfigError("expected a non-empty list of numbers", path)
    out = []
    for i, x in enumerate(value):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigError(f"expected a number, got {x!r}", f"{path}[{i}]")
        out.append(float(x))
    return out


# --- generator block ---------------------------------------------------------


def parse_generator(d, path="generator."):
    """Build a generator from its config mapping."""
    variant = d.get("variant")
    try:
        if variant == "constant":
            _check_keys(d, {"variant"}, path)
            return Constant()
        if variant == "sine_phase":
            _check_keys(d, {"variant", "amplitude"}, path)
            return SinePhase(_number(d, "amplitude", path))
        if variant == "finite_mixture":
            _check_keys(d, {"variant", "grid", "functions", "m"}, path)
            grid = _float_list(d.get("grid"), f"{path}grid")
            funcs = d.get("functions")
            if not isinstance(funcs, list) or not funcs:
                raise ConfigError("expected a list of tabulated functions", f"{path}functions")
            funcs = [_float_list(f, f"{path}functions[{i}]") for i, f in enumerate(funcs)]
            m = _number(d, "m", path) if "m" in d else None
            return FiniteMixture(funcs, grid, m)
        if variant == "explicit_inf_law":
            _check_keys(d, {"variant", "atoms", "weights", "m"}, path)
            atoms = _float_list(d.get("atoms"), f"{path}atoms")
            weights = _float_list(d.get("weights"), f"{path}weights")
            m = _number(d, "m", path) if "m" in d else max(atoms)
            return ExplicitInfLaw(InfLaw(atoms, weights, m))
    except ConfigError:
        raise
    except GPPTestError as exc:
        raise ConfigError(str(exc), path.rstrip(".")) from exc
    raise ConfigError(f"unknown generator variant {variant!r}", f"{path}variant")


def generator_to_dict(gen):
    if isinstance(gen, Constant):
        return {"variant": "constant"}
    if isinstance(gen, SinePhase):
        return {"variant": "sine_phase", "amplitude": gen.amplitude}
    if isinstance(gen, FiniteMixture):
        return {"variant": "finite_mixture", "grid": gen.grid.tolist(),
                "functions": gen.functions.tolist(), "m": gen.m}
    if isinstance(gen, ExplicitInfLaw):
        return {"variant": "explicit_inf_law", "atoms": gen.law.atoms.tolist(),
                "weights": gen.law.weights.tolist(), "m": gen.law.m}
    raise TypeError(type(gen))


# --- experiment --------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    power_slack: float = 0.05  # widening of the Wilson CI for xi != 0 rows
    lan_rel: float = 0.15
    lan_abs_mean: float = 0.03


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    generator: object
    w: dict
    n: int
    replications: int
    seed: int
    xi: float = 0.0
    xis: tuple = ()
    alpha: float = 0.05
    c: Optional[float] = None
    schedule: Optional[ThresholdSchedule] = None
    tests: tuple = ("optimal_upper", "omnibus_upper")
    sampler: str = "conditional"
    M: float = -1.0
    grid_size: int = 512
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}", "model")
        if self.n < 0:
            raise ConfigError("n must be >= 0", "n")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1", "replications")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "seed")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)", "alpha")
        for i, t in enumerate(self.tests):
            if t not in TESTS:
                raise ConfigError(f"unknown test {t!r}; choose from {TESTS}", f"tests[{i}]")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"sampler must be one of {SAMPLERS}", "sampler")
        if self.c is not None and self.schedule is not None:
            raise ConfigError("give either c or schedule, not both", "threshold")
        if self.c is not None and not self.c < 0:
            raise ConfigError("threshold c must be negative", "threshold.c")
        if not self.M < 0:
            raise ConfigError("M must be negative", "M")
        if self.grid_size < 2:
            raise ConfigError("grid_size must be >= 2", "grid_size")
        if self.schedule is not None:
            self.schedule.check(self.model, self.delta)
        # build once to surface W-model errors at parse time
        self.family()

    # derived quantities

    @property
    def delta(self):
        return float(self.w["delta"]) if self.model == "delta" else None

    @property
    def xi_list(self):
        return tuple(self.xis) if self.xis else (self.xi,)

    def threshold(self, n=None):
        """Resolved threshold ``c`` for sample size ``n`` (default ``self.n``)."""
        if self.c is not None:
            return self.c
        schedule = self.schedule or default_schedule(self.model, self.delta)
        return schedule.c(max(n if n is not None else self.n, 1))

    def family(self):
        """The W family at theta = 0."""
        try:
            if self.model == "delta":
                return DeltaModel(float(self.w["delta"]), 0.0, float(self.w.get("u0", 0.5)))
            return ExpFamilyModel(make_T(self.w["T"]), 0.0)
        except GPPTestError as exc:
            raise ConfigError(str(exc), "w") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed W block ({exc})", "w") from exc

    def inf_law(self):
        return inf_law(self.generator, self.grid_size)

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    # serialization

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        _check_keys(d, {"model", "generator", "w", "n", "replications", "seed", "xi", "xis",
                        "alpha", "threshold", "tests", "sampler", "M", "grid_size",
                        "tolerances"}, "")
        model = d.get("model")
        if model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}", "model")
        generator = parse_generator(_mapping(d, "generator", ""))
        w = _mapping(d, "w", "")
        if model == "delta":
            _check_keys(w, {"delta", "u0"}, "w.")
            w = {"delta": _number(w, "delta", "w."), "u0": _number(w, "u0", "w.", 0.5)}
        else:
            _check_keys(w, {"T"}, "w.")
            T = _mapping(w, "T", "w.")
            w = {"T": dict(T)}
        c = schedule = None
        th = _mapping(d, "threshold", "", required=False)
        if th is not None:
            _check_keys(th, {"c", "schedule"}, "threshold.")
            if "c" in th:
                c = _number(th, "c", "threshold.")
            if "schedule" in th:
                s = _mapping(th, "schedule", "threshold.")
                _check_keys(s, {"c0", "gamma"}, "threshold.schedule.")
                schedule = ThresholdSchedule(_number(s, "c0", "threshold.schedule."),
                                             _number(s, "gamma", "threshold.schedule."))
        tests = d.get("tests", list(cls.tests))
        if not isinstance(tests, list) or not tests:
            raise ConfigError("expected a non-empty list", "tests")
        xis = tuple(_float_list(d["xis"], "xis")) if "xis" in d else ()
        tol = _mapping(d, "tolerances", "", required=False) or {}
        _check_keys(tol, {"power_slack", "lan_rel", "lan_abs_mean"}, "tolerances.")
        dt = Tolerances()
        tolerances = Tolerances(
            _number(tol, "power_slack", "tolerances.", dt.power_slack),
            _number(tol, "lan_rel", "tolerances.", dt.lan_rel),
            _number(tol, "lan_abs_mean", "tolerances.", dt.lan_abs_mean))
        sampler = d.get("sampler", "conditional")
        if not isinstance(sampler, str):
            raise ConfigError("expected a string", "sampler")
        return cls(
            model=model,
            generator=generator,
            w=w,
            n=_number(d, "n", "", kind=int),
            replications=_number(d, "replications", "", kind=int),
            seed=_number(d, "seed", "", kind=int),
            xi=_number(d, "xi", "", 0.0),
            xis=xis,
            alpha=_number(d, "alpha", "", 0.05),
            c=c,
            schedule=schedule,
            tests=tuple(tests),
            sampler=sampler,
            M=_number(d, "M", "", -1.0),
            grid_size=_number(d, "grid_size", "", 512, kind=int),
            tolerances=tolerances,
        )

    def to_dict(self):
        d = {
            "model": self.model,
            "generator": generator_to_dict(self.generator),
            "w": dict(self.w),
            "n": self.n,
            "replications": self.replications,
            "seed": self.seed,
            "xi": self.xi,
            "alpha": self.alpha,
            "tests": list(self.tests),
            "sampler": self.sampler,
            "M": self.M,
            "grid_size": self.grid_size,
            "tolerances": {"power_slack": self.tolerances.power_slack,
                           "lan_rel": self.tolerances.lan_rel,
                           "lan_abs_mean": self.tolerances.lan_abs_mean},
        }
        if self.xis:
            d["xis"] = list(self.xis)
        if self.c is not None:
            d["threshold"] = {"c": self.c}
        else:
            s = self.schedule or default_schedule(self.model, self.delta)
            d["threshold"] = {"schedule": {"c0": s.c0, "gamma": s.gamma}}
        return d


def load_mapping(path):
    """Read a YAML/JSON mapping from ``path`` (OSError propagates)."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} does not contain a mapping")
    return data


def load_config(path):
    return ExperimentConfig.from_dict(load_mapping(path))


def dump_config(cfg):
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)
