"""Experiment configuration: YAML schema, strict validation, object builders.

A config names one check and the data it needs.  Unknown keys are
rejected, every error names the offending field, and ``to_dict`` round
trips through ``from_dict`` unchanged.
"""

from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .convolution import SpaceTimeField, TimeGrid
from .errors import ConfigError, ContractError
from .grid import HEAT, GridSpec, Semigroup
from .levy import Atoms, LevyMeasureSpec, power_law_density, truncate_small_jumps, uniform_density
from .recipes import RECIPE_VERSION, RECIPES, make_field

SCHEMA_VERSION = 1

CHECKS = ("partition", "lemma1", "lemma2", "lemma3", "prop1", "theorem", "corollary",
          "isometry", "kunita")

# checker parameters: name -> default
CHECK_PARAMS: dict[str, dict[str, Any]] = {
    "partition": {"tol": 1e-12},
    "lemma1": {"j_range": [2, 3, 4], "taus": {"start": 0.25, "stop": 10.0, "num": 40},
               "fit_window": [1.0, 10.0], "collapse_tol": 0.05, "r2_min": 0.99},
    "lemma2": {"j_range": [2, 3, 4], "taus": {"start": 0.0, "stop": 2.0, "num": 21},
               "trials": 10, "single_mode": False},
    "lemma3": {"j_count": 4, "time_steps": 1000, "trials": 200, "index_mode": "nonneg",
               "c": 1.0, "refine": True},
    "prop1": {"homogeneous": False, "levels": []},
    "theorem": {"homogeneous": False},
    "corollary": {"norm_pair": "H<-H", "embedding_trials": 100},
    "isometry": {"n_se": 4.0},
    "kunita": {"configs": 20, "size_spread": 1.0, "rate_spread": 1.0},
}

# which exponents each check sweeps over
SWEEPS = {
    "partition": (), "lemma1": ("alpha",), "lemma2": ("p", "alpha"), "lemma3": ("p",),
    "prop1": ("p", "alpha"), "theorem": ("p", "k", "alpha"), "corollary": ("p", "k", "alpha"),
    "isometry": ("alpha",), "kunita": ("p", "alpha"),
}

LEVY_TYPES = {
    "atoms": {"atoms": [[1.0, 1.0], [-1.0, 1.0]]},
    "uniform": {"low": 1.0, "high": 2.0, "mass": 1.0},
    "power_law": {"gamma": 0.5, "upper": 1.0, "symmetric": True, "epsilon": 0.1},
}

RECIPE_PARAMS = {
    "zero": {},
    "single_mode": {"k0": None, "j0": None, "amplitude": 1.0},
    "random_decay": {"slope": 2.0, "seed": 0, "kmax": 16, "mean_zero": False},
    "step_in_time": {"slope": 2.0, "seed": 0, "kmax": 16, "mean_zero": False, "segments": 4},
}

TOP_KEYS = ("schema", "check", "grid", "time", "levy", "field_recipe", "exponents", "params",
            "samples", "seed", "workers", "output_path")


def _merge(section: str, given: Any, defaults: dict) -> dict:
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigError(section, "must be a mapping")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"{section}.{unknown[0]}", "unknown field")
    out = copy.deepcopy(defaults)
    out.update(copy.deepcopy(given))
    return out


def _number(name: str, value, *, integer=False, positive=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(name, f"expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(name, f"must be positive, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(name, f"must be >= {minimum}, got {value!r}")
    return int(value) if integer else float(value)


def _number_list(name: str, value, **kw) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(name, "expected a non-empty list")
    return [_number(f"{name}[{i}]", v, **kw) for i, v in enumerate(value)]


def _flag(name: str, value) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(name, f"expected true or false, got {value!r}")
    return value


@dataclass
class ExperimentConfig:
    check: str
    grid: dict = dc_field(default_factory=lambda: {"dim": 1, "n": 256, "period": 1.0})
    time: dict = dc_field(default_factory=lambda: {"T": 1.0, "steps": 256})
    levy: dict = dc_field(default_factory=lambda: {"type": "atoms", **LEVY_TYPES["atoms"]})
    field_recipe: dict = dc_field(default_factory=lambda: {"recipe": "random_decay",
                                                        **RECIPE_PARAMS["random_decay"]})
    exponents: dict = dc_field(default_factory=lambda: {"p": [2.0], "k": [0.0], "alpha": [1.0]})
    params: dict = dc_field(default_factory=dict)
    samples: int = 1000
    seed: int = 0
    workers: int = 1
    output_path: str = "results"
    schema: int = SCHEMA_VERSION

    # ------------------------------------------------------------------ io

    @classmethod
    def from_dict(cls, raw: dict, check: str | None = None) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("<root>", "config must be a mapping")
        unknown = sorted(set(raw) - set(TOP_KEYS))
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        schema = raw.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ConfigError("schema", f"unsupported version {schema!r}, expected {SCHEMA_VERSION}")
        name = raw.get("check", check)
        if check is not None and name != check:
            raise ConfigError("check", f"config names {name!r} but {check!r} was requested")
        if name not in CHECKS:
            raise ConfigError("check", f"unknown check {name!r}; known: {', '.join(CHECKS)}")
        base = cls(check=name)
        cfg = cls(
            check=name,
            grid=_merge("grid", raw.get("grid"), base.grid),
            time=_merge("time", raw.get("time"), base.time),
            levy=cls._levy_section(raw.get("levy", base.levy)),
            field_recipe=cls._field_section(raw.get("field_recipe", base.field_recipe)),
            exponents=_merge("exponents", raw.get("exponents"), base.exponents),
            params=_merge("params", raw.get("params"), CHECK_PARAMS[name]),
            samples=raw.get("samples", base.samples),
            seed=raw.get("seed", base.seed),
            workers=raw.get("workers", base.workers),
            output_path=raw.get("output_path", base.output_path),
        )
        cfg.validate()
        return cfg

    @staticmethod
    def _levy_section(raw) -> dict:
        if not isinstance(raw, dict):
            raise ConfigError("levy", "must be a mapping")
        kind = raw.get("type", "atoms")
        if kind not in LEVY_TYPES:
            raise ConfigError("levy.type", f"unknown measure {kind!r}; known: {', '.join(LEVY_TYPES)}")
        rest = {k: v for k, v in raw.items() if k != "type"}
        return {"type": kind, **_merge("levy", rest, LEVY_TYPES[kind])}

    @staticmethod
    def _field_section(raw) -> dict:
        if not isinstance(raw, dict):
            raise ConfigError("field_recipe", "must be a mapping")
        recipe = raw.get("recipe", "random_decay")
        if recipe not in RECIPES:
            raise ConfigError("field_recipe.recipe", f"unknown recipe {recipe!r}; known: {', '.join(RECIPES)}")
        rest = {k: v for k, v in raw.items() if k != "recipe"}
        return {"recipe": recipe, **_merge("field_recipe", rest, RECIPE_PARAMS[recipe])}

    @classmethod
    def load(cls, path: str | Path, check: str | None = None) -> "ExperimentConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError("<file>", f"cannot parse {path}: {exc}") from None
        return cls.from_dict(raw or {}, check)

    def to_dict(self) -> dict:
        return {
            "schema": self.schema, "check": self.check, "grid": copy.deepcopy(self.grid),
            "time": copy.deepcopy(self.time), "levy": copy.deepcopy(self.levy),
            "field_recipe": copy.deepcopy(self.field_recipe), "exponents": copy.deepcopy(self.exponents),
            "params": copy.deepcopy(self.params), "samples": self.samples, "seed": self.seed,
            "workers": self.workers, "output_path": self.output_path,
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    # ------------------------------------------------------------------ validation

    def validate(self):
        g = self.grid
        dim = _number("grid.dim", g["dim"], integer=True)
        n = _number("grid.n", g["n"], integer=True)
        _number("grid.period", g["period"], positive=True)
        if dim not in (1, 2):
            raise ConfigError("grid.dim", f"must be 1 or 2, got {dim}")
        if n < 8 or n & (n - 1):
            raise ConfigError("grid.n", f"must be a power of two >= 8, got {n}")
        _number("time.T", self.time["T"], positive=True)
        _number("time.steps", self.time["steps"], integer=True, minimum=1)
        self.samples = _number("samples", self.samples, integer=True, minimum=2)
        self.seed = _number("seed", self.seed, integer=True, minimum=0)
        self.workers = _number("workers", self.workers, integer=True, minimum=1)
        if not isinstance(self.output_path, str) or not self.output_path:
            raise ConfigError("output_path", "expected a non-empty string")
        ex = self.exponents
        _number_list("exponents.p", ex["p"], minimum=1)
        _number_list("exponents.k", ex["k"])
        alphas = _number_list("exponents.alpha", ex["alpha"], positive=True)
        if any(a > 1 for a in alphas):
            raise ConfigError("exponents.alpha", "orders must lie in (0, 1]; 1 selects the heat semigroup")
        self._validate_params()
        self._validate_levy()
        self._validate_field()

    def _validate_params(self):
        P, name = self.params, self.check
        key = lambda k: f"params.{k}"  # noqa: E731
        for k in ("trials", "j_count", "time_steps", "configs", "embedding_trials"):
            if k in P:
                _number(key(k), P[k], integer=True, minimum=1)
        for k in ("homogeneous", "single_mode", "refine"):
            if k in P:
                _flag(key(k), P[k])
        for k in ("tol", "collapse_tol", "r2_min", "c", "n_se"):
            if k in P:
                _number(key(k), P[k], positive=True)
        for k in ("size_spread", "rate_spread"):
            if k in P:
                _number(key(k), P[k], minimum=0)
        if "j_range" in P:
            _number_list(key("j_range"), P["j_range"], integer=True)
        if "fit_window" in P:
            fw = _number_list(key("fit_window"), P["fit_window"])
            if len(fw) != 2 or not fw[0] < fw[1]:
                raise ConfigError(key("fit_window"), "expected [low, high] with low < high")
        if "taus" in P:
            self._taus()
        if "levels" in P:
            if not isinstance(P["levels"], list):
                raise ConfigError(key("levels"), "expected a list of grid sizes")
            for i, v in enumerate(P["levels"]):
                n = _number(f"{key('levels')}[{i}]", v, integer=True)
                if n < 8 or n & (n - 1):
                    raise ConfigError(f"{key('levels')}[{i}]", f"must be a power of two >= 8, got {n}")
        if "index_mode" in P and P["index_mode"] not in ("nonneg", "all_integers"):
            raise ConfigError(key("index_mode"), f"expected nonneg or all_integers, got {P['index_mode']!r}")
        if name == "corollary":
            from .inequalities import NORM_PAIRS
            if P["norm_pair"] not in NORM_PAIRS:
                raise ConfigError(key("norm_pair"), f"expected one of {', '.join(NORM_PAIRS)}")
        if name == "lemma3" and any(p <= 1 for p in self.exponents["p"]):
            raise ConfigError("exponents.p", "the Hardy-type check needs p > 1")
        if name == "lemma2" and P["single_mode"]:
            L = self.grid["period"]
            for j in P["j_range"]:
                k = 2.0 ** j * L
                if k != round(k) or k >= self.grid["n"] // 2:
                    raise ConfigError(key("j_range"), f"|xi| = 2^{j} is not a resolved lattice frequency")

    def _validate_levy(self):
        L = self.levy
        if L["type"] == "atoms":
            pairs = L["atoms"]
            if not isinstance(pairs, list) or not pairs:
                raise ConfigError("levy.atoms", "expected a non-empty list of [size, rate] pairs")
            for i, pr in enumerate(pairs):
                if not isinstance(pr, list) or len(pr) != 2:
                    raise ConfigError(f"levy.atoms[{i}]", "expected [size, rate]")
                z = _number(f"levy.atoms[{i}][0]", pr[0])
                if z == 0:
                    raise ConfigError(f"levy.atoms[{i}][0]", "jump size must be nonzero")
                _number(f"levy.atoms[{i}][1]", pr[1], positive=True)
        elif L["type"] == "uniform":
            lo, hi = _number("levy.low", L["low"]), _number("levy.high", L["high"])
            if not lo < hi or lo < 0 < hi:
                raise ConfigError("levy.high", "need low < high on one side of 0")
            _number("levy.mass", L["mass"], positive=True)
        else:
            g = _number("levy.gamma", L["gamma"], positive=True)
            if g >= 2:
                raise ConfigError("levy.gamma", "must lie in (0, 2)")
            _number("levy.upper", L["upper"], positive=True)
            _number("levy.epsilon", L["epsilon"], positive=True)
            _flag("levy.symmetric", L["symmetric"])

    def _validate_field(self):
        F = self.field_recipe
        if F["recipe"] == "single_mode":
            if (F["k0"] is None) == (F["j0"] is None):
                raise ConfigError("field_recipe.k0", "single_mode needs exactly one of k0 and j0")
            if F["k0"] is not None:
                k0 = _number_list("field_recipe.k0", F["k0"], integer=True)
                if len(k0) != self.grid["dim"]:
                    raise ConfigError("field_recipe.k0", f"expected {self.grid['dim']} components")
            else:
                _number("field_recipe.j0", F["j0"], integer=True)
        elif F["recipe"] in ("random_decay", "step_in_time"):
            _number("field_recipe.seed", F["seed"], integer=True, minimum=0)
            kmax = _number("field_recipe.kmax", F["kmax"], integer=True, minimum=1)
            if kmax >= self.grid["n"] // 2:
                raise ConfigError("field_recipe.kmax", f"band {kmax} not resolved on n={self.grid['n']}")
            _number("field_recipe.slope", F["slope"])
            _flag("field_recipe.mean_zero", F["mean_zero"])
            if F["recipe"] == "step_in_time":
                _number("field_recipe.segments", F["segments"], integer=True, minimum=1)

    # ------------------------------------------------------------------ builders

    def grid_spec(self, n: int | None = None) -> GridSpec:
        g = self.grid
        return GridSpec(int(g["dim"]), int(n or g["n"]), float(g["period"]))

    def time_grid(self) -> TimeGrid:
        return TimeGrid(float(self.time["T"]), int(self.time["steps"]))

    def build_field(self, n: int | None = None, seed_offset: int = 0) -> SpaceTimeField:
        F = dict(self.field_recipe)
        recipe = F.pop("recipe")
        if recipe == "single_mode":
            F = {k: v for k, v in F.items() if v is not None}
        if "seed" in F:
            F["seed"] = int(F["seed"]) + seed_offset
        try:
            return make_field(recipe, self.grid_spec(n), self.time_grid(), **F)
        except ContractError as exc:
            raise ConfigError("field_recipe", str(exc)) from None

    def build_levy(self, size_scale: float = 1.0, rate_scale: float = 1.0) -> LevyMeasureSpec:
        L = self.levy
        if L["type"] == "atoms":
            return Atoms.from_pairs([(size_scale * z, rate_scale * r) for z, r in L["atoms"]])
        if L["type"] == "uniform":
            return uniform_density(size_scale * L["low"], size_scale * L["high"],
                                   rate_scale * L["mass"])
        nu = power_law_density(L["gamma"], L["upper"], L["symmetric"])
        return truncate_small_jumps(nu, L["epsilon"])[0]

    def semigroup(self, alpha: float) -> Semigroup:
        return HEAT if alpha == 1.0 else Semigroup.fractional(alpha)

    def _taus(self) -> np.ndarray:
        t = self.params["taus"]
        if isinstance(t, dict):
            unknown = sorted(set(t) - {"start", "stop", "num"})
            if unknown:
                raise ConfigError(f"params.taus.{unknown[0]}", "unknown field")
            start = _number("params.taus.start", t.get("start", 0.0), minimum=0)
            stop = _number("params.taus.stop", t.get("stop", 1.0), positive=True)
            num = _number("params.taus.num", t.get("num", 10), integer=True, minimum=2)
            return np.linspace(start, stop, num)
        return np.asarray(_number_list("params.taus", t, minimum=0))

    def taus(self) -> np.ndarray:
        return self._taus()

    def sweep(self) -> list[dict]:
        """Cartesian product of the exponents the check depends on."""
        names = SWEEPS[self.check]
        values = [[float(v) for v in self.exponents[n]] for n in names]
        return [dict(zip(names, combo)) for combo in itertools.product(*values)]

    def provenance(self) -> dict:
        return {"schema": self.schema, "recipe_version": RECIPE_VERSION}
