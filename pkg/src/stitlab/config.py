"""Experiment configuration: a JSON-serializable dataclass with validation
and constructors for the window polytope and the measure spec."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .geometry import ConvexPolytope
from .measures import HyperplaneMeasureSpec

KINDS = ("simulate", "verify", "clt2d", "clt3d", "increment", "iterate-test", "compare")


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    kind: str
    dimension: int
    t: float
    replicates: int
    seed: int = 0
    window: dict = field(default_factory=dict)  # {"ball": R} | {"box": [...]} |
    #                                             {"vertices": [...], "faces": [...]}
    measure: dict = field(default_factory=lambda: {"kind": "isotropic"})
    checkpoints: list = field(default_factory=list)
    erosion: float = 0.0
    r_grid: list = field(default_factory=list)
    discretization: float = 0.1
    s0: float = 0.5  # increment experiments: start of the observation window
    R: float = 1.0  # scaling parameter for clt experiments
    iterate_split: list = field(default_factory=list)  # [s, u] for iterate-test
    out_dir: str = "."

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {KINDS}")
        if self.dimension not in (1, 2, 3):
            raise ConfigError("dimension", "must be 1, 2 or 3")
        if not self.t > 0:
            raise ConfigError("t", "must be positive")
        if self.replicates < 1:
            raise ConfigError("replicates", "must be >= 1")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigError("seed", "must be a nonnegative integer")
        if self.erosion < 0:
            raise ConfigError("erosion", "must be nonnegative")
        if sorted(self.checkpoints) != list(self.checkpoints):
            raise ConfigError("checkpoints", "must be sorted ascending")
        if any(c <= 0 for c in self.checkpoints):
            raise ConfigError("checkpoints", "must be positive times")
        if any(r <= 0 for r in self.r_grid):
            raise ConfigError("r_grid", "radii must be positive")
        if not self.window:
            raise ConfigError("window", "must specify ball, box or vertices")
        self.build_window()
        self.build_measure()
        return self

    def build_window(self) -> ConvexPolytope:
        w = self.window
        if "ball" in w:
            R = float(w["ball"])
            if R <= 0:
                raise ConfigError("window.ball", "radius must be positive")
            return ConvexPolytope.ball_approx(self.dimension, R)
        if "box" in w:
            ext = [float(x) for x in w["box"]]
            if len(ext) != self.dimension or any(x <= 0 for x in ext):
                raise ConfigError("window.box", "needs d positive extents")
            return ConvexPolytope.box([0.0] * self.dimension, ext)
        if "vertices" in w:
            return ConvexPolytope(w["vertices"], w.get("faces"))
        raise ConfigError("window", "must specify ball, box or vertices")

    def build_measure(self) -> HyperplaneMeasureSpec:
        m = self.measure
        kind = m.get("kind", "isotropic")
        if kind == "isotropic":
            return HyperplaneMeasureSpec.isotropic(self.dimension)
        if kind == "axis":
            return HyperplaneMeasureSpec.axis(self.dimension)
        if kind == "discrete":
            try:
                dirs = [(tuple(u), float(p)) for u, p in m["directions"]]
            except (KeyError, TypeError) as e:
                raise ConfigError("measure.directions", str(e)) from e
            return HyperplaneMeasureSpec.discrete(self.dimension, dirs)
        raise ConfigError("measure.kind", f"unknown kind {kind!r}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        known = set(ExperimentConfig.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        try:
            cfg = ExperimentConfig(**obj)
        except TypeError as e:
            raise ConfigError("<root>", str(e)) from e
        cfg.validate()
        return cfg

    @staticmethod
    def load(path) -> "ExperimentConfig":
        with open(path) as fh:
            return ExperimentConfig.from_json(fh.read())
