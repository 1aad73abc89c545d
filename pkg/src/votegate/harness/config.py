"""Experiment configuration: the dataclass and its TOML loader.

The schema is a TOML document with three tables. Unknown keys anywhere
are errors, so typos fail loudly instead of silently running defaults.

    [experiment]
    alphas = [0.05, 0.10]     # target confident-error rates, each in (0,1)
    n_cal = 200               # calibration size per split
    n_test = 500              # test size per split (generator mode)
    n_splits = 100            # number of splits / trials
    seed = 42
    delta0 = 0.1              # operating-set gap threshold (omit: any positive gap)
    delta = 0.05              # confidence level for the predictor bound
    score_name = "score"
    output_dir = "out"
    allow_split_resampling = false

    [weight]
    kind = "exponential"      # uniform | linear | exponential
    beta = 1.0                # exponential only
    # shift = 0.0, floor = 1e-12   # linear only

    [input]                   # exactly one of path / generator
    path = "data.jsonl"

    [input.generator]         # preset form ...
    preset = "separable"
    m = 16
    answers = 3

    [input.generator]         # ... or explicit form
    m = 16
    answers = 3
    pi_law = "diffuse"              # preset, or [[input.generator.classes]]
    score_laws = "separated-normal" # preset, or the two tables below
    # [[input.generator.classes]]  pi = [...], weight = 0.5, truth_index = 0
    # [input.generator.score_correct]    kind = "normal", mu = 1.0, sigma = 1.0
    # [input.generator.score_incorrect]  kind = "finite", values = [...], probs = [...]

    [input.test_generator]    # optional: mismatched test distribution
    preset = "adversarial"

The VOTEGATE_OUT environment variable overrides output_dir; a --out flag
on the command line overrides both.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..aggregate import WeightSpec
from ..errors import ConfigError, ValidationError, SpecError
from ..synth import GeneratorSpec, PromptClass, ScoreLaw, preset

OUTPUT_DIR_ENV = "VOTEGATE_OUT"

_SEED_MAX = 2**64


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a multi-split experiment needs, input through output.

    Exactly one of input_path (a JSONL dataset, split per trial) and
    generator (fresh draws per trial) must be set. test_generator, when
    given, replaces the test-side distribution — the mismatch scenario.
    """

    input_path: str | None = None
    generator: GeneratorSpec | None = None
    test_generator: GeneratorSpec | None = None
    score_name: str = "score"
    weight: WeightSpec = field(default_factory=lambda: WeightSpec(kind="uniform"))
    alphas: tuple = (0.1,)
    n_cal: int = 200
    n_test: int | None = None
    n_splits: int = 100
    seed: int = 0
    delta0: float | None = None
    delta: float = 0.05
    output_dir: str = "votegate-out"
    allow_split_resampling: bool = False

    def __post_init__(self):
        if (self.input_path is None) == (self.generator is None):
            raise ConfigError("exactly one of input path and generator is required")
        if not self.alphas:
            raise ConfigError("alphas must be non-empty")
        for a in self.alphas:
            if not (isinstance(a, (int, float)) and 0 < a < 1):
                raise ConfigError(f"alphas must lie in (0, 1), got {a}")
        if self.n_cal < 1:
            raise ConfigError(f"n_cal must be >= 1, got {self.n_cal}")
        if self.n_splits < 1:
            raise ConfigError(f"n_splits must be >= 1, got {self.n_splits}")
        if self.generator is not None and (self.n_test is None or self.n_test < 1):
            raise ConfigError("generator input requires n_test >= 1")
        if self.test_generator is not None and self.generator is None:
            raise ConfigError("test_generator requires a generator input")
        if not 0 <= self.seed < _SEED_MAX:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        if self.delta0 is not None and not (
            math.isfinite(self.delta0) and self.delta0 >= 0
        ):
            raise ConfigError(f"delta0 must be >= 0, got {self.delta0}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")


def _reject_unknown(table, allowed, where):
    extra = sorted(set(table) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _parse_score_law(table, where):
    _reject_unknown(table, ("kind", "mu", "sigma", "values", "probs"), where)
    kwargs = dict(table)
    for key in ("values", "probs"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        return ScoreLaw(**kwargs)
    except SpecError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_generator(table, where):
    if "preset" in table:
        _reject_unknown(table, ("preset", "m", "answers", "seed"), where)
        try:
            return preset(
                table["preset"],
                m=table.get("m", 16),
                answers=table.get("answers", 3),
                seed=table.get("seed"),
            )
        except SpecError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    allowed = (
        "m", "answers", "seed", "mixture_mode", "pi_law", "classes",
        "score_laws", "score_correct", "score_incorrect",
    )
    _reject_unknown(table, allowed, where)
    for key in ("m", "answers"):
        if key not in table:
            raise ConfigError(f"{where} needs {key} (or a preset)")
    kwargs = {
        "m": table["m"],
        "answers": table["answers"],
        "seed": table.get("seed"),
        "mixture_mode": table.get("mixture_mode", "per-prompt"),
    }
    if "classes" in table:
        if "pi_law" in table:
            raise ConfigError(f"{where}: give pi_law or classes, not both")
        classes = []
        for i, cls in enumerate(table["classes"]):
            cls_where = f"{where}.classes[{i}]"
            _reject_unknown(cls, ("pi", "weight", "truth_index"), cls_where)
            if "pi" not in cls:
                raise ConfigError(f"{cls_where} needs pi")
            try:
                classes.append(
                    PromptClass(
                        pi=tuple(cls["pi"]),
                        weight=cls.get("weight", 1.0),
                        truth_index=cls.get("truth_index", 0),
                    )
                )
            except SpecError as exc:
                raise ConfigError(f"{cls_where}: {exc}") from exc
        kwargs["pi_law"] = tuple(classes)
    elif "pi_law" in table:
        kwargs["pi_law"] = table["pi_law"]
    has_tables = "score_correct" in table or "score_incorrect" in table
    if has_tables:
        if "score_laws" in table:
            raise ConfigError(
                f"{where}: give score_laws or the score_correct/score_incorrect "
                "tables, not both"
            )
        if not ("score_correct" in table and "score_incorrect" in table):
            raise ConfigError(
                f"{where} needs both score_correct and score_incorrect"
            )
        kwargs["score_laws"] = (
            _parse_score_law(table["score_correct"], f"{where}.score_correct"),
            _parse_score_law(table["score_incorrect"], f"{where}.score_incorrect"),
        )
    elif "score_laws" in table:
        kwargs["score_laws"] = table["score_laws"]
    try:
        return GeneratorSpec(**kwargs)
    except SpecError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path):
    """Parse a TOML experiment config; unknown keys are ConfigErrors.

    The VOTEGATE_OUT environment variable, when set, overrides the
    configured output_dir.
    """
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    _reject_unknown(doc, ("experiment", "weight", "input"), "config")
    exp = doc.get("experiment", {})
    _reject_unknown(
        exp,
        (
            "alphas", "n_cal", "n_test", "n_splits", "seed", "delta0", "delta",
            "score_name", "output_dir", "allow_split_resampling",
        ),
        "[experiment]",
    )

    weight_table = doc.get("weight", {})
    _reject_unknown(weight_table, ("kind", "beta", "shift", "floor"), "[weight]")
    try:
        weight = WeightSpec(**weight_table) if weight_table else WeightSpec(kind="uniform")
    except ValidationError as exc:
        raise ConfigError(f"[weight]: {exc}") from exc

    inp = doc.get("input", {})
    _reject_unknown(inp, ("path", "generator", "test_generator"), "[input]")
    input_path = inp.get("path")
    generator = None
    test_generator = None
    if "generator" in inp:
        generator = _parse_generator(inp["generator"], "[input.generator]")
    if "test_generator" in inp:
        test_generator = _parse_generator(
            inp["test_generator"], "[input.test_generator]"
        )

    kwargs = {
        "input_path": input_path,
        "generator": generator,
        "test_generator": test_generator,
        "weight": weight,
    }
    for key in (
        "n_cal", "n_test", "n_splits", "seed", "delta0", "delta",
        "score_name", "output_dir", "allow_split_resampling",
    ):
        if key in exp:
            kwargs[key] = exp[key]
    if "alphas" in exp:
        kwargs["alphas"] = tuple(exp["alphas"])
    config = ExperimentConfig(**kwargs)
    env_out = os.environ.get(OUTPUT_DIR_ENV)
    if env_out:
        from dataclasses import replace

        config = replace(config, output_dir=env_out)
    return config
