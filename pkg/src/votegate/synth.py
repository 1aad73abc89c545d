"""Synthetic vote generation and exact enumeration oracles.

Data follows the two-step factorization: a prompt draws an answer-count
vector N ~ Multinomial(m, pi) for its prompt class, then each path draws
a quality score from the conditional law of its correctness class (answer
equal to the designated truth or not). Under uniform weights the vote
outcome depends on the draw only through the counts, so every majority
vote quantity has an exact multinomial enumeration; under non-uniform
weights exact enumeration is still available when the score laws have
finite support.

Mixture specs model exchangeable-but-not-iid data: by default each prompt
draws its own component (iid from the mixture marginal), and the
"per-dataset" mode instead fixes one component per generated dataset,
the conditional regime.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .aggregate import WeightSpec, weight
from .errors import DomainError, NoClosedForm, SpecError, TooLarge
from .records import Dataset, PathRecord, PromptInstance

# score name carried by generated datasets
SCORE_NAME = "score"

ENUMERATION_GUARD = 1_000_000

PI_LAW_PRESETS = ("concentrated-correct", "diffuse", "adversarial-wrong-plurality")
SCORE_LAW_PRESETS = ("separated-normal", "equal-normal")
PRESETS = (
    "separable",
    "nonseparable-control",
    "adversarial",
    "definetti-mixture",
    "definetti-fixed",
)

_SEED_MAX = 2**64
_PROB_TOL = 1e-9


@dataclass(frozen=True)
class ScoreLaw:
    """Conditional law of a path-quality score.

    kind "normal" is N(mu, sigma^2); kind "finite" puts probability
    probs[i] on values[i] and is the family that keeps weighted voting
    exactly enumerable.
    """

    kind: str = "normal"
    mu: float = 0.0
    sigma: float = 1.0
    values: tuple = ()
    probs: tuple = ()

    def __post_init__(self):
        if self.kind == "normal":
            if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
                raise SpecError("normal law needs finite mu and sigma")
            if self.sigma <= 0:
                raise SpecError("normal law needs sigma > 0")
        elif self.kind == "finite":
            if len(self.values) < 1 or len(self.values) != len(self.probs):
                raise SpecError("finite law needs matching values and probs")
            if any(not math.isfinite(v) for v in self.values):
                raise SpecError("finite law values must be finite")
            if len(set(self.values)) != len(self.values):
                raise SpecError("finite law values must be distinct")
            _check_probability_vector(self.probs, "finite law probs")
        else:
            raise SpecError(f"unknown score law kind {self.kind!r}")

    def density(self, x):
        """Probability density (normal laws only)."""
        if self.kind != "normal":
            raise DomainError("density is defined for normal laws only")
        z = (x - self.mu) / self.sigma
        return math.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def survival(self, x):
        """Upper tail P(q > x) (normal laws only)."""
        if self.kind != "normal":
            raise DomainError("survival is defined for normal laws only")
        z = (x - self.mu) / (self.sigma * math.sqrt(2.0))
        return 0.5 * math.erfc(z)

    def hazard(self, x):
        """Continuous hazard density / survival (normal laws only).

        This is the standard continuous form, available here because the
        preset densities are closed form; empirical data always goes
        through the discrete hazards of the diagnose module instead.
        """
        s = self.survival(x)
        if s <= 0.0:
            raise DomainError(f"survival vanishes at {x}; hazard undefined")
        return self.density(x) / s


@dataclass(frozen=True)
class PromptClass:
    """One prompt difficulty class: answer distribution and its truth index."""

    pi: tuple
    weight: float = 1.0
    truth_index: int = 0

    def __post_init__(self):
        _check_probability_vector(self.pi, "class pi")
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise SpecError("class weight must be positive and finite")
        if not 0 <= self.truth_index < len(self.pi):
            raise SpecError(
                f"truth_index {self.truth_index} outside pi of length {len(self.pi)}"
            )


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of the two-step synthetic vote model.

    pi_law is a preset name or an explicit tuple of PromptClass; score_laws
    is a preset name or an explicit (correct law, incorrect law) pair.
    mixture, when given, is a tuple of (component GeneratorSpec, weight)
    pairs sharing this spec's m and answers; mixture_mode picks between
    drawing the component per prompt (exchangeable, the default) and once
    per generated dataset (the conditional regime).
    """

    m: int
    answers: int
    pi_law: object = "concentrated-correct"
    score_laws: object = "separated-normal"
    mixture: tuple | None = None
    mixture_mode: str = "per-prompt"
    seed: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise SpecError(f"m must be >= 1, got {self.m}")
        if self.answers < 2:
            raise SpecError(f"answers must be >= 2, got {self.answers}")
        if self.mixture_mode not in ("per-prompt", "per-dataset"):
            raise SpecError(f"unknown mixture_mode {self.mixture_mode!r}")
        if self.seed is not None and not 0 <= self.seed < _SEED_MAX:
            raise SpecError("seed must fit in an unsigned 64-bit integer")
        if self.mixture is not None:
            if len(self.mixture) < 1:
                raise SpecError("mixture needs at least one component")
            _check_probability_vector(
                [w for _, w in self.mixture], "mixture weights"
            )
            for comp, _ in self.mixture:
                if not isinstance(comp, GeneratorSpec):
                    raise SpecError("mixture components must be GeneratorSpecs")
                if comp.mixture is not None:
                    raise SpecError("mixture components cannot nest mixtures")
                if comp.m != self.m or comp.answers != self.answers:
                    raise SpecError(
                        "mixture components must share m and answers with the spec"
                    )
        else:
            # force early validation of presets and explicit laws
            _resolve_classes(self.pi_law, self.answers)
            _resolve_score_laws(self.score_laws)


def _check_probability_vector(values, what):
    values = list(values)
    if not values:
        raise SpecError(f"{what} must be non-empty")
    for v in values:
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
            raise SpecError(f"{what} entries must be finite and >= 0")
    total = math.fsum(values)
    if abs(total - 1.0) > _PROB_TOL:
        raise SpecError(f"{what} must sum to 1, got {total}")


def answer_labels(n_answers):
    """Canonical labels for answer indices, lexicographically index-ordered."""
    width = len(str(n_answers - 1))
    if width == 1:
        return [str(k) for k in range(n_answers)]
    return [f"{k:0{width}d}" for k in range(n_answers)]


def _uniform_rest(lead, n_answers):
    rest = (1.0 - lead) / (n_answers - 1)
    return (lead,) + (rest,) * (n_answers - 1)


def _resolve_classes(pi_law, n_answers):
    """Expand a pi_law preset (or pass through explicit classes), validated."""
    if isinstance(pi_law, str):
        if pi_law == "concentrated-correct":
            classes = (
                PromptClass(pi=_uniform_rest(0.80, n_answers), weight=0.5),
                PromptClass(pi=_uniform_rest(0.55, n_answers), weight=0.5),
            )
        elif pi_law == "diffuse":
            classes = (PromptClass(pi=_uniform_rest(1.2 / n_answers, n_answers)),)
        elif pi_law == "adversarial-wrong-plurality":
            if n_answers == 2:
                pi = (0.4, 0.6)
            else:
                rest = 0.20 / (n_answers - 2)
                pi = (0.35, 0.45) + (rest,) * (n_answers - 2)
            classes = (PromptClass(pi=pi),)
        else:
            raise SpecError(f"unknown pi_law preset {pi_law!r}")
        return classes
    classes = tuple(pi_law)
    if not classes:
        raise SpecError("pi_law must name a preset or list prompt classes")
    for cls in classes:
        if not isinstance(cls, PromptClass):
            raise SpecError("explicit pi_law entries must be PromptClass")
        if len(cls.pi) != n_answers:
            raise SpecError(
                f"class pi has length {len(cls.pi)}, spec has {n_answers} answers"
            )
    return classes


def _resolve_score_laws(score_laws):
    """Expand a score-law preset (or pass through an explicit pair)."""
    if isinstance(score_laws, str):
        if score_laws == "separated-normal":
            return ScoreLaw(kind="normal", mu=1.0, sigma=1.0), ScoreLaw(
                kind="normal", mu=0.0, sigma=1.0
            )
        if score_laws == "equal-normal":
            law = ScoreLaw(kind="normal", mu=0.0, sigma=1.0)
            return law, law
        raise SpecError(f"unknown score_laws preset {score_laws!r}")
    try:
        law_cor, law_err = score_laws
    except (TypeError, ValueError):
        raise SpecError(
            "score_laws must name a preset or be a (correct, incorrect) pair"
        ) from None
    if not (isinstance(law_cor, ScoreLaw) and isinstance(law_err, ScoreLaw)):
        raise SpecError("explicit score laws must be ScoreLaw values")
    return law_cor, law_err


def _resolve_components(spec):
    """Flatten a spec into (weight, classes, (law_cor, law_err)) components."""
    if spec.mixture is None:
        specs = [(spec, 1.0)]
    else:
        specs = list(spec.mixture)
    components = []
    for comp, comp_weight in specs:
        classes = _resolve_classes(comp.pi_law, comp.answers)
        total = math.fsum(cls.weight for cls in classes)
        classes = tuple(replace(cls, weight=cls.weight / total) for cls in classes)
        components.append((comp_weight, classes, _resolve_score_laws(comp.score_laws)))
    return components


def preset(name, m=16, answers=3, seed=None):
    """A ready-made GeneratorSpec for one of the named scenarios.

    "separable" is the canonical strictly separable scenario (mixed
    difficulty, separated normal scores). "nonseparable-control" mirrors
    one answer distribution across two truth assignments, which makes the
    confidence law identical in both correctness strata: the gap is zero
    by construction and p_v is exactly 1/2. "adversarial" puts plurality
    mass on a wrong answer while correct paths score higher, the failure
    mode weighted voting exists to overturn. The two "definetti-" presets
    mix an easy and a hard component per prompt or per dataset.
    """
    if name == "separable":
        return GeneratorSpec(
            m=m, answers=answers, pi_law="concentrated-correct",
            score_laws="separated-normal", seed=seed,
        )
    if name == "nonseparable-control":
        pi = (0.7, 0.3) + (0.0,) * (answers - 2)
        return GeneratorSpec(
            m=m,
            answers=answers,
            pi_law=(
                PromptClass(pi=pi, weight=0.5, truth_index=0),
                PromptClass(pi=pi, weight=0.5, truth_index=1),
            ),
            score_laws="equal-normal",
            seed=seed,
        )
    if name == "adversarial":
        return GeneratorSpec(
            m=m,
            answers=answers,
            pi_law="adversarial-wrong-plurality",
            score_laws=(
                ScoreLaw(kind="normal", mu=2.0, sigma=1.0),
                ScoreLaw(kind="normal", mu=0.0, sigma=1.0),
            ),
            seed=seed,
        )
    if name in ("definetti-mixture", "definetti-fixed"):
        easy = GeneratorSpec(
            m=m, answers=answers, pi_law="concentrated-correct",
            score_laws="separated-normal",
        )
        hard = GeneratorSpec(
            m=m, answers=answers, pi_law="diffuse",
            score_laws="separated-normal",
        )
        return GeneratorSpec(
            m=m,
            answers=answers,
            mixture=((easy, 0.5), (hard, 0.5)),
            mixture_mode="per-prompt" if name == "definetti-mixture" else "per-dataset",
            seed=seed,
        )
    raise SpecError(f"unknown preset {name!r}; expected one of {PRESETS}")


def _sample_law(law, z, u):
    """Map shared standard-normal and uniform draws through one score law."""
    if law.kind == "normal":
        return law.mu + law.sigma * z
    cum = np.cumsum(law.probs)
    idx = np.minimum(np.searchsorted(cum, u, side="right"), len(law.probs) - 1)
    return np.asarray(law.values, dtype=float)[idx]


def _sample_pools(spec, n, rng):
    """Draw n pools: truth indices, answer matrix, score matrix."""
    components = _resolve_components(spec)
    comp_weights = np.array([w for w, _, _ in components], dtype=float)
    comp_weights = comp_weights / comp_weights.sum()
    if len(components) == 1:
        comp_idx = np.zeros(n, dtype=np.int64)
    elif spec.mixture_mode == "per-dataset":
        comp_idx = np.full(n, rng.choice(len(components), p=comp_weights))
    else:
        comp_idx = rng.choice(len(components), size=n, p=comp_weights)

    truth = np.empty(n, dtype=np.int64)
    answers = np.empty((n, spec.m), dtype=np.int64)
    scores = np.empty((n, spec.m), dtype=float)
    for ci, (_, classes, (law_cor, law_err)) in enumerate(components):
        rows = np.flatnonzero(comp_idx == ci)
        if rows.size == 0:
            continue
        class_probs = np.array([cls.weight for cls in classes], dtype=float)
        if len(classes) == 1:
            cls_idx = np.zeros(rows.size, dtype=np.int64)
        else:
            cls_idx = rng.choice(len(classes), size=rows.size, p=class_probs)
        for ki, cls in enumerate(classes):
            sub = rows[cls_idx == ki]
            if sub.size == 0:
                continue
            cum = np.cumsum(cls.pi)
            u = rng.random((sub.size, spec.m))
            drawn = np.minimum(
                np.searchsorted(cum, u, side="right"), spec.answers - 1
            )
            z = rng.standard_normal((sub.size, spec.m))
            u_scores = rng.random((sub.size, spec.m))
            pool_scores = _sample_law(law_err, z, u_scores)
            cor_mask = drawn == cls.truth_index
            pool_scores[cor_mask] = _sample_law(law_cor, z, u_scores)[cor_mask]
            truth[sub] = cls.truth_index
            answers[sub] = drawn
            scores[sub] = pool_scores
    return truth, answers, scores


def _resolve_seed(spec, seed):
    if seed is None:
        seed = spec.seed
    if seed is None:
        raise SpecError("no seed given and the spec carries none")
    return seed


def vote_outcomes_from_pools(truth, answers, scores, weight_spec, n_answers):
    """Vectorized vote over pool arrays: confidence and correctness.

    Winner selection takes the lowest index among maximal tallies, which
    is the lexicographically smallest canonical label.
    """
    if weight_spec.kind == "uniform":
        w = np.ones_like(scores)
    elif weight_spec.kind == "linear":
        w = np.maximum(scores - weight_spec.shift, weight_spec.floor)
    else:
        w = np.exp(
            weight_spec.beta * (scores - scores.max(axis=1, keepdims=True))
        )
    n = answers.shape[0]
    tallies = np.empty((n, n_answers), dtype=float)
    for k in range(n_answers):
        tallies[:, k] = np.where(answers == k, w, 0.0).sum(axis=1)
    winner = np.argmax(tallies, axis=1)
    nu = (
        np.take_along_axis(tallies, winner[:, None], axis=1)[:, 0]
        / tallies.sum(axis=1)
    )
    return nu, winner == truth


def simulate_outcomes(spec, n, seed=None, weight_spec=None):
    """Generate n pools and vote on them, entirely in arrays.

    Returns (confidence, correct) numpy arrays. Consumes the random
    stream exactly like generate_dataset, so for a shared seed the two
    routes describe the same pools.
    """
    weight_spec = weight_spec or WeightSpec(kind="uniform")
    rng = np.random.default_rng(_resolve_seed(spec, seed))
    truth, answers, scores = _sample_pools(spec, n, rng)
    return vote_outcomes_from_pools(truth, answers, scores, weight_spec, spec.answers)


def generate_dataset(spec, n, seed=None):
    """Materialize n generated pools as a records Dataset.

    Instances are ids "synth-000000" onward, truth and answers use the
    canonical labels for the spec's answer indices, and each path carries
    one score named "score". Deterministic given (spec, n, seed).
    """
    rng = np.random.default_rng(_resolve_seed(spec, seed))
    truth, answers, scores = _sample_pools(spec, n, rng)
    labels = answer_labels(spec.answers)
    instances = []
    for i in range(n):
        paths = tuple(
            PathRecord(answer_id=labels[answers[i, j]], scores={SCORE_NAME: float(scores[i, j])})
            for j in range(spec.m)
        )
        instances.append(
            PromptInstance(id=f"synth-{i:06d}", truth=labels[truth[i]], paths=paths)
        )
    return Dataset(instances=tuple(instances), score_names=frozenset([SCORE_NAME]))


@dataclass(frozen=True, eq=False)
class ExactMVStats:
    """Exact law of (confidence, correctness) from enumeration.

    grid holds the attainable confidence values in increasing order;
    mass_cor and mass_err are the joint probabilities P(nu = g, correct)
    and P(nu = g, wrong); s_cor and s_err are the conditional strict
    tails P(nu > g | stratum), NaN when the stratum has zero mass.
    """

    p_v: float
    grid: np.ndarray
    s_cor: np.ndarray
    s_err: np.ndarray
    delta: np.ndarray
    mass_cor: np.ndarray
    mass_err: np.ndarray

    def s_cor_at(self, lam):
        """Exact P(nu > lam | correct)."""
        if self.p_v <= 0.0:
            raise DomainError("correct stratum has zero mass")
        return math.fsum(self.mass_cor[self.grid > lam]) / self.p_v

    def s_err_at(self, lam):
        """Exact P(nu > lam | wrong)."""
        p_e = math.fsum(self.mass_err)
        if p_e <= 0.0:
            raise DomainError("error stratum has zero mass")
        return math.fsum(self.mass_err[self.grid > lam]) / p_e

    def delta_at(self, lam):
        """Exact separability gap at lam."""
        return self.s_cor_at(lam) - self.s_err_at(lam)

    def tail_at(self, lam):
        """Exact answered fraction P(nu > lam)."""
        keep = self.grid > lam
        return math.fsum(self.mass_cor[keep]) + math.fsum(self.mass_err[keep])

    def selective_accuracy_at(self, lam):
        """Exact P(correct | nu > lam)."""
        h = self.tail_at(lam)
        if h <= 0.0:
            raise DomainError(f"no probability mass answers at lambda={lam}")
        return math.fsum(self.mass_cor[self.grid > lam]) / h


def _stats_from_mass(mass):
    """Assemble ExactMVStats from a {(nu, correct): probability} map."""
    grid_values = sorted({nu for nu, _ in mass})
    grid = np.array(grid_values, dtype=float)
    mass_cor = np.array([mass.get((g, True), 0.0) for g in grid_values])
    mass_err = np.array([mass.get((g, False), 0.0) for g in grid_values])
    p_v = math.fsum(mass_cor)
    p_e = math.fsum(mass_err)
    size = len(grid_values)
    tail_cor = np.array([math.fsum(mass_cor[i + 1 :]) for i in range(size)])
    tail_err = np.array([math.fsum(mass_err[i + 1 :]) for i in range(size)])
    s_cor = tail_cor / p_v if p_v > 0 else np.full(size, np.nan)
    s_err = tail_err / p_e if p_e > 0 else np.full(size, np.nan)
    return ExactMVStats(
        p_v=p_v,
        grid=grid,
        s_cor=s_cor,
        s_err=s_err,
        delta=s_cor - s_err,
        mass_cor=mass_cor,
        mass_err=mass_err,
    )


def _compositions(total, parts):
    """All ways to write total as an ordered sum of `parts` counts >= 0."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _multinomial_coefficient(counts):
    coef = 1
    remaining = sum(counts)
    for c in counts:
        coef *= math.comb(remaining, c)
        remaining -= c
    return coef


def _winner_index(tallies):
    """Lowest index attaining the maximal tally (lexicographic rule)."""
    best = max(tallies)
    return tallies.index(best)


def _enumerate_counts(pi, m, truth_index):
    """Joint (nu, correct) mass of uniform-weight voting, by count vectors."""
    mass = {}
    for counts in _compositions(m, len(pi)):
        prob = float(_multinomial_coefficient(counts))
        for p_k, n_k in zip(pi, counts):
            prob *= p_k**n_k
        if prob == 0.0:
            continue
        widx = _winner_index(list(counts))
        key = (max(counts) / m, widx == truth_index)
        mass[key] = mass.get(key, 0.0) + prob
    return mass


def mv_exact_enumeration(pi, m, truth_index=0):
    """Exact majority-vote statistics by full multinomial enumeration.

    Enumerates every answer-count vector with its exact multinomial
    probability, applies the same winner rule as the aggregation module
    (maximal count, ties to the lowest index, which is the
    lexicographically smallest label), and accumulates the exact joint
    law of (confidence, correctness). Under uniform weights this law
    depends on the generator only through pi, so score laws never enter.

    Raises
    ------
    SpecError
        On an invalid probability vector or truth index.
    TooLarge
        When the number of count vectors exceeds the enumeration guard.
    """
    pi = tuple(float(p) for p in pi)
    _check_probability_vector(pi, "pi")
    if m < 1:
        raise SpecError(f"m must be >= 1, got {m}")
    if not 0 <= truth_index < len(pi):
        raise SpecError(f"truth_index {truth_index} outside pi of length {len(pi)}")
    n_vectors = math.comb(m + len(pi) - 1, len(pi) - 1)
    if n_vectors > ENUMERATION_GUARD:
        raise TooLarge(
            f"{n_vectors} count vectors exceed the guard of {ENUMERATION_GUARD}"
        )
    return _stats_from_mass(_enumerate_counts(pi, m, truth_index))


def _cluster_assignments(count, law, weight_spec):
    """(tally, probability) of every score assignment of one answer cluster."""
    if count == 0:
        return [(0.0, 1.0)]
    values = law.values
    probs = law.probs
    weights = [weight(v, weight_spec) for v in values]
    out = []
    for assignment in _compositions(count, len(values)):
        prob = float(_multinomial_coefficient(assignment))
        tally = 0.0
        for c, p, w in zip(assignment, probs, weights):
            prob *= p**c
            tally += c * w
        if prob > 0.0:
            out.append((tally, prob))
    return out


def _enumerate_weighted(pi, m, truth_index, laws, weight_spec):
    """Joint (nu, correct) mass of weighted voting over finite score laws."""
    law_cor, law_err = laws
    n_answers = len(pi)
    sizes = [
        len((law_cor if k == truth_index else law_err).values)
        for k in range(n_answers)
    ]
    total_outcomes = 0
    for counts in _compositions(m, n_answers):
        per = 1
        for c, s in zip(counts, sizes):
            per *= math.comb(c + s - 1, s - 1)
        total_outcomes += per
        if total_outcomes > ENUMERATION_GUARD:
            raise TooLarge(
                f"joint enumeration exceeds the guard of {ENUMERATION_GUARD}"
            )
    mass = {}
    for counts in _compositions(m, n_answers):
        prob_counts = float(_multinomial_coefficient(counts))
        for p_k, n_k in zip(pi, counts):
            prob_counts *= p_k**n_k
        if prob_counts == 0.0:
            continue
        cluster_options = [
            _cluster_assignments(
                counts[k], law_cor if k == truth_index else law_err, weight_spec
            )
            for k in range(n_answers)
        ]
        for combo in itertools.product(*cluster_options):
            tallies = [t for t, _ in combo]
            prob = prob_counts
            for _, p in combo:
                prob *= p
            if prob == 0.0:
                continue
            widx = _winner_index(tallies)
            nu = tallies[widx] / math.fsum(tallies)
            key = (nu, widx == truth_index)
            mass[key] = mass.get(key, 0.0) + prob
    return mass


def closed_form_targets(spec, weight_spec=None):
    """Exact (p_v, S_cor, S_err, Delta) of a generator spec, when available.

    Uniform weights reduce to count enumeration per prompt class (score
    laws never matter there), combined across classes and mixture
    components by total probability. Non-uniform weights are exactly
    enumerable only when both score laws have finite support.

    Raises
    ------
    NoClosedForm
        For non-uniform weights over continuous score laws.
    TooLarge
        When enumeration would exceed the guard.
    """
    weight_spec = weight_spec or WeightSpec(kind="uniform")
    components = _resolve_components(spec)
    total_weight = math.fsum(w for w, _, _ in components)
    total_mass = {}
    for comp_weight, classes, laws in components:
        for cls in classes:
            share = (comp_weight / total_weight) * cls.weight
            if weight_spec.kind == "uniform":
                cls_mass = _enumerate_counts(cls.pi, spec.m, cls.truth_index)
            else:
                if not (laws[0].kind == "finite" and laws[1].kind == "finite"):
                    raise NoClosedForm(
                        "weighted voting over continuous score laws has no "
                        "closed form; use Monte Carlo"
                    )
                cls_mass = _enumerate_weighted(
                    cls.pi, spec.m, cls.truth_index, laws, weight_spec
                )
            for key, prob in cls_mass.items():
                total_mass[key] = total_mass.get(key, 0.0) + share * prob
    return _stats_from_mass(total_mass)
