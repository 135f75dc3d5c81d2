"""Direct search for stable proper compensator pairs.

A candidate pair is flattened into a coefficient vector

    q = (a_0..a_2n, b_0..b_2n),   len(q) = 4n + 2,

with C = (a_0 + a_1 s + ... + a_n s^n) / (1 + a_{n+1} s + ... + a_{2n} s^n)
and P built the same way from the b block.  Pinning both denominator
constant terms at 1 removes the scale ambiguity of each ratio.

The scalar objective rewards candidates whose own poles and whose
closed-loop poles all sit in the open left half plane; a genetic algorithm
minimizes it.  Any strictly negative objective value certifies a
stabilizing stable pair, which `verify_pair` then re-checks from scratch.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .poly import Polynomial
from .tf import CompensatorPair, RationalTF, closed_loop

# Score assigned to degenerate candidates (degree collapse anywhere);
# finite so ranking stays total and the search can move past them.
LARGE = 1e9

TOURNAMENT_SIZE = 3
BLEND_ALPHA = 0.5


@dataclass(frozen=True)
class CoeffVector:
    """Flat encoding of a candidate pair of order n."""

    q: tuple[float, ...]
    n: int

    def __init__(self, q: Sequence[float], n: int):
        n = int(n)
        if n < 1:
            raise ValueError("compensator order must be at least 1")
        q = tuple(float(x) for x in q)
        if len(q) != 4 * n + 2:
            raise ValueError(
                f"coefficient vector for order {n} must have length "
                f"{4 * n + 2}, got {len(q)}"
            )
        if not all(math.isfinite(x) for x in q):
            raise ValueError("coefficient vector entries must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "n", n)

    def split(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """(a block, b block), each of length 2n+1."""
        half = 2 * self.n + 1
        return self.q[:half], self.q[half:]


def decode(vec: CoeffVector) -> CompensatorPair:
    """Candidate pair from a coefficient vector.

    No stability or properness screening happens here; bad candidates are
    scored by `objective` and judged by `verify_pair`.
    """
    n = vec.n
    a, b = vec.split()
    C = RationalTF(a[: n + 1], (1.0,) + a[n + 1 :])
    P = RationalTF(b[: n + 1], (1.0,) + b[n + 1 :])
    return CompensatorPair(C=C, P=P, label="candidate")


def encode(pair: CompensatorPair, n: int | None = None) -> CoeffVector:
    """Coefficient vector of a pair, order inferred unless given.

    Both transfer functions are first rescaled so the denominator constant
    term is exactly 1; a denominator that vanishes at s = 0 has no such
    normal form and is rejected.
    """
    tfs = (pair.C, pair.P)
    if n is None:
        n = max(max(t.num.degree, t.den.degree) for t in tfs)
        n = max(n, 1)
    blocks: list[float] = []
    for t in tfs:
        d0 = t.den.coeffs[0]
        if d0 == 0.0:
            raise ValueError(
                "cannot encode: denominator constant term is zero"
            )
        num = [c / d0 for c in t.num.coeffs]
        den = [c / d0 for c in t.den.coeffs]
        if len(num) > n + 1 or len(den) > n + 1:
            raise ValueError(
                f"pair has degree above the requested order {n}"
            )
        num += [0.0] * (n + 1 - len(num))
        den += [0.0] * (n + 1 - len(den))
        blocks.extend(num)
        blocks.extend(den[1:])
    return CoeffVector(blocks, n)


@dataclass(frozen=True)
class ObjectiveConfig:
    """Plant and weights for the pole-placement score."""

    plant: RationalTF
    penalty: float = 6.0
    eps1: float = 1e-5
    eps2: float = 1e-4

    def __post_init__(self):
        if not (math.isfinite(self.penalty) and self.penalty > 0.0):
            raise ValueError("penalty must be positive")
        if self.eps1 < 0.0 or self.eps2 < 0.0:
            raise ValueError("eps weights must be nonnegative")

    def to_json_dict(self) -> dict:
        return {
            "plant": self.plant.to_json_dict(),
            "penalty": self.penalty,
            "eps1": self.eps1,
            "eps2": self.eps2,
        }


def objective(vec: CoeffVector, cfg: ObjectiveConfig) -> float:
    """Stability score of one candidate; lower is better, negative certifies.

    p1 is the rightmost real part over the candidate's own poles, p2 the
    rightmost over the closed-loop poles.  While p1 >= 0 the score is
    p2 + penalty*p1, which pushes the compensators themselves into the left
    half plane before polishing the loop; once p1 < 0 only p2 remains.  Two
    small regularizers keep coefficients and pole magnitudes from drifting:

        F = f0 + eps1*||q||_2 + eps2*max|z_H|.

    Candidates whose compensator or closed-loop denominator degree
    collapses score LARGE instead of raising.
    """
    pair = decode(vec)
    n = vec.n
    d_C, d_P = pair.C.den, pair.P.den
    if d_C.degree != n or d_P.degree != n:
        return LARGE
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            H = closed_loop(cfg.plant, pair.C, pair.P)
        except ValueError:
            return LARGE
    if H.den.degree != 2 * n + cfg.plant.den.degree:
        return LARGE
    zc = d_C.roots()
    zp = d_P.roots()
    zh = H.den.roots()
    p1 = max(float(zc.real.max()), float(zp.real.max()))
    p2 = float(zh.real.max())
    f0 = p2 + cfg.penalty * p1 if p1 >= 0.0 else p2
    q = np.asarray(vec.q)
    return float(
        f0
        + cfg.eps1 * np.linalg.norm(q)
        + cfg.eps2 * float(np.abs(zh).max())
    )


@dataclass(frozen=True)
class GaConfig:
    """Search knobs: generational GA, tournament-3, blend crossover.

    Mutation is multiplicative log-normal per gene so it respects the
    scale each coefficient has already reached; init_range bounds the
    initial sampling only, not the search.
    """

    population: int = 200
    generations: int = 500
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_scale: float = 0.2
    elitism: int = 2
    init_range: tuple[float, float] = (-12.0, 12.0)
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.generations < 0:
            raise ValueError("generations must be nonnegative")
        for name in ("crossover_rate", "mutation_rate"):
            r = getattr(self, name)
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.mutation_scale < 0.0:
            raise ValueError("mutation_scale must be nonnegative")
        if not 0 <= self.elitism < self.population:
            raise ValueError("elitism must lie in [0, population)")
        lo, hi = self.init_range
        if not lo < hi:
            raise ValueError("init_range must be a nonempty interval")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def to_json_dict(self) -> dict:
        return {
            "population": self.population,
            "generations": self.generations,
            "crossover_rate": self.crossover_rate,
            "mutation_rate": self.mutation_rate,
            "mutation_scale": self.mutation_scale,
            "elitism": self.elitism,
            "init_range": list(self.init_range),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SynthesisResult:
    """Best candidate found plus the per-generation best-ever trace."""

    best_q: CoeffVector
    best_F: float
    pair: CompensatorPair
    history: tuple[float, ...]
    objective_config: ObjectiveConfig
    ga_config: GaConfig

    @property
    def success(self) -> bool:
        return self.best_F < 0.0

    def to_json_dict(self) -> dict:
        return {
            "n": self.best_q.n,
            "best_q": list(self.best_q.q),
            "best_F": self.best_F,
            "success": self.success,
            "pair": self.pair.to_json_dict(),
            "history": list(self.history),
            "objective": self.objective_config.to_json_dict(),
            "ga": self.ga_config.to_json_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def history_to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("generation,best_F\n")
            for g, F in enumerate(self.history):
                fh.write(f"{g},{F:.17g}\n")


def ga_search(
    obj_cfg: ObjectiveConfig, ga_cfg: GaConfig, n: int
) -> SynthesisResult:
    """Minimize the objective over order-n coefficient vectors.

    Deterministic for a fixed seed: one RNG stream consumed in a fixed
    order (parents, crossover, mutation, in that order within each
    generation).  history[g] is the best value seen up to and including
    generation g; history[0] scores the initial population.  Failure to
    reach F < 0 is a valid outcome, reported through `success`.
    """
    if n < 1:
        raise ValueError("compensator order must be at least 1")
    dim = 4 * n + 2
    rng = np.random.default_rng(ga_cfg.seed)
    lo0, hi0 = ga_cfg.init_range

    def score(row: np.ndarray) -> float:
        return objective(CoeffVector(row, n), obj_cfg)

    pop = rng.uniform(lo0, hi0, (ga_cfg.population, dim))
    fit = np.array([score(ind) for ind in pop])
    best_i = int(fit.argmin())
    best_q = pop[best_i].copy()
    best_F = float(fit[best_i])
    history = [best_F]

    for _ in range(ga_cfg.generations):
        order = np.argsort(fit)
        new = [pop[order[i]].copy() for i in range(ga_cfg.elitism)]
        while len(new) < ga_cfg.population:
            i1 = min(
                rng.integers(0, ga_cfg.population, TOURNAMENT_SIZE),
                key=lambda i: fit[i],
            )
            i2 = min(
                rng.integers(0, ga_cfg.population, TOURNAMENT_SIZE),
                key=lambda i: fit[i],
            )
            pa, pb = pop[i1].copy(), pop[i2].copy()
            if rng.random() < ga_cfg.crossover_rate:
                lo = np.minimum(pa, pb)
                hi = np.maximum(pa, pb)
                d = hi - lo
                child1 = rng.uniform(lo - BLEND_ALPHA * d, hi + BLEND_ALPHA * d)
                child2 = rng.uniform(lo - BLEND_ALPHA * d, hi + BLEND_ALPHA * d)
            else:
                child1, child2 = pa, pb
            for child in (child1, child2):
                mask = rng.random(dim) < ga_cfg.mutation_rate
                child[mask] *= np.exp(
                    ga_cfg.mutation_scale * rng.standard_normal(int(mask.sum()))
                )
                new.append(child)
        # two children per mating can overshoot an odd slot count
        pop = np.array(new[: ga_cfg.population])
        fit = np.array([score(ind) for ind in pop])
        i = int(fit.argmin())
        if fit[i] < best_F:
            best_F = float(fit[i])
            best_q = pop[i].copy()
        history.append(best_F)

    vec = CoeffVector(best_q, n)
    return SynthesisResult(
        best_q=vec,
        best_F=best_F,
        pair=decode(vec),
        history=tuple(history),
        objective_config=obj_cfg,
        ga_config=ga_cfg,
    )


@dataclass(frozen=True)
class VerificationReport:
    """Independent pass/fail audit of a pair against a plant.

    Rightmost fields are real parts of the nearest-to-instability pole of
    each denominator (-inf when there are no poles at all); relative
    degrees are the properness margins.
    """

    c_proper: bool
    p_proper: bool
    c_stable: bool
    p_stable: bool
    closed_loop_stable: bool
    c_rightmost: float
    p_rightmost: float
    h_rightmost: float
    c_relative_degree: int
    p_relative_degree: int

    @property
    def passed(self) -> bool:
        return (
            self.c_proper
            and self.p_proper
            and self.c_stable
            and self.p_stable
            and self.closed_loop_stable
        )

    def to_json_dict(self) -> dict:
        return {
            "c_proper": self.c_proper,
            "p_proper": self.p_proper,
            "c_stable": self.c_stable,
            "p_stable": self.p_stable,
            "closed_loop_stable": self.closed_loop_stable,
            "c_rightmost": self.c_rightmost,
            "p_rightmost": self.p_rightmost,
            "h_rightmost": self.h_rightmost,
            "c_relative_degree": self.c_relative_degree,
            "p_relative_degree": self.p_relative_degree,
            "passed": self.passed,
        }


def _rightmost(p: Polynomial) -> float:
    return -math.inf if p.degree < 1 else p.rightmost_real_part()


def verify_pair(G: RationalTF, pair: CompensatorPair) -> VerificationReport:
    """Re-derive every stability and properness claim for a pair.

    Works from the raw polynomials: the closed-loop denominator is
    assembled without cancellation, so a pair that only looks stable after
    cancelling an unstable factor fails here.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        H = closed_loop(G, pair.C, pair.P)
    return VerificationReport(
        c_proper=pair.C.is_proper,
        p_proper=pair.P.is_proper,
        c_stable=pair.C.den.is_hurwitz(),
        p_stable=pair.P.den.is_hurwitz(),
        closed_loop_stable=H.den.is_hurwitz(),
        c_rightmost=_rightmost(pair.C.den),
        p_rightmost=_rightmost(pair.P.den),
        h_rightmost=_rightmost(H.den),
        c_relative_degree=pair.C.den.degree - pair.C.num.degree,
        p_relative_degree=pair.P.den.degree - pair.P.num.degree,
    )
