"""Open-loop sequence generators.

Six ways to pick k hyperparameter configurations before any of them is
evaluated: i.i.d. uniform, lattice grid, Sobol (optionally with a
Cranley-Patterson rotation), Metropolis k-DPP chains over discrete and mixed
spaces, and sequential posterior-variance sampling with one-point extension.

Every sampler is a pure function of its arguments; all randomness flows from
the caller-supplied 64-bit seed through tagged ``numpy.random.SeedSequence``
substreams, so repeated calls reproduce bit-identical results.
"""

from __future__ import annotations

import itertools
import math
import random as _pyrandom
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import DegeneratePoolError, UnsupportedSpaceError
from .kernel import KernelConfig, _cross_kernel, _logdet_psd, _posterior_variances
from .searchspace import (
    Configuration,
    SearchSpace,
    encode,
    sample_uniform,
)

_MASK64 = (1 << 64) - 1

# Fixed stream tags keep the samplers' substreams disjoint under a shared seed.
_STREAM_UNIFORM = 1
_STREAM_SOBOL = 2
_STREAM_DISCRETE = 3
_STREAM_MIXED = 4
_STREAM_POOL = 5

#: Determinants at or below this are treated as exactly singular.
_SINGULAR_DET = 1e-300


def _rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, *path]))


def default_mcmc_steps(k: int) -> int:
    """Default Metropolis budget: max(10 * k * ln(k+1) * 50, 5000)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return max(math.ceil(10.0 * k * math.log(k + 1) * 50.0), 5000)


@dataclass(frozen=True)
class McmcSettings:
    """Step budget and seed for the Metropolis chains."""

    steps: int
    seed: int

    def __post_init__(self) -> None:
        if not isinstance(self.steps, int) or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if not isinstance(self.seed, int):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")


@dataclass(frozen=True)
class SampleSet:
    """An ordered batch of configurations plus provenance.

    ``space`` is carried along so a sample can later be extended without the
    caller re-supplying it.
    """

    points: tuple[Configuration, ...]
    sampler: str
    seed: int
    space: SearchSpace
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "diagnostics", MappingProxyType(dict(self.diagnostics)))

    @property
    def k(self) -> int:
        return len(self.points)


def empty_sample(space: SearchSpace, sampler: str = "kdpp-seq", seed: int = 0) -> SampleSet:
    """A zero-point sample, the base case for iterated extension."""
    return SampleSet(points=(), sampler=sampler, seed=seed, space=space)


def uniform_sample(space: SearchSpace, k: int, seed: int) -> SampleSet:
    """k i.i.d. uniform configurations.  Duplicates are permitted."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = _rng(seed, _STREAM_UNIFORM)
    points = tuple(sample_uniform(space, rng) for _ in range(k))
    return SampleSet(points=points, sampler="uniform", seed=seed, space=space)


def _require_hypercube(space: SearchSpace, sampler: str) -> None:
    if not space.is_hypercube():
        raise UnsupportedSpaceError(
            f"{sampler} sampling is defined only on hypercube spaces "
            "(numeric dimensions, no conditional structure)"
        )


def _from_unit(dim, u: float) -> object:
    """Invert the [0,1] feature rescaling back to a raw dimension value."""
    lo, hi = dim.bounds
    if dim.scale == "log":
        h = math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo)))
    else:
        h = lo + u * (hi - lo)
    h = min(max(h, lo), hi)
    if dim.kind == "integer":
        return min(max(int(math.floor(h + 0.5)), int(lo)), int(hi))
    return h


def _configs_from_unit(space: SearchSpace, unit_points: np.ndarray) -> tuple[Configuration, ...]:
    dims = space.roots
    out = []
    for row in unit_points:
        values = {d.name: _from_unit(d, float(row[j])) for j, d in enumerate(dims)}
        out.append(space.configuration(values))
    return tuple(out)


def grid_sample(space: SearchSpace, k: int) -> SampleSet:
    """First k points of the smallest axis-aligned lattice covering the space.

    Uses the smallest m with (m+1)^d >= k and walks the (i_1/m, ..., i_d/m)
    lattice in lexicographic index order.  Deterministic; no seed.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _require_hypercube(space, "grid")
    d = len(space.roots)
    m = 0
    while (m + 1) ** d < k:
        m += 1
    rows = []
    for idx in itertools.islice(itertools.product(range(m + 1), repeat=d), k):
        rows.append([i / m if m > 0 else 0.0 for i in idx])
    points = _configs_from_unit(space, np.array(rows))
    return SampleSet(
        points=points,
        sampler="grid",
        seed=0,
        space=space,
        diagnostics={"grid_m": float(m)},
    )


def sobol_sample(space: SearchSpace, k: int, rotate: bool, seed: int) -> SampleSet:
    """First k Sobol points (Joe-Kuo directions), optionally rotated.

    The all-zeros leading term of the raw sequence is skipped, so the 1-d
    sequence starts 0.5, 0.75, 0.25, ...  With ``rotate``, a seed-derived
    uniform shift is added modulo 1 per dimension (Cranley-Patterson), which
    preserves the low-discrepancy structure while randomizing placement.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _require_hypercube(space, "sobol")
    d = len(space.roots)
    try:
        engine = qmc.Sobol(d=d, scramble=False)
    except ValueError as exc:
        raise UnsupportedSpaceError(f"sobol: {exc}") from exc
    engine.fast_forward(1)
    with warnings.catch_warnings():
        # Drawing a non-power-of-two count trips a balance-properties
        # warning that is irrelevant for dispersion work.
        warnings.simplefilter("ignore", UserWarning)
        unit = engine.random(k)
    if rotate:
        shift = _rng(seed, _STREAM_SOBOL).random(d)
        unit = (unit + shift) % 1.0
    points = _configs_from_unit(space, unit)
    return SampleSet(
        points=points,
        sampler="sobol",
        seed=seed,
        space=space,
        diagnostics={"rotated": float(bool(rotate))},
    )


def _minor_det(L: np.ndarray, key: tuple[int, ...], cache: dict) -> float:
    """Determinant of the principal minor L[key, key], memoized.

    Closed forms for sizes <= 3 keep the Metropolis hot loop off the
    LAPACK path; larger minors go through slogdet.
    """
    det = cache.get(key)
    if det is not None:
        return det
    n = len(key)
    if n == 1:
        det = float(L[key[0], key[0]])
    elif n == 2:
        i, j = key
        det = float(L[i, i] * L[j, j] - L[i, j] * L[i, j])
    elif n == 3:
        i, j, l = key
        a, b, c = L[i, i], L[i, j], L[i, l]
        e, f, g = L[j, j], L[j, l], L[l, l]
        det = float(a * (e * g - f * f) - b * (b * g - f * c) + c * (b * f - e * c))
    else:
        sign, ld = np.linalg.slogdet(L[np.ix_(key, key)])
        det = float(sign * math.exp(ld)) if math.isfinite(ld) else 0.0
    cache[key] = det
    return det


def kdpp_mcmc_discrete(L, k: int, settings: McmcSettings) -> tuple[int, ...]:
    """Metropolis k-DPP sampling over the rows of a full N x N ensemble matrix.

    Starts from a uniform size-k index set; each step proposes swapping a
    uniformly chosen member u for a uniformly chosen outsider v and accepts
    with probability (1/2) * min(1, det(L_Y') / det(L_Y)).  A singular
    proposal is never accepted; from a singular current state any
    nonsingular proposal is taken (probability-1 escape).  Returns the final
    index set, sorted.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("L must be a square matrix")
    N = L.shape[0]
    if not 1 <= k <= N:
        raise ValueError(f"k must lie in [1, {N}], got {k}")

    # Seed a stdlib generator from the tagged substream; its scalar draws are
    # several times cheaper than Generator calls in this pure-Python loop.
    state = np.random.SeedSequence([settings.seed & _MASK64, _STREAM_DISCRETE]).generate_state(4)
    rr = _pyrandom.Random(int.from_bytes(state.tobytes(), "little"))

    Y = rr.sample(range(N), k)
    if k == N:
        return tuple(sorted(Y))
    in_Y = [False] * N
    for i in Y:
        in_Y[i] = True
    comp = [i for i in range(N) if not in_Y[i]]

    n_comp = N - k
    if k == 2 and N <= 1024:
        # Pair states index a precomputed determinant table; together with
        # stdlib scalar draws this keeps the per-step cost far below the
        # generic minor-determinant path (the N=5 correctness experiment runs
        # 10^5 chains, so constants matter here).
        diag = np.diagonal(L)
        table = (np.outer(diag, diag) - L * L.T).tolist()
        y0, y1 = Y
        det_cur = table[y0][y1]
        rand = rr.random
        randrange = rr.randrange
        getrandbits = rr.getrandbits
        for _ in range(settings.steps):
            ui = getrandbits(1)
            vi = randrange(n_comp)
            v = comp[vi]
            if ui:
                u, keep = y1, y0
            else:
                u, keep = y0, y1
            det_prop = table[keep][v]
            if det_prop <= _SINGULAR_DET:
                continue
            if det_cur <= _SINGULAR_DET:
                accept = True
            else:
                ratio = det_prop / det_cur
                p = 0.5 if ratio >= 1.0 else 0.5 * ratio
                accept = rand() < p
            if accept:
                comp[vi] = u
                det_cur = det_prop
                if ui:
                    y1 = v
                else:
                    y0 = v
        return (y0, y1) if y0 < y1 else (y1, y0)

    cache: dict[tuple[int, ...], float] = {}
    det_cur = _minor_det(L, tuple(sorted(Y)), cache)
    for _ in range(settings.steps):
        ui = rr.randrange(k)
        vi = rr.randrange(n_comp)
        u = Y[ui]
        v = comp[vi]
        Y[ui] = v
        det_prop = _minor_det(L, tuple(sorted(Y)), cache)
        if det_prop <= _SINGULAR_DET:
            accept = False
        elif det_cur <= _SINGULAR_DET:
            accept = True
        else:
            ratio = det_prop / det_cur
            p = 0.5 if ratio >= 1.0 else 0.5 * ratio
            accept = rr.random() < p
        if accept:
            comp[vi] = u
            det_cur = det_prop
        else:
            Y[ui] = u
    return tuple(sorted(Y))


def kdpp_mcmc_mixed(
    space: SearchSpace, k: int, cfg: KernelConfig, settings: McmcSettings
) -> SampleSet:
    """Metropolis k-DPP sampling over an arbitrary space (Algorithm-agnostic
    in the space's kinds: continuous, discrete, or conditional trees).

    The chain state is a k-point configuration list.  Each step replaces a
    uniformly chosen member with a fresh uniform draw from the space and
    accepts with probability (1/2) * min(1, exp(logdet(L') - logdet(L))).
    Proposing a duplicate of a current point makes L' (numerically) singular
    and is thus auto-rejected; a singular current state is escaped with
    probability 1 on the first nonsingular proposal.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = _rng(settings.seed, _STREAM_MIXED)

    phi_cache: dict[tuple, np.ndarray] = {}

    def phi_of(config: Configuration) -> np.ndarray:
        key = tuple(config.values.items())
        phi = phi_cache.get(key)
        if phi is None:
            phi = encode(space, config)
            # Continuous proposals never repeat, so keep the cache from
            # growing past the point where hits are plausible.
            if len(phi_cache) >= 4096:
                phi_cache.clear()
            phi_cache[key] = phi
        return phi

    beta = [sample_uniform(space, rng) for _ in range(k)]
    phis = np.stack([phi_of(p) for p in beta])
    inv_two_sigma_sq = 1.0 / (2.0 * cfg.sigma**2)

    L = _cross_kernel(phis, phis, cfg)
    L[np.diag_indices_from(L)] += cfg.jitter
    ld_cur = _logdet_psd(L)

    accepts = 0
    for _ in range(settings.steps):
        ui = int(rng.integers(k))
        v = sample_uniform(space, rng)
        phi_v = phi_of(v)
        col = np.exp(-np.sum((phis - phi_v) ** 2, axis=1) * inv_two_sigma_sq)
        L_prop = L.copy()
        L_prop[ui, :] = col
        L_prop[:, ui] = col
        L_prop[ui, ui] = 1.0 + cfg.jitter
        ld_prop = _logdet_psd(L_prop)
        if ld_prop == -math.inf:
            accept = False
        elif ld_cur == -math.inf:
            accept = True
        else:
            diff = ld_prop - ld_cur
            p = 0.5 if diff >= 0.0 else 0.5 * math.exp(diff)
            accept = rng.random() < p
        if accept:
            beta[ui] = v
            phis[ui] = phi_v
            L = L_prop
            ld_cur = ld_prop
            accepts += 1
    return SampleSet(
        points=tuple(beta),
        sampler="kdpp-mcmc",
        seed=settings.seed,
        space=space,
        diagnostics={
            "mcmc_steps": float(settings.steps),
            "acceptance_rate": accepts / settings.steps,
            "sigma": cfg.sigma,
            "jitter": cfg.jitter,
        },
    )


def _enumerate_configs(space: SearchSpace, cap: int) -> list[Configuration] | None:
    """All configurations of a fully discrete space, in deterministic
    (layout x value) order, or None if the space has a continuous dimension
    or more than ``cap`` configurations."""
    out: list[dict] = [{}]

    def values_of(dim) -> list | None:
        if dim.kind == "continuous":
            return None
        if dim.kind == "integer":
            lo, hi = int(dim.bounds[0]), int(dim.bounds[1])
            return list(range(lo, hi + 1))
        if dim.kind == "boolean":
            return [False, True]
        return list(dim.categories)

    def expand(dims) -> bool:
        nonlocal out
        for dim in dims:
            vals = values_of(dim)
            if vals is None:
                return False
            grown: list[dict] = []
            for partial in out:
                for val in vals:
                    if len(grown) >= cap:
                        return False
                    branch = dict(partial)
                    branch[dim.name] = val
                    grown.append(branch)
            out = grown
            for trigger, child in dim.children:
                # Conditional subtree: expand only the branches that trigger it.
                triggered = [b for b in out if b[dim.name] == trigger]
                rest = [b for b in out if b[dim.name] != trigger]
                out = triggered
                if not expand([child]):
                    return False
                out = out + rest
                if len(out) > cap:
                    return False
        return True

    if not expand(space.roots):
        return None
    return [space.configuration(v) for v in out]


def _continuous_roots(space: SearchSpace) -> tuple | None:
    """The space's dimensions when it is flat and all-continuous, else None."""
    for dim in space.roots:
        if dim.kind != "continuous" or dim.children:
            return None
    return space.roots


def _continuous_pool(dims, rng: np.random.Generator, pool_size: int):
    """Vectorized uniform pool over a flat all-continuous space.

    Draw-for-draw identical to ``pool_size`` sample_uniform calls followed by
    encode: the same doubles come off the bit stream in the same order and
    pass through the same per-value arithmetic (math.exp / math.log for log
    scales rather than their SIMD array versions, which may differ in the
    last ulp), so the two constructions are interchangeable bit-for-bit.
    """
    xs = rng.random((pool_size, len(dims)))
    vals = np.empty_like(xs)
    phis = np.empty_like(xs)
    for j, dim in enumerate(dims):
        lo, hi = dim.bounds
        if dim.scale == "log":
            llo, lhi = math.log(lo), math.log(hi)
            width = lhi - llo
            col = [min(max(math.exp(llo + x * width), lo), hi) for x in xs[:, j].tolist()]
            vals[:, j] = col
            phis[:, j] = [(math.log(v) - llo) / width for v in col]
        else:
            v = lo + xs[:, j] * (hi - lo)
            vals[:, j] = v
            phis[:, j] = (v - lo) / (hi - lo)
    return vals, phis


def _draw_next(
    space: SearchSpace,
    selected_phis: np.ndarray,
    cfg: KernelConfig,
    pool_size: int,
    seed: int,
    step_index: int,
    enumerated: list[Configuration] | None,
) -> Configuration:
    """One posterior-variance draw: build the step's candidate pool, weight by
    posterior variance given the selected features, sample one candidate.

    The step RNG is keyed by (seed, step_index), so re-running the same step
    with the same prefix is bit-reproducible no matter how the prefix was
    produced.
    """
    rng = _rng(seed, _STREAM_POOL, step_index)
    pool: list[Configuration] | None
    fast_dims = None
    if enumerated is not None:
        pool = enumerated
        pool_phis = np.stack([encode(space, c) for c in pool])
    else:
        fast_dims = _continuous_roots(space)
        if fast_dims is not None:
            pool = None
            vals, pool_phis = _continuous_pool(fast_dims, rng, pool_size)
        else:
            pool = [sample_uniform(space, rng) for _ in range(pool_size)]
            pool_phis = np.stack([encode(space, c) for c in pool])
    pv = _posterior_variances(pool_phis, selected_phis, cfg)
    pv = np.maximum(pv, 0.0)
    total = float(pv.sum())
    if not total > _SINGULAR_DET:
        raise DegeneratePoolError(
            "every candidate in the pool has (numerically) zero posterior variance"
        )
    choice = int(rng.choice(pool_phis.shape[0], p=pv / total))
    if pool is not None:
        return pool[choice]
    assert fast_dims is not None
    return space.configuration(
        {dim.name: float(vals[choice, j]) for j, dim in enumerate(fast_dims)}
    )


def kdpp_sequential(
    space: SearchSpace, k: int, cfg: KernelConfig, pool_size: int = 1000, seed: int = 0
) -> SampleSet:
    """Sequential k-DPP sampling: k rounds of drawing a candidate pool and
    picking one candidate with probability proportional to its Gaussian-
    process posterior variance given the points selected so far.

    The first point is a uniform draw (empty conditioning).  A fully discrete
    space with at most ``pool_size`` configurations uses the enumerated space
    itself as the pool every round, making each round's conditional
    distribution exact.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    enumerated = _enumerate_configs(space, pool_size)
    selected: list[Configuration] = []
    phis = np.empty((0, space.feature_width))
    for i in range(k):
        nxt = _draw_next(space, phis, cfg, pool_size, seed, i, enumerated)
        selected.append(nxt)
        phis = np.vstack([phis, encode(space, nxt)[None, :]])
    return SampleSet(
        points=tuple(selected),
        sampler="kdpp-seq",
        seed=seed,
        space=space,
        diagnostics={
            "pool_size": float(pool_size),
            "enumerated_pool": float(enumerated is not None),
            "sigma": cfg.sigma,
            "jitter": cfg.jitter,
        },
    )


def extend_sample(
    sample: SampleSet, cfg: KernelConfig, pool_size: int = 1000, seed: int = 0
) -> SampleSet:
    """Grow a sample by one point drawn proportional to posterior variance
    given the existing points; the existing points pass through untouched.

    With the seed that produced a sequential sample, iterating this from an
    empty sample replays kdpp_sequential bit-for-bit: step i's pool RNG is
    keyed by (seed, i) in both paths.
    """
    space = sample.space
    enumerated = _enumerate_configs(space, pool_size)
    if sample.points:
        phis = np.stack([encode(space, p) for p in sample.points])
    else:
        phis = np.empty((0, space.feature_width))
    nxt = _draw_next(space, phis, cfg, pool_size, seed, len(sample.points), enumerated)
    return SampleSet(
        points=sample.points + (nxt,),
        sampler=sample.sampler,
        seed=seed,
        space=space,
        diagnostics={
            "pool_size": float(pool_size),
            "enumerated_pool": float(enumerated is not None),
            "sigma": cfg.sigma,
            "jitter": cfg.jitter,
        },
    )
