"""Random objects: coefficient ensembles, Sine_beta paths, and biasing.

Sampling conventions.  All randomness flows through :class:`SeedSpec`;
identical (master_seed, stream_id) reproduce identical draws bit for bit
on one platform, and distinct stream ids give independent streams.  Monte
Carlo experiments assign stream_id = replica index under a fixed master
seed, so replica-level parallelism cannot change results.

The coefficient ensemble with parameters (n, beta) draws the modified
coefficients independently: gamma_k = r_k e^{i Theta_k} with
r_k^2 ~ Beta(1, (beta/2)(n-k-1)) by exact inversion r^2 = 1 - U^{1/s},
Theta_k uniform, and the last coefficient uniform on the unit circle.
The atom-at-1-biased version keeps the same radial law and tilts each
angle by the Poisson kernel at the real point r_k; that conditional angle
law is the harmonic measure seen from r_k, sampled exactly as the boundary
image of a uniform point under the disk automorphism w -> (w+r)/(1+rw).

The Sine_beta driving path lives in logarithmic time u = (4/beta) log t:
y = exp(b2(u) - u/2) and x is the Ito integral -int_u^0 e^{b2-s/2} db1,
accumulated from u = 0 with left-endpoint (Euler-Maruyama) sums.  The
path is truncated at t_min and laid on the time grid t = e^{beta u / 4};
the boundary condition at 1 is [-q, -1] with q standard Cauchy
(tan(pi(U - 1/2))), a fixed q, or [1, 0] for the infinity slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hyperbolic import INF, iota_array
from .opuc import (
    CoefficientSequence,
    UnitCircleMeasure,
    _measures_from_gammas_batch,
    alpha_to_measure,
    convert_coefficients,
)
from .dirac import DiracOperator, build_operator

__all__ = [
    "SeedSpec",
    "SinePathSpec",
    "sample_kn",
    "kn_measure",
    "KNMeasureSampler",
    "palm_transform",
    "sample_biased_direct",
    "sample_sine_operator",
    "remove_atom",
    "bias_by_window",
    "WeightedMeasureSample",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SeedSpec:
    """Reproducible stream address: a master seed plus a stream id."""

    master_seed: int
    stream_id: int = 0

    def rng(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed,
                                    spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)

    def stream(self, i: int) -> "SeedSpec":
        return SeedSpec(master_seed=self.master_seed, stream_id=i)


def _as_rng(seed) -> np.random.Generator:
    return seed.rng() if isinstance(seed, SeedSpec) else np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# Killip-Nenciu coefficients and measures


def _kn_gammas(rng: np.random.Generator, n: int, beta: float, m: int) -> np.ndarray:
    """(m, n) modified coefficients; draw order: radii, angles, last angle."""
    out = np.empty((m, n), dtype=complex)
    if n > 1:
        s = 0.5 * beta * (n - 1 - np.arange(n - 1))
        u_r = rng.random((m, n - 1))
        r = np.sqrt(1.0 - u_r ** (1.0 / s))
        theta = rng.uniform(0.0, TWO_PI, (m, n - 1))
        out[:, :-1] = r * np.exp(1j * theta)
    out[:, -1] = np.exp(1j * rng.uniform(0.0, TWO_PI, m))
    return out


def sample_kn(n: int, beta: float, seed) -> CoefficientSequence:
    """One draw of the modified coefficients of the (n, beta) ensemble.

    |gamma_k|^2 ~ Beta(1, (beta/2)(n-k-1)) with uniform independent phase
    for k <= n-2; gamma_{n-1} uniform on the boundary.
    """
    if n < 1 or beta <= 0.0:
        raise ValueError("need n >= 1 and beta > 0")
    g = _kn_gammas(_as_rng(seed), n, beta, 1)[0]
    return CoefficientSequence(kind="modified", values=g)


def kn_measure(n: int, beta: float, seed) -> UnitCircleMeasure:
    """Random measure with beta-ensemble support and Dirichlet weights."""
    gammas = sample_kn(n, beta, seed)
    return alpha_to_measure(convert_coefficients(gammas, "verblunsky"))


class KNMeasureSampler:
    """Measure sampler for :func:`bias_by_window` with a fast batch path.

    Calling with a SeedSpec yields one measure; ``sample_batch`` draws one
    replica per stream id (identical to repeated calls) but converts all
    coefficient draws to measures with batched linear algebra.
    """

    def __init__(self, n: int, beta: float):
        self.n = int(n)
        self.beta = float(beta)

    def __call__(self, seed: SeedSpec) -> UnitCircleMeasure:
        return kn_measure(self.n, self.beta, seed)

    def gammas_for(self, base: SeedSpec, replicas: int) -> np.ndarray:
        g = np.empty((replicas, self.n), dtype=complex)
        for i in range(replicas):
            g[i] = _kn_gammas(base.stream(i).rng(), self.n, self.beta, 1)[0]
        return g

    def sample_batch(self, base: SeedSpec, replicas: int):
        g = self.gammas_for(base, replicas)
        angles, weights = _measures_from_gammas_batch(g)
        return angles, weights


# ---------------------------------------------------------------------------
# Palm transform and the directly sampled biased law


def palm_transform(gammas: CoefficientSequence) -> CoefficientSequence:
    """Modified coefficients of the measure reweighted to charge the point 1.

    gamma'_k = iota(gamma_k) for k <= n-2 and gamma'_{n-1} = 1; the moduli
    are untouched and the output measure has an atom at angle 0.
    """
    gammas.require_kind("modified")
    vals = gammas.values.copy()
    if vals.size > 1:
        vals[:-1] = iota_array(vals[:-1])
    vals[-1] = 1.0
    return CoefficientSequence(kind="modified", values=vals)


def _biased_gammas(rng: np.random.Generator, n: int, beta: float, m: int) -> np.ndarray:
    """(m, n) draws of the biased coefficient law; draw order: radii, angles."""
    out = np.empty((m, n), dtype=complex)
    s = 0.5 * beta * (n - 1 - np.arange(n - 1))
    u_r = rng.random((m, n - 1))
    r = np.sqrt(1.0 - u_r ** (1.0 / s))
    w = np.exp(1j * rng.uniform(0.0, TWO_PI, (m, n - 1)))
    phi = np.angle((w + r) / (1.0 + r * w))
    out[:, :-1] = r * np.exp(1j * phi)
    out[:, -1] = 1.0
    return out


def sample_biased_direct(n: int, beta: float, seed) -> CoefficientSequence:
    """Direct draw of the coefficient law with density ~ (1-|z|^2)^s |1-z|^{-2}.

    For k <= n-2 the exponent is s = (beta/2)(n-k-1); the last coefficient
    is pinned to 1.  Sampling is exact: the radial marginal is unchanged by
    the |1-z|^{-2} tilt (the Poisson kernel integrates to (1-r^2)^{-1}
    along circles), and the angle given r follows the harmonic measure
    from the point r, drawn as arg((e^{i Theta} + r)/(1 + r e^{i Theta})).
    """
    if n < 2:
        raise ValueError("biased coefficient law needs n >= 2")
    if beta <= 0.0:
        raise ValueError("need beta > 0")
    g = _biased_gammas(_as_rng(seed), n, beta, 1)[0]
    return CoefficientSequence(kind="modified", values=g)


# ---------------------------------------------------------------------------
# Sine_beta operator paths


@dataclass(frozen=True)
class SinePathSpec:
    """Resolution and boundary choices for a sampled Sine_beta operator."""

    beta: float
    t_min: float = 1e-4
    cells: int = 4096
    q_mode: str = "cauchy"
    q: float | None = None

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        if not 0.0 < self.t_min < 1.0:
            raise ValueError("t_min must lie in (0, 1)")
        if self.cells < 2:
            raise ValueError("need at least 2 cells")
        if self.q_mode not in ("cauchy", "fixed", "infinity"):
            raise ValueError("q_mode must be cauchy, fixed, or infinity")
        if self.q_mode == "fixed" and self.q is None:
            raise ValueError("fixed q_mode requires q")


def sample_sine_operator(spec: SinePathSpec, seed) -> DiracOperator:
    """Sample the Brownian-driven operator truncated at t_min.

    Draw order: b2 increments, b1 increments, then the Cauchy variable
    (when q_mode = "cauchy").  The u-grid is uniform on
    [(4/beta) log t_min, 0] and anchored so b2(0) = 0, giving z = i at
    t = 1; the path value on a t-cell is taken at its left edge.
    """
    rng = _as_rng(seed)
    K = spec.cells
    u_min = (4.0 / spec.beta) * math.log(spec.t_min)
    u = np.linspace(u_min, 0.0, K + 1)
    h = -u_min / K
    d2 = math.sqrt(h) * rng.standard_normal(K)
    d1 = math.sqrt(h) * rng.standard_normal(K)
    # b(u_j) for j = 0..K with b(0) = 0: minus the suffix sums of increments
    b2 = np.concatenate([-np.cumsum(d2[::-1])[::-1], [0.0]])
    y = np.exp(b2 - 0.5 * u)
    integrand = y[:-1] * d1
    x = np.concatenate([-np.cumsum(integrand[::-1])[::-1], [0.0]])
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
        raise ValueError("path overflow: resample or increase t_min")
    t = np.exp(0.25 * spec.beta * u)
    t[0], t[-1] = spec.t_min, 1.0
    z = x[:-1] + 1j * y[:-1]
    if spec.q_mode == "infinity":
        u1_spec = INF
    elif spec.q_mode == "fixed":
        u1_spec = float(spec.q)
    else:
        u1_spec = math.tan(math.pi * (rng.random() - 0.5))
    return build_operator((t, z), u1_spec=u1_spec, origin="sine-beta")


# ---------------------------------------------------------------------------
# atom removal and window biasing


def _circ_dist(a, b):
    return np.abs(np.mod(np.asarray(a) - b + math.pi, TWO_PI) - math.pi)


def remove_atom(mu: UnitCircleMeasure, angle: float) -> UnitCircleMeasure:
    """Drop the atom at ``angle`` (within 1e-8) and renormalize the rest."""
    d = _circ_dist(mu.angles, angle)
    j = int(np.argmin(d))
    if d[j] > 1e-8:
        raise ValueError(f"no atom at angle {angle}")
    ang = np.delete(mu.angles, j)
    w = np.delete(mu.weights, j)
    return UnitCircleMeasure(angles=ang, weights=w / w.sum())


@dataclass(frozen=True)
class WeightedMeasureSample:
    """Replica measures with self-normalized importance weights.

    ``weights`` holds mu_i(arc)/mean(mu(arc)); weighted statistics should
    use ``normalized_weights`` which sums to one.
    """

    angles: np.ndarray
    atom_weights: np.ndarray
    weights: np.ndarray
    epsilon: float

    @property
    def normalized_weights(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def measure(self, i: int) -> UnitCircleMeasure:
        return UnitCircleMeasure(angles=self.angles[i], weights=self.atom_weights[i])


def bias_by_window(sampler, epsilon: float, replicas: int, seed: SeedSpec,
                   jobs: int = 1) -> WeightedMeasureSample:
    """Draw replica measures and weight each by its mass in (-eps, eps).

    Replica i is drawn from stream id i of the sampler under the given
    master seed, so aggregation order cannot change results.  Importance
    weights are mu(arc)/mean(mu(arc)); an all-zero weight vector (no
    replica charges the arc) is an error.  Acceptance-rejection on the arc
    event would waste nearly all replicas at small epsilon, hence the
    self-normalized importance weighting.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if replicas < 1:
        raise ValueError("need at least one replica")
    if hasattr(sampler, "sample_batch"):
        angles, atom_weights = sampler.sample_batch(seed, replicas)
    else:
        measures = _draw_measures(sampler, seed, replicas, jobs)
        angles = np.stack([m.angles for m in measures])
        atom_weights = np.stack([m.weights for m in measures])
    inside = _circ_dist(angles, 0.0) < epsilon
    w = np.sum(atom_weights * inside, axis=1)
    if not np.any(w > 0.0):
        raise ValueError("empty biasing event: no replica charges the arc")
    return WeightedMeasureSample(angles=angles, atom_weights=atom_weights,
                                 weights=w / w.mean(), epsilon=float(epsilon))


def _draw_chunk(args):
    sampler, master_seed, lo, hi = args
    out = []
    for i in range(lo, hi):
        mu = sampler(SeedSpec(master_seed=master_seed, stream_id=i))
        out.append((mu.angles, mu.weights))
    return out


def _draw_measures(sampler, seed: SeedSpec, replicas: int, jobs: int):
    if jobs <= 1:
        chunks = [_draw_chunk((sampler, seed.master_seed, 0, replicas))]
    else:
        from concurrent.futures import ProcessPoolExecutor

        bounds = np.linspace(0, replicas, jobs + 1).astype(int)
        work = [(sampler, seed.master_seed, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_draw_chunk, work))
    out = []
    for chunk in chunks:
        out.extend(UnitCircleMeasure(angles=a, weights=w) for a, w in chunk)
    return out
