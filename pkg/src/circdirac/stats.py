"""Statistical verification toolkit.

Small, self-contained goodness-of-fit machinery used by the acceptance
suites: one- and two-sample Kolmogorov-Smirnov tests (with optional sample
weights for self-normalized importance weighting), a Pearson chi-square
test of complex samples on the unit disk against a numerically normalized
density, and a generic rejection sampler with an explicit envelope bound.

All automated suites run at significance level 0.001: many tests run per
invocation and the family-wise false-failure rate has to stay small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import stats as sps

__all__ = [
    "TestReport",
    "ks_test",
    "chi2_hist2d",
    "rejection_sample",
    "RejectionResult",
]

TWO_PI = 2.0 * math.pi

#: Default significance level for all automated suites.
DEFAULT_LEVEL = 1e-3


@dataclass(frozen=True)
class TestReport:
    """Outcome of one statistical check; passes iff statistic < threshold."""

    statistic: float
    threshold: float
    sample_size: int
    passed: bool
    notes: str = ""

    def to_dict(self) -> dict:
        # numpy scalars sneak in from vectorized statistics; json needs builtins
        return {
            "statistic": float(self.statistic),
            "threshold": float(self.threshold),
            "sample_size": int(self.sample_size),
            "pass": bool(self.passed),
            "notes": self.notes,
        }


def _report(stat: float, threshold: float, n: int, notes: str) -> TestReport:
    return TestReport(statistic=float(stat), threshold=float(threshold),
                      sample_size=int(n), passed=bool(stat < threshold), notes=notes)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov


def _weighted_ecdf(samples, weights):
    order = np.argsort(samples, kind="stable")
    s = samples[order]
    if weights is None:
        cum = np.arange(1, s.size + 1) / s.size
    else:
        w = np.asarray(weights, dtype=float)[order]
        cum = np.cumsum(w) / w.sum()
    return s, cum


def ks_statistic_cdf(samples, cdf, weights=None) -> float:
    """sup |F_hat - F| against an analytic CDF."""
    s, cum = _weighted_ecdf(np.asarray(samples, dtype=float), weights)
    f = np.asarray(cdf(s), dtype=float)
    lower = np.concatenate([[0.0], cum[:-1]])
    return float(np.max(np.maximum(np.abs(cum - f), np.abs(lower - f))))


def ks_statistic_two_sample(a, b, weights_a=None, weights_b=None) -> float:
    """sup |F_a - F_b| between two (possibly weighted) empirical CDFs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sa, ca = _weighted_ecdf(a, weights_a)
    sb, cb = _weighted_ecdf(b, weights_b)
    grid = np.concatenate([sa, sb])
    fa = np.concatenate([[0.0], ca])[np.searchsorted(sa, grid, side="right")]
    fb = np.concatenate([[0.0], cb])[np.searchsorted(sb, grid, side="right")]
    return float(np.max(np.abs(fa - fb)))


def ks_test(samples, reference, level: float = DEFAULT_LEVEL,
            weights=None, reference_weights=None) -> TestReport:
    """KS test against an analytic CDF (callable) or a second sample.

    The threshold is the asymptotic Kolmogorov quantile at ``level``
    scaled by the (effective) sample size.  Optional ``weights`` turn the
    first sample's empirical CDF into a self-normalized weighted one.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("ks_test requires a nonempty sample")
    kq = float(sps.kstwobign.isf(level))
    if callable(reference):
        stat = ks_statistic_cdf(samples, reference, weights=weights)
        n_eff = samples.size
        notes = "one-sample"
    else:
        other = np.asarray(reference, dtype=float)
        if other.size == 0:
            raise ValueError("ks_test requires a nonempty reference sample")
        stat = ks_statistic_two_sample(samples, other, weights_a=weights,
                                       weights_b=reference_weights)
        n_eff = samples.size * other.size / (samples.size + other.size)
        notes = "two-sample"
    threshold = kq / math.sqrt(n_eff)
    return _report(stat, threshold, samples.size, notes)


# ---------------------------------------------------------------------------
# chi-square on the disk


def _gauss_cell(density, r0, r1, p0, p1, nodes):
    """Integral of density * r over [r0,r1] x [p0,p1] by tensor Gauss-Legendre."""
    xg, wg = nodes
    r = 0.5 * (r1 - r0) * xg + 0.5 * (r1 + r0)
    p = 0.5 * (p1 - p0) * xg + 0.5 * (p1 + p0)
    rr, pp = np.meshgrid(r, p, indexing="ij")
    z = rr * np.exp(1j * pp)
    vals = np.asarray(density(z), dtype=float) * rr
    ww = np.outer(wg, wg)
    return 0.25 * (r1 - r0) * (p1 - p0) * float(np.sum(vals * ww))


def _cell_mass(density, r0, r1, p0, p1, nodes, corner_levels):
    """Cell integral with dyadic refinement toward the singular corner z = 1.

    A cell touches the corner when its closure meets r = 1 and phase 0
    (phases live in [0, 2 pi), so both the first and last phase cells
    qualify).  Such cells split dyadically ``corner_levels`` extra times
    toward the corner; the integrable boundary singularity |1 - z|^{-2}
    of the biased coefficient densities is handled this way.
    """
    touches_r = r1 >= 1.0 - 1e-12
    touches_p = p0 <= 1e-12 or p1 >= TWO_PI - 1e-12
    if not (touches_r and touches_p and corner_levels > 0):
        return _gauss_cell(density, r0, r1, p0, p1, nodes)
    rm = 0.5 * (r0 + r1)
    pm = 0.5 * (p0 + p1)
    if p0 <= 1e-12:
        quads = [(r0, rm, p0, pm), (r0, rm, pm, p1), (rm, r1, pm, p1)]
        corner = (rm, r1, p0, pm)
    else:
        quads = [(r0, rm, p0, pm), (r0, rm, pm, p1), (rm, r1, p0, pm)]
        corner = (rm, r1, pm, p1)
    total = sum(_gauss_cell(density, *qq, nodes) for qq in quads)
    return total + _cell_mass(density, *corner, nodes, corner_levels - 1)


def disk_cell_probabilities(density, bins_r: int, bins_phi: int,
                            quad_points: int = 512, corner_levels: int = 8):
    """Masses of a polar grid of cells under an unnormalized disk density.

    The density is integrated cell by cell on a tensor polar rule with
    about ``quad_points`` nodes per axis overall; the result is normalized
    by the total.  A doubled-resolution pass must agree with the total to
    1e-6 relative, otherwise the quadrature is deemed non-convergent.
    """
    r_edges = np.linspace(0.0, 1.0, bins_r + 1)
    p_edges = np.linspace(0.0, TWO_PI, bins_phi + 1)
    per_cell = max(6, quad_points // max(bins_r, bins_phi))

    def masses(npts):
        nodes = leggauss(npts)
        out = np.empty((bins_r, bins_phi))
        for i in range(bins_r):
            for j in range(bins_phi):
                out[i, j] = _cell_mass(density, r_edges[i], r_edges[i + 1],
                                       p_edges[j], p_edges[j + 1],
                                       nodes, corner_levels)
        return out

    cell = masses(per_cell)
    total = cell.sum()
    total2 = masses(2 * per_cell).sum()
    if not total > 0.0 or abs(total2 - total) > 1e-6 * abs(total):
        raise ValueError(
            "density quadrature failed to normalize within 1e-6 "
            f"(total {total:.12e} vs refined {total2:.12e})"
        )
    return r_edges, p_edges, cell / total


def chi2_hist2d(samples, density, bins: int = 12, level: float = DEFAULT_LEVEL,
                quad_points: int = 512, min_expected: float = 5.0) -> TestReport:
    """Pearson chi-square of complex disk samples against a density.

    Cells are a polar ``bins x bins`` grid; their probabilities come from
    2-d quadrature of the (unnormalized) density.  Cells with expected
    count below ``min_expected`` are pooled into one.  Passes when the
    statistic is below the chi-square quantile at 1 - level.
    """
    z = np.asarray(samples, dtype=complex)
    n = z.size
    r_edges, p_edges, prob = disk_cell_probabilities(
        density, bins, bins, quad_points=quad_points)
    ri = np.clip(np.searchsorted(r_edges, np.abs(z), side="right") - 1, 0, bins - 1)
    pi_ = np.clip(np.searchsorted(p_edges, np.mod(np.angle(z), TWO_PI),
                                  side="right") - 1, 0, bins - 1)
    counts = np.zeros((bins, bins))
    np.add.at(counts, (ri, pi_), 1.0)

    probs = prob.ravel()
    obs = counts.ravel()
    expected = n * probs
    big = expected >= min_expected
    if big.sum() < 2:
        raise ValueError("chi2_hist2d: too few cells with adequate expected count")
    o = np.concatenate([obs[big], [obs[~big].sum()]])
    e = np.concatenate([expected[big], [expected[~big].sum()]])
    if e[-1] <= 0.0:
        o, e = o[:-1], e[:-1]
    elif e[-1] < min_expected:
        # fold the under-filled pool into the smallest retained cell
        j = np.argmin(e[:-1])
        o[j] += o[-1]
        e[j] += e[-1]
        o, e = o[:-1], e[:-1]
    stat = float(np.sum((o - e) ** 2 / e))
    dof = o.size - 1
    threshold = float(sps.chi2.ppf(1.0 - level, dof))
    return _report(stat, threshold, n, f"chi2 dof={dof}")


# ---------------------------------------------------------------------------
# rejection sampling


@dataclass(frozen=True)
class RejectionResult:
    samples: np.ndarray
    acceptance_rate: float


def rejection_sample(density, bound: float, seed, size: int = 1,
                     radius: float = 1.0) -> RejectionResult:
    """Exact draws from an unnormalized density on the disk |z| <= radius.

    Proposal is uniform on the disk; ``bound`` must dominate
    density / proposal_density there, i.e. density(z) <= bound / (pi r^2).
    An observed violation raises with the witness point.  Deterministic
    for a fixed seed.
    """
    from .ensembles import SeedSpec  # local import to avoid a cycle

    if isinstance(seed, SeedSpec):
        rng = seed.rng()
    else:
        rng = np.random.default_rng(seed)
    prop_pdf = 1.0 / (math.pi * radius * radius)
    out = np.empty(size, dtype=complex)
    got = 0
    proposed = 0
    accepted = 0
    chunk = max(1024, 2 * size)
    while got < size:
        r = radius * np.sqrt(rng.random(chunk))
        phi = rng.uniform(0.0, TWO_PI, chunk)
        z = r * np.exp(1j * phi)
        dens = np.asarray(density(z), dtype=float)
        ratio = dens / (bound * prop_pdf)
        bad = ratio > 1.0 + 1e-12
        if np.any(bad):
            witness = z[np.argmax(ratio)]
            raise ValueError(f"envelope violation at z = {witness}")
        acc = rng.random(chunk) < ratio
        take = min(size - got, int(acc.sum()))
        out[got:got + take] = z[acc][:take]
        got += take
        accepted += int(acc.sum())
        proposed += chunk
    return RejectionResult(samples=out, acceptance_rate=accepted / proposed)
