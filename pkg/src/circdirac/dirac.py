"""Piecewise-constant Dirac (canonical system) operators.

The operator is tau u = R^{-1} J u' on an interval inside [0, 1], with

    R = X^t X / (2 det X),   X = [[1, -x], [0, y]],   J = [[0, -1], [1, 0]],

driven by a piecewise-constant path z(t) = x(t) + i y(t) in the upper half
plane, and boundary directions u0 at the left endpoint and u1 at the right.
Eigenvalues are the zeros of the entire function zeta(z) = H(T, z)^t J u1,
where H solves J H' = z R H with H(t0) = u0.

Everything reduces to exact 2x2 cell algebra.  On a cell of length dt the
solution advances by the conjugated rotation

    H -> X^{-1} Rot(lam dt / 2) X H,     Rot(p) = [[cos p, sin p], [-sin p, cos p]],

so no ODE stepper is involved, and the lambda-derivative of H propagates
alongside by the product rule.  The phase 2 arg(A - iB) (with H = [A, B])
is strictly increasing in lambda; within one cell W = A - iB equals
a e^{i p} + b e^{-i p} with |a| > |b|, so the per-cell winding has the
closed form  p + Arg((a + b e^{-2ip}) conj(a + b)), which is exact.
Eigenvalues are recovered by inverting the monotone phase at the targets
2 pi k + u, u determined by the direction of u1; the bracketed search uses
derivative (Newton) steps with bisection fallback down to 1e-12 in lambda.

Grids normally span [0, 1]; truncated continuum paths may start at
t0 > 0, and time reversal of such an operator ends before 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hyperbolic import INF, is_inf
from .opuc import HyperbolicPath

__all__ = [
    "DiracOperator",
    "SpectralMeasure",
    "EigenData",
    "build_operator",
    "eval_H",
    "phase_at",
    "eigenvalues_in",
    "eigenvalue_count",
    "spectral_measure",
    "secular_at",
    "trace_and_hsnorm",
    "transform_operator",
]

TWO_PI = 2.0 * math.pi

#: Refuse windows holding more than this many eigenvalues.
WINDOW_BUDGET = 1_000_000

#: Bracket width at which the eigenvalue search stops.
LAMBDA_TOL = 1e-12


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class DiracOperator:
    """Immutable piecewise-constant operator.

    ``grid`` has m+1 strictly increasing points in [0, 1]; ``path`` holds
    the m per-cell values z_k = x_k + i y_k with y_k > 0.  ``u0``/``u1``
    are direction classes; u1 parallel to [1, 0] encodes the infinity
    boundary slope (q = inf).
    """

    grid: np.ndarray
    path: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    origin: str = "custom"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        path = np.asarray(self.path, dtype=complex)
        u0 = np.asarray(self.u0, dtype=float)
        u1 = np.asarray(self.u1, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must hold at least two time points")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if grid[0] < 0.0 or grid[-1] > 1.0 + 1e-12:
            raise ValueError("grid must lie inside [0, 1]")
        if path.shape != (grid.size - 1,):
            raise ValueError("path must hold one value per grid cell")
        if np.any(path.imag <= 0.0):
            raise ValueError("path imaginary parts y_k must be positive")
        for u in (u0, u1):
            if u.shape != (2,) or not np.any(u != 0.0):
                raise ValueError("boundary vectors must be nonzero real 2-vectors")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "path", path)
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "u1", u1)

    @property
    def cells(self) -> int:
        return self.path.size

    def boundary_pairing(self) -> float:
        """u0^t J u1; zero exactly when the boundary directions are parallel."""
        return float(self.u0[1] * self.u1[0] - self.u0[0] * self.u1[1])

    def normalized_u1(self) -> np.ndarray:
        """u1 rescaled so u0^t J u1 = 1 (the standing normalization)."""
        s = self.boundary_pairing()
        if abs(s) < 1e-14 * np.linalg.norm(self.u0) * np.linalg.norm(self.u1):
            raise ValueError("no trace for equal boundary directions")
        return self.u1 / s

    def to_dict(self) -> dict:
        u1 = self.u1
        if u1[1] == 0.0:
            u1_json = "infinity"
        else:
            u1_json = [float(u1[0]), float(u1[1])]
        return {
            "grid": [float(t) for t in self.grid],
            "path": [[float(z.real), float(z.imag)] for z in self.path],
            "u0": [float(self.u0[0]), float(self.u0[1])],
            "u1": u1_json,
            "origin": self.origin,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiracOperator":
        u1 = d["u1"]
        u1 = np.array([1.0, 0.0]) if u1 == "infinity" else np.asarray(u1, dtype=float)
        path = np.array([complex(x, y) for x, y in d["path"]])
        return cls(grid=np.asarray(d["grid"], dtype=float), path=path,
                   u0=np.asarray(d["u0"], dtype=float), u1=u1,
                   origin=d.get("origin", "custom"))


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Atoms (lambda, weight) of one side's spectral measure in a window."""

    lambdas: np.ndarray
    weights: np.ndarray
    window: tuple
    side: str

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if lam.shape != w.shape:
            raise ValueError("mismatched atom arrays")
        if np.any(np.diff(lam) <= 0.0):
            raise ValueError("atoms must be sorted by lambda")
        if np.any(w <= 0.0):
            raise ValueError("spectral weights must be positive")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "window", (float(self.window[0]), float(self.window[1])))

    def __len__(self) -> int:
        return self.lambdas.size

    def to_dict(self) -> dict:
        return {
            "side": self.side,
            "window": [self.window[0], self.window[1]],
            "atoms": [[float(l), float(w)] for l, w in zip(self.lambdas, self.weights)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralMeasure":
        atoms = np.asarray(d["atoms"], dtype=float).reshape(-1, 2)
        return cls(lambdas=atoms[:, 0], weights=atoms[:, 1],
                   window=tuple(d["window"]), side=d["side"])


@dataclass(frozen=True)
class EigenData:
    """H(T, lambda), its lambda-derivative, and the R-weighted squared norm."""

    H1: np.ndarray
    dH1: np.ndarray
    normsq: float


# ---------------------------------------------------------------------------
# construction


def build_operator(path, u1_spec=None, origin=None) -> DiracOperator:
    """Operator from a measure path or from sampled cells.

    ``path`` is either a :class:`HyperbolicPath` (uniform grid with one cell
    per coefficient; u1 derived from the final path point z_n unless
    overridden) or a pair ``(grid, cell_values)``.  ``u1_spec`` is a finite
    real q, giving u1 = [-q, -1], or INF, giving u1 = [1, 0].
    """
    if isinstance(path, HyperbolicPath):
        n = len(path)
        grid = np.linspace(0.0, 1.0, n + 1)
        cells = path.halfplane_points[:-1]
        if u1_spec is None:
            zn = path.final_halfplane
            u1_spec = INF if is_inf(zn) else zn.real
        origin = origin or "discrete-measure"
    else:
        grid, cells = path
        grid = np.asarray(grid, dtype=float)
        cells = np.asarray(cells, dtype=complex)
        if u1_spec is None:
            raise ValueError("u1_spec is required for sampled paths")
        origin = origin or "custom"
    if is_inf(u1_spec):
        u1 = np.array([1.0, 0.0])
    else:
        u1 = np.array([-float(u1_spec), -1.0])
    return DiracOperator(grid=grid, path=cells, u0=np.array([1.0, 0.0]),
                         u1=u1, origin=origin)


# ---------------------------------------------------------------------------
# the cell sweep

def _sweep(x, y, dt, lam, u0, row=None, upto=None,
           want_deriv=False, want_phase=False):
    """Advance H (and optionally dH and the phase winding) across cells.

    ``x``/``y`` have shape (m,) or (nops, m); ``dt`` shape (m,); ``lam`` is
    scalar or (B,).  ``row`` maps each batch entry to an operator row when
    x is 2-d and B != nops.  Returns (H0, H1, dH0, dH1, winding); the
    winding is the accumulated increase of arg(H0 - i H1) from the left
    endpoint, valid for real lam only.
    """
    lam = np.asarray(lam)
    complex_lam = np.iscomplexobj(lam)
    dtype = complex if complex_lam else float
    shape = lam.shape
    u0 = np.asarray(u0, dtype=float)
    H0 = np.full(shape, u0[..., 0], dtype=dtype)
    H1 = np.full(shape, u0[..., 1], dtype=dtype)
    dH0 = np.zeros(shape, dtype=dtype) if want_deriv else None
    dH1 = np.zeros(shape, dtype=dtype) if want_deriv else None
    wind = np.zeros(shape) if want_phase else None
    twod = np.ndim(x) == 2
    m = np.shape(x)[-1] if upto is None else upto
    for k in range(m):
        if twod:
            xk, yk = x[:, k], y[:, k]
            if row is not None:
                xk, yk = xk[row], yk[row]
        else:
            xk, yk = x[k], y[k]
        phi = 0.5 * lam * dt[k]
        c, s = np.cos(phi), np.sin(phi)
        if want_phase:
            p = H0 - xk * H1
            q = yk * H1
            u = (xk - 1j) / yk
            a = 0.5 * ((p - 1j * q) + u * (1j * p + q))
            b = 0.5 * ((p + 1j * q) + u * (q - 1j * p))
            wind += phi + np.angle((a + b * np.exp(-2j * phi)) * np.conj(a + b))
        g0 = (-xk * H0 + (xk * xk + yk * yk) * H1) / yk
        g1 = (-H0 + xk * H1) / yk
        if want_deriv:
            gd0 = (-xk * dH0 + (xk * xk + yk * yk) * dH1) / yk
            gd1 = (-dH0 + xk * dH1) / yk
            half = 0.5 * dt[k]
            dH0, dH1 = (c * dH0 + s * gd0 + half * (c * g0 - s * H0),
                        c * dH1 + s * gd1 + half * (c * g1 - s * H1))
        H0, H1 = c * H0 + s * g0, c * H1 + s * g1
    return H0, H1, dH0, dH1, wind


def _cells(op: DiracOperator):
    return op.path.real, op.path.imag, np.diff(op.grid)


def _phase_anchor(u0) -> float:
    """Principal argument of [1, -i] u0; zero for the standard u0 = [1, 0]."""
    u0 = np.asarray(u0, dtype=float)
    return math.atan2(-u0[..., 1], u0[..., 0]) if u0.ndim == 1 else np.arctan2(
        -u0[..., 1], u0[..., 0])


# ---------------------------------------------------------------------------
# solution data, phase, eigenvalues


def eval_H(op: DiracOperator, lam: float, upto: int | None = None) -> EigenData:
    """Solve for H and its lambda-derivative up to grid index ``upto``.

    The squared R-norm of H over the traversed cells equals
    H^t J dH there, which is returned as ``normsq``.
    """
    x, y, dt = _cells(op)
    H0, H1, dH0, dH1, _ = _sweep(x, y, dt, float(lam), op.u0, upto=upto,
                                 want_deriv=True)
    normsq = float(H1 * dH0 - H0 * dH1)
    return EigenData(H1=np.array([float(H0), float(H1)]),
                     dH1=np.array([float(dH0), float(dH1)]),
                     normsq=normsq)


def phase_at(op: DiracOperator, lam) -> float | np.ndarray:
    """Phase alpha(T, lambda) = 2 Im log(A - iB), continuous from lambda = 0.

    Strictly increasing in lambda; for u0 = [1, 0] the branch satisfies
    alpha(T, 0) = 0.  ``lam`` may be an array.
    """
    x, y, dt = _cells(op)
    lam_arr = np.asarray(lam, dtype=float)
    _, _, _, _, wind = _sweep(x, y, dt, lam_arr, op.u0, want_phase=True)
    out = 2.0 * (_phase_anchor(op.u0) + wind)
    return float(out) if np.ndim(lam) == 0 else out


def _phase_and_deriv(x, y, dt, lam, u0, row=None):
    H0, H1, dH0, dH1, wind = _sweep(x, y, dt, lam, u0, row=row,
                                    want_deriv=True, want_phase=True)
    alpha = 2.0 * (_phase_anchor(u0) + wind)
    normsq = H1 * dH0 - H0 * dH1
    deriv = 2.0 * normsq / (H0 * H0 + H1 * H1)
    return alpha, deriv


def _phase_target(u1) -> float:
    """Target offset u in [0, 2 pi): eigenvalues solve alpha = 2 pi k + u.

    For u1 = [-q, -1] this is u = 2 arccot(-q); for u1 = [1, 0] it is 0.
    """
    u = -2.0 * math.atan2(u1[1], u1[0])
    return u % TWO_PI


def _solve_targets(x, y, dt, u0, targets, lo, hi, alo, ahi, row=None):
    """Invert the monotone phase at each target; returns lambdas.

    Bracketed Newton: the bracket [a, b] always contains the root, Newton
    steps use the analytic phase derivative and fall back to bisection
    whenever they leave the bracket.
    """
    t = np.asarray(targets, dtype=float)
    a = np.broadcast_to(np.asarray(lo, dtype=float), t.shape).copy()
    b = np.broadcast_to(np.asarray(hi, dtype=float), t.shape).copy()
    span = np.maximum(ahi - alo, 1e-300)
    lam = a + (b - a) * (t - alo) / span
    lam = np.clip(lam, a, b)
    for it in range(120):
        alpha, deriv = _phase_and_deriv(x, y, dt, lam, u0, row=row)
        f = alpha - t
        neg = f < 0.0
        a = np.where(neg, lam, a)
        b = np.where(neg, b, lam)
        at_root = np.abs(f) <= deriv * LAMBDA_TOL
        if np.all(at_root | ((b - a) < LAMBDA_TOL)):
            return np.where(at_root, lam, 0.5 * (a + b))
        if it % 3 == 2:
            lam = 0.5 * (a + b)  # guaranteed bracket shrink
            continue
        step = np.where(deriv > 0.0, f / np.where(deriv > 0.0, deriv, 1.0), 0.0)
        nxt = lam - step
        inside = (nxt > a) & (nxt < b)
        lam = np.where(inside, nxt, 0.5 * (a + b))
    return 0.5 * (a + b)


def eigenvalues_in(op: DiracOperator, window) -> np.ndarray:
    """Sorted eigenvalues in the half-open window [a, b).

    The phase increases strictly, so the spectrum in the window is exactly
    the preimage of {2 pi k + u} between the endpoint phases; each root is
    found once by bracketed bisection/Newton to 1e-12 in lambda.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must satisfy a < b")
    x, y, dt = _cells(op)
    alo, ahi = _phase_and_deriv(x, y, dt, np.array([lo, hi]), op.u0)[0]
    u = _phase_target(op.u1)
    if (ahi - alo) / TWO_PI > WINDOW_BUDGET:
        raise ValueError("window budget: more than 1e6 eigenvalues requested")
    kmin = math.ceil((alo - u) / TWO_PI - 1e-13)
    kmax = math.ceil((ahi - u) / TWO_PI - 1e-13) - 1
    if kmax < kmin:
        return np.empty(0)
    targets = u + TWO_PI * np.arange(kmin, kmax + 1)
    lams = _solve_targets(x, y, dt, op.u0, targets, lo, hi, alo, ahi)
    return np.sort(lams)


def eigenvalue_count(op: DiracOperator, window) -> int:
    """Number of eigenvalues in [a, b), from the endpoint phases alone."""
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must satisfy a < b")
    x, y, dt = _cells(op)
    alo, ahi = _phase_and_deriv(x, y, dt, np.array([lo, hi]), op.u0)[0]
    u = _phase_target(op.u1)
    kmin = math.ceil((alo - u) / TWO_PI - 1e-13)
    kmax = math.ceil((ahi - u) / TWO_PI - 1e-13) - 1
    return max(0, kmax - kmin + 1)


def spectral_measure(op: DiracOperator, window, side: str) -> SpectralMeasure:
    """Left or right spectral measure restricted to the window.

    The weight at an eigenvalue is |H(endpoint)|^2 / ||H||_R^2 with the
    norm taken from H^t J dH; on the right this equals
    (A^2 + B^2)/(A'B - AB') = 2 / d(alpha)/d(lambda).
    """
    lams = eigenvalues_in(op, window)
    if lams.size == 0:
        return SpectralMeasure(lambdas=lams, weights=lams.copy(),
                               window=window, side=side)
    x, y, dt = _cells(op)
    H0, H1, dH0, dH1, _ = _sweep(x, y, dt, lams, op.u0, want_deriv=True)
    normsq = H1 * dH0 - H0 * dH1
    if np.any(normsq <= 0.0):
        raise ValueError(
            "conditioning: eigenfunction norm lost positivity; the path's "
            "Im z is too small for double precision"
        )
    if side == "right":
        w = (H0 * H0 + H1 * H1) / normsq
    elif side == "left":
        w = float(np.dot(op.u0, op.u0)) / normsq
    else:
        raise ValueError("side must be 'left' or 'right'")
    return SpectralMeasure(lambdas=lams, weights=w, window=window, side=side)


def secular_at(op: DiracOperator, z) -> complex:
    """Secular function zeta(z) = H(T, z)^t J u1; entire, real on the reals.

    When u0 and u1 are not parallel, u1 carries the normalization
    u0^t J u1 = 1, so zeta(0) = 1.  For u1 parallel to [1, 0] (infinity
    slope) no normalization exists and zeta(0) = 0: zero is an eigenvalue.
    """
    s = op.boundary_pairing()
    u1 = op.u1 if abs(s) < 1e-14 else op.u1 / s
    x, y, dt = _cells(op)
    H0, H1, _, _, _ = _sweep(x, y, dt, complex(z), op.u0)
    return complex(H1 * u1[0] - H0 * u1[1])


def trace_and_hsnorm(op: DiracOperator):
    """Integral trace and squared Hilbert-Schmidt norm of the inverse.

    trace = int u0^t R u1 dt and HS^2 = 2 iint_{s<t} u0^t R(s) u0 u1^t R(t) u1,
    with u1 normalized to u0^t J u1 = 1.  Piecewise-constant R reduces both
    to exact prefix sums over cells.
    """
    u1 = op.normalized_u1()
    u0 = op.u0
    x, y, dt = _cells(op)

    def quad(a, b):
        # a^t R b with R = [[1, -x], [-x, x^2 + y^2]] / (2y), vectorized in cells
        return (a[0] * b[0] - x * (a[0] * b[1] + a[1] * b[0])
                + (x * x + y * y) * a[1] * b[1]) / (2.0 * y)

    f = quad(u0, u0)
    g = quad(u1, u1)
    h = quad(u0, u1)
    trace = float(np.sum(h * dt))
    fdt = f * dt
    prefix = np.concatenate([[0.0], np.cumsum(fdt)[:-1]])
    hs = float(2.0 * np.sum(g * dt * prefix) + np.sum(f * g * dt * dt))
    return trace, hs


# ---------------------------------------------------------------------------
# transforms


def transform_operator(op: DiracOperator, kind: str, Q: np.ndarray | None = None
                       ) -> DiracOperator:
    """Conjugation by a real det-1 matrix, or time reversal.

    ``conjugate``: the path moves by the fractional linear action of Q and
    both boundary vectors by Q itself; for Q = T_r (a hyperbolic rotation
    about i) both spectral measures are unchanged.  ``reverse``: the grid
    reflects through t -> 1 - t, each cell value z maps to -conj(z), and
    the boundary vectors swap with a sign; the left and right spectral
    measures trade places.
    """
    if kind == "conjugate":
        Q = np.asarray(Q, dtype=float)
        if Q.shape != (2, 2) or abs(np.linalg.det(Q) - 1.0) > 1e-12:
            raise ValueError("conjugation requires a real 2x2 matrix with det 1")
        a, b, c, d = Q[0, 0], Q[0, 1], Q[1, 0], Q[1, 1]
        z = op.path
        new_path = (a * z + b) / (c * z + d)
        return DiracOperator(grid=op.grid.copy(), path=new_path,
                             u0=Q @ op.u0, u1=Q @ op.u1, origin=op.origin)
    if kind == "reverse":
        # tau~ = rho^-1 S tau S rho: R~(t) = S R(1-t) S, eigenfunctions
        # f~(t) = S f(1-t), so the boundary directions swap through S.
        new_grid = (1.0 - op.grid)[::-1]
        new_path = -np.conj(op.path[::-1])
        S = np.array([1.0, -1.0])
        return DiracOperator(grid=new_grid, path=new_path,
                             u0=S * op.u1, u1=S * op.u0, origin=op.origin)
    raise ValueError(f"unknown transform kind {kind!r}")
