"""Orthogonal polynomials on the unit circle and coefficient parametrizations.

A probability measure supported on n distinct points of the unit circle is
encoded by n recursion coefficients (the last of unit modulus), or
equivalently by the phase-adjusted "modified" coefficients, or by a path of
n+1 points in hyperbolic space ending on the boundary.  This module holds
the conversions between all four descriptions:

    measure  <->  verblunsky alpha_k  <->  modified gamma_k  ->  path b_k/z_k

together with the Aleksandrov family (all alpha multiplied by a fixed
unimodular eta) and path reversal.

Conventions.  The recursion is

    Phi_{k+1} = z Phi_k - conj(alpha_k) Phi*_k,
    Phi*_{k+1} = Phi*_k - alpha_k z Phi_k,          Phi_0 = Phi*_0 = 1,

the modified coefficients are gamma_0 = conj(alpha_0) and
gamma_k = conj(alpha_k) prod_{j<k} (1-conj(gamma_j))/(1-gamma_j), and the
disk path is b_0 = 0, b_{k+1} = A^{-1}_{gamma_0} o ... o A^{-1}_{gamma_k}(0)
with the affine disk matrices of :mod:`circdirac.hyperbolic`.  The final
path point is on the boundary; gamma_{n-1} = 1 gives b_n = 1, z_n = INF
(stored symbolically).

Atom weights are recovered through the normalized-polynomial sum
1/weight_j = sum_k |Psi_k(atom_j)|^2 / ||Psi_k||^2, which is exact for
discrete measures; atom positions are companion-matrix eigenvalues of the
degree-n polynomial, projected radially onto the circle.  Double precision
supports n <= 30 or so before monomial Gram-Schmidt conditioning degrades.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hyperbolic import INF, affine_matrix, is_inf, mobius_apply

__all__ = [
    "CoefficientSequence",
    "UnitCircleMeasure",
    "HyperbolicPath",
    "szego_eval",
    "convert_coefficients",
    "measure_to_alpha",
    "alpha_to_measure",
    "gamma_to_path",
    "reverse_path",
    "aleksandrov_transform",
]

TWO_PI = 2.0 * math.pi

#: |alpha_{n-1}| must be 1 within this tolerance; sequences failing are rejected.
LAST_COEFF_TOL = 1e-10

#: Atoms closer than this in circular angle are rejected, not merged.
MIN_ATOM_SEPARATION = 1e-10


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """A finite coefficient sequence, either ``verblunsky`` or ``modified``.

    Interior entries lie strictly inside the unit disk; the last entry has
    unit modulus (within ``LAST_COEFF_TOL``).
    """

    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("verblunsky", "modified"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("coefficient sequence must be a nonempty 1-d array")
        mods = np.abs(vals)
        if np.any(mods[:-1] >= 1.0):
            raise ValueError("interior coefficients must lie strictly inside the disk")
        if abs(mods[-1] - 1.0) > LAST_COEFF_TOL:
            raise ValueError("last coefficient must have unit modulus")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    def require_kind(self, kind: str) -> None:
        if self.kind != kind:
            raise ValueError(f"expected {kind} coefficients, got {self.kind}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "values": [[v.real, v.imag] for v in self.values],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientSequence":
        vals = np.array([complex(re, im) for re, im in d["values"]])
        return cls(kind=d["kind"], values=vals)


@dataclass(frozen=True, eq=False)
class UnitCircleMeasure:
    """Finitely supported measure on the circle: distinct atoms with weights.

    Angles are wrapped into [0, 2pi) and sorted; atoms closer than
    ``MIN_ATOM_SEPARATION`` (circularly) are rejected.  ``normalized`` is
    derived: True when the weights sum to 1 within 1e-12.
    """

    angles: np.ndarray
    weights: np.ndarray
    normalized: bool = field(init=False)

    def __post_init__(self):
        ang = np.mod(np.asarray(self.angles, dtype=float), TWO_PI)
        w = np.asarray(self.weights, dtype=float)
        if ang.ndim != 1 or ang.shape != w.shape or ang.size == 0:
            raise ValueError("angles and weights must be matching nonempty 1-d arrays")
        if np.any(w <= 0.0):
            raise ValueError("weights must be positive")
        order = np.argsort(ang, kind="stable")
        ang, w = ang[order], w[order]
        if ang.size > 1:
            gaps = np.diff(ang)
            wrap = ang[0] + TWO_PI - ang[-1]
            if min(gaps.min(), wrap) <= MIN_ATOM_SEPARATION:
                raise ValueError("duplicate atoms: angular separation below 1e-10")
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "normalized", abs(w.sum() - 1.0) <= 1e-12)

    def __len__(self) -> int:
        return self.angles.size

    def atoms(self) -> np.ndarray:
        """Atom positions e^{i angle} on the unit circle."""
        return np.exp(1j * self.angles)

    def moment(self, p: int) -> complex:
        """p-th moment sum_j w_j e^{i p angle_j}."""
        return complex(np.sum(self.weights * np.exp(1j * p * self.angles)))

    def to_dict(self) -> dict:
        return {"angles": list(self.angles), "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, d: dict) -> "UnitCircleMeasure":
        return cls(angles=np.asarray(d["angles"], dtype=float),
                   weights=np.asarray(d["weights"], dtype=float))


@dataclass(frozen=True, eq=False)
class HyperbolicPath:
    """Path parameter of a measure: b_0..b_n in the disk, z_0..z_n in H.

    b_0 = 0 and z_0 = i; interior points for k <= n-1; the final point is
    on the boundary (z_n real, or INF when b_n = 1).  ``vs``/``ws`` are the
    half-plane step components: z_{k+1} = z_k + (v_k + i w_k) Im z_k.
    """

    disk_points: np.ndarray
    halfplane_points: np.ndarray
    vs: np.ndarray
    ws: np.ndarray

    def __len__(self) -> int:
        return self.disk_points.size - 1

    @property
    def final_disk(self) -> complex:
        return complex(self.disk_points[-1])

    @property
    def final_halfplane(self) -> complex:
        return complex(self.halfplane_points[-1])


# ---------------------------------------------------------------------------
# Szego recursion


def szego_eval(alphas: CoefficientSequence, z, return_all: bool = False):
    """Evaluate (Phi_n, Phi*_n) at ``z`` via the two-term recursion.

    ``z`` may be a scalar or an array.  With ``return_all`` the full stacks
    (Phi_k)_{k=0..n}, (Phi*_k)_{k=0..n} are returned.
    """
    alphas.require_kind("verblunsky")
    a = alphas.values
    zz = np.asarray(z, dtype=complex)
    phi = np.ones_like(zz)
    phis = np.ones_like(zz)
    if return_all:
        all_phi, all_phis = [phi], [phis]
    for ak in a:
        zphi = zz * phi
        phi, phis = zphi - np.conj(ak) * phis, phis - ak * zphi
        if return_all:
            all_phi.append(phi)
            all_phis.append(phis)
    if return_all:
        return np.stack(all_phi), np.stack(all_phis)
    return phi, phis


def _phi_n_coeffs(alphas: np.ndarray) -> np.ndarray:
    """Monomial coefficients of Phi_n, batched; alphas shape (..., n).

    Returns shape (..., n+1) with coefficient of z^p at index p.
    """
    a = np.asarray(alphas, dtype=complex)
    n = a.shape[-1]
    shp = a.shape[:-1]
    phi = np.zeros(shp + (n + 1,), dtype=complex)
    phis = np.zeros_like(phi)
    phi[..., 0] = 1.0
    phis[..., 0] = 1.0
    for k in range(n):
        ak = a[..., k, None]
        zphi = np.roll(phi, 1, axis=-1)
        zphi[..., 0] = 0.0
        phi, phis = zphi - np.conj(ak) * phis, phis - ak * zphi
    return phi


# ---------------------------------------------------------------------------
# coefficient conversions


def _prefix_phase_products(gammas: np.ndarray) -> np.ndarray:
    """P_k = prod_{j<k} (1-conj g_j)/(1-g_j), shape like input, P_0 = 1."""
    g = np.asarray(gammas, dtype=complex)
    gi = g[..., :-1]  # the last entry may sit at 1; it never enters a product
    out = np.ones_like(g)
    out[..., 1:] = np.cumprod((1.0 - np.conj(gi)) / (1.0 - gi), axis=-1)
    return out


def _alphas_from_gammas(g: np.ndarray) -> np.ndarray:
    return np.conj(g) * _prefix_phase_products(g)


def _gammas_from_alphas(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    n = a.shape[-1]
    g = np.empty_like(a)
    prod = np.ones(a.shape[:-1], dtype=complex)
    for k in range(n):
        gk = np.conj(a[..., k]) * prod
        g[..., k] = gk
        if k < n - 1:
            prod = prod * (1.0 - np.conj(gk)) / (1.0 - gk)
    return g


def convert_coefficients(seq: CoefficientSequence, target: str) -> CoefficientSequence:
    """Convert between verblunsky and modified coefficients.

    The two kinds share moduli entrywise; the map is a sequential phase
    twist and is exactly invertible.  A unimodular interior gamma_j = 1
    would degenerate the product; it cannot occur for valid sequences.
    """
    if target not in ("verblunsky", "modified"):
        raise ValueError(f"unknown coefficient kind {target!r}")
    if seq.kind == target:
        return seq
    vals = seq.values
    if np.any(np.abs(1.0 - vals[:-1]) < 1e-14):
        raise ValueError("degenerate product: interior coefficient equals 1")
    if target == "modified":
        out = _gammas_from_alphas(vals)
    else:
        out = _alphas_from_gammas(vals)
    return CoefficientSequence(kind=target, values=out)


# ---------------------------------------------------------------------------
# measure -> coefficients (Gram-Schmidt in the monomial basis)


def _measures_to_alphas_batch(angles: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Verblunsky coefficients for a batch of measures, shape (m, n) each.

    Modified Gram-Schmidt (two passes) of 1, z, ..., z^{n-1} under the
    measure inner product, in coefficient space.  alpha_k is read off the
    constant term of Phi_{k+1}; the last coefficient comes from the exact
    product over atoms.
    """
    ang = np.atleast_2d(np.asarray(angles, dtype=float))
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    m, n = ang.shape
    z = np.exp(1j * ang)
    alphas = np.empty((m, n), dtype=complex)

    vals = np.empty((n, m, n), dtype=complex)    # values of Phi_i at atoms
    coeffs = np.zeros((n, m, n), dtype=complex)  # coefficients of Phi_i
    norms = np.empty((n, m))
    zpow = np.ones((m, n), dtype=complex)
    for k in range(n):
        v = zpow.copy()
        c = np.zeros((m, n), dtype=complex)
        c[:, k] = 1.0
        for _ in range(2):
            for i in range(k):
                proj = np.sum(w * v * np.conj(vals[i]), axis=1) / norms[i]
                v -= proj[:, None] * vals[i]
                c -= proj[:, None] * coeffs[i]
        norm2 = np.sum(w * np.abs(v) ** 2, axis=1)
        if np.any(norm2 < 1e-24):
            raise ValueError("conditioning: Gram matrix too ill-conditioned at this n")
        vals[k], coeffs[k], norms[k] = v, c, norm2
        if k >= 1:
            alphas[:, k - 1] = -np.conj(c[:, 0])
        zpow = zpow * z
    last = -((-1.0) ** n) * np.conj(np.prod(z, axis=1))
    alphas[:, n - 1] = last / np.abs(last)
    return alphas


def measure_to_alpha(mu: UnitCircleMeasure) -> CoefficientSequence:
    """Verblunsky coefficients of a normalized measure with n distinct atoms."""
    if not mu.normalized:
        raise ValueError("measure must be normalized (weights summing to 1)")
    a = _measures_to_alphas_batch(mu.angles[None, :], mu.weights[None, :])[0]
    return CoefficientSequence(kind="verblunsky", values=a)


# ---------------------------------------------------------------------------
# coefficients -> measure (companion roots + normalized-polynomial weights)


def _measures_from_gammas_batch(gammas: np.ndarray):
    """Atoms and weights for a batch of modified sequences, shape (m, n).

    Returns (angles, weights) of shape (m, n), each row sorted by angle.
    """
    g = np.atleast_2d(np.asarray(gammas, dtype=complex))
    m, n = g.shape
    alphas = _alphas_from_gammas(g)

    coeffs = _phi_n_coeffs(alphas)            # (m, n+1), monic
    comp = np.zeros((m, n, n), dtype=complex)
    idx = np.arange(n - 1)
    comp[:, idx + 1, idx] = 1.0
    comp[:, :, -1] = -coeffs[:, :-1]
    roots = np.linalg.eigvals(comp)
    resid = np.abs(roots) - 1.0
    if np.max(np.abs(resid)) > 1e-6:
        raise ValueError(
            "root finder failed to converge: max radial residual "
            f"{np.max(np.abs(resid)):.3e}"
        )
    roots = roots / np.abs(roots)
    angles = np.sort(np.mod(np.angle(roots), TWO_PI), axis=1)
    atoms = np.exp(1j * angles)

    # ||Psi_k||^2 = prod_{l<k} (1-|g_l|^2)/|1-g_l|^2 and Phi_k(1) = prod_{l<k}(1-g_l)
    gi = g[:, : n - 1]
    fac = (1.0 - np.abs(gi) ** 2) / np.abs(1.0 - gi) ** 2
    psi_norm2 = np.ones((m, n))
    psi_norm2[:, 1:] = np.cumprod(fac, axis=1)
    phi_at_one = np.ones((m, n), dtype=complex)
    phi_at_one[:, 1:] = np.cumprod(1.0 - gi, axis=1)

    inv_w = np.zeros((m, n))
    phi = np.ones((m, n), dtype=complex)
    phis = np.ones((m, n), dtype=complex)
    for k in range(n):
        psi_sq = np.abs(phi / phi_at_one[:, k, None]) ** 2
        inv_w += psi_sq / psi_norm2[:, k, None]
        ak = alphas[:, k, None]
        zphi = atoms * phi
        phi, phis = zphi - np.conj(ak) * phis, phis - ak * zphi
    return angles, 1.0 / inv_w


def alpha_to_measure(alphas: CoefficientSequence) -> UnitCircleMeasure:
    """Measure with the given Verblunsky coefficients.

    Atoms are the unit-modulus roots of Phi_n (companion eigenvalues
    projected radially); the weight at each atom inverts the
    normalized-polynomial sum, so the weights sum to 1 up to rounding.
    """
    alphas.require_kind("verblunsky")
    g = _gammas_from_alphas(alphas.values)
    ang, w = _measures_from_gammas_batch(g[None, :])
    return UnitCircleMeasure(angles=ang[0], weights=w[0])


# ---------------------------------------------------------------------------
# paths


def _steps_from_gamma(g: complex):
    """Half-plane step (v, w) with v + iw = U^{-1}(gamma) - i."""
    if abs(g - 1.0) < 1e-13:
        return math.inf, -1.0
    q = g / (1.0 - g)
    return -2.0 * q.imag, 2.0 * q.real


def gamma_to_path(gammas: CoefficientSequence) -> HyperbolicPath:
    """Path parameter of the measure with modified coefficients ``gammas``.

    Runs the disk recursion for b_k and the half-plane recursion for z_k
    side by side; the two agree through z_k = U^{-1}(b_k).  The final point
    is on the boundary; gamma_{n-1} = 1 yields b_n = 1 and z_n = INF.
    """
    gammas.require_kind("modified")
    g = gammas.values
    n = g.size
    b = np.zeros(n + 1, dtype=complex)
    z = np.empty(n + 1, dtype=complex)
    z[0] = 1j
    vs = np.empty(n)
    ws = np.empty(n)
    for k in range(n):
        gk = complex(g[k])
        vs[k], ws[k] = _steps_from_gamma(gk)
        bk = b[k]
        t = gk * (1.0 - bk) / (1.0 - bk.conjugate())
        b[k + 1] = (bk + t) / (1.0 + bk.conjugate() * t)
        if math.isinf(vs[k]):
            b[k + 1] = 1.0
            z[k + 1] = INF
        else:
            z[k + 1] = z[k] + (vs[k] + 1j * ws[k]) * z[k].imag
    if not is_inf(z[n]):
        z[n] = complex(z[n].real, 0.0)   # w_{n-1} = -1 kills Im exactly
        b[n] = b[n] / abs(b[n])
    return HyperbolicPath(disk_points=b, halfplane_points=z, vs=vs, ws=ws)


def reverse_path(gammas: CoefficientSequence) -> np.ndarray:
    """First n points of the reversed path, b'_k = A_{b_{n-1}}(b_{n-k-1}).

    These coincide with the path generated by the coefficient sequence
    iota(gamma_{n-2}), ..., iota(gamma_0).  Returns the disk points
    b'_0..b'_{n-1} as an array.
    """
    gammas.require_kind("modified")
    path = gamma_to_path(gammas)
    b = path.disk_points
    n = len(gammas)
    A = affine_matrix(complex(b[n - 1]), "disk")
    out = np.empty(n, dtype=complex)
    for k in range(n):
        out[k] = mobius_apply(A, complex(b[n - k - 1]))
    return out


# ---------------------------------------------------------------------------
# Aleksandrov transform


def aleksandrov_transform(seq: CoefficientSequence, eta: complex) -> CoefficientSequence:
    """Coefficients of the Aleksandrov measure: alpha_k -> eta alpha_k.

    ``eta`` must be unimodular.  The transformed measure's disk path is the
    original path rotated by eta^{-1}; it charges the point 1 exactly when
    eta equals the original final path point b_n.  Accepts either kind and
    returns the same kind.
    """
    eta = complex(eta)
    if abs(abs(eta) - 1.0) > 1e-10:
        raise ValueError("aleksandrov parameter must have unit modulus")
    if seq.kind == "verblunsky":
        return CoefficientSequence(kind="verblunsky", values=eta * seq.values)
    a = _alphas_from_gammas(seq.values)
    g = _gammas_from_alphas(eta * a)
    return CoefficientSequence(kind="modified", values=g)
