"""Angular-momentum partitions and their reduced state spaces.

The normalized spin generators j = J / sqrt(l(l+1)) form an operational
partition of unity for every spin l >= 1/2.  The geometry of the reduced
state space is solvable in three cases:

* spin 1/2:  D = (delta_ab - i eps_abc x_c)/3, a ball of radius 1/3 in the
  antisymmetric imaginary part (affinely a Bloch ball);
* spin 1:    D is a density matrix with D <= 1/2, and D~ = 1 - 2D maps the
  reduced state space one-to-one onto the full qutrit state space;
* infinite spin: the generators commute and become coordinate functions on
  the unit sphere; D is any density matrix with real entries, and the
  maximal-entropy representing measure is exp(<j, Delta j>) dOmega with a
  real symmetric Delta fixed by the moment condition.

``maxent_sphere`` solves the moment problem for Delta by a damped Newton
iteration in the eigenbasis of D, with the gauge tr(Delta) = 0 (a multiple
of the identity only rescales the density, since <j, j> = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg as la
from .errors import ConvergenceError, ValidationError
from .partitions import CorrelationMatrix, Partition

#: spectra closer than this to the moment-body boundary are rejected
BOUNDARY_MARGIN = 1e-6


@dataclass(frozen=True)
class SpinRep:
    """Irreducible spin-l triple J and its normalized companion j."""

    ell: float
    J: tuple
    j: tuple

    @property
    def dim(self) -> int:
        return int(round(2 * self.ell)) + 1


def spin_generators(ell) -> SpinRep:
    """Standard spin-l matrices with J3 diagonal, J3 = diag(l, l-1, ..., -l).

    The normalized triple j = J / sqrt(l(l+1)) satisfies sum_a j_a^2 = 1.
    For l = 0 the normalization is undefined and j is identically zero.
    """
    two_ell = round(float(2 * ell))
    if two_ell < 0 or abs(2 * float(ell) - two_ell) > 1e-12:
        raise ValidationError(f"ell must be a nonnegative half-integer, got {ell}")
    ell = two_ell / 2.0
    n = two_ell + 1
    if n > 64:
        raise ValidationError(f"dimension {n} exceeds the 64 cap")
    m = ell - np.arange(n)
    jp = np.zeros((n, n), dtype=complex)
    # J+ |l, m> = sqrt(l(l+1) - m(m+1)) |l, m+1>
    for k in range(1, n):
        jp[k - 1, k] = np.sqrt(ell * (ell + 1) - m[k] * (m[k] + 1))
    j1 = (jp + la.dag(jp)) / 2
    j2 = (jp - la.dag(jp)) / 2j
    j3 = np.diag(m).astype(complex)
    big = (j1, j2, j3)
    norm = np.sqrt(ell * (ell + 1)) if two_ell > 0 else 1.0
    small = tuple(a / norm for a in big)
    for a in (*big, *small):
        a.setflags(write=False)
    return SpinRep(ell=ell, J=big, j=small)


def spin_partition(ell) -> Partition:
    """Partition of unity (j_1, j_2, j_3) from the normalized generators."""
    rep = spin_generators(ell)
    if rep.ell == 0:
        raise ValidationError("the trivial representation has no partition of unity")
    return Partition(rep.j, label=f"spin-{rep.ell}")


def spin_half_pullback(x, tol: float = la.DEFAULT_TOL) -> CorrelationMatrix:
    """Correlation matrix of the qubit (1 + x.sigma)/2 through the spin-1/2
    partition, computed from the definition D_ij = tr(rho j_j j_i).

    The closed form is (delta_ab - i eps_abc x_c)/3: diagonal exactly 1/3,
    and the antisymmetric imaginary part has norm |x|/3.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValidationError("expected a real 3-vector")
    if np.linalg.norm(x) > 1.0 + tol:
        raise ValidationError(f"Bloch vector has norm {np.linalg.norm(x):.6g} > 1")
    sig = spin_generators(0.5).j
    rho = np.eye(2, dtype=complex) / 2
    for c, s in zip(x, sig):
        rho += (np.sqrt(3) / 2) * c * s  # j = sigma/sqrt(3)
    return spin_partition(0.5).pullback(rho, tol)


def bloch_alpha(d) -> np.ndarray:
    """The vector alpha of the antisymmetric imaginary part, in the layout
    D = [[1/3, i a3, -i a2], [-i a3, 1/3, i a1], [i a2, -i a1, 1/3]]."""
    d = la.as_square(d)
    return np.array([d[1, 2].imag, d[2, 0].imag, d[0, 1].imag])


class Membership(NamedTuple):
    member: bool
    witness: str


def reduced_membership(ell_case: str, d, tol: float = la.DEFAULT_TOL) -> Membership:
    """Membership oracle for the three solvable reduced state spaces.

    ``ell_case`` is one of ``"half"``, ``"one"``, ``"infinite"``.  The witness
    names the first violated condition; members carry an empty witness.
    """
    d = la.as_square(d)
    if d.shape[0] != 3:
        raise ValidationError("reduced descriptions here are 3x3")
    scale = max(1.0, la.max_abs(d))
    if not la.is_hermitian(d, tol):
        return Membership(False, "not Hermitian")
    if ell_case == "half":
        if la.max_abs(np.diag(d) - 1.0 / 3.0) > tol * scale:
            return Membership(False, "diagonal differs from 1/3")
        off = d.real - np.diag(np.diag(d.real))
        if la.max_abs(off) > tol * scale:
            return Membership(False, "off-diagonal real part nonzero")
        if la.max_abs(d.imag + d.imag.T) > tol * scale:
            return Membership(False, "imaginary part not antisymmetric")
        if np.linalg.norm(bloch_alpha(d)) > 1.0 / 3.0 + tol * scale:
            return Membership(False, "|alpha| exceeds 1/3")
        return Membership(True, "")
    if ell_case == "one":
        if abs(np.trace(d) - 1.0) > tol * scale:
            return Membership(False, "trace differs from 1")
        if not la.is_psd(d, tol):
            return Membership(False, "not PSD")
        if not la.is_psd(np.eye(3) / 2 - d, tol):
            return Membership(False, "1/2 - D not PSD")
        return Membership(True, "")
    if ell_case == "infinite":
        if abs(np.trace(d) - 1.0) > tol * scale:
            return Membership(False, "trace differs from 1")
        if not la.is_psd(d, tol):
            return Membership(False, "not PSD")
        if la.max_abs(d.imag) > tol * scale:
            return Membership(False, "entries not real")
        return Membership(True, "")
    raise ValidationError(f"unknown case {ell_case!r}")


def spin_one_tilde(d, tol: float = la.DEFAULT_TOL) -> np.ndarray:
    """The affine bijection D -> D~ = 1 - 2D onto the full qutrit state space."""
    d = la.as_square(d)
    ok, witness = reduced_membership("one", d, tol)
    if not ok:
        raise ValidationError(f"not a spin-1 reduced state: {witness}")
    return np.eye(3) - 2 * d


def inf_spin_phi_positive(a, tol: float = la.DEFAULT_TOL) -> bool:
    """Positivity of Phi(A) for the commuting sphere algebra: true iff
    A + A^T (plain transpose) is Hermitian PSD, i.e. the quadratic form
    <x, A x> is nonnegative on R^3."""
    a = la.as_square(a)
    if a.shape[0] != 3:
        raise ValidationError("sphere-algebra observables are 3x3")
    return la.is_psd(a + a.T, tol)


@dataclass(frozen=True)
class SphereGrid:
    """Product quadrature for the normalized invariant measure on S^2:
    Gauss-Legendre in cos(theta) times a uniform periodic rule in phi."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("quadrature weights must be >= 0 and sum to 1")

    @property
    def nodes(self) -> np.ndarray:
        return np.column_stack([self.theta, self.phi])

    def unit_vectors(self) -> np.ndarray:
        """(M, 3) array of the coordinate functions j(Omega) at the nodes."""
        st, ct = np.sin(self.theta), np.cos(self.theta)
        return np.column_stack([st * np.cos(self.phi), st * np.sin(self.phi), ct])


def sphere_quadrature(n_theta: int, n_phi: int) -> SphereGrid:
    """Grid exact for spherical polynomials of degree < min(2 n_theta, n_phi)."""
    if n_theta < 2 or n_phi < 2:
        raise ValidationError("need at least 2 nodes per direction")
    u, gl_w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(u)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    w = np.repeat(gl_w / (2 * n_phi), n_phi)
    w = w / w.sum()  # remove the last-ulp drift so the invariant is exact
    return SphereGrid(theta=th.ravel(), phi=ph.ravel(), weights=w)


class MaxEntResult(NamedTuple):
    delta: np.ndarray
    measure: np.ndarray
    residual: float
    iterations: int


def _diag_moments(delta_diag, usq, weights):
    """Moments E[j_k^2] and normalized density under exp(sum_k delta_k j_k^2)."""
    q = usq @ delta_diag
    q = q - q.max()  # overflow guard; a constant shift cancels
    p = np.exp(q)
    z = weights @ p
    p /= z
    m = (weights * p) @ usq
    return m, p


def maxent_sphere(
    d,
    grid: SphereGrid,
    tol: float = la.DEFAULT_TOL,
    max_iter: int = 200,
) -> MaxEntResult:
    """Solve the sphere moment problem for the maximal-entropy density.

    Finds the real symmetric 3x3 matrix Delta with tr(Delta) = 0 such that
    the density p(Omega) ~ exp(<j(Omega), Delta j(Omega)>), normalized
    against the quadrature, reproduces the second moments
    int p j_k j_l dOmega = D_kl.

    The problem is rotated to the eigenbasis of D, where Delta is diagonal
    and the off-diagonal moments vanish by symmetry, leaving a 2-parameter
    damped Newton iteration (the trace-zero gauge and the unit-trace moment
    remove one direction each).

    Returns Delta, the per-node max-entropy measure, the final max-abs
    moment residual and the iteration count.  Spectra within 1e-6 of the
    moment-body boundary (eigenvalues leaving (0, 1)) are rejected: the
    representing measure degenerates there.
    """
    d = la.as_square(d)
    if d.shape[0] != 3:
        raise ValidationError("sphere moments form a 3x3 matrix")
    if la.max_abs(d.imag) > tol * max(1.0, la.max_abs(d)) or not la.is_hermitian(d, tol):
        raise ValidationError("D must be real symmetric")
    dr = d.real
    dr = (dr + dr.T) / 2
    if abs(np.trace(dr) - 1.0) > max(tol, 1e-12) * max(1.0, la.max_abs(dr)):
        raise ValidationError(f"sphere moments must have unit trace, got {np.trace(dr):.6g}")
    evals, rot = np.linalg.eigh(dr)
    if evals.min() < BOUNDARY_MARGIN or evals.max() > 1.0 - BOUNDARY_MARGIN:
        raise ConvergenceError(
            f"spectrum {np.round(evals, 8)} is on or outside the moment-body boundary"
        )

    u = grid.unit_vectors()
    usq = u**2
    w = grid.weights
    target = evals

    # trace-zero gauge: free variables are the first two diagonal entries
    x = np.zeros(2)

    def full_delta(xv):
        return np.array([xv[0], xv[1], -xv[0] - xv[1]])

    m, p = _diag_moments(full_delta(x), usq, w)
    res = m - target
    it = 0
    while la.max_abs(res) > 0.5 * tol and it < max_iter:
        it += 1
        # Jacobian of the moment map: covariance of the squared coordinates
        wp = w * p
        second = usq.T @ (wp[:, None] * usq)
        cov = second - np.outer(m, m)
        jac = cov[:2, :2] - cov[:2, 2:3]  # chain rule for delta_3 = -d1 - d2
        try:
            step = np.linalg.solve(jac, -res[:2])
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular moment Jacobian (degenerate measure)")
        # damping: halve until the residual decreases
        lam, best = 1.0, la.max_abs(res)
        for _ in range(60):
            m_new, p_new = _diag_moments(full_delta(x + lam * step), usq, w)
            if la.max_abs(m_new - target) < best:
                x = x + lam * step
                m, p, res = m_new, p_new, m_new - target
                break
            lam /= 2
        else:
            raise ConvergenceError("Newton step stalled on the sphere moment problem")
    if la.max_abs(res) > 0.5 * tol:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations (residual {la.max_abs(res):.3e})"
        )

    delta = rot @ np.diag(full_delta(x)) @ rot.T
    delta = (delta + delta.T) / 2
    # measure and residual for the full (rotated-back) problem
    q = np.einsum("mi,ij,mj->m", u, delta, u)
    q -= q.max()
    dens = np.exp(q)
    dens /= w @ dens
    measure = w * dens
    moments = np.einsum("m,mi,mj->ij", measure, u, u)
    residual = la.max_abs(moments - dr)
    if residual > tol:
        raise ConvergenceError(
            f"rotated-back moments miss the target by {residual:.3e} "
            f"(quadrature too coarse for this grid?)"
        )
    return MaxEntResult(delta=delta, measure=measure, residual=residual, iterations=it)
