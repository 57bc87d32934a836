"""Embeddings: right inverses of the pull-back, Phi* o Psi = id.

Four families are provided:

* product embedding     Psi(D) = D (x) omega_E          (open systems),
* mean-field embedding  Psi(D) = D (x) D (x) ... (x) D  (N identical parts),
* Gibbs embedding       Psi(D) = exp(-sum_ij alpha_ij v_i* v_j) / Z(alpha),
  the maximal-entropy state among all global states with pull-back D,
* quasi-free states, represented by their symbol Q; expectations of
  normally ordered monomials are determinants (fermions) or permanents
  (bosons) of submatrices of Q.

The Gibbs solver is a damped Newton iteration on the Hermitian multiplier
matrix alpha with a finite-difference Jacobian.  For partitions of unity
the map alpha -> state is invariant under alpha -> alpha + c 1, so the
solver works in the traceless gauge.  A numerically rank-deficient
Jacobian aborts the iteration: the reduced description then admits no
embedding in this family (the spin-1/2 partition is the canonical case).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import ConvergenceError, RankDeficiencyError, ValidationError
from .partitions import CorrelationMatrix, Partition

FD_STEP = 1e-6  # central finite-difference step for the Newton Jacobian


def product_embedding(d, omega_e, tol: float = la.DEFAULT_TOL) -> np.ndarray:
    """Psi(D) = D (x) omega_E; the open-system pull-back returns D exactly."""
    d = la.check_density(d, tol, name="D")
    omega_e = la.check_density(omega_e, tol, name="omega_E")
    return np.kron(d, omega_e)


def meanfield_embedding(d, copies: int, tol: float = la.DEFAULT_TOL) -> np.ndarray:
    """N-fold tensor power of a single-particle density matrix."""
    d = la.check_density(d, tol, name="D")
    if copies < 1:
        raise ValidationError("need N >= 1 copies")
    if d.shape[0] ** copies > 4096:
        raise ValidationError(
            f"global dimension {d.shape[0]**copies} exceeds the 4096 cap"
        )
    return la.kron_all([d] * copies)


@dataclass(frozen=True)
class GibbsParams:
    """Multipliers of the maximal-entropy state exp(-sum alpha_ij v_i* v_j)/Z."""

    alpha: np.ndarray
    log_z: float
    residual: float
    iterations: int


def gibbs_state(v: Partition, alpha) -> tuple[np.ndarray, float]:
    """The state Z^-1 exp(-Phi(alpha)) and log Z for Hermitian multipliers."""
    alpha = la.as_square(alpha)
    if not la.is_hermitian(alpha, 1e-8):
        raise ValidationError("alpha must be Hermitian")
    g = v.phi(alpha)
    w, u = np.linalg.eigh((g + la.dag(g)) / 2)
    shift = (-w).max()
    boltz = np.exp(-w - shift)
    log_z = shift + np.log(boltz.sum())
    rho = (u * boltz) @ la.dag(u) / boltz.sum()
    return rho, float(log_z)


def _hermitian_basis(d: int, traceless: bool):
    """Real-coordinate basis of the (traceless) Hermitian d x d matrices."""
    basis = []
    if traceless:
        for k in range(d - 1):
            b = np.zeros((d, d), dtype=complex)
            b[k, k], b[d - 1, d - 1] = 1.0, -1.0
            basis.append(b)
    else:
        for k in range(d):
            b = np.zeros((d, d), dtype=complex)
            b[k, k] = 1.0
            basis.append(b)
    for k in range(d):
        for l in range(k + 1, d):
            b = np.zeros((d, d), dtype=complex)
            b[k, l] = b[l, k] = 1.0
            basis.append(b)
            b = np.zeros((d, d), dtype=complex)
            b[k, l], b[l, k] = 1.0j, -1.0j
            basis.append(b)
    return basis


def gibbs_embedding(
    v: Partition,
    d,
    tol: float = la.DEFAULT_TOL,
    max_iter: int = 300,
) -> GibbsParams:
    """Solve Phi*(exp(-Phi(alpha))/Z) = D for the Hermitian multipliers alpha.

    ``d`` may be a :class:`CorrelationMatrix` or a raw matrix strictly inside
    the reduced state space.  Damped Newton from alpha = 0 with a central
    finite-difference Jacobian; alpha stays Hermitian by construction.

    Raises :class:`RankDeficiencyError` when the Jacobian of the moment map
    is numerically rank deficient (no embedding exists in the Gibbs family,
    e.g. for the spin-1/2 partition), and :class:`ConvergenceError` for
    boundary or exterior targets.
    """
    if v.dim > 64:
        raise ValidationError(f"global dimension {v.dim} exceeds the 64 cap")
    target = d.matrix if isinstance(d, CorrelationMatrix) else la.as_square(d)
    if target.shape[0] != v.size:
        raise ValidationError("target matrix must match the partition size")
    if not la.is_hermitian(target, 1e-8):
        raise ValidationError("target correlation matrix must be Hermitian")

    basis = _hermitian_basis(v.size, traceless=v.is_unity())
    npar = len(basis)

    def alpha_of(x):
        a = np.zeros((v.size, v.size), dtype=complex)
        for c, b in zip(x, basis):
            a += c * b
        return a

    def moments(x):
        rho, log_z = gibbs_state(v, alpha_of(x))
        p = v.pullback(rho, tol=1e-6)  # loose check; Newton enforces the real one
        return p.matrix, rho, log_z

    def coords(m):
        # real coordinates of a Hermitian matrix in the chosen basis layout
        return np.array([np.trace(b.conj().T @ m).real / 2 for b in basis])

    def jacobian(x):
        jac = np.empty((npar, npar))
        for c in range(npar):
            xp, xm = x.copy(), x.copy()
            xp[c] += FD_STEP
            xm[c] -= FD_STEP
            mp, _, _ = moments(xp)
            mm, _, _ = moments(xm)
            jac[:, c] = coords(mp - mm) / (2 * FD_STEP)
        s = np.linalg.svd(jac, compute_uv=False)
        if s[-1] <= 1e-10 * s[0]:
            _, _, vt = np.linalg.svd(jac)
            direction = alpha_of(vt[-1])
            raise RankDeficiencyError(
                "moment Jacobian is rank deficient: no Gibbs embedding exists "
                f"for this partition (degenerate multiplier direction, "
                f"largest component {la.max_abs(direction):.3g} at "
                f"{np.unravel_index(np.abs(direction).argmax(), direction.shape)})",
                direction=direction,
            )
        return jac

    x = np.zeros(npar)
    m, rho, log_z = moments(x)
    res_mat = m - target
    res = coords(res_mat)
    # certify well-posedness even when alpha = 0 already reproduces D: a
    # degenerate Jacobian means the multiplier problem has no unique solution
    jacobian(x)

    it = 0
    while la.max_abs(res_mat) > tol and it < max_iter:
        it += 1
        jac = jacobian(x)
        step = np.linalg.solve(jac, -res)
        lam, best = 1.0, la.max_abs(res_mat)
        for _ in range(60):
            m_new, rho_new, log_z_new = moments(x + lam * step)
            if la.max_abs(m_new - target) < best:
                x = x + lam * step
                m, rho, log_z = m_new, rho_new, log_z_new
                res_mat = m - target
                res = coords(res_mat)
                break
            lam /= 2
        else:
            raise ConvergenceError(
                f"Newton stalled at residual {best:.3e}; "
                "target is on or outside the reduced state space"
            )
    if la.max_abs(res_mat) > tol:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations "
            f"(residual {la.max_abs(res_mat):.3e})"
        )
    return GibbsParams(
        alpha=alpha_of(x),
        log_z=log_z,
        residual=float(la.max_abs(res_mat)),
        iterations=it,
    )


@dataclass(frozen=True)
class Symbol:
    """One-particle density matrix Q of a many-body state.

    PSD with trace equal to the mean particle number; fermionic symbols
    additionally satisfy Q <= 1.
    """

    matrix: np.ndarray
    statistics: str
    tol: float = field(default=la.DEFAULT_TOL, compare=False)

    def __post_init__(self):
        q = la.as_square(self.matrix)
        q.setflags(write=False)
        object.__setattr__(self, "matrix", q)
        if self.statistics not in ("fermi", "bose"):
            raise ValidationError(f"unknown statistics {self.statistics!r}")
        if not la.is_psd(q, self.tol):
            raise ValidationError("symbol must be Hermitian PSD")
        if self.statistics == "fermi":
            top = np.linalg.eigvalsh(q)[-1]
            if top > 1.0 + self.tol * max(1.0, la.max_abs(q)):
                raise ValidationError(f"fermionic symbol has eigenvalue {top:.6g} > 1")

    @property
    def modes(self) -> int:
        return self.matrix.shape[0]


def _permanent(m: np.ndarray) -> complex:
    # Ryser's inclusion-exclusion formula; exponential cost, fine for k <= 8
    k = m.shape[0]
    if k == 0:
        return 1.0 + 0.0j
    total = 0.0 + 0.0j
    for s in range(1, 1 << k):
        cols = [c for c in range(k) if (s >> c) & 1]
        total += (-1) ** len(cols) * np.prod(m[:, cols].sum(axis=1))
    return (-1) ** k * total


def quasifree_expectation(sym: Symbol, creators, annihilators) -> complex:
    """Expectation of a*_{i1} ... a*_{ik} a_{jk} ... a_{j1} in the quasi-free
    state with symbol Q.

    Both index sequences are given in operator order (left to right as the
    monomial is written).  The value is det (fermions) or permanent (bosons)
    of the k x k matrix M_ab = <j_a, Q i_b>; for k = 1 this reduces to the
    symbol entry itself.
    """
    creators = [int(i) for i in creators]
    annihilators = [int(j) for j in annihilators]
    if len(creators) != len(annihilators):
        raise ValidationError("need equally many creators and annihilators")
    k = len(creators)
    if k > 8:
        raise ValidationError("monomials with more than 8 pairs are not supported")
    n = sym.modes
    if any(i < 0 or i >= n for i in creators + annihilators):
        raise ValidationError("mode index out of range")
    # annihilators are written (j_k, ..., j_1); row a of M belongs to j_a
    rows = annihilators[::-1]
    m = sym.matrix[np.ix_(rows, creators)]
    if sym.statistics == "fermi":
        return complex(np.linalg.det(m)) if k else 1.0 + 0.0j
    return complex(_permanent(m))
