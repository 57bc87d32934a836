"""Dense complex matrix primitives used by every other module.

Operators, density matrices and correlation matrices are plain square
``numpy`` arrays of ``complex128``.  Predicates follow a single tolerance
policy: an absolute tolerance (default ``1e-10``) scaled by
``max(1, max-abs-entry)`` of the argument, and every predicate takes the
tolerance as an explicit parameter.

Positive semidefiniteness is decided through the elementary symmetric
invariants of the characteristic polynomial (Faddeev-LeVerrier recursion):
a matrix is PSD iff it is Hermitian and all invariants are nonnegative.
An eigenvalue-based test is kept in the test suite as the independent
oracle; the two must agree.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import ValidationError

DEFAULT_TOL = 1e-10


class BipartiteShape(NamedTuple):
    """Tensor-factor bookkeeping for bipartite index layouts."""

    dimA: int
    dimB: int


def as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return a


def dag(a) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.abs(a).max()) if a.size else 0.0


def is_hermitian(a, tol: float = DEFAULT_TOL) -> bool:
    a = as_square(a)
    return max_abs(a - dag(a)) <= tol * max(1.0, max_abs(a))


def elem_sym_invariants(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Elementary symmetric polynomials (e_1, ..., e_d) of the eigenvalues.

    Computed from the characteristic-polynomial coefficients via the
    Faddeev-LeVerrier recursion, not from an eigen-decomposition.
    e_1 is the trace, e_d the determinant.  For Hermitian input the
    (tiny) imaginary residue is discarded and a real array is returned.
    """
    a = as_square(a)
    d = a.shape[0]
    # det(x*1 - A) = x^d + c[d-1] x^(d-1) + ... + c[0],  e_k = (-1)^k c[d-k]
    m = np.zeros_like(a)
    c = 1.0 + 0.0j
    e = np.empty(d, dtype=complex)
    for k in range(1, d + 1):
        m = a @ m + c * np.eye(d)
        c = -np.trace(a @ m) / k
        e[k - 1] = (-1) ** k * c
    if is_hermitian(a, tol):
        return e.real
    return e


def is_psd(a, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``a`` is Hermitian and all elementary symmetric invariants of
    order k are >= -tol * max(1, max_abs(a))**k."""
    a = as_square(a)
    if not is_hermitian(a, tol):
        return False
    e = np.real(elem_sym_invariants(a, tol))
    scale = max(1.0, max_abs(a)) ** np.arange(1, a.shape[0] + 1)
    return bool(np.all(e >= -tol * scale))


def partial_transpose(m, shape: BipartiteShape | tuple) -> np.ndarray:
    """Transpose the second tensor factor.

    Entry ((a,b),(a',b')) of the result equals entry ((a,b'),(a',b)) of the
    input; the operation is involutive and trace preserving.
    """
    m = as_square(m)
    da, db = int(shape[0]), int(shape[1])
    if da * db != m.shape[0]:
        raise ValidationError(
            f"shape {da}x{db} does not factor matrix dimension {m.shape[0]}"
        )
    return m.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(m.shape)


def matrix_exp(a) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring Pade)."""
    return scipy.linalg.expm(as_square(a))


def sqrtm_psd(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Hermitian square root of a PSD matrix; tolerates rank deficiency."""
    a = as_square(a)
    if not is_psd(a, tol):
        raise ValidationError("matrix is not positive semidefinite")
    w, u = np.linalg.eigh(a)
    return (u * np.sqrt(np.clip(w, 0.0, None))) @ dag(u)


def check_density(rho, tol: float = DEFAULT_TOL, name: str = "rho") -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD and unit trace within tol."""
    rho = as_square(rho)
    scale = max(1.0, max_abs(rho))
    if not is_hermitian(rho, tol):
        raise ValidationError(f"{name} is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol * scale:
        raise ValidationError(f"{name} has trace {np.trace(rho):.6g}, expected 1")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -tol * scale:
        raise ValidationError(f"{name} has negative eigenvalue {w[0]:.3e}")
    return rho


def von_neumann_entropy(rho, tol: float = DEFAULT_TOL) -> float:
    """-tr(rho log rho) in nats, with 0 log 0 := 0."""
    rho = check_density(rho, tol)
    w = np.linalg.eigvalsh(rho)
    w = w[w > 0.0]
    return float(-(w * np.log(w)).sum())


def kron_all(factors) -> np.ndarray:
    """Tensor product of a sequence of matrices, leftmost factor first."""
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def partial_trace(rho, dims, keep: int) -> np.ndarray:
    """Trace out all tensor factors except ``keep``.

    ``dims`` lists the factor dimensions, leftmost factor first.
    """
    rho = as_square(rho)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValidationError(
            f"factor dimensions {dims} do not match matrix dimension {rho.shape[0]}"
        )
    n = len(dims)
    t = rho.reshape(dims + dims)
    # move the kept factor to the front, then trace the rest as one block
    perm = [keep] + [i for i in range(n) if i != keep]
    t = t.transpose(perm + [n + p for p in perm])
    dk = dims[keep]
    rest = rho.shape[0] // dk
    t = t.reshape(dk, rest, dk, rest)
    return np.einsum("arbr->ab", t)
