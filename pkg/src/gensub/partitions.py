"""Operator partitions and the reduction maps they generate.

A partition is an ordered, linearly independent family V = (v_1, ..., v_d)
of operators on a global finite-dimensional space.  It generates

* a completely positive map   Phi(A) = sum_ij A_ij v_i* v_j   from d x d
  matrices to global operators, and
* its pull-back on states, the correlation matrix
  D_ij = tr(rho v_j* v_i),
which is the reduced description of the global state rho.

Partitions whose mass  m = sum_i v_i* v_i  equals the identity are
"partitions of unity": Phi is then unital and correlation matrices have
unit trace.  General partitions (e.g. a family of annihilation operators)
keep their physical normalization, so correlation matrices are stored
together with a ``unity`` flag instead of being renormalized.

The mean-field reduction  Phi(A) = (1/N) sum_s A^(s)  on N identical
factors is completely positive and unital but is *not* generated by any
operator family for N >= 3 (the one-block Stinespring form requires the
Choi rank to stay below the global dimension, which fails).  It is carried
by :class:`MeanFieldReduction`, which exposes the same ``phi``/``pullback``
surface as :class:`Partition`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import ValidationError

#: Gram-matrix rank tolerance for the linear-independence check.
INDEPENDENCE_TOL = 1e-8


@dataclass(frozen=True)
class CorrelationMatrix:
    """A d x d Hermitian PSD matrix D_ij = omega(v_j* v_i).

    ``unity`` records whether the generating partition had unit mass; in
    that case D has unit trace.
    """

    matrix: np.ndarray
    unity: bool
    tol: float = field(default=la.DEFAULT_TOL, compare=False)

    def __post_init__(self):
        m = la.as_square(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        scale = max(1.0, la.max_abs(m))
        if not la.is_hermitian(m, self.tol):
            raise ValidationError("correlation matrix is not Hermitian")
        if not la.is_psd(m, self.tol):
            raise ValidationError("correlation matrix is not PSD")
        if self.unity and abs(np.trace(m) - 1.0) > self.tol * scale:
            raise ValidationError(
                f"partition of unity requires unit trace, got {np.trace(m):.6g}"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class Partition:
    """Ordered family of equal-dimension square operators.

    Linear independence is checked at construction through the rank of the
    Gram matrix G_ij = tr(v_i* v_j); degenerate families are rejected unless
    ``require_independent=False``.  Composed partitions use the relaxed form
    because products of independent elements need not stay independent
    (orthogonal projector families compose degenerately).
    """

    def __init__(self, elements, label: str = "", require_independent: bool = True):
        elements = tuple(la.as_square(v).copy() for v in elements)
        if not elements:
            raise ValidationError("a partition needs at least one element")
        n = elements[0].shape[0]
        if any(v.shape[0] != n for v in elements):
            raise ValidationError("partition elements must share one global dimension")
        for v in elements:
            v.setflags(write=False)
        self.elements = elements
        self.label = label
        self._stack = np.stack(elements)
        self._stack.setflags(write=False)
        if require_independent:
            w = np.linalg.eigvalsh(self.gram())
            if w[0] <= INDEPENDENCE_TOL * max(1.0, w[-1]):
                raise ValidationError(
                    f"partition elements are linearly dependent "
                    f"(smallest Gram eigenvalue {w[0]:.3e})"
                )

    @property
    def size(self) -> int:
        """Number of elements d (the reduced dimension)."""
        return len(self.elements)

    @property
    def dim(self) -> int:
        """Global dimension n."""
        return self.elements[0].shape[0]

    def gram(self) -> np.ndarray:
        v = self._stack
        return np.einsum("iab,jab->ij", v.conj(), v)

    def mass(self) -> np.ndarray:
        """m = sum_i v_i* v_i."""
        v = self._stack
        return np.einsum("iba,ibc->ac", v.conj(), v)

    def is_unity(self, tol: float = la.DEFAULT_TOL) -> bool:
        return la.max_abs(self.mass() - np.eye(self.dim)) <= tol * max(
            1.0, la.max_abs(self.mass())
        )

    def phi(self, a) -> np.ndarray:
        """The completely positive map Phi(A) = sum_ij A_ij v_i* v_j."""
        a = la.as_square(a)
        if a.shape[0] != self.size:
            raise ValidationError(
                f"Phi expects a {self.size}x{self.size} matrix, got {a.shape[0]}"
            )
        v = self._stack
        return np.einsum("ij,iba,jbc->ac", a, v.conj(), v)

    def pullback(self, rho, tol: float = la.DEFAULT_TOL) -> CorrelationMatrix:
        """Correlation matrix D_ij = tr(rho v_j* v_i) of a global density."""
        rho = la.check_density(rho, tol)
        if rho.shape[0] != self.dim:
            raise ValidationError(
                f"state dimension {rho.shape[0]} does not match partition "
                f"dimension {self.dim}"
            )
        v = self._stack
        x = np.einsum("iab,bc->iac", v, rho)
        d = np.einsum("iac,jac->ij", x, v.conj())
        return CorrelationMatrix(d, unity=self.is_unity(), tol=tol)

    def compose(self, other: "Partition") -> "Partition":
        """Composed partition with elements v_alpha w_k.

        The flat index of element (alpha, k) is alpha * other.size + k, so
        the pull-back of the composition carries the correlation matrix of
        the composed system, D_{alpha k; beta l} = omega(w_k* v_alpha* v_beta w_l).
        """
        if self.dim != other.dim:
            raise ValidationError("composed partitions must share the global dimension")
        products = [v @ w for v in self.elements for w in other.elements]
        lbl = f"{self.label or 'V'}*{other.label or 'W'}"
        return Partition(products, label=lbl, require_independent=False)

    def __repr__(self):
        return f"Partition(d={self.size}, n={self.dim}, label={self.label!r})"


def compose(v: Partition, w: Partition) -> Partition:
    return v.compose(w)


@dataclass(frozen=True)
class PhaseSpaceModel:
    """Discrete classical system: points x with weights mu(x) and a complex
    d-vector v(x) per point."""

    points: tuple
    weights: np.ndarray
    values: np.ndarray
    tol: float = field(default=la.DEFAULT_TOL, compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if w.ndim != 1 or v.ndim != 2 or len(w) != v.shape[0]:
            raise ValidationError("weights and per-point values must align")
        if len(self.points) != len(w):
            raise ValidationError("one label per point required")
        if np.any(w < -self.tol):
            raise ValidationError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > max(self.tol, 1e-10):
            raise ValidationError(f"weights sum to {w.sum():.6g}, expected 1")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def classical_correlation(model: PhaseSpaceModel, tol: float = la.DEFAULT_TOL) -> CorrelationMatrix:
    """D = sum_x mu(x) |v(x)><v(x)| for a discrete phase-space model."""
    v = model.values
    d = np.einsum("x,xi,xj->ij", model.weights, v, v.conj())
    # partition of unity in the commutative algebra <=> |v(x)| = 1 everywhere
    norms = np.einsum("xi,xi->x", v, v.conj()).real
    unity = bool(np.all(np.abs(norms - 1.0) <= 1e-10 * max(1.0, la.max_abs(norms))))
    return CorrelationMatrix(d, unity=unity, tol=tol)


def open_system_partition(dim_s: int, dim_e: int, phi_vec=None) -> Partition:
    """Partition v_j = |phi><j| (x) 1_E whose pull-back is the partial trace
    over the environment."""
    if dim_s < 1 or dim_e < 1:
        raise ValidationError("dimensions must be positive")
    if phi_vec is None:
        phi_vec = np.zeros(dim_s)
        phi_vec[0] = 1.0
    phi_vec = np.asarray(phi_vec, dtype=complex)
    if phi_vec.shape != (dim_s,):
        raise ValidationError("phi must be a system-dimension vector")
    if abs(np.linalg.norm(phi_vec) - 1.0) > 1e-10:
        raise ValidationError("phi must be normalized")
    eye_e = np.eye(dim_e)
    elements = []
    for j in range(dim_s):
        ketbra = np.zeros((dim_s, dim_s), dtype=complex)
        ketbra[:, j] = phi_vec
        elements.append(np.kron(ketbra, eye_e))
    return Partition(elements, label=f"open({dim_s}|{dim_e})")


def coarse_grain_partition(projectors, dim_e: int = 1) -> Partition:
    """Partition P_j (x) 1_E from mutually orthogonal projectors summing to 1."""
    projectors = [la.as_square(p) for p in projectors]
    n = projectors[0].shape[0]
    for i, p in enumerate(projectors):
        if not la.is_hermitian(p) or la.max_abs(p @ p - p) > 1e-10 * max(1.0, la.max_abs(p)):
            raise ValidationError(f"element {i} is not an orthogonal projector")
    for i in range(len(projectors)):
        for j in range(i + 1, len(projectors)):
            if la.max_abs(projectors[i] @ projectors[j]) > 1e-10:
                raise ValidationError(f"projectors {i} and {j} are not orthogonal")
    if la.max_abs(sum(projectors) - np.eye(n)) > 1e-10:
        raise ValidationError("projectors must sum to the identity")
    eye_e = np.eye(dim_e)
    return Partition(
        [np.kron(p, eye_e) for p in projectors],
        label=f"coarse({len(projectors)}|{dim_e})",
    )


class MeanFieldReduction:
    """Mean-field reduction Phi(A) = (1/N)(A (x) 1 ... + ... + 1 (x) ... (x) A).

    Unital and completely positive; the pull-back is the average of the
    single-site marginals.  Not a :class:`Partition` (see module docstring),
    but offers the same reduction surface.
    """

    def __init__(self, dim: int, copies: int):
        if dim < 2 or copies < 1:
            raise ValidationError("need a nontrivial single-particle space and N >= 1")
        if dim**copies > 4096:
            raise ValidationError(f"global dimension {dim**copies} exceeds the 4096 cap")
        self.site_dim = dim
        self.copies = copies

    @property
    def size(self) -> int:
        return self.site_dim

    @property
    def dim(self) -> int:
        return self.site_dim**self.copies

    def is_unity(self, tol: float = la.DEFAULT_TOL) -> bool:
        return True

    def phi(self, a) -> np.ndarray:
        a = la.as_square(a)
        if a.shape[0] != self.site_dim:
            raise ValidationError("observable must live on the single-particle space")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for s in range(self.copies):
            factors = [np.eye(self.site_dim)] * self.copies
            factors[s] = a
            out += la.kron_all(factors)
        return out / self.copies

    def pullback(self, rho, tol: float = la.DEFAULT_TOL) -> CorrelationMatrix:
        rho = la.check_density(rho, tol)
        if rho.shape[0] != self.dim:
            raise ValidationError("state dimension does not match the N-fold space")
        dims = [self.site_dim] * self.copies
        d = np.zeros((self.site_dim, self.site_dim), dtype=complex)
        for s in range(self.copies):
            d += la.partial_trace(rho, dims, keep=s)
        return CorrelationMatrix(d / self.copies, unity=True, tol=tol)

    def __repr__(self):
        return f"MeanFieldReduction(dim={self.site_dim}, copies={self.copies})"
