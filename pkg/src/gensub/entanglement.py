"""Generalized entanglement of composed correlation matrices.

The partial-transpose witness is the only criterion implemented: a
composed correlation matrix whose partial transpose has a negative
eigenvalue is necessarily entangled.  PPT-positive matrices are reported
as "not witnessed", never as separable (PPT is not sufficient in general).

A two-boson pure state sum_kl gamma_kl b*_k a*_l |0,0> gives the rank-one
correlation matrix Omega with entries gamma_{k alpha} conj(gamma_{l beta});
its partial transpose has the closed-form spectrum
{ +-det|G|, (1 +- sqrt(1 - 4 det|G|^2)) / 2 } with |G| = sqrt(G G*), so the
state is witnessed exactly when det G differs from zero.

Temporal correlations replace the second partition with a Heisenberg
evolution Lambda_t, D_{kl,k'l'}(t) = tr(omega v*_k Lambda_t(v*_l v_l') v_k'),
normalized for partitions of unity when Lambda_t is unital.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg as la
from .errors import ValidationError
from .partitions import CorrelationMatrix, Partition, PhaseSpaceModel


@dataclass(frozen=True)
class ComposedCorrelation:
    """Correlation matrix of a composed system with its factor layout.

    The flat index of the pair (alpha, k) is alpha * dimB + k, matching
    :meth:`gensub.partitions.Partition.compose`.
    """

    matrix: np.ndarray
    shape: la.BipartiteShape
    unity: bool
    tol: float = field(default=la.DEFAULT_TOL, compare=False)

    def __post_init__(self):
        m = la.as_square(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "shape", la.BipartiteShape(*self.shape))
        if self.shape.dimA * self.shape.dimB != m.shape[0]:
            raise ValidationError("factor layout does not match the matrix dimension")
        if not la.is_hermitian(m, self.tol):
            raise ValidationError("composed correlation matrix is not Hermitian")
        if not la.is_psd(m, self.tol):
            raise ValidationError("composed correlation matrix is not PSD")


def composed_pullback(
    v: Partition, w: Partition, omega, tol: float = la.DEFAULT_TOL
) -> ComposedCorrelation:
    """Pull back a global state through the composed partition {v_alpha w_k}."""
    d = v.compose(w).pullback(omega, tol)
    return ComposedCorrelation(
        matrix=d.matrix,
        shape=la.BipartiteShape(v.size, w.size),
        unity=d.unity,
        tol=tol,
    )


class PPTResult(NamedTuple):
    min_eig: float
    entangled: bool
    spectrum: np.ndarray


def ppt_test(d: ComposedCorrelation, tol: float = la.DEFAULT_TOL) -> PPTResult:
    """Partial-transpose witness: entangled iff min eig < -tol.

    A nonnegative spectrum means "not witnessed"; it is no separability
    certificate.
    """
    pt = la.partial_transpose(d.matrix, d.shape)
    spectrum = np.linalg.eigvalsh(pt)
    min_eig = float(spectrum[0])
    return PPTResult(min_eig=min_eig, entangled=min_eig < -tol, spectrum=spectrum)


@dataclass(frozen=True)
class GMatrix:
    """Amplitudes gamma_kl of a two-boson pure state, tr(G G*) = 1."""

    matrix: np.ndarray
    tol: float = field(default=la.DEFAULT_TOL, compare=False)

    def __post_init__(self):
        g = np.asarray(self.matrix, dtype=complex)
        if g.shape != (2, 2):
            raise ValidationError("G must be 2x2")
        norm = np.sqrt((np.abs(g) ** 2).sum())
        if abs(norm - 1.0) > max(self.tol, 1e-10):
            raise ValidationError(f"G has Frobenius norm {norm:.6g}, expected 1")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)


def two_boson_correlation(g: GMatrix) -> ComposedCorrelation:
    """Correlation matrix of the two-boson state sum gamma_kl b*_k a*_l |0,0>:
    entry ((k,alpha),(l,beta)) = gamma_{k alpha} conj(gamma_{l beta});
    rank one with unit trace."""
    vec = g.matrix.ravel()  # row-major: flat index (k, alpha) = 2k + alpha
    return ComposedCorrelation(
        matrix=np.outer(vec, vec.conj()),
        shape=la.BipartiteShape(2, 2),
        unity=True,
    )


def two_boson_pt_spectrum(g: GMatrix) -> np.ndarray:
    """Closed-form eigenvalues of the partially transposed two-boson
    correlation matrix, sorted ascending: {+-det|G|, (1 +- sqrt(1-4det|G|^2))/2}."""
    det = abs(np.linalg.det(g.matrix))  # det|G| = |det G| since |G| = sqrt(GG*)
    disc = np.sqrt(max(0.0, 1.0 - 4.0 * det**2))
    return np.sort([det, -det, 0.5 * (1.0 + disc), 0.5 * (1.0 - disc)])


def temporal_correlation(
    v: Partition, omega, superop: np.ndarray, tol: float = la.DEFAULT_TOL
) -> ComposedCorrelation:
    """Two-time correlation matrix
    D_{kl,k'l'} = tr(omega v*_k Lambda(v*_l v_l') v_k')
    with pair index (k, l) flattened as k * d + l.

    For a partition of unity the map must be unital (within tolerance) so
    that the matrix keeps unit trace.
    """
    omega = la.check_density(omega, tol)
    n = v.dim
    d = v.size
    if superop.shape != (n * n, n * n):
        raise ValidationError("superoperator does not match the global dimension")
    unity = v.is_unity()
    lam_one = (superop @ np.eye(n, dtype=complex).ravel()).reshape(n, n)
    if unity and la.max_abs(lam_one - np.eye(n)) > max(tol, 1e-8):
        raise ValidationError(
            "non-unital Heisenberg map with unity normalization requested"
        )
    out = np.empty((d * d, d * d), dtype=complex)
    evolved = {}
    for l in range(d):
        for lp in range(d):
            x = la.dag(v.elements[l]) @ v.elements[lp]
            evolved[l, lp] = (superop @ x.ravel()).reshape(n, n)
    for k in range(d):
        wk = la.dag(v.elements[k])
        for l in range(d):
            for kp in range(d):
                for lp in range(d):
                    val = np.trace(omega @ wk @ evolved[l, lp] @ v.elements[kp])
                    out[k * d + l, kp * d + lp] = val
    out = (out + la.dag(out)) / 2
    return ComposedCorrelation(
        matrix=out,
        shape=la.BipartiteShape(d, d),
        unity=unity,
        tol=max(tol, 1e-8),
    )


def classical_representation_single(d, tol: float = la.DEFAULT_TOL) -> PhaseSpaceModel:
    """Discrete classical representation of a single-system correlation matrix:
    spectral points with weights lambda_i / tr(D) and values sqrt(tr D) psi_i,
    so that the classical correlation of the model reproduces D."""
    dm = d.matrix if isinstance(d, CorrelationMatrix) else la.as_square(d)
    if not la.is_psd(dm, tol):
        raise ValidationError("need a Hermitian PSD correlation matrix")
    w, u = np.linalg.eigh(dm)
    total = float(np.trace(dm).real)
    keep = w > max(tol, 1e-12) * max(1.0, w[-1])
    w, u = w[keep], u[:, keep]
    values = np.sqrt(total) * u.T
    return PhaseSpaceModel(
        points=tuple(range(int(keep.sum()))),
        weights=w / total,
        values=values,
    )
