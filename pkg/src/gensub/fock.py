"""Brute-force Fock-space oracle for fermionic and truncated bosonic modes.

Fermionic annihilators use the Jordan-Wigner construction
a_k = Z^(k-1) (x) s- (x) 1^(n-k) with mode 1 leftmost; the canonical
anticommutation relations hold exactly (all entries are small integers).
Bosonic ladder matrices are truncated at a per-mode cutoff; the canonical
commutation relations hold exactly off the top-occupation states, so
validations should only trust states with negligible top-occupation weight
(use :func:`top_occupation_weight` to monitor the truncation).

Everything here is dense and exponential in the number of modes; it exists
to validate the closed reduced equations, not to scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .dynamics import LindbladModel, QuasiFreeModel
from .embeddings import Symbol
from .errors import ValidationError


@dataclass(frozen=True)
class FockRep:
    """Explicit annihilation matrices for n modes on the full Fock space."""

    statistics: str
    modes: int
    cutoff: int
    ops: tuple

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def number_operator(self) -> np.ndarray:
        return sum(la.dag(a) @ a for a in self.ops)

    def vacuum(self) -> np.ndarray:
        """Density matrix of the vacuum (basis index 0)."""
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def occupation_index(self, occ) -> int:
        """Basis index of the occupation tuple (mode 1 leftmost)."""
        occ = [int(o) for o in occ]
        if len(occ) != self.modes or any(o < 0 or o > self.cutoff for o in occ):
            raise ValidationError("occupation list does not fit the representation")
        idx = 0
        for o in occ:
            idx = idx * (self.cutoff + 1) + o
        return idx


def fermion_ops(n: int) -> FockRep:
    """Jordan-Wigner fermionic modes; exact CAR for n <= 10."""
    if n < 1 or n > 10:
        raise ValidationError("fermionic oracle supports 1 to 10 modes")
    sminus = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ops = []
    for k in range(n):
        factors = [z] * k + [sminus] + [eye] * (n - k - 1)
        a = la.kron_all(factors)
        a.setflags(write=False)
        ops.append(a)
    return FockRep(statistics="fermi", modes=n, cutoff=1, ops=tuple(ops))


def boson_ops(n: int, cutoff: int) -> FockRep:
    """Truncated bosonic modes with ladder amplitudes sqrt(m); the
    commutator defect is confined to the top-occupation states."""
    if n < 1 or cutoff < 1:
        raise ValidationError("need at least one mode and cutoff >= 1")
    if (cutoff + 1) ** n > 4096:
        raise ValidationError(
            f"Fock dimension {(cutoff + 1)**n} exceeds the 4096 cap"
        )
    single = np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1).astype(complex)
    eye = np.eye(cutoff + 1)
    ops = []
    for k in range(n):
        factors = [eye] * k + [single] + [eye] * (n - k - 1)
        a = la.kron_all(factors)
        a.setflags(write=False)
        ops.append(a)
    return FockRep(statistics="bose", modes=n, cutoff=cutoff, ops=tuple(ops))


def top_occupation_weight(rep: FockRep, rho) -> float:
    """Probability mass on states with any mode at the cutoff occupation."""
    rho = la.as_square(rho)
    base = rep.cutoff + 1
    diag = np.real(np.diag(rho))
    weight = 0.0
    for idx in range(rep.dim):
        digits = []
        x = idx
        for _ in range(rep.modes):
            digits.append(x % base)
            x //= base
        if max(digits) == rep.cutoff:
            weight += diag[idx]
    return float(weight)


def additive_observable(rep: FockRep, b) -> np.ndarray:
    """Second quantization of a Hermitian one-particle observable:
    b_hat = sum_kl B_kl a*_k a_l."""
    b = la.as_square(b)
    if b.shape[0] != rep.modes:
        raise ValidationError("one-particle observable must match the mode count")
    if not la.is_hermitian(b, 1e-10):
        raise ValidationError("one-particle observable must be Hermitian")
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for k in range(rep.modes):
        adk = la.dag(rep.ops[k])
        for l in range(rep.modes):
            if b[k, l] != 0:
                out += b[k, l] * adk @ rep.ops[l]
    return out


def symbol_of(rep: FockRep, rho, tol: float = la.DEFAULT_TOL) -> Symbol:
    """Symbol Q_ij = tr(rho a*_j a_i) of a many-body density matrix.

    The index order matches the correlation-matrix convention
    D_ij = omega(v_j* v_i), which makes the duality
    tr(Q B) = tr(rho b_hat) exact.  The trace of Q is the mean particle
    number, not 1.
    """
    rho = la.check_density(rho, tol)
    if rho.shape[0] != rep.dim:
        raise ValidationError("state dimension does not match the Fock space")
    n = rep.modes
    q = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            q[i, j] = np.trace(rho @ la.dag(rep.ops[j]) @ rep.ops[i])
    q = (q + la.dag(q)) / 2
    return Symbol(q, statistics=rep.statistics, tol=max(tol, 1e-8))


def quasifree_lindblad_model(rep: FockRep, model: QuasiFreeModel) -> LindbladModel:
    """Full many-body Lindblad generator of a quasi-free model.

    H = sum_k eps_k a*_k a_k; the decay and production double sums are
    reproduced exactly by jump operators built from the Hermitian square
    roots of gamma and kappa (which tolerate rank deficiency):
    L_r = sum_k (sqrt(gamma))_kr a_k and L'_r = sum_k (sqrt(kappa))_kr a*_k.
    """
    if model.modes != rep.modes:
        raise ValidationError("quasi-free model and Fock representation disagree")
    if model.statistics != rep.statistics:
        raise ValidationError("statistics of model and representation disagree")
    h = additive_observable(rep, np.diag(model.eps).astype(complex))
    jumps = []
    sq_gamma = la.sqrtm_psd(model.gamma)
    sq_kappa = la.sqrtm_psd(model.kappa)
    for r in range(rep.modes):
        l_decay = sum(sq_gamma[k, r] * rep.ops[k] for k in range(rep.modes))
        l_prod = sum(sq_kappa[k, r] * la.dag(rep.ops[k]) for k in range(rep.modes))
        if la.max_abs(l_decay) > 0:
            jumps.append(l_decay)
        if la.max_abs(l_prod) > 0:
            jumps.append(l_prod)
    return LindbladModel(hamiltonian=h, jumps=tuple(jumps))


def quasifree_dissipator_direct(rep: FockRep, model: QuasiFreeModel, rho) -> np.ndarray:
    """The decay/production double sum evaluated literally,
    1/2 sum_kl { gamma_kl ([a_k, rho a*_l] + [a_k rho, a*_l])
               + kappa_kl ([a*_k, rho a_l] + [a*_k rho, a_l]) };
    used to cross-check the factorized jump operators."""
    rho = la.as_square(rho)
    out = np.zeros_like(rho)
    for k in range(rep.modes):
        ak = rep.ops[k]
        akd = la.dag(ak)
        for l in range(rep.modes):
            al = rep.ops[l]
            ald = la.dag(al)
            g = model.gamma[k, l]
            if g != 0:
                ra = rho @ ald
                ar = ak @ rho
                out += 0.5 * g * ((ak @ ra - ra @ ak) + (ar @ ald - ald @ ar))
            kp = model.kappa[k, l]
            if kp != 0:
                ra = rho @ al
                ar = akd @ rho
                out += 0.5 * kp * ((akd @ ra - ra @ akd) + (ar @ al - al @ ar))
    return out
