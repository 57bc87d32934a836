"""Reduced evolution laws and the generic embed-evolve-pullback dynamics.

Five closed equations are implemented:

* Lindblad:    dD/dt = -i[H, D] + 1/2 sum_a ([L_a, D L_a*] + [L_a D, L_a*]),
* Pauli:       dp_j/dt = sum_k (a_jk p_k - a_kj p_j),
* quasi-free:  dQ/dt = -i[h, Q] - 1/2 {(gamma^T +- kappa), Q} + kappa
  (upper sign fermions; for real rate matrices this is the familiar
  plain-gamma form, the transpose keeps complex Hermitian rates consistent
  with the symbol convention Q_ij = omega(a*_j a_i)),
* Hartree:     dD/dt = -i[h1 + h_eff(D), D],  h_eff(D) = tr_2((1 (x) D) h2),
  the state-dependent mean field (the bare partial trace would make the
  flow linear),
* Lie-algebraic: d/dt D_nm = sum_kl a(mn;kl) D_lk, with the coefficient
  tensor a(mn;kl) obtained by expanding the Heisenberg derivative of basis
  products X_m X_n through the structure constants.

Integration is a classic fixed-step 4th-order Runge-Kutta: deterministic,
global error O(dt^4).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .embeddings import Symbol
from .errors import (
    ClosureError,
    ConsistencyError,
    DivergenceError,
    ValidationError,
)
from .partitions import CorrelationMatrix


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian H = H* and jump operators L_a of a Markovian generator."""

    hamiltonian: np.ndarray
    jumps: tuple = ()

    def __post_init__(self):
        h = la.as_square(self.hamiltonian)
        if not la.is_hermitian(h, 1e-10):
            raise ValidationError("Hamiltonian must be Hermitian")
        jumps = tuple(la.as_square(l) for l in self.jumps)
        if any(l.shape != h.shape for l in jumps):
            raise ValidationError("jump operators must match the Hamiltonian dimension")
        h.setflags(write=False)
        for l in jumps:
            l.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class QuasiFreeModel:
    """Single-mode energies eps_k, decay matrix gamma >= 0 and production
    matrix kappa >= 0 of a quasi-free Markovian generator."""

    eps: np.ndarray
    gamma: np.ndarray
    kappa: np.ndarray
    statistics: str

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        gamma = la.as_square(self.gamma)
        kappa = la.as_square(self.kappa)
        n = len(eps)
        if gamma.shape[0] != n or kappa.shape[0] != n:
            raise ValidationError("rate matrices must match the number of modes")
        if self.statistics not in ("fermi", "bose"):
            raise ValidationError(f"unknown statistics {self.statistics!r}")
        if not la.is_psd(gamma, 1e-10):
            raise ValidationError("decay matrix gamma must be PSD")
        if not la.is_psd(kappa, 1e-10):
            raise ValidationError("production matrix kappa must be PSD")
        if self.statistics == "bose":
            w = np.linalg.eigvalsh(gamma - kappa)
            if w[0] <= 0:
                warnings.warn(
                    "gamma - kappa is not positive definite: the bosonic flow "
                    "has no stationary symbol",
                    stacklevel=2,
                )
        for m in (eps, gamma, kappa):
            m.setflags(write=False)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "kappa", kappa)

    @property
    def modes(self) -> int:
        return len(self.eps)


@dataclass(frozen=True)
class PauliModel:
    """Nonnegative transition rates a_jk (j <- k per unit time), zero diagonal."""

    rates: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ValidationError("rates must form a square matrix")
        if np.any(r < 0):
            raise ValidationError("transition rates must be nonnegative")
        if np.any(np.diag(r) != 0):
            raise ValidationError("rate matrix must have zero diagonal")
        r.setflags(write=False)
        object.__setattr__(self, "rates", r)

    @property
    def levels(self) -> int:
        return self.rates.shape[0]


class LieAlgebraModel:
    """Hermitian basis X_m closing under commutation, with H and the
    self-adjoint jump operators given by real coefficients in that basis.

    Structure constants c_mnk with [X_m, X_n] = sum_k c_mnk X_k are computed
    at construction and the closure is verified; operators outside the span
    raise :class:`ClosureError`.
    """

    def __init__(self, basis, h_coeffs, l_coeffs=()):
        basis = tuple(la.as_square(x) for x in basis)
        if not basis:
            raise ValidationError("empty Lie-algebra basis")
        dim = basis[0].shape[0]
        for i, x in enumerate(basis):
            if x.shape[0] != dim:
                raise ValidationError("basis elements must share one dimension")
            if not la.is_hermitian(x, 1e-10):
                raise ValidationError(f"basis element {i} is not Hermitian")
        nb = len(basis)
        h_coeffs = np.asarray(h_coeffs, dtype=float)
        l_coeffs = np.asarray(l_coeffs, dtype=float).reshape(-1, nb) if len(l_coeffs) else np.zeros((0, nb))
        if h_coeffs.shape != (nb,):
            raise ValidationError("need one real H coefficient per basis element")

        # structure constants by least squares in the vectorized operator space
        bmat = np.stack([x.ravel() for x in basis]).T  # (dim^2, nb)
        c = np.zeros((nb, nb, nb), dtype=complex)
        for m in range(nb):
            for n in range(m + 1, nb):
                comm = (basis[m] @ basis[n] - basis[n] @ basis[m]).ravel()
                sol, *_ = np.linalg.lstsq(bmat, comm, rcond=None)
                resid = la.max_abs(bmat @ sol - comm)
                if resid > 1e-10 * max(1.0, la.max_abs(comm)):
                    raise ClosureError(
                        f"[X_{m}, X_{n}] lies outside the basis span "
                        f"(residual {resid:.3e})"
                    )
                c[m, n] = sol
                c[n, m] = -sol
        self.basis = basis
        self.structure = c
        self.h_coeffs = h_coeffs
        self.l_coeffs = l_coeffs
        for arr in (self.structure, self.h_coeffs, self.l_coeffs):
            arr.setflags(write=False)

    @classmethod
    def from_operators(cls, basis, hamiltonian, jumps=()):
        """Build a model from explicit H and L_a, projecting onto the basis.

        Raises :class:`ClosureError` if an operator is outside the span and
        :class:`ValidationError` for non-self-adjoint jumps (the closed
        correlation flow is derived for L_a = L_a* only).
        """
        basis = tuple(la.as_square(x) for x in basis)
        bmat = np.stack([x.ravel() for x in basis]).T

        def expand(op, what):
            op = la.as_square(op)
            sol, *_ = np.linalg.lstsq(bmat, op.ravel(), rcond=None)
            if la.max_abs(bmat @ sol - op.ravel()) > 1e-10 * max(1.0, la.max_abs(op)):
                raise ClosureError(f"{what} lies outside the Lie-algebra span")
            if la.max_abs(sol.imag) > 1e-10 * max(1.0, la.max_abs(sol)):
                raise ValidationError(f"{what} must be self-adjoint (real coefficients)")
            return sol.real

        h = expand(hamiltonian, "H")
        ls = [expand(l, f"jump {i}") for i, l in enumerate(jumps)]
        return cls(basis, h, np.array(ls) if ls else ())

    @property
    def size(self) -> int:
        return len(self.basis)

    def hamiltonian(self) -> np.ndarray:
        return sum(c * x for c, x in zip(self.h_coeffs, self.basis))

    def jumps(self) -> list:
        return [sum(c * x for c, x in zip(row, self.basis)) for row in self.l_coeffs]


def lindblad_rhs(model: LindbladModel, rho) -> np.ndarray:
    """-i[H, rho] + 1/2 sum_a ([L_a, rho L_a*] + [L_a rho, L_a*])."""
    rho = la.as_square(rho)
    if rho.shape[0] != model.dim:
        raise ValidationError("state dimension does not match the model")
    h = model.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for l in model.jumps:
        ld = la.dag(l)
        rl = rho @ ld
        lr = l @ rho
        out += 0.5 * ((l @ rl - rl @ l) + (lr @ ld - ld @ lr))
    return out


def heisenberg_rhs(model: LindbladModel, x) -> np.ndarray:
    """Adjoint generator: i[H, X] + 1/2 sum_a (L_a* [X, L_a] + [L_a*, X] L_a)."""
    x = la.as_square(x)
    h = model.hamiltonian
    out = 1j * (h @ x - x @ h)
    for l in model.jumps:
        ld = la.dag(l)
        out += 0.5 * (ld @ (x @ l - l @ x) + (ld @ x - x @ ld) @ l)
    return out


def integrate(rhs, state, t: float, dt: float):
    """Classic fixed-step RK4 for matrix- or vector-valued autonomous flows.

    The final partial step covers any remainder of t that is not an integer
    multiple of dt.  Raises :class:`DivergenceError` if the state leaves the
    finite range.
    """
    if dt <= 0:
        raise ValidationError("dt must be positive")
    if t < 0:
        raise ValidationError("t must be nonnegative")
    y = np.asarray(state, dtype=complex) if not np.isscalar(state) else state
    steps = int(np.floor(t / dt + 1e-12))
    remainder = t - steps * dt
    elapsed = 0.0

    def rk4_step(y, h):
        k1 = rhs(y)
        k2 = rhs(y + (h / 2) * k1)
        k3 = rhs(y + (h / 2) * k2)
        k4 = rhs(y + h * k3)
        return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    def finite(y):
        return bool(np.all(np.isfinite(np.real(y))) and np.all(np.isfinite(np.imag(y))))

    for _ in range(steps):
        y = rk4_step(y, dt)
        elapsed += dt
        if not finite(y):
            raise DivergenceError(f"integration diverged at t = {elapsed:.6g}", t=elapsed)
    if remainder > 1e-12 * max(1.0, t):
        y = rk4_step(y, remainder)
        if not finite(y):
            raise DivergenceError(f"integration diverged at t = {t:.6g}", t=t)
    return y


def pauli_rhs(model: PauliModel, p) -> np.ndarray:
    """(dp/dt)_j = sum_k (a_jk p_k - a_kj p_j); components sum to zero."""
    p = np.asarray(p, dtype=float)
    if p.shape != (model.levels,):
        raise ValidationError("probability vector does not match the model")
    if np.any(p < -1e-9):
        raise ValidationError(f"negative probability {p.min():.3e}")
    a = model.rates
    return a @ p - a.sum(axis=0) * p


def one_particle_rhs(model: QuasiFreeModel, q) -> np.ndarray:
    """Closed flow of the symbol: -i[h, Q] - 1/2 {(gamma^T +- kappa), Q} + kappa
    with the upper sign for fermions."""
    qm = q.matrix if isinstance(q, Symbol) else la.as_square(q)
    if isinstance(q, Symbol) and q.statistics != model.statistics:
        raise ValidationError("symbol statistics do not match the model")
    if qm.shape[0] != model.modes:
        raise ValidationError("symbol dimension does not match the model")
    h = np.diag(model.eps).astype(complex)
    sign = 1.0 if model.statistics == "fermi" else -1.0
    g = model.gamma.T + sign * model.kappa
    return -1j * (h @ qm - qm @ h) - 0.5 * (g @ qm + qm @ g) + model.kappa


def evolve_symbol(model: QuasiFreeModel, sym: Symbol, t: float, dt: float) -> Symbol:
    """Integrate the one-particle flow and revalidate the symbol invariants."""
    if sym.statistics != model.statistics:
        raise ValidationError("symbol statistics do not match the model")
    qt = integrate(lambda q: one_particle_rhs(model, q), sym.matrix, t, dt)
    qt = (qt + la.dag(qt)) / 2
    return Symbol(qt, statistics=sym.statistics, tol=1e-8)


def lie_coefficients(model: LieAlgebraModel, verify_tol: float = 1e-9) -> np.ndarray:
    """Coefficient tensor a(mn;kl) of the product flow
    d/dt (X_m X_n) = sum_kl a(mn;kl) X_k X_l.

    The Heisenberg derivative
      i X_m [H, X_n] + i [X_m, H] X_n
      - 1/2 sum_a ([L,[L,X_m]] X_n + X_m [L,[L,X_n]] + 2 [L,X_m][L,X_n])
    is expanded through the structure constants; products X_k X_l are kept
    as formal basis elements.  The tensor is verified at the matrix level
    against the explicit bracket expression for every basis product.
    """
    nb = model.size
    c = model.structure
    # [H, X_m] = sum_k hc[m, k] X_k
    hc = np.einsum("p,pmk->mk", model.h_coeffs, c)
    a = np.zeros((nb, nb, nb, nb), dtype=complex)
    eye = np.eye(nb)
    # i X_m [H, X_n] -> k = m;  i [X_m, H] X_n = -i [H, X_m] X_n -> l = n
    a += 1j * np.einsum("km,nl->mnkl", eye, hc)
    a += -1j * np.einsum("mk,ln->mnkl", hc, eye)
    for row in model.l_coeffs:
        k_mat = np.einsum("p,pmk->mk", row, c)  # [L, X_m] = sum_k K[m,k] X_k
        k2 = k_mat @ k_mat
        a += -0.5 * np.einsum("mk,ln->mnkl", k2, eye)
        a += -0.5 * np.einsum("km,nl->mnkl", eye, k2)
        a += -np.einsum("mk,nl->mnkl", k_mat, k_mat)

    # construction-time verification at the matrix level
    x = model.basis
    h = model.hamiltonian()
    ls = model.jumps()

    def bracket(op1, op2):
        return op1 @ op2 - op2 @ op1

    worst = 0.0
    for m in range(nb):
        for n in range(nb):
            lhs = 1j * x[m] @ bracket(h, x[n]) + 1j * bracket(x[m], h) @ x[n]
            for l in ls:
                lhs += -0.5 * (
                    bracket(l, bracket(l, x[m])) @ x[n]
                    + x[m] @ bracket(l, bracket(l, x[n]))
                    + 2 * bracket(l, x[m]) @ bracket(l, x[n])
                )
            rhs = sum(
                a[m, n, k, l] * (x[k] @ x[l]) for k in range(nb) for l in range(nb)
            )
            worst = max(worst, la.max_abs(lhs - rhs))
    if worst > verify_tol:
        raise ValidationError(
            f"coefficient tensor fails the matrix-level verification ({worst:.3e})"
        )
    return a


def lie_corr_rhs(a: np.ndarray, d) -> np.ndarray:
    """Correlation flow dD_nm/dt = sum_kl a(mn;kl) D_lk."""
    dm = d.matrix if isinstance(d, CorrelationMatrix) else la.as_square(d)
    nb = a.shape[0]
    if a.shape != (nb, nb, nb, nb) or dm.shape != (nb, nb):
        raise ValidationError("coefficient tensor and correlation matrix disagree")
    return np.einsum("mnkl,lk->nm", a, dm)


def hartree_rhs(h1, h2, d) -> np.ndarray:
    """Mean-field flow dD/dt = -i[h1 + h_eff(D), D] with
    h_eff(D) = tr_2((1 (x) D) h2); isospectral by the commutator form."""
    h1 = la.as_square(h1)
    h2 = la.as_square(h2)
    dm = d.matrix if isinstance(d, CorrelationMatrix) else la.as_square(d)
    n = h1.shape[0]
    if dm.shape[0] != n:
        raise ValidationError("state and one-particle Hamiltonian disagree")
    if h2.shape[0] != n * n:
        raise ValidationError("two-particle interaction must live on the doubled space")
    if not la.is_hermitian(h1, 1e-10) or not la.is_hermitian(h2, 1e-10):
        raise ValidationError("interactions must be Hermitian")
    swap = h2.reshape(n, n, n, n).transpose(1, 0, 3, 2).reshape(n * n, n * n)
    if la.max_abs(swap - h2) > 1e-10 * max(1.0, la.max_abs(h2)):
        raise ValidationError("two-particle interaction must be exchange symmetric")
    h_eff = np.einsum("acbd,dc->ab", h2.reshape(n, n, n, n), dm)
    h_tot = h1 + h_eff
    return -1j * (h_tot @ dm - dm @ h_tot)


def heisenberg_map(model: LindbladModel, t: float, dt: float) -> np.ndarray:
    """Superoperator matrix of the Heisenberg map Lambda_t on row-major
    vectorized observables; unital and completely positive."""
    n = model.dim
    s = np.empty((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            xt = integrate(lambda x: heisenberg_rhs(model, x), e, t, dt)
            s[:, i * n + j] = xt.ravel()
    return s


def apply_superop(s: np.ndarray, x) -> np.ndarray:
    """Apply a row-major vectorized superoperator to a matrix."""
    x = la.as_square(x)
    n = x.shape[0]
    if s.shape != (n * n, n * n):
        raise ValidationError("superoperator and matrix dimensions disagree")
    return (s @ x.ravel()).reshape(n, n)


def reduced_dynamics(
    reduction,
    embed,
    model: LindbladModel,
    d0,
    t: float,
    dt: float,
    tol: float = 1e-8,
) -> CorrelationMatrix:
    """Embed-evolve-pullback: D(t) = Phi*(evolved Psi(D(0))).

    ``reduction`` is anything with the ``pullback`` surface (a
    :class:`Partition` or :class:`MeanFieldReduction`); ``embed`` maps the
    initial correlation matrix to a global density.  The consistency
    requirement Phi* o Psi = id is verified on D(0) before evolving.
    """
    d0m = d0.matrix if isinstance(d0, CorrelationMatrix) else la.as_square(d0)
    rho0 = embed(d0m)
    back = reduction.pullback(rho0, tol=tol).matrix
    if la.max_abs(back - d0m) > tol * max(1.0, la.max_abs(d0m)):
        raise ConsistencyError(
            f"embedding is not a right inverse of the pull-back on D(0) "
            f"(deviation {la.max_abs(back - d0m):.3e})"
        )
    rho_t = integrate(lambda r: lindblad_rhs(model, r), rho0, t, dt)
    rho_t = (rho_t + la.dag(rho_t)) / 2
    return reduction.pullback(rho_t, tol=tol)
