"""Batch front door: model validation and demos reproducing the worked
examples, with machine-first JSON reports.

Exit codes: 0 success, 1 usage error, 2 validation / malformed input,
3 solver non-convergence or divergence.  Identical configuration and seed
produce byte-identical reports.  The environment variable ``GENSUB_TOL``
overrides the default tolerance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import (
    dynamics,
    embeddings,
    entanglement,
    fock,
    jsonio,
    linalg as la,
    partitions,
    spin,
)
from .errors import ConvergenceError, DivergenceError, ValidationError

COMMANDS = (
    "spin-demo",
    "spin1-demo",
    "infspin-maxent",
    "quasifree",
    "pauli",
    "meanfield",
    "lie-demo",
    "two-boson",
    "temporal",
    "validate",
)


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    dt: float = 1e-3
    t_final: float = 1.0
    seed: int = 0
    tol: float = 1e-8
    modes: int = 2
    det_sweep: int = 0
    csv: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.t_final < 0:
            raise ValidationError("t must be nonnegative")


def default_tol() -> float:
    return float(os.environ.get("GENSUB_TOL", "1e-8"))


def _rng(config: RunConfig) -> np.random.Generator:
    return np.random.default_rng(config.seed)


def _random_density(rng, n: int) -> np.ndarray:
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def _emit(config: RunConfig, report: dict) -> None:
    text = jsonio.dump_json(report)
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(config: RunConfig, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(f"{x:.12g}" for x in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_spin_demo(config: RunConfig) -> dict:
    """Spin-1/2 ball geometry: diagonal 1/3, |alpha| <= 1/3, extreme spectra."""
    rng = _rng(config)
    n_samples = 2000
    max_diag_dev = 0.0
    max_alpha = 0.0
    for _ in range(n_samples):
        x = rng.normal(size=3)
        x *= rng.uniform() ** (1 / 3) / np.linalg.norm(x)
        d = spin.spin_half_pullback(x).matrix
        max_diag_dev = max(max_diag_dev, la.max_abs(np.diag(d) - 1 / 3))
        max_alpha = max(max_alpha, float(np.linalg.norm(spin.bloch_alpha(d))))
    extreme = spin.spin_half_pullback([0.0, 0.0, 1.0])
    spectrum = np.linalg.eigvalsh(extreme.matrix)
    return {
        "samples": n_samples,
        "max_diagonal_deviation": max_diag_dev,
        "max_alpha_norm": max_alpha,
        "extreme_spectrum": [float(s) for s in np.sort(spectrum)[::-1]],
        "pass": bool(
            max_diag_dev <= 1e-12
            and max_alpha <= 1 / 3 + 1e-12
            and la.max_abs(np.sort(spectrum)[::-1] - np.array([2 / 3, 1 / 3, 0.0])) <= 1e-10
        ),
    }


def run_spin1_demo(config: RunConfig) -> dict:
    """Spin-1 cone: pullbacks satisfy D <= 1/2; tilde map reaches pure states."""
    rng = _rng(config)
    part = spin.spin_partition(1)
    n_samples = 2000
    min_gap = np.inf
    for _ in range(n_samples):
        rho = _random_density(rng, 3)
        d = part.pullback(rho).matrix
        gap = np.linalg.eigvalsh(np.eye(3) / 2 - d)[0]
        min_gap = min(min_gap, float(gap))
    # the top-weight state pulls back to an extreme point, tilde is pure
    top = np.zeros((3, 3), dtype=complex)
    top[0, 0] = 1.0
    d_top = part.pullback(top).matrix
    tilde = spin.spin_one_tilde(d_top)
    tilde_spec = np.linalg.eigvalsh(tilde)
    return {
        "samples": n_samples,
        "min_half_gap_eigenvalue": min_gap,
        "tilde_spectrum_of_top_state": [float(x) for x in tilde_spec],
        "pass": bool(min_gap >= -1e-12 and abs(tilde_spec[-1] - 1.0) <= 1e-10),
    }


def run_infspin_maxent(config: RunConfig) -> dict:
    """Solve the sphere moment problem for an input or random interior target."""
    if config.input:
        target = jsonio.matrix_from_json(jsonio.load_json(config.input))
    else:
        rng = _rng(config)
        evals = rng.uniform(0.08, 1.0, size=3)
        evals /= evals.sum()
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        target = q @ np.diag(evals) @ q.T
    grid = spin.sphere_quadrature(64, 64)
    result = spin.maxent_sphere(target, grid, tol=config.tol)
    return {
        "Delta": jsonio.matrix_to_json(result.delta),
        "residual": result.residual,
        "iterations": result.iterations,
        "pass": bool(result.residual <= config.tol),
    }


def run_quasifree(config: RunConfig) -> dict:
    """Closed one-particle flow against the full Fock-space oracle."""
    rng = _rng(config)
    n = config.modes
    if n > 6:
        raise ValidationError("quasifree demo caps at 6 modes")
    eps = rng.normal(size=n)

    def rand_psd():
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        p = m @ m.conj().T
        return p / max(1.0, np.linalg.norm(p, 2))

    model = dynamics.QuasiFreeModel(
        eps=eps, gamma=rand_psd(), kappa=rand_psd(), statistics="fermi"
    )
    rep = fock.fermion_ops(n)
    lind = fock.quasifree_lindblad_model(rep, model)
    rho0 = _random_density(rng, rep.dim)
    q0 = fock.symbol_of(rep, rho0)
    rho_t = dynamics.integrate(
        lambda r: dynamics.lindblad_rhs(lind, r), rho0, config.t_final, config.dt
    )
    rho_t = (rho_t + rho_t.conj().T) / 2
    q_oracle = fock.symbol_of(rep, rho_t)
    q_closed = dynamics.evolve_symbol(model, q0, config.t_final, config.dt)
    deviation = la.max_abs(q_oracle.matrix - q_closed.matrix)

    # single-mode stationary occupation kappa / (gamma + kappa)
    g1, k1 = 0.8, 0.3
    single = dynamics.QuasiFreeModel(
        eps=[0.0], gamma=[[g1]], kappa=[[k1]], statistics="fermi"
    )
    q_inf = dynamics.integrate(
        lambda q: dynamics.one_particle_rhs(single, q),
        np.array([[0.9 + 0j]]),
        60.0,
        1e-2,
    )
    stationary_dev = abs(q_inf[0, 0].real - k1 / (g1 + k1))
    return {
        "modes": n,
        "t": config.t_final,
        "dt": config.dt,
        "max_deviation_closed_vs_oracle": float(deviation),
        "single_mode_stationary_deviation": float(stationary_dev),
        "pass": bool(deviation <= 1e-6 and stationary_dev <= 1e-8),
    }


def run_pauli(config: RunConfig) -> dict:
    """Rate-equation trajectory with simplex checks and the 2-level stationary law."""
    if config.input:
        model = jsonio.pauli_model_from_json(jsonio.load_json(config.input))
        rng = _rng(config)
        p = rng.uniform(size=model.levels)
        p /= p.sum()
    else:
        a, b = 0.7, 0.2
        model = dynamics.PauliModel(rates=np.array([[0.0, a], [b, 0.0]]))
        p = np.array([0.1, 0.9])
    traj_sum_dev = 0.0
    min_entry = np.inf
    dt, t = config.dt, max(config.t_final, 50.0)
    steps = int(round(t / dt))
    for _ in range(steps):
        k1 = dynamics.pauli_rhs(model, p)
        k2 = dynamics.pauli_rhs(model, p + dt / 2 * k1)
        k3 = dynamics.pauli_rhs(model, p + dt / 2 * k2)
        k4 = dynamics.pauli_rhs(model, p + dt * k3)
        p = p + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        traj_sum_dev = max(traj_sum_dev, abs(float(p.sum()) - 1.0))
        min_entry = min(min_entry, float(p.min()))
    report = {
        "levels": model.levels,
        "max_sum_deviation": traj_sum_dev,
        "min_entry": min_entry,
        "final": [float(x) for x in p],
    }
    if model.levels == 2 and not config.input:
        a, b = model.rates[0, 1], model.rates[1, 0]
        target = np.array([a / (a + b), b / (a + b)])
        report["stationary_deviation"] = float(la.max_abs(p - target))
        report["pass"] = bool(
            traj_sum_dev <= 1e-12
            and min_entry >= -1e-12
            and report["stationary_deviation"] <= 1e-8
        )
    else:
        report["pass"] = bool(traj_sum_dev <= 1e-12 and min_entry >= -1e-12)
    return report


def run_meanfield(config: RunConfig) -> dict:
    """Finite-N embed-evolve-pullback against the Hartree flow."""
    h1 = np.array([[0.4, 0.25], [0.25, -0.4]], dtype=complex)
    a = np.array([[0.3, 0.1], [0.1, -0.3]], dtype=complex)
    h2 = np.kron(a, a)
    d0 = np.array([[0.72, 0.16 - 0.1j], [0.16 + 0.1j, 0.28]], dtype=complex)
    t, dt = min(config.t_final, 0.5), config.dt
    d_hartree = dynamics.integrate(
        lambda d: dynamics.hartree_rhs(h1, h2, d), d0, t, dt
    )
    errors = {}
    for n_copies in (2, 3, 4):
        red = partitions.MeanFieldReduction(2, n_copies)
        ham = np.zeros((2**n_copies,) * 2, dtype=complex)
        for s in range(n_copies):
            ops = [np.eye(2, dtype=complex)] * n_copies
            ops[s] = h1
            ham += la.kron_all(ops)
        for s1 in range(n_copies):
            for s2 in range(n_copies):
                if s1 == s2:
                    continue
                ops = [np.eye(2, dtype=complex)] * n_copies
                ops[s1] = a
                ops[s2] = a
                ham += la.kron_all(ops) / (2 * n_copies)
        model = dynamics.LindbladModel(hamiltonian=ham)
        d_n = dynamics.reduced_dynamics(
            red,
            lambda d, n=n_copies: embeddings.meanfield_embedding(d, n),
            model,
            d0,
            t,
            dt,
        )
        errors[str(n_copies)] = float(la.max_abs(d_n.matrix - d_hartree))
    monotone = errors["2"] > errors["3"] > errors["4"]
    return {
        "t": t,
        "hartree_deviation_by_N": errors,
        "monotone_approach": bool(monotone),
        "pass": bool(monotone),
    }


def run_lie_demo(config: RunConfig) -> dict:
    """Spin-1 Lie-algebraic correlation flow against the full Lindblad pullback."""
    omega, gamma = 1.3, 0.4
    rep = spin.spin_generators(1)
    part = spin.spin_partition(1)
    h = omega * rep.J[2]
    l_op = np.sqrt(gamma) * rep.J[2]
    model = dynamics.LieAlgebraModel.from_operators(part.elements, h, [l_op])
    a = dynamics.lie_coefficients(model)
    # verification residual, recomputed for the report
    rng = _rng(config)
    rho0 = _random_density(rng, 3)
    d0 = part.pullback(rho0)
    t, dt = config.t_final, config.dt
    d_t = dynamics.integrate(lambda d: dynamics.lie_corr_rhs(a, d), d0.matrix, t, dt)
    lind = dynamics.LindbladModel(hamiltonian=h, jumps=(l_op,))
    rho_t = dynamics.integrate(lambda r: dynamics.lindblad_rhs(lind, r), rho0, t, dt)
    rho_t = (rho_t + rho_t.conj().T) / 2
    d_oracle = part.pullback(rho_t, tol=1e-8)
    deviation = la.max_abs(d_t - d_oracle.matrix)
    return {
        "t": t,
        "dt": dt,
        "max_deviation_flow_vs_full": float(deviation),
        "pass": bool(deviation <= 1e-6),
    }


def run_two_boson(config: RunConfig) -> dict | None:
    """Witness sweep and closed-form spectrum checks for two-boson states."""
    if config.det_sweep:
        rows = []
        for i in range(config.det_sweep):
            theta = (np.pi / 4) * i / max(1, config.det_sweep - 1)
            g = entanglement.GMatrix(np.diag([np.cos(theta), np.sin(theta)]))
            res = entanglement.ppt_test(entanglement.two_boson_correlation(g))
            det = abs(np.linalg.det(g.matrix))
            rows.append((det, res.min_eig))
        if config.csv:
            _emit_csv(config, ("det_G", "min_eig"), rows)
            return None
        return {
            "sweep": [{"det_G": float(d), "min_eig": float(m)} for d, m in rows],
            "pass": bool(all(abs(m + d) <= 1e-10 for d, m in rows)),
        }
    rng = _rng(config)
    worst = 0.0
    witness_consistent = True
    for _ in range(200):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        g = entanglement.GMatrix(g / np.sqrt((np.abs(g) ** 2).sum()))
        closed = entanglement.two_boson_pt_spectrum(g)
        res = entanglement.ppt_test(entanglement.two_boson_correlation(g))
        worst = max(worst, la.max_abs(np.sort(res.spectrum) - closed))
        det = abs(np.linalg.det(g.matrix))
        witness_consistent &= res.entangled == (det > 1e-12)
    return {
        "samples": 200,
        "max_spectrum_deviation": float(worst),
        "witness_iff_det_nonzero": bool(witness_consistent),
        "pass": bool(worst <= 1e-10 and witness_consistent),
    }


def run_temporal(config: RunConfig) -> dict:
    """Two-time correlation matrix of a dephasing qubit over a time grid."""
    proj0 = np.diag([1.0, 0.0]).astype(complex)
    proj1 = np.diag([0.0, 1.0]).astype(complex)
    part = partitions.coarse_grain_partition([proj0, proj1])
    ham = np.array([[0.0, 0.7], [0.7, 0.0]], dtype=complex)
    jump = np.sqrt(0.3) * np.diag([1.0, -1.0]).astype(complex)
    model = dynamics.LindbladModel(hamiltonian=ham, jumps=(jump,))
    omega = np.array([[0.8, 0.2], [0.2, 0.2]], dtype=complex)
    times = [0.0, 0.25 * config.t_final, 0.5 * config.t_final, config.t_final]
    records = []
    for t in times:
        lam = dynamics.heisenberg_map(model, t, config.dt)
        d = entanglement.temporal_correlation(part, omega, lam)
        res = entanglement.ppt_test(d)
        records.append(
            {
                "t": float(t),
                "trace": float(np.trace(d.matrix).real),
                "min_eig_partial_transpose": res.min_eig,
                "witnessed": bool(res.entangled),
            }
        )
    trace_ok = all(abs(r["trace"] - 1.0) <= 1e-8 for r in records)
    return {"trajectory": records, "unit_trace_preserved": bool(trace_ok), "pass": bool(trace_ok)}


def run_validate(config: RunConfig) -> dict:
    """Schema plus invariant check of a model file; never mutates the input."""
    if not config.input:
        raise ValidationError("validate requires --input")
    obj = jsonio.load_json(config.input)
    kind, parsed = jsonio.detect_and_parse(obj)
    report = {"kind": kind, "status": "ok"}
    if kind == "Matrix":
        m = parsed
        report["hermitian"] = bool(la.is_hermitian(m)) if m.shape[0] == m.shape[1] else False
        if report["hermitian"]:
            w = np.linalg.eigvalsh(m)
            report["min_eigenvalue"] = float(w[0])
            report["psd"] = bool(w[0] >= -config.tol)
    return report


_RUNNERS = {
    "spin-demo": run_spin_demo,
    "spin1-demo": run_spin1_demo,
    "infspin-maxent": run_infspin_maxent,
    "quasifree": run_quasifree,
    "pauli": run_pauli,
    "meanfield": run_meanfield,
    "lie-demo": run_lie_demo,
    "two-boson": run_two_boson,
    "temporal": run_temporal,
    "validate": run_validate,
}


def dispatch(config: RunConfig) -> int:
    """Run one command; returns the process exit code."""
    try:
        report = _RUNNERS[config.command](config)
    except KeyError:
        sys.stderr.write(f"unknown command: {config.command}\n")
        return 1
    except json.JSONDecodeError as exc:
        sys.stderr.write(
            f"malformed JSON in {config.input}: line {exc.lineno} column {exc.colno}\n"
        )
        return 2
    except OSError as exc:
        sys.stderr.write(f"i/o failure: {exc}\n")
        return 2
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return 2
    except (ConvergenceError, DivergenceError) as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return 3
    if report is not None:
        _emit(config, report)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gensub", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", help="input model file (JSON)")
    parser.add_argument("--output", help="report destination (default stdout)")
    parser.add_argument("--dt", type=float, default=1e-3, help="integration step")
    parser.add_argument("--t", type=float, default=1.0, dest="t_final", help="final time")
    parser.add_argument("--seed", type=int, default=0, help="PRNG seed (64-bit)")
    parser.add_argument("--tol", type=float, default=None, help="tolerance override")
    parser.add_argument("--modes", type=int, default=2, help="number of modes")
    parser.add_argument("--det-sweep", type=int, default=0, help="two-boson sweep size")
    parser.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    try:
        config = RunConfig(
            command=args.command,
            input=args.input,
            output=args.output,
            dt=args.dt,
            t_final=args.t_final,
            seed=args.seed,
            tol=args.tol if args.tol is not None else default_tol(),
            modes=args.modes,
            det_sweep=args.det_sweep,
            csv=args.csv,
        )
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return 2
    return dispatch(config)


if __name__ == "__main__":
    sys.exit(main())
