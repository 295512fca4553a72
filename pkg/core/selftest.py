# core/selftest.py
"""Fast property suite behind the `selftest` subcommand."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Callable, List, Tuple

import numpy as np
import pandas as pd

from core.circuits import build_checkerboard, build_qcnn, forward_array, random_params
from core.gradients import batch_marginal_mse, batch_overlap_loss, grad_marginal, grad_overlap
from core.records import derive_rng
from core.sq_classes import build_class, certify_sq_dimension
from core.statevec import StateVector, basis_batch, basis_state
from core.vqe import build_vqe_target, ground_state, target_energy, vqe_energy_and_grad
from core.whrf import density_mass

logger = logging.getLogger(__name__)

PLANTED_LOSS_TOL = 1e-9
PLANTED_GRAD_TOL = 1e-7
DENSITY_MASS_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def central_differences(fn: Callable[[np.ndarray], float], params: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(params)
    for i in range(params.size):
        e = np.zeros_like(params)
        e[i] = h
        out[i] = (fn(params + e) - fn(params - e)) / (2.0 * h)
    return out


def relative_gap(grad: np.ndarray, fd: np.ndarray) -> float:
    return float(np.max(np.abs(grad - fd)) / max(1.0, float(np.max(np.abs(fd)))))


def _fd_check(name: str, value_and_grad, params: np.ndarray, h: float, tol: float) -> CheckResult:
    grad = value_and_grad(params).grad
    fd = central_differences(lambda p: value_and_grad(p).value, params, h)
    gap = relative_gap(grad, fd)
    return CheckResult(name, gap < tol, f"max relative gap {gap:.2e} over {params.size} parameters")


def _planted(name: str, value: float, grad: np.ndarray) -> CheckResult:
    gmax = float(np.max(np.abs(grad))) if grad.size else 0.0
    ok = value < PLANTED_LOSS_TOL and gmax < PLANTED_GRAD_TOL
    return CheckResult(name, ok, f"loss {value:.2e}, grad inf-norm {gmax:.2e}")


def run_selftest(n_qubits: int = 3, layers: int = 2, fd_step: float = 1e-5, tolerance: float = 1e-5, seed: int = 0) -> List[CheckResult]:
    n = n_qubits
    results: List[CheckResult] = []

    # gradients vs finite differences
    cb = build_checkerboard(n, layers)
    rng = derive_rng(seed, 0, "selftest")
    target = StateVector.from_array(rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n), normalize=True)
    start = basis_state(n, int(rng.integers(0, 1 << n)))
    results.append(
        _fd_check("gradient_checkerboard_overlap", lambda p: grad_overlap(cb, p, start, target), random_params(cb, rng), fd_step, tolerance)
    )
    qc = build_qcnn(n)
    results.append(_fd_check("gradient_qcnn_marginal", lambda p: grad_marginal(qc, p, start), random_params(qc, rng), fd_step, tolerance))
    vt = build_vqe_target(n, layers, rng)
    results.append(_fd_check("gradient_vqe_energy", lambda p: vqe_energy_and_grad(vt, cb, p), random_params(cb, rng), fd_step, tolerance))

    # planted solutions
    inputs = basis_batch(n, list(range(1 << n)))
    teacher = random_params(cb, rng)
    res = batch_overlap_loss(cb, teacher, inputs, forward_array(cb, teacher, inputs))
    results.append(_planted("planted_checkerboard", res.value, res.grad))
    qteacher = random_params(qc, rng)
    labels = batch_marginal_mse(qc, qteacher, inputs, np.zeros(inputs.shape[1]), with_grad=False).per_sample
    res = batch_marginal_mse(qc, qteacher, inputs, labels)
    results.append(_planted("planted_qcnn", res.value, res.grad))
    e0 = target_energy(vt, ground_state(vt))
    results.append(CheckResult("planted_vqe_ground_energy", abs(e0) < PLANTED_LOSS_TOL, f"energy at ground state {e0:.2e}"))

    # certificates at n = 2
    for name, expected in (("single-layer-global", 9), ("logdepth", 15), ("unitary-single-layer", 16)):
        cert = certify_sq_dimension(build_class(name, 2))
        results.append(
            CheckResult(f"certificate_{name}", cert.ok and cert.d == expected and cert.max_offdiag == 0.0, f"d = {cert.d}, max off-diagonal {cert.max_offdiag}")
        )

    mass = density_mass(50.0, 10)
    results.append(CheckResult("density_normalization", abs(mass - 1.0) < DENSITY_MASS_TOL, f"mass {mass:.10f}"))

    for r in results:
        logger.log(logging.INFO if r.ok else logging.WARNING, "selftest %s: %s (%s)", r.name, "ok" if r.ok else "FAILED", r.detail)
    return results


def results_frame(results: List[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in results], columns=["name", "ok", "detail"])


def summarize(results: List[CheckResult]) -> Tuple[bool, int]:
    failed = sum(1 for r in results if not r.ok)
    return failed == 0, failed
