"""Self-check suites behind `cmvwalk verify`.

Every check compares a production code path against an independent route
(dense brute force, a closed form, or an exact identity) and reports the
measured discrepancy next to its tolerance.  Randomized inputs all derive
from one seeded generator so a report is reproducible from its seed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import bruteforce
from ._accel import BACKEND
from .cmv import (
    StateVector,
    VerblunskySequence,
    apply,
    apply_adjoint,
    build_cmv,
    operator_difference_apply,
    theta_block,
    truncate,
)
from .cmv import DiskCoefficient
from .dynamics import abel_t_max, evolve, return_amplitudes
from .qwalk import build_walk, coins_to_cmv, gauge_transform, walk_moment_direct
from .resolvent import (
    CircleGrid,
    autocorrelation_integral,
    caratheodory,
    caratheodory_mean,
    parseval_check,
    return_integral,
    solve_resolvent,
    solve_resolvent_windowed,
)
from .sparse import SparseSpec, coin_sequence, so2_coin, verblunsky
from .transfer import gz_cocycle
from .qwalk import walk_exponents

__all__ = ["CheckResult", "run_suite", "SUITES"]

SUITES = ("identities", "tails", "walk", "all")


@dataclass
class CheckResult:
    name: str
    tolerance: float
    measured: float
    passed: bool

    def as_json(self) -> dict:
        return {
            "name": self.name,
            "tolerance": float(self.tolerance),
            "measured": float(self.measured),
            "passed": bool(self.passed),
        }


def _random_alphas(rng, n, rmax=0.9):
    radii = rmax * np.sqrt(rng.uniform(0.0, 1.0, n))
    return radii * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n))


def _haar_coin(rng):
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _battery(rng, extra=None):
    models = {
        "free": VerblunskySequence.zero(),
        "random16": VerblunskySequence.from_alphas(_random_alphas(rng, 16)),
        "sparse3": truncate(verblunsky(SparseSpec.default(count=4)), 3),
        "walk3": coins_to_cmv(coin_sequence(SparseSpec(0.5, (2, 4, 16))).coin_map()),
    }
    if extra is not None:
        models["user"] = extra
    return models


def _outside_points(rng, count):
    eps = rng.uniform(0.02, 0.5, count)
    th = rng.uniform(0.0, 2.0 * np.pi, count)
    return np.exp(eps + 1j * th)


def _random_state(rng, size, frontier):
    amp = np.zeros(size, dtype=np.complex128)
    amp[: frontier + 1] = rng.normal(size=frontier + 1) + 1j * rng.normal(
        size=frontier + 1
    )
    amp /= np.linalg.norm(amp)
    return StateVector(amp, frontier)


def _identities(rng, battery, threads=1):
    checks = []

    worst = 0.0
    for a in _random_alphas(rng, 50, rmax=0.98):
        th = theta_block(DiskCoefficient.from_alpha(a))
        worst = max(worst, float(np.max(np.abs(th @ th.conj().T - np.eye(2)))))
    checks.append(CheckResult("theta_block_unitarity", 1e-14, worst, worst <= 1e-14))

    worst = 0.0
    structural = 0.0
    for seq in battery.values():
        dense = build_cmv(seq, 24).dense()
        ref = bruteforce.dense_window(seq, 24)
        worst = max(worst, float(np.max(np.abs(dense - ref))))
        for i in range(24):
            for j in range(24):
                if abs(i - j) > 2:
                    structural = max(structural, abs(dense[i, j]))
    checks.append(
        CheckResult("factored_matches_entrywise_form", 1e-14, worst, worst <= 1e-14)
    )
    checks.append(
        CheckResult("pentadiagonal_zero_pattern", 0.0, structural, structural == 0.0)
    )

    worst_apply = 0.0
    worst_adj = 0.0
    worst_norm = 0.0
    for seq in battery.values():
        op = build_cmv(seq, 48)
        C = bruteforce.dense_window(seq, 48)
        for _ in range(20):
            state = _random_state(rng, 48, 40)
            out = apply(op, state)
            worst_apply = max(
                worst_apply,
                float(np.max(np.abs(out.amplitudes[:44] - (C @ state.amplitudes)[:44]))),
            )
            worst_norm = max(worst_norm, abs(out.norm() - 1.0))
            other = _random_state(rng, 48, 40)
            lhs = np.vdot(other.amplitudes, C @ state.amplitudes)
            rhs = np.vdot(apply_adjoint(op, other).amplitudes, state.amplitudes)
            worst_adj = max(worst_adj, abs(lhs - rhs))
    checks.append(
        CheckResult("apply_vs_dense_oracle", 1e-13, worst_apply, worst_apply <= 1e-13)
    )
    checks.append(
        CheckResult("adjoint_pairing", 1e-13, worst_adj, worst_adj <= 1e-13)
    )
    checks.append(
        CheckResult("apply_norm_preservation", 1e-12, worst_norm, worst_norm <= 1e-12)
    )

    for eps in (0.1, 0.02):
        worst = 0.0
        for seq in battery.values():
            mean = caratheodory_mean(seq, CircleGrid(eps), refine=False, threads=threads)
            worst = max(worst, abs(mean + 1.0))
        checks.append(
            CheckResult(
                f"caratheodory_mean_eps_{eps}", 1e-8, worst, worst <= 1e-8
            )
        )

    worst_res = 0.0
    worst_norm_id = 0.0
    worst_rec = 0.0
    for seq in battery.values():
        for z in _outside_points(rng, 10):
            z = complex(z)
            sol = solve_resolvent(seq, z, n_out=24)
            scale = math.sqrt(sol.norm_sq())
            worst_res = max(worst_res, sol.error_bound / scale)
            F = caratheodory(sol)
            lhs = sol.norm_sq()
            rhs = F.real / (1.0 - abs(z) ** 2)
            worst_norm_id = max(worst_norm_id, abs(lhs - rhs) / abs(lhs))
            seed = np.array([F + 1.0, F - 1.0]) / (2.0 * z)
            for n in (1, 3, 8, 17):
                got = gz_cocycle(seq, n, 0, z).matrix() @ seed
                worst_rec = max(
                    worst_rec,
                    abs(got[0] - sol.u[n]) / scale,
                    abs(got[1] - sol.v[n]) / scale,
                )
    checks.append(
        CheckResult("resolvent_residual", 1e-12, worst_res, worst_res <= 1e-12)
    )
    checks.append(
        CheckResult(
            "resolvent_norm_identity", 1e-9, worst_norm_id, worst_norm_id <= 1e-9
        )
    )
    checks.append(
        CheckResult(
            "cocycle_resolvent_reconstruction", 1e-9, worst_rec, worst_rec <= 1e-9
        )
    )

    worst_chain = 0.0
    worst_order = -1.0
    for eps in (0.2, 0.05):
        for seq in battery.values():
            amps = return_amplitudes(seq, abel_t_max(1.0 / eps))
            J = return_integral(amps, eps)
            I = autocorrelation_integral(
                seq, eps, CircleGrid(eps), refine=False, threads=threads
            )
            worst_chain = max(
                worst_chain, abs(J - 0.5 * (-math.expm1(-2 * eps)) - 0.5 * I)
            )
            worst_order = max(worst_order, J - I)
    checks.append(
        CheckResult(
            "return_autocorrelation_chain", 1e-9, worst_chain, worst_chain <= 1e-9
        )
    )
    checks.append(
        CheckResult(
            "return_below_autocorrelation", 1e-10, worst_order, worst_order <= 1e-10
        )
    )

    seq = VerblunskySequence.from_alphas(_random_alphas(rng, 16))
    _, _, gap = parseval_check(seq, 3, 10.0, threads=threads)
    checks.append(CheckResult("parseval_spot_check", 1e-8, gap, gap <= 1e-8))
    return checks


def _tails(rng, battery):
    checks = []
    parity = 0.0
    ratio = 0.0
    closure = 0.0
    vs_dense = 0.0
    for lengths, N in (((2, 4), 2), ((3, 9), 2)):
        seq = truncate(verblunsky(SparseSpec(0.5, lengths)), N)
        m = lengths[N - 1]
        z = cmath.exp(0.9j + 0.04)
        sol = solve_resolvent(seq, z, n_out=m + 9)
        scale = math.sqrt(sol.norm_sq())
        for k in range(m + 1, m + 9):
            if k % 2 == 0:
                parity = max(parity, abs(sol.u[k]))
        odd0 = m + 1 if (m + 1) % 2 else m + 2
        for k in range(odd0, m + 7, 2):
            ratio = max(ratio, abs(sol.u[k + 2] / sol.u[k] - 1.0 / z))
        component = sol.v[m + 1] if m % 2 == 0 else sol.u[m + 1]
        closure = max(closure, abs(component) / scale)
        ref = bruteforce.dense_resolvent_window(seq, z, 1200)
        vs_dense = max(vs_dense, float(np.max(np.abs(sol.u - ref[: m + 10]))))
    checks.append(CheckResult("tail_even_sites_vanish", 0.0, parity, parity == 0.0))
    checks.append(CheckResult("tail_two_step_ratio", 1e-12, ratio, ratio <= 1e-12))
    checks.append(
        CheckResult("tail_closure_component", 1e-12, closure, closure <= 1e-12)
    )
    checks.append(
        CheckResult("exact_tail_vs_dense_window", 1e-10, vs_dense, vs_dense <= 1e-10)
    )

    worst = 0.0
    seq = verblunsky(SparseSpec(0.37, (3, 10, 40, 200)))
    for N in (1, 2):
        C = bruteforce.dense_window(seq, 256)
        C_N = bruteforce.dense_window(truncate(seq, N), 256)
        for _ in range(10):
            phi = rng.normal(size=256) + 1j * rng.normal(size=256)
            got = operator_difference_apply(seq, N, StateVector(phi.copy(), 255))
            want = (C - C_N) @ phi
            worst = max(worst, float(np.max(np.abs(got.amplitudes[:256] - want))))
    checks.append(
        CheckResult("truncation_difference_closed_form", 1e-13, worst, worst <= 1e-13)
    )

    # pulling the truncation horizon outward must improve the resolvent
    spec = SparseSpec(0.5, (2, 4, 16, 64))
    seq_full = verblunsky(spec)
    z = cmath.exp(0.4j + 0.03)
    ref = solve_resolvent(truncate(seq_full, 4), z, n_out=200).u
    gaps = []
    for N in (1, 2, 3):
        uN = solve_resolvent(truncate(seq_full, N), z, n_out=200).u
        gaps.append(float(np.linalg.norm(uN - ref)))
    drift = max(b - a for a, b in zip(gaps, gaps[1:]))
    checks.append(
        CheckResult(
            "resolvent_truncation_improves", 1e-12, drift, drift <= 1e-12
        )
    )
    return checks


def _walk(rng, battery):
    checks = []
    coins = coin_sequence(SparseSpec(0.5, (2, 4, 16))).coin_map()
    U = build_walk(coins).dense(64)
    C = build_cmv(coins_to_cmv(coins), 64).dense()
    exact = float(np.max(np.abs(U - C)))
    checks.append(
        CheckResult("rotation_coin_correspondence", 0.0, exact, exact == 0.0)
    )

    G = U.conj().T @ U
    unit = float(np.max(np.abs(G[:60, :60] - np.eye(60))))
    checks.append(CheckResult("walk_window_unitarity", 1e-12, unit, unit <= 1e-12))

    worst = 0.0
    for _ in range(10):
        random_coins = {m: _haar_coin(rng) for m in range(1, 16)}
        seq, lam = gauge_transform(random_coins)
        size = 30
        Uw = build_walk(random_coins).dense(size)
        Lam = np.diag(lam[:size])
        Cw = build_cmv(seq, size).dense()
        worst = max(
            worst, float(np.max(np.abs(Lam.conj().T @ Uw @ Lam - Cw)))
        )
    checks.append(CheckResult("gauge_conjugation", 1e-12, worst, worst <= 1e-12))

    spec = SparseSpec(0.5, (2, 3))
    direct = walk_moment_direct(coin_sequence(spec).coin_map(), 1.0, 6.0)
    curve = walk_exponents(spec, 1.0, [6.0, 9.0])
    gap = abs(direct - curve.moments[0])
    checks.append(CheckResult("walk_moment_two_routes", 1e-10, gap, gap <= 1e-10))
    return checks


def run_suite(
    suite: str, seed: int = 42, extra_model=None, threads: int = 1
) -> tuple[list[CheckResult], dict]:
    """Run one suite (or all); returns the checks and a JSON-ready report.

    ``threads`` parallelizes circle-quadrature nodes; reductions stay in
    index order, so reports are bitwise independent of it.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; one of {SUITES}")
    rng = np.random.default_rng(seed)
    battery = _battery(rng, extra_model)
    checks: list[CheckResult] = []
    if suite in ("identities", "all"):
        checks.extend(_identities(rng, battery, threads))
    if suite in ("tails", "all"):
        checks.extend(_tails(rng, battery))
    if suite in ("walk", "all"):
        checks.extend(_walk(rng, battery))
    report = {
        "suite": suite,
        "seed": seed,
        "backend": BACKEND,
        "threads": threads,
        "checks": [c.as_json() for c in checks],
        "passed": all(c.passed for c in checks),
    }
    return checks, report
