"""Per-step observables, trace accumulation, and the convergence harness."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import models, timestep
from .models import ModelSpec
from .spectral import Grid2D
from .timestep import CorrectionRecord, SchemeConfig, StepInfo, StepState


@dataclass
class TraceRow:
    """One diagnostics record; ``None`` marks a column unused at that step."""

    n: int
    t: float
    e_orig: float
    e_mod: float
    mass: float
    lam: float | None
    xi: float | None
    e1: float | None
    e2: float | None
    ratio: float
    w: float
    lin_iters: int | None
    clamped: bool


def mass(grid: Grid2D, phi: np.ndarray) -> float:
    """m = integral of phi over the domain."""
    return grid.integral(phi)


def roughness(grid: Grid2D, phi: np.ndarray) -> float:
    """Centered L2 norm scaled by |Omega|^{-1/2}; 0 for constants."""
    dev = phi - grid.mean(phi)
    return grid.norm(dev) / np.sqrt(grid.area)


def observe(state: StepState, model: ModelSpec, grid: Grid2D, tau: float,
            rec: CorrectionRecord | None = None,
            info: StepInfo | None = None) -> TraceRow:
    """Assemble one trace row from the state's cached energy pieces.

    e_mod reuses the cached 1/2(L phi,phi) and ||q||^2; e_orig swaps the
    stored q for the exact quadratization of the current phi (the two
    coincide whenever q = Q(phi)).
    """
    qq = models.quadratize(model, grid, state.phi)
    qq2 = grid.inner(qq, qq)
    const = model.nonlinear_scale * model.offset_density * grid.area
    e_mod = state.lin_energy + model.qweight * state.q_norm2 + const
    e_orig = state.lin_energy + model.qweight * qq2 + const
    if state.q_norm2 == 0.0:
        ratio = 1.0 if qq2 == 0.0 else float("inf")
    else:
        ratio = qq2 / state.q_norm2
    rec = rec or CorrectionRecord()
    return TraceRow(
        n=state.n, t=state.n * tau, e_orig=e_orig, e_mod=e_mod,
        mass=mass(grid, state.phi),
        lam=rec.lam, xi=rec.xi, e1=rec.e1, e2=rec.e2,
        ratio=ratio, w=roughness(grid, state.phi),
        lin_iters=None if info is None else info.lin_iters,
        clamped=rec.clamped,
    )


def run_trace(model: ModelSpec, grid: Grid2D, cfg: SchemeConfig,
              phi0: np.ndarray, trace_every: int = 1, snapshot_every: int = 0,
              on_snapshot=None) -> tuple[StepState, list[TraceRow]]:
    """March to t_final collecting rows every ``trace_every`` steps.

    The initial state and the final step are always recorded (when tracing
    is enabled); ``trace_every=0`` disables row collection entirely.
    """
    state = timestep.init_state(model, grid, phi0)
    n_steps = cfg.n_steps()
    rows: list[TraceRow] = []
    if trace_every:
        rows.append(observe(state, model, grid, cfg.tau))
    if snapshot_every and on_snapshot is not None:
        on_snapshot(state.n, state.phi)
    for k in range(1, n_steps + 1):
        rec, info = timestep.advance(state, model, grid, cfg)
        if trace_every and (k % trace_every == 0 or k == n_steps):
            rows.append(observe(state, model, grid, cfg.tau, rec, info))
        if snapshot_every and on_snapshot is not None and k % snapshot_every == 0:
            on_snapshot(state.n, state.phi)
    return state, rows


@dataclass
class ConvergenceRow:
    tau: float
    err_phi: float
    err_q: float
    rate_phi: float | None
    rate_q: float | None


def converge(model: ModelSpec, grid: Grid2D, cfg: SchemeConfig,
             phi0: np.ndarray, tau_list, ref_tau: float,
             workers: int = 1) -> list[ConvergenceRow]:
    """Temporal self-convergence against a fine reference trajectory.

    The reference is the energy-optimized Crank-Nicolson run at ``ref_tau``
    (the protocol used for every error study here); errors are discrete L2
    norms of phi and q at t_final, rates are log ratios between consecutive
    step sizes.
    """
    taus = sorted(float(t) for t in tau_list)[::-1]
    if ref_tau > min(taus) / 2.0:
        raise ValueError(
            f"reference tau {ref_tau} too coarse for tau_min {min(taus)}")

    def final_state(tau_stepper):
        tau, stepper, correction = tau_stepper
        c = replace(cfg, tau=tau, stepper=stepper, correction=correction)
        return timestep.run_steps(model, grid, c, phi0=phi0)

    cases = [(ref_tau, "cn", "eop")] + [(t, cfg.stepper, cfg.correction)
                                        for t in taus]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            states = list(ex.map(final_state, cases))
    else:
        states = [final_state(c) for c in cases]

    ref = states[0]
    rows: list[ConvergenceRow] = []
    for tau, st in zip(taus, states[1:]):
        rows.append(ConvergenceRow(
            tau=tau,
            err_phi=grid.norm(st.phi - ref.phi),
            err_q=grid.norm(st.q - ref.q),
            rate_phi=None, rate_q=None,
        ))
    for prev, cur in zip(rows, rows[1:]):
        scale = np.log(prev.tau / cur.tau)
        if prev.err_phi > 0 and cur.err_phi > 0:
            cur.rate_phi = float(np.log(prev.err_phi / cur.err_phi) / scale)
        if prev.err_q > 0 and cur.err_q > 0:
            cur.rate_q = float(np.log(prev.err_q / cur.err_q) / scale)
    return rows
