"""Energy-stable time stepping for the quadratized gradient-flow system.

Every scheme is "Step 1 + Step 2".  Step 1 is a baseline semi-implicit
solve with the coupling coefficient frozen at an extrapolated state
``B(phi^n)``: the auxiliary variable is eliminated analytically, one
linear system in phi^{n+1} is solved (matrix-free, Fourier-diagonal
preconditioner), and the provisional q_hat^{n+1} is reconstructed.  Step 2
optionally replaces q_hat by a corrected q^{n+1}:

* ``baseline`` keeps q_hat (the plain quadratization scheme);
* ``relax`` blends q_hat with Q(phi^{n+1}) through the smallest admissible
  mixing weight xi that keeps the discrete energy inequality, with slack
  parameter eta in [0, 1];
* ``eop`` rescales Q(phi^{n+1}) by lambda = min(1, sqrt(E2/E1)), the
  choice that brings the quadratic Lyapunov functional as close to the
  original energy as the dissipation budget allows.

Three time discretizations are provided: backward Euler (``bdf1``), the
two-step backward differentiation formula (``bdf2``), and Crank-Nicolson
(``cn``).  All are unconditionally energy stable for every model here,
with the Lyapunov functional returned by :func:`lyapunov`.

Quadratic-form weighting: the discrete energy identities hold with the
q-norms weighted by the model's s_N*c_q (see ``models``); E1/E2 and the
relaxation constraint are evaluated in that weighted form, which reduces
to the textbook formulas when s_N*c_q = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import models
from .linsolve import LinearProblem, solve
from .models import GradientCoupling, ModelSpec
from .spectral import Grid2D

_BDF_ALPHA = {"bdf1": 1.0, "bdf2": 1.5}
STEPPERS = ("bdf1", "bdf2", "cn")
CORRECTIONS = ("baseline", "relax", "eop")


@dataclass
class SchemeConfig:
    """Time-discretization choices for one run."""

    stepper: str = "cn"
    correction: str = "eop"
    eta: float = 0.5            # relaxation slack, used by correction='relax'
    tau: float = 1e-3
    t_final: float = 0.1
    lin_tol: float = 1e-12
    lin_maxit: int = 500
    dealias: bool = False

    def __post_init__(self):
        if self.stepper not in STEPPERS:
            raise ValueError(f"unknown stepper {self.stepper!r}")
        if self.correction not in CORRECTIONS:
            raise ValueError(f"unknown correction {self.correction!r}")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError(f"eta={self.eta} outside [0, 1]")
        if self.tau <= 0.0:
            raise ValueError(f"tau={self.tau} must be positive")

    def n_steps(self) -> int:
        n = round(self.t_final / self.tau)
        if n < 1 or abs(n * self.tau - self.t_final) > 1e-8 * self.t_final:
            raise ValueError(
                f"t_final={self.t_final} is not an integer multiple of tau={self.tau}"
            )
        return n


def validate_scheme(cfg: SchemeConfig, model: ModelSpec) -> None:
    """Reject stepper/correction combinations without a dissipation proof."""
    if cfg.correction == "relax":
        if cfg.stepper == "bdf2":
            raise ValueError("the relaxation correction is not offered with bdf2")
        if model.qweight <= 0:
            raise ValueError(
                "the relaxation correction requires a positive-definite "
                f"q-energy (model {model.kind!r} has a negative one)"
            )


@dataclass
class StepState:
    """Complete time-marching state: current/previous fields plus the
    cached quadratic-energy pieces of step n."""

    n: int
    phi: np.ndarray
    phi_prev: np.ndarray
    q: np.ndarray
    q_prev: np.ndarray
    lin_energy: float   # 1/2 (L phi^n, phi^n)
    q_norm2: float      # ||q^n||^2


@dataclass
class CorrectionRecord:
    """Per-step Step-2 bookkeeping for diagnostics."""

    lam: float | None = None
    xi: float | None = None
    e1: float | None = None
    e2: float | None = None
    a: float | None = None
    b: float | None = None
    c: float | None = None
    clamped: bool = False


class StepResult(NamedTuple):
    phi_new: np.ndarray
    q_hat: np.ndarray
    mu_work: float      # tau * (G mu, mu), the step's dissipation quadrature
    lin_iters: int
    residual: float


class StepInfo(NamedTuple):
    lin_iters: int
    mu_work: float
    residual: float


def init_state(model: ModelSpec, grid: Grid2D, phi0: np.ndarray) -> StepState:
    """q^0 = Q(phi^0); history bootstrapped with phi^-1 := phi^0."""
    q0 = models.quadratize(model, grid, phi0)
    return StepState(
        n=0,
        phi=phi0.copy(), phi_prev=phi0.copy(),
        q=q0, q_prev=q0.copy(),
        lin_energy=models.lin_energy(model, grid, phi0),
        q_norm2=grid.inner(q0, q0),
    )


def _effective_stepper(state: StepState, cfg: SchemeConfig) -> str:
    """bdf2's first step is a full-size bdf1 step.

    Degenerating the history instead (phi^-1 := phi^0 in the bdf2 formula)
    would take a backward-Euler step of effective size 2*tau/3, shifting
    the whole trajectory by O(tau) and capping the observable order at one.
    """
    if cfg.stepper == "bdf2" and state.n == 0:
        return "bdf1"
    return cfg.stepper


def _scheme_pieces(state: StepState, cfg: SchemeConfig):
    """alpha, theta, history combinations A(.) and extrapolation B(phi^n)."""
    stepper = _effective_stepper(state, cfg)
    if stepper == "cn":
        b_phi = 1.5 * state.phi - 0.5 * state.phi_prev
        return 1.0, 0.5, state.phi, state.q, b_phi
    alpha = _BDF_ALPHA[stepper]
    if stepper == "bdf1":
        return alpha, 1.0, state.phi, state.q, state.phi
    a_phi = 2.0 * state.phi - 0.5 * state.phi_prev
    a_q = 2.0 * state.q - 0.5 * state.q_prev
    b_phi = 2.0 * state.phi - state.phi_prev
    return alpha, 1.0, a_phi, a_q, b_phi


def step_baseline(state: StepState, model: ModelSpec, grid: Grid2D,
                  cfg: SchemeConfig) -> StepResult:
    """Step 1: advance phi and reconstruct the provisional q_hat.

    The coupling field is evaluated at the extrapolation B(phi^n)
    (bdf1: phi^n, bdf2: 2phi^n - phi^{n-1}, cn: 3/2 phi^n - 1/2 phi^{n-1});
    q_hat is eliminated through the discrete chain rule, leaving one linear
    system in phi^{n+1} preconditioned by alpha/tau + theta*G*L.
    """
    if model.coupling_rank == "gradient":
        return _step_gradient(state, model, grid, cfg)
    return _step_scalar(state, model, grid, cfg)


def _step_scalar(state, model, grid, cfg):
    alpha, theta, a_phi, a_q, b_phi = _scheme_pieces(state, cfg)
    tau = cfg.tau
    L = model.l_symbol(grid)
    G = model.g_symbol(grid)
    s = model.nonlinear_scale

    cp = models.coupling(model, grid, b_phi)
    g_bar, dq_bar = cp.g, cp.dq
    if cfg.dealias:
        g_bar = grid.lowpass(g_bar)
        dq_bar = grid.lowpass(dq_bar)
    cc = theta * s * g_bar * dq_bar   # pointwise coefficient of phi^{n+1}

    def apply_g(w):
        return np.fft.ifft2(G * np.fft.fft2(w)).real

    def apply(v):
        vh = np.fft.fft2(v)
        return (alpha / tau) * v + np.fft.ifft2(
            G * (theta * L * vh + np.fft.fft2(cc * v))).real

    if cfg.stepper == "cn":
        w_r = 0.5 * grid.apply_symbol(state.phi, L) + s * g_bar * state.q - cc * state.phi
        rhs = state.phi / tau - apply_g(w_r)
    else:
        w_r = (s / alpha) * g_bar * (a_q - dq_bar * a_phi)
        rhs = a_phi / tau - apply_g(w_r)

    precond = alpha / tau + theta * G * L
    # Real-space diagonal of the operator, the solver's stagnation fallback
    # for states where the pointwise coupling dwarfs the constant part.
    diag = alpha / tau + theta * float((G * L).mean()) + theta * float(G.mean()) * cc
    phi_new, iters, residual = solve(LinearProblem(
        grid=grid, apply=apply, precond_symbol=precond, rhs=rhs,
        tol=cfg.lin_tol, maxit=cfg.lin_maxit, precond_diag=diag))

    if model.conserves_mass:
        # The k=0 mode is exact for the scheme; pin it so the Krylov
        # tolerance cannot leak into the mass over long runs.
        phi_new += grid.mean(a_phi) / alpha - grid.mean(phi_new)

    if cfg.stepper == "cn":
        q_hat = state.q + dq_bar * (phi_new - state.phi)
        mu = (0.5 * grid.apply_symbol(phi_new + state.phi, L)
              + s * g_bar * (0.5 * (q_hat + state.q)))
    else:
        q_hat = (a_q + dq_bar * (alpha * phi_new - a_phi)) / alpha
        mu = grid.apply_symbol(phi_new, L) + s * g_bar * q_hat
    mu_work = tau * grid.inner(apply_g(mu), mu)
    return StepResult(phi_new, q_hat, mu_work, iters, residual)


def _step_gradient(state, model, grid, cfg):
    alpha, theta, a_phi, a_q, b_phi = _scheme_pieces(state, cfg)
    tau = cfg.tau
    L = model.l_symbol(grid)
    mob = model.mobility

    cp: GradientCoupling = models.coupling(model, grid, b_phi)
    hx, hy = cp.hx, cp.hy
    if cfg.dealias:
        hx = grid.lowpass(hx)
        hy = grid.lowpass(hy)

    def h_dot_grad(v):
        vx, vy = grid.gradient(v)
        return hx * vx + hy * vy

    def div_h(w):
        return grid.divergence(w * hx, w * hy)

    def apply(v):
        return (alpha / tau) * v + mob * theta * (
            grid.apply_symbol(v, L) + div_h(h_dot_grad(v)))

    if cfg.stepper == "cn":
        rhs = state.phi / tau - mob * (
            0.5 * grid.apply_symbol(state.phi, L)
            + div_h(state.q)
            - 0.5 * div_h(h_dot_grad(state.phi)))
    else:
        rhs = a_phi / tau - (mob / alpha) * div_h(a_q - h_dot_grad(a_phi))

    precond = alpha / tau + theta * mob * L
    phi_new, iters, residual = solve(LinearProblem(
        grid=grid, apply=apply, precond_symbol=precond, rhs=rhs,
        tol=cfg.lin_tol, maxit=cfg.lin_maxit))

    if cfg.stepper == "cn":
        q_hat = state.q + h_dot_grad(phi_new - state.phi)
        mu = (0.5 * grid.apply_symbol(phi_new + state.phi, L)
              + div_h(0.5 * (q_hat + state.q)))
    else:
        q_hat = (a_q + h_dot_grad(alpha * phi_new - a_phi)) / alpha
        mu = grid.apply_symbol(phi_new, L) + div_h(q_hat)
    mu_work = tau * mob * grid.inner(mu, mu)
    return StepResult(phi_new, q_hat, mu_work, iters, residual)


# -- Step 2 corrections -------------------------------------------------------


def correct_eop(state: StepState, model: ModelSpec, grid: Grid2D,
                cfg: SchemeConfig, phi_new: np.ndarray,
                lin_new: float | None = None):
    """Energy-optimized update q^{n+1} = lambda * Q(phi^{n+1}) (+ history
    blend for bdf2).

    E1 is the weighted norm of the update direction, E2 the dissipation
    budget left by Step 1; lambda = min(1, sqrt(E2/E1)) for models with a
    positive q-energy.  For the sign-flipped epitaxy energy the constraint
    is a lower bound instead: lambda = 1 when E2 >= 0, else sqrt(-E2/E1)
    (the equality choice, which pins the Lyapunov functional when the
    budget is exhausted).  Guard branches set ``clamped``.
    """
    w = model.qweight
    q_new_dir = models.quadratize(model, grid, phi_new)
    if lin_new is None:
        lin_new = models.lin_energy(model, grid, phi_new)

    bdf2 = _effective_stepper(state, cfg) == "bdf2"
    if bdf2:
        base = q_new_dir - 0.4 * state.q
        d = grid.inner(base, base)
        L = model.l_symbol(grid)

        def lpair(v):
            return grid.inner(grid.apply_symbol(v, L), v)

        e2 = 0.1 * (2.0 * state.lin_energy
                    + lpair(2.0 * state.phi - state.phi_prev)
                    - 2.0 * lin_new
                    - lpair(2.0 * phi_new - state.phi)) \
            + w * (0.16 * state.q_norm2
                   + 0.2 * grid.inner(2.0 * state.q - state.q_prev,
                                      2.0 * state.q - state.q_prev))
        tail = 0.4 * state.q
    else:
        base = q_new_dir
        d = grid.inner(base, base)
        e2 = state.lin_energy + w * state.q_norm2 - lin_new
        tail = 0.0

    e1 = abs(w) * d
    clamped = False
    if w > 0:
        budget = e2
        if budget < 0.0:
            budget = 0.0
            clamped = True
        lam = 1.0 if (e1 == 0.0 or budget >= e1) else float(np.sqrt(budget / e1))
    else:
        if e2 >= 0.0 or e1 == 0.0:
            lam = 1.0
        else:
            # The sign-flipped energy needs ||q||^2-type mass >= -e2; take
            # the equality choice.  When that puts lambda above 1 (the
            # exact-q energy rose across the step) dissipation still holds
            # with equality; flag the excursion.
            lam = float(np.sqrt(-e2 / e1))
            clamped = lam > 1.0

    q_new = lam * base + tail if bdf2 else lam * base
    rec = CorrectionRecord(lam=lam, e1=e1, e2=e2, clamped=clamped)
    return q_new, rec


def correct_relax(state: StepState, model: ModelSpec, grid: Grid2D,
                  cfg: SchemeConfig, phi_new: np.ndarray, q_hat: np.ndarray,
                  mu_work: float):
    """Relaxation update q^{n+1} = xi*q_hat + (1-xi)*Q(phi^{n+1}).

    xi is the smallest value in [0,1] satisfying a*xi^2 + b*xi + c <= 0,
    where c carries the eta-fraction of the step's dissipation budget in
    the weighted quadratic form.  xi = 1 always satisfies the constraint
    (a+b+c = -eta*mu_work/weight <= 0), so a negative discriminant can only
    be floating-point noise and falls back to xi = 1 with ``clamped`` set.
    """
    w = model.qweight
    q_target = models.quadratize(model, grid, phi_new)
    diff = q_hat - q_target
    a = grid.inner(diff, diff)
    b = 2.0 * grid.inner(diff, q_target)
    c = (-cfg.eta * mu_work / w
         + grid.inner(q_target, q_target) - grid.inner(q_hat, q_hat))

    clamped = False
    if a == 0.0:
        xi = 0.0
    else:
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            xi = 1.0
            clamped = True
        else:
            xi = max(0.0, (-b - float(np.sqrt(disc))) / (2.0 * a))
    q_new = xi * q_hat + (1.0 - xi) * q_target
    rec = CorrectionRecord(xi=xi, a=a, b=b, c=c, clamped=clamped)
    return q_new, rec


def advance(state: StepState, model: ModelSpec, grid: Grid2D,
            cfg: SchemeConfig) -> tuple[CorrectionRecord, StepInfo]:
    """One full step: Step 1, Step 2, history rotation.  Mutates ``state``."""
    validate_scheme(cfg, model)
    res = step_baseline(state, model, grid, cfg)
    lin_new = models.lin_energy(model, grid, res.phi_new)

    if cfg.correction == "eop":
        q_new, rec = correct_eop(state, model, grid, cfg, res.phi_new, lin_new)
    elif cfg.correction == "relax":
        q_new, rec = correct_relax(state, model, grid, cfg, res.phi_new,
                                   res.q_hat, res.mu_work)
    else:
        q_new, rec = res.q_hat, CorrectionRecord()

    state.phi_prev = state.phi
    state.phi = res.phi_new
    state.q_prev = state.q
    state.q = q_new
    state.n += 1
    state.lin_energy = lin_new
    state.q_norm2 = grid.inner(q_new, q_new)
    return rec, StepInfo(res.lin_iters, res.mu_work, res.residual)


def run_steps(model: ModelSpec, grid: Grid2D, cfg: SchemeConfig,
              phi0: np.ndarray | None = None, state: StepState | None = None,
              n_steps: int | None = None, on_step=None) -> StepState:
    """March ``n_steps`` (default: t_final/tau) from phi0 or a given state."""
    if state is None:
        if phi0 is None:
            raise ValueError("need phi0 or an existing state")
        state = init_state(model, grid, phi0)
    if n_steps is None:
        n_steps = cfg.n_steps()
    for _ in range(n_steps):
        rec, info = advance(state, model, grid, cfg)
        if on_step is not None:
            on_step(state, rec, info)
    return state


def lyapunov(state: StepState, model: ModelSpec, grid: Grid2D,
             stepper: str) -> float:
    """The functional each scheme provably dissipates (no constant offset).

    cn/bdf1: 1/2(L phi,phi) + w||q||^2; bdf2 adds the shifted-history
    quarter forms, with w = s_N*c_q in both.
    """
    w = model.qweight
    if stepper != "bdf2":
        return state.lin_energy + w * state.q_norm2
    L = model.l_symbol(grid)

    def lpair(v):
        return grid.inner(grid.apply_symbol(v, L), v)

    shift_phi = 2.0 * state.phi - state.phi_prev
    shift_q = 2.0 * state.q - state.q_prev
    return (0.25 * (2.0 * state.lin_energy + lpair(shift_phi))
            + 0.5 * w * (state.q_norm2 + grid.inner(shift_q, shift_q)))
