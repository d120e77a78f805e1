"""Matrix-free preconditioned Krylov solver for the implicit step.

The implicit systems produced by the time steppers are "constant
coefficients + pointwise-bounded coupling": the constant part is diagonal
in Fourier space and is inverted exactly as a left preconditioner, and the
coupling term makes the operator mildly nonsymmetric (for the conserved
flows G circ pointwise-multiplication is not self-adjoint in L2), so the
iteration is a restarted GMRES.

Convergence is judged on the true residual ||apply(x) - rhs||, not the
preconditioned one, so the solver's post-condition matches what callers
verify.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spectral import Grid2D

RESTART = 30


class ConvergenceError(RuntimeError):
    """The Krylov iteration hit its iteration cap before converging."""

    def __init__(self, maxit: int, residual: float):
        self.maxit = maxit
        self.residual = residual
        super().__init__(
            f"no convergence after {maxit} iterations (residual {residual:.3e})"
        )


@dataclass
class LinearProblem:
    """One linear system A x = rhs with a Fourier-diagonal preconditioner.

    ``apply`` must be linear; ``precond_symbol`` is the per-mode multiplier
    of the constant-coefficient part of A and must be nonzero at every mode
    (the 1/tau mass term guarantees this for the stepper systems).

    ``precond_diag`` is an optional real-space diagonal estimate of A.  The
    iteration starts from the Fourier-diagonal preconditioner (exact for
    the constant-coefficient part) and falls back to the real diagonal when
    a restart cycle stagnates, which happens when a large pointwise
    coupling coefficient dominates the constant part.
    """

    grid: Grid2D
    apply: Callable[[np.ndarray], np.ndarray]
    precond_symbol: np.ndarray
    rhs: np.ndarray
    tol: float = 1e-12
    maxit: int = 500
    precond_diag: np.ndarray | None = None


def solve(problem: LinearProblem) -> tuple[np.ndarray, int, float]:
    """Solve the problem; returns (x, iterations, final true residual).

    Deterministic for fixed inputs.  Raises :class:`ConvergenceError` when
    ``maxit`` matrix applications are exhausted.
    """
    grid = problem.grid
    shape = grid.shape
    sym = problem.precond_symbol
    if np.abs(sym).min() == 0.0:
        raise ValueError("preconditioner symbol vanishes at some mode")

    b = problem.rhs.ravel()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(shape), 0, 0.0

    def matvec(v: np.ndarray) -> np.ndarray:
        return problem.apply(v.reshape(shape)).ravel()

    diag = None
    if problem.precond_diag is not None:
        diag = problem.precond_diag.ravel()
        if np.abs(diag).min() == 0.0:
            raise ValueError("diagonal preconditioner vanishes at some cell")
    use_diag = False

    def precond(v: np.ndarray) -> np.ndarray:
        if use_diag:
            return v / diag
        return np.fft.ifft2(np.fft.fft2(v.reshape(shape)) / sym).real.ravel()

    target = problem.tol * bnorm
    x = np.zeros_like(b)
    total = 0
    inner_rtol = problem.tol  # on the preconditioned system, tightened on retry
    prev_true = None

    while True:
        r = b - matvec(x) if total else b.copy()
        true_res = float(np.linalg.norm(r))
        if true_res <= target:
            return x.reshape(shape), total, true_res
        if total >= problem.maxit:
            raise ConvergenceError(problem.maxit, true_res)
        if (diag is not None and prev_true is not None
                and true_res > 0.05 * prev_true):
            # Slow cycle: toggle between the Fourier-diagonal preconditioner
            # (constant part exact) and the real diagonal (pointwise coupling
            # exact); a toggle that makes things worse undoes itself.
            use_diag = not use_diag
        prev_true = true_res

        z = precond(r)
        beta = float(np.linalg.norm(z))
        if beta == 0.0:
            # Preconditioned residual exactly zero but true residual above
            # target can only be floating-point noise; report what we have.
            return x.reshape(shape), total, true_res

        m = RESTART
        V = np.empty((m + 1, b.size))
        V[0] = z / beta
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        inner_target = inner_rtol * beta

        j = 0
        while j < m and total < problem.maxit:
            w = precond(matvec(V[j]))
            total += 1
            for i in range(j + 1):  # modified Gram-Schmidt
                H[i, j] = float(np.dot(w, V[i]))
                w -= H[i, j] * V[i]
            H[j + 1, j] = float(np.linalg.norm(w))

            breakdown = H[j + 1, j] <= 1e-14 * beta
            if not breakdown:
                V[j + 1] = w / H[j + 1, j]

            for i in range(j):  # apply stored rotations to the new column
                hi = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = hi
            denom = float(np.hypot(H[j, j], H[j + 1, j]))
            cs[j] = H[j, j] / denom if denom else 1.0
            sn[j] = H[j + 1, j] / denom if denom else 0.0
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]

            j += 1
            if breakdown or abs(g[j]) <= inner_target:
                break

        # Back-substitute the (j x j) triangular least-squares system.
        y = np.zeros(j)
        for i in range(j - 1, -1, -1):
            y[i] = (g[i] - H[i, i + 1:j] @ y[i + 1:j]) / H[i, i]
        x = x + V[:j].T @ y

        # Next cycle re-checks the true residual; if an inner-criterion stop
        # did not actually reach the true target, tighten and continue.
        inner_rtol *= 0.1
