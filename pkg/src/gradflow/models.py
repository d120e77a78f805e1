"""Gradient-flow model definitions as data.

Each model is the energy

    E(phi) = 1/2 (L phi, phi) + s_N * integral F(phi) dx

evolved by phi_t = -M G mu, mu = dE/dphi, with L a self-adjoint constant
operator (a Fourier symbol here), G the dissipation operator (identity for
L2 flows, -Laplacian for conserved H^-1 flows) and s_N a constant scale on
the nonlinear part.  The auxiliary-variable reformulation replaces the bulk
term with a quadratized field q = Q(phi) so that the modified energy

    E_mod(phi, q) = 1/2 (L phi, phi) + s_N * c_q * ||q||^2 + const

is a quadratic Lyapunov functional.  Four concrete models are provided:

==============  ============  =================  ====================  =====
model           flow          L symbol           Q(phi)                c_q
==============  ============  =================  ====================  =====
allen_cahn      L2            a0*|k|^2           sqrt(F + C0)          +1
cahn_hilliard   H^-1          a0*|k|^2 + sκ      sqrt(F - κφ²/2 + C0)  +1
pfc             H^-1          (β-ε)-2β|k|²+|k|⁴  phi^2                 +1/4
mbe             L2            ε²|k|⁴             sqrt(ln(1+|∇φ|²)+C0)  -1/2
==============  ============  =================  ====================  =====

with F(phi) = (phi^2-1)^2/4 for allen_cahn/cahn_hilliard, F = phi^4/4 for
pfc, and the logarithmic Ehrlich-Schwoebel term for mbe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid2D


class NegativeRadicandError(ValueError):
    """The quadratization shift C0 is too small for this field."""

    def __init__(self, min_value: float, index: tuple[int, int]):
        self.min_value = min_value
        self.index = index
        super().__init__(
            f"quadratization radicand reaches {min_value:.6g} at grid index "
            f"(iy={index[0]}, ix={index[1]}); increase C0"
        )


@dataclass(frozen=True)
class ModelSpec:
    """Immutable parameter bundle for one gradient-flow model."""

    kind: str               # 'ac' | 'ch' | 'pfc' | 'mbe'
    alpha0: float = 0.0     # interface coefficient (AC/CH)
    eps: float = 0.0        # interface width (AC/CH) or PFC/MBE parameter
    mobility: float = 1.0   # M
    kappa: float = 0.0      # CH stabilizer, 0 elsewhere
    beta: float = 0.0       # PFC parameter, unused elsewhere
    c0: float = 0.0         # quadratization shift

    def __post_init__(self):
        if self.kind not in ("ac", "ch", "pfc", "mbe"):
            raise ValueError(f"unknown model kind {self.kind!r}")

    # -- structural constants --------------------------------------------

    @property
    def nonlinear_scale(self) -> float:
        """s_N: constant multiplying the bulk coupling in mu."""
        if self.kind in ("ac", "ch"):
            return self.alpha0 / self.eps ** 2
        return 1.0

    @property
    def c_q(self) -> float:
        """Coefficient of ||q||^2 in the modified energy (before s_N)."""
        return {"ac": 1.0, "ch": 1.0, "pfc": 0.25, "mbe": -0.5}[self.kind]

    @property
    def qweight(self) -> float:
        """Full signed weight s_N*c_q of the quadratic q term."""
        return self.nonlinear_scale * self.c_q

    @property
    def offset_density(self) -> float:
        """Constant energy offset per unit area, scaled by s_N."""
        if self.kind in ("ac", "ch"):
            return -self.c0
        if self.kind == "mbe":
            return 0.5 * self.c0
        return 0.0

    @property
    def coupling_rank(self) -> str:
        """'scalar' if q pairs with dphi/dt, 'gradient' if with grad(dphi/dt)."""
        return "gradient" if self.kind == "mbe" else "scalar"

    @property
    def conserves_mass(self) -> bool:
        return self.kind in ("ch", "pfc")

    # -- operator symbols --------------------------------------------------

    def l_symbol(self, grid: Grid2D) -> np.ndarray:
        """Per-mode multiplier of the self-adjoint linear operator L."""
        if self.kind == "ac":
            return self.alpha0 * grid.k2
        if self.kind == "ch":
            return self.alpha0 * grid.k2 + self.nonlinear_scale * self.kappa * np.ones(grid.shape)
        if self.kind == "pfc":
            return (self.beta - self.eps) - 2.0 * self.beta * grid.k2 + grid.k4
        return self.eps ** 2 * grid.k4

    def g_symbol(self, grid: Grid2D) -> np.ndarray:
        """Per-mode multiplier of the mobility operator M*G (>= 0, 0 at k=0 for conserved flows)."""
        if self.conserves_mass:
            return self.mobility * grid.k2
        return self.mobility * np.ones(grid.shape)


def allen_cahn(alpha0: float = 0.01, eps: float = 0.01, mobility: float = 0.6,
               c0: float = 100.0) -> ModelSpec:
    return ModelSpec(kind="ac", alpha0=alpha0, eps=eps, mobility=mobility, c0=c0)


def cahn_hilliard(alpha0: float = 1e-4, eps: float = 0.01, mobility: float = 0.001,
                  kappa: float = 4.0, c0: float = 100.0) -> ModelSpec:
    return ModelSpec(kind="ch", alpha0=alpha0, eps=eps, mobility=mobility,
                     kappa=kappa, c0=c0)


def phase_field_crystal(eps: float = 0.25, beta: float = 1.0,
                        mobility: float = 1.0) -> ModelSpec:
    if beta <= eps:
        raise ValueError(f"phase-field crystal needs beta > eps (got {beta} <= {eps})")
    return ModelSpec(kind="pfc", eps=eps, beta=beta, mobility=mobility)


def epitaxy(eps: float = 0.1, mobility: float = 0.5, c0: float = 1.0) -> ModelSpec:
    """Molecular-beam-epitaxy growth without slope selection."""
    return ModelSpec(kind="mbe", eps=eps, mobility=mobility, c0=c0)


_CONSTRUCTORS = {
    "ac": allen_cahn,
    "ch": cahn_hilliard,
    "pfc": phase_field_crystal,
    "mbe": epitaxy,
}


def make_model(kind: str, **params) -> ModelSpec:
    """Build a model by kind name, passing only the parameters it takes."""
    if kind not in _CONSTRUCTORS:
        raise ValueError(f"unknown model kind {kind!r}")
    return _CONSTRUCTORS[kind](**params)


# -- potentials and quadratization ------------------------------------------


def double_well(phi: np.ndarray) -> np.ndarray:
    return 0.25 * (phi * phi - 1.0) ** 2


def bulk_density(model: ModelSpec, grid: Grid2D, phi: np.ndarray) -> np.ndarray:
    """Pointwise bulk-potential density F(phi) (unstabilized for CH)."""
    if model.kind in ("ac", "ch"):
        return double_well(phi)
    if model.kind == "pfc":
        return 0.25 * phi ** 4
    gx, gy = grid.gradient(phi)
    return -0.5 * np.log1p(gx * gx + gy * gy)


def quad_radicand(model: ModelSpec, grid: Grid2D, phi: np.ndarray) -> np.ndarray:
    """The quantity under the quadratization square root, Q(phi)^2."""
    if model.kind == "ac":
        return double_well(phi) + model.c0
    if model.kind == "ch":
        return double_well(phi) - 0.5 * model.kappa * phi * phi + model.c0
    if model.kind == "pfc":
        return phi ** 4
    gx, gy = grid.gradient(phi)
    return np.log1p(gx * gx + gy * gy) + model.c0


def quadratize(model: ModelSpec, grid: Grid2D, phi: np.ndarray) -> np.ndarray:
    """Q(phi); raises :class:`NegativeRadicandError` if C0 is too small."""
    if model.kind == "pfc":
        return phi * phi
    rad = quad_radicand(model, grid, phi)
    mn = rad.min()
    if mn < 0.0:
        iy, ix = np.unravel_index(int(rad.argmin()), rad.shape)
        raise NegativeRadicandError(float(mn), (int(iy), int(ix)))
    return np.sqrt(rad)


@dataclass(frozen=True)
class ScalarCoupling:
    """Pointwise coupling data for L2/H^-1 flows with a scalar pairing.

    ``g`` multiplies q in the chemical potential (mu += s_N * q * g);
    ``h`` is the evolution coefficient as conventionally written
    (dq/dt = (h/2) dphi/dt for the double-well models, dq/dt = h dphi/dt
    for the phase-field crystal quadratization q = phi^2); ``dq`` is the
    ready-to-use multiplier with delta_q = dq * delta_phi.
    """

    g: np.ndarray
    h: np.ndarray
    dq: np.ndarray


@dataclass(frozen=True)
class GradientCoupling:
    """Vector coupling H(phi) for the epitaxy model: mu += div(q*H),
    delta_q = H . grad(delta_phi)."""

    hx: np.ndarray
    hy: np.ndarray


def coupling(model: ModelSpec, grid: Grid2D, phi: np.ndarray):
    """Evaluate the q-coupling fields at phi (typically an extrapolation)."""
    if model.kind in ("ac", "ch"):
        q = quadratize(model, grid, phi)
        f = phi ** 3 - phi - model.kappa * phi
        g = f / q
        return ScalarCoupling(g=g, h=g, dq=0.5 * g)
    if model.kind == "pfc":
        return ScalarCoupling(g=phi, h=2.0 * phi, dq=2.0 * phi)
    q = quadratize(model, grid, phi)
    gx, gy = grid.gradient(phi)
    denom = (1.0 + gx * gx + gy * gy) * q
    return GradientCoupling(hx=gx / denom, hy=gy / denom)


# -- energies -----------------------------------------------------------------


def lin_energy(model: ModelSpec, grid: Grid2D, phi: np.ndarray) -> float:
    """1/2 (L phi, phi), evaluated spectrally."""
    return 0.5 * grid.inner(grid.apply_symbol(phi, model.l_symbol(grid)), phi)


def original_energy(model: ModelSpec, grid: Grid2D, phi: np.ndarray) -> float:
    """The model's free energy: 1/2 (L phi, phi) + s_N * integral F(phi).

    The quadratic part uses the same discrete operators as the schemes
    (so modified and original energies share one definition of them); the
    bulk part integrates the potential density directly, independent of
    the quadratization.  For cahn_hilliard the stabilizer s*kappa*I lives
    in the scheme's L but not in the physical energy, so it is removed
    here (it cancels against the stabilized quadratization only in the
    modified form).
    """
    e = (lin_energy(model, grid, phi)
         + model.nonlinear_scale * grid.integral(bulk_density(model, grid, phi)))
    if model.kind == "ch":
        e -= 0.5 * model.nonlinear_scale * model.kappa * grid.inner(phi, phi)
    return e


def modified_energy(model: ModelSpec, grid: Grid2D, phi: np.ndarray,
                    q: np.ndarray) -> float:
    """Quadratic Lyapunov functional; equals the original energy at q=Q(phi)."""
    grid._check(q)
    return (lin_energy(model, grid, phi)
            + model.qweight * grid.inner(q, q)
            + model.nonlinear_scale * model.offset_density * grid.area)
