"""Closed-form action of a transformation chain, by two independent routes.

Determinant route
    A chain of N first-order transformations maps a solution Psi of the
    initial coupled equation to Phi with components

        phi_j = |W_j(U_1..U_N, Psi)| / |W(U_1..U_N)|,

    and the transformed potential is V_N = V_0 - 2 dF/dr where the
    accumulated superpotential has entries f_ij = |W_(i,j)| / |W|.  All
    ratios are formed by log-magnitude subtraction; dF/dr uses adaptive
    central differences with one Richardson level.

Stepwise route
    The same chain applied literally, one first-order operator at a time,

        L_k = D_m - (Y_k') Y_k^{-1}   (singular links)
        L_k = d   - (Y_k') Y_k^{-1}   (regular links),

    with every intermediate carried as a truncated Taylor jet so all
    derivatives are exact.  The two routes share nothing beyond the link
    definitions, which makes them mutual oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .chain import ChainSpec, ChainWorkspace, TransformationMatrix
from .detkit import SignedLogDet

__all__ = [
    "SingularPointError",
    "RealityError",
    "transform_vector",
    "transform_matrix",
    "solution_derivative",
    "superpotential",
    "compute_potential",
    "PotentialTable",
    "StepwiseChain",
]

_EPS = float(np.finfo(float).eps)


class SingularPointError(ArithmeticError):
    """The chain determinant vanishes (to conditioning tolerance) at r."""


class RealityError(ArithmeticError):
    """The constructed potential has an imaginary part above tolerance."""


def _psi_jets(psi, r: float, order: int) -> np.ndarray:
    return np.array([f.jet(r, order) for f in psi])


def _max_psi_order(chain: ChainSpec) -> int:
    # corner of the derivative-rule numerator needs d^(N-M+1) pm^M psi_j
    return chain.n_links + 1


# ---------------------------------------------------------------------------
# determinant route
# ---------------------------------------------------------------------------

def transform_vector(chain: ChainSpec, psi, r: float, *, workspace: ChainWorkspace | None = None,
                     psi_jets: np.ndarray | None = None) -> np.ndarray:
    """Apply the chain closure to the vector function psi at radius r.

    ``psi`` is a sequence of n RadialFunctions solving the initial equation
    (any energy distinct from the chain's spectral values).  Raises
    :class:`SingularPointError` where |W| is flagged singular.
    """
    ws = workspace or ChainWorkspace(chain, r)
    den = ws.w_logdet()
    if den.sign == 0:
        raise SingularPointError(f"|W| singular at r={r}")
    if psi_jets is None:
        psi_jets = _psi_jets(psi, r, _max_psi_order(chain))
    out = np.empty(chain.n, dtype=complex)
    for j in range(1, chain.n + 1):
        out[j - 1] = ws.bordered_logdet(psi_jets, j).ratio(den)
    return out


def transform_matrix(chain: ChainSpec, u: TransformationMatrix, r: float) -> np.ndarray:
    """Apply the chain closure columnwise to a matrix solution."""
    ws = ChainWorkspace(chain, r)
    out = np.empty((chain.n, chain.n), dtype=complex)
    order = _max_psi_order(chain)
    for col in range(chain.n):
        psi = [u.entries[row][col] for row in range(chain.n)]
        out[:, col] = transform_vector(chain, psi, r, workspace=ws,
                                       psi_jets=_psi_jets(psi, r, order))
    return out


def solution_derivative(chain: ChainSpec, psi, j: int, r: float,
                        *, workspace: ChainWorkspace | None = None) -> complex:
    """d(phi_j)/dr by the determinant-differentiation rule.

    The derivative of the ratio |W_j|/|W| reduces to the bordered matrix
    with its appended row differentiated once, minus the transformed
    components weighted by the row-replaced determinants:

        phi_j' = (Gamma_j - sum_l phi_l |W_(j,l)|) / |W|.
    """
    ws = workspace or ChainWorkspace(chain, r)
    den = ws.w_logdet()
    if den.sign == 0:
        raise SingularPointError(f"|W| singular at r={r}")
    pj = _psi_jets(psi, r, _max_psi_order(chain))
    gamma = ws.bordered_logdet(pj, j, raised=True).ratio(den)
    total = gamma
    for l in range(1, chain.n + 1):
        phi_l = ws.bordered_logdet(pj, l).ratio(den)
        if phi_l == 0.0:
            continue
        total -= phi_l * ws.replaced_logdet(j, l).ratio(den)
    return total


def superpotential(chain: ChainSpec, r: float,
                   *, workspace: ChainWorkspace | None = None) -> np.ndarray:
    """Accumulated superpotential F(r): entries |W_(i,j)| / |W|.

    F collects sum_k (Y_k') Y_k^{-1} over the chain; the transformed
    potential is V_0 - 2 F'.
    """
    ws = workspace or ChainWorkspace(chain, r)
    den = ws.w_logdet()
    if den.sign == 0:
        raise SingularPointError(f"|W| singular at r={r}")
    out = np.empty((chain.n, chain.n), dtype=complex)
    for i in range(1, chain.n + 1):
        for j in range(1, chain.n + 1):
            out[i - 1, j - 1] = ws.replaced_logdet(i, j).ratio(den)
    return out


def superpotential_derivative(chain: ChainSpec, r: float, *, h: float | None = None
                              ) -> np.ndarray:
    """dF/dr by central differences with one Richardson extrapolation."""
    if h is None:
        h = _EPS ** (1.0 / 3.0) * max(1.0, r)
    if r - h <= 0.0:
        h = 0.45 * r
    def central(step):
        return (superpotential(chain, r + step) - superpotential(chain, r - step)) / (2 * step)
    d1 = central(h)
    d2 = central(0.5 * h)
    return (4.0 * d2 - d1) / 3.0


# ---------------------------------------------------------------------------
# potential tables
# ---------------------------------------------------------------------------

@dataclass
class PotentialTable:
    """Sampled transformed potential over a radial grid.

    ``values[p]`` is the real n x n potential at ``grid[p]``; ``f_values``
    keeps the (complex) superpotential samples.  Samples where the chain
    determinant is flagged singular carry ``flags[p] = True`` and are kept
    in place (never dropped); ``poles`` lists radii bracketing detected
    sign changes of |W|.
    """

    grid: np.ndarray
    values: np.ndarray
    f_values: np.ndarray
    flags: np.ndarray
    poles: list = field(default_factory=list)
    imag_max: float = 0.0
    scale: float = 0.0

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def symmetry_defect(self) -> float:
        """max |V_ij - V_ji| over unflagged samples, relative to the scale."""
        ok = ~self.flags
        if not np.any(ok):
            return math.inf
        v = self.values[ok]
        defect = np.max(np.abs(v - np.transpose(v, (0, 2, 1))))
        return defect / self.scale if self.scale > 0 else defect

    def interpolator(self):
        """Cubic-spline interpolant over the unflagged samples."""
        from scipy.interpolate import CubicSpline
        ok = ~self.flags
        return CubicSpline(self.grid[ok], self.values[ok], axis=0)


def compute_potential(chain: ChainSpec, grid, *, imag_tol: float = 1e-8,
                      route: str = "determinant") -> PotentialTable:
    """Transformed potential V = V_0 - 2 F' sampled on the grid.

    The imaginary residue of V is asserted below ``imag_tol`` times the
    table scale before the real projection; a violation raises
    :class:`RealityError` rather than being silently dropped.
    ``route`` selects the determinant formulas (default) or the stepwise
    recursion (used as an independent oracle).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be positive and strictly increasing")
    n = chain.n
    P = grid.size
    vals = np.zeros((P, n, n), dtype=complex)
    fvals = np.zeros((P, n, n), dtype=complex)
    flags = np.zeros(P, dtype=bool)
    signs = np.zeros(P, dtype=complex)
    stepwise = StepwiseChain(chain) if route == "stepwise" else None
    # a pole of the potential sends the superpotential ratios to infinity;
    # that (not the graded-matrix conditioning diagnostic) marks a sample
    f_cap = 1e8
    for p, r in enumerate(grid):
        try:
            if stepwise is not None:
                f, df = stepwise.superpotential_with_derivative(r)
            else:
                ws = ChainWorkspace(chain, r)
                det = ws.w_logdet()
                signs[p] = det.sign
                if det.sign == 0:
                    raise SingularPointError(f"|W| vanishes at r={r}")
                f = superpotential(chain, r, workspace=ws)
                df = superpotential_derivative(chain, r)
            if not np.all(np.isfinite(f)) or not np.all(np.isfinite(df)) \
                    or np.max(np.abs(f)) > f_cap:
                raise SingularPointError(f"superpotential blows up at r={r}")
            fvals[p] = f
            vals[p] = chain.v0_matrix(r) - 2.0 * df
        except (SingularPointError, np.linalg.LinAlgError, ZeroDivisionError,
                OverflowError):
            flags[p] = True
    ok = ~flags
    if not np.any(ok):
        raise SingularPointError("every grid sample is flagged singular")
    scale = float(np.max(np.abs(vals[ok].real)))
    imag_max = float(np.max(np.abs(vals[ok].imag)))
    if imag_max > imag_tol * scale:
        raise RealityError(
            f"imaginary residue {imag_max:.3e} exceeds {imag_tol:.1e} * scale {scale:.3e}")
    poles = _pole_radii(grid, signs, flags)
    return PotentialTable(grid=grid, values=vals.real, f_values=fvals, flags=flags,
                          poles=poles, imag_max=imag_max, scale=scale)


def _pole_radii(grid, signs, flags) -> list:
    """Radii where |W| changes sign between neighbouring unflagged samples."""
    poles = [float(grid[p]) for p in range(grid.size) if flags[p]]
    for p in range(grid.size - 1):
        if flags[p] or flags[p + 1] or signs[p] == 0 or signs[p + 1] == 0:
            continue
        a, b = signs[p], signs[p + 1]
        if abs(a.imag) < 1e-9 and abs(b.imag) < 1e-9 and a.real * b.real < 0:
            poles.append(float(0.5 * (grid[p] + grid[p + 1])))
    return poles


# ---------------------------------------------------------------------------
# stepwise route
# ---------------------------------------------------------------------------

class StepwiseChain:
    """The chain applied operator by operator, via truncated Taylor jets.

    Produces the same artifacts as the determinant route (superpotential,
    potential, transformed solutions, intermediate matrices Y_k) computed
    wholly independently; a singular intermediate Y_k raises
    :class:`SingularPointError` at that radius.
    """

    def __init__(self, chain: ChainSpec):
        self.chain = chain

    def _propagate(self, r: float, order: int):
        """Returns (ys, gs): intermediate-matrix jets and their log-derivative
        jets, in link order."""
        ch = self.chain
        m, M = ch.m, ch.n_singular
        ys, gs = [], []
        for idx, link in enumerate(ch.links):
            z = link.jet(r, order)
            for prev_idx in range(idx):
                sing = prev_idx < M
                dz = jets.jet_dm(z, m) if sing else jets.jet_deriv(z)
                z = jets.jet_add(dz, -jets.jet_matmul(gs[prev_idx], z))
            ys.append(z)
            try:
                g = jets.jet_matmul(jets.jet_deriv(z), jets.jet_matinv(z))
            except np.linalg.LinAlgError as exc:
                raise SingularPointError(f"intermediate matrix singular at r={r}") from exc
            gs.append(g)
        return ys, gs

    def intermediate_jet(self, k: int, r: float, order: int | None = None) -> np.ndarray:
        """Taylor jet of Y_k = L_(k-1..1) U_k (k 1-based)."""
        if order is None:
            order = self.chain.n_links + 1
        ys, _ = self._propagate(r, order)
        return ys[k - 1]

    def superpotential_jet(self, r: float, order: int | None = None) -> np.ndarray:
        if order is None:
            order = self.chain.n_links + 1
        _, gs = self._propagate(r, order)
        total = gs[-1]
        for g in gs[:-1]:
            total = jets.jet_add(total, g)
        return total

    def superpotential_with_derivative(self, r: float):
        f = self.superpotential_jet(r)
        return f[0], jets.jet_deriv(f)[0]

    def potential(self, r: float) -> np.ndarray:
        f, df = self.superpotential_with_derivative(r)
        return self.chain.v0_matrix(r) - 2.0 * df

    def transform_jet(self, psi, r: float, order: int | None = None) -> np.ndarray:
        """Jet of the transformed vector (components down the second axis)."""
        ch = self.chain
        if order is None:
            order = ch.n_links + 3
        phi = np.array([f.taylor(r, order) for f in psi]).T.copy()
        _, gs = self._propagate(r, order)
        m, M = ch.m, ch.n_singular
        for idx, g in enumerate(gs):
            dphi = jets.jet_dm(phi, m) if idx < M else jets.jet_deriv(phi)
            phi = jets.jet_add(dphi, -jets.jet_matmul(g, phi))
        return phi

    def transform_vector(self, psi, r: float) -> np.ndarray:
        return self.transform_jet(psi, r)[0]
