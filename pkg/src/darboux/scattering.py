"""The coupled 3S1-3D1 neutron-proton construction and S-matrix machinery.

A four-link chain over the background diag(0, 6/r**2) reproduces the
Kohlhoff-von Geramb potential: two singular links acting on the s channel
(spectral values -k1**2 and -k2**2) followed by an eigenphase-preserving
pair at kappa**2 and conj(kappa)**2 with kappa = chi*(1+i).  The chain's
scattering matrix has the six-pole closed form

    S(k) = O(k) diag(ph(k), 1) O(k)^T / (k**4 + 4 chi**4),
    O(k) = [[2 chi**2, k**2], [-k**2, 2 chi**2]],
    ph(k) = (k + i k1)(k + i k2) / ((k - i k1)(k - i k2)),

and the d/s asymptotic-normalization ratio eta = k2**2 / (2 chi**2).

After the eigenphase-preserving pair the channel order is swapped: row 1
of the constructed potential carries the d-wave (l = 2) tail and row 2 the
s-wave, which fixes both the decomposition formulas and the reference
functions of the numerical matcher.

An independent fixed-step integrator extracts S from any sampled potential
table for cross-validation against the closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .basis import D_WAVE_CHANNEL, FREE_CHANNEL, make_basis, scaled
from .chain import ChainSpec, chain as make_chain, regular_link, singular_link
from .transform import PotentialTable, StepwiseChain
from . import jets

__all__ = [
    "KvGParameters",
    "SMatrixValue",
    "PotentialDecomposition",
    "KVG_L_PER_CHANNEL",
    "build_kvg_chain",
    "self_wronskian",
    "intermediate_self_wronskian",
    "closed_form_smatrix",
    "eta_ratio",
    "eta_residue_ratio",
    "decompose_potential",
    "numerical_smatrix",
    "unitarity_defect",
    "symmetry_defect",
    "kvg_grid",
    "kvg_delta_v",
]

# channel order of the constructed potential: (d-wave, s-wave)
KVG_L_PER_CHANNEL = (2, 0)


@dataclass(frozen=True)
class KvGParameters:
    """Wavenumbers of the singular links and the coupling scale (1/fm)."""

    k1: float = 0.944
    k2: float = 0.232
    chi: float = 1.22

    def __post_init__(self):
        if min(self.k1, self.k2, self.chi) <= 0.0:
            raise ValueError("parameters must be positive")
        if self.k1 == self.k2:
            raise ValueError("k1 and k2 must differ")

    @property
    def kappa(self) -> complex:
        return self.chi * (1.0 + 1.0j)

    def pole_factor(self, k: complex) -> complex:
        """N(k) = 1 / ((k1 - ik)(k2 - ik)), the symmetry-enforcing factor."""
        return 1.0 / ((self.k1 - 1j * k) * (self.k2 - 1j * k))


def build_kvg_chain(p: KvGParameters, *, pole_factors: bool = True) -> ChainSpec:
    """The four-link chain of the neutron-proton construction.

    ``pole_factors=False`` drops the N(+-kappa) normalizations from the
    third link, which breaks the vanishing self-Wronskian condition (and
    with it the symmetry of the output); useful for demonstrating the role
    of those factors.
    """
    kap = p.kappa
    u1 = singular_link([[scaled(1.0, make_basis("regular_s", 1j * p.k1))]], 2, -p.k1 ** 2)
    u2 = singular_link([[scaled(1.0, make_basis("jost_s", -1j * p.k2))]], 2, -p.k2 ** 2)
    n_plus = p.pole_factor(kap) if pole_factors else 1.0
    n_minus = p.pole_factor(-kap) if pole_factors else 1.0
    u3 = regular_link(
        [[scaled(-n_minus, make_basis("regular_s", kap)),
          scaled(1j * n_plus, make_basis("jost_s", kap))],
         [scaled(-1j, make_basis("regular_d", kap)),
          scaled(1.0, make_basis("jost_d", kap))]],
        kap ** 2)
    u4 = u3.conjugate()
    return make_chain(2, 1, [u1, u2, u3, u4], [FREE_CHANNEL, D_WAVE_CHANNEL])


def self_wronskian(y: np.ndarray, y_prime: np.ndarray) -> np.ndarray:
    """W[Y, Y] = Y^T Y' - (Y')^T Y; zero for symmetry-preserving links."""
    return y.T @ y_prime - y_prime.T @ y


def intermediate_self_wronskian(chain_spec: ChainSpec, k: int, r: float) -> np.ndarray:
    """Self-Wronskian of the k-th intermediate matrix Y_k at radius r."""
    jet = StepwiseChain(chain_spec).intermediate_jet(k, r, order=chain_spec.n_links + 1)
    return self_wronskian(jet[0], jets.jet_deriv(jet)[0])


# ---------------------------------------------------------------------------
# closed-form scattering matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SMatrixValue:
    """S at one wavenumber with eigenphases (radians) and mixing angle."""

    k: float
    s: np.ndarray
    eigenphases: tuple
    mixing: float

    def __post_init__(self):
        object.__setattr__(self, "s", np.asarray(self.s, dtype=complex))


def _smatrix_core(p: KvGParameters, k: complex) -> np.ndarray:
    """S(k) for complex k, rows ordered (d, s) like the constructed potential.

    The six-pole form O(k) diag(ph, 1) O(k)^T / (k^4 + 4 chi^4) is stated
    with the s channel first; both index orders are conjugate by the swap
    permutation (the off-diagonals are symmetric), and the direct
    integration of the constructed potential singles out the (d, s) order.
    """
    chi2 = 2.0 * p.chi ** 2
    k2 = k * k
    rot = np.array([[chi2, k2], [-k2, chi2]], dtype=complex)
    ph = ((k + 1j * p.k1) * (k + 1j * p.k2)) / ((k - 1j * p.k1) * (k - 1j * p.k2))
    mid = np.array([[ph, 0.0], [0.0, 1.0]], dtype=complex)
    s = rot @ mid @ rot.T / (k2 * k2 + chi2 * chi2)
    return s[::-1, ::-1].copy()


def eigenphase_decomposition(s: np.ndarray) -> tuple:
    """(delta1, delta2, mixing) of a symmetric unitary 2x2 matrix.

    Blatt-Biedenharn style: S = R(eps) diag(e^{2i d1}, e^{2i d2}) R(eps)^T
    with R(eps) = [[cos, sin], [-sin, cos]] real orthogonal.  eps is
    reduced to (-pi/4, pi/4] by quarter turns (which permute the two
    eigenphases), so the branch is only locally continuous.
    """
    # pick whichever of Re S / Im S has the larger traceless part; both are
    # real symmetric and commute, so either diagonalizes S
    parts = [s.real, s.imag]
    defect = [abs(a[0, 0] - a[1, 1]) + 2 * abs(a[0, 1] + a[1, 0]) for a in parts]
    a = parts[0] if defect[0] >= defect[1] else parts[1]
    if max(defect) < 1e-13:
        phase = 0.5 * cmath.phase(s[0, 0])
        return phase, phase, 0.0
    _, vec = np.linalg.eigh(0.5 * (a + a.T))
    r = vec.real
    if np.linalg.det(r) < 0:
        r = r[:, ::-1].copy()
    eps0 = math.atan2(r[0, 1], r[0, 0])
    quarter = round(eps0 / (math.pi / 2.0))
    eps = eps0 - quarter * (math.pi / 2.0)
    rot = np.array([[math.cos(eps), math.sin(eps)], [-math.sin(eps), math.cos(eps)]])
    d = rot.T @ s @ rot
    d1 = 0.5 * cmath.phase(d[0, 0])
    d2 = 0.5 * cmath.phase(d[1, 1])
    return d1, d2, eps


def closed_form_smatrix(p: KvGParameters, k: float) -> SMatrixValue:
    """The six-pole closed-form S at real k > 0."""
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    s = _smatrix_core(p, k)
    d1, d2, eps = eigenphase_decomposition(s)
    return SMatrixValue(float(k), s, (d1, d2), eps)


def unitarity_defect(s: np.ndarray) -> float:
    return float(np.max(np.abs(s @ s.conj().T - np.eye(s.shape[0]))))


def symmetry_defect(s: np.ndarray) -> float:
    return float(np.max(np.abs(s - s.T)))


def eta_ratio(p: KvGParameters) -> float:
    """d/s asymptotic-normalization ratio at the bound-state pole k = i k2."""
    return p.k2 ** 2 / (2.0 * p.chi ** 2)


def eta_residue_ratio(p: KvGParameters, *, radius_factor: float = 1e-3,
                      nodes: int = 64) -> float:
    """eta from S-matrix residues at k = i k2, by circle quadrature.

    res S = mean over a small circle of S(k) (k - i k2); the ratio of the
    (2,1) and (1,1) residues reproduces the closed-form value.
    """
    center = 1j * p.k2
    rho = radius_factor * p.k2
    res = np.zeros((2, 2), dtype=complex)
    for j in range(nodes):
        z = rho * cmath.exp(2j * math.pi * j / nodes)
        res += _smatrix_core(p, center + z) * z
    res /= nodes
    # d-to-s coupling residue over the s-channel residue, in (d, s) order
    value = res[0, 1] / res[1, 1]
    return float(value.real)


# ---------------------------------------------------------------------------
# potential decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialDecomposition:
    """Central, tensor and spin-orbit components of a 2x2 coupled potential.

    With channel order (d, s): V_C = V22, V_T = V12 / sqrt(8),
    V_O = (V22 - V12/sqrt(2) - V11 + 6/r**2) / 3.
    """

    grid: np.ndarray
    v_c: np.ndarray
    v_t: np.ndarray
    v_o: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Invert the decomposition back to the 2x2 potential matrix."""
        r = self.grid
        v22 = self.v_c
        v12 = math.sqrt(8.0) * self.v_t
        v11 = v22 - v12 / math.sqrt(2.0) - 3.0 * self.v_o + 6.0 / r ** 2
        out = np.empty((r.size, 2, 2))
        out[:, 0, 0] = v11
        out[:, 0, 1] = v12
        out[:, 1, 0] = v12
        out[:, 1, 1] = v22
        return out


def decompose_potential(table: PotentialTable) -> PotentialDecomposition:
    if table.n != 2:
        raise ValueError("decomposition is defined for 2x2 tables")
    r = table.grid
    v = table.values
    v_c = v[:, 1, 1].copy()
    v_t = v[:, 0, 1] / math.sqrt(8.0)
    v_o = (v[:, 1, 1] - v[:, 0, 1] / math.sqrt(2.0) - v[:, 0, 0] + 6.0 / r ** 2) / 3.0
    return PotentialDecomposition(r, v_c, v_t, v_o)


def kvg_grid(r_min: float = 0.02, r_max: float = 26.0, *, dense_until: float = 1.0,
             dense_points: int = 160, step: float = 0.02) -> np.ndarray:
    """Log-dense grid near the origin, uniform beyond (the potential is
    singular at r = 0)."""
    left = np.geomspace(r_min, dense_until, dense_points, endpoint=False)
    right = np.arange(dense_until, r_max + 0.5 * step, step)
    return np.concatenate([left, right])


def kvg_delta_v(table: PotentialTable, l_per_channel=KVG_L_PER_CHANNEL) -> np.ndarray:
    """Short-range part: the table minus its centrifugal background."""
    dv = table.values.copy()
    for i, l in enumerate(l_per_channel):
        dv[:, i, i] -= l * (l + 1) / table.grid ** 2
    return dv


# ---------------------------------------------------------------------------
# numerical S-matrix from a sampled potential
# ---------------------------------------------------------------------------

def _reference_pair(l: int, k: float, r: float):
    """Outgoing/incoming reference values and r-derivatives at radius r."""
    if l == 0:
        out = make_basis("jost_s", k)
        inc = make_basis("jost_s", -k)
    elif l == 2:
        out = make_basis("jost_d", k)
        inc = make_basis("jost_d", -k)
    else:
        raise ValueError("reference functions implemented for l = 0 and l = 2")
    return (out(r), out.deriv(r, 1)), (inc(r), inc.deriv(r, 1))


def _regular_start(spline, r0: float, l_per_channel):
    """Regular-solution columns at r0, one per channel.

    The leading behavior r^(l+1) generalizes to r^(nu+1) along the
    eigendirections of the matrix C = lim r^2 V(r): transformed potentials
    rotate the centrifugal singularity across channels, and the diagonal
    r^(l+1) start leaves a boundary contamination at the 1e-3 level.
    Falls back to the plain centrifugal exponents if C is not resolvable.
    """
    n = len(l_per_channel)
    c = spline(r0) * r0 * r0
    c = 0.5 * (c + c.T)
    evals, evecs = np.linalg.eigh(c)
    phi = np.zeros((n, n), dtype=complex)
    dphi = np.zeros((n, n), dtype=complex)
    if np.all(np.isfinite(evals)) and np.all(evals > -0.2499):
        nu = 0.5 * (-1.0 + np.sqrt(1.0 + 4.0 * evals))
        for i in range(n):
            phi[:, i] = evecs[:, i] * r0 ** (nu[i] + 1.0)
            dphi[:, i] = evecs[:, i] * (nu[i] + 1.0) * r0 ** nu[i]
    else:
        for i, l in enumerate(l_per_channel):
            phi[i, i] = r0 ** (l + 1)
            dphi[i, i] = (l + 1) * r0 ** l
    return phi, dphi


def _rk4_sweep(phi, dphi, a_nodes, a_mids, h):
    """Fixed-step RK4 for Phi'' = A(r) Phi over one uniform zone."""
    steps = a_nodes.shape[0] - 1
    for i in range(steps):
        a0 = a_nodes[i]
        am = a_mids[i]
        a1 = a_nodes[i + 1]
        k1p = dphi
        k1d = a0 @ phi
        k2p = dphi + 0.5 * h * k1d
        k2d = am @ (phi + 0.5 * h * k1p)
        k3p = dphi + 0.5 * h * k2d
        k3d = am @ (phi + 0.5 * h * k2p)
        k4p = dphi + h * k3d
        k4d = a1 @ (phi + h * k3p)
        phi = phi + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        dphi = dphi + (h / 6.0) * (k1d + 2 * k2d + 2 * k3d + k4d)
        # log-derivative safeguard: rescale columns so S = B A^-1 is unchanged
        if i % 400 == 399:
            scale = np.maximum(np.abs(phi), np.abs(dphi)).max(axis=0)
            if np.any(scale > 1e12) or np.any((scale > 0) & (scale < 1e-12)):
                phi = phi / scale
                dphi = dphi / scale
    return phi, dphi


def numerical_smatrix(table: PotentialTable, k: float, l_per_channel=KVG_L_PER_CHANNEL,
                      *, r_min: float | None = None, r_max: float | None = None,
                      base_step: float = 2e-3) -> SMatrixValue:
    """S extracted from a sampled potential by direct integration.

    Regular column solutions start at r_min with r^(l+1) leading behavior,
    propagate with a fixed-step 4th-order scheme (graded zones, periodic
    column renormalization) and are matched at r_max against the exact
    outgoing/incoming references of each channel's centrifugal tail.  The
    table must reach radii where its short-range part is negligible.
    """
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    n = table.n
    if len(l_per_channel) != n:
        raise ValueError("need one angular momentum per channel")
    grid = table.grid
    r0 = grid[0] if r_min is None else max(r_min, grid[0])
    r1 = grid[-1] if r_max is None else min(r_max, grid[-1])
    spline = table.interpolator()
    k2 = k * k
    eye = np.eye(n)
    phi, dphi = _regular_start(spline, r0, l_per_channel)

    # graded fixed-step zones: fine where the potential is singular
    zone_edges = [r0, min(1.0, r1), min(6.0, r1), r1]
    zone_steps = [base_step / 4.0, base_step, 2.5 * base_step]
    r_here = r0
    for z in range(3):
        a, b = zone_edges[z], zone_edges[z + 1]
        if b <= a:
            continue
        steps = max(2, int(math.ceil((b - a) / zone_steps[z])))
        nodes = np.linspace(a, b, steps + 1)
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        a_nodes = spline(nodes) - k2 * eye
        a_mids = spline(mids) - k2 * eye
        h = nodes[1] - nodes[0]
        phi, dphi = _rk4_sweep(phi, dphi, a_nodes, a_mids, h)
        r_here = b
    if abs(r_here - r1) > 1e-12:
        raise ArithmeticError("integration did not reach the matching radius")

    y = dphi @ np.linalg.inv(phi)
    f_out = np.zeros((n, n), dtype=complex)
    df_out = np.zeros((n, n), dtype=complex)
    f_in = np.zeros((n, n), dtype=complex)
    df_in = np.zeros((n, n), dtype=complex)
    for i, l in enumerate(l_per_channel):
        (fo, dfo), (fi, dfi) = _reference_pair(l, k, r1)
        f_out[i, i], df_out[i, i] = fo, dfo
        f_in[i, i], df_in[i, i] = fi, dfi
    s = np.linalg.solve(y @ f_out - df_out, y @ f_in - df_in)
    d1, d2, eps = eigenphase_decomposition(s) if n == 2 else (float("nan"),) * 3
    if n == 1:
        d1, d2, eps = 0.5 * cmath.phase(s[0, 0]), 0.0, 0.0
    return SMatrixValue(float(k), s, (d1, d2), eps)
