"""Transformation matrices, chains, and their generalized Wronskian blocks.

A chain link is an n x n matrix solution U of the coupled equation
H0 U = U * lam with a scalar spectral value lam.  Singular links act on the
leading m x m subsystem only and carry the block structure

    U = [[active, 0], [0, I]],

so the first-order operator they generate has a non-invertible coefficient
before the derivative (the partial-differentiation operator D_m, which
differentiates only the first m vector components).

The closure of an N-link chain is evaluated through three block matrices:
the nN x nN generalized Wronskian W, the (nN+1) x (nN+1) bordered matrix
used to transform a vector, and the row-replaced matrices whose determinant
ratios give the accumulated superpotential.  The block of W in block-row j
and block-column k carries the operator

    D_m^(j-1)            for a singular column with j <= k,
    d^(j-1)              for a singular column with j > k,
    D_m^(j-1)            for a regular column with j <= M+1,
    d^(j-M-1) D_m^M      for a regular column with j > M+1,

where d is the full derivative and M counts the singular links (which must
all precede the regular ones).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import ChannelPotential, Constant, RadialFunction, FREE_CHANNEL
from . import detkit

__all__ = [
    "OperatorPower",
    "TransformationMatrix",
    "regular_link",
    "singular_link",
    "ChainSpec",
    "BlockAssembly",
    "apply_dm",
    "partial_m",
    "operator_schedule",
    "eval_block",
    "build_w",
    "build_w_psi",
    "build_w_replaced",
    "ChainWorkspace",
]


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorPower:
    """The composition d^partial o D_m^dm acting entrywise on matrix blocks.

    Acting on row i (1-based) of a matrix or vector, the entry is
    differentiated ``partial + dm`` times when i <= m and ``partial`` times
    otherwise, since D_m leaves rows beyond the subsystem untouched.
    """

    partial: int
    dm: int

    def order_for_row(self, i: int, m: int) -> int:
        return self.partial + (self.dm if i <= m else 0)

    def __str__(self) -> str:
        parts = []
        if self.partial:
            parts.append("d" if self.partial == 1 else f"d^{self.partial}")
        if self.dm:
            parts.append("Dm" if self.dm == 1 else f"Dm^{self.dm}")
        return "*".join(parts) if parts else "1"


IDENTITY_OP = OperatorPower(0, 0)


def apply_dm(values: np.ndarray, derivs: np.ndarray, m: int) -> np.ndarray:
    """Apply D_m once to sampled data: rows <= m become their derivatives.

    ``values`` and ``derivs`` hold a vector (n,) or matrix (n, n) and its
    entrywise first derivative at one radius.
    """
    v = np.asarray(values, dtype=complex)
    d = np.asarray(derivs, dtype=complex)
    if v.shape != d.shape:
        raise ValueError("value/derivative shapes differ")
    n = v.shape[0]
    if not (1 <= m <= n):
        raise ValueError(f"m={m} out of range for {n} components")
    out = v.copy()
    out[:m] = d[:m]
    return out


def partial_m(psi_value: complex, psi_deriv: complex, component: int, m: int) -> complex:
    """Scalar variant: differentiate component j only when j <= m."""
    return psi_deriv if component <= m else psi_value


# ---------------------------------------------------------------------------
# transformation matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformationMatrix:
    """Matrix solution generating one chain link.

    ``entries[i][j]`` is a RadialFunction; the link satisfies the coupled
    equation -U'' + V0 U = lam U entrywise for regular links, and on the
    active m x m block for singular links (the identity padding of a
    singular link is not itself a solution).
    """

    n: int
    entries: tuple
    spectral_value: complex
    kind: str  # "singular" | "regular"
    m: int | None = None

    def __post_init__(self):
        if self.kind not in ("singular", "regular"):
            raise ValueError("kind must be 'singular' or 'regular'")
        if len(self.entries) != self.n or any(len(row) != self.n for row in self.entries):
            raise ValueError("entries must form an n x n grid")
        if self.kind == "singular":
            if self.m is None or not (1 <= self.m <= self.n):
                raise ValueError("singular link needs a subsystem size 1 <= m <= n")

    def value(self, r: float) -> np.ndarray:
        return self.block(r, IDENTITY_OP, self.n)

    def block(self, r: float, op: OperatorPower, m: int) -> np.ndarray:
        """Evaluate op applied to this matrix at r (m fixes D_m's reach)."""
        out = np.empty((self.n, self.n), dtype=complex)
        for i in range(self.n):
            p = op.order_for_row(i + 1, m)
            row = self.entries[i]
            for j in range(self.n):
                out[i, j] = row[j].deriv(r, p)
        return out

    def row(self, i: int, r: float, op: OperatorPower, m: int) -> np.ndarray:
        """Scalar row i (1-based) of op applied to this matrix at r."""
        p = op.order_for_row(i, m)
        return np.array([f.deriv(r, p) for f in self.entries[i - 1]], dtype=complex)

    def jet(self, r: float, order: int) -> np.ndarray:
        """Taylor coefficients, shape (order+1, n, n)."""
        out = np.empty((order + 1, self.n, self.n), dtype=complex)
        for i in range(self.n):
            for j in range(self.n):
                out[:, i, j] = self.entries[i][j].taylor(r, order)
        return out

    def conjugate(self) -> "TransformationMatrix":
        rows = tuple(tuple(f.conjugate() for f in row) for row in self.entries)
        return TransformationMatrix(self.n, rows, complex(self.spectral_value).conjugate(),
                                    self.kind, self.m)

    def eigen_residual(self, r: float, v0: list[ChannelPotential]) -> float:
        """Relative residual of -U'' + V0 U = lam U at r.

        Singular links are checked on the active block only; their identity
        padding does not solve the equation (it is constant by design).
        """
        rng = range(self.m) if self.kind == "singular" else range(self.n)
        worst = 0.0
        for i in rng:
            v = v0[i].value(r)
            for j in rng:
                f = self.entries[i][j]
                lhs = -f.deriv(r, 2) + v * f.deriv(r, 0)
                rhs = self.spectral_value * f.deriv(r, 0)
                scale = abs(lhs) + abs(rhs) + 1e-300
                worst = max(worst, abs(lhs - rhs) / scale)
        return worst


def regular_link(entries, spectral_value: complex) -> TransformationMatrix:
    rows = tuple(tuple(row) for row in entries)
    return TransformationMatrix(len(rows), rows, complex(spectral_value), "regular")


def singular_link(active, n: int, spectral_value: complex) -> TransformationMatrix:
    """Singular link: m x m active block, identity elsewhere."""
    active = [list(row) for row in active]
    m = len(active)
    if any(len(row) != m for row in active) or not (1 <= m <= n):
        raise ValueError("active block must be square with 1 <= m <= n")
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i < m and j < m:
                row.append(active[i][j])
            else:
                row.append(Constant(1.0 if i == j else 0.0))
        rows.append(tuple(row))
    return TransformationMatrix(n, tuple(rows), complex(spectral_value), "singular", m)


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainSpec:
    """Ordered chain of M singular then N-M regular links over a background V0.

    Spectral values must be pairwise distinct and every singular link must
    share the subsystem size ``m``.  Interleaving regular links before
    singular ones is rejected: the closure formulas require the singular
    transformations first.
    """

    n: int
    m: int
    links: tuple
    v0: tuple

    def __post_init__(self):
        if self.n < 1 or not (1 <= self.m <= self.n):
            raise ValueError("need n >= 1 and 1 <= m <= n")
        if len(self.v0) != self.n:
            raise ValueError("V0 must list one channel potential per channel")
        seen_regular = False
        lams = []
        for link in self.links:
            if link.n != self.n:
                raise ValueError("link dimension differs from chain dimension")
            if link.kind == "singular":
                if seen_regular:
                    raise ValueError("singular links must precede regular links")
                if link.m != self.m:
                    raise ValueError("singular links must share the chain subsystem size")
            else:
                seen_regular = True
            lams.append(complex(link.spectral_value))
        for a in range(len(lams)):
            for b in range(a + 1, len(lams)):
                if abs(lams[a] - lams[b]) <= 1e-12 * (1.0 + abs(lams[a])):
                    raise ValueError("spectral values must be pairwise distinct")

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def n_singular(self) -> int:
        return sum(1 for link in self.links if link.kind == "singular")

    def v0_matrix(self, r: float) -> np.ndarray:
        return np.diag([ch.value(r) for ch in self.v0])

    def conjugate(self) -> "ChainSpec":
        return ChainSpec(self.n, self.m, tuple(l.conjugate() for l in self.links), self.v0)


def chain(n: int, m: int, links, v0=None) -> ChainSpec:
    if v0 is None:
        v0 = [FREE_CHANNEL] * n
    return ChainSpec(n, m, tuple(links), tuple(v0))


# ---------------------------------------------------------------------------
# block assemblies
# ---------------------------------------------------------------------------

@dataclass
class BlockAssembly:
    """A realized block matrix plus the operator grid that produced it."""

    matrix: np.ndarray
    ops: list  # provenance: one descriptor string per block row/column

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def slogdet(self) -> detkit.SignedLogDet:
        return detkit.slogdet(self.matrix)

    def det(self) -> complex:
        return self.slogdet().value


def operator_schedule(j: int, k: int, chain: ChainSpec) -> OperatorPower:
    """Operator of block row j, block column k (1-based).

    Column k = N+1 addresses the bordered vector column, which follows the
    regular-column pattern.
    """
    N = chain.n_links
    M = chain.n_singular
    if not (1 <= j <= N):
        raise ValueError(f"block row {j} out of range")
    if not (1 <= k <= N + 1):
        raise ValueError(f"block column {k} out of range")
    if k <= M:
        return OperatorPower(0, j - 1) if j <= k else OperatorPower(j - 1, 0)
    if j <= M + 1:
        return OperatorPower(0, j - 1)
    return OperatorPower(j - M - 1, M)


def bottom_row_schedule(k: int, chain: ChainSpec, extra: int = 0) -> OperatorPower:
    """Operator of the appended scalar row under block column k.

    Singular columns carry d^N; regular columns and the vector corner
    (k = N+1) carry d^(N-M) D_m^M.  On the column blocks this equals one
    full derivative applied to the last block row of W; at the corner the
    literal form matters when every link is singular.  ``extra`` adds
    further full derivatives (the determinant-derivative rule needs the
    once-more-differentiated row).
    """
    N = chain.n_links
    M = chain.n_singular
    if not (1 <= k <= N + 1):
        raise ValueError(f"block column {k} out of range")
    if k <= M:
        return OperatorPower(N + extra, 0)
    return OperatorPower(N - M + extra, M)


def eval_block(u: TransformationMatrix, op: OperatorPower, r: float,
               m: int | None = None) -> np.ndarray:
    """Operator applied entrywise to a transformation matrix at radius r."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return u.block(r, op, u.m if m is None else m)


def _psi_column(psi, r: float, op: OperatorPower, m: int) -> np.ndarray:
    return np.array([psi[i].deriv(r, op.order_for_row(i + 1, m)) for i in range(len(psi))],
                    dtype=complex)


def build_w(chain: ChainSpec, r: float) -> BlockAssembly:
    """The nN x nN generalized Wronskian of the chain at radius r."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    N = chain.n_links
    n = chain.n
    m = chain.m
    w = np.empty((n * N, n * N), dtype=complex)
    ops = []
    for j in range(1, N + 1):
        row_ops = []
        for k in range(1, N + 1):
            op = operator_schedule(j, k, chain)
            w[(j - 1) * n:j * n, (k - 1) * n:k * n] = chain.links[k - 1].block(r, op, m)
            row_ops.append(str(op))
        ops.append(row_ops)
    return BlockAssembly(w, ops)


def build_w_psi(chain: ChainSpec, psi, j: int, r: float) -> BlockAssembly:
    """W bordered by the vector column of psi and the scalar row j.

    ``psi`` is a sequence of n RadialFunctions.  The added column follows
    the regular-column operator pattern; the added row applies one extra
    full derivative to the last block row, restricted to scalar row j; the
    corner holds d^(N-M) pm^M psi_j.
    """
    N = chain.n_links
    n = chain.n
    m = chain.m
    if not (1 <= j <= n):
        raise ValueError(f"component index {j} out of range")
    if len(psi) != n:
        raise ValueError("psi must supply one component per channel")
    base = build_w(chain, r)
    dim = n * N + 1
    w = np.empty((dim, dim), dtype=complex)
    w[:n * N, :n * N] = base.matrix
    for jj in range(1, N + 1):
        op = operator_schedule(jj, N + 1, chain)
        w[(jj - 1) * n:jj * n, -1] = _psi_column(psi, r, op, m)
    for k in range(1, N + 1):
        op = bottom_row_schedule(k, chain)
        w[-1, (k - 1) * n:k * n] = chain.links[k - 1].row(j, r, op, m)
    corner_op = bottom_row_schedule(N + 1, chain)
    w[-1, -1] = psi[j - 1].deriv(r, corner_op.order_for_row(j, m))
    ops = base.ops + [[f"row{j}:" + str(corner_op)]]
    return BlockAssembly(w, ops)


def build_w_replaced(chain: ChainSpec, i: int, j: int, r: float) -> BlockAssembly:
    """W with scalar row j of its last block row replaced.

    The replacement is scalar row i of the one-order-higher operator applied
    to the same column blocks; the ratio |W_(i,j)| / |W| is entry (i, j) of
    the accumulated superpotential.
    """
    n = chain.n
    N = chain.n_links
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError("row indices out of range")
    base = build_w(chain, r)
    w = base.matrix.copy()
    m = chain.m
    target = (N - 1) * n + (j - 1)
    for k in range(1, N + 1):
        op = bottom_row_schedule(k, chain)
        w[target, (k - 1) * n:k * n] = chain.links[k - 1].row(i, r, op, m)
    return BlockAssembly(w, base.ops)


# ---------------------------------------------------------------------------
# shared workspace for determinant ratios at one radius
# ---------------------------------------------------------------------------

class ChainWorkspace:
    """Caches the W blocks of one (chain, radius) pair.

    The bordered and row-replaced assemblies differ from W only in one row
    or column, so the superpotential, a transformed vector and the
    determinant-derivative rule can all share the same block evaluations.
    """

    def __init__(self, chain: ChainSpec, r: float):
        if r <= 0.0:
            raise ValueError("radius must be positive")
        self.chain = chain
        self.r = r
        n, N, m = chain.n, chain.n_links, chain.m
        self.n, self.N, self.m = n, N, m
        self.w = np.empty((n * N, n * N), dtype=complex)
        for j in range(1, N + 1):
            for k in range(1, N + 1):
                op = operator_schedule(j, k, chain)
                self.w[(j - 1) * n:j * n, (k - 1) * n:k * n] = \
                    chain.links[k - 1].block(r, op, m)
        # rows of the one- and two-orders-raised last block row, per column
        self._aug = None
        self._aug2 = None
        self._w_logdet = None

    def _bottom_rows(self, extra: int) -> np.ndarray:
        """(n, nN) array: the appended-row blocks, raised ``extra`` times."""
        n, N = self.n, self.N
        out = np.empty((n, n * N), dtype=complex)
        for k in range(1, N + 1):
            op = bottom_row_schedule(k, self.chain, extra)
            for i in range(1, n + 1):
                out[i - 1, (k - 1) * n:k * n] = self.chain.links[k - 1].row(i, self.r, op, self.m)
        return out

    @property
    def aug(self) -> np.ndarray:
        if self._aug is None:
            self._aug = self._bottom_rows(0)
        return self._aug

    @property
    def aug2(self) -> np.ndarray:
        if self._aug2 is None:
            self._aug2 = self._bottom_rows(1)
        return self._aug2

    def w_logdet(self) -> detkit.SignedLogDet:
        if self._w_logdet is None:
            self._w_logdet = detkit.slogdet(self.w)
        return self._w_logdet

    def replaced_logdet(self, i: int, j: int, source=None) -> detkit.SignedLogDet:
        """|W| with scalar row j of the last block row overwritten by row i
        of ``source`` (default: the appended-row blocks)."""
        rows = self.aug if source is None else source
        mat = self.w.copy()
        mat[(self.N - 1) * self.n + (j - 1), :] = rows[i - 1]
        return detkit.slogdet(mat)

    def psi_jets(self, psi, max_order: int) -> np.ndarray:
        return np.array([psi[i].jet(self.r, max_order) for i in range(self.n)])

    def bordered_logdet(self, psi_jets: np.ndarray, j: int, raised: bool = False
                        ) -> detkit.SignedLogDet:
        """Determinant of the psi-bordered assembly for component j.

        ``psi_jets[i][p]`` holds the p-th derivative of component i+1.  With
        ``raised`` the appended row (including the corner) is differentiated
        once more, which is the numerator of the derivative rule.
        """
        n, N, m = self.n, self.N, self.m
        dim = n * N + 1
        w = np.empty((dim, dim), dtype=complex)
        w[:n * N, :n * N] = self.w
        for jj in range(1, N + 1):
            op = operator_schedule(jj, N + 1, self.chain)
            for i in range(1, n + 1):
                w[(jj - 1) * n + i - 1, -1] = psi_jets[i - 1][op.order_for_row(i, m)]
        rows = self.aug2 if raised else self.aug
        w[-1, :n * N] = rows[j - 1]
        corner_op = bottom_row_schedule(N + 1, self.chain, 1 if raised else 0)
        w[-1, -1] = psi_jets[j - 1][corner_op.order_for_row(j, m)]
        return detkit.slogdet(w)
