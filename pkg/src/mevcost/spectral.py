"""Graphs over S_n, Laplacian spectra and the graph Fourier transform.

Vertex ``i`` is the permutation of lexicographic rank ``i``; a graph signal
is the vector ``f_i = f(pi_i(x))`` (see :func:`mevcost.cost.orbit_values`).
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import permgroup
from .cost import BOUND_ATOL, BoundCertificate, certify

SPECTRAL_CAP = 7
CLUSTER_RTOL = 1e-10
ORTHO_TOL = 1e-8
RESIDUAL_TOL = 1e-7
DEPENDENCE_TOL = 1e-8


class DisconnectedGraph(ValueError):
    pass


class SpectrumError(RuntimeError):
    pass


def _check_spectral_degree(n: int, allow_n8: bool) -> None:
    cap = 8 if allow_n8 else SPECTRAL_CAP
    if not 1 <= n <= cap:
        raise permgroup.DegreeOutOfRange(
            f"degree {n} outside 1..{cap} for spectral work" + ("" if allow_n8 else " (pass allow_n8 for n=8)"))
    if n == 8:
        warnings.warn("n=8 needs a dense 40320x40320 eigensolve (~13 GB per matrix)", ResourceWarning)


@dataclass(frozen=True, eq=False)
class PermutationGraph:
    n: int
    kind: str
    _edges: np.ndarray | None = field(default=None, repr=False)

    @property
    def num_vertices(self) -> int:
        return math.factorial(self.n)

    @cached_property
    def edges(self) -> np.ndarray:
        """Sorted ``(m, 2)`` array of ``i < j`` vertex pairs."""
        if self._edges is not None:
            return self._edges
        N = self.num_vertices
        i, j = np.triu_indices(N, k=1)
        return np.column_stack([i, j]).astype(np.int64)

    @property
    def num_edges(self) -> int:
        if self.kind == "complete":
            N = self.num_vertices
            return N * (N - 1) // 2
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        N = self.num_vertices
        if self.kind == "complete":
            return np.full(N, N - 1, dtype=np.int64)
        return np.bincount(self.edges.ravel(), minlength=N).astype(np.int64)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        N = self.num_vertices
        e = self.edges
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sp.csr_matrix((data, (rows, cols)), shape=(N, N))

    def bfs_distances(self, source: int) -> np.ndarray:
        N = self.num_vertices
        dist = np.full(N, -1, dtype=np.int64)
        dist[source] = 0
        if self.kind == "complete":
            dist[:] = 1
            dist[source] = 0
            return dist
        indptr, indices = self.adjacency.indptr, self.adjacency.indices
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in indices[indptr[v]:indptr[v + 1]]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    @property
    def is_connected(self) -> bool:
        return bool(np.all(self.bfs_distances(0) >= 0))

    @cached_property
    def diameter(self) -> int:
        if self.num_vertices == 1:
            return 0
        # Cayley graphs are vertex transitive: one source suffices
        sources = [0] if self.kind in ("complete", "transposition") else range(self.num_vertices)
        best = 0
        for s in sources:
            d = self.bfs_distances(s)
            if np.any(d < 0):
                raise DisconnectedGraph("graph is not connected")
            best = max(best, int(d.max()))
        return best

    def laplacian_matvec(self, M: np.ndarray) -> np.ndarray:
        """``L @ M`` without forming ``L`` densely."""
        if self.kind == "complete":
            N = self.num_vertices
            return N * M - np.sum(M, axis=0, keepdims=True)
        deg = self.degrees.astype(float)
        D = deg[:, None] if M.ndim == 2 else deg
        return D * M - self.adjacency @ M

    def edge_list_text(self) -> str:
        return "".join(f"{i} {j}\n" for i, j in self.edges)


def _transposition_edges(n: int) -> np.ndarray:
    perms = permgroup.enumerate_group(n)
    index = {pi.mapping: r for r, pi in enumerate(perms)}
    out = []
    for r, pi in enumerate(perms):
        m = list(pi.mapping)
        for a in range(n):
            for b in range(a + 1, n):
                m[a], m[b] = m[b], m[a]
                s = index[tuple(m)]
                m[a], m[b] = m[b], m[a]
                if r < s:
                    out.append((r, s))
    out.sort()
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def build_graph(n: int, kind: str = "transposition", custom_edges: Iterable[Sequence[int]] | None = None,
                allow_n8: bool = False) -> PermutationGraph:
    _check_spectral_degree(n, allow_n8)
    if kind == "complete":
        g = PermutationGraph(n, "complete")
    elif kind == "transposition":
        e = _transposition_edges(n)
        expected = math.factorial(n) * math.comb(n, 2) // 2
        if len(e) != expected:
            raise AssertionError(f"transposition graph has {len(e)} edges, expected {expected}")
        g = PermutationGraph(n, "transposition", e)
    elif kind == "custom":
        N = math.factorial(n)
        pairs = set()
        for i, j in custom_edges or ():
            i, j = int(i), int(j)
            if not (0 <= i < N and 0 <= j < N) or i == j:
                raise ValueError(f"invalid edge ({i}, {j}) for {N} vertices")
            pairs.add((min(i, j), max(i, j)))
        e = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        g = PermutationGraph(n, "custom", e)
        if N > 1 and not g.is_connected:
            raise DisconnectedGraph("custom permutation graph must be connected")
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    return g


def read_edge_file(path) -> list[tuple[int, int]]:
    edges = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                a, b = line.split()
                edges.append((int(a), int(b)))
    return edges


def diameter(g: PermutationGraph) -> int:
    return g.diameter


def laplacian(g: PermutationGraph) -> np.ndarray:
    N = g.num_vertices
    if g.kind == "complete":
        L = -np.ones((N, N))
        L[np.diag_indices(N)] = N - 1
        return L
    L = np.zeros((N, N))
    e = g.edges
    L[e[:, 0], e[:, 1]] = -1.0
    L[e[:, 1], e[:, 0]] = -1.0
    L[np.diag_indices(N)] = g.degrees
    return L


# -- spectrum ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    graph: PermutationGraph
    multiplicities: tuple[int, ...]
    provenance: dict = field(default_factory=dict)

    @property
    def is_degenerate(self) -> bool:
        return any(m > 1 for m in self.multiplicities)

    @property
    def lambda_2(self) -> float:
        return float(self.eigenvalues[1]) if len(self.eigenvalues) > 1 else 0.0

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    def vector_inf_norms(self) -> np.ndarray:
        return np.abs(self.eigenvectors).max(axis=0)

    def to_dict(self) -> dict:
        return {
            "n": self.graph.n,
            "graph": self.graph.kind,
            "eigenvalues": self.eigenvalues.tolist(),
            "multiplicities": list(self.multiplicities),
            "coherence": coherence(self),
            "basis_dependent": self.is_degenerate,
            "vector_inf_norms": self.vector_inf_norms().tolist(),
            "provenance": self.provenance,
        }


def _clusters(w: np.ndarray) -> list[np.ndarray]:
    tol = CLUSTER_RTOL * max(1.0, float(np.abs(w).max()))
    groups, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > tol:
            groups.append(np.arange(start, k))
            start = k
    return groups


def _ordered_basis(Q: np.ndarray) -> np.ndarray:
    """Orthonormalize the projections ``Q Q^T e_j`` in index order, dropping dependent ones.

    Works in eigenspace coordinates, where the projection of ``e_j`` is row
    ``j`` of ``Q``.  Returns the ``m x m`` coefficient matrix.
    """
    m = Q.shape[1]
    if m == 1:
        return np.ones((1, 1))
    A = Q[:m, :].T
    Qa, Ra = np.linalg.qr(A)
    d = np.diag(Ra)
    if np.all(np.abs(d) > DEPENDENCE_TOL):
        return Qa * np.sign(d)
    basis: list[np.ndarray] = []
    for j in range(Q.shape[0]):
        r = Q[j].copy()
        if basis:
            B = np.array(basis)
            r -= B.T @ (B @ r)
            r -= B.T @ (B @ r)
        nr = np.linalg.norm(r)
        if nr > DEPENDENCE_TOL:
            basis.append(r / nr)
            if len(basis) == m:
                break
    if len(basis) != m:
        raise SpectrumError(f"could not span eigenspace of dimension {m}")
    return np.array(basis).T


def decompose(g: PermutationGraph) -> Spectrum:
    """Full eigendecomposition with a reproducible basis inside degenerate eigenspaces."""
    N = g.num_vertices
    if N == 1:
        return Spectrum(np.zeros(1), np.ones((1, 1)), g, (1,), {"solver": "trivial"})
    L = laplacian(g)
    w, V = np.linalg.eigh(L)
    del L
    groups = _clusters(w)
    U = np.empty_like(V)
    lam = np.empty_like(w)
    for idx in groups:
        Q = V[:, idx]
        U[:, idx] = Q @ _ordered_basis(Q)
        lam[idx] = w[idx].mean()
    del V
    first = np.argmax(np.abs(U) > 1e-10, axis=0)
    signs = np.sign(U[first, np.arange(N)])
    U *= signs
    ortho = float(np.abs(U.T @ U - np.eye(N)).max())
    resid = float(np.abs(g.laplacian_matvec(U) - U * lam).max())
    if ortho > ORTHO_TOL or resid > RESIDUAL_TOL or abs(lam[0]) > 1e-8:
        raise SpectrumError(f"eigendecomposition failed checks: orthogonality {ortho:.3e}, "
                            f"residual {resid:.3e}, lambda_1 {lam[0]:.3e}")
    trace_gap = abs(math.fsum(lam) - float(g.degrees.sum()))
    return Spectrum(lam, U, g, tuple(len(ix) for ix in groups),
                    {"solver": "numpy.linalg.eigh", "orthogonality_error": ortho, "residual": resid,
                     "trace_gap": trace_gap, "basis": "ordered projection of standard basis"})


def coherence(spectrum: Spectrum) -> float:
    return float(np.abs(spectrum.eigenvectors).max())


def coherence_bounds(n: int) -> tuple[float, float]:
    N = math.factorial(n)
    if N == 1:
        return 1.0, 1.0
    return 1 / math.sqrt(N), math.sqrt(1 - 1 / N)


# -- signals -----------------------------------------------------------------------

def parity_eigenvector(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("parity signal needs n >= 2")
    return np.array([1.0 if permgroup.parity(pi) == 0 else -1.0 for pi in permgroup.enumerate_group(n)])


def _as_signal(signal) -> np.ndarray:
    f = np.asarray(signal, dtype=float)
    if f.ndim != 1:
        raise ValueError("graph signal must be one-dimensional")
    return f


def smoothness_CG(signal, g: PermutationGraph) -> float:
    """Sum of squared differences across edges."""
    f = _as_signal(signal)
    if len(f) != g.num_vertices:
        raise ValueError(f"signal length {len(f)} != {g.num_vertices} vertices")
    if g.kind == "complete":
        return float(len(f) * np.dot(f, f) - f.sum() ** 2)
    e = g.edges
    diff = f[e[:, 0]] - f[e[:, 1]]
    return float(np.dot(diff, diff))


def fourier(signal, spectrum: Spectrum) -> np.ndarray:
    f = _as_signal(signal)
    if len(f) != spectrum.eigenvectors.shape[0]:
        raise ValueError(f"signal length {len(f)} does not match spectrum size {spectrum.eigenvectors.shape[0]}")
    return spectrum.eigenvectors.T @ f


def inverse_fourier(coeffs, spectrum: Spectrum) -> np.ndarray:
    c = _as_signal(coeffs)
    if len(c) != spectrum.eigenvectors.shape[1]:
        raise ValueError("coefficient length does not match spectrum size")
    return spectrum.eigenvectors @ c


def standing_shift(signal) -> float:
    """Offset making the largest payoff at least the largest loss (0 when already true)."""
    f = _as_signal(signal)
    hi, lo = float(f.max()), float(f.min())
    return 0.0 if hi >= -lo else -(hi + lo) / 2


def cost_from_signal(signal) -> float:
    """Cost via ``||f||_inf - mean(f)``, translating first when needed."""
    f = _as_signal(signal)
    f = f + standing_shift(f)
    return float(np.abs(f).max() - math.fsum(f) / len(f))


def fourier_bounds(signal, spectrum: Spectrum, tol: float = BOUND_ATOL) -> tuple[BoundCertificate, BoundCertificate]:
    """Lower and upper bounds on the cost from the Fourier coefficients."""
    f = _as_signal(signal)
    shift = standing_shift(f)
    f = f + shift
    N = len(f)
    fh = fourier(f, spectrum)
    c = cost_from_signal(f)
    root = math.sqrt(N)
    mu = coherence(spectrum)
    lower = (float(np.linalg.norm(fh)) - fh[0]) / root
    upper = mu * float(np.abs(fh).sum()) - fh[0] / root
    high_freq = float(np.linalg.norm(fh[1:])) if N > 1 else 0.0
    return (certify("fourier_lower", lower, c, tol, shift=shift, high_frequency_norm=high_freq),
            certify("fourier_upper", c, upper, tol, shift=shift, coherence=mu))


def path_bound(signal, g: PermutationGraph, tol: float = BOUND_ATOL) -> list[BoundCertificate]:
    f = _as_signal(signal)
    gap = float(f.max() - f.min())
    if g.kind == "complete" or g.num_vertices == 1:
        edge_gap = gap
    else:
        e = g.edges
        edge_gap = float(np.abs(f[e[:, 0]] - f[e[:, 1]]).max())
    certs = [certify("path", gap, g.diameter * edge_gap, tol, diameter=g.diameter, max_edge_gap=edge_gap)]
    if g.kind == "transposition":
        certs.append(certify("transposition_path", gap, (g.n - 1) * edge_gap, tol, max_edge_gap=edge_gap))
    certs.append(certify("cost_by_gap", cost_from_signal(f), gap, tol))
    return certs


def centered_standing_assumption(signal) -> bool:
    """Whether ``f - mean(f)`` has its largest gain at least its largest loss."""
    f = _as_signal(signal)
    m = math.fsum(f) / len(f)
    return bool(f.max() - m >= m - f.min())


def cg_sandwich(signal, spectrum: Spectrum, tol: float = BOUND_ATOL) -> list[BoundCertificate]:
    """Two-sided relation between the cost and the edge smoothness ``C_G``.

    Certificates: eigenvalue lower bound, ``lambda_2`` upper bound, the
    diameter-only upper bound, the ``lambda_2`` diameter bound it rests on,
    and for transposition graphs the same pair with closed-form constants.

    The lower bound needs the mean-centred signal to gain at least as much
    as it loses (``max - mean >= mean - min``).  Signals skewed the other
    way can violate it (one negative spike: cost ``1/N`` against a bound
    near ``1/sqrt(N)``), so for them the certificate is issued for
    ``max(C(f), C(-f))`` instead and marked ``lower_symmetric``.
    """
    g = spectrum.graph
    f = _as_signal(signal)
    N = len(f)
    shift = 0.0 if f.sum() >= 0 else -float(f.mean())
    f = f + shift
    c = cost_from_signal(f)
    cg = max(smoothness_CG(f, g), 0.0)
    if N == 1:
        return [certify("cg_sandwich", c, 0.0, tol, side="trivial")]
    lam2, lamN, diam = spectrum.lambda_2, spectrum.lambda_max, g.diameter
    if centered_standing_assumption(f):
        lower_side, c_lower = "lower", c
    else:
        lower_side, c_lower = "lower_symmetric", max(c, cost_from_signal(-f))
    certs = [
        certify("cg_sandwich", math.sqrt(cg / (lamN * N)), c_lower, tol, side=lower_side, shift=shift),
        certify("cg_sandwich", c, math.sqrt(cg / lam2), tol, side="upper", shift=shift),
        certify("cg_sandwich", c, math.sqrt(diam * N) / 2 * math.sqrt(cg), tol, side="mohar_upper"),
        certify("cg_sandwich", 4 / (diam * N), lam2, tol, side="mohar_lambda2"),
    ]
    if g.kind == "transposition":
        n = g.n
        certs.append(certify("cg_sandwich", math.sqrt(cg / (n * (n - 1) * N)), c_lower, tol,
                             side="transposition_" + lower_side))
        certs.append(certify("cg_sandwich", c, math.sqrt((n - 1) * N) / 2 * math.sqrt(cg), tol,
                             side="transposition_upper"))
    return certs
