"""Fixed-particle-number Fock space and exact diagonalisation of the full model."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ..errors import ConsistencyError, DomainError, NumericError, SizeError
from ..model import ModelParams
from .lattice import LatticeGraph, complete_bipartite

MAX_DIM = 2_000_000
DENSE_DIM = 1500
SEED = 20240521              # fixed Lanczos start vector, for reproducibility


def _count_states(n_sites: int, n: int, cap: int) -> int:
    # ways[m] = number of occupation vectors on the sites seen so far with m particles
    ways = [1] + [0] * n
    for _ in range(n_sites):
        new = [0] * (n + 1)
        for m, w in enumerate(ways):
            if w:
                for k in range(0, min(cap, n - m) + 1):
                    new[m + k] += w
        ways = new
    return ways[n]


class FockBasis:
    """All occupation vectors with ``sum(n) = N`` and ``n_i <= cap``.

    States are encoded as integers in base ``cap + 1`` and kept sorted, so a
    lookup is a binary search on the codes.
    """

    def __init__(self, n_sites: int, n_particles: int, cap: int):
        cap = min(cap, n_particles)
        dim = _count_states(n_sites, n_particles, cap)
        if dim > MAX_DIM:
            raise SizeError(f"Hilbert space dimension {dim} exceeds {MAX_DIM}")
        if (cap + 1) ** n_sites >= 2**62:
            raise SizeError("occupation codes would overflow 64-bit integers")
        self.n_sites, self.n_particles, self.cap = n_sites, n_particles, cap
        self.base = cap + 1
        self.weights = self.base ** np.arange(n_sites, dtype=np.int64)
        states = np.array(list(self._generate(n_sites, n_particles, cap)), dtype=np.int64)
        states = states.reshape(-1, n_sites)
        codes = states @ self.weights
        order = np.argsort(codes)
        self.states = states[order]
        self.codes = codes[order]

    @staticmethod
    def _generate(n_sites, n, cap):
        if n_sites == 1:
            if n <= cap:
                yield (n,)
            return
        for k in range(min(cap, n), -1, -1):
            for rest in FockBasis._generate(n_sites - 1, n - k, cap):
                yield (k,) + rest

    @property
    def dim(self) -> int:
        return len(self.codes)

    def index(self, occupations) -> np.ndarray:
        """Indices of the given occupation vectors; -1 where absent."""
        occ = np.atleast_2d(np.asarray(occupations, dtype=np.int64))
        codes = occ @ self.weights
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, self.dim - 1)
        ok = (self.codes[pos] == codes) & np.all((occ >= 0) & (occ <= self.cap), axis=1)
        return np.where(ok, pos, -1)

    def hop(self, to: int, frm: int) -> sp.csr_matrix:
        """Matrix of ``b_to^dag b_from`` restricted to this basis."""
        s = self.states
        src = np.nonzero((s[:, frm] > 0) & (s[:, to] < self.cap))[0]
        new = s[src].copy()
        amp = np.sqrt((new[:, to] + 1.0) * new[:, frm])
        new[:, to] += 1
        new[:, frm] -= 1
        dst = self.index(new)
        keep = dst >= 0
        return sp.csr_matrix((amp[keep], (dst[keep], src[keep])), shape=(self.dim, self.dim))

    def imbalance(self, parity) -> np.ndarray:
        sign = np.where(np.asarray(parity) == 0, 1, -1)
        return self.states @ sign

    def onsite(self) -> np.ndarray:
        s = self.states
        return np.sum(s * (s - 1), axis=1)


def hopping_generators(basis: FockBasis, graph: LatticeGraph):
    """``(T_e, T_o)`` with ``T_e = 2^-1/2 sum_<ij> b_i^dag b_j``, i even, j odd."""
    t_e = sp.csr_matrix((basis.dim, basis.dim))
    for i, j in graph.edges:
        t_e = t_e + basis.hop(i, j)
    t_e = t_e / math.sqrt(2.0)
    return t_e.tocsr(), t_e.T.tocsr()


def hamiltonian(basis: FockBasis, graph: LatticeGraph, params: ModelParams) -> sp.csr_matrix:
    theta = basis.imbalance(graph.parity).astype(float)
    diag = 0.5 * params.u_s * basis.onsite() - params.u_l * theta**2 / graph.n_sites
    h = sp.diags(diag).tocsr()
    if params.j:
        t_e, t_o = hopping_generators(basis, graph)
        h = h - math.sqrt(2.0) * params.j * (t_e + t_o)
    return h.tocsr()


@dataclass(frozen=True)
class EDResult:
    energy: float
    state: np.ndarray
    basis: FockBasis
    occupation_cap: int


def exact_diagonalize(graph: LatticeGraph, params: ModelParams,
                      occupation_cap: int | None = None) -> EDResult:
    """Ground state of the full lattice Hamiltonian at fixed particle number.

    ``occupation_cap=None`` keeps every occupation up to ``N``.
    """
    if graph.n_sites != params.k_sites:
        raise DomainError("graph size and k_sites differ")
    n = params.n_particles
    cap = n if occupation_cap is None else occupation_cap
    basis = FockBasis(graph.n_sites, n, cap)
    h = hamiltonian(basis, graph, params)
    if params.j == 0.0:
        # diagonal; Krylov methods can stall on its huge degeneracies
        diag = h.diagonal()
        i0 = int(np.argmin(diag))
        psi = np.zeros(basis.dim)
        psi[i0] = 1.0
        return EDResult(float(diag[i0]), psi, basis, cap)
    if basis.dim <= DENSE_DIM:
        w, v = np.linalg.eigh(h.toarray())
        e0, psi = float(w[0]), v[:, 0]
    else:
        v0 = np.random.default_rng(SEED).standard_normal(basis.dim)
        try:
            w, v = eigsh(h, k=1, which="SA", v0=v0, tol=1e-13, maxiter=20 * basis.dim)
        except ArpackNoConvergence as exc:
            raise NumericError("Lanczos did not converge", dimension=basis.dim,
                               converged=len(exc.eigenvalues)) from exc
        e0, psi = float(w[0]), v[:, 0]
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    return EDResult(e0, psi, basis, cap)


def distorted_q_states(basis: FockBasis, graph: LatticeGraph) -> dict[int, np.ndarray]:
    """Normalised uniform superpositions ``|Q>`` of the doubly/empty site lists.

    For ``Q > 0``, ``Q/2`` even sites are doubly occupied and ``Q/2`` odd sites
    are empty; ``Q < 0`` swaps the roles of the sub-lattices.
    """
    if basis.cap < 2 or basis.n_particles != basis.n_sites:
        raise DomainError("imbalance states need unit filling and cap >= 2")
    even, odd = graph.even_sites, graph.odd_sites
    half = graph.n_sites // 2
    states = {}
    for q in range(-graph.n_sites, graph.n_sites + 1, 2):
        m = abs(q) // 2
        doubles, holes = (even, odd) if q >= 0 else (odd, even)
        occs = []
        for ce in itertools.combinations(doubles, m):
            for co in itertools.combinations(holes, m):
                occ = [1] * graph.n_sites
                for i in ce:
                    occ[i] = 2
                for i in co:
                    occ[i] = 0
                occs.append(occ)
        idx = basis.index(occs)
        vec = np.zeros(basis.dim)
        vec[idx] = 1.0
        states[q] = vec / math.sqrt(math.comb(half, m) ** 2)
    return states


def projected_hamiltonian(graph: LatticeGraph, params: ModelParams) -> np.ndarray:
    """``<Q'|H|Q>`` in the all-to-all imbalance basis, with the true lattice H."""
    basis = FockBasis(graph.n_sites, graph.n_sites, graph.n_sites)
    h = hamiltonian(basis, graph, params)
    qs = distorted_q_states(basis, graph)
    vecs = np.column_stack([qs[q] for q in sorted(qs)])
    return vecs.T @ (h @ vecs)


@dataclass(frozen=True)
class MatrixElementReport:
    k_sites: int
    elements: dict[int, float]            # Q -> <Q+2|b_i^dag b_j|Q>, common value
    element_max_error: float
    commutator_even: float                # max |[Theta, T_e] - 2 T_e|
    commutator_odd: float                 # max |[Theta, T_o] + 2 T_o|
    projected_commutator_even: float      # same identity for P T_e P
    ladder_mismatch: float                # max |P[T_e, T_o]P - [PT_eP, PT_oP]|
    triple_occupation_reachable: bool


def _max_abs(m) -> float:
    m = sp.csr_matrix(m)
    return float(np.max(np.abs(m.data))) if m.nnz else 0.0


def matrix_element_check(k_sites: int, tol: float = 1e-12) -> MatrixElementReport:
    """Check the all-to-all hopping matrix element and the ladder algebra.

    (i) ``|Q>`` is built by repeatedly applying the projected generator to
    ``|MI>`` on the complete bipartite graph; every single-pair element
    ``<Q+2|b_i^dag b_j|Q>`` must equal ``sqrt(2)(K-Q)(Q+2)/K^2``.
    (ii) ``[Theta, T_e] = 2 T_e`` and ``[Theta, T_o] = -2 T_o`` on the full
    fixed-N space.
    """
    if k_sites > 10:
        raise SizeError("matrix_element_check is limited to k_sites <= 10")
    graph = complete_bipartite(k_sites)
    k = k_sites

    # (i) state vectors generated by the projected hopping operator
    small = FockBasis(k, k, 2)
    t_e_small, _ = hopping_generators(small, graph)
    mi = small.index([[1] * k])[0]
    vec = np.zeros(small.dim)
    vec[mi] = 1.0
    q_states = {0: vec}
    for q in range(2, k + 1, 2):
        vec = t_e_small @ vec
        q_states[q] = vec / np.linalg.norm(vec)
    elements, worst = {}, 0.0
    for q in range(0, k, 2):
        expected = math.sqrt(2.0) * (k - q) * (q + 2) / k**2
        vals = [q_states[q + 2] @ (small.hop(i, j) @ q_states[q])
                for i in graph.even_sites for j in graph.odd_sites]
        elements[q] = float(vals[0])
        worst = max(worst, max(abs(v - expected) for v in vals))

    # (ii) unprojected operators on the full fixed-N space
    full = FockBasis(k, k, k)
    t_e, t_o = hopping_generators(full, graph)
    theta = sp.diags(full.imbalance(graph.parity).astype(float)).tocsr()
    c_even = _max_abs(theta @ t_e - t_e @ theta - 2 * t_e)
    c_odd = _max_abs(theta @ t_o - t_o @ theta + 2 * t_o)

    keep = np.nonzero(np.all(full.states <= 2, axis=1))[0]
    proj = sp.csr_matrix((np.ones(len(keep)), (np.arange(len(keep)), keep)),
                         shape=(len(keep), full.dim))
    pe = proj @ t_e @ proj.T
    po = proj @ t_o @ proj.T
    theta_p = proj @ theta @ proj.T
    c_proj = _max_abs(theta_p @ pe - pe @ theta_p - 2 * pe)
    ladder = _max_abs(proj @ (t_e @ t_o - t_o @ t_e) @ proj.T - (pe @ po - po @ pe))
    reachable = bool(np.any(full.states > 2))

    report = MatrixElementReport(k, elements, worst, c_even, c_odd, c_proj, ladder, reachable)
    if worst > tol or c_even > tol or c_odd > tol:
        raise ConsistencyError("hopping matrix element or ladder algebra violated",
                               report=report)
    return report
