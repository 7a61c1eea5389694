"""Variational tight-binding Hamiltonian in the space of imbalances.

The basis states ``|Q>`` have definite imbalance ``Q = -K, -K+2, ..., K``.
The on-site part is diagonal with ``eps_Q = U_s |Q| / 2 - U_l Q**2 / K`` and
hopping couples only neighbouring ``Q`` values, so the Hamiltonian is a
symmetric tridiagonal matrix of dimension ``K + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import DomainError, NumericError, UnsupportedFillingError
from .model import ModelParams

FIDELITY_STEP = 1e-4          # in units of U_s
FIDELITY_RTOL = 0.05          # step-halving agreement
OVERLAP_FLOOR = 1e-30


@dataclass(frozen=True)
class QHamiltonian:
    """Symmetric tridiagonal operator on the grid ``Q = -K, -K+2, ..., K``."""

    k_sites: int
    q_grid: np.ndarray
    diag: np.ndarray
    offdiag: np.ndarray
    alpha: float

    def dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.offdiag, 1)
                + np.diag(self.offdiag, -1))


def gamma_plus(q, k_sites: int, alpha: float):
    """Coupling ``<Q+2|H|Q>``."""
    q = np.asarray(q, dtype=float)
    a = np.abs(q)
    return -(alpha / (4.0 * k_sites)) * np.where(
        q >= 0, (k_sites - q) * (q + 2), (k_sites - a + 2) * a)


def gamma_minus(q, k_sites: int, alpha: float):
    """Coupling ``<Q-2|H|Q>``."""
    q = np.asarray(q, dtype=float)
    a = np.abs(q)
    return -(alpha / (4.0 * k_sites)) * np.where(
        q > 0, (k_sites - q + 2) * q, (k_sites - a) * (a + 2))


def onsite_energy(q, k_sites: int, u_s: float, u_l: float):
    """Diagonal element ``eps_Q = K f(Q/K)`` at unit filling."""
    q = np.asarray(q, dtype=float)
    return u_s * np.abs(q) / 2.0 - u_l * q * q / k_sites


def _tridiagonal(k_sites: int, u_s: float, u_l: float, alpha: float) -> QHamiltonian:
    q = np.arange(-k_sites, k_sites + 1, 2, dtype=float)
    diag = onsite_energy(q, k_sites, u_s, u_l)
    off = gamma_plus(q[:-1], k_sites, alpha)
    return QHamiltonian(k_sites, q, diag, off, alpha)


def build_hamiltonian(params: ModelParams) -> QHamiltonian:
    """Tridiagonal Hamiltonian for unit filling.

    The coupling between ``Q`` and ``Q+2`` is taken from ``gamma_plus(Q)``;
    it coincides with ``gamma_minus(Q+2)``.
    """
    if abs(params.rho - 1.0) > 1e-12:
        raise UnsupportedFillingError(
            f"the imbalance basis is built at unit filling, got rho={params.rho}")
    return _tridiagonal(params.k_sites, params.u_s, params.u_l, params.alpha)


@dataclass(frozen=True)
class Observables:
    theta_abs_mean: float
    gap_10: float
    gap_20: float
    entropy_vn: float
    fidelity_chi: float
    chi_flag: str = "ok"          # "ok", "inconsistent" or "discontinuity"
    chi_half_step: float = float("nan")


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest eigenvalues and the ground-state amplitudes ``psi_Q``."""

    energies: np.ndarray
    ground_amplitudes: np.ndarray
    degenerate: bool = False
    observables: Observables | None = field(default=None)


def _sectors(h: QHamiltonian):
    """Split ``h`` into reflection-even and reflection-odd tridiagonal blocks.

    Even block basis: ``|0>`` and ``(|Q> + |-Q>)/sqrt(2)`` for ``Q = 2..K``;
    odd block basis: ``(|Q> - |-Q>)/sqrt(2)`` for ``Q = 2..K``.
    """
    mid = h.k_sites // 2
    d = h.diag[mid:]
    e = h.offdiag[mid:].copy()
    e_even = e.copy()
    e_even[0] *= math.sqrt(2.0)
    return (d, e_even), (d[1:], e[1:])


def _lowest(d: np.ndarray, e: np.ndarray, m: int, vectors: bool, label: str):
    m = min(m, len(d))
    if len(d) == 1:
        w = d.copy()
        return (w, np.ones((1, 1))) if vectors else (w, None)
    try:
        if vectors:
            w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, m - 1))
            return w, v
        w = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, m - 1))
        return w, None
    except (LinAlgError, ValueError) as exc:
        raise NumericError(f"tridiagonal eigensolver failed in the {label} sector: {exc}",
                           sector=label, dimension=len(d), requested=m,
                           max_abs_offdiag=float(np.max(np.abs(e), initial=0.0))) from exc


def ground_state(h: QHamiltonian, m: int = 3) -> SpectrumResult:
    """Lowest ``m`` eigenvalues and the normalised ground-state vector.

    For ``alpha > 0`` the matrix is solved separately in its two reflection
    sectors; the ground state lies in the even sector, so ``psi_Q = psi_-Q``
    holds exactly even when the tunnel splitting is below machine precision.
    At ``alpha = 0`` the matrix is diagonal; ties are broken towards the
    largest ``Q`` and flagged as degenerate.
    """
    n = len(h.diag)
    if not 1 <= m <= n:
        raise DomainError(f"m must lie in [1, K+1 = {n}], got {m}")

    if h.alpha == 0.0:
        order = np.lexsort((-h.q_grid, h.diag))
        energies = h.diag[order[:m]].copy()
        psi = np.zeros(n)
        psi[order[0]] = 1.0
        tol = 1e-12 * max(1.0, abs(h.diag[order[0]]))
        degenerate = bool(np.sum(np.abs(h.diag - h.diag[order[0]]) <= tol) > 1)
        return SpectrumResult(energies, psi, degenerate)

    (d_even, e_even), (d_odd, e_odd) = _sectors(h)
    w_even, v_even = _lowest(d_even, e_even, m, True, "even")
    w_odd, _ = _lowest(d_odd, e_odd, m, False, "odd") if len(d_odd) else (np.empty(0), None)
    energies = np.sort(np.concatenate([w_even, w_odd]))[:m]

    g = v_even[:, 0]
    mid = h.k_sites // 2
    psi = np.empty(n)
    psi[mid] = g[0]
    psi[mid + 1:] = g[1:] / math.sqrt(2.0)
    psi[:mid] = psi[mid + 1:][::-1]
    psi /= np.linalg.norm(psi)
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    return SpectrumResult(energies, psi, False)


def _ground_vector(k_sites, u_s, u_l, alpha) -> np.ndarray:
    return ground_state(_tridiagonal(k_sites, u_s, u_l, alpha), m=1).ground_amplitudes


def _log_overlap(psi0: np.ndarray, psi1: np.ndarray) -> float:
    """``ln |<psi0|psi1>|`` for real unit vectors, free of cancellation near 1."""
    ov = float(psi0 @ psi1)
    sign = 1.0 if ov >= 0 else -1.0
    d2 = float(np.sum((psi1 - sign * psi0) ** 2))
    if d2 < 1.0:
        # |<a|b>| = 1 - |a - b|^2 / 2 for unit vectors with positive overlap
        return math.log1p(-0.5 * d2)
    if abs(ov) < OVERLAP_FLOOR:
        return -math.inf
    return math.log(abs(ov))


def fidelity_susceptibility(params: ModelParams, psi: np.ndarray | None = None,
                            delta: float = FIDELITY_STEP) -> tuple[float, str, float]:
    """Second derivative of ``-ln|<psi(U_l)|psi(U_l + d)>|`` at ``d = 0``.

    Central difference with step ``delta * U_s``, repeated at half the step.
    Returns ``(chi, flag, chi_half)`` where ``flag`` is ``"discontinuity"``
    when an overlap falls below 1e-30 (``chi`` is then ``inf``) and
    ``"inconsistent"`` when the two step sizes disagree by more than 5%.
    """
    k, u_s, u_l, alpha = params.k_sites, params.u_s, params.u_l, params.alpha
    if psi is None:
        psi = _ground_vector(k, u_s, u_l, alpha)

    def chi_at(step):
        lp = _log_overlap(psi, _ground_vector(k, u_s, u_l + step, alpha))
        lm = _log_overlap(psi, _ground_vector(k, u_s, u_l - step, alpha))
        return -(lp + lm) / step**2

    h = delta * u_s
    chi = chi_at(h)
    chi_half = chi_at(h / 2)
    if math.isinf(chi) or math.isinf(chi_half):
        return math.inf, "discontinuity", chi_half
    scale = max(abs(chi), abs(chi_half))
    if scale > 0 and abs(chi - chi_half) > FIDELITY_RTOL * scale:
        return chi, "inconsistent", chi_half
    return chi, "ok", chi_half


def observables(spec: SpectrumResult, h: QHamiltonian, params: ModelParams,
                fidelity: bool = True) -> Observables:
    """Ground-state observables of the imbalance Hamiltonian.

    ``theta_abs_mean`` is ``sum_Q |Q| psi_Q^2 / K``; the signed mean vanishes
    by symmetry in the CDW phase.  Both ``E1 - E0`` and ``E2 - E0`` are
    reported since ``E1 - E0`` is a tunnel splitting in the CDW phase.
    """
    psi = spec.ground_amplitudes
    p = psi * psi
    theta_abs = float(np.sum(np.abs(h.q_grid) * p) / h.k_sites)
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    e = spec.energies
    gap_10 = float(e[1] - e[0]) if len(e) > 1 else math.nan
    gap_20 = float(e[2] - e[0]) if len(e) > 2 else math.nan
    if fidelity:
        chi, flag, chi_half = fidelity_susceptibility(params, psi)
    else:
        chi, flag, chi_half = math.nan, "skipped", math.nan
    return Observables(theta_abs, gap_10, gap_20, entropy, chi, flag, chi_half)


def solve(params: ModelParams, m: int = 3, fidelity: bool = True) -> SpectrumResult:
    """Build, diagonalise and attach observables in one call."""
    h = build_hamiltonian(params)
    spec = ground_state(h, m)
    obs = observables(spec, h, params, fidelity=fidelity)
    return SpectrumResult(spec.energies, spec.ground_amplitudes, spec.degenerate, obs)
