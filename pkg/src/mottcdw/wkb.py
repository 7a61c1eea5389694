"""Discrete WKB analysis of the imbalance Hamiltonian.

With slowly varying coefficients the tridiagonal Hamiltonian behaves locally
like a uniform tight-binding chain, ``E = eps_Q + 2 gamma_Q cos p``.  Energies
inside ``[eps_Q + 2 gamma_Q, eps_Q - 2 gamma_Q]`` are classically allowed;
the lower edge ``eps_Q + 2 gamma_Q`` is the effective barrier between the Mott
insulator (Q = 0) and the density wave (Q = +-K).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericError, UnsupportedFillingError
from .model import TIE_TOL, ModelParams
from .qspace import onsite_energy

ACTION_RTOL = 1e-6


def gamma_mean(q, params: ModelParams):
    """Average hopping ``-(alpha/4) (1 + |Q| - Q^2/K)``; never positive."""
    q = np.asarray(q, dtype=float)
    out = -(params.alpha / 4.0) * (1.0 + np.abs(q) - q * q / params.k_sites)
    return float(out) if out.ndim == 0 else out


def lower_edge(q, params: ModelParams):
    """Lower band edge ``eps_Q + 2 gamma_Q``."""
    return onsite_energy(q, params.k_sites, params.u_s, params.u_l) + 2.0 * gamma_mean(q, params)


def upper_edge(q, params: ModelParams):
    return onsite_energy(q, params.k_sites, params.u_s, params.u_l) - 2.0 * gamma_mean(q, params)


def momentum(q, energy, params: ModelParams):
    """Local momentum from ``cos p = (E - eps_Q) / (2 gamma_Q)``.

    Real ``p`` in ``[0, pi]`` inside the band (``p = 0`` at the lower edge,
    ``pi`` at the upper one).  Below the band ``p = i kappa`` and above it
    ``p = pi + i kappa`` with ``kappa = arccosh(|E - eps_Q| / (2 |gamma_Q|))``.
    """
    if params.alpha == 0.0:
        raise DomainError("momentum is undefined without hopping (alpha = 0)")
    q = np.asarray(q, dtype=float)
    g = gamma_mean(q, params)
    ratio = (energy - onsite_energy(q, params.k_sites, params.u_s, params.u_l)) / (2.0 * g)
    ratio = np.asarray(ratio, dtype=float)
    p = np.empty(ratio.shape, dtype=complex)
    inside = np.abs(ratio) <= 1.0
    p[inside] = np.arccos(ratio[inside])
    below = ratio > 1.0
    p[below] = 1j * np.arccosh(ratio[below])
    above = ratio < -1.0
    p[above] = math.pi + 1j * np.arccosh(-ratio[above])
    return complex(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class Barrier:
    exists: bool
    height: float                 # energy, 0 when there is no barrier
    from_phase: str | None        # metastable phase the barrier confines
    height_mi: float = 0.0        # escape height out of a metastable CDW, Q=K side
    height_cdw: float = 0.0       # escape height out of a metastable MI, Q=0 side


@dataclass(frozen=True)
class WkbProfile:
    q_grid: np.ndarray
    eps: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    q_star: float | None
    barrier: Barrier
    phase: str
    turning_points: tuple[float, float] | None
    action: float | None
    grid_height: float | None     # same barrier measured on the discrete Q grid


def equilibrium_phase(params: ModelParams) -> str:
    """Phase label from the analytic boundaries.

    Mott insulator below ``U_l = U_s/2`` up to ``alpha = U_s``; density wave
    above it up to ``alpha = 4 U_l - U_s``; compressible beyond those lines.
    """
    u_s, u_l, a = params.u_s, params.u_l, params.alpha
    tol = TIE_TOL * u_s
    if abs(u_l - u_s / 2) <= tol:
        return "degenerate" if a < u_s - tol else "compressible"
    if u_l < u_s / 2:
        return "MI" if a < u_s - tol else "compressible"
    return "CDW" if a < 4 * u_l - u_s - tol else "compressible"


def q_star_fraction(params: ModelParams) -> float | None:
    """Location ``Q*/K`` of the maximum of the lower band edge, or None."""
    c = 2 * params.u_l - params.alpha
    if c <= TIE_TOL * params.u_s:
        return None
    return 0.5 * (params.u_s - params.alpha) / c


def barrier_heights(params: ModelParams) -> tuple[float, float]:
    """Closed-form ``(dE_CDW, dE_MI)``.

    ``dE_CDW = (K/8)(U_s - a)^2 / (2U_l - a)`` is measured from ``Q = 0``,
    ``dE_MI = (K/8)(a + U_s - 4U_l)^2 / (2U_l - a)`` from ``Q = K``.
    """
    k, u_s, u_l, a = params.k_sites, params.u_s, params.u_l, params.alpha
    c = 2 * u_l - a
    return k / 8 * (u_s - a) ** 2 / c, k / 8 * (a + u_s - 4 * u_l) ** 2 / c


def barrier_exists(params: ModelParams) -> bool:
    """True iff ``alpha < 2 U_l`` and ``Q*/K`` lies strictly inside (0, 1)."""
    x = q_star_fraction(params)
    return x is not None and TIE_TOL < x < 1.0 - TIE_TOL


def _grid_barrier(params: ModelParams, from_q: int) -> float:
    q = np.arange(0, params.k_sites + 1, 2, dtype=float)
    e = lower_edge(q, params)
    return float(np.max(e) - lower_edge(float(from_q), params))


def barrier_analysis(params: ModelParams) -> WkbProfile:
    """Band edges, barrier existence and height, and the tunnelling action."""
    if abs(params.rho - 1.0) > 1e-12:
        raise UnsupportedFillingError("barrier analysis is defined at unit filling")
    k = params.k_sites
    q = np.arange(-k, k + 1, 2, dtype=float)
    eps = onsite_energy(q, k, params.u_s, params.u_l)
    g = gamma_mean(q, params)
    phase = equilibrium_phase(params)
    x = q_star_fraction(params)

    if not barrier_exists(params):
        barrier = Barrier(False, 0.0, None)
        return WkbProfile(q, eps, eps + 2 * g, eps - 2 * g, x, barrier, phase,
                          None, 0.0, None)

    d_cdw, d_mi = barrier_heights(params)
    tol = TIE_TOL * params.u_s
    u_l, u_s = params.u_l, params.u_s
    if abs(u_l - u_s / 2) <= tol:
        barrier = Barrier(True, d_cdw, None, d_mi, d_cdw)
        grid = _grid_barrier(params, 0)
    elif u_l < u_s / 2:
        barrier = Barrier(True, d_mi, "CDW", d_mi, d_cdw)
        grid = _grid_barrier(params, k)
    else:
        barrier = Barrier(True, d_cdw, "MI", d_mi, d_cdw)
        grid = _grid_barrier(params, 0)
    tp = turning_points(params)
    action = tunneling_action(params).action if params.alpha > 0 else math.inf
    return WkbProfile(q, eps, eps + 2 * g, eps - 2 * g, x, barrier, phase,
                      tp, action, grid)


def turning_points(params: ModelParams) -> tuple[float, float] | None:
    """Classical turning points ``(Q1, Q2)`` at the metastable minimum energy."""
    if not barrier_exists(params):
        return None
    k, u_s, u_l, a = params.k_sites, params.u_s, params.u_l, params.alpha
    c = 2 * u_l - a
    if u_l < u_s / 2 - TIE_TOL * u_s:
        return k * (u_s - 2 * u_l) / c, float(k)
    return 0.0, k * (u_s - a) / c


def action_closed_form(params: ModelParams) -> float:
    """Closed-form tunnelling action on either side of the coexistence line.

    With ``r = sqrt(4 U_l^2 - a^2)`` and ``d = U_s - 2 U_l``:

    * density-wave side (``d < 0``), ``x2 = (U_s - a)/(2U_l - a)``,
      ``x3 = (U_s + a)/(2U_l + a)``::

        A = arccosh(U_s/a) + (2d/r) ln[(sqrt(x2) + sqrt(x3)) / sqrt(x3 - x2)]

    * Mott side (``d > 0``), ``x1 = d/(2U_l - a)``, ``x4 = d/(2U_l + a)``::

        A = arccosh((4U_l - U_s)/a)
            - (2d/r) ln[(sqrt(1 - x1) + sqrt(1 - x4)) / sqrt(x1 - x4)]

    The differences ``x3 - x2`` and ``x1 - x4`` equal ``2a|d|/r^2`` and are
    evaluated in that factored form, which keeps the result accurate down to
    ``a -> 0``.  On the line itself both reduce to ``arccosh(U_s / a)``.
    """
    u_s, u_l, a = params.u_s, params.u_l, params.alpha
    if not barrier_exists(params):
        return 0.0
    if a == 0.0:
        return math.inf
    d = u_s - 2 * u_l
    if abs(d) <= TIE_TOL * u_s:
        return math.acosh(u_s / a)
    r2 = (2 * u_l - a) * (2 * u_l + a)
    r = math.sqrt(r2)
    gap = 2 * a * abs(d) / r2
    if d < 0:
        x2 = (u_s - a) / (2 * u_l - a)
        x3 = (u_s + a) / (2 * u_l + a)
        log_term = math.log(math.sqrt(x2) + math.sqrt(x3)) - 0.5 * math.log(gap)
        return math.acosh(u_s / a) + 2 * d / r * log_term
    one_x1 = (4 * u_l - u_s - a) / (2 * u_l - a)
    one_x4 = (4 * u_l - u_s + a) / (2 * u_l + a)
    log_term = math.log(math.sqrt(one_x1) + math.sqrt(one_x4)) - 0.5 * math.log(gap)
    return math.acosh((4 * u_l - u_s) / a) - 2 * d / r * log_term


def _literal_closed_form(params: ModelParams) -> float:
    """The same actions written with a single logarithm of a ratio.

    Kept as an independent cross-check of :func:`action_closed_form`; it
    loses accuracy for small ``alpha`` where numerator and denominator of
    the ratio both vanish.
    """
    u_s, u_l, a = params.u_s, params.u_l, params.alpha
    root = math.sqrt(4 * u_l * u_l - a * a)
    pref = (u_s - 2 * u_l) / root
    if u_l < u_s / 2:
        den = (2 * u_l * u_s - 8 * u_l * u_l + a * a
               - math.sqrt(((4 * u_l - u_s) ** 2 - a * a) * (4 * u_l * u_l - a * a)))
        # the ratio inside the logarithm is negative; only its magnitude enters
        return math.acosh((4 * u_l - u_s) / a) + pref * math.log(abs(a * (u_s - 2 * u_l) / den))
    den = a * a - 2 * u_s * u_l + math.sqrt((4 * u_l * u_l - a * a) * (u_s * u_s - a * a))
    return math.acosh(u_s / a) + pref * math.log(a * (u_s - 2 * u_l) / den)


def action_quadrature(params: ModelParams) -> float:
    """``(1/K) int |p(Q)| dQ`` between the turning points, by adaptive quadrature.

    Works with ``x = Q/K`` in the large-K limit, where ``eps/K`` and
    ``gamma/K`` lose their ``O(1)`` offsets.  The substitution
    ``x = x1 + (x2 - x1) sin^2 s`` removes the square-root behaviour of
    ``|p|`` at both turning points.
    """
    if not barrier_exists(params):
        return 0.0
    if params.alpha == 0.0:
        return math.inf
    u_s, u_l, a = params.u_s, params.u_l, params.alpha
    q1, q2 = turning_points(params)
    k = params.k_sites
    x1, x2 = q1 / k, q2 / k
    # energy per site of the metastable minimum on the lower band edge
    if u_l < u_s / 2 - TIE_TOL * u_s:
        e_meta = 0.5 * (u_s - a) - 0.5 * (2 * u_l - a)      # Q = K
    else:
        e_meta = 0.0                                        # Q = 0

    def integrand(s):
        sn, cs = math.sin(s), math.cos(s)
        x = x1 + (x2 - x1) * sn * sn
        eps = 0.5 * u_s * x - u_l * x * x
        gam = -0.25 * a * (x - x * x)
        if gam == 0.0:
            # x rounded onto an endpoint of [0, 1]; the node weight vanishes there
            return 0.0
        num, den = abs(e_meta - eps), abs(2.0 * gam)
        if num > 1e8 * den:
            # arccosh(r) = ln(2r) to within 1/(4 r^2); avoids overflow of r
            kappa = math.log(2.0 * num) - math.log(den)
        else:
            kappa = math.acosh(max((e_meta - eps) / (2.0 * gam), 1.0))
        return kappa * 2.0 * (x2 - x1) * sn * cs

    val, err = quad(integrand, 0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


@dataclass(frozen=True)
class Tunneling:
    action: float
    probability: float
    log_probability: float        # -2 K A, finite where the probability underflows
    log10_lifetime: float         # order of magnitude of 1/T
    prefactor_known: bool = False
    action_quadrature: float = math.nan


def tunneling_action(params: ModelParams, check: bool = True) -> Tunneling:
    """Tunnelling action ``A`` and probability ``exp(-2 K A)``.

    The closed form is cross-checked against quadrature; disagreement beyond
    a relative 1e-6 raises :class:`NumericError`.  Without a barrier
    ``A = 0`` and the probability is 1.  The lifetime is only an order of
    magnitude: its prefactor is unknown.
    """
    closed = action_closed_form(params)
    numeric = action_quadrature(params) if check else math.nan
    if check and math.isfinite(closed) and closed > 0:
        if abs(closed - numeric) > ACTION_RTOL * closed:
            raise NumericError("closed-form and quadrature tunnelling actions disagree",
                               closed=closed, quadrature=numeric,
                               u_l=params.u_l, alpha=params.alpha)
    log_p = -2.0 * params.k_sites * closed
    prob = math.exp(log_p) if math.isfinite(log_p) else 0.0
    return Tunneling(closed, prob, log_p, -log_p / math.log(10.0), False, numeric)
