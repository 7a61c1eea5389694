"""Model parameters and the exact zero-hopping Landau theory.

The lattice is split into even and odd sub-lattices of ``K/2`` sites each.
At zero hopping the Hamiltonian is diagonal in the Fock basis and, at zero
temperature, the energy per site as a function of the imbalance density
``theta = (N_e - N_o) / K`` is

    f(theta) = -U_l theta**2 + [phi(rho + theta) + phi(rho - theta)] / 2

where ``phi`` is the minimal on-site repulsion per site of one sub-lattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import DomainError

# relative tolerance used for ties between energies and for boundary tests
TIE_TOL = 1e-12

ExtremumKind = Literal["global-min", "local-min", "maximum"]
Phase = Literal["MI", "CDW", "degenerate"]


@dataclass(frozen=True)
class ModelParams:
    """Couplings and lattice data of the extended Bose-Hubbard model.

    Parameters
    ----------
    u_s : float
        On-site repulsion, > 0.
    u_l : float
        Long-range checkerboard coupling, >= 0.
    j : float
        Nearest-neighbour hopping, >= 0.
    k_sites : int
        Number of lattice sites ``K``; even so that both sub-lattices have
        ``K/2`` sites.
    z : int
        Coordination number.
    rho : float
        Filling ``N/K``; ``rho * K`` must be an integer.
    """

    u_s: float
    u_l: float
    j: float
    k_sites: int
    z: int = 4
    rho: float = 1.0

    def __post_init__(self):
        if not self.u_s > 0:
            raise DomainError(f"u_s must be positive, got {self.u_s}")
        if not self.u_l >= 0:
            raise DomainError(f"u_l must be non-negative, got {self.u_l}")
        if not self.j >= 0:
            raise DomainError(f"j must be non-negative, got {self.j}")
        if int(self.k_sites) != self.k_sites or self.k_sites < 2 or self.k_sites % 2:
            raise DomainError(f"k_sites must be an even integer >= 2, got {self.k_sites}")
        if int(self.z) != self.z or self.z < 1:
            raise DomainError(f"z must be a positive integer, got {self.z}")
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        n = self.rho * self.k_sites
        if abs(n - round(n)) > 1e-9:
            raise DomainError(f"rho * k_sites = {n} is not an integer particle number")

    @classmethod
    def from_ratios(cls, u_l: float, alpha: float, k_sites: int, *, z: int = 4,
                    rho: float = 1.0, u_s: float = 1.0) -> "ModelParams":
        """Build parameters from ``U_l/U_s`` and ``alpha/U_s``."""
        return cls(u_s=u_s, u_l=u_l * u_s, j=alpha * u_s / (2.0 * math.sqrt(2.0) * z),
                   k_sites=k_sites, z=z, rho=rho)

    @property
    def alpha(self) -> float:
        """Rescaled hopping ``2 sqrt(2) z J``."""
        return 2.0 * math.sqrt(2.0) * self.z * self.j

    @property
    def n_particles(self) -> int:
        return int(round(self.rho * self.k_sites))

    def replace(self, **changes) -> "ModelParams":
        values = {f: getattr(self, f) for f in ("u_s", "u_l", "j", "k_sites", "z", "rho")}
        values.update(changes)
        return ModelParams(**values)


def phi(rho_x, u_s=1.0):
    """Minimal repulsion energy per site of a sub-lattice with density ``rho_x``.

    Returns ``u_s * floor(rho_x) * (rho_x - (1 + floor(rho_x)) / 2)``.  Exact
    ``int``/``Fraction`` input gives an exact result; anything else is
    evaluated elementwise with numpy.
    """
    if isinstance(rho_x, (int, Fraction)) and not isinstance(rho_x, bool):
        if rho_x < 0:
            raise DomainError(f"sub-lattice density must be >= 0, got {rho_x}")
        fl = math.floor(rho_x)
        return u_s * fl * (rho_x - Fraction(1 + fl, 2))
    arr = np.asarray(rho_x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("sub-lattice density must be >= 0")
    fl = np.floor(arr)
    out = u_s * fl * (arr - 0.5 * (1.0 + fl))
    return float(out) if out.ndim == 0 else out


def landau_f(theta, params: ModelParams):
    """Zero-hopping Landau free energy per site at imbalance density ``theta``."""
    rho = params.rho
    if isinstance(theta, (int, Fraction)) and not isinstance(theta, bool):
        if abs(theta) > rho:
            raise DomainError(f"|theta| = {abs(theta)} exceeds the filling {rho}")
        r = Fraction(rho).limit_denominator(10**9)
        return (-params.u_l * theta**2
                + (phi(r + theta, params.u_s) + phi(r - theta, params.u_s)) / 2)
    th = np.asarray(theta, dtype=float)
    a = np.abs(th)
    if np.any(a > rho):
        raise DomainError(f"|theta| exceeds the filling {rho}")
    # f is even; evaluating on |theta| makes the symmetry exact
    out = -params.u_l * a * a + 0.5 * (phi(rho + a, params.u_s) + phi(rho - a, params.u_s))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Extremum:
    theta: float
    f: float
    kind: ExtremumKind
    marginal: bool = False


@dataclass(frozen=True)
class LandauCurve:
    """Sampled Landau free energy with its classified extrema."""

    theta_grid: np.ndarray
    f_values: np.ndarray
    extrema: list[Extremum]
    phase: Phase
    params: ModelParams = field(repr=False)

    def minima(self) -> list[Extremum]:
        return [e for e in self.extrema if e.kind != "maximum"]

    def has_min_at(self, theta: float, atol: float = 1e-9) -> bool:
        return any(abs(e.theta - theta) <= atol for e in self.minima())


def _unit_filling_extrema(params: ModelParams) -> tuple[list[Extremum], Phase]:
    """Extrema of ``-U_l theta^2 + U_s |theta| / 2`` on [-1, 1]."""
    u_s, u_l = params.u_s, params.u_l
    tol = TIE_TOL * u_s
    f_cdw = landau_f(1.0, params)
    if abs(u_l - u_s / 2) <= tol:
        phase: Phase = "degenerate"
    elif u_l < u_s / 2:
        phase = "MI"
    else:
        phase = "CDW"

    extrema = []
    cdw_present = u_l >= u_s / 4 - tol
    marginal = abs(u_l - u_s / 4) <= tol
    mi_kind = "local-min" if phase == "CDW" else "global-min"
    extrema.append(Extremum(0.0, 0.0, mi_kind))
    if cdw_present:
        cdw_kind = "local-min" if phase == "MI" else "global-min"
        extrema.append(Extremum(-1.0, f_cdw, cdw_kind, marginal))
        extrema.append(Extremum(1.0, f_cdw, cdw_kind, marginal))
        if not marginal:
            t = u_s / (4 * u_l)
            f_max = landau_f(t, params)
            extrema.append(Extremum(-t, f_max, "maximum"))
            extrema.append(Extremum(t, f_max, "maximum"))
    extrema.sort(key=lambda e: e.theta)
    return extrema, phase


def _grid_extrema(theta: np.ndarray, f: np.ndarray, tol: float) -> list[tuple[int, str]]:
    """Three-point discrete extrema; endpoints compare with their one neighbour."""
    n = len(f)
    found = []
    for i in range(n):
        left = f[i - 1] - f[i] if i > 0 else None
        right = f[i + 1] - f[i] if i < n - 1 else None
        diffs = [d for d in (left, right) if d is not None]
        # plateau edges count as extrema, plateau interiors do not
        if all(d >= -tol for d in diffs) and any(d > tol for d in diffs):
            found.append((i, "min"))
        elif all(d <= tol for d in diffs) and any(d < -tol for d in diffs):
            found.append((i, "max"))
    return found


def classify_landscape(params: ModelParams, n_grid: int = 401) -> LandauCurve:
    """Sample ``f(theta)`` on ``[-rho, rho]`` and classify its extrema.

    At unit filling the extrema are placed analytically.  For other fillings
    the cusps of ``f`` (``rho +- theta`` integer) are added to the grid and
    extrema are read off by three-point comparison with a tie tolerance of
    ``1e-12 * U_s``.
    """
    if n_grid < 3:
        raise DomainError("n_grid must be >= 3")
    rho = params.rho
    grid = np.linspace(-rho, rho, int(n_grid))
    grid = 0.5 * (grid - grid[::-1])       # exactly antisymmetric sample points
    if abs(rho - 1.0) <= 1e-12:
        values = landau_f(grid, params)
        extrema, phase = _unit_filling_extrema(params)
        return LandauCurve(grid, values, extrema, phase, params)

    # cusps where rho + theta or rho - theta is an integer
    kinks = []
    for m in range(0, int(math.floor(2 * rho)) + 1):
        kinks.extend([m - rho, rho - m])
    kinks = [t for t in kinks if -rho <= t <= rho]
    grid = np.unique(np.round(np.concatenate([grid, kinks, [0.0]]), 14))
    grid = np.unique(np.concatenate([grid, -grid]))
    values = landau_f(grid, params)
    tol = TIE_TOL * params.u_s
    raw = _grid_extrema(grid, values, tol)
    mins = [i for i, k in raw if k == "min"]
    if not mins:
        i0 = int(np.argmin(values))
        raw.append((i0, "min"))
        mins = [i0]
    f_glob = min(values[i] for i in mins)
    # every grid point at the global value counts, so flat stretches are seen whole
    global_abs = {round(abs(t), 12) for t, v in zip(grid, values) if v - f_glob <= tol}
    if len(global_abs) > 1 and 0.0 in global_abs:
        phase: Phase = "degenerate"
    elif global_abs == {0.0}:
        phase = "MI"
    else:
        phase = "CDW"
    extrema = []
    for i, kind in raw:
        if kind == "max":
            extrema.append(Extremum(float(grid[i]), float(values[i]), "maximum"))
        else:
            k = "global-min" if values[i] - f_glob <= tol else "local-min"
            extrema.append(Extremum(float(grid[i]), float(values[i]), k))
    return LandauCurve(grid, values, extrema, phase, params)
