"""Parameter sweeps over ``(U_l/U_s, alpha/U_s)`` and the quench protocol.

Every grid node is labelled by the analytic phase boundaries and carries the
barrier record, the tunnelling action and the requested ground-state
observables of the imbalance Hamiltonian.  The observables are a cross-check
only: when they disagree with the analytic label the row is flagged.
"""
from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, MottCDWError, UnsupportedFillingError
from .model import TIE_TOL, ModelParams
from .qspace import build_hamiltonian, ground_state, observables as compute_observables
from .wkb import barrier_analysis, barrier_exists, barrier_heights, equilibrium_phase

OBSERVABLES = ("theta_abs_mean", "gap_10", "gap_20", "entropy_vn", "fidelity_chi")
RANGE_LIMIT = 2.0

# fixed output schema, one row per grid node
COLUMNS = (
    "u_l", "alpha", "k_sites", "phase",
    "barrier_exists", "barrier_height", "barrier_from", "q_star",
    "action", "log_tunneling",
    *OBSERVABLES, "chi_flag",
    "numeric_phase", "label_consistent",
)


class GridPointError(MottCDWError):
    """Failure at one grid node; carries the coordinates and the cause."""

    def __init__(self, u_l, alpha, cause_type, message, diagnostics=None):
        super().__init__(f"at u_l={u_l!r}, alpha={alpha!r}: {cause_type}: {message}")
        self.u_l, self.alpha = u_l, alpha
        self.cause_type = cause_type
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class Range:
    """``steps`` equally spaced points from ``min`` to ``max`` inclusive."""

    min: float
    max: float
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise DomainError(f"steps must be an integer >= 1, got {self.steps}")
        for v in (self.min, self.max):
            if not 0.0 <= v <= RANGE_LIMIT:
                raise DomainError(f"range end {v} outside [0, {RANGE_LIMIT}] (units of U_s)")
        if self.max < self.min:
            raise DomainError("range max is below min")
        if self.steps == 1 and self.max != self.min:
            raise DomainError("a single-step range needs min == max")

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, int(self.steps))

    @classmethod
    def parse(cls, text) -> "Range":
        """From ``"min:max:steps"``, a 3-list or a dict."""
        if isinstance(text, Range):
            return text
        if isinstance(text, dict):
            return cls(float(text["min"]), float(text["max"]), int(text["steps"]))
        if isinstance(text, str):
            parts = text.split(":")
        else:
            parts = list(text)
        if len(parts) != 3:
            raise DomainError(f"range must be min:max:steps, got {text!r}")
        return cls(float(parts[0]), float(parts[1]), int(parts[2]))


@dataclass(frozen=True)
class SweepConfig:
    u_l_range: Range
    alpha_range: Range
    k_sites: int = 200
    observables: tuple[str, ...] = OBSERVABLES
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1
    z: int = 4

    def __post_init__(self):
        if int(self.k_sites) != self.k_sites or self.k_sites < 2 or self.k_sites % 2:
            raise DomainError(f"k_sites must be an even integer >= 2, got {self.k_sites}")
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise DomainError(f"unknown observables {sorted(unknown)}; choose from {OBSERVABLES}")
        if self.fmt not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.fmt!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise DomainError("workers must be a positive integer")

    def grid(self) -> list[tuple[float, float]]:
        """Row-major nodes: ``U_l`` is the slow index."""
        return [(float(u), float(a)) for u in self.u_l_range.values()
                for a in self.alpha_range.values()]


@dataclass(frozen=True)
class PhasePoint:
    u_l: float
    alpha: float
    k_sites: int
    phase: str
    barrier_exists: bool
    barrier_height: float          # Delta E / (K U_s) of the metastable side
    barrier_from: str | None
    q_star: float | None
    action: float
    log_tunneling: float           # ln T = -2 K A
    observables: dict = field(default_factory=dict)
    chi_flag: str = "skipped"
    numeric_phase: str | None = None
    label_consistent: bool | None = None

    def row(self) -> dict:
        out = {c: None for c in COLUMNS}
        d = asdict(self)
        obs = d.pop("observables")
        out.update(d)
        for name in OBSERVABLES:
            out[name] = obs.get(name, math.nan)
        return out


def evaluate_point(u_l: float, alpha: float, k_sites: int,
                   wanted=OBSERVABLES, z: int = 4) -> PhasePoint:
    """Classification, barrier, action and observables at one node."""
    params = ModelParams.from_ratios(u_l, alpha, k_sites, z=z)
    prof = barrier_analysis(params)
    b = prof.barrier
    height = b.height / (k_sites * params.u_s) if b.exists else 0.0
    action = prof.action if prof.action is not None else 0.0
    log_t = -2.0 * k_sites * action if action else 0.0
    if math.isinf(action):
        log_t = -math.inf

    obs = {}
    chi_flag = "skipped"
    numeric_phase = consistent = None
    if wanted:
        h = build_hamiltonian(params)
        spec = ground_state(h, m=min(3, k_sites + 1))
        rec = compute_observables(spec, h, params, fidelity="fidelity_chi" in wanted)
        obs = {name: getattr(rec, name) for name in wanted}
        chi_flag = rec.chi_flag
        numeric_phase = "CDW" if rec.theta_abs_mean > 0.5 else "MI"
        if prof.phase in ("MI", "CDW"):
            consistent = numeric_phase == prof.phase
    return PhasePoint(u_l, alpha, k_sites, prof.phase, b.exists, height, b.from_phase,
                      prof.q_star, action, log_t, obs, chi_flag, numeric_phase, consistent)


def _run_chunk(args):
    nodes, k_sites, wanted, z = args
    out = []
    for u, a in nodes:
        try:
            out.append(("ok", evaluate_point(u, a, k_sites, wanted, z)))
        except MottCDWError as exc:
            out.append(("error", (u, a, type(exc).__name__, str(exc),
                                  getattr(exc, "diagnostics", {}))))
            break
    return out


def run_sweep(config: SweepConfig) -> list[PhasePoint]:
    """Evaluate every grid node; the result order is row-major whatever the pool does.

    The grid is split into ``workers`` contiguous blocks up front, one per
    process, so no state is shared between workers.
    """
    nodes = config.grid()
    wanted = tuple(config.observables)
    if config.workers == 1 or len(nodes) < 2:
        chunks = [_run_chunk((nodes, config.k_sites, wanted, config.z))]
    else:
        n = min(config.workers, len(nodes))
        blocks = [list(b) for b in np.array_split(np.arange(len(nodes)), n)]
        jobs = [([nodes[i] for i in b], config.k_sites, wanted, config.z) for b in blocks]
        with ProcessPoolExecutor(max_workers=n) as pool:
            chunks = list(pool.map(_run_chunk, jobs))
    points = []
    for chunk in chunks:
        for status, payload in chunk:
            if status == "error":
                raise GridPointError(*payload)
            points.append(payload)
    return points


# ---------------------------------------------------------------- output

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    return str(v)


def _json_value(v) -> str:
    # floats go out with 17 significant digits; non-finite values as strings
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return _fmt_float(v) if math.isfinite(v) else json.dumps(_fmt_float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return json.dumps(v)


def to_csv(points: list[PhasePoint]) -> str:
    buf = io.StringIO()
    buf.write(",".join(COLUMNS) + "\n")
    for p in points:
        r = p.row()
        buf.write(",".join(_csv_cell(r[c]) for c in COLUMNS) + "\n")
    return buf.getvalue()


def to_json(points: list[PhasePoint]) -> str:
    rows = []
    for p in points:
        r = p.row()
        rows.append("  {" + ", ".join(f"{json.dumps(c)}: {_json_value(r[c])}" for c in COLUMNS) + "}")
    return "[\n" + ",\n".join(rows) + "\n]\n"


def write_table(points: list[PhasePoint], path: str | Path, fmt: str = "csv") -> Path:
    text = to_csv(points) if fmt == "csv" else to_json(points)
    path = Path(path)
    # newline="" keeps the bytes identical across platforms
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# ---------------------------------------------------------------- quenches

@dataclass(frozen=True)
class QuenchReport:
    u_l_from: float
    u_l_to: float
    alpha: float
    initial_phase: str
    final_phase: str
    remains_local_min: bool
    marginal: bool
    barrier_height: float          # per site, units of U_s; 0 without a barrier
    defaulted: bool = False        # initial point on the coexistence line, MI assumed


@dataclass(frozen=True)
class HysteresisReport:
    forward: QuenchReport
    backward: QuenchReport

    @property
    def asymmetric(self) -> bool:
        return self.forward.remains_local_min != self.backward.remains_local_min


def _quench(p_from: ModelParams, p_to: ModelParams) -> QuenchReport:
    """Does the initial phase survive as a local minimum after the quench?

    Uses the per-site lower band edge
    ``e(x) = x (U_s - a)/2 - x^2 (2 U_l - a)/2`` on ``x = Q/K in [0, 1]``,
    which is the Landau free energy at ``a = 0``.  MI sits at ``x = 0``
    (local minimum iff ``e'(0) >= 0``), CDW at ``x = 1`` (iff ``e'(1) <= 0``);
    equality is reported as marginal.
    """
    initial = equilibrium_phase(p_from)
    defaulted = False
    if initial == "degenerate":
        initial, defaulted = "MI", True
    u_s, u_l, a = p_to.u_s, p_to.u_l, p_to.alpha
    tol = TIE_TOL * u_s
    final = equilibrium_phase(p_to)
    if initial == "MI":
        slope = 0.5 * (u_s - a)
    elif initial == "CDW":
        slope = -(0.5 * (u_s - a) - (2 * u_l - a))
    else:
        return QuenchReport(p_from.u_l / p_from.u_s, u_l / u_s, a / u_s, initial, final,
                            False, False, 0.0, defaulted)
    marginal = abs(slope) <= tol
    remains = slope >= -tol
    height = 0.0
    if remains and barrier_exists(p_to):
        d_cdw, d_mi = barrier_heights(p_to)
        height = (d_cdw if initial == "MI" else d_mi) / (p_to.k_sites * u_s)
    return QuenchReport(p_from.u_l / p_from.u_s, u_l / u_s, a / u_s, initial, final,
                        bool(remains), bool(marginal), float(height), defaulted)


def hysteresis_protocol(params_from: ModelParams, params_to: ModelParams) -> HysteresisReport:
    """Quench ``from -> to`` and back, reporting the fate of the initial phase.

    Going from MI deep into the CDW region leaves MI metastable behind a
    barrier, while the reverse quench to ``U_l < U_s/4`` removes the CDW
    minimum altogether.
    """
    for p in (params_from, params_to):
        if abs(p.rho - 1.0) > 1e-12:
            raise UnsupportedFillingError("quench protocol is defined at unit filling")
    return HysteresisReport(_quench(params_from, params_to), _quench(params_to, params_from))
