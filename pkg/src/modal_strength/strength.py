"""Strength metrics: bus-specific modal parameters, nodal inertia, the CM
voltage-spring estimate, gSCR and its spring-sign bridge, and the analytic
two-device oracle used to cross-verify the numeric pipeline.

Infinities are semantic here: a system with an infinite bus has no CM mode
and reports are expected to carry a flagged-infinite CM inertia instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BridgeViolationError, InputError, ObservabilityError, RegimeError
from .modal import PencilSolution, decompose

_PAIR_TOL = 1e-9


def mode_shape_product(sol: PencilSolution, k: int, i: int, j: int) -> float:
    """phi_{k,i} * psi_{k,j}; the observability/controllability weight."""
    return float(sol.phi[i, k] * sol.psi[j, k])


def bus_modal_params(sol: PencilSolution, params, k: int, i: int, j: int):
    """Modal parameters seen when disturbing bus j and observing bus i.

    Each parameter is divided by phi_{k,i} psi_{k,j}. A vanishing product
    means the mode is unobservable/uncontrollable for the pair.
    """
    w = mode_shape_product(sol, k, i, j)
    if abs(w) < _PAIR_TOL:
        raise ObservabilityError(
            f"mode {k} unobservable/uncontrollable for bus pair ({i}, {j})")
    if hasattr(params, "j_m"):
        return (params.j_m[k] / w, params.d_m[k] / w, params.k_m[k] / w)
    return (params.d_mv[k] / w, params.k_mv[k] / w)


def nodal_inertia(sol: PencilSolution, params, i: int, j: int) -> float:
    """Disturbance-to-initial-RoCoF inertia at bus i for a step at bus j:
    harmonic composition of the bus-specific modal inertias. Modes with an
    infinite bus-specific inertia (vanishing shape product) contribute zero;
    a missing CM mode (infinite-bus systems) does so implicitly."""
    if np.any(params.j_m == 0.0):
        raise InputError("nodal inertia undefined: a mode has zero modal inertia")
    inv = 0.0
    for k in range(sol.size):
        w = mode_shape_product(sol, k, i, j)
        if abs(w) >= _PAIR_TOL:
            inv += w / params.j_m[k]
    if inv == 0.0:
        return math.inf
    return 1.0 / inv


def cm_voltage_spring_estimate(device_springs, load_q_consumed) -> float:
    """CM-V spring approximation: total device spring minus 2x total
    consumed reactive power of loads."""
    return float(np.sum(device_springs) - 2.0 * np.sum(load_q_consumed))


def gscr(l22: np.ndarray, q_e_loads: np.ndarray) -> float:
    """Smallest real eigenvalue of Q_e^-1 L22 over the load buses."""
    q = np.asarray(q_e_loads, float).ravel()
    if np.any(q <= 0.0):
        raise InputError("gSCR requires positive consumed reactive power at loads")
    l22 = np.asarray(l22, float)
    if l22.shape != (len(q), len(q)):
        raise InputError("L22/load dimension mismatch")
    w = np.linalg.eigvals(l22 / q[:, None])
    k = int(np.argmin(w.real))
    if abs(w[k].imag) > 1e-8 * max(1.0, float(np.max(np.abs(w)))):
        raise RegimeError(f"smallest eigenvalue of Qe^-1 L22 is complex: {w[k]:.6g}")
    return float(w[k].real)


@dataclass(frozen=True)
class BridgeRecord:
    gscr: float
    k_mv_first_dm: float
    quad_form: float  # psi' L22 phi of the first DM of (L22, -2Qe)
    paper_rhs: float  # (gSCR - 2) * quad_form
    relative_gap: float


def gscr_spring_bridge(l22: np.ndarray, q_e_loads: np.ndarray,
                       tol: float = 1e-9) -> BridgeRecord:
    """Consistency record between gSCR and the first-DM voltage spring of
    the reduced pencil (L22, -2Qe) (generator buses already eliminated as
    infinite). Sign agreement is asserted whenever the quadratic form is
    positive; the magnitudes are recorded, not asserted, because the paper
    formula fixes no eigenvector normalization."""
    q = np.asarray(q_e_loads, float).ravel()
    g = gscr(l22, q)
    sol = decompose(np.asarray(l22, float), -2.0 * q)
    k_mv = sol.s_m * 1.0 + sol.l_m  # G_QV0 = 1 springs convention
    first = int(np.argmin(k_mv))
    form = float(sol.psi[:, first] @ np.asarray(l22, float) @ sol.phi[:, first])
    rhs = (g - 2.0) * form
    gap = abs(k_mv[first] - rhs) / max(abs(k_mv[first]), abs(rhs), 1e-30)
    if form > tol and abs(k_mv[first]) > tol and abs(g - 2.0) > tol:
        if math.copysign(1.0, k_mv[first]) != math.copysign(1.0, g - 2.0):
            raise BridgeViolationError(
                f"sign(K_MV)={k_mv[first]:.6g} disagrees with sign(gSCR-2)={g - 2:.6g}")
    return BridgeRecord(gscr=g, k_mv_first_dm=float(k_mv[first]),
                        quad_form=form, paper_rhs=float(rhs),
                        relative_gap=float(gap))


# --- two-device closed forms ------------------------------------------------

def _norm17(v):
    v = np.asarray(v, float)
    a = np.abs(v)
    pivot = int(np.argmax(a >= a.max() * (1.0 - 1e-9)))
    return v / v[pivot]


@dataclass(frozen=True)
class TwoDeviceOracle:
    """Closed-form decomposition of the two-device pencil
    ([L11, -L11; -L22, L22], diag(S1, S2)).

    Vectors and (s_m, l_m) are in the max-module-1 normalization so they are
    directly comparable with the numeric pipeline. Symmetric-network extras
    (bus-1 modal inertias, voltage springs, the DM collapse threshold) are
    populated only when L11 == L22.
    """

    eigenvalues: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    s_m: np.ndarray
    l_m: np.ndarray
    j11: tuple[float, float] | None = None  # (CM, DM) bus-1 modal inertias
    k_mv: tuple[float, float] | None = None  # (CM, DM) springs, G_QV0 = 1
    s2_threshold: float | None = None  # DM-V collapse boundary for S2


def two_device_oracle(l11: float, l22: float, s1: float, s2: float,
                      j0: float | None = None) -> TwoDeviceOracle:
    """Analytic pencil solution for the two-device network.

    CM: lambda = 0, phi = [1, 1], psi ~ [L22/L11, 1].
    DM: lambda = SL/(S1 S2), phi ~ [-L11 S2/(L22 S1), 1], psi ~ [-S2/S1, 1]
    with SL = L22 S1 + L11 S2.
    """
    if s1 == 0.0 or s2 == 0.0:
        raise InputError("two-device closed forms require nonzero S1, S2")
    if l11 == 0.0 or l22 == 0.0:
        raise InputError("two-device closed forms require nonzero network couplings")
    sl = l22 * s1 + l11 * s2
    lam = np.array([0.0, sl / (s1 * s2)])
    phi_cm, psi_cm = _norm17([1.0, 1.0]), _norm17([l22 / l11, 1.0])
    phi_dm = _norm17([-l11 * s2 / (l22 * s1), 1.0])
    psi_dm = _norm17([-s2 / s1, 1.0])
    phi = np.column_stack([phi_cm, phi_dm])
    psi = np.column_stack([psi_cm, psi_dm])
    s = np.array([s1, s2])
    s_m = np.array([psi[:, 0] @ (s * phi[:, 0]), psi[:, 1] @ (s * phi[:, 1])])
    l_m = lam * s_m

    j11 = k_mv = s2th = None
    if l11 == l22:
        l = l11
        if j0 is not None:
            j1, j2 = s1 * j0, s2 * j0
            j11 = (j1 + j2, (s1 + s2) * j1 / s2)
        ssum = s1 + s2
        k_mv = (ssum, ssum * (s1 * s2 + ssum * l) / s1**2)
        s2th = -l / (l / s1 + 1.0)
    return TwoDeviceOracle(eigenvalues=lam, phi=phi, psi=psi, s_m=s_m, l_m=l_m,
                           j11=j11, k_mv=k_mv, s2_threshold=s2th)


# --- aggregate report -------------------------------------------------------

@dataclass(frozen=True)
class ModeRow:
    index: int
    kind: str  # "CM" | "DM"
    eigenvalue: float | None  # None for the flagged-infinite CM placeholder
    infinite: bool = False
    j_m: float | None = None
    d_m: float | None = None
    k_m: float | None = None
    d_mv: float | None = None
    k_mv: float | None = None
    collapse: bool = False  # K <= 0


@dataclass(frozen=True)
class StrengthReport:
    frequency_modes: tuple[ModeRow, ...] | None = None
    voltage_modes: tuple[ModeRow, ...] | None = None
    # (side, mode index, observe bus id, disturb bus id) -> parameter tuple
    bus_specific: dict = field(default_factory=dict)
    nodal_inertia: dict = field(default_factory=dict)  # (i, j) bus ids -> value
    cm_v_spring_estimate: float | None = None
    gscr: float | None = None
    bridge: BridgeRecord | None = None

    def frequency_inertias_at(self, bus_id: int):
        """Bus-specific modal inertias J^(i,i) for every frequency mode row
        (math.inf for the flagged CM placeholder or an unobservable mode)."""
        out = []
        for row in self.frequency_modes or ():
            if row.infinite:
                out.append(math.inf)
            else:
                key = ("frequency", row.index, bus_id, bus_id)
                val = self.bus_specific.get(key)
                out.append(val[0] if val is not None else math.inf)
        return out
