"""Grid-connected devices in the unified inertia-damper-spring form.

A device set is homogeneous: every dynamic device is a capacity scaling of
one nominal frequency dynamics (inertia J0, damping D0, spring K0, per-unit
frequency base omega0) and one nominal voltage dynamics (damping D0, spring
K0). Constant-reactive-power loads and infinite buses are boundary kinds:
the former contribute a pure negative voltage spring -2*Qe, the latter pin
their bus (rows removed from the pencil).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConsistencyError, InputError

OMEGA0_DEFAULT = 2.0 * np.pi * 50.0


@dataclass(frozen=True)
class FullDeviceParams:
    """Raw control parameters before unified reduction (Q-V loop optional)."""

    j: float
    d: float
    k_p: float = 0.0
    k_s: float = 0.0
    t_g: float = 0.0
    k_qv: float = 0.0
    t_m: float = 0.0


@dataclass(frozen=True)
class UnifiedDeviceParams:
    j_ptheta: float
    d_ptheta: float
    k_ptheta: float
    d_qv: float = 0.0
    k_qv: float = 0.0


def reduce_to_unified(full: FullDeviceParams) -> UnifiedDeviceParams:
    """Collapse the governor branch into damping/spring terms.

    The first-order PFR block (K_P s + K_S)/(T_G s + 1) is matched at
    s -> 0 and s -> infinity: damping picks up K_P, the spring is K_S.
    Exact whenever T_G = 0. The Q-V filter gives D_QV = T_M * K_QV.
    """
    if full.t_g < 0 or full.t_m < 0:
        raise InputError("time constants must be non-negative")
    return UnifiedDeviceParams(
        j_ptheta=full.j,
        d_ptheta=full.d + full.k_p,
        k_ptheta=full.k_s,
        d_qv=full.t_m * full.k_qv,
        k_qv=full.k_qv,
    )


@dataclass(frozen=True)
class NominalFreq:
    """Nominal G_Ptheta0: unified (j, d, k) plus the exact governor block
    (k_p, k_s, t_g) kept for the direct simulation when t_g > 0."""

    j: float
    d: float
    k: float
    k_p: float = 0.0
    k_s: float = 0.0
    t_g: float = 0.0

    @property
    def has_governor(self) -> bool:
        return self.t_g > 0.0

    @property
    def raw_d(self) -> float:
        """Damping without the governor's K_P share (used when the governor
        is simulated exactly)."""
        return self.d - self.k_p


@dataclass(frozen=True)
class NominalVolt:
    d: float
    k: float


def nominal_freq_from_full(full: FullDeviceParams) -> NominalFreq:
    u = reduce_to_unified(full)
    return NominalFreq(j=u.j_ptheta, d=u.d_ptheta, k=u.k_ptheta,
                       k_p=full.k_p, k_s=full.k_s, t_g=full.t_g)


def nominal_volt_from_droop(k_qv: float, t_m: float) -> NominalVolt:
    return NominalVolt(d=t_m * k_qv, k=k_qv)


@dataclass(frozen=True)
class DeviceEntry:
    bus: int
    kind: str  # "unified" | "crpl" | "infinite"
    s_theta: float = 0.0
    s_v: float = 0.0
    p_e: float = 0.0
    q_e: float = 0.0  # injection; a crpl consuming Q carries q_e = -Q
    params: UnifiedDeviceParams | None = None  # explicit, checked vs scaling


@dataclass(frozen=True)
class DeviceSet:
    entries: tuple[DeviceEntry, ...]
    nominal_freq: NominalFreq
    nominal_volt: NominalVolt
    omega0: float = OMEGA0_DEFAULT
    voltage_convention: str = "nominal"  # "nominal" | "springs"

    def __post_init__(self):
        if not self.entries:
            raise InputError("device set is empty")
        if self.voltage_convention not in ("nominal", "springs"):
            raise InputError(f"unknown voltage convention {self.voltage_convention!r}")
        seen = set()
        for e in self.entries:
            if e.kind not in ("unified", "crpl", "infinite"):
                raise InputError(f"unknown device kind {e.kind!r} at bus {e.bus}")
            if e.bus in seen:
                raise InputError(f"multiple devices at bus {e.bus}")
            seen.add(e.bus)

    @property
    def bus_ids(self):
        return [e.bus for e in self.entries]


@dataclass(frozen=True)
class DeviceMatrices:
    """Diagonal capacity matrices in entry order plus boundary masks."""

    bus_ids: list[int]
    s_theta: np.ndarray
    s_v: np.ndarray
    infinite: np.ndarray  # bool mask; rows deleted from the pencils
    p_e: np.ndarray
    q_e: np.ndarray
    nominal_freq: NominalFreq
    nominal_volt: NominalVolt
    omega0: float


def assemble_device_matrices(devset: DeviceSet, rtol: float = 1e-9) -> DeviceMatrices:
    """Capacity diagonals S_theta, S_V in bus order.

    Infinite buses are flagged, never stored as numeric infinity. Entries
    declaring explicit unified params must equal scaling x nominal.
    """
    n = len(devset.entries)
    s_th = np.zeros(n)
    s_v = np.zeros(n)
    inf_mask = np.zeros(n, dtype=bool)
    p_e = np.zeros(n)
    q_e = np.zeros(n)
    offenders = []
    nf, nv = devset.nominal_freq, devset.nominal_volt
    for i, e in enumerate(devset.entries):
        p_e[i] = e.p_e
        q_e[i] = e.q_e
        if e.kind == "infinite":
            inf_mask[i] = True
            continue
        if e.kind == "crpl":
            continue  # no dynamic capacity; voltage spring comes from -2 q_e
        s_th[i] = e.s_theta
        s_v[i] = e.s_v
        if e.params is not None:
            expect = (e.s_theta * nf.j, e.s_theta * nf.d, e.s_theta * nf.k,
                      e.s_v * nv.d, e.s_v * nv.k)
            got = (e.params.j_ptheta, e.params.d_ptheta, e.params.k_ptheta,
                   e.params.d_qv, e.params.k_qv)
            scale = max(1.0, *(abs(v) for v in expect))
            if any(abs(a - b) > rtol * scale for a, b in zip(got, expect)):
                offenders.append(e.bus)
    if offenders:
        raise ConsistencyError(
            f"heterogeneous unified parameters at buses {offenders}: "
            "declared params do not equal scaling x nominal")
    return DeviceMatrices(bus_ids=devset.bus_ids, s_theta=s_th, s_v=s_v,
                          infinite=inf_mask, p_e=p_e, q_e=q_e,
                          nominal_freq=nf, nominal_volt=nv, omega0=devset.omega0)


def voltage_springs(devset: DeviceSet, mats: DeviceMatrices) -> np.ndarray:
    """Per-device static voltage spring before the power shift.

    nominal convention: spring_i = s_v_i * K0; springs convention: the
    s_v entry is the spring itself. CRPLs carry zero here either way.
    """
    if devset.voltage_convention == "springs":
        return mats.s_v.copy()
    return mats.s_v * mats.nominal_volt.k


def shift_load_spring(springs: np.ndarray, q_e: np.ndarray) -> np.ndarray:
    """Move the steady-state power matrix to the device side: each spring
    becomes k + 2*q_e (a crpl consuming Q turns into the pure spring -2Q).
    Damping entries are untouched by construction."""
    springs = np.asarray(springs, float)
    q_e = np.asarray(q_e, float)
    if springs.shape != q_e.shape:
        raise InputError("spring/power dimension mismatch")
    return springs + 2.0 * q_e
