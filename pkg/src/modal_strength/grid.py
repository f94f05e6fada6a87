"""Network model: admittance assembly, Kron reduction, power flow, and the
linearized Jacobian blocks L and N.

Conventions (all quantities per-unit):
  * branch admittance y = 1/(r + jx); Y[i][j] = -y for a branch i-j,
    Y[i][i] = sum of incident branch admittances plus the bus shunt g + jb;
  * power injected into the network is positive;
  * L and N are built from the off-diagonal entries G_ij + jB_ij of the
    (reduced) admittance matrix, so their row sums vanish identically --
    rotating all angles together leaves the power flow unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InputError,
    PowerFlowDivergenceError,
    ReductionError,
    TopologyError,
)

MAX_BUSES = 512


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str = "device"  # "device" | "interior"
    shunt_g: float = 0.0
    shunt_b: float = 0.0


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float = 0.0
    x: float = 0.0


@dataclass(frozen=True)
class Injection:
    """Declared bus injection; give v instead of q to pin the voltage (PV bus)."""

    bus: int
    p: float = 0.0
    q: float | None = None
    v: float | None = None


@dataclass(frozen=True)
class OperatingPoint:
    theta_e: np.ndarray
    v_e: np.ndarray
    p_e: np.ndarray
    q_e: np.ndarray

    def restrict(self, idx) -> "OperatingPoint":
        return OperatingPoint(self.theta_e[idx], self.v_e[idx],
                              self.p_e[idx], self.q_e[idx])


@dataclass(frozen=True)
class JacobianBlocks:
    l: np.ndarray
    n: np.ndarray
    p_e: np.ndarray
    q_e: np.ndarray
    v_e: np.ndarray


def bus_index(buses) -> dict[int, int]:
    idx = {}
    for pos, b in enumerate(buses):
        if b.id in idx:
            raise InputError(f"duplicate bus id {b.id}")
        idx[b.id] = pos
    return idx


def _validate_topology(buses, branches, idx):
    n = len(buses)
    if n == 0:
        raise InputError("empty bus list")
    if n > MAX_BUSES:
        raise InputError(f"bus count {n} exceeds supported maximum {MAX_BUSES}")
    seen_pairs = set()
    adj = [[] for _ in range(n)]
    for br in branches:
        if br.from_bus not in idx or br.to_bus not in idx:
            raise InputError(f"branch {br.from_bus}-{br.to_bus} references unknown bus")
        if br.from_bus == br.to_bus:
            raise InputError(f"branch {br.from_bus}-{br.to_bus} is a self-loop")
        if br.x == 0.0:
            raise InputError(f"branch {br.from_bus}-{br.to_bus} has zero reactance")
        pair = frozenset((br.from_bus, br.to_bus))
        if pair in seen_pairs:
            raise InputError(f"duplicate branch {br.from_bus}-{br.to_bus}")
        seen_pairs.add(pair)
        i, j = idx[br.from_bus], idx[br.to_bus]
        adj[i].append(j)
        adj[j].append(i)
    if n > 1:
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in adj[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != n:
            missing = sorted(buses[i].id for i in range(n) if i not in seen)
            raise TopologyError(f"network is disconnected; unreachable buses {missing}")


def build_admittance(buses, branches) -> np.ndarray:
    """Nodal admittance matrix in the order the buses are listed."""
    idx = bus_index(buses)
    _validate_topology(buses, branches, idx)
    n = len(buses)
    y = np.zeros((n, n), dtype=complex)
    for br in branches:
        i, j = idx[br.from_bus], idx[br.to_bus]
        yb = 1.0 / complex(br.r, br.x)
        y[i, i] += yb
        y[j, j] += yb
        y[i, j] -= yb
        y[j, i] -= yb
    for pos, b in enumerate(buses):
        y[pos, pos] += complex(b.shunt_g, b.shunt_b)
    return y


def kron_reduce(y: np.ndarray, retained: list[int], bus_ids=None) -> np.ndarray:
    """Schur complement onto the retained positions (order preserved).

    bus_ids, when given, is used only to name offending buses in errors.
    """
    n = y.shape[0]
    retained = list(retained)
    if sorted(set(retained)) != sorted(retained):
        raise InputError("retained positions contain duplicates")
    interior = [i for i in range(n) if i not in set(retained)]
    if not interior:
        return y[np.ix_(retained, retained)].copy()
    ytt = y[np.ix_(retained, retained)]
    yti = y[np.ix_(retained, interior)]
    yit = y[np.ix_(interior, retained)]
    yii = y[np.ix_(interior, interior)]
    try:
        sol = np.linalg.solve(yii, yit)
    except np.linalg.LinAlgError:
        names = [bus_ids[i] if bus_ids else i for i in interior]
        raise ReductionError(f"interior block is singular; cannot eliminate buses {names}")
    cond = np.linalg.cond(yii)
    if not np.isfinite(cond) or cond > 1e12:
        names = [bus_ids[i] if bus_ids else i for i in interior]
        raise ReductionError(
            f"interior block nearly singular (cond={cond:.2e}) eliminating buses {names}")
    return ytt - yti @ sol


def _power_injections(y, theta, v):
    """Complex power S = V (Y V)* at every bus."""
    vc = v * np.exp(1j * theta)
    return vc * np.conj(y @ vc)


def solve_power_flow(buses, branches, injections, mode="flat", slack=None,
                     tol=1e-8, max_iter=50) -> OperatingPoint:
    """Operating point of the full network.

    flat: theta=0, v=1, p/q copied from the declared injections.
    newton: polar Newton-Raphson from a flat start, full refactorization
    each iteration; buses with a declared v are held at that magnitude.
    """
    if mode not in ("flat", "newton"):
        raise InputError(f"unknown power-flow mode {mode!r}")
    idx = bus_index(buses)
    _validate_topology(buses, branches, idx)
    n = len(buses)
    p = np.zeros(n)
    q = np.zeros(n)
    vset = np.full(n, np.nan)
    for inj in injections:
        if inj.bus not in idx:
            raise InputError(f"injection references unknown bus {inj.bus}")
        i = idx[inj.bus]
        p[i] = inj.p
        if inj.v is not None:
            vset[i] = inj.v
            if inj.q is not None:
                raise InputError(f"injection at bus {inj.bus} declares both q and v")
        else:
            q[i] = inj.q if inj.q is not None else 0.0

    if mode == "flat":
        return OperatingPoint(np.zeros(n), np.ones(n), p, q)

    if slack is None or slack not in idx:
        raise InputError("newton mode requires a slack bus present in the bus list")
    y = build_admittance(buses, branches)
    sl = idx[slack]
    pv = [i for i in range(n) if i != sl and not np.isnan(vset[i])]
    pq = [i for i in range(n) if i != sl and np.isnan(vset[i])]
    nonslack = pv + pq

    theta = np.zeros(n)
    v = np.ones(n)
    for i in pv:
        v[i] = vset[i]
    if not np.isnan(vset[sl]):
        v[sl] = vset[sl]

    g, b = y.real, y.imag
    mism = np.inf
    for _ in range(max_iter):
        s = _power_injections(y, theta, v)
        dp = p[nonslack] - s.real[nonslack]
        dq = q[pq] - s.imag[pq]
        mism = max(np.max(np.abs(dp), initial=0.0), np.max(np.abs(dq), initial=0.0))
        if mism < tol:
            s = _power_injections(y, theta, v)
            return OperatingPoint(theta, v, s.real, s.imag)
        # polar Jacobian: rows P(nonslack)+Q(pq), cols theta(nonslack)+V(pq)
        nn, npq = len(nonslack), len(pq)
        jac = np.zeros((nn + npq, nn + npq))
        pcal, qcal = s.real, s.imag
        for a, i in enumerate(nonslack):
            for c, j in enumerate(nonslack):
                if i == j:
                    jac[a, c] = -qcal[i] - b[i, i] * v[i] ** 2
                else:
                    tij = theta[i] - theta[j]
                    jac[a, c] = v[i] * v[j] * (g[i, j] * np.sin(tij) - b[i, j] * np.cos(tij))
            for c, j in enumerate(pq):
                if i == j:
                    jac[a, nn + c] = pcal[i] / v[i] + g[i, i] * v[i]
                else:
                    tij = theta[i] - theta[j]
                    jac[a, nn + c] = v[i] * (g[i, j] * np.cos(tij) + b[i, j] * np.sin(tij))
        for a, i in enumerate(pq):
            for c, j in enumerate(nonslack):
                if i == j:
                    jac[nn + a, c] = pcal[i] - g[i, i] * v[i] ** 2
                else:
                    tij = theta[i] - theta[j]
                    jac[nn + a, c] = -v[i] * v[j] * (g[i, j] * np.cos(tij) + b[i, j] * np.sin(tij))
            for c, j in enumerate(pq):
                if i == j:
                    jac[nn + a, nn + c] = qcal[i] / v[i] - b[i, i] * v[i]
                else:
                    tij = theta[i] - theta[j]
                    jac[nn + a, nn + c] = v[i] * (g[i, j] * np.sin(tij) - b[i, j] * np.cos(tij))
        try:
            step = np.linalg.solve(jac, np.concatenate([dp, dq]))
        except np.linalg.LinAlgError:
            raise PowerFlowDivergenceError(
                f"newton jacobian singular at mismatch {mism:.3e}")
        theta[nonslack] += step[:nn]
        v[pq] += step[nn:]
        if np.any(v <= 0):
            raise PowerFlowDivergenceError("newton iterate produced non-positive voltage")
    raise PowerFlowDivergenceError(
        f"newton power flow did not converge in {max_iter} iterations "
        f"(final mismatch {mism:.3e} p.u.)")


def build_jacobian_blocks(y_red: np.ndarray, op: OperatingPoint) -> JacobianBlocks:
    """L and N from the reduced admittance matrix at the operating point."""
    n = y_red.shape[0]
    if len(op.theta_e) != n or len(op.v_e) != n:
        raise InputError(
            f"operating point dimension {len(op.theta_e)} != matrix size {n}")
    theta = np.asarray(op.theta_e, float)
    v = np.asarray(op.v_e, float)
    g = y_red.real
    b = y_red.imag
    tij = theta[:, None] - theta[None, :]
    vv = v[:, None] * v[None, :]
    cL = vv * (b * np.cos(tij) - g * np.sin(tij))
    cN = vv * (-b * np.sin(tij) - g * np.cos(tij))
    np.fill_diagonal(cL, 0.0)
    np.fill_diagonal(cN, 0.0)
    l = -cL
    nmat = -cN
    np.fill_diagonal(l, cL.sum(axis=1))
    np.fill_diagonal(nmat, cN.sum(axis=1))
    return JacobianBlocks(l=l, n=nmat, p_e=np.asarray(op.p_e, float),
                          q_e=np.asarray(op.q_e, float), v_e=v)


def check_flow_invariance(blocks: JacobianBlocks) -> float:
    """Max |row sum| over L and N; zero for any valid linearization."""
    rl = np.max(np.abs(blocks.l.sum(axis=1)))
    rn = np.max(np.abs(blocks.n.sum(axis=1)))
    return float(max(rl, rn))


def schur_reduce_real(m: np.ndarray, keep: list[int], drop: list[int]):
    """Static (Schur) elimination of rows/cols ``drop`` from a real matrix.

    Returns (reduced, recover) where x_drop = recover @ x_keep when the
    eliminated balance equations carry no injection.
    """
    if not drop:
        return m[np.ix_(keep, keep)].copy(), np.zeros((0, len(keep)))
    mkk = m[np.ix_(keep, keep)]
    mkd = m[np.ix_(keep, drop)]
    mdk = m[np.ix_(drop, keep)]
    mdd = m[np.ix_(drop, drop)]
    try:
        sol = np.linalg.solve(mdd, mdk)
    except np.linalg.LinAlgError:
        raise ReductionError(f"static block singular; cannot eliminate positions {drop}")
    return mkk - mkd @ sol, -sol
