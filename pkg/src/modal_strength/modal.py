"""Generalized eigen-decomposition of the pencil (L, S) and per-mode
inertia/damping/spring parameters.

For positive diagonal S and symmetric L the problem is transformed to the
symmetric standard form S^-1/2 L S^-1/2 (guaranteed real spectrum); for
indefinite S (static screening with loads) the nonsymmetric S^-1 L problem
is solved densely and left vectors are recovered from the inverse of the
right-vector matrix, which enforces biorthogonality exactly.

Eigenvectors are normalized so the entry of largest magnitude equals +1
(ties broken by lowest bus index); the diagonal modal masses s_m = psi'S phi
and l_m = psi'L phi then carry all scaling.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegeneracyError, InputError, RegimeError

MAX_SIZE = 512
_ZERO_TOL = 1e-8
_CM_VEC_TOL = 1e-6


@dataclass(frozen=True)
class PencilSolution:
    eigenvalues: np.ndarray  # ascending
    phi: np.ndarray  # right eigenvectors, columns
    psi: np.ndarray  # left eigenvectors, columns
    s_m: np.ndarray  # diag(Psi' S Phi)
    l_m: np.ndarray  # diag(Psi' L Phi)
    l: np.ndarray  # inputs kept for residual checks
    s: np.ndarray
    labels: tuple[str, ...] | None = None  # "CM"/"DM" once classified

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def zero_tolerance(self) -> float:
        lmax = float(np.max(np.abs(self.eigenvalues), initial=0.0))
        return _ZERO_TOL * max(1.0, lmax)


def _order_degenerate_clusters(lam, phi):
    """Within clusters of equal eigenvalues, order columns by the index of
    the largest-magnitude eigenvector entry."""
    order = list(range(len(lam)))
    tol = _ZERO_TOL * max(1.0, float(np.max(np.abs(lam), initial=0.0)))
    i = 0
    while i < len(lam):
        j = i
        while j + 1 < len(lam) and abs(lam[j + 1] - lam[i]) <= tol:
            j += 1
        if j > i:
            cluster = order[i:j + 1]
            cluster.sort(key=lambda c: int(np.argmax(np.abs(phi[:, c]))))
            order[i:j + 1] = cluster
        i = j + 1
    return order


def solve_pencil(l: np.ndarray, s: np.ndarray) -> PencilSolution:
    """Full generalized eigensolution of L phi = lambda S phi.

    s is the diagonal of S (no zero entries; infinite-bus rows must have
    been eliminated already). Returns a biorthonormal solution
    (Psi' S Phi = I) sorted by ascending eigenvalue.
    """
    l = np.asarray(l, float)
    s = np.asarray(s, float).ravel()
    n = l.shape[0]
    if l.shape != (n, n) or len(s) != n:
        raise InputError("pencil dimension mismatch")
    if n == 0:
        raise InputError("empty pencil")
    if n > MAX_SIZE:
        raise InputError(f"pencil size {n} exceeds supported maximum {MAX_SIZE}")
    if np.any(s == 0.0):
        raise InputError("S has zero diagonal entries; eliminate static buses first")

    lscale = max(1.0, float(np.max(np.abs(l))))
    symmetric = np.max(np.abs(l - l.T)) <= 1e-9 * lscale
    if symmetric and np.all(s > 0.0):
        d = np.sqrt(s)
        b = l / np.outer(d, d)
        b = 0.5 * (b + b.T)
        lam, u = np.linalg.eigh(b)
        phi = u / d[:, None]
        psi = phi.copy()
    else:
        a = l / s[:, None]
        lam_c, phi_c = np.linalg.eig(a)
        lmax = max(1.0, float(np.max(np.abs(lam_c))))
        if np.max(np.abs(lam_c.imag)) > _ZERO_TOL * lmax:
            raise RegimeError(
                "pencil has complex eigenvalues (max imaginary part "
                f"{np.max(np.abs(lam_c.imag)):.3e}); outside the real-spectrum regime")
        lam = lam_c.real
        phi = np.real(phi_c)
        order = np.argsort(lam)
        lam = lam[order]
        phi = phi[:, order]
        cond = np.linalg.cond(phi)
        if not np.isfinite(cond) or cond > 1e10:
            raise DegeneracyError(
                f"defective pencil: eigenvector matrix condition {cond:.3e}")
        psi = (np.linalg.inv(phi) / s[None, :]).T
        sol = PencilSolution(lam, phi, psi, np.ones(n), lam.copy(), l, s)
        return _resort(sol)

    order = np.argsort(lam)
    lam = lam[order]
    phi = phi[:, order]
    psi = psi[:, order]
    sol = PencilSolution(lam, phi, psi, np.ones(n), lam.copy(), l, s)
    return _resort(sol)


def _resort(sol: PencilSolution) -> PencilSolution:
    order = _order_degenerate_clusters(sol.eigenvalues, sol.phi)
    return PencilSolution(sol.eigenvalues[order], sol.phi[:, order],
                          sol.psi[:, order], sol.s_m[order], sol.l_m[order],
                          sol.l, sol.s, None)


def _norm17(v: np.ndarray) -> np.ndarray:
    """Largest-magnitude entry scaled to +1; ties broken by lowest index."""
    a = np.abs(v)
    m = a.max()
    if m == 0.0:
        raise DegeneracyError("zero eigenvector")
    pivot = int(np.argmax(a >= m * (1.0 - 1e-9)))
    return v / v[pivot]


def normalize_eigenvectors(sol: PencilSolution) -> PencilSolution:
    """Apply the max-module-1 normalization and recompute s_m, l_m."""
    phi = np.column_stack([_norm17(sol.phi[:, k]) for k in range(sol.size)])
    psi = np.column_stack([_norm17(sol.psi[:, k]) for k in range(sol.size)])
    s_m = np.einsum("ik,i,ik->k", psi, sol.s, phi)
    l_m = np.einsum("ik,ij,jk->k", psi, sol.l, phi)
    return replace(sol, phi=phi, psi=psi, s_m=s_m, l_m=l_m, labels=None)


def classify_modes(sol: PencilSolution) -> PencilSolution:
    """Label each mode CM or DM.

    CM: eigenvalue within the zero tolerance and phi within 1e-6 of the
    all-ones vector. A connected pencil has at most one; with an infinite
    bus eliminated there is none.
    """
    tol = sol.zero_tolerance()
    near_zero = np.abs(sol.eigenvalues) <= tol
    if np.count_nonzero(near_zero) > 1:
        raise DegeneracyError(
            f"{np.count_nonzero(near_zero)} near-zero eigenvalues; "
            "disconnected network or degenerate pencil suspected")
    labels = []
    for k in range(sol.size):
        is_cm = bool(near_zero[k]) and bool(
            np.max(np.abs(sol.phi[:, k] - 1.0)) <= _CM_VEC_TOL)
        labels.append("CM" if is_cm else "DM")
    if labels.count("CM") > 1:
        raise DegeneracyError("multiple CM modes found")
    return replace(sol, labels=tuple(labels))


def decompose(l: np.ndarray, s: np.ndarray) -> PencilSolution:
    """solve -> normalize -> classify convenience pipeline."""
    return classify_modes(normalize_eigenvectors(solve_pencil(l, s)))


@dataclass(frozen=True)
class FrequencyModalParams:
    kinds: tuple[str, ...]
    eigenvalues: np.ndarray
    j_m: np.ndarray
    d_m: np.ndarray
    k_m: np.ndarray


@dataclass(frozen=True)
class VoltageModalParams:
    kinds: tuple[str, ...]
    eigenvalues: np.ndarray
    d_mv: np.ndarray
    k_mv: np.ndarray


def modal_params_frequency(sol: PencilSolution, nominal, omega0: float
                           ) -> FrequencyModalParams:
    """J_M = s_m J0, D_M = s_m D0, K_M = s_m K0 + omega0 l_m."""
    if sol.labels is None:
        raise InputError("classify the solution before extracting modal parameters")
    return FrequencyModalParams(
        kinds=sol.labels,
        eigenvalues=sol.eigenvalues.copy(),
        j_m=sol.s_m * nominal.j,
        d_m=sol.s_m * nominal.d,
        k_m=sol.s_m * nominal.k + omega0 * sol.l_m,
    )


def modal_params_voltage(sol: PencilSolution, nominal) -> VoltageModalParams:
    """D_MV = s_m D0, K_MV = s_m K0 + l_m."""
    if sol.labels is None:
        raise InputError("classify the solution before extracting modal parameters")
    return VoltageModalParams(
        kinds=sol.labels,
        eigenvalues=sol.eigenvalues.copy(),
        d_mv=sol.s_m * nominal.d,
        k_mv=sol.s_m * nominal.k + sol.l_m,
    )


def biorthogonality_residual(sol: PencilSolution) -> float:
    """Largest off-diagonal of Psi'SPhi and Psi'LPhi relative to their
    diagonal scale."""
    sm = sol.psi.T @ (sol.s[:, None] * sol.phi)
    lm = sol.psi.T @ sol.l @ sol.phi
    scale = max(1.0, float(np.max(np.abs(np.diag(sm)))),
                float(np.max(np.abs(np.diag(lm)))))
    off = max(np.max(np.abs(sm - np.diag(np.diag(sm)))),
              np.max(np.abs(lm - np.diag(np.diag(lm)))))
    return float(off / scale)


def eigen_residual(sol: PencilSolution) -> float:
    """Max residual of L phi = lambda S phi and psi'L = lambda psi'S."""
    r1 = sol.l @ sol.phi - (sol.s[:, None] * sol.phi) * sol.eigenvalues[None, :]
    r2 = sol.psi.T @ sol.l - (sol.psi.T * sol.eigenvalues[:, None]) * sol.s[None, :]
    scale = max(1.0, float(np.max(np.abs(sol.l))))
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))) / scale)


def resolvent_reconstruction_error(sol: PencilSolution, gain: float) -> float:
    """Relative Frobenius gap between Phi diag(s_m g + l_m)^-1 Psi' and
    (S g + L)^-1 for a scalar test gain g > 0."""
    lhs = sol.phi @ np.diag(1.0 / (sol.s_m * gain + sol.l_m)) @ sol.psi.T
    rhs = np.linalg.inv(np.diag(sol.s * gain) + sol.l)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
