"""Stationary steady states and Floquet harmonic components of the driven
generalized master equation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSteadyState,
    NoConvergence,
    SingularHarmonicSolve,
)
from .gme import Superoperator

STEADY_RESIDUAL_TOL = 1e-10
HARMONIC_RESIDUAL_TOL = 1e-9
NULLSPACE_GAP_TOL = 1e-10


def _as_matrix(l) -> np.ndarray:
    return l.matrix if isinstance(l, Superoperator) else np.asarray(l)


def steady_state(
    l,
    check_uniqueness: bool = False,
    residual_tol: float = STEADY_RESIDUAL_TOL,
) -> np.ndarray:
    """Unique trace-one steady state of a trace-preserving Liouvillian.

    The flattened linear system L vec(rho) = 0 is closed by replacing its last
    row with the trace-normalization row and solved directly; if that solve is
    ill-conditioned the smallest right singular vector is used instead. With
    ``check_uniqueness`` the second-smallest singular value of L is verified to
    exceed the null-space gap tolerance (expensive: full SVD).
    """
    lm = _as_matrix(l)
    n = lm.shape[0]
    d = int(round(n**0.5))
    trace_row = np.zeros(n, dtype=complex)
    trace_row[:: d + 1] = 1.0
    m = lm.copy()
    m[-1, :] = trace_row
    rhs = np.zeros(n, dtype=complex)
    rhs[-1] = 1.0
    try:
        vec = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError:
        vec = None
    if vec is None or not np.isfinite(vec).all() or np.linalg.norm(lm @ vec) > residual_tol:
        # fall back to the null vector from an SVD of L itself
        _, s, vh = np.linalg.svd(lm)
        vec = vh[-1].conj()
        tr = vec[:: d + 1].sum()
        if abs(tr) < 1e-14:
            raise DegenerateSteadyState("null vector is traceless; degenerate sectors suspected")
        vec = vec / tr
        if s[-2] < NULLSPACE_GAP_TOL:
            raise DegenerateSteadyState(
                f"Liouvillian null space not unique (sigma_2 = {s[-2]:.3e}); "
                "at zero offset the parity sectors each carry a stationary state"
            )
    if check_uniqueness:
        s = np.linalg.svd(lm, compute_uv=False)
        if s[-2] < NULLSPACE_GAP_TOL:
            raise DegenerateSteadyState(
                f"Liouvillian null space not unique (sigma_2 = {s[-2]:.3e})"
            )
    residual = np.linalg.norm(lm @ vec)
    if residual > residual_tol:
        raise NoConvergence(f"steady-state residual {residual:.3e} > {residual_tol:.1e}")
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


@dataclass(frozen=True)
class FloquetHarmonics:
    """Fourier components rho^k of the time-periodic steady state."""

    order: int
    omega_d: float
    components: dict = field(default_factory=dict)

    def __getitem__(self, k: int) -> np.ndarray:
        d = self.components[0].shape[0]
        return self.components.get(k, np.zeros((d, d), dtype=complex))

    @property
    def rho0(self) -> np.ndarray:
        return self.components[0]


def floquet_harmonics(
    l,
    l_plus,
    l_minus,
    omega_d: float,
    order: int = 2,
    residual_tol: float = HARMONIC_RESIDUAL_TOL,
) -> FloquetHarmonics:
    """Solve the harmonic recursion (L - i k w_d) rho^k + L+ rho^{k-1} + L- rho^{k+1} = 0.

    ``l`` is the full Liouvillian (coherent part included). The chain is
    truncated at |k| = order with rho^{+/-(order+1)} = 0 and folded into the
    k = 0 row by sequential elimination on the tridiagonal-in-k structure:
    rho^k = S_k rho^{k-1} for k > 0 and rho^{-k} = T_k rho^{-(k-1)} for k > 0.
    The k = 0 row is then solved with the trace constraint.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if omega_d <= 0:
        raise ValueError(f"omega_d must be > 0, got {omega_d}")
    lm = _as_matrix(l)
    lp = _as_matrix(l_plus)
    lmn = _as_matrix(l_minus)
    n = lm.shape[0]
    d = int(round(n**0.5))
    eye = np.eye(n, dtype=complex)

    s_prop = {}  # rho^k = s_prop[k] rho^{k-1}, k = order .. 1
    block = None
    for k in range(order, 0, -1):
        shifted = lm - 1j * k * omega_d * eye
        if block is not None:
            shifted = shifted + lmn @ block
        try:
            block = -scipy.linalg.solve(shifted, lp)
        except scipy.linalg.LinAlgError as exc:
            raise SingularHarmonicSolve(f"harmonic block k={k} singular: {exc}") from exc
        s_prop[k] = block

    t_prop = {}  # rho^{-k} = t_prop[k] rho^{-(k-1)}
    block = None
    for k in range(order, 0, -1):
        shifted = lm + 1j * k * omega_d * eye
        if block is not None:
            shifted = shifted + lp @ block
        try:
            block = -scipy.linalg.solve(shifted, lmn)
        except scipy.linalg.LinAlgError as exc:
            raise SingularHarmonicSolve(f"harmonic block k=-{k} singular: {exc}") from exc
        t_prop[k] = block

    folded = lm + lmn @ s_prop[1] + lp @ t_prop[1]
    rho0 = steady_state(folded)

    comps = {0: rho0}
    vec = rho0.reshape(-1)
    up = vec
    for k in range(1, order + 1):
        up = s_prop[k] @ up
        comps[k] = up.reshape(d, d)
    down = vec
    for k in range(1, order + 1):
        down = t_prop[k] @ down
        comps[-k] = down.reshape(d, d)

    for k in range(-order, order + 1):
        above = comps.get(k + 1, np.zeros((d, d), dtype=complex))
        below = comps.get(k - 1, np.zeros((d, d), dtype=complex))
        row = (lm - 1j * k * omega_d * eye) @ comps[k].reshape(-1)
        row = row + lp @ below.reshape(-1) + lmn @ above.reshape(-1)
        resid = np.linalg.norm(row)
        if resid > residual_tol:
            raise NoConvergence(f"harmonic row k={k} residual {resid:.3e} > {residual_tol:.1e}")
    return FloquetHarmonics(order=order, omega_d=omega_d, components=comps)


def harmonic_convergence(
    make_harmonics,
    observable,
    order: int = 2,
    step: int = 2,
    tol: float = 1e-8,
    max_order: int = 8,
) -> FloquetHarmonics:
    """Increase the truncation order until ``observable(harmonics)`` is stable.

    ``make_harmonics(order)`` builds the chain at a given order; the scalar
    ``observable`` (e.g. the reflectivity trace) is compared across order and
    order + step.
    """
    current = make_harmonics(order)
    val = observable(current)
    while order + step <= max_order:
        nxt = make_harmonics(order + step)
        nval = observable(nxt)
        if abs(nval - val) <= tol * max(1.0, abs(nval)):
            return nxt
        current, val, order = nxt, nval, order + step
    raise NoConvergence(f"Floquet truncation did not converge by order {max_order}")
