"""Dressed (eigen)basis of the static Hamiltonian: ordering, labeling, and
positive/negative/zero frequency splitting of system operators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguousContinuation, DimensionMismatch, NotHermitian, UnknownLabel
from .model import (
    ModelKind,
    QubitFrame,
    SystemParams,
    SIGMA_Z,
    annihilation,
    assert_hermitian,
    build_static_hamiltonian,
    qubit_op,
)

DEGENERACY_TOL = 1e-10
DEFAULT_OMEGA_MIN = 1e-9


@dataclass(frozen=True)
class DressedBasis:
    """Eigen-decomposition of the static Hamiltonian, sorted by ascending energy.

    ``vectors[:, i]`` is the i-th eigenstate expressed in the bare qubit (x) Fock
    basis. ``labels`` are optional continuation labels ("0", "1-", "1+", ...).
    """

    energies: np.ndarray
    vectors: np.ndarray
    labels: tuple[str, ...] | None = None

    @property
    def dim(self) -> int:
        return self.energies.size

    def to_dressed(self, op: np.ndarray) -> np.ndarray:
        """Transform a bare-basis operator into the dressed basis."""
        if op.shape != self.vectors.shape:
            raise DimensionMismatch(f"operator shape {op.shape} vs basis dim {self.vectors.shape}")
        return self.vectors.conj().T @ op @ self.vectors

    def with_labels(self, labels) -> "DressedBasis":
        labels = tuple(labels)
        if len(labels) != self.dim:
            raise UnknownLabel(f"expected {self.dim} labels, got {len(labels)}")
        return replace(self, labels=labels)

    def index_of(self, label: str) -> int:
        if self.labels is None:
            raise UnknownLabel("basis carries no labels")
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"label {label!r} not present in basis") from None


def diagonalize(
    h: np.ndarray,
    symmetry_op: np.ndarray | None = None,
    reference: np.ndarray | None = None,
) -> DressedBasis:
    """Hermitian eigendecomposition with deterministic handling of degeneracies.

    Within clusters of numerically degenerate eigenvalues, eigenvectors are
    re-mixed to diagonalize ``symmetry_op`` (ordered by descending symmetry
    eigenvalue, +1 first), or ordered by descending overlap with the columns of
    ``reference`` when given. Without either, LAPACK output is kept as is.
    """
    assert_hermitian(h, name="Hamiltonian")
    energies, vectors = np.linalg.eigh(h)
    scale = max(abs(energies[0]), abs(energies[-1]), 1.0)
    for lo, hi in _degenerate_clusters(energies, DEGENERACY_TOL * scale):
        block = vectors[:, lo:hi]
        if symmetry_op is not None:
            sym = block.conj().T @ symmetry_op @ block
            vals, mix = np.linalg.eigh((sym + sym.conj().T) / 2.0)
            order = np.argsort(-vals)
            vectors[:, lo:hi] = block @ mix[:, order]
        elif reference is not None:
            ref = reference[:, lo:hi]
            ov = np.abs(block.conj().T @ ref) ** 2
            order = np.argmax(ov, axis=0)
            if len(set(order.tolist())) == hi - lo:
                vectors[:, lo:hi] = block[:, order]
    return DressedBasis(energies=energies, vectors=vectors)


def _degenerate_clusters(energies: np.ndarray, tol: float):
    start = 0
    for i in range(1, energies.size + 1):
        if i == energies.size or energies[i] - energies[i - 1] > tol:
            if i - start > 1:
                yield start, i
            start = i


def frequency_components(x_dressed: np.ndarray, which: str) -> np.ndarray:
    """Triangular split of a dressed-basis operator.

    "plus" keeps the strictly upper-triangular part (couplings that lower the
    energy, j > i), "minus" its adjoint, "zero" the diagonal. For Hermitian X
    the three parts sum back to X exactly.
    """
    if which == "plus":
        return np.triu(x_dressed, k=1)
    if which == "minus":
        return np.triu(x_dressed, k=1).conj().T
    if which == "zero":
        return np.diag(np.diag(x_dressed))
    raise ValueError(f"which must be 'plus', 'minus' or 'zero', got {which!r}")


@dataclass(frozen=True)
class TransitionTable:
    """Positive transition frequencies omega_ji = E_j - E_i (j > i) above a threshold."""

    i: np.ndarray
    j: np.ndarray
    omega: np.ndarray
    omega_min: float

    def __len__(self) -> int:
        return self.omega.size

    def rows(self, basis: DressedBasis | None = None):
        for k in range(len(self)):
            i, j = int(self.i[k]), int(self.j[k])
            li = basis.labels[i] if basis is not None and basis.labels else str(i)
            lj = basis.labels[j] if basis is not None and basis.labels else str(j)
            yield i, j, li, lj, float(self.omega[k])


def build_transition_table(basis: DressedBasis, omega_min: float = DEFAULT_OMEGA_MIN) -> TransitionTable:
    e = basis.energies
    ii, jj = np.triu_indices(e.size, k=1)
    om = e[jj] - e[ii]
    keep = om > omega_min
    return TransitionTable(i=ii[keep], j=jj[keep], omega=om[keep], omega_min=omega_min)


def per_transition_components(
    x_dressed: np.ndarray,
    table: TransitionTable,
    merge_tol: float = DEFAULT_OMEGA_MIN,
) -> list[tuple[float, np.ndarray]]:
    """Resolve the positive-frequency part into single-transition operators.

    Transitions within ``merge_tol`` of each other are merged into one
    component so degenerate frequencies are not double counted. The summed
    components reconstruct the omega_min-thresholded upper triangle of X.
    """
    if len(table) == 0:
        return []
    order = np.argsort(table.omega, kind="stable")
    comps: list[tuple[float, np.ndarray]] = []
    dim = x_dressed.shape[0]
    cur = np.zeros_like(x_dressed)
    members: list[float] = []
    for k in order:
        om = float(table.omega[k])
        if members and om - members[0] > merge_tol:
            comps.append((float(np.mean(members)), cur))
            cur = np.zeros((dim, dim), dtype=complex)
            members = []
        i, j = int(table.i[k]), int(table.j[k])
        cur[i, j] = x_dressed[i, j]
        members.append(om)
    comps.append((float(np.mean(members)), cur))
    return comps


def jc_initial_labels(params: SystemParams) -> tuple[str, ...]:
    """Labels for a near-decoupled zero-offset basis, seeded from the JC doublets.

    Diagonalizes the rotating-wave (Jaynes-Cummings) counterpart of the model
    at the same coupling and matches its eigenstates to the full dressed states
    by maximal overlap. Ground state is "0"; the doublet of excitation sector n
    is labeled "n-", "n+" by ascending energy.
    """
    n_fock = params.n_fock
    a = annihilation(params)
    sigma_p = qubit_op(np.array([[0, 1], [0, 0]], dtype=complex), n_fock)
    # rotating-wave part of omega_r eta (a + a^dag) sigma_tilde_x: the
    # transition component of sigma_tilde_x is -sin(theta) sigma_x, so the
    # JC coupling inherits that sign (it fixes which doublet member is "n-")
    g = -params.omega_r * params.eta * QubitFrame.from_params(params).sin_theta
    hjc = (
        0.5 * params.omega0 * qubit_op(SIGMA_Z, n_fock)
        + params.omega_r * a.conj().T @ a
        + g * (a @ sigma_p + a.conj().T @ sigma_p.conj().T)
    )
    e_jc, v_jc = np.linalg.eigh(hjc)
    n_exc_op = a.conj().T @ a + sigma_p @ sigma_p.conj().T
    n_exc = np.rint(np.real(np.einsum("ij,jk,ki->i", v_jc.conj().T, n_exc_op, v_jc))).astype(int)
    labels = [""] * e_jc.size
    for sector in np.unique(n_exc):
        idx = np.flatnonzero(n_exc == sector)
        idx = idx[np.argsort(e_jc[idx], kind="stable")]
        if sector == 0:
            labels[idx[0]] = "0"
        elif idx.size >= 2:
            labels[idx[0]] = f"{sector}-"
            labels[idx[1]] = f"{sector}+"
            for extra, q in enumerate(idx[2:]):
                labels[q] = f"{sector}+{extra + 2}"
        else:
            labels[idx[0]] = f"{sector}-"
    basis = diagonalize(build_static_hamiltonian(params))
    ov = np.abs(basis.vectors.conj().T @ v_jc) ** 2
    row, col = linear_sum_assignment(-ov)
    out = [""] * basis.dim
    for r, c in zip(row, col):
        out[r] = labels[c]
    return tuple(out)


def plain_labels(dim: int) -> tuple[str, ...]:
    """Energy-ordered labels "0", "1", ... for broken-symmetry sweeps."""
    return tuple(str(i) for i in range(dim))


def label_states(
    bases: list[DressedBasis],
    initial_labels=None,
    min_overlap: float = 0.5,
) -> list[DressedBasis]:
    """Assign continuation labels along an ordered parameter sweep.

    The first basis receives ``initial_labels`` (plain indices when omitted);
    each subsequent basis inherits labels by a maximal-overlap assignment with
    the previous point. Overlaps below ``min_overlap`` trigger an
    AmbiguousContinuation warning but labeling proceeds.
    """
    if not bases:
        return []
    labels = tuple(initial_labels) if initial_labels is not None else plain_labels(bases[0].dim)
    out = [bases[0].with_labels(labels)]
    for step, basis in enumerate(bases[1:], start=1):
        prev = out[-1]
        ov = np.abs(basis.vectors.conj().T @ prev.vectors) ** 2
        row, col = linear_sum_assignment(-ov)
        assigned = [""] * basis.dim
        worst = 1.0
        for r, c in zip(row, col):
            assigned[r] = prev.labels[c]
            worst = min(worst, ov[r, c])
        if worst < min_overlap:
            warnings.warn(
                f"sweep step {step}: weakest continuation overlap {worst:.3f} < {min_overlap}",
                AmbiguousContinuation,
            )
        out.append(basis.with_labels(assigned))
    return out


def dressed_basis(params: SystemParams, use_parity: bool | None = None) -> DressedBasis:
    """Diagonalize the static Hamiltonian of ``params``.

    Parity-based tie-breaking of degenerate doublets is applied automatically
    at zero flux offset (where parity is conserved) unless overridden.
    """
    from .model import parity_operator

    h = build_static_hamiltonian(params)
    if use_parity is None:
        use_parity = params.epsilon == 0.0
    sym = parity_operator(params.n_fock) if use_parity else None
    return diagonalize(h, symmetry_op=sym)
