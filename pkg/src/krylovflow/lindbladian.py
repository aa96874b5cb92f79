"""Vectorization and superoperator assembly for closed and open dynamics.

Vectorization is column-major (Fortran order), so that
vec(A X B) = (B^T kron A) vec(X). With this convention the commutator
superoperator is I kron H - H^T kron I acting on vec(X).
"""

from dataclasses import dataclass

import numpy as np

# Dense d^2 x d^2 assembly is limited to d = 2^6 (4096^2 superoperator).
MAX_QUBITS = 6
MAX_DIM = 4 ** MAX_QUBITS


@dataclass(frozen=True)
class Superoperator:
    """Dense superoperator acting on column-stacked operators."""

    matrix: np.ndarray
    hermitian: bool

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def d(self):
        return int(round(np.sqrt(self.dim)))


def as_matrix(L):
    """Accept a Superoperator or a plain square array."""
    if isinstance(L, Superoperator):
        return L.matrix
    M = np.asarray(L, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("superoperator must be a square matrix")
    return M


def hermiticity_defect(M):
    """Max entrywise |M - M^dagger|."""
    M = np.asarray(M)
    return float(np.abs(M - M.conj().T).max())


def vectorize(M):
    """Column-stack a square matrix into a d^2 vector."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("vectorize requires a square matrix")
    return M.flatten(order="F")


def devectorize(v):
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=complex)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError("vector length is not a perfect square")
    return v.reshape((d, d), order="F")


def _check_dim(d):
    if d * d > MAX_DIM:
        raise ValueError(
            f"dense superoperator dimension {d * d}^2 exceeds the supported "
            f"ceiling ({MAX_DIM}^2, i.e. {MAX_QUBITS} qubits)")


def build_liouvillian_closed(H, herm_tol=1e-10):
    """Commutator superoperator I kron H - H^T kron I. Requires Hermitian H."""
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    _check_dim(d)
    if hermiticity_defect(H) > herm_tol * max(1.0, np.abs(H).max()):
        raise ValueError("closed Liouvillian requires a Hermitian Hamiltonian")
    eye = np.eye(d)
    M = np.kron(eye, H) - np.kron(H.T, eye)
    return Superoperator(matrix=M, hermitian=True)


def build_lindbladian(H, jumps):
    """Vectorized Lindblad generator.

    L_o = (I kron H - H^T kron I)
          + (i/2) sum_k [I kron Lk'Lk + Lk^T Lk* kron I - 2 Lk^T kron Lk'].

    Reduces to :func:`build_liouvillian_closed` for an empty jump list.
    """
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    _check_dim(d)
    if not jumps:
        return build_liouvillian_closed(H)
    eye = np.eye(d)
    M = np.kron(eye, H) - np.kron(H.T, eye)
    diss = np.zeros_like(M)
    for Lk in jumps:
        Lk = np.asarray(Lk, dtype=complex)
        if Lk.shape != (d, d):
            raise ValueError("jump operator dimension mismatch with H")
        LdL = Lk.conj().T @ Lk
        diss += np.kron(eye, LdL) + np.kron(LdL.T, eye)
        diss -= 2.0 * np.kron(Lk.T, Lk.conj().T)
    M = M + 0.5j * diss
    return Superoperator(matrix=M, hermitian=False)


def build_model_lindbladian(spec):
    """Assemble the Lindbladian for a :class:`ModelSpec` in one call."""
    from .spin_algebra import build_tfim, build_jump_operators

    H = build_tfim(spec)
    return build_lindbladian(H, build_jump_operators(spec))


def uniform_seed(d):
    """Vectorized uniformly distributed operator: d^2 entries of 1/d, unit norm."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return np.full(d * d, 1.0 / d, dtype=complex)
