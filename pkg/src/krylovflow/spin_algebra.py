"""Pauli operators, the transverse-field Ising Hamiltonian, and jump operators.

All operators are dense complex ``numpy`` arrays. Tensor convention: site 1 is
the leftmost Kronecker factor, so ``site_operator(op, 1, N)`` is
``op (x) I (x) ... (x) I``.
"""

from dataclasses import dataclass
from functools import reduce
import math

import numpy as np

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI_PLUS = 0.5 * (PAULI_X + 1.0j * PAULI_Y)
PAULI_MINUS = 0.5 * (PAULI_X - 1.0j * PAULI_Y)

_PAULI = {
    "I": PAULI_I,
    "X": PAULI_X,
    "Y": PAULI_Y,
    "Z": PAULI_Z,
    "PLUS": PAULI_PLUS,
    "MINUS": PAULI_MINUS,
}


def pauli_matrix(kind):
    """Return the standard 2x2 matrix for ``kind`` in {I,X,Y,Z,PLUS,MINUS}."""
    try:
        return _PAULI[kind.upper()].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli kind {kind!r}") from None


def site_operator(op, site, n_sites):
    """Embed a 2x2 operator at ``site`` (1-based) of an ``n_sites`` chain."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError("site operator must be 2x2")
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} outside 1..{n_sites}")
    factors = [op if k == site else PAULI_I for k in range(1, n_sites + 1)]
    return reduce(np.kron, factors)


@dataclass(frozen=True)
class ModelSpec:
    """Spin-chain parameters: couplings plus jump-operator placement.

    ``boundary_sites`` receive raising/lowering jumps of strength sqrt(alpha),
    ``bulk_sites`` receive dephasing jumps of strength sqrt(gamma). Defaults:
    boundary = {1, N}, bulk = {2, ..., N-1}.
    """

    N: int
    g: float
    h: float
    alpha: float = 0.0
    gamma: float = 0.0
    boundary_sites: tuple = None
    bulk_sites: tuple = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        for name in ("g", "h", "alpha", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.alpha < 0 or self.gamma < 0:
            raise ValueError("jump strengths must be nonnegative")
        if self.boundary_sites is None:
            object.__setattr__(self, "boundary_sites",
                               tuple(sorted({1, self.N})))
        else:
            object.__setattr__(self, "boundary_sites",
                               tuple(sorted(set(self.boundary_sites))))
        if self.bulk_sites is None:
            object.__setattr__(self, "bulk_sites",
                               tuple(range(2, self.N)))
        else:
            object.__setattr__(self, "bulk_sites",
                               tuple(sorted(set(self.bulk_sites))))
        for k in self.boundary_sites + self.bulk_sites:
            if not 1 <= k <= self.N:
                raise ValueError(f"site index {k} outside 1..{self.N}")

    @property
    def dim(self):
        return 2 ** self.N


def build_tfim(spec):
    """Open-boundary TFIM: H = -sum ZZ - g sum X - h sum Z."""
    d = spec.dim
    H = np.zeros((d, d), dtype=complex)
    for j in range(1, spec.N):
        H -= site_operator(PAULI_Z, j, spec.N) @ site_operator(PAULI_Z, j + 1, spec.N)
    for j in range(1, spec.N + 1):
        H -= spec.g * site_operator(PAULI_X, j, spec.N)
        H -= spec.h * site_operator(PAULI_Z, j, spec.N)
    return H


def build_jump_operators(spec):
    """Jump operators: sqrt(alpha) sigma+- on boundary sites, sqrt(gamma) sigma_z in bulk.

    Empty list when alpha = gamma = 0.
    """
    jumps = []
    if spec.alpha > 0:
        root_a = math.sqrt(spec.alpha)
        for k in spec.boundary_sites:
            jumps.append(root_a * site_operator(PAULI_PLUS, k, spec.N))
            jumps.append(root_a * site_operator(PAULI_MINUS, k, spec.N))
    if spec.gamma > 0:
        root_g = math.sqrt(spec.gamma)
        for k in spec.bulk_sites:
            jumps.append(root_g * site_operator(PAULI_Z, k, spec.N))
    return jumps
