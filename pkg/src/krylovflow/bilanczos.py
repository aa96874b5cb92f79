"""Bi-Lanczos tridiagonalization with full reorthogonalization.

Produces the coefficient sequences a_n (diagonal), b_n (superdiagonal) and
c_n (subdiagonal) of the generator in the bi-orthogonal Krylov basis,
together with the bases P, Q satisfying Q' P = I and Q' L P = T. The
Hermitian special case is handled by :func:`hermitian_lanczos`.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalFailure
from .lindbladian import as_matrix

TERM_MAX_ITER = "max_iter"
TERM_BREAKDOWN = "breakdown"
TERM_SERIOUS = "serious_breakdown"
TERM_SYNTHETIC = "synthetic"


@dataclass
class BiLanczosConfig:
    max_iter: int = None          # default: full dimension of L
    breakdown_tol: float = 1e-10  # relative to the running max of c_j
    reorth_passes: int = 2
    store_bases: bool = True

    def __post_init__(self):
        if self.breakdown_tol < 0:
            raise ValueError("breakdown_tol must be nonnegative")
        if self.reorth_passes < 0:
            raise ValueError("reorth_passes must be nonnegative")


@dataclass
class TridiagonalData:
    """Coefficients and (optionally) bases of a (bi-)Lanczos run."""

    a: np.ndarray                  # length K, diagonal
    b: np.ndarray                  # length K-1, superdiagonal
    c: np.ndarray                  # length K-1, subdiagonal
    p_basis: np.ndarray = None     # dim x K
    q_basis: np.ndarray = None     # dim x K
    residual_biortho: float = None
    residual_tridiag: float = None
    termination: str = TERM_MAX_ITER

    @property
    def K(self):
        return len(self.a)

    def tridiagonal_matrix(self):
        T = np.diag(self.a.astype(complex))
        if self.K > 1:
            T += np.diag(self.b.astype(complex), k=1)
            T += np.diag(self.c.astype(complex), k=-1)
        return T


@dataclass
class StructureReport:
    """Diagnostics for the empirical dissipative coefficient structure."""

    max_bc_diff: float
    max_abs_b: float
    max_re_a: float
    max_im_a: float
    min_im_a: float
    dissipative: bool
    label: str
    tol: float


def _check_finite(name, v):
    if not np.all(np.isfinite(v)):
        raise NumericalFailure(f"non-finite values encountered in {name}")


def bilanczos(L, p0, q0, cfg=None):
    """Two-sided Lanczos iteration on a (generally non-Hermitian) matrix.

    Starting vectors must satisfy <q0|p0> = 1; if the overlap is nonzero p0
    is rescaled, otherwise the pair is rejected. Each new vector pair is
    purged against all previous basis vectors ``cfg.reorth_passes`` times.
    """
    if cfg is None:
        cfg = BiLanczosConfig()
    A = as_matrix(L)
    dim = A.shape[0]
    Ah = A.conj().T
    if cfg.max_iter is not None:
        max_iter = cfg.max_iter
    else:
        # Operator Krylov spaces of a D-level system close after at most
        # D^2 - D + 1 steps; roundoff would otherwise keep the recursion
        # running on noise up to the full dimension.
        D = int(round(np.sqrt(dim)))
        max_iter = D * D - D + 1 if D * D == dim else dim
    max_iter = min(max_iter, dim)

    p = np.asarray(p0, dtype=complex).copy()
    q = np.asarray(q0, dtype=complex).copy()
    overlap = np.vdot(q, p)
    if abs(overlap) < 1e-14 * max(np.linalg.norm(p) * np.linalg.norm(q), 1e-300):
        raise ValueError("starting vectors are (numerically) bi-orthogonal: "
                         "<q0|p0> cannot be rescaled to 1")
    p = p / overlap

    P = np.empty((dim, max_iter), dtype=complex)
    Q = np.empty((dim, max_iter), dtype=complex)
    P[:, 0] = p
    Q[:, 0] = q

    u = A @ p
    a0 = np.vdot(q, u)
    r = u - a0 * p
    s = Ah @ q - np.conj(a0) * q

    a = [a0]
    b = []
    c = []
    termination = TERM_MAX_ITER
    c_max = 0.0

    for j in range(1, max_iter):
        _check_finite("residuals", r)
        _check_finite("residuals", s)
        w = np.vdot(r, s)
        cj = np.sqrt(abs(w))
        scale = max(c_max, abs(a0))
        if scale == 0.0:
            scale = 1.0
        if cj < cfg.breakdown_tol * scale:
            rs = min(np.linalg.norm(r), np.linalg.norm(s))
            if rs > np.sqrt(cfg.breakdown_tol) * scale:
                # <r|s> collapsed while both residuals remain large.
                termination = TERM_SERIOUS
            else:
                termination = TERM_BREAKDOWN
            break
        bj = np.conj(w) / cj
        p = r / cj
        q = s / np.conj(bj)

        for _ in range(cfg.reorth_passes):
            p = p - P[:, :j] @ (Q[:, :j].conj().T @ p)
            q = q - Q[:, :j] @ (P[:, :j].conj().T @ q)

        u = A @ p
        aj = np.vdot(q, u)
        _check_finite("coefficients", np.array([aj, bj, cj]))

        r = u - aj * p - bj * P[:, j - 1]
        s = Ah @ q - np.conj(aj) * q - np.conj(cj) * Q[:, j - 1]

        P[:, j] = p
        Q[:, j] = q
        a.append(aj)
        b.append(bj)
        c.append(cj)
        c_max = max(c_max, cj)

    K = len(a)
    tri = TridiagonalData(
        a=np.array(a, dtype=complex),
        b=np.array(b, dtype=complex),
        c=np.array(c, dtype=complex),
        termination=termination,
    )
    if cfg.store_bases:
        tri.p_basis = P[:, :K].copy()
        tri.q_basis = Q[:, :K].copy()
        QhP = tri.q_basis.conj().T @ tri.p_basis
        tri.residual_biortho = float(np.abs(QhP - np.eye(K)).max())
        T = tri.tridiagonal_matrix()
        QhLP = tri.q_basis.conj().T @ (A @ tri.p_basis)
        tri.residual_tridiag = float(np.abs(QhLP - T).max())
    return tri


def hermitian_lanczos(L, v0, cfg=None):
    """Classic Lanczos with full reorthogonalization (Hermitian generator).

    Equivalent to :func:`bilanczos` with p0 = q0 = v0; coefficients come out
    with b = c real nonnegative and a real up to roundoff.
    """
    if cfg is None:
        cfg = BiLanczosConfig()
    A = as_matrix(L)
    dim = A.shape[0]
    if cfg.max_iter is not None:
        max_iter = cfg.max_iter
    else:
        # Operator Krylov spaces of a D-level system close after at most
        # D^2 - D + 1 steps; roundoff would otherwise keep the recursion
        # running on noise up to the full dimension.
        D = int(round(np.sqrt(dim)))
        max_iter = D * D - D + 1 if D * D == dim else dim
    max_iter = min(max_iter, dim)

    v = np.asarray(v0, dtype=complex).copy()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("starting vector must be nonzero")
    v = v / nrm

    V = np.empty((dim, max_iter), dtype=complex)
    V[:, 0] = v
    u = A @ v
    a0 = np.vdot(v, u)
    r = u - a0 * v

    a = [a0]
    beta = []
    termination = TERM_MAX_ITER
    b_max = 0.0

    for j in range(1, max_iter):
        _check_finite("residual", r)
        bj = np.linalg.norm(r)
        scale = max(b_max, abs(a0))
        if scale == 0.0:
            scale = 1.0
        if bj < cfg.breakdown_tol * scale:
            termination = TERM_BREAKDOWN
            break
        v = r / bj
        for _ in range(cfg.reorth_passes):
            v = v - V[:, :j] @ (V[:, :j].conj().T @ v)
        u = A @ v
        aj = np.vdot(v, u)
        r = u - aj * v - bj * V[:, j - 1]
        V[:, j] = v
        a.append(aj)
        beta.append(bj)
        b_max = max(b_max, bj)

    K = len(a)
    tri = TridiagonalData(
        a=np.array(a, dtype=complex),
        b=np.array(beta, dtype=complex),
        c=np.array(beta, dtype=complex),
        termination=termination,
    )
    if cfg.store_bases:
        tri.p_basis = V[:, :K].copy()
        tri.q_basis = tri.p_basis
        VhV = tri.p_basis.conj().T @ tri.p_basis
        tri.residual_biortho = float(np.abs(VhV - np.eye(K)).max())
        T = tri.tridiagonal_matrix()
        VhLV = tri.p_basis.conj().T @ (A @ tri.p_basis)
        tri.residual_tridiag = float(np.abs(VhLV - T).max())
    return tri


def check_open_structure(tri, tol=1e-6, n_coeffs=None):
    """Test the empirical open-system structure b_n = c_n = |b_n|, a_n = i|a_n|."""
    n_a = tri.K if n_coeffs is None else min(n_coeffs, tri.K)
    n_b = len(tri.b) if n_coeffs is None else min(n_coeffs, len(tri.b))
    a = tri.a[:n_a]
    b = tri.b[:n_b]
    c = tri.c[:n_b]

    max_abs_b = float(np.abs(b).max()) if n_b else 0.0
    max_bc = float(np.abs(b - c).max()) if n_b else 0.0
    max_re_a = float(np.abs(a.real).max())
    max_im_a = float(np.abs(a.imag).max())
    min_im_a = float(a.imag.min())

    bc_ok = max_bc <= tol * max(max_abs_b, 1e-300)
    a_dissipative = (max_re_a <= tol * max(max_im_a, 1e-300)
                     and min_im_a >= -tol * max(max_im_a, 1e-300))
    a_closed = max_im_a <= tol * max(max_re_a, max_abs_b, 1e-300)

    dissipative = bool(bc_ok and a_dissipative)
    if dissipative:
        label = "dissipative structure"
    elif bc_ok and a_closed:
        label = "closed structure"
    else:
        label = "mixed structure"
    return StructureReport(
        max_bc_diff=max_bc,
        max_abs_b=max_abs_b,
        max_re_a=max_re_a,
        max_im_a=max_im_a,
        min_im_a=min_im_a,
        dissipative=dissipative,
        label=label,
        tol=tol,
    )


def project_dissipative_structure(tri):
    """Project coefficients onto the dissipative form a = i|a|, b = c = |b|.

    Open-system chains empirically carry purely imaginary diagonals and
    equal real off-diagonals; this returns a copy of ``tri`` with that
    structure imposed exactly (on-site decay rates |a_n|, symmetric real
    hoppings |b_n|).  Under the projected coefficients the two amplitude
    recursions coincide, so psi = phi becomes a verified identity of the
    evolution.  Bases and termination metadata are carried over unchanged.
    """
    b_abs = np.abs(np.asarray(tri.b, dtype=complex)).astype(complex)
    return TridiagonalData(
        a=1j * np.abs(np.asarray(tri.a, dtype=complex)),
        b=b_abs,
        c=b_abs.copy(),
        p_basis=tri.p_basis,
        q_basis=tri.q_basis,
        residual_biortho=tri.residual_biortho,
        residual_tridiag=tri.residual_tridiag,
        termination=tri.termination,
    )


def coefficients_to_csv(tri):
    """Render coefficients as CSV text: n,a_re,a_im,b_re,b_im,c_re,c_im.

    The b and c columns are blank on the n = 0 row.
    """
    buf = io.StringIO()
    fmt = lambda x: "%.17g" % x
    buf.write("n,a_re,a_im,b_re,b_im,c_re,c_im\n")
    for n in range(tri.K):
        row = [str(n), fmt(tri.a[n].real), fmt(tri.a[n].imag)]
        if n == 0:
            row += ["", "", "", ""]
        else:
            row += [fmt(tri.b[n - 1].real), fmt(tri.b[n - 1].imag),
                    fmt(tri.c[n - 1].real), fmt(tri.c[n - 1].imag)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_coefficients(tri, path):
    with open(path, "w", newline="\n") as f:
        f.write(coefficients_to_csv(tri))


def read_coefficients(path):
    """Read a coefficients CSV back into a TridiagonalData (no bases)."""
    a, b, c = [], [], []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            a.append(float(row["a_re"]) + 1j * float(row["a_im"]))
            if row["b_re"] != "":
                b.append(float(row["b_re"]) + 1j * float(row["b_im"]))
                c.append(float(row["c_re"]) + 1j * float(row["c_im"]))
    return TridiagonalData(a=np.array(a), b=np.array(b), c=np.array(c))
