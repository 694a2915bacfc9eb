"""Validated matrix types and the dense kernel underneath the GBW geometry.

Everything here works on real symmetric / symmetric positive definite (SPD)
matrices.  The geometry layers build on a small set of primitives:

* eigendecomposition with a fixed (descending) ordering,
* SPD powers (square root, inverse square root, inverse),
* the generalized Lyapunov solve  X L M + M L X = U,
* the matrix geometric mean  A # B,
* polar factors of invertible square matrices.

All solvers use explicit symmetrization: any quantity that is symmetric in
exact arithmetic is symmetrized before further use, so errors cannot
accumulate asymmetry.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "EPS_PD",
    "SYM_RTOL",
    "GEN_LYAP_FLOOR",
    "SpdValidationError",
    "SingularOperatorError",
    "SymMatrix",
    "SpdMatrix",
    "EigPair",
    "GbwParam",
    "sym_eig",
    "spd_sqrt",
    "spd_invsqrt",
    "spd_inv",
    "solve_gen_lyapunov",
    "geometric_mean",
    "polar_factor",
    "loewner_gap",
]

# Relative eigenvalue floor below which a matrix is rejected as not PD.
EPS_PD = 1e-12

# Relative Frobenius tolerance for accepting nearly-symmetric input.
SYM_RTOL = 1e-12

# Relative floor on eigenvalues of M^{-1/2} X M^{-1/2} in the Lyapunov solve.
GEN_LYAP_FLOOR = 1e-15


class SpdValidationError(ValueError):
    """Input failed symmetry / positive definiteness validation."""


class SingularOperatorError(ValueError):
    """A solve or factorization met a (numerically) singular operator."""


def _asmat(x) -> np.ndarray:
    """Unwrap SymMatrix/SpdMatrix or coerce to a float ndarray."""
    if isinstance(x, SymMatrix):
        return x.mat
    a = np.asarray(x, dtype=float)
    return a


def _check_square(a: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise SpdValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise SpdValidationError("matrix has non-finite entries")
    return a


def _sym(a: np.ndarray) -> np.ndarray:
    """Symmetrize: {A}_S = (A + A^T) / 2."""
    return 0.5 * (a + a.T)


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


class SymMatrix:
    """A validated real symmetric matrix.

    Construction coerces to float64, checks that the input is symmetric to
    within ``SYM_RTOL`` (relative Frobenius), symmetrizes the remaining dust
    and freezes the underlying array.  Instances are immutable and safe to
    share across threads.
    """

    __slots__ = ("_mat",)

    def __init__(self, entries):
        a = _check_square(_asmat(entries))
        nrm = np.linalg.norm(a)
        asym = np.linalg.norm(a - a.T)
        if asym > SYM_RTOL * max(nrm, 1.0):
            raise SpdValidationError(
                f"matrix is not symmetric: ||A - A^T|| = {asym:.3e} (||A|| = {nrm:.3e})"
            )
        self._mat = _frozen(_sym(a))

    @property
    def mat(self) -> np.ndarray:
        """Read-only ndarray of the entries."""
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._mat
        return self._mat.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class SpdMatrix(SymMatrix):
    """A validated symmetric positive definite matrix.

    On top of the symmetry check, construction rejects any matrix whose
    smallest eigenvalue does not exceed ``EPS_PD`` times its largest.
    Eigenvalue clamping is deliberately not offered: feeding a non-PD
    matrix into the geometry is an input error, not something to repair.
    """

    __slots__ = ()

    def __init__(self, entries):
        super().__init__(entries)
        w = np.linalg.eigvalsh(self._mat)
        if w[-1] <= 0.0 or w[0] <= EPS_PD * w[-1]:
            raise SpdValidationError(
                f"matrix is not positive definite: eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}]"
            )

    @classmethod
    def identity(cls, n: int) -> "SpdMatrix":
        return cls(np.eye(n))


class EigPair(NamedTuple):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""

    values: np.ndarray
    vectors: np.ndarray


def _eigh_desc(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """eigh with eigenvalues sorted descending (ties keep LAPACK order)."""
    w, q = np.linalg.eigh(a)
    return w[::-1].copy(), q[:, ::-1].copy()


def sym_eig(a) -> EigPair:
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    a : SymMatrix or array_like
        Symmetric matrix.

    Returns
    -------
    EigPair
        ``values`` descending, ``vectors`` the matching orthonormal columns,
        so that ``vectors @ diag(values) @ vectors.T`` reconstructs ``a``.
    """
    s = a if isinstance(a, SymMatrix) else SymMatrix(a)
    w, q = _eigh_desc(s.mat)
    return EigPair(_frozen(w), _frozen(q))


def _spd_power(a: np.ndarray, p: float) -> np.ndarray:
    """a**p through the eigendecomposition, for validated SPD a."""
    w, q = np.linalg.eigh(a)
    return _sym((q * w**p) @ q.T)


def _as_spd(x) -> SpdMatrix:
    return x if isinstance(x, SpdMatrix) else SpdMatrix(x)


def spd_sqrt(x) -> SpdMatrix:
    """Principal square root of an SPD matrix."""
    return SpdMatrix(_spd_power(_as_spd(x).mat, 0.5))


def spd_invsqrt(x) -> SpdMatrix:
    """Inverse principal square root of an SPD matrix."""
    return SpdMatrix(_spd_power(_as_spd(x).mat, -0.5))


def spd_inv(x) -> SpdMatrix:
    """Inverse of an SPD matrix (eigendecomposition based, symmetrized)."""
    return SpdMatrix(_spd_power(_as_spd(x).mat, -1.0))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root of a symmetric PSD matrix; tiny negative eigenvalues clamp to 0."""
    w, q = np.linalg.eigh(_sym(a))
    return _sym((q * np.sqrt(np.clip(w, 0.0, None))) @ q.T)


def _psd_trace_sqrt(a: np.ndarray) -> float:
    """tr(a^{1/2}) for symmetric PSD a, clamping tiny negative eigenvalues."""
    w = np.linalg.eigvalsh(_sym(a))
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def _product_power(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    """(A B)^p for SPD A, B, where the product has positive spectrum.

    A B is similar to the SPD matrix A^{1/2} B A^{1/2}, so
    (A B)^p = A^{1/2} (A^{1/2} B A^{1/2})^p A^{-1/2}.
    The result is generally not symmetric.
    """
    w, q = np.linalg.eigh(a)
    rt = (q * np.sqrt(w)) @ q.T
    irt = (q * (1.0 / np.sqrt(w))) @ q.T
    wi, qi = np.linalg.eigh(_sym(rt @ b @ rt))
    inner = (qi * wi**p) @ qi.T
    return rt @ inner @ irt


def _gen_lyap_core(
    x: np.ndarray,
    m_invsqrt: np.ndarray,
    u: np.ndarray,
    floor: float,
) -> np.ndarray:
    """Solve X L M + M L X = U given M^{-1/2}; U may be any square matrix.

    Congruence by M^{-1/2} turns the equation into a Sylvester equation
    A L' + L' A = U' with A = M^{-1/2} X M^{-1/2} SPD, solved entrywise in
    the eigenbasis of A.  The solution is symmetric (skew) when U is
    symmetric (skew).
    """
    a = _sym(m_invsqrt @ x @ m_invsqrt)
    w, q = np.linalg.eigh(a)
    if w[-1] <= 0.0 or w[0] <= floor * w[-1]:
        raise SingularOperatorError(
            f"Lyapunov operator is numerically singular: eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}]"
        )
    u_t = m_invsqrt @ u @ m_invsqrt
    denom = w[:, None] + w[None, :]
    l_t = q @ ((q.T @ u_t @ q) / denom) @ q.T
    return m_invsqrt @ l_t @ m_invsqrt


def solve_gen_lyapunov(x, m, u, *, floor: float = GEN_LYAP_FLOOR) -> SymMatrix:
    """Solve the generalized Lyapunov equation X L M + M L X = U.

    Parameters
    ----------
    x, m : SpdMatrix, GbwParam or array_like
        SPD coefficient matrices.  The equation is symmetric in (x, m).
    u : SymMatrix or array_like
        Symmetric right-hand side.
    floor : float, optional
        Relative eigenvalue floor for M^{-1/2} X M^{-1/2}; at or below it a
        SingularOperatorError is raised.  Pass 0.0 to rely on the SPD
        validation of the inputs alone.

    Returns
    -------
    SymMatrix
        The unique symmetric solution L.
    """
    if isinstance(m, GbwParam):
        mis = m.m_invsqrt.mat
        xm = _as_spd(x).mat
    else:
        mis = _spd_power(_as_spd(m).mat, -0.5)
        xm = _as_spd(x).mat
    us = u if isinstance(u, SymMatrix) else SymMatrix(u)
    if us.dim != xm.shape[0] or mis.shape[0] != xm.shape[0]:
        raise SpdValidationError(
            f"dimension mismatch: x {xm.shape}, m {mis.shape}, u {us.mat.shape}"
        )
    return SymMatrix(_sym(_gen_lyap_core(xm, mis, us.mat, floor)))


def geometric_mean(a, b) -> SpdMatrix:
    """Matrix geometric mean A # B of two SPD matrices.

    A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}, the midpoint of the
    affine-invariant geodesic and the unique SPD solution G of G A^{-1} G = B.
    """
    am = _as_spd(a).mat
    bm = _as_spd(b).mat
    if am.shape != bm.shape:
        raise SpdValidationError(f"dimension mismatch: {am.shape} vs {bm.shape}")
    w, q = np.linalg.eigh(am)
    rt = (q * np.sqrt(w)) @ q.T
    irt = (q * (1.0 / np.sqrt(w))) @ q.T
    return SpdMatrix(_sym(rt @ _psd_sqrt(irt @ bm @ irt) @ rt))


def polar_factor(a) -> np.ndarray:
    """Orthogonal polar factor O of an invertible square matrix A = O P.

    Computed from the full SVD A = U S V^T as O = U V^T, with P = V S V^T
    symmetric positive definite.  Rank-deficient input is rejected because
    its polar factor is not unique.
    """
    am = _check_square(np.asarray(a, dtype=float))
    u, s, vh = np.linalg.svd(am)
    if s[-1] <= 1e-13 * s[0] or s[0] == 0.0:
        raise SingularOperatorError(
            f"polar factor of a rank-deficient matrix (singular values [{s[-1]:.3e}, {s[0]:.3e}])"
        )
    return u @ vh


def loewner_gap(a, b) -> float:
    """Smallest eigenvalue of B - A; nonnegative exactly when A <= B (Loewner).

    Parameters
    ----------
    a, b : SymMatrix or array_like
        Symmetric matrices of equal dimension.
    """
    am = (a if isinstance(a, SymMatrix) else SymMatrix(a)).mat
    bm = (b if isinstance(b, SymMatrix) else SymMatrix(b)).mat
    if am.shape != bm.shape:
        raise SpdValidationError(f"dimension mismatch: {am.shape} vs {bm.shape}")
    return float(np.linalg.eigvalsh(bm - am)[0])


class GbwParam:
    """The SPD parameter M of the GBW geometry, with cached derived matrices.

    Caches M^{1/2}, M^{-1/2} and M^{-1}, all computed from a single
    eigendecomposition so they are mutually consistent.
    """

    __slots__ = ("m", "m_sqrt", "m_invsqrt", "m_inv")

    def __init__(self, m):
        mm = _as_spd(m)
        w, q = np.linalg.eigh(mm.mat)
        self.m = mm
        self.m_sqrt = SpdMatrix(_sym((q * np.sqrt(w)) @ q.T))
        self.m_invsqrt = SpdMatrix(_sym((q * (1.0 / np.sqrt(w))) @ q.T))
        self.m_inv = SpdMatrix(_sym((q * (1.0 / w)) @ q.T))

    @property
    def dim(self) -> int:
        return self.m.dim

    @classmethod
    def identity(cls, n: int) -> "GbwParam":
        return cls(np.eye(n))

    def __repr__(self):
        return f"GbwParam(dim={self.dim})"
