"""Dense linear algebra kernels.

Linear solves, spectra and the six Sylvester-type equations used throughout
the package.  Everything here is desk scale: the Sylvester solver vectorizes
the equation and performs one dense ``(n*nu) x (n*nu)`` solve.
"""

from __future__ import annotations

import enum
import warnings
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionError,
    NoConvergence,
    SingularMatrix,
    SpectrumClash,
    SpectrumProductClash,
)

__all__ = [
    "EPS_SOLVE",
    "SylvesterForm",
    "solve_linear",
    "spectrum",
    "solve_sylvester",
    "sylvester_map",
    "sylvester_residual",
    "sylvester_oracle",
    "realify",
    "numerical_rank",
    "jordan_block",
    "as_matrix",
    "sym",
    "skew",
]

EPS_SOLVE = 1e-10
_UNIT_ROUNDOFF = np.finfo(float).eps / 2
_EAGER_SPECTRUM_LIMIT = 50


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a 2-D float or complex array (never object dtype)."""
    arr = np.asarray(a)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(complex)
    else:
        arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} has non-finite entries")
    return arr


def sym(a: np.ndarray) -> np.ndarray:
    """Symmetric part ``(a + a^T) / 2``."""
    return 0.5 * (a + a.T)


def skew(a: np.ndarray) -> np.ndarray:
    """Skew-symmetric part ``(a - a^T) / 2``."""
    return 0.5 * (a - a.T)


def jordan_block(eig: complex, size: int, lower: bool = False) -> np.ndarray:
    """Single Jordan block with eigenvalue ``eig``.

    Parameters
    ----------
    eig : complex
        Eigenvalue on the diagonal.
    size : int
        Block order.
    lower : bool, optional
        Put the ones on the subdiagonal instead of the superdiagonal.
    """
    if size < 1:
        raise DimensionError("Jordan block size must be positive")
    dtype = complex if np.iscomplexobj(eig) and complex(eig).imag != 0 else float
    val = eig if dtype is complex else complex(eig).real
    out = np.diag(np.full(size, val, dtype=dtype)) + np.eye(size, k=-1 if lower else 1, dtype=dtype)
    return out


def solve_linear(A, B) -> np.ndarray:
    """Solve ``A X = B`` by LU factorization with partial (row) pivoting.

    Parameters
    ----------
    A : (n, n) array_like
    B : (n, k) or (n,) array_like

    Returns
    -------
    X : ndarray
        Same trailing shape as ``B``.

    Raises
    ------
    SingularMatrix
        If a pivot magnitude is below ``n * max|A_ij| * u``.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise DimensionError(f"row mismatch: A is {A.shape}, B is {B.shape}")
    n = A.shape[0]
    if n == 0:
        return np.zeros(B.shape, dtype=np.result_type(A, B, float))
    amax = float(np.max(np.abs(A)))
    threshold = n * amax * _UNIT_ROUNDOFF
    if amax == 0.0:
        raise SingularMatrix("matrix is identically zero")
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrix
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) <= threshold:
        k = int(np.argmin(pivots))
        raise SingularMatrix(
            f"pivot {k} has magnitude {pivots[k]:.3e} <= threshold {threshold:.3e}"
        )
    return sla.lu_solve((lu, piv), B)


def spectrum(A) -> np.ndarray:
    """Eigenvalues of a square matrix, with multiplicity.

    Uses LAPACK ``geev`` (Hessenberg reduction followed by shifted QR).
    For real input, complex eigenvalues come in exactly conjugate pairs and
    real eigenvalues have zero imaginary part.

    Raises
    ------
    NoConvergence
        If the QR iteration fails.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got {A.shape}")
    if A.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    try:
        ev = sla.eigvals(A, check_finite=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return np.asarray(ev, dtype=complex)


class SylvesterForm(str, enum.Enum):
    """The six linear matrix equations handled by :func:`solve_sylvester`.

    With ``A`` the plant matrix, ``M`` the generator matrix (``S`` or
    ``Qc``) and ``C`` the coupling term:

    ========================  ===========================
    ``FINITE_RIGHT``          ``A X + C = X M``
    ``FINITE_LEFT``           ``M X = X A + C``
    ``MARKOV_RIGHT``          ``A X M + C = X``
    ``MARKOV_RIGHT_SHIFTED``  ``A X M + C M = X``
    ``MARKOV_LEFT``           ``X = M X A + C``
    ``MARKOV_LEFT_SHIFTED``   ``X = M X A + C A``
    ========================  ===========================
    """

    FINITE_RIGHT = "FiniteRight"
    FINITE_LEFT = "FiniteLeft"
    MARKOV_RIGHT = "MarkovRight"
    MARKOV_RIGHT_SHIFTED = "MarkovRightShifted"
    MARKOV_LEFT = "MarkovLeft"
    MARKOV_LEFT_SHIFTED = "MarkovLeftShifted"

    @property
    def is_right(self) -> bool:
        return self in (self.FINITE_RIGHT, self.MARKOV_RIGHT, self.MARKOV_RIGHT_SHIFTED)

    @property
    def is_markov(self) -> bool:
        return self not in (self.FINITE_RIGHT, self.FINITE_LEFT)


def _check_shapes(form: SylvesterForm, A: np.ndarray, M: np.ndarray, C: np.ndarray) -> tuple[int, int]:
    n, nu = A.shape[0], M.shape[0]
    if A.shape != (n, n) or M.shape != (nu, nu):
        raise DimensionError(f"A {A.shape} and generator {M.shape} must be square")
    expected = (n, nu) if form.is_right else (nu, n)
    if C.shape != expected:
        raise DimensionError(f"{form.value}: C must be {expected}, got {C.shape}")
    return n, nu


def sylvester_map(form: SylvesterForm, A: np.ndarray, M: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Return the linear operator ``X -> L(X)`` whose equation is ``L(X) = rhs``."""
    form = SylvesterForm(form)
    if form is SylvesterForm.FINITE_RIGHT:
        return lambda X: A @ X - X @ M
    if form is SylvesterForm.FINITE_LEFT:
        return lambda X: M @ X - X @ A
    if form.is_right:
        return lambda X: X - A @ X @ M
    return lambda X: X - M @ X @ A


def _rhs(form: SylvesterForm, A: np.ndarray, M: np.ndarray, C: np.ndarray) -> np.ndarray:
    if form is SylvesterForm.FINITE_RIGHT:
        return -C
    if form is SylvesterForm.MARKOV_RIGHT_SHIFTED:
        return C @ M
    if form is SylvesterForm.MARKOV_LEFT_SHIFTED:
        return C @ A
    return C


def _kron_operator(form: SylvesterForm, A: np.ndarray, M: np.ndarray) -> np.ndarray:
    # column-major vec: vec(P X R) = (R^T kron P) vec(X)
    n, nu = A.shape[0], M.shape[0]
    if form is SylvesterForm.FINITE_RIGHT:
        return np.kron(np.eye(nu), A) - np.kron(M.T, np.eye(n))
    if form is SylvesterForm.FINITE_LEFT:
        return np.kron(np.eye(n), M) - np.kron(A.T, np.eye(nu))
    if form.is_right:
        return np.eye(n * nu) - np.kron(M.T, A)
    return np.eye(n * nu) - np.kron(A.T, M)


def _check_spectra(form: SylvesterForm, A: np.ndarray, M: np.ndarray) -> None:
    la, mu = spectrum(A), spectrum(M)
    if la.size == 0 or mu.size == 0:
        return
    if form.is_markov:
        prod = la[:, None] * mu[None, :]
        gap = np.abs(prod - 1.0)
        scale = 1.0 + np.abs(prod)
        if np.any(gap <= 1e-10 * scale):
            i, j = np.unravel_index(np.argmin(gap / scale), gap.shape)
            raise SpectrumProductClash(
                f"{form.value}: eigenvalue product {la[i]:.6g} * {mu[j]:.6g} equals 1"
            )
    else:
        gap = np.abs(la[:, None] - mu[None, :])
        scale = 1.0 + np.abs(la[:, None]) + np.abs(mu[None, :])
        if np.any(gap <= 1e-10 * scale):
            i, j = np.unravel_index(np.argmin(gap / scale), gap.shape)
            raise SpectrumClash(
                f"{form.value}: eigenvalue {la[i]:.6g} of A coincides with {mu[j]:.6g} of the generator"
            )


def solve_sylvester(form, A, S_or_Q, C, *, check_spectrum: bool | None = None) -> np.ndarray:
    """Solve one of the six Sylvester-type equations.

    Parameters
    ----------
    form : SylvesterForm or str
        Which equation to solve (see :class:`SylvesterForm`).
    A : (n, n) array_like
        Plant matrix.
    S_or_Q : (nu, nu) array_like
        Generator matrix.
    C : array_like
        Coupling term, ``(n, nu)`` for right forms and ``(nu, n)`` for left.
    check_spectrum : bool, optional
        Check solvability through the spectra before solving.  Defaults to
        ``True`` when ``n <= 50``; otherwise singularity is detected from the
        pivots of the vectorized system.

    Returns
    -------
    X : ndarray
        The unique solution; real when every operand is real.

    Raises
    ------
    SpectrumClash
        Finite forms with ``sigma(A)`` meeting ``sigma(S)``.
    SpectrumProductClash
        Markov forms with ``lambda * mu = 1``.
    """
    form = SylvesterForm(form)
    A = as_matrix(A, "A")
    M = as_matrix(S_or_Q, "S_or_Q")
    C = as_matrix(C, "C")
    n, nu = _check_shapes(form, A, M, C)
    if check_spectrum is None:
        check_spectrum = n <= _EAGER_SPECTRUM_LIMIT
    if check_spectrum:
        _check_spectra(form, A, M)
    K = _kron_operator(form, A, M)
    rhs = _rhs(form, A, M, C)
    try:
        x = solve_linear(K, rhs.reshape(-1, order="F"))
    except SingularMatrix as exc:
        err = SpectrumProductClash if form.is_markov else SpectrumClash
        raise err(f"{form.value}: vectorized operator is singular ({exc})") from exc
    shape = (n, nu) if form.is_right else (nu, n)
    return x.reshape(shape, order="F")


def sylvester_residual(form, A, S_or_Q, C, X) -> float:
    """Frobenius norm of the defining identity evaluated at ``X``."""
    form = SylvesterForm(form)
    A, M, C, X = (as_matrix(v) for v in (A, S_or_Q, C, X))
    return float(np.linalg.norm(sylvester_map(form, A, M)(X) - _rhs(form, A, M, C)))


def sylvester_oracle(form, A, S_or_Q, C) -> np.ndarray:
    """Reference solver that never forms a Kronecker product.

    The operator matrix is materialized column by column by applying the
    equation's linear map to every unit matrix ``E_ij``, then solved with
    :func:`numpy.linalg.solve`.  Used to cross-check :func:`solve_sylvester`.
    """
    form = SylvesterForm(form)
    A, M, C = (as_matrix(v) for v in (A, S_or_Q, C))
    n, nu = _check_shapes(form, A, M, C)
    shape = (n, nu) if form.is_right else (nu, n)
    op = sylvester_map(form, A, M)
    dtype = np.result_type(A, M, C)
    size = shape[0] * shape[1]
    K = np.empty((size, size), dtype=dtype)
    for k in range(size):
        E = np.zeros(shape, dtype=dtype)
        E.flat[k] = 1.0  # row-major position k
        K[:, k] = op(E).ravel()
    x = np.linalg.solve(K, _rhs(form, A, M, C).ravel())
    return x.reshape(shape)


def realify(M, *, rtol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    """Drop negligible imaginary parts, or fail if they are not negligible.

    Raises
    ------
    ValueError
        If ``max|Im M| > rtol * max(1, ||M||)``.
    """
    M = np.asarray(M)
    if not np.iscomplexobj(M):
        return M.astype(float)
    scale = max(1.0, float(np.linalg.norm(M)))
    if np.max(np.abs(M.imag), initial=0.0) > rtol * scale:
        raise ValueError(f"{name} is not real (imaginary part {np.max(np.abs(M.imag)):.3e})")
    return np.ascontiguousarray(M.real)


def numerical_rank(M, rtol: float = 1e-12) -> int:
    """Rank via column-pivoted QR with tolerance ``k * ||M||_2 * rtol``."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    _, R, _ = sla.qr(M, pivoting=True, mode="economic")
    diag = np.abs(np.diag(R))
    k = min(M.shape)
    tol = k * np.linalg.norm(M, 2) * rtol
    return int(np.sum(diag > tol))
