"""System representations, interpolation generators and example plants."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionError,
    InvariantError,
    NonPositiveParameter,
    PoleHit,
    SingularE,
    SingularMatrix,
)
from .linalg import as_matrix, jordan_block, numerical_rank, solve_linear, spectrum

__all__ = [
    "EPS_STRUCT",
    "PortHamiltonianSystem",
    "LtiSystem",
    "DescriptorModel",
    "GeneratorRight",
    "GeneratorLeft",
    "ph_to_lti",
    "as_lti",
    "transfer_eval",
    "markov_parameters",
    "expansion_at_infinity",
    "ladder_system",
    "smib_system",
    "SMIB_INDUCTANCE",
    "SMIB_RESISTANCE",
    "SMIB_INERTIA",
]

EPS_STRUCT = 1e-10
EPS_RANK = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _rel_dev(dev: np.ndarray, ref: np.ndarray) -> bool:
    """``max|dev| <= EPS_STRUCT * max|ref|`` (zero matrices pass)."""
    scale = float(np.max(np.abs(ref), initial=0.0))
    return float(np.max(np.abs(dev), initial=0.0)) <= EPS_STRUCT * max(scale, np.finfo(float).tiny)


def _arrays_equal(a, b) -> bool:
    if type(a) is not type(b):
        return NotImplemented
    for f in dataclasses.fields(a):
        x, y = getattr(a, f.name), getattr(b, f.name)
        if isinstance(x, np.ndarray):
            if not (x.shape == y.shape and np.array_equal(x, y)):
                return False
        elif x != y:
            return False
    return True


@dataclass(frozen=True, eq=False)
class PortHamiltonianSystem:
    r"""Linear port-Hamiltonian system.

    .. math::

        \dot x = (J - R) Q x + B u, \qquad y = B^T Q x

    with Hamiltonian :math:`\tfrac12 x^T Q x`.

    Parameters
    ----------
    J : (n, n) array_like
        Skew-symmetric interconnection matrix.
    R : (n, n) array_like
        Symmetric dissipation matrix.
    Q : (n, n) array_like
        Symmetric, invertible energy matrix.
    B : (n, m) array_like
        Port matrix.
    r_psd, q_pd : bool, optional
        Assert ``R >= 0`` and ``Q > 0``.  When set, the claims are verified
        through eigenvalues.
    symmetrize : bool, optional
        Replace ``J``, ``R`` and ``Q`` by their skew/symmetric parts before
        validation.  Off by default so that modelling errors surface.

    Raises
    ------
    InvariantError
        If a structural property fails.
    """

    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    r_psd: bool = False
    q_pd: bool = False
    symmetrize: dataclasses.InitVar[bool] = False

    def __post_init__(self, symmetrize: bool) -> None:
        J, R, Q, B = (as_matrix(getattr(self, k), k) for k in "JRQB")
        for name, M in (("J", J), ("R", R), ("Q", Q), ("B", B)):
            if np.iscomplexobj(M):
                raise InvariantError(f"{name} must be real")
        n = J.shape[0]
        for name, M in (("J", J), ("R", R), ("Q", Q)):
            if M.shape != (n, n):
                raise DimensionError(f"{name} must be {n}x{n}, got {M.shape}")
        if B.shape[0] != n:
            raise DimensionError(f"B must have {n} rows, got {B.shape}")
        if symmetrize:
            J, R, Q = 0.5 * (J - J.T), 0.5 * (R + R.T), 0.5 * (Q + Q.T)
        if not _rel_dev(J + J.T, J):
            raise InvariantError("J is not skew-symmetric")
        if not _rel_dev(R - R.T, R):
            raise InvariantError("R is not symmetric")
        if not _rel_dev(Q - Q.T, Q):
            raise InvariantError("Q is not symmetric")
        if n and numerical_rank(Q, EPS_RANK) < n:
            raise InvariantError("Q is singular")
        if self.r_psd and n:
            ev = np.linalg.eigvalsh(0.5 * (R + R.T))
            if ev.min() < -EPS_STRUCT * max(1.0, np.abs(ev).max()):
                raise InvariantError(f"R is not positive semidefinite (min eigenvalue {ev.min():.3e})")
        if self.q_pd and n:
            ev = np.linalg.eigvalsh(0.5 * (Q + Q.T))
            if ev.min() <= EPS_STRUCT * np.abs(ev).max():
                raise InvariantError(f"Q is not positive definite (min eigenvalue {ev.min():.3e})")
        for k, M in zip("JRQB", (J, R, Q, B)):
            object.__setattr__(self, k, _frozen(M))

    __eq__ = _arrays_equal
    __hash__ = None  # type: ignore[assignment]

    @property
    def n(self) -> int:
        return self.J.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def A(self) -> np.ndarray:
        return (self.J - self.R) @ self.Q

    @property
    def C(self) -> np.ndarray:
        return self.B.T @ self.Q

    def hamiltonian(self, x) -> float:
        """Stored energy ``x^T Q x / 2``."""
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ self.Q @ x)

    def to_lti(self) -> "LtiSystem":
        return ph_to_lti(self)

    def with_flags(self, *, r_psd: bool | None = None, q_pd: bool | None = None) -> "PortHamiltonianSystem":
        """Copy with positivity flags replaced (and re-validated)."""
        return PortHamiltonianSystem(
            self.J, self.R, self.Q, self.B,
            r_psd=self.r_psd if r_psd is None else r_psd,
            q_pd=self.q_pd if q_pd is None else q_pd,
        )


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """State-space triple ``x' = A x + B u``, ``y = C x``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self) -> None:
        A, B, C = as_matrix(self.A, "A"), as_matrix(self.B, "B"), as_matrix(self.C, "C")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        if B.shape[0] != n or C.shape[1] != n:
            raise DimensionError(f"inconsistent shapes A{A.shape} B{B.shape} C{C.shape}")
        for k, M in zip("ABC", (A, B, C)):
            object.__setattr__(self, k, _frozen(M))

    __eq__ = _arrays_equal
    __hash__ = None  # type: ignore[assignment]

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def to_lti(self) -> "LtiSystem":
        return self


@dataclass(frozen=True, eq=False)
class DescriptorModel:
    r"""Descriptor realization ``E x' = F x + G u``, ``y = H x``.

    Parameters
    ----------
    E, F : (nu, nu) array_like
    G : (nu, m) array_like
    H : (p, nu) array_like
    input_derivative : bool
        The model is driven by ``u'`` instead of ``u``.
    output_derivative : bool
        The output is ``H x'`` instead of ``H x``.

    Notes
    -----
    The transfer function is :math:`s^k H (sE - F)^{-1} G` where ``k`` counts
    the set derivative flags.  The pencil ``tau E - F`` must be regular; this
    is checked at three pseudo-random complex ``tau`` (fixed seed).
    """

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    input_derivative: bool = False
    output_derivative: bool = False

    def __post_init__(self) -> None:
        E, F, G, H = (as_matrix(getattr(self, k), k) for k in "EFGH")
        nu = E.shape[0]
        if E.shape != (nu, nu) or F.shape != (nu, nu):
            raise DimensionError(f"E {E.shape} and F {F.shape} must be square of equal size")
        if G.shape[0] != nu or H.shape[1] != nu:
            raise DimensionError(f"inconsistent shapes G{G.shape} H{H.shape}")
        if nu:
            rng = np.random.default_rng(0)
            taus = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            if not any(numerical_rank(t * E - F, EPS_RANK) == nu for t in taus):
                raise InvariantError("pencil tau*E - F is singular")
        for k, M in zip("EFGH", (E, F, G, H)):
            object.__setattr__(self, k, _frozen(M))

    __eq__ = _arrays_equal
    __hash__ = None  # type: ignore[assignment]

    @property
    def n(self) -> int:
        return self.E.shape[0]

    @property
    def m(self) -> int:
        return self.G.shape[1]

    @property
    def p(self) -> int:
        return self.H.shape[0]

    @property
    def derivative_order(self) -> int:
        return int(self.input_derivative) + int(self.output_derivative)

    def to_lti(self) -> LtiSystem:
        """Equivalent explicit realization ``(E^-1 F, E^-1 G, H)``.

        Raises
        ------
        SingularE
            If ``E`` is singular.
        DimensionError
            If a derivative flag is set (no proper state-space form).
        """
        if self.derivative_order:
            raise DimensionError("derivative flags have no explicit state-space equivalent")
        Ei = _e_inverse(self)
        return LtiSystem(Ei @ self.F, Ei @ self.G, self.H)


def _e_inverse(model: DescriptorModel) -> np.ndarray:
    try:
        return solve_linear(model.E, np.eye(model.n))
    except SingularMatrix as exc:
        raise SingularE("descriptor matrix E is singular") from exc


def _observability_rank(S: np.ndarray, L: np.ndarray) -> int:
    nu = S.shape[0]
    blocks, row = [], L
    for _ in range(nu):
        blocks.append(row)
        row = row @ S
    return numerical_rank(np.vstack(blocks), EPS_RANK)


@dataclass(frozen=True, eq=False)
class GeneratorRight:
    """Observable pair ``(S, L)`` carrying right interpolation data.

    ``S`` is ``nu x nu`` and ``L`` is ``m x nu``; the points are ``eig(S)``.
    """

    S: np.ndarray
    L: np.ndarray

    def __post_init__(self) -> None:
        S, L = as_matrix(self.S, "S"), as_matrix(self.L, "L")
        if L.ndim == 2 and L.shape[1] != S.shape[0] and L.shape[0] == S.shape[0] and L.shape[1] == 1:
            L = L.T
        nu = S.shape[0]
        if S.shape != (nu, nu) or L.shape[1] != nu:
            raise DimensionError(f"S must be square and L must have {nu} columns (S{S.shape}, L{L.shape})")
        if _observability_rank(S, L) < nu:
            raise InvariantError("pair (L, S) is not observable")
        object.__setattr__(self, "S", _frozen(S))
        object.__setattr__(self, "L", _frozen(L))

    __eq__ = _arrays_equal
    __hash__ = None  # type: ignore[assignment]

    @property
    def nu(self) -> int:
        return self.S.shape[0]

    @property
    def points(self) -> np.ndarray:
        return spectrum(self.S)

    @classmethod
    def jordan(cls, eig: complex, size: int, L=None) -> "GeneratorRight":
        """Upper Jordan block at ``eig`` with ``L = e_1^T`` by default."""
        S = jordan_block(eig, size)
        if L is None:
            L = np.eye(1, size)
        return cls(S, L)

    @classmethod
    def diagonal(cls, points: Sequence[complex], L=None) -> "GeneratorRight":
        """Diagonal ``S`` with the given points and ``L`` of ones by default."""
        pts = np.asarray(points)
        S = np.diag(pts)
        if L is None:
            L = np.ones((1, len(pts)))
        return cls(S, L)


@dataclass(frozen=True, eq=False)
class GeneratorLeft:
    """Controllable pair ``(Qc, Rc)`` carrying left interpolation data.

    ``Qc`` is ``nu x nu`` and ``Rc`` is ``nu x p``; the points are ``eig(Qc)``.
    """

    Qc: np.ndarray
    Rc: np.ndarray

    def __post_init__(self) -> None:
        Qc, Rc = as_matrix(self.Qc, "Qc"), as_matrix(self.Rc, "Rc")
        nu = Qc.shape[0]
        if Rc.shape[0] != nu and Rc.shape[0] == 1 and Rc.shape[1] == nu:
            Rc = Rc.T
        if Qc.shape != (nu, nu) or Rc.shape[0] != nu:
            raise DimensionError(f"Qc must be square and Rc must have {nu} rows (Qc{Qc.shape}, Rc{Rc.shape})")
        if _observability_rank(Qc.T, Rc.T) < nu:
            raise InvariantError("pair (Qc, Rc) is not controllable")
        object.__setattr__(self, "Qc", _frozen(Qc))
        object.__setattr__(self, "Rc", _frozen(Rc))

    __eq__ = _arrays_equal
    __hash__ = None  # type: ignore[assignment]

    @property
    def nu(self) -> int:
        return self.Qc.shape[0]

    @property
    def points(self) -> np.ndarray:
        return spectrum(self.Qc)

    @classmethod
    def jordan(cls, eig: complex, size: int, Rc=None) -> "GeneratorLeft":
        """Lower Jordan block at ``eig`` with ``Rc = e_1`` by default."""
        Qc = jordan_block(eig, size, lower=True)
        if Rc is None:
            Rc = np.eye(size, 1)
        return cls(Qc, Rc)

    @classmethod
    def diagonal(cls, points: Sequence[complex], Rc=None) -> "GeneratorLeft":
        pts = np.asarray(points)
        Qc = np.diag(pts)
        if Rc is None:
            Rc = np.ones((len(pts), 1))
        return cls(Qc, Rc)


AnySystem = Union[PortHamiltonianSystem, LtiSystem]


def ph_to_lti(sys: PortHamiltonianSystem) -> LtiSystem:
    """Return ``((J - R) Q, B, B^T Q)``."""
    return LtiSystem(sys.A, sys.B, sys.C)


def as_lti(sys) -> LtiSystem:
    """Coerce a port-Hamiltonian or explicit system to :class:`LtiSystem`."""
    if isinstance(sys, LtiSystem):
        return sys
    if isinstance(sys, (PortHamiltonianSystem, DescriptorModel)):
        return sys.to_lti()
    raise TypeError(f"cannot interpret {type(sys).__name__} as a state-space system")


def transfer_eval(sys, s: complex) -> np.ndarray:
    """Evaluate the transfer matrix at ``s``.

    Parameters
    ----------
    sys : LtiSystem, PortHamiltonianSystem or DescriptorModel
    s : complex

    Returns
    -------
    K : (p, m) ndarray, complex

    Raises
    ------
    PoleHit
        If ``s I - A`` (or ``s E - F``) is numerically singular.
    """
    s = complex(s)
    if isinstance(sys, DescriptorModel):
        M, G, H = s * sys.E - sys.F, sys.G, sys.H
        factor = s ** sys.derivative_order
    else:
        lti = as_lti(sys)
        M, G, H = s * np.eye(lti.n) - lti.A, lti.B, lti.C
        factor = 1.0
    try:
        X = solve_linear(M.astype(complex), G.astype(complex))
    except SingularMatrix as exc:
        raise PoleHit(f"s = {s} is a pole") from exc
    return factor * (H @ X)


def expansion_at_infinity(model: DescriptorModel, count: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Laurent coefficients of a descriptor transfer function at infinity.

    Returns
    -------
    poly : list of ndarray
        Coefficients of ``s^1, s^2, ...`` (empty unless both derivative flags
        are set).
    markov : list of ndarray
        Coefficients of ``s^0, s^-1, ..., s^-(count-1)``.

    Raises
    ------
    SingularE
        If ``E`` is singular.
    """
    Ei = _e_inverse(model)
    A, B, C = Ei @ model.F, Ei @ model.G, model.H
    k = model.derivative_order
    base = [np.zeros((C.shape[0], B.shape[1]))]
    v = B
    for _ in range(count + k):
        base.append(C @ v)
        v = A @ v
    # s^k * sum_j base[j] s^-j  =>  coefficient of s^(k-j)
    poly = [base[j] for j in range(k - 1, 0, -1)] if k > 1 else []
    markov = base[k : k + count]
    return poly, markov


def markov_parameters(sys, count: int) -> list[np.ndarray]:
    """First ``count`` expansion coefficients at infinity, ``[0, CB, CAB, ...]``.

    For a :class:`DescriptorModel` this is the ``s^0, s^-1, ...`` part of
    :func:`expansion_at_infinity`.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if isinstance(sys, DescriptorModel):
        return expansion_at_infinity(sys, count)[1]
    lti = as_lti(sys)
    out = [np.zeros((lti.p, lti.m), dtype=np.result_type(lti.A, lti.B, lti.C))]
    v = lti.B
    for _ in range(count - 1):
        out.append(lti.C @ v)
        v = lti.A @ v
    return out


def _positive(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise NonPositiveParameter(f"{name} must be positive, got {arr.tolist()}")
    return arr


def ladder_system(
    r: Sequence[float] = (1.0, 1.0, 1.0),
    c: Sequence[float] = (1.0, 1.0),
    l: Sequence[float] = (1.0, 1.0),
    *,
    q: Sequence[float] | None = None,
) -> PortHamiltonianSystem:
    """Fourth-order RLC ladder driven by a current source.

    State ``[q1, phi1, q2, phi2]`` (capacitor charges, inductor fluxes),
    input the source current, output the voltage across ``C1``.

    Parameters
    ----------
    r : 3 floats
        Resistances ``R1, R2, R3``; ``R2`` and ``R3`` sit in series.
    c : 2 floats
        Capacitances ``C1, C2``.
    l : 2 floats
        Inductances ``L1, L2``.
    q : 4 floats, optional
        Energy-matrix diagonal given directly, overriding ``c`` and ``l``.

    Raises
    ------
    NonPositiveParameter
    """
    r = _positive("r", r)
    if r.size != 3:
        raise DimensionError("r needs three resistances")
    if q is None:
        c, l = _positive("c", c), _positive("l", l)
        if c.size != 2 or l.size != 2:
            raise DimensionError("c and l need two entries each")
        qd = np.array([1 / c[0], 1 / l[0], 1 / c[1], 1 / l[1]])
    else:
        qd = _positive("q", q)
        if qd.size != 4:
            raise DimensionError("q needs four entries")
    J = np.diag([-1.0, -1.0, -1.0], k=1)
    J = J - J.T
    R = np.diag([0.0, r[0], 0.0, r[1] + r[2]])
    B = np.eye(4, 1)
    return PortHamiltonianSystem(J, R, np.diag(qd), B, r_psd=True, q_pd=True)


# Machine data (per-unit).  The (5, 5) inductance is not legible in the
# source table; 0.7342 follows the standard textbook machine and makes the
# matrix positive definite.
SMIB_INDUCTANCE = np.array(
    [
        [0.22, 0.0, 0.01, 0.01, 0.0, 0.0],
        [0.0, 0.219, 0.0, 0.0, 0.009, 0.009],
        [0.01, 0.0, 1.825, 1.660, 0.0, 0.0],
        [0.01, 0.0, 1.660, 1.8313, 0.0, 0.0],
        [0.0, 0.009, 0.0, 0.0, 0.7342, 0.009],
        [0.0, 0.009, 0.0, 0.0, 0.009, 0.134],
    ]
)
SMIB_RESISTANCE = np.array([0.031, 0.031, 0.0006, 0.0284, 0.00619, 0.023638, 10.0])
SMIB_INERTIA = 6.0


def smib_system(delta: float = np.pi / 4, *, inductance=None) -> PortHamiltonianSystem:
    """Linearized single-machine infinite-bus model (7 states, 3 ports).

    Parameters
    ----------
    delta : float, optional
        Rotor angle of the operating point, in radians.
    inductance : (6, 6) array_like, optional
        Replacement inductance matrix.

    Returns
    -------
    PortHamiltonianSystem
        ``J = 0``, ``R`` diagonal, ``Q = blockdiag(inv(Lmat), 1/j)``.
    """
    Lmat = SMIB_INDUCTANCE if inductance is None else np.asarray(inductance, dtype=float)
    Q = np.zeros((7, 7))
    Q[:6, :6] = np.linalg.inv(Lmat)
    Q[6, 6] = 1.0 / SMIB_INERTIA
    Q = 0.5 * (Q + Q.T)
    B = np.zeros((7, 3))
    B[6, 0] = 1.0
    B[2, 1] = 1.0
    B[0, 2], B[1, 2] = np.sin(delta), np.cos(delta)
    return PortHamiltonianSystem(np.zeros((7, 7)), np.diag(SMIB_RESISTANCE), Q, B, r_psd=True, q_pd=True)
