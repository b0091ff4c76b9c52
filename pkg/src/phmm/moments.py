"""Moments at finite points and at infinity.

Moments are defined operationally through Sylvester equations: for a right
generator ``(S, L)`` they are the columns of ``C Pi``, for a left generator
``(Qc, Rc)`` the rows of ``Upsilon B``.  With a Jordan block at ``s0`` and a
unit selector these are the Taylor coefficients ``K(s0), K'(s0), K''(s0)/2!``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .errors import DimensionError, InvariantError, PoleHit, SingularMatrix
from .linalg import SylvesterForm, solve_linear, solve_sylvester, sylvester_residual
from .systems import GeneratorLeft, GeneratorRight, LtiSystem, as_lti

__all__ = [
    "MARKOV_VARIANTS",
    "SylvesterSolution",
    "MomentVector",
    "moments_finite",
    "moments_markov",
    "moment_derivative_oracle",
    "split_tilde_generator",
]

Generator = Union[GeneratorRight, GeneratorLeft]
MARKOV_VARIANTS = ("pi", "pi_bar", "pi_tilde", "upsilon", "upsilon_hat")
_RIGHT_VARIANTS = ("pi", "pi_bar", "pi_tilde")


@dataclass(frozen=True, eq=False)
class SylvesterSolution:
    """A solved interpolation matrix tagged with its equation.

    Attributes
    ----------
    matrix : ndarray
        ``n x nu`` for right forms, ``nu x n`` for left forms.
    form : SylvesterForm
    generator : GeneratorRight or GeneratorLeft
        The generator that was used (for ``pi_tilde`` the reduced pair
        ``(S2, D)``).
    coupling : ndarray
        The ``C`` operand passed to the solver.
    """

    matrix: np.ndarray
    form: SylvesterForm
    generator: Generator
    coupling: np.ndarray
    plant: np.ndarray = field(repr=False)

    def residual(self) -> float:
        """Frobenius residual of the defining identity."""
        M = self.generator.S if isinstance(self.generator, GeneratorRight) else self.generator.Qc
        return sylvester_residual(self.form, self.plant, M, self.coupling, self.matrix)


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Moments together with where they came from.

    Attributes
    ----------
    matrix : ndarray
        ``p x nu`` (right side) or ``nu x m`` (left side).
    side : {'right', 'left'}
    kind : str
        ``'finite'`` or ``'markov_<variant>'``.
    points : ndarray
        Interpolation points (generator spectrum).
    """

    matrix: np.ndarray
    side: Literal["right", "left"]
    kind: str
    points: np.ndarray

    @property
    def values(self) -> list:
        """Per-column (right) or per-row (left) moments; scalars when SISO."""
        M = self.matrix if self.side == "right" else self.matrix.T
        cols = [M[:, i] for i in range(M.shape[1])]
        return [c.item() if c.size == 1 else c for c in cols]

    def __len__(self) -> int:
        return self.matrix.shape[1] if self.side == "right" else self.matrix.shape[0]

    def to_dict(self) -> dict:
        return {"side": self.side, "kind": self.kind, "matrix": self.matrix, "points": self.points}


def _check_ports(lti: LtiSystem, gen: Generator) -> None:
    if isinstance(gen, GeneratorRight) and gen.L.shape[0] != lti.m:
        raise DimensionError(f"L has {gen.L.shape[0]} rows but the system has {lti.m} inputs")
    if isinstance(gen, GeneratorLeft) and gen.Rc.shape[1] != lti.p:
        raise DimensionError(f"Rc has {gen.Rc.shape[1]} columns but the system has {lti.p} outputs")


def moments_finite(sys, gen: Generator) -> tuple[MomentVector, SylvesterSolution]:
    """Moments at the (finite) spectrum of a generator.

    Parameters
    ----------
    sys : LtiSystem or PortHamiltonianSystem
    gen : GeneratorRight or GeneratorLeft
        Right data gives ``phi = C Pi`` with ``A Pi + B L = Pi S``; left data
        gives ``varphi = Upsilon B`` with ``Qc Upsilon = Upsilon A + Rc C``.

    Returns
    -------
    moments : MomentVector
    solution : SylvesterSolution

    Raises
    ------
    SpectrumClash
        If a point is a pole of ``sys``.

    Examples
    --------
    >>> from phmm import ladder_system, GeneratorRight, moments_finite
    >>> mv, _ = moments_finite(ladder_system(), GeneratorRight.jordan(0, 2))
    >>> [round(v.real, 12) for v in mv.values]
    [3.0, -11.0]
    """
    lti = as_lti(sys)
    _check_ports(lti, gen)
    if isinstance(gen, GeneratorRight):
        form, C = SylvesterForm.FINITE_RIGHT, lti.B @ gen.L
        X = solve_sylvester(form, lti.A, gen.S, C)
        mv = MomentVector(lti.C @ X, "right", "finite", gen.points)
    elif isinstance(gen, GeneratorLeft):
        form, C = SylvesterForm.FINITE_LEFT, gen.Rc @ lti.C
        X = solve_sylvester(form, lti.A, gen.Qc, C)
        mv = MomentVector(X @ lti.B, "left", "finite", gen.points)
    else:
        raise TypeError("gen must be a GeneratorRight or GeneratorLeft")
    return mv, SylvesterSolution(X, form, gen, C, lti.A)


def split_tilde_generator(gen: GeneratorRight) -> GeneratorRight:
    """Reduced pair ``(S2, D)`` for the ``pi_tilde`` construction.

    ``S`` must have the block form ``[[0, S1], [0, S2]]`` (zero first
    column).  Then ``D = (L S)[:, 1:]`` and the shifted equation splits into
    ``Pi_bar_0 = 0`` and ``A Pi_t S2 + B D = Pi_t``.
    """
    S = gen.S
    if S.shape[0] < 2:
        raise DimensionError("pi_tilde needs a generator of size at least 2")
    if np.any(S[:, 0] != 0):
        raise InvariantError("pi_tilde needs S with a zero first column")
    S2 = S[1:, 1:]
    D = (gen.L @ S)[:, 1:]
    return GeneratorRight(S2, D)


def moments_markov(sys, gen: Generator, variant: str = "pi") -> tuple[MomentVector, SylvesterSolution]:
    """Moments of ``K(1/tau)`` at the generator spectrum.

    With a nilpotent generator (points at ``tau = 0``) these are Markov
    parameters of ``sys``.

    Parameters
    ----------
    sys : LtiSystem or PortHamiltonianSystem
    gen : GeneratorRight or GeneratorLeft
    variant : {'pi', 'pi_bar', 'pi_tilde', 'upsilon', 'upsilon_hat'}
        ============  ===============================  ======================
        variant       equation                         moments
        ============  ===============================  ======================
        pi            ``A X S + B L = X``              ``C X S``
        pi_bar        ``A X S + B L S = X``            ``C X``
        pi_tilde      ``A X S2 + B D = X``             ``C X``
        upsilon       ``X = Qc X A + Rc C``            ``Qc X B``
        upsilon_hat   ``X = Qc X A + Rc C A``          ``Qc (Qc X + Rc C) B``
        ============  ===============================  ======================

    Returns
    -------
    moments : MomentVector
    solution : SylvesterSolution

    Raises
    ------
    SpectrumProductClash
        If ``lambda * mu = 1`` for some pole ``lambda`` and point ``mu``.
    """
    if variant not in MARKOV_VARIANTS:
        raise ValueError(f"unknown Markov variant {variant!r}; expected one of {MARKOV_VARIANTS}")
    lti = as_lti(sys)
    right = variant in _RIGHT_VARIANTS
    if right != isinstance(gen, GeneratorRight):
        raise TypeError(f"variant {variant!r} needs a {'right' if right else 'left'} generator")
    _check_ports(lti, gen)
    A, B, C = lti.A, lti.B, lti.C
    kind = f"markov_{variant}"
    if variant == "pi":
        form, cpl = SylvesterForm.MARKOV_RIGHT, B @ gen.L
        X = solve_sylvester(form, A, gen.S, cpl)
        mv = MomentVector(C @ X @ gen.S, "right", kind, gen.points)
    elif variant == "pi_bar":
        form, cpl = SylvesterForm.MARKOV_RIGHT_SHIFTED, B @ gen.L
        X = solve_sylvester(form, A, gen.S, cpl)
        mv = MomentVector(C @ X, "right", kind, gen.points)
    elif variant == "pi_tilde":
        red = split_tilde_generator(gen)
        form, cpl = SylvesterForm.MARKOV_RIGHT, B @ red.L
        X = solve_sylvester(form, A, red.S, cpl)
        mv = MomentVector(C @ X, "right", kind, red.points)
        gen = red
    elif variant == "upsilon":
        form, cpl = SylvesterForm.MARKOV_LEFT, gen.Rc @ C
        X = solve_sylvester(form, A, gen.Qc, cpl)
        mv = MomentVector(gen.Qc @ X @ B, "left", kind, gen.points)
    else:
        form, cpl = SylvesterForm.MARKOV_LEFT_SHIFTED, gen.Rc @ C
        X = solve_sylvester(form, A, gen.Qc, cpl)
        mv = MomentVector(gen.Qc @ (gen.Qc @ X + gen.Rc @ C) @ B, "left", kind, gen.points)
    return mv, SylvesterSolution(X, form, gen, cpl, A)


def moment_derivative_oracle(sys, s0: complex, k: int) -> list[np.ndarray]:
    """Taylor data ``[K(s0), K'(s0), K''(s0)/2!, ...]`` by repeated solves.

    Uses ``K^(j)(s0) / j! = (-1)^j C (s0 I - A)^-(j+1) B``.

    Parameters
    ----------
    sys : LtiSystem or PortHamiltonianSystem
    s0 : complex
    k : int
        Number of coefficients.

    Raises
    ------
    PoleHit
    """
    lti = as_lti(sys)
    M = complex(s0) * np.eye(lti.n) - lti.A
    real = np.isreal(s0) and not np.iscomplexobj(lti.A)
    if real:
        M = M.real
    out, V = [], lti.B
    try:
        for j in range(k):
            V = solve_linear(M, V)
            out.append((-1) ** j * (lti.C @ V))
    except SingularMatrix as exc:
        raise PoleHit(f"s0 = {s0} is a pole") from exc
    return out
