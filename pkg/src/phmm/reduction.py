"""Reduced-order families and structure-preserving reductions.

Every constructor returns a :class:`Reduction` bundling the reduced model
with a :class:`MatchCertificate` that :func:`phmm.verification.verify_certificate`
can check independently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

import numpy as np
import scipy.linalg as sla

from .errors import (
    CertificateInvalid,
    DimensionError,
    PoleHit,
    RankDeficientBasis,
    SingularE,
    SingularGram,
    SingularMatrix,
    SpectrumClash,
)
from .linalg import (
    SylvesterForm,
    numerical_rank,
    realify,
    solve_linear,
    solve_sylvester,
    spectrum,
)
from .moments import (
    MomentVector,
    SylvesterSolution,
    moments_finite,
    moments_markov,
    split_tilde_generator,
)
from .systems import (
    DescriptorModel,
    GeneratorLeft,
    GeneratorRight,
    LtiSystem,
    PortHamiltonianSystem,
    as_lti,
)

__all__ = [
    "CERTIFICATE_KINDS",
    "MatchCertificate",
    "Reduction",
    "ReducedFamilyRight",
    "ReducedFamilyLeft",
    "KrylovBasis",
    "BasisEquivalence",
    "family_right",
    "family_left",
    "ph_gain",
    "reduce_ph_finite",
    "reduce_ph_markov",
    "reduce_descriptor_markov",
    "descriptor_companion_family",
    "realify_generator",
    "krylov_basis",
    "markov_krylov_basis",
    "reduce_ph_krylov",
    "project",
    "mirror_points",
    "basis_equivalence",
]

Generator = Union[GeneratorRight, GeneratorLeft]

CERTIFICATE_KINDS = (
    "finite_right",
    "finite_left",
    "markov_pi",
    "markov_pi_bar",
    "markov_pi_tilde",
    "markov_cond_1",
    "markov_cond_2",
    "descriptor_shifted",
)
_GRAM_RTOL = 1e-12
_PAIR_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class MatchCertificate:
    """Invertible ``P`` witnessing a set of algebraic matching identities.

    Write the reduced model as ``E x' = F x + G u``, ``y = H x`` (``E = I``
    for explicit models).  The identities checked for each ``kind`` are

    ====================  ==========================================================
    ``finite_right``      ``F P + G L = P S``,  ``H P = target``
    ``finite_left``       ``Qc P = P F + Rc H``,  ``P G = target``
    ``markov_pi``         ``F P S + G L = P``,  ``H P S = target S``
    ``markov_pi_bar``     ``F P S + G L S = P``,  ``H P = target``
    ``markov_pi_tilde``   ``F P S + G L = P``,  ``H P = target`` (``S, L`` reduced)
    ``markov_cond_1``     ``Qc P F + Rc H = P E``,  ``Qc P G = target``
    ``markov_cond_2``     ``Qc P F + Rc H = P E``,  ``Qc (Qc P + Rc H) G = target``
    ``descriptor_shifted````Qc P F + Rc H = P E``,  ``P G = target``
    ====================  ==========================================================

    ``target`` is the moment data of the original system (``C Pi``,
    ``Upsilon B``, ``Qc Upsilon B``, ...), stored in ``data`` together with
    the generator matrices.
    """

    P: np.ndarray
    kind: str
    data: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in CERTIFICATE_KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")

    @property
    def side(self) -> str:
        return "right" if self.kind in ("finite_right", "markov_pi", "markov_pi_bar", "markov_pi_tilde") else "left"


@dataclass(frozen=True, eq=False)
class Reduction:
    """Result of a reduction.

    Attributes
    ----------
    model : PortHamiltonianSystem, LtiSystem or DescriptorModel
    certificate : MatchCertificate
    moments : MomentVector or None
        Moments of the original system that the model matches.
    solution : SylvesterSolution or None
    gain : ndarray or None
        Free parameter (``G`` or ``H``) that selects the model.
    generator : GeneratorRight, GeneratorLeft or None
        Generator actually used (after real-ification, if any).
    """

    model: Any
    certificate: MatchCertificate
    moments: MomentVector | None = None
    solution: SylvesterSolution | None = None
    gain: np.ndarray | None = None
    generator: Generator | None = None

    @property
    def transfer_model(self):
        return self.model


def _gram_inverse(gram: np.ndarray, what: str) -> np.ndarray:
    nu = gram.shape[0]
    if numerical_rank(gram, _GRAM_RTOL) < nu:
        raise SingularGram(f"{what} is numerically singular")
    try:
        inv = solve_linear(gram, np.eye(nu))
    except SingularMatrix as exc:
        raise SingularGram(f"{what} is singular") from exc
    return inv


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _skew(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M - M.T)


def _require_ph(sys) -> PortHamiltonianSystem:
    if not isinstance(sys, PortHamiltonianSystem):
        raise TypeError("a PortHamiltonianSystem is required")
    return sys


def _real(M: np.ndarray, name: str) -> np.ndarray:
    return realify(M, rtol=1e-10, name=name)


# -- real-ification --------------------------------------------------------


def _pairing(points: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Realifier for a diagonal generator; ``dirs`` holds one direction per column."""
    nu = points.size
    M = np.zeros((nu, nu), dtype=complex)
    used = np.zeros(nu, dtype=bool)
    scale = 1.0 + np.abs(points).max(initial=0.0)
    dscale = 1.0 + np.abs(dirs).max(initial=0.0)
    for j in range(nu):
        if used[j]:
            continue
        if abs(points[j].imag) <= _PAIR_RTOL * scale and np.all(np.abs(dirs[:, j].imag) <= _PAIR_RTOL * dscale):
            M[j, j] = 1.0
            used[j] = True
            continue
        partner = None
        for k in range(j + 1, nu):
            if used[k]:
                continue
            if (
                abs(points[k] - np.conj(points[j])) <= _PAIR_RTOL * scale
                and np.all(np.abs(dirs[:, k] - np.conj(dirs[:, j])) <= _PAIR_RTOL * dscale)
            ):
                partner = k
                break
        if partner is None:
            raise ValueError(f"complex point {points[j]} has no conjugate partner with conjugate direction")
        k = partner
        M[j, j] = M[k, j] = 0.5
        M[j, k] = 1 / 2j
        M[k, k] = -1 / 2j
        used[j] = used[k] = True
    return M


def realify_generator(gen: Generator) -> tuple[Generator, np.ndarray]:
    """Real generator equivalent to a diagonal complex one.

    For a right generator with conjugate pairs ``(s, conj s)`` carrying
    conjugate directions, the returned ``M`` maps ``Pi`` to the real basis
    ``Pi M`` whose paired columns are ``(Re pi, Im pi)``; the new generator
    is ``(M^-1 S M, L M)``.  Left generators use ``M^T`` on the row side.

    Returns
    -------
    gen_real : GeneratorRight or GeneratorLeft
    M : ndarray
        Realifier (identity if ``gen`` is already real).
    """
    mat = gen.S if isinstance(gen, GeneratorRight) else gen.Qc
    if not np.iscomplexobj(mat) and not np.iscomplexobj(gen.L if isinstance(gen, GeneratorRight) else gen.Rc):
        return gen, np.eye(mat.shape[0])
    if np.any(np.abs(mat - np.diag(np.diag(mat))) > 0):
        raise ValueError("only diagonal complex generators can be real-ified")
    pts = np.diag(mat).astype(complex)
    if isinstance(gen, GeneratorRight):
        M = _pairing(pts, gen.L.astype(complex))
        Mi = np.linalg.inv(M)
        return GeneratorRight(_real(Mi @ gen.S @ M, "S"), _real(gen.L @ M, "L")), M
    M = _pairing(pts, gen.Rc.T.astype(complex))
    N = M.T
    Ni = np.linalg.inv(N)
    return GeneratorLeft(_real(N @ gen.Qc @ Ni, "Qc"), _real(N @ gen.Rc, "Rc")), M


# -- families --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReducedFamilyRight:
    """Models ``(S - G L, G, C Pi)`` parameterized by the gain ``G``."""

    S: np.ndarray
    L: np.ndarray
    Cr: np.ndarray
    solution: SylvesterSolution
    moments: MomentVector

    def member(self, G) -> LtiSystem:
        """Family member for gain ``G`` (``nu x m``).

        Raises
        ------
        SpectrumClash
            If ``S - G L`` shares an eigenvalue with ``S``.
        """
        G = np.asarray(G).reshape(self.S.shape[0], -1)
        F = self.S - G @ self.L
        _disjoint(F, self.S)
        return LtiSystem(F, G, self.Cr)

    def certificate(self, G=None) -> MatchCertificate:
        nu = self.S.shape[0]
        return MatchCertificate(np.eye(nu), "finite_right", {"S": self.S, "L": self.L, "target": self.Cr})

    def reduction(self, G) -> Reduction:
        return Reduction(self.member(G), self.certificate(G), self.moments, self.solution, np.asarray(G),
                         self.solution.generator)


@dataclass(frozen=True, eq=False)
class ReducedFamilyLeft:
    """Models ``(Qc - Rc H, Upsilon B, H)`` parameterized by the gain ``H``."""

    Qc: np.ndarray
    Rc: np.ndarray
    Br: np.ndarray
    solution: SylvesterSolution
    moments: MomentVector

    def member(self, H) -> LtiSystem:
        """Family member for gain ``H`` (``p x nu``)."""
        H = np.asarray(H).reshape(-1, self.Qc.shape[0])
        F = self.Qc - self.Rc @ H
        _disjoint(F, self.Qc)
        return LtiSystem(F, self.Br, H)

    def certificate(self, H=None) -> MatchCertificate:
        nu = self.Qc.shape[0]
        return MatchCertificate(np.eye(nu), "finite_left", {"Qc": self.Qc, "Rc": self.Rc, "target": self.Br})

    def reduction(self, H) -> Reduction:
        return Reduction(self.member(H), self.certificate(H), self.moments, self.solution, np.asarray(H),
                         self.solution.generator)


def _disjoint(F: np.ndarray, S: np.ndarray) -> None:
    a, b = spectrum(F), spectrum(S)
    gap = np.abs(a[:, None] - b[None, :])
    if gap.size and np.any(gap <= 1e-8 * (1.0 + np.abs(b)[None, :])):
        raise SpectrumClash("reduced matrix shares an eigenvalue with the generator")


def family_right(sys, gen: GeneratorRight) -> ReducedFamilyRight:
    """Family of models matching the moments at ``eig(S)``.

    Raises
    ------
    SpectrumClash
    """
    mv, sol = moments_finite(sys, gen)
    return ReducedFamilyRight(gen.S, gen.L, mv.matrix, sol, mv)


def family_left(sys, gen: GeneratorLeft) -> ReducedFamilyLeft:
    """Family of models matching the left moments at ``eig(Qc)``."""
    mv, sol = moments_finite(sys, gen)
    return ReducedFamilyLeft(gen.Qc, gen.Rc, mv.matrix, sol, mv)


def ph_gain(sys: PortHamiltonianSystem, gen: Generator, side: str | None = None) -> np.ndarray:
    """Gain that makes the family member port-Hamiltonian.

    Right: ``G = (Pi^T Q Pi)^-1 Pi^T Q B``.  Left:
    ``H = B^T Upsilon^T (Upsilon Q^-1 Upsilon^T)^-1``.

    Raises
    ------
    SingularGram
    """
    sys = _require_ph(sys)
    _check_side(gen, side)
    _, sol = moments_finite(sys, gen)
    X = sol.matrix
    if isinstance(gen, GeneratorRight):
        gram = X.T @ sys.Q @ X
        return _gram_inverse(gram, "Pi^T Q Pi") @ (X.T @ sys.Q @ sys.B)
    Qi = solve_linear(sys.Q, np.eye(sys.n))
    gram = X @ Qi @ X.T
    return sys.B.T @ X.T @ _gram_inverse(gram, "Upsilon Q^-1 Upsilon^T")


def _check_side(gen: Generator, side: str | None) -> None:
    if side is None:
        return
    if side not in ("right", "left"):
        raise ValueError("side must be 'right' or 'left'")
    if (side == "right") != isinstance(gen, GeneratorRight):
        raise TypeError(f"side={side!r} does not match generator type {type(gen).__name__}")


def _ph_right(sys: PortHamiltonianSystem, X: np.ndarray) -> tuple[PortHamiltonianSystem, np.ndarray]:
    Q = sys.Q
    QX = Q @ X
    gram = _sym(X.T @ QX)
    Qr = _sym(_gram_inverse(gram, "Pi^T Q Pi"))
    Jr = _skew(QX.T @ sys.J @ QX)
    Rr = _sym(QX.T @ sys.R @ QX)
    Br = QX.T @ sys.B
    return PortHamiltonianSystem(Jr, Rr, Qr, Br, r_psd=sys.r_psd, q_pd=sys.q_pd), gram


def _ph_left(sys: PortHamiltonianSystem, Y: np.ndarray) -> tuple[PortHamiltonianSystem, np.ndarray]:
    Qi = solve_linear(sys.Q, np.eye(sys.n))
    gram = _sym(Y @ Qi @ Y.T)
    Qr = _sym(_gram_inverse(gram, "Upsilon Q^-1 Upsilon^T"))
    Jr = _skew(Y @ sys.J @ Y.T)
    Rr = _sym(Y @ sys.R @ Y.T)
    Br = Y @ sys.B
    return PortHamiltonianSystem(Jr, Rr, Qr, Br, r_psd=sys.r_psd, q_pd=sys.q_pd), gram


def reduce_ph_finite(sys: PortHamiltonianSystem, gen: Generator, side: str | None = None) -> Reduction:
    """Port-Hamiltonian model matching the moments at a finite point set.

    Right data ``(S, L)``::

        Jr = Pi^T Q J Q Pi,  Rr = Pi^T Q R Q Pi,
        Qr = (Pi^T Q Pi)^-1, Br = Pi^T Q B

    Left data ``(Qc, Rc)``::

        Jr = Ups J Ups^T,  Rr = Ups R Ups^T,
        Qr = (Ups Q^-1 Ups^T)^-1, Br = Ups B

    Complex diagonal generators with conjugate pairs are real-ified first.

    Parameters
    ----------
    sys : PortHamiltonianSystem
    gen : GeneratorRight or GeneratorLeft
    side : {'right', 'left'}, optional
        Checked against the generator type when given.

    Returns
    -------
    Reduction
        ``certificate.P`` is ``Pi^T Q Pi`` (right) or ``I`` (left).

    Raises
    ------
    SingularGram
    SpectrumClash
        If a point is a pole of the original, or of the reduced model.

    Examples
    --------
    >>> from phmm import ladder_system, GeneratorRight, reduce_ph_finite
    >>> red = reduce_ph_finite(ladder_system(q=(1, 1, 2, 1)), GeneratorRight.jordan(0, 2))
    >>> red.model.B.ravel().round(12).tolist()
    [3.0, -9.0]
    """
    sys = _require_ph(sys)
    _check_side(gen, side)
    gen, _ = realify_generator(gen)
    mv, sol = moments_finite(sys, gen)
    if isinstance(gen, GeneratorRight):
        model, gram = _ph_right(sys, sol.matrix)
        _disjoint(model.A, gen.S)
        gain = _gram_inverse(gram, "Pi^T Q Pi") @ model.B
        cert = MatchCertificate(gram, "finite_right", {"S": gen.S, "L": gen.L, "target": mv.matrix})
    else:
        model, gram = _ph_left(sys, sol.matrix)
        _disjoint(model.A, gen.Qc)
        gain = model.C
        cert = MatchCertificate(np.eye(gen.nu), "finite_left", {"Qc": gen.Qc, "Rc": gen.Rc, "target": mv.matrix})
    return Reduction(model, cert, mv, sol, gain, gen)


def _markov_disjoint(F: np.ndarray, S: np.ndarray) -> None:
    prod = spectrum(F)[:, None] * spectrum(S)[None, :]
    if prod.size and np.any(np.abs(prod - 1.0) <= 1e-8 * (1.0 + np.abs(prod))):
        raise SpectrumClash("reduced model violates the eigenvalue-product condition")


def reduce_ph_markov(sys: PortHamiltonianSystem, gen: Generator, variant: str = "pi") -> Reduction:
    """Port-Hamiltonian model matching moments of ``K(1/tau)``.

    With a nilpotent generator these are Markov parameters.

    Parameters
    ----------
    sys : PortHamiltonianSystem
    gen : GeneratorRight or GeneratorLeft
    variant : {'pi', 'pi_bar', 'pi_tilde', 'upsilon', 'upsilon_hat'}
        Right variants project with the Sylvester solution ``X``
        (``Jr = X^T Q J Q X``, ``Qr = (X^T Q X)^-1``, ``Br = X^T Q B``).
        Left variants use ``Jr = X J X^T``, ``Qr = (X Q^-1 X^T)^-1``,
        ``Br = X B``; for ``upsilon_hat`` the input matrix is additionally
        scaled by the unique ``beta > 0`` that makes the second identity
        of ``markov_cond_2`` hold.

    Returns
    -------
    Reduction
        ``pi_tilde`` yields a model one state smaller than the generator.

    Raises
    ------
    SpectrumProductClash, SingularGram, CertificateInvalid
    """
    sys = _require_ph(sys)
    mv, sol = moments_markov(sys, gen, variant)
    X = sol.matrix
    if variant in ("pi", "pi_bar", "pi_tilde"):
        model, gram = _ph_right(sys, X)
        g = sol.generator
        _markov_disjoint(model.A, g.S)
        kind = {"pi": "markov_pi", "pi_bar": "markov_pi_bar", "pi_tilde": "markov_pi_tilde"}[variant]
        target = sys.C @ X
        cert = MatchCertificate(gram, kind, {"S": g.S, "L": g.L, "target": target})
        return Reduction(model, cert, mv, sol, _gram_inverse(gram, "Pi^T Q Pi") @ model.B, g)

    Qc, Rc = gen.Qc, gen.Rc
    model, _ = _ph_left(sys, X)
    _markov_disjoint(model.A, Qc)
    if variant == "upsilon":
        cert = MatchCertificate(np.eye(gen.nu), "markov_cond_1", {"Qc": Qc, "Rc": Rc, "target": mv.matrix})
        return Reduction(model, cert, mv, sol, model.C, gen)

    # upsilon_hat: scale Br by beta so that Qc (Qc P + Rc H) G = target.
    F, G1, H1 = model.A, model.B, model.C
    P1 = solve_sylvester(SylvesterForm.MARKOV_LEFT, F, Qc, Rc @ H1)
    v = Qc @ (Qc @ P1 + Rc @ H1) @ G1
    t = mv.matrix
    vv = float(np.vdot(v, v).real)
    if vv == 0.0:
        if np.linalg.norm(t) != 0.0:
            raise CertificateInvalid("no input scaling satisfies the shifted matching identity")
        beta2 = 1.0
    else:
        beta2 = float(np.vdot(v, t).real) / vv
    if beta2 <= 0.0:
        raise CertificateInvalid(f"shifted matching identity needs beta^2 = {beta2:.6g} <= 0")
    if np.linalg.norm(beta2 * v - t) > 1e-8 * (1.0 + np.linalg.norm(t)):
        raise CertificateInvalid("shifted matching identity cannot be met by scaling the input matrix")
    beta = np.sqrt(beta2)
    model = PortHamiltonianSystem(model.J, model.R, model.Q, beta * model.B, r_psd=model.r_psd, q_pd=model.q_pd)
    P = beta * P1
    cert = MatchCertificate(P, "markov_cond_2", {"Qc": Qc, "Rc": Rc, "target": t, "beta": beta})
    return Reduction(model, cert, mv, sol, model.C, gen)


def reduce_descriptor_markov(sys, gen: GeneratorLeft, variant: int, H) -> Reduction:
    """Descriptor model ``(Qc - Rc H) x' = x + G u`` matching moments of ``K(1/tau)``.

    ====  ==============================  ==================
    var   ``G``                           derivative flag
    ====  ==============================  ==================
    1     ``-Ups B``                      none
    2     ``-Qc Ups B``                   output ``H x'``
    3     ``-(Qc Ups_hat + Rc C) B``      none
    4     ``-Qc (Qc Ups_hat + Rc C) B``   input ``u'``
    ====  ==============================  ==================

    ``Ups`` and ``Ups_hat`` solve the unshifted and shifted left Markov
    equations.  The certificate uses ``P = -I``.

    Parameters
    ----------
    sys : LtiSystem or PortHamiltonianSystem
    gen : GeneratorLeft
    variant : {1, 2, 3, 4}
    H : (p, nu) array_like
        Free output matrix; ``Qc - Rc H`` must be invertible.

    Raises
    ------
    SingularE
    SpectrumProductClash
    """
    if variant not in (1, 2, 3, 4):
        raise ValueError("variant must be 1, 2, 3 or 4")
    if not isinstance(gen, GeneratorLeft):
        raise TypeError("a GeneratorLeft is required")
    lti = as_lti(sys)
    Qc, Rc = gen.Qc, gen.Rc
    H = np.asarray(H, dtype=np.result_type(Qc, float)).reshape(lti.p, gen.nu)
    E = Qc - Rc @ H
    if numerical_rank(E, 1e-12) < gen.nu:
        raise SingularE("Qc - Rc H is singular for this H")
    mv, sol = moments_markov(lti, gen, "upsilon")
    Ups = sol.matrix
    UpsB = Ups @ lti.B
    if variant in (3, 4):
        mv_hat, sol_hat = moments_markov(lti, gen, "upsilon_hat")
        base = (Qc @ sol_hat.matrix + Rc @ lti.C) @ lti.B
    else:
        base = UpsB
    G = -base if variant in (1, 3) else -(Qc @ base)
    model = DescriptorModel(E, np.eye(gen.nu), G, H,
                            input_derivative=variant == 4, output_derivative=variant == 2)
    kind = "markov_cond_1" if variant in (1, 3) else "descriptor_shifted"
    cert = MatchCertificate(-np.eye(gen.nu), kind, {"Qc": Qc, "Rc": Rc, "target": Qc @ UpsB})
    return Reduction(model, cert, mv, sol, H, gen)


def descriptor_companion_family(sys, nu: int, f1: float = 0.0, F2=None, g: float = 0.0) -> Reduction:
    """Companion-form family matching the first ``nu`` Markov parameters.

    With ``Qc`` the ``nu x nu`` lower shift and ``Rc = e_1``, and ``Xi`` the
    first ``nu - 1`` entries of ``Ups B``, the model is::

        F = [[0, I], [f1, F2^T]],  G = [Xi; g],  H = e_1^T,  E = I

    ``f1``, ``F2`` and ``g`` are free.  The certificate is ``markov_cond_1``
    with ``P = I``.  SISO only.
    """
    lti = as_lti(sys)
    if lti.m != 1 or lti.p != 1:
        raise DimensionError("the companion family is defined for SISO systems")
    if nu < 1:
        raise ValueError("nu must be positive")
    gen = GeneratorLeft.jordan(0.0, nu)
    mv, sol = moments_markov(lti, gen, "upsilon")
    F2 = np.zeros(nu - 1) if F2 is None else np.asarray(F2, dtype=float).ravel()
    if F2.size != nu - 1:
        raise DimensionError(f"F2 must have {nu - 1} entries")
    F = np.zeros((nu, nu))
    F[:-1, 1:] = np.eye(nu - 1)
    F[-1, 0] = f1
    F[-1, 1:] = F2
    UpsB = sol.matrix @ lti.B
    G = np.vstack([UpsB[: nu - 1], [[g]]])
    H = np.eye(1, nu)
    model = DescriptorModel(np.eye(nu), F, G, H)
    cert = MatchCertificate(np.eye(nu), "markov_cond_1", {"Qc": gen.Qc, "Rc": gen.Rc, "target": mv.matrix})
    return Reduction(model, cert, mv, sol, H, gen)


# -- Krylov ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrylovBasis:
    """Projection basis with its real-ification.

    Attributes
    ----------
    V : (n, nu) ndarray
        Raw (possibly complex) basis.
    M : (nu, nu) ndarray
        Realifier; ``Vhat = V M`` is real.
    S, L : ndarray or None
        Generator satisfied by ``V`` (``A V + B L = V S``); ``None`` for
        Markov bases.
    W : ndarray or None
        Optional left basis.
    """

    V: np.ndarray
    M: np.ndarray
    S: np.ndarray | None = None
    L: np.ndarray | None = None
    W: np.ndarray | None = None

    @property
    def Vhat(self) -> np.ndarray:
        return _real(self.V @ self.M, "V M")

    @property
    def real_generator(self) -> GeneratorRight:
        """``(M^-1 S M, L M)``, the real generator satisfied by ``Vhat``."""
        if self.S is None:
            raise ValueError("Markov bases carry no finite generator")
        Mi = np.linalg.inv(self.M)
        return GeneratorRight(_real(Mi @ self.S @ self.M, "S"), _real(self.L @ self.M, "L"))


def _tangents(lti: LtiSystem, points: np.ndarray, tangents) -> np.ndarray:
    if tangents is None:
        if lti.m != 1:
            raise DimensionError("tangent directions are required for multi-input systems")
        return np.ones((1, points.size))
    T = np.asarray(tangents)
    if T.ndim == 1:
        T = T.reshape(1, -1) if lti.m == 1 else T.reshape(-1, 1)
    if T.shape == (points.size, lti.m) and T.shape != (lti.m, points.size):
        T = T.T
    if T.shape != (lti.m, points.size):
        raise DimensionError(f"tangents must be {points.size} vectors of length {lti.m}")
    return T


def krylov_basis(sys, points: Sequence[complex], tangents=None) -> KrylovBasis:
    """Rational Krylov basis ``V = [(s_i I - A)^-1 B l_i]``.

    Parameters
    ----------
    sys : LtiSystem or PortHamiltonianSystem
    points : sequence of complex
        Distinct interpolation points; complex points must come in conjugate
        pairs with conjugate tangents.
    tangents : (nu, m) array_like, optional
        One direction per point (default: ones, SISO only).

    Raises
    ------
    RankDeficientBasis
    PoleHit
    """
    lti = as_lti(sys)
    pts = np.asarray(points, dtype=complex).ravel()
    if len(set(np.round(pts, 12).tolist())) != pts.size:
        raise ValueError("points must be distinct")
    T = _tangents(lti, pts, tangents)
    cols = []
    for s, l in zip(pts, T.T):
        try:
            cols.append(solve_linear(s * np.eye(lti.n) - lti.A, lti.B @ l))
        except SingularMatrix as exc:
            raise PoleHit(f"s = {s} is a pole") from exc
    V = np.column_stack(cols)
    if numerical_rank(V, 1e-12) < pts.size:
        raise RankDeficientBasis("Krylov basis does not have full column rank")
    realpts = np.all(np.abs(pts.imag) == 0) and not np.iscomplexobj(T)
    if realpts:
        return KrylovBasis(V.real, np.eye(pts.size), np.diag(pts.real), T.real)
    M = _pairing(pts, T.astype(complex))
    return KrylovBasis(V, M, np.diag(pts), T.astype(complex))


def markov_krylov_basis(sys, nu: int) -> KrylovBasis:
    """Krylov basis at infinity ``V = [B, AB, ..., A^(nu-1) B]`` and ``W`` from ``C``."""
    lti = as_lti(sys)
    Vs, Ws = [], []
    v, w = lti.B, lti.C
    for _ in range(nu):
        Vs.append(v)
        Ws.append(w.T)
        v, w = lti.A @ v, w @ lti.A
    V, W = np.hstack(Vs), np.hstack(Ws)
    if numerical_rank(V, 1e-12) < V.shape[1]:
        raise RankDeficientBasis("Markov Krylov basis does not have full column rank")
    return KrylovBasis(V, np.eye(V.shape[1]), W=W)


def project(sys, V, W) -> LtiSystem:
    """Petrov-Galerkin projection ``(W^T A V, W^T B, C V)``."""
    lti = as_lti(sys)
    V, W = np.asarray(V), np.asarray(W)
    return LtiSystem(W.T @ lti.A @ V, W.T @ lti.B, lti.C @ V)


def reduce_ph_krylov(sys: PortHamiltonianSystem, points: Sequence[complex], tangents=None) -> Reduction:
    """Structure-preserving Krylov reduction.

    With ``Vhat`` the real basis and ``What = Q Vhat (Vhat^T Q Vhat)^-1``::

        Jr = What^T J What,  Rr = What^T R What,
        Qr = Vhat^T Q Vhat,  Br = What^T B

    The result satisfies the right tangential conditions
    ``K(s_i) l_i = Kr(s_i) l_i``.

    Raises
    ------
    SingularGram, RankDeficientBasis
    """
    sys = _require_ph(sys)
    basis = krylov_basis(sys, points, tangents)
    Vh = basis.Vhat
    gram = _sym(Vh.T @ sys.Q @ Vh)
    Wh = sys.Q @ Vh @ _gram_inverse(gram, "V^T Q V")
    model = PortHamiltonianSystem(
        _skew(Wh.T @ sys.J @ Wh), _sym(Wh.T @ sys.R @ Wh), gram, Wh.T @ sys.B,
        r_psd=sys.r_psd, q_pd=sys.q_pd,
    )
    gen = basis.real_generator
    target = sys.C @ Vh
    cert = MatchCertificate(np.eye(Vh.shape[1]), "finite_right", {"S": gen.S, "L": gen.L, "target": target})
    mv = MomentVector(target, "right", "finite", np.asarray(points, dtype=complex))
    return Reduction(model, cert, mv, None, None, gen)


def mirror_points(sys, nu: int) -> np.ndarray:
    """Interpolation points at the mirror images of dominant poles.

    Poles are ranked by residue magnitude (largest singular value for
    matrix residues), then ``|Im|`` ascending, then ``|lambda|`` ascending.
    Conjugate pairs are kept together; a pair that would be split at the
    cut-off is replaced by the next real pole.  For a defective ``A`` the
    poles are ranked by ``|Re lambda|`` ascending instead (with a warning).

    Returns
    -------
    ndarray
        ``nu`` points ``-lambda_i``.
    """
    lti = as_lti(sys)
    lam, Wl, Vr = sla.eig(lti.A, left=True, right=True)
    n = lam.size
    if nu > n:
        raise ValueError("nu exceeds the system order")
    cond = np.linalg.cond(Vr)
    if not np.isfinite(cond) or cond > 1e12:
        warnings.warn("A is (nearly) defective; ranking poles by |Re| instead of residues", RuntimeWarning)
        score = -np.abs(lam.real)
    else:
        res = np.empty(n)
        for i in range(n):
            r = np.outer(lti.C @ Vr[:, i], Wl[:, i].conj() @ lti.B) / (Wl[:, i].conj() @ Vr[:, i])
            res[i] = np.linalg.norm(r, 2)
        score = res / max(res.max(), np.finfo(float).tiny)
    # group conjugate pairs
    tol = 1e-9 * (1.0 + np.abs(lam).max())
    used = np.zeros(n, dtype=bool)
    groups = []
    for i in np.argsort(-lam.imag, kind="stable"):
        if used[i]:
            continue
        used[i] = True
        members = [i]
        if abs(lam[i].imag) > tol:
            cands = [k for k in range(n) if not used[k] and abs(lam[k] - np.conj(lam[i])) <= tol]
            if cands:
                used[cands[0]] = True
                members.append(cands[0])
        rep = members[0]
        key = (-round(float(max(score[k] for k in members)), 9), abs(lam[rep].imag), abs(lam[rep]))
        groups.append((key, members))
    groups.sort(key=lambda kv: kv[0])
    chosen: list[int] = []
    for _, members in groups:
        if len(chosen) == nu:
            break
        if len(chosen) + len(members) <= nu:
            chosen.extend(members)
    if len(chosen) < nu:
        raise ValueError("cannot select nu poles without splitting a conjugate pair")
    pts = -lam[chosen]
    if np.all(pts.imag == 0):
        return pts.real
    return pts


@dataclass(frozen=True)
class BasisEquivalence:
    """Least-squares change of basis ``X ~ Y T``."""

    T: np.ndarray
    residual: float
    equivalent: bool


def basis_equivalence(X, Y) -> BasisEquivalence:
    """Find ``T`` minimizing ``||X - Y T||_F``.

    The bases are declared equivalent when the residual is at most
    ``1e-8 ||X||_F`` and ``T`` is invertible.

    Raises
    ------
    RankDeficientBasis
    """
    X, Y = np.asarray(X), np.asarray(Y)
    if X.shape != Y.shape:
        raise DimensionError(f"shape mismatch {X.shape} vs {Y.shape}")
    for name, M in (("X", X), ("Y", Y)):
        if numerical_rank(M, 1e-12) < M.shape[1]:
            raise RankDeficientBasis(f"{name} does not have full column rank")
    T, *_ = np.linalg.lstsq(Y, X, rcond=None)
    resid = float(np.linalg.norm(X - Y @ T))
    ok = resid <= 1e-8 * np.linalg.norm(X) and numerical_rank(T, 1e-12) == T.shape[0]
    return BasisEquivalence(T, resid, bool(ok))
