"""Machine checks for matching, certificates and passivity.

All checks return :class:`Check` or :class:`VerificationReport` records that
are truthy exactly when they pass, so they can be used directly in
``assert`` statements and serialized by the command line.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import CertificateInvalid, DimensionError, KindMismatch, SingularMatrix
from .linalg import SylvesterForm, numerical_rank, solve_linear, solve_sylvester
from .moments import moment_derivative_oracle, moments_finite, moments_markov
from .reduction import MatchCertificate
from .systems import (
    DescriptorModel,
    GeneratorLeft,
    GeneratorRight,
    LtiSystem,
    PortHamiltonianSystem,
    as_lti,
    expansion_at_infinity,
    markov_parameters,
    transfer_eval,
)

__all__ = [
    "default_tolerance",
    "Check",
    "VerificationReport",
    "verify_finite_match",
    "verify_moments",
    "verify_markov_match",
    "verify_certificate",
    "certificate_target",
    "passivity_data",
    "passivity_check",
    "ph_from_certificate",
    "ph_from_certificate_left",
    "check_ph_structure",
]

EPS_CERT = 1e-10
EPS_INEQ = 1e-8


def default_tolerance() -> float:
    """Verification tolerance, overridable through ``PHMM_TOL``."""
    raw = os.environ.get("PHMM_TOL")
    if raw is None:
        return 1e-8
    try:
        val = float(raw)
    except ValueError as exc:
        raise ValueError(f"PHMM_TOL is not a number: {raw!r}") from exc
    if not val > 0:
        raise ValueError("PHMM_TOL must be positive")
    return val


@dataclass(frozen=True)
class Check:
    """One named check: ``passed`` iff ``residual <= tolerance``."""

    name: str
    residual: float
    tolerance: float
    passed: bool
    note: str = ""

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        d = {"check": self.name, "residual": self.residual, "tolerance": self.tolerance, "pass": self.passed}
        if self.note:
            d["note"] = self.note
        return d


def _check(name: str, residual: float, tol: float, note: str = "") -> Check:
    residual = float(residual)
    return Check(name, residual, float(tol), bool(np.isfinite(residual) and residual <= tol), note)


@dataclass(frozen=True)
class VerificationReport:
    """Collection of checks; truthy iff all pass."""

    checks: tuple[Check, ...]
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def __iter__(self):
        return iter(self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def to_dict(self) -> dict:
        return {"pass": self.passed, "checks": [c.to_dict() for c in self.checks], "notes": list(self.notes)}


def _report(checks: Iterable[Check], notes: Sequence[str] = ()) -> VerificationReport:
    return VerificationReport(tuple(checks), tuple(notes))


# -- interpolation -----------------------------------------------------------


def _group_points(points: np.ndarray, tol: float = 1e-9) -> list[tuple[complex, list[int]]]:
    groups: list[tuple[complex, list[int]]] = []
    for i, s in enumerate(points):
        for g in groups:
            if abs(g[0] - s) <= tol * (1.0 + abs(s)):
                g[1].append(i)
                break
        else:
            groups.append((complex(s), [i]))
    return groups


def _as_explicit(sys):
    if isinstance(sys, DescriptorModel):
        return sys if sys.derivative_order else sys.to_lti()
    return as_lti(sys)


def verify_finite_match(orig, red, points: Sequence[complex], tangents=None, side: str = "right",
                        tol: float | None = None) -> VerificationReport:
    """Tangential interpolation residuals at a set of points.

    For a point repeated ``k`` times the first ``k`` Taylor coefficients
    ``K^(j)(s)/j!`` are compared (via :func:`moment_derivative_oracle`).

    Parameters
    ----------
    orig, red : systems
    points : sequence of complex
    tangents : array_like, optional
        Right: one ``m``-vector per point.  Left: one ``p``-vector per point.
        Defaults to all-ones (the SISO case).
    side : {'right', 'left'}
    tol : float, optional
        Relative tolerance; residuals are scaled by ``1 + |K(s) l|``.

    Raises
    ------
    PoleHit
    """
    tol = default_tolerance() if tol is None else tol
    pts = np.asarray(points, dtype=complex).ravel()
    a, b = _as_explicit(orig), _as_explicit(red)
    width = a.m if side == "right" else a.p
    if tangents is None:
        T = np.ones((pts.size, width))
    else:
        T = np.asarray(tangents, dtype=complex).reshape(pts.size, width) if np.size(tangents) == pts.size * width \
            else np.asarray(tangents, dtype=complex)
        if T.shape != (pts.size, width):
            raise DimensionError(f"tangents must be {pts.size} vectors of length {width}")
    checks = []
    for s, idx in _group_points(pts):
        d = T[idx[0]]
        k = len(idx)
        if k == 1 or isinstance(b, DescriptorModel):
            ka, kb = transfer_eval(a, s), transfer_eval(b, s)
            pairs = [(ka, kb)]
        else:
            pairs = list(zip(moment_derivative_oracle(a, s, k), moment_derivative_oracle(b, s, k)))
        for j, (ka, kb) in enumerate(pairs):
            va = ka @ d if side == "right" else d @ ka
            vb = kb @ d if side == "right" else d @ kb
            res = np.linalg.norm(va - vb) / (1.0 + np.linalg.norm(va))
            label = f"s={s:.6g}" + (f" d{j}" if len(pairs) > 1 else "")
            checks.append(_check(label, res, tol))
    return _report(checks)


def verify_moments(orig, red, gen, tol: float | None = None) -> VerificationReport:
    """Compare the moments of two systems under the same generator."""
    tol = default_tolerance() if tol is None else tol
    ma, _ = moments_finite(orig, gen)
    mb, _ = moments_finite(_as_explicit(red), gen)
    checks = []
    va, vb = ma.values, mb.values
    for i, (x, y) in enumerate(zip(va, vb)):
        res = np.linalg.norm(np.atleast_1d(x) - np.atleast_1d(y)) / (1.0 + np.linalg.norm(np.atleast_1d(x)))
        checks.append(_check(f"moment[{i}]", res, tol))
    return _report(checks)


def verify_markov_match(orig, red, count: int, tol: float | None = None) -> VerificationReport:
    """Compare the direct term and the first ``count`` Markov parameters.

    ``eta_k = C A^(k-1) B`` for ``k = 1..count``; a model with a polynomial
    part (both derivative flags set) fails the direct-term check.
    """
    tol = default_tolerance() if tol is None else tol
    ma = markov_parameters(orig, count + 1)
    if isinstance(red, DescriptorModel):
        poly, mb = expansion_at_infinity(red, count + 1)
    else:
        poly, mb = [], markov_parameters(red, count + 1)
    checks = []
    polyres = max((np.abs(c).max() for c in poly), default=0.0)
    checks.append(_check("direct", max(polyres, np.abs(ma[0] - mb[0]).max()), tol))
    for k in range(1, count + 1):
        res = np.abs(ma[k] - mb[k]).max() / (1.0 + np.abs(ma[k]).max())
        checks.append(_check(f"eta{k}", res, tol))
    return _report(checks)


# -- certificates ------------------------------------------------------------


def _model_matrices(model) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(model, DescriptorModel):
        return model.E, model.F, model.G, model.H
    lti = as_lti(model)
    return np.eye(lti.n), lti.A, lti.B, lti.C


def _rel(res: np.ndarray, *terms: np.ndarray) -> float:
    scale = 1.0 + max(np.linalg.norm(t) for t in terms)
    return float(np.linalg.norm(res)) / scale


def certificate_target(original, cert: MatchCertificate) -> np.ndarray:
    """Recompute a certificate's target moments from the original system."""
    lti = as_lti(original)
    d, k = cert.data, cert.kind
    if k == "finite_right":
        return moments_finite(lti, GeneratorRight(d["S"], d["L"]))[0].matrix
    if k == "finite_left":
        return moments_finite(lti, GeneratorLeft(d["Qc"], d["Rc"]))[0].matrix
    if k in ("markov_pi", "markov_pi_tilde"):
        X = solve_sylvester(SylvesterForm.MARKOV_RIGHT, lti.A, d["S"], lti.B @ d["L"])
        return lti.C @ X
    if k == "markov_pi_bar":
        return moments_markov(lti, GeneratorRight(d["S"], d["L"]), "pi_bar")[0].matrix
    variant = "upsilon_hat" if k == "markov_cond_2" else "upsilon"
    return moments_markov(lti, GeneratorLeft(d["Qc"], d["Rc"]), variant)[0].matrix


def verify_certificate(model, cert: MatchCertificate, gen=None, moments=None,
                       tol: float = EPS_CERT, original=None) -> VerificationReport:
    """Check the matching identities witnessed by a certificate.

    Parameters
    ----------
    model : PortHamiltonianSystem, LtiSystem or DescriptorModel
        The reduced model.
    cert : MatchCertificate
    gen : GeneratorRight or GeneratorLeft, optional
        Overrides the generator stored in the certificate.
    moments : MomentVector or ndarray, optional
        Overrides the stored target moments.
    tol : float
        Relative tolerance on each identity.
    original : system, optional
        When given, the stored target is also compared with moments
        recomputed from this system.

    Raises
    ------
    KindMismatch
        If the certificate kind does not fit the model or generator.
    """
    data = dict(cert.data)
    right = cert.side == "right"
    if gen is not None:
        if right != isinstance(gen, GeneratorRight):
            raise KindMismatch(f"certificate kind {cert.kind!r} needs a {'right' if right else 'left'} generator")
        if right:
            data["S"], data["L"] = gen.S, gen.L
        else:
            data["Qc"], data["Rc"] = gen.Qc, gen.Rc
    if moments is not None:
        data["target"] = getattr(moments, "matrix", np.asarray(moments))
    E, F, G, H = _model_matrices(model)
    P = np.asarray(cert.P)
    nu = F.shape[0]
    if P.shape != (nu, nu):
        raise KindMismatch(f"P is {P.shape} but the model has {nu} states")
    if right and not np.allclose(E, np.eye(nu)):
        raise KindMismatch(f"{cert.kind!r} applies to explicit models only")
    T = np.asarray(data["target"])
    checks = []
    k = cert.kind
    try:
        if k == "finite_right":
            S, L = data["S"], data["L"]
            checks.append(_check("F P + G L = P S", _rel(F @ P + G @ L - P @ S, F @ P, P @ S), tol))
            checks.append(_check("H P = C Pi", _rel(H @ P - T, T), tol))
        elif k == "finite_left":
            Qc, Rc = data["Qc"], data["Rc"]
            checks.append(_check("Qc P = P F + Rc H", _rel(Qc @ P - P @ F - Rc @ H, Qc @ P, P @ F), tol))
            checks.append(_check("P G = Ups B", _rel(P @ G - T, T), tol))
        elif k == "markov_pi":
            S, L = data["S"], data["L"]
            checks.append(_check("F P S + G L = P", _rel(F @ P @ S + G @ L - P, P), tol))
            checks.append(_check("H P S = C Pi S", _rel(H @ P @ S - T @ S, T @ S), tol))
        elif k == "markov_pi_bar":
            S, L = data["S"], data["L"]
            checks.append(_check("F P S + G L S = P", _rel(F @ P @ S + G @ L @ S - P, P), tol))
            checks.append(_check("H P = C Pi_bar", _rel(H @ P - T, T), tol))
        elif k == "markov_pi_tilde":
            S, L = data["S"], data["L"]
            checks.append(_check("F P S2 + G D = P", _rel(F @ P @ S + G @ L - P, P), tol))
            checks.append(_check("H P = C Pi_tilde", _rel(H @ P - T, T), tol))
        else:
            Qc, Rc = data["Qc"], data["Rc"]
            checks.append(_check("Qc P F + Rc H = P E", _rel(Qc @ P @ F + Rc @ H - P @ E, P @ E, Qc @ P @ F), tol))
            if k == "markov_cond_1":
                checks.append(_check("Qc P G = Qc Ups B", _rel(Qc @ P @ G - T, T), tol))
            elif k == "markov_cond_2":
                lhs = Qc @ (Qc @ P + Rc @ H) @ G
                checks.append(_check("Qc (Qc P + Rc H) G = target", _rel(lhs - T, T), tol))
            else:
                checks.append(_check("P G = Qc Ups B", _rel(P @ G - T, T), tol))
    except ValueError as exc:  # shape mismatch inside matmul
        raise KindMismatch(f"certificate data does not fit the model: {exc}") from exc
    if original is not None:
        ref = certificate_target(original, cert) if gen is None and moments is None else None
        if ref is not None:
            checks.append(_check("target = original moments", _rel(ref - T, ref), max(tol, 1e-8)))
    rank_ok = numerical_rank(P, 1e-12) == nu
    checks.append(Check("P invertible", 0.0 if rank_ok else 1.0, 0.0, rank_ok))
    return _report(checks)


# -- passivity ---------------------------------------------------------------


def passivity_data(sys: PortHamiltonianSystem, gen) -> dict:
    """Operands of the family passivity inequality for ``sys`` and ``gen``."""
    _, sol = moments_finite(sys, gen)
    if isinstance(gen, GeneratorRight):
        return {"side": "right", "S": gen.S, "L": gen.L, "Pi": sol.matrix, "Q": sys.Q, "B": sys.B}
    return {"side": "left", "Qc": gen.Qc, "Rc": gen.Rc, "Upsilon": sol.matrix, "B": sys.B}


def _herm(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def _psd_check(name: str, M: np.ndarray, note: str = "") -> Check:
    """``M <= 0`` via the largest eigenvalue of its Hermitian part."""
    H = _herm(M)
    top = float(np.linalg.eigvalsh(H).max()) if H.size else 0.0
    tol = EPS_INEQ * max(1.0, float(np.linalg.norm(H, 2)) if H.size else 1.0)
    return _check(name, max(top, 0.0), tol, note)


def _pd_checks(P: np.ndarray) -> list[Check]:
    sym = np.abs(P - P.conj().T).max(initial=0.0)
    scale = max(1.0, np.abs(P).max(initial=0.0))
    out = [_check("P symmetric", sym / scale, 1e-10)]
    ev = np.linalg.eigvalsh(_herm(P))
    lo = float(ev.min()) if ev.size else 1.0
    tol = EPS_INEQ * max(1.0, float(np.abs(ev).max(initial=0.0)))
    out.append(Check("P positive definite", max(-lo, 0.0), tol, lo > tol))
    return out


def passivity_check(target, P, *, form: str = "as_printed") -> VerificationReport:
    """Passivity certificate check by eigenvalues (no LMI solve).

    Parameters
    ----------
    target : LtiSystem, PortHamiltonianSystem or dict
        * a system: KYP conditions ``A^T P + P A <= 0``, ``P B = C^T``.
        * ``passivity_data(...)`` for right data: the family contains a
          passive member iff ``S^T P + P S <= Pi^T Q B L + L^T B^T Q Pi``.
        * ``passivity_data(...)`` for left data:
          ``P Qc^T + Qc P <= Rc B^T Ups^T - Ups B Rc^T``.
    P : (k, k) array_like
        Symmetric positive definite candidate.
    form : {'as_printed', 'symmetric'}
        Left data only.  ``'symmetric'`` uses ``+ Ups B Rc^T``, the form under
        which :func:`ph_from_certificate_left` yields ``R >= 0``.

    Returns
    -------
    VerificationReport
    """
    P = np.asarray(P)
    checks = _pd_checks(P)
    notes: list[str] = []
    if isinstance(target, dict):
        if target.get("side") == "right":
            S, L, Pi, Q, B = (np.asarray(target[k]) for k in ("S", "L", "Pi", "Q", "B"))
            X = Pi.conj().T @ Q @ B @ L
            M = S.conj().T @ P + P @ S - (X + X.conj().T)
            checks.append(_psd_check("S^T P + P S <= Pi^T Q B L + L^T B^T Q Pi", M))
        elif target.get("side") == "left":
            Qc, Rc, Ups, B = (np.asarray(target[k]) for k in ("Qc", "Rc", "Upsilon", "B"))
            Y = Ups @ B @ Rc.conj().T
            if form == "as_printed":
                rhs = Y.conj().T - Y
                notes.append("as-printed inequality")
            elif form == "symmetric":
                rhs = Y.conj().T + Y
            else:
                raise ValueError("form must be 'as_printed' or 'symmetric'")
            M = P @ Qc.conj().T + Qc @ P - rhs
            checks.append(_psd_check("P Qc^T + Qc P <= rhs", M, notes[0] if notes else ""))
        else:
            raise ValueError("passivity data needs side 'right' or 'left'")
    else:
        lti = as_lti(target)
        if P.shape != (lti.n, lti.n):
            raise DimensionError(f"P must be {lti.n}x{lti.n}")
        checks.append(_psd_check("A^T P + P A <= 0", lti.A.conj().T @ P + P @ lti.A))
        pb = P @ lti.B - lti.C.conj().T
        checks.append(_check("P B = C^T", _rel(pb, P @ lti.B, lti.C), 1e-10))
    return _report(checks, notes)


def _spd_or_raise(P: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if not all(_pd_checks(P)):
        raise CertificateInvalid("P must be symmetric positive definite")
    return 0.5 * (P + P.T)


def ph_from_certificate(S, L, Pi, Q, B, P, *, validate: bool = True) -> PortHamiltonianSystem:
    """Port-Hamiltonian realization of a right-family member from a storage matrix.

    With ``F = S - P^-1 Pi^T Q B L``::

        Jr = (F P^-1 - P^-1 F^T) / 2,  Rr = -(F P^-1 + P^-1 F^T) / 2,
        Qr = P,  Br = G = P^-1 Pi^T Q B

    so that ``(Jr - Rr) Qr = S - G L`` and ``Br^T Qr = B^T Q Pi``.

    Raises
    ------
    CertificateInvalid
        If ``P`` is not SPD, or (``validate=True``) the family passivity
        inequality fails so that ``Rr`` would not be PSD.
    """
    S, L, Pi, Q, B = (np.asarray(v, dtype=float) for v in (S, L, Pi, Q, B))
    P = _spd_or_raise(P)
    if validate:
        rep = passivity_check({"side": "right", "S": S, "L": L, "Pi": Pi, "Q": Q, "B": B}, P)
        if not rep:
            raise CertificateInvalid("P violates the family passivity inequality")
    nu = P.shape[0]
    Pinv = solve_linear(P, np.eye(nu))
    G = Pinv @ Pi.T @ Q @ B
    F = S - G @ L
    Jr = 0.5 * (F @ Pinv - Pinv @ F.T)
    Rr = -0.5 * (F @ Pinv + Pinv @ F.T)
    return PortHamiltonianSystem(0.5 * (Jr - Jr.T), 0.5 * (Rr + Rr.T), P, G)


def ph_from_certificate_left(Qc, Rc, Upsilon, B, P, *, validate: bool = True) -> PortHamiltonianSystem:
    """Port-Hamiltonian realization of a left-family member from a storage matrix.

    With ``H = B^T Ups^T P^-1`` and ``F = Qc - Rc H``::

        Jr = (F P - P F^T) / 2,  Rr = -(F P + P F^T) / 2,
        Qr = P^-1,  Br = Ups B

    so that ``(Jr - Rr) Qr = F`` and ``Br^T Qr = H``.  For
    ``P = Ups Q^-1 Ups^T`` this is the left structure-preserving reduction.

    Raises
    ------
    CertificateInvalid
        If ``P`` is not SPD, or (``validate=True``) the symmetric-form
        inequality fails.
    """
    Qc, Rc, Ups, B = (np.asarray(v, dtype=float) for v in (Qc, Rc, Upsilon, B))
    P = _spd_or_raise(P)
    if validate:
        rep = passivity_check({"side": "left", "Qc": Qc, "Rc": Rc, "Upsilon": Ups, "B": B}, P, form="symmetric")
        if not rep:
            raise CertificateInvalid("P violates the family passivity inequality")
    nu = P.shape[0]
    Pinv = solve_linear(P, np.eye(nu))
    H = B.T @ Ups.T @ Pinv
    F = Qc - Rc @ H
    Jr = 0.5 * (F @ P - P @ F.T)
    Rr = -0.5 * (F @ P + P @ F.T)
    Qr = 0.5 * (Pinv + Pinv.T)
    return PortHamiltonianSystem(0.5 * (Jr - Jr.T), 0.5 * (Rr + Rr.T), Qr, Ups @ B)


def check_ph_structure(sys, Q=None, *, tol: float = 1e-10) -> VerificationReport:
    """Check port-Hamiltonian structure.

    For a :class:`PortHamiltonianSystem` the skew/symmetry and definiteness
    properties are checked.  For an :class:`LtiSystem` a candidate energy
    matrix ``Q`` is required; the realization is port-Hamiltonian with that
    ``Q`` iff ``A Q^-1`` has negative semidefinite symmetric part, ``Q`` is
    SPD and ``C = B^T Q``.
    """
    if isinstance(sys, PortHamiltonianSystem):
        J, R, Qm = sys.J, sys.R, sys.Q
        checks = [
            _check("J skew", np.abs(J + J.T).max(initial=0.0) / max(1.0, np.abs(J).max(initial=0.0)), tol),
            _check("R symmetric", np.abs(R - R.T).max(initial=0.0) / max(1.0, np.abs(R).max(initial=0.0)), tol),
            _check("Q symmetric", np.abs(Qm - Qm.T).max(initial=0.0) / max(1.0, np.abs(Qm).max(initial=0.0)), tol),
        ]
        evr = np.linalg.eigvalsh(0.5 * (R + R.T))
        scale_r = max(1.0, np.abs(evr).max(initial=0.0))
        checks.append(_check("R positive semidefinite", max(-evr.min(initial=0.0), 0.0), tol * scale_r))
        evq = np.linalg.eigvalsh(0.5 * (Qm + Qm.T))
        scale_q = max(1.0, np.abs(evq).max(initial=0.0))
        lo = evq.min(initial=np.inf)
        checks.append(Check("Q positive definite", max(-lo, 0.0), tol * scale_q, bool(lo > tol * scale_q)))
        return _report(checks)
    lti = as_lti(sys)
    if Q is None:
        raise ValueError("an energy matrix Q is required for a general state-space system")
    Q = np.asarray(Q, dtype=float)
    try:
        Qi = solve_linear(Q, np.eye(lti.n))
    except SingularMatrix as exc:
        raise CertificateInvalid("Q is singular") from exc
    M = lti.A @ Qi
    checks = _pd_checks(Q)
    checks.append(_psd_check("sym(A Q^-1) <= 0", M))
    checks.append(_check("C = B^T Q", _rel(lti.C - lti.B.T @ Q, lti.C), tol))
    return _report(checks)
