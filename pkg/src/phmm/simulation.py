"""Time-domain interconnections with signal generators.

Every interconnection here is a linear autonomous system ``z' = M z`` (a
constant input is carried by an extra state fixed at one), integrated with
classical fixed-step RK4.  For such systems one RK4 step is the matrix
polynomial ``sum_{k<=4} (h M)^k / k!``, which is what is applied.  The exact
flow ``expm(h M)`` is propagated alongside as a reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateStep, FlagsMissing, InvariantError, UnstablePlant
from .linalg import SylvesterForm, solve_linear, solve_sylvester, spectrum
from .systems import DescriptorModel, GeneratorLeft, GeneratorRight, PortHamiltonianSystem, as_lti

__all__ = [
    "SimResult",
    "rk4_step_matrix",
    "simulate_right",
    "simulate_left",
    "sinusoid_phasor",
    "energy_audit",
]

RK4_BOUND = 2.8
TAIL_FRACTION = 0.2
TRANSIENT_BOUND = 1e-6
EPS_AXIS = 1e-8


@dataclass(frozen=True, eq=False)
class SimResult:
    """Sampled trajectories of an interconnection.

    Attributes
    ----------
    t : (N+1,) ndarray
        Uniform grid.
    x : (N+1, n) ndarray
        Plant state.
    y : (N+1, k) ndarray
        Observed output (``y`` for right interconnections, ``d`` or ``d_hat``
        for left ones).
    predicted : (N+1, k) ndarray
        Moment-predicted signal.
    reference : (N+1, k) ndarray
        Output of the exact flow (matrix exponential) from the same initial
        state, used for integrator error checks.
    tail_residual : float
        ``max ||y - predicted||`` over the last 20% of the grid.
    tail_scale : float
        ``1 + max ||predicted||`` over the same window.
    transient_ok : bool
        Whether ``exp(alpha * 0.8 * horizon) <= 1e-6`` with ``alpha`` the
        slowest plant decay rate.
    output_name : str
    notes : tuple of str
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    predicted: np.ndarray
    reference: np.ndarray = field(repr=False)
    tail_residual: float
    tail_scale: float
    transient_ok: bool
    output_name: str = "y"
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.t.size < 2:
            raise InvariantError("a simulation grid needs at least two samples")
        if not np.isfinite(self.tail_residual):
            raise InvariantError("tail residual is not finite")

    @property
    def relative_tail_residual(self) -> float:
        return self.tail_residual / self.tail_scale

    @property
    def integration_error(self) -> float:
        """``max ||y - reference||`` over the whole grid."""
        return float(np.abs(self.y - self.reference).max())

    def to_csv(self) -> str:
        """CSV text with columns ``t, x1..xn, y1..yp, pred1..predp``."""
        n, k = self.x.shape[1], self.y.shape[1]
        head = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(k)] \
            + [f"pred{i + 1}" for i in range(k)]
        data = np.column_stack([self.t, self.x, self.y, self.predicted])
        rows = [",".join(head)]
        rows += [",".join(format(v, ".17g") for v in row) for row in data]
        return "\n".join(rows) + "\n"


def rk4_step_matrix(M: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for ``z' = M z`` as a matrix."""
    hM = h * np.asarray(M)
    out = np.eye(hM.shape[0], dtype=hM.dtype)
    term = out.copy()
    for k in range(1, 5):
        term = term @ hM / k
        out = out + term
    return out


def _grid(horizon: float, dt: float) -> np.ndarray:
    if not (dt > 0 and horizon > 0):
        raise ValueError("horizon and dt must be positive")
    steps = int(round(horizon / dt))
    if steps < 1:
        raise ValueError("horizon must cover at least one step")
    return np.arange(steps + 1) * dt


def _check_step(M: np.ndarray, dt: float) -> None:
    lam = np.abs(spectrum(M)).max(initial=0.0)
    if lam > 0 and dt >= RK4_BOUND / lam:
        raise DegenerateStep(f"dt = {dt} exceeds the RK4 stability bound {RK4_BOUND / lam:.6g}")


def _stable(A: np.ndarray, what: str = "plant") -> float:
    ev = spectrum(A)
    alpha = float(ev.real.max())
    if alpha >= 0:
        raise UnstablePlant(f"{what} has an eigenvalue with real part {alpha:.6g} >= 0")
    return alpha


def _on_axis(M: np.ndarray, name: str) -> None:
    ev = spectrum(M)
    if ev.size and np.abs(ev.real).max() > EPS_AXIS * max(1.0, np.abs(ev).max()):
        raise InvariantError(f"{name} must have its spectrum on the imaginary axis")


def _propagate(M: np.ndarray, z0: np.ndarray, dt: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """RK4 and exact trajectories, shape ``(steps+1, dim)``."""
    P = rk4_step_matrix(M, dt)
    E = expm(dt * M)
    num, ref = np.empty((steps + 1, z0.size)), np.empty((steps + 1, z0.size))
    num[0] = ref[0] = z0
    for k in range(steps):
        num[k + 1] = P @ num[k]
        ref[k + 1] = E @ ref[k]
    return num, ref


def _tail(y: np.ndarray, pred: np.ndarray) -> tuple[float, float]:
    start = int(np.floor((1.0 - TAIL_FRACTION) * (y.shape[0] - 1)))
    diff = np.linalg.norm(y[start:] - pred[start:], axis=1).max()
    scale = 1.0 + np.linalg.norm(pred[start:], axis=1).max()
    return float(diff), float(scale)


def _plant(sys):
    if isinstance(sys, DescriptorModel):
        return sys.to_lti()
    return as_lti(sys)


def simulate_right(sys, gen: GeneratorRight, w0: Sequence[float], horizon: float, dt: float,
                   form: Literal["standard", "descriptor_i", "descriptor_ii"] = "standard") -> SimResult:
    """Drive a plant with ``u = L w``, ``w' = S w`` and compare with moments.

    Parameters
    ----------
    sys : LtiSystem, PortHamiltonianSystem or DescriptorModel
        Descriptor models must have invertible ``E`` and no derivative flags.
    gen : GeneratorRight
        ``S`` must have its spectrum on the imaginary axis.
    w0 : array_like
        Generator initial state.  The plant starts at rest.
    horizon, dt : float
    form : {'standard', 'descriptor_i', 'descriptor_ii'}
        ``standard``: ``x' = A x + B u``, ``y = C x``; prediction ``C Pi w``.

        ``descriptor_i``: ``A x' = x - B u``, ``y = C x'``; prediction
        ``C Pi S w`` with ``A Pi S + B L = Pi``.

        ``descriptor_ii``: ``A x' = x - B u'`` with ``u' = L S w``, ``y = C x``;
        prediction ``C Pi_bar w`` with ``A Pi_bar S + B L S = Pi_bar``.

    Returns
    -------
    SimResult

    Raises
    ------
    UnstablePlant, DegenerateStep, InvariantError
    """
    lti = _plant(sys)
    A, B, C = lti.A, lti.B, lti.C
    S, L = gen.S, gen.L
    if np.iscomplexobj(S):
        raise InvariantError("simulation needs a real generator; realify it first")
    _on_axis(S, "S")
    w0 = np.asarray(w0, dtype=float).ravel()
    if w0.size != gen.nu:
        raise ValueError(f"w0 must have length {gen.nu}")
    n, nu = lti.n, gen.nu
    if form == "standard":
        Ax, Bw = A, B @ L
        Cx, Cw = C, np.zeros((lti.p, nu))
        Pi = solve_sylvester(SylvesterForm.FINITE_RIGHT, A, S, B @ L)
        Phi = C @ Pi
    elif form in ("descriptor_i", "descriptor_ii"):
        Ai = solve_linear(A, np.eye(n))
        Ax = Ai
        if form == "descriptor_i":
            Bw = -Ai @ B @ L
            Cx, Cw = C @ Ai, -C @ Ai @ B @ L
            Pi = solve_sylvester(SylvesterForm.MARKOV_RIGHT, A, S, B @ L)
            Phi = C @ Pi @ S
        else:
            Bw = -Ai @ B @ L @ S
            Cx, Cw = C, np.zeros((lti.p, nu))
            Pi = solve_sylvester(SylvesterForm.MARKOV_RIGHT_SHIFTED, A, S, B @ L)
            Phi = C @ Pi
    else:
        raise ValueError(f"unknown form {form!r}")
    alpha = _stable(Ax)
    M = np.block([[Ax, Bw], [np.zeros((nu, n)), S]])
    _check_step(M, dt)
    t = _grid(horizon, dt)
    z0 = np.concatenate([np.zeros(n), w0])
    num, ref = _propagate(M, z0, dt, t.size - 1)
    Cz = np.hstack([Cx, Cw])
    y, yref = num @ Cz.T, ref @ Cz.T
    Ew = expm(dt * S)
    w = np.empty((t.size, nu))
    w[0] = w0
    for k in range(t.size - 1):
        w[k + 1] = Ew @ w[k]
    pred = w @ Phi.T
    res, scale = _tail(y, pred)
    ok = bool(np.exp(alpha * (1.0 - TAIL_FRACTION) * horizon) <= TRANSIENT_BOUND)
    return SimResult(t, num[:, :n], y, pred, yref, res, scale, ok, "y")


def _step_integral(Qc: np.ndarray, b: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``int_0^t expm(Qc s) b ds`` at each grid time."""
    nu = Qc.shape[0]
    aug = np.zeros((nu + 1, nu + 1))
    aug[:nu, :nu], aug[:nu, nu] = Qc, b
    e1 = np.zeros(nu + 1)
    e1[nu] = 1.0
    return np.array([(expm(aug * tk) @ e1)[:nu] for tk in t])


def _free_response(Qc: np.ndarray, d0: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.array([expm(Qc * tk) @ d0 for tk in t])


def simulate_left(sys, gen: GeneratorLeft, input_kind: Literal["impulse", "step"], horizon: float,
                  dt: float, form: Literal["finite", "markov", "markov_hat"] = "finite") -> SimResult:
    """Feed the plant output into ``w' = Qc w + Rc y`` and observe ``d``.

    The plant and generator start at rest.  A unit impulse is realized as a
    state jump at ``t = 0+``.

    Parameters
    ----------
    sys : LtiSystem or PortHamiltonianSystem
        Single-input.
    gen : GeneratorLeft
        ``Qc`` must have its spectrum on the imaginary axis.
    input_kind : {'impulse', 'step'}
    horizon, dt : float
    form : {'finite', 'markov', 'markov_hat'}
        ``finite``: ``x' = A x + B u``, ``d = w + Ups x`` with
        ``Qc Ups = Ups A + Rc C``; then ``d' = Qc d + Ups B u``.

        ``markov``: ``A x' = x - B u``, ``y = C x'``, ``d = w - Ups x`` with
        ``Ups = Qc Ups A + Rc C``; then ``d' = Qc d + Qc Ups B u``.

        ``markov_hat``: ``A x' = x - B u'``, ``y = C x``,
        ``d = Qc (w - Ups x)`` with ``Ups = Qc Ups A + Rc C A``; then
        ``d' = Qc d + Qc (Qc Ups + Rc C) B u'``.  Only the step input is
        supported (its derivative is an impulse).

    Returns
    -------
    SimResult
        ``predicted`` is the closed-form solution of the ``d`` equation.
    """
    lti = as_lti(sys)
    if lti.m != 1:
        raise ValueError("simulate_left needs a single-input plant")
    if input_kind not in ("impulse", "step"):
        raise ValueError("input_kind must be 'impulse' or 'step'")
    A, B, C = lti.A, lti.B[:, 0], lti.C
    Qc, Rc = gen.Qc, gen.Rc
    if np.iscomplexobj(Qc):
        raise InvariantError("simulation needs a real generator; realify it first")
    _on_axis(Qc, "Qc")
    n, nu = lti.n, gen.nu
    notes: list[str] = []
    if form == "finite":
        Ups = solve_sylvester(SylvesterForm.FINITE_LEFT, A, Qc, Rc @ C)
        Ax, bu = A, B
        Cy, dy = C, np.zeros(lti.p)
        Dx, Dw = Ups, np.eye(nu)
        drive = Ups @ B
        notes.append("d = w + Ups x")
    elif form in ("markov", "markov_hat"):
        Ai = solve_linear(A, np.eye(n))
        Ax = Ai
        if form == "markov":
            Ups = solve_sylvester(SylvesterForm.MARKOV_LEFT, A, Qc, Rc @ C)
            bu = -Ai @ B
            Cy, dy = C @ Ai, -C @ Ai @ B
            Dx, Dw = -Ups, np.eye(nu)
            drive = Qc @ Ups @ B
            notes.append("d = w - Ups x")
        else:
            if input_kind != "step":
                raise ValueError("the markov_hat form is driven through u'; use a step input")
            Ups = solve_sylvester(SylvesterForm.MARKOV_LEFT_SHIFTED, A, Qc, Rc @ C)
            bu = -Ai @ B  # multiplies u', which is an impulse for a step input
            Cy, dy = C, np.zeros(lti.p)
            Dx, Dw = -Qc @ Ups, Qc
            drive = Qc @ (Qc @ Ups + Rc @ C) @ B
            notes.append("d_hat = Qc (w - Ups x)")
    else:
        raise ValueError(f"unknown form {form!r}")
    alpha = _stable(Ax)
    # state z = [x, w, 1]; the last entry carries a constant input
    dim = n + nu + 1
    M = np.zeros((dim, dim))
    M[:n, :n] = Ax
    M[n:n + nu, :n] = Rc @ Cy
    M[n:n + nu, n:n + nu] = Qc
    impulsive = input_kind == "impulse" or form == "markov_hat"
    if not impulsive:
        M[:n, -1] = bu
        M[n:n + nu, -1] = Rc @ dy
    _check_step(M[:-1, :-1], dt)
    t = _grid(horizon, dt)
    z0 = np.zeros(dim)
    z0[-1] = 1.0
    if impulsive:
        # unit impulse through bu (and through the feedthrough dy into w)
        z0[:n] = bu
        z0[n:n + nu] = Rc @ dy
    num, ref = _propagate(M, z0, dt, t.size - 1)
    Dz = np.hstack([Dx, Dw, np.zeros((nu, 1))])
    d, dref = num @ Dz.T, ref @ Dz.T
    pred = _free_response(Qc, drive, t) if impulsive else _step_integral(Qc, drive, t)
    res, scale = _tail(d, pred)
    ok = bool(np.exp(alpha * (1.0 - TAIL_FRACTION) * horizon) <= TRANSIENT_BOUND)
    name = "d_hat" if form == "markov_hat" else "d"
    return SimResult(t, num[:, :n], d, pred, dref, res, scale, ok, name, tuple(notes))


def sinusoid_phasor(t: np.ndarray, y: np.ndarray, freq: float, tail: float = TAIL_FRACTION) -> np.ndarray:
    """Least-squares phasor of a sinusoidal tail.

    Fits ``y ~ Re(c) sin(freq t) + Im(c) cos(freq t) + offset`` on the last
    ``tail`` fraction of the samples, so ``y = Im(c exp(i freq t))``.  For the
    input ``sin(freq t)`` the steady-state output phasor equals ``K(i freq)``.

    Returns
    -------
    ndarray of complex
        One phasor per output column.
    """
    t = np.asarray(t)
    y = np.asarray(y).reshape(t.size, -1)
    start = int(np.floor((1.0 - tail) * (t.size - 1)))
    tt = t[start:]
    basis = np.column_stack([np.sin(freq * tt), np.cos(freq * tt), np.ones_like(tt)])
    coef, *_ = np.linalg.lstsq(basis, y[start:], rcond=None)
    return coef[0] + 1j * coef[1]


def energy_audit(sys: PortHamiltonianSystem, u: Callable[[float], np.ndarray] | Sequence[float],
                 x0: Sequence[float], horizon: float, dt: float) -> float:
    """Largest violation of the dissipation inequality along an RK4 run.

    For each step the stored-energy increment ``H(x_{k+1}) - H(x_k)`` with
    ``H(x) = x^T Q x / 2`` is compared with the supplied energy
    ``int u^T y``, evaluated by Simpson's rule using a cubic Hermite estimate
    of the midpoint state.

    Parameters
    ----------
    sys : PortHamiltonianSystem
        Must carry both the ``r_psd`` and ``q_pd`` flags.
    u : callable or array_like
        ``u(t)`` returning an ``m``-vector, or a constant input.
    x0 : array_like
    horizon, dt : float

    Returns
    -------
    float
        ``max(0, max_k (dH_k - supply_k))``.

    Raises
    ------
    FlagsMissing
    """
    if not (sys.r_psd and sys.q_pd):
        raise FlagsMissing("energy_audit needs R >= 0 and Q > 0 flags on the system")
    A, B, C, Q = sys.A, sys.B, sys.C, sys.Q
    if callable(u):
        uf = lambda s: np.asarray(u(s), dtype=float).reshape(sys.m)  # noqa: E731
    else:
        uc = np.asarray(u, dtype=float).reshape(sys.m)
        uf = lambda s: uc  # noqa: E731
    x = np.asarray(x0, dtype=float).reshape(sys.n)
    lam = np.abs(spectrum(A)).max(initial=0.0)
    if lam > 0 and dt >= RK4_BOUND / lam:
        raise DegenerateStep(f"dt = {dt} exceeds the RK4 stability bound {RK4_BOUND / lam:.6g}")
    f = lambda s, z: A @ z + B @ uf(s)  # noqa: E731
    t = _grid(horizon, dt)
    worst = 0.0
    for k in range(t.size - 1):
        s = t[k]
        u0, um, u1 = uf(s), uf(s + dt / 2), uf(s + dt)
        k1 = A @ x + B @ u0
        k2 = A @ (x + dt / 2 * k1) + B @ um
        k3 = A @ (x + dt / 2 * k2) + B @ um
        k4 = A @ (x + dt * k3) + B @ u1
        xn = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xm = 0.5 * (x + xn) + dt / 8 * (k1 - f(s + dt, xn))
        supply = dt / 6 * (u0 @ (C @ x) + 4 * um @ (C @ xm) + u1 @ (C @ xn))
        dH = 0.5 * (xn @ Q @ xn - x @ Q @ x)
        worst = max(worst, dH - supply)
        x = xn
    return float(worst)
