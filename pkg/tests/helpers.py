"""Shared builders and independent reference computations for the tests."""

from __future__ import annotations

import numpy as np

from phmm import GeneratorLeft, GeneratorRight, LtiSystem, PortHamiltonianSystem

SAMPLES = np.array([0.3, 1.0, 2.5, 7.0, 0.5j, 1 + 2j, -0.2 + 3j, 4 - 1j])


def resolvent_transfer(A, B, C, s):
    """``C (sI - A)^-1 B`` by a plain dense solve."""
    return C @ np.linalg.solve(s * np.eye(A.shape[0]) - A, B)


def rational(num, den):
    """Transfer function from coefficient lists (highest power first)."""
    return lambda s: np.polyval(num, s) / np.polyval(den, s)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / max(1.0, np.abs(b).max()))


def random_ph(rng, n, m=1, *, dissipation=0.3):
    """Random strictly dissipative port-Hamiltonian system (stable)."""
    X = rng.standard_normal((n, n))
    J = X - X.T
    Y = rng.standard_normal((n, n))
    R = Y @ Y.T / n + dissipation * np.eye(n)
    Z = rng.standard_normal((n, n))
    Q = Z @ Z.T / n + 0.5 * np.eye(n)
    B = rng.standard_normal((n, m))
    return PortHamiltonianSystem(J, R, Q, B, r_psd=True, q_pd=True)


def random_stable(rng, n, m=1, p=1):
    A = rng.standard_normal((n, n))
    A -= (np.abs(np.linalg.eigvals(A)).max() + 0.5) * np.eye(n)
    return LtiSystem(A, rng.standard_normal((n, m)), rng.standard_normal((p, n)))


def random_points(rng, nu):
    """Real positive points (mirror side of a stable plant), well separated."""
    return np.sort(rng.uniform(0.2, 3.0, nu)) + 0.05 * np.arange(nu)


def random_right(rng, nu, m=1):
    S = np.diag(random_points(rng, nu))
    return GeneratorRight(S, rng.standard_normal((m, nu)) + 0.5)


def random_left(rng, nu, p=1):
    Qc = np.diag(random_points(rng, nu))
    return GeneratorLeft(Qc, rng.standard_normal((nu, p)) + 0.5)
