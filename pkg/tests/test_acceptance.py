"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines are collected into the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from helpers import SAMPLES, random_ph, random_stable, rational  # noqa: E402
from phmm import (  # noqa: E402
    CertificateInvalid,
    GeneratorLeft,
    GeneratorRight,
    SpectrumClash,
    SylvesterForm,
    basis_equivalence,
    check_ph_structure,
    energy_audit,
    family_left,
    family_right,
    krylov_basis,
    ladder_system,
    markov_parameters,
    moments_finite,
    passivity_check,
    passivity_data,
    reduce_descriptor_markov,
    reduce_ph_finite,
    reduce_ph_krylov,
    reduce_ph_markov,
    simulate_right,
    sinusoid_phasor,
    smib_system,
    solve_sylvester,
    transfer_eval,
    verify_certificate,
)

RESULTS: list[str] = []

SMIB_S = np.diag([0.055, 0.01, 1.667, 0.0021])
SMIB_L = np.array([[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 1]], dtype=float)
SMIB_SGL = np.array([
    [-1.6667, -0.0048, -0.0004, -1.7220],
    [0.0, -0.0081, -0.0002, -0.0002],
    [0.0, -0.4825, -0.0875, -1.7545],
    [0.0, 0.0047, 0.0004, 0.0025],
])
SMIB_G = np.array([
    [1.7217, 0.0048, 0.0004],
    [0.0, 0.0181, 0.0002],
    [0.0, 0.4825, 1.7545],
    [0.0, -0.0047, -0.0004],
])


def line(cid: str, ok: bool | None, detail: str) -> tuple[str, bool | None, str]:
    tag = "INFO" if ok is None else ("PASS" if ok else "FAIL")
    return cid, ok, f"{tag} [{cid}] {detail}"


def tf_err(model, num, den):
    ref = rational(num, den)
    got = np.array([transfer_eval(model, s)[0, 0] for s in SAMPLES])
    want = np.array([ref(s) for s in SAMPLES])
    return float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want))))


def ladder2():
    return ladder_system(q=(1, 1, 2, 1))


# -- criteria ---------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    mv, _ = moments_finite(ladder_system(), GeneratorRight.jordan(0, 2, L=[[1, 0]]))
    dt = time.perf_counter() - t0
    vals = np.real_if_close(np.asarray(mv.matrix).ravel())
    err = float(np.abs(vals - [3, -11]).max())
    return [
        line("1", err <= 1e-10, f"ladder moments {vals.tolist()} vs [3, -11], error {err:.2e}"),
        line("1-runtime", dt < 1.0, f"moments_finite took {dt:.3f} s (< 1 s)"),
    ]


def criterion_2():
    m = reduce_ph_finite(ladder2(), GeneratorRight.jordan(0, 2, L=[[1, 0]])).model
    parts = {
        "J": (m.J, np.array([[0, 2], [-2, 0]])),
        "R": (m.R, np.array([[3, -11], [-11, 41]])),
        "Q": (m.Q, np.array([[261, 82], [82, 26]]) / 31),
        "B": (m.B, np.array([[3], [-9]])),
    }
    err = max(float(np.abs(a - b).max()) for a, b in parts.values())
    tf = tf_err(m, [27, 36], [31, 45, 12])
    return [
        line("2-matrices", err <= 1e-8, f"reduced (J, R, Q, B) max entry error {err:.2e}"),
        line("2-transfer", tf <= 1e-8, f"transfer vs 9(3s+4)/(31s^2+45s+12), rel error {tf:.2e}"),
    ]


def criterion_3():
    sys2 = ladder2()
    red = reduce_ph_markov(sys2, GeneratorRight.jordan(0, 3), "pi_tilde").model
    tf1 = tf_err(red, [1, 1], [1, 1, 1])
    ref = np.array([complex(x.item()) for x in markov_parameters(sys2, 4)[1:]])
    got = np.array([complex(x.item()) for x in markov_parameters(red, 4)[1:]])
    e_ref = float(np.abs(ref - [1, 0, -1]).max())
    e_got = float(np.abs(got - ref).max())
    pi = reduce_ph_markov(sys2, GeneratorRight.jordan(0, 3), "pi").model
    tf2 = tf_err(pi, [1, 1, 2], [1, 1, 3, 0])
    return [
        line("3-pi_tilde-transfer", red.n == 2 and tf1 <= 1e-8,
             f"order {red.n}, transfer vs (s+1)/(s^2+s+1), rel error {tf1:.2e}"),
        line("3-pi_tilde-markov", max(e_ref, e_got) <= 1e-10,
             f"Markov parameters {got.real.round(12).tolist()} vs original (1, 0, -1), "
             f"errors {e_got:.2e} / {e_ref:.2e}"),
        line("3-pi", tf2 <= 1e-8, f"pi family transfer vs (s^2+s+2)/(s(s^2+s+3)), rel error {tf2:.2e}"),
    ]


def criterion_4():
    sys2 = ladder2()
    left = reduce_ph_finite(sys2, GeneratorLeft.jordan(0, 2)).model
    tf_a = tf_err(left, [27, 18], [32, 27, 6])
    tf_alt = tf_err(left, [27, 36], [31, 45, 12])
    hat = reduce_ph_markov(sys2, GeneratorLeft.jordan(0, 2), "upsilon_hat").model
    tf_b = tf_err(hat, [1, 1], [1, 1, 3])
    return [
        line("4-finite", tf_a <= 1e-8,
             f"left finite transfer vs 9(3s+2)/(32s^2+27s+6), rel error {tf_a:.2e} "
             f"(computed model equals 9(3s+4)/(31s^2+45s+12) to {tf_alt:.1e})"),
        line("4-upsilon_hat", tf_b <= 1e-8, f"Markov hat-path transfer vs (s+1)/(s^2+s+3), rel error {tf_b:.2e}"),
    ]


def criterion_5():
    t0 = time.perf_counter()
    sys5 = smib_system()
    gen = GeneratorRight(SMIB_S, SMIB_L)
    red = reduce_ph_finite(sys5, gen)
    tang = max(
        float(np.linalg.norm((transfer_eval(sys5, s) - transfer_eval(red.model, s)) @ l))
        for s, l in zip(np.diag(SMIB_S), SMIB_L.T)
    )
    structure = check_ph_structure(red.model)
    d = passivity_data(sys5, gen)
    passive = passivity_check(d, d["Pi"].T @ sys5.Q @ d["Pi"])
    dt = time.perf_counter() - t0
    G = red.gain
    table = max(float(np.abs(SMIB_S - G @ SMIB_L - SMIB_SGL).max()), float(np.abs(G - SMIB_G).max()))
    return [
        line("5-tangential", tang <= 1e-6, f"max tangential residual {tang:.2e} at the four points"),
        line("5-structure", structure.passed, "reduced model J skew, R >= 0, Q > 0"),
        line("5-passivity", passive.passed, f"family inequality with P = Pi^T Q Pi, margin {passive.max_residual:.1e}"),
        line("5-runtime", dt < 5.0, f"SMIB reduction and checks took {dt:.3f} s (< 5 s)"),
        line("5-table", None, f"reference (S-GL, G) tables: max entry difference {table:.3e} "
                              f"(tolerance 1e-3, informational)"),
    ]


def criterion_6():
    rng = np.random.default_rng(2024)
    # (a) gain invariance
    worst_a = 0.0
    for k in range(20):
        n, nu = int(rng.integers(4, 13)), int(rng.integers(1, 5))
        sys6 = random_stable(rng, n)
        pts = np.sort(rng.uniform(0.2, 4.0, nu)) + 0.3 * np.arange(nu)
        if k % 2:
            gen = GeneratorLeft(np.diag(pts), np.ones((nu, 1)))
            fam, shape = family_left(sys6, gen), (1, nu)
        else:
            gen = GeneratorRight(np.diag(pts), np.ones((1, nu)))
            fam, shape = family_right(sys6, gen), (nu, 1)
        ref = moments_finite(sys6, gen)[0].matrix
        done = 0
        while done < 10:
            try:
                member = fam.member(rng.standard_normal(shape))
            except SpectrumClash:
                continue
            got = moments_finite(member, gen)[0].matrix
            worst_a = max(worst_a, float(np.abs(got - ref).max() / (1 + np.abs(ref).max())))
            done += 1
    # (b) Kronecker oracle
    worst_b = 0.0
    for form in SylvesterForm:
        A = random_stable(rng, 5).A
        M = np.diag([0.1, 0.2, 0.3]) if form.is_markov else np.diag([0.5, 1.5, 2.5])
        M = M + 0.2 * np.triu(rng.standard_normal((3, 3)), 1)
        C = rng.standard_normal((5, 3) if form.is_right else (3, 5))
        X = solve_sylvester(form, A, M, C)
        n, nu = 5, 3
        if form is SylvesterForm.FINITE_RIGHT:
            K, rhs = np.kron(np.eye(nu), A) - np.kron(M.T, np.eye(n)), -C
        elif form is SylvesterForm.FINITE_LEFT:
            K, rhs = np.kron(np.eye(n), M) - np.kron(A.T, np.eye(nu)), C
        elif form.is_right:
            K = np.eye(n * nu) - np.kron(M.T, A)
            rhs = C @ M if form is SylvesterForm.MARKOV_RIGHT_SHIFTED else C
        else:
            K = np.eye(n * nu) - np.kron(A.T, M)
            rhs = C @ A if form is SylvesterForm.MARKOV_LEFT_SHIFTED else C
        ref = np.linalg.solve(K, rhs.reshape(-1, order="F")).reshape(rhs.shape, order="F")
        worst_b = max(worst_b, float(np.abs(X - ref).max() / (1 + np.abs(ref).max())))
    # (c) structure preservation
    ok_c = True
    for k in range(50):
        sys6 = random_ph(rng, int(rng.integers(3, 11)))
        nu = int(rng.integers(1, min(sys6.n, 4) + 1))
        pts = np.sort(rng.uniform(0.2, 4.0, nu)) + 0.3 * np.arange(nu)
        builders = [
            lambda: reduce_ph_finite(sys6, GeneratorRight(np.diag(pts), np.ones((1, nu)))),
            lambda: reduce_ph_finite(sys6, GeneratorLeft(np.diag(pts), np.ones((nu, 1)))),
            lambda: reduce_ph_krylov(sys6, pts),
            lambda: reduce_ph_markov(sys6, GeneratorRight.jordan(0, nu), "pi"),
            lambda: reduce_ph_markov(sys6, GeneratorLeft.jordan(0, nu), "upsilon"),
        ]
        ok_c &= check_ph_structure(builders[k % 5]().model).passed
    # (d) basis equivalence
    worst_d = 0.0
    ok_d = True
    for _ in range(20):
        sys6 = random_stable(rng, int(rng.integers(4, 11)))
        nu = int(rng.integers(1, 5))
        pts = np.sort(rng.uniform(0.2, 4.0, nu)) + 0.3 * np.arange(nu)
        V = krylov_basis(sys6, pts).V
        T = rng.standard_normal((nu, nu)) + 3 * np.eye(nu)
        gen = GeneratorRight(np.linalg.solve(T, np.diag(pts) @ T), np.ones((1, nu)) @ T)
        Pi = moments_finite(sys6, gen)[1].matrix
        eq = basis_equivalence(Pi, V)
        ok_d &= eq.equivalent
        worst_d = max(worst_d, eq.residual / max(1.0, float(np.linalg.norm(Pi))))
    # (e) certificates on every construction
    ok_e, count_e, declined = True, 0, 0
    for _ in range(5):
        sys6 = random_ph(rng, int(rng.integers(5, 9)))
        pts = np.array([0.4, 1.3, 2.7])
        reds = [
            reduce_ph_finite(sys6, GeneratorRight(np.diag(pts), np.ones((1, 3)))),
            reduce_ph_finite(sys6, GeneratorLeft(np.diag(pts), np.ones((3, 1)))),
            reduce_ph_markov(sys6, GeneratorRight.jordan(0, 3), "pi"),
            reduce_ph_markov(sys6, GeneratorRight.jordan(0, 3), "pi_tilde"),
            reduce_ph_markov(sys6, GeneratorRight.diagonal([0.1, 0.2]), "pi_bar"),
            reduce_ph_markov(sys6, GeneratorLeft.jordan(0, 3), "upsilon"),
            reduce_ph_krylov(sys6, pts),
        ] + [reduce_descriptor_markov(sys6, GeneratorLeft.jordan(0, 3), v, rng.standard_normal((1, 3)))
             for v in (1, 2, 3, 4)]
        try:
            reds.append(reduce_ph_markov(sys6, GeneratorLeft.jordan(0, 3), "upsilon_hat"))
        except CertificateInvalid:
            declined += 1  # no input scaling meets the shifted identity for this system
        for red in reds:
            ok_e &= verify_certificate(red.model, red.certificate, original=sys6).passed
            count_e += 1
    return [
        line("6a", worst_a <= 1e-8, f"gain invariance over 20 systems x 10 gains, worst residual {worst_a:.2e}"),
        line("6b", worst_b <= 1e-10, f"six Sylvester forms vs Kronecker oracle, worst residual {worst_b:.2e}"),
        line("6c", ok_c, "structure preserved on 50 random port-Hamiltonian systems"),
        line("6d", ok_d and worst_d <= 1e-8, f"basis equivalence on 20 cases, worst residual {worst_d:.2e}"),
        line("6e", ok_e, f"{count_e} constructed reductions carry valid certificates "
                         f"({declined} hat-path constructions declined)"),
    ]


def criterion_7():
    sys7 = ladder_system()
    const = simulate_right(sys7, GeneratorRight(np.zeros((1, 1)), np.ones((1, 1))), [1.0], 80, 1e-3)
    freq = 0.8
    rot = GeneratorRight(np.array([[0.0, freq], [-freq, 0.0]]), np.array([[1.0, 0.0]]))
    sine = simulate_right(sys7, rot, [0.0, 1.0], 80, 1e-3)
    c = sinusoid_phasor(sine.t, sine.y, freq)[0]
    K = transfer_eval(sys7, 1j * freq)[0, 0]
    amp, phase = abs(abs(c) - abs(K)), abs(np.angle(c) - np.angle(K))
    rot2 = GeneratorRight(np.array([[0.0, 2.0], [-2.0, 0.0]]), np.array([[1.0, 0.0]]))
    errs = [simulate_right(sys7, rot2, [0.0, 1.0], 20, h).integration_error for h in (0.2, 0.1)]
    ratio = errs[0] / errs[1]
    return [
        line("7-constant", const.tail_residual <= 1e-4 and abs(const.y[-1, 0] - 3) <= 1e-4,
             f"constant generator: y(80) = {const.y[-1, 0]:.8f}, tail residual {const.tail_residual:.2e}"),
        line("7-sinusoid", max(amp, phase) <= 1e-4,
             f"sinusoid at {freq}: amplitude error {amp:.2e}, phase error {phase:.2e}"),
        line("7-rk4", ratio >= 8, f"RK4 error reduction on dt halving {ratio:.1f}x (>= 8x)"),
    ]


def criterion_8():
    rng = np.random.default_rng(8)
    amp, freq = rng.uniform(-1, 1, 4), rng.uniform(0.1, 3.0, 4)
    u = lambda t: [float(np.clip(np.sum(amp * np.sin(freq * t)), -2, 2))]  # noqa: E731
    sys2 = ladder2()
    models = {
        "ladder": ladder_system(),
        "ladder (Q variant)": sys2,
        "finite right": reduce_ph_finite(sys2, GeneratorRight.jordan(0, 2)).model,
        "finite left": reduce_ph_finite(sys2, GeneratorLeft.jordan(0, 2)).model,
        "markov pi": reduce_ph_markov(sys2, GeneratorRight.jordan(0, 3), "pi").model,
        "markov pi_tilde": reduce_ph_markov(sys2, GeneratorRight.jordan(0, 3), "pi_tilde").model,
        "markov upsilon": reduce_ph_markov(sys2, GeneratorLeft.jordan(0, 2), "upsilon").model,
        "markov upsilon_hat": reduce_ph_markov(sys2, GeneratorLeft.jordan(0, 2), "upsilon_hat").model,
        "krylov": reduce_ph_krylov(sys2, [0.5, 1 + 1j, 1 - 1j]).model,
    }
    worst = {k: energy_audit(m, u, rng.uniform(-1, 1, m.n), 20, 1e-2) for k, m in models.items()}
    top = max(worst.values())
    return [line("8", top <= 1e-6, f"dissipation inequality on {len(models)} systems, worst violation {top:.2e}")]


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def _run(fn):
    rows = fn()
    for _, _, text in rows:
        print(text)
        RESULTS.append(text)
    return rows


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(len(CRITERIA))])
def test_acceptance(fn):
    failed = [text for _, ok, text in _run(fn) if ok is False]
    assert not failed, "\n".join(failed)


if __name__ == "__main__":
    bad = 0
    for fn in CRITERIA:
        bad += sum(ok is False for _, ok, _ in _run(fn))
    sys.exit(1 if bad else 0)
