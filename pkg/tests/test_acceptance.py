"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with or without
``-s``) before asserting, so ``pytest tests/test_acceptance.py`` doubles as
the acceptance report.
"""

import math
import time

import numpy as np
import pytest

import oracles
from gcytools.dh import DHConfig, DHScenario, dh_compare, liouville_density, volume_density
from gcytools.multivector import ComplexForm, TwoForm, exp_two_form, mukai_pair, wedge
from gcytools.reduction import lemma33_dimensions, reduce
from gcytools.scenarios import (
    b_transform,
    calabi_yau_spinor,
    fiber_spinor,
    product_spinor,
    relation_check,
    sample_points,
    standard_symplectic,
    symplectic_spinor,
    verify_hamiltonian,
)
from gcytools.spinor import ComplexSubspace, annihilator, is_gcy, normal_form, pairing_is_nonzero, transverse, type_of
from gcytools.suites import (
    chevalley_pair,
    clifford_residual,
    hamiltonian_instance,
    random_form,
    random_gvec,
    random_real_two_form,
    random_symplectic,
)

TAU = 1e-9


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_clifford_relation(verdict):
    rng = np.random.default_rng(101)
    worst = 0.0
    t0 = time.perf_counter()
    for n in (2, 3, 4, 5, 6):
        for _ in range(1000):
            worst = max(worst, clifford_residual(random_gvec(n, rng), random_form(n, rng)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed <= 10.0
    verdict(1, "Clifford relation", ok, f"5000 instances, worst residual {worst:.2e}, {elapsed:.2f} s")


def test_criterion_2_annihilator_golden_cases(verdict):
    rng = np.random.default_rng(102)
    failures = []
    count = 0
    for n in (2, 4, 6):
        if annihilator(ComplexForm.scalar(n)).dim != n:
            failures.append(f"dim E_1 != {n}")
        top = ComplexForm.basis(n, *range(1, n + 1))
        dual = ComplexSubspace.span(np.hstack([np.zeros((n, n)), np.eye(n)]), 2 * n)
        if annihilator(top) != dual:
            failures.append(f"E_top != V* for n={n}")
        for _ in range(100):
            omega, _ = random_symplectic(n, rng)
            formula = ComplexSubspace.span(np.hstack([np.eye(n), -1j * omega.matrix]), 2 * n)
            count += 1
            if annihilator(symplectic_spinor(omega)) != formula:
                failures.append(f"symplectic n={n}")
    verdict(2, "annihilator golden cases", not failures,
            f"{count} random symplectic forms, {len(failures)} failures {failures[:3]}")


def test_criterion_3_chevalley(verdict):
    rng = np.random.default_rng(103)
    counts = {"transverse": 0, "non_transverse": 0, "disagreements": 0}
    for t in range(600):
        phi, psi = chevalley_pair(2 * (1 + t % 3), rng)
        tr = transverse(phi, psi)
        counts["transverse" if tr else "non_transverse"] += 1
        counts["disagreements"] += int(tr != pairing_is_nonzero(phi, psi))
    ok = counts["disagreements"] == 0 and counts["transverse"] > 0 and counts["non_transverse"] > 0
    verdict(3, "Chevalley equivalence", ok, f"600 pairs, {counts}")


def test_criterion_4_pairing_formula(verdict):
    rng = np.random.default_rng(104)
    worst = 0.0
    for m in (1, 2, 3):
        forms = [standard_symplectic(2 * m)] + [random_symplectic(2 * m, rng)[0] for _ in range(20)]
        for omega in forms:
            M = omega.matrix.real
            top = math.factorial(m) * oracles.two_form_power_top(M, 2 * m)  # omega^m coefficient
            expected = (-2j) ** m / math.factorial(m) * top
            phi = symplectic_spinor(omega)
            got = mukai_pair(phi, phi.conjugate())
            via_oracle = oracles.mukai(phi.coeffs, phi.conjugate().coeffs, 2 * m)
            scale = max(1.0, abs(expected))
            worst = max(worst, abs(got - expected) / scale, abs(via_oracle - expected) / scale)
    verdict(4, "pairing formula m=1..3", worst <= 1e-10, f"63 forms, worst relative error {worst:.2e}")


def _scenario_spinors():
    mixed = wedge(ComplexForm.one_form([1, 1j, 0, 0]), exp_two_form(TwoForm.from_upper(
        np.array([[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 0.0]])) * 1j))
    out = {"mixed type-1": mixed}
    for n in (2, 4, 6):
        out[f"symplectic std {n}"] = symplectic_spinor(standard_symplectic(n))
    for m in (1, 2, 3):
        out[f"calabi-yau {m}"] = calabi_yau_spinor(m)
    out["CY(1) x symplectic 2"] = product_spinor(calabi_yau_spinor(1), symplectic_spinor(standard_symplectic(2)))
    out["CY(1) x symplectic 4"] = product_spinor(calabi_yau_spinor(1), symplectic_spinor(standard_symplectic(4)))
    rng = np.random.default_rng(105)
    for name in list(out):
        phi = out[name]
        out[f"B-transform of {name}"] = b_transform(random_real_two_form(phi.dim, rng), phi)
    for kind, m, n in (("polydisc", 0, 1), ("polydisc", 1, 1), ("polydisc", 1, 2), ("polydisc", 2, 2),
                       ("ball", 1, 1), ("ball", 2, 1)):
        for i, d in enumerate(sample_points(kind, m, n, 5, rng)):
            out[f"{kind} m={m} n={n} #{i}"] = fiber_spinor(d)
    return out


def test_criterion_5_normal_form_round_trip(verdict):
    worst, bad = 0.0, []
    spinors = _scenario_spinors()
    for name, phi in spinors.items():
        assert is_gcy(phi), name
        local = normal_form(phi)
        err = (local.reconstruct() - phi).norm() / phi.norm()
        r = max(local.residual, err)
        worst = max(worst, r)
        if r > 1e-9 or local.type_k != type_of(phi):
            bad.append(name)
    verdict(5, "normal_form round trip", not bad,
            f"{len(spinors)} gCY spinors, worst residual {worst:.2e}, failures {bad[:3]}")


def test_criterion_6_reduction_pipeline(verdict):
    rng = np.random.default_rng(106)
    shapes = set()
    failures = []
    trials = 240
    for t in range(trials):
        d = hamiltonian_instance(rng)
        shapes.add((d.dim, d.l))
        try:
            res = reduce(d)
        except Exception as e:  # any failure of the pipeline counts against the criterion
            failures.append(f"#{t}: {type(e).__name__}")
            continue
        lhs, rhs = lemma33_dimensions(d)
        ok = (res.reduced_type == type_of(d.phi)
              and abs(res.reduced_pairing) > TAU * res.reduced_phi.norm() ** 2
              and lhs == rhs)
        if not ok:
            failures.append(f"#{t}")
    covered = {(2, 1), (4, 1), (4, 2), (6, 1), (6, 2), (8, 1), (8, 2)} <= shapes
    verdict(6, "reduction pipeline", not failures and covered,
            f"{trials} instances over (dim, l) {sorted(shapes)}, {len(failures)} failures {failures[:3]}")


def test_criterion_7_bergman(verdict):
    rng = np.random.default_rng(107)
    fd_worst, add_worst, mul_worst = 0.0, 0.0, 0.0
    shapes = [("polydisc", m, n) for m in (0, 1, 2) for n in (1, 2)] + [("ball", 1, 1)]
    for kind, m, n in shapes:
        for d in sample_points(kind, m, n, 100, rng):
            fd_worst = max(fd_worst, verify_hamiltonian(d, 1e-4))
            if kind == "polydisc":
                add_worst = max(add_worst, relation_check("additive", d))
            else:
                mul_worst = max(mul_worst, relation_check("multiplicative", d))
    ok = fd_worst <= 1e-6 and add_worst <= 1e-12 and mul_worst <= 1e-12
    verdict(7, "Bergman verification", ok,
            f"{100 * len(shapes)} points, FD residual {fd_worst:.2e}, additive {add_worst:.2e}, "
            f"multiplicative {mul_worst:.2e}")


def test_criterion_8_duistermaat_heckman(verdict):
    t0 = time.perf_counter()
    r1 = dh_compare(DHScenario(1), DHConfig.uniform(-3, -0.2, 20, samples=10**6, seed=0))
    f1 = np.array(r1.f_hat)
    dev1 = float(np.abs(f1 - 1.0).max())
    r2 = dh_compare(DHScenario(2), DHConfig.uniform(-3, -0.2, 20, samples=10**7, seed=0))
    f2, v2, s2 = np.array(r2.f_hat), np.array(r2.vol_hat), np.array(r2.stderr)
    z2 = float((np.abs(f2 - v2) / s2).max())
    elapsed = time.perf_counter() - t0
    ok = dev1 <= 0.02 and len(f1) == 20 and z2 <= 3.0 and len(f2) == 20 and not any(r2.flags) \
        and elapsed <= 300.0
    verdict(8, "Duistermaat-Heckman", ok,
            f"n=1 max |f_hat - 1| = {dev1:.4f}; n=2 worst |f_hat - vol_hat| = {z2:.2f} sigma; {elapsed:.0f} s")


def test_criterion_9_liouville(verdict):
    rng = np.random.default_rng(109)
    worst = 0.0
    for n in (1, 2, 3):
        forms = [standard_symplectic(2 * n)] + [random_symplectic(2 * n, rng)[0] for _ in range(30)]
        for omega in forms:
            M = omega.matrix.real
            ref = oracles.two_form_power_top(M, 2 * n)
            scale = max(1.0, abs(ref))
            worst = max(worst,
                        abs(volume_density(exp_two_form(omega * 1j), 0) - ref) / scale,
                        abs(liouville_density(M) - ref) / scale)
    verdict(9, "Liouville consistency n<=3", worst <= 1e-10, f"93 forms, worst relative error {worst:.2e}")
