"""
Random instance generators and the randomized property suites behind
``gcytools check``.

Each suite returns a mapping ``property -> PropertyStats``; a property
passes when every trial passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .multivector import (
    ComplexForm,
    GVec,
    TwoForm,
    clifford_act,
    exp_two_form,
    grade_of,
    interior,
    metric,
    mukai_pair,
    pullback,
    reversal,
    wedge,
)
from .reduction import MomentPointData, lemma33_dimensions, reduce
from .scenarios import (
    calabi_yau_spinor,
    product_moment_data,
    product_spinor,
    standard_symplectic,
    symplectic_spinor,
)
from .spinor import (
    RTOL,
    annihilator,
    b_field_image,
    is_gcy,
    is_isotropic,
    normal_form,
    pairing_is_nonzero,
    transverse,
    type_of,
)

# ---------------------------------------------------------------------------
# generators


def random_form(n: int, rng: np.random.Generator, density: float = 0.6, grades=None) -> ComplexForm:
    """Unit-scale random complex form; each blade kept with probability ``density``."""
    coeffs = {}
    for mask in range(1 << n):
        if grades is not None and grade_of(mask) not in grades:
            continue
        if rng.random() < density:
            coeffs[mask] = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    return ComplexForm(n, coeffs)


def random_gvec(n: int, rng: np.random.Generator) -> GVec:
    z = rng.uniform(-1, 1, 2 * n) + 1j * rng.uniform(-1, 1, 2 * n)
    return GVec.from_array(z)


def random_real_two_form(n: int, rng: np.random.Generator, rank: int | None = None) -> TwoForm:
    """Random real 2-form; ``rank`` (even) fixes its rank."""
    if rank is None:
        M = rng.standard_normal((n, n))
        return TwoForm(M - M.T)
    A = rng.standard_normal((rank, n))
    J = standard_symplectic(rank).matrix.real if rank else np.zeros((0, 0))
    return _skew(A.T @ J @ A)


def _skew(M: np.ndarray) -> TwoForm:
    return TwoForm(0.5 * (M - M.T))


def random_symplectic(n: int, rng: np.random.Generator) -> tuple[TwoForm, np.ndarray]:
    """omega = A^T J A with A well conditioned; returns (omega, A)."""
    while True:
        A = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
        if np.linalg.cond(A) < 50:
            break
    J = standard_symplectic(n).matrix.real
    return _skew(A.T @ J @ A), A


def random_gl(n: int, rng: np.random.Generator, cond: float = 50.0) -> np.ndarray:
    while True:
        A = rng.standard_normal((n, n)) + 1.5 * np.eye(n)
        if np.linalg.cond(A) < cond:
            return A


def random_pure_spinor(n: int, rng: np.random.Generator, k: int | None = None) -> ComplexForm:
    """A^* (B-transform of theta^1..theta^k ^ exp(i omega)) with complex-structure thetas.

    In a random linear frame the spinor is (dz_1 ^ ... ^ dz_k) ^ exp(B + i omega)
    with omega symplectic on the remaining coordinates. ``n`` is the real
    dimension (even).
    """
    if n % 2:
        raise DomainError("pure spinor generator needs even dimension")
    if k is None:
        k = int(rng.integers(0, n // 2 + 1))
    cy = calabi_yau_spinor(k)
    rest = n - 2 * k
    omega, _ = random_symplectic(rest, rng) if rest else (TwoForm.zero(0), None)
    phi = product_spinor(cy, symplectic_spinor(omega)) if rest else cy
    phi = wedge(exp_two_form(random_real_two_form(n, rng)), phi)
    return pullback(phi, random_gl(n, rng))


def chevalley_pair(n: int, rng: np.random.Generator) -> tuple[ComplexForm, ComplexForm]:
    """Pure spinor pairs mixing transverse and non-transverse cases."""
    kind = int(rng.integers(0, 6))
    if kind == 0:  # conjugate pair of a random model spinor
        phi = random_pure_spinor(n, rng)
        return phi, phi.conjugate()
    if kind == 1:  # B-field of random (possibly degenerate) rank
        phi = symplectic_spinor(random_symplectic(n, rng)[0])
        rank = 2 * int(rng.integers(0, n // 2 + 1))
        return phi, wedge(exp_two_form(random_real_two_form(n, rng, rank)), phi)
    if kind == 2:  # top form against a model spinor
        top = ComplexForm.basis(n, *range(1, n + 1), coeff=complex(rng.uniform(0.5, 2), rng.uniform(-1, 1)))
        return top, random_pure_spinor(n, rng)
    if kind == 3:  # a spinor against itself after a B-transform
        phi = random_pure_spinor(n, rng)
        return phi, wedge(exp_two_form(random_real_two_form(n, rng)), phi)
    if kind == 4:  # shared covector dz_1 in both annihilators: never transverse
        k = int(rng.integers(1, n // 2 + 1))
        A = random_gl(n, rng)
        base = _cy_pad(k, n)
        phi = pullback(wedge(exp_two_form(random_real_two_form(n, rng) * 1j), base), A)
        psi = pullback(wedge(exp_two_form(random_real_two_form(n, rng)), base), A)
        return phi, psi
    return random_pure_spinor(n, rng), random_pure_spinor(n, rng)


def _cy_pad(k: int, n: int) -> ComplexForm:
    """dz_1 ^ ... ^ dz_k ^ exp(i omega_std) on the remaining coordinates."""
    rest = n - 2 * k
    if rest == 0:
        return calabi_yau_spinor(k)
    return product_spinor(calabi_yau_spinor(k), symplectic_spinor(standard_symplectic(rest)))


def symplectic_instance(n: int, l: int, rng: np.random.Generator) -> MomentPointData:
    """exp(i omega) with l omega-isotropic fundamental vectors and dmu = i_xi omega."""
    omega, A = random_symplectic(n, rng)
    Ainv = np.linalg.inv(A)
    # x-directions of distinct Darboux pairs are isotropic for A^T J A after A^{-1}
    pairs = rng.permutation(n // 2)[:l]
    xi = np.array([Ainv[:, 2 * p] for p in pairs]).reshape(l, n)
    mix = random_gl(l, rng) if l > 1 else np.array([[rng.uniform(0.5, 2.0)]])
    xi = mix @ xi
    dmu = xi @ omega.matrix.real
    return MomentPointData(symplectic_spinor(omega), xi, dmu)


def product_instance(m: int, p: int, l: int, rng: np.random.Generator, with_b: bool = True) -> MomentPointData:
    """(CY of complex dim m) x (symplectic dim p) with action on the symplectic
    factor, optionally B-transformed by a real B with i_xi B = 0."""
    cy_dim = 2 * m
    sympl = symplectic_instance(p, l, rng)
    cy = MomentPointData(calabi_yau_spinor(m), np.zeros((l, cy_dim)), np.zeros((l, cy_dim)))
    d = product_moment_data(cy, sympl)
    if not with_b:
        return d
    N = d.dim
    B = random_real_two_form(N, rng).matrix.real
    # project so that i_xi B = 0: B <- P^T B P with P killing span(xi)
    xi = d.xi_M
    P = np.eye(N) - xi.T @ np.linalg.solve(xi @ xi.T, xi)
    B = P.T @ B @ P
    B = 0.5 * (B - B.T)
    phi = wedge(exp_two_form(TwoForm(B)), d.phi)
    return MomentPointData(phi, d.xi_M, d.dmu)


def pullback_instance(d: MomentPointData, A: np.ndarray) -> MomentPointData:
    """Transport along a linear isomorphism: phi' = A^* phi, xi' = A^{-1} xi, dmu' = A^T dmu."""
    Ainv = np.linalg.inv(A)
    return MomentPointData(pullback(d.phi, A), (Ainv @ d.xi_M.T).T, d.dmu @ A)


def hamiltonian_instance(rng: np.random.Generator, dims=(2, 4, 6, 8), ls=(1, 2)) -> MomentPointData:
    """A random Hamiltonian instance of dimension in ``dims`` and rank in ``ls``."""
    while True:
        N = int(rng.choice(dims))
        l = int(rng.choice(ls))
        if 2 * l <= N:
            break
    m = int(rng.integers(0, (N - 2 * l) // 2 + 1))
    d = product_instance(m, N - 2 * m, l, rng, with_b=bool(rng.integers(0, 2))) if m else symplectic_instance(N, l, rng)
    if rng.random() < 0.5:
        d = pullback_instance(d, random_gl(N, rng))
    return d


# ---------------------------------------------------------------------------
# suites


@dataclass
class PropertyStats:
    trials: int = 0
    passed: int = 0
    worst: float = 0.0
    extra: dict = field(default_factory=dict)

    def record(self, ok: bool, residual: float = 0.0) -> None:
        self.trials += 1
        self.passed += int(bool(ok))
        if np.isfinite(residual):
            self.worst = max(self.worst, float(residual))
        else:
            self.worst = float("inf")

    @property
    def ok(self) -> bool:
        return self.passed == self.trials

    def to_dict(self) -> dict:
        d = {"trials": self.trials, "passed": self.passed, "worst_residual": self.worst, "ok": self.ok}
        d.update(self.extra)
        return d


def _rel(a: ComplexForm, b: ComplexForm, scale: float) -> float:
    return (a - b).norm() / max(scale, 1e-300)


def clifford_residual(v: GVec, a: ComplexForm) -> float:
    lhs = clifford_act(v, clifford_act(v, a))
    rhs = a * metric(v, v)
    scale = max(a.norm() * max(1.0, abs(metric(v, v))), lhs.norm(), 1e-300)
    return _rel(lhs, rhs, scale)


def algebra_suite(trials: int, rng: np.random.Generator, tol: float = 1e-12) -> dict[str, PropertyStats]:
    out = {k: PropertyStats() for k in ("clifford", "graded_commutativity", "antiderivation", "pairing_b_invariance",
                                         "reversal")}
    for t in range(trials):
        n = 2 + t % 5
        a = random_form(n, rng)
        v = random_gvec(n, rng)
        r = clifford_residual(v, a)
        out["clifford"].record(r <= tol, r)

        p, q = int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1))
        x = random_form(n, rng, 0.8, grades={p})
        y = random_form(n, rng, 0.8, grades={q})
        lhs, rhs = wedge(x, y), wedge(y, x) * (-1) ** (p * q)
        r = _rel(lhs, rhs, max(x.norm() * y.norm(), 1e-300))
        out["graded_commutativity"].record(r <= tol, r)

        X = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
        lhs = interior(X, wedge(x, y))
        rhs = wedge(interior(X, x), y) + wedge(x, interior(X, y)) * (-1) ** p
        r = _rel(lhs, rhs, max(x.norm() * y.norm() * np.linalg.norm(X), 1e-300))
        out["antiderivation"].record(r <= tol, r)

        b = random_form(n, rng)
        B = random_real_two_form(n, rng)
        eB = exp_two_form(B)
        lhs_c, rhs_c = mukai_pair(wedge(eB, a), wedge(eB, b)), mukai_pair(a, b)
        scale = max(wedge(eB, a).norm() * wedge(eB, b).norm(), 1e-300)
        r = abs(lhs_c - rhs_c) / scale
        out["pairing_b_invariance"].record(r <= tol, r)

        r1 = _rel(reversal(reversal(a)), a, max(a.norm(), 1e-300))
        r2 = _rel(reversal(wedge(a, b)), wedge(reversal(b), reversal(a)), max(a.norm() * b.norm(), 1e-300))
        out["reversal"].record(max(r1, r2) <= tol, max(r1, r2))
    return out


def spinor_suite(trials: int, rng: np.random.Generator, rtol: float = RTOL) -> dict[str, PropertyStats]:
    names = ("annihilator_isotropic", "chevalley", "b_field_covariance", "normal_form_roundtrip", "gcy_b_invariance")
    out = {k: PropertyStats() for k in names}
    out["chevalley"].extra = {"transverse": 0, "non_transverse": 0, "disagreements": 0}
    for t in range(trials):
        n = 2 * (1 + t % 3)
        a = random_form(n, rng, 0.5)
        if not a.is_zero():
            E = annihilator(a, rtol)
            ok = is_isotropic(E) and E.dim <= n
            out["annihilator_isotropic"].record(ok, float(E.dim > n))

        phi, psi = chevalley_pair(n, rng)
        tr = transverse(phi, psi, rtol)
        pr = pairing_is_nonzero(phi, psi, rtol)
        ex = out["chevalley"].extra
        ex["transverse" if tr else "non_transverse"] += 1
        ex["disagreements"] += int(tr != pr)
        out["chevalley"].record(tr == pr, float(tr != pr))

        phi = random_pure_spinor(n, rng)
        B = random_real_two_form(n, rng)
        lhs = annihilator(wedge(exp_two_form(B), phi), rtol)
        rhs = b_field_image(annihilator(phi, rtol), B)
        out["b_field_covariance"].record(lhs == rhs, float(lhs != rhs))

        local = normal_form(phi, rtol)
        out["normal_form_roundtrip"].record(local.residual <= 1e-9, local.residual)

        k = type_of(phi, rtol)
        bphi = wedge(exp_two_form(B), phi)
        ok = is_gcy(phi, rtol) and is_gcy(bphi, rtol) and type_of(bphi, rtol) == k
        out["gcy_b_invariance"].record(ok, float(not ok))
    return out


def reduction_suite(trials: int, rng: np.random.Generator, rtol: float = RTOL) -> dict[str, PropertyStats]:
    names = ("reduce_succeeds", "type_preserved", "reduced_pairing", "lemma33_equal")
    out = {k: PropertyStats() for k in names}
    out["lemma33_equal"].extra = {"equal": 0, "unequal": 0}
    for _ in range(trials):
        d = hamiltonian_instance(rng)
        try:
            res = reduce(d, rtol)
        except DomainError:
            for k in names:
                out[k].record(False, float("inf"))
            continue
        out["reduce_succeeds"].record(True)
        out["type_preserved"].record(res.reduced_type == res.original_type,
                                     float(res.reduced_type != res.original_type))
        scale = res.reduced_phi.norm() ** 2
        mag = abs(res.reduced_pairing) / scale
        out["reduced_pairing"].record(mag > rtol, -mag)
        lhs, rhs = lemma33_dimensions(d, rtol)
        out["lemma33_equal"].record(lhs == rhs, float(abs(lhs - rhs)))
        out["lemma33_equal"].extra["equal" if lhs == rhs else "unequal"] += 1
    return out


SUITES = {"algebra": algebra_suite, "spinor": spinor_suite, "reduction": reduction_suite}


def run_suite(name: str, trials: int, seed: int, rtol: float = RTOL) -> dict[str, PropertyStats]:
    rng = np.random.default_rng(seed)
    if name == "algebra":
        return algebra_suite(trials, rng)
    return SUITES[name](trials, rng, rtol)
