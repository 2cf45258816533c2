"""
Model generalized Calabi-Yau structures and the two Bergman-kernel S^1 domains.

Real-coordinate convention: the complex coordinates (w_1..w_m, z_1..z_n) are
split as u_a = x_a + i y_a and ordered (x_1, y_1, x_2, y_2, ...), so
du ^ dubar = -2i dx ^ dy. The S^1 action rotates the z block only; its
fundamental field is xi = -y d/dx + x d/dy on each z_j.

Kahler forms come from closed-form complex Hessians of log K; finite
differences appear only in :func:`verify_hamiltonian`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ContractError, DomainError
from .multivector import ComplexForm, TwoForm, embed, exp_two_form, wedge, wedge_all
from .reduction import MomentPointData

KINDS = ("polydisc", "ball")
SAMPLING_RADIUS = 0.95


# ---------------------------------------------------------------------------
# model spinors


def symplectic_spinor(omega: TwoForm, rtol: float = linalg.DEFAULT_RTOL) -> ComplexForm:
    """exp(i omega) for a real nondegenerate 2-form."""
    if not omega.is_real():
        raise DomainError("symplectic form must be real")
    n = omega.dim
    if n % 2 or linalg.svd_rank(omega.matrix.real, rtol) < n:
        raise DomainError("2-form is degenerate")
    return exp_two_form(omega * 1j)


def calabi_yau_spinor(m: int) -> ComplexForm:
    """(e^1 + i e^2) ^ ... ^ (e^{2m-1} + i e^{2m}) in dimension 2m."""
    thetas = []
    for j in range(m):
        c = np.zeros(2 * m, dtype=complex)
        c[2 * j], c[2 * j + 1] = 1.0, 1j
        thetas.append(ComplexForm.one_form(c))
    return wedge_all(thetas, 2 * m)


def b_transform(B: TwoForm, phi: ComplexForm) -> ComplexForm:
    if not B.is_real():
        raise DomainError("B-field must be real")
    return wedge(exp_two_form(B), phi)


def product_spinor(phi1: ComplexForm, phi2: ComplexForm) -> ComplexForm:
    """p1^* phi1 ^ p2^* phi2 on R^{n1} + R^{n2}."""
    n = phi1.dim + phi2.dim
    return wedge(embed(phi1, n, 0), embed(phi2, n, phi1.dim))


def product_moment_data(d1: MomentPointData, d2: MomentPointData) -> MomentPointData:
    """Diagonal action on the product with mu = mu1 o p1 + mu2 o p2."""
    if d1.l != d2.l:
        raise ContractError("both factors need the same group dimension")
    xi = np.hstack([d1.xi_M, d2.xi_M])
    dmu = np.hstack([d1.dmu, d2.dmu])
    return MomentPointData(product_spinor(d1.phi, d2.phi), xi, dmu)


def standard_symplectic(n: int) -> TwoForm:
    """e^1 ^ e^2 + e^3 ^ e^4 + ... on R^n (n even)."""
    m = np.zeros((n, n))
    for j in range(0, n - 1, 2):
        m[j, j + 1] = 1.0
    return TwoForm.from_upper(m)


# ---------------------------------------------------------------------------
# Bergman domains


@dataclass(frozen=True)
class ScenarioDomain:
    """A point of the polydisc or ball in C^{m+n}, coordinates (w, z)."""

    kind: str
    m: int
    n: int
    point: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown scenario kind {self.kind!r}")
        if self.m < 0 or self.n < 1:
            raise ContractError("need m >= 0 and n >= 1")
        p = tuple(complex(c) for c in self.point)
        if len(p) != self.m + self.n:
            raise ContractError(f"point needs {self.m + self.n} complex coordinates")
        object.__setattr__(self, "point", p)
        if not inside(self.kind, self.m, np.array(p)):
            raise DomainError("point is not strictly inside the domain")

    @property
    def w(self) -> np.ndarray:
        return np.array(self.point[: self.m])

    @property
    def z(self) -> np.ndarray:
        return np.array(self.point[self.m :])

    @property
    def real_dim(self) -> int:
        return 2 * (self.m + self.n)

    def real_coords(self) -> np.ndarray:
        u = np.array(self.point)
        return np.column_stack([u.real, u.imag]).ravel()

    def moved(self, real_coords) -> "ScenarioDomain":
        r = np.asarray(real_coords, dtype=float)
        return ScenarioDomain(self.kind, self.m, self.n, tuple(r[0::2] + 1j * r[1::2]))


def inside(kind: str, m: int, u: np.ndarray) -> bool:
    a = np.abs(u) ** 2
    if kind == "polydisc":
        return bool(np.all(a < 1.0))
    return bool(a.sum() < 1.0)


@dataclass(frozen=True)
class KernelEval:
    K: float
    logK_gradient: np.ndarray
    omega_matrix: np.ndarray


def _complex_hessian(dom: ScenarioDomain) -> np.ndarray:
    """H[a, b] = d^2 log K / du_a d ubar_b."""
    m, n = dom.m, dom.n
    u = np.array(dom.point)
    H = np.zeros((m + n, m + n), dtype=complex)
    if dom.kind == "polydisc":
        z = dom.z
        for j in range(n):
            H[m + j, m + j] = 2.0 / (1.0 - abs(z[j]) ** 2) ** 2
        return H
    sw = 1.0 - np.sum(np.abs(dom.w) ** 2)
    s = sw - np.sum(np.abs(dom.z) ** 2)
    if m:
        w = dom.w
        H[:m, :m] -= np.eye(m) / sw + np.outer(w.conj(), w) / sw**2
    H += (n + 1) * (np.eye(m + n) / s + np.outer(u.conj(), u) / s**2)
    return H


def _holomorphic_frame(N: int) -> np.ndarray:
    """Row a holds the real-coordinate coefficients of du_a = dx_a + i dy_a."""
    A = np.zeros((N, 2 * N), dtype=complex)
    for a in range(N):
        A[a, 2 * a] = 1.0
        A[a, 2 * a + 1] = 1j
    return A


def kahler_matrix(dom: ScenarioDomain) -> np.ndarray:
    """Real antisymmetric matrix of (i/2) sum H_ab du_a ^ dubar_b."""
    H = _complex_hessian(dom)
    A = _holomorphic_frame(dom.m + dom.n)
    M = 0.5j * (A.T @ H @ A.conj() - A.conj().T @ H.T @ A)
    if np.abs(M.imag).max() > 1e-12 * max(1.0, np.abs(M).max()):
        raise ArithmeticError("Kahler form came out complex")
    M = M.real
    return 0.5 * (M - M.T)


def bergman_kernel(kind: str, m: int, n: int, w: np.ndarray, z: np.ndarray) -> float:
    if kind == "polydisc":
        return float(np.prod(1.0 / (1.0 - np.abs(z) ** 2) ** 2) / math.pi**n)
    sw = 1.0 - np.sum(np.abs(w) ** 2)
    s = sw - np.sum(np.abs(z) ** 2)
    return float(math.factorial(n) / math.pi**n * sw / s ** (n + 1))


def kernel_eval(dom: ScenarioDomain) -> KernelEval:
    m, n = dom.m, dom.n
    w, z = dom.w, dom.z
    K = bergman_kernel(dom.kind, m, n, w, z)
    grad = np.zeros(m + n, dtype=complex)
    if dom.kind == "polydisc":
        grad[m:] = 2.0 * z.conj() / (1.0 - np.abs(z) ** 2)
    else:
        sw = 1.0 - np.sum(np.abs(w) ** 2)
        s = sw - np.sum(np.abs(z) ** 2)
        grad[:m] = -w.conj() / sw + (n + 1) * w.conj() / s
        grad[m:] = (n + 1) * z.conj() / s
    om = kahler_matrix(dom)
    om.setflags(write=False)
    return KernelEval(K=K, logK_gradient=grad, omega_matrix=om)


def fiber_spinor(dom: ScenarioDomain, kernel: KernelEval | None = None) -> ComplexForm:
    """dw_1 ^ ... ^ dw_m ^ exp(i Omega) at the point."""
    kernel = kernel or kernel_eval(dom)
    N = dom.real_dim
    dws = []
    for a in range(dom.m):
        c = np.zeros(N, dtype=complex)
        c[2 * a], c[2 * a + 1] = 1.0, 1j
        dws.append(ComplexForm.one_form(c))
    return wedge(wedge_all(dws, N), exp_two_form(TwoForm(kernel.omega_matrix) * 1j))


def fundamental_field(dom: ScenarioDomain) -> np.ndarray:
    x = dom.real_coords()
    xi = np.zeros_like(x)
    for j in range(dom.m, dom.m + dom.n):
        xi[2 * j] = -x[2 * j + 1]
        xi[2 * j + 1] = x[2 * j]
    return xi


def _mu_closed_form(kind: str, m: int, n: int, w: np.ndarray, z: np.ndarray) -> float:
    if kind == "polydisc":
        a = np.abs(z) ** 2
        return float(-np.sum(a / (1.0 - a)))
    sw = 1.0 - np.sum(np.abs(w) ** 2)
    s = sw - np.sum(np.abs(z) ** 2)
    return float(-(n + 1) / 2.0 * sw / s)


def moment_value(dom: ScenarioDomain) -> float:
    """The moment map as written for each example (polydisc and ball)."""
    return _mu_closed_form(dom.kind, dom.m, dom.n, dom.w, dom.z)


def moment_general(dom: ScenarioDomain) -> float:
    """-1/2 sum_j z_j d(log K)/dz_j, evaluated from the analytic gradient."""
    g = kernel_eval(dom).logK_gradient[dom.m :]
    val = -0.5 * np.sum(dom.z * g)
    return float(val.real)


def moment_offset(kind: str, n: int) -> float:
    """moment_value - moment_general; constant on each domain."""
    return 0.0 if kind == "polydisc" else -(n + 1) / 2.0


def _mu_real(dom: ScenarioDomain, x: np.ndarray) -> float:
    u = x[0::2] + 1j * x[1::2]
    return _mu_closed_form(dom.kind, dom.m, dom.n, u[: dom.m], u[dom.m :])


def moment_gradient_fd(dom: ScenarioDomain, h: float = 1e-4, order: int = 4) -> np.ndarray:
    """Central finite-difference gradient of the moment map in real coordinates."""
    x0 = dom.real_coords()
    reach = h * (2 if order == 4 else 1)
    N = len(x0)
    grad = np.zeros(N)
    for i in range(N):
        for sgn in (-1, 1):
            x = x0.copy()
            x[i] += sgn * reach
            u = x[0::2] + 1j * x[1::2]
            if not inside(dom.kind, dom.m, u):
                raise DomainError("finite-difference stencil leaves the domain")
        e = np.zeros(N)
        e[i] = h
        if order == 2:
            grad[i] = (_mu_real(dom, x0 + e) - _mu_real(dom, x0 - e)) / (2 * h)
        elif order == 4:
            grad[i] = (
                -_mu_real(dom, x0 + 2 * e)
                + 8 * _mu_real(dom, x0 + e)
                - 8 * _mu_real(dom, x0 - e)
                + _mu_real(dom, x0 - 2 * e)
            ) / (12 * h)
        else:
            raise ContractError("order must be 2 or 4")
    return grad


def contracted_kahler(dom: ScenarioDomain, kernel: KernelEval | None = None) -> np.ndarray:
    """Coefficients of i_xi Omega."""
    kernel = kernel or kernel_eval(dom)
    return fundamental_field(dom) @ kernel.omega_matrix


def verify_hamiltonian(dom: ScenarioDomain, h: float = 1e-4, order: int = 4) -> float:
    """max_i |d_i mu (finite differences) - (i_xi Omega)_i|."""
    fd = moment_gradient_fd(dom, h, order)
    return float(np.max(np.abs(fd - contracted_kahler(dom))))


def orbit_derivative(dom: ScenarioDomain, h: float = 1e-5) -> float:
    """Central difference of mu along the fundamental field."""
    x0 = dom.real_coords()
    xi = fundamental_field(dom)
    return (_mu_real(dom, x0 + h * xi) - _mu_real(dom, x0 - h * xi)) / (2 * h)


def relation_residual(kind: str, dom: ScenarioDomain) -> float:
    """Residual of the additive (polydisc) or multiplicative (ball) moment-map relation."""
    m, n = dom.m, dom.n
    aw = np.abs(dom.w) ** 2
    az = np.abs(dom.z) ** 2
    mu = moment_value(dom)
    if kind == "additive":
        if dom.kind != "polydisc":
            raise ContractError("the additive relation belongs to the polydisc")
        mu_base = -np.sum(aw / (1.0 - aw))
        mu_total = -(np.sum(aw / (1.0 - aw)) + np.sum(az / (1.0 - az)))
        return float(abs(mu_total - (mu_base + mu)))
    if kind == "multiplicative":
        if dom.kind != "ball":
            raise ContractError("the multiplicative relation belongs to the ball")
        sw = 1.0 - aw.sum()
        s = sw - az.sum()
        mu_base = -(m + 1) / 2.0 / sw
        mu_total = -(m + n + 1) / 2.0 / s
        factor = -2.0 * (m + n + 1) / ((m + 1) * (n + 1))
        return float(abs(mu_total - factor * mu_base * mu))
    raise ContractError(f"unknown relation {kind!r}")


def relation_check(kind: str, dom: ScenarioDomain) -> float:
    return relation_residual(kind, dom)


def moment_point_data(dom: ScenarioDomain, scale: float = 1.0, fd_step: float | None = None) -> MomentPointData:
    """Pointwise reduction data: fiber spinor, xi and dmu (both multiplied by ``scale``).

    dmu is i_xi Omega unless ``fd_step`` is given, in which case it is the
    finite-difference gradient of the moment map.
    """
    kernel = kernel_eval(dom)
    phi = fiber_spinor(dom, kernel)
    xi = fundamental_field(dom)
    dmu = moment_gradient_fd(dom, fd_step) if fd_step else xi @ kernel.omega_matrix
    return MomentPointData(phi, scale * xi[None, :], scale * dmu[None, :])


def sample_points(kind: str, m: int, n: int, count: int, rng: np.random.Generator,
                  radius: float = SAMPLING_RADIUS) -> list[ScenarioDomain]:
    """Uniform interior points kept within ``radius`` of the defining inequality."""
    N = m + n
    out = []
    for _ in range(count):
        if kind == "polydisc":
            r = radius * np.sqrt(rng.random(N))
            u = r * np.exp(2j * np.pi * rng.random(N))
        else:
            g = rng.standard_normal(2 * N)
            g /= np.linalg.norm(g)
            g *= radius * rng.random() ** (1.0 / (2 * N))
            u = g[0::2] + 1j * g[1::2]
        out.append(ScenarioDomain(kind, m, n, tuple(u)))
    return out
