"""
Pure spinor analysis: annihilators, purity, type, transversality, the
generalized Calabi-Yau predicate and the exp(B + i w) ^ theta^1 ^ .. ^ theta^k
normal form.

Subspaces of (V + V*) tensor C are stored as coordinate rows of length 2n,
vector part first. All rank decisions go through :mod:`gcytools.linalg` with
the relative cutoff ``rtol`` (default 1e-9 of the largest singular value).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DomainError
from .multivector import (
    ComplexForm,
    TwoForm,
    covector_wedge,
    exp_two_form,
    grade_of,
    interior,
    mukai_pair,
    parity,
    wedge,
    wedge_all,
)

RTOL = linalg.DEFAULT_RTOL


@dataclass(frozen=True)
class ComplexSubspace:
    """A subspace of C^ambient_dim given by independent basis rows."""

    ambient_dim: int
    basis: np.ndarray
    rank_tolerance: float = RTOL

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        b = b.reshape(-1, self.ambient_dim) if self.ambient_dim else np.zeros((0, 0), dtype=complex)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors, ambient_dim: int, rtol: float = RTOL) -> "ComplexSubspace":
        if ambient_dim == 0:
            return cls(0, np.zeros((0, 0)), rtol)
        v = np.asarray(vectors, dtype=complex).reshape(-1, ambient_dim)
        return cls(ambient_dim, linalg.row_space(v, rtol), rtol)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=complex).reshape(1, -1)
        if not np.any(v):
            return True
        return linalg.svd_rank(np.vstack([self.basis, v / np.linalg.norm(v)]), self.rank_tolerance) == self.dim

    def intersection_dim(self, other: "ComplexSubspace") -> int:
        total = linalg.svd_rank(np.vstack([self.basis, other.basis]), self.rank_tolerance)
        return self.dim + other.dim - total

    def intersection(self, other: "ComplexSubspace") -> "ComplexSubspace":
        # x = a^T S = b^T O  <=>  [S; -O]^T [a; b] = 0
        S, O = self.basis, other.basis
        M = np.vstack([S, -O]).T
        ker = linalg.null_space(M, self.rank_tolerance, ncols=S.shape[0] + O.shape[0])
        vecs = ker[:, : S.shape[0]] @ S if ker.size else np.zeros((0, self.ambient_dim))
        return ComplexSubspace.span(vecs, self.ambient_dim, self.rank_tolerance)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexSubspace):
            return NotImplemented
        return (
            self.ambient_dim == other.ambient_dim
            and self.dim == other.dim
            and linalg.svd_rank(np.vstack([self.basis, other.basis]), self.rank_tolerance) == self.dim
        )

    __hash__ = None

    def project(self, indices) -> "ComplexSubspace":
        """Image under the coordinate projection onto ``indices``."""
        idx = list(indices)
        return ComplexSubspace.span(self.basis[:, idx], len(idx), self.rank_tolerance)


@dataclass(frozen=True)
class LocalData:
    """phi = exp(B + i*omega) ^ theta^1 ^ ... ^ theta^k at a point.

    ``frame`` holds theta^1..theta^k followed by the complement covectors on
    which B + i*omega is supported (rows, coordinates in e^1..e^n).
    ``omega_nondegenerate_on_kernel`` reports whether omega is nondegenerate on
    the real kernel {X real : i_X Omega = 0}.
    """

    B: TwoForm
    omega: TwoForm
    thetas: list
    type_k: int
    frame: np.ndarray = field(repr=False)
    residual: float = 0.0
    omega_nondegenerate_on_kernel: bool = True

    @property
    def complex_two_form(self) -> TwoForm:
        return TwoForm(self.B.matrix + 1j * self.omega.matrix)

    def reconstruct(self) -> ComplexForm:
        n = self.B.dim
        return wedge(exp_two_form(self.complex_two_form), wedge_all(self.thetas, n))


# ---------------------------------------------------------------------------


def clifford_matrix(phi: ComplexForm) -> np.ndarray:
    """The 2^n x 2n matrix of v -> v . phi (columns: e_1..e_n then e^1..e^n)."""
    n = phi.dim
    cols = []
    for i in range(n):
        X = np.zeros(n)
        X[i] = 1.0
        cols.append(interior(X, phi).to_array())
    for i in range(n):
        a = np.zeros(n)
        a[i] = 1.0
        cols.append(covector_wedge(a, phi).to_array())
    if not cols:
        return np.zeros((1, 0), dtype=complex)
    return np.array(cols).T


def annihilator(phi: ComplexForm, rtol: float = RTOL) -> ComplexSubspace:
    """E_phi = {X + alpha : (X + alpha) . phi = 0}."""
    if phi.is_zero():
        raise DomainError("the zero spinor has no annihilator")
    n = phi.dim
    ker = linalg.null_space(clifford_matrix(phi), rtol, ncols=2 * n)
    return ComplexSubspace(2 * n, ker, rtol)


def is_isotropic(S: ComplexSubspace, atol: float = 1e-10) -> bool:
    if S.ambient_dim % 2:
        raise DomainError("isotropy needs an even ambient dimension (V + V*)")
    n = S.ambient_dim // 2
    b = S.basis
    # (u, w) = (u_a(w_X) + w_a(u_X)) / 2
    G = 0.5 * (b[:, n:] @ b[:, :n].T + b[:, :n] @ b[:, n:].T)
    return bool(np.all(np.abs(G) <= atol))


def is_pure(phi: ComplexForm, rtol: float = RTOL) -> bool:
    return annihilator(phi, rtol).dim == phi.dim


def _lowest_grade(phi: ComplexForm, rtol: float) -> int:
    scale = phi.norm()
    by_grade: dict[int, float] = {}
    for k, c in phi.masks.items():
        g = grade_of(k)
        by_grade[g] = by_grade.get(g, 0.0) + abs(c) ** 2
    for g in sorted(by_grade):
        if np.sqrt(by_grade[g]) > rtol * scale:
            return g
    raise DomainError("zero spinor")


def type_of(phi: ComplexForm, rtol: float = RTOL, check_pure: bool = True) -> int:
    """Lowest nonzero grade of a pure spinor."""
    if phi.is_zero():
        raise DomainError("zero spinor")
    if check_pure and not is_pure(phi, rtol):
        raise DomainError("type is only defined for pure spinors")
    return _lowest_grade(phi, rtol)


def pairing_is_nonzero(phi: ComplexForm, psi: ComplexForm, rtol: float = RTOL) -> bool:
    return abs(mukai_pair(phi, psi)) > rtol * phi.norm() * psi.norm()


def is_gcy(phi: ComplexForm, rtol: float = RTOL) -> bool:
    """Pure, of definite parity, and <phi, conj(phi)> != 0."""
    if phi.dim % 2:
        raise DomainError("a generalized Calabi-Yau structure needs an even-dimensional space")
    if phi.is_zero():
        return False
    if parity(phi) == "mixed":
        return False
    if not is_pure(phi, rtol):
        return False
    return pairing_is_nonzero(phi, phi.conjugate(), rtol)


def transverse(phi: ComplexForm, psi: ComplexForm, rtol: float = RTOL) -> bool:
    """E_phi and E_psi meet only in 0."""
    Ep, Eq = annihilator(phi, rtol), annihilator(psi, rtol)
    n = phi.dim
    if Ep.dim != n or Eq.dim != n:
        raise DomainError("transversality is decided for pure spinors only")
    return Ep.intersection_dim(Eq) == 0


def chevalley_agrees(phi: ComplexForm, psi: ComplexForm, rtol: float = RTOL) -> bool:
    return transverse(phi, psi, rtol) == pairing_is_nonzero(phi, psi, rtol)


def b_field_image(E: ComplexSubspace, B: TwoForm) -> ComplexSubspace:
    """Annihilator of exp(B) ^ phi given E = E_phi: {X + alpha - i_X B : X + alpha in E}.

    The minus sign follows from (X + alpha) . exp(B) phi = exp(B) ((X + alpha + i_X B) . phi)
    with the leftmost-slot interior product; it matches E_{exp(i omega)} = {X - i i_X omega}.
    """
    n = E.ambient_dim // 2
    b = E.basis
    shifted = np.hstack([b[:, :n], b[:, n:] - b[:, :n] @ B.matrix])
    return ComplexSubspace.span(shifted, 2 * n, E.rank_tolerance)


# ---------------------------------------------------------------------------
# normal form


def kernel_of_contraction(Omega: ComplexForm, rtol: float = RTOL) -> np.ndarray:
    """Rows spanning {X in C^n : i_X Omega = 0}."""
    n = Omega.dim
    cols = []
    for i in range(n):
        X = np.zeros(n)
        X[i] = 1.0
        cols.append(interior(X, Omega).to_array())
    if not cols:
        return np.zeros((0, 0), dtype=complex)
    return linalg.null_space(np.array(cols).T, rtol, ncols=n)


def _scale_to_match(target: ComplexForm, got: ComplexForm) -> complex:
    t, g = target.to_array(), got.to_array()
    return complex(np.vdot(g, t) / np.vdot(g, g))


def factor_decomposable(Omega: ComplexForm, rtol: float = RTOL) -> list[ComplexForm]:
    """Split a decomposable k-form into theta^1 ^ ... ^ theta^k.

    The thetas are the reduced row echelon basis of the annihilator of
    W = ker(i_. Omega), with theta^1 rescaled so the product equals Omega.
    """
    n = Omega.dim
    ks = {grade_of(k) for k in Omega.masks}
    if len(ks) != 1:
        raise DomainError("factorisation expects a homogeneous nonzero form")
    k = ks.pop()
    if k == 0:
        return []
    W = kernel_of_contraction(Omega, rtol)
    if W.shape[0] != n - k:
        raise DomainError(
            f"lowest-grade component is not decomposable (kernel dim {W.shape[0]}, expected {n - k})"
        )
    ann = linalg.null_space(W, rtol, ncols=n) if W.shape[0] else np.eye(n, dtype=complex)
    rows = linalg.rref(ann)
    thetas = [ComplexForm.one_form(r) for r in rows]
    c = _scale_to_match(Omega, wedge_all(thetas))
    thetas[0] = thetas[0] * c
    return thetas


def normal_form(phi: ComplexForm, rtol: float = RTOL, residual_tol: float = 1e-9) -> LocalData:
    """Write a pure spinor as exp(B + i*omega) ^ theta^1 ^ ... ^ theta^k.

    B + i*omega is the unique solution supported on complement ^ complement,
    where the complement is picked deterministically inside the Hermitian
    orthogonal complement of span(theta).
    """
    n = phi.dim
    if phi.is_zero():
        raise DomainError("zero spinor")
    if not is_pure(phi, rtol):
        raise DomainError("normal form needs a pure spinor")
    if not pairing_is_nonzero(phi, phi.conjugate(), rtol):
        raise DomainError("normal form needs <phi, conj(phi)> != 0")
    k = _lowest_grade(phi, rtol)
    Omega = phi.grade(k)
    thetas = factor_decomposable(Omega, rtol)
    Th = np.array([t.to_array()[[1 << i for i in range(n)]] for t in thetas]).reshape(k, n)
    comp = linalg.pivoted_complement(Th, np.eye(n), n - k, rtol) if n - k else np.zeros((0, n))
    frame = np.vstack([Th, comp]) if k else comp.astype(complex)

    # unknowns c_ab (a<b) in the complement: (sum c_ab c^a ^ c^b) ^ Omega = phi_{k+2}
    pairs = [(a, b) for a in range(n - k) for b in range(a + 1, n - k)]
    target = phi.grade(k + 2).to_array()
    F = np.zeros((n, n), dtype=complex)
    if pairs:
        cforms = [ComplexForm.one_form(c) for c in comp]
        cols = [wedge(wedge(cforms[a], cforms[b]), Omega).to_array() for a, b in pairs]
        sol, *_ = np.linalg.lstsq(np.array(cols).T, target, rcond=None)
        for (a, b), s in zip(pairs, sol):
            F += s * (np.outer(comp[a], comp[b]) - np.outer(comp[b], comp[a]))
    F = 0.5 * (F - F.T)
    local = LocalData(
        B=TwoForm(F.real),
        omega=TwoForm(F.imag),
        thetas=thetas,
        type_k=k,
        frame=frame,
    )
    rec = local.reconstruct()
    residual = (rec - phi).norm() / phi.norm()
    if residual > residual_tol:
        raise DomainError(f"normal form reconstruction residual {residual:.3e} above {residual_tol:.1e}")
    nondeg = omega_nondegenerate_on_real_kernel(local, rtol)
    return LocalData(local.B, local.omega, thetas, k, frame, residual, nondeg)


def omega_nondegenerate_on_real_kernel(local: LocalData, rtol: float = RTOL) -> bool:
    """Is omega nondegenerate on W = {X real : theta^s(X) = 0 for all s}?"""
    n = local.B.dim
    if local.type_k == 0:
        W = np.eye(n)
    else:
        Th = local.frame[: local.type_k]
        W = linalg.null_space(np.vstack([Th.real, Th.imag]), rtol, ncols=n).real
    if W.shape[0] == 0:
        return True
    restricted = W @ local.omega.matrix.real @ W.T
    if W.shape[0] % 2:
        return False
    return linalg.svd_rank(restricted, rtol) == W.shape[0]


__all__ = [
    "ComplexSubspace",
    "LocalData",
    "annihilator",
    "b_field_image",
    "chevalley_agrees",
    "clifford_matrix",
    "factor_decomposable",
    "is_gcy",
    "is_isotropic",
    "is_pure",
    "kernel_of_contraction",
    "normal_form",
    "omega_nondegenerate_on_real_kernel",
    "pairing_is_nonzero",
    "transverse",
    "type_of",
]
