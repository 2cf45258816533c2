"""
Pointwise Hamiltonian reduction of a generalized Calabi-Yau spinor.

At a point p with pure spinor phi, fundamental vectors xi_j and moment-map
differentials dmu_j, the reduced spinor lives on the quotient
(dmu)^0 / span(xi). It is computed by pulling phi back along a complement of
span(xi) inside the level tangent; the pullback is well defined because
i_xi phi restricts to zero on the level tangent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ContractError, NonRegularPointError, ReductionError
from .multivector import ComplexForm, GVec, TwoForm, clifford_act, grade_of, interior, mukai_pair, pullback
from .spinor import (
    RTOL,
    ComplexSubspace,
    LocalData,
    annihilator,
    is_gcy,
    normal_form,
    type_of,
)

WELL_DEFINED_TOL = 1e-9


@dataclass(frozen=True)
class MomentPointData:
    """Reduction payload at a point: spinor, fundamental vectors, differentials.

    ``xi_M`` and ``dmu`` are (l, 2n) real arrays; row j of ``dmu`` is the
    differential paired with row j of ``xi_M``.
    """

    phi: ComplexForm
    xi_M: np.ndarray
    dmu: np.ndarray

    def __post_init__(self):
        N = self.phi.dim
        xi = np.asarray(self.xi_M, dtype=float).reshape(-1, N)
        dmu = np.asarray(self.dmu, dtype=float).reshape(-1, N)
        if xi.shape != dmu.shape:
            raise ContractError(f"xi_M has {xi.shape[0]} rows but dmu has {dmu.shape[0]}")
        xi.setflags(write=False)
        dmu.setflags(write=False)
        object.__setattr__(self, "xi_M", xi)
        object.__setattr__(self, "dmu", dmu)

    @property
    def dim(self) -> int:
        return self.phi.dim

    @property
    def l(self) -> int:
        return self.xi_M.shape[0]

    def hamiltonian_vectors(self) -> list[GVec]:
        return [GVec(tuple(x), tuple(-1j * a)) for x, a in zip(self.xi_M, self.dmu)]


@dataclass(frozen=True)
class ReductionResult:
    quotient_dim: int
    quotient_basis: np.ndarray = field(repr=False)
    reduced_phi: ComplexForm
    reduced_type: int
    original_type: int
    well_defined_residual: float
    reduced_pairing: complex
    lemma33: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "quotient_dim": self.quotient_dim,
            "quotient_basis": self.quotient_basis.tolist(),
            "reduced_phi": str(self.reduced_phi),
            "reduced_type": self.reduced_type,
            "original_type": self.original_type,
            "well_defined_residual": self.well_defined_residual,
            "reduced_pairing": [self.reduced_pairing.real, self.reduced_pairing.imag],
            "lemma33": list(self.lemma33),
        }


def moment_residual(d: MomentPointData) -> float:
    """max_j |(xi_j - i dmu_j) . phi| / |phi|."""
    scale = d.phi.norm() or 1.0
    res = 0.0
    for v in d.hamiltonian_vectors():
        res = max(res, clifford_act(v, d.phi).norm() / (scale * max(1.0, np.linalg.norm(v.to_array()))))
    return res


def check_moment_condition(d: MomentPointData, tol: float = 1e-10) -> bool:
    """xi_j - i dmu_j lies in E_phi for every j."""
    return moment_residual(d) <= tol


def _require_free(d: MomentPointData, rtol: float) -> None:
    if d.l and linalg.svd_rank(d.xi_M, rtol) < d.l:
        raise NonRegularPointError("fundamental vectors are dependent: the action is not free here")


def level_tangent(d: MomentPointData, rtol: float = RTOL) -> ComplexSubspace:
    """(dmu)^0 = {X : dmu_j(X) = 0 for all j}, returned with a real orthonormal basis."""
    N = d.dim
    if d.l == 0:
        return ComplexSubspace(N, np.eye(N), rtol)
    if linalg.svd_rank(d.dmu, rtol) < d.l:
        raise NonRegularPointError("moment-map differentials are dependent (non-regular point)")
    ker = linalg.null_space(d.dmu, rtol, ncols=N)
    return ComplexSubspace(N, ker, rtol)


def projected_annihilator(phi: ComplexForm, rtol: float = RTOL) -> ComplexSubspace:
    """pi(E_phi): the vector parts of the annihilator."""
    return annihilator(phi, rtol).project(range(phi.dim))


def lemma33_dimensions(d: MomentPointData, rtol: float = RTOL) -> tuple[int, int]:
    """(dim (level tangent) cap pi(E_phi), dim pi(E_phi) - l); equal on valid input."""
    _require_free(d, rtol)
    L = level_tangent(d, rtol)
    piE = projected_annihilator(d.phi, rtol)
    return L.intersection_dim(piE), piE.dim - d.l


def quotient_complement(d: MomentPointData, rtol: float = RTOL) -> np.ndarray:
    """Real orthonormal complement of span(xi) inside the level tangent, as columns."""
    L = level_tangent(d, rtol).basis.real
    count = L.shape[0] - d.l
    if count == 0:
        return np.zeros((d.dim, 0))
    return linalg.pivoted_complement(d.xi_M, L, count, rtol).real.T


def reduce(
    d: MomentPointData,
    rtol: float = RTOL,
    complement: np.ndarray | None = None,
    moment_tol: float = 1e-9,
    certify: bool = True,
) -> ReductionResult:
    """Descend phi to the quotient (dmu)^0 / span(xi) at this point.

    ``complement`` optionally fixes the lifted quotient basis (columns); it
    must lie in the level tangent and be independent of xi modulo the level
    tangent. By default a deterministic orthonormal complement is used.
    """
    _require_free(d, rtol)
    N = d.dim
    if moment_residual(d) > moment_tol:
        raise ReductionError("moment condition fails: xi - i dmu is not in the annihilator")
    L = level_tangent(d, rtol)
    for x in d.xi_M:
        if not L.contains(x):
            raise ReductionError("fundamental vectors are not tangent to the level set")

    if complement is None:
        Q = quotient_complement(d, rtol)
    else:
        Q = np.asarray(complement, dtype=float).reshape(N, -1)
        if Q.shape[1] != N - 2 * d.l:
            raise ContractError(f"complement must have {N - 2 * d.l} columns")
        for q in Q.T:
            if not L.contains(q):
                raise ContractError("complement vector leaves the level tangent")
        if linalg.svd_rank(np.vstack([d.xi_M, Q.T]), rtol) != N - d.l:
            raise ContractError("complement is not transverse to the fundamental directions")

    scale = d.phi.norm()
    Lb = L.basis.real.T
    wd = 0.0
    for x in d.xi_M:
        wd = max(wd, pullback(interior(x, d.phi), Lb).norm() / (scale * np.linalg.norm(x)))
    if wd > WELL_DEFINED_TOL:
        raise ReductionError(f"restricted spinor is not basic (residual {wd:.2e}); inconsistent moment data")

    reduced = pullback(d.phi, Q)
    if reduced.is_zero():
        raise ReductionError("reduced spinor vanishes (reduction degeneracy)")
    # drop roundoff left in grades below the type
    k0 = type_of(d.phi, rtol, check_pure=False)
    reduced = ComplexForm(reduced.dim, {k: c for k, c in reduced.masks.items() if grade_of(k) >= k0})
    pairing = mukai_pair(reduced, reduced.conjugate())
    rtype = type_of(reduced, rtol, check_pure=False)
    if certify:
        if not is_gcy(reduced, rtol):
            raise ReductionError(f"reduced spinor is not generalized Calabi-Yau (pairing {abs(pairing):.2e})")
        if rtype != k0:
            raise ReductionError(f"type changed under reduction: {k0} -> {rtype}")
    lhs, rhs = lemma33_dimensions(d, rtol)
    return ReductionResult(
        quotient_dim=Q.shape[1],
        quotient_basis=Q,
        reduced_phi=reduced,
        reduced_type=rtype,
        original_type=k0,
        well_defined_residual=wd,
        reduced_pairing=pairing,
        lemma33=(lhs, rhs),
    )


def descend_two_form(B: TwoForm, Q: np.ndarray) -> TwoForm:
    """Restriction of a 2-form to the quotient coordinates given by columns of Q."""
    Q = np.asarray(Q)
    M = Q.T @ B.matrix @ Q
    return TwoForm(0.5 * (M - M.T))


def normalize_local_data(d: MomentPointData, rtol: float = RTOL, tol: float = 1e-9) -> LocalData:
    """Normal form of phi corrected so that i_{xi_j} omega = dmu_j.

    The correction adds sum_s eta^s ^ theta^s, where eta^s(xi_j) =
    i dmu_j(X_s) for the dual frame X and eta^s vanishes on the Euclidean
    orthogonal complement of span(xi).
    """
    _require_free(d, rtol)
    level_tangent(d, rtol)
    if not check_moment_condition(d, tol):
        raise ReductionError("moment condition fails")
    local = normal_form(d.phi, rtol)
    if d.l == 0:
        return local
    k = local.type_k
    F = local.complex_two_form.matrix.copy()
    Xdual = np.linalg.inv(local.frame)  # columns X_s with frame[a] . X_s = delta
    xi = d.xi_M
    G = xi @ xi.T
    for s in range(k):
        target = 1j * (d.dmu @ Xdual[:, s])
        c = np.linalg.solve(G, target)
        eta = c @ xi
        theta = local.frame[s]
        F += np.outer(eta, theta) - np.outer(theta, eta)
    F = 0.5 * (F - F.T)
    corrected = LocalData(
        B=TwoForm(F.real),
        omega=TwoForm(F.imag),
        thetas=local.thetas,
        type_k=k,
        frame=local.frame,
        residual=local.residual,
        omega_nondegenerate_on_kernel=local.omega_nondegenerate_on_kernel,
    )
    rec = corrected.reconstruct()
    res = (rec - d.phi).norm() / d.phi.norm()
    Fm = TwoForm(F)
    contr = max(np.abs(Fm.contract(x) - 1j * a).max() for x, a in zip(xi, d.dmu))
    if res > tol or contr > tol * max(1.0, np.abs(F).max()):
        raise ReductionError(f"local normalisation failed (reconstruction {res:.1e}, contraction {contr:.1e})")
    return LocalData(corrected.B, corrected.omega, corrected.thetas, k, corrected.frame, res,
                     corrected.omega_nondegenerate_on_kernel)
