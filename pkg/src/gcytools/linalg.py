"""Rank-revealing helpers on top of numpy's SVD.

Every rank decision uses the cutoff ``rtol * sigma_max``.
"""

from __future__ import annotations

import numpy as np

DEFAULT_RTOL = 1e-9


def _as_matrix(M) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M))
    if M.dtype.kind not in "fc":
        M = M.astype(float)
    return M


def svd_rank(M, rtol: float = DEFAULT_RTOL) -> int:
    M = _as_matrix(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def null_space(M, rtol: float = DEFAULT_RTOL, ncols: int | None = None) -> np.ndarray:
    """Orthonormal basis of ker M, returned as rows.

    ``ncols`` fixes the domain dimension when ``M`` has no rows.
    """
    M = _as_matrix(M)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    n = M.shape[1] if ncols is None else ncols
    if M.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=M.dtype)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    rank = 0 if s[0] == 0 else int(np.count_nonzero(s > rtol * s[0]))
    return vh[rank:].conj()


def row_space(M, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Orthonormal basis (rows) of the span of the rows of M."""
    M = _as_matrix(M)
    if M.shape[0] == 0:
        return np.zeros((0, M.shape[1]), dtype=M.dtype)
    _, s, vh = np.linalg.svd(M, full_matrices=False)
    rank = 0 if s[0] == 0 else int(np.count_nonzero(s > rtol * s[0]))
    return vh[:rank]


def rref(M, tol: float = 1e-12) -> np.ndarray:
    """Reduced row echelon form with partial pivoting; pivots normalised to 1."""
    R = np.array(M, dtype=complex)
    rows, cols = R.shape
    scale = np.abs(R).max() if R.size else 0.0
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[p, c]) <= tol * max(scale, 1e-300):
            continue
        R[[r, p]] = R[[p, r]]
        R[r] /= R[r, c]
        for q in range(rows):
            if q != r and R[q, c] != 0:
                R[q] -= R[q, c] * R[r]
        R[r, c] = 1.0
        r += 1
    return R[:r]


def pivoted_complement(span_rows, within_rows, count: int, rtol: float = DEFAULT_RTOL) -> np.ndarray:
    """Pick ``count`` orthonormal vectors of ``within`` orthogonal to ``span``.

    Candidates are the standard basis vectors projected onto
    within-minus-span; the candidate with the largest residual wins each
    round (lowest index on ties), then gets Gram-Schmidt'ed away. The
    result is deterministic for a given input.
    """
    within = row_space(within_rows, rtol)
    n = within.shape[1]
    span = row_space(span_rows, rtol) if len(span_rows) else np.zeros((0, n), dtype=complex)
    # projector onto within, minus projector onto span (span lies inside within)
    P = within.T @ within.conj()
    if span.shape[0]:
        P = P - span.T @ span.conj()
    cand = P.T.copy()  # row j is P e_j
    real = not np.iscomplexobj(within_rows) or not np.any(np.imag(within_rows))
    if real and (not len(span_rows) or not np.any(np.imag(span_rows))):
        cand = cand.real
    picked: list[np.ndarray] = []
    for _ in range(count):
        norms = np.linalg.norm(cand, axis=1)
        j = int(np.argmax(norms))
        if norms[j] <= rtol:
            raise ValueError("complement has smaller dimension than requested")
        q = cand[j] / norms[j]
        picked.append(q)
        cand = cand - np.outer(cand @ q.conj(), q)
    return np.array(picked).reshape(count, n)
