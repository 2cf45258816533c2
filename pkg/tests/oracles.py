"""Independent reference implementations used to derive and freeze test values.

Nothing here imports the sign machinery of the package: wedge and interior
products are computed from permutation parities, Pfaffians by Laplace
expansion, Hessians by finite differences.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def perm_parity(seq) -> int:
    """+1 / -1 for the permutation sorting ``seq`` (distinct entries); 0 on repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def wedge(a: dict, b: dict) -> dict:
    """Coefficient dicts keyed by sorted index tuples."""
    out: dict = {}
    for I, x in a.items():
        for J, y in b.items():
            s = perm_parity(I + J)
            if s:
                K = tuple(sorted(I + J))
                out[K] = out.get(K, 0) + s * x * y
    return {k: v for k, v in out.items() if v != 0}


def interior(X, a: dict) -> dict:
    """(i_X a)(v_2, ...) = a(X, v_2, ...)."""
    out: dict = {}
    for I, x in a.items():
        for pos, i in enumerate(I):
            J = I[:pos] + I[pos + 1 :]
            out[J] = out.get(J, 0) + (-1) ** pos * X[i - 1] * x
    return {k: v for k, v in out.items() if v != 0}


def evaluate(a: dict, vectors) -> complex:
    """a(v_1..v_k) = sum_I a_I det(V[I, :]) for the grade-k part."""
    V = np.array(vectors, dtype=complex).T  # columns are vectors
    k = V.shape[1]
    total = 0j
    for I, x in a.items():
        if len(I) == k:
            rows = [i - 1 for i in I]
            total += x * (np.linalg.det(V[rows, :]) if k else 1.0)
    return total


def reversal(a: dict) -> dict:
    return {I: x * (-1) ** (len(I) * (len(I) - 1) // 2) for I, x in a.items()}


def top_coefficient(a: dict, n: int) -> complex:
    return a.get(tuple(range(1, n + 1)), 0)


def mukai(a: dict, b: dict, n: int) -> complex:
    return top_coefficient(wedge(reversal(a), b), n)


def pfaffian(M) -> float:
    """Laplace expansion along the first row."""
    M = np.asarray(M)
    n = M.shape[0]
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    total = 0.0
    for j in range(1, n):
        keep = [k for k in range(n) if k not in (0, j)]
        total += (-1) ** (j + 1) * M[0, j] * pfaffian(M[np.ix_(keep, keep)])
    return total


def two_form_power_top(M, n: int) -> float:
    """Top coefficient of omega^(n/2) / (n/2)! by brute-force wedging."""
    omega = {(i + 1, j + 1): M[i, j] for i in range(n) for j in range(i + 1, n) if M[i, j] != 0}
    acc = {(): 1.0}
    for _ in range(n // 2):
        acc = wedge(acc, omega)
    return top_coefficient(acc, n) / math.factorial(n // 2)


def complex_hessian_fd(f, u: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """d^2 f / du_a d ubar_b = 1/4 (d_xa - i d_ya)(d_xb + i d_yb) f, central differences."""
    N = len(u)
    x = np.column_stack([u.real, u.imag]).ravel()

    def F(y):
        return f(y[0::2] + 1j * y[1::2])

    def d2(i, j):
        ei = np.zeros_like(x)
        ej = np.zeros_like(x)
        ei[i] = h
        ej[j] = h
        return (F(x + ei + ej) - F(x + ei - ej) - F(x - ei + ej) + F(x - ei - ej)) / (4 * h * h)

    H = np.zeros((N, N), dtype=complex)
    for a in range(N):
        for b in range(N):
            xa, ya, xb, yb = 2 * a, 2 * a + 1, 2 * b, 2 * b + 1
            H[a, b] = 0.25 * (d2(xa, xb) + d2(ya, yb) + 1j * (d2(xa, yb) - d2(ya, xb)))
    return H


def log_bergman(kind: str, m: int, n: int):
    def f(u):
        w, z = u[:m], u[m:]
        if kind == "polydisc":
            return float(-2 * np.sum(np.log(1 - np.abs(z) ** 2)) - n * math.log(math.pi))
        sw = 1 - np.sum(np.abs(w) ** 2)
        s = sw - np.sum(np.abs(z) ** 2)
        return float(math.log(math.factorial(n) / math.pi**n) + math.log(sw) - (n + 1) * math.log(s))

    return f


def dh_density_quadrature(a: float, n: int = 2, grid: int = 20001) -> float:
    """f(a) for the diagonal action on D^n, n = 2, with mu_L = -2 pi (t1 + t2).

    The Liouville form is dt1 dtheta1 dt2 dtheta2, so the pushforward CDF
    F(s) = (2 pi)^2 area{t1 + t2 <= s} is integrated with the trapezoid rule
    and differentiated numerically in a.
    """
    if n != 2:
        raise ValueError("quadrature oracle implemented for n = 2")

    def F(b):
        s = -b / (2 * math.pi)
        t = np.linspace(0, s, grid)
        return (2 * math.pi) ** 2 * np.trapezoid(np.maximum(s - t, 0.0), t)

    da = 1e-4
    return float(-(F(a + da) - F(a - da)) / (2 * da))


def subsets(n: int):
    for k in range(n + 1):
        yield from itertools.combinations(range(1, n + 1), k)
