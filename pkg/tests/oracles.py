"""Independent floating-point oracles.

Nothing here imports hfkit; forms are dense antisymmetric numpy tensors and
cohomology is computed from a float Chevalley-Eilenberg matrix.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def perm_sign(p) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def tensor(n: int, comps: dict[tuple[int, ...], complex], k: int) -> np.ndarray:
    """Dense antisymmetric tensor from ``{(i1<...<ik): c}`` with 0-based indices.

    Normalised so that ``T[i1,...,ik] = c`` (form evaluated on basis vectors).
    """
    t = np.zeros((n,) * k, dtype=complex)
    for idx, c in comps.items():
        for p in itertools.permutations(range(k)):
            t[tuple(idx[q] for q in p)] += perm_sign(p) * c
    return t


def components(t: np.ndarray) -> dict[tuple[int, ...], complex]:
    k = t.ndim
    n = t.shape[0] if k else 0
    out = {}
    for idx in itertools.combinations(range(n), k):
        c = t[idx]
        if abs(c) > 1e-12:
            out[idx] = complex(c)
    return out


def wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a^b)(v_1..v_{p+q}) = 1/(p!q!) sum_s sgn(s) a(...) b(...)``."""
    p, q = a.ndim, b.ndim
    outer = np.multiply.outer(a, b)
    k = p + q
    acc = np.zeros_like(outer)
    for perm in itertools.permutations(range(k)):
        acc += perm_sign(perm) * np.transpose(outer, perm)
    return acc / (math.factorial(p) * math.factorial(q))


def interior(v: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.tensordot(v, a, axes=(0, 0))


def betti(n: int, d: dict[int, dict[tuple[int, int], float]]) -> list[int]:
    """Betti numbers of the complex with ``d e_k = sum c e_ij`` (0-based)."""

    def dform(I):
        out = {}
        for pos, i in enumerate(I):
            for (a, b), c in d.get(i, {}).items():
                J = list(I[:pos]) + [a, b] + list(I[pos + 1:])
                if len(set(J)) < len(J):
                    continue
                order = sorted(range(len(J)), key=lambda t: J[t])
                key = tuple(sorted(J))
                out[key] = out.get(key, 0) + (-1) ** pos * perm_sign(order) * c
        return out

    ranks = []
    for k in range(n + 1):
        src = list(itertools.combinations(range(n), k))
        dst = list(itertools.combinations(range(n), k + 1))
        if not dst:
            ranks.append(0)
            continue
        m = np.zeros((len(dst), len(src)))
        for j, I in enumerate(src):
            for key, c in dform(I).items():
                m[dst.index(key), j] += c
        ranks.append(np.linalg.matrix_rank(m) if m.size else 0)
    return [math.comb(n, k) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(n + 1)]


def nijenhuis_coordinate(Jfun, x: np.ndarray, h: float = 1e-5) -> dict[tuple[int, int], np.ndarray]:
    """``N_J(d_a, d_b)`` at ``x`` for a matrix field ``J(x)`` (``J[i][j]`` = i-th component of J d_j).

    Uses central differences; N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y] on
    coordinate vector fields.
    """
    n = len(x)
    J = Jfun(x)
    dJ = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dJ.append((Jfun(x + e) - Jfun(x - e)) / (2 * h))  # d_k J

    def dirderiv(vfield_coeffs, w):
        # derivative of the constant-coefficient combination J.e_j along w
        return sum(w[k] * vfield_coeffs[k] for k in range(n))

    out = {}
    for a in range(n):
        for b in range(a + 1, n):
            X = np.eye(n)[a]
            Y = np.eye(n)[b]
            JX, JY = J @ X, J @ Y
            # [U,V] = U(V) - V(U) for fields U = J e_a, V = J e_b
            dJY = [dJ[k] @ Y for k in range(n)]
            dJX = [dJ[k] @ X for k in range(n)]
            br_JX_JY = dirderiv(dJY, JX) - dirderiv(dJX, JY)
            br_JX_Y = -dirderiv(dJX, Y)
            br_X_JY = dirderiv(dJY, X)
            N = br_JX_JY - J @ br_JX_Y - J @ br_X_JY
            out[(a, b)] = N
    return out
