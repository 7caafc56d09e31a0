"""Prime-field arithmetic and a systematic Cauchy MDS code.

A payload is a 1-D integer array whose entries are field elements. The
generator is ``[I_k ; C]`` with ``C`` a Cauchy matrix, so every ``k x k``
submatrix is invertible and any ``k`` of the ``n`` chunks recover the source.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

P = 65537  # 2**16 + 1, prime


class SingularSubsetError(RuntimeError):
    """A k-subset of generator rows was singular; the code is not MDS."""


def inv(a: int, p: int = P) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("0 has no inverse")
    return pow(a, p - 2, p)


def add(a, b, p: int = P):
    return (a + b) % p


def mul(a, b, p: int = P):
    return (a * b) % p


@dataclass(frozen=True)
class Chunk:
    index: int  # 1-based symbol index
    payload: np.ndarray


class MdsCode:
    def __init__(self, n: int, k: int, p: int = P):
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n (got n={n}, k={k})")
        if n > p:
            raise ValueError(f"n={n} exceeds field order {p}")
        self.n, self.k, self.p = n, k, p
        self.generator = self._systematic_cauchy()

    def _systematic_cauchy(self) -> np.ndarray:
        n, k, p = self.n, self.k, self.p
        G = np.zeros((n, k), dtype=np.int64)
        G[:k] = np.eye(k, dtype=np.int64)
        # parity row i uses x_i = k + i, column j uses y_j = j; all n values distinct,
        # so every difference x_i - y_j lies in [1:n-1]
        table = np.array([0] + [inv(d, p) for d in range(1, n)], dtype=np.int64)
        diff = (k + np.arange(n - k))[:, None] - np.arange(k)[None, :]
        G[k:] = table[diff]
        return G

    def __repr__(self) -> str:
        return f"MdsCode(n={self.n}, k={self.k}, p={self.p})"


def _stack(payloads: Sequence[np.ndarray]) -> np.ndarray:
    lengths = {len(x) for x in payloads}
    if len(lengths) > 1:
        raise ValueError(f"payloads have unequal lengths {sorted(lengths)}")
    return np.array([np.asarray(x, dtype=np.int64) for x in payloads], dtype=np.int64).reshape(
        len(payloads), -1
    )


def _matmul_mod(A: np.ndarray, X: np.ndarray, p: int) -> np.ndarray:
    # entries < 2**17 so each product < 2**34; accumulate in blocks to stay in int64
    out = np.zeros((A.shape[0], X.shape[1]), dtype=np.int64)
    step = 1 << 12
    for s in range(0, A.shape[1], step):
        out = (out + A[:, s : s + step] @ X[s : s + step]) % p
    return out


def mds_encode(code: MdsCode, source: Sequence[np.ndarray]) -> list[Chunk]:
    if len(source) != code.k:
        raise ValueError(f"expected {code.k} source payloads, got {len(source)}")
    X = _stack(source)
    if X.size and (X.min() < 0 or X.max() >= code.p):
        raise ValueError("source entries must be field elements")
    Y = _matmul_mod(code.generator, X, code.p)
    return [Chunk(j + 1, Y[j]) for j in range(code.n)]


def solve_mod(A: np.ndarray, Y: np.ndarray, p: int = P) -> np.ndarray:
    """Solve ``A X = Y`` over GF(p) by Gauss-Jordan elimination."""
    A = A.copy() % p
    Y = Y.copy() % p
    m = A.shape[0]
    for col in range(m):
        nz = np.nonzero(A[col:, col])[0]
        if len(nz) == 0:
            raise SingularSubsetError(f"singular system at column {col}")
        piv = col + nz[0]
        if piv != col:
            A[[col, piv]] = A[[piv, col]]
            Y[[col, piv]] = Y[[piv, col]]
        f = inv(int(A[col, col]), p)
        A[col] = (A[col] * f) % p
        Y[col] = (Y[col] * f) % p
        others = np.nonzero(A[:, col])[0]
        others = others[others != col]
        if len(others):
            # columns left of col are already reduced
            coef = A[others, col][:, None]
            A[others, col:] = (A[others, col:] - coef * A[col, col:]) % p
            Y[others] = (Y[others] - coef * Y[col]) % p
    return Y


def mds_decode(code: MdsCode, chunks: Sequence[Chunk]) -> list[np.ndarray]:
    """Recover the ``k`` source payloads from exactly ``k`` distinct chunks."""
    idx = [c.index for c in chunks]
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate chunk indices in {idx}")
    if len(idx) != code.k:
        raise ValueError(f"need exactly {code.k} chunks, got {len(idx)}")
    if any(not 1 <= j <= code.n for j in idx):
        raise ValueError(f"chunk index outside [1:{code.n}]")
    Y = _stack([c.payload for c in chunks])
    if idx == list(range(1, code.k + 1)):
        return list(Y)
    k, p = code.k, code.p
    sys_rows = [t for t, j in enumerate(idx) if j <= k]
    par_rows = [t for t, j in enumerate(idx) if j > k]
    X = np.zeros((k, Y.shape[1]), dtype=np.int64)
    known = [idx[t] - 1 for t in sys_rows]
    X[known] = Y[sys_rows]
    missing = sorted(set(range(k)) - set(known))
    # parity rows minus the contribution of the systematic chunks we already hold
    G = code.generator[[idx[t] - 1 for t in par_rows]]
    rhs = (Y[par_rows] - _matmul_mod(G[:, known], X[known], p)) % p
    X[missing] = solve_mod(G[:, missing], rhs, p)
    return list(X)
