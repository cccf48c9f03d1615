"""Dense complex linear algebra for small registers."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from mlqcc.errors import DimensionMismatch, NotHermitian

HERMITIAN_ATOL = 1e-8


def as_matrix(a, *, square: bool = False) -> np.ndarray:
    """Coerce ``a`` to a finite complex128 2-D array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def tensor(a, b, *more) -> np.ndarray:
    """Kronecker product of two or more operators (or vectors)."""
    out = np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))
    for m in more:
        out = np.kron(out, np.asarray(m, dtype=np.complex128))
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def is_unitary(u, atol: float = 1e-9) -> bool:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0))


def hermitian_residual(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T), initial=0.0))


def jacobi_eigh(h, tol: float = 1e-12, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each pair (p, q) is annihilated by a phase fix that makes the pivot real,
    followed by a real Givens rotation. Sweeps continue until the off-diagonal
    Frobenius norm drops below ``tol * max(1, ||h||_F)``.

    Returns:
        (eigenvalues, eigenvectors) with eigenvalues in descending order and
        eigenvectors as columns.
    """
    a = as_matrix(h, square=True).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                c = a[p, q]
                mag = abs(c)
                if mag <= 1e-300:
                    continue
                phase = c / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                cs = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * cs
                # columns p, q transform by D @ R with D = diag(1, conj(phase))
                g = np.array([[cs, sn], [-sn * np.conj(phase), cs * np.conj(phase)]])
                cols = a[:, [p, q]] @ g
                a[:, [p, q]] = cols
                rows = g.conj().T @ a[[p, q], :]
                a[[p, q], :] = rows
                a[p, q] = a[q, p] = 0.0
                v[:, [p, q]] = v[:, [p, q]] @ g
    w = np.real(np.diag(a))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def hermitian_eig(h, *, method: str = "lapack", atol: float = HERMITIAN_ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    ``method="lapack"`` delegates to ``numpy.linalg.eigh``; ``method="jacobi"``
    runs :func:`jacobi_eigh`. Both return ``(eigenvalues, V)`` with
    ``h = V diag(eigenvalues) V^dagger``.
    """
    m = as_matrix(h, square=True)
    res = hermitian_residual(m)
    if res > atol:
        raise NotHermitian(f"matrix is not Hermitian (max |H - H^dagger| = {res:.3e})")
    m = 0.5 * (m + m.conj().T)
    if method == "jacobi":
        return jacobi_eigh(m)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    w, v = np.linalg.eigh(m)
    return w[::-1].copy(), v[:, ::-1].copy()


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix (tiny negative eigenvalues clipped)."""
    w, v = hermitian_eig(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def _axes_order(n: int, keep: Sequence[int]) -> list[int]:
    return list(keep) + [i for i in range(n) if i not in keep]


def partial_trace_matrix(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep`` (indices kept in given order)."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(mat).reshape(dims + dims)
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum(t, row + col, out).reshape(dk, dk)


def reduced_from_vector(psi: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of the pure state ``psi`` on the ``keep`` factors."""
    dims = list(dims)
    n = len(dims)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    t = np.asarray(psi).reshape(dims).transpose(_axes_order(n, keep)).reshape(dk, -1)
    return t @ t.conj().T


def embed_operator(op: np.ndarray, dims: Sequence[int], targets: Sequence[int]) -> np.ndarray:
    """Lift ``op`` acting on factors ``targets`` (in that order) to the full space."""
    dims = list(dims)
    n = len(dims)
    targets = list(targets)
    dt = int(np.prod([dims[i] for i in targets])) if targets else 1
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (dt, dt):
        raise DimensionMismatch(f"operator shape {op.shape} does not match target dimension {dt}")
    if targets == list(range(n)):
        return op.copy()
    rest = [i for i in range(n) if i not in targets]
    drest = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(drest))
    # full acts on ordering targets+rest; permute back to layout order
    order = targets + rest
    tdims = [dims[i] for i in order]
    inv = np.argsort(order)
    t = full.reshape(tdims + tdims)
    t = t.transpose(list(inv) + [n + i for i in inv])
    d = int(np.prod(dims))
    return t.reshape(d, d)
