"""Entropies, mutual informations, distances and the Uhlmann unitary.

All logarithms are base 2.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from mlqcc.errors import DimensionMismatch, InvalidState, OutOfRange, OverlappingParts, UnknownRegister
from mlqcc.qim.linalg import hermitian_eig, partial_trace_matrix
from mlqcc.qim.states import CqEnsemble, DensityOperator, PureState, RegisterLayout, as_density

CLIP_ATOL = 1e-10
INVALID_ATOL = 1e-8


def entropy_from_eigenvalues(w: np.ndarray) -> float:
    """-sum w log2 w with roundoff negatives clipped; raises on real negatives."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -INVALID_ATOL:
        raise InvalidState(f"eigenvalue {w.min()!r} below -{INVALID_ATOL}")
    w = np.clip(w, 0.0, 1.0)
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def matrix_entropy(m: np.ndarray) -> float:
    """Entropy of a PSD matrix (not necessarily unit trace) in bits."""
    if m.shape == (1, 1):
        return entropy_from_eigenvalues(np.real(m[0]))
    w, _ = hermitian_eig(m)
    return entropy_from_eigenvalues(w)


def von_neumann_entropy(rho) -> float:
    if isinstance(rho, PureState):
        return 0.0
    return matrix_entropy(as_density(rho).matrix)


def _parts(layout: RegisterLayout, *parts: Iterable[str]) -> list[set[str]]:
    sets = [set(p) for p in parts]
    for s in sets:
        for name in s:
            if name not in layout:
                raise UnknownRegister(name, layout.names)
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            common = sets[i] & sets[j]
            if common:
                raise OverlappingParts(f"register(s) {sorted(common)} appear in more than one part")
    return sets


def _subset_entropy(state, names: set[str]) -> float:
    if not names:
        return 0.0
    return von_neumann_entropy(state.reduced(names))


def mutual_information(rho, part_a: Iterable[str], part_b: Iterable[str]) -> float:
    """I(A:B) = S(A) + S(B) - S(AB)."""
    a, b = _parts(rho.layout, part_a, part_b)
    return _subset_entropy(rho, a) + _subset_entropy(rho, b) - _subset_entropy(rho, a | b)


def conditional_mi(rho, part_a: Iterable[str], part_b: Iterable[str], part_c: Iterable[str]) -> float:
    """I(A:B|C) = I(A:BC) - I(A:C)."""
    a, b, c = _parts(rho.layout, part_a, part_b, part_c)
    return mutual_information(rho, a, b | c) - mutual_information(rho, a, c)


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of rho - sigma."""
    r, s = as_density(rho), as_density(sigma)
    if r.layout.dims != s.layout.dims:
        raise DimensionMismatch(f"layouts {r.layout.dims} and {s.layout.dims} differ")
    w, _ = hermitian_eig(r.matrix - s.matrix)
    return float(min(1.0, 0.5 * np.sum(np.abs(w))))


def pure_trace_distance(psi: PureState, phi: PureState) -> float:
    """sqrt(1 - |<psi|phi>|^2), the trace distance between two pure states."""
    ov = abs(np.vdot(psi.amplitudes, phi.amplitudes))
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, ov) ** 2)))


def _psd_factor(m: np.ndarray, rel: float = 1e-12) -> np.ndarray:
    """A with m = A A^dagger, dropping eigenvalues below ``rel`` times the largest."""
    w, v = hermitian_eig(m)
    keep = w > rel * max(1.0, float(w[0]))
    return v[:, keep] * np.sqrt(w[keep])


def fidelity(rho, sigma) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)) (root fidelity).

    Evaluated as the nuclear norm of A^dagger B for factorizations
    rho = A A^dagger and sigma = B B^dagger, which avoids square roots of
    round-off eigenvalues when either state is rank deficient.
    """
    r, s = as_density(rho), as_density(sigma)
    if r.layout.dims != s.layout.dims:
        raise DimensionMismatch(f"layouts {r.layout.dims} and {s.layout.dims} differ")
    a, b = _psd_factor(r.matrix), _psd_factor(s.matrix)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return 0.0
    return float(min(1.0, np.sum(np.linalg.svd(a.conj().T @ b, compute_uv=False))))


def uhlmann_unitary(phi0: PureState, phi1: PureState, act_on: Iterable[str]) -> np.ndarray:
    """Unitary V on ``act_on`` maximizing |<phi0|(V x I)|phi1>|.

    With K = Tr_rest |phi1><phi0| on the ``act_on`` factors and SVD
    K = U S W^dagger, V = W U^dagger attains |Tr(V K)| = ||K||_1, which equals
    the fidelity of the two states reduced to the remaining registers.
    """
    if phi0.layout != phi1.layout:
        raise DimensionMismatch("states must share a layout")
    layout = phi0.layout
    names = set(act_on)
    if not names:
        raise ValueError("act_on must name at least one register")
    keep = layout.indices(names)
    n = len(layout)
    rest = [i for i in range(n) if i not in keep]
    dk = int(np.prod([layout.dims[i] for i in keep]))
    order = keep + rest
    t0 = phi0.amplitudes.reshape(layout.dims).transpose(order).reshape(dk, -1)
    t1 = phi1.amplitudes.reshape(layout.dims).transpose(order).reshape(dk, -1)
    k = t1 @ t0.conj().T
    u, _, wh = np.linalg.svd(k)
    return wh.conj().T @ u.conj().T


def binary_entropy(p) -> float | np.ndarray:
    """h2(p) = -p log2 p - (1-p) log2(1-p), with 0 log 0 = 0."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
        raise OutOfRange(f"binary_entropy argument outside [0,1]: {p!r}")
    arr = np.clip(arr, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -arr * np.log2(arr) - (1 - arr) * np.log2(1 - arr)
    h = np.where((arr == 0) | (arr == 1), 0.0, h)
    return float(h) if np.ndim(h) == 0 else h


def binary_entropy_inv(y, iterations: int = 60) -> float | np.ndarray:
    """Inverse of h2 restricted to [0, 1/2], by bisection."""
    arr = np.asarray(y, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
        raise OutOfRange(f"binary_entropy_inv argument outside [0,1]: {y!r}")
    arr = np.clip(arr, 0.0, 1.0)
    lo = np.zeros_like(arr)
    hi = np.full_like(arr, 0.5)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = binary_entropy(mid) < arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = np.where(arr >= 1.0, 0.5, np.where(arr <= 0.0, 0.0, 0.5 * (lo + hi)))
    return float(x) if np.ndim(x) == 0 else x


# --- classical-quantum entropies ------------------------------------------


def _cq_entropy(ens: CqEnsemble, weights: np.ndarray, classical: Sequence[str], quantum: Sequence[str]) -> float:
    """Entropy of the joint (classical coords, quantum registers) marginal.

    The cq state is block diagonal in the classical values, so the entropy is
    the sum of the (unnormalized) block entropies.
    """
    layout = ens.layout
    qidx = layout.indices(quantum)
    if classical:
        cols = [ens.coord_index(c) for c in classical]
        keys = ens.labels[:, cols]
        _, groups = np.unique(keys, axis=0, return_inverse=True)
        groups = groups.reshape(-1)
    else:
        groups = np.zeros(len(ens), dtype=np.int64)
    total = 0.0
    for g in np.unique(groups):
        sel = (groups == g) & (weights > 0)
        if not np.any(sel):
            continue
        w = weights[sel]
        if not qidx:
            total += entropy_from_eigenvalues(np.array([w.sum()]))
            continue
        total += matrix_entropy(_weighted_reduced(ens, sel, w, qidx))
    return total


def _weighted_reduced(ens: CqEnsemble, sel: np.ndarray, w: np.ndarray, qidx: list[int]) -> np.ndarray:
    layout = ens.layout
    dims = list(layout.dims)
    n = len(dims)
    dq = int(np.prod([dims[i] for i in qidx]))
    if ens.is_pure:
        order = qidx + [i for i in range(n) if i not in qidx]
        psi = ens.states[sel].reshape([-1] + dims).transpose([0] + [i + 1 for i in order]).reshape(len(w), dq, -1)
        psi = psi * np.sqrt(w)[:, None, None]
        return np.einsum("lij,lkj->ik", psi, psi.conj())
    acc = np.zeros((dq, dq), dtype=np.complex128)
    for wi, m in zip(w, ens.states[sel]):
        acc += wi * partial_trace_matrix(m, dims, qidx)
    return acc


def _split(ens: CqEnsemble, names: Iterable[str]) -> tuple[list[str], list[str]]:
    classical, quantum = [], []
    for n in names:
        if n in ens.coords:
            classical.append(n)
        elif n in ens.layout:
            quantum.append(n)
        else:
            raise UnknownRegister(n, ens.coords + ens.layout.names)
    return classical, quantum


def classical_conditional_mi(
    ens: CqEnsemble,
    part_a: Iterable[str],
    part_b: Iterable[str],
    cond: Sequence[str] = (),
    quantum_cond: Iterable[str] = (),
) -> float:
    """I(A:B | C) for a cq-ensemble, conditioning on classical coordinates.

    Computes sum_c p_c I(A^c : B^c) (or I(A^c : B^c | Q^c) when
    ``quantum_cond`` names registers). ``part_a`` and ``part_b`` may mix
    classical coordinate names and quantum register names. Zero-probability
    branches are skipped.
    """
    a, b, qc = set(part_a), set(part_b), set(quantum_cond)
    cset = set(cond)
    all_sets = [a, b, cset, qc]
    for i in range(4):
        for j in range(i + 1, 4):
            if all_sets[i] & all_sets[j]:
                raise OverlappingParts(f"parts overlap on {sorted(all_sets[i] & all_sets[j])}")
    ac, aq = _split(ens, a)
    bc, bq = _split(ens, b)
    qcc, qcq = _split(ens, qc)
    if qcc:
        raise ValueError("quantum_cond must name quantum registers only")
    cond = list(cond)
    if cond:
        cols = [ens.coord_index(c) for c in cond]
        _, groups = np.unique(ens.labels[:, cols], axis=0, return_inverse=True)
        groups = groups.reshape(-1)
    else:
        groups = np.zeros(len(ens), dtype=np.int64)
    total = 0.0
    for g in np.unique(groups):
        sel = groups == g
        pc = ens.probs[sel].sum()
        if pc <= 0:
            continue
        w = np.where(sel, ens.probs / pc, 0.0)

        def s(cl, qu):
            return _cq_entropy(ens, w, cl, qu)

        if qcq:
            val = (
                s(ac, aq + qcq) + s(bc, bq + qcq) - s(ac + bc, aq + bq + qcq) - s([], qcq)
            )
        else:
            val = s(ac, aq) + s(bc, bq) - s(ac + bc, aq + bq)
        total += pc * val
    return float(total)


def cq_mutual_information(ens: CqEnsemble, part_a: Iterable[str], part_b: Iterable[str]) -> float:
    return classical_conditional_mi(ens, part_a, part_b)


def embed_classical(ens: CqEnsemble, classical: Sequence[str], quantum: Sequence[str], prefix: str = "") -> DensityOperator:
    """Density operator sum_l p_l |c_l><c_l| (x) rho_l with classical coordinates as registers."""
    qidx = ens.layout.indices(quantum)
    cdims = [ens.alphabet(c) for c in classical]
    layout = RegisterLayout([(prefix + c, d) for c, d in zip(classical, cdims)]).concat(ens.layout.sub(quantum))
    dq = ens.layout.dim_of(quantum) if quantum else 1
    dc = int(np.prod(cdims)) if cdims else 1
    mat = np.zeros((dc * dq, dc * dq), dtype=np.complex128)
    cols = [ens.coord_index(c) for c in classical]
    keys = ens.labels[:, cols] if cols else np.zeros((len(ens), 0), dtype=np.int64)
    flat = np.ravel_multi_index(keys.T, cdims) if cols else np.zeros(len(ens), dtype=np.int64)
    for v in np.unique(flat):
        sel = (flat == v) & (ens.probs > 0)
        if not np.any(sel):
            continue
        if qidx:
            block = _weighted_reduced(ens, sel, ens.probs[sel], qidx)
        else:
            block = np.array([[ens.probs[sel].sum()]], dtype=np.complex128)
        mat[v * dq:(v + 1) * dq, v * dq:(v + 1) * dq] = block
    return DensityOperator(layout, mat, check=False)
