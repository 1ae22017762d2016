"""Small dense-matrix helpers for quantum channels.

Conventions: operators are vectorised row-major, so ``vec(A)[i*n + j] = A[i, j]``.
A superoperator ``S`` maps ``vec(rho)`` to ``vec(K(rho))``. The Choi matrix of
a channel from dimension ``din`` to ``dout`` is
``J[(i, a), (j, b)] = K(|i><j|)[a, b]`` (input factor first), so the identity
channel has ``J = din * |Phi+><Phi+|``.
"""
import numpy as np

__all__ = [
    "apply_kraus",
    "kraus_superop",
    "superop_to_choi",
    "choi_to_superop",
    "kraus_to_choi",
    "choi_to_kraus",
    "tp_deviation",
    "kraus_completeness_deviation",
    "min_eigenvalue",
    "trace_distance",
    "partial_trace",
    "identity_choi",
    "is_density_matrix",
]


def apply_kraus(kraus, rho):
    return sum(K @ rho @ K.conj().T for K in kraus)


def kraus_superop(kraus):
    return sum(np.kron(K, K.conj()) for K in kraus)


def superop_to_choi(S, din, dout):
    S = np.asarray(S).reshape(dout, dout, din, din)
    return S.transpose(2, 0, 3, 1).reshape(din * dout, din * dout)


def choi_to_superop(J, din, dout):
    J = np.asarray(J).reshape(din, dout, din, dout)
    return J.transpose(1, 3, 0, 2).reshape(dout * dout, din * din)


def kraus_to_choi(kraus):
    dout, din = kraus[0].shape
    return superop_to_choi(kraus_superop(kraus), din, dout)


def choi_to_kraus(J, din, dout, tol=1e-12):
    """Kraus operators from the eigendecomposition of a Choi matrix."""
    J = (J + J.conj().T) / 2
    w, v = np.linalg.eigh(J)
    keep = w > tol
    # column v[(i, a)] reshaped to (din, dout) then transposed gives K[a, i]
    return [np.sqrt(x) * v[:, m].reshape(din, dout).T for m, x in zip(np.nonzero(keep)[0], w[keep])]


def tp_deviation(J, din, dout):
    """Largest entry of ``tr_out(J) - I``."""
    reduced = np.trace(J.reshape(din, dout, din, dout), axis1=1, axis2=3)
    return float(np.abs(reduced - np.eye(din)).max())


def kraus_completeness_deviation(kraus):
    din = kraus[0].shape[1]
    total = sum(K.conj().T @ K for K in kraus)
    return float(np.abs(total - np.eye(din)).max())


def min_eigenvalue(H):
    return float(np.linalg.eigvalsh((H + H.conj().T) / 2).min())


def trace_distance(a, b):
    return 0.5 * float(np.abs(np.linalg.eigvalsh((a - b + (a - b).conj().T) / 2)).sum())


def partial_trace(rho, dims, keep):
    """Trace out every factor not listed in ``keep``."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    dk = int(np.prod([dims[i] for i in keep]))
    return np.einsum("".join(row) + "".join(col) + "->" + out, t).reshape(dk, dk)


def identity_choi(d):
    v = np.eye(d).reshape(-1)
    return np.outer(v, v).astype(np.complex128)


def is_density_matrix(rho, tol=1e-9):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.abs(rho - rho.conj().T).max() > tol:
        return False
    return abs(np.trace(rho) - 1) < 1e-10 and min_eigenvalue(rho) > -tol
