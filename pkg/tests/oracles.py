"""Independent oracles used by the test suite.

Deliberately naive implementations (exhaustive enumeration, dense matrix
exponentials) kept free of any package internals they are checking.
"""

import numpy as np
from scipy.linalg import expm


def brute_force_mis(n_vertices, edges):
    """Maximum independent set by enumerating all 2^N selections.

    Returns (size, set of selection masks of that size).
    """
    best = 0
    winners = set()
    edge_list = list(edges)
    for mask in range(2**n_vertices):
        ok = True
        for i, j in edge_list:
            if (mask >> i) & 1 and (mask >> j) & 1:
                ok = False
                break
        if not ok:
            continue
        size = bin(mask).count("1")
        if size > best:
            best = size
            winners = {mask}
        elif size == best:
            winners.add(mask)
    return best, winners


def dense_hamiltonian(positions, omega, delta, c6):
    """H = omega/2 sum sigma_x - delta sum n + sum C6/r^6 n n, dense."""
    positions = np.asarray(positions, dtype=float)
    n = len(positions)
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for z in range(dim):
        diag = 0.0
        for i in range(n):
            if (z >> i) & 1:
                diag -= delta
                for j in range(i + 1, n):
                    if (z >> j) & 1:
                        r = np.linalg.norm(positions[i] - positions[j])
                        diag += c6 / r**6
        h[z, z] = diag
        for i in range(n):
            h[z, z ^ (1 << i)] += omega / 2.0
    return h


def expm_propagate(positions, segments, psi0, c6):
    """Piecewise-constant evolution by dense matrix exponentials.

    ``segments`` is a list of (duration, omega, delta).
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    for duration, omega, delta in segments:
        h = dense_hamiltonian(positions, omega, delta, c6)
        psi = expm(-1j * h * duration) @ psi
    return psi


def _lindblad_ops(n, t1, t2):
    """Per-qubit collapse operators: decay at 1/T1, dephasing via sqrt(2
    gamma_phi) n with gamma_phi = 1/T2 - 1/(2 T1)."""
    gamma1 = 1.0 / t1
    gamma_phi = max(1.0 / t2 - 0.5 / t1, 0.0)
    ops = []
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])     # |0><1|
    num = np.array([[0.0, 0.0], [0.0, 1.0]])
    for q in range(n):
        for local, rate in ((sm, gamma1), (num, 2.0 * gamma_phi)):
            full = np.eye(1)
            for i in range(n - 1, -1, -1):      # qubit 0 = least-significant
                full = np.kron(full, local if i == q else np.eye(2))
            ops.append(np.sqrt(rate) * full)
    return ops


def lindblad_propagate(positions, segments, rho0, t1, t2, c6):
    """Master-equation evolution via the vectorized Liouvillian."""
    n = len(positions)
    dim = 2**n
    rho = np.asarray(rho0, dtype=complex).reshape(dim * dim)
    ops = _lindblad_ops(n, t1, t2)
    eye = np.eye(dim)
    # row-stacking convention: vec(A rho B) = (A kron B^T) vec(rho)
    for duration, omega, delta in segments:
        h = dense_hamiltonian(positions, omega, delta, c6)
        liou = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for L in ops:
            liou += np.kron(L, L.conj())
            ldl = L.conj().T @ L
            liou -= 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T))
        rho = expm(liou * duration) @ rho
    return rho.reshape(dim, dim)
