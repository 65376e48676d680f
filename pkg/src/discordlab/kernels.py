"""Compiled inner loops for the measure optimizers.

These mirror the generic constructions in :mod:`discordlab.qmath` and
:mod:`discordlab.measures` for the fixed shapes that dominate the runtime
(states of dimension 4, dilations of dimension 8). The generic code is the
reference; the unit tests pin the two paths together on random inputs.

Conventions match the rest of the package: classical-quantum parameter
vectors are ``[theta, phi, p, r0x, r0y, r0z, r1x, r1y, r1z]`` with Bloch
vectors clamped into the unit ball, and eigenvalues at or below
``SUPPORT_CUTOFF`` count as zero.
"""

from __future__ import annotations

import numpy as np
from numba import njit

SUPPORT_CUTOFF = 1e-12


@njit(cache=True)
def _measurement_kets(theta: float, phi: float):
    c = np.cos(theta)
    s = np.sin(theta)
    e = np.cos(phi) + 1j * np.sin(phi)
    v0 = np.empty(2, dtype=np.complex128)
    v1 = np.empty(2, dtype=np.complex128)
    v0[0], v0[1] = c, e * s
    v1[0], v1[1] = s, -e * c
    return v0, v1


@njit(cache=True)
def _bloch_qubit(rx: float, ry: float, rz: float):
    nrm = np.sqrt(rx * rx + ry * ry + rz * rz)
    if nrm > 1.0:
        rx, ry, rz = rx / nrm, ry / nrm, rz / nrm
    w = np.empty((2, 2), dtype=np.complex128)
    w[0, 0] = 0.5 * (1.0 + rz)
    w[1, 1] = 0.5 * (1.0 - rz)
    w[0, 1] = 0.5 * (rx - 1j * ry)
    w[1, 0] = 0.5 * (rx + 1j * ry)
    return w


@njit(cache=True)
def _qubit_sqrt(w):
    det = (w[0, 0] * w[1, 1] - w[0, 1] * w[1, 0]).real
    if det < 0.0:
        det = 0.0
    tr = (w[0, 0] + w[1, 1]).real
    root = np.sqrt(det)
    denom_sq = tr + 2.0 * root
    out = np.zeros((2, 2), dtype=np.complex128)
    if denom_sq <= 1e-30:
        return out
    denom = np.sqrt(denom_sq)
    out[0, 0] = (w[0, 0] + root) / denom
    out[1, 1] = (w[1, 1] + root) / denom
    out[0, 1] = w[0, 1] / denom
    out[1, 0] = w[1, 0] / denom
    return out


@njit(cache=True)
def cq_matrix(x):
    """Classical-quantum state p |0'><0'| (x) w0 + (1-p) |1'><1'| (x) w1."""
    p = min(max(x[2], 0.0), 1.0)
    v0, v1 = _measurement_kets(x[0], x[1])
    w0 = _bloch_qubit(x[3], x[4], x[5])
    w1 = _bloch_qubit(x[6], x[7], x[8])
    chi = np.empty((4, 4), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            p0 = p * v0[i] * np.conj(v0[j])
            p1 = (1.0 - p) * v1[i] * np.conj(v1[j])
            for k in range(2):
                for l in range(2):
                    chi[2 * i + k, 2 * j + l] = p0 * w0[k, l] + p1 * w1[k, l]
    return chi


@njit(cache=True)
def cq_sqrt_matrix(x):
    """Square root of the CQ state, assembled blockwise on the orthogonal
    measurement subspaces."""
    p = min(max(x[2], 0.0), 1.0)
    v0, v1 = _measurement_kets(x[0], x[1])
    s0 = np.sqrt(p) * _qubit_sqrt(_bloch_qubit(x[3], x[4], x[5]))
    s1 = np.sqrt(1.0 - p) * _qubit_sqrt(_bloch_qubit(x[6], x[7], x[8]))
    out = np.empty((4, 4), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            p0 = v0[i] * np.conj(v0[j])
            p1 = v1[i] * np.conj(v1[j])
            for k in range(2):
                for l in range(2):
                    out[2 * i + k, 2 * j + l] = p0 * s0[k, l] + p1 * s1[k, l]
    return out


@njit(cache=True)
def bures_objective(x, sqrt_rho):
    """2 (1 - F(rho, chi(x))) with F the Uhlmann fidelity.

    The square root of F is Tr sqrt( sqrt(rho) chi sqrt(rho) ); reporting
    1 - F rather than 1 - sqrt(F) is what puts the Bures discord above the
    Hellinger and Hilbert-Schmidt ones on every state, and is a monotone
    transform, so the minimizer is unchanged.
    """
    chi = cq_matrix(x)
    m = sqrt_rho @ chi @ sqrt_rho
    w = np.linalg.eigvalsh(m)
    total = 0.0
    for i in range(4):
        if w[i] > 0.0:
            total += np.sqrt(w[i])
    val = 2.0 * (1.0 - total * total)
    return val if val > 0.0 else 0.0


@njit(cache=True)
def hellinger_objective(x, sqrt_rho):
    """2 (1 - Tr sqrt(rho) sqrt(chi)) for the CQ state chi(x)."""
    sc = cq_sqrt_matrix(x)
    total = 0.0
    for i in range(4):
        for j in range(4):
            total += (sqrt_rho[i, j] * sc[j, i]).real
    val = 2.0 * (1.0 - total)
    return val if val > 0.0 else 0.0


@njit(cache=True)
def hs_objective(x, rho):
    """Squared Frobenius distance between rho and the CQ state chi(x)."""
    chi = cq_matrix(x)
    total = 0.0
    for i in range(4):
        for j in range(4):
            d = rho[i, j] - chi[i, j]
            total += d.real * d.real + d.imag * d.imag
    return total


@njit(cache=True)
def _power_on_support(m, p, dim):
    w, v = np.linalg.eigh(m)
    out = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(dim):
        if w[k] > SUPPORT_CUTOFF:
            f = w[k] ** p
            for i in range(dim):
                for j in range(dim):
                    out[i, j] += f * v[i, k] * np.conj(v[j, k])
    return out


@njit(cache=True)
def dilation_tau(rho, theta, phi):
    """Isometric dilation of measuring qubit A: order X (x) E (x) B."""
    v0, v1 = _measurement_kets(theta, phi)
    kk = np.zeros((8, 4), dtype=np.complex128)
    for b in range(2):
        for a in range(2):
            kk[0 + b, 2 * a + b] = np.conj(v0[a])   # X=0, E=0 rows
            kk[6 + b, 2 * a + b] = np.conj(v1[a])   # X=1, E=1 rows
    return kk @ rho @ kk.conj().T


@njit(cache=True)
def renyi_cmi_tau(tau, alpha):
    """Renyi conditional mutual information I_alpha(E; B | X) of an XEB state.

    Base-2 logarithm; all fractional powers taken on the support. Small
    negative round-off (above -1e-8) is clamped to zero.
    """
    tau_a = _power_on_support(tau, alpha, 8)

    rho_ex = np.zeros((4, 4), dtype=np.complex128)
    for x1 in range(2):
        for e1 in range(2):
            for x2 in range(2):
                for e2 in range(2):
                    acc = 0.0 + 0.0j
                    for b in range(2):
                        acc += tau[4 * x1 + 2 * e1 + b, 4 * x2 + 2 * e2 + b]
                    rho_ex[2 * x1 + e1, 2 * x2 + e2] = acc
    pw_ex = _power_on_support(rho_ex, 0.5 * (1.0 - alpha), 4)

    ext = np.zeros((8, 8), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            ext[2 * i, 2 * j] = pw_ex[i, j]
            ext[2 * i + 1, 2 * j + 1] = pw_ex[i, j]
    inner = ext @ tau_a @ ext

    mid = np.zeros((4, 4), dtype=np.complex128)
    for x1 in range(2):
        for b1 in range(2):
            for x2 in range(2):
                for b2 in range(2):
                    acc = 0.0 + 0.0j
                    for e in range(2):
                        acc += inner[4 * x1 + 2 * e + b1, 4 * x2 + 2 * e + b2]
                    mid[2 * x1 + b1, 2 * x2 + b2] = acc

    rho_x = np.zeros((2, 2), dtype=np.complex128)
    for x1 in range(2):
        for x2 in range(2):
            acc = 0.0 + 0.0j
            for e in range(2):
                for b in range(2):
                    acc += tau[4 * x1 + 2 * e + b, 4 * x2 + 2 * e + b]
            rho_x[x1, x2] = acc
    pw_x = _power_on_support(rho_x, 0.5 * (alpha - 1.0), 2)

    ext_x = np.zeros((4, 4), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            ext_x[2 * i, 2 * j] = pw_x[i, j]
            ext_x[2 * i + 1, 2 * j + 1] = pw_x[i, j]
    sand = ext_x @ mid @ ext_x

    w = np.linalg.eigvalsh(sand)
    val = 0.0
    for i in range(4):
        if w[i] > SUPPORT_CUTOFF:
            val += w[i] ** (1.0 / alpha)
    if val < 1e-300:
        val = 1e-300
    cmi = alpha / (alpha - 1.0) * np.log2(val)
    if -1e-8 <= cmi < 0.0:
        return 0.0
    return cmi


@njit(cache=True)
def red_objective(x, rho, alpha):
    """Renyi CMI of the dilation at measurement angles x = (theta, phi)."""
    return renyi_cmi_tau(dilation_tau(rho, x[0], x[1]), alpha)


@njit(cache=True)
def conditional_seed(rho, theta, phi):
    """CQ parameters of the state actually measured at (theta, phi).

    Returns the 9-vector [theta, phi, p, r0, r1] built from the outcome
    probability and the conditional Bloch vectors of subsystem B. Used to
    seed the geometric-discord searches.
    """
    v0, v1 = _measurement_kets(theta, phi)
    out = np.empty(9, dtype=np.float64)
    out[0], out[1] = theta, phi
    for branch in range(2):
        v = v0 if branch == 0 else v1
        blk = np.zeros((2, 2), dtype=np.complex128)
        for k in range(2):
            for l in range(2):
                acc = 0.0 + 0.0j
                for a1 in range(2):
                    for a2 in range(2):
                        acc += np.conj(v[a1]) * rho[2 * a1 + k, 2 * a2 + l] * v[a2]
                blk[k, l] = acc
        pb = (blk[0, 0] + blk[1, 1]).real
        if branch == 0:
            out[2] = min(max(pb, 0.0), 1.0)
        if pb > 1e-12:
            rx = 2.0 * blk[1, 0].real / pb
            ry = 2.0 * blk[1, 0].imag / pb
            rz = (blk[0, 0] - blk[1, 1]).real / pb
        else:
            rx, ry, rz = 0.0, 0.0, 0.0
        out[3 + 3 * branch] = rx
        out[4 + 3 * branch] = ry
        out[5 + 3 * branch] = rz
    return out


@njit(cache=True)
def _objective(which, x, mat, alpha):
    if which == 0:
        return bures_objective(x, mat)
    elif which == 1:
        return hellinger_objective(x, mat)
    elif which == 2:
        return hs_objective(x, mat)
    return red_objective(x, mat, alpha)


@njit(cache=True)
def _nm_run(which, mat, alpha, x0, lo, hi, tol, max_evals):
    """Compiled twin of optimize.nelder_mead for the fixed objectives.

    Same algorithm: coefficients 1, 2, 0.5, 0.5, candidates clamped to the
    box before evaluation, termination on max-norm simplex diameter < tol or
    evaluation budget; returns the best point ever evaluated.
    """
    n = x0.size
    evals = 0
    best_f = np.inf
    best_x = np.minimum(np.maximum(x0, lo), hi)

    verts = np.empty((n + 1, n))
    fv = np.empty(n + 1)
    verts[0] = np.minimum(np.maximum(x0, lo), hi)
    for i in range(n):
        step = 0.05 * (hi[i] - lo[i])
        if verts[0, i] + step > hi[i]:
            step = -step
        verts[i + 1] = verts[0]
        verts[i + 1, i] += step
    for i in range(n + 1):
        x = np.minimum(np.maximum(verts[i], lo), hi)
        fx = _objective(which, x, mat, alpha)
        evals += 1
        if fx < best_f:
            best_f = fx
            best_x = x.copy()
        fv[i] = fx

    converged = False
    while evals < max_evals:
        order = np.argsort(fv, kind="mergesort")
        verts = verts[order]
        fv = fv[order]
        diam = 0.0
        for i in range(1, n + 1):
            for j in range(n):
                d = abs(verts[i, j] - verts[0, j])
                if d > diam:
                    diam = d
        if diam < tol:
            converged = True
            break
        centroid = np.zeros(n)
        for i in range(n):
            for j in range(n):
                centroid[j] += verts[i, j]
        centroid /= n

        xr = np.minimum(np.maximum(centroid + (centroid - verts[n]), lo), hi)
        fr = _objective(which, xr, mat, alpha)
        evals += 1
        if fr < best_f:
            best_f = fr
            best_x = xr.copy()
        if fr < fv[0]:
            xe = np.minimum(np.maximum(centroid + 2.0 * (centroid - verts[n]), lo), hi)
            fe = _objective(which, xe, mat, alpha)
            evals += 1
            if fe < best_f:
                best_f = fe
                best_x = xe.copy()
            if fe < fr:
                verts[n], fv[n] = xe, fe
            else:
                verts[n], fv[n] = xr, fr
        elif fr < fv[n - 1]:
            verts[n], fv[n] = xr, fr
        else:
            if fr < fv[n]:
                xc = np.minimum(np.maximum(centroid + 0.5 * (centroid - verts[n]), lo), hi)
                fc = _objective(which, xc, mat, alpha)
                evals += 1
                if fc < best_f:
                    best_f = fc
                    best_x = xc.copy()
                if fc <= fr:
                    verts[n], fv[n] = xc, fc
                else:
                    for i in range(1, n + 1):
                        verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
                        x = np.minimum(np.maximum(verts[i], lo), hi)
                        fx = _objective(which, x, mat, alpha)
                        evals += 1
                        if fx < best_f:
                            best_f = fx
                            best_x = x.copy()
                        fv[i] = fx
            else:
                xcc = np.minimum(np.maximum(centroid - 0.5 * (centroid - verts[n]), lo), hi)
                fcc = _objective(which, xcc, mat, alpha)
                evals += 1
                if fcc < best_f:
                    best_f = fcc
                    best_x = xcc.copy()
                if fcc < fv[n]:
                    verts[n], fv[n] = xcc, fcc
                else:
                    for i in range(1, n + 1):
                        verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
                        x = np.minimum(np.maximum(verts[i], lo), hi)
                        fx = _objective(which, x, mat, alpha)
                        evals += 1
                        if fx < best_f:
                            best_f = fx
                            best_x = x.copy()
                        fv[i] = fx
        if evals >= max_evals:
            break
    return best_x, best_f, converged, evals


@njit(cache=True)
def nm_multistart(which, mat, alpha, starts, lo, hi, tol, max_evals):
    """Polish every start; reduce to the global best, ties to the lowest
    start index. Mirrors optimize.multistart."""
    ns = starts.shape[0]
    svals = np.empty(ns)
    best_x = np.zeros(starts.shape[1])
    best_f = np.inf
    best_conv = False
    total = 0
    for i in range(ns):
        x, f, conv, ev = _nm_run(which, mat, alpha, starts[i], lo, hi, tol, max_evals)
        svals[i] = f
        total += ev
        if f < best_f:
            best_f = f
            best_x = x
            best_conv = conv
    return best_x, best_f, best_conv, total, svals


@njit(cache=True)
def red_grid(rho, alpha, thetas, phis):
    """Renyi CMI on the measurement-angle lattice, in lattice order."""
    vals = np.empty(thetas.size * phis.size)
    idx = 0
    for i in range(thetas.size):
        for j in range(phis.size):
            x = np.empty(2)
            x[0], x[1] = thetas[i], phis[j]
            vals[idx] = red_objective(x, rho, alpha)
            idx += 1
    return vals


@njit(cache=True)
def objective_batch(params, mat, which):
    """Evaluate one geometric objective on many parameter rows.

    ``mat`` is sqrt(rho) for which in (0, 1) and rho itself for which = 2.
    """
    n = params.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        if which == 0:
            out[i] = bures_objective(params[i], mat)
        elif which == 1:
            out[i] = hellinger_objective(params[i], mat)
        else:
            out[i] = hs_objective(params[i], mat)
    return out


@njit(cache=True)
def conditional_seed_grid(rho, sqrt_rho, thetas, phis, which):
    """Evaluate conditionally-seeded CQ states on an angle lattice.

    ``which``: 0 = Bures, 1 = Hellinger, 2 = Hilbert-Schmidt. Returns the
    (n, 9) parameter rows and their objective values, in lattice order.
    """
    n = thetas.size * phis.size
    params = np.empty((n, 9), dtype=np.float64)
    values = np.empty(n, dtype=np.float64)
    idx = 0
    for i in range(thetas.size):
        for j in range(phis.size):
            x = conditional_seed(rho, thetas[i], phis[j])
            params[idx] = x
            if which == 0:
                values[idx] = bures_objective(x, sqrt_rho)
            elif which == 1:
                values[idx] = hellinger_objective(x, sqrt_rho)
            else:
                values[idx] = hs_objective(x, rho)
            idx += 1
    return params, values
