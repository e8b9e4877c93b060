"""Angle-grid enumeration and local polish for the POVM minimization.

Grids are lexicographic in each operation's parameter tuple:

    m=2: (theta, phi)
    m=3: (Theta, Phi, psi, gamma2, gamma3)
    m=4: (Omega, Phi, theta2, phi2, theta3, phi3, theta4, phi4)

Polar angles run over [0, pi] and azimuthal ones over the half-open
[0, 2 pi), so no POVM is enumerated twice along the azimuthal axes. Each
grid point carries a global lexicographic index; minima are folded with
strict comparison and ties broken toward the smaller index, which makes the
result independent of chunking and worker count.

Two structural facts keep the grids tractable: the 3-element weights depend
only on the relative in-plane angles (gamma2, gamma3), and the 4-element
weights do not depend on the global rotation. Feasibility is therefore
resolved once per shape and reused across every orientation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .measures import conditional_entropy_bloch_batch
from .povm import (
    ExtremalPovm,
    PovmElement,
    four_element,
    orthogonal_pair,
    planar_three,
    rotation_from_z,
    weights_four_batch,
    weights_three_batch,
)
from .states import BlochForm
from .tolerances import POLICY

# objective value assigned to rejected (infeasible) parameter tuples; the
# conditional entropy of a qubit never exceeds 1
PENALTY = 3.0

_CHUNK_TARGET = 1 << 17


@dataclass
class Candidate:
    value: float
    index: int
    params: tuple[float, ...]


def polar_values(step: float) -> np.ndarray:
    n = int(math.floor(math.pi / step + 1e-9)) + 1
    return np.arange(n) * step


def azimuthal_values(step: float) -> np.ndarray:
    n = int(math.ceil(2.0 * math.pi / step - 1e-9))
    return np.arange(n) * step


def _select_top(vals: np.ndarray, n_select: int) -> np.ndarray:
    if vals.size <= n_select:
        return np.arange(vals.size)
    return np.argpartition(vals, n_select - 1)[:n_select]


def _run_blocks(blocks, workers: int):
    if workers <= 1:
        return [block() for block in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: b(), blocks))


# ---------------------------------------------------------------------------
# Per-step grid evaluation. Each returns (evaluated_count, candidates).


def eval_step_m2(form: BlochForm, step: float, n_select: int) -> tuple[int, list[Candidate]]:
    thetas = polar_values(step)
    phis = azimuthal_values(step)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    t_flat, p_flat = tt.ravel(), pp.ravel()
    st = np.sin(t_flat)
    n = np.stack([st * np.cos(p_flat), st * np.sin(p_flat), np.cos(t_flat)], axis=-1)
    dirs = np.stack([n, -n], axis=1)
    alphas = np.full((t_flat.size, 2), 0.5)
    vals = conditional_entropy_bloch_batch(form.a, form.b, form.t, alphas, dirs)
    picks = _select_top(vals, n_select)
    cands = [
        Candidate(float(vals[i]), int(i), (float(t_flat[i]), float(p_flat[i])))
        for i in picks
    ]
    return t_flat.size, cands


def _three_shapes(step: float):
    # elements 2 and 3 are interchangeable, so gamma2 <= gamma3 already covers
    # every POVM; duplicates are skipped but keep their full-grid indices
    g_vals = azimuthal_values(step)
    g2g, g3g = np.meshgrid(g_vals, g_vals, indexing="ij")
    g2, g3 = g2g.ravel(), g3g.ravel()
    alphas, feasible = weights_three_batch(g2, g3)
    fs = np.nonzero(feasible & (g2 <= g3))[0]
    gp = np.stack([np.zeros(fs.size), g2[fs], g3[fs]], axis=-1)
    u = np.stack([np.cos(gp), np.sin(gp), np.zeros_like(gp)], axis=-1)
    return g2, g3, fs, alphas[fs], u, g2.size


def eval_step_m3(
    form: BlochForm, step: float, n_select: int, workers: int = 1
) -> tuple[int, list[Candidate]]:
    g2, g3, fs, alphas_f, u, s_total = _three_shapes(step)
    if fs.size == 0:
        return 0, []
    thetas = polar_values(step)
    azims = azimuthal_values(step)
    tt, ff, ss = np.meshgrid(thetas, azims, azims, indexing="ij")
    o_theta, o_phi, o_psi = tt.ravel(), ff.ravel(), ss.ravel()
    n_orient = o_theta.size

    ct, stn = np.cos(o_theta), np.sin(o_theta)
    cp, sp = np.cos(o_phi), np.sin(o_phi)
    e1 = np.stack([ct * cp, ct * sp, -stn], axis=-1)
    e2 = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    normal = np.stack([stn * cp, stn * sp, ct], axis=-1)
    cps, sps = np.cos(o_psi), np.sin(o_psi)
    # rotation columns: (cos psi e1 + sin psi e2, -sin psi e1 + cos psi e2, normal)
    rot = np.stack(
        [
            cps[:, None] * e1 + sps[:, None] * e2,
            -sps[:, None] * e1 + cps[:, None] * e2,
            normal,
        ],
        axis=-1,
    )

    block_orients = max(1, _CHUNK_TARGET // fs.size)
    starts = range(0, n_orient, block_orients)

    def make_block(o0):
        def block():
            o1 = min(o0 + block_orients, n_orient)
            r = rot[o0:o1]
            dirs = np.einsum("cij,smj->csmi", r, u)
            k = (o1 - o0) * fs.size
            vals = conditional_entropy_bloch_batch(
                form.a,
                form.b,
                form.t,
                np.broadcast_to(alphas_f, (o1 - o0, fs.size, 3)).reshape(k, 3),
                dirs.reshape(k, 3, 3),
            )
            picks = _select_top(vals, n_select)
            out = []
            for i in picks:
                c, s = divmod(int(i), fs.size)
                o = o0 + c
                gidx = o * s_total + int(fs[s])
                params = (
                    float(o_theta[o]),
                    float(o_phi[o]),
                    float(o_psi[o]),
                    float(g2[fs[s]]),
                    float(g3[fs[s]]),
                )
                out.append(Candidate(float(vals[i]), gidx, params))
            return k, out

        return block

    results = _run_blocks([make_block(o0) for o0 in starts], workers)
    count = sum(r[0] for r in results)
    cands: list[Candidate] = []
    for r in results:
        cands.extend(r[1])
    return count, cands


def _four_shapes(step: float):
    thetas = polar_values(step)
    azims = azimuthal_values(step)
    nt, na = thetas.size, azims.size
    shape_dims = (nt, na, nt, na, nt, na)
    s_total = int(np.prod(shape_dims))
    zhat = np.array([0.0, 0.0, 1.0])
    u_chunks, a_chunks, idx_chunks = [], [], []
    for s0 in range(0, s_total, _CHUNK_TARGET):
        s1 = min(s0 + _CHUNK_TARGET, s_total)
        idx = np.arange(s0, s1)
        it2, ip2, it3, ip3, it4, ip4 = np.unravel_index(idx, shape_dims)
        # elements 2..4 are interchangeable: sorted polar indices cover every
        # direction set, cutting the shape grid roughly sixfold
        keep_sorted = (it2 <= it3) & (it3 <= it4)
        idx = idx[keep_sorted]
        if idx.size == 0:
            continue
        it2, ip2, it3, ip3 = it2[keep_sorted], ip2[keep_sorted], it3[keep_sorted], ip3[keep_sorted]
        it4, ip4 = it4[keep_sorted], ip4[keep_sorted]
        u = np.empty((idx.size, 4, 3))
        u[:, 0] = zhat
        for col, (it, ip) in enumerate([(it2, ip2), (it3, ip3), (it4, ip4)], start=1):
            t, p = thetas[it], azims[ip]
            st = np.sin(t)
            u[:, col, 0] = st * np.cos(p)
            u[:, col, 1] = st * np.sin(p)
            u[:, col, 2] = np.cos(t)
        alphas, _, feasible = weights_four_batch(u)
        keep = np.nonzero(feasible)[0]
        if keep.size:
            u_chunks.append(u[keep])
            a_chunks.append(alphas[keep])
            idx_chunks.append(idx[keep])
    if not u_chunks:
        return None
    u = np.concatenate(u_chunks)
    alphas = np.concatenate(a_chunks)
    orig = np.concatenate(idx_chunks)
    return u, alphas, orig, s_total, shape_dims, thetas, azims


def eval_step_m4(
    form: BlochForm, step: float, n_select: int, workers: int = 1
) -> tuple[int, list[Candidate]]:
    shapes = _four_shapes(step)
    if shapes is None:
        return 0, []
    u, alphas_f, orig, s_total, shape_dims, thetas, azims = shapes
    omegas = polar_values(step)
    phis = azimuthal_values(step)
    oo, pp = np.meshgrid(omegas, phis, indexing="ij")
    o_om, o_ph = oo.ravel(), pp.ravel()
    n_orient = o_om.size

    block_orients = max(1, _CHUNK_TARGET // u.shape[0])
    starts = range(0, n_orient, block_orients)

    def make_block(o0):
        def block():
            o1 = min(o0 + block_orients, n_orient)
            count = 0
            out = []
            for o in range(o0, o1):
                rot = rotation_from_z(o_om[o], o_ph[o])
                dirs = u @ rot.T
                vals = conditional_entropy_bloch_batch(
                    form.a, form.b, form.t, alphas_f, dirs
                )
                count += vals.size
                for i in _select_top(vals, n_select):
                    gidx = o * s_total + int(orig[i])
                    it2, ip2, it3, ip3, it4, ip4 = np.unravel_index(
                        int(orig[i]), shape_dims
                    )
                    params = (
                        float(o_om[o]),
                        float(o_ph[o]),
                        float(thetas[it2]),
                        float(azims[ip2]),
                        float(thetas[it3]),
                        float(azims[ip3]),
                        float(thetas[it4]),
                        float(azims[ip4]),
                    )
                    out.append(Candidate(float(vals[i]), gidx, params))
            return count, out

        return block

    results = _run_blocks([make_block(o0) for o0 in starts], workers)
    count = sum(r[0] for r in results)
    cands: list[Candidate] = []
    for r in results:
        cands.extend(r[1])
    return count, cands


EVAL_STEP = {2: eval_step_m2, 3: eval_step_m3, 4: eval_step_m4}


# ---------------------------------------------------------------------------
# Scalar objectives for the simplex polish. Plain-float math: the polish
# calls these thousands of times on single parameter vectors, where numpy
# call overhead would dominate.


def _scalar_state(form: BlochForm):
    a = tuple(float(x) for x in form.a)
    b = tuple(float(x) for x in form.b)
    t = tuple(tuple(float(x) for x in row) for row in form.t)
    return a, b, t


def _ce_scalar(a, b, t, alphas, ns) -> float:
    total = 0.0
    for alpha, n in zip(alphas, ns):
        bn = b[0] * n[0] + b[1] * n[1] + b[2] * n[2]
        p = alpha * (1.0 + bn)
        if p < POLICY.probability_cutoff:
            continue
        v0 = a[0] + t[0][0] * n[0] + t[0][1] * n[1] + t[0][2] * n[2]
        v1 = a[1] + t[1][0] * n[0] + t[1][1] * n[1] + t[1][2] * n[2]
        v2 = a[2] + t[2][0] * n[0] + t[2][1] * n[1] + t[2][2] * n[2]
        rnorm = math.sqrt(v0 * v0 + v1 * v1 + v2 * v2) / (1.0 + bn)
        if rnorm > 1.0:
            rnorm = 1.0
        lam_p = 0.5 * (1.0 + rnorm)
        lam_m = 1.0 - lam_p
        h = 0.0
        if lam_p > POLICY.entropy_log_cutoff:
            h -= lam_p * math.log2(lam_p)
        if lam_m > POLICY.entropy_log_cutoff:
            h -= lam_m * math.log2(lam_m)
        total += p * h
    return total


def _params_m2(x):
    theta, phi = x
    st = math.sin(theta)
    n = (st * math.cos(phi), st * math.sin(phi), math.cos(theta))
    return (0.5, 0.5), (n, (-n[0], -n[1], -n[2]))


def _params_m3(x):
    big_t, big_p, psi, g2, g3 = x
    det = math.sin(g3 - g2) - math.sin(g3) + math.sin(g2)
    if abs(det) <= 1e-12:
        return None
    a1 = math.sin(g3 - g2) / det
    a2 = -math.sin(g3) / det
    a3 = math.sin(g2) / det
    if min(a1, a2, a3) <= POLICY.weight_cutoff:
        return None
    ct, st = math.cos(big_t), math.sin(big_t)
    cp, sp = math.cos(big_p), math.sin(big_p)
    e1 = (ct * cp, ct * sp, -st)
    e2 = (-sp, cp, 0.0)
    ns = []
    for g in (psi, psi + g2, psi + g3):
        cg, sg = math.cos(g), math.sin(g)
        ns.append(
            (cg * e1[0] + sg * e2[0], cg * e1[1] + sg * e2[1], cg * e1[2] + sg * e2[2])
        )
    return (a1, a2, a3), tuple(ns)


def _params_m4(x):
    om, ph = x[0], x[1]
    us = [(0.0, 0.0, 1.0)]
    for j in range(3):
        t, p = x[2 + 2 * j], x[3 + 2 * j]
        st = math.sin(t)
        us.append((st * math.cos(p), st * math.sin(p), math.cos(t)))

    def det3(p, q, r):
        return (
            p[0] * (q[1] * r[2] - q[2] * r[1])
            - p[1] * (q[0] * r[2] - q[2] * r[0])
            + p[2] * (q[0] * r[1] - q[1] * r[0])
        )

    n0 = det3(us[1], us[2], us[3])
    n1 = -det3(us[0], us[2], us[3])
    n2 = det3(us[0], us[1], us[3])
    n3 = -det3(us[0], us[1], us[2])
    det = n0 + n1 + n2 + n3
    if abs(det) <= POLICY.coplanarity_cutoff:
        return None
    alphas = (n0 / det, n1 / det, n2 / det, n3 / det)
    if min(alphas) <= POLICY.weight_cutoff:
        return None
    co, so = math.cos(om), math.sin(om)
    cp, sp = math.cos(ph), math.sin(ph)
    # rows of Rz(ph) Ry(om)
    r0 = (cp * co, -sp, cp * so)
    r1 = (sp * co, cp, sp * so)
    r2 = (-so, 0.0, co)
    ns = []
    for uu in us:
        ns.append(
            (
                r0[0] * uu[0] + r0[1] * uu[1] + r0[2] * uu[2],
                r1[0] * uu[0] + r1[1] * uu[1] + r1[2] * uu[2],
                r2[0] * uu[0] + r2[1] * uu[1] + r2[2] * uu[2],
            )
        )
    return alphas, tuple(ns)


_PARAMS = {2: _params_m2, 3: _params_m3, 4: _params_m4}


def make_objective(form: BlochForm, m: int):
    a, b, t = _scalar_state(form)
    build = _PARAMS[m]

    def objective(x):
        parts = build(x)
        if parts is None:
            return PENALTY
        alphas, ns = parts
        return _ce_scalar(a, b, t, alphas, ns)

    return objective


def povm_from_params(m: int, x) -> ExtremalPovm:
    """Build the POVM for a feasible parameter vector, mirroring the
    objective's own arithmetic."""
    if m == 2:
        return orthogonal_pair(float(x[0]), float(x[1]))
    if m == 3:
        p = planar_three((float(x[0]), float(x[1])), float(x[2]), float(x[3]), float(x[4]))
    elif m == 4:
        p = four_element((float(x[0]), float(x[1])), tuple(float(v) for v in x[2:8]))
    else:
        raise ValueError(f"m must be 2, 3 or 4, got {m}")
    if p is not None:
        return p
    # fall back to the scalar-path construction, which uses determinant-based
    # rejection; a polished point can sit just past the scalar constructor's
    # condition-number cutoff while still being numerically fine
    parts = _PARAMS[m](x)
    if parts is None:
        raise ValueError("parameters are infeasible")
    alphas, ns = parts
    return ExtremalPovm(
        m=m,
        elements=[PovmElement(float(a), np.array(n)) for a, n in zip(alphas, ns)],
    )


def polish(objective, x0, floor_step: float, maxfev: int = 2000):
    """Nelder-Mead descent from x0 with an initial simplex scaled to the grid floor.

    Returns (x, value, nfev).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    sim = np.tile(x0, (n + 1, 1))
    for i in range(n):
        sim[i + 1, i] += 0.25 * floor_step
    res = _scipy_minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "xatol": 1e-9,
            "fatol": 1e-12,
            "maxfev": maxfev,
            "initial_simplex": sim,
        },
    )
    return np.asarray(res.x, dtype=float), float(res.fun), int(res.nfev)


def select_starts(
    candidates: list[tuple[int, Candidate]],
    n_starts: int,
    separation: float,
) -> list[Candidate]:
    """Greedy distinct-start selection from (step_order, candidate) pairs.

    Candidates are visited in (value, step order, grid index) order; one is
    kept when it sits at least ``separation`` away (max angular distance,
    wrapped) from every start already chosen.
    """
    ordered = sorted(candidates, key=lambda sc: (sc[1].value, sc[0], sc[1].index))
    chosen: list[Candidate] = []
    for _, cand in ordered:
        if len(chosen) >= n_starts:
            break
        ok = True
        for prev in chosen:
            deltas = [
                abs(_wrap_angle(a - b)) for a, b in zip(cand.params, prev.params)
            ]
            if max(deltas) < separation:
                ok = False
                break
        if ok:
            chosen.append(cand)
    return chosen


def _wrap_angle(d: float) -> float:
    return (d + math.pi) % (2.0 * math.pi) - math.pi
