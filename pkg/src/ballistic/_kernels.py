"""Numba kernels: vectorized instance assembly and union-find spanning.

The assembly kernel is the single authoritative consumer of the per-run
uniform draws; the readable scalar rules in microcluster/lattice are tested
equivalent to it.  Union-find uses path compression and union by size with
two virtual terminal nodes for the spanning faces.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# arm slot codes
SLOT_MX, SLOT_PX, SLOT_T1, SLOT_T2 = 0, 1, 2, 3
# arm states
ATTACHED, PAIR, DEAD = 0, 1, 2
# gate outcomes
OUT_SUCCESS, OUT_FAILURE, OUT_LOSS = 0, 1, 2


@njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]


@njit(cache=True)
def assemble_and_span(
    lx, ly, lz,
    p_success, p_loss, k_scope,
    u_site,            # (N, 2*(k_scope+1)) uniforms: per gate, photon losses then success
    u_bond,            # (B, k_scope+1)
    bond_u, bond_su, bond_v, bond_sv,
    side_slots,        # (2, 2) int8: slot codes fed by side 0 / side 1
    partner_slot,      # (4,) int8
    side_of_slot,      # (4,) int8
    slot_in_range,     # (N, 4) bool
    remedy_zcut,       # bool: external loss Z-cuts both center-side neighbors
    heralded_removed,  # (N,) bool
    center_alive,      # (N,) bool         output
    arm_state,         # (N, 4) int8       output (pre-death structure)
    arm_dead,          # (N, 4) bool       output
    bond_outcome,      # (B,) int8         output
    bond_kept,         # (B,) bool         output
    parent, size,      # (3N+2,) int32/int64 work
):
    """Build one instance and return 1 if it spans along x, else 0."""
    N = lx * ly * lz
    B = bond_u.shape[0]
    stride = k_scope + 1

    # Internal gates: two rotated fusions per site.  Photon 0 of each gate
    # is the central-GHZ leaf: losing it Z-cuts the site's center.
    for s in range(N):
        lost_center = False
        st1 = ATTACHED
        st2 = ATTACHED
        for g in range(2):
            base = g * stride
            lost_any = False
            for j in range(k_scope):
                if u_site[s, base + j] < p_loss:
                    lost_any = True
                    if j == 0:
                        lost_center = True
            if lost_any:
                st = DEAD
            elif u_site[s, base + k_scope] < p_success:
                st = ATTACHED
            else:
                st = PAIR
            if g == 0:
                st1 = st
            else:
                st2 = st
        ca = not lost_center
        center_alive[s] = ca
        for side in range(2):
            st = st1 if side == 0 else st2
            eff = st
            if st == ATTACHED and not ca:
                eff = DEAD
            for t in range(2):
                sl = side_slots[side, t]
                arm_state[s, sl] = eff
                arm_dead[s, sl] = eff == DEAD

    # Detached-pair arms facing the boundary have no counterpart: dead.
    for s in range(N):
        for sl in range(4):
            if arm_state[s, sl] == PAIR and not slot_in_range[s, sl]:
                arm_dead[s, sl] = True

    # External gates: failures consume both arms; a detected loss also
    # Z-cuts each arm's center-side neighbor (center or pair partner).
    for b in range(B):
        lost_any = False
        for j in range(k_scope):
            if u_bond[b, j] < p_loss:
                lost_any = True
        if lost_any:
            oc = OUT_LOSS
        elif u_bond[b, k_scope] < p_success:
            oc = OUT_SUCCESS
        else:
            oc = OUT_FAILURE
        bond_outcome[b] = oc
        if oc == OUT_FAILURE or oc == OUT_LOSS:
            arm_dead[bond_u[b], bond_su[b]] = True
            arm_dead[bond_v[b], bond_sv[b]] = True
        if oc == OUT_LOSS and remedy_zcut:
            for side in range(2):
                site = bond_u[b] if side == 0 else bond_v[b]
                sl = bond_su[b] if side == 0 else bond_sv[b]
                st = arm_state[site, sl]
                if st == ATTACHED:
                    center_alive[site] = False
                elif st == PAIR:
                    arm_dead[site, partner_slot[sl]] = True

    for s in range(N):
        if heralded_removed[s]:
            center_alive[s] = False

    # Successful fusions between live arms bond centers / solder pair chains.
    nn = 3 * N + 2
    for i in range(nn):
        parent[i] = i
        size[i] = 1
    for b in range(B):
        bond_kept[b] = False
        if bond_outcome[b] != OUT_SUCCESS:
            continue
        u = bond_u[b]
        su = bond_su[b]
        v = bond_v[b]
        sv = bond_sv[b]
        stu = arm_state[u, su]
        stv = arm_state[v, sv]
        if stu == ATTACHED:
            live_u = center_alive[u] and not arm_dead[u, su]
            node_u = u
        elif stu == PAIR:
            live_u = (not arm_dead[u, su]) and (not arm_dead[u, partner_slot[su]])
            node_u = N + 2 * u + side_of_slot[su]
        else:
            live_u = False
            node_u = -1
        if stv == ATTACHED:
            live_v = center_alive[v] and not arm_dead[v, sv]
            node_v = v
        elif stv == PAIR:
            live_v = (not arm_dead[v, sv]) and (not arm_dead[v, partner_slot[sv]])
            node_v = N + 2 * v + side_of_slot[sv]
        else:
            live_v = False
            node_v = -1
        if live_u and live_v:
            bond_kept[b] = True
            _union(parent, size, node_u, node_v)

    if lx == 1:
        return 1
    t0 = 3 * N
    t1 = 3 * N + 1
    plane = ly * lz
    for s in range(plane):
        if center_alive[s]:
            _union(parent, size, t0, s)
    for s in range((lx - 1) * plane, N):
        if center_alive[s]:
            _union(parent, size, t1, s)
    return 1 if _find(parent, t0) == _find(parent, t1) else 0


@njit(cache=True)
def cubic_span(lx, ly, lz, p, u_bond, bond_u, bond_v, parent, size):
    """Plain-cubic i.i.d. bond dilution: spans along x?"""
    N = lx * ly * lz
    B = bond_u.shape[0]
    for i in range(N + 2):
        parent[i] = i
        size[i] = 1
    for b in range(B):
        if u_bond[b] < p:
            _union(parent, size, bond_u[b], bond_v[b])
    if lx == 1:
        return 1
    t0 = N
    t1 = N + 1
    plane = ly * lz
    for s in range(plane):
        _union(parent, size, t0, s)
    for s in range((lx - 1) * plane, N):
        _union(parent, size, t1, s)
    return 1 if _find(parent, t0) == _find(parent, t1) else 0
