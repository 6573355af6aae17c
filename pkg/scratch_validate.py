"""Scratch validation of rewrite rules vs dense oracle (not part of the package)."""
import itertools
import random

import numpy as np

from ballistic.graphstate import (
    GraphState, new_ghz, measure_pauli, fuse, FusionBasis, component_partition,
)
from ballistic.statevec import DenseState
from ballistic.tableau import StabilizerTableau


def check_ghz3():
    g = new_ghz(3)
    d = DenseState.from_graph_state(g)
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / np.sqrt(2)
    ref = DenseState([0, 1, 2], ghz)
    print("GHZ3 overlap:", d.overlap(ref))


def check_path_measurements():
    for axis in "XYZ":
        g = GraphState()
        g.add_edge(0, 1)
        g.add_edge(1, 2)
        engine = measure_pauli(g, 1, axis)
        dense_in = DenseState.from_graph_state(g)
        sign = dense_in.measure_and_remove(1, axis, prefer_sign=1)
        dense_engine = DenseState.from_graph_state(engine)
        ov = dense_engine.overlap(dense_in)
        print(f"path center {axis}: edges={sorted(map(sorted, engine.edges))} sign={sign} overlap={ov:.6f}")


def random_graph(n, p, rng):
    g = GraphState()
    for v in range(n):
        g.add_vertex(v)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                g.add_edge(u, v)
    return g


def check_random_measurements(trials=400):
    rng = random.Random(7)
    worst = 1.0
    for t in range(trials):
        n = rng.randint(1, 6)
        g = random_graph(n, 0.5, rng)
        dense = DenseState.from_graph_state(g)
        state = g
        n_meas = rng.randint(1, n)
        for _ in range(n_meas):
            v = rng.choice(sorted(state.adj))
            axis = rng.choice("XYZ")
            state = measure_pauli(state, v, axis)
            # physical +1 preferred; engine picks realizable branch for isolated-X
            dense.measure_and_remove(v, axis, prefer_sign=1)
        dense_engine = DenseState.from_graph_state(state)
        ov = dense_engine.overlap(dense)
        worst = min(worst, ov)
        if ov < 1 - 1e-9:
            print(f"MISMATCH trial {t}: overlap={ov}")
            print("graph:", sorted(map(sorted, g.edges)), "n=", n)
            return
    print(f"random measurement trials ok, worst overlap={worst:.12f}")


def check_fuse_examples():
    # two 2-vertex fragments a-x, y-b; fuse(x,y) success -> edge a-b
    g = GraphState()
    g.add_edge(0, 1)   # a=0, x=1
    g.add_edge(2, 3)   # y=2, b=3
    out = fuse(g, 1, 2, "success")
    print("fuse success edges:", sorted(map(sorted, out.edges)))

    # 3-star c(c1,c2) + 3-star b(b1,b2): fuse(c1, b, success) -> c adj b1,b2
    g = GraphState()
    c, c1, c2, b, b1, b2 = 0, 1, 2, 3, 4, 5
    g.add_edge(c, c1); g.add_edge(c, c2)
    g.add_edge(b, b1); g.add_edge(b, b2)
    out = fuse(g, c1, b, "success")
    print("5-star step edges:", sorted(map(sorted, out.edges)))

    # failure with rotated basis: Z on c1, X on b -> b1-b2 pair, c keeps c2
    out = fuse(g, c1, b, "failure", FusionBasis.rotated())
    print("rotated failure edges:", sorted(map(sorted, out.edges)),
          "components:", [sorted(s) for s in component_partition(out)])


def check_fuse_vs_tableau(trials=300):
    rng = random.Random(11)
    for t in range(trials):
        n1, n2 = rng.randint(2, 5), rng.randint(2, 5)
        g = random_graph(n1, 0.6, rng)
        # ensure second fragment occupies fresh ids
        g2 = random_graph(n2, 0.6, rng)
        for u in range(n2):
            g.add_vertex(10 + u)
        for e in g2.edges:
            u, v = sorted(e)
            g.add_edge(10 + u, 10 + v)
        cand1 = [v for v in range(n1) if g.adj[v]]
        cand2 = [10 + u for u in range(n2) if g.adj[10 + u]]
        if not cand1 or not cand2:
            continue
        v1 = rng.choice(cand1)
        v2 = rng.choice(cand2)
        outcome = rng.choice(["success", "failure"])
        basis = rng.choice([FusionBasis.standard(), FusionBasis.rotated(),
                            FusionBasis(failure_axes=("X", "X"))])
        engine = fuse(g, v1, v2, outcome, basis)
        tab = StabilizerTableau.from_graph_state(g)
        tab.fuse(v1, v2, outcome, basis)
        eng_parts = component_partition(engine)
        tab_parts = tab.component_partition()
        if eng_parts != tab_parts:
            print(f"FUSE MISMATCH t={t} outcome={outcome} basis={basis}")
            print(" graph:", sorted(map(sorted, g.edges)), "v1,v2:", v1, v2)
            print(" engine:", [sorted(s) for s in eng_parts])
            print(" tableau:", [sorted(s) for s in tab_parts])
            return
    print("fuse vs tableau components ok")


def check_tableau_vs_dense(trials=200):
    rng = random.Random(13)
    for t in range(trials):
        n = rng.randint(1, 6)
        g = random_graph(n, 0.5, rng)
        tab = StabilizerTableau.from_graph_state(g)
        dense = DenseState.from_graph_state(g)
        # every stabilizer should have expectation +1
        for s in tab.stabilizer_strings():
            ops = {}
            sign = 1 if s[0] == "+" else -1
            for q, ch in enumerate(s[1:]):
                if ch != "I":
                    ops[tab.qubits[q]] = ch
            if not ops:
                continue
            pv = dense._pauli_action(ops)
            expect = float(np.vdot(dense.vec, pv).real) * sign
            if abs(expect - 1) > 1e-9:
                print(f"TABLEAU MISMATCH t={t} gen={s} expect={expect}")
                return
    print("tableau vs dense stabilizers ok")


def check_measure_vs_tableau(trials=300):
    rng = random.Random(17)
    for t in range(trials):
        n = rng.randint(2, 10)
        g = random_graph(n, 0.4, rng)
        state = g
        tab = StabilizerTableau.from_graph_state(g)
        for _ in range(rng.randint(1, 4)):
            if not state.adj:
                break
            v = rng.choice(sorted(state.adj))
            axis = rng.choice("XYZ")
            state = measure_pauli(state, v, axis)
            tab.measure(v, axis)
        eng, tabp = component_partition(state), tab.component_partition()
        if eng != tabp:
            print(f"MEASURE/TABLEAU MISMATCH t={t}")
            print(" engine:", [sorted(s) for s in eng])
            print(" tableau:", [sorted(s) for s in tabp])
            return
    print("measure vs tableau components ok")


if __name__ == "__main__":
    check_ghz3()
    check_path_measurements()
    check_random_measurements()
    check_fuse_examples()
    check_fuse_vs_tableau()
    check_tableau_vs_dense()
    check_measure_vs_tableau()
