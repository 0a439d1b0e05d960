"""Independent circuit oracle: nodal equations assembled from a parsed netlist.

State is (node voltages, inductor currents); the capacitance and inductance
matrices are stamped element by element, so nothing is shared with the
hand-written state-space model.
"""

import numpy as np
import scipy.linalg


def assemble(elements):
    nodes = sorted({n for e in elements for n in (e.node1, e.node2) if n != "0"})
    index = {n: i for i, n in enumerate(nodes)}
    caps = [e for e in elements if e.kind == "C"]
    inds = [e for e in elements if e.kind == "L"]
    N, L = len(nodes), len(inds)
    Cm = np.zeros((N, N))
    for e in caps:
        for a, sa in ((e.node1, 1), (e.node2, -1)):
            for b, sb in ((e.node1, 1), (e.node2, -1)):
                if a != "0" and b != "0":
                    Cm[index[a], index[b]] += sa * sb * e.value
    AL = np.zeros((N, L))  # +1 where inductor current leaves the node
    for j, e in enumerate(inds):
        if e.node1 != "0":
            AL[index[e.node1], j] += 1
        if e.node2 != "0":
            AL[index[e.node2], j] -= 1
    M = scipy.linalg.block_diag(Cm, np.diag([e.value for e in inds]))
    K = np.block([[np.zeros((N, N)), -AL], [AL.T, np.zeros((L, L))]])
    A = np.linalg.solve(M, K)

    # initial node voltages from capacitor initial conditions
    D = np.zeros((len(caps), N))
    for r, e in enumerate(caps):
        if e.node1 != "0":
            D[r, index[e.node1]] += 1
        if e.node2 != "0":
            D[r, index[e.node2]] -= 1
    v0, *_ = np.linalg.lstsq(D, np.array([e.ic or 0.0 for e in caps]), rcond=None)
    x0 = np.concatenate([v0, [e.ic or 0.0 for e in inds]])
    return A, x0, nodes, caps, inds, D


def run(elements, t):
    A, x0, nodes, caps, inds, D = assemble(elements)
    x = scipy.linalg.expm(A * t) @ x0
    N = len(nodes)
    cap_v = {e.name: float(v) for e, v in zip(caps, D @ x[:N])}
    ind_i = {e.name: float(i) for e, i in zip(inds, x[N:])}
    return cap_v, ind_i, A
