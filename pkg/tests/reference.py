"""Published design values used as regression targets.

Rows are n^2 c_i / c for alpha_i = 2i, c = ell = 1, followed by the
largest eigenvalue condition number. The last row of each block is the
regular design.
"""

import numpy as np

DESIGNS = {
    2: [
        ((1.50213, 0.47340), 1.1102),
        ((0.63120, 1.12660), 1.0266),
    ],
    3: [
        ((1.49303, 1.49229, 0.41548), 1.1557),
        ((0.84408, 0.77662, 1.41217), 1.0387),
    ],
    4: [
        ((1.71070, 1.29555, 1.54667, 0.38529), 1.1849),
        ((1.62637, 0.62519, 1.73498, 0.74862), 1.0917),
        ((1.06181, 2.10211, 0.66491, 0.89099), 1.121),
        ((1.13210, 0.78731, 0.92450, 1.60306), 1.0440),
    ],
    5: [
        ((2.04567, 1.23900, 1.35694, 1.57111, 0.36796), 1.2018),
        ((2.14782, 0.63778, 1.24610, 1.70028, 0.68506), 1.1092),
        ((0.99720, 1.69936, 1.57266, 0.64267, 1.16088), 1.0558),
        ((1.47480, 0.86342, 0.84481, 1.07344, 1.72179), 1.0448),
    ],
    6: [
        ((2.49095, 1.25588, 1.20240, 1.49359, 1.53290, 0.35987), 1.2065),
        ((1.92537, 1.79971, 1.80083, 0.90696, 1.45858, 0.37545), 1.1954),
        ((1.67555, 1.98118, 2.05786, 0.66667, 1.30433, 0.52174), 1.112),
        ((2.65073, 1.01602, 0.68610, 1.82261, 1.42150, 0.64738), 1.1506),
        ((1.34706, 2.18478, 0.92044, 1.84208, 0.65432, 0.94921), 1.0971),
        ((1.95229, 0.93587, 1.53272, 0.63062, 1.76898, 0.99206), 1.0844),
        ((2.46541, 0.73028, 0.99423, 0.93809, 1.85839, 0.99314), 1.1223),
        ((1.79820, 0.94167, 1.74742, 0.62528, 1.59040, 1.05327), 1.0884),
        ((1.43355, 1.89698, 0.60976, 1.73302, 1.02388, 1.05334), 1.1009),
        ((1.50458, 1.00778, 2.04896, 1.05339, 0.68756, 1.37732), 1.0686),
        ((1.38734, 1.13092, 1.48392, 1.32482, 0.63764, 1.57578), 1.0617),
        ((1.87892, 0.96056, 0.85587, 0.91518, 1.23619, 1.77345), 1.0592),
    ],
}

COUNTS = {n: len(rows) for n, rows in DESIGNS.items()}

# Regular designs for 7 and 8 stages, reported to five decimals from a
# relaxation-based solver, with their condition numbers.
SEVEN = ((2.07061, 1.05669, 1.04940, 1.05715, 1.06861, 1.08449, 1.85298), 1.0502)
EIGHT = ((2.39407, 1.17326, 1.12475, 1.11221, 1.10440, 1.09960, 1.09985, 1.87282),
         1.0617)

# Unique convex minimiser of the equalisation objective at n = 3 (k, not n^2 k).
N3_MINIMISER = (9.3786e-2, 8.6296e-2, 1.5690e-1)

# The single-stage table entry is f_1 = 3/2; the capacitor ratio is 2/3.
N1_TABLE_ENTRY = 1.5


def match_rows(found, expected):
    """Pair each expected row with its nearest found row (inf-norm).

    Returns ``(pairs, distances)`` with ``pairs[i]`` the index into
    ``found`` for ``expected[i]``; raises if two rows share a partner.
    """
    found = np.asarray(found, dtype=float)
    pairs, dists = [], []
    for row in expected:
        d = np.max(np.abs(found - np.asarray(row)), axis=1)
        j = int(np.argmin(d))
        pairs.append(j)
        dists.append(float(d[j]))
    if len(set(pairs)) != len(pairs):
        raise AssertionError(f"ambiguous row matching {pairs}")
    return pairs, np.array(dists)
