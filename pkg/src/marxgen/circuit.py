"""State-space model of the n-stage Marx ladder and energy-transfer checks.

State ordering (length ``3n + 2``)::

    [v_c1 .. v_cn, v_1 .. v_n, v_{n+1}, i_1 .. i_n, i_L]

``v_c*`` are parasitic-capacitor voltages, ``v_*`` storage-capacitor voltages
(``v_{n+1}`` is the load voltage divided by n), ``i_*`` inductor currents and
``i_L`` the load-branch current, oriented opposite to the others.

The sign matrix ``J_-1 = diag(1, .., 1, -1)`` is taken of size ``n + 1`` so
that it conforms with the ``n x (n+1)`` incidence matrix ``Sigma`` in both
coupling blocks.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT_TOLERANCES
from .numkernel import eig, expm
from .polysys import DesignSpec, build_B


@dataclass(frozen=True)
class StateModel:
    A0: np.ndarray
    T0: np.ndarray  # diagonal of the energy scaling, T0 = diag(T0)
    omega0: float
    T: float
    spec: DesignSpec
    f: np.ndarray

    @property
    def n(self):
        return self.spec.n

    @property
    def size(self):
        return 3 * self.spec.n + 2

    def scaled_matrix(self):
        """``T0 A0 T0^{-1}``, which is skew-symmetric."""
        return self.T0[:, None] * self.A0 / self.T0[None, :]

    def skew_residual(self):
        A1 = self.scaled_matrix()
        return float(np.max(np.abs(A1 + A1.T)))

    def energy(self, x):
        """Stored energy ``(ell/2) ||T0 x||^2`` for one state or a stack."""
        x = np.asarray(x)
        return 0.5 * self.spec.ell * np.sum((self.T0 * x) ** 2, axis=-1)


@dataclass(frozen=True)
class StateVector:
    v_c: np.ndarray
    v: np.ndarray
    v_np1: float
    i: np.ndarray
    i_L: float

    @classmethod
    def from_array(cls, x, n):
        x = np.asarray(x, dtype=float)
        if x.shape != (3 * n + 2,):
            raise ValueError(f"state must have length {3 * n + 2}")
        return cls(v_c=x[:n], v=x[n:2 * n], v_np1=float(x[2 * n]),
                   i=x[2 * n + 1:3 * n + 1], i_L=float(x[3 * n + 1]))

    def to_array(self):
        return np.concatenate([self.v_c, self.v, [self.v_np1], self.i, [self.i_L]])

    @property
    def v_L(self):
        return len(self.v) * self.v_np1


@dataclass(frozen=True)
class SimTrace:
    times: np.ndarray
    states: np.ndarray  # (samples, 3n + 2)
    energy: np.ndarray
    v_L: np.ndarray
    n: int
    v0: float

    def state(self, j):
        return StateVector.from_array(self.states[j], self.n)


@dataclass(frozen=True)
class ModalReport:
    eigenvalues: np.ndarray
    harmonics: np.ndarray  # a_1..a_n from sigma(I + BF)
    deviation: float  # vs {0 (x n)} U {+-j w0 a_k}
    design_deviation: float  # vs {0 (x n)} U {+-j w0} U {+-j w0 alpha_k}
    rank: int
    ok: bool

    def to_dict(self):
        return {
            "harmonics": [float(a) for a in self.harmonics],
            "deviation": self.deviation,
            "design_deviation": self.design_deviation,
            "rank": self.rank,
            "ok": self.ok,
        }


@dataclass(frozen=True)
class TransferReport:
    endpoint_residual: float
    vL_ratio: float
    energy_drift: float
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


# --------------------------------------------------------------------------


def _check_f(spec, f):
    f = np.asarray(f, dtype=float)
    if f.shape != (spec.n,):
        raise ValueError(f"need {spec.n} entries in f, got shape {f.shape}")
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise ValueError("all f_i must be positive and finite")
    return f


def _A0_blocks(spec, f):
    n, c, ell = spec.n, spec.c, spec.ell
    Sigma = np.zeros((n, n + 1))
    Sigma[np.arange(n), np.arange(n)] = 1.0
    Sigma[np.arange(n), np.arange(1, n + 1)] = -1.0
    Jn1 = np.diag(np.r_[np.ones(n), n])
    Jm1 = np.diag(np.r_[np.ones(n), -1.0])  # (n+1) x (n+1), see module docstring
    F = np.diag(f)
    A = np.zeros((3 * n + 2, 3 * n + 2))
    nv = 2 * n + 1
    A[:n, nv:] = -(1.0 / c) * F @ Sigma @ Jm1
    A[n:nv, nv:] = (1.0 / c) * np.eye(n + 1)
    A[nv:, :n] = (1.0 / ell) * np.linalg.inv(Jn1) @ Jm1 @ Sigma.T
    A[nv:, n:nv] = -(1.0 / ell) * np.eye(n + 1)
    return A


def _A0_scalar(spec, f):
    """Same matrix written equation by equation from Kirchhoff's laws."""
    n, c, ell = spec.n, spec.c, spec.ell
    m = 3 * n + 2
    vc = lambda k: k - 1  # noqa: E731  (1-based helpers)
    v = lambda k: n + k - 1  # noqa: E731
    i = lambda k: 2 * n + k  # noqa: E731
    vn1, iL = 2 * n, 3 * n + 1
    A = np.zeros((m, m))
    for k in range(1, n + 1):
        A[v(k), i(k)] = 1.0 / c  # c v_k' = i_k
    A[vn1, iL] = 1.0 / c  # c v_{n+1}' = i_L
    A[i(1), vc(1)] = 1.0 / ell  # l i_1' = v_c1 - v_1
    A[i(1), v(1)] = -1.0 / ell
    for k in range(2, n + 1):  # l i_k' = v_ck - v_c(k-1) - v_k
        A[i(k), vc(k)] += 1.0 / ell
        A[i(k), vc(k - 1)] -= 1.0 / ell
        A[i(k), v(k)] -= 1.0 / ell
    A[iL, vc(n)] += 1.0 / (n * ell)  # n l i_L' = v_cn - n v_{n+1}
    A[iL, vn1] -= 1.0 / ell
    for k in range(1, n):  # c_k v_ck' = i_{k+1} - i_k, c_k = c / f_k
        A[vc(k), i(k + 1)] += f[k - 1] / c
        A[vc(k), i(k)] -= f[k - 1] / c
    A[vc(n), iL] -= f[n - 1] / c  # c_n v_cn' = -i_L - i_n
    A[vc(n), i(n)] -= f[n - 1] / c
    return A


def build_A0(spec: DesignSpec, f) -> StateModel:
    """Assemble ``A0`` and the scaling ``T0`` for parasitic ratios ``f``."""
    f = _check_f(spec, f)
    n, c, ell = spec.n, spec.c, spec.ell
    A = _A0_blocks(spec, f)
    scalar = _A0_scalar(spec, f)
    if not np.allclose(A, scalar, rtol=1e-14, atol=0):
        raise AssertionError("block form of A0 disagrees with the circuit equations")
    Jn1 = np.r_[np.ones(n), n]
    T0 = np.concatenate([
        -np.sqrt(c / ell / f),
        np.sqrt(c / ell * Jn1),
        np.sqrt(Jn1),
    ])
    return StateModel(A0=A, T0=T0, omega0=spec.omega0, T=spec.T, spec=spec, f=f)


def initial_state(n, v0=1.0):
    """All storage capacitors charged to ``v0``, everything else at rest."""
    x = np.zeros(3 * n + 2)
    x[n:2 * n] = v0
    return x


def target_state(n, v0=1.0):
    """Only ``v_{n+1} = v0`` nonzero, i.e. the load holds ``n v0``."""
    x = np.zeros(3 * n + 2)
    x[2 * n] = v0
    return x


def _imag_sorted(values):
    return np.array(sorted(values, key=lambda z: (z.imag, z.real)))


def modal_check(model: StateModel, tol=DEFAULT_TOLERANCES.modal) -> ModalReport:
    """Compare ``sigma(A0)`` with zeros plus ``+-j w0 a_k``.

    ``a_k^2`` are the eigenvalues of ``I + BF`` and ``a_0 = 1``; for an exact
    design ``a_k = alpha_k``. Also checks ``rank(A0) = 2n + 2``.
    """
    spec, n, w0 = model.spec, model.n, model.omega0
    B = build_B(n).astype(float)
    M = np.eye(n) + B * model.f[None, :]
    a2 = np.sort(eig(M).values.real)
    a = np.sqrt(np.clip(a2, 0, None))
    got = _imag_sorted(eig(model.A0).values)

    def expected(harm):
        imag = np.concatenate([[1.0], harm]) * w0
        vals = np.concatenate([np.zeros(n), 1j * imag, -1j * imag])
        return _imag_sorted(vals)

    dev = float(np.max(np.abs(got - expected(a))))
    design = float(np.max(np.abs(got - expected(np.array(spec.alpha, dtype=float)))))
    s = np.linalg.svd(model.A0, compute_uv=False)
    rank = int(np.sum(s > s[0] * 1e-10))
    ok = dev <= tol and rank == 2 * n + 2
    return ModalReport(eigenvalues=got, harmonics=a, deviation=dev,
                       design_deviation=design, rank=rank, ok=ok)


def propagate(model: StateModel, x0, t):
    """``x(t) = e^{A0 t} x0``."""
    return expm(model.A0, t) @ np.asarray(x0, dtype=float)


def simulate(model: StateModel, v0=1.0, samples=1000, x0: Optional[np.ndarray] = None,
             t_end: Optional[float] = None):
    """Free response on a uniform grid over ``[0, T]``.

    Every sample is a fresh matrix exponential applied to ``x0``, so the
    endpoint is ``e^{A0 T} x0`` with no accumulated stepping error.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    n = model.n
    x0 = initial_state(n, v0) if x0 is None else np.asarray(x0, dtype=float)
    t_end = model.T if t_end is None else float(t_end)
    times = np.linspace(0.0, t_end, samples)
    times[-1] = t_end
    states = np.empty((samples, 3 * n + 2))
    for j, t in enumerate(times):
        states[j] = propagate(model, x0, t)
    energy = model.energy(states)
    return SimTrace(times=times, states=states, energy=energy,
                    v_L=n * states[:, 2 * n], n=n, v0=float(v0))


def verify_transfer(trace: SimTrace, tol=DEFAULT_TOLERANCES) -> TransferReport:
    """Did all the energy end up in the load capacitor at the last sample?"""
    n, v0 = trace.n, trace.v0
    target = target_state(n, v0)
    scale = abs(v0) if v0 else 1.0
    endpoint = float(np.max(np.abs(trace.states[-1] - target)) / scale)
    ratio = float(trace.v_L[-1] / (n * v0)) if v0 else float("nan")
    e0 = trace.energy[0]
    drift = float(np.max(np.abs(trace.energy - e0)) / e0) if e0 else 0.0
    passed = endpoint <= tol.transfer_endpoint and drift <= tol.energy_drift
    return TransferReport(endpoint_residual=endpoint, vL_ratio=ratio,
                          energy_drift=drift, passed=passed)
