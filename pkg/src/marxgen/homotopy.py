"""Total-degree homotopy continuation, vectorised over paths.

The homotopy is ``H(x, t) = (1 - t) * gamma * G(x) + t * Q(x)`` with start
system ``G_i(x) = x_i^{d_i} - 1``. All paths advance together as a batch; each
one keeps its own ``t`` and step size, so a path follows the same steps
whichever other paths share the batch (batched BLAS kernels may still differ
in the last bit between batch sizes).
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

ACTIVE, CONVERGED, DIVERGED, FAILED, BUDGET = range(5)
STATUS_NAMES = {ACTIVE: "active", CONVERGED: "converged", DIVERGED: "diverged",
                FAILED: "failed", BUDGET: "budget"}


@dataclass(frozen=True)
class TrackerSettings:
    initial_step: float = 0.01
    max_step: float = 0.05
    min_step: float = 1e-13
    max_iterations: int = 20000
    corrector_iterations: int = 3
    corrector_tol: float = 1e-10
    max_first_correction: float = 0.05
    diverged_norm: float = 1e8
    expand_after: int = 3

    def tightened(self, factor=10.0):
        return TrackerSettings(
            initial_step=self.initial_step / factor,
            max_step=self.max_step / factor,
            min_step=self.min_step,
            max_iterations=int(self.max_iterations * factor),
            corrector_iterations=self.corrector_iterations,
            corrector_tol=self.corrector_tol,
            max_first_correction=self.max_first_correction / factor,
            diverged_norm=self.diverged_norm,
            expand_after=self.expand_after,
        )


@dataclass
class TrackResult:
    endpoints: np.ndarray  # (P, n) complex
    status: np.ndarray  # (P,) int
    iterations: np.ndarray  # (P,) int


def random_gamma(rng):
    """A point drawn uniformly on the unit circle."""
    return complex(np.exp(2j * np.pi * rng.uniform()))


def start_solutions(degrees):
    """All ``prod(d_i)`` roots of ``x_i^{d_i} = 1``, in lexicographic order."""
    roots = [np.exp(2j * np.pi * np.arange(d) / d) for d in degrees]
    return np.array(list(itertools.product(*roots)), dtype=complex).reshape(-1, len(degrees))


def _start_eval(X, degrees):
    d = np.asarray(degrees)
    G = X ** d - 1.0
    Gx = d * X ** (d - 1)  # diagonal of the Jacobian
    return G, Gx


def _homotopy(target, X, t, gamma, degrees):
    Q, Qx = target.evaluate(X)
    G, Gx = _start_eval(X, degrees)
    s = (1.0 - t)[:, None]
    H = s * gamma * G + t[:, None] * Q
    Hx = t[:, None, None] * Qx
    idx = np.arange(X.shape[1])
    Hx[:, idx, idx] += s * gamma * Gx
    Ht = Q - gamma * G
    return H, Hx, Ht


def _solve(A, b):
    """Batched solve; singular systems return NaN rows instead of raising."""
    try:
        return np.linalg.solve(A, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full_like(b, np.nan)
        for i in range(len(b)):
            try:
                out[i] = np.linalg.solve(A[i], b[i])
            except np.linalg.LinAlgError:
                pass
        return out


def track(target, starts, gamma, settings=TrackerSettings()):
    """Track every start point from ``t = 0`` to ``t = 1``.

    ``target`` is a :class:`~marxgen.polysys.CompiledSystem`; ``starts`` has
    shape ``(P, n)``. Endpoints of converged paths are approximate roots of the
    target, ready for Newton polishing.
    """
    degrees = target.degrees
    X = np.array(starts, dtype=complex)
    P, n = X.shape
    t = np.zeros(P)
    dt = np.full(P, settings.initial_step)
    streak = np.zeros(P, dtype=int)
    status = np.full(P, ACTIVE)
    iterations = np.zeros(P, dtype=int)

    while True:
        act = np.flatnonzero(status == ACTIVE)
        if act.size == 0:
            break
        x, ta = X[act], t[act]
        h = np.minimum(dt[act], 1.0 - ta)
        iterations[act] += 1

        _, Hx, Ht = _homotopy(target, x, ta, gamma, degrees)
        xp = x + h[:, None] * _solve(Hx, -Ht)
        t1 = np.where(h >= 1.0 - ta, 1.0, ta + h)

        ok = np.all(np.isfinite(xp), axis=1)
        scale = 1.0 + np.linalg.norm(np.where(np.isfinite(x), x, 0), axis=1)
        for it in range(settings.corrector_iterations):
            H, Hx, _ = _homotopy(target, np.where(ok[:, None], xp, 0), t1, gamma, degrees)
            delta = _solve(Hx, -H)
            step = np.linalg.norm(delta, axis=1)
            ok &= np.isfinite(step)
            if it == 0:
                ok &= step <= settings.max_first_correction * scale
            xp = xp + np.where(ok[:, None], delta, 0)
        ok &= step <= settings.corrector_tol * (1.0 + np.linalg.norm(xp, axis=1))

        # accepted steps
        acc = act[ok]
        X[acc] = xp[ok]
        t[acc] = t1[ok]
        streak[acc] += 1
        grow = acc[streak[acc] >= settings.expand_after]
        dt[grow] = np.minimum(2.0 * dt[grow], settings.max_step)
        streak[grow] = 0
        status[acc[t[acc] >= 1.0]] = CONVERGED
        status[acc[np.linalg.norm(X[acc], axis=1) > settings.diverged_norm]] = DIVERGED

        # rejected steps
        rej = act[~ok]
        dt[rej] *= 0.5
        streak[rej] = 0
        status[rej[dt[rej] < settings.min_step]] = FAILED

        status[(status == ACTIVE) & (iterations >= settings.max_iterations)] = BUDGET

    return TrackResult(endpoints=X, status=status, iterations=iterations)


def _track_chunk(args):
    target, starts, gamma, settings = args
    return track(target, starts, gamma, settings)


def track_parallel(target, starts, gamma, settings=TrackerSettings(), n_jobs=1,
                   chunk_size=None):
    """Split the paths into chunks, track them (optionally in worker
    processes) and concatenate results in the original path order."""
    starts = np.asarray(starts, dtype=complex)
    P = len(starts)
    if n_jobs is None or n_jobs <= 1 or P < 2:
        if chunk_size is None or chunk_size >= P:
            return track(target, starts, gamma, settings)
        n_jobs = 1
    chunk_size = chunk_size or -(-P // n_jobs)
    chunks = [(target, starts[i:i + chunk_size], gamma, settings)
              for i in range(0, P, chunk_size)]
    if n_jobs <= 1:
        parts = [_track_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_track_chunk, chunks))
    return TrackResult(
        endpoints=np.concatenate([p.endpoints for p in parts]),
        status=np.concatenate([p.status for p in parts]),
        iterations=np.concatenate([p.iterations for p in parts]),
    )


def newton_polish(target, X, iterations=8):
    """Plain complex Newton on the target system, batched."""
    X = np.array(X, dtype=complex)
    for _ in range(iterations):
        F, J = target.evaluate(X)
        delta = _solve(J, -F)
        good = np.all(np.isfinite(delta), axis=1)
        X[good] += delta[good]
    F, _ = target.evaluate(X, jacobian=False)
    return X, np.abs(F).max(axis=1)
