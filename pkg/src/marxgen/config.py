"""Numerical tolerances shared by every module."""

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # numkernel
    eig_backward: float = 1e-10
    expm_max_norm: float = 1e6
    # solver
    real_imag: float = 1e-8
    polish_residual: float = 1e-12
    dedup: float = 1e-6
    diverged_norm: float = 1e8
    eig_match: float = 1e-6
    symmetric_match: float = 1e-8
    # circuit
    skew: float = 1e-12
    modal: float = 1e-6
    transfer_endpoint: float = 1e-5
    energy_drift: float = 1e-8
    # analysis
    convexity: float = 1e-9
    objective_tie: float = 1e-9

    def updated(self, **overrides):
        """Return a copy with the given fields replaced; unknown names raise."""
        known = {f.name for f in fields(self)}
        bad = set(overrides) - known
        if bad:
            raise KeyError(f"unknown tolerance(s): {sorted(bad)}")
        return replace(self, **overrides)


DEFAULT_TOLERANCES = Tolerances()
