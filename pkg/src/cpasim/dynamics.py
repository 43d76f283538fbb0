"""Mean-field time evolution of the driven cavity-atom-crystal system.

State layout is a real 5-vector: (Re c, Im c, Re sigma_minus, Im sigma_minus,
sigma_z).  The frame rotates with the coherent drive, so a crystal pumped away
from twice the drive frequency shows up as an explicitly time-dependent
parametric term at the pump detuning ``delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepFailure
from .model import SystemParams, balanced_input_fields, output_fields

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
# Integration stops once any state component passes this magnitude (photon
# numbers ~1e18, far beyond mean-field sense).  Above the parametric threshold
# the field grows exponentially; without a cutoff the stepper chases the blowup
# forever, since with g > 0 the step size shrinks with the growing Rabi
# frequency 2 g |c| and overflow is approached only logarithmically.
DIVERGENCE_BOUND = 1e9


@dataclass
class TimeTrace:
    """Sampled trajectory with derived observables."""

    t: np.ndarray
    state: np.ndarray  # shape (len(t), 5)
    n_c: np.ndarray
    out_intensity: np.ndarray  # max of the two mirror output intensities

    def final_state(self) -> np.ndarray:
        return self.state[-1]


def vacuum_state() -> np.ndarray:
    """Cavity vacuum, atom in its ground state."""
    return np.array([0.0, 0.0, 0.0, 0.0, -0.5])


def mean_field_rhs(state: np.ndarray, t: float, p: SystemParams,
                   delta: float = 0.0) -> np.ndarray:
    """Time derivative of the mean-field state.

    ``delta`` is the pump-frequency mismatch of the crystal; the parametric
    term 2 G e^{-i delta t} c* is the only explicit time dependence.
    """
    x1, x2, x3, x4, x5 = state
    phase = p.phi - delta * t
    gr = 2.0 * p.g_nl_mag * math.cos(phase)
    gi = 2.0 * p.g_nl_mag * math.sin(phase)
    kh = 0.5 * p.kappa
    gh = 0.5 * p.gamma
    return np.array([
        -kh * x1 + p.delta_c * x2 + p.g * x4 + gr * x1 + gi * x2 + p.omega_d,
        -kh * x2 - p.delta_c * x1 - p.g * x3 + gi * x1 - gr * x2,
        -gh * x3 + p.delta_tls * x4 - 2.0 * p.g * x2 * x5,
        -gh * x4 - p.delta_tls * x3 + 2.0 * p.g * x1 * x5,
        -p.gamma * (x5 + 0.5) - 2.0 * p.g * (x1 * x4 - x2 * x3),
    ])


def _observables(p: SystemParams, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n_c = states[:, 0] ** 2 + states[:, 1] ** 2
    c_in_l, c_in_r = balanced_input_fields(p)
    out = np.empty(len(states))
    for i, row in enumerate(states):
        c_bar = complex(row[0], row[1])
        out_l, out_r = output_fields(c_bar, c_in_l, c_in_r, p)
        out[i] = max(abs(out_l) ** 2, abs(out_r) ** 2)
    return n_c, out


def integrate(p: SystemParams, delta: float, initial: np.ndarray, t_end: float,
              sample_dt: float, rtol: float = DEFAULT_RTOL,
              atol: float = DEFAULT_ATOL) -> TimeTrace:
    """Integrate the mean-field equations from ``initial`` to ``t_end``,
    sampling every ``sample_dt``.  The first sample is the initial state.

    Raises StepFailure (carrying the partial trace) if the integrator stops
    before reaching ``t_end``.
    """
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    if sample_dt <= 0.0 or sample_dt > t_end:
        raise ValueError("sample_dt must lie in (0, t_end]")
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (5,):
        raise ValueError("initial state must be a 5-vector")

    n_samples = int(math.floor(t_end / sample_dt + 1e-9)) + 1
    t_eval = np.minimum(np.arange(n_samples) * sample_dt, t_end)
    if t_eval[-1] < t_end:
        t_eval = np.append(t_eval, t_end)

    def diverged(t, y):
        return float(np.max(np.abs(y))) - DIVERGENCE_BOUND

    diverged.terminal = True

    sol = solve_ivp(
        lambda t, y: mean_field_rhs(y, t, p, delta),
        (0.0, t_end), initial, method="DOP853", t_eval=t_eval,
        rtol=rtol, atol=atol, events=diverged)
    if not sol.success or sol.t[-1] < t_end * (1.0 - 1e-12):
        states = sol.y.T
        n_c, out = _observables(p, states)
        reason = (f"state magnitude passed {DIVERGENCE_BOUND:.0e}"
                  if sol.status == 1 else sol.message)
        raise StepFailure(
            f"integration stopped at t = {sol.t[-1]:.6g} of {t_end:.6g}: "
            f"{reason}",
            trace=TimeTrace(t=sol.t, state=states, n_c=n_c, out_intensity=out))

    states = sol.y.T
    n_c, out = _observables(p, states)
    return TimeTrace(t=sol.t, state=states, n_c=n_c, out_intensity=out)


def settle(p: SystemParams, initial: np.ndarray, t_end: float,
           rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> np.ndarray:
    """Final state after integrating with the crystal pump on resonance.

    Convenience for relaxation tests; no intermediate samples are kept.
    """
    trace = integrate(p, 0.0, initial, t_end, t_end, rtol=rtol, atol=atol)
    return trace.final_state()
