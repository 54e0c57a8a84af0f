"""Joint-space force controller building blocks.

The actuator force loop combines a rational PID+feedforward with a
disturbance observer (DOB): the observer passes the measured force through
a discretized Q/P composite (inverse nominal plant made causal by a
third-order low-pass Q) and compares it against the low-passed previous
command.  The difference is the disturbance estimate, blended back with a
gain ``gamma`` in [0, 1].  Upstream of the force loop sit a virtual
spring/damper (impedance) and leaky integration of desired accelerations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lti import (
    ContinuousTransferFunction,
    DiscreteIirFilter,
    NyquistError,
    bilinear_discretize,
)

__all__ = [
    "PidConfig",
    "DobConfig",
    "ImpedanceConfig",
    "LeakyState",
    "DisturbanceObserver",
    "ForceController",
    "q_filter",
    "pid_transfer_function",
    "build_force_controller",
    "force_control_step",
    "impedance_step",
    "leaky_step",
]

_SQRT2 = math.sqrt(2.0)


@dataclass
class PidConfig:
    """PID gains plus the derivative low-pass pole ``lam`` (rad/s).

    ``from_gain_row`` applies the gain-table convention lam = 1e-3 *
    lambda_c; pass ``lam`` directly to bypass it.
    """

    k_p: float
    k_i: float
    k_d: float
    lam: float

    def __post_init__(self):
        if min(self.k_p, self.k_i, self.k_d) < 0.0:
            raise ValueError("PID gains must be non-negative")
        if self.lam <= 0.0:
            raise ValueError("derivative filter pole must be positive")

    @classmethod
    def from_gain_row(cls, k_p: float, k_i: float, k_d: float, lambda_c: float) -> "PidConfig":
        return cls(k_p, k_i, k_d, 1e-3 * lambda_c)


def pid_transfer_function(cfg: PidConfig) -> ContinuousTransferFunction:
    """Rational form of the PID with filtered derivative.

    C(s) = k_p + k_i/s + k_d*lam*s/(s + lam)
         = ((k_p + k_d*lam) s^2 + (k_p*lam + k_i) s + k_i*lam) / (s^2 + lam*s)
    """
    kp, ki, kd, lam = cfg.k_p, cfg.k_i, cfg.k_d, cfg.lam
    return ContinuousTransferFunction(
        [kp + kd * lam, kp * lam + ki, ki * lam], [1.0, lam, 0.0]
    )


def q_filter(omega_c: float) -> ContinuousTransferFunction:
    """Third-order low-pass with unity DC gain and |Q(j*omega_c)| = 1/2.

    Q(s) = wc^3 / (s^3 + (sqrt2 + 1) wc s^2 + (1 + sqrt2) wc^2 s + wc^3)
    """
    if omega_c <= 0.0:
        raise ValueError("cutoff must be positive")
    wc = float(omega_c)
    return ContinuousTransferFunction(
        [wc**3],
        [1.0, (_SQRT2 + 1.0) * wc, (1.0 + _SQRT2) * wc**2, wc**3],
    )


@dataclass
class DobConfig:
    """Disturbance-observer parameters.

    ``gamma`` is clamped into [0, 1] (it is a hand-tuned knob, not a hard
    constraint).  ``plant`` is the nominal model whose inverse the observer
    applies behind the Q filter.
    """

    omega_c: float
    gamma: float
    plant: ContinuousTransferFunction

    def __post_init__(self):
        if self.omega_c <= 0.0:
            raise ValueError("Q-filter cutoff must be positive")
        self.gamma = min(1.0, max(0.0, float(self.gamma)))


@dataclass
class ImpedanceConfig:
    """Virtual spring/damper gains in actuator space (N/m, N s/m)."""

    k: float
    b: float

    def __post_init__(self):
        if self.k < 0.0 or self.b < 0.0:
            raise ValueError("impedance gains must be non-negative")


def impedance_step(cfg: ImpedanceConfig, q_a_d, qdot_a_d, q_a_hat, qdot_a_hat, f_ff_d):
    """Desired actuator force from setpoint errors plus feedforward.

    f_d = (q_a_d - q_a_hat) k + (qdot_a_d - qdot_a_hat) b + f_ff_d
    Stateless; works elementwise on scalars or arrays.
    """
    return (q_a_d - q_a_hat) * cfg.k + (qdot_a_d - qdot_a_hat) * cfg.b + f_ff_d


@dataclass
class LeakyState:
    """Leaky-integration state: alpha-filtered setpoint recursions.

    alpha_v leaks the velocity setpoint toward zero, alpha_p leaks the
    position setpoint toward the measured position.  With both alphas at
    zero the recursions reduce to plain Euler integration (and wind up).
    """

    alpha_v: float
    alpha_p: float
    dT: float
    q_bar_d: float = 0.0
    qdot_bar_d: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.alpha_v <= 1.0 and 0.0 <= self.alpha_p <= 1.0):
            raise ValueError("alpha rates must lie in [0, 1]")
        if self.dT <= 0.0:
            raise ValueError("step time must be positive")


def leaky_step(st: LeakyState, qddot_d, q_measured):
    """Advance both setpoint recursions one step and return (q_bar_d, qdot_bar_d).

    The position update uses the pre-update velocity:

        qdot[k+1] = qddot[k] dT + (1 - alpha_v) qdot[k]
        q[k+1]    = qdot[k] dT + (1 - alpha_p) q[k] + alpha_p q_meas[k]
    """
    v_next = qddot_d * st.dT + (1.0 - st.alpha_v) * st.qdot_bar_d
    p_next = st.qdot_bar_d * st.dT + (1.0 - st.alpha_p) * st.q_bar_d + st.alpha_p * q_measured
    st.qdot_bar_d = v_next
    st.q_bar_d = p_next
    return p_next, v_next


class DisturbanceObserver:
    """Disturbance estimator d_hat = (Q/P)(f_measured) - Q(u_prev).

    ``estimate`` consumes the current force measurement; ``commit`` stores
    the command actually applied so the next estimate compares against it.
    """

    def __init__(self, inv_plant: DiscreteIirFilter, q: DiscreteIirFilter, gamma: float):
        if inv_plant.T != q.T:
            raise ValueError("observer filters must share the sample period")
        self.inv_plant = inv_plant
        self.q = q
        self.gamma = min(1.0, max(0.0, float(gamma)))
        self.u_prev = 0.0
        self.d_hat = 0.0

    def estimate(self, f_measured: float) -> float:
        self.d_hat = self.inv_plant.step(f_measured) - self.q.step(self.u_prev)
        return self.d_hat

    def commit(self, u: float) -> None:
        self.u_prev = u

    def reset(self) -> None:
        self.inv_plant.reset()
        self.q.reset()
        self.u_prev = 0.0
        self.d_hat = 0.0


class ForceController:
    """PID + feedforward + DOB force loop producing motor-current commands.

    One instance per actuator; stateful, single-owner.  A non-finite input
    raises the ``fault`` flag and holds the previous command instead of
    propagating NaN into the filters.
    """

    def __init__(self, pid: DiscreteIirFilter, dob: DisturbanceObserver,
                 k_ff: float, ff_scale: float = 1e-3):
        if pid.T != dob.q.T:
            raise ValueError("controller filters must share the sample period")
        self.pid = pid
        self.dob = dob
        self.k_ff = float(k_ff)
        self.ff_scale = float(ff_scale)
        self.u_prev = 0.0
        self.fault = False

    @property
    def gamma(self) -> float:
        return self.dob.gamma

    @property
    def d_hat(self) -> float:
        return self.dob.d_hat

    def step(self, f_desired: float, f_measured: float) -> float:
        """One control tick: returns the motor current command in amperes."""
        if not (math.isfinite(f_desired) and math.isfinite(f_measured)):
            self.fault = True
            return self.u_prev
        d_hat = self.dob.estimate(f_measured)
        i_m = (
            self.pid.step(f_desired - f_measured)
            + self.k_ff * self.ff_scale * f_desired
            - self.dob.gamma * d_hat
        )
        self.dob.commit(i_m)
        self.u_prev = i_m
        return i_m

    def reset(self) -> None:
        self.pid.reset()
        self.dob.reset()
        self.u_prev = 0.0
        self.fault = False


def build_force_controller(pid: PidConfig, dob: DobConfig, k_ff: float, T: float,
                           ff_scale: float = 1e-3) -> ForceController:
    """Discretize the loop components and assemble a ForceController.

    The PID comes from its rational form; Q and Q/P are each discretized as
    single composite transfer functions (not cascades) to minimize rounding.
    The inverse plant is only causal behind Q, so the plant's relative
    degree must not exceed Q's order.
    """
    if T <= 0.0:
        raise ValueError("sample period must be positive")
    if dob.omega_c >= math.pi / T:
        raise NyquistError(
            f"Q-filter cutoff {dob.omega_c:g} rad/s is at or above the "
            f"Nyquist rate {math.pi / T:g} rad/s"
        )
    q = q_filter(dob.omega_c)
    inv_plant = ContinuousTransferFunction(
        np.convolve(q.num, dob.plant.den), np.convolve(q.den, dob.plant.num)
    )  # raises CausalityError when Q cannot make 1/P proper
    observer = DisturbanceObserver(
        inv_plant=bilinear_discretize(inv_plant, T),
        q=bilinear_discretize(q, T),
        gamma=dob.gamma,
    )
    return ForceController(
        pid=bilinear_discretize(pid_transfer_function(pid), T),
        dob=observer,
        k_ff=k_ff,
        ff_scale=ff_scale,
    )


def force_control_step(fc: ForceController, f_desired: float, f_measured: float) -> float:
    """Functional alias for ``ForceController.step``."""
    return fc.step(f_desired, f_measured)
