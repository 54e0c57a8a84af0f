"""Deterministic simulator of the elastic actuator testbed and pendulum.

The actuator is the identified third-order current-to-force model in a
controllable-canonical realization, advanced with RK4 (for a linear system
with held input one RK4 substep is exactly a constant matrix recurrence,
which is precomputed per substep size).  Injectable perturbations stand in
for everything the disturbance observer must absorb: multiplicative
denominator/gain perturbation (structural-elasticity emulation), a Karnopp
stiction dead-band on the effective input, and a hysteretic backlash play.

The pendulum is the nonlinear 1-DoF load; scenarios couple it to the
actuator through the small-angle testbed geometry q_a = l2 * theta and
tau = l2 * f.  ``run_scenario`` executes the two-rate loop (reference rate
/ controller rate / plant substep rate) and returns a uniformly sampled
log that serializes to CSV bit-reproducibly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .control import (
    DisturbanceObserver,
    DobConfig,
    ForceController,
    ImpedanceConfig,
    PidConfig,
    build_force_controller,
    impedance_step,
    q_filter,
)
from .kinematics import PendulumMap, actuator_setpoints, ff_force
from .lti import ContinuousTransferFunction, bilinear_discretize
from .sysid import exponential_chirp_point, linear_chirp_point

__all__ = [
    "SimulationFault",
    "nominal_lsea_tf",
    "BacklashPlay",
    "LseaPlant",
    "lsea_step",
    "PendulumState",
    "pendulum_step",
    "free_oscillation_frequency",
    "PlantConfig",
    "PendulumConfig",
    "ReferenceSpec",
    "SimScenario",
    "SimLog",
    "run_scenario",
]

NOMINAL_NUM = (208.8,)
NOMINAL_DEN = (0.01, 1.13, 23.04, 987.0)


class SimulationFault(RuntimeError):
    """A scenario produced a non-finite value; carries the fault time."""

    def __init__(self, time: float, what: str = "non-finite value"):
        super().__init__(f"{what} at t = {time:.6f} s")
        self.time = time


def nominal_lsea_tf() -> ContinuousTransferFunction:
    """Identified nominal current-to-force model of the actuator testbed."""
    return ContinuousTransferFunction(NOMINAL_NUM, NOMINAL_DEN)


class BacklashPlay:
    """Hysteretic play operator of total width ``width``.

    The output follows the input only once the gap closes on either side;
    inside the gap it holds.
    """

    def __init__(self, width: float):
        if width < 0.0:
            raise ValueError("play width must be non-negative")
        self.width = float(width)
        self.output = 0.0

    def step(self, x: float) -> float:
        half = 0.5 * self.width
        if x - self.output > half:
            self.output = x - half
        elif self.output - x > half:
            self.output = x + half
        return self.output

    def reset(self, output: float = 0.0) -> None:
        self.output = output


class LseaPlant:
    """Perturbable realization of the third-order actuator model.

    ``den_factors`` multiply the four denominator coefficients and
    ``gain_factor`` the numerator gain.  Stiction follows a Karnopp model:
    while the output rate is inside the velocity dead-band and the input
    magnitude is below the breakaway threshold, the effective input is
    zero.  ``backlash`` applies a hysteretic play of that width to the
    transmitted output.
    """

    def __init__(self, den_factors=(1.0, 1.0, 1.0, 1.0), gain_factor: float = 1.0,
                 stiction_breakaway: float = 0.0,
                 stiction_velocity_deadband: float = 0.5,
                 backlash: float = 0.0):
        factors = np.asarray(den_factors, dtype=float).ravel()
        if factors.size != 4 or np.any(factors <= 0.0):
            raise ValueError("den_factors must be four positive multipliers")
        if gain_factor <= 0.0:
            raise ValueError("gain_factor must be positive")
        if stiction_breakaway < 0.0 or stiction_velocity_deadband < 0.0:
            raise ValueError("stiction parameters must be non-negative")
        den = np.asarray(NOMINAL_DEN) * factors
        gain = NOMINAL_NUM[0] * gain_factor
        self.tf = ContinuousTransferFunction([gain], den)
        a = den / den[0]
        self._c1, self._c2, self._c3 = float(a[1]), float(a[2]), float(a[3])
        self._cy = gain / den[0]
        self.stiction_breakaway = float(stiction_breakaway)
        self.stiction_velocity_deadband = float(stiction_velocity_deadband)
        self._play = BacklashPlay(backlash) if backlash > 0.0 else None
        self._x0 = self._x1 = self._x2 = 0.0
        self._step_cache: dict[float, tuple] = {}

    def dc_gain(self) -> float:
        return self.tf.dc_gain()

    def reset(self) -> None:
        self._x0 = self._x1 = self._x2 = 0.0
        if self._play is not None:
            self._play.reset()

    def _coeffs(self, dt: float) -> tuple:
        cached = self._step_cache.get(dt)
        if cached is not None:
            return cached
        A = np.array([
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [-self._c3, -self._c2, -self._c1],
        ])
        B = np.array([0.0, 0.0, 1.0])
        # RK4 of a linear system with held input is exact in (M, N) form:
        # x+ = M x + N u with the degree-4 truncations of expm(A dt).
        M = np.eye(3)
        N = np.zeros((3, 3))
        term = np.eye(3)
        for k in range(1, 5):
            N = N + term * dt / math.factorial(k)
            term = term @ A * dt
            M = M + term / math.factorial(k)
        coeffs = (*M.ravel(), *(N @ B))
        self._step_cache[dt] = coeffs
        return coeffs

    def step(self, i_m: float, dt: float) -> float:
        """Advance one RK4 substep with held input; returns the output force."""
        return self.advance(i_m, dt, 1)

    def advance(self, i_m: float, dt: float, substeps: int) -> float:
        """Advance ``substeps`` equal RK4 substeps with held input."""
        if dt <= 0.0:
            raise ValueError("substep must be positive")
        (m00, m01, m02, m10, m11, m12, m20, m21, m22, n0, n1, n2) = self._coeffs(dt)
        x0, x1, x2 = self._x0, self._x1, self._x2
        brk = self.stiction_breakaway
        vdead = self.stiction_velocity_deadband
        cy = self._cy
        play = self._play
        u = float(i_m)
        y = cy * x0
        for _ in range(substeps):
            if brk > 0.0 and abs(cy * x1) < vdead and abs(u) < brk:
                ue = 0.0
            else:
                ue = u
            x0, x1, x2 = (
                m00 * x0 + m01 * x1 + m02 * x2 + n0 * ue,
                m10 * x0 + m11 * x1 + m12 * x2 + n1 * ue,
                m20 * x0 + m21 * x1 + m22 * x2 + n2 * ue,
            )
            y = cy * x0
            if play is not None:
                y = play.step(y)
        self._x0, self._x1, self._x2 = x0, x1, x2
        return y


def lsea_step(p: LseaPlant, i_m: float, dt: float) -> float:
    """Functional alias for ``LseaPlant.step``."""
    return p.step(i_m, dt)


@dataclass
class PendulumState:
    """Weighted-pendulum state and parameters.

    tau = l2 * f drives  m l1^2 theta'' = tau - m g l1 sin(theta) - c theta'.
    """

    theta: float = 0.0
    theta_dot: float = 0.0
    m: float = 10.0
    l1: float = 0.33
    l2: float = 0.07
    g: float = 9.81
    damping: float = 0.0

    def __post_init__(self):
        if min(self.m, self.l1, self.l2) <= 0.0:
            raise ValueError("m, l1, l2 must be positive")

    def energy(self) -> float:
        """Total mechanical energy (datum at the hanging equilibrium)."""
        return (0.5 * self.m * self.l1**2 * self.theta_dot**2
                + self.m * self.g * self.l1 * (1.0 - math.cos(self.theta)))


def _pend_rk4_forced(theta, omega, f_0, f_mid, f_1, dt, m, l1, l2, g, c, trig):
    """RK4 step with the actuator force sampled at the stage times.

    The drive torque is l2 * f, or l2 * cos(theta) * f with the full
    trigonometric coupling.
    """
    inertia = m * l1 * l1
    mgl = m * g * l1

    if trig:
        def acc(th, w, f):
            return (l2 * math.cos(th) * f - mgl * math.sin(th) - c * w) / inertia
    else:
        def acc(th, w, f):
            return (l2 * f - mgl * math.sin(th) - c * w) / inertia

    k1t, k1w = omega, acc(theta, omega, f_0)
    k2t = omega + 0.5 * dt * k1w
    k2w = acc(theta + 0.5 * dt * k1t, k2t, f_mid)
    k3t = omega + 0.5 * dt * k2w
    k3w = acc(theta + 0.5 * dt * k2t, k3t, f_mid)
    k4t = omega + dt * k3w
    k4w = acc(theta + dt * k3t, k4t, f_1)
    return (theta + dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
            omega + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w))


def _pend_rk4(theta, omega, tau, dt, m, l1, g, c):
    return _pend_rk4_forced(theta, omega, tau, tau, tau, dt, m, l1, 1.0, g, c, False)


def pendulum_step(s: PendulumState, f_actuator: float, dt: float) -> PendulumState:
    """One RK4 step of the pendulum driven by actuator force ``f_actuator``."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    th, w = _pend_rk4(s.theta, s.theta_dot, s.l2 * f_actuator, dt,
                      s.m, s.l1, s.g, s.damping)
    return replace(s, theta=th, theta_dot=w)


def free_oscillation_frequency(theta0: float = 0.1, duration: float = 30.0,
                               dt: float = 5e-5, m: float = 10.0, l1: float = 0.33,
                               g: float = 9.81, damping: float = 0.0) -> float:
    """Oscillation frequency of the undriven pendulum, from zero crossings.

    Crossing times are interpolated linearly between samples; the result is
    (crossings - 1) / (2 * span).
    """
    th, w = float(theta0), 0.0
    crossings = []
    t = 0.0
    n = int(round(duration / dt))
    for _ in range(n):
        th_next, w_next = _pend_rk4(th, w, 0.0, dt, m, l1, g, damping)
        if th != 0.0 and (th_next == 0.0 or (th > 0.0) != (th_next > 0.0)):
            crossings.append(t + dt * th / (th - th_next))
        th, w = th_next, w_next
        t += dt
    if len(crossings) < 3:
        raise ValueError("not enough zero crossings; extend the duration")
    return (len(crossings) - 1) / (2.0 * (crossings[-1] - crossings[0]))


@dataclass
class PlantConfig:
    """Buildable description of the simulated actuator (keeps scenarios re-runnable)."""

    den_factors: tuple = (1.0, 1.0, 1.0, 1.0)
    gain_factor: float = 1.0
    stiction_breakaway: float = 0.0
    stiction_velocity_deadband: float = 0.5
    backlash: float = 0.0

    def build(self) -> LseaPlant:
        return LseaPlant(
            den_factors=self.den_factors,
            gain_factor=self.gain_factor,
            stiction_breakaway=self.stiction_breakaway,
            stiction_velocity_deadband=self.stiction_velocity_deadband,
            backlash=self.backlash,
        )


@dataclass
class PendulumConfig:
    """Pendulum parameters for a scenario.

    ``trig_coupling`` switches the actuator coupling from the small-angle
    testbed geometry (q_a = l2 theta, tau = l2 f) to the full trigonometric
    form (q_a = l2 sin(theta), tau = l2 cos(theta) f).
    """

    m: float = 10.0
    l1: float = 0.33
    l2: float = 0.07
    g: float = 9.81
    damping: float = 0.0
    theta0: float = 0.0
    theta_dot0: float = 0.0
    trig_coupling: bool = False


@dataclass
class ReferenceSpec:
    """Reference signal for a scenario.

    kinds: ``zero`` (hold zero force), ``force_step`` (desired force step of
    ``step_value`` at ``step_time``), ``current_chirp`` (open-loop / DOB-loop
    current excitation), ``position_chirp`` (joint-space linear chirp through
    the full controller).  Current chirps may be linear (``omega_o``) or
    exponential (``f_start``/``f_end``).
    """

    kind: str = "zero"
    amplitude: float = 1.0
    omega_o: float | None = None
    f_start: float | None = None
    f_end: float | None = None
    step_value: float = 0.0
    step_time: float = 0.0

    def __post_init__(self):
        kinds = ("zero", "force_step", "current_chirp", "position_chirp")
        if self.kind not in kinds:
            raise ValueError(f"reference kind must be one of {kinds}")
        if self.kind == "position_chirp" and not self.omega_o:
            raise ValueError("position_chirp needs a linear sweep rate omega_o")
        if self.kind == "current_chirp":
            exponential = self.f_start is not None or self.f_end is not None
            if exponential and not (self.f_start and self.f_end):
                raise ValueError("exponential current chirp needs f_start and f_end")
            if not exponential and not self.omega_o:
                raise ValueError("current chirp needs omega_o or f_start/f_end")

    def max_freq_hz(self, duration: float) -> float:
        if self.kind in ("zero", "force_step"):
            return 0.0
        if self.f_start is not None:
            return max(self.f_start, self.f_end)
        return self.omega_o * duration / math.pi


@dataclass
class SimScenario:
    """Configuration of one two-rate controller/plant run."""

    reference: ReferenceSpec
    duration_s: float
    plant: PlantConfig = field(default_factory=PlantConfig)
    pendulum: PendulumConfig | None = None
    pid: PidConfig = field(default_factory=lambda: PidConfig(2.0, 4.0, 0.0, 3.5e-3))
    impedance: ImpedanceConfig = field(default_factory=lambda: ImpedanceConfig(40.0, 5.0))
    k_ff: float = 3.2
    ff_scale: float = 1e-3
    omega_c: float = 2.0 * math.pi * 25.0
    gamma: float = 1.0
    controller_hz: int = 1000
    reference_hz: int = 200
    plant_hz: int = 20000
    estimate_backlash_m: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.duration_s < 0.0:
            raise ValueError("duration must be non-negative")
        for name, hz in (("controller_hz", self.controller_hz),
                         ("reference_hz", self.reference_hz),
                         ("plant_hz", self.plant_hz)):
            if int(hz) != hz or hz <= 0:
                raise ValueError(f"{name} must be a positive integer")
        if self.plant_hz % self.controller_hz != 0:
            raise ValueError("plant rate must be an integer multiple of the controller rate")
        if self.controller_hz % self.reference_hz != 0:
            raise ValueError("controller rate must be an integer multiple of the reference rate")
        # current chirps are generated at the controller rate; position
        # references are communicated at the reference rate
        ny_rate = (self.controller_hz if self.reference.kind == "current_chirp"
                   else self.reference_hz)
        if self.reference.max_freq_hz(self.duration_s) >= 0.5 * ny_rate:
            raise ValueError("reference sweep reaches the generating rate's Nyquist limit")
        if self.pendulum is None and self.reference.kind == "position_chirp":
            raise ValueError("position_chirp needs the pendulum enabled")


LOG_COLUMNS = ("t", "ref_pos", "q_bar_a_d", "qdot_bar_a_d", "f_d", "f_o", "i_m",
               "d_hat", "theta", "theta_dot", "q_hat_a_m", "q_hat_a_j")


@dataclass
class SimLog:
    """Uniformly sampled scenario record (one row per controller step)."""

    t: np.ndarray
    ref_pos: np.ndarray
    q_bar_a_d: np.ndarray
    qdot_bar_a_d: np.ndarray
    f_d: np.ndarray
    f_o: np.ndarray
    i_m: np.ndarray
    d_hat: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    q_hat_a_m: np.ndarray
    q_hat_a_j: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(LOG_COLUMNS) + "\n")
            cols = [self.column(c) for c in LOG_COLUMNS]
            for row in zip(*cols):
                fh.write(",".join(f"{v:.9g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "SimLog":
        with open(path) as fh:
            lines = fh.read().strip().splitlines()
        if len(lines) <= 1:
            data = np.zeros((0, len(LOG_COLUMNS)))
        else:
            data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
        if data.shape[1] != len(LOG_COLUMNS):
            raise ValueError(f"expected {len(LOG_COLUMNS)} columns")
        return cls(**{name: data[:, i] for i, name in enumerate(LOG_COLUMNS)})


def run_scenario(sc: SimScenario) -> SimLog:
    """Run the two-rate loop and return the log.

    Measurements are captured at the start of each controller step (so the
    controller sees the plant state produced by the previous command), the
    command is computed and logged, then the plant (and pendulum, when
    enabled) advance through the substeps with the command held.  Re-running
    an identical scenario yields bit-identical output.
    """
    sc.validate()
    T = 1.0 / sc.controller_hz
    n_steps = int(round(sc.duration_s * sc.controller_hz))
    n_sub = sc.plant_hz // sc.controller_hz
    dt_sub = 1.0 / sc.plant_hz
    ref_div = sc.controller_hz // sc.reference_hz
    ref = sc.reference

    plant = sc.plant.build()
    pend = sc.pendulum
    if pend is not None:
        theta, theta_dot = pend.theta0, pend.theta_dot0
        pmap = PendulumMap(pend.l2)
    else:
        theta = theta_dot = 0.0
        pmap = None
    est_play = BacklashPlay(sc.estimate_backlash_m) if sc.estimate_backlash_m > 0.0 else None

    fc: ForceController | None = None
    dob: DisturbanceObserver | None = None
    if ref.kind == "current_chirp":
        q = q_filter(sc.omega_c)
        plant_model = nominal_lsea_tf()
        inv = ContinuousTransferFunction(
            np.convolve(q.num, plant_model.den), np.convolve(q.den, plant_model.num))
        dob = DisturbanceObserver(bilinear_discretize(inv, T),
                                  bilinear_discretize(q, T), sc.gamma)
    else:
        fc = build_force_controller(
            sc.pid, DobConfig(sc.omega_c, sc.gamma, nominal_lsea_tf()),
            sc.k_ff, T, ff_scale=sc.ff_scale)

    cols = {name: np.zeros(n_steps) for name in LOG_COLUMNS}
    f_o = 0.0
    ref_pos = q_a_d = qdot_a_d = f_ff = 0.0

    # a diverging loop is reported through SimulationFault; the transient
    # overflow on the way to the non-finite values is expected, not a warning
    err_state = np.seterr(over="ignore", invalid="ignore")
    try:
        for k in range(n_steps):
            t = k * T
            if pend is None:
                q_hat_a_j = qdot_hat_a = 0.0
            elif pend.trig_coupling:
                q_hat_a_j = pend.l2 * math.sin(theta)
                qdot_hat_a = pend.l2 * math.cos(theta) * theta_dot
            else:
                q_hat_a_j = pend.l2 * theta
                qdot_hat_a = pend.l2 * theta_dot
            q_hat_a_m = est_play.step(q_hat_a_j) if est_play is not None else q_hat_a_j

            if ref.kind == "position_chirp":
                if k % ref_div == 0:
                    qj_d, qjdot_d, qjddot_d = linear_chirp_point(
                        ref.amplitude, ref.omega_o, t)
                    tau_ff = (pend.m * pend.l1**2 * qjddot_d
                              + pend.m * pend.g * pend.l1 * math.sin(qj_d))
                    q_a_d, qdot_a_d = actuator_setpoints(pmap, qj_d, qjdot_d, theta)
                    f_ff = ff_force(pmap, theta, tau_ff)
                    ref_pos = qj_d
                f_d = impedance_step(sc.impedance, q_a_d, qdot_a_d,
                                     q_hat_a_m, qdot_hat_a, f_ff)
                i_m = fc.step(f_d, f_o)
                d_hat = fc.d_hat
            elif ref.kind == "force_step":
                f_d = ref.step_value if t >= ref.step_time else 0.0
                i_m = fc.step(f_d, f_o)
                d_hat = fc.d_hat
            elif ref.kind == "current_chirp":
                if ref.f_start is not None:
                    u_c, _ = exponential_chirp_point(ref.amplitude, ref.f_start,
                                                     ref.f_end, sc.duration_s, t)
                else:
                    u_c, _, _ = linear_chirp_point(ref.amplitude, ref.omega_o, t)
                d_hat = dob.estimate(f_o)
                i_m = u_c - dob.gamma * d_hat
                dob.commit(i_m)
                f_d = 0.0
            else:  # zero
                f_d = 0.0
                i_m = fc.step(f_d, f_o)
                d_hat = fc.d_hat

            row = (t, ref_pos, q_a_d, qdot_a_d, f_d, f_o, i_m, d_hat,
                   theta, theta_dot, q_hat_a_m, q_hat_a_j)
            for name, value in zip(LOG_COLUMNS, row):
                cols[name][k] = value
            if (not math.isfinite(i_m) or not math.isfinite(f_o)
                    or (fc is not None and fc.fault)):
                raise SimulationFault(t)

            if pend is not None:
                # the force is evaluated at the substep start, midpoint, and
                # end (half-substep plant advances) so the one-way coupled
                # pendulum integration stays 4th order
                half = 0.5 * dt_sub
                for _ in range(n_sub):
                    f_start = f_o
                    f_mid = plant.advance(i_m, half, 1)
                    f_o = plant.advance(i_m, half, 1)
                    theta, theta_dot = _pend_rk4_forced(
                        theta, theta_dot, f_start, f_mid, f_o, dt_sub,
                        pend.m, pend.l1, pend.l2, pend.g, pend.damping,
                        pend.trig_coupling)
            else:
                f_o = plant.advance(i_m, dt_sub, n_sub)
    finally:
        np.seterr(**err_state)

    return SimLog(**cols)
