"""Benchmark plants, the excitation input and fixed-step integrators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import CONTINUOUS, DISCRETE, Trajectory
from .errors import NonFiniteState, UnknownName

LINEAR = "linear_ss"
SCALAR_NONLINEAR = "scalar_nonlinear"


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Single-input single-output plant.

    ``LINEAR``: x' = A x + B u, y = C x + D u.
    ``SCALAR_NONLINEAR``: x' = c3 x^3 + c1 x + cu u, y = ky x + ku u.
    """

    kind: str
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    C: np.ndarray | None = None
    D: float = 0.0
    c3: float = 0.0
    c1: float = 0.0
    cu: float = 0.0
    ky: float = 0.0
    ku: float = 0.0
    x0: np.ndarray | float | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind == LINEAR:
            A = np.atleast_2d(np.array(self.A, dtype=float))
            n = A.shape[0]
            if n < 1 or A.shape != (n, n):
                raise ValueError(f"A must be square, got shape {A.shape}")
            B = np.array(self.B, dtype=float).reshape(-1)
            C = np.array(self.C, dtype=float).reshape(-1)
            if B.size != n or C.size != n:
                raise ValueError(f"B and C must have {n} entries")
            x0 = np.zeros(n) if self.x0 is None else np.array(self.x0, dtype=float).reshape(-1)
            if x0.size != n:
                raise ValueError(f"x0 must have {n} entries")
            for name, arr in (("A", A), ("B", B), ("C", C), ("x0", x0)):
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
            object.__setattr__(self, "D", float(self.D))
        elif self.kind == SCALAR_NONLINEAR:
            object.__setattr__(self, "x0", 0.0 if self.x0 is None else float(self.x0))
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")

    @property
    def order(self) -> int:
        return self.A.shape[0] if self.kind == LINEAR else 1

    def deriv(self, x, u):
        if self.kind == LINEAR:
            return self.A @ x + self.B * u
        return self.c3 * x ** 3 + self.c1 * x + self.cu * u

    def output(self, x, u) -> float:
        if self.kind == LINEAR:
            return float(self.C @ x) + self.D * u
        return self.ky * x + self.ku * u


def builtin_system(name: str) -> SystemModel:
    """The four benchmark plants, all starting from rest."""
    key = name.upper()
    if key == "H1":
        return SystemModel(LINEAR,
                           A=[[-0.261, 1.027, -0.074],
                              [-0.8786, -0.184, -0.644],
                              [0.537, 0.364, -0.576]],
                           B=[0.0, 0.936, 0.0], C=[-3.020, -1.103, -1.032], D=0.0, name="H1")
    if key == "H2":
        return SystemModel(LINEAR,
                           A=[[-0.681, 0.495, -0.651],
                              [0.107, -0.815, -0.686],
                              [0.811, 0.487, -0.466]],
                           B=[0.133, 0.0, -1.399], C=[0.0, 0.0, 1.025], D=-0.380, name="H2")
    if key == "H3":
        return SystemModel(SCALAR_NONLINEAR, c3=-1.0, c1=-1.0, cu=-1.0, ky=2.0, ku=1.0, name="H3")
    if key == "H4":
        return SystemModel(SCALAR_NONLINEAR, c3=-1.0, c1=-1.0 / 3.0, cu=-2.0 / 3.0,
                           ky=2.0 / 3.0, ku=4.0 / 3.0, name="H4")
    raise UnknownName(f"no built-in system named {name!r}")


# excitation offset a and cosine frequency b per plant
BENCH_INPUT_PARAMS = {"H1": (16.71, 1.02), "H2": (9.71, 0.96), "H3": (4.71, 0.1), "H4": (4.71, 0.1)}


@dataclass(frozen=True)
class InputSpec:
    """u(t) = a + cos_amp*cos(b t) + pulse_amp*pulse(2t) + noise_amp*v(t).

    ``pulse(tau)`` is a unit-period, 50 % duty square wave that is high while
    ``frac(tau + pulse_phase) < 0.5``; phase 0 starts high, phase 0.5 starts low.
    ``v`` is one standard-normal draw per sample step from ``default_rng(seed)``.
    """

    a: float = 0.0
    b: float = 0.0
    noise_amp: float = 0.01
    seed: int = 0
    pulse_phase: float = 0.0
    cos_amp: float = 1.0
    pulse_amp: float = 1.0

    @classmethod
    def zero(cls) -> "InputSpec":
        return cls(noise_amp=0.0, cos_amp=0.0, pulse_amp=0.0)

    def pulse(self, tau):
        return ((np.asarray(tau, dtype=float) + self.pulse_phase) % 1.0 < 0.5).astype(float)

    def smooth(self, t):
        return self.a + self.cos_amp * np.cos(self.b * np.asarray(t, dtype=float))

    def noise(self, n: int) -> np.ndarray:
        if self.noise_amp == 0.0:
            return np.zeros(n)
        return self.noise_amp * np.random.default_rng(self.seed).standard_normal(n)


def benchmark_input(name: str, seed: int = 0, noise_amp: float = 0.01,
                    pulse_phase: float = 0.5) -> InputSpec:
    a, b = BENCH_INPUT_PARAMS[name.upper()]
    return InputSpec(a=a, b=b, noise_amp=noise_amp, seed=seed, pulse_phase=pulse_phase)


def input_signal(spec: InputSpec, t: float, dt: float = 1e-3) -> float:
    """Input value at time ``t``; the noise term is that of sample step ``floor(t/dt)``."""
    value = float(spec.smooth(t)) + spec.pulse_amp * float(spec.pulse(2.0 * t))
    if spec.noise_amp:
        step = int(math.floor(t / dt + 1e-9))
        value += float(spec.noise(step + 1)[step])
    return value


def _rk4_inputs(spec: InputSpec, n: int, dt: float):
    k = np.arange(n)
    t = k * dt
    v = spec.noise(n)
    # the pulse is held at its mid-step value so switches on the grid stay exact
    held = spec.pulse_amp * spec.pulse(2.0 * (t + 0.5 * dt)) + v
    u_rec = spec.smooth(t) + spec.pulse_amp * spec.pulse(2.0 * t) + v
    u_mid = spec.smooth(t + 0.5 * dt) + held
    u_end = spec.smooth(t + dt) + held
    u_start = spec.smooth(t) + held
    return t, u_rec, u_start, u_mid, u_end


def simulate(model: SystemModel, spec: InputSpec, t_end: float = 100.0, dt: float = 1e-3,
             decimation: int = 1) -> Trajectory:
    """Classical RK4 at fixed step ``dt`` over ``[0, t_end)``.

    Sample ``k`` pairs the input at ``t_k = k*dt`` with the output of the state
    reached at ``t_k``. Every ``decimation``-th step is kept.
    """
    if not (dt > 0 and t_end > 0):
        raise ValueError("dt and t_end must be positive")
    n = int(round(t_end / dt))
    t, u_rec, u0, um, ue = _rk4_inputs(spec, n, dt)
    y = np.empty(n)
    if model.kind == LINEAR:
        _run_linear(model, dt, u_rec, u0, um, ue, y)
    else:
        _run_scalar(model, dt, u_rec, u0, um, ue, y)
    keep = slice(None, None, decimation)
    return Trajectory(t[keep], u_rec[keep], y[keep], CONTINUOUS)


def _rk4_linear_step(A, B, h):
    """Affine form of one classical RK4 step for x' = A x + B u.

    Returns ``(Phi, G)`` with ``x+ = Phi x + G @ (u_start, u_mid, u_end)``; RK4 is
    linear in the state and the stage inputs, so this is the same polynomial.
    """
    n = A.shape[0]
    hA = h * A
    eye = np.eye(n)
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    phi = eye + hA + hA2 / 2.0 + hA3 / 6.0 + hA3 @ hA / 24.0
    hB = h * B
    g_start = (eye / 6.0 + hA / 6.0 + hA2 / 12.0 + hA3 / 24.0) @ hB
    g_mid = (2.0 * eye / 3.0 + hA / 3.0 + hA2 / 12.0) @ hB
    g_end = hB / 6.0
    return phi, np.column_stack([g_start, g_mid, g_end])


def _run_linear(model, h, u_rec, u0, um, ue, y):
    phi, g = _rk4_linear_step(model.A, model.B, h)
    drive = np.column_stack([u0, um, ue]) @ g.T
    n = u_rec.size
    xs = np.empty((n, model.order))
    x = model.x0.copy()
    for k in range(n):
        xs[k] = x
        x = phi @ x + drive[k]
    bad = ~np.isfinite(xs).all(axis=1)
    if bad.any():
        raise NonFiniteState(f"state diverged at step {int(np.argmax(bad))}")
    y[:] = xs @ model.C + model.D * u_rec


def _run_scalar(model, h, u_rec, u0, um, ue, y):
    c3, c1, cu, ky, ku = model.c3, model.c1, model.cu, model.ky, model.ku
    u_rec, u0, um, ue = (a.tolist() for a in (u_rec, u0, um, ue))
    x = model.x0
    try:
        for k in range(len(u_rec)):
            y[k] = ky * x + ku * u_rec[k]
            k1 = c3 * x * x * x + c1 * x + cu * u0[k]
            xa = x + 0.5 * h * k1
            k2 = c3 * xa * xa * xa + c1 * xa + cu * um[k]
            xa = x + 0.5 * h * k2
            k3 = c3 * xa * xa * xa + c1 * xa + cu * um[k]
            xa = x + h * k3
            k4 = c3 * xa * xa * xa + c1 * xa + cu * ue[k]
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not math.isfinite(x):
                raise NonFiniteState(f"state diverged at step {k}")
    except OverflowError:
        raise NonFiniteState(f"state overflowed at step {k}") from None


@dataclass(frozen=True)
class DiscreteMap:
    """x(t+1) = f(x(t), u(t)), y(t) = h(x(t), u(t))."""

    f: Callable
    h: Callable
    x0: object = 0.0


def _as_map(model) -> DiscreteMap:
    if isinstance(model, DiscreteMap):
        return model
    x0 = model.x0.copy() if model.kind == LINEAR else model.x0
    return DiscreteMap(model.deriv, model.output, x0)


def simulate_discrete(model, spec: InputSpec, n_steps: int) -> Trajectory:
    """Iterate a discrete-time map; sample times are the step indices."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    m = _as_map(model)
    t = np.arange(n_steps, dtype=float)
    u = spec.smooth(t) + spec.pulse_amp * spec.pulse(2.0 * t) + spec.noise(n_steps)
    y = np.empty(n_steps)
    x = m.x0
    for k in range(n_steps):
        y[k] = float(m.h(x, u[k]))
        x = m.f(x, u[k])
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"state diverged at step {k}")
    return Trajectory(t, u, y, DISCRETE)
