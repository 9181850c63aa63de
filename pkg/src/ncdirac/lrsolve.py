"""Closed forms and numerical cross-checks for the spinor envelope and the
phase-exponent coefficients of the trial solution, plus the accumulated
dynamical phase.

State-vector convention for the ODE system: y = (xi1, xi2, xi3, xi4, F1, F2),
all complex. The envelope components are pure phase rotations
F1 = e^{-i m t + q1}, F2 = e^{+i m t + q2}; xi1 and xi2 are locked together by
xi1 = i*xi2; xi3, xi4 are constants of the motion.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CoverageError, SingularParameterError, StepError
from .ncmodel import NCParams, f_eta, f_theta


def magnetic_length(p: NCParams) -> float:
    """l_B with 1/l_B = sqrt(e*B), the natural length scale of the problem."""
    eb = p.e * p.B
    if eb <= 0:
        raise SingularParameterError("magnetic length requires e*B > 0")
    return 1.0 / math.sqrt(eb)


@dataclass(frozen=True)
class SpinorEnvelope:
    """Two-component envelope with constant moduli e^{q1}, e^{q2}."""

    F1: Callable[[float], complex]
    F2: Callable[[float], complex]
    q1: float
    q2: float


def f_closed(p: NCParams, t: float) -> tuple[complex, complex]:
    """Envelope components F1 = e^{-i m t + q1}, F2 = e^{+i m t + q2}."""
    return (
        cmath.exp(complex(p.q1, -p.m * t)),
        cmath.exp(complex(p.q2, p.m * t)),
    )


def envelope(p: NCParams) -> SpinorEnvelope:
    return SpinorEnvelope(
        F1=lambda t: f_closed(p, t)[0],
        F2=lambda t: f_closed(p, t)[1],
        q1=p.q1,
        q2=p.q2,
    )


def xi_closed(p: NCParams, t: float) -> tuple[complex, complex]:
    """Closed-form linear phase coefficients.

    xi1(t) = -i * [ kappa*e*B/(4 i m) * e^{2 i m t}
                    + eta*kappa/(4 i m - 2 gamma) * e^{(-gamma + 2 i m) t} ],
    xi2(t) = xi1(t)/i. Requires m != 0 (the first term divides by m).
    """
    if p.m == 0:
        raise SingularParameterError("closed-form xi coefficients involve 1/m; need m != 0")
    eb = p.e * p.B
    term_b = (p.kappa * eb) / (4j * p.m) * cmath.exp(2j * p.m * t)
    term_eta = (p.eta * p.kappa) / (4j * p.m - 2.0 * p.gamma) * cmath.exp(
        (-p.gamma + 2j * p.m) * t
    )
    xi1 = -1j * (term_b + term_eta)
    return xi1, xi1 / 1j


@dataclass(frozen=True)
class XiFunctions:
    """Phase-exponent coefficients: xi1, xi2 as functions of t; xi3, xi4 constant."""

    xi1: Callable[[float], complex]
    xi2: Callable[[float], complex]
    xi3: complex
    xi4: complex


def closed_xi(p: NCParams, xi3: complex = 0.0, xi4: complex = 0.0) -> XiFunctions:
    xi_closed(p, 0.0)  # surfaces SingularParameterError early
    return XiFunctions(
        xi1=lambda t: xi_closed(p, t)[0],
        xi2=lambda t: xi_closed(p, t)[1],
        xi3=complex(xi3),
        xi4=complex(xi4),
    )


# -- ODE system ---------------------------------------------------------------

_IDX = {"xi1": 0, "xi2": 1, "xi3": 2, "xi4": 3, "F1": 4, "F2": 5}


def flow_rhs(p: NCParams, t: float, y: np.ndarray) -> np.ndarray:
    """Right-hand side of the coupled system on y = (xi1..xi4, F1, F2):

    dF1/dt = -i m F1, dF2/dt = +i m F2,
    dxi1/dt = -i f_eta(t) F2/F1, dxi2/dt = -f_eta(t) F2/F1,
    dxi3/dt = dxi4/dt = 0.
    """
    f1 = y[4]
    f2 = y[5]
    if f1 == 0:
        raise ZeroDivisionError("envelope component F1 vanished")
    ratio = f2 / f1
    fe = f_eta(p, t)
    out = np.zeros(6, dtype=complex)
    out[0] = -1j * fe * ratio
    out[1] = -fe * ratio
    out[4] = -1j * p.m * f1
    out[5] = 1j * p.m * f2
    return out


def closed_state(p: NCParams, t: float, xi3: complex = 0.0, xi4: complex = 0.0) -> np.ndarray:
    """Closed-form state vector at time t."""
    x1, x2 = xi_closed(p, t)
    g1, g2 = f_closed(p, t)
    return np.array([x1, x2, complex(xi3), complex(xi4), g1, g2], dtype=complex)


def xi_ode_rhs(p: NCParams, t: float) -> np.ndarray:
    """System derivatives evaluated along the closed-form trajectory."""
    return flow_rhs(p, t, closed_state(p, t))


@dataclass(frozen=True)
class Trajectory:
    """RK4 trajectory with the closed-form values and deviations alongside."""

    times: np.ndarray
    states: np.ndarray  # (n, 6) complex, integrated
    closed: np.ndarray  # (n, 6) complex, closed forms
    max_deviation: dict[str, float]

    def deviation(self, name: str) -> np.ndarray:
        k = _IDX[name]
        return np.abs(self.states[:, k] - self.closed[:, k])


def integrate_rk4(
    p: NCParams,
    t0: float,
    t1: float,
    dt: float,
    xi3: complex = 0.0,
    xi4: complex = 0.0,
) -> Trajectory:
    """Classical RK4 on the coupled system, seeded with the closed forms at t0.

    Every step is recorded together with the closed-form values, so the
    trajectory doubles as an integration-vs-closed-form comparison.
    """
    if dt <= 0:
        raise StepError("dt must be positive")
    if t1 <= t0:
        raise StepError("t1 must exceed t0")
    if dt > (t1 - t0):
        raise StepError("dt exceeds the integration interval")
    n_steps = max(1, int(round((t1 - t0) / dt)))
    h = (t1 - t0) / n_steps
    times = t0 + h * np.arange(n_steps + 1)
    states = np.zeros((n_steps + 1, 6), dtype=complex)
    closed = np.zeros((n_steps + 1, 6), dtype=complex)
    y = closed_state(p, t0, xi3, xi4)
    states[0] = y
    closed[0] = y
    for k in range(n_steps):
        t = times[k]
        k1 = flow_rhs(p, t, y)
        k2 = flow_rhs(p, t + 0.5 * h, y + 0.5 * h * k1)
        k3 = flow_rhs(p, t + 0.5 * h, y + 0.5 * h * k2)
        k4 = flow_rhs(p, t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = y
        closed[k + 1] = closed_state(p, times[k + 1], xi3, xi4)
    devs = np.abs(states - closed)
    max_dev = {name: float(devs[:, k].max()) for name, k in _IDX.items()}
    return Trajectory(times=times, states=states, closed=closed, max_deviation=max_dev)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV export: t, Re/Im of xi1, xi2, F1, F2, and closed-form deviations."""
    cols = ("xi1", "xi2", "F1", "F2")
    header = ["t"]
    for name in cols:
        header += [f"re_{name}", f"im_{name}"]
    header += [f"dev_{name}" for name in cols]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, t in enumerate(traj.times):
            row = [format(float(t), ".17g")]
            for name in cols:
                v = traj.states[i, _IDX[name]]
                row += [format(v.real, ".17g"), format(v.imag, ".17g")]
            for name in cols:
                row.append(format(abs(traj.states[i, _IDX[name]] - traj.closed[i, _IDX[name]]), ".17g"))
            w.writerow(row)


# -- phases and assembled solution --------------------------------------------


def theta_phase(xi: XiFunctions, x: float, y: float, t: float) -> complex:
    """Coordinate part of the accumulated phase:
    (xi1(0)-xi1(t)) x + (xi2(0)-xi2(t)) y + (xi3(0)-xi3(t)) x^2 + (xi4(0)-xi4(t)) y^2.

    The quadratic differences vanish identically because xi3, xi4 are constant.
    """
    d1 = xi.xi1(0.0) - xi.xi1(t)
    d2 = xi.xi2(0.0) - xi.xi2(t)
    return d1 * x + d2 * y  # xi3, xi4 constant -> quadratic terms cancel


def energy_integral(
    e_times: Sequence[float], e_values: Sequence[float], t: float
) -> tuple[complex, float]:
    """Composite-trapezoid integral of the sampled energy over [0, t] with a
    grid-spacing error estimate. Linear interpolation handles an endpoint
    falling between samples."""
    ts = np.asarray(e_times, dtype=float)
    vs = np.asarray(e_values)
    if ts.size < 2:
        raise CoverageError("energy series needs at least 2 samples")
    if np.any(np.diff(ts) <= 0):
        raise CoverageError("energy series times must be strictly increasing")
    if ts[0] > 0.0 + 1e-15 or ts[-1] < t - 1e-15:
        raise CoverageError(
            f"energy series [{ts[0]}, {ts[-1]}] does not cover [0, {t}]"
        )
    mask = ts <= t
    sub_t = ts[mask]
    sub_v = vs[mask]
    if sub_t.size == 0 or sub_t[-1] < t:
        v_end = np.interp(t, ts, vs.real) + 1j * np.interp(t, ts, vs.imag)
        sub_t = np.append(sub_t, t)
        sub_v = np.append(sub_v, v_end)
    integral = complex(np.trapezoid(sub_v, sub_t))
    # trapezoid error ~ (h^2/12) * integral of |E''|, from second differences
    err = 0.0
    if sub_t.size >= 3:
        h = np.diff(sub_t)
        d2 = np.abs(np.diff(sub_v, 2))
        err = float(np.sum(d2) * np.max(h) / 12.0)
    return integral, err


def lr_phase(
    theta: complex, e_times: Sequence[float], e_values: Sequence[float], t: float
) -> complex:
    """Accumulated phase alpha(t) = theta - integral_0^t E dt'."""
    integral, _ = energy_integral(e_times, e_values, t)
    return theta - integral


def assemble_solution(env: SpinorEnvelope, xi: XiFunctions):
    """Spinor field evaluator
    psi(x, y, t) = (F1(t), F2(t))^T * exp[i(xi1 x + xi2 y + xi3 x^2 + xi4 y^2)].

    x and y may be arrays; the result broadcasts to shape (2,) + shape(x).
    """

    def psi(x, y, t: float) -> np.ndarray:
        phase = np.exp(
            1j
            * (
                xi.xi1(t) * np.asarray(x)
                + xi.xi2(t) * np.asarray(y)
                + xi.xi3 * np.asarray(x) ** 2
                + xi.xi4 * np.asarray(y) ** 2
            )
        )
        return np.stack(
            [env.F1(t) * phase, env.F2(t) * phase], axis=0
        )

    return psi


def superpose(evaluators: Sequence, coeffs: Sequence[complex]):
    """Linear combination of spinor field evaluators with fixed coefficients."""
    if len(evaluators) != len(coeffs):
        raise ValueError("need one coefficient per evaluator")

    def psi(x, y, t: float) -> np.ndarray:
        acc = None
        for c, f in zip(coeffs, evaluators):
            term = c * f(x, y, t)
            acc = term if acc is None else acc + term
        return acc

    return psi


def trial_residual(
    p: NCParams, env: SpinorEnvelope, xi: XiFunctions, x: float, y: float, t: float
) -> np.ndarray:
    """Diagnostic: pointwise i d(psi)/dt - H psi for the assembled solution.

    All derivatives are analytic: momenta act as p_x psi = (xi1 + 2 xi3 x) psi.
    The value is reported, not asserted; the first component vanishes
    identically when xi3 = xi4 = 0, the second generally does not.
    """
    x1 = xi.xi1(t)
    x2 = xi.xi2(t)
    g1, g2 = env.F1(t), env.F2(t)
    fe = f_eta(p, t)
    ft = f_theta(p, t)
    phase = cmath.exp(1j * (x1 * x + x2 * y + xi.xi3 * x * x + xi.xi4 * y * y))
    # momenta applied to the exponential
    px_val = x1 + 2.0 * xi.xi3 * x
    py_val = x2 + 2.0 * xi.xi4 * y
    u = ft * px_val + fe * y
    v = ft * py_val - fe * x
    h_psi = np.array(
        [
            (u - 1j * v) * g2 + p.m * g1,
            (u + 1j * v) * g1 - p.m * g2,
        ],
        dtype=complex,
    ) * phase
    # i d/dt: envelope rotation plus the moving linear phase
    ratio = g2 / g1
    dxi1 = -1j * fe * ratio
    dxi2 = -fe * ratio
    phase_dot = dxi1 * x + dxi2 * y
    dpsi_dt = np.array(
        [
            (-1j * p.m * g1 + 1j * g1 * phase_dot) * phase,
            (1j * p.m * g2 + 1j * g2 * phase_dot) * phase,
        ],
        dtype=complex,
    )
    return 1j * dpsi_dt - h_psi
