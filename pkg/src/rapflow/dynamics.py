"""Scalar nonautonomous systems and their sampled trajectories.

Continuous systems x' = f(t, x) are integrated with an embedded
Runge-Kutta-Fehlberg 4(5) pair that lands exactly on every output grid point
t0 + k*dt and bisects the step inside a grid cell until the embedded error
estimate meets ``abs_tol + rel_tol*|x|``; the fifth-order solution is
propagated.  Values and right-hand-side derivatives are stored at every grid
point, and off-grid queries use cubic Hermite interpolation, so interpolated
values at grid points reproduce the stored values exactly.

Discrete systems x_{n+1} = f(n, x_n) are iterated exactly (no integration
error); their trajectories use dt = 1 and integer sample times.

Integration aborts (it never emits NaN/Inf): when |x| crosses the overflow
guard 1e12 a :class:`BlowupError` carrying the last good time is raised; when
the bisected step underflows, :class:`StepUnderflowError`.  Iteration aborts
with :class:`IterationAbortError` carrying the step index when a value leaves
the state domain or an evaluation fails.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .expr import EvalError, Expression, parse

BLOWUP_GUARD = 1e12
_MIN_STEP_FACTOR = 1e-13


class DynamicsError(RuntimeError):
    pass


class FieldValidationError(DynamicsError):
    pass


class BlowupError(DynamicsError):
    def __init__(self, t_last: float, value: float):
        self.t_last = float(t_last)
        self.value = float(value)
        super().__init__(
            f"solution magnitude crossed the overflow guard {BLOWUP_GUARD:g} "
            f"after t = {self.t_last!r} (last good value {self.value!r})")


class StepUnderflowError(DynamicsError):
    def __init__(self, t: float):
        self.t_last = t
        super().__init__(f"adaptive step size underflowed near t = {t!r}")


class IterationAbortError(DynamicsError):
    def __init__(self, step: int, reason: str):
        self.step = step
        super().__init__(f"iteration aborted at step {step}: {reason}")


def _as_expression(rhs) -> Expression:
    return rhs if isinstance(rhs, Expression) else parse(rhs)


@dataclass(eq=False)
class ScalarField:
    """Right-hand side of a scalar system, continuous or discrete.

    ``rhs`` is an expression in t and x; free parameter names must be bound
    by ``params``.  ``seq_params`` optionally supplies per-step parameter
    values for discrete systems (callables of the step index), used for
    tabulated coefficient sequences.  The field is spot-checked on a small
    validation grid at construction so domain errors surface early.
    """

    kind: str  # 'continuous' | 'discrete'
    rhs: Expression
    params: dict = field(default_factory=dict)
    state_domain: tuple = (-math.inf, math.inf)
    time_domain: str = "full-line"  # 'half-line' | 'full-line'
    name: str = ""
    seq_params: dict | None = None
    family: dict | None = None

    def __post_init__(self):
        self.rhs = _as_expression(self.rhs)
        if self.kind not in ("continuous", "discrete"):
            raise FieldValidationError(f"unknown kind {self.kind!r}")
        if self.time_domain not in ("half-line", "full-line"):
            raise FieldValidationError(f"unknown time domain {self.time_domain!r}")
        if self.kind == "discrete" and self.time_domain != "half-line":
            raise FieldValidationError("discrete systems run on the half-line n >= 0")
        lo, hi = self.state_domain
        if not lo < hi:
            raise FieldValidationError(f"empty state domain {self.state_domain!r}")
        seq_names = set(self.seq_params or {})
        missing = self.rhs.params - set(self.params) - seq_names
        if missing:
            raise FieldValidationError(
                f"unbound parameter(s) in rhs: {', '.join(sorted(missing))}")
        self._spot_check()

    # -- evaluation ---------------------------------------------------------

    def _params_at(self, t: float) -> dict:
        if not self.seq_params:
            return self.params
        merged = dict(self.params)
        n = int(round(t))
        for key, fn in self.seq_params.items():
            merged[key] = float(fn(n))
        return merged

    def bind(self):
        """Scalar callable f(t, x); the fast path when seq_params is unused."""
        if not self.seq_params:
            return self.rhs.bind(self.params)
        rhs = self.rhs

        def f(t, x):
            return rhs.bind(self._params_at(t))(t, x)

        return f

    def eval(self, t: float, x: float) -> float:
        return self.rhs.bind(self._params_at(t))(float(t), float(x))

    def eval_grid(self, t_grid, x_grid) -> np.ndarray:
        """Values f(t_i, x_j) as an array of shape (len(t_grid), len(x_grid))."""
        t_grid = np.asarray(t_grid, float)
        x_grid = np.asarray(x_grid, float)
        if not self.seq_params:
            return self.rhs.eval_array(
                t_grid[:, None], x_grid[None, :], params=self.params)
        rows = [self.rhs.eval_array(np.full_like(x_grid, tv), x_grid,
                                    params=self._params_at(tv))
                for tv in t_grid]
        return np.stack(rows)

    # -- validation and identity --------------------------------------------

    def _validation_grid(self):
        if self.time_domain == "half-line":
            ts = [0.0, 1.0, 2.7, 7.5, 19.0]
        else:
            ts = [-19.0, -2.7, 0.0, 1.0, 7.5]
        if self.kind == "discrete":
            ts = [0.0, 1.0, 3.0, 7.0, 19.0]
        lo, hi = self.state_domain
        if math.isinf(lo) and math.isinf(hi):
            xs = [-10.0, -1.0, 0.0, 1.0, 10.0]
        elif math.isinf(hi):
            xs = [lo, lo + 0.5, lo + 1.0, lo + 5.0, lo + 20.0]
        elif math.isinf(lo):
            xs = [hi - 20.0, hi - 5.0, hi - 1.0, hi - 0.5, hi]
        else:
            xs = list(np.linspace(lo, hi, 5))
        return ts, xs

    def _spot_check(self):
        ts, xs = self._validation_grid()
        for tv in ts:
            try:
                vals = self.rhs.eval_array(
                    np.full(len(xs), tv), np.array(xs), params=self._params_at(tv))
            except EvalError as err:
                raise FieldValidationError(
                    f"rhs fails on the validation grid at t={tv!r}: {err}") from err
            if not np.all(np.isfinite(vals)):
                j = int(np.argmax(~np.isfinite(vals)))
                raise FieldValidationError(
                    f"rhs is not finite at t={tv!r}, x={xs[j]!r}")

    @property
    def field_id(self) -> str:
        payload = json.dumps({
            "kind": self.kind,
            "rhs": self.rhs.to_text(),
            "params": {k: repr(float(v)) for k, v in sorted(self.params.items())},
            "state_domain": [repr(float(v)) for v in self.state_domain],
            "time_domain": self.time_domain,
            "seq": sorted(self.seq_params) if self.seq_params else None,
        }, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    def shifted(self, h: float) -> "ScalarField":
        return shift_field(self, h)


def shift_field(fld: ScalarField, h: float) -> ScalarField:
    """The time-shifted field g(t, x) = f(t + h, x)."""
    if fld.kind == "discrete":
        if abs(h - round(h)) > 1e-9:
            raise FieldValidationError("discrete fields shift by whole steps")
        h = int(round(h))
    if fld.time_domain == "half-line" and h < 0:
        raise FieldValidationError("half-line fields only shift forward (h >= 0)")
    seq = None
    if fld.seq_params:
        step = int(round(h))
        seq = {k: (lambda n, _fn=fn, _s=step: _fn(n + _s))
               for k, fn in fld.seq_params.items()}
    return ScalarField(
        kind=fld.kind,
        rhs=fld.rhs.shift_t(h),
        params=dict(fld.params),
        state_domain=fld.state_domain,
        time_domain=fld.time_domain,
        name=f"{fld.name}<<{h:g}" if fld.name else f"shift({h:g})",
        seq_params=seq,
        family=fld.family,
    )


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rkf45"  # 'rkf45' | 'rk4'
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_step: float = math.inf
    dt_out: float = 0.01

    def __post_init__(self):
        if self.method not in ("rkf45", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.dt_out <= 0 or self.max_step <= 0:
            raise ValueError("dt_out and max_step must be positive")
        if self.method == "rkf45" and (self.abs_tol <= 0 or self.rel_tol < 0):
            raise ValueError("rkf45 needs abs_tol > 0 and rel_tol >= 0")

    def config_hash(self) -> str:
        payload = json.dumps({
            "method": self.method, "abs_tol": repr(self.abs_tol),
            "rel_tol": repr(self.rel_tol), "max_step": repr(self.max_step),
            "dt_out": repr(self.dt_out)}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Trajectory:
    """Uniformly sampled solution curve.

    ``values[k]`` is the solution at ``t0 + k*dt``.  For continuous
    trajectories ``derivs[k]`` holds f(t_k, x_k) and powers the cubic Hermite
    dense output; discrete trajectories are exact at integer times and are
    never interpolated.
    """

    kind: str
    t0: float
    dt: float
    values: np.ndarray
    derivs: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.values.ndim != 1 or len(self.values) < 2:
            raise ValueError("a trajectory needs at least two samples")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("trajectory values must be finite")
        if self.derivs is not None:
            self.derivs = np.asarray(self.derivs, float)
            if self.derivs.shape != self.values.shape:
                raise ValueError("derivs must match values in shape")

    def __len__(self):
        return len(self.values)

    @property
    def t_end(self) -> float:
        return self.t0 + (len(self.values) - 1) * self.dt

    def grid(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def _hermite_derivs(self) -> np.ndarray:
        if self.derivs is not None:
            return self.derivs
        # fall back to second-order differences when no derivatives are stored
        return np.gradient(self.values, self.dt)

    def values_at(self, ts) -> np.ndarray:
        """Dense-output values at arbitrary times inside the sampled span."""
        ts = np.atleast_1d(np.asarray(ts, float))
        pos = (ts - self.t0) / self.dt
        n = len(self.values)
        tol = 1e-9
        if np.any(pos < -tol) or np.any(pos > n - 1 + tol):
            bad = float(ts[np.argmax((pos < -tol) | (pos > n - 1 + tol))])
            raise DynamicsError(
                f"query at t = {bad!r} outside sampled span "
                f"[{self.t0!r}, {self.t_end!r}]")
        nearest = np.rint(pos)
        if np.all(np.abs(pos - nearest) <= tol):
            # aligned with the grid: return stored values exactly
            idx = np.clip(nearest.astype(int), 0, n - 1)
            return self.values[idx]
        if self.kind == "discrete":
            raise DynamicsError(
                "discrete trajectories are sampled at integer steps only")
        d = self._hermite_derivs()
        idx = np.clip(np.floor(pos + tol).astype(int), 0, n - 2)
        s = pos - idx
        s2 = s * s
        s3 = s2 * s
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        return (h00 * self.values[idx] + h01 * self.values[idx + 1]
                + self.dt * (h10 * d[idx] + h11 * d[idx + 1]))

    def value_at(self, t: float) -> float:
        return float(self.values_at(np.array([t]))[0])

    def interp_budget(self) -> float:
        """Crude bound on the cubic Hermite dense-output error.

        The fourth central difference of the samples approximates
        dt^4 * x''''(t); the Hermite error bound is |x''''| dt^4 / 384.
        """
        if self.kind == "discrete" or len(self.values) < 5:
            return 0.0
        return float(np.max(np.abs(np.diff(self.values, 4)))) / 384.0

    def scaled(self, c: float) -> "Trajectory":
        return Trajectory(
            kind=self.kind, t0=self.t0, dt=self.dt,
            values=self.values * c,
            derivs=None if self.derivs is None else self.derivs * c,
            provenance=dict(self.provenance, scaled=repr(float(c))))


# ---------------------------------------------------------------------------
# Runge-Kutta-Fehlberg 4(5) with bisection refinement inside grid cells
# ---------------------------------------------------------------------------

_RKF_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_RKF_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_RKF_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
# difference between the fifth and fourth order weights; h * |sum(TR_i k_i)|
# is the embedded local error estimate
_RKF_TR = (1 / 360, 0.0, -128 / 4275, -2197 / 75240, 1 / 50, 2 / 55)


def _rkf45_step(f, t, y, h, k1=None):
    """One Fehlberg step: returns (y5, error_estimate, k)."""
    k = [0.0] * 6
    k[0] = f(t, y) if k1 is None else k1
    for i in range(1, 6):
        acc = 0.0
        a = _RKF_A[i]
        for j in range(i):
            acc += a[j] * k[j]
        k[i] = f(t + _RKF_C[i] * h, y + h * acc)
    y5 = y + h * sum(b * ki for b, ki in zip(_RKF_B5, k))
    err = abs(h * sum(c * ki for c, ki in zip(_RKF_TR, k)))
    return y5, err, k


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _check_alive(t, y):
    if not math.isfinite(y) or abs(y) > BLOWUP_GUARD:
        raise BlowupError(t, y)


def integrate(fld: ScalarField, u0: float, t_span, config: IntegratorConfig | None = None
              ) -> Trajectory:
    """Integrate a continuous field over [t0, t1], sampling at t0 + k*dt_out."""
    if fld.kind != "continuous":
        raise DynamicsError("integrate expects a continuous field; use iterate")
    cfg = config or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise DynamicsError("t_span must satisfy t1 > t0")
    if fld.time_domain == "half-line" and t0 < 0:
        raise DynamicsError("half-line field starts at t >= 0")
    lo, hi = fld.state_domain
    if not (lo <= u0 <= hi) or not math.isfinite(u0):
        raise DynamicsError(f"u0 = {u0!r} outside the state domain")

    dt = cfg.dt_out
    n_cells = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    f = fld.bind()

    values = np.empty(n_cells + 1)
    derivs = np.empty(n_cells + 1)
    y = float(u0)
    values[0] = y
    derivs[0] = f(t0, y)

    for cell in range(n_cells):
        t_cell = t0 + cell * dt
        t_target = t0 + (cell + 1) * dt
        try:
            values[cell + 1], derivs[cell + 1], y = _advance_cell(
                f, t_cell, t_target, y, derivs[cell], cfg)
        except EvalError as err:
            raise DynamicsError(
                f"rhs evaluation failed inside [{t_cell!r}, {t_target!r}]: "
                f"{err}") from err

    return Trajectory(
        kind="continuous", t0=t0, dt=dt, values=values, derivs=derivs,
        provenance={"field": fld.field_id, "name": fld.name, "u0": repr(float(u0)),
                    "config": cfg.config_hash(), "method": cfg.method})


def _advance_cell(f, t_cell, t_target, y, k_start, cfg):
    """March from t_cell to t_target; returns (value, deriv, y) at t_target.

    A step underflow while the solution magnitude already exceeds 1e8 is
    reported as a blow-up, since the step collapse is then driven by the
    growth of the solution rather than by stiffness of the right-hand side.
    """
    dt = t_target - t_cell
    if cfg.method == "rk4":
        m = max(1, math.ceil(dt / cfg.max_step - 1e-9))
        h = dt / m
        t = t_cell
        for _ in range(m):
            y = _rk4_step(f, t, y, h)
            _check_alive(t, y)
            t += h
    else:
        t = t_cell
        k1 = k_start
        while t < t_target - 1e-12 * max(1.0, abs(t_target)):
            h = min(cfg.max_step, t_target - t)
            while True:
                y_new, err, _ = _rkf45_step(f, t, y, h, k1=k1)
                tol = cfg.abs_tol + cfg.rel_tol * max(abs(y), abs(y_new))
                if math.isfinite(err) and err <= tol:
                    break
                # too large or not finite: halve and retry
                h *= 0.5
                if h < _MIN_STEP_FACTOR * max(1.0, abs(t)):
                    if abs(y) > 1e8 or not (math.isfinite(err)
                                            and math.isfinite(y_new)):
                        raise BlowupError(t, y)
                    raise StepUnderflowError(t)
            t_prev = t
            y = y_new
            t = t_target if h >= (t_target - t) - 1e-12 else t + h
            _check_alive(t_prev, y)
            k1 = None
    deriv = f(t_target, y)
    return y, deriv, y


def iterate(fld: ScalarField, u0: float, n_steps: int) -> Trajectory:
    """Iterate a discrete field exactly for n_steps steps from x_0 = u0."""
    if fld.kind != "discrete":
        raise DynamicsError("iterate expects a discrete field; use integrate")
    if n_steps < 1:
        raise DynamicsError("n_steps must be >= 1")
    lo, hi = fld.state_domain
    if not (lo <= u0 <= hi) or not math.isfinite(u0):
        raise DynamicsError(f"u0 = {u0!r} outside the state domain")

    values = np.empty(n_steps + 1)
    values[0] = float(u0)
    if fld.seq_params:
        rhs = fld.rhs
        base = dict(fld.params)
        seq = fld.seq_params

        def f(n, x):
            p = dict(base)
            for key, fn in seq.items():
                p[key] = float(fn(n))
            return rhs.bind(p)(float(n), x)
    else:
        f = fld.bind()

    x = float(u0)
    for n in range(n_steps):
        try:
            x = f(float(n), x)
        except EvalError as err:
            raise IterationAbortError(n + 1, str(err)) from err
        if not math.isfinite(x) or abs(x) > BLOWUP_GUARD:
            raise IterationAbortError(n + 1, f"value {x!r} exceeds the overflow guard")
        if not (lo <= x <= hi):
            raise IterationAbortError(
                n + 1, f"value {x!r} left the state domain [{lo:g}, {hi:g}]")
        values[n + 1] = x

    return Trajectory(
        kind="discrete", t0=0.0, dt=1.0, values=values, derivs=None,
        provenance={"field": fld.field_id, "name": fld.name, "u0": repr(float(u0)),
                    "config": f"n={n_steps}"})


def sample_function(fn, t_span, dt: float, params: dict | None = None,
                    name: str = "") -> Trajectory:
    """Sample a closed-form curve of t into a continuous trajectory.

    ``fn`` is an expression (text or parsed) in t, or any callable accepting a
    numpy array of times.  Grid derivatives for the Hermite dense output are
    taken by central differences with step 1e-6 * (1 + |t|).
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise DynamicsError("t_span must satisfy t1 > t0")
    if dt <= 0:
        raise DynamicsError("dt must be positive")
    if isinstance(fn, (str, Expression)):
        e = _as_expression(fn)
        missing = e.params - set(params or {})
        if missing:
            raise FieldValidationError(
                f"unbound parameter(s): {', '.join(sorted(missing))}")
        curve = lambda ts: e.eval_array(ts, 0.0, params=params)  # noqa: E731
        label = name or e.to_text()
    else:
        curve = fn
        label = name or getattr(fn, "__name__", "callable")

    n = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    ts = t0 + dt * np.arange(n + 1)
    values = np.asarray(curve(ts), float)
    h = 1e-6 * (1.0 + np.abs(ts))
    derivs = (np.asarray(curve(ts + h), float) - np.asarray(curve(ts - h), float)) / (2 * h)
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(derivs))):
        raise DynamicsError("sampled curve is not finite on the grid")
    return Trajectory(
        kind="continuous", t0=t0, dt=dt, values=values, derivs=derivs,
        provenance={"function": label, "dt": repr(float(dt)),
                    "span": [repr(t0), repr(t1)]})


# ---------------------------------------------------------------------------
# property checks
# ---------------------------------------------------------------------------

@dataclass
class PropertyReport:
    property: str
    verdict: str  # 'pass' | 'fail' | 'inconclusive'
    extreme: float
    witness: dict | None
    tolerance: float
    samples: int
    notes: str = ""

    def __post_init__(self):
        if self.verdict == "fail" and self.witness is None:
            raise ValueError("failing reports must carry a witness")

    def to_dict(self) -> dict:
        return {
            "property": self.property, "verdict": self.verdict,
            "extreme": self.extreme, "witness": self.witness,
            "tolerance": self.tolerance, "samples": self.samples,
            "notes": self.notes}


def check_monotone_in_x(fld: ScalarField, t_grid, x_grid,
                        direction: str = "non-decreasing",
                        slack: float = 1e-12) -> PropertyReport:
    """Check x -> f(t, x) is monotone in the given direction on a grid."""
    if direction not in ("non-decreasing", "non-increasing"):
        raise ValueError(f"unknown direction {direction!r}")
    t_grid = np.asarray(t_grid, float)
    x_grid = np.asarray(x_grid, float)
    if len(x_grid) < 2 or np.any(np.diff(x_grid) <= 0):
        raise ValueError("x_grid must be strictly increasing with >= 2 points")
    F = fld.eval_grid(t_grid, x_grid)
    d = np.diff(F, axis=1)
    if direction == "non-decreasing":
        worst = float(d.min())
        ok = worst >= -slack
        i, j = np.unravel_index(int(d.argmin()), d.shape)
    else:
        worst = float(d.max())
        ok = worst <= slack
        i, j = np.unravel_index(int(d.argmax()), d.shape)
    witness = None
    if not ok:
        witness = {"t": float(t_grid[i]), "x_lo": float(x_grid[j]),
                   "x_hi": float(x_grid[j + 1]),
                   "f_lo": float(F[i, j]), "f_hi": float(F[i, j + 1])}
    return PropertyReport(
        property=f"monotone-{direction}-in-x", verdict="pass" if ok else "fail",
        extreme=worst, witness=witness, tolerance=slack,
        samples=int(F.size))


def check_lipschitz_one(fld: ScalarField, t_grid, x_grid,
                        slack: float = 1e-12) -> PropertyReport:
    """Empirical Lipschitz constant of x -> f(t, x) over all grid pairs.

    Passes when |f(t,a) - f(t,b)| <= |a - b| * (1 + slack) for every pair;
    ``extreme`` is the worst measured ratio.
    """
    t_grid = np.asarray(t_grid, float)
    x_grid = np.asarray(x_grid, float)
    F = fld.eval_grid(t_grid, x_grid)
    dx = np.abs(x_grid[:, None] - x_grid[None, :])
    np.fill_diagonal(dx, math.inf)  # skip zero-separation pairs
    worst = -math.inf
    witness_idx = None
    for i in range(len(t_grid)):
        r = np.abs(F[i][:, None] - F[i][None, :]) / dx
        j = int(np.argmax(r))
        if r.flat[j] > worst:
            worst = float(r.flat[j])
            witness_idx = (i, *np.unravel_index(j, r.shape))
    ok = worst <= 1.0 + slack
    witness = None
    if not ok and witness_idx is not None:
        i, a, b = witness_idx
        witness = {"t": float(t_grid[i]), "x1": float(x_grid[a]),
                   "x2": float(x_grid[b]), "ratio": worst}
    return PropertyReport(
        property="lipschitz-one-in-x", verdict="pass" if ok else "fail",
        extreme=worst, witness=witness, tolerance=slack,
        samples=int(F.size))


def contraction_gap(fld: ScalarField, u1: float, u2: float, span,
                    config: IntegratorConfig | None = None):
    """Evolve two initial values and report on the gap |phi(t,u1) - phi(t,u2)|.

    ``span`` is (t0, t1) for continuous fields or the step count for discrete
    ones.  Passes when the gap never exceeds |u1 - u2| * (1 + tol) and is
    non-increasing within tol = 1e-9 * (1 + |u1 - u2|).  Returns
    (times, gaps, report).
    """
    if fld.kind == "continuous":
        a = integrate(fld, u1, span, config)
        b = integrate(fld, u2, span, config)
    else:
        a = iterate(fld, u1, int(span))
        b = iterate(fld, u2, int(span))
    g = np.abs(a.values - b.values)
    times = a.grid()
    g0 = abs(float(u2) - float(u1))
    tol = 1e-9 * (1.0 + g0)
    bounded = bool(np.all(g <= g0 * (1.0 + tol) + tol))
    steps = np.diff(g)
    monotone = bool(np.all(steps <= tol))
    ok = bounded and monotone
    witness = None
    if not ok:
        if not monotone:
            k = int(np.argmax(steps))
            witness = {"t": float(times[k]), "gap": float(g[k]),
                       "gap_next": float(g[k + 1]), "kind": "gap increased"}
        else:
            k = int(np.argmax(g))
            witness = {"t": float(times[k]), "gap": float(g[k]),
                       "initial_gap": g0, "kind": "gap exceeded initial"}
    report = PropertyReport(
        property="contraction-gap", verdict="pass" if ok else "fail",
        extreme=float(g.max()), witness=witness, tolerance=tol,
        samples=len(g),
        notes=f"u1={u1!r} u2={u2!r}")
    return times, g, report


def boundedness(traj: Trajectory, bound: float, tail_from: float | None = None
                ) -> PropertyReport:
    """Check sup |values| <= bound, optionally only from time tail_from on.

    A failing report carries the first sample where the bound is exceeded.
    """
    times = traj.grid()
    vals = traj.values
    if tail_from is not None:
        mask = times >= tail_from - 1e-9
        if not np.any(mask):
            raise DynamicsError("tail_from is beyond the sampled span")
        times, vals = times[mask], vals[mask]
    sup = float(np.max(np.abs(vals)))
    ok = sup <= bound
    witness = None
    if not ok:
        k = int(np.argmax(np.abs(vals) > bound))
        witness = {"t": float(times[k]), "value": float(vals[k])}
    return PropertyReport(
        property="boundedness", verdict="pass" if ok else "fail",
        extreme=sup, witness=witness, tolerance=0.0, samples=len(vals),
        notes=f"bound={bound!r}" + ("" if tail_from is None else f" tail_from={tail_from!r}"))
