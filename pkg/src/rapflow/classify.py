"""Numerical placement of sampled trajectories in the recurrence hierarchy.

A sampled trajectory is examined for progressively weaker forms of
recurrence.  A shift tau is tested by comparing the trajectory against its
own translate: the statistic is always a supremum of |phi(t + tau) - phi(t)|
over some set of times.  Taking that supremum over the whole sampled span
tests exact recurrence; restricting it to late windows tests remote
recurrence, where the comparison is only required to become small from some
level onward; comparing residue sequences phi(r + k*tau) along multiples of
tau tests asymptotic recurrence, where the trajectory must settle onto a
translate-invariant limit.

The public entry point is :func:`classify_trajectory`, which runs the whole
battery and returns a :class:`ClassificationResult` with one verdict per
class, the evidence behind each verdict, and a set of internal consistency
checks (see :func:`ClassificationResult.hierarchy_ok`).  The individual
tests are usable on their own and each returns a small report object rather
than a bare boolean.

Verdicts are the strings "pass", "fail", and "inconclusive".  A test only
returns "pass" or "fail" when the sampled data actually supports the call at
the requested tolerance; anything thinner stays inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DynamicsError, Trajectory

__all__ = [
    "CLASS_ORDER",
    "AlmostPeriodSet",
    "AsymptoticReport",
    "ClassificationResult",
    "ClassifyConfig",
    "DensityReport",
    "EquiProbeReport",
    "SeparationReport",
    "StationaryBattery",
    "TailSupCurve",
    "almost_period_scan",
    "asymptotic_stationary_test",
    "asymptotic_tau_periodic_test",
    "classify_trajectory",
    "default_probes",
    "equi_almost_periodicity_probe",
    "remote_stationary_test",
    "remote_tau_periodic_test",
    "separation_constancy_test",
    "tail_sup",
]

# Strongest class first.  classify_trajectory labels a trajectory with the
# first class whose verdict is "pass".
CLASS_ORDER = (
    "stationary",
    "tau-periodic",
    "almost-periodic",
    "asymptotically-stationary",
    "asymptotically-tau-periodic",
    "remotely-stationary",
    "remotely-tau-periodic",
    "remotely-almost-periodic",
)

_POS_TOL = 1e-9


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ClassifyConfig:
    """Knobs for :func:`classify_trajectory`.

    eps            tolerance used by the recurrence statistics
    exact_eps      much tighter tolerance for exact periodicity / constancy
    tau            pinned candidate shift; None selects one from the scans
    tau_range      closed interval of shifts to scan
    tau_step       scan grid spacing (coerced to a whole number of steps for
                   discrete trajectories)
    windows        late comparison windows ((lo, hi), ...) in increasing
                   order; None derives a geometric ladder from the span
    probes         shifts for the remote-stationarity battery; None uses
                   :func:`default_probes`
    seed           seed for the randomized battery probe
    min_samples    below this many samples everything is inconclusive
    tail_fraction  fraction of the span treated as the tail by the
                   asymptotic tests
    min_multiples  least number of shift multiples the residue test needs
    """

    eps: float = 0.05
    exact_eps: float = 1e-5
    tau: float | None = None
    tau_range: tuple[float, float] = (0.0, 100.0)
    tau_step: float = 0.01
    windows: tuple[tuple[float, float], ...] | None = None
    probes: tuple[float, ...] | None = None
    seed: int = 0
    min_samples: int = 10
    tail_fraction: float = 0.25
    min_multiples: int = 20

    def __post_init__(self):
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError("eps must be positive and finite")
        if not (self.exact_eps > 0 and math.isfinite(self.exact_eps)):
            raise ValueError("exact_eps must be positive and finite")
        if self.tau is not None and not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError("tau must be positive when given")
        lo, hi = self.tau_range
        if not (math.isfinite(lo) and math.isfinite(hi) and 0 <= lo < hi):
            raise ValueError("tau_range must satisfy 0 <= lo < hi")
        if not (self.tau_step > 0 and math.isfinite(self.tau_step)):
            raise ValueError("tau_step must be positive")
        if self.windows is not None:
            prev = -math.inf
            for w in self.windows:
                wlo, whi = w
                if not (math.isfinite(wlo) and math.isfinite(whi) and wlo < whi):
                    raise ValueError(f"bad window {w!r}")
                if wlo < prev:
                    raise ValueError("windows must be in increasing order")
                prev = wlo
            if not self.windows:
                raise ValueError("windows must be None or non-empty")
        if self.probes is not None:
            if not self.probes:
                raise ValueError("probes must be None or non-empty")
            for p in self.probes:
                if not (p > 0 and math.isfinite(p)):
                    raise ValueError("probes must be positive and finite")
        if self.min_samples < 2:
            raise ValueError("min_samples must be at least 2")
        if not (0 < self.tail_fraction < 1):
            raise ValueError("tail_fraction must lie in (0, 1)")
        if self.min_multiples < 4:
            raise ValueError("min_multiples must be at least 4")


def default_probes(kind: str, seed: int = 0) -> tuple[float, ...]:
    """Shift battery for remote-stationarity tests.

    Four fixed spread-out shifts plus one seeded draw, so reruns with the
    same seed are reproducible but the battery is not tuned to any example.
    Discrete probes are whole numbers of steps.
    """
    rng = np.random.default_rng(seed)
    if kind == "discrete":
        return (1.0, 2.0, 5.0, 17.0, float(int(rng.integers(1, 101))))
    if kind == "continuous":
        return (1.0, math.sqrt(2.0), 5.0, 17.3, 100.0 * float(rng.uniform()))
    raise ValueError(f"unknown trajectory kind {kind!r}")


# ---------------------------------------------------------------------------
# the basic statistic


def _index_range(traj: Trajectory, lo: float, hi: float) -> tuple[int, int]:
    """Grid indices covering [lo, hi], inclusive, clipped to the span."""
    dt = traj.dt
    tol = _POS_TOL * max(1.0, abs(dt))
    i0 = int(math.ceil((lo - traj.t0) / dt - tol))
    i1 = int(math.floor((hi - traj.t0) / dt + tol))
    i0 = max(i0, 0)
    i1 = min(i1, len(traj.values) - 1)
    return i0, i1


def tail_sup(traj: Trajectory, tau: float, window: tuple[float, float],
             clamp: bool = False) -> float:
    """sup of |phi(t + tau) - phi(t)| for grid times t in [lo, hi].

    The window must leave room for the shifted comparison: hi + tau has to
    stay inside the sampled span.  With clamp=True the window is shrunk to
    fit instead of raising.  Discrete trajectories only accept whole-number
    shifts.  Off-grid comparison points of continuous trajectories are
    evaluated with the trajectory's own dense interpolant.
    """
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError(f"bad window ({lo}, {hi})")
    if not (tau >= 0 and math.isfinite(tau)):
        raise ValueError("tau must be finite and non-negative")
    if traj.kind == "discrete" and abs(tau - round(tau)) > _POS_TOL:
        raise ValueError("discrete trajectories need whole-number shifts")
    t_end = traj.t_end
    tol = _POS_TOL * max(1.0, abs(traj.dt))
    if hi + tau > t_end + tol:
        if not clamp:
            raise ValueError(
                f"window end {hi} plus shift {tau} leaves the sampled span")
        hi = t_end - tau
    if lo < traj.t0 - tol:
        if not clamp:
            raise ValueError(f"window start {lo} precedes the sampled span")
        lo = traj.t0
    if hi <= lo:
        raise ValueError("window is empty after clamping")
    i0, i1 = _index_range(traj, lo, hi)
    if i1 < i0:
        raise ValueError("window contains no grid points")
    vals = traj.values
    k = tau / traj.dt
    if abs(k - round(k)) <= _POS_TOL * max(1.0, abs(k)):
        k = int(round(k))
        j1 = min(i1, len(vals) - 1 - k)
        if j1 < i0:
            raise ValueError("window contains no comparable grid points")
        return float(np.max(np.abs(vals[i0 + k:j1 + 1 + k] - vals[i0:j1 + 1])))
    ts = traj.t0 + traj.dt * np.arange(i0, i1 + 1)
    shifted = traj.values_at(ts + tau)
    return float(np.max(np.abs(shifted - vals[i0:i1 + 1])))


# ---------------------------------------------------------------------------
# remote recurrence


@dataclass
class TailSupCurve:
    """Shift-comparison suprema over a ladder of late windows.

    verdict is "pass" when the data shows the comparison small from some
    level on: either every window supremum is at most eps, or the sequence
    of suprema is non-increasing (up to 10 percent) and ends at or below
    eps.  It is "fail" when the final window still exceeds eps, and
    "inconclusive" otherwise.  level is the left endpoint of the first
    window whose supremum is at or below eps, i.e. the numerically observed
    level from which the shift is admitted.
    """

    tau: float
    eps: float
    windows: tuple[tuple[float, float], ...]
    sups: tuple[float, ...]
    verdict: str
    level: float | None
    notes: list[str] = field(default_factory=list)


def remote_tau_periodic_test(traj: Trajectory, tau: float, eps: float,
                             windows, clamp: bool = True) -> TailSupCurve:
    """Test whether the shift tau is eventually an almost period.

    Computes sup |phi(t + tau) - phi(t)| over each window in the ladder and
    applies the verdict rule documented on :class:`TailSupCurve`.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError("eps must be positive and finite")
    used: list[tuple[float, float]] = []
    sups: list[float] = []
    notes: list[str] = []
    t_end = traj.t_end
    for w in windows:
        lo, hi = float(w[0]), float(w[1])
        eff_hi = min(hi, t_end - tau) if clamp else hi
        eff_lo = max(lo, traj.t0) if clamp else lo
        if eff_hi <= eff_lo:
            notes.append(f"window ({lo}, {hi}) dropped: no room for the shift")
            continue
        sups.append(tail_sup(traj, tau, (eff_lo, eff_hi), clamp=clamp))
        if (eff_lo, eff_hi) != (lo, hi):
            notes.append(f"window ({lo}, {hi}) clamped to ({eff_lo}, {eff_hi})")
        used.append((eff_lo, eff_hi))
    if not used:
        raise ValueError("no window fits inside the sampled span")
    arr = np.asarray(sups)
    level = None
    for (lo, hi), s in zip(used, sups):
        if s <= eps:
            level = lo
            break
    if arr[-1] > eps:
        verdict = "fail"
    elif np.all(arr <= eps):
        verdict = "pass"
    elif np.all(arr[1:] <= arr[:-1] * 1.1 + _POS_TOL):
        # decreasing through the ladder and small at the end
        verdict = "pass"
    else:
        verdict = "inconclusive"
        notes.append("suprema neither all small nor decreasing")
    return TailSupCurve(tau=float(tau), eps=float(eps), windows=tuple(used),
                        sups=tuple(float(s) for s in sups), verdict=verdict,
                        level=level, notes=notes)


@dataclass
class StationaryBattery:
    """Outcome of the multi-shift remote-stationarity battery.

    Every tested probe shift must individually pass for the battery to
    pass; one failing probe fails it.  Probes too large for the span are
    skipped; with fewer than three tested probes, or any skipped probe and
    no failure, the outcome stays inconclusive.
    """

    probes: tuple[float, ...]
    curves: dict
    verdict: str
    notes: list[str] = field(default_factory=list)


def remote_stationary_test(traj: Trajectory, eps: float, windows,
                           probes=None, seed: int = 0) -> StationaryBattery:
    """Test whether every fixed shift is eventually an almost period.

    Runs :func:`remote_tau_periodic_test` over a battery of spread-out
    probe shifts.  Remote stationarity requires all shifts to work, so the
    battery can only ever support the claim; it refutes it outright when a
    single probe fails.
    """
    if probes is None:
        probes = default_probes(traj.kind, seed)
    span = traj.dt * (len(traj.values) - 1)
    curves: dict = {}
    notes: list[str] = []
    tested = failed = 0
    skipped = False
    for p in probes:
        if p > span / 3.0:
            curves[p] = None
            notes.append(f"probe {p:g} skipped: larger than a third of the span")
            skipped = True
            continue
        try:
            curve = remote_tau_periodic_test(traj, p, eps, windows, clamp=True)
        except ValueError as exc:
            curves[p] = None
            notes.append(f"probe {p:g} skipped: {exc}")
            skipped = True
            continue
        curves[p] = curve
        tested += 1
        if curve.verdict == "fail":
            failed += 1
    if failed:
        verdict = "fail"
    elif tested >= 3 and not skipped and all(
            c.verdict == "pass" for c in curves.values() if c is not None):
        verdict = "pass"
    else:
        verdict = "inconclusive"
        if tested < 3:
            notes.append("fewer than three probes could be tested")
    return StationaryBattery(probes=tuple(float(p) for p in probes),
                             curves=curves, verdict=verdict, notes=notes)


# ---------------------------------------------------------------------------
# almost-period scans


@dataclass
class DensityReport:
    """Spread of an admitted-shift set over the scanned range.

    largest_gap is the length of the longest sub-interval of the scanned
    range containing no admitted shift (boundary gaps included).  The
    verdict here is only about non-emptiness; relative-density thresholds
    are applied by the caller, which knows the intended inclusion length.
    """

    eps: float
    scan_range: tuple[float, float]
    n_admitted: int
    largest_gap: float
    verdict: str


@dataclass
class AlmostPeriodSet:
    """Result of scanning a grid of shifts against one trajectory.

    mode "global" compares over the whole sampled span; mode "remote"
    compares over one late window.  assessable marks grid shifts that left
    at least two comparison points; sups holds the corresponding suprema
    (NaN where not assessable) and admitted marks sups <= eps.
    """

    mode: str
    eps: float
    taus: np.ndarray
    sups: np.ndarray
    admitted: np.ndarray
    assessable: np.ndarray
    window: tuple[float, float] | None = None

    def admitted_taus(self) -> np.ndarray:
        return self.taus[self.admitted]

    def density(self) -> DensityReport:
        """Largest admitted-shift-free gap over the assessable range."""
        taus = self.taus[self.assessable]
        if taus.size == 0:
            raise ValueError("no shift in the scan was assessable")
        lo, hi = float(taus[0]), float(taus[-1])
        adm = np.sort(self.admitted_taus())
        if adm.size == 0:
            largest = hi - lo
        else:
            edges = np.concatenate(([lo], adm, [hi]))
            largest = float(np.max(np.diff(edges)))
        verdict = "pass" if adm.size else "fail"
        return DensityReport(eps=self.eps, scan_range=(lo, hi),
                             n_admitted=int(adm.size), largest_gap=largest,
                             verdict=verdict)


def _scan_grid(traj: Trajectory, tau_range, tau_step: float) -> np.ndarray:
    lo, hi = float(tau_range[0]), float(tau_range[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and 0 <= lo < hi):
        raise ValueError("tau_range must satisfy 0 <= lo < hi")
    if traj.kind == "discrete":
        step = max(1, int(round(tau_step)))
        first = int(math.ceil(lo - _POS_TOL))
        last = int(math.floor(hi + _POS_TOL))
        if last < first:
            raise ValueError("tau_range holds no whole-number shift")
        return np.arange(first, last + 1, step, dtype=float)
    n = int(math.floor((hi - lo) / tau_step + _POS_TOL))
    return lo + tau_step * np.arange(n + 1)


def almost_period_scan(traj: Trajectory, eps: float, tau_range,
                       tau_step: float, mode: str = "global",
                       window=None, taus=None) -> AlmostPeriodSet:
    """Scan a grid of shifts and mark the eps-admitted ones.

    In mode "global" a shift tau is admitted when
    sup_t |phi(t + tau) - phi(t)| <= eps with t running over every grid
    point that leaves t + tau inside the span.  In mode "remote" t runs
    over one late window (clamped to fit), so admission only claims the
    comparison is small late, not everywhere.

    An explicit increasing grid passed as ``taus`` overrides tau_range and
    tau_step.  Scanning chunks of one grid and concatenating the results
    reproduces the single-call scan exactly, which is what allows callers
    to fan the scan out across workers.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError("eps must be positive and finite")
    if mode not in ("global", "remote"):
        raise ValueError(f"unknown scan mode {mode!r}")
    if mode == "remote" and window is None:
        raise ValueError("remote scans need a window")
    if taus is not None:
        taus = np.asarray(taus, float)
        if taus.ndim != 1 or taus.size == 0:
            raise ValueError("taus must be a non-empty one-dimensional grid")
        if np.any(taus < 0) or not np.all(np.isfinite(taus)):
            raise ValueError("shifts must be finite and non-negative")
        if np.any(np.diff(taus) <= 0):
            raise ValueError("taus must be strictly increasing")
        if traj.kind == "discrete" and np.any(
                np.abs(taus - np.rint(taus)) > _POS_TOL):
            raise ValueError("discrete trajectories need whole-number shifts")
    else:
        taus = _scan_grid(traj, tau_range, tau_step)
    vals = traj.values
    n = len(vals)
    t_end = traj.t_end
    sups = np.full(taus.shape, np.nan)
    assessable = np.zeros(taus.shape, dtype=bool)
    if mode == "global":
        w_lo, w_hi = traj.t0, t_end
    else:
        w_lo, w_hi = float(window[0]), float(window[1])
        w_lo = max(w_lo, traj.t0)
        if w_hi > t_end or w_hi <= w_lo:
            raise ValueError("remote window must lie inside the sampled span")
    for idx, tau in enumerate(taus):
        hi = min(w_hi, t_end - tau)
        if hi <= w_lo:
            continue
        i0, i1 = _index_range(traj, w_lo, hi)
        if i1 < i0:
            continue
        k = tau / traj.dt
        if abs(k - round(k)) <= _POS_TOL * max(1.0, abs(k)):
            k = int(round(k))
            j1 = min(i1, n - 1 - k)
            if j1 - i0 + 1 < 2:
                continue
            sup = float(np.max(np.abs(vals[i0 + k:j1 + 1 + k] - vals[i0:j1 + 1])))
        else:
            if i1 - i0 + 1 < 2:
                continue
            ts = traj.t0 + traj.dt * np.arange(i0, i1 + 1)
            sup = float(np.max(np.abs(traj.values_at(ts + tau) - vals[i0:i1 + 1])))
        sups[idx] = sup
        assessable[idx] = True
    admitted = assessable & (np.nan_to_num(sups, nan=np.inf) <= eps)
    return AlmostPeriodSet(mode=mode, eps=float(eps), taus=taus, sups=sups,
                           admitted=admitted, assessable=assessable,
                           window=(w_lo, w_hi) if mode == "remote" else None)


# ---------------------------------------------------------------------------
# asymptotic recurrence


@dataclass
class AsymptoticReport:
    """Outcome of a tail-settling test.

    statistic is the quantity compared against eps.  The verdict is "pass"
    at or below eps, "fail" above 2*eps, and otherwise inconclusive (the
    tail may simply not be long enough to decide at this tolerance).
    """

    kind: str
    tau: float | None
    eps: float
    statistic: float
    tail_from: float
    verdict: str
    residue_osc: float | None = None
    dense_sup: float | None = None
    notes: list[str] = field(default_factory=list)


def _verdict_near(stat: float, eps: float) -> str:
    if stat <= eps:
        return "pass"
    if stat > 2.0 * eps:
        return "fail"
    return "inconclusive"


def asymptotic_stationary_test(traj: Trajectory, eps: float,
                               tail_fraction: float = 0.25) -> AsymptoticReport:
    """Test convergence to a constant: tail oscillation at most eps.

    The statistic is max - min of the samples over the final tail_fraction
    of the span.  Convergence makes it drop below any eps eventually; a
    persistent oscillation keeps it bounded away from zero.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError("eps must be positive and finite")
    if not (0 < tail_fraction < 1):
        raise ValueError("tail_fraction must lie in (0, 1)")
    t_end = traj.t_end
    tail_from = t_end - tail_fraction * (t_end - traj.t0)
    i0, i1 = _index_range(traj, tail_from, t_end)
    tail = traj.values[i0:i1 + 1]
    if tail.size < 2:
        raise ValueError("tail holds fewer than two samples")
    stat = float(np.max(tail) - np.min(tail))
    return AsymptoticReport(kind="stationary", tau=None, eps=float(eps),
                            statistic=stat, tail_from=float(tail_from),
                            verdict=_verdict_near(stat, eps))


def asymptotic_tau_periodic_test(traj: Trajectory, tau: float, eps: float,
                                 tail_fraction: float = 0.25,
                                 min_multiples: int = 20) -> AsymptoticReport:
    """Test convergence to a tau-periodic limit.

    Convergence onto a tau-periodic function means every residue sequence
    phi(r + k*tau), k = 0, 1, 2, ..., converges, and the pointwise
    comparison |phi(t + tau) - phi(t)| dies out.  The statistic is the
    larger of two tail measurements: the worst late oscillation among
    residue sequences spread across one shift interval, and the late
    supremum of the pointwise comparison.  The residue part separates true
    settling from a slow drift whose increments happen to shrink; the
    pointwise part stops a sparse residue sample from missing a moving
    feature between residues.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError("eps must be positive and finite")
    if not (tau > 0 and math.isfinite(tau)):
        raise ValueError("tau must be positive")
    if traj.kind == "discrete" and abs(tau - round(tau)) > _POS_TOL:
        raise ValueError("discrete trajectories need whole-number shifts")
    notes: list[str] = []
    t_end = traj.t_end
    span = t_end - traj.t0
    n_mult = int(math.floor(span / tau + _POS_TOL))
    if n_mult < min_multiples:
        return AsymptoticReport(
            kind="tau-periodic", tau=float(tau), eps=float(eps),
            statistic=math.nan, tail_from=math.nan, verdict="inconclusive",
            notes=[f"span holds only {n_mult} multiples of the shift; "
                   f"{min_multiples} needed"])
    if traj.kind == "discrete":
        tau = float(round(tau))
        n_res = int(min(tau, 4))
        residues = traj.t0 + np.arange(n_res, dtype=float)
    else:
        n_res = int(min(64, max(4, math.ceil(tau / (4.0 * traj.dt)))))
        residues = traj.t0 + (np.arange(n_res) / n_res) * tau
    worst = 0.0
    for r in residues:
        k_max = int(math.floor((t_end - r) / tau + _POS_TOL))
        seq = traj.values_at(r + tau * np.arange(k_max + 1))
        tail = seq[int(math.floor((1.0 - tail_fraction) * (k_max + 1))):]
        if tail.size < 2:
            continue
        worst = max(worst, float(np.max(tail) - np.min(tail)))
    dense_lo = t_end - tau - tail_fraction * (span - tau)
    dense = tail_sup(traj, tau, (dense_lo, t_end - tau))
    stat = max(worst, dense)
    tail_from = traj.t0 + (1.0 - tail_fraction) * span
    return AsymptoticReport(kind="tau-periodic", tau=float(tau),
                            eps=float(eps), statistic=stat,
                            tail_from=float(tail_from),
                            verdict=_verdict_near(stat, eps),
                            residue_osc=worst, dense_sup=dense, notes=notes)


# ---------------------------------------------------------------------------
# two-trajectory probes


@dataclass
class SeparationReport:
    """Late behaviour of the separation |a - b| of two trajectories.

    For order-preserving contractive systems the separation of two
    solutions settles to a constant; limit estimates that constant by the
    last sample and drift measures how far the separation still moves over
    the tail.  verdict is "pass" when drift <= tol.
    """

    initial: float
    limit: float
    drift: float
    tail_from: float
    tol: float
    verdict: str


def separation_constancy_test(a: Trajectory, b: Trajectory,
                              tail_from: float | None = None,
                              tol: float = 1e-6) -> SeparationReport:
    """Check that |a - b| is constant over the tail, within tol."""
    if a.kind != b.kind:
        raise ValueError("trajectories have different kinds")
    if abs(a.t0 - b.t0) > _POS_TOL or abs(a.dt - b.dt) > _POS_TOL:
        raise ValueError("trajectories are sampled on different grids")
    if len(a.values) != len(b.values):
        raise ValueError("trajectories have different lengths")
    if not (tol > 0 and math.isfinite(tol)):
        raise ValueError("tol must be positive and finite")
    sep = np.abs(a.values - b.values)
    t_end = a.t_end
    if tail_from is None:
        tail_from = a.t0 + 0.75 * (t_end - a.t0)
    i0, i1 = _index_range(a, tail_from, t_end)
    tail = sep[i0:i1 + 1]
    if tail.size < 2:
        raise ValueError("tail holds fewer than two samples")
    drift = float(np.max(tail) - np.min(tail))
    return SeparationReport(initial=float(sep[0]), limit=float(tail[-1]),
                            drift=drift, tail_from=float(tail_from),
                            tol=float(tol),
                            verdict="pass" if drift <= tol else "fail")


@dataclass
class EquiProbeReport:
    """Shared admitted shifts across a family of trajectories.

    label is "uniform" when the common admitted set is still relatively
    dense over the scanned range, "sparse-common" when shifts are shared
    but thin, and "no-common-shift" when the intersection is empty.
    """

    eps: float
    per_trajectory: tuple[DensityReport, ...]
    common: DensityReport
    common_taus: np.ndarray
    label: str


def equi_almost_periodicity_probe(trajs, eps: float, tau_range,
                                  tau_step: float) -> EquiProbeReport:
    """Intersect the admitted shift sets of several trajectories.

    Equi-almost-periodicity of a family asks for shifts admitted by every
    member at once.  All trajectories must share one sampling grid so the
    scans are comparable.
    """
    trajs = list(trajs)
    if len(trajs) < 2:
        raise ValueError("need at least two trajectories")
    first = trajs[0]
    for other in trajs[1:]:
        if other.kind != first.kind:
            raise ValueError("trajectories have different kinds")
        if (abs(other.t0 - first.t0) > _POS_TOL
                or abs(other.dt - first.dt) > _POS_TOL
                or len(other.values) != len(first.values)):
            raise ValueError("trajectories are sampled on different grids")
    scans = [almost_period_scan(tr, eps, tau_range, tau_step) for tr in trajs]
    reports = tuple(s.density() for s in scans)
    assess = np.logical_and.reduce([s.assessable for s in scans])
    admitted = np.logical_and.reduce([s.admitted for s in scans]) & assess
    sups = np.max(np.vstack([np.nan_to_num(s.sups, nan=np.inf) for s in scans]),
                  axis=0)
    sups = np.where(assess, sups, np.nan)
    common = AlmostPeriodSet(mode="global", eps=float(eps),
                             taus=scans[0].taus, sups=sups, admitted=admitted,
                             assessable=assess)
    dens = common.density()
    lo, hi = dens.scan_range
    if dens.n_admitted == 0:
        label = "no-common-shift"
    elif dens.largest_gap <= (hi - lo) / 4.0:
        label = "uniform"
    else:
        label = "sparse-common"
    return EquiProbeReport(eps=float(eps), per_trajectory=reports,
                           common=dens, common_taus=common.admitted_taus(),
                           label=label)


# ---------------------------------------------------------------------------
# the full classifier


@dataclass
class ClassificationResult:
    """Everything :func:`classify_trajectory` decided and why.

    label is the strongest class with a passing verdict (see CLASS_ORDER),
    "unclassified" when nothing passed, or "inconclusive" when the sample
    was too short to say anything.  hierarchy collects internal
    consistency checks; a violated entry means the implementation
    contradicted a theorem of the hierarchy on this input, which is a bug,
    never a property of the trajectory.
    """

    label: str
    verdicts: dict
    candidate_tau: float | None
    windows: tuple[tuple[float, float], ...] | None
    config: ClassifyConfig
    reports: dict
    global_scan: AlmostPeriodSet | None
    remote_scan: AlmostPeriodSet | None
    hierarchy: list
    notes: list

    def hierarchy_ok(self) -> bool:
        return not any(h["status"] == "violation" for h in self.hierarchy)

    def summary(self) -> str:
        lines = [f"label: {self.label}"]
        if self.candidate_tau is not None:
            lines.append(f"candidate shift: {self.candidate_tau:.10g}")
        for name in CLASS_ORDER:
            lines.append(f"  {name:<28s} {self.verdicts[name]}")
        checks = "ok" if self.hierarchy_ok() else "VIOLATED"
        lines.append(f"hierarchy consistency: {checks}")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def _geometric_windows(start: float, stop: float,
                       factor: float = 10.0) -> tuple[tuple[float, float], ...]:
    wins = []
    lo = start
    while lo * factor < stop:
        wins.append((lo, lo * factor))
        lo *= factor
    wins.append((lo, stop))
    return tuple(wins)


def _auto_windows(traj: Trajectory, tau_big: float):
    """Geometric window ladder leaving room for the largest probe shift."""
    t_end = traj.t_end
    end = t_end - tau_big
    if end <= traj.t0 + 20.0 * traj.dt:
        return None
    start = max(traj.t0 + 10.0 * traj.dt, traj.t0 + (end - traj.t0) / 100.0)
    if start >= end / 2.0:
        return ((max(traj.t0 + traj.dt, end / 2.0), end),)
    return _geometric_windows(start, end)


def _refine_candidate(traj: Trajectory, tau: float, step: float,
                      window: tuple[float, float]) -> float:
    """Two rounds of local grid search minimizing the late comparison.

    The objective is the supremum over the final window, not the whole
    span, so a transient at the start cannot flatten the landscape and
    push the refined shift off target.  Long windows are strided down to
    at most about fifty thousand probe points; this only steers the
    search, every reported verdict is recomputed on the full grid.
    """
    t_end = traj.t_end
    lo = max(window[0], traj.t0)
    hi = min(window[1], t_end - (tau + 1.1 * step))
    if hi <= lo:
        return tau
    i0, i1 = _index_range(traj, lo, hi)
    if i1 - i0 + 1 < 2:
        return tau
    stride = max(1, (i1 - i0 + 1) // 50_000)
    base = traj.values[i0:i1 + 1:stride]
    ts = traj.t0 + traj.dt * np.arange(i0, i1 + 1, stride)
    best_tau, best = tau, math.inf
    centre, width = tau, step
    for _ in range(2):
        for cand in centre + np.linspace(-width, width, 41):
            if cand <= 0 or ts[-1] + cand > t_end + _POS_TOL:
                continue
            s = float(np.max(np.abs(traj.values_at(ts + cand) - base)))
            if s < best:
                best, best_tau = s, float(cand)
        centre, width = best_tau, width / 20.0
    return best_tau


def _candidate_from_scan(scan: AlmostPeriodSet,
                         min_tau: float) -> float | None:
    """Best shift inside the first genuine admitted cluster.

    Admitted grid shifts are split into maximal runs.  The run growing out
    of tau = 0 is the trivial continuity cluster, so a run detached from
    zero is preferred; only when no other run reaches min_tau does the
    zero run contribute, and then only its portion at or beyond min_tau.
    Within the chosen run the shift with the smallest supremum wins, so
    refinement starts near the middle of the cluster instead of at its
    ragged edge.
    """
    idx = np.flatnonzero(scan.admitted)
    if idx.size == 0:
        return None
    runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
    zero_runs = []
    for run in runs:
        portion = run[scan.taus[run] >= min_tau - _POS_TOL]
        if scan.taus[run[0]] <= _POS_TOL:
            zero_runs.append(portion)
            continue
        if portion.size:
            best = portion[np.argmin(scan.sups[portion])]
            return float(scan.taus[best])
    for portion in zero_runs:
        if portion.size:
            best = portion[np.argmin(scan.sups[portion])]
            return float(scan.taus[best])
    return None


def _triangle_check(traj: Trajectory, tau: float, window, k: int):
    """sup over W of the k-fold shift comparison against k times the
    single-shift comparison over the window stretched by (k - 1) shifts.
    This is a triangle inequality for the sampled interpolant, so a
    violation beyond interpolation slack is an implementation bug."""
    t_end = traj.t_end
    lo, hi = window
    if hi + k * tau > t_end + _POS_TOL:
        return {"name": f"triangle k={k}", "status": "skipped",
                "detail": "span too short for the stretched window"}
    lhs = tail_sup(traj, k * tau, (lo, hi))
    rhs = tail_sup(traj, tau, (lo, hi + (k - 1) * tau))
    slack = 10.0 * traj.interp_budget() + 1e-6 * max(1.0, rhs) + 1e-12
    if lhs <= k * rhs + slack:
        return {"name": f"triangle k={k}", "status": "ok",
                "detail": f"sup({k}*tau)={lhs:.3e} <= {k}*sup(tau)+slack"}
    return {"name": f"triangle k={k}", "status": "violation",
            "detail": f"sup({k}*tau)={lhs:.3e} > {k}*{rhs:.3e}+{slack:.1e}"}


def classify_trajectory(traj: Trajectory,
                        config: ClassifyConfig | None = None) -> ClassificationResult:
    """Run the recurrence battery and label the trajectory.

    The classes are tested strongest first and the label is the first
    pass.  Exact recurrence (stationary, tau-periodic) is judged at
    config.exact_eps; every approximate statistic is judged at config.eps.
    Stages that cannot run on the given sample record a note and stay
    inconclusive rather than aborting the whole classification.
    """
    cfg = config or ClassifyConfig()
    verdicts = {name: "inconclusive" for name in CLASS_ORDER}
    reports: dict = {}
    notes: list[str] = []
    hierarchy: list[dict] = []
    n = len(traj.values)
    if n < cfg.min_samples:
        notes.append(f"only {n} samples; at least {cfg.min_samples} needed")
        return ClassificationResult(
            label="inconclusive", verdicts=verdicts, candidate_tau=None,
            windows=None, config=cfg, reports=reports, global_scan=None,
            remote_scan=None, hierarchy=hierarchy, notes=notes)

    discrete = traj.kind == "discrete"
    t_end = traj.t_end
    span = t_end - traj.t0

    # exact constancy over the whole sample
    osc_full = float(np.max(traj.values) - np.min(traj.values))
    verdicts["stationary"] = "pass" if osc_full <= cfg.exact_eps else "fail"
    reports["stationary"] = {"oscillation": osc_full, "eps": cfg.exact_eps}

    # shift scans
    step_eff = float(max(1, int(round(cfg.tau_step)))) if discrete else cfg.tau_step
    lo_r = cfg.tau_range[0]
    hi_eff = min(cfg.tau_range[1], span / 2.0)
    gscan = rscan = None
    if hi_eff > lo_r + step_eff / 2.0:
        try:
            gscan = almost_period_scan(traj, cfg.eps, (lo_r, hi_eff),
                                       step_eff, mode="global")
        except (ValueError, DynamicsError) as exc:
            notes.append(f"global scan unavailable: {exc}")
    else:
        notes.append("shift range leaves no room below half the span; "
                     "scans skipped")

    # window ladder
    probes = cfg.probes if cfg.probes is not None else default_probes(
        traj.kind, cfg.seed)
    tau_big = max(probes + ((cfg.tau,) if cfg.tau is not None else ()))
    windows = cfg.windows if cfg.windows is not None else _auto_windows(
        traj, min(tau_big, span / 3.0))
    if windows is None:
        notes.append("span too short for late windows; remote tests skipped")

    if windows is not None and gscan is not None:
        try:
            rscan = almost_period_scan(traj, cfg.eps, (lo_r, hi_eff),
                                       step_eff, mode="remote",
                                       window=windows[-1])
        except (ValueError, DynamicsError) as exc:
            notes.append(f"remote scan unavailable: {exc}")

    # almost periodicity from scan density
    if gscan is not None:
        try:
            gdens = gscan.density()
            reports["almost-periodic"] = gdens
            rel = (gdens.largest_gap <= (gdens.scan_range[1]
                                         - gdens.scan_range[0]) / 4.0)
            verdicts["almost-periodic"] = (
                "pass" if gdens.n_admitted > 0 and rel else "fail")
        except ValueError as exc:
            notes.append(f"global density unavailable: {exc}")
    if rscan is not None:
        try:
            rdens = rscan.density()
            reports["remotely-almost-periodic"] = rdens
            rel = (rdens.largest_gap <= (rdens.scan_range[1]
                                         - rdens.scan_range[0]) / 4.0)
            verdicts["remotely-almost-periodic"] = (
                "pass" if rdens.n_admitted > 0 and rel else "fail")
        except ValueError as exc:
            notes.append(f"remote density unavailable: {exc}")

    # candidate shift
    min_cand = 1.0 if discrete else max(10.0 * step_eff, 2.0 * traj.dt)
    candidate = None
    if cfg.tau is not None:
        candidate = float(cfg.tau)
        if discrete and abs(candidate - round(candidate)) > _POS_TOL:
            notes.append("pinned shift is not a whole number of steps; ignored")
            candidate = None
        elif candidate > span / 2.0:
            notes.append("pinned shift exceeds half the span; ignored")
            candidate = None
    if candidate is None and gscan is not None:
        candidate = _candidate_from_scan(gscan, min_cand)
    if candidate is None and rscan is not None:
        candidate = _candidate_from_scan(rscan, min_cand)

    refined = None
    if candidate is not None:
        if discrete:
            refined = float(round(candidate))
        else:
            ref_window = windows[-1] if windows is not None else (
                traj.t0 + 0.5 * span, t_end - candidate)
            try:
                refined = _refine_candidate(traj, candidate, step_eff,
                                            ref_window)
            except (ValueError, DynamicsError):
                refined = candidate
        reports["candidate"] = {"initial": candidate, "refined": refined}

        # exact tau-periodicity uses the supremum over the whole span
        try:
            full_sup = tail_sup(traj, refined, (traj.t0, t_end - refined))
            verdicts["tau-periodic"] = (
                "pass" if full_sup <= cfg.exact_eps else "fail")
            reports["tau-periodic"] = {"tau": refined, "sup": full_sup,
                                       "eps": cfg.exact_eps}
        except ValueError as exc:
            notes.append(f"exact periodicity untestable: {exc}")
    else:
        notes.append("no candidate shift; shift-specific tests skipped")

    # asymptotic settling
    try:
        rep = asymptotic_stationary_test(traj, cfg.eps, cfg.tail_fraction)
        verdicts["asymptotically-stationary"] = rep.verdict
        reports["asymptotically-stationary"] = rep
    except (ValueError, DynamicsError) as exc:
        notes.append(f"asymptotic stationarity untestable: {exc}")

    if refined is not None:
        try:
            rep = asymptotic_tau_periodic_test(
                traj, refined, cfg.eps, cfg.tail_fraction, cfg.min_multiples)
            verdicts["asymptotically-tau-periodic"] = rep.verdict
            reports["asymptotically-tau-periodic"] = rep
        except (ValueError, DynamicsError) as exc:
            notes.append(f"asymptotic periodicity untestable: {exc}")

    # remote settling
    if refined is not None and windows is not None:
        try:
            curve = remote_tau_periodic_test(traj, refined, cfg.eps, windows)
            verdicts["remotely-tau-periodic"] = curve.verdict
            reports["remotely-tau-periodic"] = curve
        except (ValueError, DynamicsError) as exc:
            notes.append(f"remote periodicity untestable: {exc}")

    if windows is not None:
        try:
            battery = remote_stationary_test(traj, cfg.eps, windows,
                                             probes=cfg.probes, seed=cfg.seed)
            verdicts["remotely-stationary"] = battery.verdict
            reports["remotely-stationary"] = battery
        except (ValueError, DynamicsError) as exc:
            notes.append(f"remote stationarity untestable: {exc}")

    # ---- internal consistency of the hierarchy ----
    # (a) shifts admitted over the whole span stay admitted late: the late
    # supremum runs over a subset of the same grid comparisons.
    if gscan is not None and rscan is not None:
        both = gscan.assessable & rscan.assessable
        bad = both & gscan.admitted & ~rscan.admitted
        if np.any(bad):
            taus_bad = gscan.taus[bad][:3]
            hierarchy.append({"name": "global-implies-remote",
                              "status": "violation",
                              "detail": f"shifts {taus_bad} admitted globally "
                                        "but not remotely"})
        else:
            hierarchy.append({"name": "global-implies-remote", "status": "ok",
                              "detail": f"{int(np.sum(both))} shifts compared"})
    else:
        hierarchy.append({"name": "global-implies-remote", "status": "skipped",
                          "detail": "needs both scans"})

    # (b) the tail oscillation can never exceed the full oscillation.
    rep = reports.get("asymptotically-stationary")
    if rep is not None and math.isfinite(rep.statistic):
        if rep.statistic <= osc_full + _POS_TOL:
            hierarchy.append({"name": "tail-oscillation-nested",
                              "status": "ok",
                              "detail": f"{rep.statistic:.3e} <= {osc_full:.3e}"})
        else:
            hierarchy.append({"name": "tail-oscillation-nested",
                              "status": "violation",
                              "detail": f"tail {rep.statistic:.3e} exceeds "
                                        f"full {osc_full:.3e}"})
    else:
        hierarchy.append({"name": "tail-oscillation-nested",
                          "status": "skipped", "detail": "no tail statistic"})

    # (c)-(d) triangle inequality for repeated shifts.
    if refined is not None and windows is not None:
        for k in (2, 3):
            hierarchy.append(_triangle_check(traj, refined, windows[-1], k))
    else:
        hierarchy.append({"name": "triangle k=2", "status": "skipped",
                          "detail": "no candidate shift or windows"})
        hierarchy.append({"name": "triangle k=3", "status": "skipped",
                          "detail": "no candidate shift or windows"})

    label = "unclassified"
    for name in CLASS_ORDER:
        if verdicts[name] == "pass":
            label = name
            break

    return ClassificationResult(
        label=label, verdicts=verdicts,
        candidate_tau=refined, windows=windows, config=cfg, reports=reports,
        global_scan=gscan, remote_scan=rscan, hierarchy=hierarchy, notes=notes)
