"""Censored datasets, CSV ingestion, Kaplan-Meier estimation and
model-vs-nonparametric comparison tables."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .distribution import KumIwParams, quantile, sample, survival
from .errors import DataError

__all__ = [
    "Status",
    "CensoredObs",
    "CensoredDataset",
    "KmCurve",
    "KmComparison",
    "load_csv",
    "kaplan_meier",
    "km_vs_parametric",
    "censoring_upper_bound",
    "simulate_censored",
]


class Status(enum.Enum):
    EVENT = 1
    CENSORED = 0


@dataclass(frozen=True)
class CensoredObs:
    """A single follow-up record: observed time and event status."""

    time: float
    status: Status

    def __post_init__(self) -> None:
        if not (math.isfinite(self.time) and self.time > 0):
            raise ValueError(f"observation time must be finite and > 0, got {self.time}")
        if not isinstance(self.status, Status):
            raise ValueError(f"status must be a Status member, got {self.status!r}")


@dataclass(frozen=True)
class CensoredDataset:
    """An ordered, immutable collection of censored observations."""

    observations: tuple[CensoredObs, ...]
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "observations", tuple(self.observations))
        if len(self.observations) == 0:
            raise DataError("empty dataset")

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def times(self) -> np.ndarray:
        return np.array([o.time for o in self.observations], dtype=float)

    @property
    def event_mask(self) -> np.ndarray:
        return np.array([o.status is Status.EVENT for o in self.observations], dtype=bool)

    @property
    def n_events(self) -> int:
        return int(self.event_mask.sum())

    @classmethod
    def from_arrays(cls, times, events, name: str = "") -> "CensoredDataset":
        """Build a dataset from a time array and an event indicator array."""
        times = np.asarray(times, dtype=float)
        events = np.asarray(events)
        if times.shape != events.shape:
            raise DataError("times and events must have matching shapes")
        obs = tuple(
            CensoredObs(float(t), Status.EVENT if bool(e) else Status.CENSORED)
            for t, e in zip(times, events)
        )
        return cls(obs, name=name)


@dataclass(frozen=True)
class KmCurve:
    """Kaplan-Meier product-limit estimate as a right-continuous step function.

    ``times`` are the distinct event times; ``survival`` the estimate just
    after each, with ``at_risk``/``events`` the corresponding counts.
    """

    times: np.ndarray
    survival: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.times)
        if not (len(self.survival) == len(self.at_risk) == len(self.events) == n):
            raise ValueError("KmCurve fields must have equal lengths")
        if n and (np.any(np.diff(self.times) <= 0) or np.any(np.diff(self.survival) > 1e-15)):
            raise ValueError("KmCurve requires increasing times and nonincreasing survival")

    def survival_at(self, t):
        """Step-function evaluation; value before the first event time is 1."""
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="right")
        padded = np.concatenate(([1.0], self.survival))
        out = padded[idx]
        return out if np.ndim(out) else float(out)


def load_csv(path, time_col: str = "time", status_col: str = "status") -> CensoredDataset:
    """Read a censored dataset from a headered CSV file.

    Status coding is 1 = event, 0 = censored.  A file without the status
    column is read as fully observed (every row an event), so time-only
    sample files round-trip.  Malformed rows are reported with their
    file line number (the header is line 1).
    """
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty dataset")
        if time_col not in reader.fieldnames:
            raise DataError(f"{path}: missing column(s) ['{time_col}']")
        has_status = status_col in reader.fieldnames
        observations = []
        for line_no, row in enumerate(reader, start=2):
            raw_time = (row.get(time_col) or "").strip()
            try:
                t = float(raw_time)
            except ValueError:
                raise DataError(f"{path}: row {line_no}: cannot parse time {raw_time!r}") from None
            if not (math.isfinite(t) and t > 0):
                raise DataError(f"{path}: row {line_no}: time must be > 0, got {raw_time!r}")
            if has_status:
                raw_status = (row.get(status_col) or "").strip()
                if raw_status == "1":
                    status = Status.EVENT
                elif raw_status == "0":
                    status = Status.CENSORED
                else:
                    raise DataError(
                        f"{path}: row {line_no}: unknown status code {raw_status!r} "
                        f"(expected 0 or 1)"
                    )
            else:
                status = Status.EVENT
            observations.append(CensoredObs(t, status))
    if not observations:
        raise DataError(f"{path}: empty dataset")
    return CensoredDataset(tuple(observations), name=str(path))


def kaplan_meier(d: CensoredDataset) -> KmCurve:
    """Product-limit estimate over the distinct event times.

    Ties at a time are processed against the risk set including all tied
    subjects; censored observations leave the risk set between event
    times without introducing steps.
    """
    if d.n_events == 0:
        raise DataError("Kaplan-Meier requires at least one event")
    times = d.times
    events = d.event_mask
    order = np.argsort(times, kind="stable")
    times = times[order]
    events = events[order]
    n = len(times)

    step_times, step_surv, step_risk, step_events = [], [], [], []
    surv = 1.0
    i = 0
    while i < n:
        t = times[i]
        j = i
        d_events = 0
        while j < n and times[j] == t:
            d_events += int(events[j])
            j += 1
        if d_events > 0:
            at_risk = n - i
            surv *= 1.0 - d_events / at_risk
            step_times.append(t)
            step_surv.append(surv)
            step_risk.append(at_risk)
            step_events.append(d_events)
        i = j
    return KmCurve(
        times=np.array(step_times),
        survival=np.array(step_surv),
        at_risk=np.array(step_risk, dtype=int),
        events=np.array(step_events, dtype=int),
    )


@dataclass(frozen=True)
class KmComparison:
    """Paired nonparametric/parametric survival values at the KM step times."""

    t: np.ndarray
    km_survival: np.ndarray
    model_survival: np.ndarray


def km_vs_parametric(d: CensoredDataset, p: KumIwParams) -> KmComparison:
    """Tabulate KM vs model survival at each KM step time.

    The paired columns also serve the y = x diagnostic plot: a good fit
    puts the (km, model) points on the diagonal.
    """
    curve = kaplan_meier(d)
    model = np.asarray(survival(p, curve.times), dtype=float)
    return KmComparison(t=curve.times.copy(), km_survival=curve.survival.copy(), model_survival=model)


def censoring_upper_bound(p: KumIwParams, rate: float) -> float:
    """Upper bound M of a U(0, M) censoring law hitting a target censoring rate.

    Solves E[min(T, M)] / M = rate; the left side decreases from 1 to 0
    as M grows, so the root is bracketed and unique.
    """
    if not 0 < rate < 1:
        raise ValueError(f"censoring rate must be in (0, 1), got {rate}")
    from scipy import integrate, optimize

    def censored_fraction(m: float) -> float:
        with np.errstate(all="ignore"):
            val, _ = integrate.quad(lambda t: float(survival(p, t)), 0.0, m, limit=200)
        return val / m

    lo = float(quantile(p, 1e-6))
    hi = float(quantile(p, 1.0 - 1e-9))
    # expand until the target is bracketed
    for _ in range(200):
        if censored_fraction(lo) > rate:
            break
        lo /= 4.0
    for _ in range(200):
        if censored_fraction(hi) < rate:
            break
        hi *= 4.0
    return float(optimize.brentq(lambda m: censored_fraction(m) - rate, lo, hi, xtol=1e-10, rtol=1e-10))


def simulate_censored(
    p: KumIwParams,
    n: int,
    censor_rate: float,
    seed: int,
    name: str = "simulated",
    upper_bound: float | None = None,
) -> CensoredDataset:
    """Simulate n subjects with independent uniform censoring.

    The censoring upper bound is calibrated so the marginal censoring
    probability equals ``censor_rate``; ``censor_rate = 0`` yields a
    fully observed sample.  Pass a precomputed ``upper_bound`` to skip
    the calibration (useful in replicate studies).
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    lifetimes = sample(p, n, seed)
    if censor_rate == 0:
        return CensoredDataset.from_arrays(lifetimes, np.ones(n, dtype=bool), name=name)
    bound = upper_bound if upper_bound is not None else censoring_upper_bound(p, censor_rate)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    censor_times = rng.uniform(0.0, bound, size=n)
    observed = np.minimum(lifetimes, censor_times)
    events = lifetimes <= censor_times
    return CensoredDataset.from_arrays(observed, events, name=name)
