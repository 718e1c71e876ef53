"""Age-specific population hazard tables and closed-form cumulative hazards.

Rates are piecewise-constant per age band (events per person-year), so every
integral used downstream has an exact closed form; numeric quadrature is used
only as a test oracle.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfRange, ParseError, ValidationError

MODEL_AGE_LO = 20.0
MODEL_AGE_HI = 85.0

CAUSE_BREAST = "breast"
CAUSE_OTHER_MORTALITY = "other_mortality"
_CAUSE_LABELS = (CAUSE_BREAST, CAUSE_OTHER_MORTALITY)


@dataclass(frozen=True)
class AgeInterval:
    """Half-open age interval [lo, hi) in years."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo < self.hi):
            raise ValidationError(f"interval requires lo < hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class RateTable:
    """Piecewise-constant age-specific rates, immutable after construction.

    ``bands`` is an ordered tuple of (age_lo, age_hi, rate). Population tables
    must cover [20, 85]; derived per-subject tables may start later (see
    ``coverage_lo``). All queries outside coverage raise ``OutOfRange``.
    """

    bands: tuple[tuple[float, float, float], ...]
    cause_label: str
    _edges: np.ndarray = field(init=False, repr=False, compare=False)
    _rates: np.ndarray = field(init=False, repr=False, compare=False)
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.cause_label not in _CAUSE_LABELS:
            raise ValidationError(f"unknown cause label {self.cause_label!r}")
        if not self.bands:
            raise ValidationError("rate table needs at least one band")
        prev_hi = None
        for lo, hi, rate in self.bands:
            if not (lo < hi):
                raise ValidationError(f"band ({lo}, {hi}) is empty or inverted")
            if rate < 0.0:
                raise ValidationError(f"negative rate {rate} in band ({lo}, {hi})")
            if rate >= 1.0:
                raise ValidationError(f"rate {rate} per year fails sanity bound < 1.0")
            if prev_hi is not None:
                if lo < prev_hi - 1e-12:
                    raise ValidationError(f"band ({lo}, {hi}) overlaps previous band")
                if lo > prev_hi + 1e-12:
                    raise ValidationError(f"gap between age {prev_hi} and {lo}")
            prev_hi = hi
        edges = np.array([b[0] for b in self.bands] + [self.bands[-1][1]], dtype=float)
        rates = np.array([b[2] for b in self.bands], dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(rates * np.diff(edges))])
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_rates", rates)
        object.__setattr__(self, "_cum", cum)

    @property
    def coverage_lo(self) -> float:
        return float(self._edges[0])

    @property
    def coverage_hi(self) -> float:
        return float(self._edges[-1])

    def rate_at(self, age: float) -> float:
        """Rate of the band containing ``age`` (right-open bands)."""
        self._check_range(age, age)
        idx = int(np.searchsorted(self._edges, age, side="right") - 1)
        idx = min(max(idx, 0), len(self._rates) - 1)
        return float(self._rates[idx])

    def cumulative(self, lo: float, hi: float) -> float:
        """Exact integral of the rate over [lo, hi]."""
        if hi < lo:
            raise OutOfRange(f"interval ({lo}, {hi}) is inverted")
        self._check_range(lo, hi)
        return float(self._cum_at(hi) - self._cum_at(lo))

    def scaled(self, factor: float) -> "RateTable":
        """New table with every rate multiplied by ``factor`` (>= 0)."""
        if factor < 0.0:
            raise ValidationError(f"scale factor must be >= 0, got {factor}")
        return RateTable(
            bands=tuple((lo, hi, rate * factor) for lo, hi, rate in self.bands),
            cause_label=self.cause_label,
        )

    def band_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(edges, rates) arrays; edges has one more entry than rates."""
        return self._edges, self._rates

    def _cum_at(self, age: float) -> float:
        idx = int(np.searchsorted(self._edges, age, side="right") - 1)
        idx = min(max(idx, 0), len(self._rates) - 1)
        return float(self._cum[idx] + self._rates[idx] * (age - self._edges[idx]))

    def _check_range(self, lo: float, hi: float) -> None:
        if lo < self.coverage_lo - 1e-9 or hi > self.coverage_hi + 1e-9:
            raise OutOfRange(
                f"interval ({lo}, {hi}) outside coverage "
                f"[{self.coverage_lo}, {self.coverage_hi}]"
            )


def load_rate_table(source, cause_label: str = CAUSE_BREAST) -> RateTable:
    """Parse a ``age_lo,age_hi,rate`` CSV stream into a validated RateTable.

    The table must cover the full model age range [20, 85]. Lines starting
    with ``#`` are ignored.
    """
    if isinstance(source, (str, bytes)):
        source = io.StringIO(source if isinstance(source, str) else source.decode("utf-8"))
    rows: list[tuple[float, float, float]] = []
    header_seen = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if not header_seen:
            header_seen = True
            if parts[:3] == ["age_lo", "age_hi", "rate"]:
                continue
            # fall through: headerless files are accepted
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 3 fields, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    if not rows:
        raise ParseError("no data rows")
    rows.sort(key=lambda r: r[0])
    table = RateTable(bands=tuple(rows), cause_label=cause_label)
    if table.coverage_lo > MODEL_AGE_LO + 1e-9 or table.coverage_hi < MODEL_AGE_HI - 1e-9:
        raise ValidationError(
            f"table covers [{table.coverage_lo}, {table.coverage_hi}], "
            f"needs [{MODEL_AGE_LO}, {MODEL_AGE_HI}]"
        )
    return table


def cumulative_hazard(table: RateTable, interval: AgeInterval) -> float:
    """Dimensionless cumulative hazard of ``table`` over ``interval``."""
    return table.cumulative(interval.lo, interval.hi)


def table_from_yearly(rates_by_year: np.ndarray, age_lo: float, cause_label: str) -> RateTable:
    """Build a table from per-year rates starting at integer-aligned ``age_lo``."""
    bands = tuple(
        (age_lo + k, age_lo + k + 1, float(r)) for k, r in enumerate(rates_by_year)
    )
    return RateTable(bands=bands, cause_label=cause_label)


class ScaledView:
    """Read-only multiplicative view of a RateTable.

    Shares the base table's band structure, so thousands of per-subject
    hazard curves that differ only by a relative-hazard multiplier cost a
    few bytes each. Quacks like RateTable for every query used downstream.
    """

    __slots__ = ("base", "scale")

    def __init__(self, base: RateTable, scale: float):
        if scale < 0.0:
            raise ValidationError(f"scale factor must be >= 0, got {scale}")
        if isinstance(base, ScaledView):
            base, scale = base.base, base.scale * scale
        self.base = base
        self.scale = float(scale)

    @property
    def cause_label(self) -> str:
        return self.base.cause_label

    @property
    def bands(self) -> tuple[tuple[float, float, float], ...]:
        return tuple((lo, hi, r * self.scale) for lo, hi, r in self.base.bands)

    @property
    def _edges(self) -> np.ndarray:
        return self.base._edges

    @property
    def coverage_lo(self) -> float:
        return self.base.coverage_lo

    @property
    def coverage_hi(self) -> float:
        return self.base.coverage_hi

    def rate_at(self, age: float) -> float:
        return self.base.rate_at(age) * self.scale

    def cumulative(self, lo: float, hi: float) -> float:
        return self.base.cumulative(lo, hi) * self.scale

    def scaled(self, factor: float) -> "ScaledView":
        return ScaledView(self.base, self.scale * factor)

    def band_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        edges, rates = self.base.band_arrays()
        return edges, rates * self.scale
