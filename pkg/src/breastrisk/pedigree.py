"""Family-history segregation engine.

Genetics are modelled with two unlinked autosomal loci:

* a three-allele locus for the two known high-penetrance genes (alleles
  ``n``, ``B1``, ``B2``; six unordered genotypes), and
* a diallelic dominant locus for the residual familial component
  (risk-allele count 0/1/2).

A person's joint state is one of 18 (genotype, count) pairs. Phenotype
depends only on the carrier classes ``c1`` (0 none, 1 first gene, 2 second
gene; joint carriers count as 1) and ``c2`` (residual-gene carrier yes/no).
Founders draw from Hardy-Weinberg; children inherit one allele from each
parent with probability 1/2 per allele. Likelihoods are evaluated by exact
variable elimination, which reduces to recursive peeling on loop-free
pedigrees; pedigrees with loops are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidAges,
    NoConvergence,
    OutOfRange,
    UnsupportedPedigree,
    ValidationError,
)
from .rates import MODEL_AGE_HI, MODEL_AGE_LO, RateTable

# ---------------------------------------------------------------------------
# Genotype state space
# ---------------------------------------------------------------------------

# Unordered genotypes at the major-gene locus (alleles 0=n, 1=B1, 2=B2).
GENOTYPE_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_PAIR_INDEX = {pair: i for i, pair in enumerate(GENOTYPE_PAIRS)}
_PAIR_INDEX.update({(b, a): i for (a, b), i in list(_PAIR_INDEX.items())})

N_MAJOR = len(GENOTYPE_PAIRS)  # 6
N_RESIDUAL = 3  # allele count at the residual locus
N_STATES = N_MAJOR * N_RESIDUAL  # 18

# Carrier class c1 for each major genotype (joint carriers class as 1).
_MAJOR_C1 = np.array([0, 1, 2, 1, 1, 2], dtype=np.int64)
_RESIDUAL_C2 = np.array([0, 1, 1], dtype=np.int64)

# Posterior cells in fixed order (c1, c2).
CELLS = ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1))
_CELL_INDEX = {cell: i for i, cell in enumerate(CELLS)}

STATE_MAJOR = np.repeat(np.arange(N_MAJOR), N_RESIDUAL)
STATE_RESIDUAL = np.tile(np.arange(N_RESIDUAL), N_MAJOR)
STATE_C1 = _MAJOR_C1[STATE_MAJOR]
STATE_C2 = _RESIDUAL_C2[STATE_RESIDUAL]
STATE_CELL = np.array(
    [_CELL_INDEX[(int(c1), int(c2))] for c1, c2 in zip(STATE_C1, STATE_C2)],
    dtype=np.int64,
)


def _major_gamete_matrix() -> np.ndarray:
    """P(transmitted allele | genotype) for the major locus, shape (6, 3)."""
    g = np.zeros((N_MAJOR, 3))
    for i, (a, b) in enumerate(GENOTYPE_PAIRS):
        g[i, a] += 0.5
        g[i, b] += 0.5
    return g


def _major_transmission() -> np.ndarray:
    """T6[child, mother, father] for the major locus."""
    g = _major_gamete_matrix()
    t = np.zeros((N_MAJOR, N_MAJOR, N_MAJOR))
    for m in range(N_MAJOR):
        for f in range(N_MAJOR):
            for am in range(3):
                for af in range(3):
                    c = _PAIR_INDEX[(am, af)]
                    t[c, m, f] += g[m, am] * g[f, af]
    return t


def _residual_transmission() -> np.ndarray:
    """T3[child, mother, father] for the residual locus (allele counts)."""
    t = np.zeros((N_RESIDUAL, N_RESIDUAL, N_RESIDUAL))
    for m in range(N_RESIDUAL):
        for f in range(N_RESIDUAL):
            pm, pf = m / 2.0, f / 2.0
            t[0, m, f] = (1 - pm) * (1 - pf)
            t[1, m, f] = pm * (1 - pf) + (1 - pm) * pf
            t[2, m, f] = pm * pf
    return t


_T6 = _major_transmission()
_T3 = _residual_transmission()

# Joint transmission over the 18 states: T[child, mother, father].
TRANSMISSION = np.einsum("cmf,duv->cdmufv", _T6, _T3).reshape(
    N_STATES, N_STATES, N_STATES
)


# ---------------------------------------------------------------------------
# Pedigree data model and text format
# ---------------------------------------------------------------------------

SEX_FEMALE = "F"
SEX_MALE = "M"

TEST_UNTESTED = "untested"
TEST_NEGATIVE = "negative"
TEST_BRCA1 = "brca1"
TEST_BRCA2 = "brca2"
_TEST_VALUES = (TEST_UNTESTED, TEST_NEGATIVE, TEST_BRCA1, TEST_BRCA2)

_ID_FORBIDDEN = set(",\n\r")


@dataclass(frozen=True)
class PedigreeMember:
    """One family member; ages in years, events optional."""

    id: str
    sex: str
    mother_id: str | None = None
    father_id: str | None = None
    breast_age: float | None = None
    ovarian_age: float | None = None
    censor_age: float = 0.0
    brca_test: str = TEST_UNTESTED

    def __post_init__(self) -> None:
        if not self.id or _ID_FORBIDDEN & set(self.id):
            raise ValidationError(f"member id {self.id!r} empty or contains ',' / newline")
        if self.sex not in (SEX_FEMALE, SEX_MALE):
            raise ValidationError(f"member {self.id}: sex must be F or M")
        if self.brca_test not in _TEST_VALUES:
            raise ValidationError(f"member {self.id}: unknown test result {self.brca_test!r}")
        if self.censor_age < 0 or self.censor_age > MODEL_AGE_HI + 1e-9:
            raise InvalidAges(f"member {self.id}: censor age {self.censor_age} outside [0, 85]")
        for label, age in (("breast", self.breast_age), ("ovarian", self.ovarian_age)):
            if age is None:
                continue
            if age > self.censor_age + 1e-9:
                raise InvalidAges(f"member {self.id}: {label} event age {age} after censor age")
            if age < MODEL_AGE_LO or age > MODEL_AGE_HI:
                raise InvalidAges(
                    f"member {self.id}: {label} event age {age} outside model range "
                    f"[{MODEL_AGE_LO}, {MODEL_AGE_HI}]"
                )


class Pedigree:
    """Validated, loop-free family structure with a designated proband.

    A member with exactly one listed parent gets an implicit unobserved
    founder as the other parent (equivalent to marginalising that parent).
    """

    def __init__(self, members, proband_id: str):
        members = list(members)
        if not members:
            raise ValidationError("pedigree has no members")
        ids = [m.id for m in members]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate member ids")
        members = self._with_implicit_founders(members)
        index = {m.id: i for i, m in enumerate(members)}
        if proband_id not in index:
            raise ValidationError(f"proband {proband_id!r} not among members")
        for m in members:
            for pid, role, sex in (
                (m.mother_id, "mother", SEX_FEMALE),
                (m.father_id, "father", SEX_MALE),
            ):
                if pid is None:
                    continue
                if pid not in index:
                    raise UnsupportedPedigree(f"member {m.id}: {role} {pid!r} not in pedigree")
                if members[index[pid]].sex != sex:
                    raise ValidationError(f"member {m.id}: {role} {pid!r} has wrong sex")
        self.members: tuple[PedigreeMember, ...] = tuple(members)
        self.proband_id = proband_id
        self._index = index
        self._check_acyclic()
        self._check_loop_free()

    @staticmethod
    def _with_implicit_founders(members: list[PedigreeMember]) -> list[PedigreeMember]:
        out = list(members)
        known = {m.id for m in members}
        counter = 0
        for i, m in enumerate(list(out)):
            if (m.mother_id is None) == (m.father_id is None):
                continue
            counter += 1
            if m.mother_id is None:
                new = PedigreeMember(id=f"_founder{counter}", sex=SEX_FEMALE)
                out[i] = PedigreeMember(**{**m.__dict__, "mother_id": new.id})
            else:
                new = PedigreeMember(id=f"_founder{counter}", sex=SEX_MALE)
                out[i] = PedigreeMember(**{**m.__dict__, "father_id": new.id})
            if new.id in known:
                raise ValidationError(f"reserved id {new.id!r} already in use")
            out.append(new)
        return out

    def _check_acyclic(self) -> None:
        state: dict[str, int] = {}

        def visit(mid: str, depth: int) -> None:
            if depth > len(self.members):
                raise UnsupportedPedigree("parent links form a cycle")
            if state.get(mid) == 1:
                raise UnsupportedPedigree("parent links form a cycle")
            if state.get(mid) == 2:
                return
            state[mid] = 1
            m = self.members[self._index[mid]]
            for pid in (m.mother_id, m.father_id):
                if pid is not None:
                    visit(pid, depth + 1)
            state[mid] = 2

        for m in self.members:
            visit(m.id, 0)

    def _check_loop_free(self) -> None:
        # Person and couple nodes; a cycle in this graph is a pedigree loop
        # (inbreeding or intermarriage), which peeling does not support.
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b) -> bool:
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            parent[ra] = rb
            return True

        couples = {}
        for m in self.members:
            if m.mother_id is None:
                continue
            key = (m.mother_id, m.father_id)
            if key not in couples:
                couples[key] = f"~couple{len(couples)}"
                for spouse in key:
                    if not union(spouse, couples[key]):
                        raise UnsupportedPedigree("pedigree contains a loop")
            if not union(m.id, couples[key]):
                raise UnsupportedPedigree("pedigree contains a loop")

    def member(self, mid: str) -> PedigreeMember:
        return self.members[self._index[mid]]

    @property
    def proband(self) -> PedigreeMember:
        return self.member(self.proband_id)

    def founders(self) -> list[PedigreeMember]:
        return [m for m in self.members if m.mother_id is None]


def singleton_pedigree(age: float, member_id: str = "proband") -> Pedigree:
    """Uninformative pedigree: one unaffected woman censored at ``age``."""
    member = PedigreeMember(id=member_id, sex=SEX_FEMALE, censor_age=age)
    return Pedigree([member], proband_id=member_id)


def parse_pedigree(text: str) -> Pedigree:
    """Parse the line-oriented pedigree format.

    One member per line: ``id,sex,mother_id,father_id,breast_age,
    ovarian_age,censor_age,brca_test`` with empty fields for "none".
    Ids may not contain commas or newlines (no quoting/escapes). Lines
    starting with ``#`` are comments. The first data row is the proband.
    """
    members = []
    proband_id = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if parts[0] == "id" and parts[1:2] == ["sex"]:
            continue
        if len(parts) != 8:
            raise ValidationError(f"line {lineno}: expected 8 fields, got {len(parts)}")
        pid, sex, mother, father, b_age, o_age, c_age, test = parts
        try:
            member = PedigreeMember(
                id=pid,
                sex=sex.upper(),
                mother_id=mother or None,
                father_id=father or None,
                breast_age=float(b_age) if b_age else None,
                ovarian_age=float(o_age) if o_age else None,
                censor_age=float(c_age) if c_age else 0.0,
                brca_test=test.lower() if test else TEST_UNTESTED,
            )
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        members.append(member)
        if proband_id is None:
            proband_id = member.id
    if proband_id is None:
        raise ValidationError("pedigree file has no data rows")
    return Pedigree(members, proband_id=proband_id)


def serialize_pedigree(ped: Pedigree) -> str:
    """Inverse of :func:`parse_pedigree`; proband first, synthetic founders kept."""
    def fmt(age):
        return "" if age is None else format(age, "g")

    rows = ["id,sex,mother_id,father_id,breast_age,ovarian_age,censor_age,brca_test"]
    ordered = [ped.proband] + [m for m in ped.members if m.id != ped.proband_id]
    for m in ordered:
        rows.append(
            ",".join(
                [
                    m.id,
                    m.sex,
                    m.mother_id or "",
                    m.father_id or "",
                    fmt(m.breast_age),
                    fmt(m.ovarian_age),
                    format(m.censor_age, "g"),
                    "" if m.brca_test == TEST_UNTESTED else m.brca_test,
                ]
            )
        )
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# Segregation parameters and derived model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SegregationParams:
    """Fixed genetic parameters: prevalences, residual-gene effect, penetrance.

    Penetrance inputs are hazard-band tables (same format as population rate
    tables); survivor grids derived from them start at 1 and are
    non-increasing by construction.
    """

    beta: float
    gamma: float
    brca1_prev: float
    brca2_prev: float
    breast_brca1: RateTable
    breast_brca2: RateTable
    ovarian_brca1: RateTable
    ovarian_brca2: RateTable
    ovarian_population: RateTable

    def __post_init__(self) -> None:
        if not (0.0 < self.beta < 1.0):
            raise ValidationError(f"beta must be in (0,1), got {self.beta}")
        if self.gamma < 0.0:
            raise ValidationError(f"gamma must be >= 0, got {self.gamma}")
        for name, p in (("brca1_prev", self.brca1_prev), ("brca2_prev", self.brca2_prev)):
            if not (0.0 < p < 1.0):
                raise ValidationError(f"{name} must be in (0,1), got {p}")
        if self.brca1_prev + self.brca2_prev >= 1.0:
            raise ValidationError("carrier prevalences sum to >= 1")


def solve_baseline_survivor(s_g: float, beta: float, gamma: float) -> float:
    """Invert the carrier mixture: find S0 with (1-b)*S0 + b*S0**exp(g) = s_g.

    Newton iteration from the bracketed root with bisection fallback;
    residual below 1e-12 or ``NoConvergence`` after 100 iterations.
    """
    if not (0.0 < s_g <= 1.0):
        raise ValidationError(f"survivor value must be in (0,1], got {s_g}")
    if not (0.0 < beta < 1.0):
        raise ValidationError(f"beta must be in (0,1), got {beta}")
    if gamma < 0.0:
        raise ValidationError(f"gamma must be >= 0, got {gamma}")
    rho = math.exp(gamma)

    def f(s0: float) -> float:
        return (1.0 - beta) * s0 + beta * s0**rho - s_g

    lo, hi = 0.0, 1.0
    x = min(1.0, s_g / (1.0 - beta + beta * s_g ** (rho - 1.0) if s_g > 0 else 1.0))
    x = min(max(x, 1e-300), 1.0)
    for _ in range(100):
        fx = f(x)
        if abs(fx) < 1e-12:
            return x
        if fx > 0.0:
            hi = x
        else:
            lo = x
        dfx = (1.0 - beta) + beta * rho * x ** (rho - 1.0)
        step = fx / dfx
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        x = x_new
    raise NoConvergence(f"baseline survivor solve did not reach 1e-12 for s_g={s_g}")


GRID_LO = int(MODEL_AGE_LO)
GRID_HI = int(MODEL_AGE_HI)
GRID_YEARS = GRID_HI - GRID_LO  # 65 one-year bands
GRID_AGES = np.arange(GRID_LO, GRID_HI + 1, dtype=float)


def _survivor_grid(table: RateTable) -> np.ndarray:
    """Survivor values at integer ages 20..85 implied by a hazard-band table."""
    cum = np.array([table.cumulative(GRID_LO, a) for a in GRID_AGES])
    return np.exp(-cum)


class SegregationModel:
    """Everything derived from (incidence table, segregation parameters).

    Holds per-cell breast survivor grids (cells ordered as ``CELLS``),
    per-class ovarian grids, founder priors and the transmission tensor.
    Immutable after construction; safe to share across threads.
    """

    def __init__(self, incidence: RateTable, params: SegregationParams):
        self.incidence = incidence
        self.params = params

        p1, p2 = params.brca1_prev, params.brca2_prev
        p0 = 1.0 - p1 - p2

        s_pop = _survivor_grid(incidence)
        s_major = np.empty((3, GRID_YEARS + 1))
        s_major[1] = _survivor_grid(params.breast_brca1)
        s_major[2] = _survivor_grid(params.breast_brca2)
        s_major[0] = (s_pop - p1 * s_major[1] - p2 * s_major[2]) / p0
        self._validate_survivor(s_major[0], "non-carrier breast")

        rho = math.exp(params.gamma)
        baseline = np.empty_like(s_major)
        for c1 in range(3):
            baseline[c1] = [
                solve_baseline_survivor(float(s), params.beta, params.gamma)
                for s in s_major[c1]
            ]

        # Breast survivor per posterior cell, shape (6, GRID_YEARS + 1).
        self.breast_survivor = np.empty((len(CELLS), GRID_YEARS + 1))
        for i, (c1, c2) in enumerate(CELLS):
            self.breast_survivor[i] = baseline[c1] ** (rho if c2 else 1.0)
        self.breast_rate = self._band_rates(self.breast_survivor)

        s_ov_pop = _survivor_grid(params.ovarian_population)
        self.ovarian_survivor = np.empty((3, GRID_YEARS + 1))
        self.ovarian_survivor[1] = _survivor_grid(params.ovarian_brca1)
        self.ovarian_survivor[2] = _survivor_grid(params.ovarian_brca2)
        self.ovarian_survivor[0] = (
            s_ov_pop - p1 * self.ovarian_survivor[1] - p2 * self.ovarian_survivor[2]
        ) / p0
        self._validate_survivor(self.ovarian_survivor[0], "non-carrier ovarian")
        self.ovarian_rate = self._band_rates(self.ovarian_survivor)

        # Allele frequencies from carrier prevalences.
        q1 = 1.0 - math.sqrt(1.0 - p1)
        disc = (1.0 - q1) ** 2 - p2
        if disc <= 0.0:
            raise ValidationError("carrier prevalences incompatible with Hardy-Weinberg")
        q2 = (1.0 - q1) - math.sqrt(disc)
        qn = 1.0 - q1 - q2
        freqs = np.array([qn, q1, q2])
        major_prior = np.empty(N_MAJOR)
        for i, (a, b) in enumerate(GENOTYPE_PAIRS):
            major_prior[i] = freqs[a] * freqs[b] * (1 if a == b else 2)
        qu = 1.0 - math.sqrt(1.0 - params.beta)
        residual_prior = np.array([(1 - qu) ** 2, 2 * qu * (1 - qu), qu**2])
        self.state_prior = (major_prior[STATE_MAJOR] * residual_prior[STATE_RESIDUAL]).copy()

        self.cell_prior = np.zeros(len(CELLS))
        np.add.at(self.cell_prior, STATE_CELL, self.state_prior)

    @staticmethod
    def _validate_survivor(grid: np.ndarray, label: str) -> None:
        if np.any(grid <= 0.0) or np.any(grid > 1.0 + 1e-12):
            raise ValidationError(f"{label} survivor grid leaves (0, 1]")
        if np.any(np.diff(grid) > 1e-12):
            raise ValidationError(f"{label} survivor grid is not non-increasing")

    @staticmethod
    def _band_rates(grids: np.ndarray) -> np.ndarray:
        logs = np.log(grids)
        return np.maximum(logs[:, :-1] - logs[:, 1:], 0.0)

    # -- survivor evaluation ------------------------------------------------

    def breast_survivor_at(self, age) -> np.ndarray:
        """Per-cell breast survivor at (possibly fractional) age; shape (6,)."""
        return self._survivor_at(self.breast_survivor, self.breast_rate, age)

    def ovarian_survivor_at(self, age) -> np.ndarray:
        return self._survivor_at(self.ovarian_survivor, self.ovarian_rate, age)

    @staticmethod
    def _survivor_at(grid: np.ndarray, rate: np.ndarray, age: float) -> np.ndarray:
        if age <= GRID_LO:
            return np.ones(grid.shape[0])
        a = min(float(age), float(GRID_HI))
        k = min(int(a) - GRID_LO, GRID_YEARS - 1)
        frac = a - (GRID_LO + k)
        return grid[:, k] * np.exp(-rate[:, k] * frac)

    def breast_event_year_prob(self, age: float) -> np.ndarray:
        """Per-cell probability of a first event in the year containing ``age``."""
        k = min(int(age) - GRID_LO, GRID_YEARS - 1)
        return self.breast_survivor[:, k] - self.breast_survivor[:, k + 1]

    def ovarian_event_year_prob(self, age: float) -> np.ndarray:
        k = min(int(age) - GRID_LO, GRID_YEARS - 1)
        return self.ovarian_survivor[:, k] - self.ovarian_survivor[:, k + 1]


def build_model(incidence: RateTable, params: SegregationParams) -> SegregationModel:
    return SegregationModel(incidence, params)


# ---------------------------------------------------------------------------
# Likelihood: member potentials and variable elimination
# ---------------------------------------------------------------------------

_TEST_MASKS = {
    TEST_UNTESTED: np.ones(N_MAJOR),
    TEST_NEGATIVE: np.array([1.0, 0, 0, 0, 0, 0]),
    TEST_BRCA1: np.array([0.0, 1, 0, 1, 1, 0]),
    TEST_BRCA2: np.array([0.0, 0, 1, 0, 0, 1]),
}


def member_potential(member: PedigreeMember, model: SegregationModel) -> np.ndarray:
    """Phenotype-and-test likelihood of one member per joint state, shape (18,).

    Male phenotypes carry no information (transmission only); test results
    constrain the major-locus genotype for either sex.
    """
    if member.sex == SEX_MALE:
        cell_br = np.ones(len(CELLS))
        class_ov = np.ones(3)
    else:
        if member.breast_age is not None:
            cell_br = model.breast_event_year_prob(member.breast_age)
        else:
            cell_br = model.breast_survivor_at(member.censor_age)
        if member.ovarian_age is not None:
            class_ov = model.ovarian_event_year_prob(member.ovarian_age)
        else:
            class_ov = model.ovarian_survivor_at(member.censor_age)
    mask = _TEST_MASKS[member.brca_test]
    return cell_br[STATE_CELL] * class_ov[STATE_C1] * mask[STATE_MAJOR]


def _eliminate(factors: list[tuple[tuple[int, ...], np.ndarray]], keep: int) -> np.ndarray:
    """Sum-product variable elimination; returns the factor over ``keep``."""
    factors = list(factors)
    variables = set()
    for vars_, _ in factors:
        variables.update(vars_)
    variables.discard(keep)

    while variables:
        best, best_cost = None, None
        for v in variables:
            touched = set()
            for vars_, _ in factors:
                if v in vars_:
                    touched.update(vars_)
            cost = len(touched)
            if best_cost is None or cost < best_cost:
                best, best_cost = v, cost
        v = best
        merged_vars: list[int] = []
        merged: list[tuple[tuple[int, ...], np.ndarray]] = []
        rest = []
        for vars_, arr in factors:
            if v in vars_:
                merged.append((vars_, arr))
                for u in vars_:
                    if u not in merged_vars:
                        merged_vars.append(u)
            else:
                rest.append((vars_, arr))
        letters = {u: chr(ord("a") + i) for i, u in enumerate(merged_vars)}
        out_vars = tuple(u for u in merged_vars if u != v)
        subscript = (
            ",".join("".join(letters[u] for u in vars_) for vars_, _ in merged)
            + "->"
            + "".join(letters[u] for u in out_vars)
        )
        new_arr = np.einsum(subscript, *[arr for _, arr in merged])
        rest.append((out_vars, new_arr))
        factors = rest
        variables.discard(v)

    result = np.ones(N_STATES)
    scalar = 1.0
    for vars_, arr in factors:
        if vars_ == (keep,):
            result = result * arr
        elif vars_ == ():
            scalar *= float(arr)
        else:  # pragma: no cover - elimination removes everything else
            raise AssertionError("unexpected residual factor")
    return result * scalar


def _joint_over_proband(ped: Pedigree, model: SegregationModel) -> np.ndarray:
    """Unnormalised p(history, proband state) over the 18 proband states."""
    idx = {m.id: i for i, m in enumerate(ped.members)}
    factors: list[tuple[tuple[int, ...], np.ndarray]] = []
    for i, m in enumerate(ped.members):
        pot = member_potential(m, model)
        if m.mother_id is None:
            pot = pot * model.state_prior
            factors.append(((i,), pot))
        else:
            factors.append(((i,), pot))
            factors.append(
                ((i, idx[m.mother_id], idx[m.father_id]), TRANSMISSION)
            )
    return _eliminate(factors, keep=idx[ped.proband_id])


@dataclass(frozen=True)
class GenotypePosterior:
    """Posterior carrier-class weights for the proband, cells as ``CELLS``.

    ``anchor_age`` is the proband's censoring age; the weights condition on
    her being breast-cancer free to that age.
    """

    weights: np.ndarray
    anchor_age: float

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(CELLS),):
            raise ValidationError(f"expected {len(CELLS)} weights")
        if np.any(w < -1e-15):
            raise ValidationError("negative posterior weight")
        if abs(float(w.sum()) - 1.0) > 1e-10:
            raise ValidationError("posterior weights must sum to 1")
        object.__setattr__(self, "weights", w)

    def as_dict(self) -> list[dict]:
        return [
            {"c1": c1, "c2": c2, "weight": float(w)}
            for (c1, c2), w in zip(CELLS, self.weights)
        ]

    @classmethod
    def degenerate(cls, c1: int, c2: int, anchor_age: float) -> "GenotypePosterior":
        w = np.zeros(len(CELLS))
        w[_CELL_INDEX[(c1, c2)]] = 1.0
        return cls(weights=w, anchor_age=anchor_age)


def pedigree_likelihood(
    ped: Pedigree, proband_genotype: tuple[int, int], model: SegregationModel
) -> float:
    """p(family history | proband carrier classes), by exact elimination."""
    if proband_genotype not in _CELL_INDEX:
        raise ValidationError(f"unknown genotype cell {proband_genotype}")
    joint = _joint_over_proband(ped, model)
    cell = _CELL_INDEX[proband_genotype]
    mask = STATE_CELL == cell
    prior_mass = float(model.state_prior[mask].sum())
    return float(joint[mask].sum()) / prior_mass


def genotype_posterior(ped: Pedigree, model: SegregationModel) -> GenotypePosterior:
    """Bayes posterior over the six carrier-class cells for the proband."""
    if ped.proband.sex != SEX_FEMALE:
        raise ValidationError("proband must be female")
    joint = _joint_over_proband(ped, model)
    cells = np.zeros(len(CELLS))
    np.add.at(cells, STATE_CELL, joint)
    total = float(cells.sum())
    if total <= 0.0:
        raise ValidationError("pedigree has probability zero under the model")
    return GenotypePosterior(weights=cells / total, anchor_age=ped.proband.censor_age)


# ---------------------------------------------------------------------------
# Mixture survivor and hazard for an assessed proband
# ---------------------------------------------------------------------------


def _mixture_survivor(post: GenotypePosterior, model: SegregationModel, age: float) -> float:
    """Sum_d w_d * S_d(age) / S_d(anchor): unnormalised survival from anchor."""
    anchor = model.breast_survivor_at(post.anchor_age)
    return float(np.sum(post.weights * model.breast_survivor_at(age) / anchor))


def genetic_survivor(
    post: GenotypePosterior, model: SegregationModel, t0: float, t: float
) -> float:
    """P(breast-cancer free to ``t`` | history, free at ``t0``)."""
    if t < t0:
        raise OutOfRange(f"t={t} before t0={t0}")
    if t0 < post.anchor_age - 1e-9:
        raise OutOfRange(f"t0={t0} before posterior anchor age {post.anchor_age}")
    if t > MODEL_AGE_HI + 1e-9:
        raise OutOfRange(f"t={t} beyond model range")
    return _mixture_survivor(post, model, t) / _mixture_survivor(post, model, t0)


def genetic_hazard(post: GenotypePosterior, model: SegregationModel, t: float) -> float:
    """Instantaneous mixture hazard at age ``t`` (weights updated by survival)."""
    if t < post.anchor_age - 1e-9 or t > MODEL_AGE_HI + 1e-9:
        raise OutOfRange(f"t={t} outside [{post.anchor_age}, {MODEL_AGE_HI}]")
    anchor = model.breast_survivor_at(post.anchor_age)
    w = post.weights * model.breast_survivor_at(t) / anchor
    k = min(int(min(t, MODEL_AGE_HI - 1e-9)) - GRID_LO, GRID_YEARS - 1)
    return float(np.sum(w * model.breast_rate[:, k]) / np.sum(w))


def mixture_band_table(
    post: GenotypePosterior, model: SegregationModel, t0: float
) -> RateTable:
    """Year-band genetic hazard curve from ``t0`` to 85 as a RateTable.

    Band rates are the exact yearly averages -log(M(k+1)/M(k)) of the
    mixture survivor, so cumulative hazards over whole years are exact.
    """
    if t0 < post.anchor_age - 1e-9:
        raise OutOfRange(f"t0={t0} before posterior anchor age {post.anchor_age}")
    if not (MODEL_AGE_LO <= t0 < MODEL_AGE_HI):
        raise OutOfRange(f"t0={t0} outside [{MODEL_AGE_LO}, {MODEL_AGE_HI})")
    edges = [float(t0)] + [float(a) for a in range(int(math.floor(t0)) + 1, GRID_HI + 1)]
    if edges[-1] < MODEL_AGE_HI:
        edges.append(MODEL_AGE_HI)
    values = [_mixture_survivor(post, model, a) for a in edges]
    bands = []
    for i in range(len(edges) - 1):
        width = edges[i + 1] - edges[i]
        if width <= 1e-12:
            continue
        rate = max(0.0, (math.log(values[i]) - math.log(values[i + 1])) / width)
        bands.append((edges[i], edges[i + 1], rate))
    return RateTable(bands=tuple(bands), cause_label="breast")
