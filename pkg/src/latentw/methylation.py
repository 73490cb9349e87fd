"""Epiread ingestion, CpG-triplet extraction, and per-triplet reports.

Epiread lines are whitespace-separated ``chrom  start_cpg  states`` where
``start_cpg`` is the ordinal index of the first CpG covered by the read
and ``states`` is a string over {C, T, N}: C = methylated, T =
unmethylated, N = ambiguous.  Every window of three consecutive CpG
ordinals fully covered by a read with no N in those three positions
contributes one observation of a binary triplet configuration (C -> 1,
T -> 0).  Triplets jointly covered by at least ``min_coverage`` such
observations get a 21-field report row: exchangeability estimates,
configuration counts, and the exchangeable component.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import DegenerateGroupError, EpireadParseError
from .exchangeable import decompose, tv_distance_to_exchangeable
from .inference import WeightEstimate, estimate
from .space import CountVector, SampleSpace, empirical_distribution

TRIPLET_SPACE = SampleSpace(k=2, d=3)
CONFIGS = tuple(TRIPLET_SPACE.outcome_str(i) for i in range(8))  # 000..111

REPORT_COLUMNS = (
    ("chrom", "index", "tv_dist", "lambda_corrected", "lambda_sd")
    + tuple(f"n_{c}" for c in CONFIGS)
    + tuple(f"q_{c}" for c in CONFIGS)
)

_STATE_BITS = {"C": 1, "T": 0}


@dataclass(frozen=True)
class EpireadRecord:
    chrom: str
    start_cpg: int
    states: str


def parse_epireads(stream: Iterable[str]) -> Iterator[EpireadRecord]:
    """Yield validated epiread records from a line iterator.

    Blank lines are skipped; anything else malformed raises
    :class:`EpireadParseError` carrying the 1-based line number.
    """
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise EpireadParseError(line_no,
                                    f"expected 3 fields, got {len(fields)}")
        chrom, start_s, states = fields
        try:
            start = int(start_s)
        except ValueError:
            raise EpireadParseError(line_no,
                                    f"start index {start_s!r} is not an integer")
        if start < 0:
            raise EpireadParseError(line_no, f"negative start index {start}")
        if not states:
            raise EpireadParseError(line_no, "empty states string")
        bad = set(states) - {"C", "T", "N"}
        if bad:
            raise EpireadParseError(
                line_no, f"states contain invalid characters {sorted(bad)}")
        yield EpireadRecord(chrom=chrom, start_cpg=start, states=states)


def parse_epiread_file(path: str) -> Iterator[EpireadRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        yield from parse_epireads(fh)


def extract_triplets(records: Iterable[EpireadRecord],
                     coverage_threshold: int = 100,
                     ) -> dict[tuple[str, int], CountVector]:
    """Aggregate per-triplet configuration counts from reads.

    Every window of three consecutive CpG ordinals (i, i+1, i+2) within
    one chromosome picks up one count from each read that covers all
    three positions with no ambiguous (N) state among them; overlapping
    windows of a long read all count.  Only triplets with total coverage
    at or above the threshold are returned.
    """
    acc: dict[tuple[str, int], np.ndarray] = {}
    for rec in records:
        states = rec.states
        for off in range(len(states) - 2):
            window = states[off:off + 3]
            if "N" in window:
                continue
            config = ((_STATE_BITS[window[0]] << 2)
                      | (_STATE_BITS[window[1]] << 1)
                      | _STATE_BITS[window[2]])
            key = (rec.chrom, rec.start_cpg + off)
            bins = acc.get(key)
            if bins is None:
                bins = np.zeros(8, dtype=np.int64)
                acc[key] = bins
            bins[config] += 1
    return {
        key: CountVector(TRIPLET_SPACE, bins)
        for key, bins in acc.items()
        if int(bins.sum()) >= coverage_threshold
    }


@dataclass(frozen=True)
class TripletRecord:
    """One report row; the 21 fields in column order are ``chrom``,
    ``index``, ``tv_dist``, ``lam_corrected``, ``lam_sd``, eight
    configuration counts (000..111) and the eight exchangeable-component
    probabilities (all zero when the plug-in weight is 0)."""

    chrom: str
    index: int
    tv_dist: float
    lam_corrected: float
    lam_sd: float
    counts: tuple[int, ...]
    q: tuple[float, ...]

    def fields(self) -> tuple:
        return ((self.chrom, self.index, self.tv_dist, self.lam_corrected,
                 self.lam_sd) + self.counts + self.q)


@dataclass(frozen=True)
class TripletFailure:
    chrom: str
    index: int
    error: str


@dataclass(frozen=True)
class TripletReport:
    records: tuple[TripletRecord, ...]
    failures: tuple[TripletFailure, ...]


def _triplet_row(key: tuple[str, int], c: CountVector, n_boot: int,
                 seed_seq: np.random.SeedSequence) -> TripletRecord:
    est: WeightEstimate = estimate(c, n_boot=n_boot, seed=seed_seq)
    p_hat = empirical_distribution(c)
    dec = decompose(p_hat)
    tv, _ = tv_distance_to_exchangeable(p_hat)
    if dec.q is None:
        q_fields = (0.0,) * 8      # all-zero sentinel: no exchangeable part
    else:
        q_fields = tuple(float(v) for v in dec.q.p)
    return TripletRecord(
        chrom=key[0],
        index=key[1],
        tv_dist=tv,
        lam_corrected=est.lambda_corrected,
        lam_sd=est.se_boot,
        counts=tuple(int(v) for v in c.counts),
        q=q_fields,
    )


def triplet_report(triplets: Mapping[tuple[str, int], CountVector],
                   n_boot: int = 1000, seed=0, threads: int = 1,
                   ) -> TripletReport:
    """Run per-triplet estimation and assemble report rows.

    Rows come out sorted by ``(chrom, index)``; each triplet gets its own
    RNG stream spawned from the master seed in that sorted order, so the
    output is identical whatever the thread count.  A failing triplet is
    recorded as a failure entry instead of aborting the batch.
    """
    keys = sorted(triplets.keys())
    root = (seed if isinstance(seed, np.random.SeedSequence)
            else np.random.SeedSequence(seed))
    children = root.spawn(len(keys))

    def run(i: int):
        key = keys[i]
        try:
            return _triplet_row(key, triplets[key], n_boot, children[i])
        except Exception as exc:    # noqa: BLE001 - row-level isolation
            return TripletFailure(chrom=key[0], index=key[1],
                                  error=f"{type(exc).__name__}: {exc}")

    if threads > 1 and len(keys) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, range(len(keys))))
    else:
        results = [run(i) for i in range(len(keys))]

    records = tuple(r for r in results if isinstance(r, TripletRecord))
    failures = tuple(r for r in results if isinstance(r, TripletFailure))
    return TripletReport(records=records, failures=failures)


def write_report_tsv(report: TripletReport, target: str | IO[str],
                     meta: Mapping[str, str] | None = None) -> None:
    """Write report rows as TSV: optional ``# key=value`` metadata
    comments, a header naming all 21 columns, floats at 6 significant
    digits."""
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as fh:
            write_report_tsv(report, fh, meta=meta)
        return
    for key, value in (meta or {}).items():
        target.write(f"# {key}={value}\n")
    target.write("\t".join(REPORT_COLUMNS) + "\n")
    for rec in report.records:
        parts = [rec.chrom, str(rec.index), _fmt(rec.tv_dist),
                 _fmt(rec.lam_corrected), _fmt(rec.lam_sd)]
        parts.extend(str(v) for v in rec.counts)
        parts.extend(_fmt(v) for v in rec.q)
        target.write("\t".join(parts) + "\n")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def read_report_tsv(source: str | IO[str]) -> list[dict]:
    """Read back a report TSV as a list of column dicts (numbers parsed)."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return read_report_tsv(fh)
    rows = []
    header: list[str] | None = None
    for raw in source:
        line = raw.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if header is None:
            header = fields
            if tuple(header) != REPORT_COLUMNS:
                raise ValueError(f"unexpected report header {header}")
            continue
        row: dict = {"chrom": fields[0], "index": int(fields[1])}
        for name, val in zip(header[2:], fields[2:]):
            row[name] = int(val) if name.startswith("n_") else float(val)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Correlation of triplet exchangeability against a numeric covariate.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationReport:
    group: str
    n: int
    pearson_r: float
    pearson_p: float
    spearman_rho: float
    spearman_p: float


def correlate(weights: Sequence[float], covariate: Sequence[float],
              groups: Sequence | None = None) -> list[CorrelationReport]:
    """Per-group Pearson and Spearman correlation with two-sided tests.

    The Pearson test is the Wald t-test ``t = r*sqrt((m-2)/(1-r^2))``
    against a t distribution with ``m-2`` degrees of freedom; the
    Spearman test applies the same statistic to rank-transformed data.

    Raises
    ------
    DegenerateGroupError
        If either variable is constant within a group (< 3 points also
        counts as degenerate: no test is possible).
    """
    from scipy import stats

    w = np.asarray(weights, dtype=np.float64)
    x = np.asarray(covariate, dtype=np.float64)
    if w.shape != x.shape:
        raise ValueError("weights and covariate must have equal length")
    if groups is None:
        key_arr = np.array(["all"] * len(w))
    else:
        key_arr = np.asarray([str(g) for g in groups])
        if key_arr.shape != w.shape:
            raise ValueError("groups must match weights in length")

    out = []
    for key in sorted(set(key_arr.tolist())):
        mask = key_arr == key
        wg, xg = w[mask], x[mask]
        m = len(wg)
        if m < 3:
            raise DegenerateGroupError(
                f"group {key!r} has {m} < 3 observations")
        if np.ptp(wg) == 0.0 or np.ptp(xg) == 0.0:
            raise DegenerateGroupError(
                f"group {key!r} has a constant variable")
        r, r_p = _corr_t_test(wg, xg, m)
        rho, rho_p = _corr_t_test(stats.rankdata(wg), stats.rankdata(xg), m)
        out.append(CorrelationReport(group=key, n=m, pearson_r=r,
                                     pearson_p=r_p, spearman_rho=rho,
                                     spearman_p=rho_p))
    return out


def _corr_t_test(a: np.ndarray, b: np.ndarray, m: int) -> tuple[float, float]:
    from scipy import stats

    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt((a @ a) * (b @ b))
    r = float(np.clip((a @ b) / denom, -1.0, 1.0))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * np.sqrt((m - 2) / (1.0 - r * r))
    p = float(2.0 * stats.t.sf(abs(t), df=m - 2))
    return r, min(p, 1.0)
