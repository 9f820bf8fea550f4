"""Monte Carlo pipeline: random matrices, CR binning, and violation tallies.

One simulation iteration generates a random matrix, bins it by consistency
ratio, audits eigenvector monotonicity over all upper-triangle perturbations,
and increments the bin's violating count at most once however many triples
failed. A running minimum-CR violating example is kept with its witnessing
(i, j, k). Work is chunked on fixed generator-substream boundaries and chunk
results merge associatively, so a run's output is a pure function of
(seed, iterations) regardless of worker count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import bulk
from .consistency import default_random_index_table
from .errors import ConfigurationError, ValidationError
from .generate import SUBSTREAM_CHUNK, GeneratorConfig, generate_batch, matrices_from_upper
from .monotonic import VIOLATION_MARGIN

# CR values this close to a bin boundary are assigned to the lower bin and
# counted as boundary-tie incidents.
BIN_TIE_TOL = 1e-12


@dataclass
class MinCrExample:
    """Lowest-CR matrix seen with a non-monotonic eigenvector."""

    upper_entries: tuple[float, ...]
    cr: float
    i: int
    j: int
    k: int

    def sort_key(self):
        return (self.cr, self.upper_entries)

    def to_dict(self) -> dict:
        return {"upper_entries": list(self.upper_entries), "cr": self.cr,
                "i": self.i, "j": self.j, "k": self.k}

    @classmethod
    def from_dict(cls, doc: dict) -> "MinCrExample":
        return cls(tuple(doc["upper_entries"]), doc["cr"], doc["i"], doc["j"], doc["k"])


@dataclass
class CrHistogram:
    """Counts of total and violating matrices per consistency-ratio bin.

    Bin m (0-based) covers ``beta * m <= CR < beta * (m + 1)``. When ``cap``
    is set (a positive multiple of beta), everything at or above it lands in
    a single overflow bucket. ``bins`` maps m to ``[total, violating]``.
    """

    beta: float
    cap: float | None = None
    bins: dict[int, list[int]] = field(default_factory=dict)
    overflow: list[int] = field(default_factory=lambda: [0, 0])
    boundary_ties: int = 0
    failures: int = 0
    samples: int = 0
    min_cr_example: MinCrExample | None = None

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValidationError(f"bin width must be positive, got {self.beta}")
        if self.cap is not None:
            bins = self.cap / self.beta
            if self.cap <= 0 or abs(bins - round(bins)) > 1e-9:
                raise ValidationError(
                    f"cap must be a positive multiple of the bin width, got {self.cap}")

    @property
    def cap_bins(self) -> int | None:
        return None if self.cap is None else int(round(self.cap / self.beta))

    def assign_bins(self, cr: np.ndarray) -> tuple[np.ndarray, int]:
        """Vectorized bin indices with the tie-to-lower-bin rule applied."""
        scaled = cr / self.beta
        m = np.floor(scaled).astype(np.int64)
        nearest = np.rint(scaled).astype(np.int64)
        tie = (np.abs(cr - nearest * self.beta) <= BIN_TIE_TOL) & (nearest >= 1)
        m = np.where(tie, nearest - 1, m)
        return m, int(np.count_nonzero(tie))

    def record_array(self, cr: np.ndarray, checked: np.ndarray, violated: np.ndarray) -> None:
        """Tally a batch: every matrix counts once; violations only where checked."""
        m, ties = self.assign_bins(cr)
        self.boundary_ties += ties
        self.samples += cr.size
        cap_bins = self.cap_bins
        if cap_bins is not None:
            over = m >= cap_bins
            self.overflow[0] += int(np.count_nonzero(over))
            self.overflow[1] += int(np.count_nonzero(over & checked & violated))
            keep = ~over
        else:
            keep = np.ones(cr.size, dtype=bool)
        for idx, count in zip(*np.unique(m[keep], return_counts=True)):
            self.bins.setdefault(int(idx), [0, 0])[0] += int(count)
        hit = keep & checked & violated
        for idx, count in zip(*np.unique(m[hit], return_counts=True)):
            self.bins[int(idx)][1] += int(count)

    def record_failures(self, count: int) -> None:
        self.failures += count
        self.samples += count

    def offer_min_example(self, candidate: MinCrExample | None) -> None:
        if candidate is None:
            return
        if self.min_cr_example is None or candidate.sort_key() < self.min_cr_example.sort_key():
            self.min_cr_example = candidate

    def merge(self, other: "CrHistogram") -> None:
        """Fold another histogram with identical geometry into this one."""
        if other.beta != self.beta or other.cap != self.cap:
            raise ValidationError("cannot merge histograms with different bins")
        for idx, (total, violating) in other.bins.items():
            slot = self.bins.setdefault(idx, [0, 0])
            slot[0] += total
            slot[1] += violating
        self.overflow[0] += other.overflow[0]
        self.overflow[1] += other.overflow[1]
        self.boundary_ties += other.boundary_ties
        self.failures += other.failures
        self.samples += other.samples
        self.offer_min_example(other.min_cr_example)

    @property
    def total(self) -> int:
        return sum(t for t, _ in self.bins.values()) + self.overflow[0]

    @property
    def total_violating(self) -> int:
        return sum(v for _, v in self.bins.values()) + self.overflow[1]

    def bin_counts(self, lo: float) -> tuple[int, int]:
        """(total, violating) of the bin whose lower edge is ``lo``."""
        return tuple(self.bins.get(int(round(lo / self.beta)), [0, 0]))

    def rows(self) -> list[tuple[float, float | None, int, int]]:
        """(bin_lo, bin_hi, total, violating) rows, contiguous from zero.

        The overflow bucket, when present, is the final row with ``bin_hi``
        None. Fine bins run through the cap, or through the last occupied bin.
        """
        if self.cap_bins is not None:
            top = self.cap_bins
        else:
            top = max(self.bins, default=-1) + 1
        out = []
        for m in range(top):
            total, violating = self.bins.get(m, (0, 0))
            out.append((m * self.beta, (m + 1) * self.beta, total, violating))
        if self.cap_bins is not None:
            out.append((self.cap, None, self.overflow[0], self.overflow[1]))
        return out

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "cap": self.cap,
            "bins": [{"m": m + 1, "total": t, "violating": v}
                     for m, (t, v) in sorted(self.bins.items())],
            "overflow": {"total": self.overflow[0], "violating": self.overflow[1]},
            "boundary_ties": self.boundary_ties,
            "failures": self.failures,
            "samples": self.samples,
            "min_cr_example": None if self.min_cr_example is None
            else self.min_cr_example.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "CrHistogram":
        hist = cls(beta=doc["beta"], cap=doc.get("cap"))
        hist.bins = {entry["m"] - 1: [entry["total"], entry["violating"]]
                     for entry in doc["bins"]}
        hist.overflow = [doc["overflow"]["total"], doc["overflow"]["violating"]]
        hist.boundary_ties = doc["boundary_ties"]
        hist.failures = doc["failures"]
        hist.samples = doc["samples"]
        if doc.get("min_cr_example"):
            hist.min_cr_example = MinCrExample.from_dict(doc["min_cr_example"])
        return hist


def histogram_csv_lines(hist: CrHistogram) -> list[str]:
    """CSV rows for a histogram: header plus one line per bin, LF-terminated
    by the writer. Proportions carry 6 decimals; empty when the bin is empty."""
    lines = ["bin_lo,bin_hi,total,violating,proportion"]
    for lo, hi, total, violating in hist.rows():
        hi_txt = "inf" if hi is None else format(hi, "g")
        prop = format(violating / total, ".6f") if total else ""
        lines.append(f"{format(lo, 'g')},{hi_txt},{total},{violating},{prop}")
    return lines


def _first_violation_indices(
    mat: np.ndarray, factor: float, margin: float
) -> tuple[int, int, int]:
    """(i, j, k) of the first ratio drop, 1-based, using the bulk arithmetic."""
    n = mat.shape[0]
    _, w0, _, _ = bulk.perron_batch(mat[None, :, :])
    thresh = 1.0 - margin
    for i in range(n - 1):
        for j in range(i + 1, n):
            pert = mat[None, :, :].copy()
            pert[:, i, j] *= factor
            pert[:, j, i] /= factor
            _, w1, _, _ = bulk.perron_batch(pert)
            r0 = w0[0, i] / w0[0]
            r1 = w1[0, i] / w1[0]
            worse = r1 < r0 * thresh
            worse[i] = False
            if np.any(worse):
                k = int(np.argmax(worse))
                return i + 1, j + 1, k + 1
    raise ValidationError("matrix shows no violation at this factor and margin")


def simulate_chunk(
    config: GeneratorConfig,
    start: int,
    count: int,
    beta: float,
    factor: float,
    cr_cap: float | None,
    margin: float,
    ri: float,
) -> CrHistogram:
    """Steps of the pipeline for ordinals [start, start + count)."""
    hist = CrHistogram(beta=beta, cap=cr_cap)
    mats = generate_batch(config, start, count)
    lam, w0, _, ok = bulk.perron_batch(mats)
    ci = (lam - config.n) / (config.n - 1)
    ok &= ci >= -1e-9
    ci = np.maximum(ci, 0.0)
    cr = ci / ri

    checked = ok.copy()
    if cr_cap is not None:
        # gate on the assigned bin, not the raw value, so a CR tied onto the
        # cap boundary (which bins low) still gets audited
        bins, _ = hist.assign_bins(cr)
        checked &= bins < hist.cap_bins
    violated = np.zeros(count, dtype=bool)
    idx = np.flatnonzero(checked)
    if idx.size:
        flags, ok_mono = bulk.violation_flags(mats[idx], w0[idx], factor, margin)
        violated[idx] = flags
        ok[idx[~ok_mono]] = False
        checked[idx[~ok_mono]] = False

    hist.record_failures(int(np.count_nonzero(~ok)))
    hist.record_array(cr[ok], checked[ok], violated[ok])

    hit = np.flatnonzero(violated & ok)
    if hit.size:
        hist.offer_min_example(_min_example(mats[hit], cr[hit], factor, margin))
    return hist


def _min_example(
    mats: np.ndarray, cr: np.ndarray, factor: float, margin: float
) -> MinCrExample:
    """Pick the lowest-CR violating matrix (ties broken by upper triangle)."""
    n = mats.shape[1]
    iu, ju = np.triu_indices(n, 1)
    upper = mats[:, iu, ju]
    keys = tuple(upper[:, c] for c in range(upper.shape[1] - 1, -1, -1)) + (cr,)
    best = int(np.lexsort(keys)[0])
    i, j, k = _first_violation_indices(mats[best], factor, margin)
    return MinCrExample(tuple(float(v) for v in upper[best]), float(cr[best]), i, j, k)


def _simulate_task(args) -> CrHistogram:
    return simulate_chunk(*args)


def run_simulation(
    config: GeneratorConfig,
    iterations: int,
    beta: float,
    factor: float,
    cr_cap: float | None = None,
    margin: float = VIOLATION_MARGIN,
    workers: int = 1,
) -> CrHistogram:
    """Full pipeline over ``iterations`` random matrices.

    ``cr_cap`` skips the monotonicity audit for matrices binned at or above
    it (they still count toward totals, in the overflow bucket; a CR within
    the boundary-tie tolerance of the cap bins low and is audited). Results
    are identical for any ``workers`` value.
    """
    if iterations < 1:
        raise ValidationError(f"need at least one iteration, got {iterations}")
    if factor <= 1.0:
        raise ValidationError(f"audit factor must exceed 1, got {factor}")
    ri = default_random_index_table(config.scale).lookup(config.n)
    tasks = [(config, start, min(SUBSTREAM_CHUNK, iterations - start),
              beta, factor, cr_cap, margin, ri)
             for start in range(0, iterations, SUBSTREAM_CHUNK)]
    result = CrHistogram(beta=beta, cap=cr_cap)
    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_simulate_task, tasks, chunksize=1):
                result.merge(part)
    else:
        for task in tasks:
            result.merge(_simulate_task(task))
    return result
