"""Throughput harness: ring creation, signing and verification per ring size.

Each (size, operation) cell runs a short warm-up and then three timed runs
that split the cell's duration; the median run's ops/sec is reported. Every
operation is timed individually and the calibrated cost of the timing
wrapper itself is subtracted.
"""

from __future__ import annotations

import csv
import gc
import io
import json
import os
import platform
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

from . import did as didmod
from .group import SeededEntropy, SystemEntropy, gen_keypair
from .ring import SCHEMES, SignerPosition, ring_new

MIN_SIZE, MAX_SIZE = 2, 64
RUNS_PER_CELL = 3
CSV_HEADER = ["ring_size", "creation_ops", "signing_ops", "verification_ops"]
OPERATIONS = ("creation", "signing", "verification")


@dataclass
class CellResult:
    ops_per_sec: float
    count: int
    mean_latency: float
    stdev_latency: float


@dataclass
class BenchRow:
    ring_size: int
    cells: dict[str, CellResult]

    def ops(self, op: str) -> float:
        return self.cells[op].ops_per_sec


@dataclass
class BenchReport:
    scheme: str
    duration_per_cell: Optional[float]
    iterations: Optional[int]
    rows: list[BenchRow]
    environment: dict = field(default_factory=dict)

    @property
    def sizes(self) -> list[int]:
        return [r.ring_size for r in self.rows]

    def has(self, op: str) -> bool:
        return all(op in r.cells for r in self.rows)

    def to_csv(self) -> str:
        header = list(CSV_HEADER)
        extra = self.has("identifier")
        if extra:
            header.append("identifier_ops")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in self.rows:
            values = [row.ring_size] + [f"{row.ops(op):.1f}" for op in OPERATIONS]
            if extra:
                values.append(f"{row.ops('identifier'):.1f}")
            writer.writerow(values)
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "durationPerCell": self.duration_per_cell,
            "iterations": self.iterations,
            "environment": self.environment,
            "rows": [
                {"ringSize": r.ring_size, **{op: asdict(c) for op, c in r.cells.items()}}
                for r in self.rows
            ],
            "trend": trend_summary(self),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"{'size':>4}  {'creation/s':>12}  {'signing/s':>10}  {'verify/s':>10}"]
        for r in self.rows:
            lines.append(
                f"{r.ring_size:>4}  {r.ops('creation'):>12.0f}  "
                f"{r.ops('signing'):>10.0f}  {r.ops('verification'):>10.0f}"
            )
        return "\n".join(lines)


def environment_info() -> dict:
    return {
        "python": platform.python_version(),
        "implementation": platform.python_implementation(),
        "machine": platform.machine(),
        "processor": platform.processor(),
        "system": platform.system(),
        "cpus": os.cpu_count(),
        "timer_resolution": time.get_clock_info("perf_counter").resolution,
    }


def check_timer(max_resolution: float = 1e-6) -> float:
    resolution = time.get_clock_info("perf_counter").resolution
    if resolution > max_resolution:
        raise RuntimeError(f"perf_counter resolution {resolution}s is coarser than {max_resolution}s")
    return resolution


def calibrate_overhead(samples: int = 20000) -> float:
    """Median cost of timing an empty call, in seconds."""
    clock = time.perf_counter
    noop = lambda: None  # noqa: E731
    costs = []
    for _ in range(samples):
        t0 = clock()
        noop()
        costs.append(clock() - t0)
    return statistics.median(costs)


def _run(op: Callable[[], object], budget: Optional[float], iterations: Optional[int]) -> list[float]:
    clock = time.perf_counter
    latencies = []
    elapsed = 0.0
    while True:
        if iterations is not None:
            if len(latencies) >= iterations:
                break
        elif elapsed >= budget:
            break
        t0 = clock()
        op()
        dt = clock() - t0
        latencies.append(dt)
        elapsed += dt
    return latencies


def measure(
    op: Callable[[], object],
    duration: Optional[float] = None,
    iterations: Optional[int] = None,
    overhead: float = 0.0,
    runs: int = RUNS_PER_CELL,
) -> CellResult:
    """Time ``op`` for ``duration`` seconds (or ``iterations`` calls per run)."""
    for _ in range(3):
        op()
    budget = None if duration is None else duration / runs
    rates, samples = [], []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(runs):
            lat = [max(t - overhead, 1e-9) for t in _run(op, budget, iterations)]
            rates.append(len(lat) / sum(lat))
            samples.extend(lat)
    finally:
        if gc_was_enabled:
            gc.enable()
    return CellResult(
        ops_per_sec=statistics.median(rates),
        count=len(samples),
        mean_latency=statistics.fmean(samples),
        stdev_latency=statistics.pstdev(samples),
    )


def run_bench(
    sizes: Sequence[int] = range(2, 11),
    duration: Optional[float] = 3.0,
    scheme: str = "borromean",
    seed: Optional[int] = None,
    iterations: Optional[int] = None,
    with_identifier: bool = False,
    progress: Optional[Callable[[str], None]] = None,
) -> BenchReport:
    """Benchmark ring creation, signing and verification for each ring size.

    With ``iterations`` set, every run executes exactly that many calls
    instead of filling ``duration``; combined with ``seed`` this makes the
    work performed (and every signature produced) reproducible.
    """
    sizes = list(sizes)
    if not sizes:
        raise ValueError("no ring sizes given")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("ring sizes must be strictly ascending")
    if sizes[0] < MIN_SIZE or sizes[-1] > MAX_SIZE:
        raise ValueError(f"ring sizes must lie in [{MIN_SIZE}, {MAX_SIZE}]")
    if iterations is None:
        if duration is None or duration < 1.0:
            raise ValueError("each cell needs a duration of at least 1 second")
    elif iterations < 1:
        raise ValueError("iterations must be positive")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")

    check_timer()
    impl = SCHEMES[scheme]
    overhead = calibrate_overhead()
    entropy = SeededEntropy(seed) if seed is not None else SystemEntropy()
    cell_time = None if iterations is not None else duration

    rows = []
    for n in sizes:
        keypairs = [gen_keypair(entropy) for _ in range(n)]
        encodings = [kp.pk.encode() for kp in keypairs]
        ring = ring_new(encodings)
        signer_kp = keypairs[0]
        signer = SignerPosition(ring.position_of(signer_kp.pk), signer_kp.sk)
        message = entropy.read(32)
        sig = impl.sign(signer, message, ring, entropy)
        if not impl.verify(ring, message, sig):
            raise RuntimeError(f"self-check failed for ring size {n}")

        ops = {
            "creation": lambda: ring_new(encodings),
            "signing": lambda: impl.sign(signer, message, ring, entropy),
            "verification": lambda: impl.verify(ring, message, sig),
        }
        if with_identifier:
            r = entropy.read(didmod.IDENTIFIER_RANDOMNESS_BYTES)
            ops["identifier"] = lambda: didmod.generate_ring_identifier(signer_kp.pk, r, ring)

        cells = {}
        for name, op in ops.items():
            cells[name] = measure(op, cell_time, iterations, overhead)
            if progress:
                progress(f"n={n} {name}: {cells[name].ops_per_sec:.0f} ops/s")
        rows.append(BenchRow(n, cells))

    env = environment_info()
    env["timing_overhead"] = overhead
    return BenchReport(scheme, cell_time, iterations, rows, env)


# ---------------------------------------------------------------------------
# Trend analysis
# ---------------------------------------------------------------------------

def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares ``y = slope * x + intercept``; returns (slope, intercept, R^2)."""
    slope, intercept = statistics.linear_regression(xs, ys)
    r = statistics.correlation(xs, ys)
    return slope, intercept, r * r


def is_non_increasing(values: Sequence[float]) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def trend_summary(report: BenchReport) -> dict:
    sizes = report.sizes
    out = {
        "signing_non_increasing": is_non_increasing([r.ops("signing") for r in report.rows]),
        "verification_non_increasing": is_non_increasing(
            [r.ops("verification") for r in report.rows]
        ),
    }
    if len(sizes) >= 2:
        latencies = [r.cells["verification"].mean_latency for r in report.rows]
        slope, intercept, r2 = linear_fit(sizes, latencies)
        out.update(
            verification_latency_slope=slope,
            verification_latency_intercept=intercept,
            verification_latency_r2=r2,
            verification_latency_ratio=latencies[-1] / latencies[0],
        )
    return out
