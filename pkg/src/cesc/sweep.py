"""Oracle-versus-monitor sweeps over chart families.

Two parts: every chart of :func:`~cesc.families.exhaustive_family` checked
by full enumeration at ``maxlen = n + 3``, and seeded random charts each run
over random and near-miss traces.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .chart import reduce_chart
from .families import RandomChartConfig, exhaustive_family, near_miss_trace, random_chart, random_trace
from .oracle import exhaustive_equiv, expected_verdicts
from .runtime import run
from .synth import synthesize


@dataclass
class SweepConfig:
    max_n: int = 4
    arrows_up_to: int = 3
    extra_len: int = 3  # exhaustive maxlen is n + extra_len
    random_charts: int = 200
    traces_per_chart: int = 1000
    seed: int = 1
    charts: RandomChartConfig = field(default_factory=RandomChartConfig)


@dataclass
class SweepResult:
    charts: int = 0
    traces: int = 0
    matches: int = 0
    mismatches: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.mismatches


def exhaustive_part(cfg: SweepConfig | None = None) -> SweepResult:
    cfg = cfg or SweepConfig()
    res = SweepResult()
    t0 = time.perf_counter()
    for spec in exhaustive_family(cfg.max_n, cfg.arrows_up_to):
        n = reduce_chart(spec.top).tick_count
        rep = exhaustive_equiv(spec.top, n + cfg.extra_len, spec.symbols, name=spec.top_name)
        res.charts += 1
        res.traces += rep.traces
        if not rep.ok:
            res.mismatches.append(f"{spec.top_name}: {rep.format().strip()}")
    res.seconds = time.perf_counter() - t0
    return res


def random_part(cfg: SweepConfig | None = None) -> SweepResult:
    cfg = cfg or SweepConfig()
    res = SweepResult()
    rng = random.Random(cfg.seed)
    t0 = time.perf_counter()
    for i in range(cfg.random_charts):
        spec = random_chart(rng, cfg.charts, name=f"r{i}")
        net = synthesize(spec)
        n = reduce_chart(spec.top).tick_count
        res.charts += 1
        for j in range(cfg.traces_per_chart):
            length = rng.randint(1, n + 8)
            if j % 2:
                t = random_trace(rng, spec.symbols, length, rng.random())
            else:
                t = near_miss_trace(rng, spec, length, rng.choice([0.0, 0.05, 0.15]))
            want, _ = expected_verdicts(spec.top, t, spec.top_name)
            got = sorted((v.global_tick, v.kind, v.chart, v.detail) for v in run(net, t).verdicts)
            res.traces += 1
            res.matches += len(want)
            if got != sorted(want):
                res.mismatches.append(f"{spec.top_name} trace {j}: oracle {sorted(want)} monitor {got}")
                break
    res.seconds = time.perf_counter() - t0
    return res
