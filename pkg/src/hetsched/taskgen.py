"""Random task-system generation.

Reproduces the experimental setup the analyzer is evaluated with: a platform
of two unit-speed and two double-speed processors, task periods uniform over
[10, 600] time units (milliseconds in the experiments), a small number of
heavy tasks with utilization in (1, 2], and light/medium/heavy utilization
buckets for the rest.  Tasks are added until the total utilization exceeds
the target, then the last task is trimmed so the total hits the target
exactly.

All draws are quantized onto a rational grid (denominator 10^6 by default)
before the exact trimming step, so generated systems are exact and
reproducible: generation is a pure function of (config, batch index).
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .model import Platform, SpeedClass, SporadicTask, TaskSystem, validate_task_system
from .rational import format_rational, parse_rational
from .rng import GENERATOR_NAME, SplitMix64, derive_stream_seed

__all__ = ["GenConfig", "GenerationError", "generate", "generation_metadata", "UTIL_CLASSES"]

F = Fraction

UTIL_CLASSES = {
    "light": (F(1, 1000), F(1, 20)),  # [0.001, 0.05]
    "medium": (F(1, 20), F(1, 5)),  # [0.05, 0.2]
    "heavy": (F(1, 5), F(1, 2)),  # [0.2, 0.5]
}

_RETRY_BUDGET = 16


class GenerationError(RuntimeError):
    """Generation failed repeatedly (degenerate configuration)."""


def _default_platform() -> Platform:
    return Platform((SpeedClass(F(1), 2), SpeedClass(F(2), 2)))


@dataclass(frozen=True)
class GenConfig:
    """Parameters for random task-system generation.

    util_class picks the bucket for the non-heavy tasks; heavy tasks (those
    with utilization above the slowest speed class) are drawn from
    heavy_util_range, their number uniform in {0..max_phi1_count}, clamped to
    the number of processors faster than the slowest class so the generated
    system always passes the feasibility gate.  period applies to every task
    ("uniform" over period_range, or "fixed" at period_fixed).
    """

    platform: Platform = field(default_factory=_default_platform)
    period_range: tuple[Fraction, Fraction] = (F(10), F(600))
    period_mode: str = "uniform"  # "uniform" | "fixed"
    period_fixed: Fraction | None = None
    util_class: str = "medium"
    heavy_util_range: tuple[Fraction, Fraction] = (F(1), F(2))  # (lo, hi]
    max_phi1_count: int = 2
    target_usum: Fraction | None = None  # defaults to the platform capacity
    quantization_denominator: int = 10**6
    seed: int = 0

    def __post_init__(self):
        if self.period_mode not in ("uniform", "fixed"):
            raise ValueError(f"unknown period mode {self.period_mode!r}")
        if self.period_mode == "fixed" and self.period_fixed is None:
            raise ValueError("period_mode='fixed' needs period_fixed")
        if self.util_class not in UTIL_CLASSES:
            raise ValueError(f"unknown utilization class {self.util_class!r}")
        lo, hi = self.period_range
        if not 0 < lo <= hi:
            raise ValueError(f"empty period range [{lo}, {hi}]")
        hlo, hhi = self.heavy_util_range
        if not 0 <= hlo < hhi:
            raise ValueError(f"empty heavy utilization range ({hlo}, {hhi}]")
        if hhi > self.platform.alpha_max:
            raise ValueError("heavy utilization range exceeds the fastest speed class")
        if self.quantization_denominator < 1:
            raise ValueError("quantization denominator must be >= 1")
        if self.max_phi1_count < 0:
            raise ValueError("max_phi1_count must be >= 0")
        if self.target is not None and self.target > self.platform.r_sum:
            raise ValueError(
                f"target utilization {self.target} exceeds capacity {self.platform.r_sum}"
            )

    @property
    def target(self) -> Fraction:
        return self.platform.r_sum if self.target_usum is None else self.target_usum

    @property
    def heavy_count_cap(self) -> int:
        """max_phi1_count clamped to the processors above the slowest class."""
        classes = self.platform.classes
        if len(classes) < 2:
            return 0
        fast = sum(c.count for c in classes[1:])
        return min(self.max_phi1_count, fast)


def _quantized_uniform(rng: SplitMix64, lo: Fraction, hi: Fraction, den: int,
                       lo_exclusive: bool = False) -> Fraction:
    """Uniform draw from the den-grid points of [lo, hi] (or (lo, hi])."""
    lo_n = lo.numerator * den // lo.denominator  # floor
    if lo_exclusive or F(lo_n, den) < lo:
        lo_n += 1
    hi_n = hi.numerator * den // hi.denominator  # floor
    if hi_n < lo_n:
        raise ValueError(f"range [{lo}, {hi}] holds no 1/{den} grid point")
    return F(rng.randint(lo_n, hi_n), den)


def generate(config: GenConfig, batch_index: int = 0) -> TaskSystem:
    """Generate one task system; pure in (config, batch_index).

    Heavy tasks first, then bucket tasks until the total utilization reaches
    the target; the last task is trimmed so the total equals the target
    exactly.  If trimming would leave a non-positive utilization the whole
    batch is redrawn from a fresh substream (bounded retries).
    """
    base = derive_stream_seed(config.seed, batch_index)
    for attempt in range(_RETRY_BUDGET):
        rng = SplitMix64(derive_stream_seed(base, attempt))
        sys_ = _generate_once(config, rng)
        if sys_ is not None:
            report = validate_task_system(sys_, config.platform)
            if not report.accepted:
                raise GenerationError(
                    "generated system failed the feasibility gate: "
                    + "; ".join(report.failures())
                )
            return sys_
    raise GenerationError(
        f"could not hit the target utilization in {_RETRY_BUDGET} attempts"
    )


def _generate_once(config: GenConfig, rng: SplitMix64) -> TaskSystem | None:
    den = config.quantization_denominator
    target = config.target

    def draw_period() -> Fraction:
        if config.period_mode == "fixed":
            return config.period_fixed
        lo, hi = config.period_range
        return _quantized_uniform(rng, lo, hi, den)

    utila: list[Fraction] = []
    periods: list[Fraction] = []

    cap = config.heavy_count_cap
    k = rng.randint(0, cap) if cap > 0 else 0
    hlo, hhi = config.heavy_util_range
    for _ in range(k):
        utila.append(_quantized_uniform(rng, hlo, hhi, den, lo_exclusive=True))
        periods.append(draw_period())

    lo, hi = UTIL_CLASSES[config.util_class]
    total = sum(utila, F(0))
    while total < target:
        u = _quantized_uniform(rng, lo, hi, den)
        utila.append(u)
        periods.append(draw_period())
        total += u

    if total > target:
        trimmed = utila[-1] - (total - target)
        if trimmed <= 0:
            return None
        utila[-1] = trimmed

    tasks = tuple(
        SporadicTask(i + 1, u * p, p) for i, (u, p) in enumerate(zip(utila, periods))
    )
    return TaskSystem(tasks)


def generation_metadata(config: GenConfig) -> dict:
    """Reproducibility header for emitted batches."""
    return {
        "generator": GENERATOR_NAME,
        "seed": config.seed,
        "platform": {
            "classes": [
                {"speed": format_rational(c.speed), "count": c.count}
                for c in config.platform.classes
            ]
        },
        "period_range": [format_rational(v) for v in config.period_range],
        "period_mode": config.period_mode,
        "period_fixed": (
            format_rational(config.period_fixed) if config.period_fixed is not None else None
        ),
        "util_class": config.util_class,
        "heavy_util_range": [format_rational(v) for v in config.heavy_util_range],
        "max_phi1_count": config.max_phi1_count,
        "target_usum": format_rational(config.target),
        "quantization_denominator": config.quantization_denominator,
    }


def config_from_options(
    platform: Platform | None = None,
    util_class: str = "medium",
    period_mode: str = "uniform",
    period_fixed=None,
    max_phi1_count: int = 2,
    target_usum=None,
    seed: int = 0,
) -> GenConfig:
    """Convenience constructor accepting unparsed rationals."""
    kwargs = dict(util_class=util_class, period_mode=period_mode, seed=seed,
                  max_phi1_count=max_phi1_count)
    if platform is not None:
        kwargs["platform"] = platform
    if period_fixed is not None:
        kwargs["period_fixed"] = parse_rational(period_fixed)
    if target_usum is not None:
        kwargs["target_usum"] = parse_rational(target_usum)
    return GenConfig(**kwargs)
