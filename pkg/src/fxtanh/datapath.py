"""Bit-accurate tanh pipelines.

Two datapath variants are modelled:

* ``OPTIMIZED`` - grouped velocity-factor LUTs feed a balanced multiplier
  tree producing ``f`` in (0, 1]; the final stage computes
  ``(1 - f)/(1 + f)`` with a Newton-Raphson reciprocal.  Because ``f`` is
  fractional-only, forming ``1 + f`` is bit concatenation and a single
  right shift normalizes the denominator into [0.5, 1).
* ``PUBLISHED`` - per-bit registers hold the inverted-convention factors
  (values >= 1) for weights at or above a threshold; tanh of the high part
  is ``(f - 1)/(f + 1)`` and the low-weight residual ``r`` is folded in
  through the small-angle correction ``t + r*(1 - t^2)``.

Both variants share the sign-split / compute / sign-restore flow, clamp the
magnitude at the point where tanh saturates the output format, and are exact
for zero input and odd-symmetric by construction.

Everything is a pure function over immutable configs; sweeps may call these
from any number of workers.  The arithmetic itself runs on raw integer codes
through a per-config plan so that exhaustive sweeps and single-input traces
exercise the identical code path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

from .fxnum import Fx, QFormat, RoundMode, _rescale, quantize
from .lutgen import GroupingScheme, VelocityLut, build_luts, shuffle_map, velocity_factor_original


class Subtractor(enum.Enum):
    """How the final stage computes 1 - f."""

    ONES = "ones"    # bitwise complement; exactly one ulp below the true difference
    TWOS = "twos"    # exact two's-complement subtraction


class Variant(enum.Enum):
    OPTIMIZED = "optimized"
    PUBLISHED = "published"


@dataclass(frozen=True)
class NrSeed:
    """Linear initial guess ``x0 = c0 - c1*d`` for the reciprocal of d.

    The seed must keep x0 inside (1, 2] for every d in [0.5, 1) - the range
    of the true reciprocal - so the iterate registers never need a second
    integer bit.  The default (2.5, 1.5) is exact in any binary fixed-point
    format and needs no multiplier (1.5*d is a shift-and-add).
    """

    c0: float = 2.5
    c1: float = 1.5

    def __post_init__(self) -> None:
        if self.c1 <= 0:
            raise ValueError("seed slope must be positive")
        if self.c0 - self.c1 < 1.0:
            raise ValueError("seed leaves (1, 2]: x0 at d->1 falls to or below 1")
        if self.c0 - self.c1 / 2 > 2.0:
            raise ValueError("seed leaves (1, 2]: x0 at d=0.5 exceeds 2")


DEFAULT_NR_SEED = NrSeed()


@dataclass(frozen=True)
class TanhConfig:
    """Complete pipeline configuration.

    ``mult_fmt.frac_bits`` is the number of fractional bits every internal
    multiplier retains.  ``internal_round`` governs the velocity-product
    tree (and other feed-forward multiplies); the Newton-Raphson loop always
    truncates, as iterative hardware on the critical path would.  The final
    rescale to ``output_fmt`` uses ``output_round``.
    """

    input_fmt: QFormat
    output_fmt: QFormat
    lut_fmt: QFormat
    mult_fmt: QFormat
    grouping: GroupingScheme = GroupingScheme(4, True)
    nr_stages: int = 3
    subtractor: Subtractor = Subtractor.TWOS
    variant: Variant = Variant.OPTIMIZED
    published_threshold: float = 2.0 ** -7
    internal_round: RoundMode = RoundMode.NEAREST_EVEN
    output_round: RoundMode = RoundMode.NEAREST_EVEN
    nr_seed: NrSeed = DEFAULT_NR_SEED

    def __post_init__(self) -> None:
        if not self.input_fmt.signed:
            raise ValueError(f"input format must be signed, got {self.input_fmt}")
        if not self.output_fmt.signed or not self.output_fmt.fractional_only:
            raise ValueError(f"output format must be signed fractional-only, got {self.output_fmt}")
        for name, fmt in (("lut", self.lut_fmt), ("mult", self.mult_fmt)):
            if fmt.signed or not fmt.fractional_only:
                raise ValueError(f"{name} format must be unsigned fractional-only, got {fmt}")
        if self.nr_stages < 0:
            raise ValueError("stage count cannot be negative")
        if self.published_threshold <= 0:
            raise ValueError("threshold must be positive")

    def describe(self) -> str:
        """One-line summary used in reports."""
        shuf = "on" if self.grouping.shuffle else "off"
        rounds = {RoundMode.TRUNCATE: "trunc", RoundMode.NEAREST_EVEN: "ne"}
        return (
            f"in={self.input_fmt} out={self.output_fmt} lut={self.lut_fmt} "
            f"mult={self.mult_fmt} group={self.grouping.group_width} shuffle={shuf} "
            f"nr={self.nr_stages} sub={self.subtractor.value} "
            f"round={rounds[self.internal_round]}/{rounds[self.output_round]} "
            f"variant={self.variant.value}"
        )


def reference_config(**overrides) -> TanhConfig:
    """The 16-bit baseline: s3.12 in, s.15 out, 18-bit LUTs, 16-bit multipliers."""
    cfg = TanhConfig(
        input_fmt=QFormat(True, 3, 12),
        output_fmt=QFormat(True, 0, 15),
        lut_fmt=QFormat(False, 0, 18),
        mult_fmt=QFormat(False, 0, 16),
    )
    return replace(cfg, **overrides) if overrides else cfg


@dataclass
class TanhTrace:
    """Intermediate values of one pipeline evaluation, for inspection.

    Filled by the same code path the sweeps run; fields not touched by the
    active variant stay at their defaults.
    """

    input: Fx | None = None
    negative: bool = False
    magnitude: Fx | None = None
    saturated: bool = False
    lut_addresses: list[int] = field(default_factory=list)
    lut_entries: list[Fx | None] = field(default_factory=list)
    factor: Fx | None = None
    numerator: Fx | None = None
    denominator: Fx | None = None
    nr_iterates: list[Fx] = field(default_factory=list)
    pre_correction: Fx | None = None
    residual: Fx | None = None
    output: Fx | None = None


@dataclass(frozen=True)
class PublishedRegisters:
    """Per-bit inverted-convention factor registers for the published variant.

    Entries share one unsigned format whose total width equals the LUT entry
    width; the integer bits needed by the largest factor are carved out of
    that budget, which is precisely the scaling cost the fractional-only
    redefinition removes.
    """

    bit_indices: tuple[int, ...]
    fmt: QFormat
    entries: tuple[Fx, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != len(self.bit_indices):
            raise ValueError("one entry per covered bit required")


@lru_cache(maxsize=None)
def _published_registers(input_fmt: QFormat, lut_fmt: QFormat, threshold: float) -> PublishedRegisters:
    frac_in = input_fmt.frac_bits
    bits = tuple(
        i for i in range(input_fmt.int_bits + frac_in)
        if 2.0 ** (i - frac_in) >= threshold
    )
    if not bits:
        raise ValueError("threshold leaves no register bits")
    max_factor = velocity_factor_original(2.0 ** (bits[-1] - frac_in))
    int_bits = max(1, math.floor(max_factor).bit_length())
    frac_bits = lut_fmt.width - int_bits
    if frac_bits < 1:
        raise ValueError(
            f"{lut_fmt.width}-bit entries cannot hold factors up to {max_factor:.1f}: "
            f"{int_bits} integer bits leave no fraction"
        )
    fmt = QFormat(False, int_bits, frac_bits)
    entries = tuple(
        quantize(velocity_factor_original(2.0 ** (i - frac_in)), fmt, RoundMode.NEAREST_EVEN)
        for i in bits
    )
    return PublishedRegisters(bits, fmt, entries)


def build_published_registers(cfg: TanhConfig) -> PublishedRegisters:
    """Registers for every magnitude bit whose weight reaches the threshold."""
    return _published_registers(cfg.input_fmt, cfg.lut_fmt, cfg.published_threshold)


@lru_cache(maxsize=None)
def build_luts_for(cfg: TanhConfig) -> tuple[VelocityLut, ...]:
    """The grouped LUTs matching a configuration (cached)."""
    return tuple(build_luts(cfg.input_fmt, cfg.grouping, cfg.lut_fmt))


class _Plan:
    """Raw-integer view of one (config, luts) pair, built once per pair."""

    __slots__ = (
        "cfg", "luts", "mag_fmt", "mag_max", "sat_code", "out_max", "out_frac",
        "mf", "mf_mask", "tree_ne", "out_ne", "stages", "sub_ones",
        "groups", "tables", "lut_frac", "c0_code", "c1_code", "x_max",
        "reg_bits", "reg_codes", "reg_frac", "low_mask", "wide_max", "in_frac",
    )

    def __init__(self, cfg: TanhConfig, luts: tuple[VelocityLut, ...] | list[VelocityLut] | None):
        self.cfg = cfg
        self.luts = luts
        self.mag_fmt = cfg.input_fmt.magnitude_format()
        self.mag_max = self.mag_fmt.code_max
        self.out_frac = cfg.output_fmt.frac_bits
        self.out_max = cfg.output_fmt.code_max
        self.in_frac = cfg.input_fmt.frac_bits
        threshold = math.atanh(1.0 - 2.0 ** -self.out_frac)
        if threshold <= self.mag_fmt.max_value:
            self.sat_code = max(1, math.floor(threshold * (1 << self.in_frac)))
        else:
            self.sat_code = None
        mf = cfg.mult_fmt.frac_bits
        self.mf = mf
        self.mf_mask = (1 << mf) - 1
        self.tree_ne = cfg.internal_round is RoundMode.NEAREST_EVEN
        self.out_ne = cfg.output_round is RoundMode.NEAREST_EVEN
        self.stages = cfg.nr_stages
        self.sub_ones = cfg.subtractor is Subtractor.ONES
        seed = cfg.nr_seed
        self.c0_code = quantize(seed.c0, QFormat(False, 2, mf), RoundMode.NEAREST_EVEN).code
        self.c1_code = quantize(seed.c1, QFormat(False, 2, mf), RoundMode.NEAREST_EVEN).code
        self.x_max = (1 << (mf + 1)) - 1
        if cfg.variant is Variant.OPTIMIZED:
            if luts is None:
                raise ValueError("optimized variant needs the velocity LUTs")
            expected = shuffle_map(
                self.mag_fmt.int_bits + self.in_frac,
                cfg.grouping.group_width,
                cfg.grouping.shuffle,
            )
            if len(luts) != len(expected):
                raise ValueError("LUT count does not match the grouping scheme")
            for lut, group in zip(luts, expected):
                if tuple(lut.bit_indices) != tuple(group):
                    raise ValueError(f"LUT bit indices {lut.bit_indices} do not match group {group}")
                if lut.entry_fmt != cfg.lut_fmt:
                    raise ValueError(f"LUT entry format {lut.entry_fmt} does not match {cfg.lut_fmt}")
            self.groups = tuple(tuple(g) for g in expected)
            self.tables = tuple(tuple(e.code for e in lut.entries) for lut in luts)
            self.lut_frac = cfg.lut_fmt.frac_bits
        else:
            regs = build_published_registers(cfg)
            self.reg_bits = regs.bit_indices
            self.reg_codes = tuple(e.code for e in regs.entries)
            self.reg_frac = regs.fmt.frac_bits
            self.low_mask = sum(
                1 << i for i in range(self.mag_fmt.int_bits + self.in_frac)
                if i not in regs.bit_indices
            )
            # wide accumulator: the clamped product tops out near 2**(b+1)
            self.wide_max = (1 << (self.out_frac + 2 + mf)) - 1


_plan_cache: tuple | None = None


def _prepare(cfg: TanhConfig, luts) -> _Plan:
    """Plan lookup with a single-slot identity cache (hot in sweeps)."""
    global _plan_cache
    cached = _plan_cache
    if cached is not None and cached[0] is cfg and cached[1] is luts:
        return cached[2]
    plan = _Plan(cfg, luts)
    _plan_cache = (cfg, luts, plan)
    return plan


def _velocity_product_code(mag_code: int, plan: _Plan, trace: TanhTrace | None) -> int | None:
    """Product of the addressed LUT entries; None stands for the exact 1.0."""
    vals: list[tuple[int, int] | None] = []
    for group, table in zip(plan.groups, plan.tables):
        addr = 0
        for i, b in enumerate(group):
            addr |= ((mag_code >> b) & 1) << i
        vals.append(None if addr == 0 else (table[addr], plan.lut_frac))
        if trace is not None:
            trace.lut_addresses.append(addr)
            trace.lut_entries.append(
                None if addr == 0 else Fx(table[addr], plan.cfg.lut_fmt)
            )
    mf, ne = plan.mf, plan.tree_ne
    while len(vals) > 1:
        nxt: list[tuple[int, int] | None] = []
        for j in range(0, len(vals) - 1, 2):
            a, b2 = vals[j], vals[j + 1]
            if a is None:
                nxt.append(b2)
            elif b2 is None:
                nxt.append(a)
            else:
                ca, fa = a
                cb, fb = b2
                nxt.append((min(_rescale(ca * cb, fa + fb - mf, ne), plan.mf_mask), mf))
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    if vals[0] is None:
        return None
    code, frac = vals[0]
    if frac != mf:
        code = min(_rescale(code, frac - mf, ne), plan.mf_mask)
    return code


def _nr_code(d_code: int, d_frac: int, stages: int, plan: _Plan, trace: TanhTrace | None) -> int:
    """Newton-Raphson reciprocal of d in [0.5, 1); iterates held in 1.mf bits.

    Every multiply in the loop truncates to mf fractional bits - the loop is
    the critical path, so low product bits are dropped rather than rounded.
    """
    mf = plan.mf
    x = min(plan.c0_code - _rescale(plan.c1_code * d_code, d_frac, False), plan.x_max)
    two = 2 << mf
    x_fmt = QFormat(False, 1, mf) if trace is not None else None
    if trace is not None:
        trace.nr_iterates.append(Fx(x, x_fmt))
    for _ in range(stages):
        p = _rescale(d_code * x, d_frac, False)
        x = min(_rescale(x * (two - p), mf, False), plan.x_max)
        if trace is not None:
            trace.nr_iterates.append(Fx(x, x_fmt))
    return x


def _final_code(f_code: int | None, plan: _Plan, trace: TanhTrace | None) -> int:
    """Output magnitude code from the velocity product (None = exact 1.0)."""
    if f_code is None:
        return 0
    mf = plan.mf
    one = 1 << mf
    if plan.sub_ones:
        n = f_code ^ plan.mf_mask
    else:
        n = min(one - f_code, plan.mf_mask)
    if trace is not None:
        trace.numerator = Fx(n, plan.cfg.mult_fmt)
        trace.denominator = Fx(one + f_code, QFormat(False, 0, mf + 1))
    if plan.stages == 0:
        # reference row: real-valued division, one rounding at the output
        t = (one - f_code) / (one + f_code)
        scaled = t * (1 << plan.out_frac)
        code = round(scaled) if plan.out_ne else math.floor(scaled)
        return min(code, plan.out_max)
    d_code = one + f_code                       # (1 + f)/2 exactly, frac mf+1
    x = _nr_code(d_code, mf + 1, plan.stages, plan, trace)
    # n * x * 2^-1, single rounding into the output format
    code = _rescale(n * x, 2 * mf + 1 - plan.out_frac, plan.out_ne)
    return min(code, plan.out_max)


def _published_code(mag_code: int, plan: _Plan, trace: TanhTrace | None) -> int:
    """Published-variant magnitude path: wide factor product plus correction."""
    mf = plan.mf
    one_reg = 1 << plan.reg_frac
    ne = plan.tree_ne
    vals = [
        (plan.reg_codes[i], plan.reg_frac) if (mag_code >> b) & 1 else (one_reg, plan.reg_frac)
        for i, b in enumerate(plan.reg_bits)
    ]
    if trace is not None:
        fmt = build_published_registers(plan.cfg).fmt
        for (code, _), b in zip(vals, plan.reg_bits):
            trace.lut_addresses.append((mag_code >> b) & 1)
            trace.lut_entries.append(Fx(code, fmt))
    while len(vals) > 1:
        nxt = []
        for j in range(0, len(vals) - 1, 2):
            (ca, fa), (cb, fb) = vals[j], vals[j + 1]
            nxt.append((min(_rescale(ca * cb, fa + fb - mf, ne), plan.wide_max), mf))
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    f_code, frac = vals[0]
    if frac != mf:
        f_code = min(_rescale(f_code, frac - mf, ne), plan.wide_max)
    if trace is not None:
        trace.factor = Fx(f_code, QFormat(False, plan.cfg.output_fmt.frac_bits + 2, mf))
    one = 1 << mf
    n = f_code - one
    if n <= 0:
        t_code = 0
    elif plan.stages == 0:
        t_code = min(math.floor(n / (f_code + one) * one), plan.mf_mask)
    else:
        d_code = f_code + one
        shift = d_code.bit_length() - mf        # normalize into [0.5, 1)
        x = _nr_code(d_code, mf + shift, plan.stages, plan, trace)
        t_code = min(_rescale(n * x, mf + shift, False), plan.mf_mask)
    if trace is not None:
        trace.pre_correction = Fx(t_code, plan.cfg.mult_fmt)
    r_code = mag_code & plan.low_mask
    if trace is not None:
        trace.residual = Fx(r_code, plan.mag_fmt)
    tsq = _rescale(t_code * t_code, mf, ne)
    one_minus_tsq = one - tsq                   # exact, one integer bit
    corr = _rescale(r_code * one_minus_tsq, plan.in_frac, ne)
    s_code = min(t_code + corr, plan.mf_mask)
    return min(_rescale(s_code, mf - plan.out_frac, plan.out_ne), plan.out_max)


def tanh_fx(x: Fx, cfg: TanhConfig, luts=None, trace: TanhTrace | None = None) -> Fx:
    """Evaluate the configured pipeline for one input code.

    Sign-splits the input, saturates the output exactly for magnitudes at or
    beyond the clamp threshold, runs the configured variant on the
    magnitude, and restores the sign.  ``luts`` must be the tables built
    from ``cfg`` (see ``build_luts_for``); the published variant fetches its
    registers itself.
    """
    if x.fmt is not cfg.input_fmt and x.fmt != cfg.input_fmt:
        raise ValueError(f"input is {x.fmt} but the configuration expects {cfg.input_fmt}")
    if cfg.variant is Variant.OPTIMIZED and luts is None:
        luts = build_luts_for(cfg)
    plan = _prepare(cfg, luts)
    negative = x.code < 0
    mag_code = -x.code if negative else x.code
    if mag_code > plan.mag_max:        # most-negative code saturates
        mag_code = plan.mag_max
    if trace is not None:
        trace.input = x
        trace.negative = negative
        trace.magnitude = Fx(mag_code, plan.mag_fmt)
    if plan.sat_code is not None and mag_code >= plan.sat_code:
        if trace is not None:
            trace.saturated = True
            trace.output = Fx(-plan.out_max if negative else plan.out_max, cfg.output_fmt)
        return Fx(-plan.out_max if negative else plan.out_max, cfg.output_fmt)
    if cfg.variant is Variant.PUBLISHED:
        code = _published_code(mag_code, plan, trace)
    else:
        f_code = _velocity_product_code(mag_code, plan, trace)
        if trace is not None:
            trace.factor = None if f_code is None else Fx(f_code, cfg.mult_fmt)
        code = _final_code(f_code, plan, trace)
    out = Fx(-code if negative else code, cfg.output_fmt)
    if trace is not None:
        trace.output = out
    return out


def velocity_product(magnitude: Fx, cfg: TanhConfig, luts, trace: TanhTrace | None = None) -> Fx | None:
    """Product of the per-group factors addressed by a clamped magnitude.

    Entries are combined pairwise through a balanced tree at multiplier
    precision; groups whose address is zero are bypassed and contribute an
    exact 1.0.  Returns None when every group is bypassed - the exact 1.0
    has no code in a fractional-only format.
    """
    if magnitude.fmt != cfg.input_fmt.magnitude_format():
        raise ValueError(f"magnitude must be {cfg.input_fmt.magnitude_format()}, got {magnitude.fmt}")
    plan = _prepare(cfg, luts)
    code = _velocity_product_code(magnitude.code, plan, trace)
    return None if code is None else Fx(code, cfg.mult_fmt)


def nr_reciprocal(d: Fx, stages: int, cfg: TanhConfig, trace: TanhTrace | None = None) -> Fx:
    """Reciprocal of d in [0.5, 1) after `stages` refinements of the seed.

    The caller is responsible for compensating any normalization shift it
    applied to bring d into range.
    """
    if d.fmt.signed:
        raise ValueError("denominator must be unsigned")
    frac = d.fmt.frac_bits
    if frac < 1 or not (1 << (frac - 1)) <= d.code < (1 << frac):
        raise ValueError(f"denominator {d.value} outside [0.5, 1)")
    if stages < 0:
        raise ValueError("stage count cannot be negative")
    plan = _prepare(cfg, None if cfg.variant is Variant.PUBLISHED else build_luts_for(cfg))
    code = _nr_code(d.code, frac, stages, plan, trace)
    return Fx(code, QFormat(False, 1, cfg.mult_fmt.frac_bits))


def final_stage(f: Fx | None, cfg: TanhConfig, trace: TanhTrace | None = None) -> Fx:
    """Map the velocity product to the output format: (1 - f)/(1 + f).

    ``None`` is the bypass representation of the exact 1.0 and maps to an
    exact zero.  The numerator uses the configured subtractor; the
    denominator is formed by bit concatenation and halved by a lossless
    shift of the binary point; the reciprocal's pre-shift is compensated in
    the single final rescale.
    """
    if f is not None and f.fmt != cfg.mult_fmt:
        raise ValueError(f"product must be in {cfg.mult_fmt}, got {f.fmt}")
    plan = _prepare(cfg, None if cfg.variant is Variant.PUBLISHED else build_luts_for(cfg))
    code = _final_code(None if f is None else f.code, plan, trace)
    return Fx(code, cfg.output_fmt)


def tanh_published(x: Fx, cfg: TanhConfig, registers: PublishedRegisters, trace: TanhTrace | None = None) -> Fx:
    """Evaluate the per-bit register variant with small-angle correction."""
    if registers != build_published_registers(cfg):
        raise ValueError("registers do not match the configuration")
    if cfg.variant is not Variant.PUBLISHED:
        cfg = replace(cfg, variant=Variant.PUBLISHED)
    return tanh_fx(x, cfg, None, trace)
