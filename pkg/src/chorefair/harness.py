"""Instance generation, text formats, pipeline orchestration, benchmarking.

File formats are line-oriented text with a leading format/version field.
Rationals serialize as "num/den", booleans as "true"/"false", matrices as
one row per line.  Reports carry every verdict needed to re-check a run
from the stored allocation alone; timing lines are excluded from the
report fingerprint so identical runs fingerprint identically.

The generator uses splitmix64 (Steele, Lea and Flood's 64-bit mixer) so
instances reproduce bit-for-bit across implementations: draws are
row-major, one cost per draw, with one extra draw immediately after any
all-high row to pick the entry that gets lowered.
"""
from __future__ import annotations

import csv
import hashlib
import io
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .approx_efx import ApproxResult, approx_from_equilibrium
from .efx_k2 import K2Result, k2_from_equilibrium
from .errors import ChorefairError, ParseError
from .model import (Allocation, ExactRational, Instance, MarketState,
                    PaymentVector, RawInstance, as_rational,
                    build_market_state, normalize_instance)
from .oracle import is_pareto_optimal
from .pef1 import run_pef1
from .trace import TraceEvent, replay_trace
from .verify import UNBOUNDED, Unbounded, beta_le, check_EF1, check_pEF1, \
    check_equilibrium, min_beta_EFX, min_beta_pEFX

INSTANCE_FORMAT = "chorefair-instance/1"
REPORT_FORMAT = "chorefair-report/1"

_MASK = (1 << 64) - 1


class SplitMix64:
    """splitmix64; state advances by the golden-gamma constant per draw."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)


@dataclass(frozen=True)
class GenParams:
    n: int
    m: int
    k: ExactRational
    high_prob: ExactRational
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n, m >= 1, got n={self.n} m={self.m}")
        object.__setattr__(self, "k", as_rational(self.k))
        object.__setattr__(self, "high_prob", as_rational(self.high_prob))
        if self.k <= 1:
            raise ValueError(f"need k > 1, got {self.k}")
        if not 0 <= self.high_prob <= 1:
            raise ValueError(f"high_prob outside [0, 1]: {self.high_prob}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError(f"seed outside 64-bit range: {self.seed}")


def gen_instance(params: GenParams) -> RawInstance:
    """Each cost is high with probability high_prob, independently; any
    all-high row gets one uniformly drawn entry lowered so the result
    normalizes.  Deterministic in the seed.
    """
    rng = SplitMix64(params.seed)
    hp = params.high_prob
    one = Fraction(1)
    rows = []
    for _ in range(params.n):
        row = [params.k if rng.next_u64() * hp.denominator < hp.numerator << 64
               else one
               for _ in range(params.m)]
        if all(c == params.k for c in row):
            row[rng.next_u64() % params.m] = one
        rows.append(tuple(row))
    return RawInstance(params.n, params.m, tuple(rows))


# ---------------------------------------------------------------- formats

def _fmt_rational(x: ExactRational | Unbounded) -> str:
    if isinstance(x, Unbounded):
        return "unbounded"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(token: str, where: str = "value") -> Fraction:
    try:
        if "/" in token:
            num_s, den_s = token.split("/", 1)
            num, den = int(num_s), int(den_s)
        else:
            num, den = int(token), 1
    except ValueError:
        raise ParseError(f"{where}: not a rational: {token!r}") from None
    if den == 0:
        raise ParseError(f"{where}: zero denominator in {token!r}")
    return Fraction(num, den)


def _fields(text: str) -> list[tuple[int, str, str]]:
    """(line number, key, value) triples; '#' starts a comment line."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise ParseError(f"line {lineno}: expected 'key: value'")
        key, value = stripped.split(":", 1)
        out.append((lineno, key.strip(), value.strip()))
    return out


def save_instance(path: str, instance: RawInstance | Instance) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(instance_text(instance))


def instance_text(instance: RawInstance | Instance) -> str:
    lines = [f"format: {INSTANCE_FORMAT}"]
    if isinstance(instance, Instance):
        lines.append("kind: normalized")
        lines.append(f"n: {instance.n}")
        lines.append(f"m: {instance.m}")
        lines.append(f"k: {_fmt_rational(instance.k)}")
        for row in instance.high:
            lines.append("row: " + "".join("1" if h else "0" for h in row))
    else:
        lines.append("kind: raw")
        lines.append(f"n: {instance.n}")
        lines.append(f"m: {instance.m}")
        for row in instance.costs:
            lines.append("row: " + " ".join(_fmt_rational(c) for c in row))
    return "\n".join(lines) + "\n"


def load_instance(path: str) -> RawInstance | Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())


def parse_instance(text: str) -> RawInstance | Instance:
    fields = _fields(text)
    if not fields or fields[0][1] != "format" or \
            fields[0][2] != INSTANCE_FORMAT:
        raise ParseError(f"line 1: expected 'format: {INSTANCE_FORMAT}'")
    head: dict[str, str] = {}
    rows: list[tuple[int, str]] = []
    for lineno, key, value in fields[1:]:
        if key == "row":
            rows.append((lineno, value))
        elif key in head:
            raise ParseError(f"line {lineno}: duplicate field {key!r}")
        else:
            head[key] = value
    for need in ("kind", "n", "m"):
        if need not in head:
            raise ParseError(f"missing field {need!r}")
    try:
        n, m = int(head["n"]), int(head["m"])
    except ValueError:
        raise ParseError("fields n, m must be integers") from None
    if len(rows) != n:
        raise ParseError(f"expected {n} row lines, found {len(rows)}")

    if head["kind"] == "normalized":
        if "k" not in head:
            raise ParseError("missing field 'k'")
        k = parse_rational(head["k"], "field k")
        high = []
        for lineno, value in rows:
            if len(value) != m or any(ch not in "01" for ch in value):
                raise ParseError(f"line {lineno}: row must be {m} of 0/1")
            high.append(tuple(ch == "1" for ch in value))
        return Instance(n, m, k, tuple(high))
    if head["kind"] == "raw":
        costs = []
        for lineno, value in rows:
            tokens = value.split()
            if len(tokens) != m:
                raise ParseError(
                    f"line {lineno}: expected {m} entries, found {len(tokens)}")
            costs.append(tuple(
                parse_rational(t, f"line {lineno}") for t in tokens))
        return RawInstance(n, m, tuple(costs))
    raise ParseError(f"unknown kind {head['kind']!r}")


def instance_digest(instance: Instance) -> str:
    return hashlib.sha256(instance_text(instance).encode()).hexdigest()


# --------------------------------------------------------------- pipeline

@dataclass(frozen=True)
class StageSummary:
    name: str
    rounds: int
    events: tuple[TraceEvent, ...]


@dataclass(frozen=True)
class Verdicts:
    entry_equilibrium: bool
    entry_pef1: bool
    entry_ef1: bool
    final_equilibrium: bool
    final_pef1: bool
    beta_pefx: ExactRational | Unbounded
    beta_efx: ExactRational | Unbounded
    oracle_po: bool | None = None


@dataclass(frozen=True)
class RunReport:
    digest: str
    mode: str
    requested_mode: str
    n: int
    m: int
    k: ExactRational
    new_to_old: tuple[int, ...]
    entry_owner: tuple[int, ...]
    entry_pay_high: tuple[bool, ...]
    owner: tuple[int, ...]
    pay_high: tuple[bool, ...]
    stages: tuple[StageSummary, ...]
    verdicts: Verdicts | None
    success: bool
    error: str | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def trace(self) -> tuple[TraceEvent, ...]:
        return tuple(ev for stage in self.stages for ev in stage.events)


def _resolve_mode(mode: str, k: ExactRational) -> str:
    if mode == "auto":
        return "exact2" if k == 2 else "approx"
    return mode


def run_pipeline(instance: Instance | RawInstance, mode: str = "auto", *,
                 oracle_budget: int | None = None) -> RunReport:
    """pEF1 equilibrium, then the mode's reallocation stage, then verdicts.

    Modes: pef1 stops after the equilibrium; approx runs the high-to-low
    exchange stage; exact2 runs the {1,2} trade stage; auto picks exact2
    when k = 2 and approx otherwise.  Engine errors come back as a failed
    report with the message in .error rather than raising.
    """
    if mode not in ("auto", "pef1", "approx", "exact2"):
        raise ValueError(f"unknown mode {mode!r}")
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    try:
        inst = normalize_instance(instance) \
            if isinstance(instance, RawInstance) else instance
        resolved = _resolve_mode(mode, inst.k)
        sink: list[MarketState] = []
        t1 = time.perf_counter()
        state = run_pef1(inst, state_sink=sink)
        timings["pef1"] = time.perf_counter() - t1
        entry = sink[0]
        stages = [StageSummary("pef1", state.round_count, state.trace)]

        pef1_market = state.market
        t1 = time.perf_counter()
        if resolved == "pef1":
            final = pef1_market
        elif resolved == "approx":
            result: ApproxResult | K2Result = approx_from_equilibrium(
                pef1_market, state)
            stages.append(StageSummary("approx_efx", result.rounds,
                                       result.trace))
            final = result.market
        else:
            result = k2_from_equilibrium(pef1_market, state.unraised, state)
            stages.append(StageSummary("efx_k2", result.rounds, result.trace))
            final = result.market
        timings["stage"] = time.perf_counter() - t1
    except ChorefairError as err:
        timings["total"] = time.perf_counter() - t0
        return RunReport(
            digest="", mode=mode, requested_mode=mode, n=0, m=0,
            k=Fraction(0), new_to_old=(), entry_owner=(), entry_pay_high=(),
            owner=(), pay_high=(), stages=(), verdicts=None, success=False,
            error=f"{type(err).__name__}: {err}", timings=timings)

    t1 = time.perf_counter()
    reindexed = pef1_market.instance
    entry_eq = check_equilibrium(pef1_market).holds
    entry_pef1 = check_pEF1(pef1_market).holds
    entry_ef1 = check_EF1(reindexed, pef1_market.allocation).holds
    final_eq = check_equilibrium(final).holds
    final_pef1 = check_pEF1(final).holds
    beta_pefx = min_beta_pEFX(final).value
    beta_efx = min_beta_EFX(reindexed, final.allocation).value
    oracle_po = None
    if oracle_budget is not None and \
            reindexed.n ** reindexed.m < oracle_budget:
        oracle_po = is_pareto_optimal(reindexed, final.allocation,
                                      budget=oracle_budget)
    verdicts = Verdicts(entry_eq, entry_pef1, entry_ef1, final_eq,
                        final_pef1, beta_pefx, beta_efx, oracle_po)
    timings["verify"] = time.perf_counter() - t1

    if resolved == "pef1":
        bound_ok = entry_pef1
    elif resolved == "approx":
        bound_ok = beta_le(beta_efx, 2 - 1 / inst.k)
    else:
        bound_ok = beta_efx == 1 and final_pef1
    success = (entry_eq and entry_pef1 and entry_ef1 and final_eq
               and bound_ok and oracle_po is not False)
    timings["total"] = time.perf_counter() - t0
    return RunReport(
        digest=instance_digest(inst), mode=resolved, requested_mode=mode,
        n=inst.n, m=inst.m, k=inst.k,
        new_to_old=state.groups.new_to_old,
        entry_owner=entry.allocation.owner,
        entry_pay_high=tuple(entry.pay_is_high(e) for e in range(inst.m)),
        owner=final.allocation.owner,
        pay_high=tuple(final.pay_is_high(e) for e in range(inst.m)),
        stages=tuple(stages), verdicts=verdicts, success=success,
        timings=timings)


def replay_report(report: RunReport) -> tuple[tuple[int, ...],
                                              tuple[bool, ...]]:
    """Re-apply the trace to the entry state; must land on the final state."""
    return replay_trace(report.entry_owner, report.entry_pay_high,
                        report.trace)


# ---------------------------------------------------------------- report IO

def _fmt_bool(b: bool) -> str:
    return "true" if b else "false"


def _event_line(ev: TraceEvent) -> str:
    parts = [
        f"stage={ev.stage}", f"round={ev.round}", f"kind={ev.kind}",
        "agents=" + ",".join(map(str, ev.agents)),
        "items=" + ",".join(map(str, ev.items)),
        "earn_before=" + ",".join(_fmt_rational(x) for x in ev.earn_before),
        "earn_after=" + ",".join(_fmt_rational(x) for x in ev.earn_after),
    ]
    if ev.least_earning is not None:
        parts.append(f"least={_fmt_rational(ev.least_earning)}")
    return "event: " + " ".join(parts)


def report_text(report: RunReport, *, timings: bool = True) -> str:
    lines = [f"format: {REPORT_FORMAT}",
             f"digest: {report.digest}",
             f"mode: {report.mode}",
             f"requested-mode: {report.requested_mode}",
             f"status: {'ok' if report.success else 'failed'}"]
    if report.error is not None:
        lines.append(f"error: {report.error}")
    lines += [f"n: {report.n}", f"m: {report.m}",
              f"k: {_fmt_rational(report.k)}",
              "new-to-old: " + " ".join(map(str, report.new_to_old)),
              "entry-owner: " + " ".join(map(str, report.entry_owner)),
              "entry-pay-high: " + "".join(
                  "1" if h else "0" for h in report.entry_pay_high),
              "owner: " + " ".join(map(str, report.owner)),
              "pay-high: " + "".join(
                  "1" if h else "0" for h in report.pay_high)]
    for stage in report.stages:
        lines.append(f"stage: {stage.name} rounds={stage.rounds}")
        lines.extend(_event_line(ev) for ev in stage.events)
    v = report.verdicts
    if v is not None:
        lines += [
            f"verdict entry-equilibrium: {_fmt_bool(v.entry_equilibrium)}",
            f"verdict entry-pef1: {_fmt_bool(v.entry_pef1)}",
            f"verdict entry-ef1: {_fmt_bool(v.entry_ef1)}",
            f"verdict final-equilibrium: {_fmt_bool(v.final_equilibrium)}",
            f"verdict final-pef1: {_fmt_bool(v.final_pef1)}",
            f"verdict beta-pefx: {_fmt_rational(v.beta_pefx)}",
            f"verdict beta-efx: {_fmt_rational(v.beta_efx)}",
        ]
        if v.oracle_po is not None:
            lines.append(f"verdict oracle-po: {_fmt_bool(v.oracle_po)}")
    if timings:
        for name in sorted(report.timings):
            lines.append(f"timing {name}: {report.timings[name]:.6f}")
    return "\n".join(lines) + "\n"


def save_report(path: str, report: RunReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_text(report))


def report_fingerprint(report: RunReport) -> str:
    """sha256 of the report text without its timing lines."""
    return hashlib.sha256(
        report_text(report, timings=False).encode()).hexdigest()


def _parse_event(lineno: int, body: str) -> TraceEvent:
    kv = {}
    for token in body.split():
        if "=" not in token:
            raise ParseError(f"line {lineno}: bad event token {token!r}")
        key, value = token.split("=", 1)
        kv[key] = value

    def ints(key):
        raw = kv.get(key, "")
        return tuple(int(t) for t in raw.split(",") if t)

    def rationals(key):
        raw = kv.get(key, "")
        return tuple(parse_rational(t, f"line {lineno}")
                     for t in raw.split(",") if t)

    try:
        least = kv.get("least")
        return TraceEvent(
            stage=kv["stage"], round=int(kv["round"]), kind=kv["kind"],
            agents=ints("agents"), items=ints("items"),
            earn_before=rationals("earn_before"),
            earn_after=rationals("earn_after"),
            least_earning=None if least is None
            else parse_rational(least, f"line {lineno}"))
    except KeyError as missing:
        raise ParseError(f"line {lineno}: event missing {missing}") from None


def load_report(path: str) -> RunReport:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_report(fh.read())


def parse_report(text: str) -> RunReport:
    fields = _fields(text)
    if not fields or fields[0][1] != "format" or fields[0][2] != REPORT_FORMAT:
        raise ParseError(f"line 1: expected 'format: {REPORT_FORMAT}'")
    head: dict[str, str] = {}
    stages: list[StageSummary] = []
    events: list[TraceEvent] = []
    verdict_raw: dict[str, str] = {}
    timings: dict[str, float] = {}
    stage_open: tuple[str, int] | None = None

    def close_stage():
        nonlocal stage_open, events
        if stage_open is not None:
            stages.append(StageSummary(stage_open[0], stage_open[1],
                                       tuple(events)))
            stage_open, events = None, []

    for lineno, key, value in fields[1:]:
        if key == "stage":
            close_stage()
            try:
                name, rounds_part = value.split(" rounds=", 1)
                stage_open = (name.strip(), int(rounds_part))
            except ValueError:
                raise ParseError(f"line {lineno}: bad stage line") from None
        elif key == "event":
            if stage_open is None:
                raise ParseError(f"line {lineno}: event outside a stage")
            events.append(_parse_event(lineno, value))
        elif key.startswith("verdict "):
            verdict_raw[key[len("verdict "):]] = value
        elif key.startswith("timing "):
            timings[key[len("timing "):]] = float(value)
        else:
            head[key] = value
    close_stage()

    def want(key):
        if key not in head:
            raise ParseError(f"missing field {key!r}")
        return head[key]

    def parse_beta(token):
        return UNBOUNDED if token == "unbounded" \
            else parse_rational(token, "verdict")

    verdicts = None
    if verdict_raw:
        verdicts = Verdicts(
            entry_equilibrium=verdict_raw["entry-equilibrium"] == "true",
            entry_pef1=verdict_raw["entry-pef1"] == "true",
            entry_ef1=verdict_raw["entry-ef1"] == "true",
            final_equilibrium=verdict_raw["final-equilibrium"] == "true",
            final_pef1=verdict_raw["final-pef1"] == "true",
            beta_pefx=parse_beta(verdict_raw["beta-pefx"]),
            beta_efx=parse_beta(verdict_raw["beta-efx"]),
            oracle_po=None if "oracle-po" not in verdict_raw
            else verdict_raw["oracle-po"] == "true")
    return RunReport(
        digest=want("digest"), mode=want("mode"),
        requested_mode=want("requested-mode"),
        n=int(want("n")), m=int(want("m")),
        k=parse_rational(want("k"), "field k"),
        new_to_old=tuple(int(t) for t in head.get("new-to-old", "").split()),
        entry_owner=tuple(int(t)
                          for t in head.get("entry-owner", "").split()),
        entry_pay_high=tuple(ch == "1"
                             for ch in head.get("entry-pay-high", "")),
        owner=tuple(int(t) for t in head.get("owner", "").split()),
        pay_high=tuple(ch == "1" for ch in head.get("pay-high", "")),
        stages=tuple(stages), verdicts=verdicts,
        success=want("status") == "ok", error=head.get("error"),
        timings=timings)


# -------------------------------------------------------------------- bench

BENCH_COLUMNS = ("n", "m", "k", "high_prob", "seed", "mode", "status",
                 "pef1_rounds", "stage_rounds", "beta_efx", "beta_pefx",
                 "equilibrium", "pef1", "ef1", "elapsed_ms")


def bench(grid: list[GenParams], *, mode: str = "auto") -> str:
    """One CSV row per grid cell in order, then one aggregate row per k
    with the largest envy factor observed for that k.
    """
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(BENCH_COLUMNS)
    worst: dict[str, ExactRational | Unbounded] = {}
    for params in grid:
        try:
            raw = gen_instance(params)
            report = run_pipeline(raw, mode)
        except ChorefairError as err:
            writer.writerow([params.n, params.m, _fmt_rational(params.k),
                             _fmt_rational(params.high_prob), params.seed,
                             mode, f"error:{type(err).__name__}",
                             "", "", "", "", "", "", "", ""])
            continue
        if report.verdicts is None:
            writer.writerow([params.n, params.m, _fmt_rational(params.k),
                             _fmt_rational(params.high_prob), params.seed,
                             report.mode, f"error:{report.error}",
                             "", "", "", "", "", "", "", ""])
            continue
        v = report.verdicts
        key = _fmt_rational(params.k)
        if key not in worst or beta_le(worst[key], v.beta_efx):
            worst[key] = v.beta_efx
        stage_rounds = sum(s.rounds for s in report.stages[1:])
        writer.writerow([
            params.n, params.m, key, _fmt_rational(params.high_prob),
            params.seed, report.mode, "ok" if report.success else "failed",
            report.stages[0].rounds, stage_rounds,
            _fmt_rational(v.beta_efx), _fmt_rational(v.beta_pefx),
            _fmt_bool(v.final_equilibrium), _fmt_bool(v.entry_pef1),
            _fmt_bool(v.entry_ef1),
            f"{report.timings.get('total', 0.0) * 1000:.3f}"])
    for key in sorted(worst):
        writer.writerow(["aggregate", "", key, "", "", mode, "",
                         "", "", _fmt_rational(worst[key]), "",
                         "", "", "", ""])
    return out.getvalue()


def equilibrium_from_parts(instance: Instance, owner: tuple[int, ...],
                           pay_high: tuple[bool, ...]) -> MarketState:
    """Convenience assembly used by the CLI verify path and tests."""
    return build_market_state(
        instance, Allocation(tuple(owner)),
        PaymentVector.from_high_flags(instance.k, tuple(pay_high)))
