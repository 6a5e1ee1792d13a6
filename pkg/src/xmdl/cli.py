"""Command line driver for experiments and the acceptance suite.

Every subcommand builds an `ExperimentConfig`, hands it to `run` and gets a
`SummaryReport` back.  Data rows go to CSV (``--csv``), the summary goes to
stdout as JSON and optionally to ``--json``.  Exit status: 0 all pass, 1 any
fail, 2 any inconclusive, 3 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import acceptance, coding, expfam, jeffreys, measures, predict
from .errors import ConfigError, DomainError, InfeasibleHorizon, NotNormalizable, NotYetDefined, XMDLError
from .quadrature import DEFAULT_BUDGET, DEFAULT_TOL, Verdict

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3

# stable one-byte codes stored in encoded containers
SYSTEM_CODES = {"jeffreys": 1, "flat": 2, "snml": 3, "nml": 4, "plugin": 5, "kt": 6}
_CODE_SYSTEMS = {v: k for k, v in SYSTEM_CODES.items()}


@dataclass
class ExperimentConfig:
    subcommand: str
    family: Optional[str] = None
    prior: Optional[str] = None
    system: Optional[str] = None
    m: int = 0
    xbar: Optional[float] = None
    horizons: tuple = ()
    seeds: int = 1
    tol: float = DEFAULT_TOL
    budget: int = DEFAULT_BUDGET
    csv_path: Optional[str] = None
    json_path: Optional[str] = None
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.family is not None:
            expfam.get_family(self.family)
        if self.prior is not None and self.family is not None:
            measures.get_prior(self.prior, expfam.get_family(self.family))
        if self.system is not None and self.system not in SYSTEM_CODES:
            raise ConfigError(f"unknown system {self.system!r}; known: {', '.join(SYSTEM_CODES)}")
        hs = list(self.horizons)
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise ConfigError("horizon schedule must be strictly increasing")
        if self.m < 0:
            raise ConfigError("--m must be nonnegative")
        if self.seeds < 1:
            raise ConfigError("--seeds must be at least 1")

    def hash(self) -> str:
        d = asdict(self)
        d.pop("csv_path")
        d.pop("json_path")
        d["options"] = {k: v for k, v in d["options"].items() if k not in ("workers", "input", "output")}
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class SummaryReport:
    subcommand: str
    config_hash: str
    status: str                       # pass, fail or inconclusive
    measured: object = None
    target: object = None
    tolerance: object = None
    wall_clock: float = 0.0
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {"pass": EXIT_PASS, "fail": EXIT_FAIL}.get(self.status, EXIT_INCONCLUSIVE)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_dict(self, with_rows: bool = True) -> dict:
        d = {"subcommand": self.subcommand, "config_hash": self.config_hash, "status": self.status,
             "measured": self.measured, "target": self.target, "tolerance": self.tolerance,
             "wall_clock": round(self.wall_clock, 6), "n_rows": len(self.rows), "details": self.details}
        if with_rows:
            d["rows"] = self.rows
        return acceptance._jsonable(d)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating, np.integer)):
        return repr(v.item())
    return "" if v is None else str(v)


def _status(ok: Optional[bool]) -> str:
    return {True: "pass", False: "fail", None: "inconclusive"}[ok]


def _verdict_status(v: Verdict, expect: Optional[str]) -> str:
    if v is Verdict.INCONCLUSIVE:
        return "inconclusive"
    if expect is None:
        return "pass"
    return _status(v.value == expect)


def _log(res) -> float:
    return res.log() if res.verdict is Verdict.FINITE else math.inf


# ---------------------------------------------------------------------------
# subcommand bodies; each returns (status, measured, target, tolerance, columns, rows, details)

def _families(c: ExperimentConfig):
    rows = []
    for fid in ("bernoulli", "gaussian-location", "poisson", "exponential", "gamma:k=2", "geometric",
                "exp-cauchy"):
        F = expfam.get_family(fid)
        r = F.mean_range
        rows.append({"id": fid, "name": F.name, "mu_inf": r.mu_inf, "mu_sup": r.mu_sup,
                     "discrete": F.discrete, "point_mass_left": F.point_mass_left,
                     "point_mass_right": F.point_mass_right, "anchor_mean": F.anchor_mean})
    return "pass", len(rows), None, None, list(rows[0]), rows, {}


def _divergence(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    mu0, mu1 = c.options["mu0"], c.options["mu1"]
    d = expfam.divergence(F, mu0, mu1)
    details = {}
    if F.mean_range.interior(mu0) and F.mean_range.interior(mu1):
        q = expfam.divergence_by_quadrature(F, mu0, mu1)
        details["quadrature"] = q
        details["abs_diff"] = abs(q - d)
    row = {"mu0": mu0, "mu1": mu1, "divergence": d}
    return "pass", d, None, None, list(row), [row], details


# values that have an independent closed form
def _known_jeffreys(F: expfam.ExpFamily1D, m: int, xbar: Optional[float]):
    if F.name == "bernoulli" and m == 0:
        return acceptance.arcsine_oracle()
    if F.name == "bernoulli" and m == 2 and xbar == 0.5:
        return acceptance.bernoulli_m2_oracle()
    if F.name == "exponential" and m == 1 and xbar is not None and xbar > 0:
        return acceptance.exponential_conditional_oracle(xbar)
    return None


def _jeffreys(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    if c.m > 0:
        if c.xbar is None:
            raise ConfigError("--conditional needs both m and xbar")
        res = jeffreys.conditional_jeffreys(F, c.m, c.xbar, c.tol)
    else:
        res = jeffreys.jeffreys_integral(F, c.tol)
    target = c.options.get("target")
    if target is None:
        target = _known_jeffreys(F, c.m, c.xbar)
    tol = c.options.get("target_tol", 1e-6)
    if res.verdict is Verdict.INCONCLUSIVE:
        status = "inconclusive"
    elif target is not None:
        status = _status(res.verdict is Verdict.FINITE and abs(res.value - target) <= tol)
    else:
        status = _verdict_status(res.verdict, c.options.get("expect"))
    row = {"m": c.m, "xbar": c.xbar, "verdict": res.verdict.value, "value": res.value,
           "log_value": _log(res), "error_estimate": res.error_estimate}
    return (status, res.value if res.verdict is Verdict.FINITE else res.verdict.value, target,
            tol if target is not None else None, list(row), [row],
            {"diagnostics": list(res.diagnostics), "nevals": res.nevals})


def _diagnose(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    d = jeffreys.diagnose(F, m=max(c.m, 1), tol=max(c.tol, 1e-8))
    status = "inconclusive" if d.verdict is jeffreys.Finiteness.UNKNOWN else "pass"
    rows = [{"side": side, "verdict": s.verdict.value, "rule": s.rule.value if s.rule else None,
             "required_m": s.required_m, "note": s.note} for side, s in sorted(d.sides.items())]
    return (status, d.verdict.value, None, None, ["side", "verdict", "rule", "required_m", "note"], rows,
            {"rule": d.rule.value if d.rule else None, "required_m": d.required_m, "notes": d.notes})


def _finiteness(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    prior = measures.get_prior(c.prior or "jeffreys", F)
    if c.xbar is None:
        raise ConfigError("finiteness needs --xbar")
    state = measures.PosteriorState(prior, F, c.m, c.xbar, c.tol, c.budget)
    res = state.normalizer
    status = _verdict_status(res.verdict, c.options.get("expect"))
    row = {"m": c.m, "xbar": c.xbar, "verdict": res.verdict.value, "log_normalizer": _log(res)}
    return (status, res.verdict.value, c.options.get("expect"), None, list(row), [row],
            {"diagnostics": list(res.diagnostics)})


def _posterior(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    prior = measures.get_prior(c.prior or "jeffreys", F)
    state = measures.PosteriorState(prior, F, c.m, math.nan if c.xbar is None else c.xbar, c.tol, c.budget)
    res = state.normalizer
    if res.verdict is not Verdict.FINITE:
        status = "inconclusive" if res.verdict is Verdict.INCONCLUSIVE else "fail"
        return status, res.verdict.value, None, None, [], [], {
            "message": f"posterior is not normalizable ({res.verdict.value}); try a larger --m",
            "diagnostics": list(res.diagnostics)}
    ys = c.options.get("ys") or []
    rows = [{"y": y, "log_density": measures.posterior_log_density(state, y)} for y in ys]
    return "pass", res.log(), None, None, ["y", "log_density"], rows, {"log_normalizer": res.log()}


def _build_system(family_id: str, system_id: str, prior: Optional[str], horizon: int, m: int):
    F = expfam.get_family(family_id)
    return predict.get_system(system_id, F, horizon=horizon, m=m,
                              prior=prior if system_id in ("jeffreys", "flat") else None)


def _regret_cell(args) -> list[dict]:
    family_id, system_id, prior, m, horizons, seed, mu, prefix = args
    system = _build_system(family_id, system_id, prior, horizons[-1], m)
    gen = predict.iid_generator(system.family, mu, seed)
    recs = predict.regret_gap_experiment(system, gen, m, horizons, prefix=prefix)
    return [{"seed": seed, "n": r.n, "m": r.m, "regret2_nats": r.regret2_nats, "gap": r.gap} for r in recs]


def _default_mu(F: expfam.ExpFamily1D) -> float:
    return F.anchor_mean


def _regret(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    if not c.horizons:
        raise ConfigError("regret needs --n or --n-schedule")
    mu = c.options.get("mu")
    mu = _default_mu(F) if mu is None else mu
    prefix = c.options.get("prefix")
    if c.m > 0 and prefix is None:
        # one shared conditioning string, drawn with seed 0, so all seeds share one target
        prefix = [float(v) for v in predict.iid_generator(F, mu, 0)(c.m)]
    if prefix is not None and len(prefix) < c.m:
        raise ConfigError("--prefix is shorter than --m")
    cells = [(c.family, c.system, c.prior, c.m, tuple(c.horizons), s, mu, prefix) for s in range(c.seeds)]
    workers = int(c.options.get("workers") or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_regret_cell, cells))
    else:
        chunks = [_regret_cell(a) for a in cells]
    rows = sorted((r for ch in chunks for r in ch), key=lambda r: (r["seed"], r["n"]))
    N = c.horizons[-1]
    terminal = np.array([r["gap"] for r in rows if r["n"] == N])
    mean, std = float(np.mean(terminal)), float(np.std(terminal))
    details = {"std": std, "mu": mu, "seeds": c.seeds, "n": N}
    target = c.options.get("target")
    if target is None and c.system in ("jeffreys", "nml", "kt"):
        t = predict.regret_gap_target(F, c.m, prefix)
        details["target_verdict"] = t["verdict"]
        details["log_J"] = t["log_J"]
        if t["verdict"] == Verdict.FINITE.value:
            target = t["gap_limit"]
        elif t["verdict"] == Verdict.INCONCLUSIVE.value:
            details["message"] = "the regret target integral is inconclusive"
    tol = c.options.get("target_tol", 0.05)
    if target is None:
        status = "inconclusive" if details.get("target_verdict") == "inconclusive" else "pass"
    else:
        status = _status(abs(mean - target) <= tol)
    return status, mean, target, tol if target is not None else None, \
        ["seed", "n", "m", "regret2_nats", "gap"], rows, details


def _shtarkov(c: ExperimentConfig):
    ns = list(c.horizons) or [65536]
    target = math.log(acceptance.arcsine_oracle())
    rows = []
    for n in ns:
        ls = predict.log_shtarkov_bernoulli(n)
        rows.append({"n": n, "log_shtarkov": ls, "gap": ls - 0.5 * math.log(n / expfam.TAU)})
    tol = c.options.get("target_tol", 0.02)
    meas = rows[-1]["gap"]
    return _status(abs(meas - target) <= tol), meas, target, tol, ["n", "log_shtarkov", "gap"], rows, {}


def _race(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    n = c.horizons[-1] if c.horizons else 16
    prefix = [int(v) for v in (c.options.get("prefix") or [])]
    m = len(prefix)
    A = _build_system(c.family, c.options["system_a"], None, n, m)
    B = _build_system(c.family, c.options["system_b"], None, n, m)
    beam = predict.regret_race(A, B, n, prefix=prefix, beam_width=c.options.get("beam_width", 8),
                               budget=c.options.get("search_budget"))
    rows = [{"n": m + i + 1, "reg_b_minus_reg_a": g} for i, g in enumerate(beam.gap_trace)]
    details = {"sequence": "".join(map(str, beam.sequence)), "expansions": beam.expansions,
               "budget_exhausted": beam.exhausted}
    status = "inconclusive" if beam.exhausted else "pass"
    if c.options.get("exhaustive"):
        seq, gap = predict.exhaustive_race(A, B, n, prefix)
        details["exhaustive_gap"] = gap
        details["exhaustive_sequence"] = "".join(map(str, seq))
        details["beam_shortfall"] = gap - beam.terminal_gap
    return status, beam.terminal_gap, None, None, ["n", "reg_b_minus_reg_a"], rows, details


def _exchangeability(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    if not (F.discrete and F.finite_support):
        raise ConfigError("exchangeability probing enumerates binary strings; use a Bernoulli family")
    n = c.horizons[-1] if c.horizons else 8
    rows = []
    for k in range(max(c.m, 1), n + 1):
        system = _build_system(c.family, c.system, c.prior, k, c.m)
        rows.append({"n": k, "m": c.m, "max_deviation": predict.exchangeability_probe(system, k, c.m)})
    worst = max(r["max_deviation"] for r in rows)
    system = _build_system(c.family, c.system, c.prior, n, c.m)
    if system.exchangeable and not isinstance(system, predict.NML):
        tol = c.options.get("target_tol", 1e-12)
        return _status(worst <= tol), worst, 0.0, tol, ["n", "m", "max_deviation"], rows, {}
    return "pass", worst, None, None, ["n", "m", "max_deviation"], rows, {"asserted": False}


def _parse_lengths(text: str) -> coding.LengthFunction:
    lengths = {}
    for part in text.split(","):
        if "=" not in part:
            raise ConfigError(f"length entry {part!r} is not symbol=length")
        a, v = part.split("=", 1)
        a = a.strip()
        lengths[int(a) if a.lstrip("-").isdigit() else a] = float(v)
    return coding.LengthFunction(tuple(lengths), lengths, 2)


def _kraft(c: ExperimentConfig):
    text = c.options.get("lengths")
    if text:
        lf = _parse_lengths(text)
        n = c.horizons[-1] if c.horizons else 1
        code = coding.build_block_code(lf, n)
        rows = [{"block": "".join(map(str, b)), "codeword": w} for b, w in sorted(code.codebook.items(),
                                                                               key=lambda kv: str(kv[0]))]
        dev = coding.block_deviation(lf, code)
        ok = coding.check_prefix_free(code) and dev <= 1.0 / n + 1e-12
        return (_status(ok), dev, 1.0 / n, None, ["block", "codeword"], rows,
                {"kraft_sum_lengths": coding.kraft_sum(lf), "kraft_sum_code": float(code.kraft_sum())})
    r = acceptance.kraft_trials(c.options.get("trials", 100), c.options.get("seed", 2024))
    rows = [{"trial": f[0], "failure": f[1]} for f in r["failures"]]
    return (_status(not r["failures"]), len(r["failures"]), 0, None, ["trial", "failure"], rows,
            {"worst_scaled_deviation": r["worst_scaled_deviation"]})


def read_symbols(text: str, F: expfam.ExpFamily1D) -> list[int]:
    """Raw symbol files: '0'/'1' characters for Bernoulli, comma separated integers otherwise."""
    text = text.strip()
    if not text:
        return []
    if F.name == "bernoulli" and "," not in text:
        bad = set(text) - {"0", "1"}
        if bad:
            raise ConfigError(f"Bernoulli raw files hold only 0 and 1, found {sorted(bad)}")
        return [int(ch) for ch in text]
    try:
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"raw file is not comma separated integers: {exc}") from None


def write_symbols(xs: Sequence[int], F: expfam.ExpFamily1D) -> str:
    if F.name == "bernoulli":
        return "".join(str(int(v)) for v in xs)
    return ",".join(str(int(v)) for v in xs)


def _encode(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    if not F.discrete:
        raise ConfigError("the codec handles discrete families only")
    with open(c.options["input"], encoding="ascii") as fh:
        xs = read_symbols(fh.read(), F)
    if len(xs) < c.m:
        raise ConfigError("input shorter than --m")
    system = _build_system(c.family, c.system, c.prior, len(xs), c.m)
    rep = coding.encode_with_report(system, xs, c.m)
    blob = coding.pack(coding.Container(c.family, SYSTEM_CODES[c.system], c.m, len(xs), tuple(xs[:c.m]),
                                        rep.stream))
    with open(c.options["output"], "wb") as fh:
        fh.write(blob)
    row = {"n": len(xs), "m": c.m, "bits": rep.bits, "ideal_bits": rep.ideal_bits,
           "slack_bits": rep.slack_bits, "bound": rep.bound, "escapes": rep.escapes, "bytes": len(blob)}
    return _status(rep.within_bound), rep.bits, rep.bound, None, list(row), [row], {}


def _decode(c: ExperimentConfig):
    F = expfam.get_family(c.family)
    with open(c.options["input"], "rb") as fh:
        box = coding.unpack(fh.read(), c.family)
    system_id = _CODE_SYSTEMS.get(box.system_code)
    if system_id is None:
        raise ConfigError(f"unknown system code {box.system_code} in the stream header")
    if c.system is not None and c.system != system_id:
        raise ConfigError(f"stream was encoded with {system_id}, not {c.system}")
    system = _build_system(c.family, system_id, c.prior, box.n, box.m)
    tail = coding.arithmetic_decode(system, box.stream, box.n, box.m, box.prefix, box.precision, box.freq_bits)
    xs = list(box.prefix) + tail
    with open(c.options["output"], "w", encoding="ascii") as fh:
        fh.write(write_symbols(xs, F))
    row = {"n": box.n, "m": box.m, "system": system_id, "bits": len(box.stream)}
    return "pass", box.n, None, None, list(row), [row], {}


def _reproduce(c: ExperimentConfig):
    echo = (lambda s: print(s, file=sys.stderr)) if c.options.get("verbose", True) else None
    results = acceptance.run_all(c.options.get("only"), echo=echo)
    rows = [{"criterion": r.cid, "status": r.status, "measured": json.dumps(acceptance._jsonable(r.measured)),
             "target": json.dumps(acceptance._jsonable(r.target)), "elapsed": round(r.elapsed, 3)}
            for r in results]
    statuses = {r.status for r in results}
    status = "fail" if "fail" in statuses else "inconclusive" if "inconclusive" in statuses else "pass"
    passed = sum(r.passed is True for r in results)
    return (status, f"{passed}/{len(results)}", None, None, ["criterion", "status", "measured", "target", "elapsed"],
            rows, {"criteria": [r.to_dict() for r in results]})


_HANDLERS = {
    "families": _families, "divergence": _divergence, "jeffreys": _jeffreys, "diagnose": _diagnose,
    "finiteness": _finiteness, "posterior": _posterior, "regret": _regret, "shtarkov": _shtarkov,
    "race": _race, "exchangeability": _exchangeability, "kraft": _kraft, "encode": _encode,
    "decode": _decode, "reproduce-paper": _reproduce,
}


def run(config: ExperimentConfig) -> SummaryReport:
    """Execute one configured experiment and write its CSV and JSON outputs."""
    config.validate()
    t0 = time.perf_counter()
    status, measured, target, tol, cols, rows, details = _HANDLERS[config.subcommand](config)
    rep = SummaryReport(config.subcommand, config.hash(), status, measured, target, tol,
                        time.perf_counter() - t0, cols, rows, details)
    if config.csv_path:
        with open(config.csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(rep.csv_text())
    if config.json_path:
        with open(config.json_path, "w", encoding="utf-8") as fh:
            json.dump(rep.to_dict(with_rows=False), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return rep


# ---------------------------------------------------------------------------
# argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _schedule(text: str) -> list[int]:
    """Comma list, or geometric `start:stop:factor`."""
    if ":" in text:
        a, b, f = text.split(":")
        a, b, f = int(a), int(b), float(f)
        if a < 1 or f <= 1:
            raise argparse.ArgumentTypeError("schedule start:stop:factor needs start >= 1 and factor > 1")
        out, v = [], float(a)
        while v <= b:
            if not out or int(v) > out[-1]:
                out.append(int(v))
            v *= f
        return out
    return _ints(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xmdl", description="Exponential-family MDL experiments: Jeffreys integrals, "
                "posterior normalizability, sequential prediction regret and coding.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, family=True):
        if family:
            sp.add_argument("--family", required=True, help=f"catalog id ({', '.join(expfam.CATALOG)})")
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL, help="quadrature tolerance")
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="quadrature evaluation budget")
        sp.add_argument("--csv", dest="csv_path", help="write data rows here")
        sp.add_argument("--json", dest="json_path", help="write the summary here")
        return sp

    common(sub.add_parser("families", help="list the family catalog",
                          description="CSV: id,name,mu_inf,mu_sup,discrete,point_mass_left,"
                                      "point_mass_right,anchor_mean"), family=False)

    s = common(sub.add_parser("divergence", help="D(mu0||mu1)", description="CSV: mu0,mu1,divergence"))
    s.add_argument("--mu0", type=float, required=True)
    s.add_argument("--mu1", type=float, required=True)

    s = common(sub.add_parser("jeffreys", help="(conditional) Jeffreys integral",
                              description="CSV: m,xbar,verdict,value,log_value,error_estimate"))
    s.add_argument("--conditional", nargs=2, metavar=("M", "XBAR"))
    s.add_argument("--target", type=float)
    s.add_argument("--target-tol", type=float, default=1e-6)
    s.add_argument("--expect", choices=("finite", "divergent"))

    s = common(sub.add_parser("diagnose", help="rule-based Jeffreys finiteness diagnosis",
                              description="CSV: side,verdict,rule,required_m,note"))
    s.add_argument("--m", type=int, default=1)

    s = common(sub.add_parser("finiteness", help="posterior normalizability probe",
                              description="CSV: m,xbar,verdict,log_normalizer"))
    s.add_argument("--prior", default="jeffreys", help=f"prior id ({', '.join(measures.PRIOR_CATALOG)})")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--xbar", type=float, required=True)
    s.add_argument("--expect", choices=("finite", "divergent"))

    s = common(sub.add_parser("posterior", help="posterior log density at points",
                              description="CSV: y,log_density"))
    s.add_argument("--prior", default="jeffreys")
    s.add_argument("--m", type=int, default=0)
    s.add_argument("--xbar", type=float)
    s.add_argument("--y", type=_floats, default=[], help="comma separated evaluation points")

    s = common(sub.add_parser("regret", help="regret-2 gap over seeded i.i.d. trajectories",
                              description="CSV: seed,n,m,regret2_nats,gap (gap = regret2 - ln(n/tau)/2)"))
    s.add_argument("--system", default="jeffreys", choices=tuple(SYSTEM_CODES))
    s.add_argument("--prior", help="prior for the mixture systems")
    s.add_argument("--m", type=int, default=0)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--n-schedule", type=_schedule, help="comma list or start:stop:factor")
    s.add_argument("--seeds", type=int, default=16)
    s.add_argument("--mu", type=float, help="data-generating mean (default: family anchor)")
    s.add_argument("--prefix", type=_floats, help="conditioning string shared by all seeds")
    s.add_argument("--target", type=float)
    s.add_argument("--target-tol", type=float, default=0.05)
    s.add_argument("--workers", type=int, default=1)

    s = common(sub.add_parser("shtarkov", help="Bernoulli Shtarkov sum gap",
                              description="CSV: n,log_shtarkov,gap"), family=False)
    s.add_argument("--n", type=_ints, default=[65536], help="comma separated horizons")
    s.add_argument("--target-tol", type=float, default=0.02)

    s = common(sub.add_parser("race", help="search for sequences where B's regret exceeds A's",
                              description="CSV: n,reg_b_minus_reg_a"))
    s.add_argument("--a", dest="system_a", required=True, choices=tuple(SYSTEM_CODES))
    s.add_argument("--b", dest="system_b", required=True, choices=tuple(SYSTEM_CODES))
    s.add_argument("--n", type=int, default=16)
    s.add_argument("--prefix", default="", help="conditioning bits, e.g. 01")
    s.add_argument("--beam-width", type=int, default=8)
    s.add_argument("--search-budget", type=int)
    s.add_argument("--exhaustive", action="store_true", help="also run the exhaustive oracle (small n)")

    s = common(sub.add_parser("exchangeability", help="max permutation deviation of ln Q",
                              description="CSV: n,m,max_deviation"))
    s.add_argument("--system", default="jeffreys", choices=tuple(SYSTEM_CODES))
    s.add_argument("--prior")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--m", type=int, default=0)
    s.add_argument("--target-tol", type=float, default=1e-12)

    s = common(sub.add_parser("kraft", help="block codes from length functions",
                              description="CSV: block,codeword with --lengths, else trial,failure"),
               family=False)
    s.add_argument("--lengths", help="symbol=length list, e.g. a=1.3,b=1.7")
    s.add_argument("--n", type=int, default=1, help="block length")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=2024)

    for name, desc in (("encode", "arithmetic-code a raw symbol file"), ("decode", "decode an encoded stream")):
        s = common(sub.add_parser(name, help=desc, description="CSV: n,m,bits,..."))
        s.add_argument("--system", default="jeffreys" if name == "encode" else None, choices=tuple(SYSTEM_CODES))
        s.add_argument("--prior")
        s.add_argument("--m", type=int, default=0)
        s.add_argument("--in", dest="input", required=True)
        s.add_argument("--out", dest="output", required=True)

    s = common(sub.add_parser("reproduce-paper", help="run the full acceptance suite",
                              description="CSV: criterion,status,measured,target,elapsed"), family=False)
    s.add_argument("--only", type=lambda t: [v.strip() for v in t.split(",")], help="criterion ids, e.g. 1,4,R")
    s.add_argument("--quiet", action="store_true")
    return p


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    sc = ns.subcommand
    get = lambda k, d=None: getattr(ns, k, d)
    c = ExperimentConfig(sc, family=get("family"), prior=get("prior"), system=get("system"),
                         m=get("m", 0) or 0, xbar=get("xbar"), seeds=get("seeds", 1) or 1, tol=ns.tol,
                         budget=ns.budget, csv_path=ns.csv_path, json_path=ns.json_path)
    o = c.options
    for k in ("target", "expect", "mu", "mu0", "mu1", "workers", "input", "output", "lengths", "trials", "seed",
              "system_a", "system_b", "beam_width", "search_budget", "exhaustive", "only"):
        if get(k) is not None:
            o[k] = get(k)
    if get("target_tol") is not None:
        o["target_tol"] = ns.target_tol
    if sc == "jeffreys" and ns.conditional:
        try:
            c.m, c.xbar = int(ns.conditional[0]), float(ns.conditional[1])
        except ValueError:
            raise ConfigError("--conditional takes an integer m and a float xbar") from None
    if sc == "posterior":
        o["ys"] = ns.y
    if sc == "regret":
        c.horizons = tuple([ns.n] if ns.n is not None else ns.n_schedule)
        if ns.prefix is not None:
            o["prefix"] = ns.prefix
    if sc in ("shtarkov",):
        c.horizons = tuple(ns.n)
    if sc in ("race", "exchangeability", "kraft"):
        c.horizons = (ns.n,)
    if sc == "race":
        if set(ns.prefix) - {"0", "1"}:
            raise ConfigError("--prefix is a string of 0/1 characters")
        o["prefix"] = [int(ch) for ch in ns.prefix]
    if sc == "reproduce-paper":
        o["verbose"] = not ns.quiet
    if sc == "encode" and c.system is None:
        c.system = "jeffreys"
    return c


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = config_from_args(ns)
        rep = run(config)
    except (ConfigError, DomainError, InfeasibleHorizon, NotYetDefined, NotNormalizable, KeyError,
            FileNotFoundError) as exc:
        print(f"xmdl {ns.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except XMDLError as exc:
        print(f"xmdl {ns.subcommand}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    json.dump(rep.to_dict(with_rows=not config.csv_path), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
