"""Adaptive quadrature over possibly improper intervals with divergence detection.

The interval is split into a compact core around a center point and two
tails.  Each tail is covered by a sequence of windows whose size grows
geometrically towards the endpoint (doubling length towards an infinite end,
halving distance towards a finite end).  Every window is integrated with
QUADPACK; the sequence of window contributions is then used to decide
between a finite value (contributions decay, remainder extrapolated
geometrically), divergence (partial sums explode or contributions stop
decaying) and an inconclusive outcome.

All integrands are assumed nonnegative near improper endpoints.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo

DEFAULT_TOL = 1e-10
DEFAULT_CAP = 1e6
DEFAULT_WINDOW_FRACTION = 1e-3
DEFAULT_BUDGET = 2**20
# Tails decaying more slowly than x**(-1 - 1.4e-3) are indistinguishable from
# divergent ones under this ratio test.
DEFAULT_STALL_RATIO = 0.999
DEFAULT_STALL_WINDOWS = 8
MAX_WINDOWS = 1200
# Relative distance to a finite endpoint below which windows stop and the
# remainder is handed to a single extrapolating quadrature.
_HORIZON = 1e-4


class Verdict(str, enum.Enum):
    FINITE = "finite"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class QuadratureResult:
    verdict: Verdict
    value: float = math.nan
    error_estimate: float = math.inf
    diagnostics: tuple[str, ...] = ()
    log_value: float | None = None
    nevals: int = 0

    @property
    def finite(self) -> bool:
        return self.verdict is Verdict.FINITE

    def log(self) -> float:
        """Natural log of the value, using the stored log when the value itself overflowed."""
        if self.log_value is not None:
            return self.log_value
        return math.log(self.value) if self.value > 0 else -math.inf


@dataclass
class _Tail:
    verdict: Verdict
    value: float = 0.0
    error: float = 0.0
    notes: list[str] = field(default_factory=list)
    nevals: int = 0


def _safe(f):
    def g(x):
        try:
            return f(x)
        except (ZeroDivisionError, OverflowError):
            return math.inf
        except ValueError:
            return math.nan
    return g


def _quad(f, lo, hi, tol, points=None):
    f = _safe(f)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = _spi.quad(
            f, lo, hi, epsabs=tol * 1e-3, epsrel=max(tol * 1e-2, 1e-14),
            limit=200, points=points, full_output=1,
        )
    val, err, info = out[0], out[1], out[2]
    return float(val), float(err), int(info.get("neval", 0))


def _tail(f, start, end, side, tol, scale, cap, ref, window_fraction,
          stall_ratio, stall_windows, budget, label) -> _Tail:
    """Integrate from `start` towards `end` over geometrically growing windows."""
    out = _Tail(Verdict.INCONCLUSIVE)
    if start == end:
        out.verdict = Verdict.FINITE
        return out
    infinite = math.isinf(end)
    dist = abs(end - start)
    contribs: list[float] = []
    prev_tail = None
    finished = False
    for k in range(MAX_WINDOWS):
        if infinite:
            if k >= 1020:
                return _collapse(out, contribs, prev_tail, tol, ref, stall_ratio, label)
            near = scale * (2.0**k - 1.0)
            far = scale * (2.0 ** (k + 1) - 1.0)
            lo, hi = (start + near, start + far) if side > 0 else (start - far, start - near)
        else:
            inner = dist * 2.0**-k
            outer = dist * 2.0 ** (-k - 1)
            lo, hi = (end - inner, end - outer) if side > 0 else (end + outer, end + inner)
        if not finished and not infinite and inner < _HORIZON * max(1.0, abs(end)) \
                and len(contribs) >= 4 and 0 < contribs[-1] < stall_ratio * contribs[-2]:
            finished = True
            if _finish_at_endpoint(f, out, lo if side > 0 else hi, end, tol, ref):
                return out
        touches = (not infinite) and (hi >= end if side > 0 else lo <= end)
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi or touches:
            return _collapse(out, contribs, prev_tail, tol, ref, stall_ratio, label)
        val, err, nev = _quad(f, lo, hi, tol)
        out.nevals += nev
        if not math.isfinite(val):
            out.verdict = Verdict.DIVERGENT if not math.isnan(val) or math.isinf(err) else Verdict.INCONCLUSIVE
            out.notes.append(f"{label}: integrand overflow in window [{lo:.6g}, {hi:.6g}]")
            if math.isnan(val):
                out.verdict = _nan_verdict(f, lo, hi)
            return out
        out.value += val
        out.error += err
        contribs.append(val)
        if out.nevals > budget:
            out.notes.append(f"{label}: evaluation budget exhausted after {k + 1} windows")
            return out
        if out.value > cap * ref and val > window_fraction * out.value:
            out.verdict = Verdict.DIVERGENT
            out.notes.append(f"{label}: partial sum {out.value:.3g} passed cap with last window "
                             f"{val / out.value:.3g} of total")
            return out
        if len(contribs) > stall_windows and val > 0:
            recent = contribs[-(stall_windows + 1):]
            if all(b > 0 and a / b >= stall_ratio for b, a in zip(recent, recent[1:])):
                out.verdict = Verdict.DIVERGENT
                out.notes.append(f"{label}: window contributions stopped decaying "
                                 f"(ratio {recent[-1] / recent[-2]:.6f}) after {k + 1} windows")
                return out
        if len(contribs) >= 4:
            local_tol = 0.25 * tol * max(1.0, ref + out.value)
            if contribs[-1] == 0.0 and contribs[-2] == 0.0 and contribs[-3] == 0.0:
                out.verdict = Verdict.FINITE
                return out
            pv = contribs[-2]
            if pv > 0 and val < pv:
                r = val / pv
                tail = val * r / (1.0 - r)
                extrap_err = abs(tail - (prev_tail - val)) if prev_tail is not None else math.inf
                prev_tail = tail
                if tail + min(extrap_err, tail) <= local_tol and extrap_err <= local_tol:
                    out.value += tail
                    out.error += extrap_err
                    out.verdict = Verdict.FINITE
                    return out
            else:
                prev_tail = None
    out.notes.append(f"{label}: window limit reached")
    return out


def _finish_at_endpoint(f, out, x0, end, tol, ref) -> bool:
    """Try to close a decaying finite-endpoint tail with one extrapolating QUADPACK call."""
    lo, hi = (x0, end) if x0 < end else (end, x0)
    val, err, nev = _quad(f, lo, hi, tol)
    out.nevals += nev
    if math.isfinite(val) and math.isfinite(err) and err <= 0.5 * tol * max(1.0, ref + out.value):
        out.value += val
        out.error += err
        out.verdict = Verdict.FINITE
        return True
    return False


def _nan_verdict(f, lo, hi):
    xs = np.linspace(lo, hi, 9)
    vals = [f(x) for x in xs]
    if any(math.isinf(v) for v in vals):
        return Verdict.DIVERGENT
    return Verdict.INCONCLUSIVE


def _collapse(out, contribs, prev_tail, tol, ref, stall_ratio, label):
    """Windows hit floating-point resolution before the tail converged."""
    if len(contribs) >= 2 and contribs[-2] > 0:
        r = contribs[-1] / contribs[-2]
        if r < stall_ratio:
            tail = contribs[-1] * r / (1.0 - r)
            extrap_err = abs(tail - (prev_tail - contribs[-1])) if prev_tail is not None else tail
            out.value += tail
            out.error += extrap_err
            if out.error <= 0.5 * tol * max(1.0, ref + out.value):
                out.verdict = Verdict.FINITE
            else:
                out.notes.append(f"{label}: resolution limit with residual {tail:.3g}")
            return out
        out.verdict = Verdict.DIVERGENT
        out.notes.append(f"{label}: contributions still growing at resolution limit")
        return out
    if all(c == 0.0 for c in contribs[-3:]):
        out.verdict = Verdict.FINITE
        return out
    out.notes.append(f"{label}: resolution limit reached")
    return out


def _default_center(a, b, scale):
    if math.isfinite(a) and math.isfinite(b):
        return 0.5 * (a + b)
    if math.isfinite(a):
        return a + scale
    if math.isfinite(b):
        return b - scale
    return 0.0


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    *,
    center: float | None = None,
    scale: float = 1.0,
    cap: float = DEFAULT_CAP,
    window_fraction: float = DEFAULT_WINDOW_FRACTION,
    budget: int = DEFAULT_BUDGET,
    stall_ratio: float = DEFAULT_STALL_RATIO,
    stall_windows: int = DEFAULT_STALL_WINDOWS,
) -> QuadratureResult:
    """Integrate a nonnegative `f` over (a, b); either endpoint may be infinite.

    `tol` bounds the reported error as max(tol, tol * |value|).  `scale` is
    the first window length on infinite tails and the half-width of the core.
    """
    a, b = float(a), float(b)
    if not a < b:
        if a == b:
            return QuadratureResult(Verdict.FINITE, 0.0, 0.0)
        raise ValueError("integrate requires a < b")
    c = _default_center(a, b, scale) if center is None else float(center)
    if not a < c < b:
        raise ValueError(f"center {c} not inside ({a}, {b})")
    lo_c = c - scale if math.isinf(a) else c - 0.5 * (c - a)
    hi_c = c + scale if math.isinf(b) else c + 0.5 * (b - c)
    core, core_err, nev = _quad(f, lo_c, hi_c, tol, points=[c])
    if not math.isfinite(core):
        verdict = Verdict.DIVERGENT if math.isinf(core) else _nan_verdict(f, lo_c, hi_c)
        return QuadratureResult(verdict, diagnostics=("core: integrand not finite",), nevals=nev)
    ref = max(abs(core), 1.0)
    kw = dict(tol=tol, scale=scale, cap=cap, ref=ref, window_fraction=window_fraction,
              stall_ratio=stall_ratio, stall_windows=stall_windows, budget=budget)
    left = _tail(f, lo_c, a, -1, label="left", **kw)
    right = _tail(f, hi_c, b, +1, label="right", **kw)
    notes = tuple(left.notes + right.notes)
    nevals = nev + left.nevals + right.nevals
    verdicts = {left.verdict, right.verdict}
    if Verdict.DIVERGENT in verdicts:
        return QuadratureResult(Verdict.DIVERGENT, math.inf, 0.0, notes, nevals=nevals)
    value = core + left.value + right.value
    err = core_err + left.error + right.error
    if Verdict.INCONCLUSIVE in verdicts:
        return QuadratureResult(Verdict.INCONCLUSIVE, value, err, notes, nevals=nevals)
    if err > tol * max(1.0, abs(value)):
        return QuadratureResult(Verdict.INCONCLUSIVE, value, err,
                                notes + (f"error estimate {err:.3g} above tolerance",), nevals=nevals)
    return QuadratureResult(Verdict.FINITE, value, err, notes, nevals=nevals)


def _probe_points(a, b, c0, scale, depth=60):
    pts = [c0]
    for j in range(1, depth + 1):
        if math.isinf(a):
            pts.append(c0 - scale * (2.0**j - 1.0))
        else:
            pts.append(a + (c0 - a) * 2.0**-j)
        if math.isinf(b):
            pts.append(c0 + scale * (2.0**j - 1.0))
        else:
            pts.append(b - (b - c0) * 2.0**-j)
    return sorted(p for p in pts if a < p < b)


def integrate_log(
    logf: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    *,
    center: float | None = None,
    scale: float = 1.0,
    **kwargs,
) -> QuadratureResult:
    """Integrate exp(logf) over (a, b) after shifting logf by its (probed) maximum.

    The shift keeps the integrand near unit height, so the divergence cap is
    measured relative to the peak.  The unshifted value is returned in
    `value` (may overflow to inf for a finite result; `log_value` stays
    exact in that case).
    """
    a, b = float(a), float(b)
    c0 = _default_center(a, b, scale) if center is None else float(center)
    pts = _probe_points(a, b, c0, scale)
    vals = []
    for p in pts:
        try:
            v = float(logf(p))
        except (ValueError, OverflowError, ZeroDivisionError):
            v = math.nan
        vals.append(v)
    finite = [(v, p) for v, p in zip(vals, pts) if math.isfinite(v)]
    c, shift = c0, None
    if finite:
        vmax, pmax = max(finite)
        idx = pts.index(pmax)
        # recentre only on a genuine interior peak with trustworthy neighbours
        peak = 0 < idx < len(pts) - 1 and math.isfinite(vals[idx - 1]) and math.isfinite(vals[idx + 1])
        if peak:
            lo, hi = pts[max(idx - 1, 0)], pts[min(idx + 1, len(pts) - 1)]
            try:
                opt = _spo.minimize_scalar(lambda t: -logf(t), bounds=(lo, hi), method="bounded",
                                           options={"xatol": 1e-10 * max(1.0, abs(pmax))})
                if math.isfinite(opt.fun) and -opt.fun >= vmax and lo < opt.x < hi:
                    pmax, vmax = float(opt.x), float(-opt.fun)
            except (ValueError, OverflowError):
                pass
            c, shift = pmax, vmax
        else:
            v0 = logf(c0)
            shift = v0 if math.isfinite(v0) else vmax
    if shift is None:
        return QuadratureResult(Verdict.INCONCLUSIVE, diagnostics=("log-integrand not finite on probes",))

    def f(x):
        v = logf(x)
        return math.exp(v - shift) if v - shift < 709.0 else math.inf

    res = integrate(f, a, b, tol, center=c, scale=scale, **kwargs)
    if res.verdict is Verdict.DIVERGENT:
        return replace(res, log_value=math.inf)
    if res.value > 0:
        log_value = shift + math.log(res.value)
        value = math.exp(log_value) if log_value < 709.0 else math.inf
    else:
        log_value, value = -math.inf, 0.0
    err = res.error_estimate * math.exp(min(shift, 709.0))
    return replace(res, value=value, error_estimate=err, log_value=log_value)
