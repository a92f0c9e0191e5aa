"""Three-panel diagnostic for a jackstraw result.

Panel data: a kernel density estimate of the null F distribution on the
log10 scale with the observed F values overlaid, the sorted raw p-values,
and a one-sample Kolmogorov-Smirnov test of p-value uniformity.  Everything
is plain data; SVG rendering is a thin optional layer on top.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiagnosticReport",
    "kde",
    "silverman_bandwidth",
    "ks_uniform_test",
    "build_report",
    "render_svg_panels",
]

_GRID_POINTS = 512
# The alternating Kolmogorov series needs many terms near zero; below this
# argument the p-value is 1 to far better than the series' truncation error.
_KS_LAMBDA_FLOOR = 0.3
_KS_TERMS = 20


def silverman_bandwidth(samples):
    """Silverman's rule of thumb: 0.9 * min(sd, IQR/1.34) * n^(-1/5)."""
    x = np.asarray(samples, dtype=np.float64)
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    if spread <= 0.0:
        raise ValueError("all samples equal; bandwidth would be zero")
    return 0.9 * spread * x.size ** (-0.2)


def kde(samples, bandwidth="auto"):
    """Gaussian kernel density on a 512-point grid over [min-3h, max+3h].

    Returns (grid, density); the density integrates to ~1 over the grid.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"samples must be 1-D, got ndim={x.ndim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if x.size < 2:
        raise ValueError(f"need at least 2 samples, got {x.size}")
    if bandwidth == "auto":
        h = silverman_bandwidth(x)
    else:
        h = float(bandwidth)
        if h <= 0.0 or not math.isfinite(h):
            raise ValueError(f"bandwidth must be positive, got {bandwidth!r}")
    grid = np.linspace(x.min() - 3.0 * h, x.max() + 3.0 * h, _GRID_POINTS)
    density = np.zeros(_GRID_POINTS)
    # chunked so huge nulls do not materialize a grid x n matrix at once
    for lo in range(0, x.size, 8192):
        chunk = x[lo : lo + 8192]
        z = (grid[:, None] - chunk[None, :]) / h
        density += np.exp(-0.5 * z * z).sum(axis=1)
    density /= x.size * h * math.sqrt(2.0 * math.pi)
    return grid, density


def ks_uniform_test(pvalues):
    """One-sample Kolmogorov-Smirnov test against Uniform(0, 1).

    Returns (statistic, pvalue); the p-value uses the asymptotic Kolmogorov
    series with 20 terms, clamped to [0, 1].
    """
    p = np.asarray(pvalues, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("pvalues must be a non-empty 1-D array")
    if np.any(np.isnan(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("pvalues must lie in [0, 1]")
    n = p.size
    s = np.sort(p)
    steps = np.arange(1, n + 1) / n
    d_plus = float(np.max(steps - s))
    d_minus = float(np.max(s - (steps - 1.0 / n)))
    stat = max(d_plus, d_minus, 0.0)
    lam = math.sqrt(n) * stat
    if lam <= _KS_LAMBDA_FLOOR:
        return stat, 1.0
    total = 0.0
    for k in range(1, _KS_TERMS + 1):
        total += (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
    pvalue = min(1.0, max(0.0, 2.0 * total))
    return stat, pvalue


@dataclass(frozen=True)
class DiagnosticReport:
    """Panel data for one jackstraw result.

    F values enter the density panel on the log10 scale; zero and +inf
    values cannot be placed there and are reported as counts instead.
    """

    null_grid: np.ndarray            # log10-F grid (512,)
    null_density: np.ndarray         # (512,)
    observed_log10_f: np.ndarray     # finite positive observed F, log10
    observed_significant: np.ndarray # flags aligned with observed_log10_f
    sorted_pvalues: np.ndarray       # p_raw ascending
    ks_statistic: float
    ks_pvalue: float
    null_dropped_zero: int
    null_infinite: int
    observed_dropped_zero: int
    observed_infinite: int
    observed_infinite_significant: int

    def to_dict(self):
        return {
            "null_density": [
                [float(x), float(y)]
                for x, y in zip(self.null_grid, self.null_density)
            ],
            "observed_points": [
                [float(x), bool(f)]
                for x, f in zip(self.observed_log10_f, self.observed_significant)
            ],
            "sorted_pvalues": [
                [i + 1, float(p)] for i, p in enumerate(self.sorted_pvalues)
            ],
            "ks_statistic": float(self.ks_statistic),
            "ks_pvalue": float(self.ks_pvalue),
            "counts": {
                "null_dropped_zero": self.null_dropped_zero,
                "null_infinite": self.null_infinite,
                "observed_dropped_zero": self.observed_dropped_zero,
                "observed_infinite": self.observed_infinite,
                "observed_infinite_significant": self.observed_infinite_significant,
            },
        }


def build_report(result):
    """Assemble the three panels from a JackstrawResult."""
    f_null = np.asarray(result.f_null, dtype=np.float64)
    if f_null.size < 1:
        raise ValueError("result has an empty null")
    null_inf = int(np.sum(np.isinf(f_null)))
    finite_null = f_null[np.isfinite(f_null)]
    null_zero = int(np.sum(finite_null <= 0.0))
    usable_null = finite_null[finite_null > 0.0]
    if usable_null.size < 2:
        raise ValueError(
            f"only {usable_null.size} finite positive null values; cannot estimate a density"
        )
    grid, density = kde(np.log10(usable_null))

    f_obs = np.asarray(result.f_observed, dtype=np.float64)
    sig = np.asarray(result.significant, dtype=bool)
    obs_inf = np.isinf(f_obs)
    finite_obs = ~obs_inf
    obs_zero = finite_obs & (f_obs <= 0.0)
    keep = finite_obs & (f_obs > 0.0)

    stat, pvalue = ks_uniform_test(result.p_raw)
    return DiagnosticReport(
        null_grid=grid,
        null_density=density,
        observed_log10_f=np.log10(f_obs[keep]),
        observed_significant=sig[keep],
        sorted_pvalues=np.sort(np.asarray(result.p_raw, dtype=np.float64)),
        ks_statistic=stat,
        ks_pvalue=pvalue,
        null_dropped_zero=null_zero,
        null_infinite=null_inf,
        observed_dropped_zero=int(np.sum(obs_zero)),
        observed_infinite=int(np.sum(obs_inf)),
        observed_infinite_significant=int(np.sum(obs_inf & sig)),
    )


# ---------------------------------------------------------------------------
# SVG rendering.  Hand-rolled so the output is a pure function of the report
# (no plotting library, no embedded dates).

_W, _H = 480, 360
_L, _R, _T, _B = 60, 20, 30, 50


def _xmap(v, lo, hi):
    if hi == lo:
        return _L + (_W - _L - _R) / 2.0
    return _L + (v - lo) * (_W - _L - _R) / (hi - lo)


def _ymap(v, lo, hi):
    if hi == lo:
        return _H - _B - (_H - _T - _B) / 2.0
    return _H - _B - (v - lo) * (_H - _T - _B) / (hi - lo)


def _fmt(v):
    return f"{v:.4g}"


def _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi):
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{_L}" y1="{_H - _B}" x2="{_W - _R}" y2="{_H - _B}" stroke="black"/>',
        f'<line x1="{_L}" y1="{_T}" x2="{_L}" y2="{_H - _B}" stroke="black"/>',
        f'<text x="{(_L + _W - _R) / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{(_T + _H - _B) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {(_T + _H - _B) / 2})">{ylabel}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = xlo + frac * (xhi - xlo)
        yv = ylo + frac * (yhi - ylo)
        xp = _xmap(xv, xlo, xhi)
        yp = _ymap(yv, ylo, yhi)
        parts.append(
            f'<text x="{xp:.1f}" y="{_H - _B + 16}" text-anchor="middle">{_fmt(xv)}</text>'
        )
        parts.append(
            f'<text x="{_L - 6}" y="{yp:.1f}" text-anchor="end" dominant-baseline="middle">{_fmt(yv)}</text>'
        )
    return parts


def _polyline(xs, ys, xlo, xhi, ylo, yhi, color, width=1.5):
    pts = " ".join(
        f"{_xmap(x, xlo, xhi):.2f},{_ymap(y, ylo, yhi):.2f}" for x, y in zip(xs, ys)
    )
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'


def render_svg_panels(report):
    """Render the three panels as standalone SVG documents.

    Returns {"null_density": svg, "sorted_pvalues": svg, "ks_uniformity": svg}.
    """
    panels = {}

    # Panel 1: null density with observed F values on the baseline.
    xlo = float(min(report.null_grid.min(), report.observed_log10_f.min()) if report.observed_log10_f.size else report.null_grid.min())
    xhi = float(max(report.null_grid.max(), report.observed_log10_f.max()) if report.observed_log10_f.size else report.null_grid.max())
    ylo, yhi = 0.0, float(report.null_density.max()) * 1.05
    parts = _frame("Null F density (log10 scale)", "log10 F", "density", xlo, xhi, ylo, yhi)
    parts.append(_polyline(report.null_grid, report.null_density, xlo, xhi, ylo, yhi, "black"))
    base = _ymap(0.0, ylo, yhi)
    for x, flag in zip(report.observed_log10_f, report.observed_significant):
        color = "#d62728" if flag else "#1f77b4"
        parts.append(
            f'<circle cx="{_xmap(float(x), xlo, xhi):.2f}" cy="{base:.2f}" r="3" '
            f'fill="{color}" fill-opacity="0.55"/>'
        )
    n_sig = int(np.sum(report.observed_significant)) + report.observed_infinite_significant
    parts.append(
        f'<text x="{_W - _R}" y="{_T + 12}" text-anchor="end">'
        f"significant: {n_sig}, off-scale +inf: {report.observed_infinite}</text>"
    )
    parts.append("</svg>")
    panels["null_density"] = "\n".join(parts)

    # Panel 2: sorted p-values against their rank.
    n = report.sorted_pvalues.size
    ranks = np.arange(1, n + 1)
    parts = _frame("Sorted raw p-values", "rank", "p-value", 1, max(n, 2), 0.0, 1.0)
    parts.append(_polyline([1, max(n, 2)], [0.0, 1.0], 1, max(n, 2), 0.0, 1.0, "#aaaaaa", 1.0))
    parts.append(_polyline(ranks, report.sorted_pvalues, 1, max(n, 2), 0.0, 1.0, "#1f77b4"))
    parts.append("</svg>")
    panels["sorted_pvalues"] = "\n".join(parts)

    # Panel 3: empirical CDF of p-values against the uniform CDF.
    parts = _frame("K-S uniformity of p-values", "p-value", "empirical CDF", 0.0, 1.0, 0.0, 1.0)
    parts.append(_polyline([0.0, 1.0], [0.0, 1.0], 0.0, 1.0, 0.0, 1.0, "#aaaaaa", 1.0))
    xs = np.concatenate([[0.0], np.repeat(report.sorted_pvalues, 2), [1.0]])
    ecdf = np.arange(0, n + 1) / n
    ys = np.concatenate([[0.0], np.repeat(ecdf[:-1], 2)[1:], [ecdf[-1], 1.0]])
    parts.append(_polyline(xs, ys, 0.0, 1.0, 0.0, 1.0, "black"))
    parts.append(
        f'<text x="{_L + 8}" y="{_T + 12}">D = {_fmt(report.ks_statistic)}, '
        f"p = {report.ks_pvalue:.3g}</text>"
    )
    parts.append("</svg>")
    panels["ks_uniformity"] = "\n".join(parts)
    return panels
