"""Post-processing of Lanczos coefficient sequences.

Raw open-system coefficient sequences carry isolated near-breakdown
spikes; ``remove_outliers`` rejects them with a sliding-window
median/MAD criterion and ``smooth`` extracts the averaged trend with a
centered moving average.
"""

from dataclasses import dataclass

import numpy as np

MAD_SCALE = 1.4826  # consistency factor: MAD -> sigma for normal data


@dataclass(frozen=True)
class FilterConfig:
    outlier_window: int = 9
    outlier_k: float = 3.0
    smooth_window: int = 7

    def __post_init__(self):
        if self.outlier_window < 3 or self.outlier_window % 2 == 0:
            raise ValueError("outlier_window must be an odd integer >= 3")
        if self.outlier_k <= 0:
            raise ValueError("outlier_k must be positive")
        if self.smooth_window < 1 or self.smooth_window % 2 == 0:
            raise ValueError("smooth_window must be an odd integer >= 1")


def _outlier_sweep(x, cfg):
    """One sliding-window median/MAD pass; returns (cleaned, indices)."""
    n = x.size
    w = cfg.outlier_window
    half = w // 2
    cleaned = x.copy()
    outliers = []
    for i in range(n):
        lo = max(0, min(i - half, n - w))
        win = x[lo:lo + w]
        med = np.median(win)
        mad = np.median(np.abs(win - med))
        dev = abs(x[i] - med)
        if mad == 0.0:
            bad = dev > 0.0
        else:
            bad = dev > cfg.outlier_k * MAD_SCALE * mad
        if bad:
            cleaned[i] = med
            outliers.append(i)
    return cleaned, outliers


def remove_outliers(series, cfg=None):
    """Replace spikes by the local window median.

    A point is an outlier when it deviates from the median of its
    centered window by more than ``outlier_k * 1.4826 * MAD``.  When the
    window MAD is zero, any nonzero deviation from the median is flagged
    (so constant stretches pass untouched but exact deviants are caught).
    Sweeps repeat until no further point is flagged, making the filter
    idempotent; the reported index list is the union over sweeps.
    Returns (cleaned copy, sorted outlier index array).
    """
    cfg = cfg or FilterConfig()
    x = np.asarray(series, dtype=float)
    if x.size < cfg.outlier_window:
        raise ValueError(
            f"series length {x.size} < outlier_window {cfg.outlier_window}")
    cleaned = x.copy()
    flagged = set()
    for _ in range(x.size):
        cleaned, idx = _outlier_sweep(cleaned, cfg)
        if not idx:
            break
        flagged.update(idx)
    return cleaned, np.asarray(sorted(flagged), dtype=int)


def smooth(series, cfg=None):
    """Centered moving average with the window shrinking at the edges.

    The window stays centered (no phase shift): at distance d < half
    from either edge the average runs over 2d + 1 points.  Window 1 is
    the identity.
    """
    cfg = cfg or FilterConfig()
    x = np.asarray(series, dtype=float)
    w = cfg.smooth_window
    if x.size < w:
        raise ValueError(f"series length {x.size} < smooth_window {w}")
    if w == 1:
        return x.copy()
    half = w // 2
    out = np.empty_like(x)
    for i in range(x.size):
        d = min(i, x.size - 1 - i, half)
        out[i] = x[i - d:i + d + 1].mean()
    return out


def filter_series(series, cfg=None):
    """Outlier removal then smoothing; returns (cleaned, smoothed, idx)."""
    cfg = cfg or FilterConfig()
    cleaned, idx = remove_outliers(series, cfg)
    return cleaned, smooth(cleaned, cfg), idx


def filtered_to_csv(raw, cleaned, smoothed):
    """CSV text `n,raw,cleaned,smoothed` with 17 significant digits."""
    lines = ["n,raw,cleaned,smoothed"]
    for i in range(len(raw)):
        lines.append("%d,%.17g,%.17g,%.17g" % (i, raw[i], cleaned[i],
                                               smoothed[i]))
    return "\n".join(lines) + "\n"


def read_series_csv(text):
    """Read the first numeric column after `n` from filter CSV input."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    header = lines[0].split(",")
    if header[0] != "n" or len(header) < 2:
        raise ValueError("expected CSV header starting with 'n,<series>'")
    vals = [float(ln.split(",")[1]) for ln in lines[1:]]
    return np.asarray(vals, dtype=float)
