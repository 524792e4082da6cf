"""Hot pixel kernels: numba-jitted loops with a pure-numpy fallback.

The numba path is used when numba imports and the env flag allows it; set
``FVDLENS_NUMBA=0`` to force the numpy path. Both paths accumulate in the
same order, so they agree bitwise (see tests and benchmarks/bench_kernels.py).
All arithmetic is float64.
"""

from __future__ import annotations

import os

import numpy as np


def _env_wants_numba() -> bool:
    return os.environ.get("FVDLENS_NUMBA", "1").strip().lower() not in ("0", "false", "off", "no")


try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _env_wants_numba()


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# -- reflect addressing (edge-inclusive: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...)


def _reflect_index_array(idx: np.ndarray, n: int) -> np.ndarray:
    period = 2 * n
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - 1 - idx, idx)


def _warp_bilinear_loops(frame, dx, dy, out):
    h, w, c = frame.shape
    period_y = 2 * h
    period_x = 2 * w
    for y in range(h):
        for x in range(w):
            sx = x - dx[y, x]
            sy = y - dy[y, x]
            x0 = int(np.floor(sx))
            y0 = int(np.floor(sy))
            fx = sx - x0
            fy = sy - y0
            x1 = x0 + 1
            y1 = y0 + 1
            x0 = x0 % period_x
            if x0 >= w:
                x0 = period_x - 1 - x0
            x1 = x1 % period_x
            if x1 >= w:
                x1 = period_x - 1 - x1
            y0 = y0 % period_y
            if y0 >= h:
                y0 = period_y - 1 - y0
            y1 = y1 % period_y
            if y1 >= h:
                y1 = period_y - 1 - y1
            w00 = (1.0 - fy) * (1.0 - fx)
            w01 = (1.0 - fy) * fx
            w10 = fy * (1.0 - fx)
            w11 = fy * fx
            for ch in range(c):
                out[y, x, ch] = (
                    frame[y0, x0, ch] * w00
                    + frame[y0, x1, ch] * w01
                    + frame[y1, x0, ch] * w10
                    + frame[y1, x1, ch] * w11
                )
    return out


def _warp_bilinear_numpy(frame: np.ndarray, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    h, w, _ = frame.shape
    xs = np.arange(w, dtype=np.float64)[None, :] - dx
    ys = np.arange(h, dtype=np.float64)[:, None] - dy
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    x1 = x0 + 1
    y1 = y0 + 1
    x0 = _reflect_index_array(x0, w)
    x1 = _reflect_index_array(x1, w)
    y0 = _reflect_index_array(y0, h)
    y1 = _reflect_index_array(y1, h)
    w00 = ((1.0 - fy) * (1.0 - fx))[..., None]
    w01 = ((1.0 - fy) * fx)[..., None]
    w10 = (fy * (1.0 - fx))[..., None]
    w11 = (fy * fx)[..., None]
    return (
        frame[y0, x0] * w00
        + frame[y0, x1] * w01
        + frame[y1, x0] * w10
        + frame[y1, x1] * w11
    )


def _conv2d_reflect_loops(img, kernel, out):
    h, w = img.shape
    kh, kw = kernel.shape
    ry = kh // 2
    rx = kw // 2
    # collect nonzero taps in scan order (matches the numpy path's order)
    n_taps = 0
    for ky in range(kh):
        for kx in range(kw):
            if kernel[ky, kx] != 0.0:
                n_taps += 1
    tap_dy = np.empty(n_taps, np.int64)
    tap_dx = np.empty(n_taps, np.int64)
    tap_v = np.empty(n_taps, np.float64)
    i = 0
    for ky in range(kh):
        for kx in range(kw):
            kv = kernel[ky, kx]
            if kv != 0.0:
                tap_dy[i] = ky - ry
                tap_dx[i] = kx - rx
                tap_v[i] = kv
                i += 1
    period_y = 2 * h
    period_x = 2 * w
    y0, y1 = ry, h - ry
    x0, x1 = rx, w - rx
    # interior: tap-outer with contiguous inner loop; accumulation order per
    # pixel is tap order, matching the numpy path bitwise
    for y in range(y0, y1):
        for x in range(x0, x1):
            out[y, x] = 0.0
    for t in range(n_taps):
        v = tap_v[t]
        dy = tap_dy[t]
        dx = tap_dx[t]
        for y in range(y0, y1):
            for x in range(x0, x1):
                out[y, x] += v * img[y + dy, x + dx]
    # border: per-pixel tap loop with reflect folding
    for y in range(h):
        inner_y = y0 <= y < y1
        for x in range(w):
            if inner_y and x0 <= x < x1:
                continue
            acc = 0.0
            for t in range(n_taps):
                yy = (y + tap_dy[t]) % period_y
                if yy >= h:
                    yy = period_y - 1 - yy
                xx = (x + tap_dx[t]) % period_x
                if xx >= w:
                    xx = period_x - 1 - xx
                acc += tap_v[t] * img[yy, xx]
            out[y, x] = acc
    return out


def _conv2d_reflect_numpy(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    h, w = img.shape
    kh, kw = kernel.shape
    ry = kh // 2
    rx = kw // 2
    padded = np.pad(img, ((ry, ry), (rx, rx)), mode="symmetric")
    out = np.zeros((h, w), dtype=np.float64)
    for ky in range(kh):
        for kx in range(kw):
            kv = kernel[ky, kx]
            if kv == 0.0:
                continue
            out += kv * padded[ky : ky + h, kx : kx + w]
    return out


def _conv1d_reflect_axis0_loops(img, kernel, out):
    h, w = img.shape
    k = kernel.shape[0]
    r = k // 2
    period = 2 * h
    y0, y1 = r, h - r
    for y in range(y0, y1):
        for x in range(w):
            out[y, x] = 0.0
    for t in range(k):
        v = kernel[t]
        dy = t - r
        for y in range(y0, y1):
            for x in range(w):
                out[y, x] += v * img[y + dy, x]
    for y in range(h):
        if y0 <= y < y1:
            continue
        for x in range(w):
            acc = 0.0
            for t in range(k):
                yy = (y + t - r) % period
                if yy >= h:
                    yy = period - 1 - yy
                acc += kernel[t] * img[yy, x]
            out[y, x] = acc
    return out


def _conv1d_reflect_axis0_numpy(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    h, w = img.shape
    r = kernel.shape[0] // 2
    padded = np.pad(img, ((r, r), (0, 0)), mode="symmetric")
    out = np.zeros((h, w), dtype=np.float64)
    for t in range(kernel.shape[0]):
        out += kernel[t] * padded[t : t + h, :]
    return out


if NUMBA_AVAILABLE:
    _warp_bilinear_jit = njit(cache=True)(_warp_bilinear_loops)
    _conv2d_reflect_jit = njit(cache=True)(_conv2d_reflect_loops)
    _conv1d_reflect_axis0_jit = njit(cache=True)(_conv1d_reflect_axis0_loops)


def warp_bilinear(frame: np.ndarray, dx: np.ndarray, dy: np.ndarray, force: str | None = None) -> np.ndarray:
    """Bilinearly sample ``frame`` at (x - dx, y - dy) with reflect borders.

    frame: H x W x C float64; dx, dy: H x W float64. Returns H x W x C float64.
    """
    use = USE_NUMBA if force is None else (force == "numba")
    if use:
        out = np.empty_like(frame)
        return _warp_bilinear_jit(frame, dx, dy, out)
    return _warp_bilinear_numpy(frame, dx, dy)


def conv2d_reflect(img: np.ndarray, kernel: np.ndarray, force: str | None = None) -> np.ndarray:
    """2-D correlation of one channel with reflect borders, skipping zero taps."""
    use = USE_NUMBA if force is None else (force == "numba")
    if use:
        out = np.empty_like(img)
        return _conv2d_reflect_jit(img, kernel, out)
    return _conv2d_reflect_numpy(img, kernel)


def conv1d_reflect_axis0(img: np.ndarray, kernel: np.ndarray, force: str | None = None) -> np.ndarray:
    use = USE_NUMBA if force is None else (force == "numba")
    if use:
        out = np.empty_like(img)
        return _conv1d_reflect_axis0_jit(img, kernel, out)
    return _conv1d_reflect_axis0_numpy(img, kernel)


def smooth_gaussian_reflect(img: np.ndarray, sigma: float, force: str | None = None) -> np.ndarray:
    """Separable truncated-Gaussian smoothing (radius 3*sigma), reflect borders."""
    radius = max(1, int(np.ceil(3.0 * sigma)))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (t / sigma) ** 2)
    kernel /= kernel.sum()
    tmp = conv1d_reflect_axis0(img, kernel, force=force)
    return conv1d_reflect_axis0(np.ascontiguousarray(tmp.T), kernel, force=force).T
