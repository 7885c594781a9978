"""Uniform-grid piecewise-linear signals and exact exponential-kernel quadrature.

Every convolution against e^(alpha t) in this package reduces to the one
segment integral

    int_{r0}^{r1} e^(alpha (T - r)) u(r) dr
        = e^(alpha (T - r1)) * h * (u0 * phi1(alpha h) + (u1 - u0) * phi2(alpha h)),

h = r1 - r0, which is exact for the linear interpolant of (u0, u1). All
discretization error therefore comes from representing a signal on its grid,
never from quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import DimensionError, DomainError, SchemaError

# Below this |z| the closed forms (e^z-1)/z, (e^z-1-z)/z^2 cancel; the Taylor
# tail beyond 18 terms is < 1e-22 on |z| < 0.5.
_PHI_SERIES_SWITCH = 0.5
_PHI_TERMS = 18
_PHI1_COEF = [1.0 / math.factorial(j + 1) for j in range(_PHI_TERMS)]
_PHI2_COEF = [1.0 / math.factorial(j + 2) for j in range(_PHI_TERMS)]

_GRID_REL_TOL = 1e-9


def _phi_series(z: np.ndarray, coef) -> np.ndarray:
    acc = np.full_like(z, coef[-1])
    for c in coef[-2::-1]:
        acc = acc * z + c
    return acc


def _phi(z, coef, closed):
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty_like(arr)
    small = np.abs(arr) < _PHI_SERIES_SWITCH
    if np.any(small):
        out[small] = _phi_series(arr[small], coef)
    if np.any(~small):
        out[~small] = closed(arr[~small])
    return out[0] if scalar else out


def phi1(z):
    """phi1(z) = (e^z - 1)/z, the exponential-integrator kernel of order 1."""
    return _phi(z, _PHI1_COEF, lambda w: (np.exp(w) - 1.0) / w)


def phi2(z):
    """phi2(z) = (e^z - 1 - z)/z^2, the exponential-integrator kernel of order 2."""
    return _phi(z, _PHI2_COEF, lambda w: (np.exp(w) - 1.0 - w) / (w * w))


def exp_segment_integral(alpha: complex, T: float, r0: float, r1: float,
                         u0: complex, u1: complex) -> complex:
    """Exact value of int_{r0}^{r1} e^(alpha (T - r)) u(r) dr, u linear on [r0, r1].

    Only r0 < r1 is required; T is the kernel anchor and may lie anywhere
    (the Laplace transform reuses this with T = 0 and alpha = lambda).
    """
    if not r0 < r1:
        raise DomainError(f"segment requires r0 < r1, got [{r0}, {r1}]")
    alpha = complex(alpha)
    h = r1 - r0
    w = alpha * h
    seg = complex(u0) * phi1(w) + (complex(u1) - complex(u0)) * phi2(w)
    return complex(np.exp(alpha * (T - r1)) * h * seg)


@dataclass(frozen=True)
class Signal:
    """Piecewise-linear vector signal on the uniform grid t0 + k*dt, zero outside."""

    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt}")
        arr = np.asarray(self.samples)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise DimensionError(f"samples must be (n, d) with n >= 1, got {arr.shape}")
        if not np.iscomplexobj(arr):
            arr = arr.astype(float)
        if not np.all(np.isfinite(arr)):
            raise DomainError("samples must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def end(self) -> float:
        return self.t0 + (self.n_samples - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)


def values_at(sig: Signal, ts) -> np.ndarray:
    """Interpolant values at times ts, zero outside the grid. Shape (len(ts), d)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    n, d = sig.samples.shape
    pos = (ts - sig.t0) / sig.dt
    inside = (pos >= -_GRID_REL_TOL) & (pos <= n - 1 + _GRID_REL_TOL)
    if n == 1:
        out = np.where(inside[:, None], sig.samples[0], 0.0)
        return out.astype(sig.samples.dtype)
    k = np.clip(np.floor(pos).astype(int), 0, n - 2)
    frac = np.clip(pos - k, 0.0, 1.0)
    vals = (1.0 - frac)[:, None] * sig.samples[k] + frac[:, None] * sig.samples[k + 1]
    vals[~inside] = 0.0
    return vals


def value_at(sig: Signal, t: float) -> np.ndarray:
    return values_at(sig, [t])[0]


def resample(sig: Signal, t0: float, dt: float, n: int) -> Signal:
    """Sample the interpolant onto a new grid (exact when grids are aligned)."""
    if n < 1:
        raise DimensionError(f"resample needs n >= 1, got {n}")
    if t0 == sig.t0 and dt == sig.dt and n <= sig.n_samples:
        return Signal(t0, dt, sig.samples[:n])
    return Signal(t0, dt, values_at(sig, t0 + dt * np.arange(n)))


def shift_signal(sig: Signal, delta: float) -> Signal:
    """Translate right by delta (exact grid move; zero-filling is implicit)."""
    return Signal(sig.t0 + delta, sig.dt, sig.samples)


def lp_norm(sig: Signal, p: float) -> float:
    """Lp norm of the interpolant over the grid support.

    Simpson per segment, which is exact for p = 2 (the integrand is then
    piecewise quadratic); other p are quadrature approximations in the same
    rule.
    """
    if p < 1:
        raise DomainError(f"Lp norm requires p >= 1, got {p}")
    if sig.n_samples < 2:
        return 0.0
    a = sig.samples[:-1]
    b = sig.samples[1:]
    mid = 0.5 * (a + b)

    def _pow(x):
        return np.linalg.norm(x, axis=1) ** p

    total = (sig.dt / 6.0) * np.sum(_pow(a) + 4.0 * _pow(mid) + _pow(b))
    return float(total ** (1.0 / p))


def _paired(alpha: np.ndarray, sig: Signal) -> None:
    if sig.width != alpha.shape[0]:
        raise DimensionError(
            f"signal width {sig.width} does not match {alpha.shape[0]} modes"
        )


def exp_conv_final(alpha, sig: Signal, t: float) -> np.ndarray:
    """int_0^t e^(alpha_n (t - r)) v_n(r) dr for the paired column v_n of sig.

    Exact on the interpolant (zero outside the grid); partial end segments are
    integrated exactly. Returns shape (N,).
    """
    alpha = np.asarray(alpha, dtype=complex)
    _paired(alpha, sig)
    if t < 0:
        raise DomainError(f"upper limit must be >= 0, got {t}")
    out = np.zeros(alpha.shape[0], dtype=complex)
    a = max(0.0, sig.t0)
    b = min(t, sig.end)
    if b <= a + _GRID_REL_TOL * sig.dt:
        return out
    n = sig.n_samples
    ka = int(np.ceil((a - sig.t0) / sig.dt - _GRID_REL_TOL))
    kb = int(np.floor((b - sig.t0) / sig.dt + _GRID_REL_TOL))
    ka = min(max(ka, 0), n - 1)
    kb = min(max(kb, 0), n - 1)
    r_ka = sig.t0 + ka * sig.dt
    r_kb = sig.t0 + kb * sig.dt

    def _partial(r0, r1, v0, v1):
        h = r1 - r0
        w = alpha * h
        seg = v0 * phi1(w) + (v1 - v0) * phi2(w)
        return np.exp(alpha * (t - r1)) * h * seg

    if ka > kb:
        # both endpoints inside one segment
        out += _partial(a, b, values_at(sig, [a])[0], values_at(sig, [b])[0])
        return out
    if a < r_ka - _GRID_REL_TOL * sig.dt:
        out += _partial(a, r_ka, values_at(sig, [a])[0], sig.samples[ka])
    if kb > ka:
        w = alpha * sig.dt
        p1 = phi1(w)
        p2 = phi2(w)
        v = sig.samples[ka:kb + 1]
        weights = sig.dt * (v[:-1] * p1[None, :] + np.diff(v, axis=0) * p2[None, :])
        r_right = sig.t0 + sig.dt * np.arange(ka + 1, kb + 1)
        decay = np.exp(np.outer(t - r_right, alpha))
        out += np.sum(decay * weights, axis=0)
    if b > r_kb + _GRID_REL_TOL * sig.dt:
        out += _partial(r_kb, b, sig.samples[kb], values_at(sig, [b])[0])
    return out


def exp_conv_trajectory(alpha, sig: Signal, n_steps: int) -> np.ndarray:
    """x(k dt) = int_0^{k dt} e^(alpha (k dt - r)) v(r) dr on sig's grid, k = 0..n_steps.

    Evaluated by the exact one-step recurrence x_{k+1} = e^(alpha dt) x_k + g_k
    (a linear IIR filter per mode). Requires sig.t0 == 0. Returns
    (n_steps + 1, N).
    """
    alpha = np.asarray(alpha, dtype=complex)
    _paired(alpha, sig)
    if sig.t0 != 0.0:
        raise DomainError(f"trajectory convolution requires grid start 0, got {sig.t0}")
    if n_steps < 0:
        raise DomainError(f"n_steps must be >= 0, got {n_steps}")
    nmodes = alpha.shape[0]
    out = np.zeros((n_steps + 1, nmodes), dtype=complex)
    if n_steps == 0:
        return out
    w = alpha * sig.dt
    p1 = phi1(w)
    p2 = phi2(w)
    g = np.zeros((n_steps, nmodes), dtype=complex)
    nseg = min(n_steps, sig.n_samples - 1)
    if nseg > 0:
        v = sig.samples[:nseg + 1]
        g[:nseg] = sig.dt * (v[:-1] * p1[None, :] + np.diff(v, axis=0) * p2[None, :])
    decay = np.exp(w)
    for m in range(nmodes):
        out[1:, m] = lfilter([1.0], [1.0, -decay[m]], g[:, m])
    return out


def _is_effectively_real(arr: np.ndarray) -> bool:
    return not np.iscomplexobj(arr) or not np.any(arr.imag != 0.0)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_signal_csv(path, sig: Signal) -> None:
    """Write `time,c0,c1,...` rows; complex data gets c0.re,c0.im,... columns."""
    real = _is_effectively_real(sig.samples)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if real:
            writer.writerow(["time"] + [f"c{j}" for j in range(sig.width)])
        else:
            writer.writerow(["time"] + [f"c{j}.{part}" for j in range(sig.width)
                                        for part in ("re", "im")])
        for k in range(sig.n_samples):
            row = [_fmt(sig.t0 + k * sig.dt)]
            for j in range(sig.width):
                v = sig.samples[k, j]
                if real:
                    row.append(_fmt(v.real))
                else:
                    row.extend([_fmt(v.real), _fmt(v.imag)])
            writer.writerow(row)


def read_signal_csv(path) -> Signal:
    """Read the `time,c0,c1,...` format; the step must be constant to 1e-9 relative."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0].strip() != "time":
        raise SchemaError(f"{path}: first column must be 'time'")
    header = [h.strip() for h in rows[0][1:]]
    if not header:
        raise SchemaError(f"{path}: no value columns")
    complex_pairs = all(h.endswith((".re", ".im")) for h in header)
    data = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header) + 1:
            raise SchemaError(f"{path}: row {i} has {len(row)} fields, expected {len(header) + 1}")
        try:
            data.append([float(x) for x in row])
        except ValueError as exc:
            raise SchemaError(f"{path}: row {i}: {exc}") from None
    if len(data) < 2:
        raise SchemaError(f"{path}: need at least 2 rows to define the grid")
    arr = np.asarray(data, dtype=float)
    times = arr[:, 0]
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise SchemaError(f"{path}: times must be strictly increasing")
    dt = (times[-1] - times[0]) / (len(times) - 1)
    if np.max(np.abs(steps - dt)) > _GRID_REL_TOL * max(dt, 1.0):
        raise SchemaError(f"{path}: time step is not constant (relative tol 1e-9)")
    vals = arr[:, 1:]
    if complex_pairs:
        if vals.shape[1] % 2 != 0:
            raise SchemaError(f"{path}: unpaired .re/.im columns")
        vals = vals[:, 0::2] + 1j * vals[:, 1::2]
    return Signal(float(times[0]), float(dt), vals)
