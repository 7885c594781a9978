"""Spectral systems, compatibility checks, and the boundary transfer multiplier.

A system is the quadruple (A, B, C, D) in diagonal spectral form: A acts as
alpha_n on mode n, B enters through the row vectors b[n, :], C observes
through the columns c[:, n] by an absolutely convergent series, and D is a
plain matrix. A truncation to N modes either is the whole system (``exact``)
or carries a declared tail majorant that dominates the dropped rows
||c_n|| * sum_j |b_nj| / |lambda - alpha_n| uniformly on Re(lambda) >= 0.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy.special import zeta

from .errors import (
    CertificateIncompleteError,
    DimensionError,
    DomainError,
    InternalError,
    PreconditionError,
    SchemaError,
    SpectrumError,
    StabilityError,
)
from .spectral import DiagonalGenerator

_SCAN_CHUNK = 2048
DEFAULT_TAIL_SHARE = 0.1


class TailMajorant(Protocol):
    def term(self, n: int) -> float: ...

    def sum_from(self, start: int) -> float: ...

    def describe(self) -> dict: ...


@dataclass(frozen=True)
class HeatTail:
    """Majorant 4/((lambda0 + n^2) pi) per input channel for the built-in system."""

    lambda0: float = 1.0
    channels: int = 2

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise DomainError(f"lambda0 must be > 0, got {self.lambda0}")
        if self.channels < 1:
            raise DomainError(f"channels must be >= 1, got {self.channels}")

    def term(self, n: int) -> float:
        return self.channels * (4.0 / math.pi) / (self.lambda0 + float(n) ** 2)

    def sum_from(self, start: int) -> float:
        # sum_{n>=0} 1/(n^2 + a^2) = (1 + a pi coth(a pi)) / (2 a^2)
        a = math.sqrt(self.lambda0)
        total = (1.0 + a * math.pi / math.tanh(a * math.pi)) / (2.0 * a * a)
        head = float(np.sum(1.0 / (self.lambda0 + np.arange(start, dtype=float) ** 2)))
        return max(0.0, self.channels * (4.0 / math.pi) * (total - head))

    def describe(self) -> dict:
        return {"type": "heat", "lambda0": self.lambda0, "channels": self.channels}


@dataclass(frozen=True)
class PowerLawTail:
    """Declared row majorant coefficient * n^(-exponent) for the dropped modes.

    exponent <= 1 is accepted but not summable; any certificate step that
    needs the tail then reports the series as non-summable.
    """

    coefficient: float
    exponent: float

    def __post_init__(self):
        if self.coefficient < 0:
            raise DomainError(f"coefficient must be >= 0, got {self.coefficient}")

    def term(self, n: int) -> float:
        return self.coefficient * float(max(n, 1)) ** (-self.exponent)

    def sum_from(self, start: int) -> float:
        if self.coefficient == 0.0:
            return 0.0
        if self.exponent <= 1.0:
            return math.inf
        return self.coefficient * float(zeta(self.exponent, max(start, 1)))

    def describe(self) -> dict:
        return {"type": "powerlaw", "coefficient": self.coefficient,
                "exponent": self.exponent}


@dataclass(frozen=True)
class SpectralSystem:
    """Validated (A, B, C, D) truncation with optional tail majorant."""

    gen: DiagonalGenerator
    control: np.ndarray
    observation: np.ndarray
    feedthrough: np.ndarray
    tail: TailMajorant | None = None
    exact: bool = True
    builtin: str | None = None

    def __post_init__(self):
        n = self.gen.order
        b = np.atleast_2d(np.asarray(self.control, dtype=complex))
        c = np.atleast_2d(np.asarray(self.observation, dtype=complex))
        d = np.atleast_2d(np.asarray(self.feedthrough, dtype=complex))
        if b.shape[0] != n:
            raise DimensionError(f"control must have {n} rows, got {b.shape}")
        if c.shape[1] != n:
            raise DimensionError(f"observation must have {n} columns, got {c.shape}")
        if d.shape != (c.shape[0], b.shape[1]):
            raise DimensionError(
                f"feedthrough must be {(c.shape[0], b.shape[1])}, got {d.shape}"
            )
        for name, arr in (("control", b), ("observation", c), ("feedthrough", d)):
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"{name} has non-finite entries")
            arr.setflags(write=False)
        object.__setattr__(self, "control", b)
        object.__setattr__(self, "observation", c)
        object.__setattr__(self, "feedthrough", d)

    @property
    def n_modes(self) -> int:
        return self.gen.order

    @property
    def n_inputs(self) -> int:
        return self.control.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.observation.shape[0]


@dataclass(frozen=True)
class CompatReport:
    lambda_probe: complex
    truncated_sum: float
    tail_bound: float
    verdict: bool
    share: float


@dataclass(frozen=True)
class MultiplierValue:
    value: np.ndarray
    tail_radius: float


@dataclass(frozen=True)
class MultiplierReport:
    grid_sup: float
    upper_bound: float
    gamma_max: float
    steps: int
    tail_bound: float


def _row_weights(sys: SpectralSystem) -> np.ndarray:
    # ||c_{:,n}||_2 * sum_j |b_nj| per stored mode
    c_norm = np.linalg.norm(sys.observation, axis=0)
    b_sum = np.sum(np.abs(sys.control), axis=1)
    return c_norm * b_sum


def _tail_sum(sys: SpectralSystem) -> float:
    if sys.exact:
        return 0.0
    if sys.tail is None:
        raise CertificateIncompleteError(
            "system is a truncation but declares no tail majorant"
        )
    return float(sys.tail.sum_from(sys.n_modes))


def compatibility_check(sys: SpectralSystem, lam: complex,
                        share: float = DEFAULT_TAIL_SHARE) -> CompatReport:
    """Check that the observation series of R(lambda, A_{-1})B converges absolutely.

    The truncated sum runs over stored modes; the tail bound comes from the
    declared majorant (zero for exact systems). The verdict asks the tail to
    carry less than ``share`` of the truncated mass, so the stored modes
    dominate the series.
    """
    lam = complex(lam)
    if not lam.real > sys.gen.omega:
        raise SpectrumError(
            f"lambda = {lam} outside the resolvent half-plane Re(lambda) > {sys.gen.omega}"
        )
    if not share > 0:
        raise DomainError(f"share must be > 0, got {share}")
    rows = _row_weights(sys)
    truncated = float(np.sum(rows / np.abs(lam - sys.gen.eigenvalues)))
    tail = 0.0
    if not sys.exact:
        if lam.real < 0:
            raise DomainError(
                "tail majorants are only valid on Re(lambda) >= 0; "
                f"got lambda = {lam}"
            )
        tail = _tail_sum(sys)
    finite = math.isfinite(truncated + tail)
    verdict = finite and (tail == 0.0 or tail < share * truncated)
    return CompatReport(lam, truncated, tail, verdict, share)


def m13_eval(sys: SpectralSystem, gamma: float,
             compat: CompatReport | None = None) -> MultiplierValue:
    """Evaluate m13(gamma) = C_L R(i gamma, A_{-1}) B on the truncation.

    The reported tail radius is an entrywise half-width: every entry of the
    untruncated value lies within tail_radius of the returned matrix. Requires
    the series to be absolutely summable (exact system, or summable majorant);
    otherwise the value would not be defined and a precondition error is
    raised.
    """
    gamma = float(gamma)
    if compat is not None:
        tail = compat.tail_bound
        summable = math.isfinite(compat.truncated_sum + tail)
    else:
        tail = _tail_sum(sys)
        summable = math.isfinite(tail)
    if not summable:
        raise PreconditionError(
            "observation series is not absolutely summable; "
            "compatibility cannot be verified"
        )
    res = 1.0 / (1j * gamma - sys.gen.eigenvalues)
    value = (sys.observation * res[None, :]) @ sys.control
    return MultiplierValue(value, tail)


def _thread_count() -> int:
    raw = os.environ.get("WELLPOSED_THREADS", "").strip()
    if raw == "":
        n = 0
    else:
        try:
            n = int(raw)
        except ValueError:
            raise DomainError(f"WELLPOSED_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise DomainError(f"WELLPOSED_THREADS must be >= 0, got {n}")
    if n == 0:
        return min(8, os.cpu_count() or 1)
    return n


def m13_sup_scan(sys: SpectralSystem, gamma_max: float, steps: int) -> MultiplierReport:
    """Scan ||m13(gamma)||_2 on a uniform grid over [-gamma_max, gamma_max].

    Returns the sandwich [gridSup, upperBound]: the grid maximum of the
    largest singular value, and the gamma-uniform majorant
    sum_n ||c_n|| sum_j |b_nj| / |Re alpha_n| + tail. No interpolation between
    grid points is attempted; the true sup lies in the sandwich.

    Chunks of the grid may be scanned concurrently (WELLPOSED_THREADS, 0 =
    auto). Chunk boundaries are fixed, and max-reduction is order-independent,
    so the result does not depend on the thread count.
    """
    if not gamma_max > 0:
        raise DomainError(f"gamma_max must be > 0, got {gamma_max}")
    if steps < 2:
        raise DomainError(f"steps must be >= 2, got {steps}")
    tail = _tail_sum(sys)
    if not math.isfinite(tail):
        raise PreconditionError(
            "observation series is not absolutely summable; "
            "compatibility cannot be verified"
        )
    grid = np.linspace(-gamma_max, gamma_max, steps)
    alpha = sys.gen.eigenvalues
    c = sys.observation
    b = sys.control

    def _chunk_max(lo: int, hi: int) -> float:
        res = 1.0 / (1j * grid[lo:hi, None] - alpha[None, :])
        vals = np.einsum("kn,gn,nm->gkm", c, res, b, optimize=True)
        return float(np.max(np.linalg.svd(vals, compute_uv=False)[:, 0]))

    bounds = [(lo, min(lo + _SCAN_CHUNK, steps)) for lo in range(0, steps, _SCAN_CHUNK)]
    workers = _thread_count()
    if workers <= 1 or len(bounds) == 1:
        grid_sup = max(_chunk_max(lo, hi) for lo, hi in bounds)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            grid_sup = max(pool.map(lambda span: _chunk_max(*span), bounds))
    upper = float(np.sum(_row_weights(sys) / np.abs(alpha.real))) + tail
    if grid_sup > upper * (1.0 + 1e-12):
        raise InternalError(
            f"grid maximum {grid_sup} exceeds its majorant {upper}"
        )
    return MultiplierReport(grid_sup, upper, float(gamma_max), int(steps), tail)


_TOP_LEVEL_KEYS = {"eigenvalues", "control", "observation", "feedthrough", "shift",
                   "stability", "builtin", "modes", "tail", "exact"}
_EXPLICIT_KEYS = ("eigenvalues", "control", "observation", "feedthrough", "tail",
                  "exact")


def _entry(x, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        return complex(x[0], x[1])
    raise SchemaError(f"{where}: expected a number or [re, im] pair, got {x!r}")


def _matrix(raw, where: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{where}: expected a nonempty list of rows")
    rows = []
    width = None
    for i, row in enumerate(raw):
        if not isinstance(row, list) or not row:
            raise SchemaError(f"{where}[{i}]: expected a nonempty row list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SchemaError(f"{where}[{i}]: ragged row (got {len(row)}, expected {width})")
        rows.append([_entry(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    return np.asarray(rows, dtype=complex)


def _parse_tail(raw) -> TailMajorant:
    if not isinstance(raw, dict) or "type" not in raw:
        raise SchemaError("tail: expected an object with a 'type' field")
    kind = raw["type"]
    if kind == "powerlaw":
        try:
            return PowerLawTail(float(raw["coefficient"]), float(raw["exponent"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"tail: {exc}") from None
    if kind == "heat":
        try:
            return HeatTail(float(raw.get("lambda0", 1.0)), int(raw.get("channels", 2)))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"tail: {exc}") from None
    raise SchemaError(f"tail: unknown type {kind!r}")


def build_system(desc: dict) -> SpectralSystem:
    """Build a validated system from a parsed JSON description.

    ``eigenvalues`` lists the raw spectrum; ``shift`` (default 0) is subtracted
    from it, so the stored generator is the rescaled, exponentially stable one.
    ``stability`` defaults to K = 1 with omega at the shifted spectral bound.
    When ``builtin`` is set, the explicit arrays must be absent and ``modes``
    selects the truncation order.
    """
    if not isinstance(desc, dict):
        raise SchemaError(f"system description must be an object, got {type(desc).__name__}")
    unknown = set(desc) - _TOP_LEVEL_KEYS
    if unknown:
        raise SchemaError(f"unknown system fields: {sorted(unknown)}")
    builtin = desc.get("builtin")
    if builtin is not None:
        if builtin != "heat":
            raise SchemaError(f"unknown builtin {builtin!r}")
        present = [key for key in _EXPLICIT_KEYS if key in desc]
        if present:
            raise SchemaError(f"builtin system must not carry explicit fields: {present}")
        modes = desc.get("modes")
        if not isinstance(modes, int) or isinstance(modes, bool) or modes < 1:
            raise SchemaError(f"builtin system needs integer modes >= 1, got {modes!r}")
        from .heat import HeatConfig, build_heat_system

        lambda0 = desc.get("shift", 1.0)
        if not isinstance(lambda0, (int, float)) or isinstance(lambda0, bool):
            raise SchemaError(f"shift must be a number, got {lambda0!r}")
        return build_heat_system(HeatConfig(n_modes=modes, lambda0=float(lambda0)))

    for key in ("eigenvalues", "control", "observation"):
        if key not in desc:
            raise SchemaError(f"missing required field {key!r}")
    raw_eig = desc["eigenvalues"]
    if not isinstance(raw_eig, list) or not raw_eig:
        raise SchemaError("eigenvalues: expected a nonempty list")
    eig = np.asarray([_entry(v, f"eigenvalues[{i}]") for i, v in enumerate(raw_eig)],
                     dtype=complex)
    n = eig.shape[0]
    if "modes" in desc and desc["modes"] != n:
        raise SchemaError(f"modes = {desc['modes']} but {n} eigenvalues given")
    shift = desc.get("shift", 0.0)
    if not isinstance(shift, (int, float)) or isinstance(shift, bool):
        raise SchemaError(f"shift must be a number, got {shift!r}")
    alpha = eig - float(shift)

    control = _matrix(desc["control"], "control")
    observation = _matrix(desc["observation"], "observation")
    if control.shape[0] != n:
        raise SchemaError(f"control has {control.shape[0]} rows, expected {n}")
    if observation.shape[1] != n:
        raise SchemaError(f"observation has {observation.shape[1]} columns, expected {n}")
    k, m = observation.shape[0], control.shape[1]
    if "feedthrough" in desc:
        feedthrough = _matrix(desc["feedthrough"], "feedthrough")
        if feedthrough.shape != (k, m):
            raise SchemaError(f"feedthrough must be {k}x{m}, got {feedthrough.shape}")
    else:
        feedthrough = np.zeros((k, m), dtype=complex)

    stability = desc.get("stability")
    if stability is None:
        k_const = 1.0
        omega = float(np.max(alpha.real))
        if omega >= 0:
            raise StabilityError(
                f"shifted spectrum reaches Re = {omega} >= 0; declare a larger shift"
            )
    else:
        if not isinstance(stability, dict) or set(stability) - {"K", "omega"}:
            raise SchemaError("stability: expected an object with fields K, omega")
        try:
            k_const = float(stability.get("K", 1.0))
            omega = float(stability["omega"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"stability: {exc}") from None

    tail = _parse_tail(desc["tail"]) if "tail" in desc else None
    exact = desc.get("exact", tail is None)
    if not isinstance(exact, bool):
        raise SchemaError(f"exact must be a boolean, got {exact!r}")

    gen = DiagonalGenerator(alpha, shift=float(shift), k=k_const, omega=omega)
    return SpectralSystem(gen, control, observation, feedthrough,
                          tail=tail, exact=exact, builtin=None)


def _complex_pairs(arr: np.ndarray) -> list:
    if arr.ndim == 1:
        return [[float(v.real), float(v.imag)] for v in arr]
    return [_complex_pairs(row) for row in arr]


def describe_system(sys: SpectralSystem) -> dict:
    """Normalized description of the system; the certificate digest hashes this."""
    return {
        "schema": "wellposed.system@1",
        "builtin": sys.builtin,
        "modes": sys.n_modes,
        "inputs": sys.n_inputs,
        "outputs": sys.n_outputs,
        "shift": sys.gen.shift,
        "stability": {"K": sys.gen.k, "omega": sys.gen.omega},
        "eigenvalues": _complex_pairs(sys.gen.eigenvalues),
        "control": _complex_pairs(sys.control),
        "observation": _complex_pairs(sys.observation),
        "feedthrough": _complex_pairs(sys.feedthrough),
        "exact": sys.exact,
        "tail": sys.tail.describe() if sys.tail is not None else None,
    }
