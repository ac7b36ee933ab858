"""Smooth weights, weighted polynomial images, exponential sums, and arcs.

The weight w is a finite convolution of box kernels with widths shrinking
like 1/(j+1)^2, peak-normalized onto [0,1]. The weighted image g places
mass J * h'(n) * w(h(n)/X) at +-h(n) for sieved n. Fourier data is computed
either pointwise (exact phase reduction) or on a grid by FFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .intersective import AuxiliaryContext
from .polycore import IntPoly
from .search import AvoidingSet
from .sieve import SieveTable, J_factor, J_factor_float, w_mask

TWO_PI = 2.0 * math.pi

# largest |value * theta| for which plain float64 phase reduction keeps the
# phase error below ~2^-21; beyond it the exact integer path is used
_FAST_PHASE_LIMIT = float(1 << 32)


# ---------------------------------------------------------------------------
# smooth weight
# ---------------------------------------------------------------------------


@dataclass
class SmoothWeight:
    grid: np.ndarray  # samples on a uniform grid over [0, 1]
    depth: int
    resolution: int  # number of grid intervals; len(grid) == resolution + 1

    def __call__(self, x) -> np.ndarray | float:
        xs = np.asarray(x, dtype=float)
        out = np.interp(xs, np.linspace(0.0, 1.0, len(self.grid)), self.grid, left=0.0, right=0.0)
        out = np.where((xs < 0) | (xs > 1), 0.0, out)
        if np.isscalar(x) or xs.ndim == 0:
            return float(out)
        return out

    @property
    def mass(self) -> float:
        """Integral of w over [0, 1] (trapezoid on the grid)."""
        trap = getattr(np, "trapezoid", None) or np.trapz
        return float(trap(self.grid, dx=1.0 / self.resolution))

    def fourier(self, ts) -> np.ndarray:
        """Transform of the piecewise-linear interpolant, int w(x) e(-xt) dx.

        Exact for the interpolant: the rectangle-rule sum times the Fejer
        kernel sinc^2(pi t delta), since piecewise-linear interpolation is
        convolution of grid masses with a triangle kernel.
        """
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        delta = 1.0 / self.resolution
        xs = np.linspace(0.0, 1.0, len(self.grid))
        out = np.empty(len(ts), dtype=complex)
        for i in range(0, len(ts), 64):
            block = ts[i : i + 64]
            phases = np.exp(-2j * np.pi * np.outer(block, xs))
            out[i : i + 64] = phases @ self.grid * delta
        arg = np.pi * ts * delta
        fejer = np.ones_like(ts)
        nz = arg != 0
        fejer[nz] = (np.sin(arg[nz]) / arg[nz]) ** 2
        return out * fejer

    def decay_audit_limit(self) -> float:
        """Largest |t| where the grid can still resolve the decay envelope.

        The piecewise-linear model deviates from the true convolution by
        about h^2 * ||w''||/8; the envelope must stay above that floor.
        """
        h2 = (1.0 / self.resolution) ** 2
        curvature = 60.0  # crude bound for the box-convolution second derivative
        floor = h2 * curvature / 8.0
        return 2.0 * math.log(1.0 / floor) ** 2


def smooth_weight_build(depth: int, resolution: int) -> SmoothWeight:
    """Convolution of `depth` box kernels with widths a0/(j+1)^2 summing to 1,
    peak-normalized and clipped into [0, 1]."""
    if depth < 2:
        raise ValueError("depth must be at least 2")
    if resolution < 2**10:
        raise ValueError("resolution must be at least 2^10")
    weights = [1.0 / (j + 1) ** 2 for j in range(depth)]
    total = sum(weights)
    widths = [wj / total for wj in weights]
    lengths = [max(2, round(wj * resolution)) for wj in widths]
    n_out = sum(lengths) - depth + 1
    n_fft = 1 << (n_out - 1).bit_length()
    spec = np.ones(n_fft // 2 + 1, dtype=complex)
    for L in lengths:
        box = np.zeros(n_fft)
        box[:L] = 1.0 / L
        spec *= np.fft.rfft(box)
    conv = np.fft.irfft(spec, n_fft)[:n_out]
    conv = np.clip(conv / conv.max(), 0.0, 1.0)
    grid = np.interp(
        np.linspace(0.0, 1.0, resolution + 1), np.linspace(0.0, 1.0, n_out), conv
    )
    grid[0] = 0.0
    grid[-1] = 0.0
    return SmoothWeight(grid=np.clip(grid, 0.0, 1.0), depth=depth, resolution=resolution)


@dataclass
class WeightFourierAudit:
    t_max: float
    fitted_c: float
    argmax_t: float
    w0: float
    violations: list[float]

    def envelope(self, t: float) -> float:
        return self.fitted_c * math.exp(-math.sqrt(abs(t) / 2.0))

    def to_jsonable(self) -> dict:
        return {
            "t_max": self.t_max,
            "fitted_c": self.fitted_c,
            "argmax_t": self.argmax_t,
            "w0": self.w0,
            "violations": self.violations,
        }


def weight_fourier_audit(
    w: SmoothWeight, t_max: float, samples_per_unit: int = 4
) -> WeightFourierAudit:
    """Fit the smallest C with |w^(t)| <= C exp(-sqrt(t/2)) on [0, t_max].

    The transform is evaluated on the grid t = m/samples_per_unit by a single
    zero-padded FFT (exact for the piecewise-linear interpolant after the
    Fejer correction), so the whole sweep costs one FFT.
    """
    limit = w.decay_audit_limit()
    if t_max > limit:
        raise ValueError(f"t_max {t_max} beyond the grid-resolved range {limit:.0f}")
    P = w.resolution * samples_per_unit
    m_max = int(t_max * samples_per_unit)
    padded = np.zeros(P)
    padded[: len(w.grid)] = w.grid
    spec = np.fft.rfft(padded)[: m_max + 1] / w.resolution
    ts = np.arange(m_max + 1) / samples_per_unit
    arg_f = np.pi * ts / w.resolution
    fejer = np.ones_like(ts)
    nz = arg_f != 0
    fejer[nz] = (np.sin(arg_f[nz]) / arg_f[nz]) ** 2
    mags = np.abs(spec) * fejer
    env = np.exp(-np.sqrt(ts / 2.0))
    ratios = mags / env
    fitted = float(ratios.max())
    arg = float(ts[int(ratios.argmax())])
    bad = ts[mags > fitted * env * (1.0 + 1e-9)]
    return WeightFourierAudit(
        t_max=t_max,
        fitted_c=fitted,
        argmax_t=arg,
        w0=float(mags[0]),
        violations=[float(t) for t in bad],
    )


# ---------------------------------------------------------------------------
# weighted image g
# ---------------------------------------------------------------------------


@dataclass
class WeightedImage:
    aux: AuxiliaryContext
    X: int
    U: float
    values: np.ndarray  # increasing positive values h(n), int64
    weights: np.ndarray  # J * h'(n) * w(h(n)/X), float64
    J: float
    table: SieveTable = field(repr=False)

    @property
    def total_mass(self) -> float:
        """Sum of g over the integers (both signs)."""
        return 2.0 * float(self.weights.sum())

    def fourier(self, theta) -> float:
        """g^(theta) = 2 * sum w_v cos(2 pi v theta); real since g is even."""
        phases = _phases_mod1(self.values, theta)
        return 2.0 * float(np.cos(TWO_PI * phases) @ self.weights)

    def fourier_shifted(self, a: int, q: int, theta: float) -> float:
        """g^(a/q + theta) with the rational part reduced exactly."""
        rat = (self.values % q) * (a % q) % q
        phases = rat.astype(float) / q + _phases_mod1(self.values, theta)
        return 2.0 * float(np.cos(TWO_PI * phases) @ self.weights)


def g_build(
    aux: AuxiliaryContext,
    X: int,
    U: float,
    w: SmoothWeight,
    table: Optional[SieveTable] = None,
) -> WeightedImage:
    poly = aux.aux
    if not poly.positive_for_all_n_from(1) or not poly.derivative().positive_for_all_n_from(1):
        raise ValueError("g_build needs a polynomial positive and increasing on the naturals")
    if table is None:
        table = SieveTable.build(aux, U)
    n_max = _largest_n_below(poly, X)
    if n_max == 0:
        return WeightedImage(aux, X, U, np.zeros(0, np.int64), np.zeros(0), float(J_factor_float(table)), table)
    mask = w_mask(table, n_max)[1:]
    ns = np.nonzero(mask)[0] + 1
    vals = np.array([poly(int(n)) for n in ns], dtype=np.int64)
    dpoly = poly.derivative()
    derivs = np.array([dpoly(int(n)) for n in ns], dtype=float)
    J = float(J_factor_float(table))
    weights = J * derivs * w(vals / X)
    return WeightedImage(aux, X, U, vals, weights, J, table)


def _largest_n_below(poly: IntPoly, X: int) -> int:
    if poly(1) > X:
        return 0
    lo, hi = 1, 2
    while poly(hi) <= X:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if poly(mid) <= X:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# Fourier evaluation
# ---------------------------------------------------------------------------


Source = Union[AvoidingSet, WeightedImage, tuple]


def _support(source: Source) -> tuple[np.ndarray, np.ndarray]:
    """(values, weights) with the even extension applied for WeightedImage."""
    if isinstance(source, AvoidingSet):
        vals = source.member_array()
        return vals, np.ones(len(vals))
    if isinstance(source, WeightedImage):
        vals = np.concatenate([source.values, -source.values])
        return vals, np.concatenate([source.weights, source.weights])
    vals, weights = source
    return np.asarray(vals, dtype=np.int64), np.asarray(weights, dtype=float)


def _phases_mod1(values: np.ndarray, theta) -> np.ndarray:
    """values * theta mod 1 with controlled error.

    Rational theta reduces exactly in integer arithmetic. Floats are exact
    binary rationals: small products use float64 directly, large ones fall
    back to exact big-integer reduction of v * num / 2^s.
    """
    if isinstance(theta, Fraction) or isinstance(theta, int):
        fr = Fraction(theta)
        num, den = fr.numerator % fr.denominator if fr.denominator > 1 else 0, fr.denominator
        if den == 1:
            return np.zeros(len(values))
        if den < 1 << 31:
            red = (values % den) * (num % den) % den
            return red.astype(float) / den
        return np.array([float((int(v) * num % den)) / den for v in values])
    t = float(theta)
    t -= math.floor(t)
    if t == 0.0:
        return np.zeros(len(values))
    vmax = float(np.abs(values).max(initial=0))
    if vmax * t <= _FAST_PHASE_LIMIT:
        return np.mod(values * t, 1.0)
    num, den = t.as_integer_ratio()  # den is a power of two
    mask = den - 1
    return np.array([(int(v) * num & mask) / den for v in values])


def fourier_point(source: Source, theta) -> complex:
    """f^(theta) = sum f(n) e(-n theta), pairwise-summed."""
    vals, weights = _support(source)
    if len(vals) == 0:
        return 0j
    phases = _phases_mod1(vals, theta)
    ang = -TWO_PI * phases
    return complex(np.cos(ang) @ weights + 1j * (np.sin(ang) @ weights))


@dataclass
class Spectrum:
    n: int
    values: np.ndarray  # f^(j/N) for j = 0..N-1
    source: str

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def to_csv_rows(self):
        for j, z in enumerate(self.values):
            yield j, z.real, z.imag, abs(z)

    def to_csv(self) -> str:
        lines = ["j,re,im,magnitude"]
        lines += [
            f"{j},{re:.17g},{im:.17g},{mag:.17g}" for j, re, im, mag in self.to_csv_rows()
        ]
        return "\n".join(lines) + "\n"


def fourier_grid(source: Source, N: int) -> Spectrum:
    """FFT of the folded support: agrees with fourier_point at every j/N."""
    vals, weights = _support(source)
    maxmag = int(np.abs(vals).max(initial=0))
    if N < 2 * maxmag + 1:
        raise ValueError(f"grid size {N} too small for support magnitude {maxmag}")
    folded = np.zeros(N, dtype=float)
    np.add.at(folded, np.mod(vals, N), weights)
    return Spectrum(N, np.fft.fft(folded), source=type(source).__name__)


# ---------------------------------------------------------------------------
# Gauss sums and Weyl sums over sieved sets
# ---------------------------------------------------------------------------


def gauss_sum_sieved(
    aux: AuxiliaryContext,
    a: int,
    q: int,
    U: float,
    table: Optional[SieveTable] = None,
) -> complex:
    """Sum of e(h(s) a / q) over s mod q restricted to W^q(U); exact phases."""
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(a, q) != 1:
        raise ValueError("need gcd(a, q) = 1")
    if table is None:
        table = SieveTable.build(aux, U)
    conds = [
        (d.modulus, set(d.roots))
        for d in (table.entries[p] for p in sorted(table.entries))
        if q % d.modulus == 0
    ]
    poly = aux.aux
    total = 0j
    for s in range(q):
        if any(s % m in roots for m, roots in conds):
            continue
        t = poly.eval_mod(s, q) * (a % q) % q
        total += complex(math.cos(TWO_PI * t / q), math.sin(TWO_PI * t / q))
    return total


def gauss_sum_sweep(
    aux: AuxiliaryContext,
    q_max: int,
    U: float,
    all_a: bool = True,
    table: Optional[SieveTable] = None,
) -> list[tuple[int, int, float]]:
    """(q, a, |sum|) over q <= q_max, vectorized per modulus; matches
    gauss_sum_sieved at every point."""
    if table is None:
        table = SieveTable.build(aux, U)
    conds = [(d.modulus, np.array(d.roots)) for p, d in sorted(table.entries.items())]
    coeffs = aux.aux.coeffs
    out = []
    for q in range(1, q_max + 1):
        s = np.arange(q, dtype=np.int64)
        keep = np.ones(q, dtype=bool)
        for m, roots in conds:
            if q % m == 0 and roots.size:
                keep &= ~np.isin(s % m, roots)
        hmod = np.zeros(q, dtype=np.int64)
        for c in reversed(coeffs):
            hmod = (hmod * s + c) % q
        hmod = hmod[keep]
        roots_of_unity = np.exp(2j * np.pi * np.arange(q) / q)
        a_values = (
            [a for a in range(1, q + 1) if math.gcd(a, q) == 1] if all_a else [1]
        )
        if q == 1:
            a_values = [0]
        for a in a_values:
            tot = roots_of_unity[(hmod * a) % q].sum() if hmod.size else 0j
            out.append((q, a % q if q > 1 else 0, float(abs(tot))))
    return out


@dataclass
class WeylSample:
    theta: float
    a: int
    q: int
    lhs: float
    rhs: float
    fitted_c: float


@dataclass
class WeylReport:
    N: int
    U: float
    Z: float
    samples: list[WeylSample]

    @property
    def max_fitted_c(self) -> float:
        return max(s.fitted_c for s in self.samples) if self.samples else 0.0

    def to_jsonable(self) -> dict:
        return {
            "N": self.N,
            "U": self.U,
            "Z": self.Z,
            "max_fitted_c": self.max_fitted_c,
            "samples": [vars(s) for s in self.samples],
        }


def weyl_sum_audit(
    aux: AuxiliaryContext,
    U: float,
    N: int,
    theta_samples: Sequence[float],
    Z: Optional[float] = None,
    table: Optional[SieveTable] = None,
) -> WeylReport:
    """Exact |sum over n <= N in W(U) of e(theta h(n))| against the two-term
    envelope N (log U)^{ek} [exp(-log Z/log U) + (b_k log^{k^2}(b_k q N)
    (1/q + Z/N + q Z^k/(b_k N^k)))^{1/K}] with (a, q) a convergent of theta."""
    if Z is None:
        Z = N / max(U, 2.0)
    if U < 2 or Z < 2 or N < 4 or U * Z > N * (1 + 1e-9):
        raise ValueError("need U, Z >= 2 and U*Z <= N")
    if table is None:
        table = SieveTable.build(aux, U)
    poly = aux.aux
    k = poly.degree
    K = 2**k
    b_k = poly.leading
    mask = w_mask(table, N)[1:]
    ns = np.nonzero(mask)[0] + 1
    raw = [poly(int(n)) for n in ns]
    if raw and max(abs(v) for v in raw) < 1 << 62:
        vals = np.array(raw, dtype=np.int64)
    else:
        vals = np.array(raw, dtype=object)
    logU = math.log(U)
    samples = []
    for theta in theta_samples:
        a, q, _ = rational_approx(theta, max(2, N))
        phases = _phases_mod1(vals, float(theta))
        s = complex(np.sum(np.exp(-2j * np.pi * phases)))
        lhs = abs(s)
        logterm = math.log(max(b_k * q * N, 3.0)) ** (k * k)
        inner = b_k * logterm * (1.0 / q + Z / N + q * Z**k / (b_k * N**k))
        rhs = (
            N
            * logU ** (math.e * k)
            * (math.exp(-math.log(Z) / logU) + inner ** (1.0 / K))
        )
        samples.append(WeylSample(float(theta), a, q, lhs, rhs, lhs / rhs))
    return WeylReport(N, U, Z, samples)


# ---------------------------------------------------------------------------
# rational approximation and arcs
# ---------------------------------------------------------------------------


def rational_approx(theta, Qmax: int) -> tuple[int, int, float]:
    """Best continued-fraction convergent a/q with q <= Qmax; gcd(a, q) = 1."""
    if Qmax < 1:
        raise ValueError("Qmax must be >= 1")
    fr = Fraction(theta)
    floor = math.floor(fr)
    x = fr - floor
    # convergents of the fractional part
    p_prev, q_prev, p_cur, q_cur = 1, 0, 0, 1  # p/q for [] and [0]
    num, den = x.numerator, x.denominator
    a_list = []
    while den:
        a_list.append(num // den)
        num, den = den, num % den
    best_p, best_q = 0, 1
    p0, q0 = 1, 0
    p1, q1 = a_list[0] if a_list else 0, 1
    if a_list:
        best_p, best_q = p1, q1
        for coef in a_list[1:]:
            p2, q2 = coef * p1 + p0, coef * q1 + q0
            if q2 > Qmax:
                break
            best_p, best_q = p2, q2
            p0, q0, p1, q1 = p1, q1, p2, q2
    a = best_p + floor * best_q
    delta = abs(float(fr - Fraction(a, best_q)))
    return a, best_q, delta


@dataclass(frozen=True)
class ArcParams:
    alpha: float
    epsilon: float
    C1: float
    X: int
    tau: float
    Qmax: float
    L: float

    @classmethod
    def make(cls, alpha: float, epsilon: float, C1: float, X: int) -> "ArcParams":
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        L = math.log(1.0 / alpha)
        tau = C1 * L * L / X
        qmax = max(2.0, C1 * alpha ** -(2 + epsilon))
        return cls(alpha, epsilon, C1, X, tau, qmax, L)

    def check(self) -> bool:
        expect = math.log(1.0 / self.alpha) if self.alpha < 1 else 0.0
        return self.tau > 0 and self.Qmax >= 2 and abs(expect - self.L) < 1e-12


@dataclass(frozen=True)
class Arc:
    kind: str  # "major" | "minor"
    q: int = 0
    a: int = 0

    @property
    def is_major(self) -> bool:
        return self.kind == "major"


def classify_arc(theta: float, params: ArcParams) -> Arc:
    """Major iff some a/q with q <= Qmax sits within tau of theta; the
    witness with smallest q wins. Brute scan over q keeps this exact even
    when tau exceeds the convergent separation scale."""
    t = theta - math.floor(theta)
    qmax = int(params.Qmax)
    for q in range(1, qmax + 1):
        a = round(t * q)
        if a and math.gcd(a, q) != 1:
            continue
        dist = abs(t - a / q)
        if dist <= params.tau + 1e-18:
            return Arc("major", q, a % q if q > 1 else 0)
    return Arc("minor")


@dataclass
class HarmonicParams:
    X: int
    k: int
    b_k: int
    U: float
    Z: float
    K: int
    Y: float

    @classmethod
    def for_scale(cls, X: int, aux: AuxiliaryContext) -> "HarmonicParams":
        poly = aux.aux
        logx = math.log(X)
        U = math.exp(math.sqrt(logx))
        Z = math.exp(logx ** (7.0 / 8.0))
        k = poly.degree
        if poly(1) > X:
            raise ValueError("X below the first polynomial value")
        # real solution of poly(Y) = X by bisection (poly increasing on [1, inf))
        lo, hi = 1.0, 2.0
        while poly(hi) < X:
            hi *= 2
        for _ in range(200):
            mid = (lo + hi) / 2
            if poly(mid) < X:
                lo = mid
            else:
                hi = mid
        return cls(X, k, poly.leading, U, Z, 2**k, (lo + hi) / 2)

    def weyl_range_ok(self, N: int) -> bool:
        return self.U * self.Z <= N

    def y_reference(self) -> float:
        return (self.X / self.b_k) ** (1.0 / self.k)

    def y_gap(self) -> float:
        return abs(self.Y - self.y_reference())


# ---------------------------------------------------------------------------
# major/minor arc audits
# ---------------------------------------------------------------------------


@dataclass
class MajorArcReport:
    a: int
    q: int
    theta: float
    measured: float
    predicted: float
    abs_diff: float
    ratio: Optional[float]
    rel_to_mass: float
    hypotheses_ok: bool
    hypothesis_notes: list[str]

    def to_jsonable(self) -> dict:
        d = dict(vars(self))
        return d


def major_arc_predict(
    image: WeightedImage, a: int, q: int, theta: float, w: SmoothWeight
) -> MajorArcReport:
    """Compare g^(a/q + theta) with the sieve main term
    J * (2X/q) * Re[ w^(theta X) * prod_(p<=U, p^gamma not| q)(1 - j/p^gamma)
    * sum_(b in W^q mod q) e(-a h(b)/q) ]."""
    X = image.X
    k = image.aux.aux.degree
    notes = []
    if q < 1 or math.gcd(a, q) != 1:
        raise ValueError("need q >= 1 and gcd(a, q) = 1")
    if q >= X ** (1.0 / (8 * k)):
        notes.append(f"q={q} exceeds X^(1/8k)={X ** (1.0 / (8 * k)):.3f}")
    if abs(theta) > X ** -(1.0 - 1.0 / (8 * k)):
        notes.append("theta outside the major-arc radius hypothesis")
    table = image.table
    restricted = 1.0
    for p in sorted(table.entries):
        d = table.entries[p]
        if q % d.modulus != 0:
            restricted *= 1.0 - d.j / d.modulus
    if q == 1:
        gauss = complex(1.0)
    else:
        gauss = gauss_sum_sieved(image.aux, (-a) % q, q, image.U, table)
    what = complex(w.fourier(np.array([theta * X]))[0])
    predicted = image.J * (2.0 * X / q) * restricted * (what * gauss).real
    measured = image.fourier_shifted(a, q, theta)
    mass = image.total_mass
    diff = abs(measured - predicted)
    ratio = measured / predicted if abs(predicted) > 1e-12 * max(mass, 1.0) else None
    return MajorArcReport(
        a=a,
        q=q,
        theta=theta,
        measured=measured,
        predicted=predicted,
        abs_diff=diff,
        ratio=ratio,
        rel_to_mass=diff / mass if mass else math.inf,
        hypotheses_ok=not notes,
        hypothesis_notes=notes,
    )


@dataclass
class MinorArcReport:
    threshold: float
    sup_minor: float
    argmax_theta: Optional[float]
    passes: bool
    margin_ratio: float
    n_minor_sampled: int
    hypothesis_ok: bool
    alpha_floor: float
    mass: float
    arcs_cover_circle: bool

    def to_jsonable(self) -> dict:
        return dict(vars(self))


def minor_arc_audit(
    image: WeightedImage,
    alpha: float,
    params: Optional[ArcParams] = None,
    epsilon: float = 1.0,
    C1: float = 10.0,
    extra_points: Optional[Sequence[float]] = None,
    hypothesis_constant: float = 1e-6,
) -> MinorArcReport:
    """Empirical sup of |g^| over sampled minor-arc frequencies versus the
    threshold 2^-9 alpha X.

    Samples a full FFT grid (classified lazily, largest magnitudes first)
    plus adversarial points just outside major arcs and at rationals with
    denominators above the cutoff.
    """
    X = image.X
    if params is None:
        params = ArcParams.make(alpha, epsilon, C1, X)
    threshold = 2.0**-9 * alpha * X
    k = image.aux.aux.degree
    logx = math.log(X)
    alpha_floor = hypothesis_constant * logx ** (math.e * k) * math.exp(-(logx**0.375))
    hypothesis_ok = alpha >= logx ** (math.e * k) * math.exp(-(logx**0.375))

    # with q up to Qmax and radius tau the arcs cover everything once
    # 0.6 Qmax^2 tau exceeds 1/2; the audit is then vacuously empty
    cover = 0.6 * params.Qmax**2 * params.tau > 0.5
    maxv = int(image.values.max(initial=0))
    N = 1 << max(4, (2 * maxv + 1).bit_length())
    spec = fourier_grid(image, N)
    mags = spec.magnitude()
    order = np.argsort(mags)[::-1]
    sup = 0.0
    arg: Optional[float] = None
    n_minor = 0
    for j in order[: min(N, 4096)]:
        if mags[j] <= sup:
            break
        theta = j / N
        if not classify_arc(theta, params).is_major:
            sup = float(mags[j])
            arg = theta
            n_minor += 1
            break
    # adversarial points: just outside small-q arcs, and on medium-q rationals
    points = []
    qmax = int(params.Qmax)
    for q in range(1, min(qmax, 40) + 1):
        for a in range(1, q + 1):
            if math.gcd(a, q) == 1:
                points.append(a / q + 1.25 * params.tau)
                points.append(a / q - 1.25 * params.tau)
        if len(points) > 1500:
            break
    for q in range(qmax + 1, qmax + 40):
        points.append(1.0 / q)
    if extra_points:
        points.extend(extra_points)
    for theta in points:
        if classify_arc(theta, params).is_major:
            continue
        n_minor += 1
        val = abs(image.fourier(theta))
        if val > sup:
            sup = val
            arg = theta
    return MinorArcReport(
        threshold=threshold,
        sup_minor=sup,
        argmax_theta=arg,
        passes=sup <= threshold,
        margin_ratio=sup / threshold if threshold else math.inf,
        n_minor_sampled=n_minor,
        hypothesis_ok=hypothesis_ok,
        alpha_floor=alpha_floor,
        mass=image.total_mass,
        arcs_cover_circle=cover,
    )


# ---------------------------------------------------------------------------
# initial Fourier mass
# ---------------------------------------------------------------------------


def initial_mass(A: AvoidingSet, xi: float, params: ArcParams) -> float:
    """sum over 2 <= q <= Qmax of q^(-1/(2+eps)) * sum over reduced a of
    |1_A^(a/q + xi)|^2, with exact rational phase parts."""
    if abs(xi) > params.tau * (1 + 1e-9):
        raise ValueError("xi outside the arc radius")
    if A.size == 0:
        return 0.0
    ns = A.member_array()
    shift = np.exp(-2j * np.pi * np.mod(ns * float(xi), 1.0))
    total = 0.0
    qmax = int(params.Qmax)
    for q in range(2, qmax + 1):
        res = np.mod(ns, q)
        cvec = np.zeros(q, dtype=complex)
        np.add.at(cvec, res, shift)
        hat = np.fft.fft(cvec)  # index a gives sum e(-n a / q) e(-n xi)
        amask = np.array([a for a in range(1, q) if math.gcd(a, q) == 1])
        if amask.size == 0:
            continue
        total += q ** (-1.0 / (2.0 + params.epsilon)) * float(
            np.sum(np.abs(hat[amask]) ** 2)
        )
    return total
