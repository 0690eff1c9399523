"""Entry distributions, Wigner/Wishart samplers and the cumulant-expansion
identity checker.

Shipped entry laws are symmetric with unit variance: ``gaussian``,
``uniform`` (on [-sqrt(3), sqrt(3)]) and ``exp_power:a`` with density
proportional to exp(-|x/s|^a), a >= 1, scaled to unit variance.  All satisfy
a Poincare inequality.  A Wigner matrix X has sqrt(n) X_ii, sqrt(2n) Re X_ij
and sqrt(2n) Im X_ij (i < j) iid from the entry law; a Wishart matrix is
Y = X*X / n for a p x n standard complex Gaussian X.

Randomness is counter-based and splittable: a stream is keyed by
(master_seed, stream_id) through Philox, so distinct replicas are
independent and reproducible regardless of scheduling.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class EntryDistribution:
    """Symmetric unit-variance entry law with cumulant metadata."""

    kind: str
    alpha_exp: float | None = None
    poincare: bool = True

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform_symmetric", "exp_power"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "exp_power":
            if self.alpha_exp is None or self.alpha_exp < 1:
                raise ValueError("exp_power requires alpha_exp >= 1")
        elif self.alpha_exp is not None:
            raise ValueError("alpha_exp is only meaningful for exp_power")

    @property
    def kappa4(self):
        return kappa4(self)

    def sample(self, rng, size):
        """Draw iid variates; the draw order per kind is fixed for reproducibility."""
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "uniform_symmetric":
            b = math.sqrt(3.0)
            return rng.uniform(-b, b, size)
        scale = _exp_power_scale(self.alpha_exp)
        signs = 2.0 * rng.integers(0, 2, size=size) - 1.0
        mags = rng.gamma(1.0 / self.alpha_exp, 1.0, size=size) ** (1.0 / self.alpha_exp)
        return scale * signs * mags

    def __str__(self):
        return render_distribution(self)


GAUSSIAN = EntryDistribution("gaussian")
UNIFORM = EntryDistribution("uniform_symmetric")


def exp_power(alpha):
    return EntryDistribution("exp_power", alpha_exp=float(alpha))


def parse_distribution(text):
    """Parse the config string forms `gaussian`, `uniform`, `exp_power:a`."""
    text = text.strip()
    if text == "gaussian":
        return GAUSSIAN
    if text in ("uniform", "uniform_symmetric"):
        return UNIFORM
    if text.startswith("exp_power:"):
        return exp_power(float(text.split(":", 1)[1]))
    raise ValueError(f"unknown distribution spec {text!r}")


def render_distribution(dist):
    if dist.kind == "gaussian":
        return "gaussian"
    if dist.kind == "uniform_symmetric":
        return "uniform"
    return f"exp_power:{dist.alpha_exp:g}"


# -- moments and cumulants ---------------------------------------------------

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-13, limit=200)


@functools.lru_cache(maxsize=None)
def _exp_power_scale(alpha):
    """Scale s with Var(s * T) = 1 for T ~ exp(-|t|^alpha), via quadrature."""
    norm, _ = integrate.quad(lambda t: math.exp(-t ** alpha), 0, np.inf, **_QUAD_OPTS)
    m2, _ = integrate.quad(lambda t: t * t * math.exp(-t ** alpha), 0, np.inf, **_QUAD_OPTS)
    return 1.0 / math.sqrt(m2 / norm)


@functools.lru_cache(maxsize=None)
def _exp_power_abs_moment(alpha, q):
    """E|xi|^q of the unit-variance exp_power law, by quadrature."""
    s = _exp_power_scale(alpha)
    norm, _ = integrate.quad(lambda t: math.exp(-t ** alpha), 0, np.inf, **_QUAD_OPTS)
    mq, _ = integrate.quad(lambda t: t ** q * math.exp(-t ** alpha), 0, np.inf, **_QUAD_OPTS)
    return s ** q * mq / norm


def abs_moment(dist, q):
    """E|xi|^q for the unit-variance law."""
    if dist.kind == "gaussian":
        return 2.0 ** (q / 2.0) * math.gamma((q + 1) / 2.0) / math.sqrt(math.pi)
    if dist.kind == "uniform_symmetric":
        return math.sqrt(3.0) ** q / (q + 1.0)
    return _exp_power_abs_moment(dist.alpha_exp, q)


def kappa4(dist):
    """Fourth cumulant E[xi^4] - 3 of the unit-variance law."""
    if dist.kind == "gaussian":
        return 0.0
    if dist.kind == "uniform_symmetric":
        return 9.0 / 5.0 - 3.0        # E[xi^4] = 9/5 on [-sqrt3, sqrt3]
    return _exp_power_abs_moment(dist.alpha_exp, 4) - 3.0


def cumulant(dist, a):
    """Cumulant kappa_a, a <= 6.  Odd cumulants vanish by symmetry."""
    if a < 1 or a > 6:
        raise ValueError("cumulants are available up to order 6")
    if a % 2 == 1:
        return 0.0
    if a == 2:
        return 1.0
    if a == 4:
        return kappa4(dist)
    m4 = abs_moment(dist, 4)
    m6 = abs_moment(dist, 6)
    return m6 - 15.0 * m4 + 30.0


# -- reproducible streams ----------------------------------------------------

@dataclass(frozen=True)
class RngStream:
    """Counter-based stream keyed by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int = 0

    def generator(self):
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


# -- samplers ----------------------------------------------------------------

def sample_wigner(dist, n, rng):
    """Hermitian n x n Wigner matrix with the stated entry scaling."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = _as_generator(rng)
    diag = dist.sample(gen, n) / math.sqrt(n)
    k = n * (n - 1) // 2
    re = dist.sample(gen, k) / math.sqrt(2.0 * n)
    im = dist.sample(gen, k) / math.sqrt(2.0 * n)
    X = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    X[iu] = re + 1j * im
    X = X + X.conj().T
    X[np.diag_indices(n)] = diag
    return X


@dataclass(frozen=True)
class WishartSpec:
    """Size n, ratio alpha >= 1 and the integer parameter p = round(alpha n)."""

    n: int
    alpha: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.p < self.n:
            raise ValueError(f"p = {self.p} < n = {self.n}")

    @property
    def p(self):
        return int(round(self.alpha * self.n))

    @property
    def ratio_error(self):
        """Achieved |p/n - alpha|."""
        return abs(self.p / self.n - self.alpha)


def sample_wishart(spec, rng):
    """Y = X*X / n for X a p x n iid standard complex Gaussian matrix."""
    gen = _as_generator(rng)
    X = (gen.standard_normal((spec.p, spec.n)) + 1j * gen.standard_normal((spec.p, spec.n)))
    X /= math.sqrt(2.0)
    Y = X.conj().T @ X / spec.n
    return (Y + Y.conj().T) / 2.0


# -- exact trace-moment means (used as control-variate baselines) ------------

def _walk_expectation(walk, n, m4, m6):
    """Exact E[prod_e X_e] over one closed walk, given entry moments.

    Off-diagonal entries are phase-invariant, so a pattern survives only if
    each edge is traversed equally often in both directions; the 2k-th
    absolute moments are 1/n, (m4+1)/(2n^2), (m6+3m4)/(4n^3).  Diagonal
    entries are real with moments 1/n, m4/n^2, m6/n^3.
    """
    from collections import Counter

    edges = Counter()
    d = len(walk)
    for t in range(d):
        a, b = walk[t], walk[(t + 1) % d]
        edges[(min(a, b), max(a, b), a <= b)] += 1
    grouped = {}
    for (a, b, fwd), cnt in edges.items():
        key = (a, b)
        f, r = grouped.get(key, (0, 0))
        grouped[key] = (f + cnt, r) if fwd else (f, r + cnt)
    value = Fraction(1)
    for (a, b), (f, r) in grouped.items():
        if a == b:
            k = f + r
            if k % 2 == 1:
                return Fraction(0)
            value *= {2: Fraction(1, n), 4: m4 / n ** 2, 6: m6 / n ** 3}[k]
        else:
            if f != r:
                return Fraction(0)
            value *= {1: Fraction(1, n), 2: (m4 + 1) / (2 * n ** 2),
                      3: (m6 + 3 * m4) / (4 * n ** 3)}[f]
    return value


def _trace6_exact(n, m4, m6):
    """E[Tr X^6] at size n by exhaustive walk enumeration (exact rationals)."""
    import itertools

    total = Fraction(0)
    for walk in itertools.product(range(n), repeat=6):
        total += _walk_expectation(walk, n, m4, m6)
    return total


@functools.lru_cache(maxsize=1)
def _trace6_coefficients():
    """Rational coefficients of E[Tr X^6] = sum_b (A n + B + C/n + D/n^2) * b.

    The expectation is linear in the basis b in {1, m4, m6} and, as a
    function of n, spans exactly {n, 1, 1/n, 1/n^2}; fitting exact values at
    n = 2..5 determines the 12 rationals, verified exactly at n = 6.
    """
    probes = [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
              (Fraction(0), Fraction(1))]
    ns = [2, 3, 4, 5]
    vals = {pr: [_trace6_exact(n, *pr) for n in ns] for pr in probes}
    basis_vals = {
        "1": vals[probes[0]],
        "m4": [a - b for a, b in zip(vals[probes[1]], vals[probes[0]])],
        "m6": [a - b for a, b in zip(vals[probes[2]], vals[probes[0]])],
    }

    def solve4(rows, rhs):
        A = [row[:] + [r] for row, r in zip(rows, rhs)]
        for c in range(4):
            piv = next(i for i in range(c, 4) if A[i][c] != 0)
            A[c], A[piv] = A[piv], A[c]
            A[c] = [x / A[c][c] for x in A[c]]
            for i in range(4):
                if i != c and A[i][c] != 0:
                    A[i] = [x - A[i][c] * y for x, y in zip(A[i], A[c])]
        return [A[i][4] for i in range(4)]

    rows = [[Fraction(n), Fraction(1), Fraction(1, n), Fraction(1, n * n)] for n in ns]
    coeffs = {b: solve4(rows, v) for b, v in basis_vals.items()}
    # Exact consistency check at a size not used in the fit.
    n_check = 6
    for m4, m6 in probes:
        predicted = Fraction(0)
        for bname, bval in (("1", Fraction(1)), ("m4", m4), ("m6", m6)):
            A, B, C, D = coeffs[bname]
            predicted += bval * (A * n_check + B + C / Fraction(n_check)
                                 + D / Fraction(n_check * n_check))
        assert predicted == _trace6_exact(n_check, m4, m6)
    return coeffs


def expected_trace_power(k, n, m4, m6=None):
    """Exact E[Tr X^k] for a Wigner matrix with entry moments m4 = E[xi^4],
    m6 = E[xi^6], k <= 7.

    Odd powers vanish by symmetry; Tr X^2 has mean n exactly by the unit
    variance scaling; Tr X^4 follows from the closed-walk pairing count and
    Tr X^6 from the cached exact-rational enumeration fit.
    """
    if k < 1 or k > 7:
        raise ValueError("only k <= 7 supported")
    if k % 2 == 1:
        return 0.0
    if k == 2:
        return float(n)
    k4 = m4 - 3.0
    if k == 4:
        return 2.0 * (n - 1) + (n - 1) * (k4 + 4.0) / (2.0 * n) + (k4 + 3.0) / n
    if m6 is None:
        raise ValueError("k = 6 needs the sixth entry moment m6")
    coeffs = _trace6_coefficients()
    out = 0.0
    for bname, bval in (("1", 1.0), ("m4", float(m4)), ("m6", float(m6))):
        A, B, C, D = (float(c) for c in coeffs[bname])
        out += bval * (A * n + B + C / n + D / n ** 2)
    return out


# -- cumulant-expansion identity check ---------------------------------------

@dataclass(frozen=True)
class CumulantCheckReport:
    value: complex
    stderr: float
    bound: float
    order: int
    num_samples: int

    @property
    def within(self):
        """|value| as a multiple of stderr."""
        return abs(self.value) / self.stderr if self.stderr > 0 else np.inf


def cumulant_expansion_check(dist, z, order, num_samples, rng):
    """Monte Carlo residual of the Taylor integration-by-parts identity.

    Uses the test function phi(t) = 1/(z - t), whose a-th derivative is
    a! (z - t)^{-(a+1)}.  Returns the residual

        E[xi phi(xi)] - sum_{a=0}^{order} (kappa_{a+1} / a!) E[phi^(a)(xi)]

    with its standard error and the remainder-bound surrogate
    sup|phi^(order+1)| * E|xi|^(order+2).
    """
    if order < 0 or order > 5:
        raise ValueError("order must be in 0..5")
    z = complex(z)
    if z.imag == 0:
        raise ValueError("z must be off the real axis")
    gen = _as_generator(rng)
    xi = dist.sample(gen, num_samples)
    stat = xi / (z - xi)
    for a in range(order + 1):
        ka = cumulant(dist, a + 1)
        if ka != 0.0:
            stat = stat - ka * (z - xi) ** (-(a + 1))
    value = stat.mean()
    stderr = math.sqrt((stat.real.var(ddof=1) + stat.imag.var(ddof=1)) / num_samples)
    sup_deriv = math.factorial(order + 1) / abs(z.imag) ** (order + 2)
    bound = sup_deriv * abs_moment(dist, order + 2)
    return CumulantCheckReport(complex(value), float(stderr), float(bound),
                               order, num_samples)
