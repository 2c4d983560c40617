"""
Complex polynomial and rational-function arithmetic, Moebius automorphisms
of the unit disc and Blaschke factors.

All values are immutable; every operation returns a new object. Coefficients
are stored low degree first, the convention of ``numpy.polynomial.polynomial``.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npp

import config
from src.exceptions import DegreeOverflow, MalformedInput, ParamOutOfRange, PoleError
from src.utils import complex_to_pair, pair_to_complex

logger = logging.getLogger(__name__)

MAX_COMPOSED_DEGREE = 64

Scalar = Union[int, float, complex]


@dataclass(frozen=True)
class Polynomial:
    """
    Complex polynomial with coefficients indexed by degree.

    Exact trailing zeros are trimmed on construction so the highest stored
    coefficient is nonzero unless the polynomial is the zero polynomial.
    """
    coeffs: Tuple[complex, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs) or (0j,)
        if not all(np.isfinite(c.real) and np.isfinite(c.imag) for c in coeffs):
            raise MalformedInput("Polynomial coefficients must be finite")
        n = len(coeffs)
        while n > 1 and coeffs[n - 1] == 0:
            n -= 1
        object.__setattr__(self, 'coeffs', coeffs[:n])

    @classmethod
    def constant(cls, c: Scalar) -> 'Polynomial':
        return cls((complex(c),))

    @classmethod
    def monomial(cls, k: int, c: Scalar = 1.0) -> 'Polynomial':
        return cls((0j,) * k + (complex(c),))

    @classmethod
    def from_roots(cls, roots: Iterable[complex], leading: Scalar = 1.0) -> 'Polynomial':
        roots = list(roots)
        if not roots:
            return cls.constant(leading)
        return cls(tuple(complex(leading) * npp.polyfromroots(roots)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        # numpy's polyval is a Horner recurrence
        return npp.polyval(np.asarray(z, dtype=complex), self.array)

    def magnitude(self, radius):
        """Sum of |c_k| radius^k, the scale used for relative pole tests."""
        return npp.polyval(np.asarray(radius, dtype=float), np.abs(self.array))

    def _coerce(self, other) -> 'Polynomial':
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Polynomial(tuple(npp.polyadd(self.array, other.array)))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(tuple(-self.array))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Polynomial(tuple(npp.polysub(self.array, other.array)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Polynomial(tuple(npp.polymul(self.array, other.array)))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> 'Polynomial':
        if k < 0:
            raise ParamOutOfRange(f"Negative polynomial power {k}")
        result = Polynomial.constant(1.0)
        for _ in range(k):
            result = result * self
        return result

    def derivative(self) -> 'Polynomial':
        if self.degree == 0:
            return Polynomial.constant(0.0)
        return Polynomial(tuple(npp.polyder(self.array)))

    def scaled_argument(self, c: Scalar) -> 'Polynomial':
        """The polynomial z -> p(c z)."""
        powers = complex(c) ** np.arange(len(self.coeffs))
        return Polynomial(tuple(self.array * powers))

    def roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.array([], dtype=complex)
        return npp.polyroots(self.array)

    def to_json(self):
        return [complex_to_pair(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> 'Polynomial':
        if not isinstance(data, list) or not data:
            raise MalformedInput(f"Polynomial must be a nonempty list of [re, im] pairs, got {data!r}")
        return cls(tuple(pair_to_complex(c) for c in data))


@dataclass(frozen=True)
class RationalMap:
    """Quotient num/den of complex polynomials; no automatic cancellation."""
    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero():
            raise MalformedInput("Rational map denominator is the zero polynomial")

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> 'RationalMap':
        return cls(p, Polynomial.constant(1.0))

    @classmethod
    def identity(cls) -> 'RationalMap':
        return cls.from_polynomial(Polynomial.monomial(1))

    @classmethod
    def constant(cls, c: Scalar) -> 'RationalMap':
        return cls.from_polynomial(Polynomial.constant(c))

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    @property
    def coefficient_scale(self) -> float:
        return float(max(np.max(np.abs(self.num.array)), np.max(np.abs(self.den.array))))

    def __call__(self, z):
        return rat_eval(self, z)

    def __mul__(self, other):
        if isinstance(other, RationalMap):
            return RationalMap(self.num * other.num, self.den * other.den)
        if isinstance(other, Polynomial):
            return RationalMap(self.num * other, self.den)
        if isinstance(other, (int, float, complex, np.number)):
            return RationalMap(self.num * other, self.den)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int) -> 'RationalMap':
        return RationalMap(self.num ** k, self.den ** k)

    def derivative(self) -> 'RationalMap':
        return rat_derivative(self)

    def compose(self, inner: 'RationalMap') -> 'RationalMap':
        return rat_compose(self, inner)

    def to_json(self) -> Dict:
        return {'num': self.num.to_json(), 'den': self.den.to_json()}

    @classmethod
    def from_json(cls, data) -> 'RationalMap':
        # a bare coefficient list is read as a polynomial component
        if isinstance(data, list):
            return cls.from_polynomial(Polynomial.from_json(data))
        if not isinstance(data, dict) or 'num' not in data:
            raise MalformedInput(f"RationalMap JSON needs 'num' (and optionally 'den'), got {data!r}")
        den = Polynomial.from_json(data['den']) if 'den' in data else Polynomial.constant(1.0)
        return cls(Polynomial.from_json(data['num']), den)


def rat_eval(r: RationalMap, z):
    """
    Evaluate a rational map at a point or an array of points.

    Args:
        r: Rational map
        z: Complex scalar or array

    Returns:
        num(z)/den(z), complex for scalar input, array otherwise

    Raises:
        PoleError: if |den(z)| falls below the pole tolerance relative to
            the denominator's coefficient magnitudes at |z|
    """
    z_arr = np.asarray(z, dtype=complex)
    den = r.den(z_arr)
    scale = r.den.magnitude(np.abs(z_arr))
    tol = config.tolerance('pole')
    near_pole = np.abs(den) < tol * scale
    if np.any(near_pole):
        bad = complex(z_arr[near_pole].ravel()[0]) if z_arr.ndim else complex(z_arr)
        raise PoleError(f"Rational map has a pole at z = {bad}", {'z': complex_to_pair(bad)})
    out = r.num(z_arr) / den
    if np.ndim(out) == 0:
        return complex(out)
    return out


def rat_derivative(r: RationalMap) -> RationalMap:
    """Quotient rule at coefficient level: (num' den - num den') / den^2."""
    num = r.num.derivative() * r.den - r.num * r.den.derivative()
    return RationalMap(num, r.den * r.den)


def rat_compose(outer: RationalMap, inner: RationalMap) -> RationalMap:
    """
    Substitute ``inner`` into ``outer``.

    With outer = P/Q of degree n and inner = N/M the result is
    sum p_k N^k M^(n-k) / sum q_k N^k M^(n-k).

    Raises:
        DegreeOverflow: if the composed degree would exceed 64
    """
    n = outer.degree
    m = inner.degree
    if n * max(m, 1) > MAX_COMPOSED_DEGREE:
        raise DegreeOverflow(
            f"Composition degree {n} x {m} exceeds {MAX_COMPOSED_DEGREE}",
            {'outer_degree': n, 'inner_degree': m}
        )
    if n == 0:
        return outer

    n_powers = [Polynomial.constant(1.0)]
    m_powers = [Polynomial.constant(1.0)]
    for _ in range(n):
        n_powers.append(n_powers[-1] * inner.num)
        m_powers.append(m_powers[-1] * inner.den)

    def homogenize(p: Polynomial) -> Polynomial:
        total = Polynomial.constant(0.0)
        for k, c in enumerate(p.coeffs):
            if c != 0:
                total = total + n_powers[k] * m_powers[n - k] * c
        return total

    return RationalMap(homogenize(outer.num), homogenize(outer.den))


def canonicalize(r: RationalMap, tol: float = None) -> RationalMap:
    """Cancel numerator and denominator roots that agree within ``tol``."""
    tol = config.tolerance('canonicalize_root') if tol is None else tol
    if r.num.degree == 0 or r.den.degree == 0:
        return r
    num_roots = list(r.num.roots())
    den_roots = list(r.den.roots())
    kept_num = []
    for root in num_roots:
        match = next((k for k, d in enumerate(den_roots) if abs(d - root) <= tol), None)
        if match is None:
            kept_num.append(root)
        else:
            den_roots.pop(match)
    if len(kept_num) == len(num_roots):
        return r
    logger.debug(f"canonicalize removed {len(num_roots) - len(kept_num)} shared roots")
    return RationalMap(
        Polynomial.from_roots(kept_num, r.num.coeffs[-1]),
        Polynomial.from_roots(den_roots, r.den.coeffs[-1])
    )


def blaschke_factor(r: Scalar) -> RationalMap:
    """b_r(z) = (z - r)/(1 - conj(r) z) for |r| < 1."""
    r = complex(r)
    if abs(r) >= 1:
        raise ParamOutOfRange(f"Blaschke parameter must lie in the open disc, got {r}")
    return RationalMap(Polynomial((-r, 1.0)), Polynomial((1.0, -r.conjugate())))


def compose_parameters(r: float, s: float) -> float:
    """Parameter of b_r o b_s for real r, s: (r + s)/(1 + r s)."""
    return (r + s) / (1.0 + r * s)


@dataclass(frozen=True)
class Moebius:
    """
    Disc automorphism z -> lambda (a - z)/(1 - conj(a) z).

    The identity is (lambda = -1, a = 0) and b_r is (lambda = -1, a = r).
    Composition goes through the 2x2 matrix [[-lambda, lambda a], [-conj(a), 1]].
    """
    unimodular_factor: complex
    center: complex

    def __post_init__(self):
        lam = complex(self.unimodular_factor)
        a = complex(self.center)
        if abs(abs(lam) - 1.0) > config.tolerance('unimodular'):
            raise ParamOutOfRange(f"Moebius factor must be unimodular, got |lambda| = {abs(lam)}")
        if not abs(a) < 1.0:
            raise ParamOutOfRange(f"Moebius center must lie in the open disc, got |a| = {abs(a)}")
        object.__setattr__(self, 'unimodular_factor', lam)
        object.__setattr__(self, 'center', a)

    @classmethod
    def identity(cls) -> 'Moebius':
        return cls(-1.0 + 0j, 0j)

    @classmethod
    def rotation(cls, omega: complex) -> 'Moebius':
        """z -> omega z."""
        omega = complex(omega)
        return cls(-omega / abs(omega), 0j)

    @classmethod
    def blaschke(cls, r: Scalar) -> 'Moebius':
        """b_r(z) = (z - r)/(1 - conj(r) z)."""
        return cls(-1.0 + 0j, complex(r))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> 'Moebius':
        p, q, r, s = np.asarray(m, dtype=complex).ravel()
        if abs(s) == 0:
            raise ParamOutOfRange("Matrix does not represent a disc automorphism (s = 0)")
        lam = -p / s
        lam = lam / abs(lam)
        a = -np.conj(r / s)
        return cls(complex(lam), complex(a))

    @classmethod
    def from_boundary_triples(cls, sources: Sequence[complex], targets: Sequence[complex]) -> 'Moebius':
        """
        The automorphism sending three boundary points to three boundary points.

        Args:
            sources: (z1, z2, z3), positively ordered on the unit circle
            targets: (w1, w2, w3), positively ordered on the unit circle

        Returns:
            The unique Moebius with z_k -> w_k

        Raises:
            ParamOutOfRange: if the two triples have opposite orientation or
                contain repeated points
        """
        t_src = _to_zero_one_infinity(sources)
        t_dst = _to_zero_one_infinity(targets)
        m = np.linalg.solve(t_dst, t_src)
        if abs(m[1, 1]) == 0 or not abs(m[0, 1] / m[1, 1]) < 1.0:
            raise ParamOutOfRange(
                "Boundary triples have opposite orientation; no disc automorphism maps one onto the other",
                {'sources': [complex_to_pair(z) for z in sources],
                 'targets': [complex_to_pair(w) for w in targets]}
            )
        return cls.from_matrix(m)

    @property
    def matrix(self) -> np.ndarray:
        lam, a = self.unimodular_factor, self.center
        return np.array([[-lam, lam * a], [-a.conjugate(), 1.0]], dtype=complex)

    def apply(self, z):
        z_arr = np.asarray(z, dtype=complex)
        lam, a = self.unimodular_factor, self.center
        out = lam * (a - z_arr) / (1.0 - a.conjugate() * z_arr)
        if np.ndim(out) == 0:
            return complex(out)
        return out

    __call__ = apply

    def derivative(self, z):
        lam, a = self.unimodular_factor, self.center
        return lam * (abs(a) ** 2 - 1.0) / (1.0 - a.conjugate() * np.asarray(z, dtype=complex)) ** 2

    def boundary_factor(self, xi):
        """(1 - |a|^2)/|a - xi|^2, equal to |mu'(xi)| on the circle."""
        a = self.center
        return (1.0 - abs(a) ** 2) / np.abs(a - np.asarray(xi, dtype=complex)) ** 2

    def as_rational(self) -> RationalMap:
        lam, a = self.unimodular_factor, self.center
        return RationalMap(Polynomial((lam * a, -lam)), Polynomial((1.0, -a.conjugate())))

    def distance(self, other: 'Moebius') -> float:
        """Largest parameter difference, used to compare recovered automorphisms."""
        return max(abs(self.unimodular_factor - other.unimodular_factor), abs(self.center - other.center))

    def is_identity(self, tol: float = None) -> bool:
        tol = config.tolerance('moebius_identity') if tol is None else tol
        return self.distance(Moebius.identity()) <= tol

    def to_json(self) -> Dict:
        return {'lambda': complex_to_pair(self.unimodular_factor), 'a': complex_to_pair(self.center)}

    to_dict = to_json

    @classmethod
    def from_json(cls, data: Dict) -> 'Moebius':
        if not isinstance(data, dict) or 'lambda' not in data or 'a' not in data:
            raise MalformedInput(f"Moebius JSON needs 'lambda' and 'a', got {data!r}")
        return cls(pair_to_complex(data['lambda']), pair_to_complex(data['a']))


def _to_zero_one_infinity(points: Sequence[complex]) -> np.ndarray:
    """Matrix of the linear fractional map sending (z1, z2, z3) to (0, 1, inf)."""
    if len(points) != 3:
        raise ParamOutOfRange(f"Expected three boundary points, got {len(points)}")
    z1, z2, z3 = (complex(z) for z in points)
    for z in (z1, z2, z3):
        if abs(abs(z) - 1.0) > config.tolerance('boundary_point'):
            raise ParamOutOfRange(f"Boundary point {z} is not on the unit circle")
    if min(abs(z1 - z2), abs(z2 - z3), abs(z1 - z3)) < config.tolerance('boundary_triple_separation'):
        raise ParamOutOfRange("Boundary triple contains repeated points")
    return np.array([[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]], dtype=complex)


def moebius_apply(m: Moebius, z):
    return m.apply(z)


def moebius_compose(m1: Moebius, m2: Moebius) -> Moebius:
    """m1 after m2."""
    return Moebius.from_matrix(m1.matrix @ m2.matrix)


def moebius_invert(m: Moebius) -> Moebius:
    p, q, r, s = m.matrix.ravel()
    return Moebius.from_matrix(np.array([[s, -q], [-r, p]], dtype=complex))
