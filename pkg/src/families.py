"""
Constructors and closed forms for the example families of analytic discs.

    f_r            (1/sqrt2)(z^2, b_r(z)^2)              r in (0, 1)
    f_rs           (1/sqrt2)(b_r(z)^2, b_s(z)^2)         r != s in (-1, 1)
    f_symmetric    f_{r,-r}                              r in (0, 1)
    g_alpha        z b_alpha(z) b_beta(z), beta = -alpha/(1 + alpha)
    f_three_crossing (1/2)(z^3, g_alpha0, g_alpha1, g_alpha)

The same module parses family references for the CLI and owns the catalog
file with the stored alpha_1 choice.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

import config
from src.complex_rational import Polynomial, RationalMap, blaschke_factor, rat_derivative, rat_eval
from src.embedding import EmbeddingMap
from src.exceptions import (DegeneratePair, InjectivityScreenFailed, MalformedInput, ParamOutOfRange,
                            PoleError, RootFindingFailure)
from src.utils import complex_to_pair

logger = logging.getLogger(__name__)

OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)
INV_SQRT2 = 1.0 / math.sqrt(2.0)

FAMILY_PARAMS = {
    'f_r': ('r',),
    'f_rs': ('r', 's'),
    'f_symmetric': ('r',),
    'g_alpha': ('alpha',),
    'f_three_crossing': ('alpha0', 'alpha1', 'alpha'),
}


def _open_interval(name: str, value: float, low: float, high: float) -> float:
    value = float(value)
    if not (low < value < high):
        raise ParamOutOfRange(f"{name} must lie in ({low}, {high}), got {value}", {name: value})
    return value


def make_f_r(r: float) -> EmbeddingMap:
    r = _open_interval('r', r, 0.0, 1.0)
    z_squared = RationalMap.from_polynomial(Polynomial.monomial(2))
    return EmbeddingMap(2, INV_SQRT2, (z_squared, blaschke_factor(r) ** 2))


def make_f_rs(r: float, s: float) -> EmbeddingMap:
    r = _open_interval('r', r, -1.0, 1.0)
    s = _open_interval('s', s, -1.0, 1.0)
    if r == s:
        raise DegeneratePair(f"f_rs needs r != s, got r = s = {r}")
    return EmbeddingMap(2, INV_SQRT2, (blaschke_factor(r) ** 2, blaschke_factor(s) ** 2))


def make_f_symmetric(r: float) -> EmbeddingMap:
    r = _open_interval('r', r, 0.0, 1.0)
    return make_f_rs(r, -r)


def reduce_to_base(r: float, s: float) -> Tuple[float, bool]:
    """
    Reduce f_{r,s} to f_{0,rho} with rho > 0.

    f_{r,s} o b_{-r} = f_{0,(s-r)/(1-sr)}; a negative parameter is made
    positive by the rotation z -> -z, reported as ``flip``.
    """
    r = _open_interval('r', r, -1.0, 1.0)
    s = _open_interval('s', s, -1.0, 1.0)
    if r == s:
        raise DegeneratePair(f"Cannot normalize f_rs with r = s = {r}")
    rho = (s - r) / (1.0 - s * r)
    return abs(rho), rho < 0


def normalize_to_symmetric(r: float, s: float) -> float:
    """The unique t in (-1, 0) with f_{0,rho} o b_t = f_{t,-t}."""
    rho, _ = reduce_to_base(r, s)
    # (-1 + sqrt(1 - rho^2))/rho without the cancellation
    return -rho / (1.0 + math.sqrt(1.0 - rho * rho))


def g_beta(alpha: float) -> float:
    return -alpha / (1.0 + alpha)


def make_g_alpha(alpha: float) -> RationalMap:
    """
    Degree-3 rational map z b_alpha(z) b_beta(z) with g(1) = g(w) = g(w^2) = 1.

    For alpha in (-1/2, 1) this is a Blaschke product. Below -1/2 the beta
    factor (z - beta)/(1 - beta z) is still unimodular on the circle but has
    its pole 1/beta inside the disc. At alpha = -1/2 that factor degenerates
    to the constant -1 and the map is rejected.
    """
    alpha = _open_interval('alpha', alpha, -1.0, 1.0)
    beta = g_beta(alpha)
    if abs(abs(beta) - 1.0) <= config.tolerance('unimodular'):
        raise ParamOutOfRange(
            f"alpha = {alpha} gives beta = {beta}; the last factor degenerates to a constant",
            {'alpha': alpha, 'beta': beta}
        )
    z = RationalMap.from_polynomial(Polynomial.monomial(1))
    if abs(beta) > 1.0:
        logger.debug(f"g_alpha with alpha = {alpha} has a pole at {1.0 / beta} inside the disc")
        beta_factor = RationalMap(Polynomial((-beta, 1.0)), Polynomial((1.0, -beta)))
        return z * blaschke_factor(alpha) * beta_factor
    return z * blaschke_factor(alpha) * blaschke_factor(beta)


def _blaschke_parameter(name: str, value: float) -> float:
    """g-parameters of an analytic disc must keep g_alpha a Blaschke product."""
    return _open_interval(name, value, -0.5, 1.0)


def log_derivative_g(alpha: float, z: complex) -> complex:
    """
    g'/g = 1/z + 1/(z - alpha) + 1/(z - beta) + alpha/(1 - alpha z) + beta/(1 - beta z).

    alpha = 1 is accepted as the limiting display.
    """
    alpha = float(alpha)
    if not (-1.0 < alpha <= 1.0):
        raise ParamOutOfRange(f"alpha must lie in (-1, 1], got {alpha}")
    beta = g_beta(alpha)
    z = complex(z)
    tol = config.tolerance('pole')
    denominators = (z, z - alpha, z - beta, 1.0 - alpha * z, 1.0 - beta * z)
    if min(abs(d) for d in denominators) < tol:
        raise PoleError(f"log derivative of g_alpha is singular at z = {z}", {'z': complex_to_pair(z)})
    return 1.0 / z + 1.0 / (z - alpha) + 1.0 / (z - beta) + alpha / (1.0 - alpha * z) + beta / (1.0 - beta * z)


def injectivity_polynomial(alpha0: float) -> Polynomial:
    """
    h(z) with g(z) - g(w z) = z h(z) / (Q(z) Q(w z)).

    Writing g = z P/Q, h = P(z) Q(wz) - w P(wz) Q(z).
    """
    beta0 = g_beta(alpha0)
    p = Polynomial.from_roots([alpha0, beta0])
    q = Polynomial((1.0, -alpha0)) * Polynomial((1.0, -beta0))
    return p * q.scaled_argument(OMEGA) - p.scaled_argument(OMEGA) * q * OMEGA


def winding_count(p: Polynomial, radius: float, samples: int = None) -> int:
    """Number of zeros of p inside |z| < radius by the argument principle."""
    samples = samples or config.ROOT_FINDING_CONFIG['contour_samples']
    contour = radius * np.exp(2j * np.pi * np.arange(samples + 1) / samples)
    phase = np.unwrap(np.angle(p(contour)))
    return int(round((phase[-1] - phase[0]) / (2.0 * np.pi)))


def _box_count(p: Polynomial, box: Tuple[float, float, float, float], samples: int) -> int:
    x0, x1, y0, y1 = box
    s = np.linspace(0.0, 1.0, samples, endpoint=False)
    edges = np.concatenate([
        x0 + (x1 - x0) * s + 1j * y0,
        x1 + 1j * (y0 + (y1 - y0) * s),
        x1 - (x1 - x0) * s + 1j * y1,
        x0 + 1j * (y1 - (y1 - y0) * s),
        [x0 + 1j * y0],
    ])
    phase = np.unwrap(np.angle(p(edges)))
    return int(round((phase[-1] - phase[0]) / (2.0 * np.pi)))


def _newton_polish(p: Polynomial, z: complex) -> complex:
    dp = p.derivative()
    for _ in range(config.ROOT_FINDING_CONFIG['newton_iterations']):
        slope = dp(z)
        if slope == 0:
            break
        step = p(z) / slope
        z = z - step
        if abs(step) < config.tolerance('newton_step'):
            break
    return complex(z)


def _dedupe(points: Sequence[complex], tol: float) -> List[complex]:
    unique: List[complex] = []
    for z in points:
        if all(abs(z - u) > tol for u in unique):
            unique.append(z)
    return unique


def roots_in_disc(p: Polynomial, radius: float = None) -> List[complex]:
    """
    Zeros of p inside |z| < radius.

    The argument principle on the circle gives the count; boxes are
    subdivided while their own winding count is positive and the survivors
    are polished by Newton. Companion-matrix roots are the fallback when
    subdivision cannot account for every zero.

    Raises:
        RootFindingFailure: if neither route matches the contour count
    """
    radius = radius or 1.0 - config.ROOT_FINDING_CONFIG['contour_margin']
    if p.degree > config.ROOT_FINDING_CONFIG['max_degree']:
        raise RootFindingFailure(f"Degree {p.degree} exceeds {config.ROOT_FINDING_CONFIG['max_degree']}")
    if p.degree == 0:
        return []
    expected = winding_count(p, radius)
    if expected == 0:
        return []

    samples = config.ROOT_FINDING_CONFIG['edge_samples']
    boxes = [(-1.0, 1.0, -1.0, 1.0)]
    for _ in range(config.ROOT_FINDING_CONFIG['max_depth']):
        refined = []
        for x0, x1, y0, y1 in boxes:
            xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            for child in ((x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)):
                if _box_count(p, child, samples) > 0:
                    refined.append(child)
        boxes = refined
    polished = [_newton_polish(p, complex(0.5 * (b[0] + b[1]), 0.5 * (b[2] + b[3]))) for b in boxes]
    found = [z for z in _dedupe(polished, config.tolerance('root_dedupe')) if abs(z) < radius]
    if len(found) == expected:
        return sorted(found, key=lambda z: (abs(z), np.angle(z)))

    logger.debug(f"subdivision found {len(found)} of {expected} zeros; trying companion roots")
    companion = [_newton_polish(p, complex(z)) for z in p.roots()]
    found = [z for z in companion if abs(z) < radius]
    if len(found) == expected:
        return sorted(found, key=lambda z: (abs(z), np.angle(z)))
    raise RootFindingFailure(
        f"Located {len(found)} zeros inside |z| < {radius} but the argument principle counts {expected}",
        {'expected': expected, 'found': [complex_to_pair(z) for z in found], 'radius': radius}
    )


def screen_roots(alpha0: float) -> List[complex]:
    """Nonzero solutions of g_alpha0(z) = g_alpha0(w z) inside the disc."""
    roots = roots_in_disc(injectivity_polynomial(alpha0))
    return [z for z in roots if abs(z) > config.tolerance('screen_zero_root')]


def root_separations(alpha1: float, roots: Sequence[complex]) -> List[float]:
    """|g_alpha1(z) - g_alpha1(w z)| at each root of the alpha0 system."""
    g1 = make_g_alpha(alpha1)
    return [abs(rat_eval(g1, z) - rat_eval(g1, OMEGA * z)) for z in roots]


def injectivity_screen(alpha0: float, alpha1: float) -> bool:
    """
    True when g_alpha1 separates every nonzero root of g_alpha0(z) = g_alpha0(w z) in D.

    Raises:
        RootFindingFailure: propagated with diagnostics from the root search
    """
    alpha0 = _open_interval('alpha0', alpha0, 0.0, 1.0)
    alpha1 = _open_interval('alpha1', alpha1, -1.0, 1.0)
    separations = root_separations(alpha1, screen_roots(alpha0))
    ok = all(s >= config.tolerance('root_separation') for s in separations)
    logger.debug(f"injectivity screen alpha0={alpha0}, alpha1={alpha1}: {len(separations)} roots, ok={ok}")
    return ok


def scan_alpha1(alpha0: float, step: float = None, max_workers: int = None) -> Dict:
    """
    Pick alpha1 on a grid over (-1/2, 1) maximizing the worst root separation.

    The grid stays inside (-1/2, 1) because g_alpha1 must remain a Blaschke
    product for the disc to be analytic, and it skips 0, where g_alpha1 = z^3
    repeats the first component. Ties (including the no-root case, where
    every alpha1 scores infinity) break toward the smaller |alpha1| and then
    toward the positive value.
    """
    step = step or config.ROOT_FINDING_CONFIG['scan_step']
    max_workers = max_workers or config.PERFORMANCE_CONFIG['max_workers']
    roots = screen_roots(alpha0)
    lower, upper = -0.5, 1.0
    first, last = int(round(lower / step)) + 1, int(round(upper / step)) - 1
    grid = [round(k * step, 12) for k in range(first, last + 1) if k != 0]

    def score(alpha1: float) -> float:
        separations = root_separations(alpha1, roots)
        return min(separations) if separations else float('inf')

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        scores = list(pool.map(score, grid))
    best = max(range(len(grid)), key=lambda k: (scores[k], -abs(grid[k]), grid[k]))
    min_separation = scores[best]
    return {
        'alpha0': alpha0,
        'alpha1': grid[best],
        'min_separation': None if math.isinf(min_separation) else min_separation,
        'roots_in_disc': len(roots),
        'roots': [complex_to_pair(z) for z in roots],
        'scan_step': step,
        'scan_domain': [lower, upper],
        'tie_break': 'smaller magnitude, then positive',
    }


@lru_cache(maxsize=None)
def _load_catalog(path: str) -> str:
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def load_catalog(path: str = None) -> Dict:
    path = path or config.CATALOG_CONFIG['path']
    try:
        return json.loads(_load_catalog(path))
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedInput(f"Cannot read family catalog {path}: {e}")


def catalog_three_crossing_params() -> Dict[str, float]:
    entry = load_catalog()['f_three_crossing']
    return {'alpha0': entry['alpha0'], 'alpha1': entry['alpha1'], 'alpha': entry['alpha']}


def make_f_three_crossing(alpha0: float = None, alpha1: float = None, alpha: float = None) -> EmbeddingMap:
    """
    Disc with a single three-point self-crossing at {1, w, w^2}.

    Args:
        alpha0: Parameter of the second component, in (0, 1)
        alpha1: Parameter of the third component; must pass injectivity_screen
        alpha: Free parameter of the last component, in (-1/2, 1)

    Raises:
        ParamOutOfRange: for a g-parameter outside (-1/2, 1)
        InjectivityScreenFailed: if alpha1 does not separate the alpha0 roots

    Returns:
        EmbeddingMap (1/2)(z^3, g_alpha0, g_alpha1, g_alpha)
    """
    defaults = catalog_three_crossing_params()
    alpha0 = defaults['alpha0'] if alpha0 is None else alpha0
    alpha1 = defaults['alpha1'] if alpha1 is None else alpha1
    alpha = defaults['alpha'] if alpha is None else alpha
    alpha0 = _open_interval('alpha0', alpha0, 0.0, 1.0)
    alpha1 = _blaschke_parameter('alpha1', alpha1)
    alpha = _blaschke_parameter('alpha', alpha)
    components = (make_g_alpha(alpha0), make_g_alpha(alpha1), make_g_alpha(alpha))
    if not injectivity_screen(alpha0, alpha1):
        raise InjectivityScreenFailed(f"alpha1 = {alpha1} fails the injectivity screen for alpha0 = {alpha0}",
                                      {'alpha0': alpha0, 'alpha1': alpha1})
    z_cubed = RationalMap.from_polynomial(Polynomial.monomial(3))
    return EmbeddingMap(4, 0.5, (z_cubed,) + components)


def g_contribution(alpha: float, xi: complex) -> float:
    """xi g'(xi)/g(xi) for g_alpha on the circle, the per-component share of A."""
    xi = complex(xi)
    return float((xi * log_derivative_g(alpha, xi)).real)


@dataclass
class FamilySpec:
    """Reference to a catalog family, e.g. ``f_r:r=0.5``."""
    kind: str
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FAMILY_PARAMS:
            raise MalformedInput(f"Unknown family {self.kind!r}; expected one of {sorted(FAMILY_PARAMS)}")
        unknown = set(self.params) - set(FAMILY_PARAMS[self.kind])
        if unknown:
            raise MalformedInput(f"Unknown parameters {sorted(unknown)} for {self.kind}")

    @classmethod
    def parse(cls, text: str) -> 'FamilySpec':
        kind, _, rest = text.strip().partition(':')
        params = {}
        for item in filter(None, (part.strip() for part in rest.split(','))):
            name, sep, value = item.partition('=')
            if not sep:
                raise MalformedInput(f"Expected name=value in {text!r}, got {item!r}")
            try:
                params[name.strip()] = float(value)
            except ValueError:
                raise MalformedInput(f"Parameter {name.strip()} in {text!r} is not a number")
        return cls(kind.strip(), params)

    @classmethod
    def from_json(cls, data: Dict) -> 'FamilySpec':
        if not isinstance(data, dict) or 'kind' not in data:
            raise MalformedInput("FamilySpec JSON needs 'kind' and 'params'")
        try:
            params = {k: float(v) for k, v in data.get('params', {}).items()}
        except (TypeError, ValueError) as e:
            raise MalformedInput(f"Invalid FamilySpec params: {e}")
        return cls(data['kind'], params)

    def with_param(self, name: str, value: float) -> 'FamilySpec':
        params = dict(self.params)
        params[name] = value
        return FamilySpec(self.kind, params)

    def build(self) -> EmbeddingMap:
        # f_three_crossing falls back to the catalog for anything omitted
        if self.kind != 'f_three_crossing':
            missing = set(FAMILY_PARAMS[self.kind]) - set(self.params)
            if missing:
                raise MalformedInput(f"Missing parameters {sorted(missing)} for {self.kind}")
        p = self.params
        if self.kind == 'f_r':
            return make_f_r(p['r'])
        if self.kind == 'f_rs':
            return make_f_rs(p['r'], p['s'])
        if self.kind == 'f_symmetric':
            return make_f_symmetric(p['r'])
        if self.kind == 'g_alpha':
            return EmbeddingMap(1, 1.0, (make_g_alpha(p['alpha']),))
        return make_f_three_crossing(p.get('alpha0'), p.get('alpha1'), p.get('alpha'))

    def label(self) -> str:
        inner = ','.join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.kind}:{inner}" if inner else self.kind

    def to_dict(self) -> Dict:
        return {'kind': self.kind, 'params': dict(self.params)}


def catalog_specs() -> List[FamilySpec]:
    return [FamilySpec.from_json(entry) for entry in load_catalog()['families']]


def check_log_derivative(alpha: float, z: complex) -> float:
    """|g'/g from the closed form - g'/g from the coefficient derivative| at z."""
    g = make_g_alpha(alpha)
    numeric = rat_eval(rat_derivative(g), z) / rat_eval(g, z)
    return abs(numeric - log_derivative_g(alpha, z))
