"""
Boundary self-crossings, the semi-invariant A_f and the obstruction classifier.

A_f(xi) = <f(xi), f'(xi) xi> is positive on the circle for an analytic disc
and transforms under a disc automorphism mu = lambda (a - z)/(1 - conj(a) z)
as A_{f o mu}(xi) = A_f(mu(xi)) (1 - |a|^2)/|a - xi|^2. Across a
coincidence class its projective ratios obstruct isomorphism; the classifier
here only ever certifies that those necessary conditions hold.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from src.complex_rational import Moebius, moebius_compose, moebius_invert
from src.embedding import EmbeddingMap, emb_deriv1, emb_eval, reduction_to_pair, transversality_pairing
from src.exceptions import ConvergenceFailure, ParamOutOfRange, PatternMismatch, TransversalityViolation
from src.utils import angle_key, complex_to_pair

logger = logging.getLogger(__name__)

DISTINCT_CROSSING_TYPE = 'DistinctCrossingType'
RATIO_OBSTRUCTION = 'RatioObstruction'
CANDIDATE_AUTOMORPHISMS = 'CandidateAutomorphisms'

EQUALITY_UNDECIDED = 'equality undecided'


def a_invariant(f: EmbeddingMap, xi: complex) -> float:
    """
    Semi-invariant A_f(xi) = Re <f(xi), f'(xi) xi>.

    Args:
        f: Embedding map
        xi: Point on the unit circle

    Returns:
        Positive real value of the transversality pairing

    Raises:
        TransversalityViolation: if the pairing is not a positive real
    """
    xi = complex(xi)
    if abs(abs(xi) - 1.0) > config.tolerance('unimodular'):
        raise ParamOutOfRange(f"A_f needs a unimodular point, got |xi| = {abs(xi)}")
    value = transversality_pairing(f, xi)
    if abs(value.imag) > config.tolerance('a_imaginary') * max(1.0, abs(value.real)):
        raise TransversalityViolation(
            f"A_f({xi}) has imaginary part {value.imag:.3e}",
            {'xi': complex_to_pair(xi), 'value': complex_to_pair(value)}
        )
    if value.real <= config.tolerance('a_minimum'):
        raise TransversalityViolation(
            f"A_f({xi}) = {value.real:.3e} is not positive",
            {'xi': complex_to_pair(xi), 'value': complex_to_pair(value)}
        )
    return float(value.real)


def a_under_moebius(f: EmbeddingMap, m: Moebius, xi: complex) -> float:
    """A_{f o m}(xi) through the transformation law A_f(m(xi)) (1 - |a|^2)/|a - xi|^2."""
    xi = complex(xi)
    if abs(abs(xi) - 1.0) > config.tolerance('unimodular'):
        raise ParamOutOfRange(f"A_f needs a unimodular point, got |xi| = {abs(xi)}")
    image = m.apply(xi)
    image = image / abs(image)
    return a_invariant(f, image) * float(m.boundary_factor(xi))


@dataclass
class CrossingPattern:
    """Coincidence classes of f on the unit circle."""
    classes: List[List[complex]]
    residuals: List[float]
    failures: List[Dict] = field(default_factory=list)
    n_samples: int = 0

    @property
    def points(self) -> List[complex]:
        return sorted((p for cls in self.classes for p in cls), key=angle_key)

    @property
    def class_sizes(self) -> List[int]:
        return [len(cls) for cls in self.classes]

    def is_empty(self) -> bool:
        return not self.classes

    def to_dict(self) -> Dict:
        return {
            'classes': [[complex_to_pair(p) for p in cls] for cls in self.classes],
            'class_angles': [[angle_key(p) for p in cls] for cls in self.classes],
            'residuals': self.residuals,
            'failures': self.failures,
            'n_samples': self.n_samples,
        }


@dataclass
class RatioTuple:
    """A-values attached to one coincidence class, compared projectively."""
    points: List[complex]
    values: List[float]

    def normalized(self) -> List[float]:
        return [v / self.values[0] for v in self.values]

    def to_dict(self) -> Dict:
        return {
            'points': [complex_to_pair(p) for p in self.points],
            'values': self.values,
            'normalized': self.normalized(),
        }


@dataclass
class ObstructionVerdict:
    """Outcome of comparing two crossing patterns with their ratio tuples."""
    kind: str
    candidates: List[Moebius] = field(default_factory=list)
    evidence: Dict = field(default_factory=dict)
    open_question: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            'kind': self.kind,
            'candidates': [m.to_json() for m in self.candidates],
            'evidence': self.evidence,
            'open_question': self.open_question,
        }


def _pair_distance_sq(rows: np.ndarray, cols: np.ndarray, row_norms: np.ndarray, col_norms: np.ndarray) -> np.ndarray:
    gram = rows @ cols.conj().T
    return np.maximum(row_norms[:, None] + col_norms[None, :] - 2.0 * gram.real, 0.0)


def _candidate_pairs(values: np.ndarray, speeds: np.ndarray, step: float) -> List[Tuple[int, int]]:
    """Grid-local minima of ||f(e^it) - f(e^is)|| that fall under the detection radius."""
    n = len(values)
    norms = np.sum(np.abs(values) ** 2, axis=-1)
    detect = config.tolerance('crossing_detection')
    min_sep = config.tolerance('crossing_separation')
    block = config.CROSSING_CONFIG['block_rows']
    cols = np.arange(n)
    pairs = []
    for start in range(0, n, block):
        stop = min(start + block, n)
        rows = np.arange(start - 1, stop + 1) % n
        d2 = _pair_distance_sq(values[rows], values, norms[rows], norms)
        centre = d2[1:-1]
        is_min = np.ones_like(centre, dtype=bool)
        for di in (-1, 0, 1):
            neighbour = d2[1 + di:d2.shape[0] - 1 + di]
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                is_min &= centre <= np.roll(neighbour, -dj, axis=1)
        idx = np.arange(start, stop)
        radius = np.maximum(detect, (speeds[idx][:, None] + speeds[None, :]) * step)
        gap = np.abs(idx[:, None] - cols[None, :])
        separation = np.minimum(gap, n - gap) * step
        flagged = is_min & (centre < radius ** 2) & (separation > min_sep) & (cols[None, :] > idx[:, None])
        for i, j in zip(*np.nonzero(flagged)):
            pairs.append((int(idx[i]), int(j)))
    return pairs


def _refine_pair(f: EmbeddingMap, theta: float, phi: float) -> Tuple[float, float, float, int]:
    """Damped Gauss-Newton for f(e^i theta) = f(e^i phi) in the two real unknowns."""
    damping = config.CROSSING_CONFIG['damping']
    target = config.tolerance('refinement_residual')

    def residual(t, p):
        return emb_eval(f, np.exp(1j * t)) - emb_eval(f, np.exp(1j * p))

    r = residual(theta, phi)
    norm = float(np.linalg.norm(r))
    iterations = 0
    for iterations in range(1, config.CROSSING_CONFIG['max_iterations'] + 1):
        if norm <= target * 1e-3:
            break
        x, y = np.exp(1j * theta), np.exp(1j * phi)
        jt = emb_deriv1(f, x) * 1j * x
        jp = -emb_deriv1(f, y) * 1j * y
        jac = np.column_stack([np.concatenate([jt.real, jt.imag]), np.concatenate([jp.real, jp.imag])])
        step = np.linalg.lstsq(jac, -np.concatenate([r.real, r.imag]), rcond=None)[0]
        scale = 1.0
        improved = False
        for _ in range(config.CROSSING_CONFIG['max_halvings']):
            t_new, p_new = theta + scale * step[0], phi + scale * step[1]
            r_new = residual(t_new, p_new)
            norm_new = float(np.linalg.norm(r_new))
            if norm_new < norm:
                theta, phi, r, norm = t_new, p_new, r_new, norm_new
                improved = True
                break
            scale *= damping
        if not improved:
            break
    return theta, phi, norm, iterations


class _PointClusters:
    """
    Union-find over clusters of refined boundary points.

    A tangential crossing only refines to about the square root of the
    residual target, so each cluster keeps every candidate point it received
    and the representative is chosen once the classes are known.
    """

    def __init__(self, radius: float):
        self.radius = radius
        self.members: List[List[complex]] = []
        self.parent: List[int] = []

    def index(self, point: complex) -> int:
        for k, members in enumerate(self.members):
            if any(abs(p - point) <= self.radius for p in members):
                members.append(point)
                return k
        self.members.append([point])
        self.parent.append(len(self.parent))
        return len(self.members) - 1

    def find(self, k: int) -> int:
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def groups(self) -> List[List[List[complex]]]:
        groups: Dict[int, List[List[complex]]] = {}
        for k, members in enumerate(self.members):
            groups.setdefault(self.find(k), []).append(members)
        return [g for g in groups.values() if len(g) >= 2]


def _representatives(f: EmbeddingMap, group: Sequence[Sequence[complex]]) -> List[complex]:
    """Per cluster, the candidate whose image lies closest to every other cluster of the class."""
    images = [emb_eval(f, np.array(members)) for members in group]
    reps = []
    for k, members in enumerate(group):
        score = np.zeros(len(members))
        for other, other_images in enumerate(images):
            if other == k:
                continue
            gaps = np.linalg.norm(images[k][:, None, :] - other_images[None, :, :], axis=-1)
            score = np.maximum(score, gaps.min(axis=1))
        reps.append(complex(members[int(np.argmin(score))]))
    return sorted(reps, key=angle_key)


def _class_residual(f: EmbeddingMap, cls: Sequence[complex]) -> float:
    images = emb_eval(f, np.array(cls))
    diffs = images[:, None, :] - images[None, :, :]
    return float(np.max(np.linalg.norm(diffs, axis=-1)))


def find_self_crossings(f: EmbeddingMap, n_samples: int = None) -> CrossingPattern:
    """
    Locate the boundary self-crossings of f.

    Args:
        f: Embedding map
        n_samples: Size of the boundary grid (>= 1024)

    Returns:
        CrossingPattern with refined coincidence classes; seeds whose
        refinement failed and classes whose representatives miss the
        residual target are listed in ``failures``
    """
    n_samples = n_samples or config.CROSSING_CONFIG['default_samples']
    if n_samples < config.CROSSING_CONFIG['min_samples']:
        raise ParamOutOfRange(f"n_samples must be at least {config.CROSSING_CONFIG['min_samples']}, got {n_samples}")

    step = 2.0 * np.pi / n_samples
    grid = np.exp(1j * step * np.arange(n_samples))
    values = emb_eval(f, grid)
    speeds = np.linalg.norm(emb_deriv1(f, grid), axis=-1)
    seeds = _candidate_pairs(values, speeds, step)
    logger.debug(f"crossing scan: {len(seeds)} seeds on {n_samples} samples")

    target = config.tolerance('refinement_residual')
    min_sep = config.tolerance('crossing_separation')
    clusters = _PointClusters(config.tolerance('crossing_cluster'))
    failures = []
    for i, j in seeds:
        theta, phi, norm, iterations = _refine_pair(f, step * i, step * j)
        xi, zeta = np.exp(1j * theta), np.exp(1j * phi)
        separation = abs(np.angle(xi / zeta))
        if norm > target or separation <= min_sep:
            reason = 'residual' if norm > target else 'collapsed'
            failure = ConvergenceFailure(f"seed ({i}, {j}) rejected: {reason}", {
                'seed': [step * i, step * j],
                'residual': norm,
                'separation': separation,
                'iterations': iterations,
                'reason': reason,
            })
            failures.append(failure.to_dict())
            logger.debug(f"{failure.message}, residual {norm:.3e}, separation {separation:.3e}")
            continue
        clusters.union(clusters.index(complex(xi)), clusters.index(complex(zeta)))

    classes = []
    residuals = []
    for group in clusters.groups():
        cls = _representatives(f, group)
        residual = _class_residual(f, cls)
        if residual > target:
            failure = ConvergenceFailure("class representatives miss the residual target", {
                'class': [complex_to_pair(p) for p in cls],
                'residual': residual,
                'reason': 'class_residual',
            })
            failures.append(failure.to_dict())
            logger.warning(f"dropped crossing class of size {len(cls)}: residual {residual:.3e}")
            continue
        classes.append(cls)
        residuals.append(residual)
    order = sorted(range(len(classes)), key=lambda k: angle_key(classes[k][0]))
    classes = [classes[k] for k in order]
    residuals = [residuals[k] for k in order]
    logger.info(f"Found {len(classes)} crossing classes with sizes {[len(c) for c in classes]}")
    return CrossingPattern(classes=classes, residuals=residuals, failures=failures, n_samples=n_samples)


def ratio_tuple(f: EmbeddingMap, cls: Sequence[complex]) -> RatioTuple:
    """A-values along one coincidence class."""
    points = [complex(p) / abs(p) for p in cls]
    return RatioTuple(points=points, values=[a_invariant(f, p) for p in points])


def ratio_tuples(f: EmbeddingMap, pattern: CrossingPattern) -> List[RatioTuple]:
    return [ratio_tuple(f, cls) for cls in pattern.classes]


def alpha_beta(af_plus: float, af_minus: float, ag_plus: float, ag_minus: float) -> Tuple[float, float]:
    """
    Parameters of the two automorphisms that can relate discs crossing at +-1.

    With f ~ g o mu, mu either fixes +-1 (mu_alpha) or swaps them (mu_beta).

    Args:
        af_plus: A_f(1)
        af_minus: A_f(-1)
        ag_plus: A_g(1)
        ag_minus: A_g(-1)

    Returns:
        (alpha, beta), both in (-1, 1)
    """
    p = np.sqrt(af_plus * ag_minus)
    q = np.sqrt(af_minus * ag_plus)
    u = np.sqrt(af_plus * ag_plus)
    v = np.sqrt(af_minus * ag_minus)
    return float((p - q) / (p + q)), float((u - v) / (u + v))


def mu_alpha(alpha: float) -> Moebius:
    """z -> (z - alpha)/(1 - alpha z), fixing 1 and -1."""
    return Moebius(-1.0 + 0j, complex(alpha))


def mu_beta(beta: float) -> Moebius:
    """z -> (beta - z)/(1 - beta z), swapping 1 and -1."""
    return Moebius(1.0 + 0j, complex(beta))


def _require_plus_minus_one(pattern: CrossingPattern, label: str) -> None:
    tol = config.tolerance('class_identity')
    ok = (len(pattern.classes) == 1 and len(pattern.classes[0]) == 2
          and all(min(abs(p - 1.0), abs(p + 1.0)) <= tol for p in pattern.classes[0])
          and abs(pattern.classes[0][0] - pattern.classes[0][1]) > tol)
    if not ok:
        raise PatternMismatch(
            f"{label} must cross exactly at {{-1, 1}}",
            {'pattern': pattern.to_dict()}
        )


def iso_candidates_two_point(f: EmbeddingMap, g: EmbeddingMap,
                             pattern_f: CrossingPattern = None,
                             pattern_g: CrossingPattern = None) -> Tuple[Moebius, Moebius]:
    """
    The alpha-type and beta-type automorphisms for discs crossing only at +-1.

    Args:
        f: First embedding
        g: Second embedding
        pattern_f: Precomputed crossing pattern of f (computed when omitted)
        pattern_g: Precomputed crossing pattern of g (computed when omitted)

    Returns:
        (mu_alpha, mu_beta) with f ~ g o mu in the projective A sense

    Raises:
        PatternMismatch: if either map does not cross exactly at {-1, 1}
    """
    pattern_f = pattern_f or find_self_crossings(f)
    pattern_g = pattern_g or find_self_crossings(g)
    _require_plus_minus_one(pattern_f, 'f')
    _require_plus_minus_one(pattern_g, 'g')
    alpha, beta = alpha_beta(a_invariant(f, 1.0), a_invariant(f, -1.0), a_invariant(g, 1.0), a_invariant(g, -1.0))
    logger.info(f"Two-point candidates: alpha = {alpha:.12g}, beta = {beta:.12g}")
    return mu_alpha(alpha), mu_beta(beta)


def _match_classes(m: Moebius, p_f: CrossingPattern, p_g: CrossingPattern) -> Tuple[Optional[List[Tuple[int, List[int]]]], float]:
    """Map g's classes onto f's classes through m; returns per-class (f class, positions) or None."""
    tol = config.tolerance('pattern_match')
    f_points = [(c, k, p) for c, cls in enumerate(p_f.classes) for k, p in enumerate(cls)]
    used = set()
    matching = []
    worst = 0.0
    for cls in p_g.classes:
        images = np.atleast_1d(m.apply(np.array(cls)))
        target_class = None
        positions = []
        for image in images:
            c, k, p = min(f_points, key=lambda item: abs(item[2] - image))
            distance = abs(p - image)
            worst = max(worst, distance)
            if distance > tol or (target_class is not None and c != target_class):
                return None, worst
            target_class = c
            positions.append(k)
        if target_class in used or len(p_f.classes[target_class]) != len(cls) or len(set(positions)) != len(cls):
            return None, worst
        used.add(target_class)
        matching.append((target_class, positions))
    return matching, worst


def _ratio_mismatch(m: Moebius, matching, p_g: CrossingPattern,
                    rt_f: Sequence[RatioTuple], rt_g: Sequence[RatioTuple]) -> float:
    worst = 0.0
    for k, (c, positions) in enumerate(matching):
        points = np.array(p_g.classes[k])
        factors = np.atleast_1d(m.boundary_factor(points))
        expected = np.array([rt_f[c].values[pos] for pos in positions]) * factors
        scaling = np.asarray(rt_g[k].values) / expected
        worst = max(worst, float(np.max(np.abs(scaling / scaling[0] - 1.0))))
    return worst


def _two_point_candidates(p_f: CrossingPattern, p_g: CrossingPattern,
                          rt_f: Sequence[RatioTuple], rt_g: Sequence[RatioTuple]) -> Tuple[List[Moebius], Dict]:
    f1, f2 = p_f.classes[0]
    g1, g2 = p_g.classes[0]
    red_f = reduction_to_pair(f1, f2)
    red_g = reduction_to_pair(g1, g2)
    af_plus = rt_f[0].values[0] * float(red_f.boundary_factor(1.0))
    af_minus = rt_f[0].values[1] * float(red_f.boundary_factor(-1.0))
    ag_plus = rt_g[0].values[0] * float(red_g.boundary_factor(1.0))
    ag_minus = rt_g[0].values[1] * float(red_g.boundary_factor(-1.0))
    # reduced discs satisfy g~ = f~ o nu
    alpha, beta = alpha_beta(ag_plus, ag_minus, af_plus, af_minus)
    inverse_g = moebius_invert(red_g)
    candidates = [moebius_compose(red_f, moebius_compose(nu, inverse_g)) for nu in (mu_alpha(alpha), mu_beta(beta))]
    return candidates, {'alpha': alpha, 'beta': beta}


def _cyclic_candidates(p_f: CrossingPattern, p_g: CrossingPattern) -> List[Moebius]:
    f_points = p_f.points
    g_points = p_g.points
    n = len(f_points)
    candidates = []
    for shift in range(n):
        targets = [f_points[(shift + k) % n] for k in range(3)]
        try:
            candidates.append(Moebius.from_boundary_triples(g_points[:3], targets))
        except ParamOutOfRange as e:
            logger.debug(f"shift {shift} gives no automorphism: {e}")
    return candidates


def enumerate_candidates(p_f: CrossingPattern, p_g: CrossingPattern,
                         rt_f: Sequence[RatioTuple], rt_g: Sequence[RatioTuple],
                         allow_automorphisms: bool = True) -> Tuple[List[Moebius], Dict]:
    """Automorphisms worth testing before pattern and ratio checks."""
    if not allow_automorphisms or p_f.is_empty():
        return [Moebius.identity()], {}
    if len(p_f.points) == 2:
        return _two_point_candidates(p_f, p_g, rt_f, rt_g)
    return _cyclic_candidates(p_f, p_g), {}


def compare_patterns(p_f: CrossingPattern, p_g: CrossingPattern,
                     rt_f: Sequence[RatioTuple], rt_g: Sequence[RatioTuple],
                     allow_automorphisms: bool = True) -> ObstructionVerdict:
    """
    Test the necessary conditions for the algebras of f and g to be isomorphic.

    Candidates mu satisfy g ~ f o mu: mu carries g's crossing points onto f's
    and A_g(xi) is proportional to A_f(mu(xi)) |mu'(xi)| on every class.

    Args:
        p_f: Crossing pattern of f
        p_g: Crossing pattern of g
        rt_f: Ratio tuples of f, one per class of p_f
        rt_g: Ratio tuples of g, one per class of p_g
        allow_automorphisms: False restricts the search to the identity,
            i.e. tests equality of the algebras instead of isomorphism

    Returns:
        ObstructionVerdict; never raises for a failed comparison
    """
    mode = 'isomorphism' if allow_automorphisms else 'equality'
    evidence: Dict = {'mode': mode, 'class_sizes_f': p_f.class_sizes, 'class_sizes_g': p_g.class_sizes}
    if sorted(p_f.class_sizes) != sorted(p_g.class_sizes):
        evidence['reason'] = 'class sizes differ'
        return ObstructionVerdict(DISTINCT_CROSSING_TYPE, [], evidence)
    if p_f.is_empty():
        # injective on the closed disc: both algebras are all of H^inf with equivalent norms
        evidence['reason'] = 'no boundary self-crossings; both algebras equal H^inf'
        evidence['algebras_equal'] = True
        return ObstructionVerdict(CANDIDATE_AUTOMORPHISMS, [Moebius.identity()], evidence)

    candidates, extra = enumerate_candidates(p_f, p_g, rt_f, rt_g, allow_automorphisms)
    evidence.update(extra)
    survivors = []
    pattern_survivors = 0
    checks = []
    for m in candidates:
        matching, distance = _match_classes(m, p_f, p_g)
        check = {'moebius': m.to_json(), 'pattern_distance': distance}
        if matching is not None:
            pattern_survivors += 1
            mismatch = _ratio_mismatch(m, matching, p_g, rt_f, rt_g)
            check['ratio_mismatch'] = mismatch
            if mismatch <= config.tolerance('ratio_relative'):
                survivors.append(m)
        checks.append(check)
    evidence['checks'] = checks
    evidence['ratios_f'] = [rt.normalized() for rt in rt_f]
    evidence['ratios_g'] = [rt.normalized() for rt in rt_g]

    if pattern_survivors == 0:
        evidence['reason'] = 'no automorphism maps the crossing set of g onto that of f'
        verdict = ObstructionVerdict(DISTINCT_CROSSING_TYPE, [], evidence)
    elif not survivors:
        evidence['reason'] = 'every pattern-preserving candidate fails the ratio test'
        verdict = ObstructionVerdict(RATIO_OBSTRUCTION, [], evidence)
    else:
        verdict = ObstructionVerdict(CANDIDATE_AUTOMORPHISMS, survivors, evidence, EQUALITY_UNDECIDED)
    logger.info(f"compare_patterns ({mode}): {verdict.kind} with {len(survivors)} survivors")
    return verdict
