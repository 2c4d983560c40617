"""
Pulled-back Drury-Arveson kernel k^f(z, w) = 1/(1 - <f(z), f(w)>).

Gram and Pick matrices, PSD feasibility, the induced metric d_f and the
boundary asymptotics along approach paths to a self-crossing. Because k^f is
a complete Pick kernel, a Pick matrix is positive semidefinite exactly when
the interpolation problem has a solution of multiplier norm at most one;
pick_feasible reports that contract and nothing stronger.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy import linalg

import config
from src.embedding import (BoundaryPairData, EmbeddingMap, boundary_pair_data, emb_eval, emb_inner,
                           vector_inner)
from src.exceptions import (DimensionMismatch, KernelSingularity, NonHermitianInput, NotACrossing,
                            ParamOutOfRange, PathLeftDisc)
from src.utils import complex_to_pair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HermitianMatrix:
    """Dense Hermitian matrix; construction rejects non-Hermitian input."""
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise NonHermitianInput(f"Expected a nonempty square matrix, got shape {m.shape}")
        if m.shape[0] > config.KERNEL_CONFIG['max_dimension']:
            raise DimensionMismatch(f"Matrix dimension {m.shape[0]} exceeds {config.KERNEL_CONFIG['max_dimension']}")
        asymmetry = float(np.max(np.abs(m - m.conj().T)))
        if asymmetry > config.tolerance('hermitian') * max(1.0, float(np.max(np.abs(m)))):
            raise NonHermitianInput(f"Matrix is not Hermitian (asymmetry {asymmetry:.3e})", {'asymmetry': asymmetry})
        object.__setattr__(self, 'entries', (m + m.conj().T) / 2.0)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def to_dict(self) -> Dict:
        return {'dimension': self.dimension,
                'entries': [[complex_to_pair(v) for v in row] for row in self.entries]}


@dataclass(frozen=True)
class PickInstance:
    nodes: tuple
    targets: tuple
    matrix: HermitianMatrix

    def to_dict(self) -> Dict:
        return {'nodes': [complex_to_pair(z) for z in self.nodes],
                'targets': [complex_to_pair(a) for a in self.targets],
                'matrix': self.matrix.to_dict()}


def _as_hermitian(m) -> HermitianMatrix:
    return m if isinstance(m, HermitianMatrix) else HermitianMatrix(np.asarray(m))


def kernel_eval(f: EmbeddingMap, z: complex, w: complex) -> complex:
    """k^f(z, w) = 1/(1 - <f(z), f(w)>)."""
    gap = 1.0 - emb_inner(f, z, w)
    if abs(gap) < config.tolerance('kernel_singularity'):
        raise KernelSingularity(f"1 - <f(z), f(w)> = {abs(gap):.3e} at z = {z}, w = {w}",
                                {'z': complex_to_pair(z), 'w': complex_to_pair(w)})
    return complex(1.0 / gap)


def gram(f: EmbeddingMap, points: Sequence[complex]) -> HermitianMatrix:
    """Gram matrix [k^f(z_j, z_k)] on interior points."""
    points = np.asarray(points, dtype=complex)
    if np.any(np.abs(points) >= 1.0):
        raise ParamOutOfRange("Gram matrix points must lie in the open disc")
    values = emb_eval(f, points)
    gap = 1.0 - values @ values.conj().T
    if np.min(np.abs(gap)) < config.tolerance('kernel_singularity'):
        raise KernelSingularity("Kernel singular on the given points")
    return HermitianMatrix(1.0 / gap)


def is_psd(m, tol: float = None) -> bool:
    """
    Positive semidefiniteness up to a relative tolerance.

    True iff every eigenvalue is at least -tol * ||M||_inf. A Cholesky
    factorization of M + tol ||M||_inf I decides the easy cases; a dense
    eigenvalue computation decides the rest.
    """
    tol = config.tolerance('psd') if tol is None else tol
    entries = _as_hermitian(m).entries
    shift = tol * float(np.max(np.sum(np.abs(entries), axis=1)))
    try:
        linalg.cholesky(entries + shift * np.eye(entries.shape[0]), lower=True)
        return True
    except linalg.LinAlgError:
        return bool(linalg.eigvalsh(entries)[0] >= -shift)


def min_eigenvalue(m) -> float:
    return float(linalg.eigvalsh(_as_hermitian(m).entries)[0])


def pick_matrix(f: EmbeddingMap, nodes: Sequence[complex], targets: Sequence[complex]) -> PickInstance:
    """Pick matrix [(1 - a_j conj(a_k)) k^f(z_j, z_k)]."""
    nodes = tuple(complex(z) for z in nodes)
    targets = tuple(complex(a) for a in targets)
    if len(nodes) != len(targets):
        raise DimensionMismatch(f"{len(nodes)} nodes but {len(targets)} targets")
    if len(set(nodes)) != len(nodes):
        raise ParamOutOfRange("Pick nodes must be distinct")
    k = gram(f, nodes).entries
    a = np.array(targets)
    return PickInstance(nodes, targets, HermitianMatrix((1.0 - np.outer(a, a.conj())) * k))


def pick_feasible(inst: PickInstance, tol: float = None) -> bool:
    return is_psd(inst.matrix, tol)


def metric_d(f: EmbeddingMap, z: complex, w: complex) -> float:
    """d_f(z, w) = sqrt(1 - |k(z,w)|^2/(k(z,z) k(w,w)))."""
    kzz = kernel_eval(f, z, z).real
    kww = kernel_eval(f, w, w).real
    kzw = kernel_eval(f, z, w)
    value = 1.0 - abs(kzw) ** 2 / (kzz * kww)
    return float(np.sqrt(min(max(value, 0.0), 1.0)))


def extremal_value_by_bisection(f: EmbeddingMap, z: complex, w: complex, iterations: int = None) -> float:
    """Largest |a| for which phi(z) = a, phi(w) = 0 is solvable, by bisection on Pick feasibility."""
    iterations = iterations or config.KERNEL_CONFIG['bisection_iterations']
    tol = config.tolerance('bisection_psd')
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if pick_feasible(pick_matrix(f, [z, w], [mid, 0.0]), tol):
            lo = mid
        else:
            hi = mid
    return lo


def _path_points(data: BoundaryPairData, t: float, slope_factor: float = 1.0):
    if not data.is_crossing:
        raise NotACrossing("Boundary paths need a crossing pair",
                           {'xi': complex_to_pair(data.xi), 'zeta': complex_to_pair(data.zeta)})
    slope = slope_factor * data.A
    if not (0.0 < t < min(slope, data.B) / 2.0):
        raise PathLeftDisc(f"t = {t} outside (0, {min(slope, data.B) / 2.0})", {'t': t})
    # kernel invariance: k^{f o mu}(z, w) = k^f(mu z, mu w)
    return data.reduction.apply(1.0 - t / slope), data.reduction.apply(-1.0 + t / data.B)


def boundary_path_metric(f: EmbeddingMap, data: BoundaryPairData, t: float, slope_factor: float = 1.0) -> float:
    """
    d_f^2 between the approach paths 1 - t/A and -1 + t/B in reduced coordinates.

    Args:
        f: Embedding map
        data: Boundary pair data of a crossing
        t: Path parameter, 0 < t < min(A, B)/2
        slope_factor: Replace A by slope_factor * A (1 gives the matched paths)

    Returns:
        d_f^2 at the two path points
    """
    z, w = _path_points(data, t, slope_factor)
    return metric_d(f, z, w) ** 2


def cross_path_metric(f: EmbeddingMap, g: EmbeddingMap, data: BoundaryPairData, t: float) -> float:
    """d_g^2 between the matched approach paths of f to the crossing recorded in ``data``."""
    z, w = _path_points(data, t)
    return metric_d(g, z, w) ** 2


def cross_path_limit(f: EmbeddingMap, g: EmbeddingMap, data: BoundaryPairData) -> Dict:
    """
    Limit of cross_path_metric as t -> 0.

    With a = A_g(xi)/A_f(xi) and b = A_g(zeta)/A_f(zeta) the limit is
    1 - 4ab/(a + b)^2, which vanishes iff a = b. The reduction rescales A_f
    and A_g by the same factor, so the reduced constants give the same ratios.

    Raises:
        NotACrossing: if g does not identify the same pair of boundary points
    """
    data_g = boundary_pair_data(g, data.xi, data.zeta)
    a = data_g.A / data.A
    b = data_g.B / data.B
    return {'a': a, 'b': b, 'limit': 1.0 - 4.0 * a * b / (a + b) ** 2}


def crossing_pick_feasible(f: EmbeddingMap, data: BoundaryPairData, t: float, targets: Sequence[complex]) -> bool:
    """
    Pick feasibility for targets at the two matched path points of a crossing.

    A multiplier continuous up to the boundary takes one value on a crossing
    class, so distinct targets become infeasible as t -> 0 while equal
    targets stay feasible.
    """
    z, w = _path_points(data, t)
    return pick_feasible(pick_matrix(f, [z, w], targets))


def kernel_diff_norm_sq(f: EmbeddingMap, data: BoundaryPairData, t: float) -> float:
    """||k_z - k_w||^2 = k(z,z) - 2 Re k(z,w) + k(w,w) along the matched paths."""
    z, w = _path_points(data, t)
    return float(kernel_eval(f, z, z).real - 2.0 * kernel_eval(f, z, w).real + kernel_eval(f, w, w).real)


def kernel_diff_bound(data: BoundaryPairData) -> float:
    """(1/4)(C/A^2 + D/B^2 + 2 Re E/(A B))."""
    return 0.25 * (data.C / data.A ** 2 + data.D / data.B ** 2 + 2.0 * data.E.real / (data.A * data.B))


def kernel_diff_ladder(f: EmbeddingMap, data: BoundaryPairData, ts: Sequence[float] = None) -> Dict:
    """Kernel difference norms on a decreasing t ladder with their slack over the bound."""
    ts = list(ts or config.KERNEL_CONFIG['kernel_ladder'])
    bound = kernel_diff_bound(data)
    values = [kernel_diff_norm_sq(f, data, t) for t in ts]
    slacks = [max(0.0, v - bound) for v in values]
    floor = config.tolerance('kernel_slack_floor')
    halving = all(later <= max(0.5 * earlier, floor) for earlier, later in zip(slacks, slacks[1:]))
    return {'t': ts, 'values': values, 'bound': bound, 'slack': slacks, 'slack_halving': halving}


def expansion_coefficients_check(f: EmbeddingMap, data: BoundaryPairData, x: float) -> Dict:
    """
    Compare 1 - ||f||^2 near the pair against its two-term expansions.

    In reduced coordinates h = f o mu:
        1 - ||h(1 - x)||^2  = 2A x - (C + 2 Re F) x^2 + O(x^3)
        1 - ||h(-1 + x)||^2 = 2B x - (D + 2 Re G) x^2 + O(x^3)
    and, at a crossing,
        1 - <h(1 - x), h(-1 + x)> = (A + B) x + (E - conj(F) - G) x^2 + O(x^3).
    Each residual is paired with its value at x/2; the Richardson ratio of
    the two is close to 8 for a cubic remainder.
    """
    low, high = config.KERNEL_CONFIG['expansion_x_range']
    if not (low < x < high):
        raise ParamOutOfRange(f"x must lie in ({low}, {high}), got {x}")
    mu = data.reduction

    def plus_side(s):
        v = emb_eval(f, mu.apply(1.0 - s))
        return 1.0 - float(np.real(vector_inner(v, v))) - (2.0 * data.A * s - (data.C + 2.0 * data.F.real) * s ** 2)

    def minus_side(s):
        v = emb_eval(f, mu.apply(-1.0 + s))
        return 1.0 - float(np.real(vector_inner(v, v))) - (2.0 * data.B * s - (data.D + 2.0 * data.G.real) * s ** 2)

    def mixed(s):
        u, v = emb_eval(f, mu.apply(1.0 - s)), emb_eval(f, mu.apply(-1.0 + s))
        model = (data.A + data.B) * s + (data.E - np.conj(data.F) - data.G) * s ** 2
        return abs(1.0 - complex(vector_inner(u, v)) - model)

    scale = 1.0 + data.A + data.B + data.C + data.D + abs(data.E) + abs(data.F) + abs(data.G)
    bound = 10.0 * x ** 3 * scale
    sides = {'plus': plus_side, 'minus': minus_side}
    if data.is_crossing:
        sides['mixed'] = mixed

    report: Dict = {'x': x, 'cubic_bound': bound, 'coefficient_scale': scale}
    for name, side in sides.items():
        r_full, r_half = abs(side(x)), abs(side(x / 2.0))
        exact = r_full <= config.tolerance('expansion_exact') * scale
        report[name] = {
            'residual': r_full,
            'residual_half': r_half,
            'richardson_ratio': None if exact or r_half == 0.0 else r_full / r_half,
            'exact': exact,
            'within_bound': r_full <= bound,
        }
    return report
