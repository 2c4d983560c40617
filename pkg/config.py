# Configuration file for the Disc Invariants toolkit

import os

# Numerical tolerances (every documented threshold lives here so that
# DVL_TOL_SCALE can rescale them in one place)
TOLERANCE_CONFIG = {
    'pole': 1e-14,                    # |den(z)| relative to coefficient magnitudes
    'unimodular': 1e-12,              # | |lambda| - 1 | and | |xi| - 1 |
    'canonicalize_root': 1e-12,       # shared numerator/denominator roots
    'moebius_identity': 1e-12,
    'sphere_attachment': 1e-9,        # | ||f(e^it)||^2 - 1 |
    'derivative_min': 1e-8,           # min ||f'|| over the closed disc
    'injectivity_min_gap': 1e-3,      # |z - w| for a genuine collision
    'injectivity_collision': 1e-9,    # ||f(z) - f(w)|| counted as a collision
    'injectivity_boundary_margin': 1e-6,
    'crossing_pair': 1e-9,            # ||f(xi) - f(zeta)|| for a crossing pair
    'a_imaginary': 1e-9,              # relative imaginary part of A_f
    'a_minimum': 1e-10,
    'crossing_detection': 1e-3,
    'crossing_separation': 1e-2,      # angular separation of flagged pairs
    'refinement_residual': 1e-12,
    'class_identity': 1e-8,
    'crossing_cluster': 1e-5,         # tangential crossings refine to ~sqrt(residual)
    'pattern_match': 1e-9,
    'ratio_relative': 1e-8,
    'hermitian': 1e-12,
    'kernel_singularity': 1e-14,
    'psd': 1e-10,
    'bisection_psd': 1e-13,
    'root_separation': 1e-8,
    'root_dedupe': 1e-9,
    'newton_step': 1e-15,
    'screen_zero_root': 1e-12,        # the trivial root z = 0 of the screen
    'boundary_point': 1e-9,           # | |xi| - 1 | for user supplied boundary points
    'boundary_triple_separation': 1e-12,
    'angle_fold': 1e-9,
    'kernel_slack_floor': 1e-5,       # slack halving stops at this floor
    'expansion_exact': 1e-14,         # residual treated as exact, relative to coefficient scale
}

# Boundary self-crossing scan
CROSSING_CONFIG = {
    'default_samples': 2048,
    'min_samples': 1024,
    'block_rows': 256,
    'damping': 0.5,
    'max_iterations': 100,
    'max_halvings': 30,
}

# Embedding validation
VALIDATION_CONFIG = {
    'default_grid_size': 1024,
    'min_grid_size': 256,
    'interior_radii': (0.5, 0.9, 0.99),
    'mesh_radii': 15,
    'mesh_angles': 64,
    'max_injectivity_seeds': 32,
    'refinement_iterations': 50,
}

# Kernel, Pick and boundary asymptotics
KERNEL_CONFIG = {
    'max_dimension': 64,
    'bisection_iterations': 60,
    'path_ladder': (1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
    'kernel_ladder': (1e-2, 1e-3, 1e-4, 1e-5),
    'expansion_x': 1e-3,
    'expansion_x_range': (1e-6, 1e-2),
    'richardson_window': (6.0, 10.0),
    'path_metric_ceiling': 0.01,
    'wrong_slope_factor': 2.0,
    'wrong_slope_target': 1.0 / 9.0,
    'wrong_slope_window': 0.02,
    'duality_pairs': 100,
    'duality_tolerance': 1e-8,
    'sample_radius': 0.9,
    'cross_path_pairs': ((0.3, 0.6), (0.5, 0.7), (0.4, 0.4)),
    'cross_path_window': 1e-3,
    'crossing_pick_targets': (0.5, -0.5),
    'crossing_pick_ladder': (1e-4, 1e-5, 1e-6),
}

# Injectivity screen for the three-crossing family
ROOT_FINDING_CONFIG = {
    'contour_margin': 1e-3,
    'contour_samples': 65536,
    'edge_samples': 512,
    'max_depth': 10,
    'newton_iterations': 50,
    'max_degree': 9,
    'scan_step': 0.01,
}

# Family catalog
CATALOG_CONFIG = {
    'path': os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'catalog.json'),
    'default_alpha0': 0.5,
    'default_alpha': 0.5,
}

# Report output
OUTPUT_CONFIG = {
    'schema': 1,
    'indent': 2,
    'sort_keys': True,
    'sweep_samples': 4096,
}

# Logging Configuration
LOGGING_CONFIG = {
    'level': 'WARNING',
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'datefmt': '%Y-%m-%d %H:%M:%S',
}

# Performance Settings
PERFORMANCE_CONFIG = {
    'parallel_processing': True,
    'max_workers': 4,
}

TOL_SCALE_ENV = 'DVL_TOL_SCALE'


def tolerance_scale() -> float:
    """Read the DVL_TOL_SCALE multiplier from the environment (default 1)."""
    raw = os.environ.get(TOL_SCALE_ENV, '').strip()
    if not raw:
        return 1.0
    try:
        value = float(raw)
    except ValueError:
        value = float('nan')
    if not value > 0 or value == float('inf'):
        from src.exceptions import MalformedInput
        raise MalformedInput(f"{TOL_SCALE_ENV} must be a positive number, got {raw!r}")
    return value


def tolerance(name: str) -> float:
    """Documented tolerance `name`, scaled by DVL_TOL_SCALE."""
    return TOLERANCE_CONFIG[name] * tolerance_scale()
