import json
import logging
import os
from typing import Any, Dict, List, Sequence

import numpy as np

import config
from src.exceptions import MalformedInput

logger = logging.getLogger(__name__)


def setup_logging(log_level: str = None) -> None:
    """Setup logging configuration."""
    level = (log_level or config.LOGGING_CONFIG['level']).upper()
    logging.basicConfig(
        level=getattr(logging, level),
        format=config.LOGGING_CONFIG['format'],
        datefmt=config.LOGGING_CONFIG['datefmt']
    )


def complex_to_pair(value: complex) -> List[float]:
    """Encode a complex number as [re, im]."""
    value = complex(value)
    return [float(value.real), float(value.imag)]


def pair_to_complex(pair: Any) -> complex:
    """Decode [re, im] (or a bare real) into a complex number."""
    if isinstance(pair, (int, float)):
        return complex(pair)
    if isinstance(pair, (list, tuple)) and len(pair) == 2:
        try:
            return complex(float(pair[0]), float(pair[1]))
        except (TypeError, ValueError) as e:
            raise MalformedInput(f"Invalid complex pair {pair!r}: {e}")
    raise MalformedInput(f"Expected [re, im] pair, got {pair!r}")


def parse_complex(text: str) -> complex:
    """Parse '0.3+0.4j', '0.3+0.4i' or '-1' into a complex number."""
    cleaned = str(text).strip().replace(' ', '').replace('i', 'j')
    try:
        return complex(cleaned)
    except ValueError:
        raise MalformedInput(f"Cannot parse complex number from {text!r}")


def parse_complex_list(text: str) -> List[complex]:
    """Parse a comma-separated list of complex numbers."""
    if text is None or not str(text).strip():
        return []
    return [parse_complex(item) for item in str(text).split(',')]


def parse_float_list(text: str) -> List[float]:
    """Parse a comma-separated list of reals; empty text gives an empty list."""
    if text is None or not str(text).strip():
        return []
    try:
        return [float(item) for item in str(text).split(',')]
    except ValueError:
        raise MalformedInput(f"Cannot parse real grid from {text!r}")


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and complex numbers to JSON types."""
    if hasattr(obj, 'to_dict'):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_pair(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if np.isnan(value) or np.isinf(value):
            return None
        return value
    return obj


def dump_report(report: Dict) -> str:
    """Serialize a report deterministically."""
    return json.dumps(
        to_jsonable(report),
        indent=config.OUTPUT_CONFIG['indent'],
        sort_keys=config.OUTPUT_CONFIG['sort_keys'],
        ensure_ascii=False
    )


def load_json_file(path: str) -> Any:
    """Load a JSON document, mapping I/O and syntax problems to MalformedInput."""
    if not os.path.isfile(path):
        raise MalformedInput(f"File not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in {path}: {e}")
        raise MalformedInput(f"Invalid JSON in {path}: {e}")


def random_disc_points(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    """Uniform samples from the disc of the given radius."""
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    theta = rng.uniform(0.0, 2.0 * np.pi, count)
    return r * np.exp(1j * theta)


def angle_key(point: complex) -> float:
    """Angle of a unimodular point in [0, 2pi), with values just below 2pi folded to 0."""
    theta = float(np.angle(point)) % (2.0 * np.pi)
    if theta > 2.0 * np.pi - config.tolerance('angle_fold'):
        theta = 0.0
    return theta


