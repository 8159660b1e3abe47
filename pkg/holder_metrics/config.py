import os
from typing import Any, Dict, Optional

from dotenv import dotenv_values, load_dotenv

from holder_metrics.exceptions import BadFlag

# Load environment variables from .env file
load_dotenv()


def _env(name: str, default: str) -> str:
    return os.getenv(f'HOLDER_METRICS_{name}', default)


class Config:
    """Default parameters for the toolkit, overridable through the environment"""

    # Grid and sampling
    DEPTH = int(_env('DEPTH', '12'))
    SAMPLES = int(_env('SAMPLES', '100000'))
    SEED = int(_env('SEED', '0'))
    MESH = float(_env('MESH', '1e-3'))
    QH_DEPTH = int(_env('QH_DEPTH', '7'))

    # Hardy number
    N_RAYS = int(_env('N_RAYS', '256'))
    BISECTION_DEPTH = int(_env('BISECTION_DEPTH', '48'))
    HARDY_CEILING = float(_env('HARDY_CEILING', '10'))
    HP_STABLE_TOL = float(_env('HP_STABLE_TOL', '0.10'))
    HP_GROWTH_RATIO = float(_env('HP_GROWTH_RATIO', '10'))
    HARDY_BOUND_FLOOR = float(_env('HARDY_BOUND_FLOOR', '0.01'))

    # Fitting and divergence detection
    FIT_TOLERANCE = float(_env('FIT_TOLERANCE', '0.02'))
    DRIFT_TOLERANCE = float(_env('DRIFT_TOLERANCE', '0.04'))
    DECAY_EXPONENT = float(_env('DECAY_EXPONENT', '0.75'))
    DIVERGENCE_RATIO = float(_env('DIVERGENCE_RATIO', '2'))
    QH_STABILITY_TOL = float(_env('QH_STABILITY_TOL', '0.15'))

    # Output
    FORMAT = _env('FORMAT', 'json')
    LOG_LEVEL = _env('LOG_LEVEL', 'WARNING')

    @classmethod
    def defaults(cls) -> Dict[str, Any]:
        """Return the defaults keyed by their command-line flag names"""
        return {
            'depth': cls.DEPTH,
            'samples': cls.SAMPLES,
            'seed': cls.SEED,
            'mesh': cls.MESH,
            'qh_depth': cls.QH_DEPTH,
            'n_rays': cls.N_RAYS,
            'bisection_depth': cls.BISECTION_DEPTH,
            'hardy_ceiling': cls.HARDY_CEILING,
            'tol': None,
            'format': cls.FORMAT,
        }


_CASTS = {
    'depth': int,
    'samples': int,
    'seed': int,
    'mesh': float,
    'qh_depth': int,
    'n_rays': int,
    'bisection_depth': int,
    'hardy_ceiling': float,
    'tol': float,
    'format': str,
    'out': str,
}


def load_overrides(path: Optional[str]) -> Dict[str, Any]:
    """Read a key=value config file and cast its entries to flag types"""
    if not path:
        return {}
    if not os.path.exists(path):
        raise BadFlag(f"Config file not found: {path}")
    overrides = {}
    for key, raw in dotenv_values(path).items():
        name = key.strip().lower().replace('-', '_')
        if name not in _CASTS:
            raise BadFlag(f"Unknown config key: {key}")
        if raw is None:
            raise BadFlag(f"Config key without value: {key}")
        try:
            overrides[name] = _CASTS[name](raw.strip())
        except ValueError as e:
            raise BadFlag(f"Bad value for {key}: {str(e)}")
    return overrides
