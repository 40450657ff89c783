#!/usr/bin/env python3
"""
Environment Configuration for credit-impact-bench
Output location, parallelism and numeric defaults read from the environment
"""

import os
import warnings
from pathlib import Path
from typing import Any, Dict

# Try to load dotenv for development
_ENV_SOURCE = "system environment"
try:
    from dotenv import load_dotenv
    env_path = Path(__file__).parent / '.env'
    if env_path.exists():
        load_dotenv(env_path)
        _ENV_SOURCE = ".env file"
except ImportError:
    _ENV_SOURCE = "system environment (python-dotenv not installed)"


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        warnings.warn(f"{name}={raw!r} is not a number, using {default}")
        return default


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        warnings.warn(f"{name}={raw!r} is not an integer, using {default}")
        return default


class BenchSettings:
    """Process-wide settings for runs started from the command line"""

    def __init__(self):
        self.output_dir = Path(os.getenv('IMPACT_OUTPUT_DIR', 'runs'))
        self.n_jobs = _env_int('IMPACT_N_JOBS', -1)
        self.debug = os.getenv('IMPACT_DEBUG', 'false').lower() == 'true'
        self.propensity_clip = _env_float('IMPACT_PROPENSITY_CLIP', 1e-3)
        self.run_log = Path(os.getenv('IMPACT_RUN_LOG', str(self.output_dir / 'run_log.json')))

        if not 0.0 < self.propensity_clip < 0.5:
            warnings.warn(
                f"IMPACT_PROPENSITY_CLIP={self.propensity_clip} outside (0, 0.5), using 1e-3"
            )
            self.propensity_clip = 1e-3
        if self.n_jobs == 0:
            warnings.warn("IMPACT_N_JOBS=0 is meaningless, running sequentially")
            self.n_jobs = 1

    def report(self):
        """Print the active settings"""
        print("\n🔧 Settings:")
        print("=" * 30)
        print(f"   • source: {_ENV_SOURCE}")
        print(f"   • output dir: {self.output_dir}")
        print(f"   • n_jobs: {self.n_jobs}")
        print(f"   • propensity clip: {self.propensity_clip:g}")
        print(f"   • debug: {self.debug}")
        print("=" * 30)

    def summary(self) -> Dict[str, Any]:
        return {
            'output_dir': str(self.output_dir),
            'n_jobs': self.n_jobs,
            'debug': self.debug,
            'propensity_clip': self.propensity_clip,
            'run_log': str(self.run_log),
        }


# Global configuration instance
settings = BenchSettings()


def get_settings() -> BenchSettings:
    """Get the global settings instance"""
    return settings
