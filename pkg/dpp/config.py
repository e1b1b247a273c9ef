"""
Runtime settings for the DPP sampler, read from the environment.
"""
import os
from dataclasses import dataclass

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


@dataclass(frozen=True)
class Settings:
    log_level: str
    pivot_tol: float
    prob_band: float
    kernel_tol: float
    eigen_check_max_n: int
    bench_max_n: int
    oracle_max_n: int
    default_seed: int
    eigh_driver: str

    @classmethod
    def from_env(cls) -> 'Settings':
        """Build settings from DPP_* environment variables"""
        return cls(
            log_level=os.getenv('DPP_LOG_LEVEL', 'INFO').upper(),
            pivot_tol=float(os.getenv('DPP_PIVOT_TOL', '1e-12')),
            prob_band=float(os.getenv('DPP_PROB_BAND', '1e-9')),
            kernel_tol=float(os.getenv('DPP_KERNEL_TOL', '1e-9')),
            eigen_check_max_n=int(os.getenv('DPP_EIGEN_CHECK_MAX_N', '512')),
            bench_max_n=int(os.getenv('DPP_BENCH_MAX_N', '6000')),
            oracle_max_n=int(os.getenv('DPP_ORACLE_MAX_N', '20')),
            default_seed=int(os.getenv('DPP_DEFAULT_SEED', '0')),
            eigh_driver=os.getenv('DPP_EIGH_DRIVER', 'evd'),
        )


DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')
TEXTURE_IMAGE = os.path.join(DATA_DIR, 'texture128.pgm')

settings = Settings.from_env()
