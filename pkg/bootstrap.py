#!/usr/bin/env python3
"""
Bootstrap script for the dpp sampler.
Creates a virtual environment, installs the requirements and writes a .env
file with the DPP_ defaults.
"""

import os
import sys
import subprocess
from pathlib import Path

ENV_CONTENT = """# Logging
DPP_LOG_LEVEL=INFO

# Numerical tolerances
DPP_PIVOT_TOL=1e-12
DPP_PROB_BAND=1e-9
DPP_KERNEL_TOL=1e-9
DPP_EIGEN_CHECK_MAX_N=512
DPP_EIGH_DRIVER=evd

# Size caps
DPP_BENCH_MAX_N=6000
DPP_ORACLE_MAX_N=20

# Seeds
DPP_DEFAULT_SEED=0
"""


def run_command(command, cwd=None):
    """Run a command and return True on success"""
    try:
        result = subprocess.run(command, cwd=cwd, capture_output=True, text=True)
        if result.returncode != 0:
            print(f"Error running command: {' '.join(command)}")
            print(f"Error: {result.stderr}")
            return False
        return True
    except OSError as e:
        print(f"Exception running command {' '.join(command)}: {e}")
        return False


def create_env_file(root):
    env_path = root / '.env'
    if not env_path.exists():
        env_path.write_text(ENV_CONTENT)
        print(f"Created {env_path}")
    else:
        print(f"{env_path} already exists")


def setup_environment(root):
    venv_path = root / "venv"
    if not venv_path.exists():
        print("Creating virtual environment...")
        if not run_command([sys.executable, "-m", "venv", "venv"], cwd=root):
            return False

    print("Installing Python dependencies...")
    pip = venv_path / ("Scripts/pip.exe" if os.name == 'nt' else "bin/pip")
    if not run_command([str(pip), "install", "-r", "requirements.txt"], cwd=root):
        return False

    create_env_file(root)
    return True


def main():
    print("dpp sampler setup")
    print("=" * 30)

    if sys.version_info < (3, 8):
        print("Python 3.8+ is required!")
        return 1

    root = Path(__file__).resolve().parent
    if not setup_environment(root):
        print("Setup failed!")
        return 1

    print("\n" + "=" * 30)
    print("Setup complete!")
    print("\nNext steps:")
    print("1. Activate the environment: source venv/bin/activate")
    print("2. Check the install: python -m dpp validate --max-n 4 --draws 20000")
    print("3. Run the tests: python dpp/run_tests.py")
    print("\nFor detailed instructions, see README.md")
    return 0


if __name__ == "__main__":
    sys.exit(main())
