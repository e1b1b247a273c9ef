#!/usr/bin/env python3
"""
Test runner script for the dpp sampler
"""
import sys
import os
import subprocess
import argparse
from pathlib import Path

TEST_TYPES = ['unit', 'integration', 'slow', 'numerics', 'kernels', 'samplers',
              'oracle', 'patches', 'cli']


def _repo_root():
    return Path(__file__).resolve().parent.parent


def _run(cmd, success, failure):
    print(f"Running tests with command: {' '.join(cmd)}")
    print("=" * 60)
    try:
        subprocess.run(cmd, check=True)
        print("\n" + "=" * 60)
        print(success)
        return 0
    except subprocess.CalledProcessError as e:
        print("\n" + "=" * 60)
        print(f"{failure} with exit code {e.returncode}")
        return e.returncode


def run_tests(test_type=None, coverage=True, verbose=False):
    """Run tests with specified options"""
    os.chdir(_repo_root())

    cmd = [sys.executable, '-m', 'pytest']
    if test_type:
        # overrides the "not slow" default from pytest.ini
        cmd.extend(['-m', test_type])
    if coverage:
        cmd.extend(['--cov=dpp', '--cov-report=term-missing', '--cov-report=html:htmlcov'])
    else:
        cmd.append('--no-cov')
    if verbose:
        cmd.append('-v')
    cmd.append('dpp/tests/')

    return _run(cmd, "All tests passed!", "Tests failed")


def run_specific_test(test_file):
    """Run a specific test file"""
    os.chdir(_repo_root())
    cmd = [sys.executable, '-m', 'pytest', f'dpp/tests/{test_file}', '-v']
    return _run(cmd, "Test passed!", "Test failed")


def run_coverage_report():
    """Generate coverage report"""
    os.chdir(_repo_root())
    cmd = [sys.executable, '-m', 'coverage', 'report', '--show-missing']
    print("Generating coverage report...")
    print("=" * 60)
    try:
        subprocess.run(cmd, check=True)
        return 0
    except subprocess.CalledProcessError as e:
        print(f"Coverage report failed with exit code {e.returncode}")
        return e.returncode


def main():
    parser = argparse.ArgumentParser(description='Run the dpp sampler tests')
    parser.add_argument('--type', '-t', choices=TEST_TYPES, help='Run specific test type')
    parser.add_argument('--file', '-f', help='Run specific test file')
    parser.add_argument('--no-coverage', action='store_true', help='Run tests without coverage')
    parser.add_argument('--verbose', '-v', action='store_true', help='Verbose output')
    parser.add_argument('--coverage-report', action='store_true', help='Generate coverage report only')

    args = parser.parse_args()

    if args.coverage_report:
        return run_coverage_report()

    if args.file:
        return run_specific_test(args.file)

    return run_tests(
        test_type=args.type,
        coverage=not args.no_coverage,
        verbose=args.verbose
    )


if __name__ == '__main__':
    sys.exit(main())
