"""Shared fixtures, mainly for tests that cross into the Node bridge."""

from __future__ import annotations

import shutil
import subprocess
from pathlib import Path

import pytest

BRIDGE_DIR = Path(__file__).resolve().parent.parent / "bridge"


@pytest.fixture(scope="session")
def bridge_cli() -> list[str]:
    """Command prefix for the bridge CLI, building it on first use."""
    node = shutil.which("node")
    if node is None:
        pytest.skip("node is not installed")
    cli = BRIDGE_DIR / "dist" / "cli.js"
    if not cli.is_file():
        npm = shutil.which("npm")
        if npm is None:
            pytest.skip("bridge is not built and npm is unavailable")
        if not (BRIDGE_DIR / "node_modules").is_dir():
            subprocess.run([npm, "install"], cwd=BRIDGE_DIR, capture_output=True, timeout=600)
        built = subprocess.run([npm, "run", "build"], cwd=BRIDGE_DIR,
                               capture_output=True, text=True, timeout=600)
        if built.returncode != 0 or not cli.is_file():
            pytest.skip(f"bridge build failed:\n{built.stderr}")
    return [node, str(cli)]


@pytest.fixture()
def echo_segmenter(bridge_cli):
    """A running echo-variant segmenter; yields its host:port endpoint."""
    proc = subprocess.Popen(
        bridge_cli + ["serve", "--host", "127.0.0.1", "--port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    try:
        line = proc.stdout.readline()
        assert "listening on" in line, line
        endpoint = line.strip().rsplit(" ", 1)[-1]
        yield endpoint
    finally:
        proc.terminate()
        proc.wait(timeout=10)
