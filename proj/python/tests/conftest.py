import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]

DEADLOCK = "net dl\nplace p init 1\ntrans t\nin p:1\n"
COUNTER = "net inc\nplace p init 0\ntrans t\nout p:1\n"
SWAP = "net swap\nplace p init 1\nplace q init 0\ntrans t\nin p:1\nout q:1\ntrans u\nin q:1\nout p:1\n"


@pytest.fixture(scope="session")
def schema_dir():
    return Path(os.environ.get("PNMC_SCHEMA_DIR", ROOT / "schema"))


@pytest.fixture(scope="session")
def cli():
    """Runs the command-line tool; returns (exit code, stdout, stderr)."""
    binary = os.environ.get("PNMC_BIN")
    command = [binary] if binary else [sys.executable, "-m", "pnmc"]

    def run(*args):
        done = subprocess.run(command + [str(a) for a in args], capture_output=True, text=True)
        return done.returncode, done.stdout, done.stderr

    return run


@pytest.fixture
def nets(tmp_path):
    paths = {}
    for name, text in {"dl": DEADLOCK, "inc": COUNTER, "swap": SWAP}.items():
        path = tmp_path / f"{name}.net"
        path.write_text(text)
        paths[name] = path
    return paths


def load_schema(schema_dir, name):
    return json.loads((schema_dir / f"{name}.schema.json").read_text())
