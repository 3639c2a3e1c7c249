import subprocess
import sys
from pathlib import Path

import pytest

PLOTS_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(PLOTS_DIR))


def run_mmopp(args, cwd):
    """Drive the simulation CLI exactly as the acceptance suite does."""
    res = subprocess.run([sys.executable, "-m", "mmopp", *args],
                         capture_output=True, text=True, cwd=cwd)
    assert res.returncode == 0, res.stderr
    return res


@pytest.fixture(scope="session")
def inputs(tmp_path_factory):
    """Reduced-size CSVs with the acceptance-suite commands and schemas."""
    d = tmp_path_factory.mktemp("inputs")
    run_mmopp(["simulate", "--scheme", "em", "--h", "2.4",
               "--sigma", "1e-6,3e-3,3e-3", "--seed", "7", "--t-end", "40",
               "--out", "traj.csv"], d)
    run_mmopp(["histogram", "--h", "2.4", "--paths", "3", "--seed", "11",
               "--t-end", "150", "--out", "hist.csv"], d)
    run_mmopp(["returnmap", "--h", "2.3", "--grid", "12", "--seed", "3",
               "--sigma", "1e-6,1e-3,1e-3", "--out", "map.csv"], d)
    run_mmopp(["normalform", "--h", "2.3", "--sweep", "2.3:2.7",
               "--sweep-num", "9", "--sweep-out", "sweep.csv",
               "--out", "nf.json"], d)
    return d
