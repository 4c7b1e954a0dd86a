"""The numba and pure-numpy paths must be interchangeable end to end."""
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

SCRIPT = """
import numpy as np
from vslice_xrl._accel import USE_NUMBA
from vslice_xrl.config import NetworkConfig
from vslice_xrl.env import VehicularEnv
from vslice_xrl.evalkit import RandomPolicy
cfg = NetworkConfig()
env = VehicularEnv(cfg, seed=21)
pol = RandomPolicy(np.random.default_rng(0), cfg.num_vehicles, cfg.num_gnbs)
s = env.reset()
acc = []
for _ in range(300):
    out = env.step(pol(s))
    s = out.observation
    acc.append(np.concatenate([s, [out.reward]]))
print(int(USE_NUMBA), np.array(acc).tobytes().hex())
"""


def _run(flag):
    env = dict(os.environ, VSLICE_XRL_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, timeout=300)
    assert res.returncode == 0, res.stderr
    return res.stdout.split()


def test_env_flag_selects_backend_with_matching_trajectories():
    fast = _run("1")
    slow = _run("0")
    assert fast[0] == "1" and slow[0] == "0"
    a = np.frombuffer(bytes.fromhex(fast[1])).reshape(300, -1)
    b = np.frombuffer(bytes.fromhex(slow[1])).reshape(300, -1)
    # observations agree bit for bit; rewards may differ in the last ulp (libm log2 vs LLVM)
    np.testing.assert_array_equal(a[:, :-1], b[:, :-1])
    np.testing.assert_allclose(a[:, -1], b[:, -1], rtol=1e-12, atol=0)


def test_benchmark_script_runs(capsys):
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "benchmarks"))
    try:
        bench = pytest.importorskip("bench_kernels")
    finally:
        sys.path.pop(0)
    rows = bench.main(["--sizes", "2", "--repeat", "1"])
    assert {r[0] for r in rows} == {"project", "links", "move"}
    assert "speedup" in capsys.readouterr().out
