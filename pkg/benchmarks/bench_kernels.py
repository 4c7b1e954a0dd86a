"""Compare the numba kernels with their pure-numpy twins.

Runs every hot kernel on fleet batches of several sizes and prints the median
time per call for both paths, plus the speedup. Both paths are checked to give
the same outputs before timing.

    python benchmarks/bench_kernels.py [--sizes 1 64 4096] [--repeat 7]
"""
import argparse
import statistics
import timeit

import numpy as np

from vslice_xrl._accel import HAS_NUMBA
from vslice_xrl.config import NetworkConfig
from vslice_xrl.env import VehicularEnv
from vslice_xrl.env import kernels
from vslice_xrl.explain import shapley


def fleet_batch(config, size, seed=0):
    env = VehicularEnv(config, seed)
    env.reset()
    return env.fleet.repeat(size)


def cases(config, size, rng):
    fleet = fleet_batch(config, size)
    N, M = config.num_vehicles, config.num_gnbs
    q = rng.random((size, N, M))
    b = rng.random((size, N, M))
    assoc, prbs = kernels.project_numpy(q, b, fleet.active, fleet.capacity)
    link_args = (fleet.gains, assoc, prbs, fleet.demand, fleet.s_urllc, fleet.s_embb, fleet.active,
                 fleet._link_params)
    u_turn, u_spawn = rng.random((size, N)), rng.random((size, N))
    mob = [fleet.axis, fleet.lane, fleet.along, fleet.heading, fleet.turn]

    def mover(fn):
        def call():
            arrays = [a.copy() for a in mob]
            return fn(*arrays, u_turn, u_spawn, fleet._dist, float(config.area_side), fleet.cross), arrays
        return call

    return {
        "project": (lambda: kernels.project_numpy(q, b, fleet.active, fleet.capacity),
                    lambda: kernels.project_loop(q, b, fleet.active, fleet.capacity)),
        "links": (lambda: kernels.links_numpy(*link_args), lambda: kernels.links_loop(*link_args)),
        "move": (mover(kernels.move_numpy), mover(kernels.move_loop)),
    }


def flat(x):
    if isinstance(x, (tuple, list)):
        return np.concatenate([flat(v) for v in x]) if x else np.zeros(0)
    return np.asarray(x, dtype=np.float64).ravel()


def median_time(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return statistics.median(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[1, 64, 4096])
    p.add_argument("--repeat", type=int, default=7)
    args = p.parse_args(argv)
    if not HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    config = NetworkConfig()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<10} {'batch':>6} {'numpy [us]':>12} {'numba [us]':>12} {'speedup':>8}")
    rows = []
    for size in args.sizes:
        for name, (np_fn, nb_fn) in cases(config, size, rng).items():
            np.testing.assert_allclose(flat(np_fn()), flat(nb_fn()), rtol=1e-12, atol=0)
            t_np, t_nb = median_time(np_fn, args.repeat), median_time(nb_fn, args.repeat)
            rows.append((name, size, t_np, t_nb))
            print(f"{name:<10} {size:>6d} {t_np * 1e6:>12.1f} {t_nb * 1e6:>12.1f} {t_np / t_nb:>7.1f}x")
    d = 10
    table = rng.normal(size=2 ** d)
    w = shapley._coalition_weights(d)
    np.testing.assert_allclose(shapley._combine_numpy(table, d, w), shapley._combine_loop(table, d, w), atol=1e-12)
    t_np = median_time(lambda: shapley._combine_numpy(table, d, w), args.repeat)
    t_nb = median_time(lambda: shapley._combine_loop(table, d, w), args.repeat)
    print(f"{'shapley':<10} {'d=10':>6} {t_np * 1e6:>12.1f} {t_nb * 1e6:>12.1f} {t_np / t_nb:>7.1f}x")
    return rows


if __name__ == "__main__":
    main()
