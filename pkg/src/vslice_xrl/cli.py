"""Command-line entry point: train, evaluate, explain, fidelity, rerun.

Every command writes its outputs plus a ``manifest.json`` under ``--out``. The
manifest stores the resolved configuration, seed and arguments, so
``vslice-xrl rerun OUT/manifest.json --out NEW`` reproduces the CSVs byte for byte.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .agent import METRIC_FIELDS, DDPGAgent, run_training
from .config import PROFILES, VARIANTS, ConfigError, NetworkConfig, TrainConfig, config_document, load_config, parse_config
from .env import VehicularEnv, feature_names
from .evalkit import RandomPolicy, fidelity_pearson, run_comparison
from .explain import explain_state, normalize_importance
from .seeding import env_seed, stream, stream_key

MANIFEST = "manifest.json"
CHECKPOINT = "checkpoint.json"
TOP_K = 10


class UsageError(Exception):
    """Bad arguments or inputs; maps to exit code 2."""


# ---------------------------------------------------------------- formatting


def fmt(x) -> str:
    """Deterministic text for a CSV cell (shortest round-trip repr for floats)."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------- checkpoints


def save_checkpoint(path: Path, agent: DDPGAgent, network: NetworkConfig):
    doc = agent.to_dict()
    doc["network"] = network.to_dict()
    path.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")))


def load_checkpoint(path, network: NetworkConfig) -> DDPGAgent:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read checkpoint {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"checkpoint {path} is not valid JSON: {exc}") from exc
    try:
        agent = DDPGAgent.from_dict(doc)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"checkpoint {path}: {exc}") from exc
    if agent.actor.obs_dim != network.obs_dim or agent.actor.action_dim != network.action_dim:
        raise UsageError(
            f"checkpoint {path} expects obs/action dims {agent.actor.obs_dim}/{agent.actor.action_dim}, "
            f"config gives {network.obs_dim}/{network.action_dim}"
        )
    return agent


# ---------------------------------------------------------------- commands


def cmd_train(args, network: NetworkConfig, train: TrainConfig, out: Path) -> list[str]:
    env = VehicularEnv(network, env_seed(args.seed, 0))
    agent = DDPGAgent.create(network.obs_dim, network.action_dim, train, stream(args.seed, "init"))
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_FIELDS)

        def log(rec):
            w.writerow([fmt(x) for x in rec.row()])
            if not args.quiet:
                print(f"episode {rec.episode:4d}  reward {rec.mean_reward:9.4f}  "
                      f"urllc {rec.urllc_pct:5.1f}%  embb {rec.embb_pct:5.1f}%", file=sys.stderr)
        run_training(env, agent, train, args.seed, on_episode=log)
    save_checkpoint(out / CHECKPOINT, agent, network)
    return ["metrics.csv", CHECKPOINT]


def _eval_seeds(seed: int, runs: int) -> list[int]:
    return [int(x) for x in stream(seed, "eval", 0).integers(0, 2**31, size=runs)]


def cmd_evaluate(args, network: NetworkConfig, train: TrainConfig, out: Path) -> list[str]:
    methods = {}
    for name in args.policy or []:
        if name != "random":
            raise UsageError(f"unknown built-in policy {name!r} (only 'random'; pass learned ones via --checkpoint)")
        methods["random"] = lambda s: RandomPolicy(stream(s, "eval"), network.num_vehicles, network.num_gnbs)
    for path in args.checkpoint or []:
        agent = load_checkpoint(path, network)
        name = agent.variant
        if name in methods:
            raise UsageError(f"two policies are labelled {name!r}")
        methods[name] = lambda s, a=agent: a.policy
    if not methods:
        raise UsageError("nothing to evaluate: give --policy random and/or --checkpoint PATH")
    rows = run_comparison(network, methods, _eval_seeds(args.seed, args.runs), args.episodes,
                          train.steps_per_episode)
    write_csv(out / "qos.csv", ["method", "urllc_pct", "embb_pct", "episodes", "mean_reward"],
              [[r.method, r.urllc_pct, r.embb_pct, r.episodes, r.mean_reward] for r in rows])
    if not args.quiet:
        print(format_table(rows))
    return ["qos.csv"]


def format_table(rows) -> str:
    def pct(x):
        return "   n/a" if x is None else f"{x:6.2f}"
    lines = [f"{'method':<10} {'URLLC %':>8} {'eMBB %':>8} {'episodes':>9} {'reward/slot':>12}"]
    for r in rows:
        lines.append(f"{r.method:<10} {pct(r.urllc_pct):>8} {pct(r.embb_pct):>8} {r.episodes:>9d} {r.mean_reward:>12.4f}")
    return "\n".join(lines)


def collect_states(network: NetworkConfig, policy, seed: int, count: int, steps: int):
    """``count`` visited states (with fleet snapshots) from one episode of ``policy``.

    The episode length is at least ``count``; states are drawn without replacement.
    """
    env = VehicularEnv(network, env_seed(seed, 2))
    T = max(steps, count)
    s = env.reset()
    visited = []
    for _ in range(T):
        visited.append((s.copy(), env.fleet.copy()))
        s = env.step(policy(s)).observation
    picks = np.sort(stream(seed, "eval", 1).choice(T, size=count, replace=False))
    all_states = np.array([v[0] for v in visited])
    return [visited[k] for k in picks], all_states


def cmd_explain(args, network: NetworkConfig, train: TrainConfig, out: Path) -> list[str]:
    if args.samples < 1:
        raise UsageError("--samples must be ≥ 1")
    if args.states < 1:
        raise UsageError("--states must be ≥ 1")
    agent = load_checkpoint(args.checkpoint, network)
    snaps, visited = collect_states(network, agent.policy, args.seed, args.states, train.steps_per_episode)
    baseline = visited.mean(axis=0)
    names = feature_names(network)
    rows, alphas, psis = [], [], []
    for j, (s, fleet) in enumerate(snaps):
        alpha, _ = agent.actor.attention_forward(s)
        report = explain_state(fleet, agent.policy, baseline, samples=args.samples,
                               horizon=train.rollout_horizon, gamma=train.gamma,
                               rollouts=train.rollout_count, seed=stream_key(args.seed, "shapley", j))
        a_hat, p_hat = normalize_importance(alpha), report.normalized
        alphas.append(alpha)
        psis.append(p_hat)
        for i, name in enumerate(names):
            rows.append([j, i, name, s[i], alpha[i], a_hat[i], report.values[i], p_hat[i], report.stderr[i]])
    write_csv(out / "explain_states.csv",
              ["state", "feature", "name", "value", "alpha", "alpha_norm", "psi", "psi_norm", "psi_stderr"], rows)
    mean_alpha = np.mean(alphas, axis=0)
    mean_psi = np.mean(psis, axis=0)
    write_csv(out / "attention_summary.csv", ["feature", "name", "mean_alpha", "mean_psi_norm"],
              [[i, n, mean_alpha[i], mean_psi[i]] for i, n in enumerate(names)])
    order = np.argsort(-mean_alpha, kind="stable")[:TOP_K]
    write_csv(out / "top_features.csv", ["rank", "feature", "name", "mean_alpha", "mean_psi_norm"],
              [[r + 1, i, names[i], mean_alpha[i], mean_psi[i]] for r, i in enumerate(order)])
    return ["explain_states.csv", "attention_summary.csv", "top_features.csv"]


def cmd_fidelity(args, network: NetworkConfig, train: TrainConfig, out: Path) -> list[str]:
    if len(args.checkpoint or []) < 1:
        raise UsageError("fidelity needs at least one --checkpoint")
    agents = [load_checkpoint(p, network) for p in args.checkpoint]
    # a shared, policy-independent state set: one episode of the random policy
    policy = RandomPolicy(stream(args.seed, "eval", 2), network.num_vehicles, network.num_gnbs)
    snaps, _ = collect_states(network, policy, args.seed, args.states, train.steps_per_episode)
    states = np.array([s for s, _ in snaps])
    summary, per_state = [], []
    for path, agent in zip(args.checkpoint, agents):
        rep = fidelity_pearson(agent.actor, states)
        label = agent.variant
        summary.append([label, rep.mean, rep.n_states, rep.skipped])
        per_state.extend([label, j, r] for j, r in enumerate(rep.correlations))
    write_csv(out / "fidelity.csv", ["method", "mean_pearson", "states", "skipped"], summary)
    write_csv(out / "fidelity_states.csv", ["method", "state", "pearson"], per_state)
    return ["fidelity.csv", "fidelity_states.csv"]


COMMANDS = {"train": cmd_train, "evaluate": cmd_evaluate, "explain": cmd_explain, "fidelity": cmd_fidelity}


# ---------------------------------------------------------------- plumbing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vslice-xrl", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML config (default: bundled configs/default.yaml)")
        sp.add_argument("--profile", default="desk", choices=PROFILES)
        sp.add_argument("--seed", type=int, default=0, help="master seed (non-negative)")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--quiet", action="store_true", help="no progress output")

    sp = sub.add_parser("train", help="train one agent variant")
    common(sp)
    sp.add_argument("--variant", choices=VARIANTS, help="override the profile's variant")
    sp.add_argument("--episodes", type=int, help="override the profile's episode count")

    sp = sub.add_parser("evaluate", help="QoS satisfaction of random and/or trained policies")
    common(sp)
    sp.add_argument("--policy", action="append", help="built-in policy (random); repeatable")
    sp.add_argument("--checkpoint", action="append", help="trained agent checkpoint; repeatable")
    sp.add_argument("--episodes", type=int, default=10, help="episodes per evaluation seed")
    sp.add_argument("--runs", type=int, default=5, help="number of evaluation seeds")

    sp = sub.add_parser("explain", help="attention weights and Shapley values on visited states")
    common(sp)
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--samples", type=int, help="Monte-Carlo permutations (default: profile value)")
    sp.add_argument("--states", type=int, default=5, help="number of explained states")

    sp = sub.add_parser("fidelity", help="Pearson fidelity of attention explanations")
    common(sp)
    sp.add_argument("--checkpoint", action="append", help="checkpoint per compared variant; repeatable")
    sp.add_argument("--states", type=int, default=20, help="size of the shared state set")

    sp = sub.add_parser("rerun", help="repeat a run from its manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", required=True)
    sp.add_argument("--quiet", action="store_true")
    return p


def _resolve(args) -> tuple[NetworkConfig, TrainConfig, dict]:
    """Load the config named by ``args`` and apply command-line overrides."""
    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    network, train = load_config(args.config, args.profile)
    overrides = {}
    if args.command == "train":
        if args.variant:
            overrides["variant"] = args.variant
        if args.episodes is not None:
            overrides["episodes"] = args.episodes
    cp = getattr(args, "checkpoint", None)
    if isinstance(cp, list):
        args.checkpoint = [str(Path(c).resolve()) for c in cp]
    elif cp:
        args.checkpoint = str(Path(cp).resolve())
    if overrides:
        train = TrainConfig(**{**train.to_dict(), **overrides})
    if args.command == "explain" and args.samples is None:
        args.samples = train.shapley_samples
    if getattr(args, "episodes", None) is not None and args.episodes < 1:
        raise UsageError("--episodes must be ≥ 1")
    if getattr(args, "runs", 1) < 1:
        raise UsageError("--runs must be ≥ 1")
    return network, train, config_document(network, train, args.profile)


_RECORDED = ("seed", "profile", "variant", "episodes", "policy", "checkpoint", "samples", "states", "runs")


def execute(args, network, train, config_doc, out: Path) -> Path:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RuntimeError(f"cannot create output directory {out}: {exc.strerror}") from exc
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    recorded = {k: getattr(args, k) for k in _RECORDED if hasattr(args, k)}
    inputs = {}
    cps = args.checkpoint if isinstance(getattr(args, "checkpoint", None), list) else (
        [args.checkpoint] if getattr(args, "checkpoint", None) else [])
    for cp in cps:
        if Path(cp).is_file():
            inputs[str(Path(cp).resolve())] = _sha256(Path(cp))
    outputs = COMMANDS[args.command](args, network, train, out)
    manifest = {
        "command": args.command,
        "arguments": recorded,
        "seed": args.seed,
        "config": config_doc,
        "version": __version__,
        "inputs": inputs,
        "outputs": outputs,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out / MANIFEST


def rerun(args) -> Path:
    path = Path(args.manifest)
    try:
        manifest = json.loads(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read manifest {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"manifest {path} is not valid JSON: {exc}") from exc
    try:
        command = manifest["command"]
        recorded = manifest["arguments"]
        config_doc = manifest["config"]
    except (KeyError, TypeError) as exc:
        raise UsageError(f"manifest {path} lacks field {exc}") from exc
    if command not in COMMANDS:
        raise UsageError(f"manifest {path} names unknown command {command!r}")
    network, train = parse_config(config_doc, recorded["profile"])
    for cp, digest in manifest.get("inputs", {}).items():
        if not Path(cp).is_file() or _sha256(Path(cp)) != digest:
            raise UsageError(f"input {cp} is missing or changed since the recorded run")
    ns = argparse.Namespace(command=command, quiet=args.quiet, **recorded)
    return execute(ns, network, train, config_doc, Path(args.out))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with 2 on usage errors
    try:
        if args.command == "rerun":
            rerun(args)
        else:
            network, train, doc = _resolve(args)
            execute(args, network, train, doc, Path(args.out))
    except (UsageError, ConfigError) as exc:
        print(f"vslice-xrl: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"vslice-xrl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
