"""Experiment runner: configuration files, CLI subcommands, checkpoint
persistence and metric/report emission.

Subcommands:

    hqgan target --config cfg.ini --out rundir
    hqgan train  --config cfg.ini --out rundir [--seed N] [--workers N]
    hqgan resume --out rundir [--checkpoint ckpt.json]
    hqgan report --out rundir

A run directory is owned exclusively by one process (lock file). Train
writes a canonical copy of its configuration, the target dataset, a
metric CSV row per epoch (flushed as written), periodic JSON
checkpoints, and a final report. Resume continues bit-exactly from a
checkpoint: the serialized rng state plus the fixed draw order per
epoch make the record series identical to an uninterrupted run.

Config files are INI-style with sections [run], [estimator], [noise]
and [target]; every key has a default, and unknown sections or keys
are rejected so typos cannot silently disable a noise channel.

Exit codes: 0 success, 2 configuration error, 3 I/O error,
4 numerical abort.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .discriminator import AdamState, MlpParams
from .generator import EstimatorConfig, generate_batch
from .metrics import histogram, kl_divergence, summarize
from .noise import CHANNEL_KINDS, NoiseParams
from .training import (
    THETA_INIT,
    THETA_STAR,
    EpochRecord,
    NumericalAbort,
    TrainConfig,
    TrainState,
    make_target,
    train,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

CHECKPOINT_FORMAT_VERSION = 1
METRICS_HEADER = ",".join(EpochRecord.FIELDS)

CONFIG_FILENAME = "config.ini"
TARGET_FILENAME = "target.csv"
METRICS_FILENAME = "metrics.csv"
REPORT_FILENAME = "report.json"
LOCK_FILENAME = ".lock"
CHECKPOINT_DIRNAME = "checkpoints"


class ConfigError(Exception):
    """Invalid or inconsistent configuration."""


@dataclass(frozen=True)
class RunnerConfig:
    """Everything parsed from a config file."""

    train: TrainConfig
    theta_star: tuple
    target_n: int


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

_SCHEMA = {
    "run": (
        "epochs", "n_samples", "label_smooth", "lr_d", "lr_g", "seed",
        "theta_init", "metric_sample_count", "checkpoint_every",
    ),
    "estimator": ("mode", "n_shots", "readout"),
    "noise": (
        "enabled", "t1_time", "t2_time", "gate_time_1q", "gate_time_2q",
        "p00", "p11", "override_p_damp", "override_p_deph",
    ),
    "target": ("theta_star", "n"),
}


def _parse_scalar(section: str, key: str, raw: str, kind):
    try:
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def _parse_bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {raw!r}")


def _parse_theta(section: str, key: str, raw: str) -> tuple:
    parts = [p for p in raw.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigError(f"[{section}] {key}: expected 3 angles, got {raw!r}")
    return tuple(_parse_scalar(section, key, p, float) for p in parts)


def load_config(path: str) -> RunnerConfig:
    """Parse and validate a config file into a RunnerConfig."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key).strip()
        return default

    run, est, noi, tgt = "run", "estimator", "noise", "target"

    raw_enabled = get(noi, "enabled", "")
    enabled = frozenset(p for p in raw_enabled.replace(",", " ").split() if p)
    bad = enabled - set(CHANNEL_KINDS)
    if bad:
        raise ConfigError(f"[noise] enabled: unknown channel(s) {sorted(bad)}")

    def opt_float(section, key):
        raw = get(section, key)
        return None if raw in (None, "") else _parse_scalar(section, key, raw, float)

    noise = None
    if enabled:
        try:
            noise = NoiseParams(
                T1=opt_float(noi, "t1_time") if get(noi, "t1_time") else 15e-6,
                T2=opt_float(noi, "t2_time") if get(noi, "t2_time") else 18e-6,
                t1=opt_float(noi, "gate_time_1q") if get(noi, "gate_time_1q") else 50e-9,
                t2=opt_float(noi, "gate_time_2q") if get(noi, "gate_time_2q") else 400e-9,
                p00=opt_float(noi, "p00") if get(noi, "p00") else 0.91,
                p11=opt_float(noi, "p11") if get(noi, "p11") else 0.91,
                override_p_damp=opt_float(noi, "override_p_damp"),
                override_p_deph=opt_float(noi, "override_p_deph"),
                enabled=enabled,
            )
        except ValueError as exc:
            raise ConfigError(f"[noise] {exc}") from exc

    try:
        estimator = EstimatorConfig(
            mode=get(est, "mode", "shots"),
            n_shots=_parse_scalar(est, "n_shots", get(est, "n_shots", "1000"), int),
            readout_enabled=_parse_bool(est, "readout", get(est, "readout", "true")),
        )
    except ValueError as exc:
        raise ConfigError(f"[estimator] {exc}") from exc

    theta_init_raw = get(run, "theta_init")
    theta_init = _parse_theta(run, "theta_init", theta_init_raw) if theta_init_raw else THETA_INIT

    try:
        train_cfg = TrainConfig(
            epochs=_parse_scalar(run, "epochs", get(run, "epochs", "4500"), int),
            n_samples=_parse_scalar(run, "n_samples", get(run, "n_samples", "100"), int),
            estimator=estimator,
            noise=noise,
            label_smooth=_parse_scalar(run, "label_smooth", get(run, "label_smooth", "0.9"), float),
            lr_d=_parse_scalar(run, "lr_d", get(run, "lr_d", "0.01"), float),
            lr_g=_parse_scalar(run, "lr_g", get(run, "lr_g", "0.001"), float),
            seed=_parse_scalar(run, "seed", get(run, "seed", "4"), int),
            theta_init=theta_init,
            target_path=None,
            metric_sample_count=_parse_scalar(
                run, "metric_sample_count", get(run, "metric_sample_count", "1000"), int
            ),
            checkpoint_every=_parse_scalar(
                run, "checkpoint_every", get(run, "checkpoint_every", "500"), int
            ),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    theta_star_raw = get(tgt, "theta_star")
    theta_star = _parse_theta(tgt, "theta_star", theta_star_raw) if theta_star_raw else THETA_STAR
    target_n = _parse_scalar(tgt, "n", get(tgt, "n", "1000"), int)
    if target_n < 1:
        raise ConfigError(f"[target] n must be >= 1, got {target_n}")

    return RunnerConfig(train=train_cfg, theta_star=theta_star, target_n=target_n)


def config_fingerprint(cfg: RunnerConfig) -> str:
    """Stable hash of every effective setting."""
    canon = _canonical_dict(cfg)
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _canonical_dict(cfg: RunnerConfig) -> dict:
    t, e, n = cfg.train, cfg.train.estimator, cfg.train.noise
    return {
        "schema": 1,
        "run": {
            "epochs": t.epochs,
            "n_samples": t.n_samples,
            "label_smooth": t.label_smooth,
            "lr_d": t.lr_d,
            "lr_g": t.lr_g,
            "seed": t.seed,
            "theta_init": list(t.theta_init),
            "metric_sample_count": t.metric_sample_count,
            "checkpoint_every": t.checkpoint_every,
        },
        "estimator": {"mode": e.mode, "n_shots": e.n_shots, "readout": e.readout_enabled},
        "noise": None if n is None else {
            "enabled": sorted(n.enabled),
            "t1_time": n.T1,
            "t2_time": n.T2,
            "gate_time_1q": n.t1,
            "gate_time_2q": n.t2,
            "p00": n.p00,
            "p11": n.p11,
            "override_p_damp": n.override_p_damp,
            "override_p_deph": n.override_p_deph,
        },
        "target": {"theta_star": list(cfg.theta_star), "n": cfg.target_n},
    }


def write_config_copy(cfg: RunnerConfig, path: str):
    """Canonical INI re-emission of the effective configuration."""
    parser = configparser.ConfigParser(interpolation=None)
    canon = _canonical_dict(cfg)
    parser["run"] = {k: _ini_value(v) for k, v in canon["run"].items()}
    parser["estimator"] = {k: _ini_value(v) for k, v in canon["estimator"].items()}
    if canon["noise"] is not None:
        parser["noise"] = {k: _ini_value(v) for k, v in canon["noise"].items()}
    parser["target"] = {k: _ini_value(v) for k, v in canon["target"].items()}
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def _ini_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ", ".join(_ini_value(x) for x in v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# RNG streams
# ---------------------------------------------------------------------------


def target_rng(seed: int) -> np.random.Generator:
    """Target-generation stream, distinct from the training stream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))


def eval_rng(seed: int, epoch: int) -> np.random.Generator:
    """Stream for report-time distribution sampling at a given epoch."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, epoch)))


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def checkpoint_blob(state: TrainState, fingerprint: str) -> dict:
    def adam_dict(a: AdamState) -> dict:
        return {
            "lr": a.lr,
            "m": [m.tolist() for m in a.m],
            "v": [v.tolist() for v in a.v],
            "t": a.t,
            "beta1": a.beta1,
            "beta2": a.beta2,
            "eps": a.eps,
        }

    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "fingerprint": fingerprint,
        "epoch": state.epoch,
        "theta": state.theta.tolist(),
        "mlp": {
            "weights": [w.tolist() for w in state.mlp.weights],
            "biases": [b.tolist() for b in state.mlp.biases],
        },
        "adam_d": adam_dict(state.adam_d),
        "adam_g": adam_dict(state.adam_g),
        "rng_state": state.rng.bit_generator.state,
    }


def save_checkpoint(state: TrainState, fingerprint: str, path: str):
    blob = checkpoint_blob(state, fingerprint)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, path)


def load_checkpoint(path: str, fingerprint: str, target: np.ndarray) -> TrainState:
    try:
        with open(path, encoding="utf-8") as fh:
            blob = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read checkpoint {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"corrupt checkpoint {path}: {exc}") from exc
    version = blob.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ConfigError(
            f"checkpoint format version {version} != supported {CHECKPOINT_FORMAT_VERSION}"
        )
    if blob.get("fingerprint") != fingerprint:
        raise ConfigError("checkpoint fingerprint does not match the run configuration")

    def adam_from(d) -> AdamState:
        return AdamState(
            lr=d["lr"],
            m=[np.asarray(m, dtype=float) for m in d["m"]],
            v=[np.asarray(v, dtype=float) for v in d["v"]],
            t=d["t"],
            beta1=d["beta1"],
            beta2=d["beta2"],
            eps=d["eps"],
        )

    rng = np.random.default_rng()
    rng.bit_generator.state = blob["rng_state"]
    return TrainState(
        epoch=blob["epoch"],
        theta=np.asarray(blob["theta"], dtype=float),
        mlp=MlpParams(
            weights=[np.asarray(w, dtype=float) for w in blob["mlp"]["weights"]],
            biases=[np.asarray(b, dtype=float) for b in blob["mlp"]["biases"]],
        ),
        adam_d=adam_from(blob["adam_d"]),
        adam_g=adam_from(blob["adam_g"]),
        rng=rng,
        target=target,
    )


def checkpoint_path(out_dir: str, epoch: int) -> str:
    return os.path.join(out_dir, CHECKPOINT_DIRNAME, f"ckpt_{epoch:06d}.json")


def latest_checkpoint(out_dir: str) -> str:
    ckpt_dir = os.path.join(out_dir, CHECKPOINT_DIRNAME)
    names = sorted(n for n in os.listdir(ckpt_dir) if n.startswith("ckpt_") and n.endswith(".json"))
    if not names:
        raise OSError(f"no checkpoints found in {ckpt_dir}")
    return os.path.join(ckpt_dir, names[-1])


# ---------------------------------------------------------------------------
# Metric and target files
# ---------------------------------------------------------------------------


def format_row(rec: EpochRecord) -> str:
    vals = rec.as_row()
    return ",".join([str(vals[0])] + [repr(float(v)) for v in vals[1:]])


def read_metrics(path: str) -> list[list[float]]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != METRICS_HEADER:
            raise ConfigError(f"unexpected metrics header in {path}: {header!r}")
        return [[float(x) for x in line.split(",")] for line in fh if line.strip()]


def write_target_file(values: np.ndarray, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        for v in values:
            fh.write(repr(float(v)) + "\n")


def read_target_file(path: str) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return np.array([float(line) for line in fh if line.strip()])


def summary_dict(samples) -> dict:
    s = summarize(samples)
    return {"mean": s.mean, "std": s.std, "median": s.median, "q1": s.q1, "q3": s.q3}


# ---------------------------------------------------------------------------
# Run directory helpers
# ---------------------------------------------------------------------------


class RunLock:
    """Exclusive ownership of a run directory via a lock file."""

    def __init__(self, out_dir: str):
        self.path = os.path.join(out_dir, LOCK_FILENAME)
        self.fd = None

    def __enter__(self):
        try:
            self.fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as exc:
            raise OSError(
                f"run directory is locked by {self.path}; remove it if no run is active"
            ) from exc
        os.write(self.fd, f"{os.getpid()}\n".encode())
        return self

    def __exit__(self, *exc_info):
        if self.fd is not None:
            os.close(self.fd)
            os.remove(self.path)
        return False


def ensure_target(cfg: RunnerConfig, out_dir: str) -> np.ndarray:
    """Load the run's target dataset, generating it if absent."""
    path = os.path.join(out_dir, TARGET_FILENAME)
    if os.path.exists(path):
        return read_target_file(path)
    values = make_target(cfg.theta_star, cfg.target_n, cfg.train.estimator,
                         target_rng(cfg.train.seed))
    write_target_file(values, path)
    return values


def sample_at(cfg: RunnerConfig, theta, epoch: int) -> np.ndarray:
    """metric_sample_count generator samples at the given angles."""
    rng = eval_rng(cfg.train.seed, epoch)
    zs = rng.uniform(-1.0, 1.0, cfg.train.metric_sample_count)
    return generate_batch(zs, theta, cfg.train.noise, cfg.train.estimator, rng)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_target(args) -> int:
    cfg = _load_with_overrides(args)
    os.makedirs(args.out, exist_ok=True)
    values = make_target(cfg.theta_star, cfg.target_n, cfg.train.estimator,
                         target_rng(cfg.train.seed))
    path = os.path.join(args.out, TARGET_FILENAME)
    write_target_file(values, path)
    with open(os.path.join(args.out, "target_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary_dict(values), fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"wrote {values.size} target samples to {path}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_with_overrides(args)
    out = args.out
    os.makedirs(os.path.join(out, CHECKPOINT_DIRNAME), exist_ok=True)
    metrics_path = os.path.join(out, METRICS_FILENAME)
    fingerprint = config_fingerprint(cfg)

    with RunLock(out):
        if os.path.exists(metrics_path):
            raise OSError(
                f"{metrics_path} already exists; use 'resume' or a fresh --out directory"
            )
        write_config_copy(cfg, os.path.join(out, CONFIG_FILENAME))
        target = ensure_target(cfg, out)
        with open(metrics_path, "w", encoding="utf-8") as fh:
            fh.write(METRICS_HEADER + "\n")
            fh.flush()

            def on_record(rec):
                fh.write(format_row(rec) + "\n")
                fh.flush()

            def on_checkpoint(state):
                save_checkpoint(state, fingerprint, checkpoint_path(out, state.epoch))

            state, _ = train(cfg.train, target, on_record=on_record, on_checkpoint=on_checkpoint)
            if not os.path.exists(checkpoint_path(out, state.epoch)):
                save_checkpoint(state, fingerprint, checkpoint_path(out, state.epoch))
    _write_report(cfg, out)
    print(f"trained {state.epoch} epochs; run directory: {out}")
    return EXIT_OK


def cmd_resume(args) -> int:
    out = args.out
    cfg = load_config(os.path.join(out, CONFIG_FILENAME))
    if args.seed is not None:
        raise ConfigError("--seed cannot be overridden on resume; it is part of the run config")
    fingerprint = config_fingerprint(cfg)
    ckpt = args.checkpoint or latest_checkpoint(out)

    with RunLock(out):
        target = ensure_target(cfg, out)
        state = load_checkpoint(ckpt, fingerprint, target)
        metrics_path = os.path.join(out, METRICS_FILENAME)
        rows = read_metrics(metrics_path)
        kept = [r for r in rows if r[0] <= state.epoch]
        if len(kept) != state.epoch + 1:
            raise ConfigError(
                f"metrics file has {len(kept)} rows up to epoch {state.epoch}; expected "
                f"{state.epoch + 1} (epoch 0 through {state.epoch})"
            )
        with open(metrics_path, "w", encoding="utf-8") as fh:
            fh.write(METRICS_HEADER + "\n")
            for r in kept:
                fh.write(",".join([str(int(r[0]))] + [repr(v) for v in r[1:]]) + "\n")
            fh.flush()

            def on_record(rec):
                fh.write(format_row(rec) + "\n")
                fh.flush()

            def on_checkpoint(st):
                save_checkpoint(st, fingerprint, checkpoint_path(out, st.epoch))

            state, _ = train(cfg.train, target, state=state,
                             on_record=on_record, on_checkpoint=on_checkpoint)
            save_checkpoint(state, fingerprint, checkpoint_path(out, state.epoch))
    _write_report(cfg, out)
    print(f"resumed to epoch {state.epoch}; run directory: {out}")
    return EXIT_OK


def cmd_report(args) -> int:
    out = args.out
    cfg = load_config(os.path.join(out, CONFIG_FILENAME))
    _write_report(cfg, out)
    print(f"report written to {os.path.join(out, REPORT_FILENAME)}")
    return EXIT_OK


def _write_report(cfg: RunnerConfig, out: str):
    rows = read_metrics(os.path.join(out, METRICS_FILENAME))
    if not rows:
        raise ConfigError("metrics file has no rows")
    target = read_target_file(os.path.join(out, TARGET_FILENAME))
    fingerprint = config_fingerprint(cfg)

    first_ckpt = checkpoint_path(out, 0)
    last_epoch = int(rows[-1][0])
    distributions = {}
    for label, epoch in (("initial", 0), ("final", last_epoch)):
        path = checkpoint_path(out, epoch)
        if not os.path.exists(path):
            path = first_ckpt if label == "initial" else latest_checkpoint(out)
        state = load_checkpoint(path, fingerprint, target)
        samples = sample_at(cfg, state.theta, state.epoch)
        fname = os.path.join(out, f"{label}_distribution.csv")
        write_target_file(samples, fname)
        distributions[label] = {
            "epoch": state.epoch,
            "theta": state.theta.tolist(),
            "kl_vs_target": kl_divergence(histogram(target), histogram(samples)),
            "summary": summary_dict(samples),
        }

    report = {
        "fingerprint": fingerprint,
        "epochs_completed": last_epoch,
        "record_count": len(rows),
        "target_summary": summary_dict(target),
        "initial": distributions["initial"],
        "final": distributions["final"],
        "final_metrics_row": dict(zip(EpochRecord.FIELDS, rows[-1])),
    }
    with open(os.path.join(out, REPORT_FILENAME), "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _load_with_overrides(args) -> RunnerConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = RunnerConfig(
            train=_replace_train(cfg.train, seed=args.seed),
            theta_star=cfg.theta_star,
            target_n=cfg.target_n,
        )
    return cfg


def _replace_train(t: TrainConfig, **kw) -> TrainConfig:
    return replace(t, **kw)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hqgan",
        description="Adversarial training of a noisy two-qubit variational generator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config):
        if needs_config:
            p.add_argument("--config", required=True, help="path to an INI config file")
        p.add_argument("--out", required=True, help="run directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workers", type=int, default=1,
                       help="worker hint; evaluation is vectorized, results are identical "
                            "for any value")

    p_target = sub.add_parser("target", help="generate the target dataset")
    common(p_target, needs_config=True)
    p_train = sub.add_parser("train", help="run a training experiment")
    common(p_train, needs_config=True)
    p_resume = sub.add_parser("resume", help="continue a run from its latest checkpoint")
    common(p_resume, needs_config=False)
    p_resume.add_argument("--checkpoint", default=None, help="explicit checkpoint file")
    p_report = sub.add_parser("report", help="re-emit report files for a run directory")
    common(p_report, needs_config=False)
    return parser


_COMMANDS = {
    "target": cmd_target,
    "train": cmd_train,
    "resume": cmd_resume,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
