"""Command-line interface: ``syndloss {train,eval,syndrome,compare}``.

Settings come from an optional JSON config file; command-line flags override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import montecarlo
from .decoder import DEFAULT_ITERATIONS, WeightSet, WeightShapeError
from .linear_code import AlistError, hard_syndrome, load_code
from .losses import soft_syndrome, syndrome_loss
from .training import CODEWORD_MODES, TrainConfig, TrainingDiverged, train

log = logging.getLogger("syndloss")


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    code_file: str = ""
    train: TrainConfig | None = None
    eval_snrs: list[float] = field(default_factory=list)
    weights_in: str | None = None
    weights_out: str | None = None
    output_csv: str | None = None
    log_csv: str | None = None
    seed: int = 0
    workers: int = 1
    frame_cap: int = montecarlo.DEFAULT_FRAME_CAP
    min_frames: int = montecarlo.MIN_FRAMES
    min_errors: int = montecarlo.MIN_FRAME_ERRORS
    iterations: int = DEFAULT_ITERATIONS
    early_exit: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["train"] = self.train.to_dict() if self.train is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        tr = d.pop("train", None)
        try:
            cfg = cls(**d)
            if tr is not None:
                cfg.train = TrainConfig(**tr)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        cfg.eval_snrs = [float(v) for v in cfg.eval_snrs]
        return cfg

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> ExperimentConfig:
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None


def _atomic_write(path, write):
    """Run ``write(tmp_path)`` then move the result into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _check_output(path, what):
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise ConfigError(f"{what}: directory {parent} does not exist")
    if not os.access(parent, os.W_OK):
        raise ConfigError(f"{what}: directory {parent} is not writable")


def _load_code(cfg):
    if not cfg.code_file:
        raise ConfigError("no code given (--code or code_file in the config)")
    try:
        return load_code(cfg.code_file)
    except FileNotFoundError as exc:
        raise ConfigError(str(exc)) from None
    except AlistError as exc:
        raise ConfigError(f"{cfg.code_file}: {exc}") from None


def _load_weights(path, code):
    if not Path(path).is_file():
        raise ConfigError(f"weight file {path} does not exist")
    try:
        w = WeightSet.load(path)
        w.check_graph(code.tanner)
    except WeightShapeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: malformed weight file ({exc})") from None
    return w


def _parse_floats(text):
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"cannot parse numbers from {text!r}") from None


# -- config assembly ---------------------------------------------------------

_TRAIN_FLAGS = {
    "lam": "lam", "learning_rate": "learning_rate", "minibatch_size": "minibatch_size",
    "num_minibatches": "num_minibatches", "snr_range": "snr_range_db",
    "codeword_mode": "codeword_mode", "parametrization": "parametrization",
    "iterations": "iterations",
}
_TOP_FLAGS = ("seed", "workers", "frame_cap", "min_frames", "min_errors", "iterations")


def build_config(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        p = Path(args.config)
        if not p.is_file():
            raise ConfigError(f"config file {p} does not exist")
        cfg = ExperimentConfig.loads(p.read_text())
    else:
        cfg = ExperimentConfig()
    if getattr(args, "code", None):
        cfg.code_file = args.code
    for name in _TOP_FLAGS:
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    for flag, attr in (("weights", "weights_in"), ("weights_out", "weights_out"),
                       ("out", "output_csv"), ("log_out", "log_csv")):
        val = getattr(args, flag, None)
        if val is not None:
            setattr(cfg, attr, val)
    if getattr(args, "snrs", None):
        cfg.eval_snrs = _parse_floats(args.snrs)
    if getattr(args, "early_exit", False):
        cfg.early_exit = True

    if args.command == "train":
        if cfg.train is not None:
            tr = cfg.train.to_dict()
        else:
            tr = TrainConfig().to_dict()
            tr["codeword_mode"] = None  # resolved from the final lam
        for flag, attr in _TRAIN_FLAGS.items():
            val = getattr(args, flag, None)
            if val is not None:
                tr[attr] = val
        tr["seed"] = cfg.seed
        try:
            cfg.train = TrainConfig(**tr)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cfg.iterations = cfg.train.iterations
    return cfg


# -- commands ----------------------------------------------------------------

def cmd_train(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    code = _load_code(cfg)
    if not cfg.weights_out:
        raise ConfigError("train needs an output weight file (--weights-out)")
    _check_output(cfg.weights_out, "weights_out")
    _check_output(cfg.log_csv, "log_csv")
    tc = cfg.train or TrainConfig(seed=cfg.seed)

    every = max(1, tc.num_minibatches // 20)

    def progress(i, br):
        if (i + 1) % every == 0:
            log.info("minibatch %d/%d  loss %.5f  (syndrome %.5f, cross-entropy %.5f)",
                     i + 1, tc.num_minibatches, br.total, br.syndrome_part,
                     br.cross_entropy_part)

    result = train(code, tc, progress=progress)
    _atomic_write(cfg.weights_out, result.weights.save)
    log_path = cfg.log_csv or str(Path(cfg.weights_out).with_suffix(".log.csv"))
    _atomic_write(log_path, result.log.write_csv)
    status = "DEGENERATE" if result.log.degenerate else "ok"
    print(f"weights: {cfg.weights_out}", file=out)
    print(f"training log: {log_path}", file=out)
    print(f"sanity probe FER {result.log.probe_fer:.4f}: {status}", file=out)
    return 0


def cmd_eval(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    code = _load_code(cfg)
    weights = _load_weights(cfg.weights_in, code) if cfg.weights_in else None
    if not cfg.eval_snrs:
        raise ConfigError("no SNR points given (--snrs or eval_snrs in the config)")
    if not cfg.output_csv:
        raise ConfigError("eval needs an output CSV (--out)")
    _check_output(cfg.output_csv, "output_csv")
    if weights is None:
        weights = WeightSet.initial(code.tanner, cfg.iterations, code_name=code.name, k=code.k)
    try:
        points = montecarlo.evaluate(code, weights, cfg.eval_snrs, seed=cfg.seed,
                                     frame_cap=cfg.frame_cap, min_frames=cfg.min_frames,
                                     min_errors=cfg.min_errors, workers=cfg.workers,
                                     early_exit=cfg.early_exit)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _atomic_write(cfg.output_csv, lambda p: montecarlo.write_results(points, p))
    for p in points:
        flag = "  (frame cap reached)" if p.capped else ""
        print(f"Eb/N0 {p.ebn0_db:5.2f} dB  FER {p.fer:.4e}  BER {p.ber:.4e}  "
              f"frames {p.frames}  frame errors {p.frame_errors}{flag}", file=out)
    return 0


def _fmt_vec(values, fmt):
    return "{" + ", ".join(format(v, fmt) for v in values) + "}"


def cmd_syndrome(code_file: str, vector, out=None) -> int:
    out = out or sys.stdout
    code = _load_code(ExperimentConfig(code_file=code_file))
    s = np.asarray(vector, dtype=np.float64)
    if s.shape != (code.n,):
        raise ConfigError(f"vector has {s.size} entries, code length is {code.n}")
    hs = hard_syndrome(code, s)
    ss = soft_syndrome(s, code.tanner)
    loss = float(syndrome_loss(s, code.tanner))
    print(f"hard_syndrome: {_fmt_vec([int(v) for v in hs], '+d')}", file=out)
    print(f"soft_syndrome: {_fmt_vec([float(v) for v in ss], '+')}", file=out)
    print(f"syndrome_loss: {loss!r}", file=out)
    return 0


def cmd_compare(csv_a, csv_b, out_csv=None, out=None) -> int:
    out = out or sys.stdout
    for p in (csv_a, csv_b):
        if not Path(p).is_file():
            raise ConfigError(f"results file {p} does not exist")
    _check_output(out_csv, "output")
    try:
        rows = montecarlo.compare(montecarlo.read_results(csv_a), montecarlo.read_results(csv_b))
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    print(f"{'Eb/N0':>7}  {'FER a':>11}  {'FER b':>11}  {'a/b':>8}  a<b", file=out)
    for r in rows:
        print(f"{r.ebn0_db:7.2f}  {r.fer_a:11.4e}  {r.fer_b:11.4e}  {r.ratio:8.4f}  "
              f"{'yes' if r.a_better else 'no'}", file=out)
    if out_csv:
        _atomic_write(out_csv, lambda p: montecarlo.write_comparison(rows, p))
    return 0


# -- argument parsing ----------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syndloss", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    verbose = argparse.ArgumentParser(add_help=False)
    verbose.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    def common(p):
        p.add_argument("--config", help="JSON experiment config; flags override it")
        p.add_argument("--code", help="alist file or bundled code name (e.g. ldpc_16_8)")
        p.add_argument("--seed", type=int)
        p.add_argument("--iterations", type=int, help="decoding iterations T")
        p.add_argument("--dump-config", metavar="PATH",
                       help="write the effective config as JSON and continue")

    p = sub.add_parser("train", parents=[verbose], help="train NNMS weights")
    common(p)
    p.add_argument("--lam", type=float, help="weight of cross-entropy; 0 = unsupervised")
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--minibatch-size", type=int)
    p.add_argument("--num-minibatches", type=int)
    p.add_argument("--snr-range", type=float, nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--codeword-mode", choices=CODEWORD_MODES)
    p.add_argument("--parametrization", choices=("identity", "softplus"))
    p.add_argument("--weights-out")
    p.add_argument("--log-out", help="training log CSV (default: <weights-out>.log.csv)")

    p = sub.add_parser("eval", parents=[verbose], help="Monte Carlo FER/BER of a decoder")
    common(p)
    p.add_argument("--weights", help="weight file; omit for plain min-sum (all weights 1)")
    p.add_argument("--snrs", help="Eb/N0 points in dB, e.g. '1,2,3'")
    p.add_argument("--out", help="results CSV")
    p.add_argument("--workers", type=int)
    p.add_argument("--frame-cap", type=int)
    p.add_argument("--min-frames", type=int)
    p.add_argument("--min-errors", type=int)
    p.add_argument("--early-exit", action="store_true",
                   help="stop decoding a frame once its hard decision is a codeword")

    p = sub.add_parser("syndrome", parents=[verbose],
                       help="hard/soft syndrome and syndrome loss of a vector")
    p.add_argument("--code", required=True)
    p.add_argument("--vector", required=True, help="n soft values, comma or space separated")

    p = sub.add_parser("compare", parents=[verbose],
                       help="per-SNR FER ratio of two results CSVs (a / b)")
    p.add_argument("csv_a")
    p.add_argument("csv_b")
    p.add_argument("--out", help="write the ratio table as CSV")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "syndrome":
            return cmd_syndrome(args.code, _parse_floats(args.vector))
        if args.command == "compare":
            return cmd_compare(args.csv_a, args.csv_b, args.out)
        cfg = build_config(args)
        if args.dump_config:
            _check_output(args.dump_config, "dump-config")
            Path(args.dump_config).write_text(cfg.dumps())
        if args.command == "train":
            return cmd_train(cfg)
        return cmd_eval(cfg)
    except ConfigError as exc:
        print(f"syndloss: error: {exc}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"syndloss: training diverged: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
