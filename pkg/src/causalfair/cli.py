"""Command-line front end.

Subcommands: evaluate, verify, synth, train, report.  Exit codes: 0 success,
1 verification violation, 2 malformed input, 3 evaluation-domain error
(e.g. an empty stratum), 4 numeric divergence.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .adversarial import (
    adversarial_train,
    build_pipeline_networks,
    evaluate_pipeline,
    format_history,
)
from .config import TrainConfig, load_train_config, save_train_config
from .data import load_dataset, save_dataset
from .errors import DataError, EvaluationError, NumericError, TrainingError
from .jsd import format_pretrain_history, pretrain_encoder
from .metrics import (
    FairnessReport,
    fairness_report,
    load_report,
    raw_lines,
    read_predictions,
    scaled_lines,
    table_row,
    write_report,
)
from .serialize import save_network
from .synth import SynthSpec, generate_dataset
from .theorems import (
    counterexample_theorem1,
    counterexample_theorem2,
    feature_independence_given_label,
    prediction_independence_given_label,
    verify_theorem1,
    verify_theorem2,
)
from .scm import PathSelector, direct_effect


def _cmd_evaluate(args) -> int:
    records = read_predictions(args.input)
    report = fairness_report(records)
    lines = scaled_lines(report) if args.scale_paper else raw_lines(report) + scaled_lines(report)
    print("\n".join(lines))
    if args.out:
        write_report(report, args.out)
    return 0


def _cmd_verify(args) -> int:
    violations = 0
    for verify in (verify_theorem1, verify_theorem2):
        rep = verify(args.trials, args.seed, args.tol)
        which = "direct effect" if rep.theorem == 1 else "I(S;Yhat|Y)"
        print(
            f"claim {rep.theorem}: {rep.trials} randomised models, "
            f"max |DE| = {rep.max_abs_de:.3e}, max CMI = {rep.max_cmi:.3e}, "
            f"{rep.violations} violation(s) of {which} <= {rep.tol:g}"
        )
        print(rep.key_value())
        violations += rep.violations

    for label, scm in (("1", counterexample_theorem1()), ("2", counterexample_theorem2())):
        de = max(
            float(np.abs(direct_effect(scm, PathSelector(1, 0), 0)).max()),
            float(np.abs(direct_effect(scm, PathSelector(0, 1), 1)).max()),
        )
        leak = feature_independence_given_label(scm)
        pred = prediction_independence_given_label(scm)
        ok = de < 1e-12 and leak >= 0.05 and (label == "1" or pred < 1e-12)
        print(
            f"counterexample {label}: |DE| = {de:.3e}, I(S;X|Y) = {leak:.6f}, "
            f"I(S;Yhat|Y) = {pred:.3e} -> {'ok' if ok else 'VIOLATION'}"
        )
        violations += 0 if ok else 1
    return 1 if violations else 0


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        dim=args.dim,
        direct_strength=args.direct_strength,
        indirect_strength=args.indirect_strength,
        label_bias=(args.label_bias0, args.label_bias1),
        noise_sd=args.noise_sd,
        seed=args.seed,
    )
    batch = generate_dataset(spec, args.n)
    save_dataset(batch, args.out)
    print(f"wrote {len(batch)} rows x {batch.dim} features to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = load_train_config(args.config) if args.config else TrainConfig()
    if args.data:
        data = load_dataset(args.data)
    else:
        data = generate_dataset(SynthSpec(seed=cfg.seed), args.synth_n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "nets").mkdir(exist_ok=True)
    save_train_config(cfg, out / "config.txt")

    nets = build_pipeline_networks(data.dim, cfg.seed)
    pre_epochs = args.pretrain_epochs if args.pretrain_epochs is not None else cfg.epochs
    pre_cfg = dataclasses.replace(cfg, epochs=pre_epochs)
    pre = pretrain_encoder(nets.encoder, nets.critic, nets.head, data, pre_cfg)
    (out / "pretrain_history.csv").write_text(format_pretrain_history(pre.history))

    result = adversarial_train(nets.generator, nets.discriminator, pre.encoder, pre.head, data, cfg)
    (out / "history.csv").write_text(format_history(result.history))

    _, hold = data.split(cfg.split, cfg.seed)
    vanilla = evaluate_pipeline(result.generator, pre.encoder, pre.head, hold, 0.0)
    final = evaluate_pipeline(result.generator, pre.encoder, pre.head, hold, cfg.eta)
    write_report(final, out / "report.txt")
    for name, net in (
        ("encoder", pre.encoder),
        ("head", pre.head),
        ("critic", pre.critic),
        ("generator", result.generator),
        ("discriminator", result.discriminator),
    ):
        save_network(net, out / "nets" / f"{name}.txt")
    print(f"unmasked holdout: {table_row(vanilla)}")
    print(f"masked holdout:   {table_row(final)}")
    print(f"artifacts in {out}")
    return 0


def _cmd_report(args) -> int:
    for path in args.inputs:
        with open(path) as fh:
            first = fh.readline().strip()
        if first == "epoch,acc,auc,dp,eo,adf":
            with open(path) as fh:
                next(fh)
                for lineno, line in enumerate(fh, start=2):
                    line = line.strip()
                    if not line:
                        continue
                    parts = line.split(",")
                    if len(parts) != 6:
                        raise DataError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
                    try:
                        rep = FairnessReport(
                            acc=float(parts[1]),
                            auc=float(parts[2]),
                            dp=float(parts[3]),
                            eo=float(parts[4]),
                            adf_nats=float(parts[5]),
                        )
                    except ValueError as exc:
                        raise DataError(f"{path}:{lineno}: {exc}") from exc
                    print(table_row(rep))
        else:
            print(table_row(load_report(path)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalfair",
        description="Causal fairness toolkit: exact effects, fairness metrics, adversarial masking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("evaluate", help="score a s,y,yhat[,score] prediction file",
                       formatter_class=fmt)
    p.add_argument("--input", required=True, help="prediction file to score")
    p.add_argument("--out", default=None, help="optional key=value report output")
    p.add_argument("--scale-paper", action="store_true",
                   help="print only display-scaled values (percent / x100 / x1000)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("verify", help="randomised verification of the independence claims",
                       formatter_class=fmt)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("synth", help="generate a synthetic dataset", formatter_class=fmt)
    p.add_argument("--out", required=True, help="output dataset path")
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--direct-strength", type=float, default=1.0)
    p.add_argument("--indirect-strength", type=float, default=1.3)
    p.add_argument("--label-bias0", type=float, default=0.2)
    p.add_argument("--label-bias1", type=float, default=0.8)
    p.add_argument("--noise-sd", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="pretrain, freeze, adversarially mask, write artifacts",
                       formatter_class=fmt)
    p.add_argument("--out", required=True, help="run directory for artifacts")
    p.add_argument("--config", default=None, help="key=value training config (defaults if absent)")
    p.add_argument("--data", default=None, help="dataset file; generated synthetically if absent")
    p.add_argument("--synth-n", type=int, default=20000,
                   help="rows to generate when --data is absent")
    p.add_argument("--pretrain-epochs", type=int, default=None,
                   help="epochs for the pretraining phase (default: config epochs)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("report", help="re-emit reports/histories as display-scaled table rows",
                       formatter_class=fmt)
    p.add_argument("inputs", nargs="+", help="report or history files")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (TrainingError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
