"""Hyperparameter sweeps: mask budget eta, confusion weight alpha, task
weight beta.

Pretraining is shared per seed; every arm trains its own generator and
discriminator against the same frozen encoder/head and reports final-epoch
holdout metrics. Prints seed-averaged tables per sweep; optionally writes
the full per-seed grid as CSV.
"""
import argparse
import dataclasses
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from causalfair.adversarial import (
    adversarial_train,
    build_pipeline_networks,
    evaluate_pipeline,
)
from causalfair.config import TrainConfig
from causalfair.jsd import pretrain_encoder
from causalfair.synth import SynthSpec, generate_dataset

ETA_GRID = (0.0, 0.2, 0.4)
ALPHA_GRID = (0.0, 2.0, 4.0)
BETA_GRID = (0.0, 2.0, 4.0)


def arms_for(args):
    arms = []
    for eta in ETA_GRID:
        if eta > 0.0:  # eta=0 is the vanilla pipeline, no training needed
            arms.append((eta, 1.0, 1.0))
    for alpha in ALPHA_GRID:
        arms.append((0.2, alpha, 1.0))
    for beta in BETA_GRID:
        arms.append((0.2, 1.0, beta))
    return sorted(set(arms))


def run_seed(seed, arms, args):
    data = generate_dataset(dataclasses.replace(SynthSpec(), seed=seed), args.n)
    pre_cfg = TrainConfig(
        lr_g=args.pre_lr, lr_d=args.pre_lr, epochs=args.pre_epochs,
        batch=args.batch, seed=seed, split=args.split,
    )
    nets = build_pipeline_networks(data.dim, seed)
    pre = pretrain_encoder(
        nets.encoder, nets.critic, nets.head, data, pre_cfg, halve_every=args.pre_halve
    )
    _, hold = data.split(args.split, seed)
    reports = {
        (0.0, 1.0, 1.0): evaluate_pipeline(nets.generator, pre.encoder, pre.head, hold, 0.0)
    }
    for eta, alpha, beta in arms:
        cfg = dataclasses.replace(
            pre_cfg, eta=eta, alpha=alpha, beta=beta,
            epochs=args.adv_epochs, lr_g=args.adv_lr_g, lr_d=args.adv_lr_d,
        )
        result = adversarial_train(
            nets.generator, nets.discriminator, pre.encoder, pre.head, data, cfg,
            halve_every=args.adv_halve,
        )
        reports[(eta, alpha, beta)] = result.history[-1].report
    return reports


def sweep_table(title, header, keys, grids):
    print(f"\n{title}")
    print(f"  {header:>6}    acc      auc      dp       eo       adf")
    for label, key in keys:
        rows = [g[key] for g in grids]
        k = len(rows)
        print(
            f"  {label:>6}   {sum(r.acc for r in rows) / k:.4f}   "
            f"{sum(r.auc for r in rows) / k:.4f}   {sum(r.dp for r in rows) / k:.4f}   "
            f"{sum(r.eo for r in rows) / k:.4f}   {sum(r.adf_nats for r in rows) / k:.5f}"
        )


def main(argv=None):
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--n", type=int, default=6000)
    parser.add_argument("--split", type=float, default=0.8)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--pre-lr", type=float, default=0.1)
    parser.add_argument("--pre-epochs", type=int, default=500)
    parser.add_argument("--pre-halve", type=int, default=60)
    parser.add_argument("--adv-lr-g", type=float, default=0.04)
    parser.add_argument("--adv-lr-d", type=float, default=0.2)
    parser.add_argument("--adv-epochs", type=int, default=250)
    parser.add_argument("--adv-halve", type=int, default=100)
    parser.add_argument("--out", default=None, help="CSV path for the per-seed grid")
    args = parser.parse_args(argv)

    arms = arms_for(args)
    t0 = time.perf_counter()
    grids = []
    for seed in range(args.seeds):
        grids.append(run_seed(seed, arms, args))
        print(f"seed {seed} done ({time.perf_counter() - t0:.0f}s)")

    sweep_table(
        "mask budget eta (alpha=1, beta=1):", "eta",
        [(f"{eta:g}", (eta, 1.0, 1.0)) for eta in ETA_GRID], grids,
    )
    sweep_table(
        "confusion weight alpha (eta=0.2, beta=1):", "alpha",
        [(f"{a:g}", (0.2, a, 1.0)) for a in ALPHA_GRID], grids,
    )
    sweep_table(
        "task weight beta (eta=0.2, alpha=1):", "beta",
        [(f"{b:g}", (0.2, 1.0, b)) for b in BETA_GRID], grids,
    )

    if args.out:
        lines = ["eta,alpha,beta,seed,acc,auc,dp,eo,adf"]
        for seed, grid in enumerate(grids):
            for (eta, alpha, beta), r in sorted(grid.items()):
                lines.append(
                    f"{eta:g},{alpha:g},{beta:g},{seed},"
                    f"{r.acc!r},{r.auc!r},{r.dp!r},{r.eo!r},{r.adf_nats!r}"
                )
        Path(args.out).write_text("\n".join(lines) + "\n")
        print(f"\nwrote grid to {args.out}")
    print(f"total {time.perf_counter() - t0:.0f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
