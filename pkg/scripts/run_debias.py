"""Headline debiasing run: pretrain, freeze, adversarially mask, compare.

Per seed: pretrain the encoder/head on the default synthetic dataset, score
the frozen pipeline unmasked (vanilla), then train the generator at the
given eta/alpha/beta and score the masked pipeline on the same holdout.
Prints per-seed rows and the seed-averaged summary; optionally writes
per-seed history files.
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
    format_history,
)
from causalfair.config import TrainConfig
from causalfair.jsd import pretrain_encoder
from causalfair.synth import SynthSpec, generate_dataset


def run_seed(seed, args):
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
    vanilla = evaluate_pipeline(nets.generator, pre.encoder, pre.head, hold, 0.0)

    adv_cfg = dataclasses.replace(
        pre_cfg, eta=args.eta, alpha=args.alpha, beta=args.beta,
        epochs=args.adv_epochs, lr_g=args.adv_lr_g, lr_d=args.adv_lr_d,
    )
    result = adversarial_train(
        nets.generator, nets.discriminator, pre.encoder, pre.head, data, adv_cfg,
        halve_every=args.adv_halve,
    )
    return vanilla, result


def main(argv=None):
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument("--seeds", type=int, default=5, help="number of seeds (0..k-1)")
    parser.add_argument("--n", type=int, default=6000)
    parser.add_argument("--eta", type=float, default=0.2)
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--beta", type=float, default=1.0)
    parser.add_argument("--split", type=float, default=0.8)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--pre-lr", type=float, default=0.1)
    parser.add_argument("--pre-epochs", type=int, default=500)
    parser.add_argument("--pre-halve", type=int, default=60)
    parser.add_argument("--adv-lr-g", type=float, default=0.04)
    parser.add_argument("--adv-lr-d", type=float, default=0.2)
    parser.add_argument("--adv-epochs", type=int, default=250)
    parser.add_argument("--adv-halve", type=int, default=100)
    parser.add_argument("--out", default=None, help="directory for per-seed history files")
    args = parser.parse_args(argv)

    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    vanillas, finals = [], []
    print("seed  vanilla acc/adf      masked acc/adf       adf cut")
    for seed in range(args.seeds):
        vanilla, result = run_seed(seed, args)
        final = result.history[-1].report
        vanillas.append(vanilla)
        finals.append(final)
        cut = 1.0 - final.adf_nats / vanilla.adf_nats if vanilla.adf_nats > 0 else float("nan")
        print(
            f"{seed:4d}  {vanilla.acc:.4f} / {vanilla.adf_nats:.5f}   "
            f"{final.acc:.4f} / {final.adf_nats:.5f}   {cut:+.1%}"
        )
        if out:
            (out / f"history_seed{seed}.csv").write_text(format_history(result.history))

    van_acc = sum(r.acc for r in vanillas) / len(vanillas)
    van_adf = sum(r.adf_nats for r in vanillas) / len(vanillas)
    fin_acc = sum(r.acc for r in finals) / len(finals)
    fin_adf = sum(r.adf_nats for r in finals) / len(finals)
    print(
        f"\nmean over {args.seeds} seeds at eta={args.eta} alpha={args.alpha} "
        f"beta={args.beta}:"
    )
    cut_str = f"{1 - fin_adf / van_adf:+.1%}" if van_adf > 0 else "n/a"
    print(f"  ADF {van_adf:.5f} -> {fin_adf:.5f}  (cut {cut_str})")
    print(f"  acc {van_acc:.4f} -> {fin_acc:.4f}  (drop {(van_acc - fin_acc) * 100:+.2f}pp)")
    print(f"  {time.perf_counter() - t0:.0f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
