"""Command line entry points for the sequence labeling harness.

Conventions, shared across subcommands:

* training hyperparameters come from an optional JSON spec file
  (``--spec spec.json``) holding TrainSpec fields; explicit flags win
  over the file, the file wins over defaults
* every successful run prints one machine readable JSON summary line
* exit codes: 0 on success, 1 on any expected error (bad files, bad
  values), 2 on usage errors
"""

from __future__ import annotations

import argparse
import json
import sys

from .data import DataError
from .pretrain import pretrain
from .predict import predict
from .train import train
from .windows import STRIDE_MODES, TrainSpec


def _print_summary(command: str, fields: dict) -> None:
    payload = {"command": command}
    payload.update(fields)
    print(json.dumps(payload, sort_keys=True))


def _load_spec(args) -> TrainSpec:
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.spec}: not valid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise DataError(f"{args.spec}: spec file must be a JSON object")
        spec = TrainSpec.from_dict(raw)
    else:
        spec = TrainSpec()
    overrides = {
        "max_subword_len": args.max_len,
        "window_stride": args.stride,
        "stride_mode": args.stride_mode,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "seed": args.seed,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(spec, name, value)
    spec.validate()
    return spec


def cmd_pretrain(args) -> int:
    pretrain(args.out, seed=args.seed, steps=args.steps,
             n_sentences=args.sentences, quiet=args.quiet)
    _print_summary("pretrain", {
        "out": str(args.out),
        "seed": args.seed,
        "steps": args.steps,
    })
    return 0


def cmd_train(args) -> int:
    spec = _load_spec(args)
    stats = train(args.data, args.out, spec=spec, base_path=args.base,
                  quiet=args.quiet)
    fields = {"out": str(args.out), "spec": spec.to_dict()}
    fields.update(stats)
    _print_summary("train", fields)
    return 0


def cmd_predict(args) -> int:
    stats = predict(args.ckpt, args.data, args.out)
    fields = {"out": str(args.out)}
    fields.update(stats)
    _print_summary("predict", fields)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqlab",
        description="Toy transformer harness for token level laughter labels.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("pretrain", help="masked language model warm start")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--sentences", type=int, default=400)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train", help="fine tune a token classifier")
    p.add_argument("--data", required=True, help="dataset.jsonl to train on")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    p.add_argument("--base", help="optional pretrained base checkpoint")
    p.add_argument("--spec", help="JSON file with TrainSpec fields")
    p.add_argument("--max-len", type=int, dest="max_len")
    p.add_argument("--stride", type=int)
    p.add_argument("--stride-mode", choices=STRIDE_MODES, dest="stride_mode")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a dataset with a checkpoint")
    p.add_argument("--ckpt", required=True, help="classifier checkpoint")
    p.add_argument("--data", required=True, help="dataset.jsonl to label")
    p.add_argument("--out", required=True, help="predictions.jsonl to write")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
