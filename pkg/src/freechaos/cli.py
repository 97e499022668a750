"""
Command-line front end.

Subcommands: ``contract``, ``moment``, ``partitions``, ``verify``, ``oracle``.
Every report is JSON with an embedded ``manifest``; identical inputs give
byte-identical output (wall time is only added with ``--timing``).

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from typing import List, Optional

from . import __version__
from .chaos import moment
from .errors import DomainError, InconsistencyError, ResourceLimitError, ShapeError
from .harness import THEOREMS, FamilyConfig, family_from_config, verify
from .kernels import arc_contract, kernel_from_dict, kernel_to_dict, load_kernel, star_contract
from .oracle import MODELS, SimConfig, estimate_moments
from .partitions import (
    ContractionWord,
    Partition,
    count_R,
    enumerate_nc,
    enumerate_nc2,
    enumerate_nc_ge2,
    enumerate_words,
    partition_to_word,
    word_to_partition,
)

log = logging.getLogger("freechaos")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad command-line input detected after parsing."""


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=None, help="random seed (overrides config files)")
    g.add_argument("--threads", type=int, default=1, help="worker threads for parallel sections")
    g.add_argument("--tolerance", type=float, default=1e-9, help="numerical tolerance")
    g.add_argument("--out", default=None, help="write the report here instead of stdout")
    g.add_argument("--timing", action="store_true", help="include wall time in the manifest")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="freechaos",
        description="Contraction calculus, chaos moments and four-moment certification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("contract", parents=[common], help="arc or star contraction of two kernel files")
    c.add_argument("f", help="kernel JSON")
    c.add_argument("g", help="kernel JSON")
    c.add_argument("--kind", choices=("arc", "star"), default="arc")
    c.add_argument("-r", "--r", type=int, required=True, help="contraction index")

    m = sub.add_parser("moment", parents=[common], help="mixed moment of a kernel list")
    m.add_argument("request", help="request JSON: {flavor, kernels, m}")
    m.add_argument("--path", choices=("words", "product"), default="words")
    m.add_argument("--dual", action="store_true", help="evaluate both paths and report the difference")

    p = sub.add_parser("partitions", parents=[common], help="non-crossing partitions and contraction words")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--nc", type=int, metavar="N")
    grp.add_argument("--nc2", type=int, metavar="N")
    grp.add_argument("--nc-ge2", type=int, metavar="N")
    grp.add_argument("--R", type=_int_list, metavar="M,J", help="count singleton-free NC partitions by blocks")
    grp.add_argument("--words", choices=("A", "B", "D", "E"))
    grp.add_argument("--bijection", action="store_true")
    p.add_argument("--count", action="store_true", help="print only the number of items")
    p.add_argument("--q", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--word", type=_int_list)
    p.add_argument("--partition", type=str)

    v = sub.add_parser("verify", parents=[common], help="certify a kernel family against its target law")
    v.add_argument("config", help="family config JSON")
    v.add_argument("--theorem", choices=sorted(THEOREMS), default=None)
    v.add_argument("--csv", default=None, help="also write the moment-error table as CSV")
    v.add_argument("--max-order", type=int, default=None)
    v.add_argument("--word-cap", type=int, default=5_000_000)

    o = sub.add_parser("oracle", parents=[common], help="random matrix moment estimates")
    o.add_argument("--model", default="semicircle", help=f"one of {', '.join(MODELS)}")
    o.add_argument("--N", type=int, default=400)
    o.add_argument("--trials", type=int, default=200)
    o.add_argument("--lam", type=float, default=1.0)
    o.add_argument("--orders", type=_int_list, default=[1, 2, 3, 4])
    return parser


def _manifest(args, inputs, started: float) -> dict:
    man = {
        "command": args.command,
        "inputs": inputs,
        "seed": args.seed,
        "tolerance": args.tolerance,
        "output": args.out,
        "version": __version__,
    }
    if args.timing:
        man["wall_time_seconds"] = time.perf_counter() - started
    return man


def _emit(args, doc: dict):
    text = json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def cmd_contract(args, started) -> int:
    f = kernel_from_dict(_read_json(args.f))
    g = kernel_from_dict(_read_json(args.g))
    h = arc_contract(f, g, args.r) if args.kind == "arc" else star_contract(f, g, args.r)
    doc = {"kernel": kernel_to_dict(h), "manifest": _manifest(args, [args.f, args.g], started)}
    if h.order == 0:
        doc["value"] = h.value
    _emit(args, doc)
    return EXIT_OK


def _load_request(path: str):
    req = _read_json(path)
    if not isinstance(req, dict):
        raise InputError("moment request must be a JSON object")
    base = os.path.dirname(os.path.abspath(path))
    try:
        flavor = req["flavor"]
        refs = req["kernels"]
    except KeyError as exc:
        raise InputError(f"moment request lacks {exc}") from None
    kernels = []
    for ref in refs:
        if isinstance(ref, str):
            kpath = ref if os.path.isabs(ref) else os.path.join(base, ref)
            try:
                kernels.append(load_kernel(kpath))
            except FileNotFoundError:
                raise InputError(f"no such kernel file: {ref}") from None
            except json.JSONDecodeError as exc:
                raise InputError(f"{ref}: invalid JSON ({exc})") from None
        else:
            kernels.append(kernel_from_dict(ref))
    try:
        m = int(req.get("m", len(kernels)))
    except (TypeError, ValueError):
        raise InputError("m must be an integer") from None
    if len(kernels) == 1 and m > 1:
        kernels = kernels * m
    if len(kernels) != m:
        raise InputError(f"request lists {len(kernels)} kernels but m = {m}")
    return flavor, kernels, m


def cmd_moment(args, started) -> int:
    flavor, kernels, m = _load_request(args.request)
    man = _manifest(args, [args.request], started)
    if args.dual:
        a = moment(kernels, flavor, "words")
        b = moment(kernels, flavor, "product")
        doc = {"words": a.value, "product": b.value, "difference": a.value - b.value, "word_count": a.word_count}
    else:
        r = moment(kernels, flavor, args.path)
        doc = {"value": r.value, "path": r.path, "word_count": r.word_count}
    doc.update(flavor=flavor, m=m, manifest=man)
    _emit(args, doc)
    return EXIT_OK


def cmd_partitions(args, started) -> int:
    doc: dict
    if args.nc is not None or args.nc2 is not None or args.nc_ge2 is not None:
        if args.nc is not None:
            kind, n, items = "nc", args.nc, enumerate_nc(args.nc)
        elif args.nc2 is not None:
            kind, n, items = "nc2", args.nc2, enumerate_nc2(args.nc2)
        else:
            kind, n, items = "nc_ge2", args.nc_ge2, enumerate_nc_ge2(args.nc_ge2)
        doc = {"kind": kind, "n": n, "count": len(items)}
        if not args.count:
            doc["partitions"] = [str(p) for p in items]
    elif args.R is not None:
        if len(args.R) != 2:
            raise InputError("--R expects M,J")
        mm, j = args.R
        doc = {"m": mm, "j": j, "R": count_R(mm, j)}
    elif args.words is not None:
        if args.q is None or args.m is None:
            raise InputError("--words needs --q and --m")
        ws = enumerate_words(args.q, args.m, args.words)
        doc = {"set": args.words, "q": args.q, "m": args.m, "count": len(ws)}
        if not args.count:
            doc["words"] = [list(w.r) for w in ws]
    else:
        if args.q is None or (args.word is None) == (args.partition is None):
            raise InputError("--bijection needs --q and exactly one of --word / --partition")
        if args.word is not None:
            w = ContractionWord(args.q, tuple(args.word))
            doc = {"word": str(w), "partition": str(word_to_partition(w))}
        else:
            p = Partition.parse(args.partition)
            doc = {"partition": str(p), "word": str(partition_to_word(p, args.q))}
        doc["q"] = args.q
    doc["manifest"] = _manifest(args, [], started)
    _emit(args, doc)
    return EXIT_OK


def cmd_verify(args, started) -> int:
    cfg = FamilyConfig.from_dict(_read_json(args.config))
    if args.seed is not None:
        cfg.seed = args.seed
    family = family_from_config(cfg)
    report = verify(
        family,
        max_order=args.max_order or cfg.max_order,
        n_list=cfg.n_list,
        tolerance=args.tolerance,
        theorem=args.theorem or cfg.theorem,
        word_cap=args.word_cap,
        workers=max(1, args.threads),
    )
    doc = report.to_dict()
    doc["config"] = cfg.to_dict()
    doc["manifest"] = _manifest(args, [args.config], started)
    _emit(args, doc)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.moment_csv())
    if not report.verdict:
        for line in report.failures[:10]:
            log.warning("FAIL %s", line)
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_oracle(args, started) -> int:
    if args.model not in MODELS:
        raise InputError(f"unknown model {args.model!r}; expected one of {', '.join(MODELS)}")
    cfg = SimConfig(
        N=args.N,
        trials=args.trials,
        seed=0 if args.seed is None else args.seed,
        model=args.model,
        lam=args.lam,
        orders=tuple(args.orders),
        workers=max(1, args.threads),
    )
    est = estimate_moments(cfg)
    doc = {
        "model": cfg.model,
        "N": cfg.N,
        "trials": cfg.trials,
        "lam": cfg.lam,
        "estimates": [e.to_dict() for e in est],
        "manifest": _manifest(args, [], started),
    }
    doc["manifest"]["seed"] = cfg.seed
    _emit(args, doc)
    return EXIT_OK


COMMANDS = {
    "contract": cmd_contract,
    "moment": cmd_moment,
    "partitions": cmd_partitions,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=os.environ.get("FREECHAOS_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        return COMMANDS[args.command](args, started)
    except (InputError, ShapeError, DomainError, ResourceLimitError) as exc:
        print(f"freechaos {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InconsistencyError as exc:  # pragma: no cover - indicates a bug
        print(f"freechaos {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
