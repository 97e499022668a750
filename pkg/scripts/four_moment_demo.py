#!/usr/bin/env python3
"""Certify every family config in a directory and print a one-line summary per family."""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from pathlib import Path

from freechaos.harness import FamilyConfig, family_from_config, verify

HERE = Path(__file__).resolve().parent


@dataclass
class DemoConfig:
    config_dir: Path = HERE / "configs"
    out_dir: Path | None = None
    threads: int = 1


def run(cfg: DemoConfig) -> int:
    failures = 0
    print(f"{'config':<26}{'theorem':<15}{'verdict':<9}max error per n")
    for path in sorted(cfg.config_dir.glob("*.json")):
        fc = FamilyConfig.from_dict(json.loads(path.read_text()))
        report = verify(
            family_from_config(fc),
            max_order=fc.max_order,
            n_list=fc.n_list,
            theorem=fc.theorem,
            workers=cfg.threads,
        )
        errs = ", ".join(f"n={n}: {report.max_error(n):.2e}" for n in report.n_list)
        verdict = "pass" if report.verdict else "FAIL"
        print(f"{path.stem:<26}{report.theorem:<15}{verdict:<9}{errs}")
        failures += not report.verdict
        if cfg.out_dir:
            cfg.out_dir.mkdir(parents=True, exist_ok=True)
            (cfg.out_dir / f"{path.stem}.report.json").write_text(report.to_json() + "\n")
    return failures


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--configs", type=Path, default=DemoConfig.config_dir)
    p.add_argument("--out", type=Path, default=None, help="directory for full JSON reports")
    p.add_argument("--threads", type=int, default=1)
    a = p.parse_args(argv)
    n_fail = run(DemoConfig(a.configs, a.out, a.threads))
    # the counterexample config is expected to fail
    print(f"{n_fail} famil{'y' if n_fail == 1 else 'ies'} failed certification")


if __name__ == "__main__":
    main()
