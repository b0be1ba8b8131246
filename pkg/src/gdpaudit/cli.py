"""Command-line entry point: ``gdpaudit {convert,audit,ablate,marginals}``.

Exit codes: 0 success, 2 usage or config error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import accounting
from .audit import (
    ArtifactWriter,
    ConfigError,
    ablation_variants,
    load_config,
    marginal_variants,
    run_audit,
    run_variants,
    write_audit_artifacts,
    write_variant_artifacts,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("gdpaudit")


def cmd_convert(epsilon: float, delta: float, out=None) -> dict:
    out = sys.stdout if out is None else out
    budget = accounting.PrivacyBudget.from_dp(epsilon, delta)
    eps_bs = accounting.zcdp_epsilon_simple(budget.rho, delta) if delta < 1 else 0.0
    eps_tight = accounting.zcdp_epsilon(budget.rho, delta) if delta < 1 else 0.0
    report = {
        "epsilon": epsilon,
        "delta": delta,
        "rho": budget.rho,
        "implied_mu": budget.mu_implied,
        "mu_direct": budget.mu_direct,
        "epsilon_bun_steinke": eps_bs,
        "epsilon_from_rho": eps_tight,
    }
    width = max(map(len, report))
    for k, v in report.items():
        print(f"{k:<{width}}  {v:.6g}", file=out)
    return report


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(master_seed=args.seed)
    if args.trials is not None:
        cfg = cfg.with_trials(args.trials)
    return cfg


def cmd_audit(args) -> dict:
    cfg = _load(args)
    writer = ArtifactWriter(args.out_dir)
    try:
        res = run_audit(cfg, threads=args.threads)
        write_audit_artifacts(res, writer)
    except BaseException:
        writer.rollback()
        raise
    summary = res.summary()
    print(json.dumps({k: summary[k] for k in ("implied_mu", "mu_direct", "tau_star",
                                               "mu_emp", "baseline_mu_lb")}, indent=2))
    log.info("audit finished in %.1fs", res.wall_time)
    return summary


def _cmd_sweep(args, variants_fn, stem, title):
    cfg = _load(args)
    writer = ArtifactWriter(args.out_dir)
    try:
        results = run_variants(variants_fn(cfg), threads=args.threads)
        write_variant_artifacts(results, writer, stem, title)
    except BaseException:
        writer.rollback()
        raise
    for name, r in results:
        print(f"{name:<28} mu_emp={r.mu_emp:.4f}  implied={r.budget.mu_implied:.4f}")
    return results


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gdpaudit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("convert", help="print the (eps, delta) -> rho -> mu conversions")
    c.add_argument("epsilon", type=float)
    c.add_argument("delta", type=float)

    for name, help_ in (("audit", "run one end-to-end audit"),
                        ("ablate", "default audit plus one-factor variants"),
                        ("marginals", "audits over marginal order x threat model")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config")
        s.add_argument("--seed", type=int, default=None, help="override master_seed")
        s.add_argument("--out-dir", default=".", help="artifact directory")
        s.add_argument("--trials", type=int, default=None,
                       help="override n_trials (split rescaled 40/20/40)")
        s.add_argument("--threads", type=int, default=1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "convert":
            cmd_convert(args.epsilon, args.delta)
        elif args.command == "audit":
            cmd_audit(args)
        elif args.command == "ablate":
            _cmd_sweep(args, ablation_variants, "ablation", "Ablation: mu_emp per variant")
        else:
            _cmd_sweep(args, marginal_variants, "marginals", "mu_emp by marginal order")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if args.command == "convert":
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
