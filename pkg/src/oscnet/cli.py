"""Command-line front end: ``oscnet run | list-builtins | validate``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .errors import ConfigError, OscnetError, TruncationError
from .scenarios import builtin_scenarios, resolve_scenario, run_scenario, validate, with_overrides

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oscnet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--trunc", type=int, help="Fock truncation per mode for the oracle")
        sp.add_argument("--dt", type=float, help="oracle RK4 step (units of 1/omega10)")
        sp.add_argument("--alpha", type=float, help="override the cat amplitude (also sets eta unless given)")
        sp.add_argument("--eta", type=float, help="override the coherent amplitude of oscillator 2")

    run = sub.add_parser("run", help="run scenarios and write CSV series plus a JSON manifest")
    run.add_argument("scenarios", nargs="+", help="built-in name or scenario TOML file")
    run.add_argument("--out", default=os.environ.get("OSCNET_OUT", "oscnet_out"),
                     help="output directory (default: $OSCNET_OUT or ./oscnet_out)")
    run.add_argument("--oracle", action="store_true", help="also validate against the Fock-space oracle")
    run.add_argument("--jobs", type=int, default=1, help="run independent scenarios concurrently")
    common(run)

    sub.add_parser("list-builtins", help="list built-in scenarios and the figure each reproduces")

    val = sub.add_parser("validate", help="compare the closed form with the Fock-space oracle")
    val.add_argument("scenario")
    common(val)
    return p


def _prepare(ref, args, oracle=None):
    s = resolve_scenario(ref)
    return with_overrides(s, alpha=args.alpha, eta=args.eta, truncation=args.trunc, dt=args.dt, oracle=oracle)


def _run_one(payload):
    scenario, out = payload
    return run_scenario(scenario, out)


def _cmd_run(args) -> int:
    scenarios = [_prepare(ref, args, oracle=True if args.oracle else None) for ref in args.scenarios]
    payloads = [(s, args.out) for s in scenarios]
    if args.jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            manifests = list(pool.map(_run_one, payloads))
    else:
        manifests = [_run_one(p) for p in payloads]
    status = EXIT_OK
    for m in manifests:
        line = f"{m['scenario']}: {len(m['files'])} series -> {os.path.join(args.out, m['scenario'])}"
        if "validation" in m:
            v = m["validation"]
            line += f"; oracle max trace distance {v['max_trace_distance']:.3e} ({'pass' if v['passed'] else 'FAIL'})"
            if not v["passed"]:
                status = EXIT_VALIDATION
        print(line)
    return status


def _cmd_list() -> int:
    for name, s in builtin_scenarios().items():
        print(f"{name:8s} {s.figure:10s} {s.notes.get('description', '')}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    s = _prepare(args.scenario, args, oracle=True)
    report = validate(s)
    print(json.dumps({k: report[k] for k in ("truncation", "max_trace_distance", "max_coherence_deviation",
                                             "passed")}, indent=2))
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-builtins":
            return _cmd_list()
        return _cmd_validate(args)
    except TruncationError as exc:
        print(f"error: {exc} (recommended minimum N = {exc.minimum})", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, OscnetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
