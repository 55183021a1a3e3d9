"""Command-line entry point: run, audit and gen subcommands."""
from typing import *
import os
import sys
import argparse
from dataclasses import replace
from datetime import datetime, timezone

from ..errors import ParameterError
from ..utils import logger, setup_logging
from ..envs.family import make_instance
from ..envs.serialization import save_instance
from ..pipelines.experiment import ExperimentConfig, run_experiment
from ..pipelines.coverage import coverage_audit, dominance_audit
from ..pipelines.lemma_suite import run_lemma_suite
from .config_io import load_config, parse_csv_list
from .artifacts import write_regret_csv, write_json, write_manifest
from .plots import plot_regret

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _overrides(seeds: Optional[str] = None, algorithms: Optional[str] = None) -> Dict[str, Any]:
    overrides = {}
    if seeds:
        overrides['seeds'] = parse_csv_list(seeds, int)
    if algorithms:
        overrides['algorithms'] = parse_csv_list(algorithms)
    return overrides


def _guarded(func: Callable[[], int]) -> int:
    """Map exceptions to exit codes: 1 for bad configs and parameters, 2 otherwise."""
    try:
        return func()
    except (ParameterError, FileNotFoundError) as e:
        print(f"[MATRIXRL] Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        logger.exception("Run failed")
        print(f"[MATRIXRL] Error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def cmd_run(config_path: str, out_dir: str, seeds: Optional[str] = None, algorithms: Optional[str] = None, verbose: bool = False) -> int:
    """
    Run the regret experiment and write regret.csv, regret.svg, audits.json,
    instance.json and manifest.json to ``out_dir``.

    Audit failures are reported in the files and keep the exit code at 0;
    a run in which no seed finished exits with EXIT_RUNTIME.
    """
    def body():
        started = datetime.now(timezone.utc)
        config = load_config(config_path, _overrides(seeds, algorithms))
        config.verbose = config.verbose or verbose
        os.makedirs(out_dir, exist_ok=True)

        result = run_experiment(config)
        artifacts = [
            write_regret_csv(result.traces, os.path.join(out_dir, 'regret.csv')),
            plot_regret(result.traces, os.path.join(out_dir, 'regret.svg')),
            write_json(result.audits, os.path.join(out_dir, 'audits.json')),
            write_json(result.instance, os.path.join(out_dir, 'instance.json')),
        ]
        status = [{'seed': a['seed'], 'status': a['status']} for a in result.audits['per_seed']]
        write_manifest(out_dir, 'run', result.config, artifacts, started, status)

        for algorithm, s in result.summary.items():
            print(f"[MATRIXRL] {algorithm}: mean cumulative regret {s.final_regret_mean:.4f} "
                  f"over {s.seeds} seed(s)")
        failed = [s for s in status if s['status'] != 'ok']
        if failed:
            print(f"[MATRIXRL] {len(failed)} seed(s) not ok, see audits.json")
        if not any(s['status'] in ('ok', 'audit_failed') for s in status):
            logger.error("No seed finished, see audits.json")
            return EXIT_RUNTIME
        return EXIT_OK
    return _guarded(body)


def cmd_audit(config_path: str, out_dir: str, seeds: Optional[str] = None, verbose: bool = False) -> int:
    """
    Run the lemma suite, coverage and bonus-dominance audits and the audited
    Shared-MatrixRL runs; write audits.json with pass/fail per property and
    manifest.json.
    """
    def body():
        started = datetime.now(timezone.utc)
        config = load_config(config_path, _overrides(seeds))
        config.verbose = config.verbose or verbose
        os.makedirs(out_dir, exist_ok=True)

        report = {'lemmas': run_lemma_suite(config.trials, seed=config.seeds[0], verbose=config.verbose)}
        properties = {
            'det_lemma': report['lemmas'].det_lemma.passed,
            'lazy_lemma': report['lemmas'].lazy_lemma.passed,
            'quadratic_det_ratio': report['lemmas'].quadratic_det_ratio.passed,
        }
        if config.audit_coverage:
            report['coverage'] = coverage_audit(config, config.audit_runs)
            properties['coverage_single'] = report['coverage'].single.passed
            properties['coverage_shared'] = report['coverage'].shared.passed
        report['dominance'] = dominance_audit(config)
        properties['bonus_dominance'] = report['dominance'].passed

        shared_config = replace(config, algorithms=['shared'])
        shared_run = run_experiment(shared_config)
        report['shared_runs'] = shared_run.audits
        for name, passed in shared_run.audits['properties'].items():
            properties[f'shared_{name}'] = passed

        report['properties'] = properties
        report['passed'] = all(properties.values())
        path = write_json(report, os.path.join(out_dir, 'audits.json'))
        write_manifest(out_dir, 'audit', config.to_flat(), [path], started)
        for name, passed in properties.items():
            print(f"[MATRIXRL] {name}: {'pass' if passed else 'FAIL'}")
        return EXIT_OK
    return _guarded(body)


def cmd_gen(config_path: str, out_path: str, seeds: Optional[str] = None) -> int:
    """
    Generate and serialize the TaskFamily of the first seed, printing its
    measured constants.
    """
    def body():
        config = load_config(config_path, _overrides(seeds))
        family = make_instance(replace(config.instance, seed=int(config.seeds[0])))
        out_dir = os.path.dirname(os.path.abspath(out_path))
        os.makedirs(out_dir, exist_ok=True)
        save_instance(family, out_path)

        check = family.check()
        f = family.features[0]
        print(f"[MATRIXRL] Instance written to {out_path}")
        print(f"[MATRIXRL] L_phi = {f.L_phi_measured:.6g}")
        print(f"[MATRIXRL] L_psi = {f.L_psi_measured:.6g}")
        print(f"[MATRIXRL] C_psi = {f.C_psi:.6g}")
        print(f"[MATRIXRL] C_psi_inf = {f.C_psi_inf:.6g}")
        print(f"[MATRIXRL] S = {family.S_bound:.6g}")
        print(f"[MATRIXRL] rank check: {'ok' if check.rank_ok else 'FAILED'} "
              f"(sigma = {', '.join(f'{s:.3e}' for s in check.singular_values[:family.r + 1])})")
        return EXIT_OK
    return _guarded(body)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='matrixrl',
        description="MatrixRL and Shared-MatrixRL on synthetic factored MDPs.",
    )
    parser.add_argument('--verbose', action='store_true', help="Show progress bars and debug logs.")
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help="Run the regret experiment.")
    run.add_argument('--config', required=True, help="Flat TOML or JSON config.")
    run.add_argument('--out', required=True, help="Output directory.")
    run.add_argument('--seeds', default=None, help="Comma-separated seeds, overrides the config.")
    run.add_argument('--algorithms', default=None, help="Comma-separated subset of shared,independent,oracle.")

    audit = sub.add_parser('audit', help="Run the lemma, coverage and Bellman audits.")
    audit.add_argument('--config', required=True, help="Flat TOML or JSON config.")
    audit.add_argument('--out', required=True, help="Output directory.")
    audit.add_argument('--seeds', default=None, help="Comma-separated seeds, overrides the config.")

    gen = sub.add_parser('gen', help="Generate and serialize a task family.")
    gen.add_argument('--config', required=True, help="Flat TOML or JSON config.")
    gen.add_argument('--out', required=True, help="Path of the instance JSON.")
    gen.add_argument('--seeds', default=None, help="Comma-separated seeds; the first one is used.")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    if args.command == 'run':
        return cmd_run(args.config, args.out, args.seeds, args.algorithms, args.verbose)
    if args.command == 'audit':
        return cmd_audit(args.config, args.out, args.seeds, args.verbose)
    return cmd_gen(args.config, args.out, args.seeds)


if __name__ == '__main__':
    sys.exit(main())
