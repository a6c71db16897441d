"""
Command line entry point.

    python -m app run --repo R --out O [--root launch/x.launch.py ...] [--no-llm]
    python -m app extract | launch-graph | synthesize ...
    python -m app evaluate --recovered O --reference REF [--fail-under 0.9]
    python -m app serve --port 8080

Exit codes: 0 success, 1 input error, 2 analysis failure, 3 below threshold.
"""

import argparse
import logging
import sys
from typing import List, Optional

from app.config import settings
from app.errors import EXIT_ANALYSIS_FATAL, EXIT_OK, RecoveryError
from app.models import RecoveryJobConfig
from app.services.diagnostics import DiagnosticsCollector
from app.services.evaluator import check_threshold, dump_report, evaluate_paths, format_text
from app.services.pipeline import RecoveryPipeline

logger = logging.getLogger("app.cli")


def _config(args: argparse.Namespace) -> RecoveryJobConfig:
    return RecoveryJobConfig(
        repo_root=getattr(args, "repo", None) or ".",
        out_dir=args.out,
        roots=getattr(args, "root", None) or [],
        llm_enabled=not getattr(args, "no_llm", False),
        diagnostics_path=args.diagnostics,
        fail_under=getattr(args, "fail_under", None),
        dump_relations=getattr(args, "dump_relations", None),
    )


def _print_report(report, output_format: str):
    sys.stdout.write(dump_report(report) if output_format == "json" else format_text(report))


def cmd_run(args: argparse.Namespace, diagnostics: DiagnosticsCollector) -> int:
    config = _config(args)
    manifest = RecoveryPipeline(config, diagnostics).run()
    if args.format == "json":
        sys.stdout.write(manifest.model_dump_json(indent=2) + "\n")
    else:
        for artifact in manifest.artifacts:
            sys.stdout.write(f"{artifact.sha256[:12]}  {artifact.path}\n")
    if args.reference:
        report = evaluate_paths(config.out_dir, args.reference)
        _print_report(report, args.format)
        check_threshold(report, config.fail_under)
    return EXIT_OK


def cmd_extract(args: argparse.Namespace, diagnostics: DiagnosticsCollector) -> int:
    inventory = RecoveryPipeline(_config(args), diagnostics).extract()
    logger.info(f"Extracted {sum(1 for _ in inventory.classifiers())} atomic node classifiers")
    return EXIT_OK


def cmd_launch_graph(args: argparse.Namespace, diagnostics: DiagnosticsCollector) -> int:
    RecoveryPipeline(_config(args), diagnostics).launch_graph()
    return EXIT_OK


def cmd_synthesize(args: argparse.Namespace, diagnostics: DiagnosticsCollector) -> int:
    RecoveryPipeline(_config(args), diagnostics).synthesize()
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, diagnostics: DiagnosticsCollector) -> int:
    report = evaluate_paths(args.recovered, args.reference)
    diagnostics.extend(report.parse_diagnostics)
    _print_report(report, args.format)
    check_threshold(report, args.fail_under)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, diagnostics: DiagnosticsCollector) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return EXIT_OK


def _threshold(value: str) -> float:
    threshold = float(value)
    if not 0.0 <= threshold <= 1.0:
        raise argparse.ArgumentTypeError("threshold must be between 0 and 1")
    return threshold


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app",
        description="Recover ROS 2 architecture models from a repository checkout.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(command: argparse.ArgumentParser, repo: bool = True):
        if repo:
            command.add_argument("--repo", required=True, help="Repository checkout to analyze")
        command.add_argument("--out", required=True, help="Output directory for artifacts")
        command.add_argument("--diagnostics", help="Write diagnostics as JSON lines here instead of stderr")

    run = sub.add_parser("run", help="Run every stage")
    common(run)
    run.add_argument("--root", action="append", help="Root launch file, repo-relative (repeatable)")
    run.add_argument("--no-llm", action="store_true", help="Never contact the LLM endpoint")
    run.add_argument("--dump-relations", help="Also write the derived relations as JSON")
    run.add_argument("--format", choices=("json", "text"), default="text")
    run.add_argument("--reference", help="Reference .puml file or directory to score the result against")
    run.add_argument("--fail-under", type=_threshold, help="Exit 3 when a macro F1 is below this value")
    run.set_defaults(func=cmd_run)

    extract = sub.add_parser("extract", help="Write atomic_ros_nodes.json")
    common(extract)
    extract.add_argument("--no-llm", action="store_true", help="Never contact the LLM endpoint")
    extract.set_defaults(func=cmd_extract)

    launch_graph = sub.add_parser("launch-graph", help="Write launch_dependencies.json")
    common(launch_graph)
    launch_graph.add_argument("--root", action="append", help="Root launch file, repo-relative (repeatable)")
    launch_graph.set_defaults(func=cmd_launch_graph)

    synthesize = sub.add_parser("synthesize", help="Write ACD/CCD PlantUML from the JSON artifacts")
    common(synthesize, repo=False)
    synthesize.add_argument("--dump-relations", help="Also write the derived relations as JSON")
    synthesize.set_defaults(func=cmd_synthesize)

    evaluate = sub.add_parser("evaluate", help="Score a recovered model against a reference")
    evaluate.add_argument("--recovered", required=True, help="Recovered .puml file or directory")
    evaluate.add_argument("--reference", required=True, help="Reference .puml file or directory")
    evaluate.add_argument("--format", choices=("json", "text"), default="json")
    evaluate.add_argument("--fail-under", type=_threshold, help="Exit 3 when a macro F1 is below this value")
    evaluate.add_argument("--diagnostics", help="Write diagnostics as JSON lines here instead of stderr")
    evaluate.set_defaults(func=cmd_evaluate)

    serve = sub.add_parser("serve", help="Start the HTTP recovery service")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8080)
    serve.set_defaults(func=cmd_serve, diagnostics=None)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    diagnostics = DiagnosticsCollector(stage=args.command)
    try:
        return args.func(args, diagnostics)
    except RecoveryError as e:
        logger.error(str(e))
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_ANALYSIS_FATAL
    finally:
        if args.command != "serve":
            diagnostics.flush(args.diagnostics)
