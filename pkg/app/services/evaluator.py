"""
Model-to-model evaluation: compare recovered and reference PlantUML models as
canonical element sets and score them per metric element.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

from app.errors import InputError, ThresholdError
from app.models import (
    ElementCounts,
    ElementReport,
    EvaluationReport,
    MetricElementKind,
    MetricLevel,
    MetricScores,
)
from app.services.canonical import ElementSets, merge_sets
from app.services.plantuml_parser import ParsedModel, check_blueprint_conformance, parse_plantuml_model

logger = logging.getLogger(__name__)

PLANTUML_SUFFIX = ".puml"


def compare_models(recovered: ElementSets, reference: ElementSets) -> Dict[MetricElementKind, ElementCounts]:
    """Shared elements are tp, reference-only fn, recovered-only fp."""
    counts = {}
    for kind in MetricElementKind:
        found = recovered.get(kind, set())
        expected = reference.get(kind, set())
        counts[kind] = ElementCounts(
            tp=len(found & expected),
            fp=len(found - expected),
            fn=len(expected - found),
        )
    return counts


def compute_metrics(counts: ElementCounts) -> MetricScores:
    """
    Precision, recall and F1. A zero denominator scores 1.0 when the other
    side is empty too and 0.0 otherwise.
    """
    if counts.tp + counts.fp == 0:
        precision = 1.0 if counts.fn == 0 else 0.0
    else:
        precision = counts.tp / (counts.tp + counts.fp)
    if counts.tp + counts.fn == 0:
        recall = 1.0 if counts.fp == 0 else 0.0
    else:
        recall = counts.tp / (counts.tp + counts.fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return MetricScores(precision=precision, recall=recall, f1=f1)


def macro_average(
    per_element: Dict[MetricElementKind, MetricScores], level: MetricLevel
) -> Optional[MetricScores]:
    """Unweighted mean over the kinds of ``level``; None when the level has none."""
    scores = [s for kind, s in per_element.items() if kind.level == level]
    if not scores:
        return None
    return MetricScores(
        precision=sum(s.precision for s in scores) / len(scores),
        recall=sum(s.recall for s in scores) / len(scores),
        f1=sum(s.f1 for s in scores) / len(scores),
    )


def evaluate_models(
    recovered: ParsedModel,
    reference: ParsedModel,
    conformance: Optional[list] = None,
) -> EvaluationReport:
    counts = compare_models(recovered.elements, reference.elements)
    report = EvaluationReport(
        conformance=list(conformance or []),
        parse_diagnostics=recovered.diagnostics + reference.diagnostics,
    )
    scores: Dict[MetricElementKind, MetricScores] = {}
    for level in MetricLevel:
        kinds = MetricElementKind.for_level(level)
        if not any(counts[k].tp + counts[k].fp + counts[k].fn for k in kinds):
            report.notices.append(f"{level.value}: no elements in either model; level omitted")
            continue
        for kind in kinds:
            scores[kind] = compute_metrics(counts[kind])
            report.per_element[kind.value] = ElementReport(
                level=level, **counts[kind].model_dump(), **scores[kind].model_dump()
            )
        report.macro[level.value] = macro_average(scores, level)
    return report


def _puml_files(path: Path) -> List[Path]:
    if path.is_file():
        return [path]
    if path.is_dir():
        files = sorted(p for p in path.rglob(f"*{PLANTUML_SUFFIX}") if p.is_file())
        if files:
            return files
        raise InputError(f"No {PLANTUML_SUFFIX} files under {path}")
    raise InputError(f"PlantUML input not found: {path}")


def load_model(path: Path) -> ParsedModel:
    """Parse a .puml file, or every .puml file below a directory, into one element set."""
    parsed = []
    for file in _puml_files(path):
        try:
            text = file.read_text(encoding="utf-8")
        except OSError as e:
            raise InputError(f"Cannot read {file}: {e}")
        parsed.append(parse_plantuml_model(text, source=str(file)))
    return ParsedModel(
        elements=merge_sets(*(p.elements for p in parsed)),
        diagnostics=[d for p in parsed for d in p.diagnostics],
    )


def conformance_of(path: Path) -> list:
    findings = []
    for file in _puml_files(path):
        findings.extend(check_blueprint_conformance(file.read_text(encoding="utf-8"), source=str(file)))
    return findings


def evaluate_paths(recovered: str, reference: str) -> EvaluationReport:
    recovered_path, reference_path = Path(recovered), Path(reference)
    with ThreadPoolExecutor(max_workers=2) as pool:
        recovered_model = pool.submit(load_model, recovered_path)
        reference_model = pool.submit(load_model, reference_path)
        report = evaluate_models(
            recovered_model.result(), reference_model.result(), conformance_of(recovered_path)
        )
    logger.info(
        "Evaluation finished: "
        + ", ".join(f"{level} macro F1 {scores.f1:.4f}" for level, scores in report.macro.items())
    )
    return report


def check_threshold(report: EvaluationReport, fail_under: Optional[float]):
    """Raise ThresholdError when any reported level's macro F1 is below ``fail_under``."""
    if fail_under is None:
        return
    failing = [f"{level} F1 {scores.f1:.4f}" for level, scores in report.macro.items() if scores.f1 < fail_under]
    if failing:
        raise ThresholdError(f"Macro F1 below {fail_under}: {', '.join(failing)}")


def dump_report(report: EvaluationReport) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"


def format_text(report: EvaluationReport) -> str:
    lines = [f"{'element':<28} {'tp':>4} {'fp':>4} {'fn':>4} {'precision':>9} {'recall':>7} {'f1':>7}"]
    for level in MetricLevel:
        rows = [(name, r) for name, r in report.per_element.items() if r.level == level]
        if not rows:
            continue
        lines.append(f"[{level.value}]")
        for name, r in rows:
            lines.append(
                f"{name:<28} {r.tp:>4} {r.fp:>4} {r.fn:>4} {r.precision:>9.4f} {r.recall:>7.4f} {r.f1:>7.4f}"
            )
        macro = report.macro[level.value]
        lines.append(
            f"{'average':<28} {'':>4} {'':>4} {'':>4} {macro.precision:>9.4f} {macro.recall:>7.4f} {macro.f1:>7.4f}"
        )
    lines.extend(f"note: {notice}" for notice in report.notices)
    if report.conformance:
        lines.append(f"conformance findings: {len(report.conformance)}")
    return "\n".join(lines) + "\n"
