"""Heuristic-driven link-of-analogy prompting experiments."""

from .core import (
    EAEInstance,
    EAEScores,
    ClassificationInstance,
    Heuristic,
    HeuristicSet,
    Provenance,
    RolePredictions,
    TaskKind,
    Trigger,
    validate_instance,
)
from .data import DataError, DatasetManifest, load, load_classification, load_eae, sample_subset
from .heuristics import (
    RankedHeuristics,
    SingleHeuristicPipeline,
    generate_heuristics,
    parse_heuristic_lines,
    select_heuristics,
)
from .llm import CompletionRequest, CompletionResult, LLMClient, MockBackend, MockRule, MockScript, cache_key
from .parse import ParseDiagnostics, parse_eae_output, parse_label_output
from .promptkit import (
    AnalogyMapping,
    Exemplar,
    PromptBundle,
    Style,
    build_baseline_prompt,
    build_hdloa_prompt,
    render_loa_exemplar,
)
from .runner import ReportBundle, RunConfig, compare_runs, run_experiment
from .score import MatchPolicy, normalize_span, score_classification, score_eae, seen_unseen_breakdown

__version__ = "0.1.0"
