"""
optformkit: parse LLM-emitted intermediate representations of linear
programs, canonicalize them to <=/minimize matrix form, score them against
gold formulations with declaration-level F1, build evaluation prompts, and
orchestrate reproducible evaluation runs.
"""

from .ir import (
    Constraint,
    Diagnostic,
    Direction,
    Identifier,
    IRModel,
    LinearExpr,
    Objective,
    Relation,
    normalize_expr,
    render_ir,
    validate_ir,
)
from .parsing import ParseOutcome, parse_expr, parse_ir, parse_number
from .canonical import (
    CanonicalForm,
    constraint_to_row,
    objective_to_vector,
    scale_normalize_row,
    to_canonical,
)
from .scoring import (
    MatchConfig,
    ProblemResult,
    ProblemScore,
    ScoreReport,
    aggregate,
    align_variables,
    match_declarations,
    rows_match,
    score_problem,
)
from .prompts import ExamplePair, PromptKind, build_prompt, default_example
from .gateway import (
    CompletionRequest,
    CompletionResponse,
    HttpProvider,
    MockProvider,
    ProviderConfig,
    ReplayOnlyProvider,
    replay_lookup,
    replay_store,
    run_batch,
)
from .datasets import Dataset, PredictionRecord, ProblemInstance, load_dataset, load_predictions, write_predictions
from .harness import (
    CarbonParams,
    FinetuneManifest,
    RunConfig,
    emit_finetune_manifest,
    estimate_carbon,
    run_eval,
    score_predictions,
    write_report,
)

__version__ = "0.1.0"
