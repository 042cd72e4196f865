"""Verifiable machinery for extremely fine-grained controllable generation:
deterministic constraint verification, satisfaction metrics, embedding-based
attribute-set expansion, preference-pair construction, and evaluation
harnesses."""

from .clients import ChatClient, EmbeddingClient, EndpointConfig
from .config import Config, load_config
from .embedding import (
    EmbeddingVector,
    Space,
    Triplet,
    VectorStore,
    cosine_similarity,
    top_k,
    triplet_accuracy,
)
from .errors import EfcgError
from .expansion import ExpansionConfig, ExpansionOutcome, expand_batch, expand_one
from .extraction import extract_hard_attributes, parse_decomposed_attributes
from .harness import (
    PositionBiasReport,
    TradeoffReport,
    run_position_bias,
    run_tradeoff,
    token_f1,
)
from .pairs import (
    PairConfig,
    PairResult,
    PreferencePair,
    build_pair,
    build_pairs,
    score_response,
)
from .prompts import (
    parse_judge_reply,
    render_decompose_prompt,
    render_generation_prompt,
    render_judge_prompt,
)
from .scoring import (
    CsrReport,
    MacroReport,
    agreement_rate,
    cohens_kappa,
    combined_score,
    compute_csr,
    compute_macro,
)
from .types import (
    AllLowercase,
    AllUppercase,
    Attribute,
    AttributeSet,
    EndPhrase,
    HardConstraint,
    IncludeKeyword,
    KeywordFrequency,
    NumParagraphs,
    NumSentences,
    NumWords,
    Relation,
    ScoredResponse,
    VerificationResult,
    WordAtPosition,
    WordOrder,
    validate_constraint,
)
from .verifier import TokenizedText, tokenize, verify, verify_all

__version__ = "0.1.0"

__all__ = [
    "AllLowercase",
    "AllUppercase",
    "Attribute",
    "AttributeSet",
    "ChatClient",
    "Config",
    "CsrReport",
    "EfcgError",
    "EmbeddingClient",
    "EmbeddingVector",
    "EndPhrase",
    "EndpointConfig",
    "ExpansionConfig",
    "ExpansionOutcome",
    "HardConstraint",
    "IncludeKeyword",
    "KeywordFrequency",
    "MacroReport",
    "NumParagraphs",
    "NumSentences",
    "NumWords",
    "PairConfig",
    "PairResult",
    "PositionBiasReport",
    "PreferencePair",
    "Relation",
    "ScoredResponse",
    "Space",
    "TokenizedText",
    "TradeoffReport",
    "Triplet",
    "VectorStore",
    "VerificationResult",
    "WordAtPosition",
    "WordOrder",
    "agreement_rate",
    "build_pair",
    "build_pairs",
    "cohens_kappa",
    "combined_score",
    "compute_csr",
    "compute_macro",
    "cosine_similarity",
    "expand_batch",
    "expand_one",
    "extract_hard_attributes",
    "load_config",
    "parse_decomposed_attributes",
    "parse_judge_reply",
    "render_decompose_prompt",
    "render_generation_prompt",
    "render_judge_prompt",
    "run_position_bias",
    "run_tradeoff",
    "score_response",
    "token_f1",
    "tokenize",
    "top_k",
    "triplet_accuracy",
    "validate_constraint",
    "verify",
    "verify_all",
]
