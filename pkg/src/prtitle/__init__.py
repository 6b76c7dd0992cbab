"""Suggest pull-request titles from commit messages, issue titles, and descriptions.

The pipeline: parse a GitHub compare or pull-request URL, fetch the relevant
commits and issues over the REST API, assemble a source sequence, and hand it
to a title-generation backend.  Ships with a ROUGE-1/2/L evaluation harness
and a corpus-construction pipeline (crawl, clean, split).
"""

from .assembly import (
    GenerationRequest,
    SourcePart,
    SourceSequence,
    build_source_sequence,
    truncate_to_budget,
)
from .errors import PrTitleError
from .github import (
    ApiCredentials,
    GitHubClient,
    RepoRef,
    ResourceKind,
    ResourceLocator,
    parse_url,
    to_api_url,
)
from .rouge import RougeReport, RougeScore, corpus_rouge, score_pair, tokenize
from .service import ServiceConfig, create_app, run_generation
from .summarizer import BackendKind, BackendSpec, TitleSuggestion, generate_title

__version__ = "0.1.0"

__all__ = [
    "ApiCredentials",
    "BackendKind",
    "BackendSpec",
    "GenerationRequest",
    "GitHubClient",
    "PrTitleError",
    "RepoRef",
    "ResourceKind",
    "ResourceLocator",
    "RougeReport",
    "RougeScore",
    "ServiceConfig",
    "SourcePart",
    "SourceSequence",
    "TitleSuggestion",
    "build_source_sequence",
    "corpus_rouge",
    "create_app",
    "generate_title",
    "parse_url",
    "run_generation",
    "score_pair",
    "to_api_url",
    "tokenize",
    "truncate_to_budget",
    "__version__",
]
