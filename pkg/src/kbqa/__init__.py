"""Knowledge-base question answering with schema-constrained beam search."""

from .classifier import QuestionClass
from .config import Config, load_config
from .execute import execute_path
from .kb import Direction, KnowledgeBase, Node, Triple, load_kb
from .lexicon import MentionLexicon, load_lexicon
from .pipeline import KBQA, evaluate
from .schemas import QueryPath, builtin_schemas
from .scoring import ExternalScorer, NgramScorer
from .search import BeamConfig, beam_generate, brute_force_generate

__version__ = "0.1.0"

__all__ = [
    "KBQA",
    "BeamConfig",
    "Config",
    "Direction",
    "ExternalScorer",
    "KnowledgeBase",
    "MentionLexicon",
    "NgramScorer",
    "Node",
    "QueryPath",
    "QuestionClass",
    "Triple",
    "beam_generate",
    "brute_force_generate",
    "builtin_schemas",
    "evaluate",
    "execute_path",
    "load_config",
    "load_kb",
    "load_lexicon",
]
