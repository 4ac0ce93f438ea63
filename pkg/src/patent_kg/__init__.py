"""Unsupervised patent knowledge-graph extraction from encoder attention."""
from .attention import AttentionConfig, TokenAttention, WordAttention, aggregate_to_words, dump_attention
from .constraints import AbstractCandidates, ThresholdPolicy, filter_by_median, resolve_relations
from .corpus import CorpusFilter, PatentRecord, filter_corpus, parse_corpus_file
from .kgstore import KnowledgeGraph, Triple, canonicalize
from .matcher import CandidateFact, CandidatePair, MatchConfig, beam_match, brute_force_match, enumerate_pairs
from .pipeline import extract_corpus, extract_from_abstract
from .preprocess import ProcessedSentence, Token, UnitKind, WordUnit, preprocess_sentence, split_sentences

__version__ = "0.1.0"
