"""Empirical tree entropy, tree straight-line programs and their binary coding."""

from .codec import decode, encode, encoded_length_report, multiset_rank, multiset_unrank, read_container, write_container
from .compress import compress, measure, normalize
from .entropy import history_histogram, information_content, shannon_entropy, tree_entropy
from .errors import (
    BudgetExceeded,
    MalformedCode,
    NotNormalForm,
    ParseError,
    TreentropyError,
)
from .strings import gen_S, slp_S, string_entropy
from .trees import X, Alphabet, Node, format_term, parse_tree
from .tslp import NormalFormTSLP, is_normal_form, parse_grammar, val
from .unranked import fcns, ingest_xml, inverse_fcns, profile

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "BudgetExceeded",
    "MalformedCode",
    "Node",
    "NormalFormTSLP",
    "NotNormalForm",
    "ParseError",
    "TreentropyError",
    "X",
    "compress",
    "decode",
    "encode",
    "encoded_length_report",
    "fcns",
    "format_term",
    "gen_S",
    "history_histogram",
    "information_content",
    "ingest_xml",
    "inverse_fcns",
    "is_normal_form",
    "measure",
    "multiset_rank",
    "multiset_unrank",
    "normalize",
    "parse_grammar",
    "parse_tree",
    "profile",
    "read_container",
    "shannon_entropy",
    "slp_S",
    "string_entropy",
    "tree_entropy",
    "val",
    "write_container",
]
