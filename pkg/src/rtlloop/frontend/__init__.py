"""Verilog frontend: tokenizer, preprocessor, parser and printer."""

from .ast import Ast
from .parser import ParseResult, parse, parse_source
from .preprocess import preprocess
from .printer import PrettyPrintError, pretty_print
from .tokens import Token, tokenize

__all__ = ["Ast", "ParseResult", "PrettyPrintError", "Token", "parse", "parse_source",
           "preprocess", "pretty_print", "tokenize"]
