"""Filler-gap surprisal probes over a 2x2 stimulus design."""

import os
from pathlib import Path

from ._core import (
    GapprobeError,
    Tokenizer,
    analyze,
    chi_square,
    filter,
    generate,
    render_svg,
    run_cli,
    t_test,
    validate,
    wilson_ci,
)
from . import _core

__all__ = [
    "GapprobeError",
    "Tokenizer",
    "analyze",
    "chi_square",
    "data_dir",
    "filter",
    "generate",
    "gpt2_tokenizer",
    "render_svg",
    "run_cli",
    "score",
    "t_test",
    "tokenizer_dir",
    "validate",
    "wilson_ci",
]


def data_dir() -> Path:
    """Bundled data files (lexicons, patterns, grammar, GPT-2 vocabulary)."""
    here = Path(__file__).resolve().parent
    # Installed wheels carry data/ inside the package; editable installs use the repo copy.
    for candidate in (here / "data", here.parent.parent / "data"):
        if (candidate / "gpt2").is_dir():
            return candidate
    return here / "data"


def tokenizer_dir() -> str:
    env = os.environ.get("GAPPROBE_TOKENIZER_DIR")
    if env:
        return env
    return str(data_dir() / "gpt2")


def gpt2_tokenizer() -> Tokenizer:
    return Tokenizer(tokenizer_dir())


def score(csv_text, backend, tokenizer_dir=None, max_in_flight=64, timeout_ms=0):
    """Score stimulus CSV text; returns (scores_csv, tokens_jsonl)."""
    return _core.score(csv_text, backend, tokenizer_dir or globals()["tokenizer_dir"](),
                       max_in_flight, timeout_ms)
