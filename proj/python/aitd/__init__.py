"""Text-origin detection with boosted trees and a linear SVM."""

from ._aitd import (
    ConfusionMatrix,
    Corpus,
    DataError,
    Detector,
    Error,
    ModelFormatError,
    compare_models,
    confusion,
    generate_corpus,
    normalize,
    porter_stem,
    preprocess,
    render_table,
    report,
    split,
    tokenize,
)

__all__ = [
    "ConfusionMatrix",
    "Corpus",
    "DataError",
    "Detector",
    "Error",
    "ModelFormatError",
    "compare_models",
    "confusion",
    "generate_corpus",
    "normalize",
    "porter_stem",
    "preprocess",
    "render_table",
    "report",
    "split",
    "tokenize",
]
