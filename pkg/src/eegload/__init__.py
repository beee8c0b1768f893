"""EEG cognitive-load decoding: preprocessing, 143-feature extraction,
nested cross-validated classifiers and individual-differences statistics."""

__version__ = "0.1.0"
