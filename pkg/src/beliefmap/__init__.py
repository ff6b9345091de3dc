"""Belief place/space mapping toolkit: hypercube agent simulation plus a
sequential bag-of-words pipeline that turns multi-group chat corpora into
human-readable maps."""

__version__ = "0.1.0"
