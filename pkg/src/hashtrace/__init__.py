"""Profiling coordinated hashtag-hijacking campaigns in microblog corpora."""

__version__ = "0.1.0"
