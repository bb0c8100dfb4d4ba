"""Mining, classifying and analysing GitHub issues closed as wontfix."""

__version__ = "0.1.0"
