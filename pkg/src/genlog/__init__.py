"""Proof assistant for an intuitionistic logic with nominal constants,
the nabla quantifier, recursive definitions and natural-number induction."""

__version__ = "0.1.0"
