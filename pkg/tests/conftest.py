"""Shared fixtures: parsed library groups and memoized classification
reports (the reports are expensive; several suites read the same ones)."""

from __future__ import annotations

import pytest

from arclab.groups import parse_group
from arclab.valuations import classification_report

LIBRARY = {
    "k1": "lex(Z, Q)",
    "k2": "lex(omega_tower(start=0))",
    "zpluspi": "lex(real(1, pi))",
    "c0": "lex(poly_module(Zloc(2), pi))",
}

# the wider pool the differential criteria sample over (all effective)
EFFECTIVE_POOL = [
    "lex(Z, Q)",
    "lex(Z, Z)",
    "lex(real(1, pi))",
    "lex(Zloc(2), Q)",
    "lex(Q)",
]


@pytest.fixture(scope="session")
def groups():
    return {name: parse_group(dsl) for name, dsl in LIBRARY.items()}


@pytest.fixture(scope="session")
def reports(groups):
    """Reports at the CLI's default configuration, matching the goldens."""
    return {
        name: classification_report(G, display_primes=(2, 3, 5, 7), samples=200, seed=42)
        for name, G in groups.items()
    }
