"""Run configuration shared by the CLI and the scripts."""
from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_SEED = 42


def default_seed() -> int:
    """EWKIT_SEED if set, else 42."""
    raw = os.environ.get("EWKIT_SEED")
    return DEFAULT_SEED if raw in (None, "") else int(raw)


@dataclass(frozen=True)
class ProbeConfig:
    samples: int = 10_000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


@dataclass(frozen=True)
class CertificateConfig:
    """Tolerances for the numerical certificates."""

    psd: float = 1e-10
    expectation_rel: float = 1e-10
    reconstruction: float = 1e-8
    resolution: float = 1e-6
