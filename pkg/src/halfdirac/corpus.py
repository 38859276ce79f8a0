"""Reference potentials used by the self-test suites and the CLI.

Every member is a fixed shape rescaled to a prescribed ``||V||_1``, so the
coupling ``v = ||V||_1 / c`` is exact by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potential import Potential, Term, scalar_term
from .spectral import PhysicalParams


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    kind: str  # scalar-real | scalar-complex | matrix-hermitian | matrix-nonhermitian
    shape: Potential

    def at_coupling(self, v: float, params: PhysicalParams = PhysicalParams()) -> Potential:
        return self.shape.with_l1(v * params.c)

    @property
    def hermitian(self) -> bool:
        return self.shape.is_hermitian


def _shapes() -> list[CorpusEntry]:
    herm = np.array([[-1.0, 0.4 - 0.3j], [0.4 + 0.3j, -0.2]])
    nh1 = np.array([[-1.0, 0.5], [0.2j, 0.3]])
    nh2 = np.array([[0.4 + 0.5j, 1.0], [-0.3, -0.8]])
    return [
        CorpusEntry("step-attractive", "scalar-real", Potential([scalar_term("step", 0.0, 1.0, -1.0)])),
        CorpusEntry("gauss-repulsive", "scalar-real",
                    Potential([scalar_term("truncated_gaussian", 0.0, 2.0, 1.0)])),
        CorpusEntry("bump-complex", "scalar-complex", Potential([scalar_term("bump", 0.0, 1.5, -1.0 + 0.8j)])),
        CorpusEntry("step-complex-offset", "scalar-complex",
                    Potential([scalar_term("step", 0.5, 1.5, 0.6 - 1.0j)])),
        CorpusEntry("step-matrix", "matrix-nonhermitian", Potential([Term("step", 0.0, 1.0, nh1)])),
        CorpusEntry("gauss-matrix", "matrix-nonhermitian", Potential([Term("truncated_gaussian", 0.0, 2.0, nh2)])),
        CorpusEntry("bump-hermitian-matrix", "matrix-hermitian", Potential([Term("bump", 0.0, 1.0, herm)])),
        CorpusEntry("two-step", "scalar-real", Potential([scalar_term("step", 0.0, 0.6, -1.0),
                                                           scalar_term("step", 0.6, 1.2, 0.5)])),
    ]


CORPUS: tuple[CorpusEntry, ...] = tuple(_shapes())


def corpus(kind: str | None = None) -> list[CorpusEntry]:
    return [e for e in CORPUS if kind is None or e.kind == kind]


def hermitian_corpus() -> list[CorpusEntry]:
    return [e for e in CORPUS if e.hermitian]


def by_name(name: str) -> CorpusEntry:
    for e in CORPUS:
        if e.name == name:
            return e
    raise KeyError(name)
