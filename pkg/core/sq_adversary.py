# core/sq_adversary.py
"""
Adversarial statistical-query oracle.

The oracle answers each query with a value that keeps as many concepts alive
as possible: a concept survives when its true correlation lies within
c_max * tau of the response. Zero is preferred whenever it keeps at least
as many survivors as any other candidate, so a query orthogonal to every
concept eliminates nothing.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Union

import numpy as np

from core.errors import DomainError
from core.gradients import PauliSum
from core.paulis import LETTERS, PauliString
from core.sq_classes import QUSQ_1DESIGN, SqClass, concept_inner, pauli_word_unitary
from core.sq_inner import ObservableConcept, UnitaryConcept

logger = logging.getLogger(__name__)

Query = Union[PauliString, PauliSum, UnitaryConcept]

NORM_ATOL = 1e-12
RESPONSE_ATOL = 1e-15


@dataclass
class AdversaryState:
    alive: Set[int]
    tau: float
    transcript: List[Dict[str, object]] = field(default_factory=list)


@dataclass(frozen=True)
class AdversaryResult:
    state: AdversaryState
    eliminations: List[int]
    bound_theorem: Optional[float]
    bound_proof_literal: Optional[float]

    @property
    def within_bound(self) -> bool:
        return self.bound_theorem is None or all(e <= self.bound_theorem for e in self.eliminations)

    def as_dict(self, name: str = "") -> dict:
        return {
            "class": name,
            "tau": self.state.tau,
            "alive": len(self.state.alive),
            "bound_theorem": self.bound_theorem,
            "bound_proof_literal": self.bound_proof_literal,
            "within_bound": self.within_bound,
            "queries": self.state.transcript,
        }


def elimination_bounds(d: int, tau: float, c_max: float):
    """(2d / (d tau^2 - 1), 2d / (d c_max^2 tau^2 - 1)); None where the denominator is not positive."""

    def bound(denominator: float) -> Optional[float]:
        return 2.0 * d / denominator if denominator > 0 else None

    return bound(d * tau * tau - 1.0), bound(d * c_max * c_max * tau * tau - 1.0)


# ----------------------------
# Query correlations
# ----------------------------
def _query_label(q: Query) -> str:
    if isinstance(q, PauliString):
        return str(q)
    if isinstance(q, PauliSum):
        parts = [f"{c:+.6g}*{p}" for c, p in q.terms]
        if q.shift:
            parts.append(f"{q.shift:+.6g}*I")
        return " ".join(parts) or "0"
    return q.label or "unitary"


def _check_query(cls: SqClass, q: Query) -> None:
    unitary_class = cls.kind == QUSQ_1DESIGN
    if unitary_class != isinstance(q, UnitaryConcept):
        raise DomainError(f"{type(q).__name__} query does not match a {cls.kind} class")
    if q.n_qubits != cls.n_qubits:
        raise DomainError(f"{q.n_qubits}-qubit query on a {cls.n_qubits}-qubit class")
    if isinstance(q, PauliString) and not q.is_hermitian:
        raise DomainError(f"query {q} is not Hermitian")
    if isinstance(q, PauliSum):
        # operator norm is at most the l1 norm of the coefficients
        weight = sum(abs(c) for c, _ in q.terms) + abs(q.shift)
        if weight > 1.0 + NORM_ATOL:
            raise DomainError(f"query coefficients have l1 norm {weight:.6g} > 1")


def correlations(cls: SqClass, q: Query, indices: Sequence[int]) -> np.ndarray:
    _check_query(cls, q)
    if isinstance(q, UnitaryConcept):
        return np.array([concept_inner(cls.kind, q, cls.concepts[i]) for i in indices])
    if isinstance(q, PauliString):
        terms = [(float(q.coefficient.real), q.unsigned())]
    else:
        terms = [(c, p) for c, p in q.terms]
        if q.shift:
            terms.append((q.shift, PauliString.identity(cls.n_qubits)))
    out = np.zeros(len(indices))
    for coef, p in terms:
        observable = ObservableConcept(p, allow_identity=True)
        out += coef * np.array([concept_inner(cls.kind, observable, cls.concepts[i]) for i in indices])
    return out


def _choose_response(values: np.ndarray, tol: float) -> float:
    if values.size == 0:
        return 0.0
    candidates = [0.0] + sorted({float(v) + s * tol for v in values for s in (-1.0, 1.0)})

    def survivors(r: float) -> int:
        return int(np.count_nonzero(np.abs(values - r) <= tol + RESPONSE_ATOL))

    best, best_count = 0.0, survivors(0.0)
    for r in candidates[1:]:
        count = survivors(r)
        if count > best_count or (count == best_count and best != 0.0 and abs(r) < abs(best)):
            best, best_count = r, count
    return best


# ----------------------------
# Simulation
# ----------------------------
def simulate_adversarial_oracle(cls: SqClass, queries: Sequence[Query], tau: float) -> AdversaryResult:
    if not 0.0 < tau <= 1.0:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")
    if cls.size == 0:
        raise DomainError("adversary needs a nonempty class")
    state = AdversaryState(alive=set(range(cls.size)), tau=float(tau))
    tol = cls.c_max * tau
    bound_thm, bound_lit = elimination_bounds(cls.size, tau, cls.c_max)
    eliminations: List[int] = []

    for k, q in enumerate(queries):
        alive = sorted(state.alive)
        values = correlations(cls, q, alive)
        response = _choose_response(values, tol)
        dead = {i for i, v in zip(alive, values) if abs(v - response) > tol + RESPONSE_ATOL}
        state.alive -= dead
        eliminations.append(len(dead))
        state.transcript.append(
            {
                "query_index": k,
                "query": _query_label(q),
                "response": response,
                "eliminated": len(dead),
                "alive": len(state.alive),
                "bound_theorem": bound_thm,
                "bound_proof_literal": bound_lit,
                "within_bound": bound_thm is None or len(dead) <= bound_thm,
            }
        )
        if bound_thm is not None and len(dead) > bound_thm:
            logger.warning("query %d eliminated %d concepts, above the per-query bound %.3f", k, len(dead), bound_thm)
    return AdversaryResult(state, eliminations, bound_thm, bound_lit)


# ----------------------------
# Query streams
# ----------------------------
def random_pauli_queries(n: int, count: int, rng: np.random.Generator) -> List[PauliString]:
    out = []
    while len(out) < count:
        letters = "".join(LETTERS[i] for i in rng.integers(0, 4, size=n))
        if set(letters) != {"I"}:
            out.append(PauliString(n, letters, 2 * int(rng.integers(0, 2))))
    return out


def random_pauli_sum_queries(n: int, count: int, terms: int, rng: np.random.Generator) -> List[PauliSum]:
    """Random Hermitian sums with l1-normalized real coefficients."""
    out = []
    for _ in range(count):
        paulis = random_pauli_queries(n, terms, rng)
        coefs = rng.standard_normal(terms)
        coefs = coefs / np.sum(np.abs(coefs))
        out.append(PauliSum(n, tuple((float(c), p.unsigned()) for c, p in zip(coefs, paulis))))
    return out


def random_unitary_queries(n: int, count: int, rng: np.random.Generator) -> List[UnitaryConcept]:
    return [pauli_word_unitary(p.unsigned()) for p in random_pauli_queries(n, count, rng)]


def concept_queries(cls: SqClass, count: int) -> List[Query]:
    out: List[Query] = []
    for c in cls.concepts[:count]:
        out.append(c if isinstance(c, UnitaryConcept) else c.pauli)
    return out


def build_queries(cls: SqClass, source: str, count: int, rng: np.random.Generator, terms: int = 4) -> List[Query]:
    if count < 0:
        raise DomainError("query count must be >= 0")
    if source == "concepts":
        return concept_queries(cls, count)
    if source == "random-paulis":
        if cls.kind == QUSQ_1DESIGN:
            return random_unitary_queries(cls.n_qubits, count, rng)
        return random_pauli_queries(cls.n_qubits, count, rng)
    if source == "random-sums":
        if cls.kind == QUSQ_1DESIGN:
            raise DomainError("random-sums queries only apply to observable classes")
        return random_pauli_sum_queries(cls.n_qubits, count, terms, rng)
    raise DomainError(f"unknown query source {source!r}")
