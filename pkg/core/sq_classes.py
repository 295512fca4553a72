# core/sq_classes.py
"""
Concept classes with certified statistical-query dimension.

Pauli-realizing circuits are built with a tree over the reverse light cone of
the measured qubit. Walking the circuit backwards, every two-qubit brick that
reaches exactly one cone qubit adds an edge (parent = cone qubit, child = new
qubit). In the Heisenberg picture each edge then gets one of three Clifford
gates, chosen from which subtrees still hold target support:

  child subtree misses the support   -> identity (brick omitted)
  parent subtree misses the support  -> SWAP (Z moves to the child)
  both hit the support               -> Z(x)I -> Z(x)Z conjugator

which leaves Z exactly on the target support; a first layer of one-qubit
basis changes (H for X, H S^dag for Y) turns those Z into the target letters.
Every circuit is checked by symbolic conjugation before it is returned.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from core.circuits import build_fixed, checkerboard_row_pairs
from core.clifford import CNOT_REVERSED, H_SDAG, HADAMARD, PAULI_GATES, SWAP, conjugate_pauli
from core.errors import DomainError, NumericError, ResourceError
from core.paulis import LETTERS, PauliString, enumerate_words
from core.sq_inner import ObservableConcept, UnitaryConcept, qcsq_inner_basis, qcsq_inner_haar2, qusq_inner

logger = logging.getLogger(__name__)

QCSQ_HAAR2 = "qcsq-haar2"
QCSQ_BASIS = "qcsq-basis"
QUSQ_1DESIGN = "qusq-1design"
CLASS_KINDS = (QCSQ_HAAR2, QCSQ_BASIS, QUSQ_1DESIGN)

MAX_SINGLE_LAYER_QUBITS = 12
MAX_LOGDEPTH_CLASS_QUBITS = 6
MAX_UNITARY_CLASS_QUBITS = 6
MAX_Z_WORD_QUBITS = 16
MAX_CONE_CLASS_QUBITS = 6

CERTIFY_ATOL = 1e-12
EXHAUSTIVE_PAIR_LIMIT = 4_000_000

Concept = Union[ObservableConcept, UnitaryConcept]
PairRows = Sequence[Sequence[Tuple[int, int]]]


# ----------------------------
# Inner product dispatch
# ----------------------------
def concept_inner(kind: str, a: Concept, b: Concept) -> float:
    if kind == QCSQ_HAAR2:
        return qcsq_inner_haar2(a.pauli, b.pauli, a.n_qubits)
    if kind == QCSQ_BASIS:
        return qcsq_inner_basis(a.pauli, b.pauli)
    if kind == QUSQ_1DESIGN:
        return qusq_inner(a, b)
    raise DomainError(f"unknown class kind {kind!r}")


@dataclass(frozen=True)
class SqClass:
    kind: str
    concepts: Tuple[Concept, ...]
    n_qubits: int
    c_max: float
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in CLASS_KINDS:
            raise DomainError(f"unknown class kind {self.kind!r}")
        object.__setattr__(self, "concepts", tuple(self.concepts))
        for c in self.concepts:
            if c.n_qubits != self.n_qubits:
                raise DomainError("concept acts on the wrong number of qubits")
        wants_unitary = self.kind == QUSQ_1DESIGN
        if any(isinstance(c, UnitaryConcept) != wants_unitary for c in self.concepts):
            raise DomainError(f"{self.kind} classes hold {'unitary' if wants_unitary else 'observable'} concepts")
        recomputed = _self_inner_max(self.kind, self.concepts)
        if abs(recomputed - self.c_max) > 1e-12:
            raise NumericError(f"stored c_max {self.c_max} disagrees with recomputed {recomputed}")

    @classmethod
    def create(cls, kind: str, concepts: Sequence[Concept], n_qubits: int, name: str = "") -> "SqClass":
        return cls(kind, tuple(concepts), n_qubits, _self_inner_max(kind, concepts), name)

    @property
    def size(self) -> int:
        return len(self.concepts)


def _self_inner_max(kind: str, concepts: Sequence[Concept]) -> float:
    if kind in (QCSQ_HAAR2, QCSQ_BASIS) and all(isinstance(c, ObservableConcept) for c in concepts):
        # self products of Hermitian Paulis depend only on whether the word is identity or diagonal
        seen: Dict[Tuple[bool, bool], float] = {}
        for c in concepts:
            key = (c.pauli.is_identity_letters, all(ch in "IZ" for ch in c.pauli.letters))
            if key not in seen:
                seen[key] = concept_inner(kind, c, c)
        return max(seen.values(), default=0.0)
    return max((concept_inner(kind, c, c) for c in concepts), default=0.0)


# ----------------------------
# Light cones and trees
# ----------------------------
@dataclass(frozen=True)
class ConeTree:
    measured: int
    # per row: (parent, child) edges added while walking the rows backwards
    edges: Tuple[Tuple[Tuple[int, int], ...], ...]

    @property
    def cone(self) -> Set[int]:
        nodes = {self.measured}
        for row in self.edges:
            nodes.update(child for _, child in row)
        return nodes


def reverse_light_cone(rows: PairRows, measured: int) -> ConeTree:
    cone = {measured}
    edges: List[Tuple[Tuple[int, int], ...]] = [()] * len(rows)
    for r in reversed(range(len(rows))):
        added = []
        for a, b in rows[r]:
            in_a, in_b = a in cone, b in cone
            if in_a != in_b:
                added.append((a, b) if in_a else (b, a))
        cone.update(child for _, child in added)
        edges[r] = tuple(added)
    return ConeTree(measured, tuple(edges))


def _subtree(tree: ConeTree, node: int, before_row: int, memo: Dict[Tuple[int, int], frozenset]) -> frozenset:
    """`node` plus everything it spawns in rows earlier than `before_row`."""
    key = (node, before_row)
    if key not in memo:
        out = {node}
        for r in range(before_row):
            for parent, child in tree.edges[r]:
                if parent == node:
                    out |= _subtree(tree, child, r, memo)
        memo[key] = frozenset(out)
    return memo[key]


def _basis_layer(target: PauliString) -> list:
    row = []
    for q, letter in enumerate(target.letters):
        if letter == "X":
            row.append(((q,), HADAMARD))
        elif letter == "Y":
            row.append(((q,), H_SDAG))
    return row


def _tree_circuit(target: PauliString, rows: PairRows, measured: int, label: str) -> UnitaryConcept:
    if target.is_identity_letters:
        raise DomainError("target Pauli must be nontrivial")
    if target.phase_power != 0:
        raise DomainError("target must be an unsigned Pauli word")
    n = target.n_qubits
    tree = reverse_light_cone(rows, measured)
    support = set(target.support)
    outside = sorted(support - tree.cone)
    if outside:
        raise DomainError(f"target touches qubits {outside} outside the reverse light cone of qubit {measured}")

    memo: Dict[Tuple[int, int], frozenset] = {}
    gate_rows: List[list] = [_basis_layer(target)]
    for r, row in enumerate(tree.edges):
        gates = []
        for parent, child in row:
            if not _subtree(tree, child, r, memo) & support:
                continue
            if not _subtree(tree, parent, r, memo) & support:
                gates.append(((parent, child), SWAP))
            else:
                gates.append(((parent, child), CNOT_REVERSED))
        gate_rows.append(gates)
    circuit = build_fixed(n, gate_rows, readout=measured)

    image = conjugate_pauli(PauliString.single(n, measured, "Z"), circuit)
    if image != target:
        raise NumericError(f"constructed circuit maps Z_{measured} to {image}, expected {target}")
    return UnitaryConcept(circuit, n, None, label or target.letters)


# ----------------------------
# Layer patterns
# ----------------------------
def logdepth_rows(n: int) -> List[List[Tuple[int, int]]]:
    rows = []
    depth = int(math.ceil(math.log2(n))) if n > 1 else 0
    for layer in range(1, depth + 1):
        half, stride = 1 << (layer - 1), 1 << layer
        rows.append([(i, i + half) for i in range(0, n, stride) if i + half < n])
    return rows


def chain_rows(n: int, L: int) -> List[List[Tuple[int, int]]]:
    return [checkerboard_row_pairs(n, r) for r in range(L)]


def lattice_rows(side: int, L: int) -> List[List[Tuple[int, int]]]:
    """Per layer a horizontal then a vertical sublayer, open boundaries, q = row*side + col."""
    rows = []
    for r in range(L):
        start = r % 2
        rows.append([(y * side + x, y * side + x + 1) for y in range(side) for x in range(start, side - 1, 2)])
        rows.append([(y * side + x, (y + 1) * side + x) for y in range(start, side - 1, 2) for x in range(side)])
    return rows


def light_cone_1d(n: int, L: int, measured: int) -> Set[int]:
    return reverse_light_cone(chain_rows(n, L), measured).cone


def light_cone_2d(side: int, L: int, measured: int) -> Set[int]:
    return reverse_light_cone(lattice_rows(side, L), measured).cone


# ----------------------------
# Constructions
# ----------------------------
def build_pauli_circuit_logdepth(target: PauliString, n: int) -> UnitaryConcept:
    if target.n_qubits != n:
        raise DomainError(f"target acts on {target.n_qubits} qubits, expected {n}")
    return _tree_circuit(target, logdepth_rows(n), 0, f"logdepth:{target.letters}")


def build_pauli_circuit_1d(target: PauliString, L: int, measured_qubit: int, n: int) -> UnitaryConcept:
    if target.n_qubits != n:
        raise DomainError(f"target acts on {target.n_qubits} qubits, expected {n}")
    if n < 2 or L < 1:
        raise DomainError("1-D construction needs n >= 2 and L >= 1")
    if not 0 <= measured_qubit < n:
        raise DomainError(f"measured qubit {measured_qubit} out of range")
    return _tree_circuit(target, chain_rows(n, L), measured_qubit, f"chain{L}:{target.letters}")


def build_pauli_circuit_lattice2d(target: PauliString, L: int, measured_qubit: int, side: int) -> UnitaryConcept:
    n = side * side
    if target.n_qubits != n:
        raise DomainError(f"target acts on {target.n_qubits} qubits, expected {side}x{side} = {n}")
    if side < 2 or L < 1:
        raise DomainError("lattice construction needs side >= 2 and L >= 1")
    if not 0 <= measured_qubit < n:
        raise DomainError(f"measured qubit {measured_qubit} out of range")
    return _tree_circuit(target, lattice_rows(side, L), measured_qubit, f"lattice{L}:{target.letters}")


# ----------------------------
# Classes
# ----------------------------
def _cap(n: int, limit: int, what: str) -> None:
    if n < 1:
        raise DomainError("classes need n >= 1")
    if n > limit:
        raise ResourceError(f"{what} enumeration is capped at n = {limit}, got {n}")


def build_class_single_layer_global(n: int) -> SqClass:
    """U^dag Z^(x)n U for every single layer U of {H, H S^dag, I}."""
    _cap(n, MAX_SINGLE_LAYER_QUBITS, "single-layer class")
    # U is a tensor product, so each qubit's image is computed once
    images = {}
    for letter in "XYZ":
        single = PauliString.single(1, 0, letter)
        layer = build_fixed(1, [_basis_layer(single)])
        images[letter] = conjugate_pauli(PauliString.single(1, 0, "Z"), layer)
    concepts = []
    for word in enumerate_words(n, "XYZ"):
        letters = "".join(images[c].letters for c in word.letters)
        phase = sum(images[c].phase_power for c in word.letters)
        concepts.append(ObservableConcept(PauliString(n, letters, phase)))
    return SqClass.create(QCSQ_HAAR2, concepts, n, "single-layer-global")


def build_class_logdepth(n: int) -> SqClass:
    _cap(n, MAX_LOGDEPTH_CLASS_QUBITS, "log-depth class")
    concepts = []
    for word in enumerate_words(n, LETTERS):
        if word.is_identity_letters:
            continue
        circuit = build_pauli_circuit_logdepth(word, n).circuit
        concepts.append(ObservableConcept(conjugate_pauli(PauliString.single(n, 0, "Z"), circuit)))
    return SqClass.create(QCSQ_HAAR2, concepts, n, "logdepth")


def pauli_word_unitary(word: PauliString) -> UnitaryConcept:
    row = [((q,), PAULI_GATES[c]) for q, c in enumerate(word.letters) if c != "I"]
    circuit = build_fixed(word.n_qubits, [row])
    return UnitaryConcept(circuit, word.n_qubits, word.unsigned(), word.letters)


def build_class_unitary_single_layer(n: int) -> SqClass:
    _cap(n, MAX_UNITARY_CLASS_QUBITS, "single-layer unitary class")
    concepts = [pauli_word_unitary(w) for w in enumerate_words(n, LETTERS)]
    return SqClass.create(QUSQ_1DESIGN, concepts, n, "unitary-single-layer")


def build_class_z_words(n: int) -> SqClass:
    _cap(n, MAX_Z_WORD_QUBITS, "Z-word class")
    concepts = [ObservableConcept(w) for w in enumerate_words(n, "IZ") if not w.is_identity_letters]
    return SqClass.create(QCSQ_BASIS, concepts, n, "z-words")


def _cone_words(n: int, cone: Set[int]) -> List[PauliString]:
    qubits = sorted(cone)
    words = []
    for local in enumerate_words(len(qubits), LETTERS):
        if local.is_identity_letters:
            continue
        words.append(PauliString.on_qubits(n, dict(zip(qubits, local.letters))))
    return words


def build_class_chain(n: int, layers: int = 1) -> SqClass:
    """Every nontrivial Pauli inside the depth-`layers` light cone of qubit 0, realized on the 1-D brick chain."""
    if n < 2 or layers < 1:
        raise DomainError("chain class needs n >= 2 and layers >= 1")
    cone = light_cone_1d(n, layers, 0)
    _cap(len(cone), MAX_CONE_CLASS_QUBITS, "chain light-cone class")
    concepts = []
    for word in _cone_words(n, cone):
        circuit = build_pauli_circuit_1d(word, layers, 0, n).circuit
        concepts.append(ObservableConcept(conjugate_pauli(PauliString.single(n, 0, "Z"), circuit)))
    return SqClass.create(QCSQ_HAAR2, concepts, n, f"chain-L{layers}")


def build_class_lattice2d(n: int, layers: int = 1) -> SqClass:
    """As `build_class_chain` on a side x side lattice; n must be a perfect square."""
    side = math.isqrt(n)
    if side * side != n or side < 2:
        raise DomainError(f"lattice class needs n = side^2 with side >= 2, got n = {n}")
    if layers < 1:
        raise DomainError("lattice class needs layers >= 1")
    cone = light_cone_2d(side, layers, 0)
    _cap(len(cone), MAX_CONE_CLASS_QUBITS, "lattice light-cone class")
    concepts = []
    for word in _cone_words(n, cone):
        circuit = build_pauli_circuit_lattice2d(word, layers, 0, side).circuit
        concepts.append(ObservableConcept(conjugate_pauli(PauliString.single(n, 0, "Z"), circuit)))
    return SqClass.create(QCSQ_HAAR2, concepts, n, f"lattice2d-L{layers}")


CLASS_BUILDERS = {
    "single-layer-global": build_class_single_layer_global,
    "logdepth": build_class_logdepth,
    "chain": build_class_chain,
    "lattice2d": build_class_lattice2d,
    "unitary-single-layer": build_class_unitary_single_layer,
    "z-words": build_class_z_words,
}
LAYERED_CLASSES = frozenset({"chain", "lattice2d"})
CLASS_ALIASES = {
    "prop-c2": "single-layer-global",
    "prop-c3": "logdepth",
    "prop-c5": "chain",
    "prop-c6": "lattice2d",
    "prop-c7": "unitary-single-layer",
}


def build_class(name: str, n: int, layers: int = 1) -> SqClass:
    key = CLASS_ALIASES.get(name, name)
    try:
        builder = CLASS_BUILDERS[key]
    except KeyError:
        choices = sorted(CLASS_BUILDERS) + sorted(CLASS_ALIASES)
        raise DomainError(f"unknown class {name!r}; choose from {choices}") from None
    if key in LAYERED_CLASSES:
        return builder(n, layers)
    if layers != 1:
        raise DomainError(f"class {key!r} has a fixed depth; layers must be 1")
    return builder(n)


# ----------------------------
# Certificates
# ----------------------------
@dataclass(frozen=True)
class SqCertificate:
    ok: bool
    d: int
    c_max: float
    max_offdiag: float
    kind: str
    n_qubits: int
    violating_pair: Optional[Tuple[int, int]] = None
    checked_pairs: int = 0

    def as_dict(self, taus: Sequence[float] = (1.0, 0.5, 0.25, 0.1), name: str = "") -> dict:
        return {
            "class": name,
            "kind": self.kind,
            "n": self.n_qubits,
            "ok": self.ok,
            "d": self.d,
            "c_max": self.c_max,
            "max_offdiag": self.max_offdiag,
            "violating_pair": list(self.violating_pair) if self.violating_pair else None,
            "bound_at_tau": {str(t): query_lower_bound(self.d, t) for t in taus} if self.ok else {},
        }


def _pauli_key(kind: str, c: Concept) -> Optional[Tuple]:
    """Group key such that concepts in different groups have inner product exactly 0."""
    p = c.pauli
    if p is None:
        return None
    if kind == QCSQ_BASIS:
        if any(ch in "XY" for ch in p.letters):
            return ("offdiag",)
        return ("diag", p.masks()[1])
    return (p.letters,)


def _certify_keyed(cls: SqClass, keys: List[Tuple]):
    groups: Dict[Tuple, List[int]] = {}
    for i, k in enumerate(keys):
        groups.setdefault(k, []).append(i)
    worst, bad, checked = 0.0, None, 0
    limit = cls.c_max / cls.size + CERTIFY_ATOL
    for k, members in groups.items():
        if k == ("offdiag",):
            continue
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                i, j = members[x], members[y]
                v = abs(concept_inner(cls.kind, cls.concepts[i], cls.concepts[j]))
                checked += 1
                worst = max(worst, v)
                if v > limit and (bad is None or (i, j) < bad):
                    bad = (i, j)
    return worst, bad, checked


def _certify_exhaustive(cls: SqClass):
    worst, checked = 0.0, 0
    limit = cls.c_max / cls.size + CERTIFY_ATOL
    for i in range(cls.size):
        for j in range(i + 1, cls.size):
            v = abs(concept_inner(cls.kind, cls.concepts[i], cls.concepts[j]))
            checked += 1
            worst = max(worst, v)
            if v > limit:
                return worst, (i, j), checked
    return worst, None, checked


def certify_sq_dimension(cls: SqClass) -> SqCertificate:
    """
    Check |<M_i, M_j>| <= c_max / d for every pair i < j with d = |class|.

    Classes whose concepts all carry a Pauli form are checked through groups
    of equal letters (equal Z masks for the basis kind); pairs across groups
    are exactly orthogonal and skipped. Everything else is checked pair by pair.
    """
    if cls.size == 0:
        raise DomainError("cannot certify an empty class")
    keys = [_pauli_key(cls.kind, c) for c in cls.concepts]
    if all(k is not None for k in keys):
        worst, bad, checked = _certify_keyed(cls, keys)
    else:
        pairs = cls.size * (cls.size - 1) // 2
        if pairs > EXHAUSTIVE_PAIR_LIMIT:
            raise ResourceError(f"{pairs} concept pairs exceed the exhaustive limit of {EXHAUSTIVE_PAIR_LIMIT}")
        worst, bad, checked = _certify_exhaustive(cls)
    if bad is not None:
        logger.info("certificate failed on pair %s (|inner| = %.3e, c_max/d = %.3e)", bad, worst, cls.c_max / cls.size)
    return SqCertificate(
        ok=bad is None,
        d=cls.size if bad is None else 0,
        c_max=cls.c_max,
        max_offdiag=worst,
        kind=cls.kind,
        n_qubits=cls.n_qubits,
        violating_pair=bad,
        checked_pairs=checked,
    )


def query_lower_bound(d: int, tau: float) -> float:
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    if not 0.0 < tau <= 1.0:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")
    return max(0.0, (d * tau * tau - 1.0) / 2.0)
