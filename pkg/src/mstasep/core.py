"""Domain types and combinatorics shared by the whole package.

States of the particle system pair a strictly increasing position vector
with a species word.  All operator matrices built elsewhere act on one
*sector*: the block of species words sharing a multiset, listed
lexicographically.  Elements of the symmetric group are enumerated
breadth-first from the identity so that every element carries a canonical
reduced word back to the identity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


class NonIncreasingPositions(ValueError):
    """Positions violate the exclusion rule (must be strictly increasing)."""


class SpeciesOutOfRange(ValueError):
    """A species label lies outside {1..N}."""


@dataclass(frozen=True)
class RateTable:
    """Jump rates per species, species labelled 1..N."""

    rates: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(b) for b in self.rates))
        if len(self.rates) == 0:
            raise ValueError("rate table must not be empty")
        if any(not b > 0.0 for b in self.rates):
            raise ValueError(f"jump rates must be strictly positive, got {self.rates}")

    @property
    def n_species(self) -> int:
        return len(self.rates)

    def rate(self, species: int) -> float:
        """Rate of a 1-based species label."""
        return self.rates[species - 1]


@dataclass(frozen=True)
class ParticleState:
    """Ordered particle positions plus the species word.

    ``species[i]`` is the species of the (i+1)-th leftmost particle.
    Hashable, so states can key dictionaries in the Markov-chain oracle.
    """

    positions: tuple[int, ...]
    species: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(int(x) for x in self.positions))
        object.__setattr__(self, "species", tuple(int(s) for s in self.species))
        if len(self.positions) != len(self.species):
            raise ValueError(
                f"{len(self.positions)} positions but {len(self.species)} species labels"
            )

    def __len__(self) -> int:
        return len(self.positions)


def validate_state(state: ParticleState, rates: RateTable) -> None:
    """Check a state against the exclusion and species-range invariants.

    Raises NonIncreasingPositions or SpeciesOutOfRange; returns None when
    the state is admissible for an ``rates.n_species``-particle system.
    """
    n = rates.n_species
    if len(state) != n:
        raise SpeciesOutOfRange(
            f"state has {len(state)} particles but the rate table declares {n} species"
        )
    for a, b in zip(state.positions, state.positions[1:]):
        if a >= b:
            raise NonIncreasingPositions(f"positions {state.positions} are not strictly increasing")
    for s in state.species:
        if not 1 <= s <= n:
            raise SpeciesOutOfRange(f"species label {s} outside 1..{n}")


class WordBlock:
    """An ordered, indexed collection of equal-length species words.

    This is the row/column labelling every sector matrix acts on.  Words
    are tuples of 1-based species labels.
    """

    __slots__ = ("words", "lookup")

    def __init__(self, words: Iterable[Sequence[int]]):
        self.words: tuple[tuple[int, ...], ...] = tuple(tuple(w) for w in words)
        if not self.words:
            raise ValueError("word block must contain at least one word")
        length = len(self.words[0])
        if any(len(w) != length for w in self.words):
            raise ValueError("all words in a block must have equal length")
        self.lookup: dict[tuple[int, ...], int] = {w: i for i, w in enumerate(self.words)}
        if len(self.lookup) != len(self.words):
            raise ValueError("duplicate words in block")

    @property
    def dim(self) -> int:
        return len(self.words)

    @property
    def word_length(self) -> int:
        return len(self.words[0])

    def index(self, word: Sequence[int]) -> int:
        return self.lookup[tuple(word)]

    def __repr__(self) -> str:  # pragma: no cover
        return f"{type(self).__name__}({len(self.words)} words of length {self.word_length})"


class SectorIndex(WordBlock):
    """All distinct permutations of one species multiset, in lexicographic order."""

    __slots__ = ("multiset",)

    def __init__(self, multiset: Sequence[int]):
        self.multiset: tuple[int, ...] = tuple(sorted(int(s) for s in multiset))
        super().__init__(sorted(set(itertools.permutations(self.multiset))))


def build_sector(multiset: Sequence[int]) -> SectorIndex:
    """Sector (multiset block) for a species multiset with entries in 1..N.

    The block size is the multinomial coefficient of the multiset.
    """
    ms = sorted(int(s) for s in multiset)
    n = len(ms)
    if any(not 1 <= s <= n for s in ms):
        raise SpeciesOutOfRange(f"multiset {ms} has labels outside 1..{n}")
    return SectorIndex(ms)


def sector_size(multiset: Sequence[int]) -> int:
    """Multinomial coefficient: number of distinct words over the multiset."""
    n = math.factorial(len(multiset))
    for _, group in itertools.groupby(sorted(multiset)):
        n //= math.factorial(sum(1 for _ in group))
    return n


@dataclass(frozen=True)
class PermutationElem:
    """A permutation in one-line notation with its canonical predecessor link.

    ``image[i-1]`` is the value at slot i (1-based values and slots).  Every
    non-identity element stores the slot of the adjacent transposition that
    produced it from ``pred``, with the inversion count growing by exactly
    one, so following links back to the identity spells a reduced word.
    """

    image: tuple[int, ...]
    parity: int
    slot: Optional[int] = None
    pred: Optional["PermutationElem"] = None

    @property
    def is_identity(self) -> bool:
        return self.pred is None

    def chain(self) -> list["PermutationElem"]:
        """Elements from the identity up to (and including) self."""
        out: list[PermutationElem] = []
        elem: Optional[PermutationElem] = self
        while elem is not None:
            out.append(elem)
            elem = elem.pred
        out.reverse()
        return out


def inversions(word: Sequence[int]) -> int:
    return sum(
        1
        for i in range(len(word))
        for j in range(i + 1, len(word))
        if word[i] > word[j]
    )


def enumerate_sn(n: int) -> list[PermutationElem]:
    """Breadth-first enumeration of the symmetric group on {1..n}.

    Starts at the identity; children are produced by swapping an ascent at
    slot i, which raises the inversion count by one.  Each element appears
    once, linked to the first parent that reached it, so the list comes out
    sorted by inversion count with the identity first.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    identity = PermutationElem(image=tuple(range(1, n + 1)), parity=1)
    elems = [identity]
    seen = {identity.image}
    frontier = [identity]
    while frontier:
        next_frontier = []
        for parent in frontier:
            w = parent.image
            for slot in range(1, n):
                if w[slot - 1] < w[slot]:  # ascent: swapping adds one inversion
                    child_image = w[: slot - 1] + (w[slot], w[slot - 1]) + w[slot + 1 :]
                    if child_image not in seen:
                        seen.add(child_image)
                        child = PermutationElem(
                            image=child_image, parity=-parent.parity, slot=slot, pred=parent
                        )
                        elems.append(child)
                        next_frontier.append(child)
        frontier = next_frontier
    return elems
