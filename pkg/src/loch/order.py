"""Finite directed (pre)ordered index sets and sequential-finiteness witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

from .errors import MalformedInput, Report, ValidationError, Violation

Element = Hashable


def _sorted_ids(elements: Iterable[Element]) -> list:
    items = list(elements)
    try:
        return sorted(items)
    except TypeError:
        return sorted(items, key=repr)


class DirectedSet:
    """A finite preordered set in which every pair has a common upper bound.

    Instances are immutable once built.  Use :func:`check_directed` for an
    explicit pair list and :meth:`from_predicate` for orders given by a rule
    (integer comparison, set inclusion) where listing every pair is wasteful.

    Identifiers may be any hashable, mutually comparable values; ties in
    :meth:`upper_bound` are broken by their natural (lexicographic) order.
    """

    __slots__ = ("_elements", "_pos", "_le", "_pairs", "_down", "_top", "equivalent")

    def __init__(self, elements: Sequence[Element], le: Callable[[Element, Element], bool],
                 pairs: frozenset | None = None, top: Element | None = None,
                 equivalent: tuple = ()):
        self._elements = tuple(_sorted_ids(elements))
        self._pos = {e: i for i, e in enumerate(self._elements)}
        self._le = le
        self._pairs = pairs
        self._down: dict = {}
        self._top = top
        self.equivalent = equivalent

    # construction -----------------------------------------------------------

    @classmethod
    def from_predicate(cls, elements: Iterable[Element],
                       le: Callable[[Element, Element], bool],
                       top: Element | None = None) -> "DirectedSet":
        """Build from an order rule that is a preorder by construction.

        Reflexivity and the existence of a greatest element are checked
        (the latter makes the set directed); transitivity is the caller's
        guarantee.  With ``top`` given the check is linear in the size.
        """
        elems = list(elements)
        if not elems:
            raise MalformedInput("directed set needs at least one element")
        for e in elems:
            if not le(e, e):
                raise ValidationError(Violation("reflexive", f"{e!r} is not <= itself", (e,)))
        if top is None:
            ds = cls(elems, le)
            top = ds.top()
        else:
            for e in elems:
                if not le(e, top):
                    raise ValidationError(Violation(
                        "directed", f"{e!r} is not below the declared top {top!r}", (e, top)))
        return cls(elems, le, top=top)

    # basic queries ----------------------------------------------------------

    @property
    def elements(self) -> tuple:
        return self._elements

    def __len__(self) -> int:
        return len(self._elements)

    def __iter__(self):
        return iter(self._elements)

    def __contains__(self, item) -> bool:
        return item in self._pos

    def __repr__(self) -> str:
        return f"DirectedSet({len(self)} elements)"

    def _require(self, e):
        if e not in self._pos:
            raise KeyError(f"unknown element {e!r}")

    def le(self, a: Element, b: Element) -> bool:
        """Return ``a <= b``."""
        self._require(a)
        self._require(b)
        if self._pairs is not None:
            return (a, b) in self._pairs
        return bool(self._le(a, b))

    @property
    def leq(self) -> frozenset:
        """All ordered pairs ``(a, b)`` with ``a <= b``."""
        if self._pairs is None:
            self._pairs = frozenset(
                (a, b) for a in self._elements for b in self._elements if self._le(a, b))
        return self._pairs

    def comparable_pairs(self, strict: bool = True):
        """Yield ``(a, b)`` with ``a <= b`` (``a != b`` when ``strict``) in id order."""
        for b in self._elements:
            for a in self.down_set(b):
                if strict and a == b:
                    continue
                yield a, b

    def down_set(self, lam: Element) -> tuple:
        """Elements below ``lam``, in identifier order."""
        self._require(lam)
        if lam not in self._down:
            if self._pairs is not None:
                self._down[lam] = tuple(a for a in self._elements if (a, lam) in self._pairs)
            else:
                self._down[lam] = tuple(a for a in self._elements if self._le(a, lam))
        return self._down[lam]

    def upper_bound(self, lam: Element, nu: Element) -> Element:
        """Smallest (by identifier) common upper bound of ``lam`` and ``nu``."""
        self._require(lam)
        self._require(nu)
        for e in self._elements:
            if self.le(lam, e) and self.le(nu, e):
                return e
        raise ValidationError(Violation("directed", "no common upper bound", (lam, nu)))

    def top(self) -> Element:
        """Smallest (by identifier) element above every element."""
        if self._top is None:
            cand = self._elements[0]
            for e in self._elements[1:]:
                cand = self.upper_bound(cand, e)
            # the fold gives *an* upper bound of everything; prefer the smallest id
            for e in self._elements:
                if self.le(cand, e):
                    cand = e
                    break
            self._top = cand
        return self._top

    def relabel(self, mapping: dict) -> "DirectedSet":
        """Copy with every identifier replaced through ``mapping``."""
        pairs = frozenset((mapping[a], mapping[b]) for a, b in self.leq)
        return check_directed([mapping[e] for e in self._elements], pairs)


def check_directed(elements: Iterable[Element], pairs: Iterable[tuple]) -> DirectedSet:
    """Validate an explicit preorder and return it as a :class:`DirectedSet`.

    Raises
    ------
    MalformedInput
        Empty element list, or a pair mentioning an unknown element.
    ValidationError
        First failing axiom (``reflexive``, ``transitive`` or ``directed``)
        with a witness.
    """
    elems = _sorted_ids(dict.fromkeys(elements))
    if not elems:
        raise MalformedInput("directed set needs at least one element")
    known = set(elems)
    rel = set()
    for p in pairs:
        a, b = p
        if a not in known or b not in known:
            raise MalformedInput(f"pair {(a, b)!r} references an unknown element")
        rel.add((a, b))

    for e in elems:
        if (e, e) not in rel:
            raise ValidationError(Violation("reflexive", f"missing ({e!r}, {e!r})", (e,)))

    up: dict = {e: set() for e in elems}
    for a, b in rel:
        up[a].add(b)
    for a in elems:
        for b in _sorted_ids(up[a]):
            for c in _sorted_ids(up[b]):
                if c not in up[a]:
                    raise ValidationError(Violation(
                        "transitive", f"{a!r}<={b!r}<={c!r} but not {a!r}<={c!r}", (a, b, c)))

    for i, a in enumerate(elems):
        for b in elems[i + 1:]:
            if not (up[a] & up[b]):
                raise ValidationError(Violation(
                    "directed", f"{a!r} and {b!r} have no common upper bound", (a, b)))

    equivalent = tuple(
        (a, b) for i, a in enumerate(elems) for b in elems[i + 1:]
        if (a, b) in rel and (b, a) in rel)
    frozen = frozenset(rel)
    return DirectedSet(elems, lambda x, y: (x, y) in frozen, pairs=frozen, equivalent=equivalent)


def chain_order(elements: Sequence[Element]) -> DirectedSet:
    """Linear order following the given sequence."""
    rank = {e: i for i, e in enumerate(elements)}
    return check_directed(elements, [(a, b) for a in elements for b in elements if rank[a] <= rank[b]])


def down_set(ds: DirectedSet, lam: Element) -> frozenset:
    """The set of indices below ``lam``."""
    return frozenset(ds.down_set(lam))


def upper_bound(ds: DirectedSet, lam: Element, nu: Element) -> Element:
    return ds.upper_bound(lam, nu)


@dataclass(frozen=True)
class ChainWitness:
    """A nondecreasing sequence ``eps_1 <= eps_2 <= ...`` meant to be cofinal."""

    chain: tuple

    def __init__(self, chain: Iterable[Element]):
        object.__setattr__(self, "chain", tuple(chain))


def is_sequentially_finite(ds: DirectedSet, witness: ChainWitness) -> Report:
    """Check conditions c1 (monotone), c2 (cofinal), c3 (finite down-sets).

    The report's ``details`` maps each chain element to the size of its
    down-set, which is the enumeration that certifies c3.
    """
    chain = witness.chain
    if not chain:
        raise MalformedInput("chain witness is empty")
    for e in chain:
        if e not in ds:
            raise MalformedInput(f"chain element {e!r} is not in the directed set")

    for a, b in zip(chain, chain[1:]):
        if not ds.le(a, b):
            return Report(False, Violation("c1", f"{a!r} is not <= {b!r}", (a, b)))

    # the chain is monotone here, so being below some eps_m means being below the last one
    below_last = set(ds.down_set(chain[-1]))
    for lam in ds:
        if lam not in below_last:
            return Report(False, Violation("c2", f"{lam!r} lies below no chain element", (lam,)))

    sizes = {}
    for e in chain:
        sizes[e] = len(ds.down_set(e))
    return Report(True, details={"down_set_sizes": sizes})
