"""Intrusive integer lists and identifier pools.

A MultiList keeps n disjoint doubly linked lists over the values [0, m).
Links live in flat arrays indexed by value, so add, remove and membership
are O(1) and no per-node objects are allocated.
"""

from __future__ import annotations

from array import array
from typing import Iterator

NIL = -1


def int_array(n: int, fill: int = 0) -> array:
    """Flat array of n 32-bit ints; far smaller than a list once filled."""
    return array("i", [fill]) * n


class IdentifiersExhausted(Exception):
    """Raised when an identifier pool has no free value left."""


class PoolUsageError(ValueError):
    """Raised on out-of-range arguments or misuse of a pool."""


class MultiList:
    """n disjoint lists over the values [0, m).

    A value that belongs to no list has pred = succ = 0. Because value 0 is
    itself a legal value, membership is tracked in a separate byte array.
    The head of list i stores -2 - i as its pred, so removing a head finds
    its list in O(1).
    """

    __slots__ = ("n", "m", "first", "pred", "succ", "member")

    def __init__(self, n: int, m: int):
        if n < 1 or m < 1:
            raise PoolUsageError(f"bad dimensions n={n} m={m}")
        self.n = n
        self.m = m
        self.first = int_array(n, NIL)
        self.pred = int_array(m)
        self.succ = int_array(m)
        self.member = bytearray(m)

    def _check_value(self, v: int) -> None:
        if not 0 <= v < self.m:
            raise PoolUsageError(f"value {v} outside [0, {self.m})")

    def _check_list(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise PoolUsageError(f"list index {i} outside [0, {self.n})")

    def add(self, i: int, v: int) -> bool:
        """Prepend v to list i. Returns False if v is already in some list."""
        self._check_list(i)
        self._check_value(v)
        if self.member[v]:
            return False
        head = self.first[i]
        self.pred[v] = -2 - i
        self.succ[v] = head
        if head != NIL:
            self.pred[head] = v
        self.first[i] = v
        self.member[v] = 1
        return True

    def remove(self, v: int) -> bool:
        """Unlink v from whatever list holds it. Returns False if absent."""
        self._check_value(v)
        if not self.member[v]:
            return False
        p = self.pred[v]
        s = self.succ[v]
        if s != NIL:
            self.pred[s] = p
        if p >= 0:
            self.succ[p] = s
        else:
            self.first[-2 - p] = s
        self.pred[v] = 0
        self.succ[v] = 0
        self.member[v] = 0
        return True

    def contains(self, v: int) -> bool:
        self._check_value(v)
        return self.member[v] == 1

    def head(self, i: int) -> int:
        """First element of list i, or NIL."""
        return self.first[i]

    def is_empty(self, i: int) -> bool:
        return self.first[i] == NIL

    def has_two(self, i: int) -> bool:
        """True if list i holds at least two elements."""
        h = self.first[i]
        return h != NIL and self.succ[h] != NIL

    def iter(self, i: int) -> Iterator[int]:
        """Walk list i from first to last.

        The current element may be removed by the consumer, in which case the
        walk resumes from the successor it had when it was yielded. Elements
        added during the walk are prepended and so not visited.
        """
        self._check_list(i)
        v = self.first[i]
        succ = self.succ
        member = self.member
        while v != NIL:
            nxt = succ[v]
            yield v
            if member[v]:
                nxt = succ[v]
            v = nxt

    def to_list(self, i: int) -> list[int]:
        return list(self.iter(i))

    def count(self) -> int:
        """Number of values held in any list."""
        return sum(self.member)


class OneList(MultiList):
    """A single intrusive list over [0, m)."""

    __slots__ = ()

    def __init__(self, m: int):
        super().__init__(1, m)

    def add(self, v: int) -> bool:  # type: ignore[override]
        return MultiList.add(self, 0, v)

    def iter(self) -> Iterator[int]:  # type: ignore[override]
        return MultiList.iter(self, 0)

    def to_list(self) -> list[int]:  # type: ignore[override]
        return list(MultiList.iter(self, 0))

    def head(self) -> int:  # type: ignore[override]
        return self.first[0]

    def is_empty(self) -> bool:  # type: ignore[override]
        return self.first[0] == NIL


IN_USE = 0
FREE = 1


class TwoLists(MultiList):
    """Identifier pool: list 0 holds identifiers in use, list 1 free ones.

    All values start free, in increasing order, so implicit acquisition
    hands out the smallest identifiers first.
    """

    __slots__ = ("used",)

    def __init__(self, m: int):
        super().__init__(2, m)
        # free list 0, 1, ..., m-1 built in bulk
        self.pred = array("i", range(-1, m - 1))
        self.pred[0] = -2 - FREE
        self.succ = array("i", range(1, m + 1))
        self.succ[m - 1] = NIL
        self.first[FREE] = 0
        self.member = bytearray(b"\x01") * m
        self.used = bytearray(m)

    def acquire(self, v: int | None = None) -> int:
        if v is None:
            v = self.first[FREE]
            if v == NIL:
                raise IdentifiersExhausted(f"all {self.m} identifiers are in use")
        else:
            self._check_value(v)
            if self.used[v]:
                raise PoolUsageError(f"identifier {v} is not free")
        # inline unlink from the free list and push on the in-use list
        pred = self.pred
        succ = self.succ
        p = pred[v]
        s = succ[v]
        if s != NIL:
            pred[s] = p
        if p >= 0:
            succ[p] = s
        else:
            self.first[FREE] = s
        head = self.first[IN_USE]
        pred[v] = -2 - IN_USE
        succ[v] = head
        if head != NIL:
            pred[head] = v
        self.first[IN_USE] = v
        self.used[v] = 1
        return v

    def release(self, v: int) -> None:
        self._check_value(v)
        if not self.used[v]:
            raise PoolUsageError(f"identifier {v} is not in use")
        pred = self.pred
        succ = self.succ
        p = pred[v]
        s = succ[v]
        if s != NIL:
            pred[s] = p
        if p >= 0:
            succ[p] = s
        else:
            self.first[IN_USE] = s
        head = self.first[FREE]
        pred[v] = -2 - FREE
        succ[v] = head
        if head != NIL:
            pred[head] = v
        self.first[FREE] = v
        self.used[v] = 0

    def in_use(self, v: int) -> bool:
        return 0 <= v < self.m and self.used[v] == 1

    def in_use_ids(self) -> Iterator[int]:
        return MultiList.iter(self, IN_USE)

    def count_in_use(self) -> int:
        return sum(self.used)
