"""Seeded random plain expressions of an exact size.

Every tree with n nodes is equally likely. Leaves are the letters (and 1 when
with_one is set); every node, leaf or operator, counts 1 toward the size, so
for the default leaf set the size equals the expression's letter+operator
size. A node of remaining size n is a leaf when n = 1, otherwise a star over
n - 1 or a union/concatenation splitting n - 1 between two operands, each
choice weighted by the number of trees it leads to.

Tree counts grow exponentially, so they are kept scaled by rho**n where rho
is the radius of convergence of their generating function; the scaled
counts behave like n**-1.5 and stay well inside float range.
"""

from __future__ import annotations

import math
import random

import numpy as np

from .plain import CONCAT, LETTER, ONE_E, STAR, UNION, Plain

# kinds chosen at an inner node
_LEAF, _STAR, _UNION, _CONCAT = range(4)


def _radius(n_leaves: int) -> float:
    # T = k z + z T + 2 z T^2 has a square-root singularity where
    # (1 - z)^2 = 8 k z^2, i.e. z = 1 / (1 + sqrt(8 k))
    return 1.0 / (1.0 + math.sqrt(8 * n_leaves))


class ExprGenerator:
    """Uniform random plain expressions of exact size 1..max_size."""

    def __init__(self, nl: int = 2, max_size: int = 64, seed: int = 0,
                 with_one: bool = False):
        if max_size < 1:
            raise ValueError("max_size must be at least 1")
        self.nl = nl
        self.max_size = max_size
        self.rng = random.Random(seed)
        self.leaves: list[Plain] = [(LETTER, x) for x in range(nl)]
        if with_one:
            self.leaves.append(ONE_E)
        k = len(self.leaves)
        rho = _radius(k)
        u = np.zeros(max_size + 1)
        conv = np.zeros(max_size + 1)   # conv[n] = sum_k u[k] u[n-k]
        for n in range(1, max_size + 1):
            u[n] = rho * (u[n - 1] + 2.0 * conv[n - 1] + (k if n == 1 else 0))
            conv[n] = float(np.dot(u[: n + 1], u[n::-1]))
        self.rho = rho
        self.u = u.tolist()
        self.conv = conv.tolist()

    def count_ratio(self, n: int) -> float:
        """Scaled number of trees of size n (for tests)."""
        return self.u[n]

    def _kind(self, n: int) -> int:
        if n == 1:
            return _LEAF
        u = self.u
        rho = self.rho
        r = self.rng.random() * u[n]
        r -= rho * u[n - 1]
        if r < 0:
            return _STAR
        return _UNION if r < rho * self.conv[n - 1] else _CONCAT

    def _split(self, n: int) -> int:
        """Size of the left operand of a binary node of size n."""
        u = self.u
        m = n - 1
        r = self.rng.random() * self.conv[m]
        lo, hi = 1, m - 1
        while lo < hi:
            # the weights u[k] u[m-k] are largest at both ends
            w = u[lo] * u[m - lo]
            r -= w
            if r < 0:
                return lo
            r -= w
            if r < 0:
                return hi
            lo += 1
            hi -= 1
        return lo

    def generate(self, n: int) -> Plain:
        if not 1 <= n <= self.max_size:
            raise ValueError(f"size {n} outside 1..{self.max_size}")
        rng = self.rng
        out: list = []
        # negative entries are pending constructors, others sizes to expand
        stack = [n]
        while stack:
            item = stack.pop()
            if item < 0:
                t = -item
                if t == STAR:
                    out[-1] = (STAR, out[-1])
                else:
                    r = out.pop()
                    out[-1] = (t, out[-1], r)
                continue
            kind = self._kind(item)
            if kind == _LEAF:
                out.append(rng.choice(self.leaves))
            elif kind == _STAR:
                stack.append(-STAR)
                stack.append(item - 1)
            else:
                k = self._split(item)
                stack.append(-(UNION if kind == _UNION else CONCAT))
                stack.append(item - 1 - k)
                stack.append(k)
        return out[0]

    def corpus(self, n: int, count: int) -> list[Plain]:
        return [self.generate(n) for _ in range(count)]


def node_count(e: Plain) -> int:
    """Number of nodes of a plain tree (its size under the generator's measure)."""
    n = 0
    stack = [e]
    while stack:
        x = stack.pop()
        n += 1
        if x[0] == STAR:
            stack.append(x[1])
        elif x[0] >= UNION:
            stack.append(x[1])
            stack.append(x[2])
    return n
