"""Signed permutation matrices ``L = P @ S`` for axis relabels and sign flips.

Row ``i`` of ``L`` has its single nonzero entry in column ``pi(i)`` with
value ``s_i``, so ``(L @ M)`` row ``i`` is ``s_i`` times row ``pi(i)`` of
``M``.  In mapping-string form that reads ``A<i> -> <s_i>B<pi(i)>``.
"""

import itertools
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidMapping
from .tbv import TbvTriple

AXES = "xyz"


@dataclass(frozen=True)
class SignedPermutation:
    perm: tuple  # perm[i] = source axis paired with target axis i
    signs: tuple  # signs[i] in {-1, +1}

    @property
    def matrix(self):
        m = np.zeros((3, 3), dtype=np.int64)
        for i, (j, s) in enumerate(zip(self.perm, self.signs)):
            m[i, j] = s
        return m

    @property
    def det(self):
        return permutation_parity(self.perm) * self.signs[0] * self.signs[1] * self.signs[2]

    @property
    def proper(self):
        return self.det == 1

    def __str__(self):
        return to_mapping(self)

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m)
        if m.shape != (3, 3):
            raise InvalidMapping("signed permutation must be 3x3")
        r = np.rint(m).astype(np.int64)
        if not np.array_equal(r, m) or not np.all(np.isin(r, (-1, 0, 1))):
            raise InvalidMapping("entries must be -1, 0 or +1")
        if not (np.all(np.abs(r).sum(axis=0) == 1) and np.all(np.abs(r).sum(axis=1) == 1)):
            raise InvalidMapping("need exactly one nonzero per row and column")
        perm = tuple(int(np.flatnonzero(row)[0]) for row in r)
        signs = tuple(int(r[i, perm[i]]) for i in range(3))
        return cls(perm, signs)


IDENTITY = SignedPermutation((0, 1, 2), (1, 1, 1))


def permutation_parity(perm):
    inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
    return -1 if inversions % 2 else 1


def enumerate_signed_permutations(proper_only=True):
    """All 48 signed permutations, or the 24 with determinant +1.

    Order is lexicographic on ``(perm, signs)`` with ``+1`` before ``-1``,
    so the identity comes first.
    """
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            sp = SignedPermutation(perm, signs)
            if proper_only and not sp.proper:
                continue
            out.append(sp)
    return out


_TERM = re.compile(r"^A([xyz])->([+-]?)B([xyz])$")


def from_mapping(spec):
    """Parse ``"Ax->-By, Ay->+Bx, Az->+Bz"`` into a SignedPermutation.

    Whitespace is ignored, ``→`` is accepted for ``->``, and a missing sign
    means ``+``.
    """
    text = re.sub(r"\s+", "", spec).replace("→", "->").replace("−", "-")
    terms = [t for t in text.split(",") if t]
    if len(terms) != 3:
        raise InvalidMapping(f"expected three comma-separated terms, got {spec!r}")
    perm = [None] * 3
    signs = [None] * 3
    for term in terms:
        m = _TERM.match(term)
        if not m:
            raise InvalidMapping(f"cannot parse mapping term {term!r}")
        i, sign, j = AXES.index(m.group(1)), m.group(2), AXES.index(m.group(3))
        if perm[i] is not None:
            raise InvalidMapping(f"target axis A{AXES[i]} mapped twice")
        perm[i] = j
        signs[i] = -1 if sign == "-" else 1
    if sorted(perm) != [0, 1, 2]:
        raise InvalidMapping(f"each source axis must be used exactly once in {spec!r}")
    return SignedPermutation(tuple(perm), tuple(signs))


def to_mapping(sp):
    return ", ".join(
        f"A{AXES[i]}->{'+' if s > 0 else '-'}B{AXES[j]}" for i, (j, s) in enumerate(zip(sp.perm, sp.signs))
    )


def apply_to_triple(sp, t):
    """Output axis ``i`` holds ``signs[i] * t[perm[i]]``."""
    return TbvTriple(*(s * t[j] for j, s in zip(sp.perm, sp.signs)))
