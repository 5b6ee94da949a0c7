"""Words in the genus-2 surface group.

Letters ``a b c d`` are the four side-pairing generators, upper case their
inverses.  With the opposite-side pairing of the regular octagon the
single defining relator is ``aBcDAbCd``; in the generators
``a, B, Bac, Dc`` it is the product of commutators ``[a', b'][c', d']``.
"""
from __future__ import annotations

GENERATORS = "abcd"
ALPHABET = "abcdABCD"
RELATOR = "aBcDAbCd"
# a' = a, b' = B, c' = Bac, d' = Dc  =>  [a',b'][c',d'] freely reduces to RELATOR
COMMUTATOR_GENERATORS = ("a", "B", "Bac", "Dc")


def inverse(w: str) -> str:
    return w[::-1].swapcase()


def free_reduce(w: str) -> str:
    out: list[str] = []
    for ch in w:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def commutator(u: str, v: str) -> str:
    return u + v + inverse(u) + inverse(v)


def _relator_table(relator: str = RELATOR) -> dict[str, str]:
    """Map every subword longer than half a cyclic relator to its shorter complement."""
    n = len(relator)
    table: dict[str, str] = {}
    for r in (relator, inverse(relator)):
        for i in range(n):
            cyc = r[i:] + r[:i]
            for k in range(n // 2 + 1, n + 1):
                piece, rest = cyc[:k], cyc[k:]
                # piece * rest = 1  =>  piece = rest^-1
                table.setdefault(piece, inverse(rest))
    return table


_TABLE = _relator_table()
_LENGTHS = sorted({len(k) for k in _TABLE}, reverse=True)


def dehn_reduce(w: str) -> str:
    """Dehn's algorithm: shorten until no long relator piece remains.

    Returns the empty word iff ``w`` is trivial in the group (the octagon
    presentation satisfies C'(1/7), so Dehn's algorithm decides the word
    problem).
    """
    w = free_reduce(w)
    changed = True
    while changed:
        changed = False
        for L in _LENGTHS:
            if L > len(w):
                continue
            for i in range(len(w) - L + 1):
                sub = w[i:i + L]
                rep = _TABLE.get(sub)
                if rep is not None:
                    w = free_reduce(w[:i] + rep + w[i + L:])
                    changed = True
                    break
            if changed:
                break
    return w


def is_freely_reduced(w: str) -> bool:
    return all(w[i] != w[i + 1].swapcase() for i in range(len(w) - 1))


def is_dehn_reduced(w: str) -> bool:
    return is_freely_reduced(w) and not any(
        w[i:i + L] in _TABLE for L in _LENGTHS for i in range(len(w) - L + 1))
