"""Bracket assembly shared by the elliptic, vector-bundle and exact pipelines.

Every space built here has the shape ``V = sum_A F_A (x) X_A`` where ``X_A``
runs over a basis of sl_n and ``F_A`` is a space of scalar functions.  A
commutator of two basis elements ``f X_A`` and ``g X_B`` is ``f g [X_A, X_B]``,
so one scalar decomposition per sl_n structure constant is all that is
needed.  The arithmetic is generic: floats, ``Fraction`` or exact cyclotomic
numbers all flow through unchanged.
"""
from __future__ import annotations

from typing import Callable, Hashable, Sequence


def assemble_brackets(
    labels: Sequence[tuple[Hashable, int]],
    sl_table: Callable[[Hashable, Hashable], list],
    decompose: Callable[[Hashable, int, Hashable, int, Hashable], Sequence[Sequence]],
    n_brackets: int,
) -> list[dict]:
    """Sparse structure constants ``{(a, b, c): value}`` for each bracket.

    ``labels[a] = (A, i)`` names the basis element ``f_{A,i} X_A``;
    ``sl_table(A, B)`` lists ``(C, coeff)`` with ``[X_A, X_B] = sum coeff X_C``;
    ``decompose(A, i, B, j, C)`` returns, for each bracket, the coordinates of
    the product ``f_{A,i} f_{B,j}`` in ``F_C``.
    """
    index = {lab: a for a, lab in enumerate(labels)}
    out: list[dict] = [dict() for _ in range(n_brackets)]
    for a, (A, i) in enumerate(labels):
        for b, (B, j) in enumerate(labels):
            for C, coeff in sl_table(A, B):
                if coeff == 0:
                    continue
                parts = decompose(A, i, B, j, C)
                for r in range(n_brackets):
                    for l, val in enumerate(parts[r]):
                        if val == 0:
                            continue
                        key = (a, b, index[(C, l)])
                        out[r][key] = out[r].get(key, 0) + coeff * val
    return out
