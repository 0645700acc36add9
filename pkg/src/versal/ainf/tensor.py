"""Bar-construction engine shared by categories, functors and Hochschild cochains.

A *word* is ``(L0, ids)``: a start object and a composable tuple of morphism
ids, ``ids[k]`` running from the ``k``-th to the ``(k+1)``-th object.  A
*tensor* is a dict ``word -> coefficient``.  A *family* is a pair
``(ops, curvature)`` with ``ops[s][ids] -> vector`` and
``curvature[obj] -> vector``; vectors are ``{id: coefficient}`` dicts.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from ..linalg import axpy


def objects_along(cat, L0, ids):
    objs = [L0]
    for a in ids:
        objs.append(cat.tgt[a])
    return objs


def _add(T, key, c):
    v = T.get(key, 0) + c
    if v:
        T[key] = v
    else:
        T.pop(key, None)


def coderivation(cat, ops, curvature, T, parity, max_arity=None):
    """Extend ``(ops, curvature)`` to the tensor coalgebra and apply to ``T``.

    Sums ``(-1)^(parity * red(a_1..a_i)) a_1..a_i (x) M(a_(i+1)..a_(i+j)) (x) ...``
    over all ``i`` and ``j >= 0``; ``red`` is the sum of reduced degrees.
    """
    out = {}
    for (L0, ids), c in T.items():
        n = len(ids)
        objs = objects_along(cat, L0, ids)
        red = 0
        for i in range(n + 1):
            sign = -1 if parity % 2 and red % 2 else 1
            # j = 0: curvature at objs[i]
            cur = curvature.get(objs[i]) if curvature else None
            if cur:
                for o, v in cur.items():
                    _add(out, (L0, ids[:i] + (o,) + ids[i:]), sign * v * c)
            for j in range(1, n - i + 1):
                if max_arity is not None and j > max_arity:
                    break
                table = ops.get(j)
                if not table:
                    continue
                val = table.get(ids[i:i + j])
                if not val:
                    continue
                for o, v in val.items():
                    _add(out, (L0, ids[:i] + (o,) + ids[i + j:]), sign * v * c)
            if i < n:
                red += cat.deg[ids[i]] + 1
    return out


def apply_family(ops, curvature, T):
    """``sum_w c_w M^|w|(w)``, a vector."""
    out = {}
    for (L0, ids), c in T.items():
        if ids:
            table = ops.get(len(ids))
            val = table.get(ids) if table else None
        else:
            val = curvature.get(L0) if curvature else None
        if val:
            axpy(out, c, val)
    return out


def _expand(vectors, c):
    """Tensor product of vectors as ``{ids: coefficient}``."""
    out = {}
    for combo in product(*[list(v.items()) for v in vectors]):
        coef = c
        for _, x in combo:
            coef = coef * x
        if coef:
            key = tuple(i for i, _ in combo)
            _add(out, key, coef)
    return out


def coalgebra_map(cat, fun, T, max_blocks, exact_blocks=None):
    """Apply the coalgebra morphism ``F^`` of a functor to ``T``.

    ``fun`` has ``components[s][ids] -> vector``, ``curvature[obj] -> vector``
    (the ``F^0`` terms) and ``obj_map``.  Words are cut into consecutive
    blocks (empty blocks only where ``F^0`` is nonzero), at most
    ``max_blocks`` of them; ``exact_blocks`` restricts to that block count.
    """
    comps, f0, omap = fun.components, fun.curvature, fun.obj_map
    out = {}
    for (L0, ids), c in T.items():
        n = len(ids)
        objs = objects_along(cat, L0, ids)
        start = omap[L0]

        def rec(p, blocks):
            if p == n and (exact_blocks is None or len(blocks) == exact_blocks):
                for key, v in _expand(blocks, c).items():
                    _add(out, (start, key), v)
            if len(blocks) >= max_blocks:
                return
            z = f0.get(objs[p]) if f0 else None
            if z:
                blocks.append(z)
                rec(p, blocks)
                blocks.pop()
            for q in range(p + 1, n + 1):
                table = comps.get(q - p)
                val = table.get(ids[p:q]) if table else None
                if val:
                    blocks.append(val)
                    rec(q, blocks)
                    blocks.pop()

        rec(0, [])
    return out


def unit_word(cat, ids, L0=None):
    if not ids:
        return {(L0, ()): Fraction(1)}
    return {(cat.src[ids[0]], tuple(ids)): Fraction(1)}
