"""Standalone re-validation of equivariant map witnesses.

Deliberately independent of the search engine: it rebuilds the target
simplex table from the raw level data and walks every source simplex and
vertex from scratch.  Certificates are only trusted after passing this.
"""

from __future__ import annotations

from .simplicial import FreeZpComplex


def check_vertex_map(source: FreeZpComplex, target: FreeZpComplex,
                     vertex_map) -> list[str]:
    """Return a list of human-readable problems; empty means verified."""
    problems = []
    if source.action.p != target.action.p:
        problems.append(f"prime mismatch: {source.action.p} vs {target.action.p}")
    if len(vertex_map) != source.complex.vertex_count:
        problems.append(
            f"vertex_map length {len(vertex_map)} != source vertex count "
            f"{source.complex.vertex_count}"
        )
        return problems
    n_target = target.complex.vertex_count
    for v, t in enumerate(vertex_map):
        if not 0 <= t < n_target:
            problems.append(f"vertex {v} mapped outside target range: {t}")
    if problems:
        return problems

    table = set()
    for level in target.complex.by_dim:
        for s in level:
            table.add(tuple(s))

    for level in source.complex.by_dim:
        for s in level:
            image = tuple(sorted({vertex_map[v] for v in s}))
            if image not in table:
                problems.append(f"image {image} of simplex {s} is not a target simplex")

    sp = source.action.perm
    tp = target.action.perm
    for v in range(source.complex.vertex_count):
        if vertex_map[sp[v]] != tp[vertex_map[v]]:
            problems.append(
                f"equivariance fails at vertex {v}: "
                f"map(perm({v}))={vertex_map[sp[v]]} but perm(map({v}))={tp[vertex_map[v]]}"
            )
    return problems
