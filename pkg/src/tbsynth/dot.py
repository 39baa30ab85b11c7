"""DOT source for explored automata, arenas and controllers."""

from collections.abc import Iterable, Mapping

from graphviz import Digraph

Attributes = Mapping[str, str]


def digraph(
    name: str,
    nodes: Iterable[tuple[str, Attributes]],
    edges: Iterable[tuple[str, str, Attributes]],
    graph: Attributes | None = None,
) -> str:
    """Render a directed graph without invoking the Graphviz binaries.

    Args:
        name: Graph name.
        nodes: Node identifiers with their attributes, in output order.
        edges: ``(source, target, attributes)`` triples, in output order.
        graph: Graph-level attributes.

    Returns:
        The DOT source text.
    """
    dot = Digraph(name=name, graph_attr=dict(graph or {}))
    for node, attrs in nodes:
        dot.node(node, **attrs)
    for source, target, attrs in edges:
        dot.edge(source, target, **attrs)
    return dot.source
