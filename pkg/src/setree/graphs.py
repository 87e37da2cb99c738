"""Flat-file graph-classification datasets and initial vertex labeling."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property


DEGREE = "degree"
DEGREE_CATEGORY = "degree-category"
LABEL_MODES = (DEGREE, DEGREE_CATEGORY)


class DatasetParseError(ValueError):
    """A dataset file is missing or malformed; message names file and line."""


class DegenerateGraphError(ValueError):
    """The graph has no edges (zero volume), so entropy is undefined."""


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph with optional categorical vertex labels.

    Each edge is stored exactly once as (u, v, weight) with u < v and
    weight > 0; self-loops are rejected at construction.  ``degree`` holds
    weighted degrees, so sum(degree) == 2 * total edge weight.
    """

    vertex_count: int
    edges: tuple[tuple[int, int, float], ...]
    degree: tuple[float, ...]
    categorical_label: tuple[int, ...] | None
    graph_class: int

    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        edges,
        categorical_label=None,
        graph_class: int = 0,
    ) -> "Graph":
        """Normalize an edge list (dedupe, orient u < v) and compute degrees."""
        seen: dict[tuple[int, int], float] = {}
        for edge in edges:
            if len(edge) == 2:
                u, v, w = edge[0], edge[1], 1.0
            else:
                u, v, w = edge
            if u == v:
                raise DatasetParseError(f"self-loop at vertex {u}")
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise DatasetParseError(f"edge ({u}, {v}) outside vertex range [0, {vertex_count})")
            if w <= 0:
                raise DatasetParseError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (u, v) if u < v else (v, u)
            prior = seen.get(key)
            if prior is not None and prior != w:
                raise DatasetParseError(f"edge ({u}, {v}) seen with conflicting weights {prior} and {w}")
            seen[key] = w
        degree = [0.0] * vertex_count
        for (u, v), w in seen.items():
            degree[u] += w
            degree[v] += w
        if categorical_label is not None:
            categorical_label = tuple(categorical_label)
            if len(categorical_label) != vertex_count:
                raise DatasetParseError("categorical label count does not match vertex count")
        return cls(
            vertex_count=vertex_count,
            edges=tuple(sorted((u, v, w) for (u, v), w in seen.items())),
            degree=tuple(degree),
            categorical_label=categorical_label,
            graph_class=graph_class,
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def volume(self) -> float:
        """vol(V): total weighted degree, i.e. twice the total edge weight."""
        return sum(self.degree)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per-vertex list of (neighbor, weight) pairs, neighbor-sorted."""
        nbrs: list[list[tuple[int, float]]] = [[] for _ in range(self.vertex_count)]
        for u, v, w in self.edges:
            nbrs[u].append((v, w))
            nbrs[v].append((u, w))
        return tuple(tuple(sorted(n)) for n in nbrs)

    def connected_components(self) -> list[list[int]]:
        """Components as sorted vertex lists, ordered by smallest member.

        Isolated (degree-0) vertices come back as singleton components.
        """
        seen = [False] * self.vertex_count
        components = []
        for start in range(self.vertex_count):
            if seen[start]:
                continue
            seen[start] = True
            queue = [start]
            comp = []
            while queue:
                u = queue.pop()
                comp.append(u)
                for v, _ in self.adjacency[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            components.append(sorted(comp))
        return components

    def is_connected(self) -> bool:
        return len(self.connected_components()) <= 1


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of graphs with dense class ids [0, class_count)."""

    name: str
    graphs: tuple[Graph, ...]
    class_count: int

    def __post_init__(self):
        if not self.graphs:
            raise DatasetParseError(f"dataset {self.name!r} contains no graphs")
        for i, g in enumerate(self.graphs):
            if not (0 <= g.graph_class < self.class_count):
                raise DatasetParseError(
                    f"graph {i} has class {g.graph_class} outside [0, {self.class_count})"
                )

    def __len__(self) -> int:
        return len(self.graphs)


@dataclass(frozen=True)
class InitialLabeling:
    """Per-vertex initial label ids for one graph.

    Ids come from a table shared across the whole dataset, so equal
    (degree[, category]) tuples map to equal ids in every graph.
    """

    mode: str
    label_of: tuple[int, ...]


def _read_int_lines(path: str) -> list[int]:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(int(text))
            except ValueError:
                raise DatasetParseError(f"{path}:{lineno}: expected an integer, got {text!r}") from None
    return values


def parse_tudataset(dir_path: str, name: str) -> Dataset:
    """Parse the flat-file layout ``<name>_A.txt`` / ``_graph_indicator.txt`` /
    ``_graph_labels.txt`` (+ optional ``_node_labels.txt``) into a Dataset.

    Vertex ids are 1-indexed in the files and renumbered per graph from 0;
    duplicate directions of an undirected edge collapse to one edge; graph
    class labels are remapped to a dense [0, class_count) range by sorted
    original value.
    """
    def fpath(suffix: str) -> str:
        return os.path.join(dir_path, f"{name}_{suffix}.txt")

    for suffix in ("A", "graph_indicator", "graph_labels"):
        if not os.path.isfile(fpath(suffix)):
            raise DatasetParseError(f"missing mandatory file: {fpath(suffix)}")

    indicator = _read_int_lines(fpath("graph_indicator"))
    if not indicator:
        raise DatasetParseError(f"{fpath('graph_indicator')}: empty indicator file")
    graph_ids = sorted(set(indicator))
    graph_index = {gid: i for i, gid in enumerate(graph_ids)}

    # Global 1-indexed vertex -> (graph index, local 0-indexed vertex).
    local_id: list[tuple[int, int]] = []
    counts = [0] * len(graph_ids)
    for gid in indicator:
        gi = graph_index[gid]
        local_id.append((gi, counts[gi]))
        counts[gi] += 1

    raw_classes = _read_int_lines(fpath("graph_labels"))
    if len(raw_classes) != len(graph_ids):
        raise DatasetParseError(
            f"{fpath('graph_labels')}: {len(raw_classes)} labels for {len(graph_ids)} graphs"
        )
    class_map = {c: i for i, c in enumerate(sorted(set(raw_classes)))}

    node_labels: list[int] | None = None
    if os.path.isfile(fpath("node_labels")):
        node_labels = _read_int_lines(fpath("node_labels"))
        if len(node_labels) != len(indicator):
            raise DatasetParseError(
                f"{fpath('node_labels')}: {len(node_labels)} labels for {len(indicator)} vertices"
            )

    edges_per_graph: list[list[tuple[int, int]]] = [[] for _ in graph_ids]
    a_path = fpath("A")
    with open(a_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise DatasetParseError(f"{a_path}:{lineno}: expected 'u, v', got {text!r}")
            try:
                gu, gv = int(parts[0]), int(parts[1])
            except ValueError:
                raise DatasetParseError(f"{a_path}:{lineno}: expected integers, got {text!r}") from None
            if not (1 <= gu <= len(indicator) and 1 <= gv <= len(indicator)):
                raise DatasetParseError(f"{a_path}:{lineno}: vertex id outside 1..{len(indicator)}")
            if gu == gv:
                raise DatasetParseError(f"{a_path}:{lineno}: self-loop at vertex {gu}")
            (gi_u, lu), (gi_v, lv) = local_id[gu - 1], local_id[gv - 1]
            if gi_u != gi_v:
                raise DatasetParseError(f"{a_path}:{lineno}: edge ({gu}, {gv}) crosses graphs")
            edges_per_graph[gi_u].append((lu, lv))

    graphs = []
    for gi in range(len(graph_ids)):
        cats = None
        if node_labels is not None:
            cats = [0] * counts[gi]
            for global_v, (g, lv) in enumerate(local_id):
                if g == gi:
                    cats[lv] = node_labels[global_v]
        try:
            graphs.append(
                Graph.from_edges(
                    vertex_count=counts[gi],
                    edges=edges_per_graph[gi],
                    categorical_label=cats,
                    graph_class=class_map[raw_classes[gi]],
                )
            )
        except DatasetParseError as exc:
            raise DatasetParseError(f"{name} graph {gi}: {exc}") from None

    return Dataset(name=name, graphs=tuple(graphs), class_count=len(class_map))


def write_tudataset(dataset: Dataset, dir_path: str, name: str) -> None:
    """Serialize back to the flat-file layout (both edge directions written)."""
    os.makedirs(dir_path, exist_ok=True)
    offset = 0
    a_lines, ind_lines, cls_lines, node_lines = [], [], [], []
    has_cats = all(g.categorical_label is not None for g in dataset.graphs)
    for gi, g in enumerate(dataset.graphs, start=1):
        for v in range(g.vertex_count):
            ind_lines.append(str(gi))
            if has_cats:
                node_lines.append(str(g.categorical_label[v]))
        for u, v, _ in g.edges:
            a_lines.append(f"{offset + u + 1}, {offset + v + 1}")
            a_lines.append(f"{offset + v + 1}, {offset + u + 1}")
        cls_lines.append(str(g.graph_class))
        offset += g.vertex_count
    for suffix, lines in (
        ("A", a_lines),
        ("graph_indicator", ind_lines),
        ("graph_labels", cls_lines),
    ):
        with open(os.path.join(dir_path, f"{name}_{suffix}.txt"), "w") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))
    if has_cats:
        with open(os.path.join(dir_path, f"{name}_node_labels.txt"), "w") as fh:
            fh.write("\n".join(node_lines) + ("\n" if node_lines else ""))


def assign_initial_labels(dataset: Dataset, mode: str = DEGREE) -> list[InitialLabeling]:
    """Initial per-vertex labels: degree, or interned (degree, category) pairs.

    The intern table is shared across the dataset, so structurally identical
    vertices in different graphs receive identical label ids.
    """
    if mode not in LABEL_MODES:
        raise ValueError(f"unknown labeling mode {mode!r}; expected one of {LABEL_MODES}")
    if mode == DEGREE_CATEGORY:
        missing = [i for i, g in enumerate(dataset.graphs) if g.categorical_label is None]
        if missing:
            raise ValueError(
                f"mode {DEGREE_CATEGORY!r} requires categorical labels; "
                f"graph {missing[0]} has none"
            )
    table: dict[tuple, int] = {}
    labelings = []
    for g in dataset.graphs:
        ids = []
        for v in range(g.vertex_count):
            key = (g.degree[v],) if mode == DEGREE else (g.degree[v], g.categorical_label[v])
            if key not in table:
                table[key] = len(table)
            ids.append(table[key])
        labelings.append(InitialLabeling(mode=mode, label_of=tuple(ids)))
    return labelings
