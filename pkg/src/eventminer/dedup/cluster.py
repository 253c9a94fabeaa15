"""Clique clustering of scored pairs and representative selection.

Edges at or above the cutoff form a graph; clusters are extracted greedily:
largest maximal clique first, ties by total edge score, then by smallest
member id. Only cliques are accepted, so every pair inside a cluster is
itself above the cutoff. The surviving article per cluster is the one with
the highest information score, location fields counting double.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace

import networkx as nx

from eventminer.geocode import GeoPoint
from eventminer.parsing import FIELD_SPECS, ExtractionRecord, TriState


@dataclass(frozen=True)
class EventCluster:
    cluster_id: str
    members: tuple[str, ...]
    representative_id: str
    mean_score: float | None  # None for singletons

    def __post_init__(self):
        if self.representative_id and self.representative_id not in self.members:
            raise ValueError("representative must be a member")


def cluster_duplicates(scored_pairs: list[tuple[str, str, float]],
                       cutoff: float,
                       all_ids: list[str] | None = None,
                       ) -> list[EventCluster]:
    """Partition articles into duplicate clusters.

    `all_ids` supplies articles that never entered any pair; they come out
    as singleton clusters. Representative ids are left empty here; use
    select_representative to fill them in.
    """
    edges: dict[tuple[str, str], float] = {}
    nodes: set[str] = set(all_ids or ())
    for a, b, score in scored_pairs:
        nodes.update((a, b))
        if score >= cutoff and a != b:
            key = (a, b) if a <= b else (b, a)
            prior = edges.get(key)
            if prior is None or score > prior:
                edges[key] = score

    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    for (a, b), score in edges.items():
        graph.add_edge(a, b, score=score)

    clusters: list[tuple[tuple[str, ...], float | None]] = []
    while graph.number_of_edges() > 0:
        best_key = None
        best_members = None
        best_sum = 0.0
        for clique in nx.find_cliques(graph):
            if len(clique) < 2:
                continue
            members = sorted(clique)
            edge_sum = sum(graph.edges[u, v]["score"]
                           for i, u in enumerate(members)
                           for v in members[i + 1:])
            key = (-len(members), -edge_sum, members)
            if best_key is None or key < best_key:
                best_key, best_members, best_sum = key, members, edge_sum
        assert best_members is not None
        k = len(best_members)
        clusters.append((tuple(best_members), best_sum / (k * (k - 1) / 2)))
        graph.remove_nodes_from(best_members)

    clusters.extend(((node,), None) for node in graph.nodes)
    clusters.sort(key=lambda c: c[0])
    return [
        EventCluster(cluster_id=f"c{i:06d}", members=members,
                     representative_id="", mean_score=mean)
        for i, (members, mean) in enumerate(clusters, start=1)
    ]


# per-field presence predicates; weight 2 wherever location information lives
def _present(record: ExtractionRecord, name: str, kind: str) -> bool:
    value = getattr(record, name)
    if kind == "tri":
        return value is not TriState.UNKNOWN
    if kind == "list":
        return bool(value)
    return value is not None


def information_score(record: ExtractionRecord,
                      point: GeoPoint | None) -> int:
    score = 0
    for _label, name, kind in FIELD_SPECS:
        if _present(record, name, kind):
            score += 2 if name == "locations" else 1
    if record.summary:
        score += 1
    if point is not None:
        score += 2
    return score


def select_representative(cluster: EventCluster,
                          records: dict[str, ExtractionRecord],
                          points: dict[str, GeoPoint | None] | None = None,
                          ) -> str:
    """Pick the member carrying the most information.

    Ties go to the earlier publication date, then the smaller article id.
    """
    if not cluster.members:
        raise ValueError("empty cluster")
    points = points or {}
    far_future = dt.date.max

    def sort_key(article_id: str):
        record = records[article_id]
        pub = record.published_date or far_future
        return (-information_score(record, points.get(article_id)),
                pub, article_id)

    return min(cluster.members, key=sort_key)


def finalize_clusters(clusters: list[EventCluster],
                      records: dict[str, ExtractionRecord],
                      points: dict[str, GeoPoint | None] | None = None,
                      ) -> list[EventCluster]:
    return [replace(c, representative_id=select_representative(c, records, points))
            for c in clusters]
