"""Serializable clustering report."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

SCHEMA = 1


@dataclass
class ClusterSummary:
    cluster: int
    centroid: list  # D x T
    members: list  # entity ids
    q: list  # shift per member
    alpha: list  # per member, one scale per dimension
    burstiness: float | None = None
    memory: float | None = None
    popularity: list = field(default_factory=list)
    splitter_score: float | None = None


@dataclass
class ClusteringReport:
    config: dict
    K_final: int
    clusters: list
    objective: float
    iterations: int
    converged: bool
    split_history: list = field(default_factory=list)
    cap_reached: bool = False
    dimensions: list = field(default_factory=list)
    entities: list = field(default_factory=list)  # all entity ids, input order
    timing: dict | None = None
    schema: int = SCHEMA

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["timing"] is None:
            del d["timing"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ClusteringReport":
        d = dict(d)
        if d.get("schema", SCHEMA) != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        d["clusters"] = [ClusterSummary(**c) for c in d["clusters"]]
        d.setdefault("timing", None)
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ClusteringReport":
        return cls.from_dict(json.loads(text))

    def labels(self, entity_ids) -> list:
        """Cluster index of every entity in ``entity_ids`` order."""
        where = {e: s.cluster for s in self.clusters for e in s.members}
        return [where[e] for e in entity_ids]
