"""Packing certificates and the verifier every engine's output must satisfy."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import GuestGraph, SimpleGraph, norm_edge
from .errors import InputError, StaleCertificateError


def host_fingerprint(g: SimpleGraph) -> str:
    """Order-independent content hash of (n, sorted edge list)."""
    h = hashlib.sha256()
    h.update(b"packforge-host-v1\x00")
    h.update(str(g.n).encode())
    for u, v in sorted(g.edges()):
        h.update(f"\x00{u},{v}".encode())
    return h.hexdigest()


@dataclass
class PackingCertificate:
    """Per-guest injective vertex maps plus the host-edge usage they imply."""

    host_fingerprint: str
    assignments: dict[str, list[int]] = field(default_factory=dict)

    def used_edges(self, guests: list[GuestGraph]) -> list[tuple[int, int]]:
        """Multiset (as a list) of host edges consumed, guest order."""
        by_id = {g.id: g for g in guests}
        used = []
        for gid, mapping in self.assignments.items():
            guest = by_id[gid]
            for x, y in guest.graph.edges():
                used.append(norm_edge(mapping[x], mapping[y]))
        return used

    def to_json(self) -> dict:
        return {
            "host_fingerprint": self.host_fingerprint,
            "guests": [
                {"id": gid, "map": list(mapping)}
                for gid, mapping in self.assignments.items()
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PackingCertificate":
        cert = cls(host_fingerprint=obj["host_fingerprint"])
        for entry in obj["guests"]:
            gid = entry["id"]
            if gid in cert.assignments:
                raise InputError(f"duplicate guest id {gid!r} in certificate")
            cert.assignments[gid] = [int(x) for x in entry["map"]]
        return cert

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def read(cls, path) -> "PackingCertificate":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class VerifyReport:
    valid: bool
    leftover_edges: int
    violations: list[str]


def verify_packing(
    host: SimpleGraph,
    guests: list[GuestGraph],
    cert: PackingCertificate,
    max_violations: int = 50,
) -> VerifyReport:
    """Check a certificate edge by edge.

    Valid iff every per-guest map is injective, every guest edge lands on a
    host edge, and no host edge is used twice across all guests.  The
    fingerprint must match the host (stale-certificate error otherwise) and
    every certificate guest id must exist (input error otherwise).
    """
    fp = host_fingerprint(host)
    if fp != cert.host_fingerprint:
        raise StaleCertificateError(
            f"certificate fingerprint {cert.host_fingerprint[:12]}... does not "
            f"match host {fp[:12]}..."
        )
    by_id = {g.id: g for g in guests}
    if len(by_id) != len(guests):
        raise InputError("duplicate guest ids in guest list")
    for gid in cert.assignments:
        if gid not in by_id:
            raise InputError(f"certificate references unknown guest id {gid!r}")

    violations: list[str] = []

    def report(msg: str) -> None:
        if len(violations) < max_violations:
            violations.append(msg)

    used: set[tuple[int, int]] = set()
    total_guest_edges = 0
    for gid, mapping in cert.assignments.items():
        guest = by_id[gid]
        g = guest.graph
        if len(mapping) != g.n:
            report(f"guest {gid}: map covers {len(mapping)} of {g.n} vertices")
            continue
        bad_range = [x for x in mapping if not (0 <= x < host.n)]
        if bad_range:
            report(f"guest {gid}: image {bad_range[0]} outside host")
            continue
        if len(set(mapping)) != len(mapping):
            report(f"guest {gid}: map not injective")
            continue
        for x, y in g.edges():
            total_guest_edges += 1
            u, v = mapping[x], mapping[y]
            if not host.has_edge(u, v):
                report(
                    f"guest {gid}: edge ({x},{y}) -> ({u},{v}) not a host edge"
                )
                continue
            e = norm_edge(u, v)
            if e in used:
                report(f"edge reuse {e}")
            else:
                used.add(e)

    valid = not violations
    leftover = host.m - total_guest_edges if valid else host.m - len(used)
    return VerifyReport(valid=valid, leftover_edges=leftover, violations=violations)
