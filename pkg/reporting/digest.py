"""
Digest - Canonical Fingerprint of Report Results
Two runs with the same configuration must produce the same digest whatever
the worker count
"""
import hashlib
import json
from typing import Any


def canonical_json(data: Any) -> str:
    """Key-sorted, whitespace-free JSON"""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def results_digest(results: list) -> str:
    """
    SHA-256 of the canonical JSON of the results array

    Args:
        results: report entries (timing and worker count are not part of them)

    Returns:
        str: hexadecimal digest
    """
    return hashlib.sha256(canonical_json(results).encode("utf-8")).hexdigest()


def verify_digest(report: dict) -> bool:
    return results_digest(report.get("results", [])) == report.get("digest")
