"""Model bundle serialization: clusters, activity HMMs and prediction rules in one JSON document"""

import json
import math
import os
from typing import Any, Sequence

import numpy as np

from .activity_hmm import ActivityHMM, validate_stochastic
from .constants import BUNDLE_SCHEMA_VERSION, CLUSTERS_SCHEMA_VERSION
from .exceptions import BundleError, BundleSchemaError, DataError
from .shal_types import Cluster, EventTypeKey
from .tpminer import PredictionRule
from .utils import atomic_write_text, get_logger, read_text

logger = get_logger("bundle")

ModelBundle = tuple[list[Cluster], list[ActivityHMM], list[PredictionRule]]


def _check_finite(values: Any, where: str) -> None:
    if not np.all(np.isfinite(np.asarray(values, dtype=float))):
        raise BundleError(f"{where} contains NaN or infinite values")


def cluster_to_dict(cluster: Cluster) -> dict:
    return {
        "cluster_id": cluster.cluster_id,
        "members": list(cluster.members),
        "label_hint": cluster.label_hint,
    }


def cluster_from_dict(document: dict) -> Cluster:
    return Cluster(
        cluster_id=int(document["cluster_id"]),
        members=tuple(str(sid) for sid in document["members"]),
        label_hint=document.get("label_hint"),
    )


def hmm_to_dict(model: ActivityHMM) -> dict:
    """Row-major matrices; json writes floats with round-trip precision"""
    return {
        "cluster_id": model.cluster_id,
        "states": [str(key) for key in model.states],
        "vocabulary": [str(key) for key in model.vocabulary],
        "transition": model.transition.tolist(),
        "emission": model.emission.tolist(),
        "initial": model.initial.tolist(),
        "emission_floor": model.emission_floor,
    }


def hmm_from_dict(document: dict, where: str) -> ActivityHMM:
    transition = np.array(document["transition"], dtype=float)
    emission = np.array(document["emission"], dtype=float)
    initial = np.array(document["initial"], dtype=float)
    validate_stochastic(transition, f"{where}.transition")
    validate_stochastic(emission, f"{where}.emission")
    validate_stochastic(initial, f"{where}.initial")
    return ActivityHMM(
        cluster_id=int(document["cluster_id"]),
        states=tuple(EventTypeKey.parse(text) for text in document["states"]),
        vocabulary=tuple(EventTypeKey.parse(text) for text in document["vocabulary"]),
        transition=transition,
        emission=emission,
        initial=initial,
        emission_floor=float(document["emission_floor"]),
    )


def _check_consistency(clusters: Sequence[Cluster], hmms: Sequence[ActivityHMM]) -> None:
    cluster_ids = [cluster.cluster_id for cluster in clusters]
    if len(set(cluster_ids)) != len(cluster_ids):
        raise BundleError("cluster ids must be unique")
    members = [sid for cluster in clusters for sid in cluster.members]
    if len(set(members)) != len(members):
        raise BundleError("an occurrence belongs to more than one cluster")
    if clusters:
        missing = sorted({model.cluster_id for model in hmms} - set(cluster_ids))
        if missing:
            raise BundleError(f"models reference unknown cluster ids {missing}")


def write_model_bundle(
    clusters: Sequence[Cluster],
    hmms: Sequence[ActivityHMM],
    rules: Sequence[PredictionRule],
    path: str,
) -> None:
    """
    Save a model bundle as one self-describing JSON document.

    Raises:
        BundleError: If the inputs are inconsistent, a probability is NaN or
            infinite, or path cannot be written
    """
    _check_consistency(clusters, hmms)
    for i, model in enumerate(hmms):
        for name in ("transition", "emission", "initial"):
            _check_finite(getattr(model, name), f"hmms[{i}].{name}")
    for i, rule in enumerate(rules):
        if not math.isfinite(rule.predictability):
            raise BundleError(f"rules[{i}].predictability is not finite")

    document = {
        "schema_version": BUNDLE_SCHEMA_VERSION,
        "clusters": [cluster_to_dict(cluster) for cluster in clusters],
        "hmms": [hmm_to_dict(model) for model in hmms],
        "rules": [rule.to_json() for rule in rules],
    }
    try:
        atomic_write_text(path, json.dumps(document, indent=2, allow_nan=False) + "\n")
    except OSError as e:
        raise BundleError(f"cannot write model bundle {path}: {e}") from e
    logger.info(
        "Bundle: wrote %d clusters, %d models, %d rules to %s",
        len(clusters), len(hmms), len(rules), os.path.basename(path),
    )


def read_model_bundle(path: str) -> ModelBundle:
    """
    Load a model bundle written by write_model_bundle.

    Raises:
        BundleError: If the file is missing
        BundleSchemaError: If the document is truncated, malformed or has
            another schema version
        NormalizationError: If a probability row does not sum to one
    """
    try:
        text = read_text(path)
    except FileNotFoundError as e:
        raise BundleError(f"model bundle {path} does not exist") from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise BundleSchemaError(f"{path}: not a complete JSON document ({e})") from e
    if not isinstance(document, dict):
        raise BundleSchemaError(f"{path}: expected a JSON object")
    version = document.get("schema_version")
    if version != BUNDLE_SCHEMA_VERSION:
        raise BundleSchemaError(f"{path}: schema_version {version!r}, expected {BUNDLE_SCHEMA_VERSION}")
    for key in ("clusters", "hmms", "rules"):
        if not isinstance(document.get(key), list):
            raise BundleSchemaError(f"{path}: missing list {key!r}")

    try:
        clusters = [cluster_from_dict(item) for item in document["clusters"]]
        hmms = [hmm_from_dict(item, f"hmms[{i}]") for i, item in enumerate(document["hmms"])]
        rules = [PredictionRule.from_json(item) for item in document["rules"]]
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, DataError):
            raise
        raise BundleSchemaError(f"{path}: malformed entry ({e})") from e
    _check_consistency(clusters, hmms)
    return clusters, hmms, rules


def write_clusters(path: str, clusters: Sequence[Cluster], rho: float, purities: dict[int, float | None]) -> None:
    """Save a clustering result with per-cluster purity where labels exist"""
    document = {
        "schema_version": CLUSTERS_SCHEMA_VERSION,
        "rho": rho,
        "clusters": [
            {**cluster_to_dict(cluster), "size": len(cluster.members), "purity": purities.get(cluster.cluster_id)}
            for cluster in clusters
        ],
    }
    atomic_write_text(path, json.dumps(document, indent=2, allow_nan=False) + "\n")


def read_clusters(path: str) -> list[Cluster]:
    """Load clusters from a clustering result or from a model bundle"""
    try:
        document = json.loads(read_text(path))
        clusters = [cluster_from_dict(item) for item in document["clusters"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        if isinstance(e, DataError):
            raise
        raise DataError(f"{path}: malformed cluster file ({e})") from e
    _check_consistency(clusters, [])
    return clusters
