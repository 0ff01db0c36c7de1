import numpy as np
import pytest

from shal.evaluation import (
    LabeledAssignment,
    bcubed,
    correctness,
    holdout_recognition,
    parse_grid,
    sweep_report,
)
from shal.exceptions import DataError
from shal.properties import MiningConfig
from shal.shal_types import Cluster

from conftest import make_occurrence


def assignment(categories, clusters):
    sids = tuple(f"o{i}" for i in range(len(categories)))
    return LabeledAssignment(sids, tuple(categories), tuple(clusters))


def test_correctness_cases():
    a = assignment(["x", "x", "y", "y"], [0, 0, 0, 1])
    assert correctness(a, "o0", "o1") == 1
    assert correctness(a, "o0", "o2") == 0
    assert correctness(a, "o2", "o3") == 0
    assert correctness(a, "o0", "o3") == 1
    assert correctness(a, "o2", "o2") == 1
    with pytest.raises(DataError):
        correctness(a, "o0", "ghost")


def test_bcubed_perfect_and_split():
    assert bcubed(assignment(["x", "x", "y"], [0, 0, 1])) == (1.0, 1.0, 1.0)
    precision, recall, f1 = bcubed(assignment(["x", "x"], [0, 1]))
    assert (precision, recall) == (1.0, 0.5)
    assert f1 == pytest.approx(2 / 3)


def test_bcubed_merged_categories():
    precision, recall, f1 = bcubed(assignment(["x", "y"], [0, 0]))
    assert (precision, recall) == (0.5, 1.0)
    assert f1 == pytest.approx(2 / 3)


def test_bcubed_singletons_have_full_precision():
    rng = np.random.default_rng(3)
    categories = [str(c) for c in rng.integers(0, 4, size=30)]
    precision, recall, _ = bcubed(assignment(categories, range(30)))
    assert precision == 1.0
    assert 0 < recall <= 1


def test_bcubed_ignores_cluster_and_category_names():
    rng = np.random.default_rng(4)
    for _ in range(20):
        categories = [str(c) for c in rng.integers(0, 4, size=25)]
        clusters = [int(c) for c in rng.integers(0, 5, size=25)]
        permutation = rng.permutation(5)
        renamed = [f"cat-{c}" for c in categories]
        base = bcubed(assignment(categories, clusters))
        assert bcubed(assignment(renamed, [int(permutation[c]) for c in clusters])) == pytest.approx(base)
        assert all(0 <= value <= 1 for value in base)


def test_bcubed_matches_pairwise_definition():
    rng = np.random.default_rng(5)
    categories = [str(c) for c in rng.integers(0, 3, size=12)]
    clusters = [int(c) for c in rng.integers(0, 4, size=12)]
    a = assignment(categories, clusters)
    precisions, recalls = [], []
    for o in a.sids:
        i = a.sids.index(o)
        same_cluster = [p for p in a.sids if a.clusters[a.sids.index(p)] == a.clusters[i]]
        same_category = [p for p in a.sids if a.categories[a.sids.index(p)] == a.categories[i]]
        precisions.append(np.mean([correctness(a, o, p) for p in same_cluster]))
        recalls.append(np.mean([correctness(a, o, p) for p in same_category]))
    precision, recall, _ = bcubed(a)
    assert precision == pytest.approx(np.mean(precisions))
    assert recall == pytest.approx(np.mean(recalls))


def test_bcubed_rejects_empty_and_bad_assignments():
    with pytest.raises(ValueError):
        bcubed(assignment([], []))
    with pytest.raises(ValueError):
        LabeledAssignment(("a", "a"), ("x", "x"), (0, 0))
    with pytest.raises(ValueError):
        LabeledAssignment(("a",), ("x", "y"), (0,))


def test_assignment_from_clusters():
    occurrences = [make_occurrence("a", ["1:ON"], label="x"), make_occurrence("b", ["1:ON"])]
    a = LabeledAssignment.from_clusters([Cluster(3, ("a",))], occurrences)
    assert (a.sids, a.categories, a.clusters) == (("a",), ("x",), (3,))
    with pytest.raises(DataError, match="no ground-truth label"):
        LabeledAssignment.from_clusters([Cluster(0, ("b",))], occurrences)
    with pytest.raises(DataError, match="not in the truth corpus"):
        LabeledAssignment.from_clusters([Cluster(0, ("zzz",))], occurrences)


def test_parse_grid():
    assert parse_grid("0.5:0.9:0.1") == [0.5, 0.6, 0.7, 0.8, 0.9]
    assert parse_grid("1:3:1") == [1.0, 2.0, 3.0]
    assert parse_grid("0.01, 0.02,0.05") == [0.01, 0.02, 0.05]
    for bad in ("", "0.9:0.5:0.1", "0:1:0", "0.5,0.2", "1:2"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_rho_sweep_table(small_corpus):
    table = sweep_report(small_corpus, "rho", [0.3, 0.5, 0.9])
    assert table.columns == ("rho", "f1")
    assert table.column("rho") == [0.3, 0.5, 0.9]
    assert all(0 <= f1 <= 1 for f1 in table.column("f1"))
    assert table.to_csv().splitlines()[0] == "rho,f1"


def test_minsup_sweep_is_non_increasing(small_corpus):
    table = sweep_report(small_corpus, "minsup", [0.2, 0.5, 0.8, 1.0 - 1e-9])
    counts = table.column("patterns")
    assert counts == sorted(counts, reverse=True)
    assert all(ms >= 0 for ms in table.column("ms"))


def test_minsup_sweep_with_volumes(small_corpus):
    table = sweep_report(small_corpus, "minsup", [0.5, 0.9], volumes=[0.5, 1.0])
    assert table.columns == ("volume", "minsup", "patterns", "ms")
    assert table.column("volume") == [0.5, 0.5, 1.0, 1.0]


def test_min_pre_sweep_is_non_increasing(small_corpus):
    config = MiningConfig(minsup=0.5)
    table = sweep_report(small_corpus, "min_pre", [0.5, 0.6, 0.7, 0.8, 0.9, 1.0], config)
    counts = table.column("rules")
    assert counts == sorted(counts, reverse=True)
    assert counts[0] > 0


def test_volume_sweep(small_corpus):
    table = sweep_report(small_corpus, "volume", [0.2, 0.5, 1.0], MiningConfig(rho=0.5))
    sizes = table.column("occurrences")
    assert sizes[-1] == len(small_corpus)
    assert sizes == sorted(sizes)
    assert all(1 <= c <= n for c, n in zip(table.column("clusters"), sizes))


def test_sweep_rejects_bad_requests(small_corpus):
    with pytest.raises(ValueError, match="unknown sweep parameter"):
        sweep_report(small_corpus, "gamma", [0.5])
    with pytest.raises(ValueError):
        sweep_report(small_corpus, "rho", [])
    with pytest.raises(ValueError):
        sweep_report(small_corpus, "rho", [0.9, 0.5])


def test_sweep_is_deterministic_apart_from_timings(small_corpus):
    first = sweep_report(small_corpus, "minsup", [0.5, 0.8])
    second = sweep_report(small_corpus, "minsup", [0.5, 0.8])
    assert first.column("patterns") == second.column("patterns")


def test_holdout_recognition(small_corpus):
    accuracy = holdout_recognition(small_corpus, MiningConfig(rho=0.5), test_fraction=0.2, seed=1)
    assert 0.0 <= accuracy <= 1.0
    assert accuracy == holdout_recognition(small_corpus, MiningConfig(rho=0.5), test_fraction=0.2, seed=1)
    with pytest.raises(ValueError):
        holdout_recognition(small_corpus, test_fraction=1.0)
    with pytest.raises(ValueError):
        holdout_recognition(small_corpus[:1], test_fraction=0.5)
