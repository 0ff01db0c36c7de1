import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform

from shal.clustering import (
    DistanceMatrix,
    agglomerate,
    average_linkage,
    distance_matrix,
    label_clusters,
    linkage_trace,
    location_similarity,
    similarity,
    structure_similarity,
    time_similarity,
)
from shal.evaluation import LabeledAssignment, bcubed
from shal.shal_types import Cluster

from conftest import make_occurrence

HOUR = 3600.0


def random_corpus(rng, size):
    occurrences = []
    for i in range(size):
        start = float(rng.integers(0, 86400))
        keys = [f"{int(k)}:ON" for k in rng.integers(0, 6, size=int(rng.integers(1, 5)))]
        occurrences.append(
            make_occurrence(
                f"occ-{i:03d}",
                keys,
                start,
                start + float(rng.integers(1, 7200)),
                location=str(rng.choice(["Kitchen", "Bathroom", "Hall"])),
            )
        )
    return occurrences


def test_location_similarity():
    kitchen = make_occurrence("a", ["1:ON"])
    bathroom = make_occurrence("b", ["1:ON"], location="Bathroom")
    assert location_similarity(kitchen, kitchen) == 1
    assert location_similarity(kitchen, bathroom) == 0
    assert location_similarity(bathroom, kitchen) == 0


def test_time_similarity_worked_example():
    dinner = make_occurrence("a", ["1:ON"], 18 * HOUR, 19 * HOUR)
    later = make_occurrence("b", ["1:ON"], 18 * HOUR + 40 * 60, 19 * HOUR + 20 * 60)
    assert time_similarity(dinner, later) == 0.625
    assert time_similarity(later, dinner) == 0.625
    assert time_similarity(dinner, dinner) == 1.0


def test_time_similarity_disjoint_and_degenerate():
    first = make_occurrence("a", ["1:ON"], 0, 10)
    second = make_occurrence("b", ["1:ON"], 20, 30)
    assert time_similarity(first, second) == pytest.approx(1 / 3)
    instant = make_occurrence("c", ["1:ON"], 5, 5)
    assert time_similarity(first, instant) == 0.0
    assert time_similarity(instant, instant) == 0.0


def test_clock_basis_ignores_the_day():
    today = make_occurrence("a", ["1:ON"], 18 * HOUR, 19 * HOUR)
    tomorrow = make_occurrence("b", ["1:ON"], 24 * HOUR + 18 * HOUR + 40 * 60, 24 * HOUR + 19 * HOUR + 20 * 60)
    assert time_similarity(today, tomorrow, "clock") == 0.625
    assert time_similarity(today, tomorrow, "absolute") < 0.05


def test_structure_similarity():
    abc = make_occurrence("a", ["a:ON", "b:ON", "c:ON"])
    bcd = make_occurrence("b", ["b:ON", "c:ON", "d:ON"])
    xyz = make_occurrence("c", ["x:ON", "y:ON"])
    assert structure_similarity(abc, abc) == 1
    assert structure_similarity(abc, xyz) == 0
    assert structure_similarity(abc, bcd) == 0.5
    empty = make_occurrence("e", [])
    assert structure_similarity(empty, empty) == 1
    assert structure_similarity(empty, abc) == 0


def test_similarity_bounds():
    occurrence = make_occurrence("a", ["1:ON", "2:ON"], 0, 600)
    assert similarity(occurrence, occurrence) == 3
    far = make_occurrence("b", ["8:ON", "9:ON"], 10 * 86400, 10 * 86400 + 60, location="Bathroom")
    assert similarity(occurrence, far) < 0.1
    matrix = distance_matrix([occurrence, far])
    assert matrix["a", "b"] > 0.96


def test_distance_matrix_matches_pairwise_similarity():
    rng = np.random.default_rng(21)
    corpus = random_corpus(rng, 15)
    matrix = distance_matrix(corpus)
    assert np.array_equal(matrix.entries, matrix.entries.T)
    assert np.all(np.diag(matrix.entries) == 0)
    assert np.all((matrix.entries >= 0) & (matrix.entries <= 1))
    for i, a in enumerate(corpus):
        for j, b in enumerate(corpus):
            if i != j:
                assert matrix.entries[i, j] == pytest.approx(1 - similarity(a, b) / 3, abs=1e-12)


def test_identical_occurrences_have_zero_distance():
    a = make_occurrence("a", ["1:ON", "2:ON"], 0, 60)
    b = make_occurrence("b", ["1:ON", "2:ON"], 0, 60)
    assert distance_matrix([a, b])["a", "b"] == 0


def test_average_linkage_examples():
    entries = np.array([[0, 0.2, 0.4], [0.2, 0, 0.7], [0.4, 0.7, 0]])
    matrix = DistanceMatrix(("x", "y", "z"), entries)
    assert average_linkage(Cluster(0, ("x",)), Cluster(1, ("y",)), matrix) == 0.2
    assert average_linkage(Cluster(0, ("x",)), Cluster(1, ("y", "z")), matrix) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        average_linkage(Cluster(0, ("x",)), Cluster(1, ("x", "z")), matrix)


def test_average_linkage_matches_double_loop():
    rng = np.random.default_rng(3)
    corpus = random_corpus(rng, 12)
    matrix = distance_matrix(corpus)
    for _ in range(50):
        labels = rng.integers(0, 3, size=len(corpus))
        left = tuple(o.sid for o, k in zip(corpus, labels) if k == 0)
        right = tuple(o.sid for o, k in zip(corpus, labels) if k == 1)
        if not left or not right:
            continue
        total = sum(matrix[a, b] for a in left for b in right)
        expected = total / (len(left) * len(right))
        assert average_linkage(Cluster(0, left), Cluster(1, right), matrix) == pytest.approx(expected, abs=1e-12)


def test_rho_boundaries():
    rng = np.random.default_rng(9)
    corpus = random_corpus(rng, 10)
    assert len(agglomerate(corpus, 0.0)) == len(corpus)
    matrix = distance_matrix(corpus)
    if matrix.entries.max() < 1:
        assert len(agglomerate(corpus, 1.0)) == 1


def test_agglomerate_is_a_partition_with_separated_survivors():
    rng = np.random.default_rng(17)
    corpus = random_corpus(rng, 25)
    rho = 0.6
    clusters = agglomerate(corpus, rho)
    members = [sid for cluster in clusters for sid in cluster.members]
    assert sorted(members) == sorted(o.sid for o in corpus)
    assert [cluster.cluster_id for cluster in clusters] == list(range(len(clusters)))
    matrix = distance_matrix(corpus)
    for i, ci in enumerate(clusters):
        for cj in clusters[i + 1 :]:
            assert average_linkage(ci, cj, matrix) >= rho - 1e-12


def test_agglomerate_is_permutation_stable():
    rng = np.random.default_rng(23)
    corpus = random_corpus(rng, 20)
    expected = agglomerate(corpus, 0.5)
    for _ in range(5):
        shuffled = [corpus[i] for i in rng.permutation(len(corpus))]
        assert agglomerate(shuffled, 0.5) == expected


def test_tie_break_merges_smallest_ids_first():
    entries = np.array(
        [
            [0, 0.1, 0.9, 0.9],
            [0.1, 0, 0.9, 0.9],
            [0.9, 0.9, 0, 0.1],
            [0.9, 0.9, 0.1, 0],
        ]
    )
    steps = linkage_trace(DistanceMatrix(("a", "b", "c", "d"), entries))
    assert [(step.left, step.right) for step in steps] == [(0, 1), (2, 3), (0, 2)]
    assert [step.size for step in steps] == [2, 2, 4]


def test_merge_heights_match_scipy_and_are_monotone():
    rng = np.random.default_rng(31)
    for _ in range(10):
        corpus = random_corpus(rng, int(rng.integers(3, 15)))
        matrix = distance_matrix(corpus)
        heights = [step.distance for step in linkage_trace(matrix)]
        assert all(b >= a - 1e-12 for a, b in zip(heights, heights[1:]))
        reference = linkage(squareform(matrix.entries, checks=False), method="average")[:, 2]
        assert np.allclose(sorted(heights), sorted(reference), atol=1e-12)


def test_synthetic_templates_are_recovered(small_spec):
    from shal.ingest import generate_synthetic

    document = small_spec.model_dump()
    for template in document["activities"]:
        template.update(drop_probability=0.0, swap_probability=0.0)
    occurrences, _ = generate_synthetic(small_spec.model_validate(document))
    clusters = agglomerate(occurrences, 0.5)
    assert len(clusters) == 5
    labeled, purities = label_clusters(clusters, occurrences)
    assert all(purity == 1.0 for purity in purities.values())
    assert {cluster.label_hint for cluster in labeled} == {t.label for t in small_spec.activities}
    assert bcubed(LabeledAssignment.from_clusters(clusters, occurrences)) == (1.0, 1.0, 1.0)


def test_label_clusters_breaks_ties_alphabetically():
    occurrences = [
        make_occurrence("a", ["1:ON"], label="zeta"),
        make_occurrence("b", ["1:ON"], label="alpha"),
        make_occurrence("c", ["1:ON"]),
    ]
    (cluster,), purities = label_clusters([Cluster(0, ("a", "b", "c"))], occurrences)
    assert cluster.label_hint == "alpha"
    assert purities[0] == pytest.approx(1 / 3)
