import io
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from oracle_helpers import brute_force_best_partition, dense_modularity

from newsbias import network
from newsbias.corpus import OutletProfile, Reliability, RetweetRecord
from newsbias.metrics import BiasRow
from newsbias.network import (
    AudienceGraph,
    build_graph,
    build_matrix,
    cluster_stats,
    cosine_weight,
    louvain,
    modularity,
    threshold_graph,
)


def clique_pair_graph(k=5, bridge=0.01) -> AudienceGraph:
    nodes = tuple(f"n{i:02d}" for i in range(2 * k))
    edges = {}
    for a in range(k):
        for b in range(a + 1, k):
            edges[(nodes[a], nodes[b])] = 1.0
            edges[(nodes[k + a], nodes[k + b])] = 1.0
    edges[(nodes[k - 1], nodes[k])] = bridge
    return AudienceGraph(nodes=nodes, edges=edges)


def random_graph(rng, n=8, p=0.5) -> AudienceGraph:
    nodes = tuple(f"v{i:02d}" for i in range(n))
    edges = {}
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                edges[(nodes[a], nodes[b])] = float(rng.uniform(0.05, 1.0))
    if not edges:
        edges[(nodes[0], nodes[1])] = 0.5
    return AudienceGraph(nodes=nodes, edges=edges)


class TestBuildMatrix:
    def test_single_record(self):
        matrix = build_matrix([RetweetRecord("u1", "o1", 2)])
        assert matrix.users == ("u1",)
        assert matrix.outlets == ("o1",)
        assert matrix.counts.toarray().tolist() == [[2]]

    def test_duplicates_summed(self):
        matrix = build_matrix(
            [RetweetRecord("u1", "o1", 2), RetweetRecord("u1", "o1", 3)]
        )
        assert matrix.counts.toarray().tolist() == [[5]]

    def test_column_sums_match_tally(self):
        rng = np.random.default_rng(4)
        records = [
            RetweetRecord(f"u{rng.integers(20)}", f"o{rng.integers(6)}", int(rng.integers(1, 5)))
            for _ in range(100)
        ]
        matrix = build_matrix(records)
        totals = {o: 0 for o in matrix.outlets}
        for r in records:
            totals[r.outlet_id] += r.count
        col_sums = np.asarray(matrix.counts.sum(axis=0)).ravel()
        assert [totals[o] for o in matrix.outlets] == col_sums.tolist()

    def test_sorted_orders(self):
        matrix = build_matrix(
            [RetweetRecord("ub", "oz", 1), RetweetRecord("ua", "oa", 1)]
        )
        assert matrix.users == ("ua", "ub")
        assert matrix.outlets == ("oa", "oz")


class TestCosineWeight:
    def test_identical_columns(self):
        assert cosine_weight([1, 2, 3], [1, 2, 3]) == 1.0

    def test_disjoint_supports(self):
        assert cosine_weight([1, 0, 2], [0, 3, 0]) == 0.0

    def test_hand_value_exact(self):
        assert cosine_weight([1, 2], [2, 1]) == 0.8

    def test_zero_norm_errors(self):
        with pytest.raises(ValueError, match="zero-norm"):
            cosine_weight([0, 0], [1, 2])

    def test_scaling_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            h = rng.integers(0, 10, 6).astype(float)
            k = rng.integers(0, 10, 6).astype(float)
            if not h.any() or not k.any():
                continue
            base = cosine_weight(h, k)
            assert 0.0 <= base <= 1.0
            scale = float(rng.uniform(0.1, 50))
            assert abs(cosine_weight(scale * h, k) - base) < 1e-12

    def test_sparse_columns_accepted(self):
        matrix = build_matrix(
            [RetweetRecord("u1", "o1", 1), RetweetRecord("u2", "o1", 2),
             RetweetRecord("u1", "o2", 2), RetweetRecord("u2", "o2", 1)]
        )
        assert cosine_weight(matrix.counts[:, [0]], matrix.counts[:, [1]]) == 0.8


class TestBuildGraph:
    def test_proportional_audiences_weight_one(self):
        records = [
            RetweetRecord("u1", "o1", 1), RetweetRecord("u2", "o1", 2),
            RetweetRecord("u1", "o2", 2), RetweetRecord("u2", "o2", 4),
        ]
        graph = build_graph(build_matrix(records))
        assert graph.edges == {("o1", "o2"): 1.0}

    def test_disjoint_audiences_no_edges(self):
        records = [
            RetweetRecord("u1", "o1", 1),
            RetweetRecord("u2", "o2", 1),
            RetweetRecord("u3", "o3", 1),
        ]
        graph = build_graph(build_matrix(records))
        assert len(graph.nodes) == 3
        assert graph.edges == {}

    def test_weights_match_dense_oracle(self):
        rng = np.random.default_rng(6)
        records = [
            RetweetRecord(f"u{rng.integers(30)}", f"o{rng.integers(8)}", int(rng.integers(1, 4)))
            for _ in range(150)
        ]
        matrix = build_matrix(records)
        graph = build_graph(matrix)
        dense = matrix.counts.toarray().astype(float)
        index = {o: j for j, o in enumerate(matrix.outlets)}
        for (u, v), w in graph.edges.items():
            h, k = dense[:, index[u]], dense[:, index[v]]
            oracle = float(h @ k) / (np.linalg.norm(h) * np.linalg.norm(k))
            assert abs(w - oracle) < 1e-12

    def test_never_retweeted_outlet_dropped(self):
        matrix = build_matrix([RetweetRecord("u1", "o1", 1)])
        extended = network.RetweetMatrix(
            users=matrix.users,
            outlets=("o1", "o2"),
            counts=network.sparse.csc_array(
                np.array([[1, 0]], dtype=np.int64)
            ),
        )
        graph = build_graph(extended)
        assert graph.nodes == ("o1",)


class TestThresholdGraph:
    def test_equal_weights_nothing_removed(self):
        graph = AudienceGraph(
            nodes=("a", "b", "c"),
            edges={("a", "b"): 0.4, ("b", "c"): 0.4, ("a", "c"): 0.4},
        )
        out = threshold_graph(graph)
        assert out.edges == graph.edges
        assert out.nodes == graph.nodes

    def test_low_edge_removed(self):
        graph = AudienceGraph(
            nodes=("a", "b", "c"), edges={("a", "b"): 0.1, ("b", "c"): 0.9}
        )
        out = threshold_graph(graph)
        assert out.edges == {("b", "c"): 0.9}
        assert out.nodes == ("b", "c")

    def test_keep_isolates_toggle(self):
        graph = AudienceGraph(
            nodes=("a", "b", "c"), edges={("a", "b"): 0.1, ("b", "c"): 0.9}
        )
        out = threshold_graph(graph, drop_isolated=False)
        assert out.nodes == ("a", "b", "c")

    def test_inclusive_cutoff_removes_edge_at_mean(self):
        graph = AudienceGraph(
            nodes=("a", "b", "c"),
            edges={("a", "b"): 0.4, ("b", "c"): 0.4, ("a", "c"): 0.4},
        )
        out = threshold_graph(graph, strict=False)
        assert out.edges == {}
        assert out.nodes == ()

    def test_matches_independent_two_pass_filter(self):
        rng = np.random.default_rng(7)
        graph = random_graph(rng, n=12, p=0.4)
        out = threshold_graph(graph)
        mean = sum(graph.edges.values()) / len(graph.edges)
        expected = {e: w for e, w in graph.edges.items() if w >= mean}
        assert out.edges == expected

    def test_idempotent_with_recorded_cutoff(self):
        rng = np.random.default_rng(8)
        graph = random_graph(rng, n=10, p=0.5)
        mean = sum(graph.edges.values()) / len(graph.edges)
        once = threshold_graph(graph)
        twice = threshold_graph(once, cutoff=mean)
        assert twice.edges == once.edges
        assert twice.nodes == once.nodes

    def test_zero_degree_nodes_removed_first(self):
        graph = AudienceGraph(nodes=("a", "b", "lonely"), edges={("a", "b"): 0.5})
        out = threshold_graph(graph)
        assert out.nodes == ("a", "b")

    def test_edgeless_graph_errors(self):
        with pytest.raises(ValueError, match="no edges"):
            threshold_graph(AudienceGraph(nodes=("a",), edges={}))


class TestLouvain:
    def test_two_cliques_recovered_and_optimal(self):
        graph = clique_pair_graph()
        partition = louvain(graph, seed=3)
        first = {partition[f"n{i:02d}"] for i in range(5)}
        second = {partition[f"n{i:02d}"] for i in range(5, 10)}
        assert len(first) == 1 and len(second) == 1 and first != second
        best_q, _ = brute_force_best_partition(graph.nodes, graph.edges)
        assert modularity(graph, partition) == pytest.approx(best_q, abs=1e-9)

    def test_single_clique_single_community(self):
        nodes = ("a", "b", "c", "d")
        edges = {
            (u, v): 1.0 for i, u in enumerate(nodes) for v in nodes[i + 1 :]
        }
        partition = louvain(AudienceGraph(nodes=nodes, edges=edges), seed=0)
        assert set(partition.values()) == {0}

    def test_edgeless_nodes_singletons(self):
        graph = AudienceGraph(nodes=("a", "b", "c"), edges={})
        assert louvain(graph, seed=1) == {"a": 0, "b": 1, "c": 2}

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(9)
        graph = random_graph(rng, n=14, p=0.3)
        assert louvain(graph, seed=11) == louvain(graph, seed=11)

    def test_never_below_singleton_partition(self):
        for seed in range(5):
            rng = np.random.default_rng(100 + seed)
            graph = random_graph(rng, n=10, p=0.4)
            partition = louvain(graph, seed=seed)
            singletons = {n: i for i, n in enumerate(graph.nodes)}
            assert modularity(graph, partition) >= modularity(graph, singletons) - 1e-12


class TestModularity:
    def two_triangles(self):
        return AudienceGraph(
            nodes=("a", "b", "c", "d", "e", "f"),
            edges={
                ("a", "b"): 1.0, ("a", "c"): 1.0, ("b", "c"): 1.0,
                ("d", "e"): 1.0, ("d", "f"): 1.0, ("e", "f"): 1.0,
            },
        )

    def test_all_in_one_is_zero(self):
        graph = self.two_triangles()
        assert modularity(graph, {n: 0 for n in graph.nodes}) == 0.0
        rng = np.random.default_rng(10)
        weighted = random_graph(rng, n=9, p=0.6)
        assert modularity(weighted, {n: 0 for n in weighted.nodes}) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_split_cliques_half(self):
        graph = self.two_triangles()
        partition = {"a": 0, "b": 0, "c": 0, "d": 1, "e": 1, "f": 1}
        assert modularity(graph, partition) == pytest.approx(0.5, abs=1e-12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(11)
        graph = random_graph(rng, n=9, p=0.5)
        partition = louvain(graph, seed=0)
        assert modularity(graph, partition) == pytest.approx(
            dense_modularity(graph.nodes, graph.edges, partition), abs=1e-12
        )

    def test_louvain_beats_random_partitions(self):
        rng = np.random.default_rng(12)
        graph = random_graph(rng, n=9, p=0.45)
        best = modularity(graph, louvain(graph, seed=2))
        for _ in range(1000):
            labels = rng.integers(0, 4, len(graph.nodes))
            random_partition = {n: int(labels[i]) for i, n in enumerate(graph.nodes)}
            assert modularity(graph, random_partition) <= best + 1e-12

    def test_errors(self):
        graph = self.two_triangles()
        with pytest.raises(ValueError, match="cover"):
            modularity(graph, {"a": 0})
        with pytest.raises(ValueError, match="zero total weight"):
            modularity(AudienceGraph(nodes=("a",), edges={}), {"a": 0})


def bias_row(outlet, x_adv=0.0, x_pos=0.0, selection=0.0, lean=False):
    return BiasRow(
        outlet_id=outlet,
        x_adv=x_adv,
        x_neu=0.0,
        x_pos=x_pos,
        pf_adv=1.0 if lean else 0.0,
        pf_neu=0.0,
        pf_pos=0.0,
        selection_index=selection,
        adverse_lean=lean,
    )


def profile(outlet, reliability):
    return OutletProfile(outlet, outlet, reliability)


class TestClusterStats:
    def test_single_questionable_cluster(self):
        stats = cluster_stats(
            {"o1": 0},
            [bias_row("o1")],
            [profile("o1", Reliability.QUESTIONABLE)],
        )
        assert stats[0].size == 1
        assert stats[0].frac_questionable == 1.0

    def test_mean_of_opposite_biases_is_zero(self):
        stats = cluster_stats(
            {"o1": 0, "o2": 0},
            [bias_row("o1", x_adv=0.2), bias_row("o2", x_adv=-0.2)],
            [profile("o1", Reliability.RELIABLE), profile("o2", Reliability.RELIABLE)],
        )
        assert stats[0].mean_x_adv == pytest.approx(0.0, abs=1e-15)

    def test_sums_reconcile_with_global(self):
        rng = np.random.default_rng(13)
        outlets = [f"o{i}" for i in range(30)]
        partition = {o: int(rng.integers(0, 4)) for o in outlets}
        bias_rows = [
            bias_row(o, x_adv=float(rng.normal()), selection=float(rng.uniform(0, 2)))
            for o in outlets
        ]
        registry = [
            profile(o, Reliability.QUESTIONABLE if rng.random() < 0.3 else Reliability.RELIABLE)
            for o in outlets
        ]
        stats = cluster_stats(partition, bias_rows, registry)
        assert sum(s.size for s in stats) == len(outlets)
        total_x = sum(s.mean_x_adv * s.size for s in stats)
        assert total_x == pytest.approx(sum(r.x_adv for r in bias_rows), abs=1e-9)

    def test_members_missing_data_excluded_from_stats(self, caplog):
        with caplog.at_level("WARNING"):
            stats = cluster_stats(
                {"o1": 0, "ghost": 0},
                [bias_row("o1", x_adv=0.4)],
                [profile("o1", Reliability.RELIABLE)],
            )
        assert stats[0].size == 2
        assert stats[0].mean_x_adv == pytest.approx(0.4)
        assert "ghost" in caplog.text


class TestExports:
    def graph(self):
        return AudienceGraph(
            nodes=("a", "b"),
            edges={("a", "b"): 0.5},
            reliability={"a": Reliability.RELIABLE, "b": Reliability.QUESTIONABLE},
            clusters={"a": 0, "b": 0},
        )

    def test_edges_csv(self):
        buf = io.StringIO()
        network.write_edges_csv(self.graph(), buf)
        assert buf.getvalue() == "src,dst,weight\na,b,0.5\n"

    def test_clusters_csv(self):
        buf = io.StringIO()
        network.write_clusters_csv({"b": 1, "a": 0}, buf)
        assert buf.getvalue() == "outlet_id,cluster_id\na,0\nb,1\n"

    def test_graphml_parses_and_carries_attributes(self):
        buf = io.StringIO()
        network.write_graphml(self.graph(), buf)
        root = ET.fromstring(buf.getvalue())
        ns = "{http://graphml.graphdrawing.org/xmlns}"
        graph_el = root.find(f"{ns}graph")
        assert graph_el.get("edgedefault") == "undirected"
        nodes = graph_el.findall(f"{ns}node")
        assert [n.get("id") for n in nodes] == ["a", "b"]
        edge = graph_el.find(f"{ns}edge")
        assert edge.get("source") == "a" and edge.get("target") == "b"
        assert edge.find(f"{ns}data").text == "0.5"

    def test_graph_invariants_enforced(self):
        with pytest.raises(ValueError, match="ordered"):
            AudienceGraph(nodes=("a", "b"), edges={("b", "a"): 0.5})
        with pytest.raises(ValueError, match="weight"):
            AudienceGraph(nodes=("a", "b"), edges={("a", "b"): 1.5})
        with pytest.raises(ValueError, match="unknown node"):
            AudienceGraph(nodes=("a",), edges={("a", "z"): 0.5})
