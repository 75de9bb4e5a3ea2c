import unittest

import numpy as np

from walkssl.core.abc import DatasetError, ItemNotFoundError, WalkInvariantError
from walkssl.core.mesh import Mesh, build_adjacency, gen_synthetic, normalize_mesh
from walkssl.core.resample import subdivide
from walkssl.core.walker import (
    MeshDataset,
    TrainingSet,
    Walk,
    make_batch,
    random_walk,
    walk_coverage,
    walk_to_sequence,
)


def triangle() -> Mesh:
    return Mesh(vertices=[[0, 0, 0], [1, 0, 0], [0, 1, 0]], faces=[[0, 1, 2]], source_id="tri")


def small_dataset() -> list[Mesh]:
    meshes = []
    for i, shape in enumerate(["sphere", "box", "torus"]):
        m = normalize_mesh(gen_synthetic(shape, seed=i))
        meshes.extend([m, subdivide(m)])
    return meshes


class TestRandomWalk(unittest.TestCase):

    def test_triangle_without_jumps(self):
        m = triangle()
        adj = build_adjacency(m)
        walk = random_walk(m, adj, length=4, jump_prob=0.0, rng=np.random.default_rng(0))
        self.assertEqual(len(walk), 4)
        self.assertTrue(walk.jump_flags[0])
        self.assertFalse(walk.jump_flags[1:].any())
        for t in range(1, 4):
            self.assertTrue(adj.is_edge(int(walk.vertex_indices[t - 1]), int(walk.vertex_indices[t])))
        walk.check(adj)

    def test_always_jump(self):
        m = normalize_mesh(gen_synthetic("box", seed=0))
        walk = random_walk(m, build_adjacency(m), length=50, jump_prob=1.0, seed=3)
        self.assertTrue(walk.jump_flags.all())

    def test_deterministic_per_seed(self):
        m = normalize_mesh(gen_synthetic("torus", seed=0))
        adj = build_adjacency(m)
        a = random_walk(m, adj, 64, 0.05, seed=42)
        b = random_walk(m, adj, 64, 0.05, seed=42)
        np.testing.assert_array_equal(a.vertex_indices, b.vertex_indices)
        np.testing.assert_array_equal(a.jump_flags, b.jump_flags)
        self.assertEqual(a.seed, 42)

    def test_edge_validity_over_many_walks(self):
        meshes = [normalize_mesh(gen_synthetic(s, seed=5)) for s in ["sphere", "cone", "cylinder", "torus"]]
        adjs = [build_adjacency(m) for m in meshes]
        violations = 0
        for k in range(1000):
            m, adj = meshes[k % 4], adjs[k % 4]
            walk = random_walk(m, adj, 32, 0.05, seed=k)
            idx, jumps = walk.vertex_indices, walk.jump_flags
            for t in np.flatnonzero(~jumps):
                if not adj.is_edge(int(idx[t - 1]), int(idx[t])):
                    violations += 1
        self.assertEqual(violations, 0)

    def test_coverage_grows_with_length(self):
        m = normalize_mesh(gen_synthetic("sphere", {"subdivisions": 2}, seed=1))
        adj = build_adjacency(m)
        coverage = [
            walk_coverage(random_walk(m, adj, m.n_vertices, 0.05, seed=s), m.n_vertices)
            for s in range(100)
        ]
        self.assertGreater(np.mean(coverage), 0.5)
        short = [walk_coverage(random_walk(m, adj, 8, 0.05, seed=s), m.n_vertices) for s in range(100)]
        self.assertLess(np.mean(short), np.mean(coverage))

    def test_isolated_vertex_forces_jump(self):
        m = Mesh(vertices=[[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5]], faces=[[0, 1, 2]])
        adj = build_adjacency(m)
        for seed in range(50):
            walk = random_walk(m, adj, 16, 0.0, seed=seed)
            walk.check(adj)
            idx = walk.vertex_indices
            for t in range(1, 16):
                if idx[t - 1] == 3:
                    self.assertTrue(walk.jump_flags[t])

    def test_invalid_arguments(self):
        m = triangle()
        adj = build_adjacency(m)
        with self.assertRaises(WalkInvariantError):
            random_walk(m, adj, length=1, seed=0)
        with self.assertRaises(WalkInvariantError):
            random_walk(m, adj, length=4, jump_prob=1.5, seed=0)

    def test_check_rejects_non_edge_move(self):
        m = Mesh(vertices=np.random.default_rng(0).random((4, 3)), faces=[[0, 1, 2], [1, 3, 2]])
        walk = Walk(vertex_indices=[0, 3], jump_flags=[True, False])
        with self.assertRaises(WalkInvariantError):
            walk.check(build_adjacency(m))


class TestWalkToSequence(unittest.TestCase):

    def test_rows_are_coordinates(self):
        seq = walk_to_sequence(triangle(), Walk(vertex_indices=[0, 1], jump_flags=[True, False]))
        np.testing.assert_array_equal(seq.steps, [[0, 0, 0], [1, 0, 0]])

    def test_repeated_vertex(self):
        seq = walk_to_sequence(triangle(), Walk(vertex_indices=[2, 2], jump_flags=[True, True]))
        np.testing.assert_array_equal(seq.steps[0], seq.steps[1])

    def test_normalized_range(self):
        m = normalize_mesh(gen_synthetic("cone", seed=9))
        seq = walk_to_sequence(m, random_walk(m, build_adjacency(m), 128, 0.05, seed=0))
        self.assertTrue((np.abs(seq.steps) <= 1.0 + 1e-12).all())

    def test_out_of_range(self):
        with self.assertRaises(WalkInvariantError):
            walk_to_sequence(triangle(), Walk(vertex_indices=[0, 7], jump_flags=[True, True]))


class TestDataset(unittest.TestCase):

    def setUp(self):
        self.meshes = small_dataset()
        self.dataset = MeshDataset(self.meshes)

    def test_grouping(self):
        self.assertEqual(len(self.dataset), 3)
        self.assertEqual(self.dataset.n_meshes, 6)
        self.assertListEqual(self.dataset.source_ids, ["sphere-0", "box-1", "torus-2"])
        mesh, _ = self.dataset.largest("box-1")
        self.assertEqual(mesh.n_faces, self.meshes[3].n_faces)
        with self.assertRaises(ItemNotFoundError):
            self.dataset.augmentations("missing")

    def test_training_view_strips_labels(self):
        view = self.dataset.training_view()
        self.assertIsInstance(view, TrainingSet)
        self.assertTrue(all(m.label is None for m in view.meshes))
        self.assertEqual(self.dataset.labels()["box-1"], "box")
        self.assertIsNone(view.labels()["box-1"])
        self.assertIsInstance(TrainingSet(self.meshes), MeshDataset)


class TestMakeBatch(unittest.TestCase):

    def setUp(self):
        self.dataset = MeshDataset(small_dataset()).training_view()

    def test_structure(self):
        batch = make_batch(self.dataset, 2, walk_len=16, jump_prob=0.05, rng=np.random.default_rng(0))
        self.assertEqual(batch.sequences.shape, (4, 16, 3))
        self.assertEqual(len(batch.pair_ids), 2)
        self.assertEqual(len(set(batch.pair_ids)), 2)
        for i, pid in enumerate(batch.pair_ids):
            self.assertEqual(batch.walks[2 * i].source_id, pid)
            self.assertEqual(batch.walks[2 * i + 1].source_id, pid)

    def test_too_few_models(self):
        with self.assertRaises(DatasetError):
            make_batch(self.dataset, 4, walk_len=8, rng=np.random.default_rng(0))

    def test_deterministic_and_thread_independent(self):
        a = make_batch(self.dataset, 3, walk_len=32, rng=np.random.default_rng(5))
        b = make_batch(self.dataset, 3, walk_len=32, rng=np.random.default_rng(5))
        c = make_batch(self.dataset, 3, walk_len=32, rng=np.random.default_rng(5), threads=3)
        self.assertListEqual(a.pair_ids, b.pair_ids)
        np.testing.assert_array_equal(a.sequences, b.sequences)
        np.testing.assert_array_equal(a.sequences, c.sequences)

    def test_explicit_source_ids(self):
        batch = make_batch(
            self.dataset, 2, walk_len=8, rng=np.random.default_rng(1), source_ids=["torus-2", "sphere-0"]
        )
        self.assertListEqual(batch.pair_ids, ["torus-2", "sphere-0"])
        with self.assertRaises(DatasetError):
            make_batch(self.dataset, 2, walk_len=8, source_ids=["box-1", "box-1"])


if __name__ == "__main__":
    unittest.main()
