import unittest

import numpy as np

from walkssl.core.abc import ShapeParameterError
from walkssl.core.mesh import (
    ShapeClass,
    TorusParams,
    build_adjacency,
    gen_synthetic,
    is_watertight,
    random_rotation,
    signed_volume,
)


class TestGenSynthetic(unittest.TestCase):

    def test_icosphere_face_count(self):
        m = gen_synthetic("sphere", {"subdivisions": 2}, seed=7)
        self.assertEqual(m.n_faces, 320)
        self.assertEqual(m.n_vertices, 162)

    def test_deterministic_per_seed(self):
        for shape in ShapeClass:
            a = gen_synthetic(shape, seed=7)
            b = gen_synthetic(shape, seed=7)
            self.assertEqual(a.vertices.tobytes(), b.vertices.tobytes())
            self.assertEqual(a.faces.tobytes(), b.faces.tobytes())

    def test_seeds_differ(self):
        a = gen_synthetic("box", {"segments": 2}, seed=1)
        b = gen_synthetic("box", {"segments": 2}, seed=2)
        self.assertFalse(np.allclose(a.vertices, b.vertices))

    def test_watertight_and_outward(self):
        for shape in ShapeClass:
            for seed in range(3):
                m = gen_synthetic(shape, seed=seed)
                self.assertTrue(is_watertight(m), f"{shape.value} seed {seed}")
                self.assertGreater(signed_volume(m.vertices, m.faces), 0.0)
                self.assertEqual(m.label, shape.value)
                self.assertEqual(m.source_id, f"{shape.value}-{seed}")

    def test_adjacency_symmetric_for_generated_meshes(self):
        for shape in ShapeClass:
            adj = build_adjacency(gen_synthetic(shape, seed=4))
            self.assertTrue(adj.is_symmetric())

    def test_explicit_tessellation(self):
        box = gen_synthetic("box", {"segments": 2}, seed=0)
        self.assertEqual(box.n_faces, 6 * 2 * 4)
        cyl = gen_synthetic("cylinder", {"segments": 8, "rings": 2}, seed=0)
        self.assertEqual(cyl.n_faces, 2 * 8 * 2 + 2 * 8)
        torus = gen_synthetic("torus", TorusParams(major_segments=10, minor_segments=6), seed=0)
        self.assertEqual(torus.n_faces, 2 * 10 * 6)

    def test_torus_tube_ratio_out_of_range(self):
        with self.assertRaises(ShapeParameterError) as ctx:
            gen_synthetic("torus", {"tube_ratio": 1.5}, seed=0)
        self.assertIn("tube_ratio", str(ctx.exception))

    def test_unknown_class_or_parameter(self):
        with self.assertRaises(ShapeParameterError):
            gen_synthetic("pyramid", seed=0)
        with self.assertRaises(ShapeParameterError):
            gen_synthetic("sphere", {"radius": 2}, seed=0)

    def test_random_rotation_is_proper(self):
        q = random_rotation(np.random.default_rng(0))
        np.testing.assert_allclose(q @ q.T, np.eye(3), atol=1e-12)
        self.assertAlmostEqual(np.linalg.det(q), 1.0)


if __name__ == "__main__":
    unittest.main()
