import tempfile
import unittest
from pathlib import Path

import numpy as np

from walkssl.core.abc import (
    CoordinateError,
    EmptyFaceListError,
    FaceIndexError,
    MeshHeaderError,
    MeshInvariantError,
    MeshParseError,
    MissingVertexError,
)
from walkssl.core.mesh import (
    Mesh,
    MeshFormat,
    gen_synthetic,
    load_mesh,
    parse_mesh,
    save_mesh,
    write_mesh,
)

MINIMAL_OFF = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2"


class TestParseMesh(unittest.TestCase):

    def test_minimal_off(self):
        m = parse_mesh(MINIMAL_OFF.encode(), "OFF")
        self.assertEqual(m.n_vertices, 3)
        self.assertListEqual(m.faces.tolist(), [[0, 1, 2]])

    def test_obj_quad_is_fan_triangulated(self):
        text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"
        m = parse_mesh(text, MeshFormat.OBJ)
        self.assertListEqual(m.faces.tolist(), [[0, 1, 2], [0, 2, 3]])

    def test_off_missing_vertex(self):
        text = "OFF\n3 1 0\n0 0 0\n1 0 0\n3 0 1 2"
        with self.assertRaises(MissingVertexError) as ctx:
            parse_mesh(text, "OFF")
        self.assertEqual(ctx.exception.line, 5)
        self.assertIn("line 5", str(ctx.exception))

    def test_off_truncated_vertices(self):
        with self.assertRaises(MissingVertexError):
            parse_mesh("OFF\n3 1 0\n0 0 0\n1 0 0\n", "OFF")

    def test_bad_header(self):
        with self.assertRaises(MeshHeaderError):
            parse_mesh("PLY\n3 1 0\n", "OFF")
        with self.assertRaises(MeshHeaderError):
            parse_mesh("OFF\nthree 1 0\n", "OFF")
        with self.assertRaises(MeshHeaderError):
            parse_mesh("OFF\n3 1\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", "OFF")
        with self.assertRaises(MeshHeaderError):
            parse_mesh("OFF\n3 1 0 7\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", "OFF")
        with self.assertRaises(MeshHeaderError):
            parse_mesh("", "OFF")

    def test_non_numeric_coordinate(self):
        with self.assertRaises(CoordinateError) as ctx:
            parse_mesh("OFF\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2", "OFF")
        self.assertEqual(ctx.exception.line, 4)

    def test_face_index_out_of_range(self):
        with self.assertRaises(FaceIndexError) as ctx:
            parse_mesh("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3", "OFF")
        self.assertEqual(ctx.exception.line, 6)
        with self.assertRaises(FaceIndexError):
            parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n", "OBJ")

    def test_empty_face_list(self):
        with self.assertRaises(EmptyFaceListError):
            parse_mesh("OFF\n3 0 0\n0 0 0\n1 0 0\n0 1 0\n", "OFF")
        with self.assertRaises(EmptyFaceListError):
            parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\n", "OBJ")

    def test_errors_are_distinct(self):
        kinds = {MeshHeaderError, CoordinateError, FaceIndexError, EmptyFaceListError, MissingVertexError}
        self.assertEqual(len(kinds), 5)
        for kind in kinds:
            self.assertTrue(issubclass(kind, MeshParseError))

    def test_comments_and_coff(self):
        text = "COFF # coloured\n\n3 1 0\n0 0 0 255 0 0 255\n1 0 0 0 255 0 255\n0 1 0 0 0 255 255\n3 0 1 2\n"
        m = parse_mesh(text, "OFF")
        np.testing.assert_array_equal(m.vertices[1], [1, 0, 0])

    def test_glued_off_counts(self):
        m = parse_mesh("OFF3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n", "OFF")
        self.assertEqual(m.n_faces, 1)

    def test_obj_ignores_extras_and_supports_relative_indices(self):
        text = (
            "mtllib a.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\n"
            "usemtl red\nf 1/1/1 2/1/1 3/1/1\nf -3 -2 -1\n"
        )
        m = parse_mesh(text, "obj")
        self.assertListEqual(m.faces.tolist(), [[0, 1, 2], [0, 1, 2]])

    def test_degenerate_polygon_is_dropped(self):
        text = "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 1 1 3\n"
        with self.assertLogs("walkssl.core.mesh.io", level="WARNING"):
            m = parse_mesh(text, "OFF")
        self.assertEqual(m.n_faces, 1)


class TestWriteMesh(unittest.TestCase):

    def test_off_round_trip(self):
        m = parse_mesh(MINIMAL_OFF, "OFF")
        again = parse_mesh(write_mesh(m, "OFF"), "OFF")
        np.testing.assert_array_equal(again.vertices, m.vertices)
        np.testing.assert_array_equal(again.faces, m.faces)

    def test_round_trip_preserves_floats(self):
        m = gen_synthetic("torus", seed=5)
        for fmt in ("OFF", "OBJ"):
            again = parse_mesh(write_mesh(m, fmt), fmt)
            self.assertEqual(again.n_vertices, m.n_vertices)
            self.assertEqual(again.n_faces, m.n_faces)
            np.testing.assert_array_equal(again.vertices, m.vertices)
            np.testing.assert_array_equal(again.faces, m.faces)

    def test_obj_indices_are_one_based(self):
        m = Mesh(
            vertices=[[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]],
            faces=[[0, 1, 2], [0, 2, 3]],
        )
        lines = write_mesh(m, "OBJ").decode().splitlines()
        faces = [line for line in lines if line.startswith("f ")]
        self.assertListEqual(faces, ["f 1 2 3", "f 1 3 4"])

    def test_obj_holds_only_geometry(self):
        m = gen_synthetic("cone", seed=2, source_id="cone-2")
        text = write_mesh(m, "OBJ")
        self.assertEqual({line.split()[0] for line in text.decode().splitlines()}, {"v", "f"})
        self.assertEqual(write_mesh(parse_mesh(text, "OBJ"), "OBJ"), text)

    def test_empty_face_mesh_is_rejected(self):
        m = Mesh.model_construct(
            vertices=np.eye(3), faces=np.zeros((0, 3), dtype=np.int64), source_id="", label=None
        )
        with self.assertRaises(MeshInvariantError):
            write_mesh(m, "OFF")

    def test_save_and_load(self):
        m = gen_synthetic("box", seed=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = save_mesh(m, Path(tmp) / "box-1.off")
            loaded = load_mesh(path, label="box")
        self.assertEqual(loaded.source_id, "box-1")
        self.assertEqual(loaded.label, "box")
        np.testing.assert_array_equal(loaded.vertices, m.vertices)


if __name__ == "__main__":
    unittest.main()
