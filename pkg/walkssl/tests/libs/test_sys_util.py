import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np

from walkssl.libs.sys_util import SysUtil


class TestSysUtil(unittest.TestCase):

    def test_hash_json_ignores_key_order(self):
        self.assertEqual(SysUtil.hash_json({"a": 1, "b": 2}), SysUtil.hash_json({"b": 2, "a": 1}))
        self.assertNotEqual(SysUtil.hash_json({"a": 1}), SysUtil.hash_json({"a": 2}))

    def test_rng_streams(self):
        a = SysUtil.rng(0, 1, 5).random(4)
        b = SysUtil.rng(0, 1, 5).random(4)
        c = SysUtil.rng(0, 2, 5).random(4)
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, c))

    def test_get_threads(self):
        with patch.dict("os.environ", {"WALKSSL_THREADS": "4"}):
            self.assertEqual(SysUtil.get_threads(), 4)
        with patch.dict("os.environ", {"WALKSSL_THREADS": "0"}):
            self.assertEqual(SysUtil.get_threads(), 1)
        with patch.dict("os.environ", {"WALKSSL_THREADS": "many"}):
            self.assertEqual(SysUtil.get_threads(3), 3)

    def test_list_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            for name in ("b/one.off", "a/two.OBJ", "a/skip.txt"):
                (Path(tmp) / name).parent.mkdir(parents=True, exist_ok=True)
                (Path(tmp) / name).write_text("x")
            files = SysUtil.list_files(tmp, ["off", "obj"])
            self.assertEqual([p.name for p in files], ["two.OBJ", "one.off"])
            with self.assertRaises(NotADirectoryError):
                SysUtil.list_files(Path(tmp) / "missing")

    def test_atomic_write_replaces(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "deep" / "f.txt"
            SysUtil.atomic_write(path, "first")
            SysUtil.atomic_write(path, b"second")
            self.assertEqual(path.read_text(), "second")
            self.assertEqual(sorted(p.name for p in path.parent.iterdir()), ["f.txt"])


if __name__ == "__main__":
    unittest.main()
