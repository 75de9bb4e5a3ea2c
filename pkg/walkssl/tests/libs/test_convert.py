import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel

from walkssl.libs import dataframe
from walkssl.libs.wk_convert import to_dict, to_df, to_list, to_str


class Point(BaseModel):
    x: int
    y: int


class TestToList(unittest.TestCase):

    def test_nested_list_flattened(self):
        self.assertEqual(to_list([1, [2, None, [3]]]), [1, 2, 3])

    def test_keep_none(self):
        self.assertEqual(to_list([1, None], dropna=False), [1, None])

    def test_scalars_and_strings_wrapped(self):
        self.assertEqual(to_list("abc"), ["abc"])
        self.assertEqual(to_list(5), [5])

    def test_array(self):
        self.assertEqual(to_list(np.arange(4).reshape(2, 2)), [0, 1, 2, 3])
        self.assertEqual(to_list(np.arange(4).reshape(2, 2), flatten=False), [[0, 1], [2, 3]])


class TestToDict(unittest.TestCase):

    def test_arrays_become_lists(self):
        out = to_dict({"a": np.array([1.0, 2.0]), "b": np.int64(3)})
        self.assertEqual(out, {"a": [1.0, 2.0], "b": 3})
        self.assertIsInstance(out["b"], int)

    def test_json_string(self):
        self.assertEqual(to_dict('{"a": 1}'), {"a": 1})
        with self.assertRaises(ValueError):
            to_dict("{not json")

    def test_model(self):
        self.assertEqual(to_dict(Point(x=1, y=2)), {"x": 1, "y": 2})

    def test_unsupported(self):
        with self.assertRaises(ValueError):
            to_dict(3.5)


class TestToStr(unittest.TestCase):

    def test_json_kwargs(self):
        text = to_str({"b": np.float64(0.5), "a": [1]}, sort_keys=True)
        self.assertEqual(text, '{"a": [1], "b": 0.5}')

    def test_string_passthrough(self):
        self.assertEqual(to_str("plain"), "plain")


class TestToDf(unittest.TestCase):

    def test_models_and_empty_rows(self):
        df = to_df([Point(x=1, y=2), {"x": None, "y": None}, {"x": 3, "y": 4}])
        self.assertEqual(len(df), 2)
        self.assertEqual(df["x"].tolist(), [1, 3])

    def test_empty_list(self):
        self.assertTrue(to_df([]).empty)

    def test_concat_frames(self):
        df = to_df([pd.DataFrame({"a": [1]}), pd.DataFrame({"a": [2]})])
        self.assertEqual(df["a"].tolist(), [1, 2])


class TestJsonl(unittest.TestCase):

    def test_write_then_read(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "out" / "rows.jsonl"
            dataframe.write_jsonl([{"a": np.arange(2)}, Point(x=1, y=2)], path)
            self.assertEqual(dataframe.read_jsonl(path), [{"a": [0, 1]}, {"x": 1, "y": 2}])
            self.assertEqual(len(dataframe.jsonl_to_df(path)), 2)

    def test_blank_lines_skipped(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "rows.jsonl"
            path.write_text('{"a": 1}\n\n{"a": 2}\n')
            self.assertEqual([r["a"] for r in dataframe.read_jsonl(path)], [1, 2])

    def test_bad_line_named(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "rows.jsonl"
            path.write_text('{"a": 1}\n{oops\n')
            with self.assertRaisesRegex(ValueError, ":2:"):
                dataframe.read_jsonl(path)

    def test_empty_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = dataframe.write_jsonl([], Path(tmp) / "none.jsonl")
            self.assertEqual(path.read_text(), "")
            self.assertEqual(dataframe.read_jsonl(path), [])

    def test_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = dataframe.to_csv_file(pd.DataFrame({"a": [1, 2]}), Path(tmp) / "t.csv")
            self.assertEqual(dataframe.read_csv(path)["a"].tolist(), [1, 2])


if __name__ == "__main__":
    unittest.main()
