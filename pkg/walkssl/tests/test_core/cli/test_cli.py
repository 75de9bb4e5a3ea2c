import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from walkssl.cli import (
    ManifestRecord,
    cmd_ingest,
    cmd_prep,
    cmd_retrieve,
    cmd_svm,
    cmd_synth,
    cmd_walks_dump,
    load_dataset,
    main,
    read_manifest,
    split_labels,
    write_manifest,
)
from walkssl.core.abc import EXIT_CONFIG, EXIT_DATA, EXIT_OK, ConfigError, DataError, DatasetError
from walkssl.core.eval import write_report
from walkssl.core.mesh import Mesh, gen_synthetic, load_mesh, save_mesh
from walkssl.core.pipeline import FeatureVector, save_embeddings
from walkssl.core.resample import ResampleTargets
from walkssl.core.walker import make_batch


def run_cli(*argv) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(["--log-level", "ERROR", *argv])
    return code, out.getvalue(), err.getvalue()


class TestSplits(unittest.TestCase):

    def test_eighty_twenty(self):
        labels = [c for c in "abcde" for _ in range(20)]
        splits = split_labels(labels, 0.2, seed=0)
        self.assertEqual(splits.count("test"), 20)
        for c in "abcde":
            self.assertEqual(sum(s == "test" for s, l in zip(splits, labels) if l == c), 4)

    def test_deterministic(self):
        labels = ["a", "b"] * 10
        self.assertEqual(split_labels(labels, 0.3, 4), split_labels(labels, 0.3, 4))

    def test_singleton_class_warns(self):
        with self.assertLogs("walkssl.cli.manifest", level="WARNING"):
            splits = split_labels(["a", "b"], 0.2)
        self.assertEqual(splits, ["train", "train"])


class TestManifest(unittest.TestCase):

    def test_class_alias(self):
        r = ManifestRecord.model_validate(
            {"path": "m.off", "source_id": "m", "class": "box", "face_count": 12, "split": "test"}
        )
        self.assertEqual(r.label, "box")
        with tempfile.TemporaryDirectory() as tmp:
            path = write_manifest([r], Path(tmp) / "manifest.jsonl")
            self.assertIn('"class": "box"', path.read_text())
            self.assertEqual(read_manifest(path), [r])

    def test_unknown_field_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "manifest.jsonl"
            path.write_text('{"path": "m.off", "source_id": "m", "face_count": 4, "colour": 1}\n')
            with self.assertRaises(DataError):
                read_manifest(path)


class TestSynth(unittest.TestCase):

    def test_five_by_twenty(self):
        with tempfile.TemporaryDirectory() as tmp:
            records = cmd_synth(tmp, per_class=20, seed=0)
            self.assertEqual(len(records), 100)
            self.assertEqual(sum(r.split == "test" for r in records), 20)
            self.assertEqual(len(read_manifest(Path(tmp) / "manifest.jsonl")), 100)
            self.assertTrue(all((Path(tmp) / r.path).exists() for r in records))

    def test_same_seed_same_manifest(self):
        with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
            cmd_synth(a, ["sphere", "torus"], per_class=3, seed=5)
            cmd_synth(b, ["sphere", "torus"], per_class=3, seed=5)
            self.assertEqual(
                (Path(a) / "manifest.jsonl").read_bytes(), (Path(b) / "manifest.jsonl").read_bytes()
            )
            self.assertEqual(
                (Path(a) / "meshes" / "torus-002.off").read_bytes(),
                (Path(b) / "meshes" / "torus-002.off").read_bytes(),
            )

    def test_one_per_class_warns(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertLogs("walkssl.cli.manifest", level="WARNING"):
                records = cmd_synth(tmp, ["box"], per_class=1)
            self.assertEqual(records[0].split, "train")


def write_spheres(root: Path, n: int) -> Path:
    records = []
    for i in range(n):
        mesh = gen_synthetic("sphere", {"subdivisions": 1}, seed=i, source_id=f"s{i}")
        save_mesh(mesh, root / f"s{i}.off")
        records.append(
            ManifestRecord(path=f"s{i}.off", source_id=f"s{i}", label="sphere", face_count=mesh.n_faces)
        )
    return write_manifest(records, root / "manifest.jsonl")


class TestPrep(unittest.TestCase):

    def test_rows_multiply_by_targets(self):
        with tempfile.TemporaryDirectory() as tmp:
            manifest = write_spheres(Path(tmp) / "in", 3)
            rows, skipped = cmd_prep(manifest, Path(tmp) / "out", ResampleTargets(face_counts=[80, 320]))
            self.assertEqual(skipped, 0)
            self.assertEqual(len(rows), 6)
            self.assertEqual([r.face_count for r in rows[:2]], [80, 320])
            self.assertEqual({r.source_id for r in rows}, {"s0", "s1", "s2"})
            self.assertEqual(len(read_manifest(Path(tmp) / "out" / "manifest.jsonl")), 6)

    def test_failing_mesh_skipped(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp) / "in"
            write_spheres(root, 2)
            records = read_manifest(root / "manifest.jsonl")
            records.append(ManifestRecord(path="missing.off", source_id="gone", face_count=80))
            manifest = write_manifest(records, root / "manifest.jsonl")
            with self.assertLogs(level="WARNING"):
                rows, skipped = cmd_prep(manifest, Path(tmp) / "out", ResampleTargets(face_counts=[80]))
            self.assertEqual(skipped, 1)
            self.assertEqual(len(rows), 2)

    def test_unsorted_targets_are_a_config_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            manifest = write_spheres(Path(tmp) / "in", 1)
            code, _, err = run_cli(
                "prep", "--manifest", str(manifest), "--out", str(Path(tmp) / "out"),
                "--targets", "320", "80",
            )
            self.assertEqual(code, EXIT_CONFIG)
            self.assertIn("error: Invalid resampling targets", err)
            self.assertFalse((Path(tmp) / "out").exists())

    def test_inputs_untouched(self):
        with tempfile.TemporaryDirectory() as tmp:
            manifest = write_spheres(Path(tmp) / "in", 1)
            before = manifest.read_bytes()
            cmd_prep(manifest, Path(tmp) / "out", ResampleTargets(face_counts=[320]))
            self.assertEqual(manifest.read_bytes(), before)


class TestIngest(unittest.TestCase):

    def test_class_per_folder(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp) / "tree"
            for cls in ("box", "cone"):
                for i in range(5):
                    save_mesh(gen_synthetic(cls, seed=i), root / cls / f"{cls}{i}.off")
            (root / "cone" / "broken.off").write_text("OFF\n3 1 0\n0 0 0\n")
            with self.assertLogs(level="WARNING"):
                records = cmd_ingest(root, Path(tmp) / "out", test_fraction=0.2)
            self.assertEqual(len(records), 10)
            self.assertEqual({r.label for r in records}, {"box", "cone"})
            self.assertEqual(sum(r.split == "test" for r in records), 2)
            self.assertTrue(all(Path(r.path).is_absolute() for r in records))

    def test_split_directories_fix_the_split(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp) / "ModelNet"
            for cls in ("box", "cone"):
                for split, n in (("train", 3), ("test", 2)):
                    for i in range(n):
                        mesh = gen_synthetic(cls, seed=i)
                        save_mesh(mesh, root / cls / split / f"{cls}_{split}{i:04d}.off")
            for i in range(5):
                save_mesh(gen_synthetic("sphere", seed=i), root / "sphere" / f"sphere{i}.off")
            records = cmd_ingest(root, Path(tmp) / "out", test_fraction=0.2, seed=1)
            by_id = {r.source_id: r for r in records}
            self.assertEqual(len(by_id), 15)
            self.assertEqual(by_id["box-train-box_train0000"].split, "train")
            self.assertEqual(by_id["cone-test-cone_test0001"].split, "test")
            self.assertEqual(by_id["cone-test-cone_test0001"].label, "cone")
            for cls in ("box", "cone"):
                splits = [r.split for r in records if r.label == cls]
                self.assertEqual((splits.count("train"), splits.count("test")), (3, 2))
            spheres = [r.split for r in records if r.label == "sphere"]
            self.assertEqual(spheres.count("test"), 1)
            self.assertEqual(read_manifest(Path(tmp) / "out" / "manifest.jsonl"), records)


class TestNormalization(unittest.TestCase):

    def test_scaled_offset_meshes_walk_in_unit_box(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp) / "tree"
            for i in range(3):
                m = gen_synthetic("sphere", {"subdivisions": 1}, seed=i)
                big = Mesh(vertices=m.vertices * 50.0 + 200.0, faces=m.faces)
                save_mesh(big, root / "sphere" / f"s{i}.off")
            cmd_ingest(root, Path(tmp) / "raw", test_fraction=0.0)
            rows, _ = cmd_prep(
                Path(tmp) / "raw" / "manifest.jsonl",
                Path(tmp) / "prepped",
                ResampleTargets(face_counts=[80, 320]),
            )
            first = load_mesh(Path(tmp) / "prepped" / rows[0].path)
            self.assertLess(np.linalg.norm(first.centroid()), 1e-9)
            self.assertAlmostEqual(first.bounding_radius(), 1.0, places=9)

            dataset = load_dataset(rows, Path(tmp) / "prepped")
            batch = make_batch(dataset, 3, walk_len=16, jump_prob=0.1, rng=np.random.default_rng(0))
            self.assertLessEqual(np.abs(batch.sequences).max(), 1.0 + 1e-9)

    def test_raw_manifest_normalized_on_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            m = gen_synthetic("box", seed=0)
            save_mesh(Mesh(vertices=m.vertices * 30.0 - 70.0, faces=m.faces), Path(tmp) / "b.off")
            record = ManifestRecord(path="b.off", source_id="b", face_count=m.n_faces)
            (mesh,) = load_dataset([record], tmp).meshes
            self.assertAlmostEqual(mesh.bounding_radius(), 1.0, places=9)
            (raw,) = load_dataset([record], tmp, normalize=False).meshes
            self.assertGreater(np.abs(raw.vertices).max(), 30.0)


def perfect_embeddings(path: Path) -> Path:
    features, splits = [], {}
    for c, label in enumerate(["a", "b", "c"]):
        for i in range(4):
            sid = f"{label}{i}"
            values = [10.0 * (c == 1) + 0.1 * i, 10.0 * (c == 2) + 0.05 * i]
            features.append(FeatureVector(values=values, source_id=sid, label=label))
            splits[sid] = "test" if i == 3 else "train"
    return save_embeddings(features, path, splits)


class TestEvaluationCommands(unittest.TestCase):

    def test_retrieve_perfect_features(self):
        with tempfile.TemporaryDirectory() as tmp:
            emb = perfect_embeddings(Path(tmp) / "emb.jsonl")
            code, out, _ = run_cli("retrieve", "--embeddings", str(emb), "--out", str(Path(tmp) / "r.json"))
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(json.loads(out)["map"], 1.0)
            self.assertEqual(json.loads((Path(tmp) / "r.json").read_text())["n_queries"], 3)

    def test_retrieve_test_scope(self):
        with tempfile.TemporaryDirectory() as tmp:
            emb = perfect_embeddings(Path(tmp) / "emb.jsonl")
            with self.assertLogs(level="WARNING"):
                with self.assertRaises(DatasetError):
                    cmd_retrieve(emb, scope="test")

    def test_svm(self):
        with tempfile.TemporaryDirectory() as tmp:
            emb = perfect_embeddings(Path(tmp) / "emb.jsonl")
            code, out, _ = run_cli("svm", "--embeddings", str(emb), "--reg", "0.1", "--epochs", "100")
            self.assertEqual(code, EXIT_OK)
            report = json.loads(out)
            self.assertEqual(report["accuracy"], 1.0)
            self.assertEqual(report["classes"], ["a", "b", "c"])
            self.assertEqual(report["n_train"], 9)

    def test_svm_averaged_over_runs(self):
        with tempfile.TemporaryDirectory() as tmp:
            emb = perfect_embeddings(Path(tmp) / "emb.jsonl")
            code, out, _ = run_cli(
                "svm", "--embeddings", str(emb), "--reg", "0.1", "--epochs", "100", "--runs", "3"
            )
            self.assertEqual(code, EXIT_OK)
            report = json.loads(out)
            self.assertEqual(report["runs"], 3)
            self.assertEqual(report["run_accuracies"], [1.0, 1.0, 1.0])
            self.assertEqual(report["accuracy"], 1.0)
            self.assertEqual(report["accuracy_std"], 0.0)

    def test_svm_run_mean_and_spread(self):
        with tempfile.TemporaryDirectory() as tmp:
            features, splits = [], {}
            rng = np.random.default_rng(3)
            for i in range(40):
                label = "ab"[i % 2]
                sid = f"{label}{i}"
                features.append(FeatureVector(values=rng.normal(size=4), source_id=sid, label=label))
                splits[sid] = "test" if i >= 30 else "train"
            emb = save_embeddings(features, Path(tmp) / "noise.jsonl", splits)
            report = cmd_svm(emb, reg_strength=1e-2, epochs=5, seed=0, runs=4)
            scores = np.array(report["run_accuracies"])
            self.assertEqual(len(scores), 4)
            self.assertAlmostEqual(report["accuracy"], scores.mean())
            self.assertAlmostEqual(report["accuracy_std"], scores.std())
            self.assertEqual(scores[0], cmd_svm(emb, reg_strength=1e-2, epochs=5, seed=0)["accuracy"])
            with self.assertRaises(ConfigError):
                cmd_svm(emb, runs=0)

    def test_report_table(self):
        with tempfile.TemporaryDirectory() as tmp:
            a = write_report({"map": 0.9}, Path(tmp) / "a.json")
            b = write_report({"accuracy": 0.8}, Path(tmp) / "b.json")
            c = write_report({"map": 0.7}, Path(tmp) / "c.json")
            code, out, _ = run_cli(
                "report", "--run", "clustering", str(a), str(b), "--run", "plain", str(c)
            )
            self.assertEqual(code, EXIT_OK)
            self.assertIn("clustering", out)
            self.assertIn("plain", out)

    def test_missing_embeddings_file(self):
        code, _, err = run_cli("retrieve", "--embeddings", "/nonexistent/emb.jsonl")
        self.assertEqual(code, EXIT_DATA)
        self.assertIn("error", err)


class TestGradcheckCommand(unittest.TestCase):

    def test_tiny_passes(self):
        code, out, _ = run_cli("gradcheck", "--preset", "tiny")
        self.assertEqual(code, EXIT_OK)
        for name in ("dense", "gru", "encoder", "composite"):
            self.assertIn(name, out)


class TestWalksDump(unittest.TestCase):

    def test_records(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = save_mesh(gen_synthetic("sphere", {"subdivisions": 1}), Path(tmp) / "s.off")
            records = cmd_walks_dump(path, count=3, walk_len=10, seed=2)
            self.assertEqual(len(records), 3)
            for r in records:
                self.assertEqual(len(r["vertices"]), 10)
                self.assertTrue(r["jumps"][0])
                self.assertGreater(r["coverage"], 0.0)
                self.assertLessEqual(r["coverage"], 1.0)
            again = cmd_walks_dump(path, count=3, walk_len=10, seed=2)
            self.assertEqual(records, again)


class TestTrainCommand(unittest.TestCase):

    def test_missing_keys_reported_together(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = Path(tmp) / "run.cfg"
            cfg.write_text("# partial\npreset=desk\nbatch_size=4\n")
            code, _, err = run_cli("train", "--config", str(cfg))
            self.assertEqual(code, EXIT_CONFIG)
            for key in ("checkpoint_dir", "epochs", "manifest", "report_dir", "seed"):
                self.assertIn(key, err)

    def test_end_to_end_smoke(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            cmd_synth(tmp / "data", ["sphere", "box"], per_class=4, seed=1, test_fraction=0.25)
            cfg = tmp / "run.cfg"
            cfg.write_text(
                "\n".join(
                    [
                        "preset=tiny",
                        "epochs=1",
                        "seed=0",
                        f"manifest={tmp / 'data' / 'manifest.jsonl'}",
                        f"checkpoint_dir={tmp / 'ckpt'}",
                        f"report_dir={tmp / 'reports'}",
                        "batch_size=2",
                        "walk_len=8",
                        "threads=1",
                        "dtype=float64",
                    ]
                )
                + "\n"
            )
            code, _, err = run_cli("train", "--config", str(cfg))
            self.assertEqual(code, EXIT_OK, err)
            self.assertTrue((tmp / "ckpt" / "checkpoint.npz").exists())
            self.assertTrue((tmp / "ckpt" / "trace.csv").exists())
            self.assertTrue((tmp / "reports" / "epoch_losses.csv").exists())

            emb = tmp / "emb.jsonl"
            code, _, err = run_cli(
                "embed",
                "--checkpoint", str(tmp / "ckpt"),
                "--manifest", str(tmp / "data" / "manifest.jsonl"),
                "--out", str(emb),
                "--walks", "2",
                "--threads", "1",
            )
            self.assertEqual(code, EXIT_OK, err)
            lines = emb.read_text().splitlines()
            self.assertEqual(len(lines), 8)
            self.assertEqual(len(json.loads(lines[0])["vector"]), 16)
            self.assertTrue(emb.with_suffix(".csv").exists())

            code, out, err = run_cli("retrieve", "--embeddings", str(emb))
            self.assertEqual(code, EXIT_OK, err)
            self.assertTrue(0.0 <= json.loads(out)["map"] <= 1.0)

            code, _, _ = run_cli("clusters", "dump", "--checkpoint", str(tmp / "ckpt"))
            self.assertEqual(code, EXIT_DATA)


if __name__ == "__main__":
    unittest.main()
