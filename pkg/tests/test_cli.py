import csv
import json

import numpy as np
import pytest

from trackseg import load_image, load_mask, save_image, save_mask
from trackseg.cli import main
from phantoms import track_phantom, write_phantom_pair

SMALL = dict(size=64, n_tracks=(3, 6), length=(8.0, 20.0))


def run_cli(*args):
    try:
        return main([str(a) for a in args])
    except SystemExit as exc:
        return exc.code


@pytest.fixture
def pair(tmp_path):
    return write_phantom_pair(tmp_path, "sample", seed=5, **SMALL)


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


# --- decompose


def test_decompose_writes_planes_and_manifest(tmp_path, pair):
    out = tmp_path / "dec"
    assert run_cli("decompose", pair[0], "--levels", 5, "--out", out) == 0
    planes = sorted(p.name for p in out.glob("*.png"))
    assert planes == [f"detail_{j:02d}.png" for j in range(1, 6)] + ["smooth.png"]
    manifest = json.loads((out / "manifest.json").read_text())
    for name in manifest["outputs"]:
        assert (out / name).exists()
    assert manifest["config"]["levels"] == 5
    assert set(manifest["timings_sec"]) == {"load", "decompose"}


def test_decompose_too_small_exits_2(tmp_path, pair):
    assert run_cli("decompose", pair[0], "--levels", 9, "--out", tmp_path / "x") == 2


def test_decompose_constant_image_mid_gray(tmp_path):
    flat = tmp_path / "flat.png"
    save_image(np.full((64, 64), 170.0), flat)
    out = tmp_path / "dec"
    assert run_cli("decompose", flat, "--levels", 4, "--out", out) == 0
    for j in range(1, 5):
        plane = load_image(out / f"detail_{j:02d}.png")
        assert (plane == 128).all()


def test_decompose_dump_raw_writes_float_maps(tmp_path, pair):
    out = tmp_path / "dec"
    assert run_cli("decompose", pair[0], "--levels", 4, "--out", out, "--dump-raw") == 0
    assert sorted(p.name for p in out.glob("*.pfm")) == [
        "detail_01.pfm", "detail_02.pfm", "detail_03.pfm", "detail_04.pfm", "smooth.pfm",
    ]


# --- segment


@pytest.mark.parametrize("levels,expected", [(3, 1), (5, 3)])
def test_segment_mask_count(tmp_path, pair, levels, expected):
    out = tmp_path / "seg"
    assert run_cli("segment", pair[0], "--levels", levels, "--out", out) == 0
    masks = sorted(p.name for p in out.glob("mask_*.png"))
    assert masks == [f"mask_L{j}.png" for j in range(3, 3 + expected)]


def test_segment_runs_are_byte_identical(tmp_path, pair):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert run_cli("segment", pair[0], "--levels", 5, "--out", out,
                       "--threshold", 5) == 0
    for name in ("mask_L3.png", "mask_L4.png", "mask_L5.png"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


# --- evaluate


def test_evaluate_writes_table_overlays_and_optimum(tmp_path, pair):
    image_path, gt_path = pair
    out = tmp_path / "ev"
    assert run_cli("evaluate", image_path, "--gt", gt_path, "--levels", 5,
                   "--out", out, "--threshold", 5) == 0

    rows = read_csv(out / "metrics.csv")
    assert [r["level"] for r in rows] == ["3", "4", "5"]
    assert list(rows[0]) == ["level", "tp", "tn", "fp", "fn",
                             "precision_pct", "recall_pct", "accuracy_pct", "mcc_pct"]
    assert sorted(p.name for p in out.glob("overlay_*.png")) == [
        "overlay_L3.png", "overlay_L4.png", "overlay_L5.png",
    ]
    assert (out / "mask_optimal.png").exists()

    # the manifest's optimum is the argmax of the table
    manifest = json.loads((out / "manifest.json").read_text())
    external_argmax = min(
        (r for r in rows), key=lambda r: (-float(r["mcc_pct"]), int(r["level"]))
    )
    assert manifest["optimal_level"] == int(external_argmax["level"])
    counted = sum(int(rows[0][k]) for k in ("tp", "tn", "fp", "fn"))
    assert counted == 64 * 64


def test_evaluate_gt_equal_to_produced_mask_scores_100(tmp_path, pair):
    seg_out = tmp_path / "seg"
    assert run_cli("segment", pair[0], "--levels", 5, "--out", seg_out,
                   "--threshold", 5) == 0
    gt_path = tmp_path / "exact_gt.png"
    save_mask(load_mask(seg_out / "mask_L4.png"), gt_path)

    out = tmp_path / "ev"
    assert run_cli("evaluate", pair[0], "--gt", gt_path, "--levels", 5,
                   "--out", out, "--threshold", 5) == 0
    rows = {r["level"]: r for r in read_csv(out / "metrics.csv")}
    assert float(rows["4"]["mcc_pct"]) == 100.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["optimal_level"] == 4


def test_evaluate_json_format(tmp_path, pair):
    out = tmp_path / "ev"
    assert run_cli("evaluate", pair[0], "--gt", pair[1], "--levels", 4,
                   "--out", out, "--format", "json") == 0
    payload = json.loads((out / "metrics.json").read_text())
    assert [row["level"] for row in payload["levels"]] == [3, 4]
    assert {"tp", "tn", "fp", "fn", "mcc_pct"} <= set(payload["levels"][0])


def test_evaluate_dimension_mismatch_reports_both_sizes(tmp_path, pair, capsys):
    small_gt = tmp_path / "small_gt.png"
    save_mask(np.zeros((32, 32), bool), small_gt)
    assert run_cli("evaluate", pair[0], "--gt", small_gt, "--levels", 4,
                   "--out", tmp_path / "ev") == 2
    err = capsys.readouterr().err
    assert "64x64" in err and "32x32" in err


def test_evaluate_requires_gt_flag(tmp_path, pair):
    assert run_cli("evaluate", pair[0], "--out", tmp_path / "ev") == 1


# --- auto


def test_auto_emits_only_three_artifacts(tmp_path, pair):
    out = tmp_path / "auto"
    assert run_cli("auto", pair[0], "--gt", pair[1], "--levels", 5,
                   "--out", out, "--threshold", 5) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "manifest.json", "mask_optimal.png", "overlay_optimal.png",
    ]


def test_auto_agrees_with_evaluate(tmp_path, pair):
    ev_out, auto_out = tmp_path / "ev", tmp_path / "auto"
    args = (pair[0], "--gt", pair[1], "--levels", 5, "--threshold", 5)
    assert run_cli("evaluate", *args, "--out", ev_out) == 0
    assert run_cli("auto", *args, "--out", auto_out) == 0
    ev = json.loads((ev_out / "manifest.json").read_text())
    auto = json.loads((auto_out / "manifest.json").read_text())
    assert ev["optimal_level"] == auto["optimal_level"]
    assert ev["per_level"] == auto["per_level"]
    assert (ev_out / "mask_optimal.png").read_bytes() == \
        (auto_out / "mask_optimal.png").read_bytes()


def test_auto_without_gt_is_usage_error(tmp_path, pair):
    assert run_cli("auto", pair[0], "--out", tmp_path / "x") == 1


def test_auto_batch_and_gt_are_mutually_exclusive(tmp_path, pair):
    assert run_cli("auto", pair[0], "--gt", pair[1], "--batch", tmp_path,
                   "--out", tmp_path / "x") == 1


def test_auto_batch_processes_pairs_and_skips_orphans(tmp_path):
    batch = tmp_path / "batch"
    batch.mkdir()
    for i, stem in enumerate(("alpha", "beta", "gamma")):
        write_phantom_pair(batch, stem, seed=20 + i, **SMALL)
    image, _ = track_phantom(seed=30, **SMALL)
    save_image(image, batch / "orphan.png")

    out = tmp_path / "runs"
    assert run_cli("auto", "--batch", batch, "--levels", 5, "--out", out,
                   "--threshold", 5) == 0
    rows = read_csv(out / "summary.csv")
    assert [r["stem"] for r in rows] == ["alpha", "beta", "gamma"]
    for stem in ("alpha", "beta", "gamma"):
        assert (out / stem / "mask_optimal.png").exists()
        assert (out / stem / "manifest.json").exists()
    assert not (out / "orphan").exists()


# --- flags and determinism


def test_invalid_levels_value_is_usage_error(tmp_path, pair):
    assert run_cli("auto", pair[0], "--gt", pair[1], "--levels", 99,
                   "--out", tmp_path / "x") == 1


def test_unknown_command_is_usage_error():
    assert run_cli("frobnicate") == 1


def test_auto_runs_are_byte_identical(tmp_path, pair):
    outs = (tmp_path / "r1", tmp_path / "r2")
    for out in outs:
        assert run_cli("auto", pair[0], "--gt", pair[1], "--levels", 5,
                       "--out", out, "--threshold", 5) == 0
    for name in ("mask_optimal.png", "overlay_optimal.png"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    manifests = [json.loads((out / "manifest.json").read_text()) for out in outs]
    for manifest in manifests:
        manifest.pop("timings_sec")
        manifest["config"].pop("out")  # the only intentionally differing setting
    assert manifests[0] == manifests[1]
