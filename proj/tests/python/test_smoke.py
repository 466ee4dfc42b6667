import json
import os
import shutil
import struct
import subprocess

import numpy as np
import pytest

import psaug


def cli():
    path = os.environ.get("PSAUG_CLI") or shutil.which("psaug")
    if not path:
        pytest.skip("psaug CLI not available")
    return path


def write_spgm(path, array):
    frames, bins = array.shape
    with open(path, "wb") as f:
        f.write(b"SPGM" + struct.pack("<HII", 1, frames, bins))
        f.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def read_spgm(path):
    data = open(path, "rb").read()
    assert data[:4] == b"SPGM"
    _, frames, bins = struct.unpack("<HII", data[4:14])
    return np.frombuffer(data[14:], dtype="<f4").reshape(frames, bins)


def random_batch(n, seed):
    rng = np.random.default_rng(seed)
    feats = [rng.normal(size=(int(rng.integers(60, 140)), int(rng.integers(20, 40)))).astype(np.float32) for _ in range(n)]
    losses = [float(x) for x in rng.gamma(2.0, 1.5, size=n)]
    return feats, losses


def test_version_and_defaults():
    assert psaug.__version__.count(".") == 2
    config = psaug.default_config()
    assert config["schedule"]["total_epochs"] == 100
    assert psaug.regularized_ibf(0.37) == pytest.approx(0.37, abs=1e-10)
    assert psaug.regularized_ibf(0.3, 5.0, 0.6) == pytest.approx(0.3483, abs=1e-4)


def test_augment_matches_cli(tmp_path):
    feats, losses = random_batch(5, 3)
    lines = []
    for i, (x, loss) in enumerate(zip(feats, losses)):
        write_spgm(tmp_path / f"s{i}.spgm", x)
        lines.append(f"s{i} s{i}.spgm {loss!r}")
    (tmp_path / "batch.manifest").write_text("\n".join(lines) + "\n")

    out_dir = tmp_path / "out"
    subprocess.run(
        [cli(), "--seed", "42", "augment", "--manifest", str(tmp_path / "batch.manifest"),
         "--out", str(out_dir), "--epoch", "70", "--batch-index", "1"],
        check=True,
    )
    config = {"master_seed": 42}
    out, report = psaug.augment_batch(feats, losses, 70, config, batch_index=1)
    assert report[0]["record"] == "batch"
    assert len(report) == 6
    cli_report = [json.loads(line) for line in (out_dir / "report.jsonl").read_text().splitlines()]
    assert [r["plan"] for r in cli_report[1:]] == [r["plan"] for r in report[1:]]
    for i, arr in enumerate(out):
        assert arr.dtype == np.float32
        assert np.array_equal(arr.view(np.uint32), read_spgm(out_dir / f"s{i}.spgm").view(np.uint32))

    replayed = psaug.replay_report(feats, report)
    for a, b in zip(replayed, out):
        assert np.array_equal(a.view(np.uint32), b.view(np.uint32))


def test_lambda_matches_cli_policy():
    losses = [0.3, 2.5, 1.1, 7.0, 0.0, 4.4]
    trace = psaug.hybrid_normalize(losses)
    text = subprocess.run(
        [cli(), "policy", "--losses", ",".join(repr(x) for x in losses)],
        check=True, capture_output=True, text=True,
    ).stdout
    rows = text.strip().splitlines()[1:]
    cli_lambda = [float(r.split(",")[-1]) for r in rows]
    assert trace["lambda"] == pytest.approx(cli_lambda, abs=1e-12)


def test_schedule_endpoints():
    config = {"schedule": {"total_epochs": 10, "mask": {"p_start": 0.2, "p_end": 0.7}}}
    assert psaug.schedule_at(0, config)["p_mask"] == pytest.approx(0.2, abs=1e-12)
    assert psaug.schedule_at(10, config)["p_mask"] == pytest.approx(0.7, abs=1e-12)


def test_errors_surface_as_exceptions():
    with pytest.raises(ValueError):
        psaug.augment_batch([], [], 0)
    with pytest.raises(ValueError):
        psaug.augment_batch([np.zeros((4, 2), np.float32)], [1.0, 2.0], 0)
    with pytest.raises(ValueError):
        psaug.augment_batch([np.zeros(8, np.float32)], [1.0], 0)
    with pytest.raises(ValueError):
        psaug.schedule_at(0, {"unknown_key": 1})
