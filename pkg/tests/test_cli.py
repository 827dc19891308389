import json
import subprocess
import sys

import numpy as np
import pytest

from chigue.cli import (DatasetParseError, analyze_dataset, ingest, main,
                        read_curve_csv, read_histogram_csv)


def run_cli(*args):
    return main(list(args))


def test_reference_curves(tmp_path):
    out = tmp_path / "w.csv"
    assert run_cli("reference", "--which", "wigner", "--points", "40",
                   "--out", str(out)) == 0
    dist = read_curve_csv(str(out))
    assert len(dist.grid) == 40
    assert dist.pdf.max() < 1.0


def test_density_csv_excludes_origin_window(tmp_path):
    out = tmp_path / "d.csv"
    assert run_cli("density", "--nu", "1", "--points", "80", "--out", str(out)) == 0
    data = np.genfromtxt(out, delimiter=",", names=True)
    assert np.all(np.abs(data["lam"]) >= 0.02)


def test_density_soft_edge(tmp_path):
    out = tmp_path / "dinf.csv"
    assert run_cli("density", "--nu", "inf", "--points", "50", "--out", str(out)) == 0


def test_spacing_finite_unfolded(tmp_path):
    out = tmp_path / "pf.csv"
    assert run_cli("spacing-finite", "--k", "1", "--n", "4", "--points", "60",
                   "--smin", "0.02", "--smax", "3.4", "--unfold",
                   "--out", str(out)) == 0
    dist = read_curve_csv(str(out))
    assert dist.first_moment == pytest.approx(1.0, abs=5e-3)


def test_spacing_finite_rejects_out_of_range():
    assert run_cli("spacing-finite", "--k", "1", "--n", "500",
                   "--out", "/tmp/never.csv") == 2


def test_mean_spacing_stdout(capsys):
    assert run_cli("mean-spacing", "--k", "1") == 0
    out = capsys.readouterr().out.strip()
    assert abs(float(out) - 1.509) < 1e-3


def test_mc_sample_outputs_and_determinism(tmp_path):
    args = ("mc-sample", "--n", "12", "--nconf", "1500", "--seed", "3",
            "--k", "1", "--k", "2", "--bin-width", "0.2")
    assert run_cli(*args, "--out-prefix", str(tmp_path / "a")) == 0
    assert run_cli(*args, "--out-prefix", str(tmp_path / "b")) == 0
    for suffix in ("_k1.csv", "_k2.csv"):
        assert (tmp_path / f"a{suffix}").read_bytes() == \
            (tmp_path / f"b{suffix}").read_bytes()
    meta = json.loads((tmp_path / "a.json").read_text())
    assert meta["seed"] == 3 and meta["nconf"] == 1500
    hist = read_histogram_csv(str(tmp_path / "a_k1.csv"))
    assert np.sum(hist.masses) == pytest.approx(1.0, abs=1e-12)
    assert hist.first_moment == pytest.approx(1.0, rel=1e-10)


def test_histogram_csv_roundtrip(tmp_path):
    from chigue.cli import write_histogram_csv
    from chigue.refstats import Histogram

    h = Histogram(np.array([0.0, 0.3, 0.6, 0.9]), np.array([0.2, 0.5, 0.3]))
    path = tmp_path / "h.csv"
    write_histogram_csv(str(path), h)
    back = read_histogram_csv(str(path))
    assert np.array_equal(back.edges, h.edges)
    assert np.array_equal(back.masses, h.masses)


def test_compare_curves(tmp_path, capsys):
    out = tmp_path / "delta.csv"
    assert run_cli("compare", "--a", "wigner", "--b", "bulk",
                   "--out", str(out)) == 0
    printed = capsys.readouterr().out
    sup = float(printed.split("sup_delta =")[1].split()[0])
    assert 0.003 < sup < 0.008


def test_ingest_metadata_and_errors(tmp_path):
    path = tmp_path / "ev.txt"
    path.write_text("# mass=0.015, nu=0\n1.0 2.0 3.5\n0.5 0.9 4.0\n")
    ds = ingest(str(path))
    assert len(ds) == 2
    assert ds.mass_labels == [0.015, 0.015]
    assert ds.nu_labels == [0, 0]

    bad = tmp_path / "bad.txt"
    bad.write_text("1.0 2.0\n2.0 1.0\n")
    with pytest.raises(DatasetParseError) as exc:
        ingest(str(bad))
    assert exc.value.line == 2

    neg = tmp_path / "neg.txt"
    neg.write_text("-1.0 2.0\n")
    with pytest.raises(DatasetParseError):
        ingest(str(neg))

    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(DatasetParseError):
        ingest(str(empty))


def test_analyze_dataset_pooling_modes(tmp_path):
    rng = np.random.default_rng(12)
    path = tmp_path / "ev.txt"
    with path.open("w") as fh:
        for mass in (0.1, 0.2):
            fh.write(f"# mass={mass}\n")
            scale = 1.0 + 5 * mass
            for _ in range(120):
                row = np.sort(rng.gamma(4.0, 0.3 * scale, size=5)) + 0.01
                fh.write(" ".join(f"{v:.8f}" for v in row) + "\n")
    ds = ingest(str(path))
    h1, d1 = analyze_dataset(ds, 1, pooling="per-mass")
    h2, d2 = analyze_dataset(ds, 1, pooling="pooled")
    assert h1.first_moment == pytest.approx(1.0, rel=1e-6)
    assert h2.first_moment == pytest.approx(1.0, rel=1e-6)
    assert d1["bulk"] > 0 and d2["bulk"] > 0


def test_analyze_dataset_warns_on_few_configs(tmp_path):
    path = tmp_path / "ev.txt"
    path.write_text("1.0 2.0 3.0\n1.1 2.2 3.1\n")
    ds = ingest(str(path))
    with pytest.warns(RuntimeWarning):
        analyze_dataset(ds, 1)


def test_analyze_dataset_rejects_short_rows(tmp_path):
    path = tmp_path / "ev.txt"
    path.write_text("1.0 2.0\n")
    ds = ingest(str(path))
    with pytest.raises(ValueError):
        analyze_dataset(ds, 2)


def test_exit_codes(tmp_path):
    assert run_cli("ingest-analyze", "--path", str(tmp_path / "missing.txt"),
                   "--out-prefix", str(tmp_path / "x")) == 4
    bad = tmp_path / "bad.txt"
    bad.write_text("3.0 1.0\n")
    assert run_cli("ingest-analyze", "--path", str(bad),
                   "--out-prefix", str(tmp_path / "x")) == 2


def test_usage_error_exit_code():
    r = subprocess.run([sys.executable, "-m", "chigue.cli", "no-such-command"],
                       capture_output=True)
    assert r.returncode == 2


def test_help_mentions_defaults():
    r = subprocess.run([sys.executable, "-m", "chigue.cli", "mc-sample", "--help"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "--bin-width" in r.stdout and "--seed" in r.stdout


def test_ingest_analyze_end_to_end(tmp_path, capsys):
    # synthetic spacing data drawn from the bulk reference itself: the bulk
    # distance should sit at the binomial-noise scale
    rng = np.random.default_rng(21)
    from chigue.refstats import wigner_surmise

    # sample from the Wigner surmise by inversion on a fine table
    s = np.linspace(0, 6, 4001)
    pdf = wigner_surmise(s)
    cdf = np.cumsum(pdf) * (s[1] - s[0])
    cdf /= cdf[-1]
    draws = np.interp(rng.uniform(0, 1, (400, 2)), cdf, s) + 0.05
    path = tmp_path / "ev.txt"
    with path.open("w") as fh:
        for a, b in draws:
            lo = 1.0
            fh.write(f"{lo:.6f} {lo + a:.6f} {lo + a + b:.6f}\n")
    assert run_cli("ingest-analyze", "--path", str(path), "--k", "1",
                   "--out-prefix", str(tmp_path / "lat")) == 0
    meta = json.loads((tmp_path / "lat.json").read_text())
    assert meta["n_conf"] == 400
    assert meta["chi2_bulk"] < 0.05
