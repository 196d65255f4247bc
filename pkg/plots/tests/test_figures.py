import csv
import statistics
import struct

import numpy as np
import pytest

from stwave_plots.data import read_result_csv, read_volume
from stwave_plots.figures import (
    FigureRequest,
    default_cut_index,
    make_boxplot,
    make_temporal_cut,
    make_trajectory,
    render,
)

RNG = np.random.default_rng(0)


def write_result_csv(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["method", "snr", "rep", "mse", "runtime_s"])
        w.writerows(rows)


def write_volume(path, data):
    """Emit the documented volume layout: <6sHHII header + float64 payload."""
    data = np.asarray(data, dtype="<f8")
    d = data.ndim - 1
    with open(path, "wb") as f:
        f.write(struct.pack("<6sHHII", b"STVOL1", 1, d, data.shape[1], data.shape[0]))
        f.write(data.tobytes())


@pytest.fixture
def result_csv(tmp_path):
    rows = []
    for snr in (7.0, 5.0):
        for method in ("pixel1d", "slice2d", "block"):
            for rep in range(9):
                mse = {"pixel1d": 0.02, "slice2d": 0.03, "block": 0.01}[method]
                rows.append([method, snr, rep, mse * (1 + 0.1 * rep) * snr, 0.5])
    path = tmp_path / "results.csv"
    write_result_csv(path, rows)
    return path


def test_boxplot_medians_match_csv(result_csv, tmp_path):
    out = tmp_path / "box.png"
    data = make_boxplot(result_csv, 5.0, out)
    assert out.exists() and out.stat().st_size > 0
    assert data.methods == ("pixel1d", "slice2d", "block")  # benchmark order
    rows = [r for r in read_result_csv(result_csv) if r.snr == 5.0]
    for method, drawn in zip(data.methods, data.medians):
        independent = statistics.median(r.mse for r in rows if r.method == method)
        assert drawn == pytest.approx(independent, abs=1e-12)


def test_boxplot_errors(result_csv, tmp_path):
    with pytest.raises(ValueError):
        make_boxplot(result_csv, 9.0, tmp_path / "x.png")  # no rows at that SNR
    bad = tmp_path / "bad.csv"
    bad.write_text("alpha,beta\n1,2\n")
    with pytest.raises(ValueError):
        make_boxplot(bad, 5.0, tmp_path / "x.png")
    empty = tmp_path / "empty.csv"
    write_result_csv(empty, [])
    with pytest.raises(ValueError):
        make_boxplot(empty, 5.0, tmp_path / "x.png")
    assert not (tmp_path / "x.png").exists()  # no blank figure on error


def test_temporal_cut_panels_equal_slices(tmp_path):
    vols = [RNG.standard_normal((16, 8, 8)) for _ in range(3)]
    paths = []
    for i, v in enumerate(vols):
        p = tmp_path / f"v{i}.stv"
        write_volume(p, v)
        paths.append(p)
    out = tmp_path / "cut.png"
    data = make_temporal_cut(paths, out, t_index=11)
    assert out.exists() and out.stat().st_size > 0
    for panel, vol in zip(data.panels, vols):
        assert np.array_equal(panel, vol[11])  # extraction is lossless
    # identical inputs give pixel-equal panels
    twin = make_temporal_cut([paths[0], paths[0]], tmp_path / "twin.png", t_index=3)
    assert np.array_equal(twin.panels[0], twin.panels[1])


def test_temporal_cut_default_index_and_errors(tmp_path):
    v = RNG.standard_normal((128, 8, 8))
    p = tmp_path / "v.stv"
    write_volume(p, v)
    data = make_temporal_cut([p], tmp_path / "c.png")
    assert data.t_index == default_cut_index(128) == round(0.5748 * 128)
    with pytest.raises(ValueError):
        make_temporal_cut([p], tmp_path / "c.png", t_index=128)
    other = tmp_path / "other.stv"
    write_volume(other, RNG.standard_normal((64, 8, 8)))
    with pytest.raises(ValueError):
        make_temporal_cut([p, other], tmp_path / "c.png")


def test_trajectory_series_match_volumes(tmp_path):
    raw = RNG.standard_normal((32, 8, 8))
    den = raw + 0.1
    praw, pden = tmp_path / "raw.stv", tmp_path / "den.stv"
    write_volume(praw, raw)
    write_volume(pden, den)
    out = tmp_path / "traj.png"
    data = make_trajectory(praw, pden, [(2, 3), (7, 0)], out)
    assert out.exists() and out.stat().st_size > 0
    assert data.pixels == ((2, 3), (7, 0))
    assert np.array_equal(data.series[(2, 3)]["raw"], raw[:, 2, 3])
    assert np.array_equal(data.series[(7, 0)]["denoised"], den[:, 7, 0])
    with pytest.raises(ValueError):
        make_trajectory(praw, pden, [(8, 0)], out)  # out of range


def test_volume_reader_errors(tmp_path):
    p = tmp_path / "junk.stv"
    p.write_bytes(b"NOTVOL" + b"\x00" * 20)
    with pytest.raises(ValueError):
        read_volume(p)
    short = tmp_path / "short.stv"
    short.write_bytes(struct.pack("<6sHHII", b"STVOL1", 1, 1, 8, 4) + b"\x00" * 10)
    with pytest.raises(ValueError):
        read_volume(short)


def test_render_dispatch(result_csv, tmp_path):
    req = FigureRequest(kind="boxplot", inputs=(str(result_csv),),
                        out=str(tmp_path / "r.png"), snr=7.0)
    data = render(req)
    assert data.snr == 7.0
    with pytest.raises(ValueError):
        FigureRequest(kind="sparkline", inputs=(), out="x.png")


def test_cli_roundtrip(result_csv, tmp_path, capsys):
    from stwave_plots.cli import main
    out = tmp_path / "cli.png"
    assert main(["boxplot", "--csv", str(result_csv), "--snr", "7",
                 "--out", str(out)]) == 0
    assert out.exists()
    assert "medians" in capsys.readouterr().out
    assert main(["boxplot", "--csv", str(result_csv), "--snr", "99",
                 "--out", str(tmp_path / "no.png")]) == 2
