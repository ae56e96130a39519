import csv
import io

import numpy as np
import pytest
from PIL import Image

from orthosteg import cli
from orthosteg.basis import build_kernel
from orthosteg.chaos import BetaParams

KEY = "000102030405060708090a0b0c0d0e0f"


def write_cover(path, h=512, w=512, seed=0):
    rng = np.random.default_rng(seed)
    arr = rng.normal(0, 4, (h, w, 3)).cumsum(axis=0).cumsum(axis=1) / 12 + rng.uniform(70, 180, 3)
    Image.fromarray(np.clip(np.round(arr), 0, 255).astype(np.uint8)).save(path)
    return path


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def cover(tmp_path_factory):
    return write_cover(tmp_path_factory.mktemp("cli") / "cover.png")


def test_embed_extract_header_full_capacity(tmp_path, capsys, cover):
    msg = tmp_path / "msg.bin"
    msg.write_bytes(np.random.default_rng(1).bytes(12284))
    code, out, _ = run(capsys, "embed", cover, msg, "-o", tmp_path / "s.png", "--key", KEY)
    assert code == 0
    assert "bits_embedded: 98304" in out and "unstable_blocks: 0" in out
    code, out, err = run(capsys, "extract", tmp_path / "s.png", "-o", tmp_path / "out.bin", "--key", KEY)
    assert code == 0 and "integrity" in err
    assert (tmp_path / "out.bin").read_bytes() == msg.read_bytes()


def test_embed_raw_twelve_kib(tmp_path, capsys, cover):
    msg = tmp_path / "msg.bin"
    msg.write_bytes(np.random.default_rng(2).bytes(12288))
    code, out, _ = run(capsys, "embed", cover, msg, "-o", tmp_path / "s.png", "--key", KEY, "--framing", "raw")
    assert code == 0 and "bits_embedded: 98304" in out
    code, _, _ = run(
        capsys, "extract", tmp_path / "s.png", "-o", tmp_path / "o.bin", "--key", KEY, "--framing", "raw", "--length", 98304
    )
    assert code == 0 and (tmp_path / "o.bin").read_bytes() == msg.read_bytes()
    run(capsys, "extract", tmp_path / "s.png", "-o", tmp_path / "one", "--key", KEY, "--framing", "raw", "--length", 8)
    assert (tmp_path / "one").read_bytes() == msg.read_bytes()[:1]


def test_capacity_exceeded(tmp_path, capsys, cover):
    msg = tmp_path / "msg.bin"
    msg.write_bytes(bytes(12288))
    code, _, err = run(capsys, "embed", cover, msg, "-o", tmp_path / "s.png", "--key", KEY)
    assert code == 2 and "capacity exceeded: need 98336, have 98304" in err


def test_usage_errors(tmp_path, capsys, cover):
    msg = tmp_path / "m"
    msg.write_bytes(b"x")
    assert run(capsys, "embed", cover, msg, "-o", tmp_path / "s.png")[0] == 1
    assert run(capsys, "embed", cover, msg, "-o", tmp_path / "s.png", "--key", "abc")[0] == 1
    assert run(capsys, "embed", cover, msg, "-o", tmp_path / "s.png", "--key", KEY, "--mu", 40)[0] == 1
    assert run(capsys, "embed", cover, msg, "-o", tmp_path / "s.jpg", "--key", KEY)[0] == 1
    assert run(capsys, "extract", cover, "-o", tmp_path / "o", "--key", KEY, "--framing", "raw")[0] == 1
    with pytest.raises(SystemExit) as e:
        cli.main(["frobnicate"])
    assert e.value.code == 1
    assert run(capsys, "embed", tmp_path / "missing.png", msg, "-o", tmp_path / "s.png", "--key", KEY)[0] == 2


def test_wrong_mu_is_garbage_not_failure(tmp_path, capsys, cover):
    msg = tmp_path / "m"
    msg.write_bytes(b"secret payload!!")
    run(capsys, "embed", cover, msg, "-o", tmp_path / "s.png", "--key", KEY, "--framing", "raw")
    code, _, err = run(
        capsys, "extract", tmp_path / "s.png", "-o", tmp_path / "o", "--key", KEY,
        "--framing", "raw", "--length", 128, "--mu", 80,
    )
    assert code == 0 and "warning" in err
    assert (tmp_path / "o").read_bytes() != msg.read_bytes()


def test_analyze(capsys, cover):
    code, out, _ = run(capsys, "analyze", cover, cover)
    assert code == 0 and "psnr_db: inf" in out and "uiqi: 1.0" in out and "relative_entropy: 0.0" in out


def test_keygen_and_expand_key(capsys):
    _, a, _ = run(capsys, "keygen")
    _, b, _ = run(capsys, "keygen")
    assert len(a.strip()) == 32 and a != b
    bytes.fromhex(a.strip())
    _, out, _ = run(capsys, "expand-key", "--key", KEY)
    assert len(out.strip()) == 640


def test_chaos_dump(tmp_path, capsys):
    _, out, _ = run(capsys, "chaos-dump")
    values = [int(v) for v in out.split()]
    assert sorted(values) == list(range(1, 65))
    cfg = tmp_path / "beta.txt"
    cfg.write_text("# custom\nx0 = 0.41\nr=0.9\n")
    _, out2, _ = run(capsys, "chaos-dump", "--beta-config", cfg)
    assert sorted(int(v) for v in out2.split()) == list(range(1, 65)) and out2 != out
    tup = ",".join(str(v) for v in BetaParams(x0=0.41, r=0.9).as_tuple())
    assert run(capsys, "chaos-dump", "--beta", tup)[1] == out2
    cfg.write_text("bogus = 1\n")
    assert run(capsys, "chaos-dump", "--beta-config", cfg)[0] == 1


def test_basis_dump_csv(capsys):
    code, out, _ = run(capsys, "basis-dump", "qH", "--basis-param", "q=0.4", "--basis-param", "alpha_qh=1.2")
    assert code == 0
    rows = np.array([[float(v) for v in line.split(",")] for line in out.strip().splitlines()])
    from orthosteg.basis import BasisParams

    expect = np.asarray(build_kernel("qH", BasisParams(q=0.4, alpha_qh=1.2)).entries)
    assert np.array_equal(rows, expect)
    assert run(capsys, "basis-dump", "qH", "--basis-param", "q=2")[0] == 1


def test_scan_dump_and_capacity(capsys, cover):
    _, out, _ = run(capsys, "scan-dump")
    assert out.startswith("zigzag: 0 1 8 16") and "hilbert: 1 9 10 2" in out
    assert "capacity_bits: 98304" in run(capsys, "capacity", cover)[1]
    assert "capacity_bits: 512" in run(capsys, "capacity", "--size", "64x64", "--channels", 1)[1]
    assert run(capsys, "capacity", "--size", "65x64")[0] == 2


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bench_rows_and_determinism(tmp_path, capsys):
    d = tmp_path / "data"
    d.mkdir()
    write_cover(d / "a.png", 128, 128, 1)
    write_cover(d / "b.png", 128, 128, 2)
    (d / "broken.png").write_bytes(b"not a png")
    csv1, csv2 = tmp_path / "1.csv", tmp_path / "2.csv"
    code, out, err = run(capsys, "bench", d, "--csv", csv1, "--pairs", "T", "MDCT", "DCT")
    assert code == 0 and "skipping" in err
    assert "moment_pair_meets_dct_median_psnr:" in out and "DCT" in out
    run(capsys, "bench", d, "--csv", csv2, "--pairs", "T", "MDCT", "DCT")
    r1, r2 = _rows(csv1.read_text()), _rows(csv2.read_text())
    assert len(r1) == 6 and list(r1[0]) == list(cli.BENCH_COLUMNS)
    for a, b in zip(r1, r2):
        a.pop("runtime_ms"), b.pop("runtime_ms")
        assert a == b
    assert all(float(r["ber"]) == 0 for r in r1)


def test_bench_all_fail(tmp_path, capsys):
    d = tmp_path / "bad"
    d.mkdir()
    (d / "x.png").write_bytes(b"junk")
    assert run(capsys, "bench", d)[0] == 2
