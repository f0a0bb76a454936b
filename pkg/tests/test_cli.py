from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from zetaladder.cli import (
    CACHE_ENV,
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigError,
    RunConfig,
    config_from_args,
    main,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(
    family=st.sampled_from(["legendre", "chebyshev_t", "chebyshev_u", "general"]),
    T=st.lists(st.floats(100, 1e6), min_size=1, max_size=4),
    nmax=st.integers(0, 12),
    tol=st.floats(1e-14, 1e-2),
    alpha=st.floats(-0.99, 3.0),
    beta=st.floats(-0.99, 3.0),
    seed=st.integers(0, 2**31),
    cache=st.one_of(st.none(), st.text("abcxyz/_", min_size=1, max_size=10)),
)
def test_config_text_round_trip(family, T, nmax, tol, alpha, beta, seed, cache):
    cfg = RunConfig(command="verify-gram", T=T, family=family, nmax=nmax, tol=tol,
                    alpha=alpha, beta=beta, seed=seed, cache_dir=cache).validate()
    back = RunConfig.from_text(cfg.to_text())
    assert back == cfg


def test_precedence(tmp_path):
    conf = tmp_path / "c.cfg"
    conf.write_text("# defaults\nnmax = 3\ncache_dir = /from/file\nT = 1000.0\n")
    cfg = config_from_args(["verify-gram", "--config", str(conf)], environ={})
    assert cfg.nmax == 3 and cfg.cache_dir == "/from/file" and cfg.T == [1000.0]
    cfg = config_from_args(["verify-gram", "--config", str(conf)], environ={CACHE_ENV: "/env"})
    assert cfg.cache_dir == "/env"
    cfg = config_from_args(["verify-gram", "--config", str(conf), "--cache-dir", "/flag", "--nmax", "4"],
                           environ={CACHE_ENV: "/env"})
    assert cfg.cache_dir == "/flag" and cfg.nmax == 4
    cfg = config_from_args(["verify-gram", "--T", "1e3", "--family", "general"], environ={})
    assert (cfg.alpha, cfg.beta) == (0.3, -0.4)


@pytest.mark.parametrize("argv", [
    ["verify-gram", "--T", "1e3", "--family", "hermite"],
    ["verify-gram"],
    ["verify-gram", "--T", "1e3", "--nmax", "13"],
    ["ladder-build", "--range", "0", "100"],
    ["ladder-build", "--range", "200", "100"],
    ["scan-asymptotic", "--T", "1e4", "1e3"],
    ["bogus"],
])
def test_config_errors(argv, tmp_path):
    with pytest.raises(ConfigError):
        config_from_args(argv, environ={})
    out = tmp_path / "o"
    assert main(argv + ["--output", str(out)]) == EXIT_CONFIG
    man = json.loads((out / "manifest.json").read_text())
    assert man["exit_status"] == EXIT_CONFIG and man["error"]


def test_zeta_eval(tmp_path):
    out = tmp_path / "z"
    assert main(["zeta-eval", "--t", "14.134725141734693", "30", "1000", "--output", str(out)]) == EXIT_OK
    res = json.loads((out / "result.json").read_text())
    man = json.loads((out / "manifest.json").read_text())
    assert man["exit_status"] == EXIT_OK and man["config"]["command"] == "zeta-eval"
    assert {"numpy", "scipy", "mpmath", "python"} <= set(man["versions"])
    lines = (out / "result.csv").read_text().splitlines()
    assert lines[0].startswith("csv_version,t,theta,Z")
    assert len(lines) == 4
    assert res["schema_version"] == 1


def test_ladder_build_and_cache(tmp_path, monkeypatch):
    cache = tmp_path / "cache"
    monkeypatch.setenv(CACHE_ENV, str(cache))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    argv = ["ladder-build", "--range", "1000", "1010"]
    assert main(argv + ["-o", str(out1)]) == EXIT_OK
    assert list(cache.glob("*.zll"))
    assert main(argv + ["-o", str(out2)]) == EXIT_OK
    assert (out1 / "result.csv").read_bytes() == (out2 / "result.csv").read_bytes()
    assert (out1 / "result.json").read_bytes() == (out2 / "result.json").read_bytes()


def test_verify_gram_rerun_identical(tmp_path):
    cache = tmp_path / "cache"
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        argv = ["verify-gram", "--T", "1000", "--nmax", "3", "--cache-dir", str(cache), "-o", str(out)]
        assert main(argv) == EXIT_OK
        runs.append((out / "result.json").read_bytes())
    assert runs[0] == runs[1]


def test_numeric_failure_exit(tmp_path):
    out = tmp_path / "n"
    # an unreachable quadrature tolerance leaves a degraded report
    assert main(["verify-gram", "--T", "1000", "--nmax", "2", "--family", "general",
                 "--tol", "1e-30", "-o", str(out)]) == EXIT_NUMERIC
    man = json.loads((out / "manifest.json").read_text())
    assert man["flags"] and man["exit_status"] == EXIT_NUMERIC


def test_io_failure_exit(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["zeta-eval", "--t", "100", "-o", str(blocker / "sub")]) == EXIT_IO
    bad_cache = tmp_path / "cache"
    bad_cache.mkdir()
    (bad_cache / "window_1000.0_s16_k12.zll").write_bytes(b"garbage")
    out = tmp_path / "o"
    code = main(["verify-gram", "--T", "1000", "--nmax", "1", "--cache-dir", str(bad_cache), "-o", str(out)])
    assert code == EXIT_IO
    assert json.loads((out / "manifest.json").read_text())["exit_status"] == EXIT_IO


def test_window_and_scan(tmp_path):
    out = tmp_path / "w"
    assert main(["window-check", "--T", "1000", "2000", "-o", str(out)]) == EXIT_OK
    rows = json.loads((out / "result.json").read_text())["rows"]
    assert all(r["T_bar"] > r["T"] for r in rows)
    out = tmp_path / "s"
    assert main(["scan-asymptotic", "--T", "1000", "3000", "--n", "0", "-o", str(out)]) == EXIT_OK
