"""Session fixtures: real CSVs produced by the badapprox command line.

The plots package only ever sees CSV files, so the fixtures are generated
the same way users generate them, through the primary CLI in a subprocess.
"""

import subprocess
import sys

import pytest


def _run_badapprox(subcommand: str, out_dir, settings: dict):
    cfg = out_dir / "run.cfg"
    cfg.write_text(
        "".join(f"{k} = {v}\n" for k, v in settings.items()), encoding="utf-8"
    )
    proc = subprocess.run(
        [sys.executable, "-m", "badapprox.cli", subcommand,
         "--config", str(cfg), "--out-dir", str(out_dir)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="session")
def records_csv(tmp_path_factory):
    out = _run_badapprox(
        "records", tmp_path_factory.mktemp("records"),
        {"subject": "golden", "t_max": 10_000},
    )
    return str(out / "records.csv")


@pytest.fixture(scope="session")
def closed_records_csv(tmp_path_factory):
    out = _run_badapprox(
        "records", tmp_path_factory.mktemp("closed"),
        {"subject": "rational", "rational_basis": "1 2", "t_max": 20},
    )
    return str(out / "records.csv")


@pytest.fixture(scope="session")
def samples_csv(tmp_path_factory):
    out = _run_badapprox(
        "verify-theorem", tmp_path_factory.mktemp("samples"),
        {"d": 4, "a": 3, "b": 1, "c": 2, "b_kind": "algebraic", "seed": 7,
         "t_max": 10_000, "samples": 50, "slack": 0.25, "parallelism": 1},
    )
    return str(out / "samples.csv")


@pytest.fixture(scope="session")
def profile_csv_divergent(tmp_path_factory):
    out = _run_badapprox(
        "series", tmp_path_factory.mktemp("divergent"),
        {"a": 3, "b": 1, "c": 2, "d": 4, "psi_gamma": 1.0, "phi_gamma": 1.0,
         "series_t_max": 5000},
    )
    return str(out / "profile.csv")


@pytest.fixture(scope="session")
def profile_csv_convergent(tmp_path_factory):
    out = _run_badapprox(
        "series", tmp_path_factory.mktemp("convergent"),
        {"a": 3, "b": 1, "c": 2, "d": 4, "psi_gamma": 1.0, "phi_gamma": 3.5,
         "series_t_max": 5000},
    )
    return str(out / "profile.csv")


@pytest.fixture(scope="session")
def profile_csv_boundary(tmp_path_factory):
    out = _run_badapprox(
        "series", tmp_path_factory.mktemp("boundary"),
        {"a": 3, "b": 1, "c": 2, "d": 4, "psi_gamma": 0.5, "phi_gamma": 2.0,
         "series_t_max": 2000},
    )
    return str(out / "profile.csv")
