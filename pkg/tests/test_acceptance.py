"""Acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line per check straight to the terminal (so the
lines show up in a plain `pytest -v` log) and then asserts on the same rows.
"""
import pytest

from saddlepred.acceptance import CRITERIA, all_passed, format_row, run_suite


def _run(name, capsys, tmp_path, **kw):
    rows = CRITERIA[name](out_dir=str(tmp_path), **kw)
    with capsys.disabled():
        print()
        for r in rows:
            print(format_row(r))
    return rows


def _check(rows):
    failed = [format_row(r) for r in rows if not (r.passed and r.in_time)]
    assert not failed, "\n".join(failed)


def test_spectral(capsys, tmp_path):
    _check(_run("spectral", capsys, tmp_path))


def test_orbit(capsys, tmp_path):
    _check(_run("orbit", capsys, tmp_path))


def test_ode_first_order(capsys, tmp_path):
    _check(_run("ode", capsys, tmp_path))


@pytest.mark.slow
def test_theorem_rate(capsys, tmp_path):
    _check(_run("theorem_rate", capsys, tmp_path))


def test_lemma(capsys, tmp_path):
    _check(_run("lemma", capsys, tmp_path))


def test_gradients(capsys, tmp_path):
    _check(_run("gradients", capsys, tmp_path))


@pytest.mark.slow
def test_toygan_coverage(capsys, tmp_path):
    _check(_run("toygan", capsys, tmp_path))


@pytest.mark.slow
def test_determinism(capsys, tmp_path):
    _check(_run("determinism", capsys, tmp_path))


# Negative controls: same code path, deliberately wrong targets.

def test_spectral_wrong_target_fails(tmp_path):
    rows = run_suite(["spectral"], str(tmp_path), {"spectral": {"rho_target": 0.99}}, printer=None)
    assert not all_passed(rows)
    assert any(format_row(r).startswith("FAIL") for r in rows)


def test_lemma_negative_mu_fails(tmp_path):
    rows = run_suite(["lemma"], str(tmp_path), {"lemma": {"mu": -0.5}}, printer=None)
    assert not all_passed(rows)


def test_ode_tight_ratio_fails(tmp_path):
    rows = run_suite(["ode"], str(tmp_path), {"ode": {"ratio_range": (2.5, 2.6)}}, printer=None)
    assert not all_passed(rows)


def test_unknown_criterion():
    with pytest.raises(KeyError):
        run_suite(["nope"], printer=None)
