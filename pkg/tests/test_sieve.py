import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from galmax import certify, cli, ecff, sieve
from galmax import numfield as nf
from galmax.errors import InvalidInputError, ResourceCapError


def test_box_x1_has_eight_pairs():
    pairs = list(sieve.enumerate_box(1))
    assert len(pairs) == 8
    assert (0, 0) not in pairs
    assert all(ecff.discriminant(a, b) != 0 for a, b in pairs)


@pytest.mark.parametrize("x", [0, 1, 5, 13, 20, 40])
def test_box_count_formula(x):
    pairs = list(sieve.enumerate_box(x))
    assert len(pairs) == sieve.box_count(x)
    # independently: (2x+1)^2 minus a direct scan of the singular locus
    singular = sum(
        1
        for a in range(-x, x + 1)
        for b in range(-x, x + 1)
        if ecff.discriminant(a, b) == 0
    )
    assert len(pairs) == (2 * x + 1) ** 2 - singular


def test_box_growth_is_roughly_4x2():
    assert abs(sieve.box_count(50) / 50**2 - 4) < 0.2


def test_box_cap():
    with pytest.raises(ResourceCapError):
        list(sieve.enumerate_box(10**4))


def test_field_box():
    K = nf.MonogenicField([1, 1, 1])
    pairs = list(sieve.enumerate_box(sieve.BoxSpec(1, field=K)))
    assert 0 < len(pairs) < 81
    for a, b in pairs:
        assert not ecff.discriminant(a, b).is_zero()


def test_batch_signatures_match_collect():
    pairs = [(1, 1), (2, 3), (-1, 3)]
    batched = sieve.batch_signatures(pairs, 200)
    for (a, b), sigs in zip(pairs, batched):
        direct = certify.collect_signatures(
            ecff.validate(Fraction(a), Fraction(b)), certify.CertParams(prime_bound=200, l_max=5)
        )
        assert [s.to_json() for s in sigs] == [s.to_json() for s in direct]


def test_density_scan_disc_square():
    rep = sieve.density_scan([20], "disc-square")
    # independent enumeration with integer square testing
    direct = sum(
        1
        for a in range(-20, 21)
        for b in range(-20, 21)
        if ecff.discriminant(a, b) != 0
        and ecff.discriminant(a, b) >= 0
        and math.isqrt(ecff.discriminant(a, b)) ** 2 == ecff.discriminant(a, b)
    )
    assert rep.rows[0].failures == direct
    assert rep.rows[0].total == sieve.box_count(20)


def test_density_scan_empty_box_row():
    # x = 0 leaves only the singular pair (0, 0): an empty row
    rep = sieve.density_scan([0], "disc-square")
    assert rep.rows[0].total == 0 and rep.rows[0].failures == 0
    rep = sieve.density_scan([0], "serre", certify.CertParams(prime_bound=50, l_max=5))
    assert rep.rows[0].to_json()["x"] == 0


def test_density_scan_requires_increasing():
    with pytest.raises(InvalidInputError):
        sieve.density_scan([10, 10], "disc-square")


def test_density_scan_serre_caps():
    with pytest.raises(ResourceCapError):
        sieve.density_scan([300], "serre")


def test_density_scan_mod_ell():
    rep = sieve.density_scan([5], "mod-ell", certify.CertParams(prime_bound=300, l_max=5), ell=5)
    assert rep.rows[0].total == 118
    assert 0 <= rep.rows[0].failures < 118


def test_density_scan_totals_match_box():
    rep = sieve.density_scan([10, 15], "disc-square")
    assert [r.total for r in rep.rows] == [sieve.box_count(10), sieve.box_count(15)]


def test_omega_report():
    rows = sieve.omega_report([101, 199])
    assert len(rows) == 6
    for r in rows:
        assert math.isclose(r.frequency, r.observed / r.p**2)
        assert r.within_tolerance and not r.hard_fail
    # frequencies at one p sum to 1 - 1/p
    s = sum(r.frequency for r in rows if r.p == 101)
    assert math.isclose(s, 1 - 1 / 101)
    # predictions are (1/6, 1/2, 1/3) from the group engine
    preds = {tuple(r.pattern): r.predicted for r in rows if r.p == 101}
    assert preds == {(1, 1, 1): 1 / 6, (2, 1): 1 / 2, (3,): 1 / 3}


def test_omega_report_reproducible():
    a = [r.to_json() for r in sieve.omega_report([101])]
    b = [r.to_json() for r in sieve.omega_report([101])]
    assert a == b


def test_sieve_bound_examples():
    L, _ = sieve.sieve_bound({}, 5)
    assert L == 1
    L, _ = sieve.sieve_bound({2: Fraction(1, 2)}, 2)
    assert L == 2
    L, _ = sieve.sieve_bound({2: Fraction(1, 2), 3: Fraction(1, 2)}, 6)
    assert L == 4
    # exact rational arithmetic
    L, _ = sieve.sieve_bound({2: Fraction(1, 3), 5: Fraction(2, 7)}, 10)
    assert L == 1 + Fraction(1, 2) + Fraction(2, 5) + Fraction(1, 5)


def test_sieve_bound_monotone_in_q():
    omega = {2: Fraction(1, 2), 3: Fraction(1, 3), 5: Fraction(1, 5)}
    values = [sieve.sieve_bound(omega, q)[0] for q in (1, 2, 4, 8, 16, 32)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_sieve_bound_rejects_omega_one():
    with pytest.raises(InvalidInputError):
        sieve.sieve_bound({2: Fraction(1)}, 4)


def test_sieve_bound_with_x():
    L, bound = sieve.sieve_bound({2: Fraction(1, 2)}, 2, x=10.0, degree=1, rank=2)
    assert bound == (10.0**2 + 2**4) / 2


# ---------------------------------------------------------------------------
# CLI


def run_cli(*args):
    from io import StringIO

    import contextlib

    buf = StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(list(args))
    return code, buf.getvalue()


def test_cli_sieve_bound():
    code, out = run_cli("sieve-bound", "--Q", "6", "--omega", "2=1/2,3=1/2")
    assert code == 0
    data = json.loads(out)
    assert data["rows"][0]["L"] == "4"
    assert data["tool_version"]


def test_cli_certify_json():
    code, out = run_cli("certify", "--curve", "1,1", "--l-max", "13", "--prime-bound", "1000")
    assert code == 0
    data = json.loads(out)
    assert data["final"]["status"] == "certified"
    assert data["curve"] == [1, 1]


def test_cli_certify_over_field():
    code, out = run_cli(
        "certify",
        "--curve",
        "[0,1296],[0,0,11664]",
        "--field",
        "f=[1,1,0,1]",
        "--l-max",
        "7",
        "--prime-bound",
        "500",
    )
    assert code == 0
    data = json.loads(out)
    assert data["conditions"]["d"]["status"] == "certified"


def test_cli_group_audit():
    code, out = run_cli("group-audit", "--m", "4", "--trials", "50")
    assert code == 0
    data = json.loads(out)
    assert data["ok"] is True
    assert all(not r["counterexamples"] for r in data["rows"])


def test_cli_omega_csv(tmp_path):
    out_file = tmp_path / "omega.csv"
    code, _ = run_cli("omega-dist", "--p", "101", "--format", "csv", "--out", str(out_file))
    assert code == 0
    text = out_file.read_text()
    assert "predicted" in text.splitlines()[0]
    assert len(text.splitlines()) == 4


def test_cli_usage_error_exit_2():
    proc = subprocess.run(
        [sys.executable, "-m", "galmax.cli", "certify", "--curve", "bogus"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2


def test_cli_resource_cap_exit_3():
    proc = subprocess.run(
        [sys.executable, "-m", "galmax.cli", "serre-scan", "--x", "5000", "--check", "disc-square"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 3


def test_cli_weil_count():
    code, out = run_cli("weil-count", "--p", "13,29", "--r", "2")
    data = json.loads(out)
    assert [row["count"] for row in data["rows"]] == [78, 406]
