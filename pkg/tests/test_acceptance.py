"""Acceptance criteria, one test each, on the built-in meshes with seed 42.

Every test prints a ``PASS``/``FAIL`` line naming its criterion and the worst
row of the underlying verify suite.
"""

import pytest
from click.testing import CliRunner

from cauchylens import verify
from cauchylens.cli import main

SEED = 42

CRITERIA = {
    1: ("green", "exact discrete Green identity"),
    2: ("hodge", "Hodge decompositions and locally constant dimension"),
    3: ("bvp", "Dirichlet/Neumann solvers and ln r convergence"),
    4: ("chh", "CHH map is a symplectomorphism"),
    5: ("radical", "radical equals interior gauge"),
    6: ("degeneracy", "flux observable degeneracy"),
    7: ("weyl", "Weyl engine relations"),
    8: ("states", "quasi-free states"),
    9: ("relativize", "relativisation and quantum gauge fixing"),
    10: ("superselection", "flux superselection sectors"),
    11: ("truncation", "truncated relativisation"),
    12: ("gluing", "gluing of two lenses"),
    13: ("determinism", "bitwise-identical reports"),
}


@pytest.fixture(scope="module")
def ctx():
    return verify.Context(seed=SEED)


def _report(capsys, number, rows, extra=""):
    label = CRITERIA[number][1]
    failed = [r for r in rows if not r.passed]
    status = "PASS" if rows and not failed else "FAIL"
    detail = "; ".join(f"{r.case}/{r.quantity}={r.value:.3e} (tol {r.tolerance:.1e})" for r in failed) or f"{len(rows)} checks"
    with capsys.disabled():
        print(f"\n{status} criterion {number}: {label}: {detail}{extra}")
    return status == "PASS"


@pytest.mark.parametrize("number", [n for n in CRITERIA if n != 13])
def test_criterion(number, ctx, capsys):
    suite = CRITERIA[number][0]
    rows = verify.run_suites([suite], ctx)
    assert _report(capsys, number, rows), [r for r in rows if not r.passed]


def test_criterion_13_determinism(ctx, capsys):
    rows = verify.run_suites(["determinism"], ctx)
    runner = CliRunner()
    args = ["verify", "--suite", "green,chh,weyl,states", "--seed", str(SEED)]
    first, second = runner.invoke(main, args), runner.invoke(main, args)
    same = first.exit_code == second.exit_code == 0 and first.stdout_bytes == second.stdout_bytes
    rows.append(verify.below("determinism", "cli", "byte_differences", 0 if same else 1, 0))
    assert _report(capsys, 13, rows)
