"""Every acceptance criterion at its stated tolerance, one report line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the PASS/FAIL lines.
"""

import numpy as np
import pytest

from jacobi_capacity import acceptance
from jacobi_capacity.logdet import logdet_ldl


@pytest.mark.parametrize("number,name", [(n, name) for n, name, _ in acceptance.CHECKS],
                         ids=[f"criterion_{n:02d}" for n, _, _ in acceptance.CHECKS])
def test_criterion(number, name):
    res = acceptance.run_check(number)
    print(res.line())
    assert res.passed, res.detail


def test_selftest_report_is_reproducible():
    first = acceptance.run_check(8).line()
    assert acceptance.run_check(8).line() == first


def test_corrupted_ldl_is_caught():
    def mutated(G):
        diag, off = G.diag, G.offdiag
        d = np.empty_like(diag)
        d[..., 0] = diag[..., 0]
        for m in range(1, diag.shape[-1]):
            # |off|^2 replaced by |off|
            d[..., m] = diag[..., m] - np.abs(off[..., m - 1]) / d[..., m - 1]
        return float(np.sum(np.log(d), axis=-1)) if d.ndim == 1 else np.sum(np.log(d), axis=-1)

    ok, detail = acceptance.check_determinants(ldl=mutated)
    assert not ok, detail
    assert acceptance.check_determinants(ldl=logdet_ldl)[0]
