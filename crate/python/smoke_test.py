"""Smoke test for the propvote_py extension.

Build with `maturin develop` inside crates/py, or copy the compiled
library next to this script as propvote_py.so.
"""

import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import propvote_py as pv


def main():
    e = pv.Election.fixture("example21")
    t = pv.phragmen(e)
    assert sorted(t["elected"]) == [0, 1, 3, 4], t
    assert t["times"][0] == Fraction(15, 48)
    assert t["times"][3] - t["times"][2] == Fraction(81, 256)

    x = pv.rule_x(pv.Election.fixture("example22"))
    assert x["q_values"] == [Fraction(15, 48), Fraction(15, 48), Fraction(15, 40), Fraction(1)], x

    old = pv.Election.fixture("phragmen1899")
    assert pv.pav_score(old, pv.pav_winners(old)[0]) == 7850

    intro = pv.Election.fixture("intro")
    a = [0, 1, 2, 6, 7, 9, 10, 12, 13, 3, 4, 5]
    b = [0, 1, 2, 6, 7, 8, 9, 10, 11, 12, 13, 14]
    price, payments = pv.check_priceable(intro, a)
    assert all(sum(p for (v, _), p in payments.items() if v == i) <= 1 for i in range(intro.num_voters))
    assert pv.check_priceable(intro, b) is None
    coalition, _ = pv.check_core(intro, b)
    assert coalition == [0, 1, 2], coalition

    e = pv.Election.parse(e.to_text())
    assert e.committee_size == 4
    assert pv.Election(3, 1, [[0], [1, 2]]).welfare([2]) == [0, 1]

    lam = pv.gen_laminar(11, 3, 12, 4)
    assert pv.is_laminar(lam)
    assert pv.check_laminar_proportional(lam, pv.phragmen(lam)["elected"])

    party, integral = pv.gen_party_list([4, 2], [3, 3], 3)
    assert integral and pv.dhondt([4, 2], 3) == [2, 1]
    assert pv.check_ejr(party, pv.rule_x(party)["elected"]) is None

    try:
        pv.pav_winners(old, budget=3)
    except pv.BudgetExceeded:
        pass
    else:
        raise AssertionError("budget not enforced")
    try:
        pv.Election.parse("2 1\n")
    except ValueError:
        pass
    else:
        raise AssertionError("bad header accepted")

    print("smoke test OK")


if __name__ == "__main__":
    main()
