# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: signed_rank_statistic([5, 6, 7], [1, 1, 1]) == 6)
_script_check(2, lambda: signed_rank_statistic([1, 2, 3, 4], [2, 1, 3, 6]) == 1.5)
_script_check(3, lambda: signed_rank_statistic([1, 1], [1, 1]) == 0)
