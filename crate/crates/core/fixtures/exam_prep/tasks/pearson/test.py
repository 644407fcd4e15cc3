# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(pearson([1, 2, 3], [2, 4, 6]) - 1.0) < 1e-12)
_script_check(2, lambda: abs(pearson([1, 2, 3], [3, 2, 1]) + 1.0) < 1e-12)
_script_check(3, lambda: abs(pearson([1, 2, 3, 4], [1, 3, 2, 4]) - 0.8) < 1e-12)
