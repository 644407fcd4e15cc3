# SCRIPT-TESTS: 2

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(pooled_variance([1, 2, 3], [4, 5, 6]) - 1.0) < 1e-12)
_script_check(2, lambda: abs(pooled_variance([0, 2], [0, 4, 8]) - 34 / 3) < 1e-12)
