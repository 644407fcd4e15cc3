# SCRIPT-TESTS: 2

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: optimal_clusters({1: -500.0, 2: -400.0, 3: -395.0}, 2, 100) == 2)
_script_check(2, lambda: optimal_clusters({1: -100.0, 2: -99.0}, 1, 50) == 1)
