# SCRIPT-TESTS: 2

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: kmeans_step([[0, 0], [0, 2], [10, 0], [10, 2]], [[1, 1], [9, 1]]) == [[0.0, 1.0], [10.0, 1.0]])
_script_check(2, lambda: kmeans_step([[0, 0], [1, 0]], [[0, 0], [100, 100]]) == [[0.5, 0.0], [100, 100]])
