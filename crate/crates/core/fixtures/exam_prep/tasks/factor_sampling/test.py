# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: sample_from_factors([2.0], [1.0, 1.0], [[1.0, 0.5]]) == [3.0, 2.0])
_script_check(2, lambda: sample_from_factors([1.0, -1.0], [0.0, 0.0, 0.0], [[1, 0, 0], [0, 1, 1]]) == [1.0, -1.0, -1.0])
_script_check(3, lambda: sample_from_factors([], [4.0], []) == [4.0])
