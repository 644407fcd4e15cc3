# SCRIPT-TESTS: 2

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(ward_distance([[0, 0]], [[2, 0]]) - 2.0) < 1e-12)
_script_check(2, lambda: abs(ward_distance([[0, 0], [0, 2]], [[3, 1]]) - 6.0) < 1e-12)
