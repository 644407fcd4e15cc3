# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: components_needed([1, 5, 4], 0.5) == 1)
_script_check(2, lambda: components_needed([1, 5, 4], 0.9) == 2)
_script_check(3, lambda: components_needed([1, 1, 1, 1], 1.0) == 4)
