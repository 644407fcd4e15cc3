# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: are_independent({(0, 0): 0.06, (0, 1): 0.14, (1, 0): 0.24, (1, 1): 0.56}) is True)
_script_check(2, lambda: are_independent({(0, 0): 0.5, (0, 1): 0.0, (1, 0): 0.0, (1, 1): 0.5}) is False)
_script_check(3, lambda: are_independent({('x', 'y'): 1.0}) is True)
