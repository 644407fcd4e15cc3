# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(icc(0.0, 1.0, 0.0) - 0.5) < 1e-12)
_script_check(2, lambda: abs(icc(1.0, 2.0, 0.5) - 1 / (1 + 2.718281828459045 ** -1)) < 1e-12)
_script_check(3, lambda: icc(-3, 1.5, 1) < 0.01)
