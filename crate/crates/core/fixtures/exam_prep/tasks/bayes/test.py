# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(posterior(0.01, 0.9, 0.05) - 0.009 / (0.009 + 0.0495)) < 1e-9)
_script_check(2, lambda: abs(posterior(0.5, 0.8, 0.2) - 0.8) < 1e-9)
_script_check(3, lambda: abs(posterior(0.2, 1.0, 0.0) - 1.0) < 1e-9)
