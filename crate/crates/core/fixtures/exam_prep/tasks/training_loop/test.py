# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: all(abs(u - v) < 1e-3 for u, v in zip(train_linear([0, 1, 2, 3], [1, 3, 5, 7], 0.05, 2000), (2.0, 1.0))))
_script_check(2, lambda: train_linear([1, 2], [3, 4], 0.1, 0) == (0.0, 0.0))
_script_check(3, lambda: abs(train_linear([1.0], [2.0], 0.25, 1)[0] - 1.0) < 1e-12)
