# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: all(abs(u - v) < 1e-9 for u, v in zip(first_component([(0, 0), (1, 1), (2, 2), (3, 3)]), (2 ** -0.5, 2 ** -0.5))))
_script_check(2, lambda: all(abs(u - v) < 1e-9 for u, v in zip(first_component([(0, 0), (4, 0), (2, 1), (2, -1)]), (1.0, 0.0))))
_script_check(3, lambda: all(abs(u - v) < 1e-9 for u, v in zip(first_component([(0, 0), (1, -1), (2, -2)]), (2 ** -0.5, -(2 ** -0.5)))))
