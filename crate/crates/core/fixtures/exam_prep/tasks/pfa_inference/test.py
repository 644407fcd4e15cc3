# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(pfa_probability([(0.0, 0.2, -0.1)], [(2, 1)]) - 1 / (1 + 2.718281828459045 ** -0.3)) < 1e-12)
_script_check(2, lambda: pfa_probability([(0, 0, 0)], [(0, 0)]) == 0.5)
_script_check(3, lambda: abs(pfa_probability([(0.15, 0, 0), (0.15, 0, 0)], [(5, 5), (1, 1)]) - 1 / (1 + 2.718281828459045 ** -0.3)) < 1e-12)
