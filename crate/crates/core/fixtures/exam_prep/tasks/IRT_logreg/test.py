# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(rasch_log_likelihood([0.0], [0.0], [(0, 0, True), (0, 0, False)]) - 2 * __import__('math').log(0.5)) < 1e-12)
_script_check(2, lambda: abs(rasch_log_likelihood([1.0, -1.0], [0.0], [(0, 0, True), (1, 0, True)]) - (__import__('math').log(1 / (1 + __import__('math').exp(-1))) + __import__('math').log(1 / (1 + __import__('math').exp(1))))) < 1e-12)
_script_check(3, lambda: rasch_log_likelihood([0.0], [0.0], []) == 0.0)
