# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(prob_sum(2, 7) - 6 / 36) < 1e-12)
_script_check(2, lambda: abs(prob_sum(3, 10) - 27 / 216) < 1e-12)
_script_check(3, lambda: prob_sum(2, 13) == 0)
