# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: one_hot_interaction(1, False, 3) == [0, 1, 0, 0, 0, 0])
_script_check(2, lambda: one_hot_interaction(1, True, 3) == [0, 0, 0, 0, 1, 0])
_script_check(3, lambda: sum(one_hot_interaction(0, True, 5)) == 1)
