# SCRIPT-TESTS: 2

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: most_likely_next({'a': {'a': 0.2, 'b': 0.8}, 'b': {'a': 1.0}}, 'a') == 'b')
_script_check(2, lambda: most_likely_next({'x': {'z': 0.5, 'y': 0.5}}, 'x') == 'y')
