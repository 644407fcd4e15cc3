# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(rating_similarity({'a': 1, 'b': 2, 'c': 3}, {'a': 2, 'b': 4, 'c': 6, 'd': 1}) - 1.0) < 1e-12)
_script_check(2, lambda: rating_similarity({'a': 1}, {'a': 5}) == 0.0)
_script_check(3, lambda: rating_similarity({'a': 3, 'b': 3}, {'a': 1, 'b': 5}) == 0.0)
