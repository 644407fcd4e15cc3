# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(cosine_similarity({'x': 1, 'y': 0}, {'x': 2}) - 1.0) < 1e-12)
_script_check(2, lambda: abs(cosine_similarity({'x': 1}, {'y': 1})) < 1e-12)
_script_check(3, lambda: abs(cosine_similarity({'x': 3, 'y': 4}, {'x': 4, 'y': 3}) - 0.96) < 1e-12)
