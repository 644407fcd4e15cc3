# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(ndcg_at_k([3, 2, 1], 3) - 1.0) < 1e-12)
_script_check(2, lambda: abs(ndcg_at_k([0, 1], 2) - (1 / __import__('math').log2(3))) < 1e-12)
_script_check(3, lambda: ndcg_at_k([0, 0, 0], 2) == 0.0)
