# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: abs(bkt_update(0.2, 0.1, 0.1, 0.2, True) - 0.5764705882352941) < 1e-9)
_script_check(2, lambda: abs(bkt_update(0.5, 0.1, 0.1, 0.2, False) - 0.2) < 1e-9)
_script_check(3, lambda: bkt_update(1.0, 0.3, 0.1, 0.2, True) == 1.0)
