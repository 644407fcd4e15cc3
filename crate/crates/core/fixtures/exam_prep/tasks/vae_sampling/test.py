# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: reparameterize([1.0, 0.0], [0.0, 0.0], [0.5, -1.0]) == [1.5, -1.0])
_script_check(2, lambda: abs(reparameterize([0.0], [2 * __import__('math').log(3)], [1.0])[0] - 3.0) < 1e-12)
_script_check(3, lambda: kl_divergence([0.0, 0.0], [0.0, 0.0]) == 0.0 and abs(kl_divergence([1.0], [0.0]) - 0.5) < 1e-12)
