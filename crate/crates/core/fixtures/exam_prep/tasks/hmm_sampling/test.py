# SCRIPT-TESTS: 3

def _script_check(index, check):
    try:
        ok = bool(check())
    except Exception:
        ok = False
    print("SCRIPT-TEST %d %s" % (index, "PASS" if ok else "FAIL"))

_script_check(1, lambda: sample_hmm([1, 0], [[0, 1], [1, 0]], [[1, 0], [0, 1]], 4, 0) == ([0, 1, 0, 1], [0, 1, 0, 1]))
_script_check(2, lambda: len(sample_hmm([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]], 7, 3)[1]) == 7)
_script_check(3, lambda: abs(sum(sample_hmm([0.3, 0.7], [[1, 0], [0, 1]], [[1, 0], [0, 1]], 1, s)[0][0] for s in range(2000)) / 2000 - 0.7) < 0.05)
