def components_needed(eigenvalues, coverage):
    total = sum(eigenvalues)
    acc = 0.0
    for k, ev in enumerate(sorted(eigenvalues, reverse=True), start=1):
        acc += ev
        if acc / total >= coverage - 1e-12:
            return k
    return len(eigenvalues)
