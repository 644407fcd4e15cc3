def rating_similarity(a, b):
    common = sorted(set(a) & set(b))
    if len(common) < 2:
        return 0.0
    xs = [a[i] for i in common]
    ys = [b[i] for i in common]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return 0.0
    return sxy / (sxx * syy) ** 0.5
